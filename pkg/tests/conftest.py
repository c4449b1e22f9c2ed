import pytest

import cryptoshred


@pytest.fixture(scope="session", autouse=True)
def warm_jit_kernels():
    # compile the hash/keystream kernels once so timed tests never pay for JIT
    cryptoshred.warm_kernels()
