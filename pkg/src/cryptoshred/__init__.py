"""cryptoshred: cryptographic file destruction with verifiable key erasure.

Files are destroyed by encrypting them in place under a per-file ephemeral
key, appending the ephemeral public key, and destroying every private key.
The package also ships the implementation-security instruments used to audit
the tool itself: memory zeroization checks, an entropy validation battery,
timing profiles, and build-integrity manifests.
"""

from . import bench, entropy, implsec, primitives, protocol, sosemanuk
from .entropy import (
    EntropyCascade,
    HashDrbg,
    RandReport,
    cascade_random,
    os_entropy,
    rand_check,
)
from .errors import CryptoShredError
from .implsec import (
    Manifest,
    MemReport,
    TimingReport,
    VerifyResult,
    memlife_audit,
    obsguard_profile,
    verihash_build,
    verihash_tree,
    verihash_verify,
)
from .primitives import base_mul, clamp, sha256, shared
from .protocol import (
    ENCRYPTED_SUFFIX,
    ErasedFileRecord,
    ErasureJob,
    JobReport,
    derive_session_key,
    encrypt_file,
    escrow_decrypt,
    gen_keypair,
    run_job,
    secure_erase,
    traverse,
)
from .sosemanuk import KeyContext, RunState, init, schedule, xor_stream

__version__ = "0.1.0"


def warm_kernels() -> None:
    """Compile the JIT kernels ahead of timed work (idempotent, cached)."""
    primitives.warm_kernels()
    sosemanuk.warm_kernels()
