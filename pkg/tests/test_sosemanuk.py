"""Stream cipher conformance and state-machine tests.

The frozen keystream vectors were computed and cross-checked with a second,
independently written implementation of the same cipher before being frozen
here; the test asserts our output against the frozen octets, not against any
live second implementation.
"""

import os
import random

import pytest

from cryptoshred import sosemanuk
from cryptoshred.entropy import rand_check
from cryptoshred.errors import InvalidLengthError

KEYSTREAM_VECTORS = [
    (
        "8000000000000000000000000000000000000000000000000000000000000000",
        "00000000000000000000000000000000",
        "1782fabff497a0e89e16e1bcf22f0fe8aa8c566d293aa35b2425e4f26e31c3e7"
        "701c08a0d614af3d3861a7dff7d6a38a0efe84a29fadf68d390a3d15b75c972d"
        "ebdb1710317e9c4e93f3957f2ac8448fa00147ff3e7cc2347d4f245d67f81fe0"
        "7a03e7bfbb6e6e44e1984ede7592bc6e97dfc1dcdb3101e6c97f26cab782e590"
        "98a2b5a2d123f062a5b85fa940508233e1edc8dbec0619a059ce1151a8a23825",
    ),
    (
        "0000000000000000000000000000000000000000000000000000000000000000",
        "00000000000000000000000000000000",
        "494e66132da70c4797448e14af376091352ac66e108621e9e175551f05625f8b"
        "746ef28310acda67c0cc0121a2196dd43544570e73fc80700e9cd307a2cf704f"
        "0a4c2afac966d71629f8a129caf6a3c062417085b6e6ff45a31d12b79f9d12ad"
        "6ba0a9df8ff861c227447f749e27c1462d529cf694a35d6ac5218ad348d68a3c"
        "864380030efbea34c11efa3d13334b56b07f47b440d5b1f743064a0a15eb00f6",
    ),
    (
        "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
        "000102030405060708090a0b0c0d0e0f",
        "c6b9212321b1ec548458d6e205f106c187c6be52d0722fa576b88e4d46cd5478"
        "abfc3eab7781e4b7fce0ada870a50f387b014a1b51e4c79a24314a92e6c3938b"
        "da6a101234a79d62fa3a109afd525848cbd41fe61c5915200589d40c3c74f826"
        "0127e88ee54a2e75f2b26ac82995d587e4e835bfbe67316b104608d5c14c3b32"
        "662afdb7e1c16271808d54a8b27070b46e01d42a5d828011c2fdc4d552ae8fd9",
    ),
    (
        "0053a6f94c9ff24598eb3e91e4378add3083d6297ccf2275c81b6ec11467ba0d",
        "0d74db42a91077de45ac137ae148af16",
        "55eb8d174c2e0351e5a53c90e84740eb0f5a24aafec8e0c9f9d2ce48b2adb0a3"
        "4d2e8c4e016102607368ffa43a0f91550706e3548ad9e5ea15a53eb6f0ede9dc"
        "8a633f53b68099ef141163aa59217aae8eccf3cfd019c9323e7aef9a3e8cc128"
        "c97cea8a5550b79ffbb57c8e12bf20b58da05fc98c0be9e1c3deb0831a8d93b2"
        "afa26aed9f5922041eeb1073f2d807ffa1d605dca9f6a1daf07bb8df1cb19adb",
    ),
]


def fresh_state(key=b"\x07" * 32, iv=b"\x0b" * 16):
    return sosemanuk.init(sosemanuk.schedule(key), iv)


class TestSchedule:
    def test_deterministic(self):
        a = sosemanuk.schedule(bytes(32))
        b = sosemanuk.schedule(bytes(32))
        assert a.round_keys == b.round_keys
        assert len(a.round_keys) == 100

    def test_key_length_enforced(self):
        with pytest.raises(InvalidLengthError):
            sosemanuk.schedule(b"\x00" * 16)
        with pytest.raises(InvalidLengthError):
            sosemanuk.schedule(b"\x00" * 33)

    def test_zeroize(self):
        kc = sosemanuk.schedule(os.urandom(32))
        kc.zeroize()
        assert all(w == 0 for w in kc.round_keys)


class TestInit:
    def test_iv_length_enforced(self):
        kc = sosemanuk.schedule(bytes(32))
        with pytest.raises(InvalidLengthError):
            sosemanuk.init(kc, b"\x00" * 8)

    def test_same_key_iv_same_keystream(self):
        key, iv = os.urandom(32), os.urandom(16)
        a = sosemanuk.xor_stream(fresh_state(key, iv), b"\x00" * 1024)
        b = sosemanuk.xor_stream(fresh_state(key, iv), b"\x00" * 1024)
        assert a == b

    def test_distinct_ivs_diverge_within_first_granule(self):
        key = os.urandom(32)
        a = sosemanuk.keystream_bytes(key, b"\x00" * 16, sosemanuk.GRANULE)
        b = sosemanuk.keystream_bytes(key, b"\x01" + b"\x00" * 15, sosemanuk.GRANULE)
        assert a != b


class TestKeystreamVectors:
    @pytest.mark.parametrize("key_hex,iv_hex,ks_hex", KEYSTREAM_VECTORS)
    def test_frozen_vectors(self, key_hex, iv_hex, ks_hex):
        expect = bytes.fromhex(ks_hex)
        got = sosemanuk.keystream_bytes(
            bytes.fromhex(key_hex), bytes.fromhex(iv_hex), len(expect))
        assert got == expect

    @pytest.mark.parametrize("key_hex,iv_hex,ks_hex", KEYSTREAM_VECTORS)
    def test_zero_plaintext_equals_keystream(self, key_hex, iv_hex, ks_hex):
        expect = bytes.fromhex(ks_hex)
        state = sosemanuk.init(sosemanuk.schedule(bytes.fromhex(key_hex)),
                               bytes.fromhex(iv_hex))
        assert sosemanuk.xor_stream(state, bytes(len(expect))) == expect


class TestXorStream:
    def test_empty_input(self):
        state = fresh_state()
        before = (state.lfsr.copy(), state.fsm.copy(), state.idx)
        assert sosemanuk.xor_stream(state, b"") == b""
        assert (state.lfsr == before[0]).all()
        assert (state.fsm == before[1]).all()
        assert state.idx == before[2]

    def test_involution_small(self):
        rng = random.Random(3)
        for _ in range(50):
            key, iv = rng.randbytes(32), rng.randbytes(16)
            msg = rng.randbytes(rng.randrange(0, 500))
            ct = sosemanuk.xor_stream(fresh_state(key, iv), msg)
            assert sosemanuk.xor_stream(fresh_state(key, iv), ct) == msg

    def test_involution_10mib(self):
        key, iv = os.urandom(32), os.urandom(16)
        msg = os.urandom(10 * 2**20)
        ct = sosemanuk.xor_stream(fresh_state(key, iv), msg)
        assert ct != msg
        assert sosemanuk.xor_stream(fresh_state(key, iv), ct) == msg

    def test_chunked_equals_single_call(self):
        rng = random.Random(9)
        key, iv = rng.randbytes(32), rng.randbytes(16)
        msg = rng.randbytes(4096)
        whole = sosemanuk.xor_stream(fresh_state(key, iv), msg)
        for _ in range(10):
            state = fresh_state(key, iv)
            parts = []
            pos = 0
            while pos < len(msg):
                step = rng.randrange(1, 200)
                parts.append(sosemanuk.xor_stream(state, msg[pos:pos + step]))
                pos += step
            assert b"".join(parts) == whole

    def test_cursor_stays_below_granule(self):
        rng = random.Random(17)
        state = fresh_state()
        for _ in range(200):
            sosemanuk.xor_stream(state, b"\x00" * rng.randrange(0, 300))
            assert 0 <= state.idx < sosemanuk.GRANULE

    def test_keystream_statistics(self):
        ks = sosemanuk.keystream_bytes(os.urandom(32), os.urandom(16), 1 << 20)
        report = rand_check(ks)
        assert report.monobit_p >= 0.01
        assert report.runs_p >= 0.01

    def test_run_state_zeroize(self):
        state = fresh_state()
        sosemanuk.xor_stream(state, b"\x00" * 100)
        state.zeroize()
        assert not state.lfsr.any()
        assert not state.fsm.any()
        assert not state.keystream_buf.any()
        assert state.idx == 0
