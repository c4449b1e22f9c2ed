"""Destruction protocol tests: key lifecycle, per-file format, traversal,
erasure, escrow inverse, and the job runner."""

import os
import random

import numpy as np
import pytest

from cryptoshred import primitives, protocol, sosemanuk
from cryptoshred.entropy import EntropyCascade, HashDrbg
from cryptoshred.errors import (
    ContributoryBehaviorError,
    InterlockError,
    MalformedCiphertextError,
    PartialWriteError,
)
from cryptoshred.protocol import (
    ENCRYPTED_SUFFIX,
    ErasureJob,
    encrypt_file,
    escrow_decrypt,
    gen_keypair,
    is_deny_listed,
    iter_tree,
    run_job,
    secure_erase,
    traverse,
)

ALICE_PRIV = bytes.fromhex("77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a")
BOB_PRIV = bytes.fromhex("5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb")
BOB_PUB = bytes.fromhex("de9edb7d7b7dc1b4d35b61c2ece435373f8343c85b78674dadfc7e146f882b4f")
SHARED = bytes.fromhex("4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742")


@pytest.fixture()
def rng():
    return EntropyCascade()


def make_job(root, **kw):
    kw.setdefault("deny_list", ())
    return ErasureJob(root=str(root), **kw)


class TestSecureErase:
    def test_bytearray(self):
        buf = bytearray(b"\xff" * 32)
        secure_erase(buf)
        assert buf == bytearray(32)

    def test_zero_length(self):
        buf = bytearray()
        secure_erase(buf)
        assert buf == bytearray()

    def test_list_and_numpy_and_memoryview(self):
        xs = [1, 2, 3]
        secure_erase(xs)
        assert xs == [0, 0, 0]
        arr = np.arange(5, dtype=np.int64)
        secure_erase(arr)
        assert not arr.any()
        backing = bytearray(b"\x11" * 8)
        secure_erase(memoryview(backing))
        assert backing == bytearray(8)

    def test_unsupported_type(self):
        with pytest.raises(TypeError):
            secure_erase("immutable")


class TestKeypair:
    def test_clamped_and_consistent(self, rng):
        pair = gen_keypair(rng)
        assert primitives.is_clamped(bytes(pair.private))
        assert primitives.base_mul(bytes(pair.private)) == bytes(pair.public)

    def test_distinct_draws(self, rng):
        seen = {bytes(gen_keypair(rng).private) for _ in range(100)}
        assert len(seen) == 100

    def test_no_scalar_collisions_at_scale(self, rng):
        # the exact private-key material gen_keypair consumes, at a draw count
        # where any generator state reuse would show up
        scalars = {primitives.clamp(rng.random_bytes(32)) for _ in range(10_000)}
        assert len(scalars) == 10_000

    def test_private_key_comes_from_cascade(self):
        # seam: with a known DRBG seed and a recorded OS leg, the private key
        # must equal clamp(os XOR drbg) - never the raw OS bytes
        seed = b"\x66" * 48
        recorded = []

        def recording_source(n):
            data = os.urandom(n)
            recorded.append(data)
            return data

        cascade = EntropyCascade(os_source=recording_source, drbg=HashDrbg(seed))
        pair = gen_keypair(cascade)
        drbg_leg = HashDrbg(seed).generate(32)
        os_leg = recorded[-1]
        expected = primitives.clamp(bytes(a ^ b for a, b in zip(os_leg, drbg_leg)))
        assert bytes(pair.private) == expected
        assert bytes(pair.private) != primitives.clamp(os_leg)

    def test_zeroize(self, rng):
        pair = gen_keypair(rng)
        pair.zeroize()
        assert bytes(pair.private) == bytes(32)
        assert bytes(pair.public) == bytes(32)


class TestSessionKey:
    def test_composes_curve_and_hash(self):
        key = protocol.derive_session_key(primitives.clamp(ALICE_PRIV), BOB_PUB)
        assert bytes(key.data) == primitives.sha256(SHARED)

    def test_symmetric(self):
        a_pub = primitives.base_mul(primitives.clamp(ALICE_PRIV))
        k1 = protocol.derive_session_key(primitives.clamp(ALICE_PRIV), BOB_PUB)
        k2 = protocol.derive_session_key(primitives.clamp(BOB_PRIV), a_pub)
        assert bytes(k1.data) == bytes(k2.data)

    def test_low_order_peer_rejected(self):
        with pytest.raises(ContributoryBehaviorError):
            protocol.derive_session_key(primitives.clamp(ALICE_PRIV), bytes(32))

    def test_iv_is_hash_prefix_of_public(self):
        pub = os.urandom(32)
        assert protocol.derive_iv(pub) == primitives.sha256(pub)[:16]


class TestEncryptFile:
    def test_zero_byte_file(self, tmp_path, rng):
        path = tmp_path / "empty.bin"
        path.write_bytes(b"")
        master = gen_keypair(rng)
        rec = encrypt_file(str(path), bytes(master.public), make_job(tmp_path), rng)
        assert rec.blocks_processed == 0
        assert rec.final_path == str(path) + ENCRYPTED_SUFFIX
        assert os.path.getsize(rec.final_path) == 32
        assert not path.exists()

    def test_one_kib_file_round_trip(self, tmp_path, rng):
        payload = os.urandom(1024)
        path = tmp_path / "doc.bin"
        path.write_bytes(payload)
        master = gen_keypair(rng)
        master_priv = bytes(master.private)
        rec = encrypt_file(str(path), bytes(master.public), make_job(tmp_path), rng)
        assert os.path.getsize(rec.final_path) == 1056
        assert escrow_decrypt(rec.final_path, primitives.clamp(master_priv)) == payload

    def test_block_count_25mib_in_10mib_blocks(self, tmp_path, rng):
        path = tmp_path / "big.bin"
        path.write_bytes(b"\x00" * (25 * 2**20))
        master = gen_keypair(rng)
        rec = encrypt_file(str(path), bytes(master.public), make_job(tmp_path), rng)
        assert rec.blocks_processed == 3
        assert rec.original_len == 25 * 2**20

    def test_zero_plaintext_body_is_raw_keystream(self, tmp_path, rng):
        path = tmp_path / "zeros.bin"
        path.write_bytes(b"\x00" * 4096)
        master = gen_keypair(rng)
        master_priv = primitives.clamp(bytes(master.private))
        rec = encrypt_file(str(path), bytes(master.public), make_job(tmp_path), rng)
        blob = open(rec.final_path, "rb").read()
        body, trailer = blob[:-32], blob[-32:]
        assert trailer == rec.ephemeral_public
        session = primitives.sha256(primitives.shared(master_priv, trailer))
        expected = sosemanuk.keystream_bytes(session, protocol.derive_iv(trailer), 4096)
        assert body == expected

    def test_low_order_master_leaves_file_untouched(self, tmp_path, rng):
        payload = b"do not lose me"
        path = tmp_path / "keep.bin"
        path.write_bytes(payload)
        with pytest.raises(ContributoryBehaviorError):
            encrypt_file(str(path), bytes(32), make_job(tmp_path), rng)
        assert path.read_bytes() == payload  # not renamed, not rewritten

    def test_partial_write_flagged(self, tmp_path, rng, monkeypatch):
        path = tmp_path / "twoblocks.bin"
        path.write_bytes(os.urandom(2048))
        calls = {"n": 0}
        real = sosemanuk.xor_stream

        def flaky(state, data):
            calls["n"] += 1
            if calls["n"] == 2:
                raise OSError("disk went away")
            return real(state, data)

        monkeypatch.setattr(protocol.sosemanuk, "xor_stream", flaky)
        master = gen_keypair(rng)
        with pytest.raises(PartialWriteError) as info:
            encrypt_file(str(path), bytes(master.public),
                         make_job(tmp_path, block_size=1024), rng)
        rec = info.value.record
        assert rec.status == "corrupt-partial"
        assert rec.blocks_processed == 1
        assert path.exists()  # never renamed

    def test_fresh_trailers_across_files(self, tmp_path, rng):
        master = gen_keypair(rng)
        trailers = set()
        for i in range(50):
            path = tmp_path / f"f{i}.bin"
            path.write_bytes(b"x")
            rec = encrypt_file(str(path), bytes(master.public), make_job(tmp_path), rng)
            trailers.add(rec.ephemeral_public)
        assert len(trailers) == 50


class TestEscrowDecrypt:
    def test_truncated_ciphertext(self, tmp_path):
        path = tmp_path / ("short" + ENCRYPTED_SUFFIX)
        path.write_bytes(b"\x00" * 20)
        with pytest.raises(MalformedCiphertextError):
            escrow_decrypt(str(path), primitives.clamp(ALICE_PRIV))

    def test_suffix_required(self, tmp_path):
        path = tmp_path / "plain.bin"
        path.write_bytes(b"\x00" * 64)
        with pytest.raises(MalformedCiphertextError):
            escrow_decrypt(str(path), primitives.clamp(ALICE_PRIV))

    def test_wrong_key_gives_garbage(self, tmp_path, rng):
        payload = os.urandom(4096)  # incompressible fixture
        path = tmp_path / "data.bin"
        path.write_bytes(payload)
        master = gen_keypair(rng)
        rec = encrypt_file(str(path), bytes(master.public), make_job(tmp_path), rng)
        wrong = primitives.clamp(os.urandom(32))
        assert escrow_decrypt(rec.final_path, wrong) != payload

    def test_store_round_trip(self, tmp_path):
        store = tmp_path / "escrow.store"
        protocol.write_escrow_record(store, "job-a", b"\x01" * 32)
        protocol.write_escrow_record(store, "job-b", b"\x02" * 32)
        assert protocol.read_escrow_record(store, "job-a") == b"\x01" * 32
        assert protocol.read_escrow_record(store, "job-b") == b"\x02" * 32
        assert (os.stat(store).st_mode & 0o777) == 0o600
        with pytest.raises(KeyError):
            protocol.read_escrow_record(store, "job-c")


def build_tree(root, spec):
    """spec: {relative path: bytes}"""
    for rel, payload in spec.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)


class TestTraversal:
    def test_skips_encrypted_suffix(self, tmp_path):
        build_tree(tmp_path, {"a.txt": b"a", "b.encrypted": b"b"})
        assert [os.path.basename(p) for p in iter_tree(tmp_path)] == ["a.txt"]

    def test_empty_directory(self, tmp_path):
        assert list(iter_tree(tmp_path)) == []

    def test_nested_tree_matches_walk_oracle(self, tmp_path):
        spec = {}
        rng = random.Random(4)
        for d in range(3):
            for f in range(4):
                spec[f"lvl0/lvl1-{d}/lvl2/f{f}.bin"] = rng.randbytes(10)
        spec["top.txt"] = b"t"
        build_tree(tmp_path, spec)
        mine = sorted(iter_tree(tmp_path))
        oracle = []
        for dirpath, _dirs, files in os.walk(tmp_path):
            for name in files:
                if not name.endswith(ENCRYPTED_SUFFIX):
                    oracle.append(os.path.join(dirpath, name))
        assert mine == sorted(oracle)
        assert len(mine) == 13

    def test_visits_each_file_exactly_once(self, tmp_path):
        build_tree(tmp_path, {f"d{i}/f{j}": b"x" for i in range(3) for j in range(3)})
        visited = traverse(str(tmp_path), make_job(tmp_path), lambda p: p)
        assert len(visited) == len(set(visited)) == 9

    def test_lexicographic_order(self, tmp_path):
        build_tree(tmp_path, {"b.txt": b"", "a.txt": b"", "c/inner.txt": b""})
        names = [os.path.relpath(p, tmp_path) for p in iter_tree(tmp_path)]
        assert names == ["a.txt", "b.txt", os.path.join("c", "inner.txt")]

    def test_symlinks_not_followed(self, tmp_path):
        build_tree(tmp_path, {"real/data.txt": b"x"})
        (tmp_path / "loop").symlink_to(tmp_path, target_is_directory=True)
        (tmp_path / "alias.txt").symlink_to(tmp_path / "real" / "data.txt")
        found = [os.path.relpath(p, tmp_path) for p in iter_tree(tmp_path)]
        assert found == [os.path.join("real", "data.txt")]

    def test_unreadable_directory_warns_and_continues(self, tmp_path, monkeypatch):
        build_tree(tmp_path, {"bad/secret.txt": b"x", "good/data.txt": b"y"})
        real_scandir = os.scandir
        blocked = str(tmp_path / "bad")

        def guarded(path="."):
            if os.fspath(path) == blocked:
                raise PermissionError(13, "denied", blocked)
            return real_scandir(path)

        monkeypatch.setattr(protocol.os, "scandir", guarded)
        warnings = []
        found = [os.path.relpath(p, tmp_path) for p in iter_tree(tmp_path, warnings)]
        assert found == [os.path.join("good", "data.txt")]
        assert len(warnings) == 1 and "bad" in warnings[0]

    def test_traverse_requires_directory(self, tmp_path):
        target = tmp_path / "file.txt"
        target.write_bytes(b"")
        with pytest.raises(NotADirectoryError):
            traverse(str(target), make_job(tmp_path), lambda p: p)


class TestDenyList:
    def test_root_is_denied(self):
        assert is_deny_listed("/", protocol.default_deny_list())

    def test_ancestor_of_protected_dir_denied(self, tmp_path):
        assert is_deny_listed(tmp_path.parent, (str(tmp_path),))

    def test_unrelated_subdir_allowed(self, tmp_path):
        assert not is_deny_listed(tmp_path, protocol.default_deny_list())

    def test_run_job_interlock(self, tmp_path):
        job = ErasureJob(root=str(tmp_path), deny_list=(str(tmp_path),))
        with pytest.raises(InterlockError):
            run_job(job)
        job_forced = ErasureJob(root=str(tmp_path), deny_list=(str(tmp_path),), force=True)
        assert run_job(job_forced).ok


class TestRunJob:
    def test_full_tree_round_trip(self, tmp_path):
        rng = random.Random(8)
        spec = {f"dir{i}/file{j}.dat": rng.randbytes(rng.randrange(0, 5000))
                for i in range(4) for j in range(5)}
        build_tree(tmp_path / "tree", spec)
        store = tmp_path / "escrow.store"
        job = make_job(tmp_path / "tree", escrow=str(store), workers=4)
        report = run_job(job)
        assert report.ok
        assert len(report.records) == 20
        master_priv = primitives.clamp(protocol.read_escrow_record(store, report.job_id))
        for rec in report.records:
            rel = os.path.relpath(rec.original_path, tmp_path / "tree")
            assert escrow_decrypt(rec.final_path, master_priv) == spec[rel.replace(os.sep, "/")]
            assert os.path.getsize(rec.final_path) == rec.original_len + 32

    def test_second_run_is_noop(self, tmp_path):
        build_tree(tmp_path, {"a.bin": b"123", "sub/b.bin": b"456"})
        assert len(run_job(make_job(tmp_path)).records) == 2
        second = run_job(make_job(tmp_path))
        assert second.records == [] and second.ok

    def test_per_file_failure_continues(self, tmp_path, monkeypatch):
        build_tree(tmp_path, {"a.bin": b"a", "b.bin": b"b", "c.bin": b"c"})
        real = protocol.encrypt_file
        victim = str(tmp_path / "b.bin")

        def flaky(path, *a, **kw):
            if path == victim:
                raise OSError("cannot open")
            return real(path, *a, **kw)

        monkeypatch.setattr(protocol, "encrypt_file", flaky)
        report = run_job(make_job(tmp_path))
        assert len(report.records) == 2
        assert len(report.failures) == 1
        assert report.failures[0][0] == victim
        assert not report.ok

    def test_records_follow_traversal_order(self, tmp_path):
        build_tree(tmp_path, {"c.bin": b"1", "a.bin": b"2", "b.bin": b"3"})
        report = run_job(make_job(tmp_path, workers=3))
        names = [os.path.basename(r.original_path) for r in report.records]
        assert names == ["a.bin", "b.bin", "c.bin"]

    def test_escrow_store_inside_root_survives(self, tmp_path):
        build_tree(tmp_path, {"x.bin": b"payload"})
        store = tmp_path / "escrow.store"
        report = run_job(make_job(tmp_path, escrow=str(store)))
        assert report.ok and len(report.records) == 1
        assert store.exists() and not store.name.endswith(ENCRYPTED_SUFFIX)
        master_priv = primitives.clamp(protocol.read_escrow_record(store, report.job_id))
        assert escrow_decrypt(report.records[0].final_path, master_priv) == b"payload"
