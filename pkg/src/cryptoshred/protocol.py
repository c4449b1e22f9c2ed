"""Destruction protocol: ephemeral key generation, per-file encrypt-and-rename,
recursive traversal, secure buffer erasure, and the test-only escrow inverse.

Per file: a fresh keypair is drawn from the entropy cascade, a session key is
derived from it and the job's master public key (curve agreement hashed with
SHA-256), the file body is overwritten in place block by block with the stream
cipher, the ephemeral public key is appended as a 32-octet trailer, and the
file is renamed with the ".encrypted" suffix.  Every secret-bearing buffer is
zeroized before the call returns; the memory-audit harness verifies this
rather than trusting it.

On-disk format, bit-exact:

    [ ciphertext, same length as the original ][ ephemeral public key: 32 ]

The cipher IV is the first 16 octets of sha256(ephemeral public key): public,
deterministic, and unique per file because the keypair is fresh per file.
There is no authentication tag; the format carries exactly the ciphertext and
the trailer.

Without escrow the master private key is destroyed at job end and nothing can
invert the transformation.  With escrow (recovery drills, round-trip tests)
the master private key is appended to a 0600-permission store, one record per
job, before the first file is touched.
"""

from __future__ import annotations

import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import sosemanuk
from .entropy import EntropyCascade
from .errors import (
    InterlockError,
    MalformedCiphertextError,
    PartialWriteError,
)
from .primitives import base_mul, clamp, sha256, shared

ENCRYPTED_SUFFIX = ".encrypted"
TRAILER_LEN = 32
DEFAULT_BLOCK_SIZE = 10 * 2**20  # fixed-size processing granule, octets
IV_LEN = sosemanuk.IV_LEN


def default_deny_list() -> tuple[str, ...]:
    """Paths a job refuses to touch without the double interlock."""
    entries = [
        "/", "/bin", "/boot", "/dev", "/etc", "/home", "/lib", "/lib64",
        "/opt", "/proc", "/run", "/sbin", "/srv", "/sys", "/usr", "/var",
    ]
    home = os.path.expanduser("~")
    if home and home not in entries:
        entries.append(home)
    return tuple(entries)


def is_deny_listed(root, deny_list) -> bool:
    """True when ``root`` is a protected path or an ancestor of one."""
    rp = os.path.realpath(os.fspath(root))
    for entry in deny_list:
        dp = os.path.realpath(entry)
        if rp == dp or dp.startswith(rp.rstrip(os.sep) + os.sep):
            return True
    return False


def secure_erase(region) -> None:
    """Zero a mutable region in place.

    Accepts bytearray, writable memoryview, numpy arrays, and lists of ints.
    CPython performs explicit item stores on live objects unconditionally;
    this is the store barrier the memory audit reads back through.
    """
    if isinstance(region, memoryview):
        region[:] = b"\x00" * len(region)
    elif isinstance(region, bytearray):
        for i in range(len(region)):
            region[i] = 0
    elif isinstance(region, list):
        for i in range(len(region)):
            region[i] = 0
    elif hasattr(region, "fill"):  # numpy
        region.fill(0)
    else:
        raise TypeError(f"cannot erase region of type {type(region).__name__}")


class KeyPair:
    """Curve keypair held in erasable buffers."""

    __slots__ = ("private", "public")

    def __init__(self, private: bytearray, public: bytearray):
        self.private = private
        self.public = public

    def zeroize(self) -> None:
        secure_erase(self.private)
        secure_erase(self.public)


class SessionKey:
    """32-octet symmetric key (SHA-256 of the curve shared secret)."""

    __slots__ = ("data",)

    def __init__(self, data: bytearray):
        self.data = data

    def zeroize(self) -> None:
        secure_erase(self.data)


@dataclass
class ErasedFileRecord:
    original_path: str
    final_path: str
    original_len: int
    blocks_processed: int
    ephemeral_public: bytes
    duration: float
    status: str = "ok"  # "ok" | "corrupt-partial"

    def to_dict(self) -> dict:
        return {
            "original_path": self.original_path,
            "final_path": self.final_path,
            "original_len": self.original_len,
            "blocks_processed": self.blocks_processed,
            "ephemeral_public": self.ephemeral_public.hex(),
            "duration": self.duration,
            "status": self.status,
        }


@dataclass
class ErasureJob:
    """Parameters for one destruction run over a directory tree."""

    root: str
    block_size: int = DEFAULT_BLOCK_SIZE
    workers: int = 1
    escrow: str | None = None
    force: bool = False  # acknowledges the deny-list interlock
    deny_list: tuple[str, ...] = field(default_factory=default_deny_list)

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class JobReport:
    job_id: str
    root: str
    master_public: bytes
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (path, reason)
    warnings: list = field(default_factory=list)
    duration: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "root": self.root,
            "master_public": self.master_public.hex(),
            "records": [r.to_dict() for r in self.records],
            "failures": list(self.failures),
            "warnings": list(self.warnings),
            "duration": self.duration,
        }


def gen_keypair(rng) -> KeyPair:
    """Draw a fresh keypair from an entropy cascade.

    ``rng`` must expose random_bytes(n); private keys are never pulled from
    the raw OS source directly.
    """
    raw = bytearray(rng.random_bytes(32))
    private = bytearray(clamp(bytes(raw)))
    secure_erase(raw)
    public = bytearray(base_mul(bytes(private)))
    return KeyPair(private, public)


def derive_session_key(private, peer_public) -> SessionKey:
    """Session key = sha256(curve_shared(private, peer_public)).

    The intermediate shared secret is zeroized before return.  A low-order
    peer point raises ContributoryBehaviorError.
    """
    secret = bytearray(shared(bytes(private), bytes(peer_public)))
    key = SessionKey(bytearray(sha256(bytes(secret))))
    secure_erase(secret)
    return key


def derive_iv(ephemeral_public: bytes) -> bytes:
    """Per-file cipher IV: leading 16 octets of sha256(ephemeral public key)."""
    return sha256(bytes(ephemeral_public))[:IV_LEN]


def encrypt_file(path, master_public, job: ErasureJob, rng,
                 audit=None, _skip_zeroize: bool = False) -> ErasedFileRecord:
    """Destroy one file in place and rename it with the ".encrypted" suffix.

    Overwrites the body block by block at the same offsets, flushes for
    durability, appends the ephemeral public key, renames, and zeroizes every
    secret buffer.  Returns the per-file record.

    ``audit``, when given, is a memory-audit registry; the sensitive regions
    are registered with it before use.  ``_skip_zeroize`` is the planted
    negative control for that audit and must never be set in production.

    A failure before the first write leaves the file untouched.  A failure
    mid-overwrite raises PartialWriteError carrying a record flagged
    "corrupt-partial"; a retry must call encrypt_file again, which draws a
    fresh keypair (keys are never reused).
    """
    path = os.fspath(path)
    started = time.perf_counter()
    ephemeral = gen_keypair(rng)
    session = derive_session_key(ephemeral.private, master_public)
    key_ctx = sosemanuk.schedule(bytes(session.data))
    run_state = sosemanuk.init(key_ctx, derive_iv(bytes(ephemeral.public)))
    block_buf = bytearray()
    if audit is not None:
        audit.register("ephemeral_private", ephemeral.private)
        audit.register("session_key", session.data)
        audit.register("cipher_key_context", key_ctx.round_keys)
        audit.register("cipher_lfsr", run_state.lfsr)
        audit.register("cipher_fsm", run_state.fsm)
        audit.register("cipher_keystream_buf", run_state.keystream_buf)

    blocks_done = 0
    size = 0
    try:
        with open(path, "r+b") as fp:
            size = os.fstat(fp.fileno()).st_size
            offset = 0
            while offset < size:
                want = min(job.block_size, size - offset)
                if want > len(block_buf):
                    block_buf = bytearray(want)
                view = memoryview(block_buf)[:want]
                fp.seek(offset)
                got = fp.readinto(view)
                if got != want:
                    raise OSError(f"short read at offset {offset} of {path}")
                try:
                    ciphertext = sosemanuk.xor_stream(run_state, view)
                    fp.seek(offset)
                    fp.write(ciphertext)
                except OSError as exc:
                    record = ErasedFileRecord(
                        original_path=path, final_path=path, original_len=size,
                        blocks_processed=blocks_done, ephemeral_public=bytes(ephemeral.public),
                        duration=time.perf_counter() - started, status="corrupt-partial")
                    raise PartialWriteError(
                        f"overwrite failed mid-file at block {blocks_done}: {exc}",
                        record=record) from exc
                offset += want
                blocks_done += 1
            fp.seek(0, os.SEEK_END)
            fp.write(bytes(ephemeral.public))
            fp.flush()
            os.fsync(fp.fileno())
        final_path = path + ENCRYPTED_SUFFIX
        os.rename(path, final_path)
    finally:
        if not _skip_zeroize:
            secure_erase(block_buf)
            ephemeral_public_copy = bytes(ephemeral.public)
            secure_erase(ephemeral.private)
            session.zeroize()
            key_ctx.zeroize()
            run_state.zeroize()
        else:
            ephemeral_public_copy = bytes(ephemeral.public)

    return ErasedFileRecord(
        original_path=path,
        final_path=final_path,
        original_len=size,
        blocks_processed=blocks_done,
        ephemeral_public=ephemeral_public_copy,
        duration=time.perf_counter() - started,
    )


def iter_tree(root, warnings: list | None = None):
    """Yield candidate regular files depth-first, lexicographically.

    Files already carrying the ".encrypted" suffix are skipped, symbolic
    links are never followed, and an unreadable directory is recorded as a
    warning while its siblings continue.
    """
    root = os.fspath(root)
    try:
        with os.scandir(root) as it:
            entries = sorted(it, key=lambda e: e.name)
    except OSError as exc:
        if warnings is not None:
            warnings.append(f"unreadable directory {root!r}: {exc}")
        return
    for entry in entries:
        try:
            if entry.is_symlink():
                continue
            if entry.is_dir(follow_symlinks=False):
                yield from iter_tree(entry.path, warnings)
            elif entry.is_file(follow_symlinks=False):
                if not entry.name.endswith(ENCRYPTED_SUFFIX):
                    yield entry.path
        except OSError as exc:
            if warnings is not None:
                warnings.append(f"unreadable entry {entry.path!r}: {exc}")


def traverse(root, job: ErasureJob, visit):
    """Apply ``visit`` to every candidate file under ``root``; returns the
    list of visit results in traversal order."""
    if not os.path.isdir(root):
        raise NotADirectoryError(f"{root!r} is not a directory")
    return [visit(path) for path in iter_tree(root)]


# --- escrow store ---

def write_escrow_record(store_path, job_id: str, master_private) -> None:
    """Append one "job_id hex(master_private)" line to a 0600-permission file."""
    store_path = os.fspath(store_path)
    fd = os.open(store_path, os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o600)
    try:
        os.fchmod(fd, 0o600)
        os.write(fd, f"{job_id} {bytes(master_private).hex()}\n".encode("ascii"))
        os.fsync(fd)
    finally:
        os.close(fd)


def read_escrow_record(store_path, job_id: str) -> bytes:
    """Look up the master private key stored for ``job_id``."""
    with open(store_path, "r", encoding="ascii") as fp:
        for line in fp:
            parts = line.split()
            if len(parts) == 2 and parts[0] == job_id:
                return bytes.fromhex(parts[1])
    raise KeyError(f"no escrow record for job {job_id!r}")


def escrow_decrypt(path, master_private) -> bytes:
    """Invert one encrypted file given the job's master private key.

    Reads the 32-octet trailer as the ephemeral public key, rederives the
    session key and IV, and decrypts the body.  Only meaningful when the job
    ran with escrow; the default path never persists the master private key.
    The format carries no authentication tag, so a wrong key yields garbage
    rather than an error.
    """
    path = os.fspath(path)
    if not path.endswith(ENCRYPTED_SUFFIX):
        raise MalformedCiphertextError(f"{path!r} lacks the {ENCRYPTED_SUFFIX!r} suffix")
    size = os.path.getsize(path)
    if size < TRAILER_LEN:
        raise MalformedCiphertextError(
            f"{path!r} is {size} octets; shorter than the {TRAILER_LEN}-octet trailer")
    body_len = size - TRAILER_LEN
    with open(path, "rb") as fp:
        fp.seek(body_len)
        ephemeral_public = fp.read(TRAILER_LEN)
        fp.seek(0)
        session = derive_session_key(master_private, ephemeral_public)
        key_ctx = sosemanuk.schedule(bytes(session.data))
        run_state = sosemanuk.init(key_ctx, derive_iv(ephemeral_public))
        out = bytearray()
        remaining = body_len
        while remaining:
            chunk = fp.read(min(DEFAULT_BLOCK_SIZE, remaining))
            out += sosemanuk.xor_stream(run_state, chunk)
            remaining -= len(chunk)
    session.zeroize()
    key_ctx.zeroize()
    run_state.zeroize()
    return bytes(out)


# --- job runner ---

class _WorkerRngs:
    """One private entropy cascade per worker thread."""

    def __init__(self, reseed_budget: int | None = None):
        self._local = threading.local()
        self._budget = reseed_budget

    def get(self) -> EntropyCascade:
        cascade = getattr(self._local, "cascade", None)
        if cascade is None:
            if self._budget is None:
                cascade = EntropyCascade()
            else:
                cascade = EntropyCascade(reseed_budget=self._budget)
            self._local.cascade = cascade
        return cascade


def run_job(job: ErasureJob, rng=None, on_record=None,
            reseed_budget: int | None = None) -> JobReport:
    """Run the full destruction protocol over ``job.root``.

    Draws one master keypair for the job, walks the tree, encrypts each file
    on a bounded worker pool, and zeroizes the master private key at the end
    (after writing it to the escrow store first, when escrow is enabled).
    Per-file failures never abort the job.

    An explicit ``rng`` feeds the master keypair and, for single-worker jobs,
    the per-file keys as well; multi-worker jobs always give each worker its
    own private cascade because DRBG state must never be shared across
    threads.
    """
    if not os.path.isdir(job.root):
        raise NotADirectoryError(f"{job.root!r} is not a directory")
    if is_deny_listed(job.root, job.deny_list) and not job.force:
        raise InterlockError(
            f"{job.root!r} is deny-listed; refusing without the force interlock")

    started = time.perf_counter()
    job_id = uuid.uuid4().hex
    rngs = _WorkerRngs(reseed_budget)
    master_rng = rng if rng is not None else rngs.get()
    master = gen_keypair(master_rng)
    master_public = bytes(master.public)
    report = JobReport(job_id=job_id, root=os.fspath(job.root), master_public=master_public)

    try:
        if job.escrow:
            write_escrow_record(job.escrow, job_id, master.private)

        candidates = list(iter_tree(job.root, report.warnings))
        if job.escrow:
            # the escrow store must survive its own job even when it lives
            # under the root
            escrow_real = os.path.realpath(job.escrow)
            candidates = [p for p in candidates
                          if os.path.realpath(p) != escrow_real]

        def work(path):
            if rng is not None and job.workers == 1:
                worker_rng = rng
            else:
                worker_rng = rngs.get()
            return encrypt_file(path, master_public, job, worker_rng)

        if job.workers == 1:
            outcomes = []
            for path in candidates:
                try:
                    outcomes.append((path, work(path), None))
                except Exception as exc:
                    outcomes.append((path, None, exc))
        else:
            with ThreadPoolExecutor(max_workers=job.workers) as pool:
                futures = [(path, pool.submit(work, path)) for path in candidates]
                outcomes = []
                for path, fut in futures:
                    try:
                        outcomes.append((path, fut.result(), None))
                    except Exception as exc:
                        outcomes.append((path, None, exc))

        for path, record, exc in outcomes:
            if exc is None:
                report.records.append(record)
                if on_record is not None:
                    on_record(record)
            elif isinstance(exc, PartialWriteError) and exc.record is not None:
                report.records.append(exc.record)
                report.failures.append((path, str(exc)))
            else:
                report.failures.append((path, f"{type(exc).__name__}: {exc}"))
    finally:
        master.zeroize()

    report.duration = time.perf_counter() - started
    return report
