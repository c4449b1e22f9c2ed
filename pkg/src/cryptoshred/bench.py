"""Benchmark harness: seed-deterministic corpora and end-to-end erase timing.

Each cell of the report is (file type, file size, count): the harness
generates the corpus, runs a full erase job over it, and records whole-job
wall-clock seconds (traversal, key generation, encryption, rename — the
complete destruction path, not the cipher alone).
"""

from __future__ import annotations

import hashlib
import os
import platform
import random
import shutil
import time
from dataclasses import dataclass, field

from . import primitives, protocol, sosemanuk
from .errors import InsufficientSpaceError

FILE_TYPES = ("text", "image", "executable")
DEFAULT_COUNTS = (100, 1000, 10000)
DEFAULT_SIZES = (1024,)
DEFAULT_SEED = 1

_PRINTABLE = (
    b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    b" \n\t.,;:!?()[]{}'\"-_/"
)


def _cell_rng(seed: int, file_type: str, size: int, index: int) -> random.Random:
    # hash-derived integer seed: stable across processes regardless of
    # PYTHONHASHSEED
    material = f"{seed}:{file_type}:{size}:{index}".encode()
    return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))


def _text_bytes(rng: random.Random, size: int) -> bytes:
    return bytes(rng.choices(_PRINTABLE, k=size))


def _image_bytes(rng: random.Random, size: int) -> bytes:
    # JPEG-like: structured header, high-entropy (already compressed) body,
    # end-of-image marker
    header = bytes([0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10]) + b"JFIF\x00\x01\x01\x00"
    trailer = bytes([0xFF, 0xD9])
    body_len = max(size - len(header) - len(trailer), 0)
    out = (header + rng.randbytes(body_len) + trailer)[:size]
    return out.ljust(size, b"\x00")


def _executable_bytes(rng: random.Random, size: int) -> bytes:
    # ELF-like: magic + zero-padded header region, code-like bytes, literal
    # string segments
    header = b"\x7fELF\x02\x01\x01\x00" + b"\x00" * 56
    literals = b"/lib/ld-linux.so.2\x00libc.so.6\x00GCC: (GNU) 12.2.0\x00.text\x00.rodata\x00"
    parts = [header]
    made = len(header)
    while made < size:
        run = rng.randbytes(min(192, size - made))
        parts.append(run)
        made += len(run)
        if made < size:
            pad = b"\x00" * min(32, size - made)
            parts.append(pad)
            made += len(pad)
        if made < size and rng.random() < 0.5:
            lit = literals[: min(len(literals), size - made)]
            parts.append(lit)
            made += len(lit)
    return b"".join(parts)[:size]


_GENERATORS = {
    "text": _text_bytes,
    "image": _image_bytes,
    "executable": _executable_bytes,
}


def corpus_file_bytes(file_type: str, size: int, seed: int, index: int) -> bytes:
    """Deterministic content for one corpus file; same arguments, same bytes."""
    if file_type not in _GENERATORS:
        raise ValueError(f"unknown file type {file_type!r}; supported: {FILE_TYPES}")
    return _GENERATORS[file_type](_cell_rng(seed, file_type, size, index), size)


_EXTENSIONS = {"text": ".txt", "image": ".jpg", "executable": ".exe"}


def generate_corpus(dest_dir, file_type: str, count: int, size: int, seed: int) -> list:
    """Write ``count`` deterministic files of ``file_type`` into dest_dir."""
    os.makedirs(dest_dir, exist_ok=True)
    ext = _EXTENSIONS[file_type]
    paths = []
    for i in range(count):
        path = os.path.join(dest_dir, f"{file_type}-{i:06d}{ext}")
        with open(path, "wb") as fp:
            fp.write(corpus_file_bytes(file_type, size, seed, i))
        paths.append(path)
    return paths


@dataclass
class BenchCell:
    file_type: str
    file_size: int
    count: int
    seconds: float

    def to_dict(self) -> dict:
        return {
            "file_type": self.file_type,
            "file_size": self.file_size,
            "count": self.count,
            "seconds": self.seconds,
        }


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    def cell(self, file_type: str, count: int, size: int | None = None) -> BenchCell | None:
        for row in self.rows:
            if (row.file_type == file_type and row.count == count
                    and (size is None or row.file_size == size)):
                return row
        return None

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "environment": dict(self.environment),
        }

    def to_text(self) -> str:
        counts = sorted({r.count for r in self.rows})
        sizes = sorted({r.file_size for r in self.rows})
        lines = []
        lines.append("Erase throughput (whole-job wall clock, seconds)")
        lines.append(f"environment: {self.environment.get('os', '?')} / "
                     f"{self.environment.get('cpu', '?')}")
        for size in sizes:
            lines.append(f"file size: {size} bytes")
            header = "file type".ljust(14) + "".join(
                f"{c} files".rjust(16) for c in counts)
            lines.append(header)
            for ftype in FILE_TYPES:
                cells = []
                for c in counts:
                    row = self.cell(ftype, c, size)
                    cells.append(f"{row.seconds:.3f}".rjust(16) if row else "-".rjust(16))
                lines.append(ftype.ljust(14) + "".join(cells))
        return "\n".join(lines) + "\n"


def _environment() -> dict:
    uname = platform.uname()
    return {
        "os": f"{uname.system} {uname.release}",
        "cpu": uname.machine or uname.processor or "unknown",
        "python": platform.python_version(),
    }


def run_bench(counts=DEFAULT_COUNTS, sizes=DEFAULT_SIZES, types=FILE_TYPES,
              seed: int = DEFAULT_SEED, workdir=None, workers: int = 1,
              block_size: int = protocol.DEFAULT_BLOCK_SIZE,
              on_cell=None) -> BenchReport:
    """Generate corpora and time one erase job per (type, size, count) cell.

    Checks free space up front and aborts before any timing if the largest
    cell cannot fit.  Corpus generation is not part of the timed window.
    """
    counts = [int(c) for c in counts]
    sizes = [int(s) for s in sizes]
    for t in types:
        if t not in FILE_TYPES:
            raise ValueError(f"unknown file type {t!r}; supported: {FILE_TYPES}")

    own_workdir = workdir is None
    if own_workdir:
        import tempfile
        workdir = tempfile.mkdtemp(prefix="cryptoshred-bench-")
    os.makedirs(workdir, exist_ok=True)

    largest = max((c * s for c in counts for s in sizes), default=0)
    free = shutil.disk_usage(workdir).free
    # trailer bytes plus directory overhead; refuse before writing anything
    if largest and free < largest * 2 + (1 << 20):
        raise InsufficientSpaceError(
            f"need about {largest} bytes free in {workdir!r}, have {free}")

    primitives.warm_kernels()
    sosemanuk.warm_kernels()

    report = BenchReport(environment=_environment())
    try:
        for size in sizes:
            for ftype in types:
                for count in counts:
                    cell_dir = os.path.join(workdir, f"{ftype}-{size}-{count}")
                    if count > 0:
                        generate_corpus(cell_dir, ftype, count, size, seed)
                    else:
                        os.makedirs(cell_dir, exist_ok=True)
                    job = protocol.ErasureJob(
                        root=cell_dir, block_size=block_size, workers=workers,
                        deny_list=())
                    t0 = time.perf_counter()
                    job_report = protocol.run_job(job)
                    elapsed = time.perf_counter() - t0
                    if job_report.failures:
                        raise RuntimeError(
                            f"bench cell {ftype}/{size}/{count} had failures: "
                            f"{job_report.failures[:3]}")
                    cell = BenchCell(file_type=ftype, file_size=size,
                                     count=count, seconds=elapsed)
                    report.rows.append(cell)
                    if on_cell is not None:
                        on_cell(cell)
                    shutil.rmtree(cell_dir, ignore_errors=True)
    finally:
        if own_workdir:
            shutil.rmtree(workdir, ignore_errors=True)
    return report
