"""Runnable implementation-security probes.

Three instruments, each producing a structured report:

* Memory audit: an instrumented operation registers its secret-bearing
  buffers with a registry; after the operation returns, the harness reads
  the same live objects back and reports any residual nonzero octet.  The
  audit is a test-harness instrument, not a production runtime check.

* Timing profile: times the encryption path over equal-size inputs that
  differ only in content and reports the coefficient of variation across
  content classes.  Advisory by design: wall-clock timing is environment
  sensitive, so the verdict never gates functional acceptance.

* Build manifest: a deterministic, line-oriented list of (digest, path)
  pairs over a file set, rebuildable bit-identically and verifiable against
  the current tree.  File hashing uses the platform SHA-256.
"""

from __future__ import annotations

import hashlib
import os
import statistics
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from . import protocol
from .entropy import EntropyCascade
from .errors import HarnessMisuseError, InsufficientRepsError, ScenarioError

TIMING_CV_THRESHOLD = 0.10
MIN_TIMING_REPS = 30

_CONTENT_CLASSES = ("zero", "ones", "random", "text")


# --- memory audit ---

def region_is_zero(region) -> bool:
    """True iff every octet/element of a registered region is zero."""
    if isinstance(region, (bytes, bytearray, memoryview)):
        return not any(region)
    if isinstance(region, list):
        return all(x == 0 for x in region)
    if isinstance(region, np.ndarray):
        return not region.any()
    raise TypeError(f"unsupported region type {type(region).__name__}")


def region_length(region) -> int:
    return len(region)


class MemoryAuditRegistry:
    """Collects references to sensitive regions for post-hoc inspection.

    The registry holds strong references so a registered region stays
    inspectable; an explicit release() marks the region as freed, which the
    audit reports as harness misuse rather than guessing at dead memory.
    """

    def __init__(self):
        self._regions: dict[str, object] = {}
        self._released: set[str] = set()

    def register(self, label: str, region) -> None:
        region_is_zero(region)  # type check up front
        self._regions[label] = region

    def release(self, label: str) -> None:
        if label not in self._regions:
            raise KeyError(label)
        self._released.add(label)

    def items(self):
        return self._regions.items()

    def released(self, label: str) -> bool:
        return label in self._released


@dataclass
class MemRegion:
    label: str
    length: int
    all_zero: bool


@dataclass
class MemReport:
    regions: list[MemRegion] = field(default_factory=list)
    verdict: str = "pass"  # pass iff every region is all_zero

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def offending(self) -> list[str]:
        return [r.label for r in self.regions if not r.all_zero]

    def to_dict(self) -> dict:
        return {
            "regions": [
                {"label": r.label, "length": r.length, "all_zero": r.all_zero}
                for r in self.regions
            ],
            "verdict": self.verdict,
        }


def memlife_audit(action) -> MemReport:
    """Run ``action(registry)`` and inspect every region it registered.

    The inspection reads through the same object references the erasure wrote
    through, so a skipped or optimized-away zeroization shows up as residual
    nonzero octets.  Raises HarnessMisuseError if the action released a
    region before inspection.
    """
    registry = MemoryAuditRegistry()
    action(registry)
    report = MemReport()
    for label, region in registry.items():
        if registry.released(label):
            raise HarnessMisuseError(
                f"region {label!r} was released before inspection")
        report.regions.append(MemRegion(
            label=label,
            length=region_length(region),
            all_zero=region_is_zero(region),
        ))
    if any(not r.all_zero for r in report.regions):
        report.verdict = "fail"
    return report


def encrypt_fixture_action(payload: bytes = b"\xa5" * 1024, skip_zeroize: bool = False,
                           rng=None):
    """Build a memory-audit action that encrypts a throwaway fixture file.

    With skip_zeroize=True this is the planted negative control: the
    encryption path runs normally but leaves its secrets in place, and the
    audit must catch it.
    """
    def action(registry):
        cascade = rng if rng is not None else EntropyCascade()
        master = protocol.gen_keypair(cascade)
        with tempfile.TemporaryDirectory(prefix="cryptoshred-audit-") as tmp:
            path = os.path.join(tmp, "fixture.bin")
            with open(path, "wb") as fp:
                fp.write(payload)
            job = protocol.ErasureJob(root=tmp, deny_list=())
            protocol.encrypt_file(path, bytes(master.public), job, cascade,
                                  audit=registry, _skip_zeroize=skip_zeroize)
        master.zeroize()
    return action


# --- timing profile ---

@dataclass
class TimingReport:
    scenario: str
    samples: int
    mean: float
    cv: float
    verdict: str  # pass iff cv < threshold; advisory only
    class_means: dict = field(default_factory=dict)
    threshold: float = TIMING_CV_THRESHOLD

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "samples": self.samples,
            "mean": self.mean,
            "cv": self.cv,
            "verdict": self.verdict,
            "class_means": dict(self.class_means),
            "threshold": self.threshold,
        }


def _class_content(kind: str, size: int, rng: EntropyCascade) -> bytes:
    if kind == "zero":
        return b"\x00" * size
    if kind == "ones":
        return b"\xff" * size
    if kind == "random":
        return rng.random_bytes(size)
    if kind == "text":
        block = (b"the quick brown fox jumps over the lazy dog \n" * 64)[:2048]
        return (block * (size // len(block) + 1))[:size]
    raise ScenarioError(f"unknown content class {kind!r}; "
                        f"supported: {', '.join(_CONTENT_CLASSES)}")


def profile_scenario(inputs: dict[str, bytes], reps: int,
                     threshold: float = TIMING_CV_THRESHOLD,
                     scenario: str = "encrypt-content-independence") -> TimingReport:
    """Time the per-file encryption path over fixed-size inputs.

    ``inputs`` maps class label to content; every content must have the same
    length (unequal sizes make the comparison meaningless and are rejected).
    Runs single-threaded and returns the cv of per-class mean times.
    """
    if reps < MIN_TIMING_REPS:
        raise InsufficientRepsError(
            f"timing profile needs >= {MIN_TIMING_REPS} reps, got {reps}")
    if len(inputs) < 2:
        raise ScenarioError("need at least two content classes to compare")
    sizes = {len(v) for v in inputs.values()}
    if len(sizes) != 1:
        raise ScenarioError(f"input sizes must be fixed, got {sorted(sizes)}")

    cascade = EntropyCascade()
    master = protocol.gen_keypair(cascade)
    master_public = bytes(master.public)

    class_means: dict[str, float] = {}
    total = 0
    with tempfile.TemporaryDirectory(prefix="cryptoshred-timing-") as tmp:
        job = protocol.ErasureJob(root=tmp, deny_list=())
        for label, content in inputs.items():
            times = []
            for i in range(reps):
                path = os.path.join(tmp, f"{label}-{i}.bin")
                with open(path, "wb") as fp:
                    fp.write(content)
                t0 = time.perf_counter()
                protocol.encrypt_file(path, master_public, job, cascade)
                times.append(time.perf_counter() - t0)
                os.unlink(path + protocol.ENCRYPTED_SUFFIX)
                total += 1
            class_means[label] = statistics.fmean(times)
    master.zeroize()

    mean = statistics.fmean(class_means.values())
    cv = statistics.pstdev(class_means.values()) / mean if mean > 0 else 0.0
    return TimingReport(
        scenario=scenario,
        samples=total,
        mean=mean,
        cv=cv,
        verdict="pass" if cv < threshold else "fail",
        class_means=class_means,
        threshold=threshold,
    )


def obsguard_profile(fixed_size: int, contents=("zero", "ones", "random"),
                     reps: int = 50,
                     threshold: float = TIMING_CV_THRESHOLD) -> TimingReport:
    """Content-independence timing report for the encryption path.

    Builds equal-size inputs from the named content classes and delegates to
    profile_scenario.  Advisory: the verdict belongs in audit reports, never
    in functional gates.
    """
    if reps < MIN_TIMING_REPS:
        raise InsufficientRepsError(
            f"timing profile needs >= {MIN_TIMING_REPS} reps, got {reps}")
    rng = EntropyCascade()
    inputs = {kind: _class_content(kind, fixed_size, rng) for kind in contents}
    return profile_scenario(
        inputs, reps=reps, threshold=threshold,
        scenario=f"encrypt-content-independence/{fixed_size}B")


# --- build manifest ---

@dataclass
class Manifest:
    """Sorted (path, digest) fingerprint of a file set.

    Serialization is exactly one "<hex digest> <path>" line per entry, sorted
    by path and newline-terminated, so two builds over identical trees are
    byte-identical.  created_at and tool_version are runtime metadata and are
    deliberately not serialized.
    """

    entries: list  # list[(path, hex digest)]
    created_at: str = ""
    tool_version: str = ""

    def serialize(self) -> bytes:
        lines = [f"{digest} {path}\n" for path, digest in
                 sorted(self.entries, key=lambda e: e[0])]
        return "".join(lines).encode("utf-8")

    def write(self, out_path) -> None:
        with open(out_path, "wb") as fp:
            fp.write(self.serialize())

    @classmethod
    def parse(cls, text: str) -> "Manifest":
        entries = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            digest, _, path = line.partition(" ")
            if len(digest) != 64 or not path:
                raise ValueError(f"malformed manifest line {lineno}: {line!r}")
            entries.append((path, digest.lower()))
        return cls(entries=entries)

    @classmethod
    def load(cls, path) -> "Manifest":
        with open(path, "r", encoding="utf-8") as fp:
            return cls.parse(fp.read())


@dataclass
class VerifyResult:
    passed: bool
    mismatched: list = field(default_factory=list)
    missing: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "mismatched": list(self.mismatched),
            "missing": list(self.missing),
        }


def _file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def verihash_build(paths, base_dir=None, tool_version: str = "") -> Manifest:
    """Fingerprint the given files; paths are stored POSIX-relative to
    ``base_dir`` when provided.  An unreadable path raises an OSError naming
    it."""
    entries = []
    seen = set()
    for p in paths:
        p = os.fspath(p)
        try:
            digest = _file_digest(p)
        except OSError as exc:
            raise OSError(f"cannot hash {p!r}: {exc}") from exc
        rel = os.path.relpath(p, base_dir) if base_dir is not None else p
        rel = rel.replace(os.sep, "/")
        if rel in seen:
            raise ValueError(f"duplicate manifest path {rel!r}")
        seen.add(rel)
        entries.append((rel, digest))
    return Manifest(
        entries=sorted(entries, key=lambda e: e[0]),
        created_at=time.strftime("%Y-%m-%dT%H:%M:%S"),
        tool_version=tool_version,
    )


def verihash_tree(root, tool_version: str = "") -> Manifest:
    """Fingerprint every regular file under ``root`` (sorted, links skipped)."""
    paths = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames.sort()
        for name in sorted(filenames):
            full = os.path.join(dirpath, name)
            if not os.path.islink(full):
                paths.append(full)
    return verihash_build(paths, base_dir=root, tool_version=tool_version)


def verihash_verify(manifest: Manifest, base_dir=None) -> VerifyResult:
    """Recompute every digest in a manifest against the current tree.

    A missing file counts as a mismatch (listed separately), never a crash.
    """
    mismatched = []
    missing = []
    for path, digest in manifest.entries:
        full = os.path.join(base_dir, path) if base_dir is not None else path
        try:
            current = _file_digest(full)
        except OSError:
            missing.append(path)
            continue
        if current != digest.lower():
            mismatched.append(path)
    return VerifyResult(passed=not (mismatched or missing),
                        mismatched=mismatched, missing=missing)
