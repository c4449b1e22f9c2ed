"""Randomness provisioning and statistical validation.

Key material is produced by a dual-source cascade: the operating system's
CSPRNG device XORed octet-wise with a hash-based DRBG that was itself seeded
from the OS source.  The combined stream is at least as unpredictable as the
stronger leg.  A validation battery (monobit, runs, byte chi-square, plug-in
min-entropy) scores samples from any source and gates the cascade's health.

The OS device path can be overridden through the CRYPTOSHRED_ENTROPY_DEVICE
environment variable so tests can substitute a fixture file.  A missing or
short device read is fatal; there is no silent fallback.
"""

from __future__ import annotations

import hashlib
import math
import os
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats as _scipy_stats

from .errors import (
    EntropyUnavailableError,
    InsufficientSampleError,
    ReseedRequiredError,
    UnseededError,
)

DEVICE_ENV_VAR = "CRYPTOSHRED_ENTROPY_DEVICE"
DEFAULT_DEVICE = "/dev/urandom"

DEFAULT_ALPHA = 0.01
DEFAULT_MIN_ENTROPY = 7.5  # bits per octet
DEFAULT_RESEED_BUDGET = 1 << 20  # octets between reseeds
MIN_SAMPLE_LEN = 1024
MIN_SEED_LEN = 32


class SourceKind(Enum):
    OS_DEVICE = "os_device"
    SOFTWARE_DRBG = "software_drbg"
    CASCADE = "cascade"


class Health(Enum):
    UNTESTED = "untested"
    PASS = "pass"
    FAIL = "fail"


@dataclass
class EntropySource:
    kind: SourceKind
    health: Health = Health.UNTESTED


@dataclass
class RandReport:
    """Result of the statistical battery over one sample."""

    sample_len: int
    monobit_p: float
    runs_p: float
    chi2_p: float
    min_entropy_est: float
    verdict: str  # "pass" | "fail"
    alpha: float = DEFAULT_ALPHA
    min_entropy_threshold: float = DEFAULT_MIN_ENTROPY

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "sample_len": self.sample_len,
            "monobit_p": self.monobit_p,
            "runs_p": self.runs_p,
            "chi2_p": self.chi2_p,
            "min_entropy_est": self.min_entropy_est,
            "verdict": self.verdict,
            "alpha": self.alpha,
            "min_entropy_threshold": self.min_entropy_threshold,
        }


def entropy_device_path() -> str | None:
    """Resolve the entropy device: env override first, then the platform
    default; None means use os.urandom (no device path on this platform)."""
    override = os.environ.get(DEVICE_ENV_VAR)
    if override:
        return override
    if os.name == "posix":
        return DEFAULT_DEVICE
    return None


def os_entropy(count: int, device: str | None = None) -> bytes:
    """Read exactly ``count`` octets from the system entropy source.

    Raises EntropyUnavailableError on a missing device or short read; never
    falls back to a weaker source.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return b""
    path = device if device is not None else entropy_device_path()
    if path is None:
        return os.urandom(count)
    try:
        with open(path, "rb") as fp:
            data = fp.read(count)
    except OSError as exc:
        raise EntropyUnavailableError(f"entropy device {path!r} unavailable: {exc}") from exc
    if len(data) != count:
        raise EntropyUnavailableError(
            f"short read from {path!r}: wanted {count}, got {len(data)}")
    return data


class HashDrbg:
    """Deterministic SHA-256 expansion of a high-entropy seed.

    Output blocks are sha256(V || counter); V ratchets forward after every
    generate call for backtracking resistance.  A reseed budget caps the
    octets emitted between reseeds.

    Uses the platform SHA-256 (hashlib): this is throughput plumbing, not the
    protocol's key-derivation path.
    """

    def __init__(self, seed: bytes | None = None,
                 reseed_budget: int = DEFAULT_RESEED_BUDGET):
        if reseed_budget < 1:
            raise ValueError("reseed_budget must be >= 1")
        self._budget = reseed_budget
        self._v: bytes | None = None
        self._emitted = 0
        if seed is not None:
            self.seed(seed)

    @property
    def seeded(self) -> bool:
        return self._v is not None

    def seed(self, material: bytes) -> None:
        if len(material) < MIN_SEED_LEN:
            raise UnseededError(
                f"seed material must be >= {MIN_SEED_LEN} octets, got {len(material)}")
        self._v = hashlib.sha256(b"cryptoshred-drbg-seed\x00" + bytes(material)).digest()
        self._emitted = 0

    def reseed(self, material: bytes) -> None:
        if self._v is None:
            self.seed(material)
            return
        if len(material) < MIN_SEED_LEN:
            raise UnseededError(
                f"reseed material must be >= {MIN_SEED_LEN} octets, got {len(material)}")
        self._v = hashlib.sha256(
            b"cryptoshred-drbg-reseed\x00" + self._v + bytes(material)).digest()
        self._emitted = 0

    def generate(self, count: int) -> bytes:
        if count < 0:
            raise ValueError("count must be >= 0")
        if self._v is None:
            raise UnseededError("generate called before the DRBG was seeded")
        if self._emitted + count > self._budget:
            raise ReseedRequiredError(
                f"output budget of {self._budget} octets exhausted; reseed required")
        out = bytearray()
        ctr = 0
        while len(out) < count:
            out += hashlib.sha256(self._v + ctr.to_bytes(8, "big")).digest()
            ctr += 1
        self._v = hashlib.sha256(self._v + b"\x01ratchet").digest()
        self._emitted += count
        return bytes(out[:count])


class EntropyCascade:
    """Dual-source generator: OS entropy XOR DRBG output, octet for octet.

    Each leg carries a health state.  Sources start untested; an explicit
    health_check() scores both legs with rand_check and records pass/fail.
    A leg marked fail blocks all further output.  Workers should each own a
    private cascade; nothing here is shared.
    """

    def __init__(self, os_source=None, drbg: HashDrbg | None = None,
                 reseed_budget: int = DEFAULT_RESEED_BUDGET):
        self._os_source = os_source if os_source is not None else os_entropy
        self.os_leg = EntropySource(SourceKind.OS_DEVICE)
        self.drbg_leg = EntropySource(SourceKind.SOFTWARE_DRBG)
        if drbg is None:
            drbg = HashDrbg(self._os_source(MIN_SEED_LEN + 16), reseed_budget=reseed_budget)
        self._drbg = drbg

    def _drbg_bytes(self, count: int) -> bytes:
        try:
            return self._drbg.generate(count)
        except ReseedRequiredError:
            self._drbg.reseed(self._os_source(MIN_SEED_LEN))
            return self._drbg.generate(count)

    def random_bytes(self, count: int) -> bytes:
        """XOR of both legs; refuses to run over a leg that failed its
        health check."""
        for leg in (self.os_leg, self.drbg_leg):
            if leg.health is Health.FAIL:
                raise EntropyUnavailableError(
                    f"entropy leg {leg.kind.value} failed its health check")
        if count == 0:
            return b""
        a = np.frombuffer(self._os_source(count), dtype=np.uint8)
        b = np.frombuffer(self._drbg_bytes(count), dtype=np.uint8)
        return np.bitwise_xor(a, b).tobytes()

    def health_check(self, sample_len: int = 1 << 20,
                     alpha: float = DEFAULT_ALPHA,
                     min_entropy: float = DEFAULT_MIN_ENTROPY) -> dict[str, RandReport]:
        """Score both legs; marks each leg's health and returns the reports."""
        reports = {}
        os_sample = self._os_source(sample_len)
        reports["os_device"] = rand_check(os_sample, alpha=alpha, min_entropy=min_entropy)
        self.os_leg.health = Health.PASS if reports["os_device"].passed else Health.FAIL
        drbg_sample = self._drbg_bytes(sample_len)
        reports["software_drbg"] = rand_check(drbg_sample, alpha=alpha, min_entropy=min_entropy)
        self.drbg_leg.health = Health.PASS if reports["software_drbg"].passed else Health.FAIL
        return reports


_local = threading.local()


def cascade_random(count: int) -> bytes:
    """Thread-local convenience wrapper over EntropyCascade.random_bytes."""
    cascade = getattr(_local, "cascade", None)
    if cascade is None:
        cascade = EntropyCascade()
        _local.cascade = cascade
    return cascade.random_bytes(count)


def rand_check(sample: bytes, alpha: float = DEFAULT_ALPHA,
               min_entropy: float = DEFAULT_MIN_ENTROPY) -> RandReport:
    """Statistical battery: monobit frequency, runs, byte chi-square, and a
    plug-in min-entropy estimate.

    Pure function of the sample.  Verdict is pass iff every p-value reaches
    ``alpha`` and the min-entropy estimate reaches ``min_entropy`` bits/octet.
    """
    data = bytes(sample)
    if len(data) < MIN_SAMPLE_LEN:
        raise InsufficientSampleError(
            f"need >= {MIN_SAMPLE_LEN} octets, got {len(data)}")
    arr = np.frombuffer(data, dtype=np.uint8)
    bits = np.unpackbits(arr)
    n = bits.size
    ones = int(bits.sum())

    s_obs = abs(2 * ones - n) / math.sqrt(n)
    monobit_p = math.erfc(s_obs / math.sqrt(2))

    pi = ones / n
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        runs_p = 0.0  # frequency prerequisite failed; runs statistic undefined
    else:
        v_obs = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
        runs_p = math.erfc(
            abs(v_obs - 2 * n * pi * (1 - pi)) / (2 * math.sqrt(2 * n) * pi * (1 - pi)))

    counts = np.bincount(arr, minlength=256)
    expected = len(data) / 256
    chi2_stat = float(((counts - expected) ** 2 / expected).sum())
    chi2_p = float(_scipy_stats.chi2.sf(chi2_stat, 255))

    p_max = counts.max() / len(data)
    min_entropy_est = -math.log2(p_max)

    passed = (min(monobit_p, runs_p, chi2_p) >= alpha
              and min_entropy_est >= min_entropy)
    return RandReport(
        sample_len=len(data),
        monobit_p=monobit_p,
        runs_p=runs_p,
        chi2_p=chi2_p,
        min_entropy_est=min_entropy_est,
        verdict="pass" if passed else "fail",
        alpha=alpha,
        min_entropy_threshold=min_entropy,
    )
