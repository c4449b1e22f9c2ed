"""Exception hierarchy for cryptoshred."""


class CryptoShredError(Exception):
    """Base class for all cryptoshred errors."""


class InvalidLengthError(CryptoShredError, ValueError):
    """A fixed-length input (key, IV, scalar, point) has the wrong size."""


class ContributoryBehaviorError(CryptoShredError):
    """Key agreement produced an all-zero secret (low-order peer point)."""


class EntropyUnavailableError(CryptoShredError):
    """The system entropy source is missing, short, or marked unhealthy."""


class UnseededError(CryptoShredError):
    """DRBG output was requested before the generator was seeded."""


class ReseedRequiredError(UnseededError):
    """DRBG output budget is exhausted; reseed before generating more."""


class InsufficientSampleError(CryptoShredError, ValueError):
    """Randomness checks need more sample bytes than were supplied."""


class MalformedCiphertextError(CryptoShredError):
    """An encrypted file is too short or otherwise not in the expected format."""


class PartialWriteError(CryptoShredError):
    """In-place overwrite failed mid-file; the file is partially encrypted.

    Carries the record describing how far the overwrite got so the job
    report can flag the file instead of silently dropping it.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class InterlockError(CryptoShredError):
    """A destructive operation was refused by a safety interlock."""


class HarnessMisuseError(CryptoShredError):
    """A memory-audit region was released before inspection."""


class InsufficientRepsError(CryptoShredError, ValueError):
    """A timing profile was requested with too few repetitions."""


class ScenarioError(CryptoShredError, ValueError):
    """A timing-profile scenario is malformed (e.g. unequal input sizes)."""


class InsufficientSpaceError(CryptoShredError):
    """Benchmark workspace lacks the free space needed for the corpus."""
