"""Exception types shared across the harness."""

from __future__ import annotations


class MathVRError(Exception):
    """Base class for all harness errors."""


class ConfigError(MathVRError):
    """Invalid or missing configuration."""


# --- corpus ---------------------------------------------------------------

class SchemaError(MathVRError):
    """A record does not match the expected shape."""


class MissingAsset(MathVRError):
    """A referenced image file is absent from the corpus."""


class DuplicateId(MathVRError):
    """Two samples share an id within one manifest."""


class EmptyCorpus(MathVRError):
    """An operation that needs at least one sample got none."""


class UnmappableLabel(MathVRError):
    """The judge produced a knowledge label outside the taxonomy."""


# --- model / judge clients ------------------------------------------------

class ModelUnavailable(MathVRError):
    """The chat endpoint kept failing after bounded retries."""


class JudgeUnavailable(ModelUnavailable):
    """The judge endpoint kept failing after bounded retries."""


class UnparseableVerdict(MathVRError):
    """No schema-valid JSON object could be extracted from a judge reply."""


class InvariantViolation(MathVRError):
    """A judge reply parsed but contradicts its own declared totals."""


class InconsistentVerdict(MathVRError):
    """The fully-correct flag contradicts the awarded points."""


class MetaMismatch(MathVRError):
    """A verdict references scoring points absent from the rubric."""


# --- sandbox ----------------------------------------------------------------

class SandboxDown(MathVRError):
    """The runner pool cannot serve requests at all."""


class RunnerSpawnFailure(SandboxDown):
    """A replacement runner process could not be started."""


class ProtocolError(MathVRError):
    """A runner sent a malformed or out-of-order frame."""


# --- analytics --------------------------------------------------------------

class EmptyInput(MathVRError):
    """An aggregate over zero items was requested."""


class LengthMismatch(MathVRError):
    """Paired vectors have different lengths."""


class ZeroVariance(MathVRError):
    """A correlation was requested on a constant vector."""


class UnknownSample(MathVRError):
    """A score or trace references a sample id absent from the manifest."""


class SizeMismatch(MathVRError):
    """An assignment cannot partition the pool into the requested blocks."""


class AllCandidatesFailed(MathVRError):
    """Every converter candidate for one item failed to execute."""


# --- review service ---------------------------------------------------------

class RevisionConflict(MathVRError):
    """A review decision raced with another writer for the same sample."""


class InvalidMeta(MathVRError):
    """An edited rubric does not satisfy the rubric invariants."""
