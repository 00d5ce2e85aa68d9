"""Exception types shared across the library."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SchemaViolation:
    """One schema problem found in a record: which field, and why."""

    field: str
    reason: str

    def __str__(self) -> str:
        return f"{self.field}: {self.reason}"


class SchemaError(ValueError):
    """A record violated its schema. Carries every violation found, not just the first."""

    def __init__(self, violations, record_id: str | None = None):
        self.violations: list[SchemaViolation] = list(violations)
        self.record_id = record_id
        head = f"record {record_id!r}: " if record_id is not None else ""
        super().__init__(head + "; ".join(str(v) for v in self.violations))


class EmptyMask(ValueError):
    """Mask contains no tampered cells, so no bounding box exists."""


class BadMaskString(ValueError):
    """Mask string has the wrong length or characters outside {'0','1'}."""


class NotRealImage(ValueError):
    """Reference-grounding pairs are only defined on real (untampered) images."""


class IndexOutOfRange(IndexError):
    """Requested instance index does not exist in the layout."""


class EmptyInput(ValueError):
    """Metric is undefined on an empty token sequence."""


class IdMismatch(ValueError):
    """Paired records carry different ids."""


class NotTampered(ValueError):
    """Operation requires a tampered prediction with text and bbox present."""


class GroupTooSmall(ValueError):
    """Advantage normalization needs at least two completions per group."""


class UnknownFormat(ValueError):
    """Unsupported report format name."""


class DataConsistencyError(RuntimeError):
    """Inputs are individually valid but mutually inconsistent (unmatched ids, bad group sizes)."""
