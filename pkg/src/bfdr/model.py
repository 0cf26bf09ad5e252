"""Shared domain types for the Bayes-factor FDR toolkit.

Pure data definitions plus construction-time validation. No algorithms
live here; estimation and decision logic imports these types.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

__all__ = [
    "TestRecord",
    "Pi0Method",
    "Pi0Estimate",
    "PosteriorTable",
    "DecisionReport",
    "SimTruth",
    "EvalReport",
    "ValidationError",
    "validate_records",
]

_FLOAT_MAX = sys.float_info.max


class ValidationError(ValueError):
    """Raised when a record list fails validation.

    Carries the position and field of the first offending entry so callers
    (the CLI in particular) can point at the exact input line.
    """

    def __init__(self, index: int, fieldname: str, message: str):
        self.index = index
        self.fieldname = fieldname
        super().__init__(f"record {index}: {message}")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


@dataclass(frozen=True)
class TestRecord:
    """One hypothesis test: an id, its Bayes factor, and optional summary stats.

    ``bf`` is the null-based Bayes factor on natural scale and must be a
    positive finite float. ``log_bf`` is its exact logarithm; when a Bayes
    factor is too large for natural-scale floats, construct the record via
    :meth:`from_log_bf`, which stores the exact log value and saturates the
    natural-scale field at the largest representable float. Downstream code
    that cares about extreme values (posterior computation, sorting) reads
    ``log_bf``; threshold comparisons on ``bf`` still behave because the
    saturated value exceeds any practical cutoff.
    """

    id: str
    bf: float
    z: float | None = None
    se: float | None = None
    log_bf: float = field(default=math.nan)

    def __post_init__(self):
        _require(isinstance(self.id, str) and self.id != "", "id must be a non-empty string")
        bf = float(self.bf)
        _require(math.isfinite(bf) and bf > 0.0, "bf must be a positive finite number")
        object.__setattr__(self, "bf", bf)
        if self.z is not None:
            z = float(self.z)
            _require(math.isfinite(z), "z must be finite")
            object.__setattr__(self, "z", z)
        if self.se is not None:
            se = float(self.se)
            _require(math.isfinite(se) and se > 0.0, "se must be positive")
            object.__setattr__(self, "se", se)
        lb = float(self.log_bf)
        if math.isnan(lb):
            lb = math.log(bf)
        _require(math.isfinite(lb), "log_bf must be finite")
        object.__setattr__(self, "log_bf", lb)

    @classmethod
    def from_log_bf(
        cls,
        id: str,
        log_bf: float,
        z: float | None = None,
        se: float | None = None,
    ) -> "TestRecord":
        """Build a record from a log-scale Bayes factor.

        The natural-scale field saturates at the float maximum instead of
        overflowing to inf, so the ``bf`` invariant (positive, finite) holds
        for arbitrarily large log values.
        """
        lb = float(log_bf)
        _require(math.isfinite(lb), "log_bf must be finite")
        bf = math.exp(lb) if lb < 709.0 else _FLOAT_MAX
        if bf <= 0.0:  # underflow below the smallest subnormal
            bf = 5e-324
        return cls(id=id, bf=bf, z=z, se=se, log_bf=lb)


class Pi0Method(str, Enum):
    """How a null-proportion estimate was obtained."""

    EBF = "ebf"
    QBF = "qbf"
    STOREY = "storey"
    FIXED = "fixed"


@dataclass(frozen=True)
class Pi0Estimate:
    """An estimated proportion of true nulls among m tests."""

    pi0_hat: float
    method: Pi0Method
    m: int
    gamma: float | None = None
    d0: int | None = None

    def __post_init__(self):
        _require(isinstance(self.m, int) and self.m >= 1, "m must be a positive integer")
        p = float(self.pi0_hat)
        _require(0.0 <= p <= 1.0, "pi0_hat must lie in [0, 1]")
        object.__setattr__(self, "pi0_hat", p)
        _require(isinstance(self.method, Pi0Method), "method must be a Pi0Method")
        if self.gamma is not None:
            g = float(self.gamma)
            _require(0.0 < g < 1.0, "gamma must lie in (0, 1)")
            object.__setattr__(self, "gamma", g)
        if self.method is Pi0Method.EBF:
            _require(self.d0 is not None, "EBF estimates must carry d0")
        if self.d0 is not None:
            _require(isinstance(self.d0, int) and 0 <= self.d0 <= self.m, "d0 must lie in [0, m]")
            if self.method is Pi0Method.EBF:
                _require(p == self.d0 / self.m, "EBF pi0_hat must equal d0 / m exactly")


@dataclass(frozen=True)
class PosteriorTable:
    """Per-test conservative posterior alternative probabilities.

    ``entries`` preserves input order as (id, v_hat) pairs; ``pi0`` records
    the estimate the posteriors were computed under. For a fixed pi0_hat < 1
    the v_hat values are strictly increasing in the Bayes factor, with ties
    only between equal Bayes factors.
    """

    entries: tuple[tuple[str, float], ...]
    pi0: Pi0Estimate

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((str(i), float(v)) for i, v in self.entries))
        for i, v in self.entries:
            _require(0.0 <= v <= 1.0, f"v_hat for {i!r} must lie in [0, 1]")
        _require(isinstance(self.pi0, Pi0Estimate), "pi0 must be a Pi0Estimate")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DecisionReport:
    """Outcome of thresholding posterior probabilities at level alpha.

    ``rejected`` is exactly the set of ids whose v_hat exceeds ``threshold``;
    ``estimated_bfdr`` is the mean of (1 - v_hat) over the rejected set, zero
    when nothing is rejected. ``auto_rejected`` marks ids whose Bayes factor
    cleared the automatic-rejection bound and is always a subset of
    ``rejected``.
    """

    alpha: float
    threshold: float
    rejected: frozenset[str]
    estimated_bfdr: float
    auto_rejected: frozenset[str] = frozenset()

    def __post_init__(self):
        a = float(self.alpha)
        _require(0.0 < a < 1.0, "alpha must lie in (0, 1)")
        object.__setattr__(self, "alpha", a)
        t = float(self.threshold)
        _require(0.0 <= t <= 1.0, "threshold must lie in [0, 1]")
        object.__setattr__(self, "threshold", t)
        object.__setattr__(self, "rejected", frozenset(self.rejected))
        object.__setattr__(self, "auto_rejected", frozenset(self.auto_rejected))
        b = float(self.estimated_bfdr)
        if self.rejected:
            _require(b <= a, "estimated_bfdr must not exceed alpha when anything is rejected")
        else:
            _require(b == 0.0, "estimated_bfdr must be 0 for an empty rejection set")
        object.__setattr__(self, "estimated_bfdr", b)
        _require(
            self.auto_rejected <= self.rejected,
            "auto_rejected must be a subset of rejected",
        )

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)


@dataclass(frozen=True)
class SimTruth:
    """Ground truth for a simulated dataset.

    ``ids`` and ``z`` are aligned with the generated record order; z is 1
    for a true alternative and 0 for a true null. ``params`` snapshots the
    generating configuration.
    """

    ids: tuple[str, ...]
    z: tuple[int, ...]
    params: Mapping[str, object]

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))
        _require(len(self.ids) == len(self.z), "ids and z must have equal length")
        _require(all(v in (0, 1) for v in self.z), "z entries must be 0 or 1")
        object.__setattr__(self, "params", dict(self.params))

    def __len__(self) -> int:
        return len(self.z)

    @property
    def n_alternatives(self) -> int:
        return sum(self.z)


@dataclass(frozen=True)
class EvalReport:
    """Realized error rates of a decision against simulation truth."""

    fdp: float
    fnp: float
    n_rejected: int
    n_true_alt: int

    def __post_init__(self):
        _require(0.0 <= self.fdp <= 1.0, "fdp must lie in [0, 1]")
        _require(0.0 <= self.fnp <= 1.0, "fnp must lie in [0, 1]")
        _require(self.n_rejected >= 0, "n_rejected must be non-negative")
        _require(self.n_true_alt >= 0, "n_true_alt must be non-negative")
        if self.n_rejected == 0:
            _require(self.fdp == 0.0, "fdp must be 0 when nothing is rejected")


def validate_records(records: Iterable[TestRecord | Mapping[str, object]]) -> list[TestRecord]:
    """Check a record sequence, reporting the position of the first violation.

    Accepts already-built ``TestRecord`` objects or plain mappings with the
    record fields; mappings are converted. Returns the validated list.
    """
    out: list[TestRecord] = []
    seen: set[str] = set()
    for idx, item in enumerate(records):
        try:
            if isinstance(item, TestRecord):
                rec = TestRecord(item.id, item.bf, item.z, item.se, item.log_bf)
            elif isinstance(item, Mapping):
                rec = TestRecord(**item)
            else:
                raise ValueError("entries must be TestRecord or mapping")
        except TypeError as exc:
            raise ValidationError(idx, "?", str(exc)) from exc
        except ValueError as exc:
            msg = str(exc)
            fieldname = msg.split(" ", 1)[0] if msg else "?"
            raise ValidationError(idx, fieldname, msg) from exc
        if rec.id in seen:
            raise ValidationError(idx, "id", f"duplicate id {rec.id!r}")
        seen.add(rec.id)
        out.append(rec)
    return out
