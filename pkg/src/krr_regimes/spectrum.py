"""Covariance spectra and teacher coefficient sequences.

A spectrum couples a non-increasing sequence of positive covariance
eigenvalues with the squared teacher coefficients expressed in the same
eigenbasis.  Spectra are either synthetic (capacity/source power laws with
unit prefactor) or empirical (measured from data and loaded from CSV).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, SchemaError

# Truncation defaults: simulation-facing callers keep the feature space small
# enough to sample, theory-facing callers push the truncation one decade further.
DEFAULT_P_SIMULATION = 10_000
DEFAULT_P_THEORY = 100_000


@dataclass(frozen=True)
class PowerLawParams:
    """Capacity/source power-law parameters.

    alpha : capacity exponent of the eigenvalue decay, must exceed 1.
    r     : source exponent measuring teacher alignment, non-negative.
    p     : truncation dimension of the feature space.
    """

    alpha: float
    r: float
    p: int

    def __post_init__(self):
        if not self.alpha > 1:
            raise InvalidParameterError(f"capacity exponent must be > 1, got {self.alpha}")
        if self.r < 0:
            raise InvalidParameterError(f"source exponent must be >= 0, got {self.r}")
        if self.p < 1:
            raise InvalidParameterError(f"truncation dimension must be >= 1, got {self.p}")


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues and squared teacher coefficients, sorted by decreasing eigenvalue.

    Teacher coefficients are stored squared: no operation in this package
    needs their sign, and the simulator fixes the sign positive when an
    explicit vector is required.
    """

    eigenvalues: np.ndarray
    teacher_sq: np.ndarray

    def __post_init__(self):
        eig = np.asarray(self.eigenvalues, dtype=float)
        tsq = np.asarray(self.teacher_sq, dtype=float)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "teacher_sq", tsq)
        if eig.ndim != 1 or tsq.ndim != 1:
            raise InvalidParameterError("spectrum arrays must be one-dimensional")
        if eig.size == 0:
            raise InvalidParameterError("spectrum must be non-empty")
        if eig.size != tsq.size:
            raise InvalidParameterError(
                f"eigenvalues (len {eig.size}) and teacher_sq (len {tsq.size}) must have equal length"
            )
        if not np.all(eig > 0):
            raise InvalidParameterError("eigenvalues must be strictly positive")
        if np.any(np.diff(eig) > 0):
            raise InvalidParameterError("eigenvalues must be sorted non-increasing")
        if not np.all(tsq >= 0):
            raise InvalidParameterError("squared teacher coefficients must be non-negative")

    @property
    def p(self) -> int:
        return int(self.eigenvalues.size)

    def truncate(self, p: int) -> "Spectrum":
        """Return the spectrum restricted to its first p modes."""
        if p < 1:
            raise InvalidParameterError(f"truncation dimension must be >= 1, got {p}")
        if p >= self.p:
            return self
        return Spectrum(self.eigenvalues[:p], self.teacher_sq[:p])

    def to_csv(self, path) -> None:
        """Write columns (k, eigenvalue, teacher_sq) with a header row."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["k", "eigenvalue", "teacher_sq"])
            for k in range(self.p):
                w.writerow([k + 1, f"{self.eigenvalues[k]:.17g}", f"{self.teacher_sq[k]:.17g}"])

    @staticmethod
    def from_csv(path) -> "Spectrum":
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:3]] != ["k", "eigenvalue", "teacher_sq"]:
                raise SchemaError(f"{path}: expected header 'k,eigenvalue,teacher_sq'")
            eig, tsq = [], []
            for row in reader:
                if not row:
                    continue
                eig.append(float(row[1]))
                tsq.append(float(row[2]))
        return Spectrum(np.array(eig), np.array(tsq))


def power_law_spectrum(params: PowerLawParams) -> Spectrum:
    """Spectrum with eigenvalues k^-alpha and teacher satisfying
    eigenvalue * teacher_sq = k^-(1 + 2 r alpha) for k = 1..p."""
    k = np.arange(1, params.p + 1, dtype=float)
    eigenvalues = k ** (-params.alpha)
    # teacher_sq * eigenvalue = k^-(1 + 2 r alpha) exactly, so
    # teacher_sq = k^(alpha - 1 - 2 r alpha)
    teacher_sq = k ** (params.alpha - 1.0 - 2.0 * params.r * params.alpha)
    return Spectrum(eigenvalues, teacher_sq)


def teacher_variance(spectrum: Spectrum) -> float:
    """Second moment of the noiseless target: sum of eigenvalue * teacher_sq.

    Summed in ascending term order (largest mode index first) to limit
    floating-point cancellation on long spectra.
    """
    terms = spectrum.eigenvalues * spectrum.teacher_sq
    return float(terms[::-1].sum())


# The source/capacity diagnostic classifies the growth of partial-sum
# increments by their log-log slope s:  s < -1 means summable (satisfied),
# s == -1 is the log-divergent limiting case (boundary), s > -1 diverges.
_SLOPE_TOL = 0.05


@dataclass(frozen=True)
class SourceCapacityReport:
    """Diagnostic verdicts for the trace and alignment summability conditions.

    A finite truncation cannot decide convergence, so this reports the
    fitted tail slope of the summand sequences plus a three-way status:
    'satisfied', 'boundary' (logarithmically divergent limiting case) or
    'violated'.
    """

    capacity_status: str
    capacity_slope: float
    source_status: str
    source_slope: float
    bounded: bool = field(default=False)

    def __post_init__(self):
        object.__setattr__(
            self, "bounded", self.capacity_status != "violated" and self.source_status != "violated"
        )


def _tail_slope(terms: np.ndarray) -> float:
    """Log-log slope of per-index terms over the upper half of the index range."""
    n = terms.size
    lo = n // 2
    k = np.arange(lo + 1, n + 1, dtype=float)
    vals = terms[lo:]
    keep = vals > 0
    if keep.sum() < 3:
        return float("nan")
    x = np.log(k[keep])
    y = np.log(vals[keep])
    return float(np.polyfit(x, y, 1)[0])


def _status(slope: float) -> str:
    if np.isnan(slope):
        return "satisfied"
    if slope < -1.0 - _SLOPE_TOL:
        return "satisfied"
    if slope <= -1.0 + _SLOPE_TOL:
        return "boundary"
    return "violated"


def check_source_capacity(spectrum: Spectrum, alpha: float, r: float) -> SourceCapacityReport:
    """Diagnose whether the spectrum is compatible with exponents (alpha, r).

    Checks the finite-p proxies of the two summability conditions: the
    capacity proxy sums eigenvalue^(1/alpha), the source proxy sums
    eigenvalue^(1-2r) * teacher_sq.  Purely diagnostic.
    """
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    cap_terms = spectrum.eigenvalues ** (1.0 / alpha)
    src_terms = spectrum.eigenvalues ** (1.0 - 2.0 * r) * spectrum.teacher_sq
    cap_slope = _tail_slope(cap_terms)
    src_slope = _tail_slope(src_terms)
    return SourceCapacityReport(
        capacity_status=_status(cap_slope),
        capacity_slope=cap_slope,
        source_status=_status(src_slope),
        source_slope=src_slope,
    )
