"""Real-dataset pipeline: kernels, Gram matrices, feature decomposition under
the empirical measure, teacher extraction and capacity/source estimation.

The feature basis is orthonormal under the empirical measure of the dataset
itself, so the decomposition is exact at the dataset scale: the Gram matrix
factors as phi diag(eigenvalues) phi^T and the extracted teacher interpolates
the labels whenever the Gram matrix is full rank.  Capacity and source
exponents are then read off the log-log slopes of the cumulative eigenvalue
and signal tails.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRangeError,
    IndefiniteMatrixError,
    InvalidParameterError,
    OverlapError,
    SchemaError,
)
from .spectrum import Spectrum

DEFAULT_EIGENVALUE_FLOOR = 1e-12
LOW_R2_WARNING = 0.95


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and scale: 'rbf' exp(-gamma ||x - x'||^2 / 2),
    'polynomial' (1 + gamma <x, x'>)^degree, or 'linear' gamma <x, x'>."""

    kind: str
    gamma: float
    degree: int = 5

    def __post_init__(self):
        if self.kind not in ("rbf", "polynomial", "linear"):
            raise InvalidParameterError(f"unknown kernel kind {self.kind!r}")
        if not self.gamma > 0:
            raise InvalidParameterError(f"gamma must be > 0, got {self.gamma}")
        if self.kind == "polynomial" and self.degree < 1:
            raise InvalidParameterError(f"degree must be >= 1, got {self.degree}")


def gram_matrix(data: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """Pairwise kernel evaluations, symmetric by construction."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise InvalidParameterError("data must be a non-empty 2-d array")
    inner = data @ data.T
    if kernel.kind == "linear":
        gram = kernel.gamma * inner
    elif kernel.kind == "polynomial":
        gram = (1.0 + kernel.gamma * inner) ** kernel.degree
    else:
        sq = np.diag(inner)
        dist = np.clip(sq[:, None] + sq[None, :] - 2.0 * inner, 0.0, None)
        gram = np.exp(-0.5 * kernel.gamma * dist)
    gram = 0.5 * (gram + gram.T)
    if kernel.kind == "rbf":
        np.fill_diagonal(gram, 1.0)
    return gram


@dataclass(frozen=True)
class FeatureDecomposition:
    """Eigenbasis of the Gram matrix under the empirical measure.

    eigenvalues are those of gram / n_tot, descending.  phi is scaled so
    phi^T phi / n_tot is the identity.  theta_star holds the (signed)
    teacher coefficients in the rescaled feature basis; modes whose
    eigenvalue fell below the relative floor are reported in n_floored and
    carry a zero coefficient.
    """

    eigenvalues: np.ndarray
    phi: np.ndarray
    theta_star: np.ndarray
    n_tot: int
    n_floored: int
    floor: float

    def to_spectrum(self) -> Spectrum:
        """Positive-eigenvalue part as a Spectrum (teacher stored squared)."""
        keep = self.eigenvalues > 0
        return Spectrum(self.eigenvalues[keep], self.theta_star[keep] ** 2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["k", "eigenvalue", "theta_star"])
            for k in range(self.eigenvalues.size):
                w.writerow([k + 1, f"{self.eigenvalues[k]:.17g}",
                            f"{self.theta_star[k]:.17g}"])


def feature_decomposition(gram: np.ndarray, labels: np.ndarray,
                          floor_rel: float = DEFAULT_EIGENVALUE_FLOOR) -> FeatureDecomposition:
    """Diagonalize gram / n_tot and extract the teacher coefficients.

    The teacher solves labels = phi Sigma^(1/2) theta_star exactly on the
    modes above the eigenvalue floor; near-null modes are excluded because
    the extraction divides by the eigenvalues.
    """
    gram = np.asarray(gram, dtype=float)
    labels = np.asarray(labels, dtype=float)
    n_tot = gram.shape[0]
    if gram.ndim != 2 or gram.shape[1] != n_tot:
        raise InvalidParameterError("gram must be square")
    if labels.shape != (n_tot,):
        raise InvalidParameterError("labels must be one vector per data row")
    asym = np.abs(gram - gram.T).max()
    scale = max(np.abs(gram).max(), 1.0)
    if asym > 1e-8 * scale:
        raise InvalidParameterError(f"gram matrix asymmetric (max |K-K^T| = {asym:.3e})")

    evals, evecs = np.linalg.eigh(0.5 * (gram + gram.T) / n_tot)
    if evals.min() < -1e-8 * max(evals.max(), 0.0):
        raise IndefiniteMatrixError(
            f"gram matrix has eigenvalue {evals.min():.3e} below the PSD tolerance"
        )
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    phi = np.sqrt(n_tot) * evecs[:, order]

    floor = floor_rel * evals[0] if evals[0] > 0 else 0.0
    active = evals > floor
    theta = np.zeros(n_tot)
    # theta = Sigma^(-1/2) phi^T y / n_tot on the active modes.
    theta[active] = (phi[:, active].T @ labels) / (np.sqrt(evals[active]) * n_tot)
    return FeatureDecomposition(eigenvalues=evals, phi=phi, theta_star=theta,
                                n_tot=n_tot, n_floored=int(np.sum(~active)),
                                floor=float(floor))


def cumulative_tails(eigenvalues: np.ndarray, teacher_sq: np.ndarray):
    """Suffix sums (capacity tail of eigenvalues, source tail of eigenvalue * teacher_sq).

    Accumulated from the smallest terms upward for numerical stability;
    entry k (0-based) holds the sum over indices >= k.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    teacher_sq = np.asarray(teacher_sq, dtype=float)
    cap = np.cumsum(eigenvalues[::-1])[::-1]
    src = np.cumsum((eigenvalues * teacher_sq)[::-1])[::-1]
    return cap, src


def tails_to_csv(cap_tail: np.ndarray, src_tail: np.ndarray, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["k", "cap_tail", "src_tail"])
        for k in range(len(cap_tail)):
            w.writerow([k + 1, f"{cap_tail[k]:.17g}", f"{src_tail[k]:.17g}"])


@dataclass(frozen=True)
class CapacitySourceEstimate:
    """Fitted capacity/source exponents with their fit windows and goodness of fit."""

    alpha_hat: float
    r_hat: float
    fit_range_capacity: tuple[int, int]
    fit_range_source: tuple[int, int]
    r2_capacity: float
    r2_source: float


def default_fit_range(n_tot: int) -> tuple[int, int]:
    """Bulk index window [n^0.1, n^0.6], avoiding the head and the finite-size drop."""
    lo = max(2, int(round(n_tot ** 0.1)))
    hi = max(lo + 4, int(round(n_tot ** 0.6)))
    return lo, min(hi, n_tot)


def _range_fit(tail: np.ndarray, fit_range: tuple[int, int]):
    lo, hi = fit_range
    n = tail.size
    if not (1 <= lo < hi <= n):
        raise DegenerateRangeError(f"fit range ({lo}, {hi}) invalid for tail of length {n}")
    k = np.arange(lo, hi + 1, dtype=float)
    vals = tail[lo - 1:hi]
    keep = vals > 0
    if keep.sum() < 5:
        raise DegenerateRangeError(
            f"fit range ({lo}, {hi}) has {int(keep.sum())} positive points, need >= 5"
        )
    x = np.log(k[keep])
    y = np.log(vals[keep])
    slope, intercept = np.polyfit(x, y, 1)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(((y - slope * x - intercept) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(r2)


def estimate_alpha_r(cap_tail: np.ndarray, src_tail: np.ndarray,
                     fit_range_capacity: tuple[int, int] | None = None,
                     fit_range_source: tuple[int, int] | None = None) -> CapacitySourceEstimate:
    """Capacity and source exponents from the cumulative tails.

    The capacity tail decays like k^(1 - alpha) and the source tail like
    k^(-2 r alpha), so alpha_hat = 1 - capacity slope and
    r_hat = -source slope / (2 alpha_hat).  Warns (does not fail) when a
    fit explains less than 95% of the variance or the capacity estimate
    sits at its summability boundary.
    """
    n = len(cap_tail)
    if fit_range_capacity is None:
        fit_range_capacity = default_fit_range(n)
    if fit_range_source is None:
        fit_range_source = default_fit_range(n)
    cap_slope, r2_cap = _range_fit(np.asarray(cap_tail, dtype=float), fit_range_capacity)
    src_slope, r2_src = _range_fit(np.asarray(src_tail, dtype=float), fit_range_source)
    alpha_hat = 1.0 - cap_slope
    r_hat = -src_slope / (2.0 * alpha_hat) if alpha_hat != 0 else float("nan")
    if r2_cap < LOW_R2_WARNING or r2_src < LOW_R2_WARNING:
        warnings.warn(
            f"tail fits explain little variance (r2 capacity {r2_cap:.3f}, "
            f"source {r2_src:.3f}); power-law form questionable", stacklevel=2)
    if alpha_hat <= 1.05:
        warnings.warn(
            f"capacity estimate {alpha_hat:.3f} at the summability boundary", stacklevel=2)
    return CapacitySourceEstimate(alpha_hat=float(alpha_hat), r_hat=float(r_hat),
                                  fit_range_capacity=tuple(fit_range_capacity),
                                  fit_range_source=tuple(fit_range_source),
                                  r2_capacity=r2_cap, r2_source=r2_src)


def ingest_binary_labels(data: np.ndarray, class_a_rows, class_b_rows,
                         sigma: float, seed) -> np.ndarray:
    """Assign +1 / -1 labels to the two row sets plus seeded Gaussian noise.

    The row sets must be disjoint and together cover every data row (pass a
    pre-filtered data matrix for two-class subsets of a larger dataset).
    Noise is drawn in row order, so the result is reproducible for a given
    seed regardless of how the classes interleave.
    """
    if sigma < 0:
        raise InvalidParameterError(f"noise std must be >= 0, got {sigma}")
    n = np.asarray(data).shape[0]
    a = np.asarray(sorted(class_a_rows), dtype=int)
    b = np.asarray(sorted(class_b_rows), dtype=int)
    overlap = np.intersect1d(a, b)
    if overlap.size:
        raise OverlapError(f"row sets overlap ({overlap.size} rows, first {overlap[:5]})")
    covered = np.union1d(a, b)
    if covered.size != n or (covered.size and (covered[0] < 0 or covered[-1] >= n)):
        raise OverlapError("row sets must partition the data rows")
    labels = np.empty(n)
    labels[a] = 1.0
    labels[b] = -1.0
    rng = np.random.default_rng(seed)
    return labels + sigma * rng.standard_normal(n)


def load_dataset_csv(path, label_column: str = "y"):
    """Numeric dataset CSV with a header row; returns (features, labels or None)."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        values = np.array(rows, dtype=float)
    except ValueError as err:
        raise SchemaError(f"{path}: non-numeric entries ({err})") from err
    if values.shape[1] != len(header):
        raise SchemaError(f"{path}: row width differs from header width")
    if label_column in header:
        j = header.index(label_column)
        labels = values[:, j]
        features = np.delete(values, j, axis=1)
        return features, labels
    return values, None
