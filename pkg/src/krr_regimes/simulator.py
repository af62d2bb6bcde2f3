"""Finite-dimensional Gaussian-design ridge regression Monte Carlo.

Data are drawn from the teacher model implied by a spectrum (independent
Gaussian features with the spectrum's variances, labels from the positive
square root of the squared teacher coefficients plus additive noise), ridge
regression is solved exactly, and the excess error is measured in population
form against the known teacher, which removes test-set sampling noise.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateWindowError,
    InvalidParameterError,
    SchemaError,
    SingularSystemError,
    SolverError,
)
from .regimes import RegimeQuery, classify
from .spectrum import Spectrum
from .theory import excess_error_closed

_JITTER_REL = 1e-12


@dataclass(frozen=True)
class LamSchedule:
    """Regularization schedule: 'fixed' lam, 'power' lambda0 * n^-ell, or 'cv' grid search."""

    kind: str
    lam: float = 0.0
    lambda0: float = 1.0
    ell: float = 0.0
    grid: np.ndarray | None = None
    k_folds: int = 5

    def __post_init__(self):
        if self.kind not in ("fixed", "power", "cv"):
            raise InvalidParameterError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "fixed" and self.lam < 0:
            raise InvalidParameterError("fixed lam must be >= 0")
        if self.kind == "power" and not self.lambda0 > 0:
            raise InvalidParameterError("lambda0 must be > 0")

    def lam_at(self, n: int) -> float | None:
        """Schedule value at sample count n; None for cv (chosen per dataset)."""
        if self.kind == "fixed":
            return self.lam
        if self.kind == "power":
            if math.isinf(self.ell):
                return 0.0
            return self.lambda0 * float(n) ** (-self.ell)
        return None


@dataclass(frozen=True)
class SimConfig:
    """One Monte-Carlo learning-curve specification.

    Per-trial randomness is derived from (master_seed, n, trial_index)
    through numpy's SeedSequence, so each trial is reproducible on its own
    and independent of execution order.  theory_spectrum, when given, is
    used for the attached closed-form column (the simulation spectrum may
    be truncated harder than the theory one); regime_params = (alpha, r),
    when given, lets rows carry a regime label.
    """

    spectrum: Spectrum
    n_values: tuple[int, ...]
    sigma: float
    lam_schedule: LamSchedule
    trials: int
    master_seed: int
    theory_spectrum: Spectrum | None = None
    regime_params: tuple[float, float] | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if any(n < 1 for n in self.n_values):
            raise InvalidParameterError("all sample counts must be >= 1")
        if self.sigma < 0:
            raise InvalidParameterError("noise std must be >= 0")
        if self.workers < 1:
            raise InvalidParameterError("workers must be >= 1")


@dataclass(frozen=True)
class CurveRow:
    n: int
    lam_used: float
    mean_excess: float
    std_excess: float
    trials: int
    theory_excess: float
    regime: str


@dataclass(frozen=True)
class LearningCurve:
    rows: tuple[CurveRow, ...] = field(default_factory=tuple)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["n", "lambda", "mean_excess", "std_excess", "trials",
                        "theory_excess", "regime"])
            for row in self.rows:
                w.writerow([row.n, f"{row.lam_used:.17g}", f"{row.mean_excess:.17g}",
                            f"{row.std_excess:.17g}", row.trials,
                            f"{row.theory_excess:.17g}", row.regime])

    @staticmethod
    def from_csv(path) -> "LearningCurve":
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            expected = ["n", "lambda", "mean_excess", "std_excess", "trials",
                        "theory_excess", "regime"]
            if header is None or [h.strip() for h in header] != expected:
                raise SchemaError(f"{path}: expected header {','.join(expected)}")
            rows = []
            for rec in reader:
                if not rec:
                    continue
                rows.append(CurveRow(n=int(rec[0]), lam_used=float(rec[1]),
                                     mean_excess=float(rec[2]), std_excess=float(rec[3]),
                                     trials=int(rec[4]), theory_excess=float(rec[5]),
                                     regime=rec[6]))
        return LearningCurve(rows=tuple(rows))


def trial_seed(master_seed: int, n: int, trial_index: int) -> np.random.SeedSequence:
    """Splittable per-trial seed: hash of (master seed, sample count, trial index)."""
    return np.random.SeedSequence(entropy=(int(master_seed), int(n), int(trial_index)))


def sample_dataset(spectrum: Spectrum, n: int, sigma: float, seed):
    """Draw (features, labels) from the Gaussian teacher model.

    Row mu holds independent coordinates with variance eigenvalue_k; the
    label is the teacher response (positive-root coefficients) plus
    sigma-scaled standard normal noise.
    """
    if n < 1:
        raise InvalidParameterError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(spectrum.eigenvalues)
    features = rng.standard_normal((n, spectrum.p)) * scale
    theta = np.sqrt(spectrum.teacher_sq)
    labels = features @ theta
    if sigma > 0:
        labels = labels + sigma * rng.standard_normal(n)
    return features, labels


def _solve_psd(mat: np.ndarray, rhs: np.ndarray, lam_is_zero: bool) -> np.ndarray:
    """Cholesky solve with a trace-scaled jitter retry in the ridgeless case."""
    try:
        c = scipy.linalg.cho_factor(mat, check_finite=False)
        return scipy.linalg.cho_solve(c, rhs, check_finite=False)
    except scipy.linalg.LinAlgError:
        if not lam_is_zero:
            raise SingularSystemError("ridge system is numerically singular")
    jitter = _JITTER_REL * np.trace(mat) / mat.shape[0]
    try:
        c = scipy.linalg.cho_factor(mat + jitter * np.eye(mat.shape[0]), check_finite=False)
        return scipy.linalg.cho_solve(c, rhs, check_finite=False)
    except scipy.linalg.LinAlgError as err:
        raise SingularSystemError(
            "Gram matrix singular beyond the configured jitter"
        ) from err


def ridge_fit(features: np.ndarray, labels: np.ndarray, lam: float) -> np.ndarray:
    """Exact minimizer of the mean squared error plus lam * ||w||^2.

    Uses the n x n dual system when there are fewer samples than features
    (which also yields the minimum-norm solution at lam = 0), the p x p
    normal equations otherwise.
    """
    if lam < 0:
        raise InvalidParameterError(f"regularization must be >= 0, got {lam}")
    n, p = features.shape
    if n < p:
        gram = features @ features.T
        gram[np.diag_indices_from(gram)] += n * lam
        dual = _solve_psd(gram, labels, lam == 0.0)
        return features.T @ dual
    normal = features.T @ features
    normal[np.diag_indices_from(normal)] += n * lam
    return _solve_psd(normal, features.T @ labels, lam == 0.0)


def excess_error_empirical(w: np.ndarray, spectrum: Spectrum) -> float:
    """Population excess error of weights w against the spectrum's teacher.

    Exact under the Gaussian feature model: sum_k eigenvalue_k * (w_k - theta_k)^2.
    """
    theta = np.sqrt(spectrum.teacher_sq)
    diff = w - theta
    return float((spectrum.eigenvalues * diff * diff)[::-1].sum())


def _cv_fold_slices(n: int, k_folds: int):
    sizes = np.full(k_folds, n // k_folds)
    sizes[: n % k_folds] += 1
    edges = np.concatenate([[0], np.cumsum(sizes)])
    return [(int(edges[i]), int(edges[i + 1])) for i in range(k_folds)]


def default_cv_grid() -> np.ndarray:
    """Zero plus a logarithmic grid over (1e-10, 1e5) with 0.026 log10 step."""
    count = int(round(15.0 / 0.026))
    return np.concatenate([[0.0], 10.0 ** (-10.0 + 0.026 * np.arange(1, count))])


def grid_search_lambda(features: np.ndarray, labels: np.ndarray,
                       lam_grid=None, k_folds: int = 5) -> float:
    """k-fold cross-validated grid search over the regularization.

    Returns the grid value minimizing the mean validation MSE, ties broken
    toward larger regularization.  The per-fold eigendecomposition of the
    training Gram matrix makes the per-grid-point cost quadratic rather
    than cubic, which keeps the default 577-point grid cheap.
    """
    if k_folds < 2:
        raise InvalidParameterError(f"k_folds must be >= 2, got {k_folds}")
    n = features.shape[0]
    if n < k_folds:
        raise InvalidParameterError(f"need at least {k_folds} samples, got {n}")
    lam_grid = default_cv_grid() if lam_grid is None else np.sort(np.asarray(lam_grid, dtype=float))
    if lam_grid.size == 0 or np.any(lam_grid < 0):
        raise InvalidParameterError("lam_grid must be non-empty with entries >= 0")

    gram = features @ features.T
    mse = np.zeros(lam_grid.size)
    for lo, hi in _cv_fold_slices(n, k_folds):
        val_idx = np.arange(lo, hi)
        train_idx = np.concatenate([np.arange(0, lo), np.arange(hi, n)])
        m = train_idx.size
        k_tt = gram[np.ix_(train_idx, train_idx)]
        k_vt = gram[np.ix_(val_idx, train_idx)]
        evals, evecs = np.linalg.eigh(k_tt)
        evals = np.clip(evals, 0.0, None)
        uty = evecs.T @ labels[train_idx]
        b = k_vt @ evecs
        y_val = labels[val_idx]
        floor = max(evals.max(), 1.0) * np.finfo(float).eps * m
        for i, lam in enumerate(lam_grid):
            denom = evals + m * lam
            coef = np.where(denom > floor, uty / np.maximum(denom, floor), 0.0)
            pred = b @ coef
            mse[i] += float(((pred - y_val) ** 2).sum())
    mse /= n

    best_i = 0
    for i in range(1, lam_grid.size):
        if mse[i] <= mse[best_i]:
            best_i = i
    return float(lam_grid[best_i])


def _run_trial(spectrum: Spectrum, n: int, sigma: float, lam: float | None,
               schedule: LamSchedule, master_seed: int, t: int):
    features, labels = sample_dataset(spectrum, n, sigma, trial_seed(master_seed, n, t))
    lam_t = lam
    if lam_t is None:
        lam_t = schedule.lam_at(n)
    w = ridge_fit(features, labels, lam_t)
    return excess_error_empirical(w, spectrum), lam_t


def learning_curve(config: SimConfig) -> LearningCurve:
    """Monte-Carlo learning curve with attached closed-form theory column.

    Trials may run on a thread pool (config.workers > 1); results are
    reduced in trial-index order so the output is bit-identical regardless
    of scheduling.  Individual trial failures are tolerated up to 10% per
    sample count, above which the first failure is re-raised.
    """
    spectrum = config.spectrum
    theory_spec = config.theory_spectrum or spectrum
    rows = []
    for n in sorted(config.n_values):
        lam = config.lam_schedule.lam_at(n)
        if lam is None:
            # Cross-validate once on the first trial's dataset and reuse the
            # choice, keeping one regularization per curve row.
            features, labels = sample_dataset(
                spectrum, n, config.sigma, trial_seed(config.master_seed, n, 0))
            lam = grid_search_lambda(features, labels, config.lam_schedule.grid,
                                     config.lam_schedule.k_folds)

        results: list[float | None] = [None] * config.trials
        failures: list[Exception] = []

        def run(t: int) -> float:
            return _run_trial(spectrum, n, config.sigma, lam,
                              config.lam_schedule, config.master_seed, t)[0]

        if config.workers == 1:
            for t in range(config.trials):
                try:
                    results[t] = run(t)
                except SolverError as err:
                    failures.append(err)
        else:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                futures = [pool.submit(run, t) for t in range(config.trials)]
            for t, fut in enumerate(futures):
                try:
                    results[t] = fut.result()
                except SolverError as err:
                    failures.append(err)

        values = np.array([v for v in results if v is not None], dtype=float)
        if len(failures) > 0.1 * config.trials or values.size == 0:
            raise failures[0]
        mean = float(values.mean())
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        theory = excess_error_closed(n, lam, config.sigma, theory_spec).total
        regime = ""
        if config.regime_params is not None:
            alpha, r = config.regime_params
            if config.lam_schedule.kind == "power":
                ell, lam0 = config.lam_schedule.ell, config.lam_schedule.lambda0
            elif lam == 0.0:
                ell, lam0 = math.inf, 1.0
            else:
                # Fixed positive lam at this n matches ell = 0 with prefactor lam.
                ell, lam0 = 0.0, lam
            label = classify(RegimeQuery(alpha=alpha, r=r, sigma=config.sigma,
                                         ell=ell, n=float(n), lambda0=lam0))
            regime = label.region.value
        rows.append(CurveRow(n=int(n), lam_used=float(lam), mean_excess=mean,
                             std_excess=std, trials=int(values.size),
                             theory_excess=float(theory), regime=regime))
    return LearningCurve(rows=tuple(rows))


def fit_loglog_slope(x, y) -> tuple[float, float]:
    """Ordinary least squares slope and standard error of log y on log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise DegenerateWindowError(f"need at least 3 points, got {x.size}")
    if np.any(y <= 0) or np.any(x <= 0):
        raise DegenerateWindowError("log-log fit needs strictly positive values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    dof = x.size - 2
    sxx = float(((lx - lx.mean()) ** 2).sum())
    stderr = math.sqrt(max(float((resid ** 2).sum()) / dof, 0.0) / sxx) if dof > 0 else 0.0
    return float(slope), float(stderr)


def fit_decay_exponent(curve: LearningCurve, window: tuple[int, int]) -> tuple[float, float]:
    """Log-log slope of mean excess versus n over rows window[0]..window[1] (inclusive)."""
    lo, hi = window
    rows = curve.rows[lo:hi + 1]
    if len(rows) < 3:
        raise DegenerateWindowError(f"window has {len(rows)} points, need >= 3")
    ns = [row.n for row in rows]
    means = [row.mean_excess for row in rows]
    return fit_loglog_slope(ns, means)
