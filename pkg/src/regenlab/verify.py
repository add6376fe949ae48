"""Statistical comparison harness: empirical CDFs, KS distances, Laplace
transforms, slopes, chi-square pooling and the convergence sweep."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import stats

from .errors import UsageError


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    values: np.ndarray  # sorted

    @property
    def size(self) -> int:
        return self.values.size

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.size

    def left_limit(self, x):
        return np.searchsorted(self.values, x, side="left") / self.size


def empirical_cdf(samples: Sequence[float]) -> EmpiricalCdf:
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise UsageError("empirical CDF of an empty sample")
    x.setflags(write=False)
    return EmpiricalCdf(x)


def ks_distance(ecdf: EmpiricalCdf, ref: Callable) -> float:
    """sup_x |F_hat - F|, checked on both sides of every sample point.

    The left limits compare ``F_hat(x-)`` with ``F(x-)``, so the value is the
    exact sup norm for continuous and lattice references alike. No continuity
    correction is applied.
    """
    pts = np.unique(ecdf.values)
    f = np.clip(np.asarray(ref(pts), dtype=float), 0.0, 1.0)
    f_left = np.clip(np.asarray(ref(np.nextafter(pts, -np.inf)), dtype=float), 0.0, 1.0)
    upper = np.abs(ecdf(pts) - f)
    lower = np.abs(ecdf.left_limit(pts) - f_left)
    return float(max(upper.max(), lower.max()))


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> float:
    return float(stats.ks_2samp(np.asarray(a, float), np.asarray(b, float)).statistic)


def empirical_laplace(samples: Sequence[float], lam: float) -> tuple[float, float]:
    """Mean of ``exp(-lam * x)`` and its standard error."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise UsageError("Laplace transform of an empty sample")
    if lam < 0:
        raise UsageError("lambda must be nonnegative")
    return mean_and_se(np.exp(-lam * x))


def mean_and_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    std_error: float
    intercept: float


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> SlopeFit:
    """Least-squares slope of ``log y`` on ``log x``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 3 or x.size != y.size:
        raise UsageError("need at least 3 paired points")
    if (x <= 0).any() or (y <= 0).any():
        raise UsageError("log-log fit needs positive data")
    fit = stats.linregress(np.log(x), np.log(y))
    return SlopeFit(float(fit.slope), float(fit.stderr), float(fit.intercept))


def pooled_cells(observed: np.ndarray, expected: np.ndarray, min_expected: float = 5.0):
    """Merge adjacent cells left to right until each has expected count >= ``min_expected``.

    A short remainder is folded into the last full cell.
    """
    obs_out, exp_out = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_out:
            obs_out[-1] += o_acc
            exp_out[-1] += e_acc
        else:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
    return np.array(obs_out), np.array(exp_out)


def chi_square(observed: np.ndarray, expected: np.ndarray) -> float:
    observed = np.asarray(observed, float)
    expected = np.asarray(expected, float)
    return float(np.sum((observed - expected) ** 2 / expected))


# --- Reports and sweeps -------------------------------------------------------

@dataclass
class StatReport:
    experiment: str
    n: int
    estimate: float
    reference: float | None = None
    ks: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    passed: bool = False
    seed: int = 0
    replicas: int = 0
    check: str = ""

    def __post_init__(self):
        if self.ci_low is None:
            self.ci_low = self.estimate
        if self.ci_high is None:
            self.ci_high = self.estimate
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise UsageError(f"interval [{self.ci_low}, {self.ci_high}] excludes the estimate {self.estimate}")

    def to_row(self) -> dict:
        """Row in the report grid."""
        return {
            "n": int(self.n),
            "estimate": _finite(self.estimate),
            "reference": None if self.reference is None else _finite(self.reference),
            "ks": None if self.ks is None else _finite(self.ks),
            "ci_low": _finite(self.ci_low),
            "ci_high": _finite(self.ci_high),
            "pass": bool(self.passed),
            "check": self.check,
        }


def _finite(x) -> float:
    x = float(x)
    return x if math.isfinite(x) else (1e308 if x > 0 else -1e308)


def interval_report(experiment: str, n: int, estimate: float, se: float, reference: float,
                    width: float, slack: float = 0.0, **kw) -> StatReport:
    """Pass iff ``|estimate - reference| <= width * se + slack``; the interval is ``estimate +- width*se``."""
    ok = abs(estimate - reference) <= width * se + slack
    return StatReport(experiment, n, estimate, reference, None, estimate - width * se,
                      estimate + width * se, ok, **kw)


def bound_report(experiment: str, n: int, value: float, bound: float, *, below: bool = True,
                 ks: bool = False, **kw) -> StatReport:
    """Pass iff ``value <= bound`` (or ``>=`` when ``below`` is False)."""
    ok = value <= bound if below else value >= bound
    return StatReport(experiment, n, value, bound, value if ks else None, passed=ok, **kw)


@dataclass
class SweepResult:
    reports: list[StatReport] = field(default_factory=list)
    verdict: str = "FAIL"
    samples: np.ndarray | None = None

    def __iter__(self) -> Iterator[StatReport]:
        return iter(self.reports)

    def __len__(self) -> int:
        return len(self.reports)

    def __getitem__(self, i) -> StatReport:
        return self.reports[i]

    def rows(self) -> list[dict]:
        return [r.to_row() for r in self.reports]

    def find(self, check: str) -> list[StatReport]:
        return [r for r in self.reports if r.check == check]


def ks_trend_ok(ks_values: Sequence[float], slack: float) -> bool:
    """No upward trend: each KS at most the previous one plus ``slack``."""
    ks_values = list(ks_values)
    return all(b <= a + slack for a, b in zip(ks_values, ks_values[1:]))


def verdict_of(reports: Sequence[StatReport]) -> str:
    return "PASS" if reports and all(r.passed for r in reports) else "FAIL"


def convergence_sweep(descriptor, n_grid: Sequence[int] | None = None, replicas: int | None = None,
                      seed: int = 0, **params) -> SweepResult:
    """Run one experiment over ``n_grid`` and return its reports and verdict.

    ``descriptor`` is an experiment id or an object from the experiments
    registry. The verdict is PASS only if every report passes, which
    includes the per-experiment trend check across the grid.
    """
    from .experiments import ExperimentConfig, get_experiment, run_config

    exp = get_experiment(descriptor) if isinstance(descriptor, str) else descriptor
    if n_grid is not None and list(n_grid) != sorted(set(n_grid)):
        raise UsageError("n_grid must be strictly increasing")
    if replicas is not None and replicas < 100:
        raise UsageError("replicas must be >= 100")
    cfg = ExperimentConfig(experiment=exp.id, seed=seed, replicas=replicas,
                           n_grid=None if n_grid is None else list(n_grid), params=params)
    return run_config(cfg)

