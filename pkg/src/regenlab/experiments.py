"""Registry of named experiments, their configs and the runners behind them.

Each runner returns a :class:`SweepResult`: one :class:`StatReport` per
check, the PASS/FAIL verdict and, for Monte Carlo experiments, the per-replica
values of the headline statistic for CSV export.

Randomness: replicas are generated in fixed-size blocks and block ``b`` of
sub-simulation ``tag`` at mesh ``n`` draws from the stream
``(seed, (experiment index, tag, n, b))``. Outputs therefore depend only on
the config, never on execution order.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np
from scipy import stats

from . import closedform as cf
from .cutout import draw_cutout_lengths, gwi_cutout_lengths, uncovered_mask
from .errors import ParameterError, UsageError
from .localtime import (
    big_jump_arrival_index, count_jumps_between, first_zero_after, inverse_local_time,
    last_zero_index, zero_counts,
)
from .processes import (
    SIMPLE_SYMMETRIC, ScaledLatticePath, gw_extinction_times, gwi_direct_batch, gwi_last_zero, heavy,
    perturbed_reflected_batch, reflected_ssrw_batch, sample_excursion_lengths, simulate_lattice_walks,
)
from .randomness import RngStream, derive_stream, sample_exponential
from .verify import (
    StatReport, SweepResult, bound_report, chi_square, empirical_cdf, interval_report, ks_distance,
    ks_trend_ok, ks_two_sample, loglog_slope, mean_and_se, pooled_cells, verdict_of,
)

DEFAULT_SEED = 20251015
CELL_BUDGET = 2**22  # array cells per simulated block
EXCURSION_BLOCK = 2**17

# Calibration targets, kept apart from the code that uses them.
TOLERANCES = {
    "version": "1",
    "cutout-coverage": {"closed_form_abs": 1e-12, "zero_set_joint_se": 4.0, "renewal_sigma": 3.0,
                        "method_ks": 0.01},
    "gw-extinction": {"scaling_abs": 1e-4, "sigma": 3.0},
    "reflected-ssrw-localtime": {"ks_final": 0.05, "ks_slack": 0.01},
    "vague-convergence": {"relative": 0.10},
    "reflected-ssrw-arcsine": {"ks": 0.05},
    "gwi-renewal": {"sigma": 3.0, "slope": 0.05},
    "gwi-glaw": {"sigma": 3.0, "abs_slack": 0.02, "ks": 0.06},
    "negbin-check": {"pmf_sup": 0.01, "chi2_quantile": 0.999},
    "laplace-gd": {"sigma": 3.0},
    "stable-walk-scaling": {"slope": 0.08, "ks": 0.04},
    "negative-control": {"atom_min": 0.9, "ks": 0.05},
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = DEFAULT_SEED
    replicas: int | None = None
    n_grid: list[int] | None = None
    params: dict = field(default_factory=dict)
    out: str | None = None
    samples: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown config fields {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Experiment:
    id: str
    claim: str
    runner: Callable[["RunContext"], SweepResult]
    replicas: int | None
    n_grid: tuple[int, ...]
    params: dict = field(default_factory=dict)


@dataclass
class RunContext:
    index: int
    seed: int
    replicas: int
    n_grid: list[int]
    params: dict
    experiment: str

    def stream(self, *key: int) -> RngStream:
        return derive_stream(self.seed, (self.index, *key))

    def blocks(self, tag: int, n: int, total: int, width: int) -> Iterator[tuple[RngStream, int]]:
        """Streams and sizes covering ``total`` replicas of ``width`` cells each.

        Pass ``width=1`` for samplers whose memory does not grow with the
        horizon (iid excursions); they then run in blocks of EXCURSION_BLOCK.
        """
        per = EXCURSION_BLOCK if width == 1 else CELL_BUDGET // width
        per = max(1, min(total, per))
        for b, start in enumerate(range(0, total, per)):
            yield self.stream(tag, n, b), min(per, total - start)

    def tol(self) -> dict:
        return TOLERANCES[self.experiment]


# --- Shared pieces -------------------------------------------------------------

def exact_reflected_scaling(n: int, level: float, reflection: str) -> float:
    """a_n = mu(S_l) / mu_n(S_l) with both tails exact."""
    return cf.bm_inverse_lt_tail(level) / cf.reflected_ssrw_tail(math.floor(level * n), reflection)


def _reflected_stat(ctx: RunContext, tag: int, n: int, horizon: int, count: int, reflection: str,
                    stat: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    parts = [stat(reflected_ssrw_batch(rng, horizon, size, reflection))
             for rng, size in ctx.blocks(tag, n, count, horizon + 1)]
    return np.concatenate(parts)


def _arcsine(x):
    return cf.generalized_arcsine_cdf(x, 0.5)


# --- closed forms and cutouts ----------------------------------------------------

def closed_form_checks(n_max: int = 1000, m_max: int = 10_000) -> list[StatReport]:
    """Deterministic rows: GW iterate vs composition, semigroup, cutout CDF summand."""
    rows = []
    s_grid = np.array([0.0, 0.25, 0.5, 0.9])
    composed = s_grid.copy()
    worst = 0.0
    for n in range(1, n_max + 1):
        composed = cf.gw_offspring_pgf(composed)
        worst = max(worst, float(np.max(np.abs(composed - cf.gw_iterate(n, s_grid)))))
    rows.append(bound_report("cutout-coverage", n_max, worst, 1e-12, check="gw-iterate-vs-composition"))

    worst = 0.0
    for a in (1, 3, 10, 100, 500):
        for b in (1, 2, 7, 50, 500):
            lhs = cf.gw_iterate(a + b, s_grid)
            rhs = cf.gw_iterate(a, cf.gw_iterate(b, s_grid))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    rows.append(bound_report("cutout-coverage", 1000, worst, 1e-12, check="gw-iterate-semigroup"))

    for label, summand in (
        ("cutout-cdf-vs-stated-summand", lambda p, m: 1 - (1 - p) / (1 + p * m)),
        ("cutout-cdf-vs-swapped-summand", lambda p, m: 1 - p / (1 + (1 - p) * m)),
    ):
        worst = Fraction(0)
        for p in (Fraction(1, 4), Fraction(1, 3)):
            params = cf.GwiParams(p)
            for m in range(m_max + 1):
                worst = max(worst, abs(cf.cutout_length_cdf(params, m) - summand(p, m)))
        rows.append(StatReport("cutout-coverage", m_max, float(worst), 0.0, passed=worst == 0, check=label))
    return rows


def run_cutout_coverage(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    p = float(ctx.params["p"])
    params = cf.GwiParams(p)
    horizon = ctx.n_grid[-1]
    M = ctx.replicas
    rows = closed_form_checks()
    for r in rows:
        r.seed, r.replicas = ctx.seed, 0

    # cutout uncovered sets vs GWI zero sets
    uncovered = np.concatenate([uncovered_mask(gwi_cutout_lengths(rng, params, horizon, size))
                              for rng, size in ctx.blocks(1, horizon, M, horizon + 1)])
    zeros = np.concatenate([gwi_direct_batch(rng, p, horizon, size) == 0
                            for rng, size in ctx.blocks(2, horizon, M, horizon + 1)])
    for j in ctx.params["zero_set_indices"]:
        a, b = uncovered[:, j].mean(), zeros[:, j].mean()
        se = math.sqrt(a * (1 - a) / M + b * (1 - b) / M)
        rows.append(interval_report(ctx.experiment, j, float(a), se, float(b), tol["zero_set_joint_se"],
                                    seed=ctx.seed, replicas=M, check="uncovered-vs-gwi-zero-set"))

    ref = cf.gwi_renewal_densities(params, horizon)
    emp = uncovered.mean(axis=0)
    sigma = np.sqrt(ref * (1 - ref) / M)
    z = np.abs(emp[1:] - ref[1:]) / sigma[1:]
    rows.append(bound_report(ctx.experiment, horizon, float(z.max()), tol["renewal_sigma"], seed=ctx.seed,
                             replicas=M, check="renewal-density-max-z"))

    # the two length samplers agree in law
    cap = ctx.params["method_cap"]
    inv = draw_cutout_lengths(ctx.stream(3, 0, 0), params, M, "invert", cap)
    sim = draw_cutout_lengths(ctx.stream(4, 0, 0), params, M, "simulate", cap)
    rows.append(bound_report(ctx.experiment, cap, ks_two_sample(inv, sim), tol["method_ks"], ks=True,
                             seed=ctx.seed, replicas=M, check="invert-vs-simulate-ks"))
    first_uncovered = np.where(uncovered[:, 1:].any(axis=1), uncovered[:, 1:].argmax(axis=1) + 1, horizon + 1)
    return SweepResult(rows, verdict_of(rows), first_uncovered)


def run_gw_extinction(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    big = ctx.params["scaling_n"]
    val = cf.gw_extinction_cdf_discrete(big, 1.0, 1.0)
    rows = [StatReport(ctx.experiment, big, val, math.exp(-1), passed=abs(val - math.exp(-1)) <= tol["scaling_abs"],
                       seed=ctx.seed, check="scaling-limit")]
    init, m = ctx.params["initial"], ctx.params["generation"]
    times = np.concatenate([gw_extinction_times(rng, np.full(size, init), m + 1)
                            for rng, size in ctx.blocks(1, m, ctx.replicas, m + 1)])
    ref = float(cf.gw_iterate(m, 0.0)) ** init
    est = float(np.mean(times <= m))
    se = math.sqrt(ref * (1 - ref) / ctx.replicas)
    rows.append(interval_report(ctx.experiment, m, est, se, ref, tol["sigma"], seed=ctx.seed,
                                replicas=ctx.replicas, check="extinction-probability"))
    return SweepResult(rows, verdict_of(rows), times)


# --- reflected simple walk -----------------------------------------------------------

def run_reflected_localtime(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    refl, level = ctx.params["reflection"], ctx.params["level"]
    rows, ks_vals, samples = [], [], None
    for n in ctx.n_grid:
        a_n = exact_reflected_scaling(n, level, refl)
        vals = _reflected_stat(ctx, 0, n, n, ctx.replicas, refl, lambda v: zero_counts(v, v.shape[1] - 1)) / a_n
        ks = ks_distance(empirical_cdf(vals), cf.half_normal_cdf)
        ks_vals.append(ks)
        final = n == ctx.n_grid[-1]
        rows.append(StatReport(ctx.experiment, n, ks, tol["ks_final"] if final else None, ks,
                               passed=ks <= tol["ks_final"] if final else True, seed=ctx.seed,
                               replicas=ctx.replicas, check="ks-half-normal"))
        samples = vals
    rise = max([b - a for a, b in zip(ks_vals, ks_vals[1:])], default=0.0)
    rows.append(StatReport(ctx.experiment, ctx.n_grid[-1], rise, tol["ks_slack"],
                           passed=ks_trend_ok(ks_vals, tol["ks_slack"]), seed=ctx.seed,
                           replicas=ctx.replicas, check="ks-max-rise"))
    return SweepResult(rows, verdict_of(rows), samples)


def run_vague_convergence(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    refl, level, xs = ctx.params["reflection"], ctx.params["level"], ctx.params["x"]
    rows, lengths = [], None
    for n in ctx.n_grid:
        a_n = exact_reflected_scaling(n, level, refl)
        cap = math.ceil(max(xs) * n) + 1
        lengths = np.concatenate([
            sample_excursion_lengths(rng, SIMPLE_SYMMETRIC, size, cap, reflected=refl == "minimum")
            for rng, size in ctx.blocks(0, n, ctx.replicas, 1)])
        for x in xs:
            q = float(np.mean(lengths > x * n))
            est = a_n * q
            se = a_n * math.sqrt(q * (1 - q) / lengths.size)
            ref = cf.bm_inverse_lt_tail(x)
            rows.append(StatReport(ctx.experiment, n, est, ref, None, est - 3 * se, est + 3 * se,
                                   abs(est - ref) / ref <= tol["relative"], ctx.seed, ctx.replicas,
                                   check=f"scaled-tail-x={x}"))
    return SweepResult(rows, verdict_of(rows), lengths)


def run_reflected_arcsine(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    refl = ctx.params["reflection"]
    rows, g = [], None
    for n in ctx.n_grid:
        g = _reflected_stat(ctx, 0, n, n, ctx.replicas, refl, lambda v: last_zero_index(v, v.shape[1] - 1)) / n
        ks = ks_distance(empirical_cdf(g), _arcsine)
        final = n == ctx.n_grid[-1]
        rows.append(StatReport(ctx.experiment, n, ks, tol["ks"] if final else None, ks,
                               passed=ks <= tol["ks"] if final else True, seed=ctx.seed,
                               replicas=ctx.replicas, check="ks-arcsine"))
    return SweepResult(rows, verdict_of(rows), g)


def _first_big_jump_stats(values: np.ndarray, n: int, a: float, eps: float) -> np.ndarray:
    out = np.zeros((values.shape[0], 2), dtype=np.int64)
    for i, row in enumerate(values):
        tau = inverse_local_time(ScaledLatticePath(row, mesh=n))
        t = big_jump_arrival_index(tau, a, 1)
        out[i] = (-1, -1) if t is None else (t, count_jumps_between(tau, eps, a, 1))
    return out


def run_negbin_check(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    refl, a, eps = ctx.params["reflection"], ctx.params["a"], ctx.params["eps"]
    n = ctx.n_grid[-1]
    horizon = ctx.params["horizon_factor"] * n
    stat = _reflected_stat(ctx, 0, n, horizon, ctx.replicas, refl, lambda v: _first_big_jump_stats(v, n, a, eps))
    T, sigma = stat[:, 0], stat[:, 1]
    ok = T > 0
    M = int(ok.sum())
    T, sigma = T[ok], sigma[ok]
    q = cf.reflected_ssrw_tail(math.floor(a * n), refl)
    kmax = int(T.max())
    k = np.arange(1, kmax + 1)
    emp = np.bincount(T, minlength=kmax + 1)[1:] / M
    ref = (1 - q) ** (k - 1) * q
    sup = float(np.max(np.abs(emp - ref)))
    rows = [bound_report(ctx.experiment, n, sup, tol["pmf_sup"], seed=ctx.seed, replicas=M,
                         check="first-big-jump-pmf-sup")]

    # given T = t, the t-1 small jumps longer than eps are Bin(t - 1, r)
    small_tail = cf.reflected_ssrw_tail(math.floor(eps * n), refl)
    r = (small_tail - q) / (1 - q)
    stat_total, df = 0.0, 0
    for t in np.unique(T):
        s = sigma[T == t] - 1
        obs = np.bincount(s, minlength=t)[:t].astype(float)
        exp = s.size * stats.binom.pmf(np.arange(t), t - 1, r)
        o, e = pooled_cells(obs, exp)
        if o.size >= 2:
            stat_total += chi_square(o, e)
            df += o.size - 1
    crit = float(stats.chi2.ppf(tol["chi2_quantile"], max(df, 1)))
    rows.append(StatReport(ctx.experiment, n, stat_total, crit, passed=stat_total < crit, seed=ctx.seed,
                           replicas=M, check=f"conditional-binomial-chi2-df={df}"))
    return SweepResult(rows, verdict_of(rows), stat[:, 0])


def run_laplace_gd(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    refl = ctx.params["reflection"]
    alpha, beta, theta = ctx.params["alpha"], ctx.params["beta"], ctx.params["theta"]
    n = ctx.n_grid[-1]
    horizon = ctx.params["horizon_factor"] * n
    parts = []
    for rng, size in ctx.blocks(0, n, ctx.replicas, horizon + 1):
        v = reflected_ssrw_batch(rng, horizon, size, refl)
        k = np.floor(n * sample_exponential(rng, theta, size)).astype(np.int64)
        g = last_zero_index(v, np.minimum(k, horizon))
        d = first_zero_after(v, k)
        # a missing right endpoint means d > horizon, whose weight is below exp(-beta * horizon / n)
        parts.append(np.where((d >= 0) & (k < horizon), np.exp(-(alpha * g + beta * d) / n), 0.0))
    vals = np.concatenate(parts)
    est, se = mean_and_se(vals)
    ref = cf.gd_laplace_discrete(cf.reflected_ssrw_mgf(n, refl), theta, alpha, beta)
    rows = [interval_report(ctx.experiment, n, est, se, ref, tol["sigma"], seed=ctx.seed,
                            replicas=ctx.replicas, check="laplace-g-d")]
    return SweepResult(rows, verdict_of(rows), vals)


# --- GWI ---------------------------------------------------------------------------

def run_gwi_renewal(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    p = float(ctx.params["p"])
    params = cf.GwiParams(p)
    m_max = ctx.n_grid[-1]
    M = ctx.replicas
    hits = np.zeros(m_max + 1)
    for rng, size in ctx.blocks(0, m_max, M, m_max + 1):
        hits += np.count_nonzero(gwi_direct_batch(rng, p, m_max, size) == 0, axis=0)
    emp = hits / M
    ref = cf.gwi_renewal_densities(params, m_max)
    sigma = np.sqrt(ref * (1 - ref) / M)
    rows = []
    for m in range(1, m_max + 1):
        rows.append(interval_report(ctx.experiment, m, float(emp[m]), float(sigma[m]), float(ref[m]),
                                    tol["sigma"], seed=ctx.seed, replicas=M, check="renewal-density"))

    lo, hi = ctx.params["slope_range"]
    xs = np.unique(np.geomspace(lo, hi, 60).astype(np.int64))
    u = cf.gwi_renewal_densities(params, int(xs[-1]))[xs]
    fit = loglog_slope(xs, u)
    target = -params.delta
    rows.append(StatReport(ctx.experiment, int(hi), fit.slope, target,
                           passed=abs(fit.slope - target) <= tol["slope"], check="renewal-loglog-slope"))
    return SweepResult(rows, verdict_of(rows), None)


def run_gwi_glaw(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    p, theta, alpha = float(ctx.params["p"]), ctx.params["theta"], ctx.params["alpha"]
    params = cf.GwiParams(p)
    n = ctx.n_grid[-1]
    M = ctx.replicas
    parts = []
    for rng, size in ctx.blocks(0, n, M, n):
        horizons = np.floor(n * sample_exponential(rng, theta, size)).astype(np.int64)
        parts.append(np.exp(-alpha * gwi_last_zero(rng, p, horizons) / n))
    est, se = mean_and_se(np.concatenate(parts))
    ref = cf.gd_laplace_subordinator(cf.stable_subordinator(1 - params.delta), theta, alpha, 0.0)
    rows = [interval_report(ctx.experiment, n, est, se, ref, tol["sigma"], tol["abs_slack"], seed=ctx.seed,
                            replicas=M, check="laplace-g")]
    g = np.concatenate([gwi_last_zero(rng, p, np.full(size, n)) for rng, size in ctx.blocks(1, n, M, n)]) / n
    ks = ks_distance(empirical_cdf(g), lambda x: cf.generalized_arcsine_cdf(x, 1 - params.delta))
    rows.append(bound_report(ctx.experiment, n, ks, tol["ks"], ks=True, seed=ctx.seed, replicas=M,
                             check="ks-generalized-arcsine"))
    return SweepResult(rows, verdict_of(rows), g)


# --- heavy-tailed walk --------------------------------------------------------------

def run_stable_scaling(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    alpha, level = ctx.params["alpha"], ctx.params["level"]
    rho = 1 - 1 / alpha
    law = heavy(alpha)
    count = ctx.params["excursions"]
    rows, scalings = [], []
    for n in ctx.n_grid:
        cap = math.floor(level * n) + 1
        lengths = np.concatenate([sample_excursion_lengths(rng, law, size, cap)
                                  for rng, size in ctx.blocks(0, n, count, 1)])
        q = float(np.mean(lengths > level * n))
        a_n = cf.stable_levy_tail(rho, level) / q
        se = a_n * math.sqrt((1 - q) / (q * count))  # delta method on 1/q
        scalings.append(a_n)
        rows.append(StatReport(ctx.experiment, n, a_n, None, None, a_n - 3 * se, a_n + 3 * se, True,
                               ctx.seed, count, check="scaling-constant"))
    fit = loglog_slope(ctx.n_grid, scalings)
    rows.append(StatReport(ctx.experiment, ctx.n_grid[-1], fit.slope, rho,
                           passed=abs(fit.slope - rho) <= tol["slope"], seed=ctx.seed, replicas=count,
                           check="scaling-loglog-slope"))

    scaled = []
    for n, a_n in list(zip(ctx.n_grid, scalings))[-2:]:
        counts = np.concatenate([zero_counts(simulate_lattice_walks(rng, law, n, size), n)
                                 for rng, size in ctx.blocks(1, n, ctx.replicas, n + 1)])
        scaled.append(counts / a_n)
    ks = ks_two_sample(*scaled)
    rows.append(bound_report(ctx.experiment, ctx.n_grid[-1], ks, tol["ks"], ks=True, seed=ctx.seed,
                             replicas=ctx.replicas, check="ks-two-largest-meshes"))
    return SweepResult(rows, verdict_of(rows), scaled[-1])


# --- negative control -----------------------------------------------------------------

def run_negative_control(ctx: RunContext) -> SweepResult:
    tol = ctx.tol()
    rows, g = [], None
    for n in ctx.n_grid:
        p_n = ctx.params["p_n_scale"] / n
        g = np.concatenate([last_zero_index(perturbed_reflected_batch(rng, p_n, n, size), n)
                            for rng, size in ctx.blocks(0, n, ctx.replicas, n + 1)]) / n
        atom = float(np.mean(g == 0))
        rows.append(bound_report(ctx.experiment, n, atom, tol["atom_min"], below=False, seed=ctx.seed,
                                 replicas=ctx.replicas, check="mass-of-g-at-zero"))
        ks = ks_distance(empirical_cdf(g), _arcsine)
        rows.append(bound_report(ctx.experiment, n, ks, tol["ks"], ks=True, seed=ctx.seed,
                                 replicas=ctx.replicas, check="ks-arcsine"))
    return SweepResult(rows, verdict_of(rows), g)


# --- Registry ----------------------------------------------------------------------

_REGISTRY = (
    Experiment("reflected-ssrw-localtime",
               "Reflected walk: L^n_1 / a_n -> half-normal local time of reflected Brownian motion",
               run_reflected_localtime, 50_000, (256, 1024, 4096), {"reflection": "minimum", "level": 1.0}),
    Experiment("reflected-ssrw-arcsine",
               "Reflected walk: last zero before time 1 -> arcsine law",
               run_reflected_arcsine, 50_000, (4096,), {"reflection": "minimum"}),
    Experiment("vague-convergence",
               "a_n mu_n(S_x) -> mu(S_x) = sqrt(2 / (pi x)) for excursion-length tails",
               run_vague_convergence, 1_000_000, (4096,),
               {"reflection": "minimum", "level": 1.0, "x": [0.5, 1.0, 2.0]}),
    Experiment("stable-walk-scaling",
               "Heavy-tailed walk: a_n regularly varying of index 1 - 1/alpha; L^n_1 / a_n settles in law",
               run_stable_scaling, 40_000, tuple(2**k for k in range(8, 15)),
               {"alpha": 1.5, "level": 1.0, "excursions": 100_000}),
    Experiment("gwi-renewal",
               "GWI zero-set renewal density is a product of cutout CDFs and decays like n^-delta",
               run_gwi_renewal, 100_000, (50,), {"p": 1 / 3, "slope_range": [1_000, 100_000]}),
    Experiment("gwi-glaw",
               "GWI zero set: E exp(-alpha g_T) -> (theta / (alpha + theta))^(1 - delta); g_1 generalized arcsine",
               run_gwi_glaw, 50_000, (4096,), {"p": 1 / 3, "theta": 1.0, "alpha": 1.0}),
    Experiment("gw-extinction",
               "Critical geometric GW: extinction CDF from n z ancestors by time n t -> exp(-z / t)",
               run_gw_extinction, 100_000, (30,), {"scaling_n": 10_000, "initial": 10, "generation": 30}),
    Experiment("cutout-coverage",
               "Cutout set from GWI extinction lengths has the law of the GWI zero set",
               run_cutout_coverage, 100_000, (50,),
               {"p": 1 / 3, "zero_set_indices": [1, 2, 5, 10, 20], "method_cap": 1000}),
    Experiment("negbin-check",
               "Index of the first excursion longer than a is geometric; small excursions given it are binomial",
               run_negbin_check, 100_000, (64,),
               {"reflection": "minimum", "a": 1.0, "eps": 0.25, "horizon_factor": 32}),
    Experiment("laplace-gd",
               "Discrete identity for E exp(-alpha g_T - beta d_T) through the excursion-length transform",
               run_laplace_gd, 100_000, (64,),
               {"reflection": "minimum", "alpha": 1.0, "beta": 1.0, "theta": 1.0, "horizon_factor": 40}),
    Experiment("negative-control",
               "Chain with exit probability 1/n at the boundary: local time vanishes, no arcsine limit",
               run_negative_control, 20_000, (1024,), {"p_n_scale": 1.0}),
)

EXPERIMENT_IDS = tuple(e.id for e in _REGISTRY)


def list_experiments() -> list[tuple[str, str]]:
    return [(e.id, e.claim) for e in _REGISTRY]


def get_experiment(experiment_id: str) -> Experiment:
    for e in _REGISTRY:
        if e.id == experiment_id:
            return e
    raise UsageError(f"unknown experiment {experiment_id!r}; valid ids: {', '.join(EXPERIMENT_IDS)}")


def resolve(config: ExperimentConfig) -> ExperimentConfig:
    """Config with every default filled in."""
    exp = get_experiment(config.experiment)
    unknown = set(config.params) - set(exp.params)
    if unknown:
        raise ParameterError(f"unknown parameters for {exp.id}: {sorted(unknown)}")
    replicas = exp.replicas if config.replicas is None else int(config.replicas)
    if replicas < 100:
        raise ParameterError("replicas must be >= 100")
    n_grid = list(exp.n_grid if config.n_grid is None else config.n_grid)
    if not n_grid or n_grid != sorted(set(n_grid)) or n_grid[0] < 1:
        raise ParameterError("n_grid must be a strictly increasing list of positive integers")
    if not 0 <= int(config.seed) < 2**64:
        raise ParameterError("seed must be a 64-bit unsigned integer")
    return ExperimentConfig(exp.id, int(config.seed), replicas, n_grid, {**exp.params, **config.params},
                            config.out, config.samples)


def run_config(config: ExperimentConfig) -> SweepResult:
    cfg = resolve(config)
    ctx = RunContext(EXPERIMENT_IDS.index(cfg.experiment), cfg.seed, cfg.replicas, cfg.n_grid,
                     cfg.params, cfg.experiment)
    return get_experiment(cfg.experiment).runner(ctx)


def build_report(config: ExperimentConfig, result: SweepResult, runtime_ms: int, version: str) -> dict:
    cfg = resolve(config)
    return {
        "experiment": cfg.experiment,
        "params": {"replicas": cfg.replicas, "n_grid": cfg.n_grid, **cfg.params,
                   "tolerances": {"version": TOLERANCES["version"], **TOLERANCES[cfg.experiment]}},
        "seed": cfg.seed,
        "grid": result.rows(),
        "verdict": result.verdict,
        "runtime_ms": int(runtime_ms),
        "version": version,
    }


def timed_run(config: ExperimentConfig) -> tuple[SweepResult, int]:
    start = time.perf_counter()
    result = run_config(config)
    return result, int(round((time.perf_counter() - start) * 1000))
