"""Generators for the discrete regenerative processes.

Every generator starts at the regenerative state 0. Single-path functions
return a :class:`ScaledLatticePath`; the ``*_batch`` variants return a
``(count, horizon + 1)`` integer array of unscaled values and are what the
experiments use.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closedform import GwiParams
from .errors import ParameterError, UsageError
from .randomness import RngStream, sample_geometric, sample_heavy_step


@dataclass(frozen=True, eq=False)
class ScaledLatticePath:
    """Values on a lattice of spacing ``1/space_scale``, indexed by ``k/mesh``."""

    values: np.ndarray
    mesh: int = 1
    space_scale: float = 1.0
    regen_state: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        if values.ndim != 1 or values.size < 1:
            raise UsageError("a path needs at least one value")
        if self.mesh < 1 or not self.space_scale > 0:
            raise UsageError("mesh must be >= 1 and space_scale > 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def horizon(self) -> int:
        return self.values.size - 1

    def times(self) -> np.ndarray:
        return np.arange(self.values.size) / self.mesh

    def scaled_values(self) -> np.ndarray:
        return self.values / self.space_scale + self.regen_state


@dataclass(frozen=True)
class StepLaw:
    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("simple", "heavy"):
            raise ParameterError(f"unknown step law {self.kind!r}")
        if self.kind == "heavy" and not (self.alpha is not None and 1 < self.alpha < 2):
            raise ParameterError(f"heavy steps need alpha in (1, 2), got {self.alpha}")

    def sample(self, rng: RngStream, size) -> np.ndarray:
        if self.kind == "simple":
            return rng.generator.integers(0, 2, size=size, dtype=np.int8) * np.int8(2) - np.int8(1)
        return sample_heavy_step(rng, self.alpha, size)


SIMPLE_SYMMETRIC = StepLaw("simple")


def heavy(alpha: float) -> StepLaw:
    return StepLaw("heavy", alpha)


# --- Random walks ------------------------------------------------------------

def path_from_steps(steps) -> ScaledLatticePath:
    steps = np.asarray(steps, dtype=np.int64)
    return ScaledLatticePath(np.concatenate([[0], np.cumsum(steps)]))


def simulate_lattice_walks(rng: RngStream, step_law: StepLaw, horizon: int, count: int) -> np.ndarray:
    if horizon < 1:
        raise ParameterError("horizon must be >= 1")
    steps = step_law.sample(rng, (count, horizon))
    out = np.zeros((count, horizon + 1), dtype=np.int64 if step_law.kind == "heavy" else np.int32)
    np.cumsum(steps, axis=1, dtype=out.dtype, out=out[:, 1:])
    return out


def simulate_lattice_walk(rng: RngStream, step_law: StepLaw, horizon: int) -> ScaledLatticePath:
    return ScaledLatticePath(simulate_lattice_walks(rng, step_law, horizon, 1)[0])


def scale_walk(path: ScaledLatticePath, n: int, b: float) -> ScaledLatticePath:
    if path.mesh != 1 or path.space_scale != 1.0:
        raise UsageError("path is already scaled")
    return ScaledLatticePath(path.values, mesh=n, space_scale=b, regen_state=path.regen_state)


def reflect_batch(values: np.ndarray) -> np.ndarray:
    """Row-wise ``values - running minimum``."""
    return values - np.minimum.accumulate(values, axis=-1)


def reflect_at_minimum(path: ScaledLatticePath) -> ScaledLatticePath:
    return ScaledLatticePath(reflect_batch(path.values), path.mesh, path.space_scale, path.regen_state)


def reflected_ssrw_batch(rng: RngStream, horizon: int, count: int, reflection: str = "minimum") -> np.ndarray:
    """Simple symmetric walks reflected at their minimum, or taken in absolute value."""
    walks = simulate_lattice_walks(rng, SIMPLE_SYMMETRIC, horizon, count)
    if reflection == "minimum":
        return reflect_batch(walks)
    if reflection == "absolute":
        return np.abs(walks)
    raise ParameterError(f"unknown reflection {reflection!r}")


# --- Galton-Watson processes -------------------------------------------------

def _offspring_totals(rng: RngStream, parents: np.ndarray) -> np.ndarray:
    # sum of `parents` iid geometric(1/2) variables is negative binomial(parents, 1/2)
    alive = parents > 0
    out = np.zeros_like(parents)
    if alive.any():
        out[alive] = rng.generator.negative_binomial(parents[alive], 0.5)
    return out


def gw_batch(rng: RngStream, initial, horizon: int, count: int) -> np.ndarray:
    if horizon < 0:
        raise ParameterError("horizon must be >= 0")
    z = np.zeros((count, horizon + 1), dtype=np.int64)
    z[:, 0] = initial
    for m in range(1, horizon + 1):
        z[:, m] = _offspring_totals(rng, z[:, m - 1])
    return z


def simulate_gw(rng: RngStream, initial: int, horizon: int) -> ScaledLatticePath:
    """Critical GW process with geometric(1/2) offspring, absorbed at 0."""
    if initial < 0:
        raise ParameterError("initial population must be nonnegative")
    return ScaledLatticePath(gw_batch(rng, initial, horizon, 1)[0])


def gw_extinction_times(rng: RngStream, initial: np.ndarray, cap: int) -> np.ndarray:
    """First generation at which each GW process from ``initial`` is empty, capped at ``cap``."""
    z = np.asarray(initial, dtype=np.int64).copy()
    out = np.full(z.size, cap, dtype=np.int64)
    out[z == 0] = 0
    active = np.flatnonzero(z > 0)
    pop = z[active]
    for m in range(1, cap):
        if active.size == 0:
            break
        pop = rng.generator.negative_binomial(pop, 0.5)
        dead = pop == 0
        out[active[dead]] = m
        active, pop = active[~dead], pop[~dead]
    return out


def _check_gwi(p: float) -> GwiParams:
    return GwiParams(p)


def gwi_direct_batch(rng: RngStream, p: float, horizon: int, count: int) -> np.ndarray:
    """GWI from Z_0 = 0: offspring geometric(1/2), immigrants P(k) = (1-p) p**k from generation 1 on."""
    _check_gwi(p)
    if horizon < 0:
        raise ParameterError("horizon must be >= 0")
    z = np.zeros((count, horizon + 1), dtype=np.int64)
    for m in range(1, horizon + 1):
        z[:, m] = _offspring_totals(rng, z[:, m - 1]) + sample_geometric(rng, 1.0 - p, count)
    return z


def simulate_gwi_direct(rng: RngStream, p: float, horizon: int) -> ScaledLatticePath:
    return ScaledLatticePath(gwi_direct_batch(rng, p, horizon, 1)[0])


def gwi_last_zero(rng: RngStream, p: float, horizons: np.ndarray) -> np.ndarray:
    """Last generation ``k <= horizons[i]`` with ``Z_k = 0``, one independent GWI per entry.

    Replicas leave the vectorized loop as soon as their own horizon is reached.
    """
    _check_gwi(p)
    horizons = np.asarray(horizons, dtype=np.int64)
    last = np.zeros(horizons.size, dtype=np.int64)
    order = np.argsort(horizons, kind="stable")
    h_sorted = horizons[order]
    z = np.zeros(horizons.size, dtype=np.int64)
    start = 0
    for m in range(1, int(h_sorted[-1]) + 1 if h_sorted.size else 1):
        start += int(np.searchsorted(h_sorted[start:], m, side="left"))
        idx = order[start:]
        live = z[start:]
        live = _offspring_totals(rng, live) + sample_geometric(rng, 1.0 - p, live.size)
        z[start:] = live
        last[idx[live == 0]] = m
    return last


def gwi_timechange_batch(rng: RngStream, p: float, horizon: int, count: int, k: int = 0) -> np.ndarray:
    """GWI built from the discrete time-change recursion

        C_{-1} = 0,  Z_m = k + X_{C_{m-1}} + Y_m,  C_m = C_{m-1} + Z_m,

    where X has iid steps ``geometric(1/2) - 1`` (downward skip-free) and Y has
    iid immigration steps. The walk X is consumed in order, so each row keeps
    its running value ``X_{C_{m-1}}``.
    """
    _check_gwi(p)
    if horizon < 0:
        raise ParameterError("horizon must be >= 0")
    z = np.zeros((count, horizon + 1), dtype=np.int64)
    x_at_c = np.zeros(count, dtype=np.int64)
    y = np.zeros(count, dtype=np.int64)
    z[:, 0] = k
    for m in range(1, horizon + 1):
        # X advances from C_{m-2} to C_{m-1}, i.e. by Z_{m-1} steps
        need = z[:, m - 1]
        total = int(need.sum())
        if total:
            steps = sample_geometric(rng, 0.5, total) - 1
            csum = np.concatenate([[0], np.cumsum(steps)])
            ends = np.cumsum(need)
            x_at_c += csum[ends] - csum[ends - need]
        y += sample_geometric(rng, 1.0 - p, count)
        z[:, m] = k + x_at_c + y
    return z


def simulate_gwi_timechange(rng: RngStream, p: float, horizon: int) -> ScaledLatticePath:
    return ScaledLatticePath(gwi_timechange_batch(rng, p, horizon, 1)[0])


# --- The perturbed chain ------------------------------------------------------

def perturbed_reflected_batch(rng: RngStream, p_n: float, horizon: int, count: int) -> np.ndarray:
    """Chain on the naturals: 0 -> 1; 1 -> 0 w.p. p_n else 2; i >= 2 -> i +- 1 w.p. 1/2."""
    if not 0.0 <= p_n <= 1.0:
        raise ParameterError(f"p_n must lie in [0, 1], got {p_n}")
    x = np.zeros((count, horizon + 1), dtype=np.int32)
    for j in range(1, horizon + 1):
        prev = x[:, j - 1]
        u = rng.uniform(count)
        up = np.where(prev == 1, u >= p_n, u < 0.5)
        nxt = np.where(up, prev + 1, prev - 1)
        nxt[prev == 0] = 1
        x[:, j] = nxt
    return x


def simulate_perturbed_reflected_walk(rng: RngStream, p_n: float, horizon: int) -> ScaledLatticePath:
    return ScaledLatticePath(perturbed_reflected_batch(rng, p_n, horizon, 1)[0])


# --- Independent excursions ----------------------------------------------------

def sample_excursion_lengths(rng: RngStream, step_law: StepLaw, count: int, cap: int,
                             reflected: bool = False) -> np.ndarray:
    """Lengths (in steps) of ``count`` independent excursions away from 0.

    With ``reflected`` the walk follows ``R -> max(R + step, 0)``, which is
    the walk minus its running minimum. Excursions still running after
    ``cap`` steps are reported as ``cap + 1``.
    """
    lengths = np.full(count, cap + 1, dtype=np.int64)
    active = np.arange(count)
    pos = np.zeros(count, dtype=np.int64)
    for k in range(1, cap + 1):
        if active.size == 0:
            break
        pos = pos + step_law.sample(rng, active.size)
        if reflected:
            np.maximum(pos, 0, out=pos)
        hit = pos == 0
        lengths[active[hit]] = k
        active, pos = active[~hit], pos[~hit]
    return lengths
