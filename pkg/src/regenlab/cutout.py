"""Random cutout sets on the naturals built from GWI extinction lengths.

From each index ``i`` the interval ``{j : i <= j < i + L_i}`` is removed;
what remains is the uncovered set. With ``L_0 = 0`` and the other lengths
iid with the GWI cutout law, the uncovered set has the law of the zero set
of the GWI process started at zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .closedform import GwiParams
from .errors import ParameterError, UsageError
from .processes import gw_extinction_times
from .randomness import RngStream, sample_geometric

METHODS = ("simulate", "invert")


@dataclass(frozen=True, eq=False)
class CutoutSample:
    horizon: int
    lengths: np.ndarray
    uncovered: np.ndarray

    def __contains__(self, j: int) -> bool:
        i = np.searchsorted(self.uncovered, j)
        return bool(i < self.uncovered.size and self.uncovered[i] == j)


def _invert_lengths(params: GwiParams, u: np.ndarray) -> np.ndarray:
    # P(L <= n) = q (n+1) / (1 + q n) >= u  <=>  q n (1 - u) >= u - q.
    # The rearranged test avoids comparing CDF values that differ below
    # double precision when u is close to 1.
    q = 1.0 - float(params.p)
    gap, room = u - q, q * (1.0 - u)
    n = np.ceil(np.maximum(gap, 0.0) / room)
    n = np.minimum(n, 2.0**62)
    n = np.where((n > 0) & ((n - 1) * room >= gap), n - 1, n)
    n = np.where(n * room < gap, n + 1, n)
    return n.astype(np.int64)


def draw_cutout_lengths(rng: RngStream, params: GwiParams, count: int, method: str = "invert",
                        cap: int | None = None) -> np.ndarray:
    """``count`` iid cutout lengths.

    ``simulate`` draws the immigrant count and runs the GW process to
    extinction; ``invert`` inverts the closed-form CDF. Lengths above ``cap``
    are reported as ``cap`` (``simulate`` needs a finite cap since the law
    has infinite mean).
    """
    if count < 0:
        raise ParameterError("count must be nonnegative")
    if method == "invert":
        out = _invert_lengths(params, rng.uniform(count))
        return out if cap is None else np.minimum(out, cap)
    if method == "simulate":
        if cap is None:
            raise UsageError("method 'simulate' needs a finite cap")
        founders = sample_geometric(rng, 1.0 - float(params.p), count)
        return gw_extinction_times(rng, founders, cap)
    raise ParameterError(f"unknown method {method!r}, expected one of {METHODS}")


def sample_cutout_lengths(rng: RngStream, params: GwiParams, horizon: int, method: str = "invert",
                          cap: int | None = None) -> np.ndarray:
    """Lengths ``L_0..L_horizon``; ``simulate`` defaults to ``cap = horizon + 1``."""
    if horizon < 0:
        raise ParameterError("horizon must be nonnegative")
    if method == "simulate" and cap is None:
        cap = horizon + 1
    return draw_cutout_lengths(rng, params, horizon + 1, method, cap)


def uncovered_mask(lengths: np.ndarray) -> np.ndarray:
    """Boolean mask of uncovered indices; works row-wise on 2-D input.

    ``j`` is uncovered iff ``max_{i <= j} (i + L_i) <= j``.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    idx = np.arange(lengths.shape[-1])
    frontier = np.maximum.accumulate(idx + lengths, axis=-1)
    return frontier <= idx


def uncovered_set(lengths: Sequence[int], horizon: int) -> CutoutSample:
    lengths = np.asarray(lengths, dtype=np.int64)
    if lengths.ndim != 1 or lengths.size < horizon + 1:
        raise UsageError(f"need lengths for indices 0..{horizon}")
    if (lengths < 0).any():
        raise ParameterError("cutout lengths must be nonnegative")
    lengths = lengths[: horizon + 1]
    return CutoutSample(horizon, lengths, np.flatnonzero(uncovered_mask(lengths)))


def gwi_cutout_lengths(rng: RngStream, params: GwiParams, horizon: int, count: int,
                       method: str = "invert") -> np.ndarray:
    """``(count, horizon + 1)`` lengths with column 0 pinned to zero."""
    out = np.zeros((count, horizon + 1), dtype=np.int64)
    if horizon:
        draws = draw_cutout_lengths(rng, params, count * horizon, method, cap=horizon + 1)
        out[:, 1:] = draws.reshape(count, horizon)
    return out


def gwi_cutout_sample(rng: RngStream, params: GwiParams, horizon: int, method: str = "invert") -> CutoutSample:
    return uncovered_set(gwi_cutout_lengths(rng, params, horizon, 1, method)[0], horizon)


def empirical_renewal_density(samples, j: int) -> tuple[float, float]:
    """Fraction of samples with ``j`` uncovered and its binomial standard error.

    ``samples`` is a sequence of :class:`CutoutSample` or a boolean
    ``(replicas, horizon + 1)`` mask.
    """
    if isinstance(samples, np.ndarray):
        hits = samples[:, j]
    else:
        if len(samples) == 0:
            raise UsageError("need at least one sample")
        if any(j > s.horizon for s in samples):
            raise UsageError(f"index {j} lies beyond a sample horizon")
        hits = np.array([j in s for s in samples])
    q = float(np.mean(hits))
    return q, math.sqrt(q * (1 - q) / hits.size)

