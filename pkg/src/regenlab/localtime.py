"""Counting local time at the regenerative state and its excursion structure.

Times are in units of the path's mesh: index ``k`` sits at time ``k/n``.
The final excursion of a finite path is censored by the horizon; it never
enters jump lists or empirical tails, but its elapsed length is kept on
:class:`JumpSequence` so that "this excursion is already longer than a"
can still be decided.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import NoBigExcursionError, ParameterError, UsageError
from .processes import ScaledLatticePath


@dataclass(frozen=True, eq=False)
class LocalTimeProfile:
    mesh: int
    counts: np.ndarray

    def at(self, t: float) -> int:
        """L^n_t for real t, with the profile extended by constancy."""
        k = min(int(math.floor(t * self.mesh)), self.counts.size - 1)
        return int(self.counts[k])


@dataclass(frozen=True)
class ExcursionRecord:
    start: int
    end: int
    mesh: int = 1
    censored: bool = False

    @property
    def length(self) -> float:
        return (self.end - self.start) / self.mesh


@dataclass(frozen=True, eq=False)
class JumpSequence:
    """Jumps of the inverse local time, stored as integer step counts."""

    mesh: int
    steps: np.ndarray
    censored_tail: bool = False
    tail_steps: int = 0  # elapsed length of the censored excursion

    def __post_init__(self):
        object.__setattr__(self, "steps", np.asarray(self.steps, dtype=np.int64))

    @property
    def jumps(self) -> np.ndarray:
        return self.steps / self.mesh

    def __len__(self) -> int:
        return self.steps.size


@dataclass(frozen=True)
class TailFunction:
    """``l -> mass of (l, inf)``, exact or estimated."""

    rule: Callable[[float], float]
    kind: str = "exact"
    std_error: Callable[[float], float] | None = field(default=None, compare=False)

    def __call__(self, l: float) -> float:
        return float(self.rule(l))


def _zero_indices(path: ScaledLatticePath) -> np.ndarray:
    return np.flatnonzero(path.values == 0)


def local_time_profile(path: ScaledLatticePath) -> LocalTimeProfile:
    return LocalTimeProfile(path.mesh, np.cumsum(path.values == 0))


def excursion_endpoints(path: ScaledLatticePath, t: float) -> tuple[float, float | None]:
    """(g_t, d_t): last zero time <= t and first zero time > t; ``d`` is None when censored."""
    if t < 0 or t > path.horizon / path.mesh:
        raise UsageError(f"t={t} lies outside [0, {path.horizon / path.mesh}]")
    zeros = _zero_indices(path)
    k = math.floor(t * path.mesh)
    pos = int(np.searchsorted(zeros, k, side="right"))
    if pos == 0:
        raise UsageError("path does not start at the regenerative state")
    g = zeros[pos - 1] / path.mesh
    d = zeros[pos] / path.mesh if pos < zeros.size else None
    return g, d


def excursion_lengths(path: ScaledLatticePath) -> list[ExcursionRecord]:
    zeros = _zero_indices(path)
    records = [ExcursionRecord(int(a), int(b), path.mesh) for a, b in zip(zeros[:-1], zeros[1:])]
    if zeros.size and zeros[-1] < path.horizon:
        records.append(ExcursionRecord(int(zeros[-1]), path.horizon, path.mesh, censored=True))
    return records


def inverse_local_time(path: ScaledLatticePath) -> JumpSequence:
    zeros = _zero_indices(path)
    tail = int(path.horizon - zeros[-1]) if zeros.size else path.horizon
    return JumpSequence(path.mesh, np.diff(zeros), censored_tail=tail > 0, tail_steps=tail)


def truncate_big_jumps(tau: JumpSequence, a: float) -> JumpSequence:
    """Jumps of length <= a replaced by zero; indices are preserved."""
    if a < 0:
        raise ParameterError("threshold must be nonnegative")
    kept = np.where(tau.jumps > a, tau.steps, 0)
    return JumpSequence(tau.mesh, kept, tau.censored_tail, tau.tail_steps)


def _big_positions(tau: JumpSequence, a: float) -> np.ndarray:
    pos = np.flatnonzero(tau.jumps > a) + 1
    if tau.censored_tail and tau.tail_steps / tau.mesh > a:
        pos = np.append(pos, len(tau) + 1)
    return pos


def big_jump_arrival_index(tau: JumpSequence, a: float, m: int) -> int | None:
    """1-based index of the m-th jump longer than ``a``; None when the path is too short.

    A censored final excursion that has already lasted longer than ``a``
    counts as a big jump.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    pos = _big_positions(tau, a)
    return int(pos[m - 1]) if pos.size >= m else None


def count_jumps_between(tau: JumpSequence, eps: float, a: float, m: int) -> int | None:
    """Number of jumps longer than ``eps`` up to and including the m-th jump longer than ``a``."""
    if not 0 < eps < a:
        raise ParameterError("need 0 < eps < a")
    t = big_jump_arrival_index(tau, a, m)
    if t is None:
        return None
    head = tau.jumps[: min(t, len(tau))]
    extra = 1 if t > len(tau) else 0  # the censored tail is the m-th big jump
    return int(np.count_nonzero(head > eps)) + extra


def empirical_tail(lengths: Sequence[float], l: float) -> tuple[float, float]:
    """Fraction of excursion lengths strictly above ``l`` and its binomial standard error."""
    x = np.asarray(lengths, dtype=float)
    if x.size == 0:
        raise UsageError("no uncensored excursion lengths")
    q = float(np.mean(x > l))
    return q, math.sqrt(q * (1 - q) / x.size)


def empirical_tail_function(lengths: Sequence[float]) -> TailFunction:
    x = np.sort(np.asarray(lengths, dtype=float))
    if x.size == 0:
        raise UsageError("no uncensored excursion lengths")

    def rule(l):
        return 1.0 - np.searchsorted(x, l, side="right") / x.size

    def se(l):
        q = rule(l)
        return math.sqrt(q * (1 - q) / x.size)

    return TailFunction(rule, kind="empirical", std_error=se)


def scaling_constant(mu_tail: Callable[[float], float], mun_tail: Callable[[float], float], l: float) -> float:
    """a_n = mu(S_l) / mu_n(S_l)."""
    den = float(mun_tail(l))
    if den <= 0:
        raise NoBigExcursionError(f"no discrete excursion mass above l={l}; enlarge the sample or lower l")
    return float(mu_tail(l)) / den


# --- The alternative constant for reflected walks -----------------------------

def negative_probabilities(step_pmf: Mapping[int, float], K: int) -> np.ndarray:
    """P(X_k < 0) for k = 1..K by exact convolution of the step pmf."""
    lo, hi = min(step_pmf), max(step_pmf)
    kernel = np.zeros(hi - lo + 1)
    for s, w in step_pmf.items():
        kernel[s - lo] = w
    dist = np.array([1.0])  # law of X_0, support starting at offset 0
    offset = 0
    out = np.empty(K)
    for k in range(K):
        dist = np.convolve(dist, kernel)
        offset += lo
        neg = max(0, min(-offset, dist.size))
        out[k] = dist[:neg].sum()
        # drop negligible mass far in the tails to keep the support bounded
        if dist.size > 4096:
            nz = np.flatnonzero(dist > 1e-300)
            dist = dist[nz[0]: nz[-1] + 1]
            offset += nz[0]
    return out


def alt_reflected_scaling(step_pmf: Mapping[int, float], n: int, K: int) -> float:
    """exp(sum_{k=1..K} P(X_k < 0) e^{-k/n} / k).

    The k = 0 term is taken as 0. This is 1/P(d^n_0 > T) for T ~ Exp(1),
    by the Sparre Andersen identity, so it grows like a_n.
    """
    if K < 1:
        raise ParameterError("K must be >= 1")
    k = np.arange(1, K + 1)
    return math.exp(float(np.sum(negative_probabilities(step_pmf, K) * np.exp(-k / n) / k)))


# --- Batch helpers on (replicas, horizon + 1) arrays ---------------------------

def zero_counts(values: np.ndarray, k: int) -> np.ndarray:
    """L at index k for every row."""
    return np.count_nonzero(values[:, : k + 1] == 0, axis=1)


def last_zero_index(values: np.ndarray, k) -> np.ndarray:
    """Largest index <= k where each row is 0 (k scalar or per-row)."""
    k = np.broadcast_to(np.asarray(k), (values.shape[0],))
    cols = np.arange(values.shape[1])
    mask = (values == 0) & (cols[None, :] <= k[:, None])
    return values.shape[1] - 1 - np.argmax(mask[:, ::-1], axis=1)


def first_zero_after(values: np.ndarray, k) -> np.ndarray:
    """Smallest index > k where each row is 0, or -1 if none within the horizon."""
    k = np.broadcast_to(np.asarray(k), (values.shape[0],))
    cols = np.arange(values.shape[1])
    mask = (values == 0) & (cols[None, :] > k[:, None])
    idx = np.argmax(mask, axis=1)
    return np.where(mask.any(axis=1), idx, -1)
