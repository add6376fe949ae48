"""Deterministic random streams and the elementary samplers built on them.

Streams are keyed by ``(master_seed, stream_index)`` and backed by the
counter-based Philox generator, so a replica block can be regenerated in
isolation, in any order, on any worker.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import zeta

from .errors import ParameterError

StreamIndex = Union[int, tuple[int, ...]]

# P(step = +k) = P(step = -k) = HEAVY_SCALE * k**-(1 + alpha), k = 1..HEAVY_CUTOFF.
# 2 * HEAVY_SCALE * zeta(2) < 1, so the atom at zero stays positive for alpha in (1, 2).
HEAVY_SCALE = 0.25
HEAVY_CUTOFF = 2**31
_TABLE_SIZE = 2**16


@dataclass
class RngStream:
    master_seed: int
    stream_index: StreamIndex = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ParameterError(f"master_seed must be a 64-bit unsigned int, got {self.master_seed}")
        key = self.stream_index if isinstance(self.stream_index, tuple) else (self.stream_index,)
        if any(k < 0 for k in key):
            raise ParameterError(f"stream index must be unsigned, got {self.stream_index}")
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=key)
        self.generator = np.random.Generator(np.random.Philox(seq))

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self.generator.random(size)


def derive_stream(master_seed: int, index: StreamIndex) -> RngStream:
    """Independent substream ``index`` of ``master_seed``; a pure function of its inputs."""
    return RngStream(int(master_seed), index)


def sample_geometric(rng: RngStream, p: float, size=None):
    """Geometric law on {0, 1, 2, ...}: P(k) = p (1-p)**k, by inversion of the CDF."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"geometric parameter must lie in (0, 1), got {p}")
    u = rng.uniform(size)
    k = np.floor(np.log1p(-u) / np.log1p(-p)).astype(np.int64)
    return int(k) if size is None else k


def sample_exponential(rng: RngStream, theta: float, size=None):
    """Exponential law with rate ``theta`` (mean 1/theta), by inversion."""
    if not theta > 0:
        raise ParameterError(f"exponential rate must be positive, got {theta}")
    e = -np.log1p(-rng.uniform(size)) / theta
    return float(e) if size is None else e


def _check_alpha(alpha: float) -> None:
    if not 1.0 < alpha < 2.0:
        raise ParameterError(f"tail index must lie in (1, 2), got {alpha}")


def _truncated_zeta(s: float, kmax: int) -> float:
    return float(zeta(s) - zeta(s, kmax + 1))


def heavy_step_atom(alpha: float) -> float:
    """Mass of the heavy-tailed step law at zero."""
    _check_alpha(alpha)
    return 1.0 - 2.0 * HEAVY_SCALE * _truncated_zeta(1.0 + alpha, HEAVY_CUTOFF)


def heavy_step_pmf(alpha: float, k):
    """Exact pmf of :func:`sample_heavy_step` at the integers ``k``."""
    k = np.abs(np.asarray(k, dtype=np.float64))
    with np.errstate(divide="ignore"):
        p = np.where(k == 0, heavy_step_atom(alpha), HEAVY_SCALE * k ** -(1.0 + alpha))
    return np.where(k > HEAVY_CUTOFF, 0.0, p)


@lru_cache(maxsize=16)
def _magnitude_table(alpha: float) -> np.ndarray:
    s = 1.0 + alpha
    k = np.arange(1, _TABLE_SIZE + 1, dtype=np.float64)
    cdf = np.cumsum(k**-s) / _truncated_zeta(s, HEAVY_CUTOFF)
    cdf.setflags(write=False)
    return cdf


def _magnitude_tail(rng: RngStream, s: float, size: int) -> np.ndarray:
    # Exact draws of k in (_TABLE_SIZE, HEAVY_CUTOFF] with P(k) ~ k**-s: floor of a
    # truncated Pareto proposal, thinned by k**-s / (bound * integral_k^{k+1} x**-s dx).
    lo, hi = float(_TABLE_SIZE + 1), float(HEAVY_CUTOFF + 1)
    a, b = lo ** (1 - s), hi ** (1 - s)
    bound = ((lo + 1) / lo) ** s
    out = np.empty(size, dtype=np.int64)
    filled = 0
    while filled < size:
        need = size - filled
        x = (a - rng.uniform(need) * (a - b)) ** (1.0 / (1 - s))
        k = np.floor(x)
        cell = (k ** (1 - s) - (k + 1) ** (1 - s)) / (s - 1)
        accept = rng.uniform(need) * bound * cell <= k**-s
        take = k[accept].astype(np.int64)
        out[filled:filled + take.size] = take
        filled += take.size
    return out


def sample_heavy_step(rng: RngStream, alpha: float, size=None):
    """Symmetric integer step with P(|step| = k) proportional to k**-(1+alpha).

    The support is cut at ``HEAVY_CUTOFF``; the atom at zero absorbs the
    remaining mass (see :func:`heavy_step_atom`).
    """
    _check_alpha(alpha)
    n = 1 if size is None else int(np.prod(size))
    atom = heavy_step_atom(alpha)
    cdf = _magnitude_table(alpha)
    u = rng.uniform(n)
    v = rng.uniform(n)
    mag = np.searchsorted(cdf, v, side="right").astype(np.int64) + 1
    beyond = v >= cdf[-1]
    if beyond.any():
        mag[beyond] = _magnitude_tail(rng, 1.0 + alpha, int(beyond.sum()))
    half = atom + 0.5 * (1.0 - atom)
    step = np.where(u < atom, 0, np.where(u < half, -mag, mag))
    if size is None:
        return int(step[0])
    return step.reshape(size)
