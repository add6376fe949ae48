"""Exact formulas and reference laws used as oracles by the experiments.

GWI convention used throughout: offspring are geometric(1/2) on the
naturals (pgf ``1/(2-s)``) and immigrants are geometric with
``P(K = k) = (1-p) p**k``, so the immigration mean is ``delta = p/(1-p)``.
Generation 0 receives no immigrants, which keeps the process at zero at
time zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .errors import DegenerateModelError, ParameterError

# ssrw_first_return_tail switches from exact integers to floats above this.
EXACT_TAIL_LIMIT = 10_000


# --- Galton-Watson with geometric(1/2) offspring ---------------------------

def gw_offspring_pgf(s):
    return 1 / (2 - s)


def gw_iterate(n: int, s):
    """n-fold composition of ``f(s) = 1/(2-s)``.

    Works with floats, numpy arrays, or ``Fraction`` for exact values.
    """
    if n < 0:
        raise ParameterError("iterate count must be nonnegative")
    return (n - (n - 1) * s) / (n + 1 - n * s)


def gw_extinction_cdf_discrete(n: int, z: float, t: float) -> float:
    """P(U^n_t = 0) for a GW process started at ``n z`` and observed at ``floor(n t)``."""
    if n < 1 or z < 0 or t <= 0:
        raise ParameterError("need n >= 1, z >= 0, t > 0")
    m = math.floor(n * t)
    return float(gw_iterate(m, 0.0)) ** (n * z)


def cb_extinction_cdf(z: float, t: float) -> float:
    """Extinction-time CDF ``exp(-z/t)`` of the critical continuous-state limit."""
    if z < 0 or t <= 0:
        raise ParameterError("need z >= 0, t > 0")
    return math.exp(-z / t)


# --- Galton-Watson with immigration ----------------------------------------

@dataclass(frozen=True)
class GwiParams:
    p: float | Fraction

    def __post_init__(self):
        if not 0 < self.p < Fraction(1, 2):
            raise ParameterError(f"immigration parameter must lie in (0, 1/2), got {self.p}")

    @property
    def delta(self):
        return self.p / (1 - self.p)


def immigration_pgf(params: GwiParams, s):
    p = params.p
    return (1 - p) / (1 - p * s)


def cutout_length_cdf(params: GwiParams, n: int):
    """P(L <= n) for one cutout length: immigration pgf composed with the GW iterate.

    Exact (a ``Fraction``) when ``params.p`` is a ``Fraction``.
    """
    if n < 0:
        return 0 * params.p
    q = 1 - params.p
    return q * (n + 1) / (1 + q * n)


def cutout_length_cdfs(params: GwiParams, n_max: int) -> np.ndarray:
    q = 1.0 - float(params.p)
    m = np.arange(n_max + 1, dtype=np.float64)
    return q * (m + 1) / (1 + q * m)


def gwi_renewal_density(params: GwiParams, n: int):
    """P(Z_n = 0) for the GWI started at zero: product of cutout CDFs over m < n."""
    if n < 0:
        raise ParameterError("n must be nonnegative")
    if isinstance(params.p, Fraction):
        out = Fraction(1)
        for m in range(n):
            out *= cutout_length_cdf(params, m)
        return out
    return float(gwi_renewal_densities(params, n)[n])


def gwi_renewal_densities(params: GwiParams, n_max: int) -> np.ndarray:
    """``u(0..n_max)``; accumulated in log space so large ``n`` stays accurate."""
    logs = np.log(cutout_length_cdfs(params, max(n_max - 1, 0)))[:n_max]
    return np.exp(np.concatenate([[0.0], np.cumsum(logs)]))


# --- Subordinators -----------------------------------------------------------

@dataclass(frozen=True)
class SubordinatorModel:
    laplace_exponent: Callable[[float], float]
    levy_tail: Callable[[float], float]
    drift: float = 0.0
    name: str = ""


def stable_laplace_exponent(rho: float, lam):
    if not 0 < rho < 1:
        raise ParameterError(f"stable index must lie in (0, 1), got {rho}")
    return np.asarray(lam, dtype=float) ** rho if np.ndim(lam) else float(lam) ** rho


def stable_levy_tail(rho: float, l):
    # mu(dx) = rho / Gamma(1-rho) x**(-1-rho) dx integrates to Phi(lam) = lam**rho
    return l ** (-rho) / gamma(1 - rho)


def stable_subordinator(rho: float) -> SubordinatorModel:
    return SubordinatorModel(
        laplace_exponent=lambda lam: stable_laplace_exponent(rho, lam),
        levy_tail=lambda l: stable_levy_tail(rho, l),
        name=f"stable({rho})",
    )


def bm_inverse_lt_tail(l: float) -> float:
    """Levy tail mu((l, inf)) for the Brownian local time with Phi(lam) = sqrt(2 lam)."""
    if not l > 0:
        raise ParameterError(f"level must be positive, got {l}")
    return math.sqrt(2.0 / (math.pi * l))


def brownian_inverse_local_time() -> SubordinatorModel:
    return SubordinatorModel(
        laplace_exponent=lambda lam: math.sqrt(2.0 * lam),
        levy_tail=bm_inverse_lt_tail,
        name="brownian",
    )


def gd_laplace_subordinator(model: SubordinatorModel, theta: float, alpha: float, beta: float) -> float:
    """E exp(-alpha g_T - beta d_T) for T ~ Exp(theta) independent of the subordinator."""
    if theta <= 0 or alpha < 0 or beta < 0:
        raise ParameterError("need theta > 0 and alpha, beta >= 0")
    phi = model.laplace_exponent
    den = phi(alpha + beta + theta)
    if den == 0:
        raise DegenerateModelError("Laplace exponent vanishes at alpha + beta + theta")
    return float((phi(beta + theta) - phi(beta)) / den)


def gd_laplace_discrete(mgf: Callable[[float], float], theta: float, alpha: float, beta: float) -> float:
    """Discrete-time counterpart, with ``mgf(lam) = E exp(-lam tau^n_1)``."""
    if theta <= 0 or alpha < 0 or beta < 0:
        raise ParameterError("need theta > 0 and alpha, beta >= 0")
    den = 1.0 - mgf(alpha + beta + theta)
    if den == 0:
        raise DegenerateModelError("excursion-length transform is identically 1")
    return float((mgf(beta) - mgf(beta + theta)) / den)


# --- Simple symmetric random walk: exact first-return law --------------------

@lru_cache(maxsize=1)
def _avoiding_path_counts(m_max: int) -> tuple[int, ...]:
    # A[m] = number of +-1 paths of length m that do not revisit 0 on 1..m.
    # Each such path of length m-1 extends two ways; the extensions landing on 0
    # are exactly the first-return paths, 2 * Catalan(k-1) of them at m = 2k.
    counts = [1]
    catalan = 1  # Catalan(k-1) when m = 2k
    for m in range(1, m_max + 1):
        a = 2 * counts[-1]
        if m % 2 == 0:
            k = m // 2
            if k > 1:
                catalan = catalan * 2 * (2 * k - 3) // k
            a -= 2 * catalan
        counts.append(a)
    return tuple(counts)


def ssrw_first_return_tail(m: int):
    """P(first return of a simple symmetric walk to 0 exceeds ``m``).

    Exact ``Fraction`` for ``m <= EXACT_TAIL_LIMIT``; beyond it a float
    obtained from the exact value at the limit times a compensated product,
    with relative error far below 1e-12.
    """
    if m < 0:
        raise ParameterError("m must be nonnegative")
    if m <= EXACT_TAIL_LIMIT:
        counts = _avoiding_path_counts(EXACT_TAIL_LIMIT)
        return Fraction(counts[m], 2**m)
    base_m = EXACT_TAIL_LIMIT - (EXACT_TAIL_LIMIT % 2)
    base = float(ssrw_first_return_tail(base_m))
    # tail(2k) = tail(2k-2) * (2k-1)/(2k); odd m share the value at m-1
    j = np.arange(base_m // 2 + 1, m // 2 + 1, dtype=np.float64)
    return base * math.exp(math.fsum(np.log1p(-0.5 / j)))


@lru_cache(maxsize=8)
def ssrw_first_return_tails(m_max: int) -> np.ndarray:
    """Float array of ``ssrw_first_return_tail(0..m_max)``."""
    upto = min(m_max, EXACT_TAIL_LIMIT)
    counts = _avoiding_path_counts(EXACT_TAIL_LIMIT)
    exact = np.array([counts[m] / 2**m for m in range(upto + 1)])
    if m_max <= EXACT_TAIL_LIMIT:
        exact.setflags(write=False)
        return exact
    out = np.empty(m_max + 1)
    out[: upto + 1] = exact
    base_m = EXACT_TAIL_LIMIT - (EXACT_TAIL_LIMIT % 2)
    j = np.arange(base_m // 2 + 1, m_max // 2 + 1, dtype=np.float64)
    even = exact[base_m] * np.exp(np.concatenate([[0.0], np.cumsum(np.log1p(-0.5 / j))]))
    m = np.arange(upto + 1, m_max + 1)
    out[upto + 1:] = even[m // 2 - base_m // 2]
    out.setflags(write=False)
    return out


REFLECTIONS = ("minimum", "absolute")


def reflected_ssrw_tail(k, reflection: str = "minimum"):
    """P(excursion length > k steps) for a reflected simple symmetric walk.

    ``absolute`` is |S|, whose excursions are first returns of S.
    ``minimum`` is S minus its running minimum: a down-step from 0 is an
    excursion of length 1, an up-step starts a first-passage back, hence
    half the first-return tail for k >= 1.
    """
    if reflection not in REFLECTIONS:
        raise ParameterError(f"reflection must be one of {REFLECTIONS}")
    k_arr = np.atleast_1d(np.asarray(k, dtype=np.int64))
    tails = ssrw_first_return_tails(int(max(k_arr.max(), 0)))
    out = tails[np.maximum(k_arr, 0)]
    if reflection == "minimum":
        out = np.where(k_arr >= 1, 0.5 * out, 1.0)
    out = np.where(k_arr < 0, 1.0, out)
    return float(out[0]) if np.ndim(k) == 0 else out


def reflected_ssrw_mgf(n: int, reflection: str = "minimum", kmax: int | None = None) -> Callable[[float], float]:
    """``lam -> E exp(-lam tau^n_1)`` with tau^n_1 the excursion length in time units 1/n."""
    kmax = kmax or max(200 * n, 2000)
    tails = reflected_ssrw_tail(np.arange(kmax + 1), reflection)
    pmf = tails[:-1] - tails[1:]  # P(len = k), k = 1..kmax
    k = np.arange(1, kmax + 1) / n

    def mgf(lam: float) -> float:
        return float(np.sum(pmf * np.exp(-lam * k)) + tails[-1] * math.exp(-lam * (kmax + 1) / n))

    return mgf


# --- Reference CDFs ------------------------------------------------------------

def half_normal_cdf(x):
    x = np.asarray(x, dtype=float)
    out = np.vectorize(lambda v: math.erf(v / math.sqrt(2.0)) if v > 0 else 0.0, otypes=[float])(x)
    return float(out) if out.ndim == 0 else out


def _arcsine_scalar(x: float, rho: float) -> float:
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    c = math.sin(math.pi * rho) / math.pi
    opts = dict(epsabs=1e-13, epsrel=1e-11, limit=200)
    if x <= 0.5:
        val, _ = integrate.quad(lambda t: (1 - t) ** -rho, 0.0, x, weight="alg", wvar=(rho - 1, 0.0), **opts)
        return c * val
    val, _ = integrate.quad(lambda t: t ** (rho - 1), x, 1.0, weight="alg", wvar=(0.0, -rho), **opts)
    return 1.0 - c * val


def generalized_arcsine_cdf(x, rho: float = 0.5):
    """CDF of the density ``sin(pi rho)/pi x**(rho-1) (1-x)**(-rho)`` on (0, 1), by quadrature."""
    if not 0 < rho < 1:
        raise ParameterError(f"rho must lie in (0, 1), got {rho}")
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    uniq, inv = np.unique(flat, return_inverse=True)
    vals = np.array([_arcsine_scalar(v, rho) for v in uniq])[inv].reshape(x.shape)
    return float(vals) if vals.ndim == 0 else vals


def geometric_cdf(x, q: float):
    """Trials until first success, on {1, 2, ...}."""
    k = np.floor(np.asarray(x, dtype=float))
    out = np.where(k < 1, 0.0, 1.0 - (1.0 - q) ** np.maximum(k, 0))
    return float(out) if out.ndim == 0 else out


def negative_binomial_cdf(x, q: float, m: int):
    """Trials until the m-th success, on {m, m+1, ...}."""
    from scipy.stats import nbinom
    k = np.floor(np.asarray(x, dtype=float))
    out = np.where(k < m, 0.0, nbinom.cdf(k - m, m, q))
    return float(out) if out.ndim == 0 else out


def exponential_cdf(x, theta: float):
    x = np.asarray(x, dtype=float)
    out = np.where(x <= 0, 0.0, -np.expm1(-theta * x))
    return float(out) if out.ndim == 0 else out


_REFERENCES = {
    "half_normal": lambda x: half_normal_cdf(x),
    "generalized_arcsine": lambda x, rho=0.5: generalized_arcsine_cdf(x, rho),
    "geometric": lambda x, q: geometric_cdf(x, q),
    "negative_binomial": lambda x, q, m: negative_binomial_cdf(x, q, m),
    "exponential": lambda x, theta: exponential_cdf(x, theta),
}


def reference_cdf(name: str, x, **params):
    if name not in _REFERENCES:
        raise ParameterError(f"unknown reference law {name!r}; choose from {sorted(_REFERENCES)}")
    return _REFERENCES[name](x, **params)


def reference_distribution(name: str, **params) -> Callable:
    """The CDF of a named reference law as a one-argument callable."""
    if name not in _REFERENCES:
        raise ParameterError(f"unknown reference law {name!r}; choose from {sorted(_REFERENCES)}")
    return lambda x: _REFERENCES[name](x, **params)
