"""Information-theoretic primitives.

All entropies are in nats. The ``0 log 0 = 0`` convention is applied
everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gammaln, gammainc, logsumexp

from .errors import ValidationError

_SUM_TOL = 1e-12


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def _check_probs(probs, what="distribution"):
    p = np.asarray(probs, dtype=float)
    if p.size == 0:
        raise ValidationError(f"empty {what}")
    if not np.all(np.isfinite(p)):
        raise ValidationError(f"{what} has non-finite entries")
    if np.any(p < 0):
        raise ValidationError(f"{what} has negative entries")
    total = math.fsum(p.ravel())
    if abs(total - 1.0) > _SUM_TOL + 4 * np.finfo(float).eps * p.size:
        raise ValidationError(f"{what} sums to {total!r}, not 1")
    return p


def ent(probs) -> float:
    """Shannon entropy ``-sum p ln p`` of a finite distribution."""
    p = _check_probs(probs)
    return -math.fsum(_xlogx(p).ravel())


def conditional_entropy(joint) -> tuple[float, float]:
    """Return ``(ent(X), E ent(X | Y))`` for a 2-D joint probability table.

    Rows index the conditioning variable ``Y`` and columns index ``X``, so
    ``E ent(X | Y)`` averages the entropies of the normalized rows.
    """
    p = _check_probs(joint, "joint distribution")
    if p.ndim != 2:
        raise ValidationError("joint distribution must be a 2-D table")
    py = p.sum(axis=1)
    px = p.sum(axis=0)
    terms = []
    for w, row in zip(py, p):
        if w > 0:
            terms.append(-w * math.fsum(_xlogx(row / w)))
    return -math.fsum(_xlogx(px)), math.fsum(terms)


def bernoulli_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability {p!r} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log1p(-p)


def bernoulli_entropy_array(p) -> np.ndarray:
    """Vectorized Bernoulli entropy; no validation, for hot loops."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p
    out = np.zeros_like(p)
    m = (p > 0) & (p < 1)
    out[m] = -p[m] * np.log(p[m]) - q[m] * np.log1p(-p[m])
    return out


def large_dev_rate(p: float, x: float) -> float:
    """Binomial large-deviation rate ``x ln(x/p) + (1-x) ln((1-x)/(1-p))``."""
    if not 0.0 < p < 1.0:
        raise ValidationError(f"rate needs 0 < p < 1, got {p!r}")
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"x = {x!r} outside [0, 1]")
    a = x * math.log(x / p) if x > 0 else 0.0
    b = (1 - x) * math.log((1 - x) / (1 - p)) if x < 1 else 0.0
    return a + b


def log_choose(m: int, k: int) -> float:
    """Natural log of the binomial coefficient C(m, k).

    ``m`` may be a large Python int (e.g. ``A**L``). When ``m`` dwarfs ``k``
    the log-gamma difference loses digits, so a direct log1p sum is used.
    """
    if k < 0 or m < 0 or k > m:
        raise ValidationError(f"log_choose needs 0 <= k <= m, got m={m}, k={k}")
    k = min(k, m - k)
    if k == 0:
        return 0.0
    mf = float(m)
    if mf > 1e7 and k <= 10_000_000:
        i = np.arange(k, dtype=float)
        return k * math.log(mf) + math.fsum(np.log1p(-i / mf)) - math.lgamma(k + 1)
    return math.lgamma(mf + 1) - math.lgamma(k + 1) - math.lgamma(mf - k + 1)


def log_choose_asymptotic(m, k) -> float:
    """``k ln(m/k)``, the leading behaviour of ln C(m, k) for k << m."""
    if k <= 0:
        return 0.0
    return k * math.log(m / k)


def log_graph_count(N: int, M: int) -> float:
    """ln of the number of graphs on N labelled vertices with at most M edges."""
    if N < 1 or M < 0:
        raise ValidationError("log_graph_count needs N >= 1 and M >= 0")
    pairs = N * (N - 1) // 2
    kmax = min(M, pairs)
    k = np.arange(kmax + 1, dtype=float)
    terms = gammaln(pairs + 1.0) - gammaln(k + 1.0) - gammaln(pairs - k + 1.0)
    return float(logsumexp(terms))


# --- mixture constants for the copy rule -----------------------------------

_MAX_COUNT_VECTORS = 200_000


def _compositions(k: int, parts: int):
    """All tuples of ``parts`` non-negative ints summing to ``k``."""
    if parts == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(k - first, parts - 1):
            yield (first,) + rest


def _mixture_entropy(counts, A: int, k: int) -> np.ndarray:
    # letter probabilities (1 + A c) / ((1 + k) A) for each count vector row
    q = (1.0 + A * np.asarray(counts, dtype=float)) / ((1 + k) * A)
    return -(_xlogx(q)).sum(axis=-1)


def h_A_count_vectors(A: int, k: int) -> float:
    """Mixture entropy averaged over uniform parent letters, by count vectors."""
    comps = np.array(list(_compositions(k, A)), dtype=float)
    logw = gammaln(k + 1.0) - gammaln(comps + 1.0).sum(axis=1) - k * math.log(A)
    return math.fsum(np.exp(logw) * _mixture_entropy(comps, A, k))


def h_A_binomial(A: int, k: int) -> float:
    """Same constant via the Binomial(k, 1/A) marginal of one letter's count.

    The mixture entropy is a sum over letters of a function of that letter's
    count alone, so by symmetry only the one-letter marginal matters.
    """
    c = np.arange(k + 1, dtype=float)
    logpmf = (gammaln(k + 1.0) - gammaln(c + 1.0) - gammaln(k - c + 1.0)
              + c * math.log(1.0 / A) + (k - c) * math.log1p(-1.0 / A))
    q = (1.0 + A * c) / ((1 + k) * A)
    return -A * math.fsum(np.exp(logpmf) * _xlogx(q))


@lru_cache(maxsize=4096)
def h_A(A: int, k: int) -> float:
    """Expected entropy of the copy-rule letter distribution given k parents.

    ``h_A(A, 0) = ln A``. Count-vector enumeration is used while the number
    of count vectors stays below 200k; beyond that the equivalent one-letter
    binomial form is used.
    """
    if A < 2 or k < 0:
        raise ValidationError(f"h_A needs A >= 2 and k >= 0, got A={A}, k={k}")
    if k == 0:
        return math.log(A)
    if math.comb(k + A - 1, A - 1) <= _MAX_COUNT_VECTORS:
        return h_A_count_vectors(A, k)
    return h_A_binomial(A, k)


# --- J_k(alpha) = int_0^1 x^k e^{-alpha x} dx ------------------------------

def _J_series(alpha: float, k: int) -> float:
    # e^{-a} sum_j a^j / ((k+1)(k+2)...(k+j+1)); all terms positive
    if alpha > 500.0:
        return float(np.exp(gammaln(k + 1.0) - (k + 1) * math.log(alpha))
                     * gammainc(k + 1.0, alpha))
    term = 1.0 / (k + 1)
    total = term
    j = 0
    while True:
        j += 1
        term *= alpha / (k + j + 1)
        total += term
        if term < 1e-18 * total and k + j + 1 > alpha:
            break
    return math.exp(-alpha) * total


def J_table(alpha: float, kmax: int) -> np.ndarray:
    """``J_0 .. J_kmax`` by downward recurrence seeded with the series at kmax.

    ``J_{k-1} = (alpha J_k + e^{-alpha}) / k``. The upward direction amplifies
    rounding by k/alpha per step and is unusable for k > alpha.
    """
    if alpha < 0:
        raise ValidationError(f"J_k needs alpha >= 0, got {alpha!r}")
    if kmax < 0:
        raise ValidationError("kmax must be >= 0")
    out = np.empty(kmax + 1)
    out[kmax] = _J_series(alpha, kmax)
    ea = math.exp(-alpha)
    for k in range(kmax, 0, -1):
        out[k - 1] = (alpha * out[k] + ea) / k
    return out


def J(alpha: float, k: int) -> float:
    if alpha < 0:
        raise ValidationError(f"J_k needs alpha >= 0, got {alpha!r}")
    if k < 0:
        raise ValidationError("k must be >= 0")
    return _J_series(alpha, k)


def J_quad(alpha: float, k: int) -> float:
    """Adaptive Gauss-Kronrod evaluation of J_k, used as a cross-check."""
    val, _ = integrate.quad(lambda x: x**k * math.exp(-alpha * x), 0.0, 1.0,
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def kappa(gamma: float) -> float:
    """Small-world calibration constant for 0 < gamma < 2."""
    if not 0.0 < gamma < 2.0:
        raise ValidationError(f"kappa needs 0 < gamma < 2, got {gamma!r}")
    integral, _ = integrate.quad(lambda t: math.cos(t) ** (gamma - 2.0), 0.0, math.pi / 4,
                                 epsabs=1e-12, epsrel=1e-12)
    return (2.0 - gamma) / (2.0 ** (1.0 + gamma) * integral)


@dataclass(frozen=True)
class RateConstants:
    alpha: float | None = None
    beta: float | None = None
    A: int | None = None
    gamma: float | None = None
    d: float | None = None

    def __post_init__(self):
        if self.alpha is not None and self.alpha < 0:
            raise ValidationError("alpha must be >= 0")
        if self.beta is not None and self.beta < 1:
            raise ValidationError("beta must be >= 1")
        if self.A is not None and (int(self.A) != self.A or self.A < 2):
            raise ValidationError("A must be an integer >= 2")
        if self.gamma is not None and self.gamma <= 0:
            raise ValidationError("gamma must be > 0")
        if self.d is not None and self.A is not None and not 0 < self.d < 1 - 1 / self.A:
            raise ValidationError("d must lie in (0, 1 - 1/A)")
