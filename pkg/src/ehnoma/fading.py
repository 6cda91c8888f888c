"""Nakagami-m squared-gain statistics and selection-diversity CDFs.

The squared envelope of a Nakagami-m fading channel is Gamma distributed
with shape m and mean Omega.  For integer m the CDF reduces to a finite
exponential sum, which is what makes the selection-diversity CDFs below
expressible as finite sums of x^v * exp(-c*x) terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special


class UnsupportedModelError(ValueError):
    """Raised when an analytic operation is asked for outside its closed-form scope."""


@dataclass(frozen=True)
class NakagamiParams:
    """Fading severity m and mean square gain omega for one hop.

    Analytic operations require integer m; sampling accepts any m >= 0.5.
    """

    m: float
    omega: float

    def __post_init__(self):
        if self.m < 0.5:
            raise ValueError(f"Nakagami m must be >= 0.5, got {self.m}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def is_integer_m(self) -> bool:
        return float(self.m).is_integer()

    @property
    def int_m(self) -> int:
        if not self.is_integer_m:
            raise UnsupportedModelError(
                f"analytic path requires integer m, got {self.m}"
            )
        return int(self.m)

    @property
    def rate(self) -> float:
        """Exponential rate m/omega of the squared-gain Gamma distribution."""
        return self.m / self.omega


def sample_squared_gain(params: NakagamiParams, rng: np.random.Generator, size=None):
    """Draw squared channel gains: Gamma(shape=m, mean=omega)."""
    return rng.gamma(params.m, params.omega / params.m, size=size)


def cdf_squared_gain(params: NakagamiParams, x):
    """CDF of the squared gain, regularized lower incomplete gamma."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("squared gain CDF argument must be nonnegative")
    out = special.gammainc(params.m, params.rate * x)
    return float(out) if out.ndim == 0 else out


def pdf_squared_gain(params: NakagamiParams, x):
    """PDF of the squared gain: (m/O)^m x^(m-1) e^(-mx/O) / Gamma(m)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("squared gain PDF argument must be nonnegative")
    b = params.rate
    with np.errstate(divide="ignore", invalid="ignore"):
        out = b**params.m * x ** (params.m - 1) * np.exp(-b * x) / special.gamma(params.m)
    if params.m == 1:
        out = np.where(x == 0, b, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ThetaTable:
    """Coefficients of the y-th power of the truncated exponential series.

    coeff[x] is the exact rational coefficient of t^x in
    (sum_{n=0}^{m-1} t^n / n!)^y.  Consumers evaluate at t = (m/omega)*x,
    i.e. the coefficient of x^v carries an extra rate^v factor (`scaled`).
    """

    y: int
    params: NakagamiParams
    coeffs: tuple

    def __len__(self) -> int:
        return len(self.coeffs)

    def coeff(self, x: int) -> Fraction:
        return self.coeffs[x] if 0 <= x < len(self.coeffs) else Fraction(0)

    def scaled(self, x: int) -> float:
        """Coefficient of x^v including the (m/omega)^v factor."""
        return float(self.coeff(x)) * self.params.rate**x


def build_theta_table(y: int, params: NakagamiParams) -> ThetaTable:
    """Power-series coefficients via the standard recurrence for powers of a series.

    With a_0 = 1 the recurrence is
        c_x = (1/x) * sum_{o=1}^{min(x, m-1)} (o*(y+1) - x) * a_o * c_{x-o},
    where a_o = 1/o! for o <= m-1 and zero beyond the truncation order.
    Computed in exact rational arithmetic.
    """
    if y < 0:
        raise ValueError("power y must be nonnegative")
    m = params.int_m
    top = y * (m - 1)
    c = [Fraction(1)] + [Fraction(0)] * top
    for x in range(1, top + 1):
        s = Fraction(0)
        for o in range(1, min(x, m - 1) + 1):
            s += (o * (y + 1) - x) * Fraction(1, math.factorial(o)) * c[x - o]
        c[x] = s / x
    return ThetaTable(y=y, params=params, coeffs=tuple(c))


def cdf_best_first_hop(params: NakagamiParams, n_s: int, n_rr: int, x):
    """CDF of the best of n_s*n_rr i.i.d. squared gains, in expanded form.

    Expands (F_X(x))^N with the binomial theorem and the theta coefficients:
        sum_{u=0}^{N} sum_{v=0}^{u(m-1)} C(N,u) (-1)^u theta_v(u) x^v e^{-u m x / O}.
    """
    if n_s < 1 or n_rr < 1:
        raise ValueError("antenna counts must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("CDF argument must be nonnegative")
    n = n_s * n_rr
    b = params.rate
    m = params.int_m
    out = np.zeros_like(x)
    for u in range(n + 1):
        table = build_theta_table(u, params)
        sign = math.comb(n, u) * (-1) ** u
        poly = np.zeros_like(x)
        for v in range(u * (m - 1) + 1):
            poly += table.scaled(v) * x**v
        out += sign * poly * np.exp(-u * b * x)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def pdf_best_first_hop(params: NakagamiParams, n_s: int, n_rr: int, x):
    """PDF of the best first-hop squared gain, expanded form N * f * F^(N-1)."""
    if n_s < 1 or n_rr < 1:
        raise ValueError("antenna counts must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("PDF argument must be nonnegative")
    n = n_s * n_rr
    b = params.rate
    m = params.int_m
    out = np.zeros_like(x)
    for u in range(n):
        table = build_theta_table(u, params)
        sign = math.comb(n - 1, u) * (-1) ** u
        poly = np.zeros_like(x)
        for v in range(u * (m - 1) + 1):
            poly += table.scaled(v) * x**v
        out += sign * poly * np.exp(-u * b * x)
    out *= n * pdf_squared_gain(params, x)
    return float(out) if out.ndim == 0 else out


# Rank-ordered user gain CDF under majority transmit-antenna selection,
# three users voting over two relay transmit antennas.  With
# G = F_X(x)^n_u the CDF of rank k is sum_q MAJORITY_RANK_COEFFS[k][q] G^q.
#
# Derivation (exact): each user's two per-row maxima are i.i.d. with CDF G;
# a user voting for the winning row contributes its overall best gain
# (CDF G^2) and a dissenting user contributes its weaker row maximum
# (CDF 2G - G^2); votes are independent of the gain values.  Mixing over
# the vote patterns (all-agree with probability 1/4, two-to-one with 3/4)
# gives the rank CDFs below.
MAJORITY_RANK_COEFFS = {
    1: {
        1: Fraction(3, 2),
        2: Fraction(3, 2),
        3: Fraction(-3),
        5: Fraction(3, 2),
        6: Fraction(-1, 2),
    },
    2: {3: Fraction(3), 5: Fraction(-3), 6: Fraction(1)},
    3: {5: Fraction(3, 2), 6: Fraction(-1, 2)},
}


@dataclass(frozen=True)
class EtaTable:
    """Rational coefficients eta(k, q) of the majority-selection rank CDFs."""

    coeffs: dict

    def eta(self, k: int, q: int) -> Fraction:
        if k not in self.coeffs:
            raise UnsupportedModelError(f"rank k={k} outside the 3-user table")
        return self.coeffs[k].get(q, Fraction(0))


ETA_TABLE = EtaTable(coeffs=MAJORITY_RANK_COEFFS)


def cdf_majority_user(
    params: NakagamiParams,
    k: int,
    n_u: int,
    x,
    n_rt: int = 2,
    expanded: bool = False,
):
    """CDF of the rank-k user's effective squared gain after majority selection.

    Only the 3-user, two-relay-transmit-antenna case has an analytic table.
    `expanded=True` evaluates the fully expanded finite-sum form instead of
    powers of the single-link CDF; the two agree to 1e-10 relative.
    """
    if n_rt != 2:
        raise UnsupportedModelError(f"analytic majority CDF requires n_rt=2, got {n_rt}")
    if k not in (1, 2, 3):
        raise UnsupportedModelError(f"user rank must be in {{1,2,3}}, got {k}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("CDF argument must be nonnegative")
    if not expanded:
        g = cdf_squared_gain(params, x) ** n_u
        out = np.zeros_like(np.asarray(g))
        for q in range(1, 3 * n_rt + 1):
            e = ETA_TABLE.eta(k, q)
            if e:
                out += float(e) * g**q
    else:
        b = params.rate
        m = params.int_m
        out = np.zeros_like(x)
        for q in range(1, 3 * n_rt + 1):
            e = float(ETA_TABLE.eta(k, q))
            if not e:
                continue
            for p in range(q * n_u + 1):
                table = build_theta_table(p, params)
                sign = e * math.comb(q * n_u, p) * (-1) ** p
                poly = np.zeros_like(x)
                for s in range(p * (m - 1) + 1):
                    poly += table.scaled(s) * x**s
                out += sign * poly * np.exp(-p * b * x)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out
