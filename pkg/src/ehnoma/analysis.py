"""Outage probability: closed form and an independent quadrature oracle.

The closed form expands both hops' CDFs into finite x^v * exp(-c*x) sums and
integrates term by term, each term reducing to a modified Bessel K function.
The quadrature route evaluates the same outage integral directly from the
unexpanded power-form CDFs; the two paths share no series machinery, so their
agreement is a genuine cross-check.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy import integrate, special

from .fading import (
    ETA_TABLE,
    NakagamiParams,
    UnsupportedModelError,
    build_theta_table,
)
from .link import SystemConfig, tau_star

# Unclamped closed-form values outside this band indicate catastrophic
# cancellation rather than a rounding wobble.
_SENTINEL = 1e-9
# Below this magnitude the float accumulation may not carry 1e-6 relative
# accuracy through the alternating sum; switch to high-precision arithmetic.
_HIGH_PRECISION_CUTOFF = 1e-5
_MP_DPS = 40


def bessel_k(order: int, x: float) -> float:
    """Modified Bessel function of the second kind, integer order.

    Uses the symmetry K_{-n} = K_n.  Underflows to 0 for large x.
    """
    if x <= 0:
        raise ValueError(f"bessel_k requires x > 0, got {x}")
    return float(special.kv(abs(order), x))


@lru_cache(maxsize=None)
def _theta(y: int, m: int):
    """Dimensionless theta coefficients for a power of the truncated series."""
    table = build_theta_table(y, NakagamiParams(m, 1.0))
    return table.coeffs


def _closed_form_terms(k: int, config: SystemConfig):
    """Yield the six-fold sum's terms as (exact rational factor, index data).

    Each yielded tuple is (rational, p, s, u, v, z) where `rational` collects
    the eta coefficient, binomials, theta coefficients and the sign.
    """
    m_sr = config.sr_fading.int_m
    m_ru = config.ru_fading.int_m
    n = config.n_s * config.n_rr
    n_u = config.n_u
    for q in range(1, 3 * config.n_rt + 1):
        e = ETA_TABLE.eta(k, q)
        if not e:
            continue
        for p in range(1, q * n_u + 1):
            th_ru = _theta(p, m_ru)
            for s in range(p * (m_ru - 1) + 1):
                ths = th_ru[s] if s < len(th_ru) else Fraction(0)
                if not ths:
                    continue
                for u in range(n):
                    th_sr = _theta(u, m_sr)
                    for v in range(u * (m_sr - 1) + 1):
                        thv = th_sr[v] if v < len(th_sr) else Fraction(0)
                        if not thv:
                            continue
                        big_m = m_sr - 1 + v
                        base = (
                            e
                            * math.comb(q * n_u, p)
                            * math.comb(n - 1, u)
                            * (-1) ** (p + u)
                            * ths
                            * thv
                        )
                        for z in range(big_m + 1):
                            yield base * math.comb(big_m, z), p, s, u, v, z


def _closed_form_float(k: int, config: SystemConfig, tau: float) -> float:
    """Compensated-summation evaluation of the closed form."""
    m_sr = config.sr_fading.int_m
    b_sr = config.sr_fading.rate
    b_ru = config.ru_fading.rate
    n = config.n_s * config.n_rr
    ratio = tau * config.c2 / config.c1
    prefactor = 2.0 * n * b_sr**m_sr / math.gamma(m_sr)
    terms = [1.0]
    for rational, p, s, u, v, z in _closed_form_terms(k, config):
        b1 = p * b_ru * ratio
        b2 = (1 + u) * b_sr
        nu = z - s + 1
        arg = 2.0 * math.sqrt(b1 * b2)
        # exponentially scaled Bessel keeps the underflow inside one exp()
        expo = math.exp(-(1 + u) * b_sr * tau - arg)
        if expo == 0.0:
            continue
        big_m = m_sr - 1 + v
        term = (
            float(rational)
            * prefactor
            * b_ru**s
            * b_sr**v
            * ratio**s
            * tau ** (big_m - z)
            * expo
            * (b1 / b2) ** (nu / 2.0)
            * float(special.kve(abs(nu), arg))
        )
        terms.append(term)
    return math.fsum(terms)


def _closed_form_mp(k: int, config: SystemConfig, tau: float) -> float:
    """High-precision evaluation, used when the float sum cancels too deeply."""
    with mp.workdps(_MP_DPS):
        m_sr = config.sr_fading.int_m
        b_sr = mp.mpf(config.sr_fading.rate)
        b_ru = mp.mpf(config.ru_fading.rate)
        n = config.n_s * config.n_rr
        tau_mp = mp.mpf(tau)
        ratio = tau_mp * mp.mpf(config.c2) / mp.mpf(config.c1)
        prefactor = 2 * n * b_sr**m_sr / mp.gamma(m_sr)
        total = mp.mpf(1)
        for rational, p, s, u, v, z in _closed_form_terms(k, config):
            b1 = p * b_ru * ratio
            b2 = (1 + u) * b_sr
            nu = z - s + 1
            big_m = m_sr - 1 + v
            total += (
                mp.mpf(rational.numerator)
                / rational.denominator
                * prefactor
                * b_ru**s
                * b_sr**v
                * ratio**s
                * tau_mp ** (big_m - z)
                * mp.e ** (-(1 + u) * b_sr * tau_mp)
                * (b1 / b2) ** (mp.mpf(nu) / 2)
                * mp.besselk(nu, 2 * mp.sqrt(b1 * b2))
            )
        return float(total)


def _check_scope(config: SystemConfig) -> None:
    if config.k_users != 3 or config.n_rt != 2:
        raise UnsupportedModelError(
            "closed form covers K=3 users and n_rt=2 relay transmit antennas"
        )


def op_closed_form_raw(k: int, config: SystemConfig) -> float:
    """Unclamped closed-form outage probability (diagnostics)."""
    _check_scope(config)
    tau = tau_star(k, config)
    if tau == 0.0:
        return 0.0
    value = _closed_form_float(k, config, tau)
    if abs(value) < _HIGH_PRECISION_CUTOFF or not -_SENTINEL <= value <= 1 + _SENTINEL:
        value = _closed_form_mp(k, config, tau)
    return value


def op_closed_form(k: int, config: SystemConfig) -> float:
    """Closed-form outage probability of the rank-k user.

    Requires integer fading parameters on both hops and the 3-user,
    2-transmit-antenna majority-selection scope.
    """
    raw = op_closed_form_raw(k, config)
    if not -_SENTINEL <= raw <= 1 + _SENTINEL:
        warnings.warn(
            f"closed-form OP for k={k} outside [0,1] beyond sentinel: {raw!r}",
            RuntimeWarning,
            stacklevel=2,
        )
    return min(max(raw, 0.0), 1.0)


def op_numerical(k: int, config: SystemConfig, rel_tol: float = 1e-13) -> float:
    """Outage probability by adaptive quadrature of the outage integral.

    F_sr(tau*) + integral over x > tau* of
    F_ru(tau* c2 / (c1 (x - tau*))) * f_sr(x) dx,
    with both CDFs in unexpanded power form.  Accepts non-integer fading m.
    """
    if config.k_users != 3 or config.n_rt != 2:
        raise UnsupportedModelError(
            "majority-selection rank CDF covers K=3 users and n_rt=2"
        )
    tau = tau_star(k, config)
    if tau == 0.0:
        return 0.0
    m_sr, om_sr = config.m_sr, config.omega_sr
    m_ru, om_ru = config.m_ru, config.omega_ru
    n = config.n_s * config.n_rr
    n_u = config.n_u
    etas = [(q, float(ETA_TABLE.eta(k, q))) for q in range(1, 3 * config.n_rt + 1)
            if ETA_TABLE.eta(k, q)]
    ratio = tau * config.c2 / config.c1
    b_sr = m_sr / om_sr
    log_gamma_m = math.lgamma(m_sr)

    def cdf_ru(x):
        g = special.gammainc(m_ru, m_ru * x / om_ru) ** n_u
        return sum(e * g**q for q, e in etas)

    def integrand(y):
        x = tau + y
        f_x = math.exp(
            m_sr * math.log(b_sr) + (m_sr - 1) * math.log(x) - b_sr * x - log_gamma_m
        )
        f_sr = n * f_x * special.gammainc(m_sr, b_sr * x) ** (n - 1)
        f_ru = cdf_ru(ratio / y) if y > 1e-300 else 1.0
        return f_ru * f_sr

    # choose the upper limit so the neglected first-hop tail mass is < 1e-14
    x_max = (om_sr / m_sr) * special.gammainccinv(m_sr, 1e-15 / n)
    head = special.gammainc(m_sr, b_sr * tau) ** n
    if x_max <= tau:
        return head
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        tail, _ = integrate.quad(
            integrand, 0.0, x_max - tau, epsabs=1e-280, epsrel=rel_tol, limit=800
        )
    return head + tail
