"""The shifted Dirichlet series D(s; h, delta), the Rankin-Selberg pairing with
E*(z, s) at level 1, the Eisenstein correction Omega(s; h), and a spectral
evaluator that consumes externally supplied Maass-form data.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import integrate

from . import specfun as sf
from .eisenstein import CuspLabel, TruncatedValue, rho_closed
from .errors import DomainError, NoDataError, ParseError, PoleError, UnsupportedError
from .forms import divisor_sigma
from .kernel import m_limit
from .poincare import FDMesh, ShiftParams, petersson_inner_fd, shift_pairs, v_product, volume

LEVEL1 = CuspLabel(1, 1)


@dataclass
class DSeriesQuery:
    s: complex
    sp: ShiftParams
    delta: float
    M: int
    f: object
    g: object

    def __post_init__(self):
        if self.f.k != self.g.k:
            raise DomainError("f and g must have the same weight")
        if self.delta < 0:
            raise DomainError("delta must be >= 0")
        if self.M < 1:
            raise DomainError("M must be positive")


def _divisor_envelope(x):
    # average-order stand-in for d(m); not a pointwise bound
    return 1.0 + math.log(max(x, 1.0))


def d_truncated(q):
    """Partial sum of D(s; h, delta) over m2 <= M plus a divisor-envelope tail."""
    s = complex(q.s)
    k = q.f.k
    S = s + k - 1
    l1, l2, h = q.sp.l1, q.sp.l2, q.sp.h
    m1, m2 = shift_pairs(l1, l2, h, q.M)
    if len(m1):
        q.f.require(int(m1.max()))
        q.g.require(int(m2.max()))
    a = q.f.a[m1]
    b = np.conj(q.g.a[m2])
    base = (l2 * m2).astype(float)
    terms = a * b * np.exp(-S * np.log(base)) * np.exp(-S * np.log1p(q.delta * h / (2 * base)))
    val = complex(np.sum(terms))
    sig = S.real
    kk = (k - 1) / 2
    certified = s.real > 1

    def env(x):
        x1 = (l2 * x + h) / l1
        return (_divisor_envelope(x) * _divisor_envelope(x1) * (x * x1) ** kk
                * (l2 * x) ** (-sig) / l1)

    if certified:
        tail = integrate.quad(env, q.M, np.inf, limit=200)[0]
    else:
        tail = math.inf
    return TruncatedValue(val, float(tail), {"M": q.M, "pairs": int(len(m1)), "certified": certified})


def d_limit_weight(s, k, sp):
    """Gamma(s+k-1) (4 pi)^{-(s+k-1)} / V: the factor linking D to <P, V> as Y -> infinity."""
    S = complex(s) + k - 1
    return complex(sf.gamma(S) * (4 * math.pi) ** (-S) / volume(sp.N))


# ------------------------------------------------------- Rankin-Selberg

def rankin_selberg_inner(s, f, g, M):
    """<V, E*(., s)> at level 1 by unfolding, Re s > 1.

    Equals zeta*(2 sbar) Gamma(sbar+k-1) (4 pi)^{-(sbar+k-1)} / V * sum conj(a(n)) b(n) n^{-(sbar+k-1)};
    its complex conjugate is analytic in s.
    """
    s = complex(s)
    if s.real <= 1:
        raise DomainError("the unfolded series needs Re s > 1; use rankin_selberg_continued")
    k = f.k
    f.require(M)
    g.require(M)
    n = np.arange(1, M + 1, dtype=float)
    S = s + k - 1
    ser = complex(np.sum(f.a[1:M + 1] * np.conj(g.a[1:M + 1]) * np.exp(-S * np.log(n))))
    pref = sf.zeta_star(2 * s) * sf.gamma(S) * (4 * math.pi) ** (-S) / volume(1)
    val = np.conj(pref * ser)
    tail = abs(pref) * integrate.quad(lambda x: _divisor_envelope(x) ** 2 * x ** (-S.real + k - 1),
                                      M, np.inf, limit=200)[0]
    return TruncatedValue(complex(val), float(tail), {"M": M, "route": "unfolded"})


def eisenstein_star(z, s, mmax=None):
    """E*(z, s) = zeta*(2s) E(z, s) at level 1 from its Fourier expansion (z array, Im z >= 0.8)."""
    z = np.asarray(z, dtype=complex)
    s = complex(s)
    x, y = z.real, z.imag
    out = sf.zeta_star(2 * s) * y ** s + sf.zeta_star(2 - 2 * s) * y ** (1 - s)
    if mmax is None:
        mmax = int(math.ceil(40 / (2 * math.pi * float(y.min())))) + 2
    nu = s - 0.5
    for m in range(1, mmax + 1):
        K = sf.bessel_k(nu, 2 * math.pi * m * y)
        out = out + 4 * np.sqrt(y) * m ** nu * divisor_sigma(1 - 2 * s, m) * K * np.cos(2 * math.pi * m * x)
    return out


def rankin_selberg_continued(s, f, g, mesh=None):
    """<V, E*(., s)> at level 1 for any s off {0, 1}, by fundamental-domain quadrature."""
    s = complex(s)
    if abs(s) < 1e-8 or abs(s - 1) < 1e-8:
        raise PoleError("E*(z, s) has poles at s = 0, 1")
    mesh = mesh or FDMesh(y_max=12.0)
    return petersson_inner_fd(lambda z: v_product(z, f, g), lambda z: eisenstein_star(z, s), 1, mesh)


class _RSCache:
    """conj <V, E*(., u)>, analytic in u, routed by Re u."""

    def __init__(self, f, g, M):
        self.f, self.g, self.M = f, g, M
        self.cache = {}

    def __call__(self, u):
        u = complex(u)
        key = (round(u.real, 14), round(u.imag, 14))
        if key not in self.cache:
            # E*(z, u) = E*(z, 1 - u); the series tail is ~ M^(1 - Re u), so it is
            # used only far right, fundamental-domain quadrature everywhere else
            if u.real >= 4:
                v = rankin_selberg_inner(u, self.f, self.g, self.M).value
            elif u.real <= -3:
                v = rankin_selberg_inner(1 - u, self.f, self.g, self.M).value
            else:
                v = rankin_selberg_continued(u, self.f, self.g)
            self.cache[key] = np.conj(v)
        return self.cache[key]


# ------------------------------------------------------------------ Omega

def _delta_sigma(sigma, ell):
    # second term dropped exactly when ell = 1/2 - sigma
    return 1 if abs(ell - (0.5 - sigma)) < 1e-12 else 0


def omega_terms(s, sp, f, g, M, rs=None):
    """Per-ell pieces (ell, coefficient, first, second) of Omega(s; h) at level 1."""
    s = complex(s)
    if sp.N != 1:
        raise UnsupportedError("Omega is built in only at level 1")
    sigma = s.real
    if sigma >= 0.5:
        return []
    L = math.floor(0.5 - sigma)
    rs = rs or _RSCache(f, g, M)
    k = f.k
    h = sp.h
    vol = volume(1)
    out = []
    for ell in range(L + 1):
        for u in (2 * s + 2 * ell, 2 - 2 * s - 2 * ell):
            if abs(sf.zeta(u)) < 1e-6 or abs(u) < 1e-6 or abs(u - 1) < 1e-6:
                raise PoleError("zeta*(.) vanishes or is singular")
        coef = ((-1) ** ell * sf.gamma(1 - s) * sf.gamma(2 * s + ell - 1)
                / (math.factorial(ell) * sf.gamma(s + ell) * sf.gamma(1 - s - ell)))
        first = (math.pi ** (1 - s - ell) * h ** (1 - 2 * s - ell) * vol * rho_closed(1 - s - ell, -h, LEVEL1)
                 / (sf.gamma(1 - s - ell) * sf.zeta_star(2 * s + 2 * ell)) * rs(s + ell))
        second = 0j
        if not _delta_sigma(sigma, ell):
            second = (math.pi ** (s + ell) * h ** ell * vol * rho_closed(s + ell, -h, LEVEL1)
                      / (sf.gamma(s + ell) * sf.zeta_star(2 - 2 * s - 2 * ell)) * rs(1 - s - ell))
        out.append((ell, complex(coef), complex(first), complex(second)))
    return out


def omega(s, sp, f, g, M=2000, rs=None):
    """Omega(s; h): finite Eisenstein correction, zero for Re s >= 1/2."""
    s = complex(s)
    pre = (4 * math.pi) ** f.k / (2 * sf.gamma(s + f.k - 1))
    return complex(pre * sum(c * (a + b) for _, c, a, b in omega_terms(s, sp, f, g, M, rs)))


# ------------------------------------------------------- spectral evaluator

@dataclass
class SpectralDatum:
    t: complex
    rho_minus_h: dict = field(default_factory=dict)
    inner_Vu: complex = 0j

    def __post_init__(self):
        t = complex(self.t)
        if abs(t) < 1e-12:
            raise UnsupportedError("t_j = 0 (double-pole case) is not supported")
        if not (abs(t.imag) < 1e-14 or (abs(t.real) < 1e-14 and abs(t.imag) < 0.5)):
            raise DomainError("t must be real or purely imaginary with |Im t| < 1/2")


def load_spectral(path):
    """Lines `t_re t_im h rho_re rho_im innerV_re innerV_im`, '#' comments."""
    data = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 7:
                raise ParseError("expected 7 fields", lineno)
            try:
                tr, ti = float(parts[0]), float(parts[1])
                h = int(parts[2])
                rho = complex(float(parts[3]), float(parts[4]))
                inner = complex(float(parts[5]), float(parts[6]))
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            key = (tr, ti)
            if key not in data:
                data[key] = SpectralDatum(complex(tr, ti), {}, inner)
            data[key].rho_minus_h[h] = rho
    return list(data.values())


def gamma_ratio(s, t):
    """Gamma(s-1/2-it) Gamma(s-1/2+it) Gamma(1-s) / (Gamma(1/2-it) Gamma(1/2+it))."""
    s, t = complex(s), complex(t)
    return complex(sf.gamma(s - 0.5 - 1j * t) * sf.gamma(s - 0.5 + 1j * t) * sf.gamma(1 - s)
                   * sf.rgamma(0.5 - 1j * t) * sf.rgamma(0.5 + 1j * t))


def cusp_term(s, h, k, datum):
    """One Maass form's contribution to D(s; h) in the strip left of 1/2 - k/2."""
    s = complex(s)
    if h not in datum.rho_minus_h:
        raise NoDataError(f"no rho(-{h}) for t = {datum.t}")
    pre = (4 * math.pi) ** k / (2 * sf.gamma(s + k - 1) * h ** (s - 0.5))
    return complex(pre * np.conj(datum.rho_minus_h[h]) * gamma_ratio(s, datum.t) * np.conj(datum.inner_Vu))


def continuous_term(s, h, f, g, M=2000, T=20.0, nodes=40, rs=None):
    """Integral over the imaginary z-axis of the Eisenstein contribution (level 1)."""
    s = complex(s)
    k = f.k
    rs = rs or _RSCache(f, g, M)
    vol = volume(1)
    tau, wt = sf.gl_panels(np.linspace(-T, T, max(2, int(math.ceil(2 * T))) + 1), max(4, nodes // 4))
    total = 0j
    for t_, w_ in zip(tau, wt):
        z = 1j * t_
        val = (vol * math.pi ** (0.5 - z) * h ** (-z) * rho_closed(0.5 - z, -h, LEVEL1)
               * sf.rgamma(0.5 - z) / sf.zeta_star(1 + 2 * z) * gamma_ratio(s, z / 1j) * rs(0.5 + z))
        total += w_ * val
    pre = (4 * math.pi) ** k / (2 * sf.gamma(s + k - 1) * h ** (s - 0.5))
    # dz / (2 pi i) = d tau / (2 pi)
    return complex(pre * total / (2 * math.pi))


@dataclass
class SpectralValue:
    value: complex
    cusp: complex
    cont: complex
    omega: complex
    warnings: list


def d_spectral(s, sp, spectral, f, g, M=2000, continuous=True, allow_empty=False, T=20.0, nodes=40):
    """Cuspidal sum + continuous integral + Omega in 1/2 - A < Re s < 1/2 - k/2."""
    s = complex(s)
    k = f.k
    if sp.N != 1:
        raise UnsupportedError("the spectral evaluator is built in only at level 1")
    warnings = []
    if not spectral:
        if not allow_empty:
            raise NoDataError("no spectral data supplied")
        warnings.append("continuous-only: no Maass-form data, cuspidal part omitted")
    if s.real >= 0.5 - k / 2:
        warnings.append("Re s is outside the strip of absolute convergence")
    cusp = sum((cusp_term(s, sp.h, k, d) for d in spectral), 0j)
    rs = _RSCache(f, g, M)
    cont = continuous_term(s, sp.h, f, g, M, T, nodes, rs) if continuous else 0j
    om = omega(s, sp, f, g, M, rs)
    return SpectralValue(complex(cusp + cont + om), complex(cusp), complex(cont), complex(om), warnings)
