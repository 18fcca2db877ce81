"""Eisenstein series coefficients at the cusps 1/w of Gamma_0(N), N square-free.

rho(s, n) by its defining exponential sum and by the closed Euler-product form,
the Dirichlet series zeta_{a,Q}(s', z) built from them, and the residue ratios
K^{+-} (in s') and k^{+-} (in z).
"""
from dataclasses import dataclass
import math

import numpy as np

from . import specfun as sf
from .errors import ConvergenceError, DomainError, PoleError
from .forms import divisors, is_squarefree, prime_divisors


@dataclass(frozen=True)
class CuspLabel:
    w: int
    N: int

    def __post_init__(self):
        if self.N < 1 or self.w < 1 or self.N % self.w:
            raise DomainError("cusp 1/w needs w | N")
        if not is_squarefree(self.N):
            raise DomainError("only square-free levels are supported")


def cusps(N):
    return [CuspLabel(w, N) for w in divisors(N)]


@dataclass
class TruncatedValue:
    value: complex
    tail_bound: float
    params: dict

    def __complex__(self):
        return complex(self.value)


def _vp(p, n):
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _zeta_guard(s, what="zeta"):
    z = sf.zeta(s)
    if abs(z) < 1e-6:
        raise PoleError(f"{what}({s}) is too close to a zero")
    return z


# ------------------------------------------------------------------ rho

def _rho_sums(s, ms, cusp, C_max):
    w, N = cusp.w, cusp.N
    Nw = N // w
    g = math.gcd(w, Nw)
    ms = np.asarray(ms, dtype=np.int64)
    total = np.zeros(len(ms), dtype=complex)
    for gam in range(1, C_max + 1):
        if math.gcd(gam, Nw) != 1:
            continue
        q = gam * w
        d = np.arange(q)
        d = d[np.gcd(d, q) == 1]
        if g > 1:
            d = d[(d * gam) % g == 1 % g]
        ph = np.exp(-2j * np.pi * (np.multiply.outer(ms, d) % q) / q)
        total += gam ** (-2 * s) * ph.sum(axis=1)
    return (g / (w * N)) ** s * total


def rho_direct(s, m, cusp, C_max=2000, rel_tol=1e-5):
    """Defining sum: ((w,N/w)/(wN))^s sum_gamma gamma^{-2s} sum_delta e(-m delta / (gamma w)).

    m may be an integer or a sequence of integers (one pass over gamma for all).
    """
    s = complex(s)
    if s.real <= 1:
        raise DomainError("the defining sum needs Re s > 1")
    many = np.ndim(m) > 0
    ms = np.atleast_1d(m)
    vals = _rho_sums(s, ms, cusp, C_max)
    w, N = cusp.w, cusp.N
    pref = abs((math.gcd(w, N // w) / (w * N)) ** s)
    sig = s.real
    out = []
    for mm, val in zip(ms, vals):
        # |Ramanujan-type sum| <= gcd(gamma w, m) <= |m|; for m = 0 it is <= gamma w
        if mm == 0:
            tail = w * C_max ** (2 - 2 * sig) / (2 * sig - 2)
        else:
            tail = abs(int(mm)) * C_max ** (1 - 2 * sig) / (2 * sig - 1)
        tail *= pref
        if tail > rel_tol * max(abs(val), 1e-300):
            raise ConvergenceError(f"rho tail {tail:.3g} exceeds tolerance")
        out.append(TruncatedValue(complex(val), float(tail), {"C_max": C_max}))
    return out if many else out[0]


def rho_closed(s, n, cusp):
    """Closed Euler-product form of rho_{1/w}(s, n), n != 0."""
    if n == 0:
        raise DomainError("closed form needs n != 0")
    s = complex(s)
    w, N = cusp.w, cusp.N
    n = abs(n)
    zs = _zeta_guard(2 * s)
    sig = sum(d ** (1 - 2 * s) for d in divisors(n) if math.gcd(d, N) == 1)
    out = (w / N) ** s * sig / zs
    for p in prime_divisors(N):
        out /= 1 - p ** (-2 * s)
    for p in prime_divisors(w):
        k = _vp(p, n)
        e = 1 - 2 * s
        den = 1 - p ** e
        if abs(den) < 1e-12:
            raise PoleError("local factor denominator vanishes")
        out *= p ** (-2 * s) / den * (p - p ** (k * e + 1) - 1 + p ** ((k + 1) * e))
    return complex(out)


# ------------------------------------------------------- zeta_{a,Q}(s', z)

def zeta_aq_direct(sp_, z, cusp, Q, H_max=100000, rel_tol=1e-4):
    """Q^{-z} zeta(1-2z) sum_{h <= H_max} rho(1/2 - z, -hQ) / h^{s'+z}, rho in closed form."""
    sp_, z = complex(sp_), complex(z)
    if min((sp_ + z).real, (sp_ - z).real) <= 1:
        raise DomainError("need Re(s' +- z) > 1")
    w, N = cusp.w, cusp.N
    s = 0.5 - z
    e = 1 - 2 * s  # = 2z
    h = np.arange(1, H_max + 1)
    n = h * Q
    # sigma_{2z}(n) restricted to (d, N) = 1 for all n <= H_max Q at once via a sieve over d
    nmax = int(n[-1])
    sig = np.zeros(nmax + 1, dtype=complex)
    for d in range(1, nmax + 1):
        if math.gcd(d, N) == 1:
            sig[d::d] += d ** e
    vals = sig[n]
    for p in prime_divisors(N):
        vals = vals / (1 - p ** (-2 * s))
    for p in prime_divisors(w):
        k = np.zeros(len(n), dtype=np.int64)
        m = n.copy()
        while True:
            hit = m % p == 0
            if not hit.any():
                break
            k[hit] += 1
            m = np.where(hit, m // p, m)
        vals = vals * (p ** (-2 * s) / (1 - p ** e)) * (p - p ** (k * e + 1) - 1 + p ** ((k + 1) * e))
    vals = vals * (w / N) ** s / sf.zeta(2 * s)
    terms = vals * np.exp(-(sp_ + z) * np.log(h))
    val = Q ** (-z) * sf.zeta(1 - 2 * z) * complex(np.sum(terms))
    # tail: |sigma_{2z}(n)| <= d(n) n^{max(0, 2 Re z)}; crude integral envelope
    a = (sp_ + z).real - max(0.0, 2 * z.real)
    tail = abs(Q ** (-z) * sf.zeta(1 - 2 * z) / sf.zeta(2 * s)) * (w / N) ** s.real * \
        Q ** max(0.0, 2 * z.real) * (1 + math.log(H_max * Q)) ** 2 * H_max ** (1 - a) / max(a - 1, 1e-12)
    tail = abs(tail) * 10
    if tail > rel_tol * max(abs(val), 1e-300):
        raise ConvergenceError(f"zeta_aQ tail {tail:.3g} exceeds tolerance")
    return TruncatedValue(complex(val), float(tail), {"H_max": H_max})


def _local_w(p, alpha, sp_, z):
    den = 1 - p ** (2 * z)
    if abs(den) < 1e-8:
        raise PoleError("1 - p^{2z} vanishes")
    return p ** (-1 + 2 * z) / den * ((p - 1) * (1 - p ** (-(sp_ - z)))
                                      + p ** (alpha * 2 * z) * (p ** (2 * z) - p) * (1 - p ** (-(sp_ + z))))


def _local_q(q, alpha, sp_, z):
    den = 1 - q ** (2 * z)
    if abs(den) < 1e-8:
        raise PoleError("1 - q^{2z} vanishes")
    return ((1 - q ** (-(sp_ - z))) - q ** ((alpha + 1) * 2 * z) * (1 - q ** (-(sp_ + z)))) / den


def _aq_rest(sp_, z, cusp, Q):
    """zeta_{a,Q}(s', z) / (zeta(s'+z) zeta(s'-z))."""
    w, N = cusp.w, cusp.N
    out = (w / N) ** (0.5 - z) * Q ** (-z)
    for p in prime_divisors(N):
        den = 1 - p ** (-1 + 2 * z)
        if abs(den) < 1e-8:
            raise PoleError("1 - p^{-1+2z} vanishes")
        out /= den
    for p in prime_divisors(N // w):
        out *= 1 - p ** (-(sp_ - z))
    for p in prime_divisors(w):
        out *= _local_w(p, _vp(p, Q), sp_, z)
    for q in prime_divisors(Q):
        if N % q:
            out *= _local_q(q, _vp(q, Q), sp_, z)
    return complex(out)


def zeta_aq_closed(sp_, z, cusp, Q):
    sp_, z = complex(sp_), complex(z)
    for v in (sp_ + z, sp_ - z):
        if abs(v - 1) < 1e-8:
            raise PoleError("zeta pole at s' +- z = 1")
    return complex(sf.zeta(sp_ + z) * sf.zeta(sp_ - z) * _aq_rest(sp_, z, cusp, Q))


def k_capital(sp_, cusp, Q, sign):
    """K^{+-}: Res_{z = +-(1-s')} zeta_{a,Q}(s', z) = K^{+-} zeta(2s' - 1)."""
    sp_ = complex(sp_)
    if abs(sp_ - 1) < 1e-8:
        raise PoleError("K is singular at s' = 1")
    if sign == "+":
        return _aq_rest(sp_, 1 - sp_, cusp, Q)
    if sign == "-":
        # the zeta(s' - z) pole has residue -1 in z
        return -_aq_rest(sp_, sp_ - 1, cusp, Q)
    raise DomainError("sign must be '+' or '-'")


def k_small(z, cusp, Q, sign):
    """k^{+-}(z): Res_{s' = 1 +- z} zeta_{a,Q}(s', z) = zeta(1 +- 2z) k^{+-}(z), as Euler products."""
    z = complex(z)
    w, N = cusp.w, cusp.N
    out = (w / N) ** (0.5 - z) * Q ** (-z)
    if sign == "+":
        for p in prime_divisors(N):
            out /= 1 - p ** (-1 + 2 * z)
        for p in prime_divisors(N // w):
            out *= 1 - 1 / p
        for p in prime_divisors(w):
            a = _vp(p, Q)
            den = 1 - p ** (2 * z)
            if abs(den) < 1e-8:
                raise PoleError("1 - p^{2z} vanishes")
            out *= p ** (-1 + 2 * z) / den * ((p - 1) * (1 - 1 / p)
                                              + p ** (a * 2 * z) * (p ** (2 * z) - p) * (1 - p ** (-(1 + 2 * z))))
        for q in prime_divisors(Q):
            if N % q:
                a = _vp(q, Q)
                den = 1 - q ** (2 * z)
                if abs(den) < 1e-8:
                    raise PoleError("1 - q^{2z} vanishes")
                out *= ((1 - 1 / q) - q ** ((a + 1) * 2 * z) * (1 - q ** (-(1 + 2 * z)))) / den
        return complex(out)
    if sign == "-":
        for p in prime_divisors(w):
            a = _vp(p, Q)
            den = 1 - p ** (2 * z)
            if abs(den) < 1e-8:
                raise PoleError("1 - p^{2z} vanishes")
            out *= p ** (-1 + 2 * z) / den * (p - 1) * (1 - p ** (a * 2 * z))
        for q in prime_divisors(Q):
            if N % q:
                a = _vp(q, Q)
                den = 1 - q ** (2 * z)
                if abs(den) < 1e-8:
                    raise PoleError("1 - q^{2z} vanishes")
                out *= ((1 - q ** (-(1 - 2 * z))) - q ** ((a + 1) * 2 * z) * (1 - 1 / q)) / den
        return complex(out)
    raise DomainError("sign must be '+' or '-'")


def cusp_coefficient_mass(t, m, N):
    """sum over cusps of |rho_a(1/2 + it, m)|^2."""
    return float(sum(abs(rho_closed(0.5 + 1j * t, m, c)) ** 2 for c in cusps(N)))
