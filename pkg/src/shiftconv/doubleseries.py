"""The double Dirichlet series Z_Q(s, w) on finite boxes, its rearrangement
into the pieces S1..S8, the Moebius and character-orthogonality identities,
L_Q for Maass data, and the residue along the polar lines w + 2s + k/2 = 5/2 - l.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import specfun as sf
from .dseries import _RSCache, _divisor_envelope
from .eisenstein import CuspLabel, TruncatedValue, k_capital
from .errors import DomainError, NoDataError, UnsupportedError
from .forms import dirichlet_characters, divisors, euler_phi, mobius, prime_divisors
from .poincare import ShiftParams, volume

EPS_K = 0.1


@dataclass
class ZqQuery:
    s: complex
    w: complex
    sp: ShiftParams
    f: object
    g: object
    M2: int = 2000
    H: int = 2000

    def __post_init__(self):
        if self.f.k != self.g.k:
            raise DomainError("f and g must have the same weight")
        if self.M2 < 1 or self.H < 1:
            raise DomainError("box sizes must be positive")

    @property
    def k(self):
        return self.f.k

    @property
    def sprime(self):
        return complex(self.s) + complex(self.w) + self.k / 2 - 1

    @property
    def beta(self):
        return complex(self.w) + (self.k - 1) / 2

    @property
    def K(self):
        return max(0, math.ceil(1 + EPS_K - complex(self.w).real))


def _pairs(q):
    """(m1, m2, h0) with l1 m1 = l2 m2 + h0 Q on the box m2 <= M2, h0 <= H."""
    l1, l2, Q = q.sp.l1, q.sp.l2, q.sp.Q
    m2 = np.arange(1, q.M2 + 1, dtype=np.int64)
    h0 = np.arange(1, q.H + 1, dtype=np.int64)
    num = l2 * m2[:, None] + Q * h0[None, :]
    ok = num % l1 == 0
    M2g, Hg = np.nonzero(ok)
    return num[ok] // l1, m2[M2g], h0[Hg]


def zq_terms(q):
    """(m1, m2, h0, c) with Z_Q(s, w) = sum c (l2 m2)^{-s} (h0 Q)^{-w} on the box.

    c = A(m1) conj(B(m2)) (1 + h0 Q / (l2 m2))^{(k-1)/2} (h0 Q)^{-(k-1)/2}.
    """
    k = q.k
    l2, Q = q.sp.l2, q.sp.Q
    m1, m2, h0 = _pairs(q)
    if len(m1):
        q.f.require(int(m1.max()))
    q.g.require(q.M2)
    hq = (h0 * Q).astype(float)
    base = (l2 * m2).astype(float)
    c = q.f.A[m1] * np.conj(q.g.A[m2]) * np.exp((k - 1) / 2 * (np.log1p(hq / base) - np.log(hq)))
    return m1, m2, h0, c


def zq_truncated(q):
    """Z_Q(s, w) summed over the box, in the A, B normalisation."""
    s, w = complex(q.s), complex(q.w)
    l2, Q = q.sp.l2, q.sp.Q
    m1, m2, h0, c = zq_terms(q)
    terms = c * np.exp(-s * np.log((l2 * m2).astype(float)) - w * np.log((h0 * Q).astype(float)))
    val = complex(np.sum(terms))
    tail = math.inf
    if s.real > 1 and w.real > 1:
        # crude envelope of the two missing strips (m2 > M2) and (h0 > H)
        a, b = s.real, w.real
        tail = (_divisor_envelope(q.M2) ** 2 * q.M2 ** (1 - a) / (a - 1) * sf.zeta(b).real * Q ** (-b)
                + _divisor_envelope(q.H * Q) ** 2 * (q.H * Q) ** (1 - b) / (b - 1) * sf.zeta(a).real)
    return TruncatedValue(val, float(tail), {"M2": q.M2, "H": q.H, "pairs": int(len(m1))})


def zq_from_d(q):
    """Same finite box summed as (l1 l2)^{(k-1)/2} sum_h D(s; hQ) / (hQ)^{w+(k-1)/2}."""
    s, w = complex(q.s), complex(q.w)
    k = q.k
    l1, l2, Q = q.sp.l1, q.sp.l2, q.sp.Q
    tot = 0j
    m2 = np.arange(1, q.M2 + 1, dtype=np.int64)
    for h0 in range(1, q.H + 1):
        num = l2 * m2 + h0 * Q
        ok = num % l1 == 0
        if not ok.any():
            continue
        m1 = num[ok] // l1
        mm2 = m2[ok]
        D = np.sum(q.f.a[m1] * np.conj(q.g.a[mm2]) * np.exp(-(s + k - 1) * np.log((l2 * mm2).astype(float))))
        tot += D * (h0 * Q) ** (-(w + (k - 1) / 2))
    return complex((l1 * l2) ** ((k - 1) / 2) * tot)


# ------------------------------------------------------------ S1 .. S8

def _poch_neg(beta, j):
    """binom(-beta, j)."""
    c = 1 + 0j
    for i in range(j):
        c *= (-beta - i) / (i + 1)
    return c


def _weights(q, j, m1, m2):
    s, k = complex(q.s), q.k
    return (q.f.a[m1] * np.conj(q.g.a[m2]) * np.exp(-(s + k - 1 - j) * np.log(m2.astype(float))
                                                   - (q.beta + j) * np.log(m1.astype(float))))


def _prefactor(q):
    # (l1 l2)^{(k-1)/2} l2^{-(s+k-1)} l1^{-beta}
    l1, l2, k = q.sp.l1, q.sp.l2, q.k
    return (l1 * l2) ** ((k - 1) / 2) * l2 ** (-(complex(q.s) + k - 1)) * l1 ** (-q.beta)


def _pair_box(q):
    """All (m1, m2) with m2 <= M2 and m1 <= (l2 M2 + H Q) / l1."""
    l1, l2, Q = q.sp.l1, q.sp.l2, q.sp.Q
    M1 = (l2 * q.M2 + q.H * Q) // l1
    return M1


def s3_j(q, j, box="pair"):
    """S3(s, w, j): l2 m2 < h0 Q part, on the pair box (or the Z box with box='z')."""
    l1, l2, Q = q.sp.l1, q.sp.l2, q.sp.Q
    if box == "z":
        m1, m2, h0 = _pairs(q)
    else:
        m1, m2, h0 = _shift_on_pair_box(q, positive=True)
    cut = l2 * m2 < h0 * Q
    return complex(np.sum(_weights(q, j, m1[cut], m2[cut])))


def _shift_on_pair_box(q, positive=True):
    l1, l2, Q = q.sp.l1, q.sp.l2, q.sp.Q
    M1 = _pair_box(q)
    q.f.require(M1)
    q.g.require(q.M2)
    m2 = np.arange(1, q.M2 + 1, dtype=np.int64)
    m1 = np.arange(1, M1 + 1, dtype=np.int64)
    diff = l1 * m1[None, :] - l2 * m2[:, None]
    if positive:
        ok = (diff > 0) & (diff % Q == 0)
    else:
        ok = (diff < 0) & (diff % Q == 0)
    i2, i1 = np.nonzero(ok)
    return m1[i1], m2[i2], np.abs(diff[ok]) // Q


def s_pieces(q, j):
    """S3..S8 at fixed j on the pair box; S3 = S5 - S6 - S7 - S8 holds exactly there."""
    l1, l2, Q = q.sp.l1, q.sp.l2, q.sp.Q
    M1 = _pair_box(q)
    m1p, m2p, h0p = _shift_on_pair_box(q, positive=True)
    cut = l2 * m2p < h0p * Q
    S3 = complex(np.sum(_weights(q, j, m1p[cut], m2p[cut])))
    S6 = complex(np.sum(_weights(q, j, m1p[~cut], m2p[~cut])))
    m1n, m2n, _ = _shift_on_pair_box(q, positive=False)
    S7 = complex(np.sum(_weights(q, j, m1n, m2n)))
    S8 = s8_direct(q, j, M1)
    S5 = s5(q, j, Q, M1, q.M2)
    return {"S3": S3, "S5": S5, "S6": S6, "S7": S7, "S8": S8}


def s5(q, j, Q, M1, M2, coprime=False, dilate=1):
    """sum over l1 m1 = l2 m2 (mod Q) of the j-weights, m1 <= M1, m2 <= M2.

    With coprime=True the condition (m2, Q) = 1 is imposed; dilate=d evaluates
    the weights at (d m1, d m2) as needed by the gcd sieve.
    """
    l1, l2 = q.sp.l1, q.sp.l2
    m1 = np.arange(1, M1 + 1, dtype=np.int64)
    m2 = np.arange(1, M2 + 1, dtype=np.int64)
    if coprime:
        m2 = m2[np.gcd(m2, Q) == 1]
    r1 = (l1 * m1) % Q
    r2 = (l2 * m2) % Q
    w1 = q.f.a[dilate * m1] * np.exp(-(q.beta + j) * np.log((dilate * m1).astype(float)))
    w2 = np.conj(q.g.a[dilate * m2]) * np.exp(-(complex(q.s) + q.k - 1 - j) * np.log((dilate * m2).astype(float)))
    # group by residue class
    c1 = np.bincount(r1, weights=w1.real, minlength=Q) + 1j * np.bincount(r1, weights=w1.imag, minlength=Q)
    c2 = np.bincount(r2, weights=w2.real, minlength=Q) + 1j * np.bincount(r2, weights=w2.imag, minlength=Q)
    return complex(np.sum(c1 * c2))


def s5_prime_characters(q, j, Q, M1, M2, dilate=1):
    """(1/phi(Q)) sum_chi chi(l1) chibar(l2) L_f(chi) L_g(chibar) on the same finite set.

    The f-side carries chi and exponent w + j, the g-side carries chibar and
    exponent s + (k-1)/2 - j.
    """
    l1, l2 = q.sp.l1, q.sp.l2
    chars = dirichlet_characters(Q)
    m1 = np.arange(1, M1 + 1, dtype=np.int64)
    m2 = np.arange(1, M2 + 1, dtype=np.int64)
    w1 = q.f.a[dilate * m1] * np.exp(-(q.beta + j) * np.log((dilate * m1).astype(float)))
    w2 = np.conj(q.g.a[dilate * m2]) * np.exp(-(complex(q.s) + q.k - 1 - j) * np.log((dilate * m2).astype(float)))
    c1 = np.bincount(m1 % Q, weights=w1.real, minlength=Q) + 1j * np.bincount(m1 % Q, weights=w1.imag, minlength=Q)
    c2 = np.bincount(m2 % Q, weights=w2.real, minlength=Q) + 1j * np.bincount(m2 % Q, weights=w2.imag, minlength=Q)
    tot = 0j
    for i in range(len(chars)):
        chi = chars.values[i]
        Lf = np.sum(c1 * chi)
        Lg = np.sum(c2 * np.conj(chi))
        tot += chars(i, l1) * np.conj(chars(i, l2)) * Lf * Lg
    return complex(tot / euler_phi(Q))


def s8_direct(q, j, M1=None):
    """Diagonal l1 m1 = l2 m2 on the pair box."""
    l1, l2 = q.sp.l1, q.sp.l2
    g = math.gcd(l1, l2)
    a1, a2 = l2 // g, l1 // g
    M1 = M1 or _pair_box(q)
    nmax = min(M1 // a1, q.M2 // a2)
    q.f.require(a1 * nmax)
    q.g.require(a2 * nmax)
    n = np.arange(1, nmax + 1, dtype=np.int64)
    return complex(np.sum(_weights(q, j, a1 * n, a2 * n)))


def s8_factored(q, j, M1=None):
    """Hecke factorisation of the diagonal: coprime part times the (l1 l2)-smooth part."""
    l1, l2, k = q.sp.l1, q.sp.l2, q.k
    g = math.gcd(l1, l2)
    a1, a2 = l2 // g, l1 // g  # m1 = a1 n, m2 = a2 n
    M1 = M1 or _pair_box(q)
    nmax = min(M1 // a1, q.M2 // a2)
    q.f.require(a1 * nmax)
    q.g.require(a2 * nmax)
    sig = complex(q.s) + complex(q.w) + (k - 1) / 2
    L = l1 * l2
    ps = prime_divisors(L)
    smooth = [1]
    for p in ps:
        smooth = [r * p ** e for r in smooth for e in range(int(math.log(nmax, p)) + 2) if r * p ** e <= nmax]
    smooth = sorted(set(smooth))
    A, B = q.f.A, q.g.A
    pref = a2 ** (-(complex(q.s) + (k - 1) / 2 - j)) * a1 ** (-(complex(q.w) + j))
    tot = 0j
    m = np.arange(1, nmax + 1, dtype=np.int64)
    m = m[np.gcd(m, L) == 1]
    cm = A[m] * np.conj(B[m]) * np.exp(-sig * np.log(m.astype(float)))
    for r in smooth:
        keep = m * r <= nmax
        tot += (A[a1 * r] * np.conj(B[a2 * r]) * r ** (-sig)) * np.sum(cm[keep])
    return complex(pref * tot)


def s_decomposition(q, j=None):
    """S1, S2 on the Z box; S3 (binomial form, j <= K) and S4 = S2 - S3; S5..S8 at order j."""
    s, w = complex(q.s), complex(q.w)
    k = q.k
    if (s + w + k / 2).real <= 2.5:
        raise DomainError("need Re(s + w + k/2) > 5/2")
    l1, l2, Q = q.sp.l1, q.sp.l2, q.sp.Q
    m1, m2, h0 = _pairs(q)
    q.f.require(int(m1.max()))
    q.g.require(q.M2)
    hq = (h0 * Q).astype(float)
    terms = ((l1 * l2) ** ((k - 1) / 2) * q.f.a[m1] * np.conj(q.g.a[m2])
             * np.exp(-(s + k - 1) * np.log((l2 * m2).astype(float)) - q.beta * np.log(hq)))
    cut = l2 * m2 < h0 * Q
    S1 = complex(np.sum(terms[~cut]))
    S2 = complex(np.sum(terms[cut]))
    pre = _prefactor(q)
    S3 = 0j
    for jj in range(q.K + 1):
        S3 += pre * _poch_neg(q.beta, jj) * (-l2 / l1) ** jj * s3_j(q, jj, box="z")
    out = {"S1": S1, "S2": S2, "S3": S3, "S4": S2 - S3, "K": q.K}
    jj = q.K if j is None else j
    out.update({k_: v for k_, v in s_pieces(q, jj).items() if k_ != "S3"})
    out["S3j"] = s3_j(q, jj)
    out["j"] = jj
    return out


def s2_binomial(q, J):
    """S2 re-expanded through order J (all pieces on the Z box)."""
    l1, l2 = q.sp.l1, q.sp.l2
    pre = _prefactor(q)
    return complex(sum(pre * _poch_neg(q.beta, jj) * (-l2 / l1) ** jj * s3_j(q, jj, box="z")
                       for jj in range(J + 1)))


@dataclass
class SieveReport:
    sieve_dev: float
    char_dev: float
    S5: complex
    S5_sieve: complex
    S5p: complex
    S5p_chars: complex


def s5_sieve_check(q, j=0, box=2000):
    """S5(Q) = sum_{d|Q} S5'_d(Q/d) and the character form of S5'(Q), on the square box."""
    l1, l2, Q = q.sp.l1, q.sp.l2, q.sp.Q
    if math.gcd(l1 * l2, Q) != 1:
        raise DomainError("need (l1 l2, Q) = 1")
    q.f.require(box)
    q.g.require(box)
    S5 = s5(q, j, Q, box, box)
    # gcd(m2, Q) = d forces d | m1; write m = d m' with (m2', Q/d) = 1
    sieve = sum(s5(q, j, Q // d, box // d, box // d, coprime=True, dilate=d) for d in divisors(Q))
    S5p = s5(q, j, Q, box, box, coprime=True)
    chars = s5_prime_characters(q, j, Q, box, box)
    return SieveReport(abs(S5 - sieve), abs(S5p - chars), S5, complex(sieve), S5p, chars)


def s5_moebius(q, j, box=2000):
    """S5'(Q) = sum_{d|Q} mu(d) S5_d(Q/d) with dilated weights."""
    Q = q.sp.Q
    return complex(sum(mobius(d) * s5(q, j, Q // d, box // d, box // d, dilate=d) for d in divisors(Q)))


# ------------------------------------------------------------------ L_Q

def l_q(sprime, datum, Q, H_max):
    """sum_{h <= H_max} conj(rho(-hQ)) / (hQ)^{s'}."""
    sprime = complex(sprime)
    if datum is None or not datum.rho_minus_h:
        raise NoDataError("no spectral coefficients")
    if sprime.real <= 1:
        raise DomainError("need Re s' > 1")
    tot = 0j
    for h in range(1, H_max + 1):
        n = h * Q
        if n not in datum.rho_minus_h:
            raise NoDataError(f"rho(-{n}) missing")
        tot += np.conj(datum.rho_minus_h[n]) * n ** (-sprime)
    return TruncatedValue(complex(tot), math.nan, {"H_max": H_max})


# ------------------------------------------------------- polar line residue

def sprime_residue(s, ell, sp, f, g, M=2000, K=None, rs=None):
    """Residue of Z_Q on w + 2s + k/2 = 5/2 - ell (level 1, one cusp).

    K may be a pair (K+, K-) to freeze the Dirichlet-polynomial ratios.
    """
    s = complex(s)
    if sp.N != 1:
        raise UnsupportedError("level-1 data path only")
    k = f.k
    Q = sp.Q
    cusp = CuspLabel(1, 1)
    u = 1.5 - s - ell
    if K is None:
        K = (k_capital(u, cusp, Q, "+"), k_capital(u, cusp, Q, "-"))
    rs = rs or _RSCache(f, g, M)
    vol = volume(1)
    lead = (4 * math.pi) ** k * sf.gamma(1 - s) / (2 * sf.gamma(s + k - 1))
    br = (vol * (-1) ** ell * sf.gamma(2 * s + ell - 1) * Q ** (-u)
          / (math.factorial(ell) * math.pi ** (s + ell - 1) * sf.zeta_star(2 * s + 2 * ell)
             * sf.gamma(s + ell) * sf.gamma(1 - s - ell) ** 2))
    return complex(lead * br * (K[0] * rs(s + ell) + K[1] * rs(1 - s - ell)))


def b_a_polyfactor(s, A):
    s = complex(s)
    out = 1 + 0j
    for ell in range(int(math.floor(A)) + 1):
        out *= sf.zeta(2 * s + 2 * ell) * (s + ell - 0.5) ** 2
    return complex(out)
