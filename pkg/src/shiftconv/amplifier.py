"""Character-twisted smoothed sums, the amplified second moment over characters
mod Q, its Parseval form and its split into diagonal / shifted pieces, and a
trend scan of the amplified-moment proxy Q^{-3/4} sqrt(S) against Q.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, InsufficientDataError, ResourceError
from .forms import dirichlet_characters, euler_phi, primes_upto
from .poincare import ShiftParams
from .sums import BumpProfile, fit_slope, s_double


def _is_prime(n):
    return n >= 2 and all(n % p for p in range(2, int(math.isqrt(n)) + 1))


def default_length(Q):
    return Q ** 0.25 * math.log(Q)


@dataclass
class AmplifierConfig:
    Q: int
    x_grid: list = None
    L: float = None
    primes: list = None
    chi: int = 1
    N0: int = 1
    chars: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.Q < 2:
            raise DomainError("Q must be >= 2")
        if self.L is None:
            self.L = default_length(self.Q)
        if self.primes is None:
            self.primes = [int(p) for p in primes_upto(int(math.ceil(2 * self.L)))
                           if self.L <= p < 2 * self.L and math.gcd(p, self.Q * self.N0) == 1]
        if self.x_grid is None:
            self.x_grid = [self.Q / 8, self.Q / 4, self.Q / 2, float(self.Q)]
        for p in self.primes:
            if not _is_prime(p):
                raise DomainError(f"{p} is not prime")
            if math.gcd(p, self.Q * self.N0) != 1:
                raise DomainError(f"{p} is not coprime to Q N0")
        if any(x > self.Q for x in self.x_grid):
            raise DomainError("x values must be <= Q")
        if self.chars is None:
            self.chars = dirichlet_characters(self.Q)
        if not 0 <= self.chi < len(self.chars):
            raise DomainError("character index out of range")

    @property
    def chi_values(self):
        return self.chars.values[self.chi]


def twisted_sum(chi, x, f, profile=None):
    """B_chi(x) = sum_m A(m) chi(m) G(m/x); chi is the value row mod Q (length Q)."""
    profile = profile or BumpProfile()
    chi = np.asarray(chi)
    Q = len(chi)
    m = np.arange(int(math.floor(x)) + 1, int(math.floor(2 * x)) + 1)
    m = m[m < 2 * x]
    if len(m) == 0:
        return 0j
    f.require(int(m.max()))
    return complex(np.sum(f.A[m] * chi[m % Q] * profile.G(m / x)))


def _twisted_all(cfg, x, f, profile):
    m = np.arange(int(math.floor(x)) + 1, int(math.floor(2 * x)) + 1)
    m = m[m < 2 * x]
    if len(m) == 0:
        return np.zeros(len(cfg.chars), dtype=complex)
    f.require(int(m.max()))
    w = f.A[m] * profile.G(m / x)
    return cfg.chars.values[:, m % cfg.Q] @ w


def _amplifier(cfg):
    ell = np.array(cfg.primes, dtype=np.int64)
    chibar = np.conj(cfg.chi_values[ell % cfg.Q])
    return cfg.chars.values[:, ell % cfg.Q] @ chibar


def amplified_terms(cfg, f, profile=None, x=None):
    """f(psi) = B_psi(x) sum_l chibar(l) psi(l) for every psi mod Q."""
    profile = profile or BumpProfile()
    x = cfg.x_grid[-1] if x is None else x
    return _twisted_all(cfg, x, f, profile) * _amplifier(cfg)


def amplified_s(cfg, f, profile=None, x=None):
    """sum_psi |B_psi(x)|^2 |sum_l chibar(l) psi(l)|^2."""
    return float(np.sum(np.abs(amplified_terms(cfg, f, profile, x)) ** 2))


def amplified_s_congruence(cfg, f, profile=None, x=None):
    """The same moment with the squares opened: phi(Q) sum_{l1, l2} chibar(l1) chi(l2)
    sum_{l1 m1 = l2 m2 mod Q, (m1 m2, Q) = 1} A(m1) conj(A(m2)) G(m1/x) G(m2/x)."""
    profile = profile or BumpProfile()
    x = cfg.x_grid[-1] if x is None else x
    Q = cfg.Q
    m = np.arange(int(math.floor(x)) + 1, int(math.floor(2 * x)) + 1)
    m = m[(m < 2 * x) & (np.gcd(m, Q) == 1)]
    if len(m) == 0:
        return 0.0
    w = f.A[m] * profile.G(m / x)
    chi = cfg.chi_values
    tot = 0j
    for l1 in cfg.primes:
        c1 = np.bincount((l1 * m) % Q, weights=w.real, minlength=Q) + 1j * np.bincount((l1 * m) % Q, weights=w.imag, minlength=Q)
        for l2 in cfg.primes:
            c2 = np.bincount((l2 * m) % Q, weights=w.real, minlength=Q) + 1j * np.bincount((l2 * m) % Q, weights=w.imag, minlength=Q)
            tot += np.conj(chi[l1 % Q]) * chi[l2 % Q] * np.sum(c1 * np.conj(c2))
    return complex(euler_phi(Q) * tot)


def parseval_decompose(cfg, f, profile=None, x=None):
    """sum_psi |f(psi)|^2 against sum_{(a,Q)=1} |fhat(a)|^2, fhat(a) = phi^{-1/2} sum_psi f(psi) conj(psi(a))."""
    fv = amplified_terms(cfg, f, profile, x)
    # compensated sums: both sides are ~1e5 and the check is absolute
    lhs = math.fsum(np.abs(fv) ** 2)
    units = np.array([a for a in range(cfg.Q) if math.gcd(a, cfg.Q) == 1])
    fhat = np.conj(cfg.chars.values[:, units]).T @ fv / math.sqrt(euler_phi(cfg.Q))
    rhs = math.fsum(np.abs(fhat) ** 2)
    return lhs, rhs, abs(lhs - rhs)


@dataclass
class SplitReport:
    S: float
    S1: complex
    S2: complex
    S3: complex
    R: complex
    assembled: complex
    total_bound_chain: float
    pairs: dict


def _pieces(l1, l2, Q, m, w):
    """Diagonal, positive-shift and negative-shift sums over l1 m1 = l2 m2 mod Q; plus the part with (m1 m2, Q) > 1."""
    d = l1 * m[:, None] - l2 * m[None, :]
    ww = w[:, None] * np.conj(w)[None, :]
    cong = d % Q == 0
    S1 = complex(np.sum(ww[d == 0]))
    S2 = complex(np.sum(ww[cong & (d > 0)]))
    S3 = complex(np.sum(ww[cong & (d < 0)]))
    bad = (np.gcd(m, Q) > 1)
    R = complex(np.sum(ww[cong & (bad[:, None] | bad[None, :])]))
    return S1, S2, S3, R


def s123_split(cfg, f, profile=None, x=None):
    """S = phi(Q) sum_{l1,l2} chibar(l1) chi(l2) (S1 + S2 + S3 - R) with S1 diagonal,
    S2 / S3 the positive / negative shifts by multiples of Q, R the non-unit residue classes."""
    profile = profile or BumpProfile()
    x = cfg.x_grid[-1] if x is None else x
    Q = cfg.Q
    m = np.arange(int(math.floor(x)) + 1, int(math.floor(2 * x)) + 1)
    m = m[m < 2 * x]
    f.require(int(m.max()) if len(m) else 1)
    w = f.A[m] * profile.G(m / x)
    chi = cfg.chi_values
    phi = euler_phi(Q)
    tot = [0j, 0j, 0j, 0j]
    bound = 0.0
    pairs = {}
    assembled = 0j
    for l1 in cfg.primes:
        for l2 in cfg.primes:
            p = _pieces(l1, l2, Q, m, w)
            pairs[(l1, l2)] = p
            wt = np.conj(chi[l1 % Q]) * chi[l2 % Q]
            for i in range(4):
                tot[i] += wt * p[i]
            assembled += wt * (p[0] + p[1] + p[2] - p[3])
            bound += sum(abs(v) for v in p)
    S = amplified_s(cfg, f, profile, x)
    return SplitReport(S, phi * tot[0], phi * tot[1], phi * tot[2], phi * tot[3],
                       complex(phi * assembled), float(phi * bound), pairs)


def s2_via_double(cfg, l1, l2, f, profile=None, x=None):
    """The positive-shift piece for one prime pair through sums.s_double with y = x."""
    profile = profile or BumpProfile()
    x = cfg.x_grid[-1] if x is None else x
    return s_double(x, x, cfg.Q, ShiftParams(1, l1, l2, 1, cfg.Q), f, f, profile, profile)


# ------------------------------------------------------------------ scan

@dataclass
class TrendReport:
    rows: list  # (Q, x, S, proxy)
    per_Q: list  # (Q, max proxy)
    slope: float
    spread: float
    target: float = 0.375

    CSV_COLUMNS = ("Q", "x", "S", "proxy", "logQ", "logproxy")

    def csv_rows(self):
        for Q, x, S, pr in self.rows:
            yield (Q, x, S, pr, math.log(Q), math.log(pr) if pr > 0 else float("nan"))


def subconvexity_scan(Q_list, f, profile=None, chi=1):
    """max over x in {Q/8, Q/4, Q/2, Q} of Q^{-3/4} sqrt(S), and its log-slope in Q."""
    profile = profile or BumpProfile()
    Q_list = list(Q_list)
    if len(Q_list) < 3:
        raise InsufficientDataError("need at least 3 moduli")
    need = 2 * max(Q_list)
    if f.M < need:
        raise ResourceError(f"coefficient table has {f.M} entries, {need} needed")
    rows, per_Q = [], []
    for Q in Q_list:
        if not _is_prime(Q):
            raise DomainError(f"Q = {Q} is not prime")
        cfg = AmplifierConfig(Q, chi=chi)
        best = 0.0
        for x in cfg.x_grid:
            S = amplified_s(cfg, f, profile, x)
            pr = Q ** -0.75 * math.sqrt(max(S, 0.0))
            rows.append((Q, float(x), S, pr))
            best = max(best, pr)
        per_Q.append((Q, best))
    slope, _, spread, _, _ = fit_slope([q for q, _ in per_Q], [p for _, p in per_Q])
    return TrendReport(rows, per_Q, slope, spread)
