"""Smoothed shifted sums S(x; h) and S_Q(x, y), the bump and its Mellin
transform, the Gamma-Beta Mellin identity, the inverse-Mellin representations
of both sums, and log-log cancellation scans.
"""
from dataclasses import dataclass, field
import functools
import math

import numpy as np

from scipy.special import loggamma

from . import specfun as sf
from .doubleseries import ZqQuery, zq_terms
from .dseries import DSeriesQuery, d_truncated
from .errors import ConvergenceError, DomainError, InsufficientDataError
from .poincare import ShiftParams, shift_pairs

PANEL = 0.5


@functools.lru_cache(maxsize=8)
def _legendre(n):
    # the eigenvalue solve is O(n^3); every profile of the same size shares it
    return np.polynomial.legendre.leggauss(n)


def _bump_raw(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 1) & (u < 2)
    v = u[inside]
    out[inside] = np.exp(-1.0 / ((v - 1) * (2 - v)))
    return out


@dataclass
class BumpProfile:
    """exp(-1/((u-1)(2-u))) on (1, 2), scaled so that g(0) = int G(x) dx/x = 1.

    g(s) = int G(x) x^{-s} dx/x is evaluated by Gauss-Legendre on [1, 2];
    the bump is flat to all orders at both ends so the rule converges fast.
    """
    nodes: int = 4000
    mellin_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        xg, wg = _legendre(self.nodes)
        self._x = 1.5 + 0.5 * xg
        self._w = 0.5 * wg * _bump_raw(self._x)
        self._logx = np.log(self._x)
        self.scale = 1.0 / float(np.sum(self._w / self._x))

    @property
    def support(self):
        return (1.0, 2.0)

    def G(self, x):
        return self.scale * _bump_raw(x)

    def g(self, s):
        """Mellin transform; s scalar or array."""
        s = np.asarray(s, dtype=complex)
        flat = s.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i0 in range(0, len(flat), 256):
            blk = flat[i0:i0 + 256]
            out[i0:i0 + 256] = np.exp(-np.multiply.outer(blk + 1, self._logx)) @ self._w
        out = self.scale * out.reshape(s.shape)
        return out if out.ndim else complex(out)

    def g_reflected(self, s):
        """Mellin transform of x -> G(1/x), i.e. g(-s); pairs G(m/x) with x^s."""
        return self.g(-np.asarray(s, dtype=complex))

    def g_cached(self, s):
        key = complex(s)
        if key not in self.mellin_cache:
            self.mellin_cache[key] = self.g(key)
        return self.mellin_cache[key]

    def envelope_height(self, c, eps=1e-14, t_max=4000.0):
        """Smallest T with |g(c + it)| < eps * |g(c)| for |t| >= T (sampled)."""
        g0 = abs(self.g(c))
        ts = np.arange(0.0, t_max, 4.0)
        vals = np.abs(self.g(c + 1j * ts)) + np.abs(self.g(c - 1j * ts))
        bad = np.nonzero(vals >= eps * g0)[0]
        if len(bad) == 0:
            return 4.0
        if bad[-1] == len(ts) - 1:
            raise ConvergenceError("Mellin transform has not decayed by t_max")
        return float(ts[bad[-1] + 1])


def bump_g(profile=None):
    profile = profile or BumpProfile()
    return profile.G, profile.g


def _line_nodes(c, T, panel=PANEL, n=8, centre=0.0):
    """Gauss-Legendre nodes on c + i[centre - T, centre + T]; weights include the 1/(2 pi) of ds/(2 pi i)."""
    npan = max(1, int(math.ceil(2 * T / panel)))
    breaks = np.linspace(centre - T, centre + T, npan + 1)
    xg, wg = np.polynomial.legendre.leggauss(n)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    half = 0.5 * (breaks[1:] - breaks[:-1])
    t = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return c + 1j * t, w / (2 * math.pi)


def _graded_nodes(T, panel=PANEL, n=6, h_min=0.0125):
    """Real nodes/weights on [-T, T] (weights / 2 pi), panels shrinking geometrically towards 0."""
    inner = [h_min * 2 ** j for j in range(int(math.log2(panel / h_min)) + 1)]
    outer = list(np.arange(inner[-1] + panel, T + panel, panel))
    right = np.array([0.0] + inner + outer)
    breaks = np.concatenate([-right[:0:-1], right])
    xg, wg = np.polynomial.legendre.leggauss(n)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    half = 0.5 * (breaks[1:] - breaks[:-1])
    t = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return t, w / (2 * math.pi)


def mellin_beta_identity(beta, t, gamma, T=None):
    """(1/2 pi i) int_(gamma) Gamma(u) Gamma(beta - u) t^{-u} du against Gamma(beta) (1+t)^{-beta}."""
    beta = complex(beta)
    if not (0 < gamma < beta.real) or t <= 0:
        raise DomainError("need Re beta > gamma > 0 and t > 0")
    # |Gamma(u) Gamma(beta-u)| ~ exp(-pi/2 (|y| + |y - Im beta|)); 60 units past both ends
    lo, hi = sorted((0.0, beta.imag))
    T = T or 0.5 * (hi - lo) + 60.0
    # panels no wider than half the distance to the nearest pole (u = 0 or u = beta)
    panel = min(0.25, 0.5 * min(gamma, beta.real - gamma))
    u, w = _line_nodes(gamma, T, centre=0.5 * (lo + hi), panel=panel, n=10)
    lhs = np.sum(w * np.exp(loggamma(u) + loggamma(beta - u) - u * math.log(t)))
    rhs = sf.gamma(beta) * (1 + t) ** (-beta)
    return complex(lhs), complex(rhs)


# ------------------------------------------------------------ S(x; h)

def s_single(x, h, sp, f, g, profile=None):
    """sum_{l1 m1 = l2 m2 + h} A(m1) conj(B(m2)) G(m2 / x)."""
    profile = profile or BumpProfile()
    if x < 1:
        raise DomainError("x must be >= 1")
    l1, l2 = sp.l1, sp.l2
    M2 = int(math.floor(2 * x))
    m1, m2 = shift_pairs(l1, l2, h, M2)
    keep = m2 > x
    m1, m2 = m1[keep], m2[keep]
    if len(m1) == 0:
        return 0j
    f.require(int(m1.max()))
    g.require(int(m2.max()))
    return complex(np.sum(f.A[m1] * np.conj(g.A[m2]) * profile.G(m2 / x)))


def s_single_integrand(s, u, x, h, sp, f, g, profile, M=None):
    """Integrand of the double inverse-Mellin representation at one (s, u) point.

    (l1 l2)^{(k-1)/2} Gamma(u) Gamma(beta - u) D(s; h) (l2 x)^{s+u} g~(s+u) / (Gamma(beta) h^u),
    beta = (k-1)/2 and g~ the transform pairing with G(m/x).
    """
    k = f.k
    beta = (k - 1) / 2
    M = M or int(math.floor(2 * x))
    q = DSeriesQuery(s, ShiftParams(h, sp.l1, sp.l2, sp.N0, sp.Q), 0.0, M, f, g)
    D = d_truncated(q).value
    return complex((sp.l1 * sp.l2) ** beta * sf.gamma(u) * sf.gamma(beta - u) * D
                   * (sp.l2 * x) ** (s + u) * profile.g_reflected(s + u) / (sf.gamma(beta) * h ** u))


def s_single_mellin(x, h, sp, f, g, profile=None, gamma=1.0, sigma=2.0, eps=1e-12, U=40.0):
    """S(x; h) from the double contour over Re s = sigma, Re u = gamma with D(s; h) truncated at 2x.

    With v = s + u the integrand splits over the Dirichlet terms of D:
    sum_m c_m [int Gamma(u)Gamma(beta-u)(l2 m/h)^u du] [int g~(v)(x/m)^v dv], both done by quadrature.
    """
    profile = profile or BumpProfile()
    k = f.k
    beta = (k - 1) / 2
    if not 0 < gamma < beta:
        raise DomainError("need 0 < gamma < (k-1)/2")
    l1, l2 = sp.l1, sp.l2
    M = int(math.floor(2 * x))
    m1, m2 = shift_pairs(l1, l2, h, M)
    if len(m1) == 0:
        return 0j
    f.require(int(m1.max()))
    g.require(int(m2.max()))
    lam = (l2 * m2).astype(float)
    coef = f.a[m1] * np.conj(g.a[m2]) * lam ** (-(k - 1))  # D(s) = sum coef lam^{-s}
    # u-line
    uu, wu = _line_nodes(gamma, U, panel=0.25, n=10)
    lg = loggamma(uu) + loggamma(beta - uu)
    Iu = np.exp(lg[None, :] + np.outer(np.log(lam / h), uu)) @ wu
    # v-line, truncated where the transform envelope drops below eps
    c = sigma + gamma
    T = profile.envelope_height(c, eps)
    vv, wv = _line_nodes(c, T)
    gv = profile.g_reflected(vv) * wv
    Iv = np.empty(len(lam), dtype=complex)
    for i0 in range(0, len(lam), 64):
        Iv[i0:i0 + 64] = np.exp(np.outer(np.log(l2 * x / lam[i0:i0 + 64]), vv)) @ gv
    tot = (l1 * l2) ** beta / sf.gamma(beta) * np.sum(coef * Iu * Iv)
    return complex(tot)


# ------------------------------------------------------------ S_Q(x, y)

def s_double(x, y, Q, sp, f, g, G1=None, G2=None):
    """sum_{l1 m1 = l2 m2 + h Q, h, m2 >= 1} A(m1) conj(B(m2)) G1(m1/y) G2(m2/x)."""
    G1 = G1 or BumpProfile()
    G2 = G2 or G1
    l1, l2 = sp.l1, sp.l2
    M2 = int(math.floor(2 * x))
    M1 = int(math.floor(2 * y))
    if M2 < 1 or M1 < 1:
        return 0j
    m2 = np.arange(1, M2 + 1, dtype=np.int64)
    m1 = np.arange(1, M1 + 1, dtype=np.int64)
    d = l1 * m1[None, :] - l2 * m2[:, None]
    ok = (d > 0) & (d % Q == 0)
    i2, i1 = np.nonzero(ok)
    if len(i1) == 0:
        return 0j
    a1, a2 = m1[i1], m2[i2]
    f.require(M1)
    g.require(M2)
    return complex(np.sum(f.A[a1] * np.conj(g.A[a2]) * G1.G(a1 / y) * G2.G(a2 / x)))


def s_double_mellin(x, y, Q, sp, f, g, G1=None, G2=None, eps=0.1, tol_env=1e-3, tol_s=1e-13, U_pad=30.0):
    """S_Q(x, y) from the triple inverse-Mellin transform of Z_Q on the lines
    Re s = (k+1)/2, Re w = 1 + 2 eps, Re u = (k+1)/2 + eps.

    Z_Q comes from the truncated box (m2 <= 2x, h0 Q <= 2 l1 y); every term of the box is
    pushed through the three line integrals, each done by Gauss-Legendre panels.
    """
    G1 = G1 or BumpProfile()
    G2 = G2 or G1
    k = f.k
    kk = (k - 1) / 2
    g1, g2, g3 = (k + 1) / 2, 1 + 2 * eps, (k + 1) / 2 + eps
    l1, l2 = sp.l1, sp.l2
    q = ZqQuery(0, 0, ShiftParams(1, l1, l2, sp.N0, Q), f, g,
                M2=int(math.floor(2 * x)), H=max(1, int(math.floor(2 * l1 * y / Q))))
    m1, m2, h0, c = zq_terms(q)
    if len(m1) == 0:
        return 0j
    lam = (l2 * m2).astype(float)
    hq = (h0 * Q).astype(float)
    # s-line: sum_s g2~(s) l2^s x^s (l2 m2)^{-s}; Z_Q argument s + w - u
    # (x/m2)^s amplifies truncation error by up to x^{Re s}, so this line is cut much deeper
    Ts = G2.envelope_height(g1, tol_s)
    ss, ws = _line_nodes(g1, Ts)
    gs = G2.g_reflected(ss) * ws
    ms = np.unique(m2)
    Is_m = np.exp(np.outer(np.log(x / ms), ss)) @ gs
    Is = Is_m[np.searchsorted(ms, m2)]
    # terms whose s-integral (i.e. G2(m2/x)) vanishes to working precision are dropped
    live = np.abs(Is) > 1e-6 * np.max(np.abs(Is))
    c, lam, hq, Is = c[live], lam[live], hq[live], Is[live]
    logt = np.log(hq / lam)
    Tw = G1.envelope_height(g2, tol_env)
    ww, wwt = _line_nodes(g2, Tw, n=4)
    gw = G1.g_reflected(ww) * wwt * np.exp(ww * math.log(l1 * y) - loggamma(kk + ww))
    # u = g3 + i(Im w + tau): Gamma(kk + w - u) sits 2 eps from its pole at tau = 0,
    # so the tau panels are graded geometrically towards 0
    tau, wt = _graded_nodes(Tw + U_pad)
    E = np.exp(-1j * np.outer(tau, logt))  # t^{-i tau}
    acc = np.zeros(len(lam), dtype=complex)
    for wj, gj in zip(ww, gw):
        lo, hi = min(0.0, -wj.imag) - U_pad, max(0.0, -wj.imag) + U_pad
        sl = slice(np.searchsorted(tau, lo), np.searchsorted(tau, hi))
        uu = g3 + 1j * (wj.imag + tau[sl])
        kern = wt[sl] * np.exp(loggamma(uu) + loggamma(kk + wj - uu))
        acc += gj * (kern @ E[sl]) * np.exp(-(g3 + 1j * wj.imag) * logt - wj * np.log(lam))
    # (l2 m2)^{-(s+w-u)} (h0 Q)^{-(u - kk)} = (l2 m2)^{-s-w} t^{-u} (h0 Q)^{kk}
    return complex(np.sum(c * hq ** kk * Is * acc))


# ---------------------------------------------------------- cancellation

@dataclass
class ScanRow:
    x: float
    h: int
    S: complex

    @property
    def absS(self):
        return abs(self.S)


@dataclass
class ScanReport:
    rows: list
    slope: float
    intercept: float
    spread: float
    n_used: int
    n_zero: int
    mode: str

    CSV_COLUMNS = ("x", "h", "S_re", "S_im", "absS", "logx", "logabsS")

    def csv_rows(self):
        for r in self.rows:
            a = r.absS
            yield (r.x, r.h, r.S.real, r.S.imag, a, math.log(r.x), math.log(a) if a > 0 else float("nan"))


def fit_slope(xs, vals, n_boot=200, seed=0):
    """Least-squares slope of log|val| on log x, with a bootstrap standard deviation."""
    xs = np.asarray(xs, dtype=float)
    a = np.abs(np.asarray(vals))
    keep = a > 0
    X, Y = np.log(xs[keep]), np.log(a[keep])
    if len(X) < 3:
        raise InsufficientDataError("fewer than 3 nonzero points to fit")
    slope, icpt = np.polyfit(X, Y, 1)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, len(X), len(X))
        if len(np.unique(X[idx])) < 2:
            continue
        boots.append(np.polyfit(X[idx], Y[idx], 1)[0])
    return float(slope), float(icpt), float(np.std(boots)), int(keep.sum()), int((~keep).sum())


def cancellation_scan(hs, xs, mode="single", sp=None, f=None, g=None, profile=None, Q=1, y_factor=1.0):
    """|S| against x for each h; slope pooled over all (x, h) rows."""
    xs = list(xs)
    if len(xs) < 6:
        raise InsufficientDataError("need at least 6 x values")
    ratios = np.array(xs[1:]) / np.array(xs[:-1])
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise DomainError("xs must be a geometric progression")
    sp = sp or ShiftParams()
    g = g or f
    profile = profile or BumpProfile()
    rows = []
    for h in hs:
        for x in xs:
            if mode == "single":
                S = s_single(x, h, ShiftParams(h, sp.l1, sp.l2, sp.N0, sp.Q), f, g, profile)
            elif mode == "double":
                S = s_double(x, y_factor * x, Q, sp, f, g, profile, profile)
            else:
                raise DomainError("mode must be 'single' or 'double'")
            rows.append(ScanRow(float(x), int(h), complex(S)))
    slope, icpt, spread, n_used, n_zero = fit_slope([r.x for r in rows], [r.S for r in rows])
    return ScanReport(rows, slope, icpt, spread, n_used, n_zero, mode)
