"""Truncated Poincare series on Gamma_0(N), their Fourier coefficients, the
automorphic product V, Petersson inner products over a fundamental domain,
and the unfolded (Dirichlet series) form of <P, V>.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate

from . import specfun as sf
from .errors import DomainError, MeshError, TruncationError
from .forms import is_squarefree, kloosterman, prime_divisors
from .specfun import DEFAULT_QUAD


@dataclass(frozen=True)
class ShiftParams:
    h: int = 1
    l1: int = 1
    l2: int = 1
    N0: int = 1
    Q: int = 1

    def __post_init__(self):
        for name in ("h", "l1", "l2", "N0", "Q"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be a positive integer")
        for name in ("l1", "l2", "N0"):
            if not is_squarefree(getattr(self, name)):
                raise DomainError(f"{name} must be square-free")
        if math.gcd(math.gcd(self.N0, self.l1), self.l2) != 1:
            raise DomainError("need (N0, l1, l2) = 1")
        if self.Q > 1 and math.gcd(self.l1 * self.l2, self.Q) != 1:
            raise DomainError("need (l1 l2, Q) = 1")

    @property
    def N(self):
        return self.N0 * self.l1 * self.l2 // math.gcd(self.l1, self.l2)


@dataclass(frozen=True)
class TruncationWindow:
    Y: float = 10.0
    delta: float = 0.5

    def __post_init__(self):
        if not self.Y > 1:
            raise DomainError("Y must exceed 1")
        if not 0 < self.delta <= 1:
            raise DomainError("delta must lie in (0, 1]")


def volume(N):
    """Hyperbolic area of Gamma_0(N) \\ H."""
    v = math.pi / 3 * N
    for p in prime_divisors(N):
        v *= 1 + 1 / p
    return v


# ------------------------------------------------------------- Poincare series

def coset_reps(N, z, Y):
    """Coprime (c, d), c = 0 mod N, c >= 0, with Im(gamma z) in [1/Y, Y]."""
    z = complex(z)
    x, y = z.real, z.imag
    if y <= 0:
        raise DomainError("z must lie in the upper half plane")
    if Y < 1:
        raise DomainError("Y must be >= 1")
    out = []
    if 1 / Y <= y <= Y:
        out.append((0, 1))
    cmax = int(math.floor(math.sqrt(Y / y))) + 1
    for c in range(N, cmax + 1, N):
        rad2 = y * Y - c * c * y * y
        if rad2 < 0:
            continue
        R = math.sqrt(rad2)
        for d in range(int(math.floor(-c * x - R)) - 1, int(math.ceil(-c * x + R)) + 2):
            if math.gcd(c, d) != 1:
                continue
            im = y / ((c * x + d) ** 2 + (c * y) ** 2)
            if 1 / Y <= im <= Y:
                out.append((c, d))
    out.sort(key=lambda cd: (abs(cd[0]), abs(cd[1]), cd[1]))
    return out


def _re_im(c, d, z):
    # Re and Im of gamma z modulo 1 in the real part
    if c == 0:
        return z.real, z.imag
    q = (c * z.real + d) ** 2 + (c * z.imag) ** 2
    a = pow(d % c, -1, c) if c > 1 else 0
    return a / c - (c * z.real + d) / (c * q), z.imag / q


def poincare_value(z, s, sp, w):
    """P_{h,Y}(z, s; delta): finite sum over cosets in the window."""
    z = complex(z)
    s = complex(s)
    total = 0j
    for c, d in coset_reps(sp.N, z, w.Y):
        re, im = _re_im(c, d, z)
        total += im ** s * np.exp(-2j * np.pi * sp.h * re + 2 * np.pi * sp.h * im * (1 - w.delta))
    return complex(total)


def poincare_array(zs, s, sp, w, pairs=None):
    """Vectorised P over an array of points (same coset superset for all)."""
    zs = np.asarray(zs, dtype=complex)
    if pairs is None:
        ymin = float(np.min(zs.imag))
        xmax = float(np.max(np.abs(zs.real)))
        pairs = [(0, 1)]
        cmax = int(math.floor(math.sqrt(w.Y / ymin))) + 1
        for c in range(sp.N, cmax + 1, sp.N):
            R = math.sqrt(w.Y * float(np.max(zs.imag)))
            dlim = int(math.ceil(c * xmax + R)) + 2
            for d in range(-dlim, dlim + 1):
                if math.gcd(c, d) == 1:
                    pairs.append((c, d))
    s = complex(s)
    total = np.zeros(zs.shape, dtype=complex)
    x, y = zs.real, zs.imag
    for c, d in pairs:
        if c == 0:
            re, im = x, y
        else:
            q = (c * x + d) ** 2 + (c * y) ** 2
            a = pow(d % c, -1, c) if c > 1 else 0
            re, im = a / c - (c * x + d) / (c * q), y / q
        win = (im >= 1 / w.Y) & (im <= w.Y)
        if not np.any(win):
            continue
        val = np.exp(s * np.log(im) - 2j * np.pi * sp.h * re + 2 * np.pi * sp.h * im * (1 - w.delta))
        total += np.where(win, val, 0)
    return total


def poincare_fourier(m, y, s, sp, w, q=DEFAULT_QUAD):
    """m-th Fourier coefficient of P_{h,Y}(x + iy, s; delta) in x."""
    s = complex(s)
    h, N, Y, dl = sp.h, sp.N, w.Y, w.delta
    out = 0j
    if m == -h and 1 / Y <= y <= Y:
        out += y ** s * math.exp(2 * math.pi * h * y * (1 - dl))
    c = N
    while c * c * y <= Y:
        U1 = math.sqrt(Y / (c * c * y) - 1)
        U0 = math.sqrt(max(0.0, 1 / (Y * c * c * y) - 1))
        if U1 > U0:
            freq = abs(m) * y + h / (c * c * y) + 1
            npan = max(2, int(math.ceil((U1 - U0) * freq * 2)))
            u, wt = sf.gl_panels(np.linspace(U0, U1, npan + 1), 20)
            u = np.concatenate([u, -u])
            wt = np.concatenate([wt, wt])
            den = c * c * y * (u * u + 1)
            f = np.exp(-s * np.log1p(u * u) + (2j * np.pi * h * u + 2 * np.pi * h * (1 - dl)) / den
                       - 2j * np.pi * m * u * y)
            S = kloosterman(m, -h, c)
            out += S * c ** (-2 * s) * y ** (1 - s) * complex(np.sum(f * wt))
        c += N
    return complex(out)


def poincare_fourier_quadrature(m, y, s, sp, w, nodes=30):
    """x-quadrature of P e^{-2 pi i m x} over [0, 1] with window breakpoints (oracle)."""
    Y = w.Y
    br = {0.0, 1.0}
    c = sp.N
    while c * c * y <= Y:
        for lim in (y * Y, y / Y):
            r2 = lim - c * c * y * y
            if r2 > 0:
                R = math.sqrt(r2)
                for d in range(-c - 2 * int(R) - 3, 2 * c + 2 * int(R) + 4):
                    for xb in ((-d - R) / c, (-d + R) / c):
                        if 0 < xb < 1:
                            br.add(xb)
        c += sp.N
    br = sorted(br)
    fine = []
    for a, b in zip(br, br[1:]):
        n = max(1, int(math.ceil((b - a) * 40)))
        fine += list(np.linspace(a, b, n + 1)[:-1])
    fine.append(1.0)
    x, wt = sf.gl_panels(fine, nodes)
    P = poincare_array(x + 1j * y, s, sp, w)
    return complex(np.sum(P * np.exp(-2j * np.pi * m * x) * wt))


# -------------------------------------------------------------- the product V

def _qseries(table, ell, z, M):
    z = np.asarray(z, dtype=complex)
    m = np.arange(1, M + 1)
    ph = np.exp(2j * np.pi * ell * np.multiply.outer(z, m))
    return ph @ table.a[1:M + 1]


def v_product(z, f, g, l1=1, l2=1, M=None, rel_tol=1e-10):
    """V(z) = y^k conj(f(l1 z)) g(l2 z), q-expansions cut at M terms."""
    if f.k != g.k:
        raise DomainError("f and g must have the same weight")
    z = np.asarray(z, dtype=complex)
    k = f.k
    ymin = float(np.min(z.imag))
    if M is None:
        M = int(min(f.M, g.M, max(20, math.ceil(45 / (2 * math.pi * min(l1, l2) * ymin)) + 10)))
    f.require(M)
    g.require(M)
    F = _qseries(f, l1, z, M)
    G = _qseries(g, l2, z, M)
    val = z.imag ** k * np.conj(F) * G
    # tail envelope |a(m)| <= m^((k+1)/2), measured against the leading q-power
    ell = min(l1, l2)
    mm = M + 1
    r = math.exp(-2 * math.pi * ell * ymin)
    rel = mm ** ((k + 1) / 2) * r ** M / max(1e-300, 1 - r * ((mm + 1) / mm) ** ((k + 1) / 2))
    if rel > rel_tol:
        raise TruncationError(f"q-expansion tail {rel:.3g} exceeds tolerance at M = {M}")
    return complex(val) if val.ndim == 0 else val


# ---------------------------------------------------------- Petersson product

@dataclass(frozen=True)
class FDMesh:
    """Mesh for the standard fundamental domain in (x, w = 1/y)."""
    y_max: float = 12.0
    nodes: int = 20
    x_breaks: tuple = ()
    w_breaks: object = None  # callable x -> iterable of extra w breakpoints
    panel: float = 0.05


def _sl2_reps(N):
    """Right coset representatives of Gamma_0(N) in SL2(Z), one per point of P^1(Z/N)."""
    units = [u for u in range(1, N + 1) if math.gcd(u, N) == 1]
    reps, seen = [], set()
    for c in range(N):
        for d in range(N):
            if math.gcd(math.gcd(c, d), N) != 1:
                continue
            key = min(((u * c) % N, (u * d) % N) for u in units)
            if key in seen:
                continue
            seen.add(key)
            cc, dd = (c if c else N), d
            while math.gcd(cc, dd) != 1:
                dd += N
            a, b = _bezout(cc, dd)
            reps.append((a, b, cc, dd))
    return reps


def _bezout(c, d):
    """(a, b) with a d - b c = 1 for coprime c, d."""
    old_r, r, old_s, s_, old_t, t = d, c, 1, 0, 0, 1
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s_ = s_, old_s - qt * s_
        old_t, t = t, old_t - qt * t
    # old_s d + old_t c = old_r = +-1
    return old_s * old_r, -old_t * old_r


def petersson_inner_fd(F, G, N=1, mesh=None):
    """<F, G> = (1/V) int_{Gamma_0(N)\\H} F conj(G) dx dy / y^2.

    F, G take complex arrays. Level N is handled by summing over the coset
    translates of the standard level-1 domain.
    """
    mesh = mesh or FDMesh()
    vol = volume(N)
    reps = [(1, 0, 0, 1)] if N == 1 else _sl2_reps(N)

    def integrand(zs):
        tot = np.zeros(zs.shape, dtype=complex)
        for a, b, c, d in reps:
            gz = (a * zs + b) / (c * zs + d)
            tot += F(gz) * np.conj(G(gz))
        return tot

    def run(nodes):
        xb = sorted({-0.5, 0.5} | {x for x in mesh.x_breaks if -0.5 < x < 0.5})
        xs = []
        for a, b in zip(xb, xb[1:]):
            n = max(1, int(math.ceil((b - a) / 0.1)))
            xs += list(np.linspace(a, b, n + 1)[:-1])
        xs.append(0.5)
        X, WX = sf.gl_panels(xs, nodes)
        wlo = 0.0 if math.isinf(mesh.y_max) else 1 / mesh.y_max
        pts, wts = [], []
        for x, wx in zip(X, WX):
            whi = 1 / math.sqrt(1 - x * x)
            wb = {wlo, whi}
            if mesh.w_breaks is not None:
                wb |= {v for v in mesh.w_breaks(x) if wlo < v < whi}
            wb = sorted(wb)
            fine = []
            for a, b in zip(wb, wb[1:]):
                n = max(1, int(math.ceil((b - a) / mesh.panel)))
                fine += list(np.linspace(a, b, n + 1)[:-1])
            fine.append(whi)
            W, WW = sf.gl_panels(fine, nodes)
            pts.append(x + 1j / W)
            wts.append(wx * WW)
        pts = np.concatenate(pts)
        wts = np.concatenate(wts)
        return complex(np.sum(integrand(pts) * wts)) / vol

    fine = run(mesh.nodes)
    coarse = run(max(4, mesh.nodes // 2))
    err = abs(fine - coarse)
    if err > 1e-3 * abs(fine) and err > 1e-14:
        raise MeshError(f"fundamental-domain quadrature unresolved (estimate {err:.3g})")
    return fine


def poincare_fd_mesh(sp, w, y_max=12.0, nodes=20):
    """Mesh whose breakpoints follow the window discontinuities of P at level 1."""
    Y = w.Y
    xb = set()
    curves = []
    c = 1
    while c * c * math.sqrt(3) / 2 <= Y:
        for d in range(-c - 1, c + 2):
            if math.gcd(c, d) != 1:
                continue
            x0 = -d / c
            r = Y / (2 * c * c)
            for xe in (x0 - r, x0 + r):
                if -0.5 < xe < 0.5:
                    xb.add(xe)
                    # grade the panels toward the square-root endpoint
                    for k in range(1, 12):
                        for sg in (-1, 1):
                            xx = xe + sg * 0.2 * 2.0 ** -k
                            if -0.5 < xx < 0.5:
                                xb.add(xx)
            curves.append((c, d))
        c += 1

    def wbreaks(x):
        out = [1 / Y] if Y < y_max else []
        for c, d in curves:
            disc = Y * Y - 4 * c ** 4 * (x + d / c) ** 2
            if disc > 0:
                for sg in (-1, 1):
                    yy = (Y + sg * math.sqrt(disc)) / (2 * c * c)
                    if yy > 0:
                        out.append(1 / yy)
        return out

    return FDMesh(y_max=y_max, nodes=nodes, x_breaks=tuple(sorted(xb)), w_breaks=wbreaks)


# ---------------------------------------------------------- unfolded version

@dataclass
class TruncatedValue:
    value: complex
    tail_bound: float
    params: dict

    def __complex__(self):
        return complex(self.value)


def shift_pairs(l1, l2, h, M2):
    """All (m1, m2) with l1 m1 = l2 m2 + h and 1 <= m2 <= M2."""
    m2 = np.arange(1, M2 + 1, dtype=np.int64)
    num = l2 * m2 + h
    ok = num % l1 == 0
    return num[ok] // l1, m2[ok]


def unfolded_inner(s, sp, w, f, g, M):
    """<P_{h,Y}(., s; delta), V> as a Dirichlet series with incomplete Gamma weights."""
    s = complex(s)
    if s.real <= 1:
        raise DomainError("the unfolded series needs Re s > 1")
    k = f.k
    S = s + k - 1
    l1, l2, h = sp.l1, sp.l2, sp.h
    Y, dl = w.Y, w.delta
    m1, m2 = shift_pairs(l1, l2, h, M)
    if len(m1):
        f.require(int(m1.max()))
        g.require(int(m2.max()))
    vol = volume(sp.N)
    total = 0j
    for a1, a2 in zip(m1, m2):
        L = 4 * math.pi * l2 * a2
        eps = h * dl / (2 * l2 * a2)
        # int_{L/Y}^{LY} e^{-y(1+eps)} y^{S-1} dy = (1+eps)^{-S} * interval integral
        J = (1 + eps) ** (-S) * sf.incomplete_gamma_interval(S, L * (1 + eps) / Y, L * Y * (1 + eps))
        if J == 0:
            continue
        total += f.a[a1] * np.conj(g.a[a2]) * (l2 * a2) ** (-S) * J
    val = total * (4 * math.pi) ** (-S) / vol
    # heuristic tail: divisor envelope, y-integral bounded by Gamma(Re S)
    sig = S.real
    kk = (k - 1) / 2

    def env(x):
        x1 = (l2 * x + h) / l1
        return ((1 + math.log(x)) * (1 + math.log(x1)) * (x * x1) ** kk * (l2 * x) ** (-sig)
                * math.exp(-4 * math.pi * l2 * x * (1 + h * dl / (2 * l2 * x)) / Y) / l1)

    tail = integrate.quad(env, M, np.inf, limit=200)[0] * math.gamma(sig) * (4 * math.pi) ** (-sig) / vol
    return TruncatedValue(complex(val), float(tail), {"M": M, "Y": Y, "delta": dl, "pairs": int(len(m1))})
