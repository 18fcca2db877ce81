"""The kernel M(s, t, delta) = int_0^inf y^(s-1/2) e^(y(1-delta)) K_it(y) dy/y.

Spectral parameter convention: z = i t is the K-Bessel order. Regimes:
  quadrature   the defining integral with the y-integration done first
  hypergeom    Gamma factors times a Gauss 2F1 at 1 - 2/delta
  barnes       the 2F1 replaced by its Mellin-Barnes integral (meromorphic
               continuation to any Re s > 1/2 - A)
  limit        the delta -> 0 limit in closed form
Also: residues in s and z, Laurent data at the double poles (z = 0), the
Y-truncated kernel and its error envelope.
"""
from dataclasses import dataclass, field
import math

import numpy as np
import scipy.special as sp

from . import specfun as sf
from .errors import ContourError, ConvergenceError, DomainError, PoleError
from .specfun import DEFAULT_QUAD, QuadratureSpec

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class ContourPath:
    """Mellin-Barnes path: up Re u = base_abscissa to the real axis, along the
    real axis to end_abscissa (semicircular detours around listed centres),
    then up Re u = end_abscissa."""
    base_abscissa: float
    detours: tuple = ()  # (centre, radius, "above" | "below")
    end_abscissa: float = None

    def __post_init__(self):
        ds = sorted(self.detours, key=lambda d: d[0])
        for c, r, o in ds:
            if r <= 0:
                raise ContourError("detour radius must be positive")
            if o not in ("above", "below"):
                raise ContourError("detour orientation must be 'above' or 'below'")
        for (c1, r1, _), (c2, r2, _) in zip(ds, ds[1:]):
            if c1 + r1 >= c2 - r2:
                raise ContourError("detour intervals overlap")
        object.__setattr__(self, "detours", tuple(ds))

    @property
    def end(self):
        return self.base_abscissa if self.end_abscissa is None else self.end_abscissa

    def polyline(self, big=1e9, nseg=64):
        """Vertices of a polygonal approximation (for side tests)."""
        b, c = self.base_abscissa, self.end
        pts = [complex(b, -big), complex(b, 0)]
        lo, hi = min(b, c), max(b, c)
        for cen, r, o in self.detours:
            if not (lo < cen - r and cen + r < hi):
                raise ContourError("detour must lie inside the horizontal segment")
        seq = self.detours if c >= b else tuple(reversed(self.detours))
        for cen, r, o in seq:
            sgn = 1 if o == "above" else -1
            th = np.linspace(0, np.pi, nseg + 1)
            if c >= b:
                th = np.pi - th
            pts += list(cen + r * np.cos(th) + 1j * sgn * r * np.sin(th))
        pts += [complex(c, 0), complex(c, big)]
        return pts

    def side(self, p, tilt=0.1):
        """'left' or 'right' of the upward path, by ray-crossing parity."""
        p = complex(p)
        d = complex(math.cos(tilt), math.sin(tilt))
        pts = self.polyline()
        count = 0
        for a, b in zip(pts, pts[1:]):
            # solve p + lam d = a + mu (b - a), lam > 0, 0 <= mu < 1
            e = b - a
            det = (-d.real) * e.imag + d.imag * e.real
            if det == 0:
                continue
            rhs = a - p
            lam = (rhs.real * (-e.imag) + e.real * rhs.imag) / -det
            mu = (d.real * rhs.imag - d.imag * rhs.real) / -det
            if lam > 0 and 0 <= mu < 1:
                count += 1
        return "left" if count % 2 else "right"

    def distance(self, p):
        pts = self.polyline(big=1e6, nseg=256)
        p = complex(p)
        best = np.inf
        for a, b in zip(pts, pts[1:]):
            e = b - a
            t = max(0.0, min(1.0, ((p - a) * np.conj(e)).real / abs(e) ** 2))
            best = min(best, abs(p - (a + t * e)))
        return best


@dataclass(frozen=True)
class KernelQuery:
    s: complex
    z: complex = 0j
    delta: float = 0.5
    continuation_depth: float = 10.5
    contour: ContourPath = None

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "z", complex(self.z))
        if not 0 <= self.delta <= 2:
            raise DomainError("delta must lie in [0, 2]")
        A = self.continuation_depth
        if A <= 1 or float(A).is_integer():
            raise DomainError("continuation depth must be a non-integer > 1")

    @property
    def t(self):
        return self.z / 1j


@dataclass
class KernelValue:
    value: complex
    regime: str
    err_estimate: float = 0.0
    info: dict = field(default_factory=dict)

    def __complex__(self):
        return complex(self.value)


def _near_nonpos_int(w, tol=1e-12):
    w = complex(w)
    return abs(w.imag) < tol and w.real < tol and abs(w.real - round(w.real)) < tol


def _check_s_poles(s, z, which="both"):
    if which in ("both", "+") and _near_nonpos_int(s - 0.5 - z):
        raise PoleError(f"M has a pole at s = 1/2 + z - {int(round(-(s - 0.5 - z).real))}")
    if which in ("both", "-") and _near_nonpos_int(s - 0.5 + z):
        raise PoleError(f"M has a pole at s = 1/2 - z - {int(round(-(s - 0.5 + z).real))}")


# ------------------------------------------------------------------ regimes

def m_hypergeom(q):
    """Gamma-factor times 2F1 form; valid off the poles s = 1/2 +- z - l."""
    s, z, d = q.s, q.z, q.delta
    if d <= 0:
        raise DomainError("hypergeometric form needs delta > 0")
    _check_s_poles(s, z)
    a = s - 0.5 + z
    F = sf.gauss_2f1_regularized(a, 0.5 + z, s, 1 - 2 / d)
    val = SQRT_PI * 2 ** z * sf.gamma(a) * sf.gamma(s - 0.5 - z) * np.exp(-a * math.log(d)) * F
    return KernelValue(complex(val), "hypergeom", 1e-14 * abs(val))


def _barnes_logf(s, z, d):
    a = s - 0.5 + z
    b = 0.5 + z
    lx = math.log(2 / d - 1)

    def logf(u):
        return sp.loggamma(a + u) + sp.loggamma(b + u) + sp.loggamma(-u) - sp.loggamma(s + u) + u * lx
    return logf, [-a, -b], [0.0]


def _path_integral(path, logf, left, right, drop=45.0, panel=0.5, nodes=20):
    """(1/2 pi i) int f(u) du along a ContourPath, checking pole sides."""
    lo = min(path.base_abscissa, path.end) - 1
    hi = max(path.base_abscissa, path.end) + 1
    for fams, want, sgn in ((left, "left", -1), (right, "right", 1)):
        for p0 in fams:
            p0 = complex(p0)
            for n in range(0, 400):
                p = p0 + sgn * n
                if (sgn < 0 and p.real < lo) or (sgn > 0 and p.real > hi):
                    break
                if path.distance(p) < 1e-6:
                    raise ContourError(f"pole {p} lies on the contour")
                if path.side(p) != want:
                    raise ContourError(f"pole {p} is on the wrong side of the contour")

    def vertical(x, sign):
        # integral of f(x + i tau) i dtau over tau in [0, sign*inf)
        t = 0.0
        peak = -np.inf
        breaks = [0.0]
        while True:
            t += panel
            breaks.append(t)
            v = float(np.real(logf(np.array([x + 1j * sign * t]))[0]))
            peak = max(peak, v if np.isfinite(v) else -np.inf)
            if t > 3 and v < peak - drop:
                break
            if t > 1e4:
                raise ConvergenceError("integrand does not decay along the contour")
        ts, ws = sf.gl_panels(breaks, nodes)
        lv = logf(x + 1j * sign * ts)
        m = np.max(lv.real)
        return complex(np.sum(np.exp(lv - m) * ws) * np.exp(m) * 1j * sign)

    b, c = path.base_abscissa, path.end
    total = -vertical(b, -1)  # from -i inf up to b
    # horizontal part from b to c with detours
    direction = 1 if c >= b else -1
    seq = path.detours if direction > 0 else tuple(reversed(path.detours))
    cur = b
    pieces = []
    for cen, r, o in seq:
        pieces.append(("line", cur, cen - direction * r))
        pieces.append(("arc", cen, r, o))
        cur = cen + direction * r
    pieces.append(("line", cur, c))
    for pc in pieces:
        if pc[0] == "line":
            x0, x1 = pc[1], pc[2]
            if x0 == x1:
                continue
            n = max(1, int(math.ceil(abs(x1 - x0) / 0.25)))
            xs, ws = sf.gl_panels(np.linspace(x0, x1, n + 1), nodes)
            lv = logf(xs + 0j)
            m = np.max(lv.real)
            total += complex(np.sum(np.exp(lv - m) * ws) * np.exp(m))
        else:
            cen, r, o = pc[1], pc[2], pc[3]
            sgn = 1 if o == "above" else -1
            th0, th1 = (math.pi, 0.0) if direction > 0 else (0.0, math.pi)
            th, wt = sf.gl_panels(np.linspace(th0, th1, 5), nodes)
            u = cen + r * np.exp(1j * sgn * th)
            du = 1j * sgn * r * np.exp(1j * sgn * th)
            lv = logf(u)
            m = np.max(lv.real)
            total += complex(np.sum(np.exp(lv - m) * du * wt) * np.exp(m))
    total += vertical(c, 1)
    return total / (2j * math.pi)


def default_abscissa(s, z):
    a = s - 0.5 + z
    return sf.choose_abscissa([-a, -0.5 - z], [0.0], -0.5 - z.real + 0.02, -0.02)


def m_barnes(q):
    """Mellin-Barnes form; meromorphic in s on Re s > 1/2 - A."""
    s, z, d = q.s, q.z, q.delta
    if not 0 < d <= 2:
        raise DomainError("Mellin-Barnes form needs 0 < delta <= 2")
    if abs(z.real) >= 0.25:
        raise DomainError("Mellin-Barnes continuation needs |Re z| < 1/4")
    if s.real <= 0.5 - q.continuation_depth:
        raise DomainError("s lies beyond the continuation depth")
    _check_s_poles(s, z, "+")
    pre = SQRT_PI * 2 ** z * sf.gamma(s - 0.5 - z) * np.exp(-(s - 0.5 + z) * math.log(d)) * sf.rgamma(0.5 + z)
    a = s - 0.5 + z
    if d == 2:
        # (2/delta - 1)^u vanishes: only the u = 0 residue survives
        if _near_nonpos_int(a):
            raise PoleError("M has a pole here")
        val = pre * sf.gamma(a) * sf.gamma(0.5 + z) * sf.rgamma(s)
        return KernelValue(complex(val), "barnes", 1e-14 * abs(val))
    logf, left, right = _barnes_logf(s, z, d)
    if q.contour is not None:
        I = _path_integral(q.contour, logf, left, right)
        err = 1e-13 * abs(I)
        info = {"contour": "path"}
    else:
        b = default_abscissa(s, z)
        I, info = sf.barnes_integral(logf, left, right, b, return_info=True)
        err = info["err"]
        info = {"contour": "line+residues", "b": b, "T": info["T"]}
    val = pre * I
    return KernelValue(complex(val), "barnes", float(abs(pre) * err), info)


def _gegenbauer(lam, x, n):
    C = np.zeros(n, dtype=complex)
    C[0] = 1
    if n > 1:
        C[1] = 2 * lam * x
    for k in range(2, n):
        C[k] = (2 * x * (k + lam - 1) * C[k - 1] - (k + 2 * lam - 2) * C[k - 2]) / k
    return C


def _quad_v(s, z, d, breaks):
    v, w = sf.gl_panels(breaks, 20)
    g = np.cosh(z * v) * np.exp((0.5 - s) * np.log(np.cosh(v) - 1 + d))
    return complex(np.sum(g * w))


def m_quadrature(q, spec=DEFAULT_QUAD):
    """Defining integral, integrating over y first:
    M = Gamma(s - 1/2) int_0^inf cosh(z v) (cosh v - 1 + delta)^(1/2 - s) dv."""
    s, z, d = q.s, q.z, q.delta
    if s.real <= 0.5 + abs(z.real):
        raise DomainError("defining integral diverges: need Re s > 1/2 + |Im t|")
    if d == 0 and s.real >= 1:
        raise DomainError("at delta = 0 the integral needs Re s < 1")
    V = 8.0
    r = min(math.sqrt(d), 1.0) if d > 0 else 1.0
    breaks = [0.0]
    head = 0.0
    if d == 0:
        # v^(1 - 2s) singularity at 0: geometric panels plus analytic head
        eps = r * 2.0 ** -40
        head = 2 ** (s - 0.5) * eps ** (2 - 2 * s) / (2 - 2 * s)
        breaks = [eps * 2.0 ** k for k in range(41)]
    else:
        breaks.append(r)
    x = breaks[-1]
    while x < V:
        x = min(V, x + min(x, 1.0))
        breaks.append(x)
    fine_b = np.sort(np.concatenate([breaks, 0.5 * (np.array(breaks[1:]) + np.array(breaks[:-1]))]))
    coarse = _quad_v(s, z, d, breaks)
    fine = _quad_v(s, z, d, fine_b)
    # analytic tail on [V, inf) from the Gegenbauer generating function
    lam = s - 0.5
    C = _gegenbauer(lam, 1 - d, 14)
    n = np.arange(14)
    ap = lam + n - z
    am = lam + n + z
    tail = 2 ** lam * 0.5 * np.sum(C * (np.exp(-ap * V) / ap + np.exp(-am * V) / am))
    g = sf.gamma(s - 0.5)
    val = g * (fine + tail + head)
    err = abs(g) * (abs(fine - coarse) + 1e-15 * abs(fine))
    if not np.isfinite(val) or err > max(spec.abs_tol, spec.rel_tol * abs(val)) * 100:
        raise ConvergenceError(f"kernel quadrature error estimate {err:.3g} too large")
    return KernelValue(complex(val), "quadrature", float(err))


def m_limit(s, z):
    """delta -> 0 limit, valid for Re s <= 1/2 + |Im t| (off poles)."""
    s, z = complex(s), complex(z)
    _check_s_poles(s, z)
    if abs(s.imag) < 1e-12 and s.real >= 1 - 1e-12 and abs(s.real - round(s.real)) < 1e-12:
        raise PoleError("Gamma(1 - s) has a pole")
    return complex(SQRT_PI * 2 ** (0.5 - s) * sf.gamma(s - 0.5 - z) * sf.gamma(s - 0.5 + z)
                   * sf.gamma(1 - s) * sf.rgamma(0.5 - z) * sf.rgamma(0.5 + z))


# ----------------------------------------------------------- Y-truncation

def m_truncated(q, Y, h, spec=DEFAULT_QUAD):
    """int over y in [2 pi h / Y, 2 pi h Y] of y^(s-3/2) e^(y(1-delta)) K_z(y)."""
    s, z, d = q.s, q.z, q.delta
    if Y <= 1 or h < 1:
        raise DomainError("need Y > 1 and h >= 1")

    def run(width):
        lo, hi = math.log(2 * math.pi * h / Y), math.log(2 * math.pi * h * Y)
        # cap the upper end where e^(-delta y) has killed the integrand
        if d > 0:
            hi = min(hi, math.log(max(2 * math.pi * h / Y * 1.0001, (60 + 5 * abs(s)) / d)))
        n = max(2, int(math.ceil((hi - lo) / width)))
        x, w = sf.gl_panels(np.linspace(lo, hi, n + 1), 20)
        y = np.exp(x)
        K = sf.bessel_k(z, y, spec)
        return complex(np.sum(np.exp((s - 0.5) * x + y * (1 - d)) * K * w))

    fine = run(0.125)
    coarse = run(0.25)
    return KernelValue(fine, "quadrature", abs(fine - coarse) + 1e-15 * abs(fine))


def truncation_bound(q, Y, h, A, C=1.0, scale=2 * math.pi):
    """Envelope for |M - M_Y| with H = scale * h (the window is [2 pi h/Y, 2 pi h Y]):
    C [e^(-2 pi Y h delta) (Y H)^(Re s + A - 2) / (delta (1+|t|)^A)
       + (H/Y)^(Re s - 1/2 - |Im t|) / (1+|t|)^A].
    scale = 1 gives the envelope with the 2 pi absorbed into C."""
    s, t, d = q.s, q.t, q.delta
    H = scale * h
    at = 1 + abs(t)
    first = math.exp(-2 * math.pi * Y * h * d) * (Y * H) ** (s.real + A - 2) / (d * at ** A)
    second = (H / Y) ** (s.real - 0.5 - abs(t.imag)) / at ** A
    return C * (first + second)


# ---------------------------------------------------------------- residues

def residue_s_leading(z, l, sign):
    """delta -> 0 leading residue at s = 1/2 +- z - l."""
    z = complex(z)
    e = 1 if sign == "+" else -1
    return complex((-1) ** l * SQRT_PI * 2 ** (l - e * z) * sf.gamma(0.5 - e * z + l)
                   * sf.gamma(e * 2 * z - l) / (math.factorial(l) * sf.gamma(0.5 + z) * sf.gamma(0.5 - z)))


def residue_s(z, l, delta, sign):
    """Full delta-dependent residue of M(s, z/i, delta) at s = 1/2 +- z - l."""
    z = complex(z)
    if abs(z) < 1e-12:
        raise DomainError("z = 0 gives double poles; use laurent_c")
    if abs(z.real) >= 0.25:
        raise DomainError("need |Re z| < 1/4")
    if not 0 < delta <= 2:
        raise DomainError("need 0 < delta <= 2")
    m = int(l)
    if sign == "-":
        # finite sum (pole from the pinch of the Mellin-Barnes contour)
        x = 2 / delta - 1
        acc = 0j
        for j in range(m + 1):
            acc += (sf.gamma(0.5 + m + z - j) * x ** (-j)
                    / (math.factorial(j) * math.factorial(m - j)) * sf.rgamma(0.5 - z - j))
        return complex(SQRT_PI * 2 ** z * (-1) ** m * (2 - delta) ** m * sf.gamma(-m - 2 * z)
                       * sf.rgamma(0.5 + z) * acc)
    if sign != "+":
        raise DomainError("sign must be '+' or '-'")
    # Gamma(s - 1/2 - z) pole: Mellin-Barnes integral evaluated at s = 1/2 + z - m
    s0 = 0.5 + z - m
    pre = SQRT_PI * 2 ** z * (-1) ** m / math.factorial(m) * sf.rgamma(0.5 + z)
    if delta == 2:
        return complex(pre * sf.gamma(2 * z - m) * sf.gamma(0.5 + z) * sf.rgamma(s0)
                       * 2.0 ** (m - 2 * z))
    logf, left, right = _barnes_logf(s0, z, delta)
    b = sf.choose_abscissa(left, right, -0.5 - z.real + 0.02, -0.02)
    I = sf.barnes_integral(logf, left, right, b)
    return complex(pre * np.exp((m - 2 * z) * math.log(delta)) * I)


def residue_series(z, n, delta, sign):
    """Residue at s = 1/2 +- z - n from the small-y expansion of K_z (oracle)."""
    z = complex(z)
    e = 1 if sign == "+" else -1
    # K_z(y) = sum_i a_i y^(2i - z) + b_i y^(2i + z); '+' poles come from the a_i
    zz = e * z
    tot = 0j
    for i in range(n // 2 + 1):
        j = n - 2 * i
        poch = np.prod([1 - zz + k for k in range(i)]) if i else 1.0
        coef = 0.5 * sf.gamma(zz) * 2 ** (zz - 2 * i) / (math.factorial(i) * poch)
        tot += coef * (1 - delta) ** j / math.factorial(j)
    return complex(tot)


def laurent_c(l):
    """(c2, c1): double-pole Laurent data of M(s, 0, delta -> 0) at s = 1/2 - l."""
    l = int(l)
    if l < 0:
        raise DomainError("l must be nonnegative")
    c2 = math.factorial(2 * l) / (2 ** l * math.factorial(l) ** 3)
    c1 = c2 * (-2 * sf.EULER_GAMMA + 2 * float(sf.harmonic(l)) - float(sp.psi(0.5 + l)) - sf.LN2)
    return c2, c1


def laurent_series(l, delta):
    """Exact delta-dependent (c2, c1) at s = 1/2 - l from the K_0 expansion."""
    a2 = 0.0
    a1 = 0.0
    base = sf.LN2 - sf.EULER_GAMMA
    for i in range(l // 2 + 1):
        j = l - 2 * i
        w = (1 - delta) ** j / (math.factorial(j) * 4 ** i * math.factorial(i) ** 2)
        a2 += w
        a1 += (base + float(sf.harmonic(i))) * w
    return a2, a1


def residue_z_leading(s, m, which):
    s = complex(s)
    X = ((-1) ** m * SQRT_PI * 2 ** (0.5 - s) * sf.gamma(1 - s) * sf.gamma(2 * s + m - 1)
         / (math.factorial(m) * sf.gamma(s + m) * sf.gamma(1 - s - m)))
    return complex(X if which == "R1" else -X)


def residue_z(s, m, delta, which, window=0.25):
    """Residue of M(s, z/i, delta) in z at z = 1/2 - s - m (R1) or z = s + m - 1/2 (R2)."""
    s = complex(s)
    w = s.real - 0.5 + m
    if not 0 < abs(w) < window:
        raise DomainError("residue_z needs 0 < |Re s - 1/2 + m| < 1/4")
    if not 0 < delta <= 2:
        raise DomainError("need 0 < delta <= 2")
    if which == "R1":
        x = 2 / delta - 1
        acc = 0j
        for l in range(m + 1):
            acc += (sf.gamma(1 - s - l) * x ** (-l)
                    / (math.factorial(l) * math.factorial(m - l)) * sf.rgamma(s + m - l))
        return complex(SQRT_PI * 2 ** (0.5 - s - m) * (-1) ** m * (2 - delta) ** m
                       * sf.gamma(2 * s + m - 1) * sf.rgamma(1 - s - m) * acc)
    if which != "R2":
        raise DomainError("which must be 'R1' or 'R2'")
    z0 = s + m - 0.5
    logf, left, right = _barnes_logf(s, z0, delta)
    b = sf.choose_abscissa(left, right, min(-0.5 - z0.real, -0.3), -0.02)
    I = sf.barnes_integral(logf, left, right, b)
    pre = -SQRT_PI * 2 ** z0 * (-1) ** m / math.factorial(m) * sf.rgamma(s + m)
    return complex(pre * np.exp((1 - m - 2 * s) * math.log(delta)) * I)


def residue_z_series(s, m, delta, which):
    """Exact z-residues from the small-y expansion (oracle)."""
    s = complex(s)
    if which == "R1":
        z0 = 0.5 - s - m
        return residue_series(z0, m, delta, "-")
    z0 = s + m - 0.5
    return -residue_series(z0, m, delta, "+")


def circle_integral(fn, centre, radius, npts=64):
    """(1/2 pi i) closed-circle integral of fn by the trapezoid rule."""
    th = 2 * np.pi * (np.arange(npts) + 0.5) / npts
    e = np.exp(1j * th)
    vals = np.array([fn(centre + radius * ei) for ei in e])
    return complex(np.mean(vals * e) * radius)


def laurent_fit(fn, centre, radius, npts=64):
    """(coefficient of (s-c)^-2, coefficient of (s-c)^-1) by circle quadrature."""
    th = 2 * np.pi * (np.arange(npts) + 0.5) / npts
    e = np.exp(1j * th)
    vals = np.array([fn(centre + radius * ei) for ei in e])
    c1 = complex(np.mean(vals * e) * radius)
    c2 = complex(np.mean(vals * e ** 2) * radius ** 2)
    return c2, c1
