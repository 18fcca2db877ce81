"""Complex special functions used throughout the package.

Gamma, log-Gamma and digamma wrap scipy.special. The K-Bessel function,
incomplete Gamma, Gauss hypergeometric function, Riemann zeta and a generic
Mellin-Barnes line integrator are implemented here. Two independent Gamma
implementations (Lanczos and Spouge) are kept for cross-checking.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np
import scipy.special as sp

from .errors import (BranchError, ContourError, ConvergenceError, DomainError,
                     PoleError)

EULER_GAMMA = 0.57721566490153286061
LN2 = math.log(2.0)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 64
    # integrand decay (in units of log) below its peak at which a range is cut
    cutoff_log_drop: float = 40.0

    def __post_init__(self):
        if not (0 < self.abs_tol < 1 and 0 < self.rel_tol < 1):
            raise DomainError("tolerances must lie in (0, 1)")
        if self.max_subdivisions < 8:
            raise DomainError("max_subdivisions must be >= 8")


DEFAULT_QUAD = QuadratureSpec()


def _check_finite(v):
    if not np.all(np.isfinite(v)):
        raise ConvergenceError("non-finite value produced")
    return v


def _is_nonpos_int(s, tol=0.0):
    s = complex(s)
    return abs(s.imag) <= tol and s.real <= tol and abs(s.real - round(s.real)) <= tol


# ---------------------------------------------------------------- Gamma family

def gamma(s):
    """Gamma(s) for complex s; PoleError at 0, -1, -2, ..."""
    s = complex(s)
    if _is_nonpos_int(s):
        raise PoleError(f"Gamma has a pole at {s}")
    return complex(_check_finite(sp.gamma(s)))


def loggamma(s):
    """Principal branch of log Gamma(s)."""
    s = complex(s)
    if _is_nonpos_int(s):
        raise PoleError(f"log Gamma has a pole at {s}")
    return complex(sp.loggamma(s))


def rgamma(s):
    """1/Gamma(s); entire, so zero at the nonpositive integers."""
    return complex(sp.rgamma(complex(s)))


def digamma(s):
    s = complex(s)
    if _is_nonpos_int(s):
        raise PoleError(f"digamma has a pole at {s}")
    return complex(sp.psi(s))


# Lanczos (g=7, n=9) coefficients
_LANCZOS = (0.99999999999980993, 676.5203681218851, -1259.1392167224028,
            771.32342877765313, -176.61502916214059, 12.507343278686905,
            -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7)


def gamma_lanczos(s):
    """Independent Gamma via the Lanczos approximation plus reflection."""
    s = complex(s)
    if _is_nonpos_int(s):
        raise PoleError(f"Gamma has a pole at {s}")
    if s.real < 0.5:
        return math.pi / (np.sin(math.pi * s) * gamma_lanczos(1 - s))
    s -= 1
    x = _LANCZOS[0]
    for i in range(1, 9):
        x += _LANCZOS[i] / (s + i)
    t = s + 7.5
    return complex(math.sqrt(2 * math.pi) * t ** (s + 0.5) * np.exp(-t) * x)


def gamma_spouge(s, a=12):
    """Independent Gamma via Spouge's formula plus reflection."""
    s = complex(s)
    if _is_nonpos_int(s):
        raise PoleError(f"Gamma has a pole at {s}")
    if s.real < 0.5:
        return math.pi / (np.sin(math.pi * s) * gamma_spouge(1 - s, a))
    z = s - 1
    acc = math.sqrt(2 * math.pi)
    fact = 1.0
    for k in range(1, a):
        ck = (-1) ** (k - 1) / fact * (a - k) ** (k - 0.5) * math.exp(a - k)
        acc += ck / (z + k)
        fact *= k
    return complex((z + a) ** (z + 0.5) * np.exp(-(z + a)) * acc)


def harmonic(n):
    """H_n as an exact Fraction."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return sum((Fraction(1, j) for j in range(1, n + 1)), Fraction(0))


def stirling_envelope(s):
    """|Im s|^(Re s - 1/2) exp(-pi |Im s| / 2)."""
    s = complex(s)
    y = abs(s.imag)
    if y < 1:
        raise DomainError("stirling_envelope needs |Im s| >= 1")
    return y ** (s.real - 0.5) * math.exp(-0.5 * math.pi * y)


# ---------------------------------------------------------- incomplete Gamma

def _lower_gamma_series(s, x):
    # gamma(s, x) = x^s e^-x sum x^n / (s)_{n+1}
    if x == 0:
        return 0j
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(100000):
        ap += 1
        term *= x / ap
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    else:
        raise ConvergenceError("incomplete gamma series did not converge")
    return total * np.exp(s * math.log(x) - x)


def _upper_gamma_cf(s, x):
    # modified Lentz on the Legendre continued fraction
    tiny = 1e-300
    b = x + 1 - s
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, 100000):
        an = -i * (i - s)
        b += 2
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < 1e-16:
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge")
    return h * np.exp(s * math.log(x) - x)


def _use_series(s, x):
    return x < 1.0 + abs(s)


def upper_incomplete_gamma(s, x):
    """Gamma(s, x) = int_x^inf e^-y y^(s-1) dy."""
    s = complex(s)
    x = float(x)
    if x < 0:
        raise DomainError("x must be >= 0")
    if x == 0:
        if s.real <= 0:
            raise DomainError("Gamma(s, 0) diverges for Re s <= 0")
        return gamma(s)
    if _use_series(s, x):
        return complex(gamma(s) - _lower_gamma_series(s, x))
    return complex(_upper_gamma_cf(s, x))


def incomplete_gamma_interval(s, a, b):
    """int_a^b e^-y y^(s-1) dy without forming Gamma(s) when avoidable."""
    s = complex(s)
    a, b = float(a), float(b)
    if not 0 <= a <= b:
        raise DomainError("need 0 <= a <= b")
    if a == b:
        return 0j
    if _use_series(s, b):
        if a == 0 and s.real <= 0:
            raise DomainError("integral diverges at 0")
        return complex(_lower_gamma_series(s, b) - _lower_gamma_series(s, a))
    if not _use_series(s, a):
        return complex(_upper_gamma_cf(s, a) - _upper_gamma_cf(s, b))
    # split at the switch-over point
    m = 1.0 + abs(s)
    return complex(_lower_gamma_series(s, m) - _lower_gamma_series(s, a)
                   + _upper_gamma_cf(s, m) - _upper_gamma_cf(s, b))


# -------------------------------------------------------------------- K-Bessel

def _bessel_k_grid(nu, ymin, ymax, drop):
    a = abs(nu.real)
    t = abs(nu.imag)
    # cut-off: -y(cosh v - 1) + a v falls `drop` below its maximum, for the smallest y
    y = ymin
    vpk = math.asinh(a / y) if a > 0 else 0.0
    peak = -y * (math.cosh(vpk) - 1) + a * vpk
    lo, hi = vpk, vpk + 1.0
    while -y * (math.cosh(hi) - 1) + a * hi > peak - drop:
        hi = vpk + 2 * (hi - vpk)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if -y * (math.cosh(mid) - 1) + a * mid > peak - drop:
            lo = mid
        else:
            hi = mid
    V = hi
    # step from the strip of analyticity, worst case over y in [ymin, ymax]
    sig = np.linspace(0.02, 1.5, 150)
    h = np.max(2 * np.pi * sig / (drop + 5 + t * sig + ymax * sig ** 2 / 2))
    n = int(math.ceil(V / h))
    n += n % 2  # even so the coarse subset ends on V as well
    return V, n


def bessel_k(order, y, q=DEFAULT_QUAD, return_error=False):
    """K_order(y) for complex order and real y > 0 (scalar or array).

    Trapezoid rule for int_0^inf exp(-y cosh v) cosh(order v) dv; the error
    estimate compares with the rule on every other node.
    """
    nu = complex(order)
    yarr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(yarr <= 0):
        raise DomainError("bessel_k needs y > 0")
    V, n = _bessel_k_grid(nu, float(yarr.min()), float(yarr.max()), q.cutoff_log_drop)
    v = np.linspace(0.0, V, n + 1)
    h = V / n
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    expo = -np.outer(yarr, np.cosh(v) - 1.0)
    ch = np.cosh(nu * v)
    f = np.exp(expo) * ch[None, :]
    fine = f @ w
    wc = np.zeros(n + 1)
    wc[::2] = 2 * h
    wc[0] = wc[-1] = h
    coarse = f @ wc
    scale = np.exp(-yarr)
    mag = np.abs(f) @ w
    diff = np.abs(fine - coarse)
    err = diff ** 2 / np.maximum(np.abs(fine), 1e-300) + 1e-16 * mag * n ** 0.5
    val = fine * scale
    err = err * scale
    bad = (err > np.maximum(q.abs_tol * scale, q.rel_tol * np.abs(val))) & (diff > 1e-2 * np.abs(fine))
    if np.any(bad) or not np.all(np.isfinite(val)):
        raise ConvergenceError("K-Bessel quadrature failed to resolve the integrand")
    if np.ndim(y) == 0:
        val, err = complex(val[0]), float(err[0])
    if return_error:
        return val, err
    return val


# ------------------------------------------------------------- Riemann zeta

_BERNOULLI2 = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
               Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
               Fraction(43867, 798), Fraction(-174611, 330), Fraction(854513, 138),
               Fraction(-236364091, 2730), Fraction(8553103, 6), Fraction(-23749461029, 870),
               Fraction(8615841276005, 14322)]
_EM_COEF = [float(b / math.factorial(2 * j + 2)) for j, b in enumerate(_BERNOULLI2)]


def zeta(s):
    """Riemann zeta by Euler-Maclaurin, functional equation for Re s < 0."""
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if s.real < 0:
        if s.imag == 0 and s.real == round(s.real) and int(round(s.real)) % 2 == 0:
            return 0j
        return complex(2 ** s * math.pi ** (s - 1) * np.sin(math.pi * s / 2)
                       * gamma(1 - s) * zeta(1 - s))
    N = int(max(12, 1.2 * abs(s) + 10))
    n = np.arange(1, N, dtype=float)
    total = np.sum(np.exp(-s * np.log(n)))
    NN = float(N)
    total += NN ** (1 - s) / (s - 1) + 0.5 * NN ** (-s)
    poch = s
    power = NN ** (-s - 1)
    for j, c in enumerate(_EM_COEF):
        term = c * poch * power
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        poch *= (s + 2 * j + 1) * (s + 2 * j + 2)
        power /= NN * NN
    return complex(total)


def zeta_star(s):
    """Completed zeta pi^(-s/2) Gamma(s/2) zeta(s)."""
    s = complex(s)
    if abs(s) < 1e-14 or abs(s - 1) < 1e-14:
        raise PoleError("zeta* has poles at s = 0, 1")
    if s.real < 0.5:
        s = 1 - s  # zeta*(s) = zeta*(1 - s)
    return complex(math.pi ** (-s / 2) * gamma(s / 2) * zeta(s))


# ----------------------------------------------------------- quadrature utils

@lru_cache(maxsize=None)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_panels(breaks, n=20):
    """Nodes and weights of composite Gauss-Legendre on consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = _leggauss(n)
    a, b = breaks[:-1], breaks[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


# ------------------------------------------------------ Mellin-Barnes engine

def _poles_wrong_side(left_families, right_families, b, reach):
    """Poles of left families to the right of Re u = b (and vice versa)."""
    left, right = [], []
    for p0 in left_families:
        p0 = complex(p0)
        n = 0
        while p0.real - n > b:
            left.append(p0 - n)
            n += 1
    for p0 in right_families:
        p0 = complex(p0)
        n = 0
        while p0.real + n < b:
            right.append(p0 + n)
            n += 1
    return left, right


def _nearby_poles(families, sign, centre, radius):
    out = []
    for p0 in families:
        p0 = complex(p0)
        k0 = int(math.floor(sign * (centre.real - p0.real) - radius))
        for n in range(max(0, k0), max(0, k0) + int(2 * radius) + 3):
            p = p0 + sign * n
            if abs(p - centre) <= radius:
                out.append(p)
    return out


def _check_pinch(left_families, right_families, tol=1e-9):
    for pl in left_families:
        for pr in right_families:
            d = complex(pl) - complex(pr)
            r = round(d.real)
            if r >= 0 and abs(d - r) < tol:
                raise PoleError("left and right pole families collide (pinched contour)")


def _circle_residue(logf, centre, r, npts=64):
    th = 2 * np.pi * (np.arange(npts) + 0.5) / npts
    e = np.exp(1j * th)
    lv = logf(centre + r * e)
    m = np.max(lv.real)
    return complex(np.mean(np.exp(lv - m) * e) * r * np.exp(m))


def choose_abscissa(left_families, right_families, lo, hi):
    """Abscissa in [lo, hi] as far as possible from every pole real part."""
    reals = []
    for p0 in left_families:
        p0 = complex(p0)
        reals += [p0.real - n for n in range(0, int(max(0, p0.real - lo)) + 2)]
    for p0 in right_families:
        p0 = complex(p0)
        reals += [p0.real + n for n in range(0, int(max(0, hi - p0.real)) + 2)]
    cand = np.linspace(lo, hi, 401)
    if not reals:
        return 0.5 * (lo + hi)
    dist = np.min(np.abs(cand[:, None] - np.array(reals)[None, :]), axis=1)
    return float(cand[np.argmax(dist)])


def barnes_integral(logf, left_families, right_families, b, drop=45.0,
                    panel=0.5, nodes=20, tmax=1e4, return_info=False):
    """(1/2 pi i) int_C f(u) du with f = exp(logf).

    C separates the poles p - n (p in left_families) from p + n (p in
    right_families), n = 0, 1, 2, ...  The integral is taken on the line
    Re u = b and corrected by residues of poles on the wrong side.
    `logf` must accept complex numpy arrays.
    """
    left_families = [complex(p) for p in left_families]
    right_families = [complex(p) for p in right_families]
    _check_pinch(left_families, right_families)
    all_fams = [(p, -1) for p in left_families] + [(p, 1) for p in right_families]
    # distance of every pole to the line
    for p0, sgn in all_fams:
        k = round(sgn * (b - p0.real))
        for n in (k - 1, k, k + 1):
            if n >= 0 and abs(p0.real + sgn * n - b) < 1e-6:
                raise ContourError(f"pole {p0 + sgn * n} lies on the integration line")

    # truncation height: scan outward until the integrand is negligible
    def edge(direction):
        t = 0.0
        best = -np.inf
        while True:
            ts = t + direction * panel * np.arange(1, 17)
            lv = logf(b + 1j * ts).real
            lv = np.where(np.isfinite(lv), lv, -np.inf)
            best = max(best, float(np.max(lv)))
            if np.all(lv < best - drop) and abs(t) > 2 * panel:
                return ts[-1], best
            t = ts[-1]
            if abs(t) > tmax:
                raise ConvergenceError("integrand does not decay along the line")

    t_hi, b1 = edge(1.0)
    t_lo, b2 = edge(-1.0)
    lv0 = logf(np.array([b + 0j])).real[0]
    peak = max(b1, b2, lv0)
    breaks = [t_lo + panel * i for i in range(int(round((t_hi - t_lo) / panel)) + 1)]
    # refine near poles close to the line
    extra = []
    for p0, sgn in all_fams:
        k = round(sgn * (b - p0.real))
        for n in (k - 1, k, k + 1):
            if n < 0:
                continue
            p = p0 + sgn * n
            d = abs(p.real - b)
            if d < panel and t_lo < p.imag < t_hi:
                w = d
                while w < panel:
                    extra += [p.imag - w, p.imag + w]
                    w *= 2
    if extra:
        breaks = sorted(set(breaks) | {e for e in extra if t_lo < e < t_hi})
    ts, ws = gl_panels(breaks, nodes)
    lv = logf(b + 1j * ts)
    m = np.max(lv.real)
    vals = np.exp(lv - m)
    line = complex(np.sum(vals * ws) * np.exp(m) / (2 * np.pi))
    mag = float(np.sum(np.abs(vals) * ws) * np.exp(m) / (2 * np.pi))

    # residue corrections
    wl, wr = _poles_wrong_side(left_families, right_families, b, None)
    corr = 0j
    for plist, sign, fams_same, s_same in ((wl, 1, left_families, -1), (wr, -1, right_families, 1)):
        done = set()
        for i, p in enumerate(plist):
            if i in done:
                continue
            cluster = [p]
            done.add(i)
            for j in range(i + 1, len(plist)):
                if j not in done and abs(plist[j] - p) < 0.05:
                    cluster.append(plist[j])
                    done.add(j)
            c = sum(cluster) / len(cluster)
            spread = max(abs(q - c) for q in cluster)
            others = []
            for p0, sg in all_fams:
                others += _nearby_poles([p0], sg, c, spread + 2.0)
            others = [q for q in others if all(abs(q - cc) > 1e-12 for cc in cluster)]
            gap = min([abs(q - c) for q in others] + [abs(c.real - b), 1.0])
            if gap - spread < 1e-6:
                raise ContourError("pole cluster too close to another pole or the line")
            r = spread + 0.3 * (gap - spread)
            corr += sign * _circle_residue(logf, c, r)
    val = line + corr
    if not np.isfinite(val):
        raise ConvergenceError("Mellin-Barnes integral produced a non-finite value")
    # truncation at exp(-drop) of the peak sits below roundoff; report roundoff
    err = 1e-15 * (mag + abs(corr))
    if return_info:
        return val, {"err": err, "T": (t_lo, t_hi), "peak": peak, "line": line, "residues": corr}
    return val


# ------------------------------------------------------------------- 2F1

def _f21_series(a, b, c, x, maxterms=200000):
    term = 1 + 0j
    total = 1 + 0j
    for n in range(maxterms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        if term == 0:
            return total
        if abs(term) < 1e-17 * abs(total) and n > 3:
            return total
    raise ConvergenceError("hypergeometric series did not converge")


def _near_int(v, tol=1e-9):
    v = complex(v)
    return abs(v.imag) < tol and abs(v.real - round(v.real)) < tol


def _interp_first(fn, a, eps=4e-3):
    # fn is analytic in its argument; interpolate fn(a + eps k), k = +-1, +-2, +-3, to k = 0
    ks = (-3, -2, -1, 1, 2, 3)
    w = (1 / 20, -3 / 10, 3 / 4, 3 / 4, -3 / 10, 1 / 20)
    return sum(wi * fn(a + eps * k) for wi, k in zip(w, ks))


def _f21_one_minus(a, b, c, x):
    # connection to 1 - x
    if _near_int(c - a - b):
        return _interp_first(lambda aa: _f21_one_minus_raw(aa, b, c, x), a)
    return _f21_one_minus_raw(a, b, c, x)


def _f21_one_minus_raw(a, b, c, x):
    w = 1 - x
    g = sp.gamma
    r = sp.rgamma
    A = g(c) * g(c - a - b) * r(c - a) * r(c - b)
    B = g(c) * g(a + b - c) * r(a) * r(b)
    out = 0j
    if A != 0:
        out += A * _f21_series(a, b, a + b - c + 1, w)
    if B != 0:
        out += B * w ** (c - a - b) * _f21_series(c - a, c - b, c - a - b + 1, w)
    return out


def _f21_inverse(a, b, c, x):
    # connection to 1/x
    if _near_int(a - b):
        return _interp_first(lambda aa: _f21_inverse_raw(aa, b, c, x), a)
    return _f21_inverse_raw(a, b, c, x)


def _f21_inverse_raw(a, b, c, x):
    g = sp.gamma
    r = sp.rgamma
    w = 1 / x
    mx = -x
    A = g(c) * g(b - a) * r(b) * r(c - a)
    B = g(c) * g(a - b) * r(a) * r(c - b)
    out = 0j
    if A != 0:
        out += A * mx ** (-a) * _f21_series(a, a - c + 1, a - b + 1, w)
    if B != 0:
        out += B * mx ** (-b) * _f21_series(b, b - c + 1, b - a + 1, w)
    return out


def _f21_barnes(a, b, c, x):
    # Mellin-Barnes representation, valid for |arg(-x)| < pi
    lmx = np.log(-x + 0j)

    def logf(u):
        return (sp.loggamma(a + u) + sp.loggamma(b + u) + sp.loggamma(-u)
                - sp.loggamma(c + u) + u * lmx)

    left = [-a, -b]
    bb = choose_abscissa(left, [0.0], min(-a.real, -b.real, 0) - 1.5, max(0.5, -a.real, -b.real) + 0.5)
    I = barnes_integral(logf, left, [0.0], bb)
    return complex(sp.gamma(c) * sp.rgamma(a) * sp.rgamma(b) * I)


def _f21_unsafe(a, b, c, x):
    if x == 0:
        return 1 + 0j
    cands = {
        "direct": abs(x),
        "pfaff": abs(x / (x - 1)),
        "one_minus": abs(1 - x),
        "pfaff_one_minus": abs(1 / (1 - x)),
        "inverse": abs(1 / x),
        "pfaff_inverse": abs(1 - 1 / x),
    }
    # connection formulas split into two terms with Gamma(+-d); for d within 0.05 of an integer
    # the terms cancel to O(d) and digits are lost, so such a route is used only as a last resort
    delicate = {"one_minus": c - a - b, "pfaff_one_minus": b - a, "inverse": a - b, "pfaff_inverse": a + b - c}
    for name, d in delicate.items():
        if abs(complex(d).imag) < 0.05 and abs(d.real - round(d.real)) < 0.05:
            alt = min((r for r in cands if r != name), key=cands.get)
            if cands[alt] <= 0.8:
                cands[name] = math.inf
    route = min(cands, key=cands.get)
    if cands[route] > 0.8:
        if cands["direct"] < 0.95:
            return _f21_series(a, b, c, x)
        return _f21_barnes(a, b, c, x)
    if route == "direct":
        return _f21_series(a, b, c, x)
    if route == "one_minus":
        return _f21_one_minus(a, b, c, x)
    if route == "inverse":
        return _f21_inverse(a, b, c, x)
    y = x / (x - 1)
    pre = (1 - x) ** (-a)
    if route == "pfaff":
        return pre * _f21_series(a, c - b, c, y)
    if route == "pfaff_one_minus":
        return pre * _f21_one_minus(a, c - b, c, y)
    return pre * _f21_inverse(a, c - b, c, y)


def _on_cut(x):
    return abs(x.imag) == 0 and x.real > 1


def gauss_2f1(a, b, c, x):
    """Gauss hypergeometric function 2F1(a, b; c; x), principal branch."""
    a, b, c, x = complex(a), complex(b), complex(c), complex(x)
    if _is_nonpos_int(c):
        raise PoleError("2F1 is undefined when c is a nonpositive integer")
    if x == 1:
        if (c - a - b).real <= 0:
            raise BranchError("2F1 diverges at x = 1 unless Re(c - a - b) > 0")
        return complex(sp.gamma(c) * sp.gamma(c - a - b) * sp.rgamma(c - a) * sp.rgamma(c - b))
    if _on_cut(x):
        raise BranchError("x lies on the branch cut (1, inf)")
    return complex(_check_finite(_f21_unsafe(a, b, c, x)))


def gauss_2f1_regularized(a, b, c, x):
    """2F1(a, b; c; x) / Gamma(c), entire in c."""
    a, b, c, x = complex(a), complex(b), complex(c), complex(x)
    if _is_nonpos_int(c):
        n = -int(round(c.real))
        coef = 1 + 0j
        for j in range(n + 1):
            coef *= (a + j) * (b + j)
        coef /= math.factorial(n + 1)
        return complex(coef * x ** (n + 1) * gauss_2f1(a + n + 1, b + n + 1, n + 2, x))
    return complex(gauss_2f1(a, b, c, x) * sp.rgamma(c))
