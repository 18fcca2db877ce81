"""Arithmetic data: cusp-form coefficients, Kloosterman sums, divisor sums,
Dirichlet characters, plus the plain-text coefficient file format."""
from dataclasses import dataclass, field
import math
from pathlib import Path

import numpy as np

from .errors import DomainError, GapError, ParseError, ResourceError

MAX_DELTA_INDEX = 2_000_000


# ----------------------------------------------------------- small arithmetic

def factorize(n):
    """Prime factorization {p: e} by trial division."""
    n = int(n)
    if n < 1:
        raise DomainError("factorize needs n >= 1")
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_divisors(n):
    return sorted(factorize(n))


def is_squarefree(n):
    return all(e == 1 for e in factorize(n).values())


def divisors(n):
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p ** k for d in ds for k in range(e + 1)]
    return sorted(ds)


def euler_phi(n):
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def mobius(n):
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def primes_upto(n):
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0]


def divisor_sigma(nu, n, coprime_to=None):
    """sum_{d | n} d^nu, optionally restricted to (d, coprime_to) = 1."""
    n = int(n)
    if n < 1:
        raise DomainError("divisor_sigma needs n >= 1")
    nu = complex(nu)
    total = 0j
    for d in divisors(n):
        if coprime_to is None or math.gcd(d, coprime_to) == 1:
            total += d ** nu
    return total


def divisor_sigma_array(nu, M, coprime_to=None):
    """Array s with s[n] = sum_{d | n} d^nu for 1 <= n <= M (s[0] = 0)."""
    nu = complex(nu)
    out = np.zeros(M + 1, dtype=complex)
    for d in range(1, M + 1):
        if coprime_to is not None and math.gcd(d, coprime_to) != 1:
            continue
        out[d::d] += d ** nu
    return out


def kloosterman(m, n, c):
    """S(m, n; c) = sum over units d mod c of e((m d + n dbar)/c)."""
    c = int(c)
    if c < 1:
        raise DomainError("modulus must be positive")
    d = np.array([x for x in range(c) if math.gcd(x, c) == 1], dtype=np.int64)
    dbar = np.array([pow(int(x), -1, c) for x in d], dtype=np.int64)
    phase = ((m % c) * d + (n % c) * dbar) % c
    return complex(np.sum(np.exp(2j * np.pi * phase / c)))


# ------------------------------------------------------------ coefficient data

@dataclass(frozen=True)
class CuspFormSpec:
    weight: int = 12
    level: int = 1
    character_label: str = "trivial"
    source: str = "builtin-delta"

    def __post_init__(self):
        if self.weight < 2 or self.weight % 2:
            raise DomainError("weight must be even and >= 2")
        if not is_squarefree(self.level):
            raise DomainError("level must be square-free")
        if self.source == "builtin-delta" and (self.weight, self.level) != (12, 1):
            raise DomainError("builtin-delta has weight 12 and level 1")


DELTA_SPEC = CuspFormSpec()


@dataclass
class CoefficientTable:
    """Coefficients a(1..M); index 0 of the arrays is unused and zero."""
    spec: CuspFormSpec
    a: np.ndarray
    exact: list = field(default=None, repr=False)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=complex)
        self.a.setflags(write=False)
        k = self.spec.weight
        m = np.arange(len(self.a), dtype=float)
        m[0] = 1.0
        A = self.a / m ** ((k - 1) / 2)
        A.setflags(write=False)
        self.A = A

    @property
    def M(self):
        return len(self.a) - 1

    @property
    def k(self):
        return self.spec.weight

    def __getitem__(self, m):
        if not 1 <= m <= self.M:
            raise GapError(f"coefficient index {m} outside 1..{self.M}")
        return complex(self.a[m])

    def require(self, m):
        if m > self.M:
            raise GapError(f"table has {self.M} coefficients, {m} needed")

    def perturbed(self, idx, value):
        """Copy with a(idx) replaced (used by support-exactness tests)."""
        a = np.array(self.a)
        a[idx] = value
        return CoefficientTable(self.spec, a)


# --- exact tau: integer convolution through float FFTs on 10-bit limbs

_LIMB = 10


def _exact_square(x, L):
    """First L coefficients of x*x for an integer int64 array x (exact)."""
    x = np.asarray(x, dtype=np.int64)[:L]
    bits = int(np.max(np.abs(x))).bit_length()
    nl = max(1, -(-bits // _LIMB))
    sign = np.sign(x)
    ax = np.abs(x)
    n = 1
    while n < 2 * len(x):
        n *= 2
    F = [np.fft.rfft((sign * ((ax >> (_LIMB * i)) & ((1 << _LIMB) - 1))).astype(float), n)
         for i in range(nl)]
    parts = []
    for kk in range(2 * nl - 1):
        P = sum(F[i] * F[kk - i] for i in range(max(0, kk - nl + 1), min(kk, nl - 1) + 1))
        c = np.fft.irfft(P, n)[:L]
        r = np.rint(c)
        if np.max(np.abs(c - r), initial=0.0) > 0.05:
            raise ResourceError("limb convolution lost integer exactness")
        parts.append(r.astype(np.int64))
    if bits * 2 + L.bit_length() + 2 < 62:
        out = np.zeros(L, dtype=np.int64)
        for kk, c in enumerate(parts):
            out += c << (_LIMB * kk)
        return out
    out = np.zeros(L, dtype=object)
    for kk, c in enumerate(parts):
        out = out + c.astype(object) * (1 << (_LIMB * kk))
    return out


_TAU_CACHE = []


def tau_exact(M):
    """Ramanujan tau(1..M) as Python ints (list index m-1 holds tau(m))."""
    if M < 1:
        raise DomainError("M must be >= 1")
    if M > MAX_DELTA_INDEX:
        raise ResourceError(f"M = {M} exceeds the configured maximum {MAX_DELTA_INDEX}")
    if _TAU_CACHE and len(_TAU_CACHE[0]) >= M:
        return _TAU_CACHE[0][:M]
    # q prod (1-q^n)^24 = q (sum (-1)^j (2j+1) q^{j(j+1)/2})^8
    base = np.zeros(M, dtype=np.int64)
    j = 0
    while j * (j + 1) // 2 < M:
        base[j * (j + 1) // 2] = (-1) ** j * (2 * j + 1)
        j += 1
    s2 = _exact_square(base, M)
    s4 = _exact_square(s2, M)
    s8 = _exact_square(s4, M)
    out = [int(v) for v in s8]
    _TAU_CACHE[:] = [out]
    return out


def tau_schoolbook(M):
    """Slow exact tau via direct integer products (oracle)."""
    L = M
    s = [0] * L
    j = 0
    while j * (j + 1) // 2 < L:
        s[j * (j + 1) // 2] = (-1) ** j * (2 * j + 1)
        j += 1
    out = [1] + [0] * (L - 1)
    for _ in range(8):
        new = [0] * L
        nz = [(i, v) for i, v in enumerate(s) if v]
        for i, oi in enumerate(out):
            if oi:
                for k, v in nz:
                    if i + k >= L:
                        break
                    new[i + k] += oi * v
        out = new
    return out


def delta_coefficients(M):
    """Coefficient table of the discriminant form (weight 12, level 1)."""
    t = tau_exact(M)
    a = np.zeros(M + 1, dtype=complex)
    a[1:] = np.array([float(v) for v in t])
    return CoefficientTable(DELTA_SPEC, a, exact=t)


def constant_table(M, k=12, value=None):
    """Control table with normalized A(m) = 1 (or a given array of A(m))."""
    spec = CuspFormSpec(weight=k, level=1, source="synthetic")
    m = np.arange(M + 1, dtype=float)
    A = np.ones(M + 1) if value is None else np.asarray(value, dtype=complex)
    a = A * m ** ((k - 1) / 2)
    a[0] = 0
    return CoefficientTable(spec, a)


def load_coefficients(path, spec=None):
    """Read `m re im` lines (indices 1, 2, 3, ... in order; '#' comments)."""
    if spec is None:
        spec = CuspFormSpec(source="file")
    vals = []
    expected = 1
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 3:
                raise ParseError("expected 'm re im'", lineno)
            try:
                m = int(parts[0])
                re, im = float(parts[1]), float(parts[2])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if m < expected:
                raise ParseError(f"index {m} is not increasing", lineno)
            if m > expected:
                raise GapError(f"missing coefficient index {expected} (line {lineno})")
            vals.append(complex(re, im))
            expected += 1
    if not vals:
        raise ParseError("no coefficients in file", None)
    return CoefficientTable(spec, np.concatenate([[0], vals]))


def save_coefficients(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# weight {table.spec.weight} level {table.spec.level}\n")
        for m in range(1, table.M + 1):
            v = table.a[m]
            fh.write(f"{m} {float(v.real)!r} {float(v.imag)!r}\n")
    return Path(path)


# ------------------------------------------------------------------ characters

def _primitive_root(p):
    phi = p - 1
    fac = prime_divisors(phi)
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in fac):
            return g
    return 1


def _component_logs(p, e):
    """Discrete logs on (Z/p^e)^x: list of (order, log array indexed by residue)."""
    q = p ** e
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            lg = np.full(q, -1, dtype=np.int64)
            lg[1], lg[3] = 0, 1
            return [(2, lg)]
        # units = (+-1) x <5>
        ord5 = q // 4
        sign = np.full(q, -1, dtype=np.int64)
        l5 = np.full(q, -1, dtype=np.int64)
        x = 1
        for k in range(ord5):
            sign[x], l5[x] = 0, k
            sign[q - x], l5[q - x] = 1, k
            x = x * 5 % q
        return [(2, sign), (ord5, l5)]
    g = _primitive_root(p)
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    order = q // p * (p - 1)
    lg = np.full(q, -1, dtype=np.int64)
    x = 1
    for k in range(order):
        lg[x] = k
        x = x * g % q
    return [(order, lg)]


@dataclass
class CharacterTable:
    """All Dirichlet characters mod Q as a dense (phi(Q), Q) value array."""
    Q: int
    values: np.ndarray
    labels: list

    def __len__(self):
        return len(self.values)

    def __call__(self, idx, a):
        return self.values[idx][np.asarray(a) % self.Q]

    def conj_index(self, idx):
        target = np.conj(self.values[idx])
        for j, row in enumerate(self.values):
            if np.allclose(row, target, atol=1e-12):
                return j
        raise LookupError("conjugate character missing")

    def is_primitive(self, idx):
        row = self.values[idx]
        units = [a for a in range(self.Q) if math.gcd(a, self.Q) == 1]
        for d in divisors(self.Q):
            if d == self.Q:
                continue
            if all(abs(row[a] - 1) < 1e-9 for a in units if a % d == 1 % d):
                return False
        return True


def dirichlet_characters(Q):
    """Every character mod Q, built from generators of each prime-power factor."""
    if Q < 1:
        raise DomainError("modulus must be positive")
    comps = []  # (modulus q, order, logs)
    for p, e in sorted(factorize(Q).items()):
        for order, lg in _component_logs(p, e):
            comps.append((p ** e, order, lg))
    res = np.arange(Q)
    units = np.array([math.gcd(int(a), Q) == 1 for a in res])
    orders = [c[1] for c in comps]
    labels = [()]
    for o in orders:
        labels = [lab + (j,) for lab in labels for j in range(o)]
    vals = np.zeros((len(labels), Q), dtype=complex)
    for i, lab in enumerate(labels):
        ph = np.zeros(Q)
        for (q, order, lg), j in zip(comps, lab):
            ph = ph + j * lg[res % q] / order
        row = np.exp(2j * np.pi * ph)
        # snap exact roots of unity at +-1, +-i
        row = np.where(np.abs(row.real) < 1e-15, 1j * row.imag, row)
        row = np.where(np.abs(row.imag) < 1e-15, row.real + 0j, row)
        vals[i] = np.where(units, row, 0)
    vals.setflags(write=False)
    return CharacterTable(Q, vals, labels)
