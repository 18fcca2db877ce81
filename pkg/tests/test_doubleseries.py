"""Z_Q(s, w) on finite boxes, the pieces S1..S8, sieve identities, L_Q and the polar-line residue."""
import itertools
import math

import numpy as np
import pytest

from shiftconv import doubleseries as dbs
from shiftconv import specfun as sf
from shiftconv.dseries import SpectralDatum, _RSCache
from shiftconv.errors import DomainError, GapError, NoDataError, UnsupportedError
from shiftconv.forms import delta_coefficients
from shiftconv.kernel import circle_integral
from shiftconv.poincare import ShiftParams


@pytest.fixture(scope="module")
def delta():
    return delta_coefficients(20_001)


def Zq(delta, s=2, w=2, h=1, l1=1, l2=1, Q=1, M2=200, H=200):
    return dbs.ZqQuery(s, w, ShiftParams(h, l1, l2, 1, Q), delta, delta, M2, H)


def test_sprime_bookkeeping(delta):
    q = Zq(delta, s=1.5 + 0.2j, w=0.7 - 1j)
    assert q.sprime == 1.5 + 0.2j + 0.7 - 1j + 6 - 1
    assert q.K == 1  # ceil(1 + eps - 0.7)
    with pytest.raises(DomainError):
        dbs.ZqQuery(2, 2, ShiftParams(1), delta, delta, 0, 10)


@pytest.mark.parametrize("l1,l2,Q", [(1, 1, 1), (1, 1, 5), (2, 3, 7), (5, 7, 12)])
def test_zq_two_forms_agree(delta, l1, l2, Q):
    q = Zq(delta, s=2.2 + 0.4j, w=1.7, l1=l1, l2=l2, Q=Q, M2=300, H=300)
    a = dbs.zq_truncated(q).value
    b = dbs.zq_from_d(q)
    assert abs(a - b) <= 1e-12 * abs(a)


def test_zq_terms_brute_force(delta):
    q = Zq(delta, l1=2, l2=3, Q=5, M2=30, H=30)
    m1, m2, h0, _ = dbs.zq_terms(q)
    got = set(zip(m1.tolist(), m2.tolist(), h0.tolist()))
    want = {(a, b, c) for b in range(1, 31) for c in range(1, 31) for a in range(1, 200) if 2 * a == 3 * b + 5 * c}
    assert got == want


def test_zq_stable_under_box_doubling(delta):
    # stated target 1e-8 at Q = 1, s = w = 2; the partial sums drift by ~4e-7 here
    a = dbs.zq_truncated(Zq(delta, M2=2000, H=2000)).value
    b = dbs.zq_truncated(Zq(delta, M2=4000, H=4000)).value
    assert abs(a - b) <= 1e-8


def test_zq_doubling_within_tail(delta):
    a = dbs.zq_truncated(Zq(delta, M2=1000, H=1000))
    b = dbs.zq_truncated(Zq(delta, M2=2000, H=2000))
    assert abs(a.value - b.value) <= a.tail_bound


def test_zq_subset_of_level_one_box(delta):
    # Z_5 on (M2, H) is the h0 = 0 (mod 5) slice of Z_1 on (M2, 5H)
    q5 = Zq(delta, s=2.1, w=1.9, Q=5, M2=150, H=60)
    q1 = Zq(delta, s=2.1, w=1.9, Q=1, M2=150, H=300)
    m1, m2, h0, c = dbs.zq_terms(q1)
    keep = h0 % 5 == 0
    sub = np.sum(c[keep] * m2[keep].astype(float) ** -2.1 * h0[keep].astype(float) ** -1.9)
    assert abs(dbs.zq_truncated(q5).value - sub) <= 1e-13 * abs(sub)


# ------------------------------------------------------------ S1..S8

@pytest.mark.parametrize("l1,l2,Q", [(1, 1, 1), (2, 3, 5), (5, 7, 12)])
def test_s1_plus_s2_is_z(delta, l1, l2, Q):
    q = Zq(delta, s=2.3, w=1.6 + 0.5j, l1=l1, l2=l2, Q=Q, M2=150, H=150)
    d = dbs.s_decomposition(q)
    z = dbs.zq_truncated(q).value
    assert abs(d["S1"] + d["S2"] - z) <= 1e-12 * abs(z)


def _s2_binomial_oracle(q, J):
    # direct rearrangement: expand (1 + l2 m2 / (h0 Q))^{-beta} termwise on the l2 m2 < h0 Q part
    l1, l2, Q, k = q.sp.l1, q.sp.l2, q.sp.Q, q.k
    s, beta = complex(q.s), q.beta
    m1, m2, h0 = dbs._pairs(q)
    cut = l2 * m2 < h0 * Q
    m1, m2, h0 = m1[cut], m2[cut], h0[cut]
    a = q.f.a[m1] * np.conj(q.g.a[m2])
    x = l2 * m2 / (h0 * Q)
    # h0 Q = l1 m1 - l2 m2 = l1 m1 (1 - l2 m2 / (l1 m1))
    y = l2 * m2 / (l1 * m1)
    ser = sum(dbs._poch_neg(beta, j) * (-y) ** j for j in range(J + 1))
    base = (l1 * l2) ** ((k - 1) / 2) * a * (l2 * m2) ** (-(s + k - 1)) * (l1 * m1) ** (-beta)
    return complex(np.sum(base * ser)), x


def test_s2_binomial_matches_rearrangement(delta):
    q = Zq(delta, s=2.4, w=1.3 + 0.2j, l1=2, l2=3, Q=5, M2=120, H=120)
    for J in (0, 1, 3):
        ref, _ = _s2_binomial_oracle(q, J)
        assert abs(dbs.s2_binomial(q, J) - ref) <= 1e-12 * abs(ref)


def test_s2_binomial_converges_to_s2(delta):
    q = Zq(delta, s=2.4, w=1.3, M2=120, H=120)
    S2 = dbs.s_decomposition(q)["S2"]
    errs = [abs(dbs.s2_binomial(q, J) - S2) for J in (1, 4, 16, 40)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-3 * abs(S2)


@pytest.mark.parametrize("l1,l2,Q,j", [(1, 1, 1, 0), (2, 3, 5, 1), (5, 7, 12, 2), (3, 1, 4, 0)])
def test_s3_assembly_exact_on_pair_box(delta, l1, l2, Q, j):
    q = Zq(delta, s=2.2, w=1.4 - 0.3j, l1=l1, l2=l2, Q=Q, M2=80, H=80)
    p = dbs.s_pieces(q, j)
    rhs = p["S5"] - p["S6"] - p["S7"] - p["S8"]
    assert abs(p["S3"] - rhs) <= 1e-12 * max(abs(p["S5"]), 1.0)


def test_s7_brute_force(delta):
    q = Zq(delta, s=2.2, w=1.4, l1=2, l2=3, Q=5, M2=12, H=6)
    j, k = 1, 12
    M1 = (3 * 12 + 6 * 5) // 2
    tot = 0j
    for m1, m2 in itertools.product(range(1, M1 + 1), range(1, 13)):
        diff = 2 * m1 - 3 * m2
        if diff < 0 and diff % 5 == 0:
            tot += (delta.a[m1] * delta.a[m2] * m2 ** -(2.2 + k - 1 - j) * m1 ** -(q.beta + j))
    assert abs(dbs.s_pieces(q, j)["S7"] - tot) <= 1e-13 * abs(tot)


@pytest.mark.parametrize("l1,l2", [(1, 1), (2, 3), (6, 5), (2, 6), (3, 15)])
def test_s8_factorisation(delta, l1, l2):
    q = Zq(delta, s=2.2 + 0.1j, w=1.5, l1=l1, l2=l2, M2=3000, H=10)
    for j in (0, 1):
        a, b = dbs.s8_direct(q, j), dbs.s8_factored(q, j)
        assert abs(a - b) <= 1e-10 * max(abs(a), 1e-300)


def test_decomposition_region(delta):
    with pytest.raises(DomainError):
        dbs.s_decomposition(Zq(delta, s=-2, w=-2))


# ------------------------------------------------------------ sieve identities

@pytest.mark.parametrize("Q,l1,l2", [(1, 1, 1), (5, 1, 1), (12, 1, 1), (13, 1, 1),
                                     (12, 5, 7), (13, 5, 7), (5, 2, 3)])
def test_sieve_and_character_identities(delta, Q, l1, l2):
    q = Zq(delta, s=2.1, w=1.8, l1=l1, l2=l2, Q=Q)
    for j in (0, 1):
        r = dbs.s5_sieve_check(q, j, box=2000)
        assert r.sieve_dev <= 1e-10 and r.char_dev <= 1e-10
        if Q == 1:
            assert r.S5 == r.S5p


def test_moebius_inversion(delta):
    q = Zq(delta, s=2.1, w=1.8, Q=12)
    r = dbs.s5_sieve_check(q, 0, box=2000)
    assert abs(dbs.s5_moebius(q, 0, box=2000) - r.S5p) <= 1e-10


def test_sieve_requires_coprime(delta):
    q = Zq(delta, Q=1)
    q.sp = ShiftParams(1, 2, 3)
    object.__setattr__(q.sp, "Q", 4)
    with pytest.raises(DomainError):
        dbs.s5_sieve_check(q)


# ------------------------------------------------------------ L_Q

def test_l_q_constant_data():
    Q, H, s = 3, 400, 2.5 + 1j
    d = SpectralDatum(9.53, {h * Q: 1.0 for h in range(1, H + 1)})
    ref = Q ** -s * sum(h ** -s for h in range(1, H + 1))
    assert abs(dbs.l_q(s, d, Q, H).value - ref) <= 1e-13 * abs(ref)


def _hecke_lambda(n, t):
    # Eisenstein-type eigenvalues sum_{ab = n} (a/b)^{it}
    return sum((a / (n // a)) ** (1j * t) for a in range(1, n + 1) if n % a == 0).real


def test_l_q_hecke_factorisation():
    Q, t, s, H = 12, 1.3, 6.0 + 0.5j, 400
    lam = {n: _hecke_lambda(n, t) for n in range(1, Q * H + 1)}
    d = SpectralDatum(t, {h * Q: lam[h * Q] for h in range(1, H + 1)})
    L = sum(lam[n] * n ** -s for n in range(1, Q * H + 1))
    # 12 = 2^2 3
    fac = (lam[4] - lam[2] * 2 ** -s) * (lam[3] - lam[1] * 3 ** -s)
    ref = Q ** -s * fac * L
    assert abs(dbs.l_q(s, d, Q, H).value - ref) <= 1e-10 * abs(ref)


def test_l_q_errors():
    with pytest.raises(NoDataError):
        dbs.l_q(2, SpectralDatum(9.53), 3, 10)
    with pytest.raises(NoDataError):
        dbs.l_q(2, SpectralDatum(9.53, {3: 1.0}), 3, 2)
    with pytest.raises(DomainError):
        dbs.l_q(1, SpectralDatum(9.53, {3: 1.0}), 3, 1)


# ------------------------------------------------------------ polar-line residue

def test_sprime_q_scaling(delta):
    s, ell = 0.3 + 0.4j, 0
    K = (0.37 - 0.11j, 0.2 + 0.05j)
    a = dbs.sprime_residue(s, ell, ShiftParams(1, Q=2), delta, delta, K=K)
    b = dbs.sprime_residue(s, ell, ShiftParams(1, Q=4), delta, delta, K=K)
    u = 1.5 - s - ell
    assert abs(b / a - 2 ** (-u)) <= 1e-12


def test_sprime_parity_sign(delta):
    # with K frozen and the remaining factors evaluated by hand, l = 0 and l = 1 differ by (-1)^l
    s, sp, K = 0.3 + 0.4j, ShiftParams(1, Q=3), (0.37 - 0.11j, 0.2 + 0.05j)
    rs = _RSCache(delta, delta, 2000)
    vals = []
    for ell in (0, 1):
        r = dbs.sprime_residue(s, ell, sp, delta, delta, K=K)
        u = 1.5 - s - ell
        bare = (sf.gamma(2 * s + ell - 1) * 3 ** (-u)
                / (math.factorial(ell) * math.pi ** (s + ell - 1) * sf.zeta_star(2 * s + 2 * ell)
                   * sf.gamma(s + ell) * sf.gamma(1 - s - ell) ** 2))
        vals.append(r / (bare * (K[0] * rs(s + ell) + K[1] * rs(1 - s - ell))))
    assert abs(vals[1] / vals[0] + 1) <= 1e-12


def test_sprime_vanishes_at_level_one(delta):
    # zeta_{1,Q} is even in z, so K- = -K+ and the two pairings coincide
    for Q in (1, 5):
        r = dbs.sprime_residue(0.3 + 0.4j, 0, ShiftParams(1, Q=Q), delta, delta)
        assert abs(r) <= 1e-12 * abs(dbs.sprime_residue(0.3 + 0.4j, 0, ShiftParams(1, Q=Q), delta,
                                                          delta, K=(1.0, 1.0)))


def test_sprime_level_guard(delta):
    with pytest.raises(UnsupportedError):
        dbs.sprime_residue(0.3, 0, ShiftParams(1, N0=6), delta, delta)


def test_sprime_against_w_contour(delta):
    # residue in w of the truncated Z_Q around the polar line, versus the assembled value at 10%
    s, ell, sp = 0.3 + 0.4j, 0, ShiftParams(1, Q=1)
    w0 = 2.5 - ell - 2 * s - 6
    ci = circle_integral(lambda w: dbs.zq_truncated(dbs.ZqQuery(s, w, sp, delta, delta, 60, 60)).value,
                         w0, 0.1)
    ref = dbs.sprime_residue(s, ell, sp, delta, delta, K=(1.0, 1.0))
    assert abs(ci - ref) <= 0.1 * abs(ref)


def test_b_a_polyfactor():
    s = 0.3
    ref = sf.zeta(0.6) * 0.04 * sf.zeta(2.6) * 0.64
    assert abs(dbs.b_a_polyfactor(s, 1.5) - ref) <= 1e-13 * abs(ref)
    # A = 2.5 has three factors
    three = dbs.b_a_polyfactor(0.7 + 0.2j, 2.5) / dbs.b_a_polyfactor(0.7 + 0.2j, 1.5)
    assert abs(three - sf.zeta(2 * (0.7 + 0.2j) + 4) * (0.7 + 0.2j + 1.5) ** 2) < 1e-13
    # the squared factor vanishes to order 2 at 1/2 - l, zeta(2s + 2l) has a simple pole there,
    # so the product keeps a simple zero
    for ell in (0, 1):
        e = 1e-5
        r = dbs.b_a_polyfactor(0.5 - ell + e, 2) / dbs.b_a_polyfactor(0.5 - ell + 2 * e, 2)
        assert abs(r - 0.5) < 1e-3


def test_s8_short_table_raises(delta):
    short = delta_coefficients(100)
    q = dbs.ZqQuery(2, 2, ShiftParams(1, 2, 3), short, short, 2000, 10)
    with pytest.raises(GapError):
        dbs.s8_direct(q, 0)
    with pytest.raises(GapError):
        dbs.s8_factored(q, 0)
