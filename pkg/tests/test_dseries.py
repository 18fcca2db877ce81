"""Shifted Dirichlet series D(s; h), Rankin-Selberg pairing, Omega and the spectral evaluator."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftconv import dseries as ds
from shiftconv import specfun as sf
from shiftconv.errors import DomainError, NoDataError, ParseError, UnsupportedError
from shiftconv.forms import delta_coefficients
from shiftconv.kernel import m_limit
from shiftconv.poincare import ShiftParams, shift_pairs


@pytest.fixture(scope="module")
def delta():
    return delta_coefficients(20_001)


def D(delta, s, h=1, d=0.0, M=2000, l1=1, l2=1):
    return ds.d_truncated(ds.DSeriesQuery(s, ShiftParams(h, l1, l2), d, M, delta, delta))


def test_d_truncated_stable_under_doubling(delta):
    # stated target: 1e-10 under M -> 2M at M = 5000 (partial sums move by ~1.6e-7 here)
    a, b = D(delta, 2, M=5000).value, D(delta, 2, M=10_000).value
    assert abs(a - b) <= 1e-10


def test_d_truncated_doubling_within_tail(delta):
    a = D(delta, 2, M=5000)
    b = D(delta, 2, M=10_000)
    assert abs(a.value - b.value) <= a.tail_bound


def test_rankin_selberg_series_stable(delta):
    # sum tau(n)^2 / n^13; stated target: stable to 1e-10 at M = 1e4 (the tail is ~1/M)
    n = np.arange(1, 20_001, dtype=float)
    terms = delta.a[1:20_001].real ** 2 / n ** 13
    assert abs(terms[10_000:].sum()) <= 1e-10


def test_rankin_selberg_two_routes(delta):
    a = ds.rankin_selberg_inner(2, delta, delta, 20_000).value
    b = ds.rankin_selberg_continued(2, delta, delta)
    assert abs(a - b) <= 1e-4 * abs(a)


def test_rankin_selberg_reflection(delta):
    rs = ds._RSCache(delta, delta, 10_000)
    # E*(z, u) = E*(z, 1 - u): the pairing is symmetric under u -> 1 - u
    assert abs(rs(-0.5 + 0.3j) - rs(1.5 - 0.3j)) <= 1e-14 * abs(rs(1.5 - 0.3j))
    assert abs(rs(-3.5 + 0.3j) - rs(4.5 - 0.3j)) <= 1e-14 * abs(rs(4.5 - 0.3j))
    # both routes meet where the series is used
    a = rs(4.2 + 1j)
    assert abs(a - np.conj(ds.rankin_selberg_continued(4.2 + 1j, delta, delta))) <= 1e-10 * abs(a)


def test_omega_vanishes_right_of_half(delta):
    for s in (0.5, 0.7 + 3j, 2.0):
        assert ds.omega(s, ShiftParams(1), delta, delta) == 0


def test_omega_finite_at_point_two(delta):
    v = ds.omega(0.2, ShiftParams(1), delta, delta)
    assert np.isfinite(v) and v != 0
    terms = ds.omega_terms(0.2, ShiftParams(1), delta, delta, 2000)
    assert len(terms) == 1 and terms[0][3] != 0


def test_omega_kronecker_branch(delta):
    # at sigma = 1/2 - l exactly the second term is dropped
    terms = ds.omega_terms(-0.5 + 2j, ShiftParams(1), delta, delta, 2000)
    assert [t[0] for t in terms] == [0, 1]
    assert terms[1][3] == 0 and terms[0][3] != 0


def test_omega_level_guard(delta):
    with pytest.raises(UnsupportedError):
        ds.omega(0.2, ShiftParams(1, N0=6), delta, delta)


@pytest.mark.parametrize("l1,l2,h", [(1, 1, 1), (2, 3, 5), (3, 2, 7)])
def test_shift_set_brute_force(l1, l2, h):
    m1, m2 = shift_pairs(l1, l2, h, 1000)
    got = set(zip(m1.tolist(), m2.tolist()))
    want = {(a, b) for b in range(1, 1001) for a in range(1, (l2 * 1000 + h) // l1 + 2) if l1 * a == l2 * b + h}
    assert got == want


def test_delta_limit_monotone(delta):
    d0 = D(delta, 2).value
    errs = [abs(D(delta, 2, d=d).value - d0) for d in (0.1, 0.01, 0.001)]
    assert errs[0] > errs[1] > errs[2]


def test_h_envelope(delta):
    C = max(abs(D(delta, 2, h=h, M=2000).value) / (1 + h) ** 5.5 for h in range(1, 101))
    assert np.isfinite(C) and C < 1e3


def test_d_limit_weight():
    sp = ShiftParams(1)
    ref = sf.gamma(13) * (4 * math.pi) ** -13 * 3 / math.pi
    assert abs(ds.d_limit_weight(2, 12, sp) - ref) < 1e-14 * abs(ref)


def test_query_validation(delta):
    with pytest.raises(DomainError):
        ds.DSeriesQuery(2, ShiftParams(1), -0.1, 10, delta, delta)
    with pytest.raises(DomainError):
        ds.rankin_selberg_inner(0.9, delta, delta, 10)
    assert math.isinf(D(delta, 0.5).tail_bound)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 0.4), st.floats(-3, 3), st.floats(0.1, 6))
def test_gamma_ratio_is_limit_kernel(a, b, t):
    s = complex(a, b)
    poles = [0.5 + e * 1j * t - n for e in (1, -1) for n in range(6)]
    if min(abs(s - p) for p in poles) < 1e-3:
        return
    lhs = ds.gamma_ratio(s, t)
    rhs = 2 ** (s - 0.5) * m_limit(s, 1j * t) / math.sqrt(math.pi)
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_spectral_file(tmp_path):
    p = tmp_path / "spec.txt"
    p.write_text("# t_re t_im h rho_re rho_im innerV_re innerV_im\n"
                 "9.5336952613 0 1 1.0 0 0.1 0.02\n"
                 "9.5336952613 0 2 -1.5 0 0.1 0.02\n")
    data = ds.load_spectral(p)
    assert len(data) == 1 and data[0].rho_minus_h == {1: 1.0, 2: -1.5}
    bad = tmp_path / "bad.txt"
    bad.write_text("1 0 1 1 0 0\n")
    with pytest.raises(ParseError):
        ds.load_spectral(bad)
    with pytest.raises(DomainError):
        ds.SpectralDatum(0.2 + 0.3j)
    with pytest.raises(UnsupportedError):
        ds.SpectralDatum(0)


def test_cusp_term_plugin():
    d = ds.SpectralDatum(9.53, {1: 0.8 - 0.1j}, 0.02 + 0.01j)
    s = -6.3 + 0.5j
    ref = ((4 * math.pi) ** 12 / (2 * sf.gamma(s + 11)) * np.conj(0.8 - 0.1j)
           * ds.gamma_ratio(s, 9.53) * np.conj(0.02 + 0.01j))
    assert abs(ds.cusp_term(s, 1, 12, d) - ref) <= 1e-14 * abs(ref)
    with pytest.raises(NoDataError):
        ds.cusp_term(s, 2, 12, d)


def test_spectral_empty_modes(delta):
    sp = ShiftParams(1)
    with pytest.raises(NoDataError):
        ds.d_spectral(-6.3 + 0.5j, sp, [], delta, delta)
    v = ds.d_spectral(-6.3 + 0.5j, sp, [], delta, delta, allow_empty=True, T=2.0, nodes=8)
    assert v.cusp == 0 and any("continuous-only" in w for w in v.warnings)
    assert np.isfinite(v.value) and v.value == v.cont + v.omega
