"""Coefficient tables, arithmetic helpers, Kloosterman sums and Dirichlet characters."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftconv import forms
from shiftconv.errors import DomainError, GapError, ParseError

# direct divisor loop over 1, 2, 3, 4, 6, 12 (mpmath, 30 digits)
SIGMA_12 = complex(2.07788805552474360429206763151, 0.71261874991708944251579007571)


@pytest.fixture(scope="module")
def delta():
    return forms.delta_coefficients(10_000)


def test_tau_small_values(delta):
    assert [int(v) for v in forms.tau_exact(10)] == [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]
    assert delta.a[1] == 1 and delta.k == 12


def test_tau_fft_against_schoolbook():
    assert forms.tau_exact(3000) == forms.tau_schoolbook(3000)


def test_hecke_multiplicativity(delta):
    t = delta.exact
    for m in range(2, 101):
        for n in range(m + 1, 10_000 // m + 1):
            if math.gcd(m, n) == 1:
                assert t[m * n - 1] == t[m - 1] * t[n - 1]


def test_hecke_prime_power_recursion(delta):
    t = delta.exact
    for p in (2, 3, 5, 7):
        # tau(p^2) = tau(p)^2 - p^11
        assert t[p * p - 1] == t[p - 1] ** 2 - p ** 11


def test_deligne_bound(delta):
    p = forms.primes_upto(10_000)
    assert np.all(np.abs(delta.A[p]) <= 2)


def test_load_examples(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("1 1 0\n2 -24 0\n")
    t = forms.load_coefficients(f)
    assert t.a[2] == -24 and t.M == 2
    empty = tmp_path / "e.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(ParseError):
        forms.load_coefficients(empty)
    gap = tmp_path / "g.txt"
    gap.write_text("1 1 0\n3 252 0\n")
    with pytest.raises(GapError):
        forms.load_coefficients(gap)
    bad = tmp_path / "b.txt"
    bad.write_text("1 1 0\n2 x 0\n")
    with pytest.raises(ParseError) as ei:
        forms.load_coefficients(bad)
    assert ei.value.lineno == 2


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    a = np.concatenate([[0], rng.normal(size=200) + 1j * rng.normal(size=200)])
    t = forms.CoefficientTable(forms.CuspFormSpec(source="file"), a)
    p = tmp_path / "rt.txt"
    forms.save_coefficients(t, p)
    back = forms.load_coefficients(p)
    assert np.array_equal(back.a, t.a)


def test_table_lookup_errors(delta):
    with pytest.raises(GapError):
        delta.require(delta.M + 1)
    with pytest.raises(GapError):
        delta[0]


def test_spec_validation():
    with pytest.raises(DomainError):
        forms.CuspFormSpec(weight=3)
    with pytest.raises(DomainError):
        forms.CuspFormSpec(level=4)
    with pytest.raises(DomainError):
        forms.CuspFormSpec(weight=10, source="builtin-delta")


def test_divisor_sigma_examples():
    assert forms.divisor_sigma(0, 6) == 4
    assert forms.divisor_sigma(1, 4) == 7
    assert abs(forms.divisor_sigma(-1 + 0.5j, 12) - SIGMA_12) < 1e-13


def test_divisor_sigma_array_matches_scalar():
    arr = forms.divisor_sigma_array(-0.3 + 1j, 300, coprime_to=6)
    for n in (1, 12, 35, 97, 300):
        assert abs(arr[n] - forms.divisor_sigma(-0.3 + 1j, n, coprime_to=6)) < 1e-12


def test_arithmetic_helpers():
    assert forms.euler_phi(12) == 4
    assert [forms.mobius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]
    assert forms.divisors(12) == [1, 2, 3, 4, 6, 12]
    assert forms.prime_divisors(60) == [2, 3, 5]


def test_character_examples():
    assert len(forms.dirichlet_characters(7)) == 6
    ch = forms.dirichlet_characters(8)
    assert len(ch) == 4
    pairs = {(int(round(r[3].real)), int(round(r[5].real))) for r in ch.values}
    assert pairs == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    assert np.all(ch.values.imag == 0)


@pytest.mark.parametrize("Q", [1, 2, 5, 8, 12, 13, 30, 49, 60])
def test_character_orthogonality(Q):
    ch = forms.dirichlet_characters(Q)
    assert len(ch) == forms.euler_phi(Q)
    G = ch.values.T @ np.conj(ch.values)  # sum_psi psi(a) conj psi(b)
    units = np.array([math.gcd(a, Q) == 1 for a in range(Q)])
    expect = forms.euler_phi(Q) * np.diag(units.astype(float))
    assert np.max(np.abs(G - expect)) <= 1e-12


@pytest.mark.parametrize("Q", list(range(2, 61)))
def test_character_closure(Q):
    ch = forms.dirichlet_characters(Q)
    rows = ch.values
    for i in range(len(rows)):
        for j in range(i, len(rows)):
            prod = rows[i] * rows[j]
            assert np.min(np.max(np.abs(rows - prod), axis=1)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 80), st.integers(0, 200), st.integers(0, 200))
def test_character_complete_multiplicativity(Q, a, b):
    ch = forms.dirichlet_characters(Q)
    for r in ch.values:
        assert abs(r[(a * b) % Q] - r[a % Q] * r[b % Q]) < 1e-12


@settings(max_examples=80, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 60))
def test_kloosterman_symmetry_and_reality(m, n, c):
    s = forms.kloosterman(m, n, c)
    assert abs(s - forms.kloosterman(n, m, c)) < 1e-12
    assert abs(s.imag) < 1e-12


def test_kloosterman_twisted_multiplicativity():
    for c1 in range(1, 21):
        for c2 in range(1, 21):
            if math.gcd(c1, c2) != 1:
                continue
            for m, n in ((1, 1), (3, -2), (5, 7)):
                i2 = pow(c2, -1, c1) if c1 > 1 else 0
                i1 = pow(c1, -1, c2) if c2 > 1 else 0
                lhs = forms.kloosterman(m, n, c1 * c2)
                rhs = forms.kloosterman(m * i2 * i2, n, c1) * forms.kloosterman(m * i1 * i1, n, c2)
                assert abs(lhs - rhs) < 1e-9


def test_constant_table_normalisation():
    t = forms.constant_table(50)
    assert np.allclose(t.A[1:], 1)
