"""Eisenstein Fourier coefficients at cusps 1/w, zeta_{a,Q}, and the residue data K, k."""
import math

import numpy as np
import pytest

from shiftconv import specfun as sf
from shiftconv.eisenstein import (CuspLabel, _local_q, cusp_coefficient_mass, cusps, k_capital, k_small,
                                  rho_closed, rho_direct, zeta_aq_closed, zeta_aq_direct)
from shiftconv.errors import DomainError, PoleError


def test_cusps_and_labels():
    assert [c.w for c in cusps(6)] == [1, 2, 3, 6]
    with pytest.raises(DomainError):
        CuspLabel(4, 6)
    with pytest.raises(DomainError):
        CuspLabel(1, 12)


@pytest.mark.parametrize("N", [1, 6])
def test_rho_closed_vs_direct(N):
    ns = list(range(1, 11))
    for c in cusps(N):
        for n, d in zip(ns, rho_direct(1.5, ns, c, C_max=2000)):
            assert abs(rho_closed(1.5, n, c) - d.value) <= 1e-6


def test_rho_examples():
    c = CuspLabel(1, 1)
    assert abs(rho_closed(2, 1, c) - 1 / sf.zeta(4)) < 1e-14
    assert abs(rho_direct(2, 1, c).value - 1 / sf.zeta(4)) < 1e-6
    assert abs(rho_closed(1, 1, c) - 6 / math.pi ** 2) < 1e-14
    with pytest.raises(DomainError):
        rho_direct(1, 1, c)


@pytest.mark.parametrize("N,Q", [(1, 1), (1, 5), (6, 5), (6, 12)])
def test_zeta_aq_closed_vs_direct(N, Q):
    for c in (cusps(N)[0], cusps(N)[-1]):
        a = zeta_aq_closed(3, 0.3, c, Q)
        b = zeta_aq_direct(3, 0.3, c, Q, H_max=100_000).value
        assert abs(a - b) <= 1e-4 * abs(a)


def test_zeta_aq_level_one_trivial():
    c = CuspLabel(1, 1)
    for sp_, z in ((3, 0.3), (2.5 + 1j, 0.2 - 0.4j)):
        assert abs(zeta_aq_closed(sp_, z, c, 1) - sf.zeta(sp_ + z) * sf.zeta(sp_ - z)) < 1e-13


@pytest.mark.parametrize("Q", [1, 5, 12, 49])
def test_zeta_aq_even_in_z_at_level_one(Q):
    c = CuspLabel(1, 1)
    for z in (0.3, 0.1 + 2j):
        a, b = zeta_aq_closed(3, z, c, Q), zeta_aq_closed(3, -z, c, Q)
        assert abs(a - b) <= 1e-12 * abs(a)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_local_factor_z_to_zero(alpha):
    q, sp_ = 3, 2.7
    sym = (alpha + 1) - alpha * q ** (-sp_)
    assert abs(_richardson(lambda z: _local_q(q, alpha, sp_, z), 0.0) - sym) < 1e-9


def _richardson(fn, x0, eps=(1e-4, 1e-5, 1e-6)):
    # f(e) = L + a e + b e^2 on geometric offsets
    v = [fn(x0 + e) for e in eps]
    r = eps[0] / eps[1]
    v1 = [(r * v[i + 1] - v[i]) / (r - 1) for i in range(2)]
    return (r * r * v1[1] - v1[0]) / (r * r - 1)


@pytest.mark.parametrize("N,Q", [(1, 1), (1, 5), (6, 5), (6, 12)])
@pytest.mark.parametrize("sign", ["+", "-"])
def test_k_capital_numeric_limit(N, Q, sign):
    sp_ = 1.7 + 0.2j
    z0 = (1 - sp_) if sign == "+" else -(1 - sp_)
    for c in cusps(N):
        num = _richardson(lambda z: (z - z0) * zeta_aq_closed(sp_, z, c, Q), z0) / sf.zeta(2 * sp_ - 1)
        K = k_capital(sp_, c, Q, sign)
        assert abs(num - K) <= 1e-7 * max(1.0, abs(K))


@pytest.mark.parametrize("N,Q", [(1, 5), (6, 5), (1, 12)])
@pytest.mark.parametrize("sign", ["+", "-"])
def test_k_small_numeric_limit(N, Q, sign):
    z = 0.2
    e = 1 if sign == "+" else -1
    s0 = 1 + e * z
    for c in cusps(N):
        num = _richardson(lambda s: (s - s0) * zeta_aq_closed(s, z, c, Q), s0) / sf.zeta(1 + e * 2 * z)
        k = k_small(z, c, Q, sign)
        assert abs(num - k) <= 1e-7 * max(1.0, abs(k))


def test_k_small_examples():
    assert abs(k_small(0.3, CuspLabel(1, 1), 1, "-") - 1) < 1e-15
    assert k_small(0.3, CuspLabel(2, 2), 1, "-") == 0
    # alpha enters k+ through q^((alpha + 1) 2 z) only: Q = 3 against Q = 9
    z, q, c = 0.2 + 0.1j, 3, CuspLabel(1, 1)

    def disp(a):
        return q ** (-a * z) * ((1 - 1 / q) - q ** ((a + 1) * 2 * z) * (1 - q ** (-(1 + 2 * z)))) / (1 - q ** (2 * z))
    r = k_small(z, c, 9, "+") / k_small(z, c, 3, "+")
    assert abs(r - disp(2) / disp(1)) < 1e-13 * abs(r)


def test_k_capital_pole():
    with pytest.raises(PoleError):
        k_capital(1, CuspLabel(1, 1), 1, "+")


def test_k_capital_level_one_antisymmetric():
    # zeta_{1,Q} is even in z, so the residues at +-(1 - s') are negatives
    for Q in (1, 5, 13):
        a = k_capital(1.7, CuspLabel(1, 1), Q, "+")
        b = k_capital(1.7, CuspLabel(1, 1), Q, "-")
        assert abs(a + b) < 1e-14 * abs(a)


def test_cusp_coefficient_mass_growth():
    ts = np.linspace(1, 30, 30)
    for N in (1, 6):
        v = [max(cusp_coefficient_mass(t, m, N) for m in range(1, 21)) for t in ts]
        slope = np.polyfit(np.log(1 + ts), np.log(v), 1)[0]
        assert slope <= 0.3
