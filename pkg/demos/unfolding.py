"""The truncated Poincare series P_{h,Y}(z, s; delta) paired with y^k f(z) conj(g(z))
for f = g = Delta, computed two ways: by quadrature over the fundamental domain
and through the unfolded Dirichlet series. Also shows that the unfolded pairing
tends to a multiple of the shifted series D(s; h) as Y grows and delta shrinks.
"""
import math
import time

from shiftconv import specfun as sf
from shiftconv.dseries import DSeriesQuery, d_truncated
from shiftconv.forms import delta_coefficients
from shiftconv.poincare import (ShiftParams, TruncationWindow, petersson_inner_fd, poincare_array,
                                poincare_fd_mesh, unfolded_inner, v_product, volume)

f = delta_coefficients(2001)
sp, w = ShiftParams(1), TruncationWindow(10, 0.5)

t0 = time.perf_counter()
fd = petersson_inner_fd(lambda z: poincare_array(z, 2, sp, w), lambda z: v_product(z, f, f), 1,
                        poincare_fd_mesh(sp, w))
t1 = time.perf_counter()
u = unfolded_inner(2, sp, w, f, f, 1000)
print(f"fundamental-domain quadrature  {fd.real:+.15e}   ({t1 - t0:.1f} s)")
print(f"unfolded series (m <= 1000)    {u.value.real:+.15e}   tail bound {u.tail_bound:.1e}")
print(f"relative difference            {abs(fd - u.value) / abs(u.value):.2e}")

print("\nOpening the window (Y -> infinity, delta -> 0):")
D = d_truncated(DSeriesQuery(2, sp, 0.0, 2000, f, f)).value
ref = sf.gamma(13) * (4 * math.pi) ** -13 / volume(1) * D
for Y, d in ((10, 0.5), (1e3, 1e-3), (1e6, 1e-9)):
    v = unfolded_inner(2, sp, TruncationWindow(Y, d), f, f, 2000).value
    print(f"  Y={Y:>9.0e} delta={d:.0e}:  {v.real:+.12e}   vs Gamma(13)(4 pi)^-13 D(2;1)/vol = {ref.real:+.12e}")
