"""A walk through the kernel M(s, t, delta).

Three independent evaluations (direct quadrature, the closed hypergeometric
form, and the Mellin-Barnes continuation) are compared at a few points; then the
Barnes route is pushed left of Re s = 1/2, where it picks up poles at
s = 1/2 +- it - l, and a small circle integral recovers each residue.
"""
import math

from shiftconv import kernel as K
from shiftconv import specfun as sf


def show(s, z, d):
    q = K.KernelQuery(s, z, d)
    h, b, g = K.m_hypergeom(q).value, K.m_barnes(q).value, K.m_quadrature(q).value
    print(f"  s={s!s:>10}  t={z.imag:+.1f}  delta={d:.2f}  M={h.real:+.12e}  "
          f"|quad-hyp|={abs(g - h):.1e}  |barnes-hyp|={abs(b - h):.1e}")


print("Three routes to M(s, t, delta) on the half-plane Re s > 1/2:")
for s, z, d in ((2, 0j, 0.5), (1.2 + 0.7j, 0.3j, 0.2), (0.8 - 2j, 2j, 0.7)):
    show(s, z, d)

ref = math.pi ** 1.5 / (8 * math.sqrt(2))
print(f"\nAt delta = 2 the kernel is elementary: M(2, 0, 2) = {K.m_hypergeom(K.KernelQuery(2, 0, 2.0)).value.real:.15f}")
print(f"                                  pi^1.5 / (8 sqrt 2) = {ref:.15f}")

print("\nResidues of the continued kernel at s = 1/2 + z - l (z = 1.3i, delta = 1e-3):")
z, d = 1.3j, 1e-3
for ell in (0, 1, 2):
    c = 0.5 + z - ell
    ci = K.circle_integral(lambda s: K.m_barnes(K.KernelQuery(s, z, d)).value, c, 0.05)
    r = K.residue_s(z, ell, d, "+")
    lead = K.residue_s_leading(z, ell, "+")
    print(f"  l={ell}: circle {ci:.10f}   closed form {r:.10f}   delta->0 value {lead:.6f}")
print("  (l = 0 and l = 1 share their delta -> 0 value: the ratio -2(1/2 - z)/(2z - 1) is exactly 1)")

print("\nAt t = 0 the two poles at s = 1/2 merge into a double pole. Laurent data at delta = 1e-4:")
c2, c1 = K.laurent_fit(lambda s: K.m_hypergeom(K.KernelQuery(s, 0, 1e-4)).value, 0.5, 0.05)
print(f"  c2 = {c2.real:.12f}   (expected 1)")
print(f"  c1 = {c1.real:.12f}   (expected ln 2 - Euler gamma = {math.log(2) - sf.EULER_GAMMA:.12f})")
