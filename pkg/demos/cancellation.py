"""Square-root cancellation in the smoothed shifted sum
S(x; 1) = sum_m tau(m+1) tau(m) / (m(m+1))^{11/2} G(m/x),
against a control series with every normalised coefficient equal to 1.

Without cancellation |S| grows like x; the cusp form shows growth near x^{1/2}.
"""
import math

from shiftconv.forms import constant_table, delta_coefficients
from shiftconv.poincare import ShiftParams
from shiftconv.sums import cancellation_scan

xs = [2.0 ** e for e in range(10, 18)]
delta = delta_coefficients(2 ** 18 + 2)
control = constant_table(2 ** 18 + 2)

rep = cancellation_scan([1], xs, "single", ShiftParams(1), delta)
ctl = cancellation_scan([1], xs, "single", ShiftParams(1), control)

print(f"{'x':>8}  {'|S| for Delta':>14}  {'|S| control':>14}")
for a, b in zip(rep.rows, ctl.rows):
    print(f"{int(a.x):>8}  {a.absS:14.6f}  {b.absS:14.3f}")
print(f"\nfitted exponent, Delta:   {rep.slope:.4f}  (bootstrap spread {rep.spread:.3f})")
print(f"fitted exponent, control: {ctl.slope:.4f}")
print(f"log2 of the ratio of the two at the largest x: {math.log2(ctl.rows[-1].absS / rep.rows[-1].absS):.1f}")
