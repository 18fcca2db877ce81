"""The amplified second moment over characters mod Q and its growth in Q.

For each prime Q in [11, 101] the proxy Q^{-3/4} sqrt(S) is maximised over
x in {Q/8, Q/4, Q/2, Q}; the log-slope in Q is compared with 3/8. Along the way
the Parseval identity and the opened-square (congruence) form are checked.
"""
from shiftconv.amplifier import (AmplifierConfig, amplified_s, amplified_s_congruence, parseval_decompose,
                                  subconvexity_scan)
from shiftconv.forms import constant_table, delta_coefficients, primes_upto

f = delta_coefficients(210)
cfg = AmplifierConfig(31)
print(f"Q = 31, amplifier primes {cfg.primes}, character index {cfg.chi}")
for x in cfg.x_grid:
    S = amplified_s(cfg, f, x=x)
    C = amplified_s_congruence(cfg, f, x=x)
    lhs, rhs, dev = parseval_decompose(cfg, f, x=x)
    print(f"  x={x:6.3f}  S={S:12.6f}  congruence form {C.real:12.6f}  Parseval deviation {dev:.1e}")

Qs = [int(p) for p in primes_upto(101) if p >= 11]
rep = subconvexity_scan(Qs, f)
ctl = subconvexity_scan(Qs, constant_table(210))
print(f"\n{'Q':>4}  {'proxy (Delta)':>14}  {'proxy (control)':>16}")
for (Q, a), (_, b) in zip(rep.per_Q, ctl.per_Q):
    print(f"{Q:>4}  {a:14.6f}  {b:16.6f}")
print(f"\nlog-slope in Q: Delta {rep.slope:.4f}, control {ctl.slope:.4f}; reference exponent {rep.target}")
