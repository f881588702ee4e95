"""Limits of flexible sequences and how neutrices move under operations.

A flexible sequence has external-number terms.  Convergence comes in grades:
u is N-convergent when it approaches the limit within every tolerance above
the neutrix N, and strongly convergent when the terms eventually sit inside
the limit set.  The striking theorem: whenever the limit is imprecise, plain
convergence already implies strong convergence.
"""

from flexnum import dsl
from flexnum.extnum import monomial
from flexnum.scale import OSLASH, POUND, ZERO
from flexnum.seq import (
    Const,
    Div,
    Mul,
    N,
    limit_arith,
    n_converges,
    n_limit,
    neutrix_seq,
    normalize,
    squeeze,
)

u = dsl.parse_seq("1/n + o")
v = dsl.parse_seq("1/n^2 + e*L")
w = dsl.parse_seq("w^2 + w*L")

print("== the product example ==")
print(f"u_n = {dsl.print_seq(u)},  v_n = {dsl.print_seq(v)},  w_n = {dsl.print_seq(w)}")
print(f"normalize(u*v) = {normalize(Mul(u, v))}")
r = n_limit(Mul(u, v))
print(f"u*v: limit {r.limit}, minimal neutrix {r.minimal_neutrix}, strong={r.strong}")
r = n_limit(Mul(u, w))
print(f"u*w: limit {r.limit}  (the noise of w scales the whole product)")

print()
print("== predictions from the operation theorems ==")
pred = limit_arith("mul", n_limit(w), n_limit(w))
act = n_limit(Mul(w, w))
print(f"w*w predicted: {pred.limit} with neutrix {pred.minimal_neutrix}")
print(f"w*w computed:  {act.limit} with neutrix {act.minimal_neutrix}")

print()
print("== the alternating sign ==")
alt = dsl.parse_seq("(-1)^n")
r = n_limit(alt)
print(f"(-1)^n: limit {r.limit}, minimal neutrix {r.minimal_neutrix}")
print(f"L-convergent to 0: {n_converges(alt, monomial(0), POUND)}")
print(f"o-convergent to 0: {n_converges(alt, monomial(0), OSLASH)}  (the oscillation needs all of L)")

print()
print("== strong convergence and its one exception ==")
r = n_limit(u)
print(f"1/n + o: strong={r.strong}  (the terms eventually sit inside o)")
shrinking = neutrix_seq(OSLASH, Div(Const(monomial(1)), N))
r = n_limit(shrinking)
print(f"o/n: limit {r.limit}, strong={r.strong}  (a precise limit is never entered)")

print()
print("== squeeze ==")
lo, mid, hi = dsl.parse_seq("-1/n"), dsl.parse_seq("(-1)^n/n"), dsl.parse_seq("1/n")
print(f"-1/n <= (-1)^n/n <= 1/n forces convergence to 0: {squeeze(lo, mid, hi, monomial(0), ZERO, ZERO)}")
