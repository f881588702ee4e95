"""Neutrices and external numbers: arithmetic that keeps track of imprecision.

A neutrix is a convex additive group of reals acting as an order of
magnitude: ``o`` holds everything infinitesimal, ``L`` everything limited,
``e^q*o`` and ``e^q*L`` their shifted copies along powers of the scale
generator e, ``M`` the microhalo below every power, and ``R`` the whole
line.  An external number is a series representative plus one of these
groups, e.g. ``5 + o`` meaning "5 up to an infinitesimal".
"""

from flexnum import dsl
from flexnum.extnum import div, from_neutrix, ge, gt, le, monomial, subset
from flexnum.scale import MICRO, OSLASH, POUND, pound

o = from_neutrix(OSLASH)
L = from_neutrix(POUND)

print("== neutrix algebra ==")
print(f"o + e*L      = {OSLASH + pound(1)}        (the union wins)")
print(f"o * e*L      = {OSLASH * pound(1)}      (idempotents multiply, exponents add)")
print(f"3 * o        = {OSLASH.scaled(3)}        (groups absorb appreciable factors)")
print(f"e * M        = {MICRO.scaled(1, 1)}        (the microhalo absorbs any finite shift)")

print()
print("== canonical forms ==")
x = monomial(1) + monomial(1, 2) + o
print(f"1 + e^2 + o  = {x}    (e^2 is swallowed by o)")
y = monomial(1, 1) + from_neutrix(pound(1))
print(f"e + e*L      = {y}      (a representative inside its own noise is noise)")

print()
print("== arithmetic ==")
a = monomial(5) + o
print(f"(5+o) - (5+o) = {a - a}     (self-difference keeps the imprecision)")
u = dsl.parse_extnum("1/w + o")
w = dsl.parse_extnum("w^2 + w*L")
print(f"(1/w + o)(w^2 + w*L) = {u * w}")
print(f"1/(1 + o)    = {div(monomial(1), monomial(1) + o)}")
print(f"1/(w + L)    = {div(monomial(1), dsl.parse_extnum('w + L'))}")

print()
print("== order: two quantifier patterns, not a total order ==")
eps = monomial(1, 1)
print(f"1 + e*L > o      : {gt(monomial(1) + from_neutrix(pound(1)), o)}")
print(f"o >= L           : {ge(o, L)}   (every infinitesimal has a limited below it)")
print(f"L <= o           : {le(L, o)}  (but not the other way around!)")
print(f"e <= o and e >= o: {le(eps, o)} {ge(eps, o)}   (containment makes both true)")
print(f"e inside o       : {subset(eps, o)}")
print(f"|{-monomial(2) + o}|        = {abs(-monomial(2) + o)}")
