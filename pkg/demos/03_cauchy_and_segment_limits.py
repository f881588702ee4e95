"""Cauchy tests and limits relative to an initial segment of the indices.

The Cauchy criterion survives the flexible setting: a sequence is
N-convergent exactly when its terms eventually stay within every tolerance
above N of each other.  Because entry into a limit set can happen in finite
(nonstandard) time, limits can also be taken with respect to an initial
segment: the same sequence shows different faces on different index scales.
"""

from flexnum import dsl
from flexnum.scale import MICRO, OSLASH, POUND, ZERO, pound
from flexnum.seq import (
    all_naturals,
    finite,
    galaxy_times,
    halo_times,
    is_cauchy,
    limit_wrt_segment,
    limited,
    n_limit,
)

print("== Cauchy grades ==")
t = dsl.parse_seq("1/n + e*L")
for nx in (ZERO, MICRO, pound(1), OSLASH, POUND):
    print(f"1/n + e*L is {str(nx):>4}-Cauchy: {is_cauchy(t, nx)}")
print("(the step noise e*L needs at least e*L of tolerance)")

print()
alt = dsl.parse_seq("(-1)^n")
print(f"(-1)^n is o-Cauchy: {is_cauchy(alt, OSLASH)}, L-Cauchy: {is_cauchy(alt, POUND)}")

print()
print("== one sequence, several regimes ==")
inv = dsl.parse_seq("1/n")
for seg in (finite(10), limited(), halo_times(1), galaxy_times(1), halo_times(2), all_naturals()):
    r = limit_wrt_segment(inv, seg)
    print(f"limit of 1/n wrt {str(seg):>9}: {r.limit}")
print("On limited indices 1/n only reaches o; near n ~ w it sits at scale e*L;")
print("globally n outruns every power of w and the limit is exactly 0.")

print()
print("== growth is tame on a bounded regime ==")
n_itself = dsl.parse_seq("n")
print(f"limit of n wrt limited indices: {limit_wrt_segment(n_itself, limited()).limit}")
print(f"limit of n globally: {n_limit(n_itself).status.value}")
geo = dsl.parse_seq("(1/2)^n")
print(f"limit of (1/2)^n wrt limited: {limit_wrt_segment(geo, limited()).limit}")
print(f"limit of (1/2)^n wrt halo:1 : {limit_wrt_segment(geo, halo_times(1)).limit} (below every scale)")
