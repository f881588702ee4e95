"""Order relations versus quantifier-exhaustive evaluation over samples.

For 1000 random canonical pairs and each of the four relations, the symbolic
decision must agree with the sampled-subset semantics at both default scale
values, whenever the pair clears the model's buffer.
"""

import random

import support
from flexnum.extnum import ge, gt, le, lt, subset

N_PAIRS = 1000


def test_relations_agree_with_sampled_quantifiers(conc):
    rng = random.Random(7000 + int(1 / conc.eps0))
    pairs = [(support.rand_extnum(rng), support.rand_extnum(rng)) for _ in range(N_PAIRS)]
    checked = 0
    skipped = 0
    for i, (a, b) in enumerate(pairs):
        if a.neutrix.is_full or b.neutrix.is_full:
            skipped += 1
            continue
        for rel, fn in (("lt", lt), ("le", le), ("gt", gt), ("ge", ge)):
            got = fn(a, b)
            verdict = support.order_oracle(rel, a, b, got, conc, stream=i)
            assert verdict != support.DISAGREE, (rel, str(a), str(b), got)
            checked += verdict == support.AGREE
        if subset(a, b):
            verdict = support.order_oracle("subset", a, b, True, conc, stream=i)
            assert verdict != support.DISAGREE, (str(a), str(b))
            checked += verdict == support.AGREE
    # The buffer gate must not be degenerate: most decisions really run.
    assert checked > 2 * N_PAIRS
