"""Deterministic fixture builders shared across test modules."""

from __future__ import annotations

import random
from fractions import Fraction

import mmsfair as mf


def random_instance(seed, n, m, bound=20, min_value=0, rational=False) -> mf.Instance:
    """Seeded random instance; min_value=1 guarantees positive rows."""
    rng = random.Random(seed)
    goods = [f"g{j}" for j in range(1, m + 1)]
    vals = {}
    for a in range(n):
        row = {}
        for g in goods:
            if rational:
                row[g] = Fraction(rng.randint(min_value, bound), rng.randint(1, bound))
            else:
                row[g] = Fraction(rng.randint(min_value, bound))
        vals[a] = row
    return mf.make_instance(n, goods, vals)


def random_complete_allocation(rng: random.Random, instance: mf.Instance) -> mf.Allocation:
    """Assign every real good to a uniformly random agent."""
    bundles = {a: set() for a in instance.agents}
    for g in instance.goods:
        bundles[rng.choice(instance.agents)].add(g)
    return mf.Allocation(bundles={a: frozenset(b) for a, b in bundles.items()},
                         complete=True)


def rule4_dummy_instance() -> mf.Instance:
    """Frozen 3-agent instance where only rule 4 applies at alpha = 7/9.

    All rows are [209, 200, 130, 71, 70, 70, 65] with maximin share 270
    (cells {g1,g7}, {g2,g4}, {g3,g5,g6}); rule 4's bundle {g1,g7} is worth
    274, so each survivor's dummy value is 4.
    """
    row = [209, 200, 130, 71, 70, 70, 65]
    goods = [f"g{j}" for j in range(1, 8)]
    vals = {a: {g: Fraction(v) for g, v in zip(goods, row)} for a in range(3)}
    return mf.make_instance(3, goods, vals)


def dummy_survives_to_bagfill_instance() -> mf.Instance:
    """Frozen 3-agent instance whose solve carries a positive dummy into
    bag filling.

    The row sums to 2700 and admits the perfect partition {g1,g8},
    {g2,g3}, {g4,g5,g6,g7}, pinning the maximin share to exactly 900, so
    rule 4's bundle {g1,g7} = 905 yields a dummy worth 5.  The residual
    five goods plus dummy are totally irreducible at alpha = 7/9, so the
    dummy survives normalization into the bag-fill input.
    """
    row = [690, 460, 440, 240, 225, 220, 215, 210]
    goods = [f"g{j}" for j in range(1, 9)]
    vals = {a: {g: Fraction(v) for g, v in zip(goods, row)} for a in range(3)}
    return mf.make_instance(3, goods, vals)
