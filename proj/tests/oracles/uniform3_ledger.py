"""Scalar recomputation of the layered exclusion ledger for the uniform
mass-3 covering (d=1, eps=1/2, delta=1/2).  Prints per-level terms and totals
for s in {1/4, 1/2, 1}; test_interaction.cpp freezes them.
"""
from fractions import Fraction

DELTA, DEN, MASS = 0.5, 2, 3.0
CLASS2_LEVELS = {1: 2, 2: 4}  # level -> number of class2 cubes (all children)


def centers(level, count):
    side = 1.0 / DEN ** level
    return [-0.5 + (i + 0.5) * side for i in range(count)]


def ledger(s):
    prev, total, simple = 0.0, 0.0, 0.0
    for n, count in sorted(CLASS2_LEVELS.items()):
        R = 8 * (1 / DELTA + 3) / DEN ** n
        chosen = []
        for c in centers(n, count):
            if all(abs(c - q) >= R / 4 for q in chosen):
                chosen.append(c)
        r = R / 2
        # ball mass of a uniform density: mass times covered length of the root box
        masses = [MASS * (min(c + r, 0.5) - max(c - r, -0.5)) for c in chosen]
        # multiplicity of closed intervals: max over endpoints
        ends = [c - r for c in chosen] + [c + r for c in chosen]
        overlap = max(sum(1 for c in chosen if abs(x - c) <= r) for x in ends)
        coef = (R ** (-2 * s) - prev) / (2 * overlap)
        prev = R ** (-2 * s)
        term = coef * sum(m - 1 for m in masses)
        simp = coef * DELTA / (1 + DELTA) * sum(masses)
        total += term
        simple += simp
        print(f"s={s} n={n} R={R} balls={len(chosen)} overlap={overlap} coef={coef!r} term={term!r}")
    print(f"s={s} total={total!r} simplified={simple!r}")


for s in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
    ledger(float(s))
