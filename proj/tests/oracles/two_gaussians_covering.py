"""Independent recursion for the d=2, eps=1/3, delta=0.3 two-bump covering.

Per-cube masses come from scipy's normal CDF; enlarged-region masses from
coordinate compression of the union of dilated boxes.  Prints the values
frozen in test_geometry.cpp.
"""
from itertools import product

from scipy.stats import norm

CENTERS = [(-0.3, -0.3), (0.3, 0.3)]
WIDTH, DELTA, DEN, TAU = 0.05, 0.3, 3, 0.375


def axis_mass(lo, hi, c):
    lo, hi = max(lo, -0.5), min(hi, 0.5)
    if hi <= lo:
        return 0.0
    return norm.cdf(hi, c, WIDTH) - norm.cdf(lo, c, WIDTH)


Z = [axis_mass(-0.5, 0.5, c[0]) * axis_mass(-0.5, 0.5, c[1]) for c in CENTERS]


def box_mass(lo, hi):
    return sum(axis_mass(lo[0], hi[0], c[0]) * axis_mass(lo[1], hi[1], c[1]) / z
               for c, z in zip(CENTERS, Z))


def cube(level, idx):
    n = DEN ** level
    return [(-0.5 + i / n) for i in idx], [(-0.5 + (i + 1) / n) for i in idx]


def union_mass(boxes):
    xs = sorted({b[0][0] for b in boxes} | {b[1][0] for b in boxes})
    ys = sorted({b[0][1] for b in boxes} | {b[1][1] for b in boxes})
    total = 0.0
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
            if any(b[0][0] < cx < b[1][0] and b[0][1] < cy < b[1][1] for b in boxes):
                total += box_mass((x0, y0), (x1, y1))
    return total


def clusters(idxs):
    left, out = set(idxs), []
    while left:
        seed = min(left)
        comp, stack = {seed}, [seed]
        left.discard(seed)
        while stack:
            a = stack.pop()
            for off in product((-1, 0, 1), repeat=2):
                b = (a[0] + off[0], a[1] + off[1])
                if b in left:
                    left.discard(b)
                    comp.add(b)
                    stack.append(b)
        out.append(sorted(comp))
    return sorted(out)


parents = [(0, 0)]
level = 0
while parents:
    level += 1
    kids = [(p[0] * DEN + a, p[1] * DEN + b) for p in parents for a in range(DEN) for b in range(DEN)]
    heavy = [k for k in kids if box_mass(*cube(level, k)) > DELTA]
    parents = []
    for comp in clusters(heavy):
        side = DEN ** -level
        dil = []
        for k in comp:
            lo, hi = cube(level, k)
            dil.append(([x - TAU * side for x in lo], [x + TAU * side for x in hi]))
        m = union_mass(dil)
        klass = 2 if m >= 1 + DELTA else 1
        print(f"level {level} class {klass} members {len(comp)} first {comp[0]} enlarged {m:.15f}")
        if klass == 2:
            parents += comp
