"""Plain DIRECT: trisection of the box, potentially optimal rectangles taken
from the lower-right convex hull of (half-diagonal, centre value) pairs.

Works on the unit cube internally; a rectangle's side along dimension ``j``
is ``3**-levels[j]``.  Levels of one rectangle differ by at most one, so the
level sum identifies its size class.
"""
import heapq

import numpy as np

DEFAULTS = {"epsilon": 1e-4}


def _half_diagonal(levels) -> float:
    return 0.5 * float(np.sqrt(np.sum(3.0 ** (-2.0 * np.asarray(levels)))))


def _hull(points, f_min, epsilon):
    """Indices of potentially optimal entries of ``points`` = [(d, f, key)] sorted by d."""
    # start at the lowest value, largest size among ties
    start = min(range(len(points)), key=lambda i: (points[i][1], -points[i][0]))
    hull = []
    for i in range(start, len(points)):
        d, f, _ = points[i]
        while len(hull) >= 2:
            d1, f1, _ = points[hull[-2]]
            d2, f2, _ = points[hull[-1]]
            # drop the middle point when it lies on or above the chord
            if (f2 - f1) * (d - d1) >= (f - f1) * (d2 - d1):
                hull.pop()
            else:
                break
        hull.append(i)
    chosen = []
    for pos, i in enumerate(hull):
        d, f, _ = points[i]
        if pos + 1 < len(hull):
            dn, fn, _ = points[hull[pos + 1]]
            slope = (fn - f) / (dn - d)
            if f - slope * d > f_min - epsilon * abs(f_min):
                continue
        chosen.append(i)
    return chosen


def direct_lite(box, rng=None, epsilon=1e-4):
    """Deterministic; ``rng`` is accepted for interface symmetry and ignored."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    dim = box.dim

    def f(unit_point):
        return box.evaluate(2.0 * unit_point - 1.0)

    centers = [np.full(dim, 0.5)]
    levels = [np.zeros(dim, dtype=int)]
    values = [f(centers[0])]
    groups = {0: [(values[0], 0)]}
    f_min = values[0]
    iterations = 0

    while not box.done:
        iterations += 1
        keys = sorted(groups, reverse=True)  # larger level sum = smaller box
        points = []
        for key in keys:
            value, idx = groups[key][0]
            points.append((_half_diagonal(levels[idx]), value, key))
        selected = [points[i][2] for i in _hull(points, f_min, epsilon)]
        for key in selected:
            if box.done:
                break
            _, idx = heapq.heappop(groups[key])
            if not groups[key]:
                del groups[key]
            lv = levels[idx].copy()
            dims = np.flatnonzero(lv == lv.min())
            delta = 3.0 ** (-(lv.min() + 1))
            trial = []
            for j in dims:
                pair = []
                for sign in (1.0, -1.0):
                    if box.done:
                        break
                    c = centers[idx].copy()
                    c[j] += sign * delta
                    pair.append((c, f(c)))
                if len(pair) < 2:
                    break
                trial.append((min(pair[0][1], pair[1][1]), int(j), pair))
            if len(trial) < len(dims):
                # budget ran out mid-division; keep what was evaluated
                heapq.heappush(groups.setdefault(int(lv.sum()), []), (values[idx], idx))
                break
            trial.sort(key=lambda t: (t[0], t[1]))
            for _, j, pair in trial:
                lv[j] += 1
                for c, v in pair:
                    centers.append(c)
                    levels.append(lv.copy())
                    values.append(v)
                    heapq.heappush(groups.setdefault(int(lv.sum()), []), (v, len(values) - 1))
                    f_min = min(f_min, v)
            levels[idx] = lv
            heapq.heappush(groups.setdefault(int(lv.sum()), []), (values[idx], idx))
    return {"iterations": iterations, "rectangles": len(values)}
