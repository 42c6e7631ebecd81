"""Independent reference implementations. Nothing here imports eigenclass."""
import math
from fractions import Fraction

import mpmath


def dct_four_loop(x):
    """Direct evaluation of the unnormalized 2-D DCT double sum, pure Python."""
    n1 = len(x)
    n2 = len(x[0])
    out = [[0.0] * n2 for _ in range(n1)]
    for k1 in range(n1):
        for k2 in range(n2):
            total = 0.0
            for i in range(n1):
                inner = 0.0
                for j in range(n2):
                    inner += x[i][j] * math.cos(math.pi / n2 * (j + 0.5) * k2)
                total += inner * math.cos(math.pi / n1 * (i + 0.5) * k1)
            out[k1][k2] = total
    return out


def zigzag_by_sorting(n_rows, n_cols):
    """Zigzag as a sort key: diagonal sum first, then direction-dependent row order."""
    cells = [(r, c) for r in range(n_rows) for c in range(n_cols)]
    return sorted(cells, key=lambda rc: (rc[0] + rc[1], -rc[0] if (rc[0] + rc[1]) % 2 == 0 else rc[0]))


def exact_mean(rows):
    m = len(rows)
    return [float(sum(Fraction(r[j]) for r in rows) / m) for j in range(len(rows[0]))]


def exact_distance(a, b):
    with mpmath.workdps(50):
        return float(mpmath.sqrt(mpmath.fsum((mpmath.mpf(x) - mpmath.mpf(y)) ** 2 for x, y in zip(a, b))))


def knn_brute(train, labels, query, k):
    """Exhaustive scan + exact-majority vote with the documented tie rules."""
    dists = []
    for idx, p in enumerate(train):
        d2 = sum((a - b) * (a - b) for a, b in zip(p, query))
        dists.append((d2, idx))
    dists.sort()
    chosen = dists[:k]
    votes = {}
    dist_sum = {}
    for d2, idx in chosen:
        lab = labels[idx]
        votes[lab] = votes.get(lab, 0) + 1
        dist_sum[lab] = dist_sum.get(lab, []) + [math.sqrt(d2)]
    best = max(votes.values())
    tied = sorted(lab for lab, v in votes.items() if v == best)
    if len(tied) == 1:
        return tied[0]
    sums = {lab: math.fsum(dist_sum[lab]) for lab in tied}
    low = min(sums.values())
    return min(lab for lab in tied if sums[lab] == low)


def nearest_mean_brute(points, labels, n_classes, query):
    best_c, best_d = None, None
    for c in range(n_classes):
        members = [p for p, l in zip(points, labels) if l == c]
        centre = [sum(col) / len(members) for col in zip(*members)]
        d = sum((a - b) ** 2 for a, b in zip(centre, query))
        if best_d is None or d < best_d:
            best_c, best_d = c, d
    return best_c


def tally(predicted, truth, n_classes):
    counts = [[0] * n_classes for _ in range(n_classes)]
    for p, t in zip(predicted, truth):
        counts[t][p] += 1
    return counts
