"""Numpy Jacobi eigensolver used when the compiled kernel is unavailable.

Rotations are applied in round-robin (tournament) order: every round pairs
each index with exactly one other, the rotations of a round touch disjoint
row/column pairs and therefore commute, and a whole round is applied with a
handful of vectorized operations. n - 1 rounds (n even) make one sweep over
all off-diagonal pairs.
"""
import numpy as np


def _round_robin(n):
    players = list(range(n + (n % 2)))
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            p, q = np.array(pairs, dtype=np.intp).T
            rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a):
    off = a - np.diag(np.diag(a))
    return np.sqrt(np.sum(off * off))


def jacobi_eigh(a_in, max_sweeps, tol):
    """Return (eigenvalues, eigenvectors as columns, sweeps used or -1)."""
    a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n)
    rounds = _round_robin(n)
    for sweep in range(max_sweeps):
        if _off_norm(a) <= tol:
            return np.diag(a).copy(), v, sweep
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            with np.errstate(over="ignore"):
                big = np.abs(theta) > 1e150
                t = np.where(
                    big,
                    0.5 / np.where(big, theta, 1.0),
                    np.sign(theta + (theta == 0)) / (np.abs(theta) + np.sqrt(np.where(big, 0.0, theta) ** 2 + 1.0)),
                )
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    if _off_norm(a) <= tol:
        return np.diag(a).copy(), v, max_sweeps
    return np.diag(a).copy(), v, -1
