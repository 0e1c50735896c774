import random

import pytest

from cms.dyadic import D0, Dyadic, interval_max_metric


@pytest.fixture
def rng():
    return random.Random(20240811)


def random_dyadic(rng, exp_max=12, lo=0, hi=None):
    exp = rng.randrange(0, exp_max + 1)
    top = (1 << exp) if hi is None else hi
    return Dyadic(rng.randrange(lo, top + 1), exp)


def brute_force_frechet(P, Q, cap=None):
    """Exhaustive min-over-monotone-couplings of the max pairwise distance.

    Plain recursive enumeration with an admissible cutoff; independent of the
    DP recurrence it checks.
    """
    best = [None]
    calls = [0]

    def rec(i, j, cur):
        calls[0] += 1
        if cap is not None and calls[0] > cap:
            raise RuntimeError("oracle budget exceeded")
        d = interval_max_metric(P[i], Q[j])
        if d > cur:
            cur = d
        if best[0] is not None and cur >= best[0]:
            return
        if i == len(P) - 1 and j == len(Q) - 1:
            best[0] = cur
            return
        if i < len(P) - 1:
            rec(i + 1, j, cur)
        if j < len(Q) - 1:
            rec(i, j + 1, cur)
        if i < len(P) - 1 and j < len(Q) - 1:
            rec(i + 1, j + 1, cur)

    rec(0, 0, D0)
    return best[0]


def threshold_frechet(P, Q):
    """Independent oracle: smallest pairwise distance t such that (0,0)
    reaches (end,end) through pairs with distance <= t via monotone steps."""
    p, q = len(P), len(Q)
    dists = sorted({interval_max_metric(P[i], Q[j]) for i in range(p) for j in range(q)})

    def reachable(t):
        if interval_max_metric(P[0], Q[0]) > t:
            return False
        ok = [[False] * q for _ in range(p)]
        ok[0][0] = True
        for i in range(p):
            for j in range(q):
                if i == j == 0 or interval_max_metric(P[i], Q[j]) > t:
                    continue
                if (i and ok[i - 1][j]) or (j and ok[i][j - 1]) or (i and j and ok[i - 1][j - 1]):
                    ok[i][j] = True
        return ok[p - 1][q - 1]

    lo, hi = 0, len(dists) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if reachable(dists[mid]):
            hi = mid
        else:
            lo = mid + 1
    return dists[lo]
