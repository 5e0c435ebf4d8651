"""Slow, direct reference implementations used only by the tests.

Each one is a literal transcription of the procedure it checks, written
without numpy tricks and sharing no code with ``probseg``.
"""

import itertools
import sys

# the recursive oracle can go one level per frame on monotone streams
sys.setrecursionlimit(max(sys.getrecursionlimit(), 30000))


def naive_trim(probs, a, b, thr):
    """Shrink [a, b) to first/last frame with p > thr; None when nothing is left."""
    i = a
    while i < b and not probs[i] > thr:
        i += 1
    if i == b:
        return None
    j = b - 1
    while not probs[j] > thr:
        j -= 1
    return (i, j + 1)


def naive_pdac(probs, max_len, min_len, thr):
    """Recursive divide-and-conquer, transcribed step by step."""
    probs = [float(p) for p in probs]
    segments = []

    def length(s):
        return 0 if s is None else s[1] - s[0]

    def recursive_split(sgm):
        a, b = sgm
        if b - a < max_len:
            segments.append(sgm)
            return
        indices = sorted(range(a, b), key=lambda k: (probs[k], k))
        for k in indices:
            sgm_a = naive_trim(probs, a, k, thr)
            sgm_b = naive_trim(probs, k + 1, b, thr)
            if length(sgm_a) > min_len and length(sgm_b) > min_len:
                recursive_split(sgm_a)
                recursive_split(sgm_b)
                return
        segments.append(sgm)

    if probs:
        recursive_split((0, len(probs)))
    return segments


def naive_filter(max_len, min_len, thr, lerp_min, lerp_max):
    out = []
    for i in range(max_len):
        if i < min_len:
            out.append(0.0)
        elif i < lerp_min:
            out.append(thr * (i - min_len) / (lerp_min - min_len))
        elif i < lerp_max:
            out.append(thr)
        else:
            out.append(thr + (1 - thr) * (i - lerp_max + 1) / (max_len - lerp_max))
    return out


def naive_pthr(probs, thrs, thr):
    """Frame-by-frame threshold scan."""
    probs = [float(p) for p in probs]
    max_len = len(thrs)
    out = []
    start = 0
    while start < len(probs):
        if probs[start] <= thr:
            start += 1
            continue
        end = min(start + max_len, len(probs))
        for i in range(start + 1, end):
            if probs[i] <= thrs[i - start]:
                end = i
                break
        out.append((start, end))
        start = end
    return out


def naive_sma(probs, n_ma):
    probs = [float(p) for p in probs]
    if n_ma <= 1:
        return probs
    out = []
    for i in range(len(probs)):
        window = probs[max(0, i - n_ma + 1) : i + 1]
        out.append(sum(window) / len(window))
    return out


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i in range(1, len(a) + 1):
        cur = [i] + [0] * len(b)
        for j in range(1, len(b) + 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1]))
        prev = cur
    return prev[-1]


def brute_force_align(hyp, refs):
    """Try every boundary placement; keep the cheapest, earliest on ties."""
    n = len(hyp)
    best = None
    for cuts in itertools.combinations_with_replacement(range(n + 1), len(refs) - 1):
        bounds = (0,) + cuts + (n,)
        spans = [(bounds[k], bounds[k + 1]) for k in range(len(refs))]
        cost = sum(levenshtein(hyp[a:b], r) for (a, b), r in zip(spans, refs))
        if best is None or cost < best[0]:  # combinations come out in lexicographic order
            best = (cost, spans)
    return best
