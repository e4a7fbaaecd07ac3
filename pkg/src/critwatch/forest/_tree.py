"""Numba kernels for CART growth and prediction.

Rows are weighted: duplicated rows (bootstrap repeats, minority
replication) collapse to one physical row with an integer weight, which
produces exactly the same splits as materializing the duplicates. Feature
subsets per node come from an inline xorshift generator so tree growth is
reproducible from a single integer seed. Ties in Gini gain resolve to the
lowest feature index, then the lowest threshold, via strict improvement
scanning in ascending order.

Zero-gain splits are taken (a node stops only when pure, size- or
depth-limited, or nothing varies); structure like XOR is only reachable
through them. When every feature in the drawn subset is constant within
the node, remaining features are inspected in ascending order until one
yields a valid partition.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NO_GAIN = -1e300


@njit(cache=True, inline="always")
def _next_rand(state):
    x = np.uint64(state)
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    return x, x * np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True)
def _scan_feature(X, y, w, idx, lo, hi, f, min_leaf, npos, nneg, vals, wp, wn):
    """Best (gain, threshold) for one feature within idx[lo:hi]; gain is
    NO_GAIN when no valid threshold exists."""
    nrow = hi - lo
    m = npos + nneg
    fm = float(m)
    parent_gini = 1.0 - ((npos * npos + nneg * nneg) / (fm * fm))
    for i in range(nrow):
        vals[i] = X[idx[lo + i], f]
    order = np.argsort(vals[:nrow], kind="mergesort")
    for i in range(nrow):
        row = idx[lo + order[i]]
        if y[row] == 1:
            wp[i] = w[row]
            wn[i] = 0
        else:
            wp[i] = 0
            wn[i] = w[row]
    best_gain = NO_GAIN
    best_t = 0.0
    lp = 0
    ln = 0
    prev = vals[order[0]]
    for i in range(nrow - 1):
        lp += wp[i]
        ln += wn[i]
        v = vals[order[i + 1]]
        if v == prev:
            continue
        nl = lp + ln
        nr = m - nl
        if nl < min_leaf or nr < min_leaf:
            prev = v
            continue
        rp = npos - lp
        rn = nneg - ln
        fl = float(nl)
        fr = float(nr)
        gl = 1.0 - ((lp * lp + ln * ln) / (fl * fl))
        gr = 1.0 - ((rp * rp + rn * rn) / (fr * fr))
        gain = parent_gini - (fl * gl + fr * gr) / fm
        if gain > best_gain + 1e-15 or best_gain == NO_GAIN:
            best_gain = gain
            best_t = prev + 0.5 * (v - prev)
        prev = v
    return best_gain, best_t


@njit(cache=True)
def grow_tree(X, y, w, max_depth, min_leaf, n_feat_split, seed):
    """Grow one CART on weighted rows; returns flat node arrays.

    Node arrays: feature (-1 for leaves), threshold, left/right child ids,
    and weighted class counts. Splits maximize Gini impurity gain over
    midpoint thresholds between distinct sorted values.
    """
    n, d = X.shape
    cap = 4 * n + 16
    feat = np.full(cap, -1, dtype=np.int32)
    thresh = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    pos = np.zeros(cap, dtype=np.int64)
    neg = np.zeros(cap, dtype=np.int64)

    active = np.nonzero(w > 0)[0]
    idx = active.astype(np.int64)
    n_active = idx.shape[0]

    stack = np.zeros((2 * n + 16, 4), dtype=np.int64)
    stack[0, 2] = n_active
    top = 1
    n_nodes = 1
    state = np.uint64(seed) if seed != 0 else np.uint64(0x9E3779B97F4A7C15)
    cand = np.empty(d, dtype=np.int64)
    in_subset = np.zeros(d, dtype=np.bool_)
    vals = np.empty(n_active, dtype=np.float64)
    wp = np.empty(n_active, dtype=np.int64)
    wn = np.empty(n_active, dtype=np.int64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        lo = stack[top, 1]
        hi = stack[top, 2]
        depth = stack[top, 3]

        npos = 0
        nneg = 0
        for i in range(lo, hi):
            if y[idx[i]] == 1:
                npos += w[idx[i]]
            else:
                nneg += w[idx[i]]
        m = npos + nneg
        pos[node] = npos
        neg[node] = nneg
        if (
            npos == 0
            or nneg == 0
            or (max_depth > 0 and depth >= max_depth)
            or m < 2 * min_leaf
        ):
            continue

        # Partial Fisher-Yates for the feature subset, then ascending order
        # so the lowest-index feature wins gain ties.
        for j in range(d):
            cand[j] = j
            in_subset[j] = False
        k = n_feat_split if n_feat_split < d else d
        for j in range(k):
            state, r = _next_rand(state)
            pick = j + int(r % np.uint64(d - j))
            tmp = cand[j]
            cand[j] = cand[pick]
            cand[pick] = tmp
        for a in range(1, k):
            key = cand[a]
            b = a - 1
            while b >= 0 and cand[b] > key:
                cand[b + 1] = cand[b]
                b -= 1
            cand[b + 1] = key

        best_gain = NO_GAIN
        best_f = -1
        best_t = 0.0
        for ci in range(k):
            f = cand[ci]
            in_subset[f] = True
            gain, t = _scan_feature(
                X, y, w, idx, lo, hi, f, min_leaf, npos, nneg, vals, wp, wn
            )
            if gain != NO_GAIN and (best_f < 0 or gain > best_gain + 1e-15):
                best_gain = gain
                best_f = f
                best_t = t

        if best_f < 0:
            # Every drawn feature was constant here: inspect the rest in
            # ascending order until one admits a valid partition.
            for f in range(d):
                if in_subset[f]:
                    continue
                gain, t = _scan_feature(
                    X, y, w, idx, lo, hi, f, min_leaf, npos, nneg, vals, wp, wn
                )
                if gain != NO_GAIN:
                    best_gain = gain
                    best_f = f
                    best_t = t
                    break

        if best_f < 0:
            continue

        i = lo
        j = hi - 1
        while i <= j:
            if X[idx[i], best_f] <= best_t:
                i += 1
            else:
                tmp2 = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp2
                j -= 1
        mid = i
        feat[node] = best_f
        thresh[node] = best_t
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack[top, 0] = n_nodes
        stack[top, 1] = lo
        stack[top, 2] = mid
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = n_nodes + 1
        stack[top, 1] = mid
        stack[top, 2] = hi
        stack[top, 3] = depth + 1
        top += 1
        n_nodes += 2

    return (
        feat[:n_nodes].copy(),
        thresh[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        pos[:n_nodes].copy(),
        neg[:n_nodes].copy(),
    )


@njit(cache=True)
def leaf_fractions(X, feat, thresh, left, right, pos, neg):
    """Positive-class fraction of the leaf each row lands in."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thresh[node]:
                node = left[node]
            else:
                node = right[node]
        total = pos[node] + neg[node]
        out[i] = pos[node] / total if total > 0 else 0.0
    return out
