"""Numba kernels for CART growth and prediction over flat node arrays.

Trees live in parallel arrays indexed by node id: feature (-1 for leaves),
threshold, left/right child ids, sample count, impurity, and the leaf payload
(class counts for classification, mean target for regression). Growth is
iterative with an explicit stack and partitions a sample-index buffer in
place, so a fully grown tree allocates nothing beyond per-node scratch.

Split search tries features in a seeded random order and keeps scanning past
the subset size while no valid threshold has been found, so any node whose
samples are distinguishable by some feature does get split.
"""

import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True)
def _partition(X, idx, start, end, f, t, buf):
    """Stable partition of idx[start:end) by X[., f] <= t; returns left size."""
    nl = 0
    for i in range(start, end):
        if X[idx[i], f] <= t:
            buf[nl] = idx[i]
            nl += 1
    nr = nl
    for i in range(start, end):
        if X[idx[i], f] > t:
            buf[nr] = idx[i]
            nr += 1
    for i in range(end - start):
        idx[start + i] = buf[i]
    return nl


@njit(cache=True)
def grow_classifier(X, y, n_classes, idx, max_depth, min_leaf, mtry, seed,
                    feat, thr, left, right, nsamp, impur, value):
    """Grow a Gini CART classifier; returns the number of nodes written."""
    np.random.seed(seed)
    n = idx.shape[0]
    F = X.shape[1]
    stack = np.empty((n + 64, 4), dtype=np.int64)
    perm = np.empty(F, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    counts = np.empty(n_classes, dtype=np.int64)
    counts_l = np.empty(n_classes, dtype=np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = 0
    stack[top, 2] = n
    stack[top, 3] = 0
    top += 1
    n_nodes = 1
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        m = end - start
        counts[:] = 0
        for i in range(start, end):
            counts[y[idx[i]]] += 1
        sq = 0.0
        maxc = 0
        for c in range(n_classes):
            sq += counts[c] * counts[c]
            if counts[c] > maxc:
                maxc = counts[c]
        nsamp[node] = m
        impur[node] = 1.0 - sq / (m * m)
        for c in range(n_classes):
            value[node, c] = counts[c] / m
        feat[node] = LEAF
        if maxc == m or m < 2 * min_leaf or (max_depth >= 0 and depth >= max_depth):
            continue
        for j in range(F):
            perm[j] = j
        best_score = -1.0
        best_f = -1
        best_t = 0.0
        nonconstant = 0
        for j in range(F):
            r = j + np.random.randint(0, F - j)
            tmp = perm[j]
            perm[j] = perm[r]
            perm[r] = tmp
            f = perm[j]
            vals = np.empty(m, dtype=np.float64)
            for i in range(m):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals, kind="mergesort")
            if vals[order[0]] == vals[order[m - 1]]:
                continue
            nonconstant += 1
            counts_l[:] = 0
            sq_l = 0.0
            sq_r = sq
            for i in range(m - 1):
                c = y[idx[start + order[i]]]
                sq_l += 2.0 * counts_l[c] + 1.0
                sq_r -= 2.0 * (counts[c] - counts_l[c]) - 1.0
                counts_l[c] += 1
                nl = i + 1
                nr = m - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                a = vals[order[i]]
                b = vals[order[i + 1]]
                if b <= a:
                    continue
                score = sq_l / nl + sq_r / nr
                if score > best_score:
                    best_score = score
                    best_f = f
                    best_t = 0.5 * (a + b)
            if nonconstant >= mtry and best_f >= 0:
                break
        if best_f < 0:
            continue
        nl = _partition(X, idx, start, end, best_f, best_t, buf)
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feat[node] = best_f
        thr[node] = best_t
        left[node] = lid
        right[node] = rid
        stack[top, 0] = lid
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = rid
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True)
def grow_regressor(X, y, idx, max_depth, min_leaf, mtry, seed,
                   feat, thr, left, right, nsamp, impur, value):
    """Grow a variance-reduction CART regressor; returns the node count."""
    np.random.seed(seed)
    n = idx.shape[0]
    F = X.shape[1]
    stack = np.empty((n + 64, 4), dtype=np.int64)
    perm = np.empty(F, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = 0
    stack[top, 2] = n
    stack[top, 3] = 0
    top += 1
    n_nodes = 1
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        m = end - start
        s = 0.0
        s2 = 0.0
        for i in range(start, end):
            v = y[idx[i]]
            s += v
            s2 += v * v
        sse = s2 - s * s / m
        if sse < 0.0:
            sse = 0.0
        nsamp[node] = m
        impur[node] = sse / m
        value[node] = s / m
        feat[node] = LEAF
        if sse <= 0.0 or m < 2 * min_leaf or (max_depth >= 0 and depth >= max_depth):
            continue
        for j in range(F):
            perm[j] = j
        best_child = np.inf
        best_f = -1
        best_t = 0.0
        nonconstant = 0
        for j in range(F):
            r = j + np.random.randint(0, F - j)
            tmp = perm[j]
            perm[j] = perm[r]
            perm[r] = tmp
            f = perm[j]
            vals = np.empty(m, dtype=np.float64)
            for i in range(m):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals, kind="mergesort")
            if vals[order[0]] == vals[order[m - 1]]:
                continue
            nonconstant += 1
            sl = 0.0
            sl2 = 0.0
            for i in range(m - 1):
                v = y[idx[start + order[i]]]
                sl += v
                sl2 += v * v
                nl = i + 1
                nr = m - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                a = vals[order[i]]
                b = vals[order[i + 1]]
                if b <= a:
                    continue
                sr = s - sl
                sr2 = s2 - sl2
                child = (sl2 - sl * sl / nl) + (sr2 - sr * sr / nr)
                if child < best_child:
                    best_child = child
                    best_f = f
                    best_t = 0.5 * (a + b)
            if nonconstant >= mtry and best_f >= 0:
                break
        if best_f < 0:
            continue
        nl = _partition(X, idx, start, end, best_f, best_t, buf)
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feat[node] = best_f
        thr[node] = best_t
        left[node] = lid
        right[node] = rid
        stack[top, 0] = lid
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = rid
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True)
def tree_leaf_ids(X, feat, thr, left, right):
    """Leaf node id reached by every row."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feat[node] != LEAF:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@njit(cache=True)
def add_proba(X, feat, thr, left, right, value, out):
    """Accumulate one tree's leaf class distributions into out (n, C)."""
    n = X.shape[0]
    C = out.shape[1]
    for i in range(n):
        node = 0
        while feat[node] != LEAF:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        for c in range(C):
            out[i, c] += value[node, c]


@njit(cache=True)
def add_value(X, feat, thr, left, right, value, out):
    """Accumulate one tree's leaf means into out (n,)."""
    n = X.shape[0]
    for i in range(n):
        node = 0
        while feat[node] != LEAF:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] += value[node]
