"""JIT-compiled edit-distance kernels shared by the scan and tree matchers.

Words are packed as int32 codepoint rows in a single matrix so a whole
candidate set can be swept in one call without per-pair Python overhead.
"""

import numpy as np
from numba import njit


def encode(word: str) -> np.ndarray:
    """Codepoint array for one word (int32, utf-32 order)."""
    if not word:
        return np.empty(0, dtype=np.int32)
    return np.frombuffer(word.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


def pack_words(words) -> tuple[np.ndarray, np.ndarray]:
    """Pack a word sequence into a (matrix, lengths) pair for the kernels."""
    lens = np.array([len(w) for w in words], dtype=np.int32)
    width = int(lens.max()) if len(words) else 1
    mat = np.zeros((max(len(words), 1), max(width, 1)), dtype=np.int32)
    for i, w in enumerate(words):
        if w:
            mat[i, : lens[i]] = encode(w)
    return mat, lens


@njit(cache=True)
def lev_distance(a, b):
    """Unit-cost Levenshtein distance over two codepoint arrays."""
    la = a.shape[0]
    lb = b.shape[0]
    # common prefix/suffix stripping keeps the DP table small
    while la > 0 and lb > 0 and a[0] == b[0]:
        a = a[1:]
        b = b[1:]
        la -= 1
        lb -= 1
    while la > 0 and lb > 0 and a[la - 1] == b[lb - 1]:
        la -= 1
        lb -= 1
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = np.arange(lb + 1, dtype=np.int32)
    cur = np.empty(lb + 1, dtype=np.int32)
    for i in range(la):
        cur[0] = i + 1
        ca = a[i]
        for j in range(lb):
            sub = prev[j] if ca == b[j] else prev[j] + np.int32(1)
            ins = prev[j + 1] + np.int32(1)
            dele = cur[j] + np.int32(1)
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            cur[j + 1] = best
        tmp = prev
        prev = cur
        cur = tmp
    return int(prev[lb])


@njit(cache=True)
def scan_distances(q, mat, lens):
    """Distances from query to every packed word (linear scan)."""
    n = mat.shape[0]
    out = np.empty(n, dtype=np.int32)
    for w in range(n):
        out[w] = lev_distance(q, mat[w, : lens[w]])
    return out


@njit(cache=True)
def tree_range_search(q, radius, mat, lens, edge_start, edge_end, edge_dist, edge_child):
    """Collect BK-tree entries within `radius` of the query.

    Node ids equal row indices into the packed word matrix; node 0 is the
    root. Returns (hit node ids, hit distances, hit count, visited count).
    """
    n = mat.shape[0]
    hits = np.empty(n, dtype=np.int32)
    dists = np.empty(n, dtype=np.int32)
    nhits = 0
    stack = np.empty(n, dtype=np.int32)
    sp = 0
    stack[sp] = 0
    sp += 1
    visited = 0
    while sp > 0:
        sp -= 1
        node = stack[sp]
        visited += 1
        d = lev_distance(q, mat[node, : lens[node]])
        if d <= radius:
            hits[nhits] = node
            dists[nhits] = d
            nhits += 1
        lo = d - radius
        hi = d + radius
        for e in range(edge_start[node], edge_end[node]):
            k = edge_dist[e]
            if lo <= k <= hi:
                stack[sp] = edge_child[e]
                sp += 1
    return hits[:nhits], dists[:nhits], nhits, visited
