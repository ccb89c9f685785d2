"""Numba kernels for the persistence sweep and instrumented pooling.

Kept separate so the hot loops stay plain and cacheable; everything here
works on flat float64/int64 arrays and knows nothing about the container
types. Compilation results are cached on disk after the first call.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def sweep_barcode(order, rank, values, height, width, query_px, query_thr):
    """Union-find sweep over pixels in descending-value order.

    ``order`` lists flat indices of the strictly positive pixels, sorted by
    (value desc, flat index asc); ``rank`` maps a flat index to its position
    in that order (-1 for inactive pixels). Components merge through 4-adjacency;
    at a merge the component with the lower-ranked (elder) birth pixel survives
    and every other component dies at the merge pixel. Zero-persistence bars
    are dropped. Queries ask for the component containing ``query_px[i]`` in
    the superlevel set at ``query_thr[i]`` (sorted descending); the answer is
    the flat index of that component's birth pixel.

    Returns (merge_birth_idx, merge_death_idx, essential_birth_idx, query_root_birth).
    """
    n = height * width
    parent = np.full(n, -1, np.int64)
    birth_of = np.full(n, -1, np.int64)
    merge_birth = np.empty(order.size, np.int64)
    merge_death = np.empty(order.size, np.int64)
    n_merged = 0
    n_queries = query_px.size
    qi = 0
    answers = np.empty(n_queries, np.int64)
    roots = np.empty(4, np.int64)
    for oi in range(order.size):
        p = order[oi]
        v = values[p]
        # Pixels with value >= thr are all processed once the sweep value
        # drops below thr, so pending queries resolve here.
        while qi < n_queries and query_thr[qi] > v:
            x = query_px[qi]
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            answers[qi] = birth_of[x]
            qi += 1
        r = p // width
        c = p % width
        n_roots = 0
        for k in range(4):
            if k == 0:
                if r == 0:
                    continue
                q = p - width
            elif k == 1:
                if c == 0:
                    continue
                q = p - 1
            elif k == 2:
                if c == width - 1:
                    continue
                q = p + 1
            else:
                if r == height - 1:
                    continue
                q = p + width
            if parent[q] < 0:
                continue
            x = q
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            seen = False
            for t in range(n_roots):
                if roots[t] == x:
                    seen = True
                    break
            if not seen:
                roots[n_roots] = x
                n_roots += 1
        if n_roots == 0:
            parent[p] = p
            birth_of[p] = p
        else:
            elder = 0
            for t in range(1, n_roots):
                if rank[birth_of[roots[t]]] < rank[birth_of[roots[elder]]]:
                    elder = t
            survivor = roots[elder]
            for t in range(n_roots):
                if t == elder:
                    continue
                dying = roots[t]
                b = birth_of[dying]
                if values[b] > v:
                    merge_birth[n_merged] = b
                    merge_death[n_merged] = p
                    n_merged += 1
                parent[dying] = survivor
            parent[p] = survivor
    while qi < n_queries:
        x = query_px[qi]
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        answers[qi] = birth_of[x]
        qi += 1
    essential = np.empty(n, np.int64)
    n_essential = 0
    for i in range(n):
        if parent[i] == i:
            essential[n_essential] = birth_of[i]
            n_essential += 1
    return (
        merge_birth[:n_merged].copy(),
        merge_death[:n_merged].copy(),
        essential[:n_essential].copy(),
        answers,
    )


@njit(cache=True)
def pool3_arg(a, take_max):
    """3x3 max/min pool with replicate padding, tracking the source pixel.

    The winning source is the first extreme in row-major window order, so
    subgradient routing is deterministic. Returns (pooled, argsrc) where
    ``argsrc`` holds flat source indices.
    """
    h, w = a.shape
    out = np.empty((h, w), np.float64)
    arg = np.empty((h, w), np.int32)
    for i in range(h):
        for j in range(w):
            best = a[i, j]
            src = i * w + j
            started = False
            for di in range(-1, 2):
                r = i + di
                if r < 0:
                    r = 0
                elif r >= h:
                    r = h - 1
                for dj in range(-1, 2):
                    c = j + dj
                    if c < 0:
                        c = 0
                    elif c >= w:
                        c = w - 1
                    v = a[r, c]
                    if not started:
                        best = v
                        src = r * w + c
                        started = True
                    elif take_max:
                        if v > best:
                            best = v
                            src = r * w + c
                    else:
                        if v < best:
                            best = v
                            src = r * w + c
            out[i, j] = best
            arg[i, j] = src
    return out, arg


@njit(cache=True)
def pool3(a, take_max):
    """3x3 max/min pool with replicate padding, values only."""
    h, w = a.shape
    out = np.empty((h, w), np.float64)
    for i in range(h):
        r0 = i - 1 if i > 0 else 0
        r1 = i + 1 if i < h - 1 else h - 1
        for j in range(w):
            c0 = j - 1 if j > 0 else 0
            c1 = j + 1 if j < w - 1 else w - 1
            best = a[r0, c0]
            for r in range(r0, r1 + 1):
                for c in range(c0, c1 + 1):
                    v = a[r, c]
                    if take_max:
                        if v > best:
                            best = v
                    elif v < best:
                        best = v
            out[i, j] = best
    return out


def scatter_add(grad_out: np.ndarray, argsrc: np.ndarray) -> np.ndarray:
    """Adjoint of a selection pool: route each output gradient to its source."""
    h, w = grad_out.shape
    flat = np.bincount(argsrc.ravel(), weights=grad_out.ravel(), minlength=h * w)
    return flat.reshape(h, w)


def warmup() -> None:
    """Force kernel compilation (cached on disk) on tiny inputs."""
    v = np.array([0.0, 0.5, 1.0, 0.0], np.float64)
    order = np.array([2, 1], np.int64)
    rank = np.full(4, -1, np.int64)
    rank[order] = np.arange(2)
    sweep_barcode(order, rank, v, 2, 2, np.empty(0, np.int64), np.empty(0, np.float64))
    pool3_arg(np.zeros((2, 2)), True)
    pool3_arg(np.zeros((2, 2)), False)
    pool3(np.zeros((2, 2)), True)
    pool3(np.zeros((2, 2)), False)
