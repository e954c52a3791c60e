"""Compiled setup sweep: G'[S] for every Pauli setup on S' (structure only).

Mirrors the reduction loop of ``reduction._Work`` on int64 bitsets, so it is
limited to 63 nodes. numba is optional; without it the kernel runs as plain
Python (slow but identical).
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba

    numba.config.THREADING_LAYER = "workqueue"
    njit = numba.njit
    prange = numba.prange
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


MAX_NODES = 63
FILL, SHAPE, SIGN = 1, 2, 4


def thread_count(requested: int | None = None) -> int:
    if requested is None:
        env = os.environ.get("STABLOC_THREADS")
        requested = int(env) if env else 0
    return max(1, requested) if requested else (os.cpu_count() or 1)


@njit(cache=True)
def _lc(adj, i):
    nb = adj[i]
    m = nb
    while m:
        low = m & -m
        j = 0
        t = low
        while t > 1:
            t >>= 1
            j += 1
        adj[j] ^= nb & ~low
        m ^= low


@njit(cache=True)
def _reshape(tags, i):
    t = tags[i]
    if t & SHAPE:
        tags[i] = t ^ SHAPE ^ SIGN
    else:
        tags[i] = t | SHAPE


@njit(cache=True)
def _flip_nb(adj, tags, i, bit):
    m = adj[i]
    while m:
        low = m & -m
        j = 0
        t = low
        while t > 1:
            t >>= 1
            j += 1
        tags[j] ^= bit
        m ^= low


@njit(cache=True)
def _reshape_nb(adj, tags, i):
    m = adj[i]
    while m:
        low = m & -m
        j = 0
        t = low
        while t > 1:
            t >>= 1
            j += 1
        _reshape(tags, j)
        m ^= low


@njit(cache=True)
def _apply_r(adj, tags, i):
    t = tags[i]
    if not t & FILL:
        _reshape(tags, i)
        return
    if t & SHAPE:
        tags[i] ^= FILL | SHAPE
        flip_nb = not (t & SIGN)
    else:
        flip_nb = bool(t & SIGN)
    _lc(adj, i)
    _reshape_nb(adj, tags, i)
    if flip_nb:
        _flip_nb(adj, tags, i, SIGN)


@njit(cache=True)
def _apply_z(adj, tags, i):
    t = tags[i]
    if not t & FILL:
        tags[i] ^= SIGN
    else:
        _flip_nb(adj, tags, i, SIGN)
        if t & SHAPE:
            tags[i] ^= SIGN


@njit(cache=True)
def _b1(adj, tags, i):
    tags[i] ^= FILL
    _lc(adj, i)
    _reshape_nb(adj, tags, i)
    tags[i] ^= SIGN
    if tags[i] & SIGN:
        _flip_nb(adj, tags, i, SIGN)


@njit(cache=True)
def _b2(adj, tags, i, j):
    common = adj[i] & adj[j]
    mi = tags[i] & SIGN
    mj = tags[j] & SIGN
    tags[i] ^= FILL
    tags[j] ^= FILL
    _lc(adj, i)
    _lc(adj, j)
    _lc(adj, i)
    m = common
    k = 0
    while m:
        if m & 1:
            tags[k] ^= SIGN
        m >>= 1
        k += 1
    if mi:
        tags[i] ^= SIGN
        _flip_nb(adj, tags, i, SIGN)
    if mj:
        tags[j] ^= SIGN
        _flip_nb(adj, tags, j, SIGN)


@njit(cache=True)
def _reduce(adj, tags, n, s_mask, cap):
    full = (np.int64(1) << n) - 1
    sp = full ^ s_mask
    passes = 0
    while True:
        while True:
            passes += 1
            if passes > cap:
                return False
            acted = False
            for i in range(n):
                if (sp >> i) & 1 and tags[i] & 3 == 3:
                    _b1(adj, tags, i)
                    acted = True
            for i in range(n):
                if not (sp >> i) & 1:
                    continue
                snap = adj[i] & sp
                for j in range(i + 1, n):
                    if (snap >> j) & 1 and (adj[i] >> j) & 1 and tags[i] & 3 == 1 and tags[j] & 3 == 1:
                        _b2(adj, tags, i, j)
                        acted = True
            if not acted:
                break
        acted = False
        for i in range(n):
            if not (sp >> i) & 1:
                continue
            snap = adj[i] & s_mask
            for j in range(n):
                if not (snap >> j) & 1:
                    continue
                if tags[i] & 3 != 1 or not (adj[i] >> j) & 1:
                    break
                if not tags[j] & SHAPE:
                    _b2(adj, tags, i, j)
                else:
                    _b1(adj, tags, j)
                    _b1(adj, tags, i)
                acted = True
        if not acted:
            return True


@njit(cache=True, parallel=True)
def _sweep(adj0, tags0, n, s_nodes, sp_nodes, start, count, out):
    m = sp_nodes.shape[0]
    k = s_nodes.shape[0]
    s_mask = np.int64(0)
    for a in range(k):
        s_mask |= np.int64(1) << s_nodes[a]
    cap = 4 * n * n + 16
    for idx in prange(count):
        adj = adj0.copy()
        tags = tags0.copy()
        code = start + idx
        # digit 0 of the setup is the most significant (lexicographic order)
        axes = np.empty(m, dtype=np.int64)
        for p in range(m - 1, -1, -1):
            axes[p] = code % 3 + 1
            code //= 3
        for p in range(m):
            axis = axes[p]
            node = sp_nodes[p]
            if axis == 1:
                tags[node] ^= FILL
            elif axis == 2:
                _apply_z(adj, tags, node)
                _apply_r(adj, tags, node)
                tags[node] ^= FILL
        ok = _reduce(adj, tags, n, s_mask, cap)
        if not ok:
            out[idx] = -1
            continue
        key = np.int64(0)
        for a in range(k):
            row = adj[s_nodes[a]]
            for b in range(a + 1, k):
                key = (key << 1) | ((row >> s_nodes[b]) & 1)
        out[idx] = key


def sweep_keys(adj, tags, s_nodes, sp_nodes, chunk: int = 1 << 20, threads: int | None = None) -> np.ndarray:
    """Upper-triangle adjacency word of G'[S] (S in the given order) for every setup.

    Entry t corresponds to the t-th setup in lexicographic order over sp_nodes.
    """
    n = len(adj)
    if n > MAX_NODES:
        raise ValueError(f"sweep kernel limited to {MAX_NODES} nodes")
    if len(s_nodes) > 11:
        raise ValueError("subgraph word limited to 11 nodes")
    if HAVE_NUMBA:
        numba.set_num_threads(min(thread_count(threads), numba.config.NUMBA_NUM_THREADS))
    a = np.array(adj, dtype=np.int64)
    t = np.array(tags, dtype=np.int64)
    s = np.array(s_nodes, dtype=np.int64)
    p = np.array(sp_nodes, dtype=np.int64)
    total = 3 ** len(sp_nodes)
    out = np.empty(total, dtype=np.int64)
    for start in range(0, total, chunk):
        cnt = min(chunk, total - start)
        buf = np.empty(cnt, dtype=np.int64)
        _sweep(a, t, n, s, p, start, cnt, buf)
        out[start : start + cnt] = buf
    if np.any(out < 0):
        raise RuntimeError("reduction did not terminate inside the sweep kernel")
    return out


def key_to_graph_rows(key: int, k: int) -> tuple[int, ...]:
    rows = [0] * k
    pos = k * (k - 1) // 2
    for a in range(k):
        for b in range(a + 1, k):
            pos -= 1
            if (key >> pos) & 1:
                rows[a] |= 1 << b
                rows[b] |= 1 << a
    return tuple(rows)
