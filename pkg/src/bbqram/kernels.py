"""
Hot numeric loops, each in two flavours.

Every kernel exists as ``<name>_jit`` (numba ``@njit``) and
``<name>_numpy`` (vectorised numpy). The unsuffixed name is bound to one
of them at import time according to :data:`bbqram._accel.USE_JIT`.
Both flavours perform the same floating point operations in the same
order, so tree sums are bitwise identical across backends; rotation
weights may differ in the last ulp because numba and numpy use different
``sin``/``cos`` implementations.
"""
import math

import numpy as np

from ._accel import USE_JIT, njit

# switch encodings, shared with qram.Switch
WAIT, ZERO, ONE, SUPERPOSED = 0, 1, 2, 3


# --- segment tree --------------------------------------------------------

def build_heap_numpy(leaves):
    K = leaves.shape[0]
    nodes = np.empty(2 * K - 1, dtype=np.float64)
    nodes[K - 1:] = leaves
    lo = K - 1
    while lo > 0:
        parent_lo = (lo - 1) // 2
        child = nodes[lo:2 * lo + 1]
        nodes[parent_lo:lo] = child[0::2] + child[1::2]
        lo = parent_lo
    return nodes


@njit(cache=True)
def build_heap_jit(leaves):
    K = leaves.shape[0]
    nodes = np.empty(2 * K - 1, dtype=np.float64)
    for z in range(K):
        nodes[K - 1 + z] = leaves[z]
    for i in range(K - 2, -1, -1):
        nodes[i] = nodes[2 * i + 1] + nodes[2 * i + 2]
    return nodes


def update_path_numpy(nodes, heap_index):
    i = heap_index
    touched = 0
    while i > 0:
        i = (i - 1) // 2
        nodes[i] = nodes[2 * i + 1] + nodes[2 * i + 2]
        touched += 1
    return touched


@njit(cache=True)
def update_path_jit(nodes, heap_index):
    i = heap_index
    touched = 0
    while i > 0:
        i = (i - 1) // 2
        nodes[i] = nodes[2 * i + 1] + nodes[2 * i + 2]
        touched += 1
    return touched


# --- switch routing ------------------------------------------------------

def route_switches_numpy(switches, addresses, k):
    for d in range(k):
        width = 1 << d
        pos = addresses >> (k - d)
        bits = (addresses >> (k - d - 1)) & 1
        has0 = np.zeros(width, dtype=np.bool_)
        has1 = np.zeros(width, dtype=np.bool_)
        has0[pos[bits == 0]] = True
        has1[pos[bits == 1]] = True
        level = np.where(has0 & has1, SUPERPOSED,
                         np.where(has0, ZERO, np.where(has1, ONE, WAIT)))
        switches[width - 1:2 * width - 1] = level


@njit(cache=True)
def route_switches_jit(switches, addresses, k):
    for n in range(addresses.shape[0]):
        addr = addresses[n]
        for d in range(k):
            node = (1 << d) - 1 + (addr >> (k - d))
            bit = (addr >> (k - d - 1)) & 1
            want = ONE if bit else ZERO
            cur = switches[node]
            if cur == WAIT:
                switches[node] = want
            elif cur != want:
                switches[node] = SUPERPOSED


# --- cascade of controlled Ry -------------------------------------------

def cascade_weights_numpy(theta_words, frac_bits, width):
    words = theta_words.astype(np.uint64)
    c = np.ones(words.shape[0], dtype=np.float64)
    s = np.zeros(words.shape[0], dtype=np.float64)
    for j in range(width - 1, -1, -1):
        on = ((words >> np.uint64(j)) & np.uint64(1)).astype(np.bool_)
        if not on.any():
            continue
        half = math.ldexp(1.0, j - frac_bits) / 2.0
        ch, sh = math.cos(half), math.sin(half)
        nc = ch * c - sh * s
        ns = sh * c + ch * s
        c = np.where(on, nc, c)
        s = np.where(on, ns, s)
    return c, s


@njit(cache=True)
def cascade_weights_jit(theta_words, frac_bits, width):
    n = theta_words.shape[0]
    c_out = np.empty(n, dtype=np.float64)
    s_out = np.empty(n, dtype=np.float64)
    for m in range(n):
        w = np.uint64(theta_words[m])
        c = 1.0
        s = 0.0
        for j in range(width - 1, -1, -1):
            if (w >> np.uint64(j)) & np.uint64(1):
                half = 2.0 ** (j - frac_bits) / 2.0
                ch = math.cos(half)
                sh = math.sin(half)
                nc = ch * c - sh * s
                s = sh * c + ch * s
                c = nc
        c_out[m] = c
        s_out[m] = s
    return c_out, s_out


# --- swap network --------------------------------------------------------

def apply_swaps_numpy(words, pairs, nbits):
    w = words.astype(np.int64).copy()
    for m in range(pairs.shape[0]):
        bi = nbits - 1 - pairs[m, 0]
        bj = nbits - 1 - pairs[m, 1]
        x = ((w >> bi) ^ (w >> bj)) & 1
        w ^= (x << bi) | (x << bj)
    return w


@njit(cache=True)
def apply_swaps_jit(words, pairs, nbits):
    out = np.empty(words.shape[0], dtype=np.int64)
    for n in range(words.shape[0]):
        w = np.int64(words[n])
        for m in range(pairs.shape[0]):
            bi = nbits - 1 - pairs[m, 0]
            bj = nbits - 1 - pairs[m, 1]
            x = ((w >> bi) ^ (w >> bj)) & 1
            w ^= (x << bi) | (x << bj)
        out[n] = w
    return out


if USE_JIT:
    build_heap = build_heap_jit
    update_path = update_path_jit
    route_switches = route_switches_jit
    cascade_weights = cascade_weights_jit
    apply_swaps = apply_swaps_jit
else:
    build_heap = build_heap_numpy
    update_path = update_path_numpy
    route_switches = route_switches_numpy
    cascade_weights = cascade_weights_numpy
    apply_swaps = apply_swaps_numpy


def warmup():
    """Compile every jitted kernel once (no-op on the numpy backend)."""
    if not USE_JIT:
        return
    build_heap(np.ones(4))
    update_path(np.ones(7), 6)
    route_switches(np.zeros(3, dtype=np.int8), np.array([1, 2], dtype=np.int64), 2)
    cascade_weights(np.array([3], dtype=np.uint64), 1, 4)
    apply_swaps(np.array([1], dtype=np.int64), np.array([[0, 1]], dtype=np.int64), 2)
