"""Exact +/-1 product sums via bit packing and popcount.

A spin column is stored as bits (1 for +1, 0 for -1) in uint64 words. For two
columns of length L, ``sum_t a(t) b(t) = L - 2 * popcount(a XOR b)``; padding
bits are zero in both operands and therefore never counted.
"""

import numpy as np

# bound on the uint64 temporaries created per block of rows
_BLOCK_WORDS = 1 << 22


def pack_columns(spins: np.ndarray) -> np.ndarray:
    """Pack the columns of a (L, N) +/-1 array into an (N, ceil(L/64)) uint64 array."""
    bits = np.ascontiguousarray(spins > 0)
    packed = np.packbits(bits, axis=0, bitorder="little")  # (ceil(L/8), N)
    n_bytes = packed.shape[0]
    n_words = -(-n_bytes // 8)
    out = np.zeros((bits.shape[1], n_words * 8), dtype=np.uint8)
    out[:, :n_bytes] = packed.T
    return out.view(np.uint64)


def plus_counts(packed: np.ndarray) -> np.ndarray:
    """Number of +1 entries per packed column."""
    return np.bitwise_count(packed).sum(axis=1, dtype=np.int64)


def product_sums(a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    """Integer matrix ``P[i, j] = sum_t a_i(t) b_j(t)`` from packed columns."""
    n_a, n_b = a.shape[0], b.shape[0]
    mismatch = np.empty((n_a, n_b), dtype=np.int64)
    rows = max(1, _BLOCK_WORDS // max(1, n_b * a.shape[1]))
    for start in range(0, n_a, rows):
        stop = min(start + rows, n_a)
        x = np.bitwise_xor(a[start:stop, None, :], b[None, :, :])
        mismatch[start:stop] = np.bitwise_count(x).sum(axis=2, dtype=np.int64)
    return length - 2 * mismatch


def product_sums_naive(a_spins: np.ndarray, b_spins: np.ndarray) -> np.ndarray:
    """Reference double loop over columns; used by the kernel tests."""
    a = np.asarray(a_spins, dtype=np.int64)
    b = np.asarray(b_spins, dtype=np.int64)
    out = np.zeros((a.shape[1], b.shape[1]), dtype=np.int64)
    for i in range(a.shape[1]):
        for j in range(b.shape[1]):
            total = 0
            for t in range(a.shape[0]):
                total += int(a[t, i]) * int(b[t, j])
            out[i, j] = total
    return out
