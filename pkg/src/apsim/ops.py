"""Bit-serial word-parallel operations on a CAM array, in three variants.

Every operation follows the same shape: populate operand bit columns, run
compare/write passes per bit position (word-parallel across rows), and read
the result back. Reads are searches and cost one cycle each; a word moved
between rows costs one read plus one write.

Variants:
  AP1D    - a single row per word; data reaching another word travels by
            explicit word transfers (reduction trees pay (1r+1w) per move).
  AP2D    - adjacent rows can be combined directly; each row-pair combine
            step costs a fixed 4 compares + 4 writes regardless of operand
            width, applied sequentially along a column strip.
  AP2DSeg - as AP2D but with segmented tag chains, so row-pair combines at
            the same tree level happen together (one charge per level).

Horizontal phases are emulated honestly at bit level. Row-pair combine steps
(the 2D/2DSeg vertical phases) are charged at their fixed cost and their
functional effect is applied to values lifted out of the array, since their
single-pass multi-row circuit behaviour has no bit-serial expansion.

`analytic_cycles` gives the closed-form stage counts for each operation and
variant; the emulator's event traces reproduce them exactly (tests pin this).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .cam import HORIZONTAL, CamArray, DimensionError, KeyMask, UsageError, transfer_word
from .luts import ADD_STEP, MAX_STEP, MULTIPLY_STEP, RELU_STEP, LutProgram
from .trace import EventTrace


class ApVariant(enum.Enum):
    AP1D = "1d"
    AP2D = "2d"
    AP2DSeg = "2dseg"

    @classmethod
    def parse(cls, text: str) -> "ApVariant":
        for v in cls:
            if v.value == text.lower():
                return v
        raise UsageError(f"unknown variant {text!r} (expected 1d, 2d or 2dseg)")


@dataclass
class OpResult:
    values: np.ndarray
    trace: EventTrace
    analytic_cycles: int
    width: int  # result bit width


# ---------------------------------------------------------------------------
# helpers

def _as_unsigned(x, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if np.any(x < 0) or np.any(x >= (1 << m)):
        raise UsageError(f"values out of range for {m}-bit unsigned operands")
    return x


def _log2(n: int, what: str) -> int:
    if n < 1 or (n & (n - 1)) != 0:
        raise DimensionError(f"{what} must be a power of two, got {n}")
    return n.bit_length() - 1


def _apply_program(arr: CamArray, prog: LutProgram, col_of: dict[str, int]) -> None:
    """One full pass sequence of `prog` at fixed column bindings."""
    for ps in prog.passes:
        match = {col_of[r]: b for r, b in zip(prog.roles, ps.match)}
        arr.compare(KeyMask.from_pairs(HORIZONTAL, arr.cols, match))
        write = {col_of[r]: b for r, b in zip(prog.roles, ps.write) if b is not None}
        arr.selective_write(KeyMask.from_pairs(HORIZONTAL, arr.cols, write))


def _load_bits(arr: CamArray, base_col: int, values: np.ndarray, m: int) -> None:
    """Populate m bit columns, LSB first. One write cycle per column."""
    v = np.asarray(values, dtype=np.int64)
    for p in range(m):
        arr.load_column(base_col + p, (v >> p) & 1)


def _read_columns(arr: CamArray, cols) -> np.ndarray:
    """Bit-sequential read of the given columns (LSB first) into integers."""
    vals = np.zeros(arr.rows, dtype=np.int64)
    for p, c in enumerate(cols):
        vals += arr.read_bit_sequential(c).astype(np.int64) << p
    return vals


def _peek_rows(arr: CamArray, rows: np.ndarray, cols) -> np.ndarray:
    # Direct cell inspection (no events) used only at the boundary where a
    # row-pair combine phase takes over from the bit-level emulation.
    vals = np.zeros(len(rows), dtype=np.int64)
    for p, c in enumerate(cols):
        vals += arr.cells[rows, c].astype(np.int64) << p
    return vals


def _charge_combine(trace: EventTrace, n_ops: int, width: int, reset_writes: int = 0) -> None:
    """Row-pair combine steps: 4 compares + 4 writes each, width-independent.

    Compares engage the three rows a key spans; writes land on two of them.
    `reset_writes` adds flag-clear writes (one row each) per step.
    """
    trace.n_compare += 4 * n_ops
    trace.n_write += (4 + reset_writes) * n_ops
    trace.active_cells_compared += 4 * 3 * width * n_ops
    trace.cells_written += (4 * 2 + reset_writes) * width * n_ops


# ---------------------------------------------------------------------------
# addition / multiplication / relu (identical across variants)

def inplace_add(a, b, m: int, variant: ApVariant = ApVariant.AP1D,
                trace: EventTrace | None = None) -> OpResult:
    """b <- a + b over m-bit unsigned words, one word pair per row.

    2m populate writes, then per bit four compare passes and four selective
    writes (full adder with a dedicated carry column), then m+1 bit reads.
    """
    a = _as_unsigned(a, m)
    b = _as_unsigned(b, m)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError("inplace_add expects two equal-length 1-d arrays")
    car, a0, b0 = 0, 1, 1 + m
    arr = CamArray(a.size, 1 + 2 * m, trace=trace)
    _load_bits(arr, a0, a, m)
    _load_bits(arr, b0, b, m)
    for p in range(m):
        _apply_program(arr, ADD_STEP, {"carry": car, "a": a0 + p, "b": b0 + p})
    vals = _read_columns(arr, [b0 + p for p in range(m)] + [car])
    return OpResult(vals, arr.trace, analytic_cycles("add", variant, m), m + 1)


def multiply(a, b, m: int, variant: ApVariant = ApVariant.AP1D,
             trace: EventTrace | None = None) -> OpResult:
    """c <- a * b over m-bit unsigned words; 2m-bit product per row.

    Shift-and-add: round k runs the carry-gated adder for each multiplicand
    bit, accumulating into product cells c[k]..c[k+m-1]. The product cell
    c[k+m] doubles as the round's carry cell - it is still zero when round k
    starts, and the round's final carry-out belongs at exactly that weight.
    """
    a = _as_unsigned(a, m)
    b = _as_unsigned(b, m)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError("multiply expects two equal-length 1-d arrays")
    b0, a0, c0 = 0, m, 2 * m
    arr = CamArray(a.size, 4 * m, trace=trace)
    _load_bits(arr, a0, a, m)
    _load_bits(arr, b0, b, m)
    for k in range(m):
        carry = c0 + k + m
        for i in range(m):
            _apply_program(arr, MULTIPLY_STEP,
                           {"b_k": b0 + k, "carry": carry, "a": a0 + i, "c": c0 + i + k})
    vals = _read_columns(arr, range(c0, c0 + 2 * m))
    return OpResult(vals, arr.trace, analytic_cycles("multiply", variant, m), 2 * m)


def relu(x, m: int, variant: ApVariant = ApVariant.AP1D,
         trace: EventTrace | None = None) -> OpResult:
    """max(x, 0) over m-bit two's-complement words.

    The sign bit is copied to a flag column (one read, two writes - the copy
    and the sign-bit clear), then each remaining bit of flagged words is
    zeroed with one compare + one write.
    """
    x = np.asarray(x, dtype=np.int64)
    lo, hi = -(1 << (m - 1)), 1 << (m - 1)
    if np.any(x < lo) or np.any(x >= hi):
        raise UsageError(f"values out of range for {m}-bit signed words")
    enc = x & ((1 << m) - 1)
    a0, flag = 0, m
    arr = CamArray(x.size, m + 1, trace=trace)
    _load_bits(arr, a0, enc, m)
    arr.read_bit_sequential(a0 + m - 1)  # tag negative words
    arr.selective_write(KeyMask.from_pairs(HORIZONTAL, arr.cols, {flag: 1}))
    arr.selective_write(KeyMask.from_pairs(HORIZONTAL, arr.cols, {a0 + m - 1: 0}))
    for p in range(m - 2, -1, -1):
        _apply_program(arr, RELU_STEP, {"a": a0 + p, "flag": flag})
    vals = _read_columns(arr, range(a0, a0 + m))
    return OpResult(vals, arr.trace, analytic_cycles("relu", variant, m), m)


# ---------------------------------------------------------------------------
# reduction trees (shared by reduce / avg_pool / matmat accumulation)

def _tree_add_1d(arr: CamArray, n_groups: int, rows_per_group: int, m: int,
                 levels: int, a0: int, b0: int, car: int) -> None:
    """In-array pairwise addition tree over pre-paired rows.

    Rows enter holding (a, b) pairs; level q adds a+b word-parallel at width
    m+q-1 with a fresh carry column, then the next level's partners are
    transferred (value bits + accumulated carry bits) into the keep row's
    a region. After level q a row's value is b0..b0+m-1 plus car..car+q-1.
    """
    for q in range(1, levels + 1):
        wq = m + q - 1
        if q >= 2:
            stride = 1 << (q - 2)
            src_cols = list(range(b0, b0 + m)) + list(range(car, car + q - 2 + 1))
            dst_cols = list(range(a0, a0 + wq))
            for g in range(n_groups):
                base = g * rows_per_group
                for w in range(rows_per_group >> (q - 1)):
                    dst = base + w * (stride * 2)
                    transfer_word(arr, dst + stride, arr, dst,
                                  src_cols=src_cols, dst_cols=dst_cols)
        for p in range(wq):
            bcol = b0 + p if p < m else car + (p - m)
            _apply_program(arr, ADD_STEP, {"carry": car + q - 1, "a": a0 + p, "b": bcol})


def _sum_value_cols(b0: int, car: int, m: int, levels: int) -> list[int]:
    return list(range(b0, b0 + m)) + list(range(car, car + levels))


def reduce(x, m: int, variant: ApVariant = ApVariant.AP1D,
           trace: EventTrace | None = None) -> OpResult:
    """Sum each group of l m-bit unsigned words; x has shape (k, l).

    Populate packs word pairs into rows (two operands per row), so the first
    tree level needs no data movement. 1D then transfers a partner per pair
    per level; 2D folds the l/2 partial rows sequentially at fixed cost; 2DSeg
    folds them level-parallel. Result is read word-sequentially.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    k, l = x.shape
    levels = _log2(l, "group length l")
    _as_unsigned(x, m)
    if l == 1:
        arr = CamArray(k, 2 * m, trace=trace)
        _load_bits(arr, 0, np.zeros(k, dtype=np.int64), m)
        _load_bits(arr, m, x[:, 0], m)
        vals = np.zeros(k, dtype=np.int64)
        if variant is ApVariant.AP1D:
            for g in range(k):
                bits = arr.read_word_sequential(g)
                vals[g] = int(sum(int(bit) << p for p, bit in enumerate(bits[m:2 * m])))
        else:
            arr.read_word_sequential(0)
            vals = x[:, 0].copy()
        return OpResult(vals, arr.trace, analytic_cycles("reduce", variant, m, l=l, k=k), m)

    rpg = l // 2
    a0, b0, car = 0, m + max(levels - 1, 1), 2 * m + max(levels - 1, 1)
    arr = CamArray(k * rpg, car + levels, trace=trace)
    _load_bits(arr, a0, x[:, 0::2].reshape(-1), m)
    _load_bits(arr, b0, x[:, 1::2].reshape(-1), m)

    if variant is ApVariant.AP1D:
        _tree_add_1d(arr, k, rpg, m, levels, a0, b0, car)
        cols = _sum_value_cols(b0, car, m, levels)
        vals = np.zeros(k, dtype=np.int64)
        for g in range(k):
            bits = arr.read_word_sequential(g * rpg)
            vals[g] = int(sum(int(bits[c]) << p for p, c in enumerate(cols)))
    else:
        # one honest horizontal level, then row-pair combines on column strips
        for p in range(m):
            _apply_program(arr, ADD_STEP, {"carry": car, "a": a0 + p, "b": b0 + p})
        partial = _peek_rows(arr, np.arange(k * rpg), _sum_value_cols(b0, car, m, 1))
        vals = partial.reshape(k, rpg).sum(axis=1)
        n_steps = (rpg - 1) if variant is ApVariant.AP2D else max(levels - 1, 0)
        _charge_combine(arr.trace, n_steps, m + levels)
        arr.trace.n_read += 1  # all k results share a row of column strips
        arr.trace.active_cells_compared += arr.cols
    return OpResult(vals, arr.trace,
                    analytic_cycles("reduce", variant, m, l=l, k=k), m + levels)


# ---------------------------------------------------------------------------
# matrix multiply

def matmat(a, b, m: int, variant: ApVariant = ApVariant.AP1D,
           trace: EventTrace | None = None) -> OpResult:
    """C = A @ B with A (i x j), B (j x u), m-bit unsigned entries.

    One row per (output element, depth index) pair: i*u groups of j rows.
    Every row multiplies its operand pair in place (the products start one
    per row, so unlike `reduce` the first tree level also pays transfers),
    then the depth dimension is reduced. Result width 2m + log2(j).
    """
    a = _as_unsigned(a, m)
    b = _as_unsigned(b, m)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmat expects A (i x j) and B (j x u)")
    i, j = a.shape
    _, u = b.shape
    levels = _log2(j, "depth j")
    groups = i * u

    # row (e*u + f)*j + d holds operands a[e, d], b[d, f]
    aval = np.repeat(a, u, axis=0).reshape(-1)            # (i*u*j,)
    bval = np.tile(b.T.reshape(-1), i)                    # (i*u*j,)
    b0, a0, c0 = 0, m, 2 * m
    s0 = 4 * m                                            # transferred-addend region
    car = s0 + 2 * m + max(levels - 1, 0)
    arr = CamArray(groups * j, car + max(levels, 1), trace=trace)
    _load_bits(arr, a0, aval, m)
    _load_bits(arr, b0, bval, m)
    for k_ in range(m):
        carry = c0 + k_ + m
        for bi in range(m):
            _apply_program(arr, MULTIPLY_STEP,
                           {"b_k": b0 + k_, "carry": carry, "a": a0 + bi, "c": c0 + bi + k_})

    width = 2 * m + levels
    if variant is ApVariant.AP1D:
        for q in range(1, levels + 1):
            wq = 2 * m + q - 1
            src_cols = list(range(c0, c0 + 2 * m)) + list(range(car, car + q - 1))
            dst_cols = list(range(s0, s0 + wq))
            stride = 1 << (q - 1)
            for g in range(groups):
                base = g * j
                for w in range(j >> q):
                    dst = base + w * stride * 2
                    transfer_word(arr, dst + stride, arr, dst,
                                  src_cols=src_cols, dst_cols=dst_cols)
            for p in range(wq):
                bcol = c0 + p if p < 2 * m else car + (p - 2 * m)
                _apply_program(arr, ADD_STEP, {"carry": car + q - 1, "a": s0 + p, "b": bcol})
        all_vals = _read_columns(arr, list(range(c0, c0 + 2 * m)) + list(range(car, car + levels)))
        vals = all_vals[::j].reshape(i, u)
    else:
        products = _peek_rows(arr, np.arange(groups * j), range(c0, c0 + 2 * m))
        vals = products.reshape(i, u, j).sum(axis=2)
        n_steps = groups * (j - 1) if variant is ApVariant.AP2D else levels
        _charge_combine(arr.trace, n_steps, width)
        arr.trace.n_read += width  # result columns, read bit-sequentially
        arr.trace.active_cells_compared += width * arr.rows
    return OpResult(vals, arr.trace,
                    analytic_cycles("matmat", variant, m, i=i, j=j, u=u), width)


# ---------------------------------------------------------------------------
# pooling

def max_pool(x, m: int, s: int, variant: ApVariant = ApVariant.AP1D,
             trace: EventTrace | None = None) -> OpResult:
    """Maximum of each window of s m-bit unsigned words; x has shape (k, s).

    Pairwise max from MSB to LSB with a two-flag state per row (00 undecided,
    01 left operand wins, 11 right wins); the winner accumulates in the b
    region. Each tree level clears the flags first (two column writes).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    k, s_ = x.shape
    if s_ != s:
        raise DimensionError(f"window size mismatch: got rows of {s_}, expected {s}")
    levels = _log2(s, "window size s")
    if levels == 0:
        raise DimensionError("max_pool needs windows of at least 2")
    _as_unsigned(x, m)

    rpg = s // 2
    a0, b0, f1, f2 = 0, m, 2 * m, 2 * m + 1
    arr = CamArray(k * rpg, 2 * m + 2, trace=trace)
    _load_bits(arr, a0, x[:, 0::2].reshape(-1), m)
    _load_bits(arr, b0, x[:, 1::2].reshape(-1), m)
    zeros = np.zeros(arr.rows, dtype=np.int64)

    def level_passes():
        arr.load_column(f1, zeros)
        arr.load_column(f2, zeros)
        for p in range(m - 1, -1, -1):
            _apply_program(arr, MAX_STEP, {"a": a0 + p, "b": b0 + p, "f1": f1, "f2": f2})

    if variant is ApVariant.AP1D:
        for q in range(1, levels + 1):
            if q >= 2:
                stride = 1 << (q - 2)
                for g in range(k):
                    base = g * rpg
                    for w in range(rpg >> (q - 1)):
                        dst = base + w * stride * 2
                        transfer_word(arr, dst + stride, arr, dst,
                                      src_cols=list(range(b0, b0 + m)),
                                      dst_cols=list(range(a0, a0 + m)))
            level_passes()
        vals = _read_columns(arr, range(b0, b0 + m))[::rpg].reshape(k)
    else:
        level_passes()  # honest horizontal level (4m c + 4m w, no reset charge)
        arr.trace.n_write -= 2  # flags start clean; 2D charges one reset at the end
        arr.trace.cells_written -= 2 * arr.rows
        winners = _peek_rows(arr, np.arange(k * rpg), range(b0, b0 + m)).reshape(k, rpg)
        vals = winners.max(axis=1)
        if variant is ApVariant.AP2D:
            arr.trace.n_write += 2
            arr.trace.cells_written += 2 * arr.rows
            _charge_combine(arr.trace, k * (rpg - 1), m, reset_writes=2)
        else:  # AP2DSeg: level-parallel combines, per-group flag clears
            for _ in range(max(levels - 1, 0)):
                _charge_combine(arr.trace, 1, m)
                arr.trace.n_write += 2 * k
                arr.trace.cells_written += 2 * k * m
            arr.trace.n_write += 2
            arr.trace.cells_written += 2 * arr.rows
        arr.trace.n_read += m
        arr.trace.active_cells_compared += m * arr.rows
        return OpResult(vals, arr.trace,
                        analytic_cycles("max_pool", variant, m, s=s, k=k), m)
    return OpResult(vals, arr.trace,
                    analytic_cycles("max_pool", variant, m, s=s, k=k), m)


def avg_pool(x, m: int, s: int, variant: ApVariant = ApVariant.AP1D,
             trace: EventTrace | None = None) -> OpResult:
    """Mean (floor) of each window of s m-bit unsigned words; x is (k, s).

    A reduction tree followed by a shifted read: the sum has m + log2(s)
    bits and the average is its top m, so the readout starts at bit log2(s).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    k, s_ = x.shape
    if s_ != s:
        raise DimensionError(f"window size mismatch: got rows of {s_}, expected {s}")
    levels = _log2(s, "window size s")
    if levels == 0:
        raise DimensionError("avg_pool needs windows of at least 2")
    _as_unsigned(x, m)

    rpg = s // 2
    a0, b0 = 0, m + max(levels - 1, 1)
    car = b0 + m
    arr = CamArray(k * rpg, car + levels, trace=trace)
    _load_bits(arr, a0, x[:, 0::2].reshape(-1), m)
    _load_bits(arr, b0, x[:, 1::2].reshape(-1), m)

    if variant is ApVariant.AP1D:
        _tree_add_1d(arr, k, rpg, m, levels, a0, b0, car)
        cols = _sum_value_cols(b0, car, m, levels)[levels:]  # drop low log2(s) bits
        vals = _read_columns(arr, cols)[::rpg].reshape(k)
    else:
        for p in range(m):
            _apply_program(arr, ADD_STEP, {"carry": car, "a": a0 + p, "b": b0 + p})
        partial = _peek_rows(arr, np.arange(k * rpg), _sum_value_cols(b0, car, m, 1))
        vals = partial.reshape(k, rpg).sum(axis=1) >> levels
        n_steps = k * (rpg - 1) if variant is ApVariant.AP2D else max(levels - 1, 0)
        _charge_combine(arr.trace, n_steps, m + levels)
        arr.trace.n_read += m
        arr.trace.active_cells_compared += m * arr.rows
    return OpResult(vals, arr.trace,
                    analytic_cycles("avg_pool", variant, m, s=s, k=k), m)


# ---------------------------------------------------------------------------
# closed-form stage counts

def analytic_stage_counts(op: str, variant: ApVariant, m: int, *, l: int | None = None,
                          s: int | None = None, k: int = 1, i: int | None = None,
                          j: int | None = None, u: int | None = None):
    """(compares, writes, reads, transfers) for one operation instance.

    `k` is the number of independent groups run side by side. It scales the
    per-group data movement of layouts that stack groups in rows: 1D
    transfers, and the sequential 2D combines of pooling and matmat. The 2D
    reduce instead tiles its groups across column strips of the same rows,
    so its combine steps and final read are shared and k-independent.
    """
    op = op.replace("-", "_").lower()
    v = variant
    if op in ("add", "inplace_add"):
        return 4 * m, 6 * m, m + 1, 0
    if op == "multiply":
        return 4 * m * m, 2 * m + 4 * m * m, 2 * m, 0
    if op == "relu":
        return m - 1, 2 * m + 1, m + 1, 0
    if op == "reduce":
        lam = _log2(l, "l")
        if l == 1:
            return 0, 2 * m, (k if v is ApVariant.AP1D else 1), 0
        if v is ApVariant.AP1D:
            tree = sum(4 * (m + q - 1) for q in range(1, lam + 1))
            t = k * (l // 2 - 1)
            return tree, 2 * m + tree + t, t + k, t
        steps = (l // 2 - 1) if v is ApVariant.AP2D else lam - 1
        return 4 * m + 4 * steps, 6 * m + 4 * steps, 1, 0
    if op == "matmat":
        lam = _log2(j, "j")
        g = i * u
        if v is ApVariant.AP1D:
            tree = sum(4 * (2 * m + q - 1) for q in range(1, lam + 1))
            t = g * (j - 1)
            return 4 * m * m + tree, 2 * m + 4 * m * m + tree + t, t + 2 * m + lam, t
        steps = g * (j - 1) if v is ApVariant.AP2D else lam
        return (4 * m * m + 4 * steps, 2 * m + 4 * m * m + 4 * steps, 2 * m + lam, 0)
    if op == "max_pool":
        lam = _log2(s, "s")
        if v is ApVariant.AP1D:
            t = k * (s // 2 - 1)
            return 4 * m * lam, 2 * m + (4 * m + 2) * lam + t, t + m, t
        if v is ApVariant.AP2D:
            steps = k * (s // 2 - 1)
            return 4 * m + 4 * steps, 6 * m + 2 + 6 * steps, m, 0
        steps = lam - 1
        return 4 * m + 4 * steps, 6 * m + (4 + 2 * k) * steps + 2, m, 0
    if op == "avg_pool":
        lam = _log2(s, "s")
        if v is ApVariant.AP1D:
            tree = sum(4 * (m + q - 1) for q in range(1, lam + 1))
            t = k * (s // 2 - 1)
            return tree, 2 * m + tree + t, t + m, t
        steps = k * (s // 2 - 1) if v is ApVariant.AP2D else lam - 1
        return 4 * m + 4 * steps, 6 * m + 4 * steps, m, 0
    raise UsageError(f"unknown operation {op!r}")


def analytic_cycles(op: str, variant: ApVariant, m: int, *, l: int | None = None,
                    s: int | None = None, k: int = 1, i: int | None = None,
                    j: int | None = None, u: int | None = None,
                    write_cycle: int = 1) -> int:
    """Total cycles for one operation; writes may take `write_cycle` cycles."""
    c, w, r, _ = analytic_stage_counts(op, variant, m, l=l, s=s, k=k, i=i, j=j, u=u)
    return c + w * write_cycle + r


OP_NAMES = ("add", "multiply", "relu", "reduce", "matmat", "max_pool", "avg_pool")
