"""Kernel compiler: bit-serial instruction streams for the RAM blocks.

Every emitter is a pure function from argument values to a fixed
instruction list, so cycle counts are exact compile-time quantities.
Operands live one-element-per-column in transposed layout: bit k of a
value occupies row ``base + k`` of its column (LSB at the base row).

Cycle counts match the published bit-serial sequences: an n-bit add is
n+1 instructions (n sum cycles plus a carry store-out) and an n-bit
multiply is n^2 + 3n - 2 (a copy pass for the first multiplier bit,
then one masked add pass per remaining bit).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, OverlapError, RangeError
from .isa import (
    NUM_ROWS,
    TT_A,
    TT_AND,
    TT_NOT_A,
    TT_NOT_B,
    TT_ONES,
    TT_XNOR,
    TT_XOR,
    TT_ZERO,
    Instruction,
    Predicate,
    W1Sel,
    W2Sel,
    encode_instruction,
)


@dataclass(frozen=True)
class RowRange:
    """A contiguous band of rows holding one operand, LSB at ``base``."""

    base: int
    width: int

    def __post_init__(self):
        if self.width < 1 or self.base < 0 or self.base + self.width > NUM_ROWS:
            raise RangeError(f"rows [{self.base}, {self.base + self.width}) "
                             f"outside the {NUM_ROWS}-row array")

    def row(self, k: int) -> int:
        if not 0 <= k < self.width:
            raise RangeError(f"bit {k} outside width {self.width}")
        return self.base + k

    def rows(self) -> range:
        return range(self.base, self.base + self.width)

    def overlaps(self, other: "RowRange") -> bool:
        return self.base < other.base + other.width and other.base < self.base + self.width


@dataclass(frozen=True)
class KernelProgram:
    """An ordered instruction stream plus row bookkeeping.

    cycle_count equals the instruction count: one instruction per
    compute cycle.
    """

    instructions: tuple
    rows_written: frozenset
    scratch_rows: frozenset = frozenset()
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def cycle_count(self) -> int:
        return len(self.instructions)

    def encoded(self) -> np.ndarray:
        return np.array([encode_instruction(i) for i in self.instructions],
                        dtype=np.uint64)

    def __add__(self, other: "KernelProgram") -> "KernelProgram":
        return KernelProgram(self.instructions + other.instructions,
                             self.rows_written | other.rows_written,
                             self.scratch_rows | other.scratch_rows)


class Builder:
    """Accumulates instructions and tracks written rows."""

    def __init__(self, trash: int | None = None):
        self.instrs: list[Instruction] = []
        self.written: set[int] = set()
        self.scratch: set[int] = set()
        self.trash = trash
        if trash is not None:
            self.scratch.add(trash)

    def emit(self, instr: Instruction) -> None:
        self.instrs.append(instr)
        self.written.add(instr.dst)

    def done(self, **stats) -> KernelProgram:
        return KernelProgram(tuple(self.instrs), frozenset(self.written),
                             frozenset(self.scratch), dict(stats))

    # -- single-cycle primitives ---------------------------------------

    def logic(self, src1, src2, dst, tt, pred=Predicate.ALWAYS, m_en=False):
        """dst <- tt(A, B); clears the carry latch (c_rst)."""
        self.emit(Instruction(src1, src2, dst, tt, predicate=pred,
                              c_rst=True, m_en=m_en))

    def const(self, dst, bit, pred=Predicate.ALWAYS):
        self.logic(dst, dst, dst, TT_ONES if bit else TT_ZERO, pred=pred)

    def sum_bit(self, src1, src2, dst, tt, *, pred=Predicate.ALWAYS,
                c_en=True, c_rst=False, b_inv=False):
        """dst <- tt(A,B) XOR carry, rippling the carry latch."""
        self.emit(Instruction(src1, src2, dst, tt, predicate=pred,
                              c_en=c_en, c_rst=c_rst, b_inv=b_inv))

    def add_bit(self, a_row, b_row, dst, first=False, pred=Predicate.ALWAYS):
        self.sum_bit(a_row, b_row, dst, TT_XOR, pred=pred, c_rst=first)

    def sub_bit(self, a_row, b_row, dst, pred=Predicate.ALWAYS):
        # a + ~b + carry: XNOR sum, carry = (a & ~b) | (c & (a XNOR b))
        self.sum_bit(a_row, b_row, dst, TT_XNOR, pred=pred, b_inv=True)

    def prop_bit(self, row, dst, pred=Predicate.ALWAYS):
        """dst <- A XOR carry, carry <- A AND carry (add of a zero bit).

        src2 is the row itself with b_inv, so the A AND Bs term vanishes.
        """
        self.sum_bit(row, row, dst, TT_A, pred=pred, b_inv=True)

    def carry_store(self, dst, pred=Predicate.ALWAYS, invert=False):
        """dst <- carry (or NOT carry); latch preserved."""
        self.emit(Instruction(dst, dst, dst, TT_ONES if invert else TT_ZERO,
                              predicate=pred))

    def carry_out_port2(self, any_row, dst, pred=Predicate.ALWAYS):
        """dst <- carry through the port-2 carry-out path; latch preserved."""
        self.emit(Instruction(any_row, any_row, dst, TT_ONES, predicate=pred,
                              wps1=False, wps2=True, b_inv=True))

    def carry_and_row(self, row, dst):
        """dst <- carry AND row (port-2 path); latch preserved."""
        self.emit(Instruction(row, row, dst, TT_A, wps1=False, wps2=True,
                              b_inv=True))

    def carry_init(self, value_row, ones_row, invert=False, m_en=False):
        """Latch carry from a row (or its complement); mask optionally too."""
        if invert:
            instr = Instruction(ones_row, value_row, self.trash, TT_NOT_B,
                                c_en=True, c_rst=True, b_inv=True, m_en=m_en)
        else:
            instr = Instruction(value_row, ones_row, self.trash, TT_A,
                                c_en=True, c_rst=True, m_en=m_en)
        self.emit(instr)

    def carry_one(self, ones_row):
        self.emit(Instruction(ones_row, ones_row, self.trash, TT_ZERO,
                              c_en=True, c_rst=True))

    def carry_store_and_set_one(self, dst, ones_row, pred=Predicate.ALWAYS):
        """dst <- carry (under pred); afterwards carry = 1 in every lane."""
        self.emit(Instruction(ones_row, ones_row, dst, TT_ZERO,
                              predicate=pred, c_en=True))

    def carry_and_not_row(self, row, ones_row):
        """carry <- carry AND NOT row; write lands in the trash row."""
        self.emit(Instruction(row, ones_row, self.trash, TT_NOT_A,
                              c_en=True, b_inv=True))

    def maskload(self, src1, src2=None, tt=TT_A):
        """mask <- tt(A, B); write lands in the trash row; carry untouched."""
        self.emit(Instruction(src1, src1 if src2 is None else src2,
                              self.trash, tt, m_en=True))

    def copy_keep_carry(self, src, ones_row, dst, pred=Predicate.ALWAYS):
        """dst <- A via carry generation; carry and mask preserved."""
        self.emit(Instruction(src, ones_row, dst, TT_ZERO, predicate=pred,
                              wps1=False, wps2=True))

    def and_keep_carry(self, src1, src2, dst, pred=Predicate.ALWAYS):
        self.emit(Instruction(src1, src2, dst, TT_ZERO, predicate=pred,
                              wps1=False, wps2=True))

    def or_when_carry(self, src1, src2, dst, pred=Predicate.ALWAYS):
        """dst <- A OR B wherever carry is 1 (A AND B elsewhere); latch kept."""
        self.emit(Instruction(src1, src2, dst, TT_XOR, predicate=pred,
                              wps1=False, wps2=True))

    def clear_where_not_carry(self, dst):
        """dst <- 0 in not-carry lanes; untouched elsewhere; latch kept."""
        self.emit(Instruction(dst, dst, dst, TT_ZERO,
                              predicate=Predicate.NOT_CARRY))

    def shift_step(self, src, dst, left, pred=Predicate.ALWAYS):
        if left:
            self.emit(Instruction(src, src, dst, TT_A, predicate=pred,
                                  w1_sel=W1Sel.FROM_RIGHT))
        else:
            self.emit(Instruction(src, src, dst, TT_A, predicate=pred,
                                  wps1=False, wps2=True, w2_sel=W2Sel.FROM_LEFT))


def _require(cond, exc, msg):
    if not cond:
        raise exc(msg)


def emit_bitwise(tt: int, src1: int, src2: int, dst: int) -> KernelProgram:
    """One-cycle columnwise boolean op; carry cleared, mask untouched."""
    for name, row in (("src1", src1), ("src2", src2), ("dst", dst)):
        _require(0 <= row < NUM_ROWS, RangeError, f"{name} row {row} out of range")
    _require(0 <= tt <= 0xF, RangeError, f"truth table {tt} out of range")
    b = Builder()
    b.logic(src1, src2, dst, tt)
    return b.done()


def emit_add(a: RowRange, b: RowRange, dst: RowRange) -> KernelProgram:
    """dst (n+1 bits) <- a + b, exactly n+1 instructions."""
    n = a.width
    _require(b.width == n, RangeError, "operand widths differ")
    _require(dst.width == n + 1, RangeError, "dst must be n+1 bits")
    _require(not dst.overlaps(a) and not dst.overlaps(b), OverlapError,
             "dst overlaps a source")
    bld = Builder()
    for j in range(n):
        bld.add_bit(a.row(j), b.row(j), dst.row(j), first=(j == 0))
    bld.carry_out_port2(a.base, dst.row(n))
    return bld.done()


def emit_sub(a: RowRange, b: RowRange, dst: RowRange, ones_row: int) -> KernelProgram:
    """dst (n+1 bits) <- a - b mod 2^(n+1); leaves carry latch = (a >= b).

    n+2 instructions: borrow seed, n XNOR cycles with the port-B invert,
    and a borrow-complement store-out into the top dst row.
    """
    n = a.width
    _require(b.width == n, RangeError, "operand widths differ")
    _require(dst.width == n + 1, RangeError, "dst must be n+1 bits")
    _require(not dst.overlaps(a) and not dst.overlaps(b), OverlapError,
             "dst overlaps a source")
    bld = Builder(trash=dst.row(n))
    bld.carry_one(ones_row)
    for j in range(n):
        bld.sub_bit(a.row(j), b.row(j), dst.row(j))
    bld.carry_store(dst.row(n), invert=True)
    return bld.done()


def _mul_core(bld: Builder, mult_rows, mcand_rows, dst_rows) -> None:
    """Shift-add multiply of two row lists into 2n dst rows.

    Published schedule, n^2 + 3n - 2 cycles: an AND-copy pass for
    multiplier bit 0 (plus two accumulator seed clears), then per
    remaining bit a mask load, an n+1-wide masked add window, and an
    unpredicated carry spill that seeds the next window's top row.
    """
    n = len(mult_rows)
    assert len(mcand_rows) == n and len(dst_rows) == 2 * n
    for j in range(n):
        bld.logic(mcand_rows[j], mult_rows[0], dst_rows[j], TT_AND)
    if n == 1:
        bld.const(dst_rows[1], 0)
        return
    bld.const(dst_rows[n], 0)
    bld.const(dst_rows[n + 1], 0)
    for i in range(1, n):
        bld.maskload(mult_rows[i])
        for j in range(n):
            bld.add_bit(dst_rows[i + j], mcand_rows[j], dst_rows[i + j],
                        first=(j == 0), pred=Predicate.MASK)
        bld.prop_bit(dst_rows[i + n], dst_rows[i + n], pred=Predicate.MASK)
        if i < n - 1:
            bld.carry_and_row(mult_rows[i], dst_rows[i + n + 1])


def emit_mul(a: RowRange, b: RowRange, dst: RowRange, scratch: RowRange) -> KernelProgram:
    """dst (2n bits) <- a * b, exactly n^2 + 3n - 2 instructions.

    Each multiplier bit of ``a`` is loaded into the mask latch and the
    multiplicand added into the moving dst window under that mask.
    Scratch needs one row (mask-load write target).
    """
    n = a.width
    _require(b.width == n, RangeError, "operand widths differ")
    _require(dst.width == 2 * n, RangeError, "dst must be 2n bits")
    for pair in ((dst, a), (dst, b), (scratch, a), (scratch, b), (scratch, dst)):
        _require(not pair[0].overlaps(pair[1]), OverlapError,
                 f"{pair[0]} overlaps {pair[1]}")
    _require(dst.base + dst.width <= NUM_ROWS, CapacityError, "dst exceeds rows")
    bld = Builder(trash=scratch.base)
    _mul_core(bld, list(a.rows()), list(b.rows()), list(dst.rows()))
    return bld.done()


def emit_mul_ooor(scalar: int, n: int, src: RowRange, dst: RowRange) -> KernelProgram:
    """dst <- scalar * src with the scalar outside the RAM.

    Add passes are emitted only for set scalar bits, so a scalar with z
    zero bits saves z masked-add passes versus the resident multiply.
    dst must be n + max(bitlength(scalar), 1) rows.
    """
    _require(0 <= scalar < 1 << n, RangeError, f"scalar {scalar} wider than {n} bits")
    _require(src.width == n, RangeError, "src width mismatch")
    want = n + max(scalar.bit_length(), 1) if scalar else 1
    _require(dst.width >= want, CapacityError,
             f"dst needs at least {want} rows for this scalar")
    _require(not dst.overlaps(src), OverlapError, "dst overlaps src")
    bld = Builder()
    set_bits = [k for k in range(n) if scalar >> k & 1]
    if not set_bits:
        for r in dst.rows():
            bld.const(r, 0)
        return bld.done(add_passes=0)
    b0 = set_bits[0]
    for k in range(b0):
        bld.const(dst.row(k), 0)
    for j in range(n):
        bld.logic(src.row(j), src.row(j), dst.row(b0 + j), TT_A)
    for k in range(b0 + n, dst.width):
        bld.const(dst.row(k), 0)
    for bit in set_bits[1:]:
        for j in range(n):
            bld.add_bit(dst.row(bit + j), src.row(j), dst.row(bit + j),
                        first=(j == 0))
        bld.carry_store(dst.row(bit + n))
    return bld.done(add_passes=len(set_bits))


def emit_dot_ooor(weights_layout: RowRange, stream, n: int, acc: RowRange,
                  scratch: RowRange) -> KernelProgram:
    """acc <- sum over e of stream[e] * W_e, streamed operands outside RAM.

    W_e is the e-th n-bit slab of ``weights_layout`` (one weight per
    column per term).  Streamed values are examined in radix-4 bit
    pairs: pair 00 skips, 01 adds W, 10 adds 2W, 11 adds a precomputed
    3W (staged once per term when it pays off).  Scratch holds the 3W
    staging rows (n+2).
    """
    stream = [int(x) for x in stream]
    terms = len(stream)
    _require(terms >= 1, RangeError, "empty stream")
    _require(weights_layout.width == terms * n, RangeError,
             "weights region must hold len(stream) slabs of n rows")
    min_acc = 2 * n + ((terms - 1).bit_length() if terms > 1 else 0)
    _require(acc.width >= min_acc, CapacityError,
             f"accumulator needs at least {min_acc} rows")
    _require(scratch.width >= n + 2, CapacityError, "scratch needs n+2 rows")
    for x in stream:
        _require(0 <= x < 1 << n, RangeError, f"stream value {x} wider than {n} bits")
    for other in (weights_layout, scratch):
        _require(not acc.overlaps(other), OverlapError, "acc overlaps operand rows")
    _require(not scratch.overlaps(weights_layout), OverlapError,
             "scratch overlaps weights")

    bld = Builder()
    acc_max = None  # compile-time value bound; None until first write
    for e, x in enumerate(stream):
        w_rows = [weights_layout.row(e * n + j) for j in range(n)]
        acc_max = _term_mac(bld, x, n, w_rows, acc, scratch, acc_max)
    if acc_max is None:
        for r in acc.rows():
            bld.const(r, 0)
    return bld.done()


def emit_mac_ooor(scalar: int, n: int, src: RowRange, acc: RowRange,
                  scratch: RowRange, acc_max: int) -> tuple[KernelProgram, int]:
    """acc += scalar * src (streamed-scalar radix-4 MAC).

    acc must already hold a value bounded by acc_max; returns the
    program and the new bound for chaining further MACs.
    """
    _require(0 <= scalar < 1 << n, RangeError, "scalar wider than n bits")
    _require(src.width == n, RangeError, "src width mismatch")
    _require(scratch.width >= n + 2, CapacityError, "scratch needs n+2 rows")
    for other in (src, scratch):
        _require(not acc.overlaps(other), OverlapError, "acc overlaps operands")
    bld = Builder()
    new_max = _term_mac(bld, scalar, n, list(src.rows()), acc, scratch, acc_max)
    return bld.done(), new_max


def _term_mac(bld: Builder, x: int, n: int, w_rows, acc: RowRange,
              scratch: RowRange, acc_max):
    """One streamed term: acc += x * W via radix-4 digit adds."""
    if x == 0:
        return acc_max
    wmax = (1 << n) - 1
    digits = [(x >> (2 * p)) & 3 for p in range((n + 1) // 2)]
    use_3w = digits.count(3) >= 2
    if use_3w:
        w3 = _stage_3w(bld, w_rows, scratch)
    for p, digit in enumerate(digits):
        if digit == 0:
            continue
        if digit == 3 and use_3w:
            acc_max = _accumulate(bld, acc, w3, 2 * p, acc_max,
                                  3 * wmax << (2 * p))
        elif digit == 3:
            acc_max = _accumulate(bld, acc, w_rows, 2 * p, acc_max,
                                  wmax << (2 * p))
            acc_max = _accumulate(bld, acc, w_rows, 2 * p + 1, acc_max,
                                  wmax << (2 * p + 1))
        else:
            shift = 2 * p + (digit == 2)
            acc_max = _accumulate(bld, acc, w_rows, shift, acc_max,
                                  wmax << shift)
    return acc_max


def emit_clear(rows: RowRange) -> KernelProgram:
    """Zero a band of rows, one cycle per row."""
    bld = Builder()
    for r in rows.rows():
        bld.const(r, 0)
    return bld.done()


def _stage_3w(bld: Builder, w_rows, scratch: RowRange):
    """scratch <- 3W = W + (W << 1); returns the n+2 staged rows."""
    n = len(w_rows)
    bld.logic(w_rows[0], w_rows[0], scratch.row(0), TT_A)
    for j in range(1, n):
        bld.add_bit(w_rows[j], w_rows[j - 1], scratch.row(j), first=(j == 1))
    if n == 1:
        bld.logic(w_rows[0], w_rows[0], scratch.row(1), TT_A)
    else:
        bld.prop_bit(w_rows[n - 1], scratch.row(n))
        bld.carry_store(scratch.row(n + 1))
    return [scratch.row(j) for j in range(n + 2 if n > 1 else 2)]


def _accumulate(bld: Builder, acc: RowRange, slab_rows, shift: int,
                acc_max: int | None, add_max: int) -> int:
    """acc[shift:] += slab; ripple the carry only while it can matter.

    The first write initializes the whole accumulator by copy instead
    of adding into cleared rows.  acc_max bounds the value before the
    add and add_max the added value, so rows above
    bitlength(acc_max + add_max) stay zero.  Bits beyond the
    accumulator width drop (sum modulo 2^width).
    """
    if acc_max is None:
        for k in range(acc.width):
            j = k - shift
            if 0 <= j < len(slab_rows):
                bld.logic(slab_rows[j], slab_rows[j], acc.row(k), TT_A)
            else:
                bld.const(acc.row(k), 0)
        return add_max
    new_max = acc_max + add_max
    top = min(new_max.bit_length(), acc.width)
    for j, row in enumerate(slab_rows):
        if shift + j >= acc.width:
            break
        bld.add_bit(acc.row(shift + j), row, acc.row(shift + j),
                    first=(j == 0))
    for k in range(shift + len(slab_rows), top):
        bld.prop_bit(acc.row(k), acc.row(k))
    return new_max


class ShiftDirection:
    LEFT = "left"
    RIGHT = "right"


def emit_shift(direction: str, count: int, rows: RowRange) -> KernelProgram:
    """Horizontally shift each row by ``count`` columns, one cycle per
    row per unit step; vacated columns take the chain-in bit."""
    _require(count >= 0, RangeError, "negative shift count")
    _require(direction in (ShiftDirection.LEFT, ShiftDirection.RIGHT),
             RangeError, f"unknown direction {direction!r}")
    bld = Builder()
    left = direction == ShiftDirection.LEFT
    for _ in range(count):
        for r in rows.rows():
            bld.shift_step(r, r, left)
    return bld.done()


def emit_reduce_160_to_40(values: RowRange, mask_rows, scratch: RowRange) -> KernelProgram:
    """Two pair-merge levels (160 -> 80 -> 40 partial sums).

    mask_rows[0] keeps every 2nd column, mask_rows[1] every 4th; both
    must be preloaded through the memory port.  Partial sums grow by
    two bits, stored in place above ``values``; the designated columns
    are those where mask_rows[1] is set.
    """
    w = values.width - 2
    _require(w >= 1, RangeError, "values range must include 2 growth rows")
    _require(len(mask_rows) == 2, RangeError, "need two mask pattern rows")
    _require(scratch.width >= w + 2, CapacityError, "scratch needs w+2 rows")
    _require(not scratch.overlaps(values), OverlapError, "scratch overlaps values")
    bld = Builder(trash=scratch.row(w + 1))
    # level 1: columns i <- i + (i+1)
    for j in range(w):
        bld.shift_step(values.row(j), scratch.row(j), left=True)
    bld.maskload(mask_rows[0])
    for j in range(w):
        bld.add_bit(values.row(j), scratch.row(j), values.row(j),
                    first=(j == 0), pred=Predicate.MASK)
    bld.carry_and_row(mask_rows[0], values.row(w))
    # level 2: columns i <- i + (i+2), width w+1
    for j in range(w + 1):
        bld.shift_step(values.row(j), scratch.row(j), left=True)
    for j in range(w + 1):
        bld.shift_step(scratch.row(j), scratch.row(j), left=True)
    bld.maskload(mask_rows[1])
    for j in range(w + 1):
        bld.add_bit(values.row(j), scratch.row(j), values.row(j),
                    first=(j == 0), pred=Predicate.MASK)
    bld.carry_and_row(mask_rows[1], values.row(w + 1))
    return bld.done()
