"""Custom-precision floating-point instruction sequences.

Implements docs/float-semantics.md on the transposed column layout:
each packed value occupies 1+E+M rows (sign, exponent LSB..MSB,
mantissa LSB..MSB).  The scalar reference in ``softref`` implements the
same document independently; the two must agree bit for bit.

Flushed results only guarantee zero exponent rows; sign/mantissa rows
are don't-care in storage and canonicalize when unpacked.  That, plus
skipping re-normalization after subtractive cancellation, keeps the
sequences inside the published approximate cycle budgets.
"""

from math import ceil, log2

from .errors import CapacityError, OverlapError
from .isa import (
    NUM_ROWS,
    TT_A,
    TT_AND,
    TT_NAND,
    TT_NOR,
    TT_NOT_A,
    TT_OR,
    TT_XNOR,
    TT_XOR,
    Instruction,
    Predicate,
)
from .microcode import Builder, KernelProgram, RowRange
from .softref import FloatFormat

MASK = Predicate.MASK
CARRY = Predicate.CARRY
NOT_CARRY = Predicate.NOT_CARRY


class _Operand:
    """Row indices of one packed float: sign, exponent, mantissa."""

    def __init__(self, fmt: FloatFormat, rng: RowRange):
        if rng.width != fmt.total_bits:
            raise CapacityError(
                f"operand needs {fmt.total_bits} rows, got {rng.width}")
        self.sign = rng.base
        self.exp = [rng.base + 1 + j for j in range(fmt.exp_bits)]
        self.man = [rng.base + 1 + fmt.exp_bits + j for j in range(fmt.man_bits)]


class _Scratch:
    """Deterministic scratch-row allocator: free rows, top of array down."""

    def __init__(self, *reserved: RowRange):
        taken = set()
        for rng in reserved:
            taken.update(rng.rows())
        self.free = [r for r in range(NUM_ROWS - 1, -1, -1) if r not in taken]
        self.used: set[int] = set()

    def take(self, count: int = 1):
        if count > len(self.free):
            raise CapacityError("not enough scratch rows for float kernel")
        rows = [self.free.pop(0) for _ in range(count)]
        self.used.update(rows)
        return rows if count > 1 else rows[0]


def _check_operands(fmt, a, b, dst):
    for x, y in ((a, b), (a, dst), (b, dst)):
        if x.overlaps(y):
            raise OverlapError("float operand row ranges overlap")
    return _Operand(fmt, a), _Operand(fmt, b), _Operand(fmt, dst)


def _nz_chain(bld, exp_rows, out_row, m_en_last=False):
    """out <- OR of the exponent rows (nonzero flag), E-1 instructions."""
    srcs = [(exp_rows[0], exp_rows[1])] + [(out_row, r) for r in exp_rows[2:]]
    for i, (s1, s2) in enumerate(srcs):
        last = i == len(srcs) - 1
        bld.logic(s1, s2, out_row, TT_OR, m_en=m_en_last and last)


def emit_float_mul(fmt: FloatFormat, a: RowRange, b: RowRange,
                   dst: RowRange) -> KernelProgram:
    """dst <- a * b under the documented minifloat semantics.

    Sign XOR; exact significand product with the implicit bits supplied
    by the nonzero flags; exponent sum, bias subtract, and the product
    overflow folded into one borrow chain; saturation ORed in through
    the carry-generation path; zero inputs and underflow flushed by
    clearing the exponent rows under the not-carry predicate.
    """
    E, M = fmt.exp_bits, fmt.man_bits
    n = M + 1
    oa, ob, od = _check_operands(fmt, a, b, dst)
    sc = _Scratch(a, b, dst)
    trash = sc.take()
    ones = sc.take()
    nz_a, nz_b, z = sc.take(3)
    p_rows = sc.take(2 * n)
    es_rows = sc.take(E + 1)
    e3_rows = sc.take(E + 1)
    bld = Builder(trash=trash)

    bld.const(ones, 1)
    _nz_chain(bld, ob.exp, nz_b)
    bld.logic(oa.sign, ob.sign, od.sign, TT_XOR)

    # significand product: multiplier bits are a's mantissa then nz_a
    mult = oa.man + [nz_a]
    mcand = ob.man + [nz_b]
    for j in range(n):
        bld.logic(mcand[j], mult[0], p_rows[j], TT_AND)
    bld.const(p_rows[n], 0)
    for i in range(1, n - 1):
        bld.maskload(mult[i])
        for j in range(n):
            bld.add_bit(p_rows[i + j], mcand[j], p_rows[i + j],
                        first=(j == 0), pred=MASK)
        bld.carry_and_row(mult[i], p_rows[i + n])
    _nz_chain(bld, oa.exp, nz_a, m_en_last=True)  # mask <- nz_a for last pass
    i = n - 1
    for j in range(n):
        bld.add_bit(p_rows[i + j], mcand[j], p_rows[i + j],
                    first=(j == 0), pred=MASK)
    bld.carry_and_row(nz_a, p_rows[2 * n - 1])

    # exponent sum with the product overflow as carry-in; mask <- overflow
    ovf = p_rows[2 * n - 1]
    bld.carry_init(ovf, ones, m_en=True)
    for j in range(E):
        bld.sum_bit(oa.exp[j], ob.exp[j], es_rows[j], TT_XOR)
    bld.carry_store(es_rows[E])

    bld.logic(nz_a, nz_b, z, TT_NAND)

    # e3 = es - bias over E+1 bits; ends with carry = (e3 >= 0)
    bias = fmt.bias
    for j in range(E + 1):
        bit = bias >> j & 1
        if j == 0:
            # bias is odd: seed borrow and emit ~A in one cycle
            bld.emit(Instruction(es_rows[0], ones, e3_rows[0], TT_NOT_A,
                                 c_en=True, c_rst=True))
        elif bit:
            bld.prop_bit(es_rows[j], e3_rows[j])
        else:
            bld.sum_bit(es_rows[j], ones, e3_rows[j], TT_NOT_A)

    bld.carry_and_not_row(z, ones)  # carry = (e3 >= 0) AND both nonzero

    sat = e3_rows[E]
    for j in range(E):
        bld.or_when_carry(e3_rows[j], sat, od.exp[j])
    for j in range(M):
        bld.or_when_carry(p_rows[M + j], sat, od.man[j])
    for j in range(M):
        bld.or_when_carry(p_rows[M + 1 + j], sat, od.man[j], pred=MASK)
    for j in range(E):
        bld.clear_where_not_carry(od.exp[j])

    prog = bld.done()
    return KernelProgram(prog.instructions, prog.rows_written,
                         frozenset(sc.used), prog.stats)


def emit_float_add(fmt: FloatFormat, a: RowRange, b: RowRange,
                   dst: RowRange) -> KernelProgram:
    """dst <- a + b under the documented minifloat semantics.

    Magnitude compare through the borrow chain picks big/small (the
    selection copies ride the carry-generation path so the flag
    survives); the small significand aligns with masked binary shifts;
    one masked add pass and one masked subtract pass share the result
    rows; overflow select, saturation OR, and an all-zero-result flush
    of the exponent rows finish the job.
    """
    E, M = fmt.exp_bits, fmt.man_bits
    oa, ob, od = _check_operands(fmt, a, b, dst)
    sc = _Scratch(a, b, dst)
    trash = sc.take()
    ones = sc.take()
    nz_a, nz_b = sc.take(2)
    re_rows = sc.take(E)            # big exponent
    dd_rows = sc.take(E)            # |exponent difference|
    ge_row = sc.take()
    sb_rows = sc.take(M + 1)        # big significand
    ss_rows = sc.take(M + 1)        # small significand, aligned in place
    r_rows = sc.take(M + 2)         # result significand
    eo_rows = sc.take(E + 1)        # output exponent + saturation flag
    zacc = sc.take()
    bld = Builder(trash=trash)

    bld.const(ones, 1)
    _nz_chain(bld, oa.exp, nz_a)
    _nz_chain(bld, ob.exp, nz_b)

    # carry <- (key_a >= key_b), key = exponent..mantissa magnitude
    bld.carry_one(ones)
    for ra, rb in zip(oa.man + oa.exp, ob.man + ob.exp):
        bld.sub_bit(ra, rb, trash)

    # selection: carry lanes take a as big, not-carry lanes take b
    for pred, big, small, nz_big, nz_small in (
            (CARRY, oa, ob, nz_a, nz_b), (NOT_CARRY, ob, oa, nz_b, nz_a)):
        bld.copy_keep_carry(big.sign, ones, od.sign, pred=pred)
        for j in range(E):
            bld.copy_keep_carry(big.exp[j], ones, re_rows[j], pred=pred)
        for j in range(M):
            bld.and_keep_carry(big.man[j], nz_big, sb_rows[j], pred=pred)
        bld.copy_keep_carry(nz_big, ones, sb_rows[M], pred=pred)
        for j in range(M):
            bld.and_keep_carry(small.man[j], nz_small, ss_rows[j], pred=pred)
        bld.copy_keep_carry(nz_small, ones, ss_rows[M], pred=pred)

    # dd = |e_a - e_b|: subtract, then conditional negate where a < b
    bld.carry_one(ones)
    for j in range(E):
        bld.sub_bit(oa.exp[j], ob.exp[j], dd_rows[j])
    bld.carry_store(ge_row)
    bld.maskload(ge_row, tt=TT_NOT_A)
    bld.carry_init(dd_rows[0], ones, invert=True)
    for j in range(1, E):
        bld.sum_bit(dd_rows[j], ones, dd_rows[j], TT_NOT_A,
                    pred=MASK, b_inv=True)

    # align the small significand right by dd (binary masked shifts;
    # any difference bit at or above 2^k0 clears the whole significand)
    k0 = min(ceil(log2(M + 1)), E)
    for k in range(k0):
        bld.maskload(dd_rows[k])
        step = 1 << k
        for r in range(M + 1):
            if r + step <= M:
                bld.logic(ss_rows[r + step], ss_rows[r + step], ss_rows[r],
                          TT_A, pred=MASK)
            else:
                bld.const(ss_rows[r], 0, pred=MASK)
    if k0 < E:
        high = dd_rows[k0:]
        if len(high) == 1:
            bld.maskload(high[0])
        else:
            bld.logic(high[0], high[1], zacc, TT_OR,
                      m_en=(len(high) == 2))
            for i, r in enumerate(high[2:]):
                bld.logic(zacc, r, zacc, TT_OR, m_en=(i == len(high) - 3))
        for r in range(M + 1):
            bld.const(ss_rows[r], 0, pred=MASK)

    # add pass (same signs) and subtract pass (different signs)
    bld.const(r_rows[M + 1], 0)
    bld.maskload(oa.sign, ob.sign, TT_XNOR)
    for j in range(M + 1):
        bld.add_bit(sb_rows[j], ss_rows[j], r_rows[j], first=(j == 0), pred=MASK)
    bld.carry_store_and_set_one(r_rows[M + 1], ones, pred=MASK)
    bld.maskload(oa.sign, ob.sign, TT_XOR)
    for j in range(M + 1):
        bld.sub_bit(sb_rows[j], ss_rows[j], r_rows[j], pred=MASK)

    # output exponent = big exponent + overflow; mask <- overflow
    bld.carry_init(r_rows[M + 1], ones, m_en=True)
    for j in range(E):
        bld.prop_bit(re_rows[j], eo_rows[j])
    bld.carry_store(eo_rows[E])

    # mantissa select (shift down one on overflow) + saturation OR
    for j in range(M):
        bld.logic(r_rows[j + 1], r_rows[j + 1], r_rows[j], TT_A, pred=MASK)
    for j in range(M):
        bld.logic(r_rows[j], eo_rows[E], od.man[j], TT_OR)
    for j in range(E):
        bld.logic(eo_rows[j], eo_rows[E], od.exp[j], TT_OR)

    # flush: all-zero result significand clears the exponent
    bld.logic(r_rows[0], r_rows[1], zacc, TT_OR)
    for r in r_rows[2:M + 1]:
        bld.logic(zacc, r, zacc, TT_OR)
    bld.maskload(zacc, r_rows[M + 1], TT_NOR)
    for j in range(E):
        bld.const(od.exp[j], 0, pred=MASK)

    prog = bld.done()
    return KernelProgram(prog.instructions, prog.rows_written,
                         frozenset(sc.used), prog.stats)


def float_cycle_budget_mul(fmt: FloatFormat) -> int:
    """Published approximate cycles for an in-RAM float multiply."""
    return fmt.man_bits ** 2 + 7 * fmt.man_bits + 3 * fmt.exp_bits + 5


def float_cycle_budget_add(fmt: FloatFormat) -> int:
    """Published approximate cycles for an in-RAM float add."""
    return (2 * fmt.man_bits * fmt.exp_bits + 9 * fmt.man_bits
            + 7 * fmt.exp_bits + 12)
