"""Compute-instruction set for the in-RAM processing elements.

A compute instruction is a 40-bit word captured through the special write
address of a block in hybrid mode.  Word layout (bit 0 = LSB):

    [6:0]   src1_row        port-A operand row
    [13:7]  src2_row        port-B operand row
    [20:14] dst_row         result row
    [24:21] truth_table     t3..t0 (bit 21+k holds entry k)
    [26:25] predicate       00 always, 01 mask, 10 carry, 11 not-carry
    [28:27] w1_sel          00 sum, 01 data-in-1, 10 from-right
    [30:29] w2_sel          00 carry-out, 01 data-in-2, 10 from-left
    [31]    wps1            write through port 1
    [32]    wps2            write through port 2
    [33]    c_en            carry latch enable
    [34]    c_rst           carry latch reset
    [35]    m_en            mask latch enable
    [36]    b_inv           invert the port-B bit feeding carry generation
    [39:37] reserved, must be zero

The truth table is indexed by ``2*A + B`` where A and B are the two read
bits; table entry k is bit k of the ``tt`` field.
"""

from dataclasses import dataclass, replace
from enum import IntEnum

from .errors import EncodingError, RangeError

NUM_ROWS = 128

# Common truth tables, by what they compute from (A, B).
TT_ZERO = 0b0000
TT_NOR = 0b0001
TT_NOT_A = 0b0011
TT_A_AND_NOT_B = 0b0100
TT_NOT_B = 0b0101
TT_XOR = 0b0110
TT_NAND = 0b0111
TT_AND = 0b1000
TT_XNOR = 0b1001
TT_B = 0b1010
TT_A = 0b1100
TT_A_OR_NOT_B = 0b1101
TT_OR = 0b1110
TT_ONES = 0b1111


class Predicate(IntEnum):
    ALWAYS = 0
    MASK = 1
    CARRY = 2
    NOT_CARRY = 3


class W1Sel(IntEnum):
    SUM = 0
    DATA_IN = 1
    FROM_RIGHT = 2


class W2Sel(IntEnum):
    CARRY_OUT = 0
    DATA_IN = 1
    FROM_LEFT = 2


@dataclass(frozen=True)
class Instruction:
    """One decoded 40-bit compute instruction."""

    src1: int
    src2: int
    dst: int
    tt: int
    predicate: Predicate = Predicate.ALWAYS
    w1_sel: W1Sel = W1Sel.SUM
    w2_sel: W2Sel = W2Sel.CARRY_OUT
    wps1: bool = True
    wps2: bool = False
    c_en: bool = False
    c_rst: bool = False
    m_en: bool = False
    b_inv: bool = False

    def with_(self, **kw) -> "Instruction":
        return replace(self, **kw)


def _check_row(name: str, row: int) -> None:
    if not 0 <= row < NUM_ROWS:
        raise RangeError(f"{name}={row} outside 0..{NUM_ROWS - 1}")


def encode_instruction(instr: Instruction) -> int:
    """Pack an instruction into its 40-bit word."""
    _check_row("src1", instr.src1)
    _check_row("src2", instr.src2)
    _check_row("dst", instr.dst)
    if not 0 <= instr.tt <= 0xF:
        raise RangeError(f"truth table {instr.tt} outside 0..15")
    if bool(instr.wps1) == bool(instr.wps2):
        raise EncodingError("exactly one of wps1/wps2 must be set")
    word = (
        instr.src1
        | instr.src2 << 7
        | instr.dst << 14
        | instr.tt << 21
        | int(instr.predicate) << 25
        | int(instr.w1_sel) << 27
        | int(instr.w2_sel) << 29
        | int(bool(instr.wps1)) << 31
        | int(bool(instr.wps2)) << 32
        | int(bool(instr.c_en)) << 33
        | int(bool(instr.c_rst)) << 34
        | int(bool(instr.m_en)) << 35
        | int(bool(instr.b_inv)) << 36
    )
    return word


def decode_instruction(word: int) -> Instruction:
    """Unpack a 40-bit word, rejecting illegal encodings."""
    if not 0 <= word < 1 << 40:
        raise RangeError(f"instruction word {word:#x} wider than 40 bits")
    if word >> 37:
        raise EncodingError(f"reserved bits set in {word:#011x}")
    wps1 = word >> 31 & 1
    wps2 = word >> 32 & 1
    if wps1 == wps2:
        raise EncodingError("exactly one of wps1/wps2 must be set")
    w1 = word >> 27 & 3
    w2 = word >> 29 & 3
    if w1 == 3 or w2 == 3:
        raise EncodingError("write select 0b11 is undefined")
    return Instruction(
        src1=word & 0x7F,
        src2=word >> 7 & 0x7F,
        dst=word >> 14 & 0x7F,
        tt=word >> 21 & 0xF,
        predicate=Predicate(word >> 25 & 3),
        w1_sel=W1Sel(w1),
        w2_sel=W2Sel(w2),
        wps1=bool(wps1),
        wps2=bool(wps2),
        c_en=bool(word >> 33 & 1),
        c_rst=bool(word >> 34 & 1),
        m_en=bool(word >> 35 & 1),
        b_inv=bool(word >> 36 & 1),
    )
