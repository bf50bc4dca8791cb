"""Text and binary forms of instruction streams.

Text format, one instruction per line (# comments allowed):

    op SRC1 SRC2 DST tt=XXXX pred=always w1=sum w2=cout flags=c_en,port2

``tt`` is written t3t2t1t0 (entry for A=1,B=1 first).  ``flags`` is a
comma list drawn from c_en, c_rst, m_en, b_inv, port2; ``-`` for none.
The binary format is one 40-bit word per instruction, little-endian in
a 64-bit container.
"""

import struct

from .errors import ParseError
from .isa import (
    Instruction,
    Predicate,
    W1Sel,
    W2Sel,
    decode_instruction,
    encode_instruction,
)
from .microcode import KernelProgram

_PRED = {"always": Predicate.ALWAYS, "mask": Predicate.MASK,
         "carry": Predicate.CARRY, "ncarry": Predicate.NOT_CARRY}
_W1 = {"sum": W1Sel.SUM, "din1": W1Sel.DATA_IN, "right": W1Sel.FROM_RIGHT}
_W2 = {"cout": W2Sel.CARRY_OUT, "din2": W2Sel.DATA_IN, "left": W2Sel.FROM_LEFT}
_FLAGS = ("c_en", "c_rst", "m_en", "b_inv")


def format_instruction(instr: Instruction) -> str:
    tt = format(instr.tt, "04b")
    pred = next(k for k, v in _PRED.items() if v == instr.predicate)
    w1 = next(k for k, v in _W1.items() if v == instr.w1_sel)
    w2 = next(k for k, v in _W2.items() if v == instr.w2_sel)
    flags = [name for name in _FLAGS if getattr(instr, name)]
    if instr.wps2:
        flags.append("port2")
    return (f"op {instr.src1} {instr.src2} {instr.dst} tt={tt} "
            f"pred={pred} w1={w1} w2={w2} flags={','.join(flags) or '-'}")


def disassemble(program) -> str:
    """KernelProgram (or instruction iterable) to text."""
    instrs = getattr(program, "instructions", program)
    return "\n".join(format_instruction(i) for i in instrs) + "\n"


def _parse_field(token: str, want: str, lineno: int) -> str:
    key, _, value = token.partition("=")
    if key != want or not value:
        raise ParseError(f"expected {want}=..., got {token!r}", lineno)
    return value


def parse_instruction(line: str, lineno: int = 0) -> Instruction:
    parts = line.split()
    if len(parts) != 9 or parts[0] != "op":
        raise ParseError("expected 'op SRC1 SRC2 DST tt= pred= w1= w2= flags='",
                         lineno)
    try:
        src1, src2, dst = (int(p) for p in parts[1:4])
    except ValueError:
        raise ParseError(f"bad row numbers {parts[1:4]}", lineno) from None
    tt_text = _parse_field(parts[4], "tt", lineno)
    if len(tt_text) != 4 or set(tt_text) - {"0", "1"}:
        raise ParseError(f"bad truth table {tt_text!r}", lineno)
    tt = int(tt_text, 2)
    pred_text = _parse_field(parts[5], "pred", lineno)
    w1_text = _parse_field(parts[6], "w1", lineno)
    w2_text = _parse_field(parts[7], "w2", lineno)
    for value, table, what in ((pred_text, _PRED, "predicate"),
                               (w1_text, _W1, "w1 select"),
                               (w2_text, _W2, "w2 select")):
        if value not in table:
            raise ParseError(f"unknown {what} {value!r}", lineno)
    flags_text = _parse_field(parts[8], "flags", lineno)
    flag_set = set() if flags_text == "-" else set(flags_text.split(","))
    unknown = flag_set - set(_FLAGS) - {"port2"}
    if unknown:
        raise ParseError(f"unknown flags {sorted(unknown)}", lineno)
    wps2 = "port2" in flag_set
    return Instruction(
        src1=src1, src2=src2, dst=dst, tt=tt,
        predicate=_PRED[pred_text], w1_sel=_W1[w1_text], w2_sel=_W2[w2_text],
        wps1=not wps2, wps2=wps2,
        c_en="c_en" in flag_set, c_rst="c_rst" in flag_set,
        m_en="m_en" in flag_set, b_inv="b_inv" in flag_set)


def assemble(text: str) -> KernelProgram:
    """Text to KernelProgram; reports the offending line on error."""
    instrs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        instrs.append(parse_instruction(line, lineno))
    return KernelProgram(tuple(instrs),
                         frozenset(i.dst for i in instrs))


def to_binary(program) -> bytes:
    instrs = getattr(program, "instructions", program)
    return b"".join(struct.pack("<Q", encode_instruction(i)) for i in instrs)


def from_binary(blob: bytes) -> KernelProgram:
    if len(blob) % 8:
        raise ParseError("binary program length is not a multiple of 8 bytes")
    instrs = tuple(decode_instruction(w)
                   for (w,) in struct.iter_unpack("<Q", blob))
    return KernelProgram(instrs, frozenset(i.dst for i in instrs))
