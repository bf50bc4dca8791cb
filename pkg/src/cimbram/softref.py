"""Independent scalar oracle for the bit-serial kernels.

Arbitrary-width fixed-point arithmetic plus the custom minifloat
semantics written down in docs/float-semantics.md.  Everything here is
plain Python integer math, deliberately sharing no code with the
microcode emitters it verifies.
"""

from dataclasses import dataclass
from enum import Enum

from .errors import FormatError, RangeError, WidthError


# -- fixed point ----------------------------------------------------------

@dataclass(frozen=True)
class FixedVal:
    value: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= 64:
            raise WidthError(f"width {self.width} outside 1..64")
        if not 0 <= self.value < 1 << self.width:
            raise WidthError(f"{self.value} does not fit in {self.width} bits")


class FixedOp(Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DOT = "dot"
    REDUCE_SUM = "reduce_sum"


def fixed_op(kind: FixedOp, operands, width: int, acc_width: int | None = None) -> FixedVal:
    """Exact integer result at the widened result width.

    ADD: n+1 bits.  SUB: n+1 bits, value (a-b) mod 2^(n+1) so the top
    bit is the borrow, matching the in-RAM subtract.  MUL: 2n bits.
    DOT/REDUCE_SUM: the declared accumulator width.
    """
    ops = [int(x) for x in operands]
    for x in ops:
        if not 0 <= x < 1 << width:
            raise WidthError(f"operand {x} does not fit in {width} bits")
    if kind is FixedOp.ADD:
        a, b = ops
        return FixedVal(a + b, width + 1)
    if kind is FixedOp.SUB:
        a, b = ops
        return FixedVal((a - b) % (1 << (width + 1)), width + 1)
    if kind is FixedOp.MUL:
        a, b = ops
        return FixedVal(a * b, 2 * width)
    if kind is FixedOp.DOT:
        if acc_width is None:
            raise WidthError("dot product needs an accumulator width")
        pairs = list(zip(ops[0::2], ops[1::2], strict=True))
        total = sum(a * b for a, b in pairs)
        return FixedVal(total % (1 << acc_width), acc_width)
    if kind is FixedOp.REDUCE_SUM:
        if acc_width is None:
            raise WidthError("reduction needs an accumulator width")
        return FixedVal(sum(ops) % (1 << acc_width), acc_width)
    raise WidthError(f"unknown op {kind}")


# -- minifloat ------------------------------------------------------------

@dataclass(frozen=True)
class FloatFormat:
    """Custom float format: 1 sign + E exponent + M mantissa bits."""

    exp_bits: int
    man_bits: int

    def __post_init__(self):
        if self.exp_bits < 2 or self.man_bits < 1:
            raise FormatError("need at least 2 exponent and 1 mantissa bit")
        if 1 + self.exp_bits + self.man_bits > 32:
            raise FormatError("format wider than 32 bits")

    @property
    def bias(self) -> int:
        return (1 << (self.exp_bits - 1)) - 1

    @property
    def total_bits(self) -> int:
        return 1 + self.exp_bits + self.man_bits

    @property
    def max_exp(self) -> int:
        return (1 << self.exp_bits) - 1

    @property
    def max_man(self) -> int:
        return (1 << self.man_bits) - 1


HFP8 = FloatFormat(4, 3)
FP16 = FloatFormat(5, 10)
FP32 = FloatFormat(8, 23)
HFP8_ACC = FloatFormat(6, 9)

_FORMATS = {"hfp8": HFP8, "fp16": FP16, "fp32": FP32}


def named_format(name: str) -> FloatFormat:
    return _FORMATS[name.lower()]


@dataclass(frozen=True)
class MiniFloat:
    """A value in a custom format.  exponent == 0 means zero (canonical)."""

    sign: int
    exponent: int
    mantissa: int
    fmt: FloatFormat

    def __post_init__(self):
        if not (0 <= self.sign <= 1 and 0 <= self.exponent <= self.fmt.max_exp
                and 0 <= self.mantissa <= self.fmt.max_man):
            raise FormatError("field out of range for format")
        if self.exponent == 0 and (self.mantissa or self.sign):
            # flush-to-zero: all zero encodings are the same zero
            object.__setattr__(self, "mantissa", 0)
            object.__setattr__(self, "sign", 0)

    @classmethod
    def zero(cls, fmt: FloatFormat) -> "MiniFloat":
        return cls(0, 0, 0, fmt)

    @classmethod
    def from_bits(cls, bits: int, fmt: FloatFormat) -> "MiniFloat":
        if not 0 <= bits < 1 << fmt.total_bits:
            raise FormatError("bit pattern wider than format")
        m = bits & fmt.max_man
        e = bits >> fmt.man_bits & fmt.max_exp
        s = bits >> (fmt.man_bits + fmt.exp_bits) & 1
        return cls(s, e, m, fmt)

    def to_bits(self) -> int:
        return (self.sign << (self.fmt.man_bits + self.fmt.exp_bits)
                | self.exponent << self.fmt.man_bits | self.mantissa)

    @property
    def is_zero(self) -> bool:
        return self.exponent == 0

    @property
    def significand(self) -> int:
        """nz*2^M + m; zero operands contribute 0."""
        if self.exponent == 0:
            return 0
        return (1 << self.fmt.man_bits) | self.mantissa

    def to_float(self) -> float:
        if self.is_zero:
            return 0.0
        mag = (1 + self.mantissa / (1 << self.fmt.man_bits)) * 2.0 ** (
            self.exponent - self.fmt.bias)
        return -mag if self.sign else mag

    @classmethod
    def from_float(cls, x: float, fmt: FloatFormat) -> "MiniFloat":
        """Nearest encoding with truncation; saturates, flushes tiny values."""
        if x == 0:
            return cls.zero(fmt)
        s = 1 if x < 0 else 0
        mag = abs(x)
        import math
        e = math.floor(math.log2(mag))
        if e + fmt.bias <= 0:
            return cls.zero(fmt)
        if e + fmt.bias > fmt.max_exp:
            return cls(s, fmt.max_exp, fmt.max_man, fmt)
        m = int((mag / 2.0 ** e - 1) * (1 << fmt.man_bits))
        return cls(s, e + fmt.bias, min(m, fmt.max_man), fmt)


def _check_formats(a: MiniFloat, b: MiniFloat) -> FloatFormat:
    if a.fmt != b.fmt:
        raise FormatError(f"mismatched formats {a.fmt} vs {b.fmt}")
    return a.fmt


def _clamp(sign: int, e: int, m: int, fmt: FloatFormat) -> MiniFloat:
    if e <= 0:
        return MiniFloat.zero(fmt)
    if e >= 1 << fmt.exp_bits:
        return MiniFloat(sign, fmt.max_exp, fmt.max_man, fmt)
    return MiniFloat(sign, e, m, fmt)


def float_mul_ref(a: MiniFloat, b: MiniFloat) -> MiniFloat:
    """Reference multiply per docs/float-semantics.md."""
    fmt = _check_formats(a, b)
    sign = a.sign ^ b.sign
    if a.is_zero or b.is_zero:
        return MiniFloat.zero(fmt)
    p = a.significand * b.significand
    ovf = p >> (2 * fmt.man_bits + 1) & 1
    m = (p >> (fmt.man_bits + ovf)) & fmt.max_man
    e = a.exponent + b.exponent - fmt.bias + ovf
    return _clamp(sign, e, m, fmt)


def float_add_ref(a: MiniFloat, b: MiniFloat) -> MiniFloat:
    """Reference add per docs/float-semantics.md (no cancellation renorm)."""
    fmt = _check_formats(a, b)
    key_a = a.exponent << fmt.man_bits | a.mantissa
    key_b = b.exponent << fmt.man_bits | b.mantissa
    big, small = (b, a) if key_b > key_a else (a, b)
    d = big.exponent - small.exponent
    aligned = small.significand >> d
    if big.sign == small.sign:
        r = big.significand + aligned
    else:
        r = big.significand - aligned
    if r == 0:
        return MiniFloat.zero(fmt)
    ovf = r >> (fmt.man_bits + 1) & 1
    m = (r >> ovf) & fmt.max_man
    e = big.exponent + ovf
    return _clamp(big.sign, e, m, fmt)


# -- column packing -------------------------------------------------------

@dataclass(frozen=True)
class ColumnLayout:
    """A value packed one-bit-per-row in a single column, LSB at base."""

    base: int
    width: int

    def __post_init__(self):
        if not (0 <= self.base and self.base + self.width <= 128 and self.width >= 1):
            raise RangeError("layout does not fit the 128-row geometry")


def pack_column(value: int, layout: ColumnLayout) -> list[tuple[int, int]]:
    """(row, bit) pairs for a value; matches the transposed loader exactly."""
    if not 0 <= value < 1 << layout.width:
        raise RangeError(f"{value} does not fit in {layout.width} bits")
    return [(layout.base + k, value >> k & 1) for k in range(layout.width)]


def unpack_column(bits, layout: ColumnLayout) -> int:
    """Inverse of pack_column; accepts {row: bit} or an indexable column."""
    value = 0
    for k in range(layout.width):
        value |= (int(bits[layout.base + k]) & 1) << k
    return value


def float_layout(fmt: FloatFormat, base: int) -> ColumnLayout:
    """Rows of a packed float: sign, exponent LSB..MSB, mantissa LSB..MSB."""
    return ColumnLayout(base, fmt.total_bits)


def pack_float(value: MiniFloat) -> int:
    """Bit image of a float in packing order (bit 0 = sign row)."""
    return (value.sign
            | value.exponent << 1
            | value.mantissa << (1 + value.fmt.exp_bits))


def unpack_float(bits: int, fmt: FloatFormat) -> MiniFloat:
    s = bits & 1
    e = bits >> 1 & fmt.max_exp
    m = bits >> (1 + fmt.exp_bits) & fmt.max_man
    return MiniFloat(s, e, m, fmt)
