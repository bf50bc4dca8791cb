"""Functional model of a single compute-in-memory RAM block.

The block is a 20 Kb SRAM (128 rows x 160 columns, column multiplexing
factor 4, widest port shape 512x40) with one single-bit processing
element per column.  In hybrid mode a write to address 0x1FF is captured
as a compute instruction; every other address behaves as plain RAM.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import engine
from .errors import ModeError, RangeError, ReservedAddressError
from .isa import Instruction, decode_instruction, encode_instruction

SPECIAL_ADDR = 0x1FF


@dataclass(frozen=True)
class Geometry:
    rows: int = 128
    columns: int = 160
    port_width: int = 40
    column_mux: int = 4
    depth_words: int = 512

    def __post_init__(self):
        assert self.rows * self.columns == 20480
        assert self.depth_words * self.port_width == self.rows * self.columns
        assert self.column_mux == self.columns // self.port_width


GEOMETRY = Geometry()


class Mode(Enum):
    MEMORY = "memory"
    HYBRID = "hybrid"


class Variant(Enum):
    """The two block flavours: delay-optimized and area-optimized.

    Both compute identically; they differ only in the compute-mode clock
    (the area-optimized block senses the four column-muxed bitlines
    sequentially inside one extended cycle).
    """

    DELAY_OPTIMIZED = "d"
    AREA_OPTIMIZED = "a"

    @property
    def clock_mhz(self) -> float:
        return _CLOCK_MHZ[self]


BASELINE_BRAM_MHZ = 735.0
_CLOCK_MHZ = {Variant.DELAY_OPTIMIZED: 588.1, Variant.AREA_OPTIMIZED: 294.0}


def addr_to_bit(addr: int, bit: int) -> tuple[int, int]:
    """Map (word address, bit index) to the physical (row, column).

    Bit i of word ``addr`` lives at row ``addr // 4``, column
    ``4*i + addr % 4`` -- the column-mux interleave.  Every piece of
    layout-dependent code goes through this function.
    """
    return addr >> 2, 4 * bit + (addr & 3)


class Block:
    """One RAM block: bit grid, per-lane carry/mask latches, mode."""

    def __init__(self, mode: Mode = Mode.HYBRID,
                 variant: Variant = Variant.DELAY_OPTIMIZED):
        self.mode = mode
        self.variant = variant
        self.mem = np.zeros((GEOMETRY.rows, GEOMETRY.columns), dtype=np.uint8)
        self.carry = np.zeros(GEOMETRY.columns, dtype=np.uint8)
        self.mask = np.zeros(GEOMETRY.columns, dtype=np.uint8)
        self.pending: list[Instruction] = []

    def reset(self) -> None:
        """Zero the array, both latches, and the pending queue."""
        self.mem[:] = 0
        self.carry[:] = 0
        self.mask[:] = 0
        self.pending.clear()

    # -- port accesses ------------------------------------------------

    def mem_write(self, addr: int, data: int) -> None:
        """Write a 40-bit word; in hybrid mode 0x1FF captures an instruction."""
        if not 0 <= addr < GEOMETRY.depth_words:
            raise RangeError(f"address {addr:#x} outside 0..511")
        if not 0 <= data < 1 << 40:
            raise RangeError("data wider than the 40-bit port")
        if self.mode is Mode.HYBRID and addr == SPECIAL_ADDR:
            self.pending.append(decode_instruction(data))
            return
        row = addr >> 2
        lane = addr & 3
        bits = (data >> np.arange(40, dtype=np.uint64)).astype(np.uint8) & 1
        self.mem[row, lane::4] = bits

    def mem_read(self, addr: int) -> int:
        """Read a 40-bit word; 0x1FF is reserved in hybrid mode."""
        if not 0 <= addr < GEOMETRY.depth_words:
            raise RangeError(f"address {addr:#x} outside 0..511")
        if self.mode is Mode.HYBRID and addr == SPECIAL_ADDR:
            raise ReservedAddressError("0x1FF is the instruction capture address")
        row = addr >> 2
        lane = addr & 3
        bits = self.mem[row, lane::4]
        return int(bits.astype(np.uint64) @ (1 << np.arange(40, dtype=np.uint64)))

    # -- compute ------------------------------------------------------

    def execute(self, instr: Instruction, chain_in_left: int = 0,
                chain_in_right: int = 0) -> tuple[int, int]:
        """Run one compute cycle; returns the two corner chain-out bits."""
        if self.mode is not Mode.HYBRID:
            raise ModeError("block is in memory mode")
        word = encode_instruction(instr)
        return engine.step(self.mem, self.carry, self.mask, word,
                           chain_in_left, chain_in_right)

    def run_words(self, words: np.ndarray) -> None:
        """Run a chain-free encoded program (fast path)."""
        if self.mode is not Mode.HYBRID:
            raise ModeError("block is in memory mode")
        engine.run(self.mem, self.carry, self.mask,
                   np.ascontiguousarray(words, dtype=np.uint64))

    def run_program(self, program) -> None:
        self.run_words(program.encoded())

    def step_pending(self) -> bool:
        """Execute the oldest captured instruction, if any."""
        if not self.pending:
            return False
        self.execute(self.pending.pop(0))
        return True

    # -- serialization ------------------------------------------------

    def dump_image(self) -> str:
        """128 lines of 40 hex digits; digit d holds columns 4d..4d+3,
        column 4d in the digit's MSB."""
        lines = []
        for row in self.mem:
            digits = []
            for d in range(40):
                c = row[4 * d:4 * d + 4]
                digits.append(f"{c[0] << 3 | c[1] << 2 | c[2] << 1 | c[3]:x}")
            lines.append("".join(digits))
        return "\n".join(lines) + "\n"

    def load_image(self, text: str) -> None:
        rows = text.split()
        if len(rows) != GEOMETRY.rows:
            raise RangeError(f"expected {GEOMETRY.rows} image lines, got {len(rows)}")
        for r, line in enumerate(rows):
            if len(line) != 40:
                raise RangeError(f"image line {r} must be 40 hex digits")
            for d, ch in enumerate(line):
                v = int(ch, 16)
                self.mem[r, 4 * d] = v >> 3 & 1
                self.mem[r, 4 * d + 1] = v >> 2 & 1
                self.mem[r, 4 * d + 2] = v >> 1 & 1
                self.mem[r, 4 * d + 3] = v & 1
