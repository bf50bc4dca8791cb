"""Multi-block composition: chaining, broadcast, transposed data movement.

Blocks sit in a column; block k's right chain pin feeds block k+1's
left pin, so the fabric behaves as one long 160*N-bit row for shifts.
Chain ends read 0.  The DRAM model is pure bandwidth accounting.
"""

from dataclasses import dataclass, field

import numpy as np

from .block import GEOMETRY, Block, Mode, Variant
from .errors import ArityError, CapacityError, ModeError, RangeError
from .isa import Instruction, encode_instruction
from . import engine

DRAM_BITS_PER_CLOCK = 2048


def transpose40(words) -> list[int]:
    """Corner-turn 40 40-bit words: bit i of output j = bit j of input i."""
    words = list(words)
    if len(words) != 40:
        raise ArityError(f"need exactly 40 words, got {len(words)}")
    out = [0] * 40
    for i, w in enumerate(words):
        if not 0 <= w < 1 << 40:
            raise RangeError("input word wider than 40 bits")
        for j in range(40):
            out[j] |= (w >> j & 1) << i
    return out


class SwizzleBuffer:
    """Ping-pong corner-turn FIFO between streamed words and bit slices."""

    def __init__(self):
        self.halves = [[], []]
        self.active = 0

    @property
    def fill_count(self) -> int:
        return len(self.halves[self.active])

    def push(self, word: int) -> bool:
        """Queue one element word; True when the active half just filled."""
        half = self.halves[self.active]
        half.append(word)
        if len(half) == 40:
            self.active ^= 1
            return True
        return False

    def take_transposed(self) -> list[int]:
        """Drain the full (inactive) half as 40 transposed bit slices."""
        other = self.halves[self.active ^ 1]
        if len(other) != 40:
            raise CapacityError("inactive half is not full")
        slices = transpose40(other)
        other.clear()
        return slices


@dataclass
class DramStream:
    """Charges ceil(bits / bandwidth) cycles for streamed data."""

    bandwidth: int = DRAM_BITS_PER_CLOCK
    queued_bits: int = 0

    def charge(self, bits: int) -> int:
        self.queued_bits += bits
        return -(-bits // self.bandwidth)


@dataclass
class Fabric:
    """A linear chain of blocks sharing broadcast instructions."""

    blocks: list[Block] = field(default_factory=list)
    dram: DramStream = field(default_factory=DramStream)

    @classmethod
    def create(cls, count: int, mode: Mode = Mode.HYBRID,
               variant: Variant = Variant.DELAY_OPTIMIZED) -> "Fabric":
        return cls(blocks=[Block(mode, variant) for _ in range(count)])

    def __len__(self) -> int:
        return len(self.blocks)

    def broadcast(self, instr: Instruction, block_set=None) -> None:
        """Execute one instruction on every selected block in one cycle.

        Chain bits resolve from pre-cycle neighbor reads of the source
        row, so a shift across chained blocks behaves as one global
        1-bit shift of the concatenated row.
        """
        targets = range(len(self.blocks)) if block_set is None else sorted(block_set)
        for k in targets:
            if self.blocks[k].mode is not Mode.HYBRID:
                raise ModeError(f"block {k} is in memory mode")
        word = encode_instruction(instr)
        lefts = {}
        rights = {}
        for k in targets:
            row = self.blocks[k - 1].mem[instr.src1] if k > 0 else None
            lefts[k] = int(row[-1]) if row is not None else 0
            row = (self.blocks[k + 1].mem[instr.src1]
                   if k + 1 < len(self.blocks) else None)
            rights[k] = int(row[0]) if row is not None else 0
        for k in targets:
            blk = self.blocks[k]
            engine.step(blk.mem, blk.carry, blk.mask, word, lefts[k], rights[k])

    def run_broadcast(self, program, block_set=None) -> None:
        for instr in program.instructions:
            self.broadcast(instr, block_set)

    def run_local(self, program, block_idx: int) -> None:
        """Run a chain-free program on one block (fast path)."""
        self.blocks[block_idx].run_program(program)

    # -- transposed data movement --------------------------------------

    def load_transposed(self, block_idx: int, base_row: int, elements,
                        width: int) -> int:
        """Store elements one per column, bit k at row base_row + k.

        Spills into consecutive blocks 160 elements at a time.  Returns
        the DRAM plus port-write cycles charged.  Unused columns of the
        touched rows are cleared.
        """
        elements = [int(e) for e in elements]
        if not 1 <= width <= 40:
            raise RangeError("element width must be 1..40")
        if base_row < 0 or base_row + width > GEOMETRY.rows:
            raise CapacityError("rows exhausted from base row")
        for e in elements:
            if not 0 <= e < 1 << width:
                raise RangeError(f"element {e} wider than {width} bits")
        nblocks = -(-len(elements) // GEOMETRY.columns) if elements else 0
        if block_idx + nblocks > len(self.blocks):
            raise CapacityError(
                f"{len(elements)} elements need {nblocks} blocks from "
                f"index {block_idx}, fabric has {len(self.blocks)}")
        cycles = self.dram.charge(len(elements) * width)
        for b in range(nblocks):
            chunk = elements[b * 160:(b + 1) * 160]
            block = self.blocks[block_idx + b]
            groups = {m for e in range(len(chunk)) for m in (e % 4,)}
            buf = SwizzleBuffer()
            for m in sorted(groups):
                group = [chunk[e] for e in range(m, len(chunk), 4)]
                for w in group + [0] * (40 - len(group)):
                    buf.push(w)
                slices = buf.take_transposed()
                for k in range(width):
                    block.mem_write(4 * (base_row + k) + m, slices[k])
                    cycles += 1
        return cycles

    def unload_transposed(self, block_idx: int, base_row: int, count: int,
                          width: int) -> tuple[list[int], int]:
        """Inverse of load_transposed; returns (values, cycles)."""
        if count < 0:
            raise RangeError("negative count")
        if not 1 <= width <= 40:
            raise RangeError("element width must be 1..40")
        if base_row < 0 or base_row + width > GEOMETRY.rows:
            raise RangeError("rows exhausted from base row")
        values: list[int] = []
        if count == 0:
            return values, 0
        nblocks = -(-count // GEOMETRY.columns)
        if block_idx + nblocks > len(self.blocks):
            raise RangeError("count exceeds fabric capacity")
        cycles = self.dram.charge(count * width)
        for b in range(nblocks):
            n_here = min(160, count - b * 160)
            block = self.blocks[block_idx + b]
            chunk = [0] * n_here
            for m in range(min(4, n_here)):
                slices = []
                for k in range(width):
                    slices.append(block.mem_read(4 * (base_row + k) + m))
                    cycles += 1
                for i in range(40):
                    e = 4 * i + m
                    if e < n_here:
                        chunk[e] = sum(
                            (slices[k] >> i & 1) << k for k in range(width))
            values.extend(chunk)
        return values, cycles

    # -- snapshot io ----------------------------------------------------

    def save_snapshot(self, path) -> None:
        lines = [f"blocks={len(self.blocks)} "
                 f"variant={self.blocks[0].variant.value if self.blocks else 'd'} "
                 f"modes={','.join(b.mode.value for b in self.blocks)}"]
        for blk in self.blocks:
            lines.append(blk.dump_image().rstrip("\n"))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load_snapshot(cls, path) -> "Fabric":
        with open(path) as fh:
            lines = fh.read().split("\n")
        header = dict(item.split("=", 1) for item in lines[0].split())
        count = int(header["blocks"])
        variant = Variant(header.get("variant", "d"))
        modes = header.get("modes", "").split(",") if count else []
        fab = cls()
        pos = 1
        for k in range(count):
            blk = Block(Mode(modes[k]), variant)
            blk.load_image("\n".join(lines[pos:pos + GEOMETRY.rows]))
            pos += GEOMETRY.rows
            fab.blocks.append(blk)
        return fab
