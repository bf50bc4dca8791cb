"""Shared helpers: direct column packing, independent of the fabric loader."""

import numpy as np

from cimbram.block import Block
from cimbram.softref import ColumnLayout, pack_column, unpack_column


def put_column(block: Block, base: int, width: int, col: int, value: int) -> None:
    for row, bit in pack_column(value, ColumnLayout(base, width)):
        block.mem[row, col] = bit


def get_column(block: Block, base: int, width: int, col: int) -> int:
    return unpack_column(block.mem[:, col], ColumnLayout(base, width))


def put_columns(block: Block, base: int, width: int, values) -> None:
    for col, v in enumerate(values):
        put_column(block, base, width, col, v)


def get_columns(block: Block, base: int, width: int, count: int = 160) -> list[int]:
    return [get_column(block, base, width, c) for c in range(count)]


def random_block(rng) -> Block:
    blk = Block()
    blk.mem[:] = rng.integers(0, 2, blk.mem.shape, dtype=np.uint8)
    blk.carry[:] = rng.integers(0, 2, 160, dtype=np.uint8)
    blk.mask[:] = rng.integers(0, 2, 160, dtype=np.uint8)
    return blk
