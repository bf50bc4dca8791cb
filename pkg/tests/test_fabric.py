import numpy as np
import pytest

from cimbram.block import Mode
from cimbram.errors import ArityError, CapacityError, ModeError
from cimbram.fabric import DramStream, Fabric, SwizzleBuffer, transpose40
from cimbram.isa import TT_A, TT_XOR, Instruction, W1Sel
from cimbram.microcode import RowRange, emit_shift


class TestTranspose:
    def test_identity_matrix(self):
        eye = [1 << i for i in range(40)]
        assert transpose40(eye) == eye

    def test_involution_random(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            words = [int(w) for w in rng.integers(0, 1 << 40, 40)]
            assert transpose40(transpose40(words)) == words

    def test_single_row_case(self):
        words = [(1 << 40) - 1] + [0] * 39
        assert transpose40(words) == [1] * 40

    def test_population_count_preserved(self):
        rng = np.random.default_rng(2)
        words = [int(w) for w in rng.integers(0, 1 << 40, 40)]
        pop = sum(bin(w).count("1") for w in words)
        assert sum(bin(w).count("1") for w in transpose40(words)) == pop

    def test_arity(self):
        with pytest.raises(ArityError):
            transpose40([0] * 39)


class TestSwizzleBuffer:
    def test_ping_pong(self):
        buf = SwizzleBuffer()
        for i in range(39):
            assert not buf.push(i)
        assert buf.push(39)
        assert buf.fill_count == 0  # new active half is empty
        slices = buf.take_transposed()
        assert slices == transpose40(list(range(40)))

    def test_take_requires_full_half(self):
        with pytest.raises(CapacityError):
            SwizzleBuffer().take_transposed()


class TestDram:
    def test_cycle_charge(self):
        d = DramStream()
        assert d.charge(1) == 1
        assert d.charge(2048) == 1
        assert d.charge(2049) == 2


class TestLoadUnload:
    def test_single_element_layout(self):
        fab = Fabric.create(1)
        fab.load_transposed(0, 0, [0b1010], 4)
        col = fab.blocks[0].mem[0:4, 0]
        assert list(col) == [0, 1, 0, 1]

    def test_round_trip_160_random(self):
        rng = np.random.default_rng(3)
        vals = [int(v) for v in rng.integers(0, 256, 160)]
        fab = Fabric.create(1)
        fab.load_transposed(0, 8, vals, 8)
        out, _ = fab.unload_transposed(0, 8, 160, 8)
        assert out == vals

    def test_capacity_error(self):
        fab = Fabric.create(1)
        with pytest.raises(CapacityError):
            fab.load_transposed(0, 0, [0] * 161, 4)

    def test_multi_block_round_trip(self):
        rng = np.random.default_rng(4)
        vals = [int(v) for v in rng.integers(0, 1 << 16, 1000)]
        fab = Fabric.create(7)
        fab.load_transposed(0, 0, vals, 16)
        out, _ = fab.unload_transposed(0, 0, 1000, 16)
        assert out == vals

    def test_round_trip_all_widths(self):
        rng = np.random.default_rng(5)
        for width in range(1, 33):
            count = int(rng.integers(1, 161))
            vals = [int(v) for v in rng.integers(0, 1 << width, count)]
            fab = Fabric.create(1)
            fab.load_transposed(0, 3, vals, width)
            out, _ = fab.unload_transposed(0, 3, count, width)
            assert out == vals

    def test_zero_count_unload(self):
        fab = Fabric.create(1)
        vals, cycles = fab.unload_transposed(0, 0, 0, 8)
        assert vals == [] and cycles == 0

    def test_cycles_include_dram_and_port_writes(self):
        fab = Fabric.create(1)
        cycles = fab.load_transposed(0, 0, [1] * 160, 8)
        dram = -(-160 * 8 // 2048)
        assert cycles == dram + 4 * 8  # 4 column groups x width rows

    def test_agrees_with_pack_column(self):
        from cimbram.softref import ColumnLayout, pack_column

        fab = Fabric.create(1)
        fab.load_transposed(0, 5, [0b110101], 6)
        for row, bit in pack_column(0b110101, ColumnLayout(5, 6)):
            assert fab.blocks[0].mem[row, 0] == bit


class TestBroadcast:
    def test_shift_crosses_block_boundary(self):
        fab = Fabric.create(2)
        fab.blocks[1].mem[7, 0] = 1  # block 1, column 0
        instr = Instruction(7, 7, 7, TT_A, w1_sel=W1Sel.FROM_RIGHT)
        fab.broadcast(instr)
        assert fab.blocks[0].mem[7, 159] == 1
        assert fab.blocks[1].mem[7, 0] == 0

    def test_broadcast_xor_identical_blocks(self):
        rng = np.random.default_rng(6)
        fab = Fabric.create(4)
        row = rng.integers(0, 2, 160, dtype=np.uint8)
        for blk in fab.blocks:
            blk.mem[3] = row
            blk.mem[4] = row
        fab.broadcast(Instruction(3, 4, 5, TT_XOR, c_rst=True))
        for blk in fab.blocks:
            assert (blk.mem[5] == 0).all()

    def test_memory_mode_block_rejected(self):
        fab = Fabric.create(2)
        fab.blocks[1].mode = Mode.MEMORY
        with pytest.raises(ModeError):
            fab.broadcast(Instruction(0, 0, 1, TT_XOR))

    def test_block_subset_selection(self):
        rng = np.random.default_rng(10)
        fab = Fabric.create(3)
        for blk in fab.blocks:
            blk.mem[0] = rng.integers(0, 2, 160, dtype=np.uint8)
        before = [blk.mem[1].copy() for blk in fab.blocks]
        fab.broadcast(Instruction(0, 0, 1, TT_A, c_rst=True), block_set={0, 2})
        assert (fab.blocks[0].mem[1] == fab.blocks[0].mem[0]).all()
        assert (fab.blocks[2].mem[1] == fab.blocks[2].mem[0]).all()
        assert (fab.blocks[1].mem[1] == before[1]).all()  # unselected

    def test_marker_exits_left_end(self):
        """A single marker shifted left across 4 chained blocks leaves
        the fabric all-zero after 160*4 steps, matching a global shift."""
        fab = Fabric.create(4)
        fab.blocks[3].mem[0, 159] = 1
        instr = Instruction(0, 0, 0, TT_A, w1_sel=W1Sel.FROM_RIGHT)
        for _ in range(160 * 4):
            fab.broadcast(instr)
        assert all((blk.mem[0] == 0).all() for blk in fab.blocks)

    def test_chain_equals_global_bitvector_shift(self):
        """Broadcast shift over >= 4 chained blocks equals one global
        1-bit shift of the concatenated 640-bit row."""
        rng = np.random.default_rng(7)
        fab = Fabric.create(4)
        rows = [rng.integers(0, 2, 160, dtype=np.uint8) for _ in range(4)]
        for blk, row in zip(fab.blocks, rows):
            blk.mem[2] = row
        concat = np.concatenate(rows)
        prog = emit_shift("left", 3, RowRange(2, 1))
        fab.run_broadcast(prog)
        got = np.concatenate([blk.mem[2] for blk in fab.blocks])
        want = np.zeros_like(concat)
        want[:-3] = concat[3:]
        assert (got == want).all()

    def test_right_shift_chain(self):
        rng = np.random.default_rng(8)
        fab = Fabric.create(4)
        rows = [rng.integers(0, 2, 160, dtype=np.uint8) for _ in range(4)]
        for blk, row in zip(fab.blocks, rows):
            blk.mem[2] = row
        concat = np.concatenate(rows)
        fab.run_broadcast(emit_shift("right", 5, RowRange(2, 1)))
        got = np.concatenate([blk.mem[2] for blk in fab.blocks])
        want = np.zeros_like(concat)
        want[5:] = concat[:-5]
        assert (got == want).all()


class TestSnapshot:
    def test_save_load_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        fab = Fabric.create(3)
        for blk in fab.blocks:
            blk.mem[:] = rng.integers(0, 2, blk.mem.shape, dtype=np.uint8)
        fab.blocks[1].mode = Mode.MEMORY
        path = tmp_path / "snap.txt"
        fab.save_snapshot(path)
        other = Fabric.load_snapshot(path)
        assert len(other) == 3
        assert other.blocks[1].mode is Mode.MEMORY
        for a, b in zip(fab.blocks, other.blocks):
            assert (a.mem == b.mem).all()
