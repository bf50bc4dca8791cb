"""Benchmark harness: six representative workloads at desk scale.

Each benchmark builds its kernel with the microcode emitters, runs it
on the fabric simulator, verifies every output element against the
scalar reference, and accounts cycles by phase.  Cycle bookkeeping:
load/unload cycles are port accesses plus DRAM stream cycles (DRAM
charged only for streaming workloads), compute cycles equal the
executed instruction count.
"""

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .block import Block, Variant
from .errors import ConfigError, VerificationError
from .fabric import Fabric
from .floatcode import emit_float_mul
from .isa import TT_A, TT_A_OR_NOT_B, TT_NOR, TT_NOT_A, TT_OR, Instruction, Predicate
from .microcode import (
    Builder,
    KernelProgram,
    RowRange,
    emit_clear,
    emit_dot_ooor,
    emit_mac_ooor,
    emit_reduce_160_to_40,
    emit_shift,
)
from .softref import (
    HFP8,
    FixedOp,
    MiniFloat,
    fixed_op,
    float_mul_ref,
    pack_float,
    unpack_float,
)

BENCHMARK_NAMES = ("gemv", "fir", "eltwise", "search", "raid", "reduction")

DEFAULT_SIZES = {
    "gemv": {"rows": 64, "cols": 64},
    "fir": {"taps": 128, "samples": 1024},
    "eltwise": {"elements": 4096},
    "search": {"records": 256, "plant": 5},
    "raid": {"stripes": 4, "bits": 4096},
    "reduction": {"elements": 320, "min_width": 4, "max_width": 20},
}

DEFAULT_PRECISION = {
    "gemv": "int8", "fir": "int16", "eltwise": "hfp8",
    "search": "int16", "raid": "bit", "reduction": "sweep",
}


@dataclass
class BenchmarkSpec:
    name: str
    sizes: dict = field(default_factory=dict)
    precision: str = ""
    variant: Variant = Variant.DELAY_OPTIMIZED
    seed: int = 0
    verify: bool = True

    def __post_init__(self):
        if self.name not in BENCHMARK_NAMES:
            raise ConfigError(f"unknown benchmark {self.name!r}; "
                              f"choose from {BENCHMARK_NAMES}")
        sizes = dict(DEFAULT_SIZES[self.name])
        sizes.update(self.sizes)
        self.sizes = sizes
        self.precision = self.precision or DEFAULT_PRECISION[self.name]


@dataclass
class Report:
    name: str
    sizes: dict
    precision: str
    variant: str
    seed: int
    phases: dict
    instruction_count: int
    dram_cycles: int
    port_cycles: int
    verified: bool | None
    mismatches: list
    wall_time_us: dict
    extra: dict = field(default_factory=dict)

    @property
    def total_cycles(self) -> int:
        return sum(self.phases.values())

    @property
    def verdict(self) -> str:
        if self.verified is None:
            return "UNVERIFIED"
        return "PASS" if self.verified and not self.mismatches else "FAIL"

    def raise_on_failure(self) -> None:
        if self.verdict == "FAIL":
            where, got, want = self.mismatches[0]
            raise VerificationError(
                f"{self.name} seed {self.seed}: first mismatch at {where}: "
                f"got {got}, want {want}")

    def to_json(self) -> str:
        data = asdict(self)
        data["total_cycles"] = self.total_cycles
        data["verdict"] = self.verdict
        return json.dumps(data, indent=2, default=str)


class _Meter:
    """Accumulates per-phase cycles and the bookkeeping split."""

    def __init__(self):
        self.load = 0
        self.compute = 0
        self.unload = 0
        self.dram = 0
        self.port = 0

    def loaded(self, port_cycles, dram_cycles=0):
        self.load += port_cycles + dram_cycles
        self.port += port_cycles
        self.dram += dram_cycles

    def unloaded(self, port_cycles, dram_cycles=0):
        self.unload += port_cycles + dram_cycles
        self.port += port_cycles
        self.dram += dram_cycles

    def ran(self, program_or_count):
        count = getattr(program_or_count, "cycle_count", program_or_count)
        self.compute += count


def _report(spec: BenchmarkSpec, meter: _Meter, mismatches, extra=None) -> Report:
    total = meter.load + meter.compute + meter.unload
    wall = {
        v.value: total / (v.clock_mhz * 1e6) * 1e6
        for v in (Variant.DELAY_OPTIMIZED, Variant.AREA_OPTIMIZED)
    }
    return Report(
        name=spec.name, sizes=spec.sizes, precision=spec.precision,
        variant=spec.variant.value, seed=spec.seed,
        phases={"load": meter.load, "compute": meter.compute,
                "unload": meter.unload},
        instruction_count=meter.compute, dram_cycles=meter.dram,
        port_cycles=meter.port,
        verified=(not mismatches if spec.verify else None),
        mismatches=mismatches[:8], wall_time_us=wall, extra=extra or {})


def _mismatch_scan(got, want, label="element"):
    return [(f"{label} {i}", g, w)
            for i, (g, w) in enumerate(zip(got, want)) if g != w]


def _load_split(fabric, block_idx, base_row, elements, width, meter,
                stream_dram):
    before = fabric.dram.queued_bits
    cycles = fabric.load_transposed(block_idx, base_row, elements, width)
    dram = -(-(fabric.dram.queued_bits - before) // fabric.dram.bandwidth)
    if not stream_dram:
        meter.loaded(cycles - dram, 0)
    else:
        meter.loaded(cycles - dram, dram)


def _unload_split(fabric, block_idx, base_row, count, width, meter,
                  stream_dram):
    before = fabric.dram.queued_bits
    values, cycles = fabric.unload_transposed(block_idx, base_row, count, width)
    dram = -(-(fabric.dram.queued_bits - before) // fabric.dram.bandwidth)
    if not stream_dram:
        meter.unloaded(cycles - dram, 0)
    else:
        meter.unloaded(cycles - dram, dram)
    return values


# -- gemv ------------------------------------------------------------------

def run_gemv(spec: BenchmarkSpec) -> Report:
    """int8 matrix-vector product, streamed-vector dot tiles, 27-bit acc.

    The matrix is pinned transposed (one output per column); the vector
    streams through the instruction sequence, so each weight tile is
    multiplied without storing the vector in RAM.  Tile partials are
    unloaded and summed exactly, standing in for the external
    bit-serial accumulation tree.
    """
    m, k = spec.sizes["rows"], spec.sizes["cols"]
    if not 1 <= m <= 160:
        raise ConfigError("gemv rows must be 1..160 at desk scale")
    n, acc_w = 8, 27
    tile_k = 10  # 10 slabs of 8 rows + 27-bit acc + scratch fit in 128
    rng = np.random.default_rng(spec.seed)
    matrix = rng.integers(0, 256, (m, k))
    vector = rng.integers(0, 256, k)
    meter = _Meter()
    fab = Fabric.create(1, variant=spec.variant)
    totals = [0] * m
    for t0 in range(0, k, tile_k):
        terms = min(tile_k, k - t0)
        for j in range(terms):
            _load_split(fab, 0, j * n, [int(v) for v in matrix[:, t0 + j]],
                        n, meter, stream_dram=True)
        prog = emit_dot_ooor(RowRange(0, terms * n),
                             [int(v) for v in vector[t0:t0 + terms]], n,
                             RowRange(80, acc_w), RowRange(110, n + 2))
        fab.run_local(prog, 0)
        meter.ran(prog)
        partials = _unload_split(fab, 0, 80, m, acc_w, meter, stream_dram=True)
        totals = [(a + p) % (1 << acc_w) for a, p in zip(totals, partials)]
    mism = []
    if spec.verify:
        want = [fixed_op(FixedOp.DOT,
                         [x for j in range(k)
                          for x in (int(matrix[i, j]), int(vector[j]))],
                         n, acc_width=acc_w).value
                for i in range(m)]
        mism = _mismatch_scan(totals, want, "output")
    return _report(spec, meter, mism, extra={"outputs": len(totals)})


# -- fir -------------------------------------------------------------------

def run_fir(spec: BenchmarkSpec) -> Report:
    """16-bit FIR filter; sample windows shared between neighboring
    blocks through the shift chain (one output per column)."""
    taps, samples = spec.sizes["taps"], spec.sizes["samples"]
    n = 16
    acc_w = 2 * n + max((taps - 1).bit_length(), 1)
    if acc_w > 40:
        raise ConfigError("accumulator wider than the unload port")
    rng = np.random.default_rng(spec.seed)
    x = [int(v) for v in rng.integers(0, 1 << n, samples)]
    h = [int(v) for v in rng.integers(0, 1 << n, taps)]
    nblocks = -(-samples // 160)
    fab = Fabric.create(nblocks, variant=spec.variant)
    meter = _Meter()
    _load_split(fab, 0, 0, x, n, meter, stream_dram=True)

    x_rows = RowRange(0, n)
    xs_rows = RowRange(n, n)
    acc = RowRange(2 * n, acc_w)
    scratch = RowRange(2 * n + acc_w, n + 2)
    # working copy of the samples, then clear the accumulators
    bld = Builder()
    for j in range(n):
        bld.logic(x_rows.row(j), x_rows.row(j), xs_rows.row(j), TT_A)
    setup = bld.done() + emit_clear(acc)
    fab.run_broadcast(setup)
    meter.ran(setup)
    shift = emit_shift("right", 1, xs_rows)
    acc_max = 0
    for kk in range(taps):
        if kk:
            fab.run_broadcast(shift)
            meter.ran(shift)
        mac, acc_max = emit_mac_ooor(h[kk], n, xs_rows, acc, scratch, acc_max)
        fab.run_broadcast(mac)
        meter.ran(mac)
    got = _unload_split(fab, 0, acc.base, samples, acc_w, meter,
                        stream_dram=True)
    mism = []
    if spec.verify:
        want = [sum(h[kk] * (x[t - kk] if t - kk >= 0 else 0)
                    for kk in range(taps)) % (1 << acc_w)
                for t in range(samples)]
        mism = _mismatch_scan(got, want, "sample")
    extra = {"lcu_overlapped_cycles": max(meter.load, meter.compute)
             + meter.unload}
    return _report(spec, meter, mism, extra=extra)


# -- eltwise ---------------------------------------------------------------

def run_eltwise(spec: BenchmarkSpec) -> Report:
    """Elementwise custom-float multiply, DRAM-streamed both ways."""
    count = spec.sizes["elements"]
    fmt = HFP8
    w = fmt.total_bits
    rng = np.random.default_rng(spec.seed)
    a_vals = [MiniFloat.from_bits(int(b), fmt)
              for b in rng.integers(0, 1 << w, count)]
    b_vals = [MiniFloat.from_bits(int(b), fmt)
              for b in rng.integers(0, 1 << w, count)]
    fab = Fabric.create(1, variant=spec.variant)
    meter = _Meter()
    prog = emit_float_mul(fmt, RowRange(0, w), RowRange(w, w), RowRange(2 * w, w))
    got: list[MiniFloat] = []
    for off in range(0, count, 160):
        chunk = slice(off, min(off + 160, count))
        _load_split(fab, 0, 0, [pack_float(v) for v in a_vals[chunk]], w,
                    meter, stream_dram=True)
        _load_split(fab, 0, w, [pack_float(v) for v in b_vals[chunk]], w,
                    meter, stream_dram=True)
        fab.run_local(prog, 0)
        meter.ran(prog)
        raw = _unload_split(fab, 0, 2 * w, chunk.stop - chunk.start, w, meter,
                            stream_dram=True)
        got.extend(unpack_float(bits, fmt) for bits in raw)
    mism = []
    if spec.verify:
        want = [float_mul_ref(a, b) for a, b in zip(a_vals, b_vals)]
        mism = _mismatch_scan(got, want)
    return _report(spec, meter, mism)


# -- search ----------------------------------------------------------------

def _search_program(key: int, width: int, slots: int) -> KernelProgram:
    """Per slot: fold the key-difference OR across the record bits into
    the mask (key bits are compile-time constants), then zero matching
    records under the mask."""
    if width < 2:
        raise ConfigError("search records must be at least 2 bits")
    bld = Builder(trash=127)
    temp = 126
    for s in range(slots):
        rows = [s * width + j for j in range(width)]
        first_tt = TT_NOT_A if key & 1 else TT_A
        bld.logic(rows[0], rows[0], temp, first_tt)
        for j in range(1, width):
            tt = TT_A_OR_NOT_B if key >> j & 1 else TT_OR
            last = j == width - 1
            # final combine inverts: mask = 1 only on exact match
            if last:
                tt = 0b0010 if key >> j & 1 else TT_NOR
            bld.emit(Instruction(temp, rows[j], temp, tt, m_en=last,
                                 c_rst=True))
        for j in range(width):
            bld.const(rows[j], 0, pred=Predicate.MASK)
    return bld.done()


def run_search(spec: BenchmarkSpec) -> Report:
    """Exact-match search: records matching a streamed key are zeroed.

    7 records per column, 16 rows of temporaries reserved at the top;
    operands live on chip (no DRAM traffic)."""
    records_n, plant = spec.sizes["records"], spec.sizes["plant"]
    width, slots, cols = 16, 7, 37
    if records_n > slots * cols:
        raise ConfigError("search benchmark holds at most 259 records")
    rng = np.random.default_rng(spec.seed)
    key = int(rng.integers(0, 1 << width))
    records = [int(v) for v in rng.integers(0, 1 << width, records_n)]
    records = [r if r != key else (r ^ 1) for r in records]  # then plant
    for pos in rng.choice(records_n, size=min(plant, records_n), replace=False):
        records[pos] = key
    fab = Fabric.create(1, variant=spec.variant)
    meter = _Meter()
    for s in range(slots):
        chunk = records[s * cols:(s + 1) * cols]
        if chunk:
            _load_split(fab, 0, s * width, chunk, width, meter,
                        stream_dram=False)
    prog = _search_program(key, width, slots)
    fab.run_local(prog, 0)
    meter.ran(prog)
    got = []
    for s in range(slots):
        n_here = len(records[s * cols:(s + 1) * cols])
        if n_here:
            got.extend(_unload_split(fab, 0, s * width, n_here, width, meter,
                                     stream_dram=False))
    mism = []
    if spec.verify:
        want = [0 if r == key else r for r in records]
        mism = _mismatch_scan(got, want, "record")
    return _report(spec, meter, mism,
                   extra={"key": key, "matches": records.count(key)})


# -- raid ------------------------------------------------------------------

def _load_rows(block: Block, base_row: int, bits: np.ndarray, meter: _Meter):
    """Store a flat bit array as consecutive untransposed rows."""
    rows = -(-len(bits) // 160)
    padded = np.zeros(rows * 160, dtype=np.uint8)
    padded[:len(bits)] = bits
    for r in range(rows):
        chunk = padded[r * 160:(r + 1) * 160]
        for lane in range(4):
            word = int(sum(int(chunk[4 * i + lane]) << i for i in range(40)))
            block.mem_write(4 * (base_row + r) + lane, word)
            meter.loaded(1)
    return rows


def _read_rows(block: Block, base_row: int, nbits: int, meter: _Meter):
    rows = -(-nbits // 160)
    out = np.zeros(rows * 160, dtype=np.uint8)
    for r in range(rows):
        for lane in range(4):
            word = block.mem_read(4 * (base_row + r) + lane)
            meter.unloaded(1)
            for i in range(40):
                out[r * 160 + 4 * i + lane] = word >> i & 1
    return out[:nbits]


def run_raid(spec: BenchmarkSpec) -> Report:
    """Parity rebuild of a lost stripe, untransposed row layout.

    Data stays bit-per-cell in plain rows (bitwise ops carry no
    cross-bit dependencies), parity is XORed in-RAM, one stripe is
    erased and reconstructed from the survivors plus parity."""
    stripes, nbits = spec.sizes["stripes"], spec.sizes["bits"]
    data_stripes = stripes - 1
    rows_per = -(-nbits // 160)
    if stripes * rows_per > 128:
        raise ConfigError("raid stripes exceed the row budget")
    rng = np.random.default_rng(spec.seed)
    data = [rng.integers(0, 2, nbits, dtype=np.uint8)
            for _ in range(data_stripes)]
    fab = Fabric.create(1, variant=spec.variant)
    blk = fab.blocks[0]
    meter = _Meter()
    for s, bits in enumerate(data):
        _load_rows(blk, s * rows_per, bits, meter)
    # parity band = XOR of the data stripes
    parity_base = data_stripes * rows_per
    bld = Builder()
    for r in range(rows_per):
        bld.logic(0 * rows_per + r, 1 * rows_per + r, parity_base + r,
                  0b0110)
        for s in range(2, data_stripes):
            bld.logic(parity_base + r, s * rows_per + r, parity_base + r,
                      0b0110)
    parity_prog = bld.done()
    fab.run_local(parity_prog, 0)
    meter.ran(parity_prog)
    # lose stripe 1, then rebuild it from survivors + parity
    lost = 1
    erase = emit_clear(RowRange(lost * rows_per, rows_per))
    fab.run_local(erase, 0)
    meter.ran(erase)
    bld = Builder()
    survivors = [s for s in range(data_stripes) if s != lost]
    for r in range(rows_per):
        dst = lost * rows_per + r
        bld.logic(survivors[0] * rows_per + r, parity_base + r, dst, 0b0110)
        for s in survivors[1:]:
            bld.logic(dst, s * rows_per + r, dst, 0b0110)
    rebuild = bld.done()
    fab.run_local(rebuild, 0)
    meter.ran(rebuild)
    got = _read_rows(blk, lost * rows_per, nbits, meter)
    mism = []
    if spec.verify:
        mism = [(f"bit {i}", int(g), int(w))
                for i, (g, w) in enumerate(zip(got, data[lost])) if g != w]
    return _report(spec, meter, mism)


# -- reduction -------------------------------------------------------------

def run_reduction(spec: BenchmarkSpec) -> Report:
    """In-RAM pairwise reduction to 40 partials per block, precision
    swept; partials are read out and summed exactly (standing in for
    the external bit-serial accumulator)."""
    elements = spec.sizes["elements"]
    lo, hi = spec.sizes["min_width"], spec.sizes["max_width"]
    if elements % 160:
        raise ConfigError("reduction element count must fill whole blocks")
    nblocks = elements // 160
    rng = np.random.default_rng(spec.seed)
    meter = _Meter()
    sweep = []
    mism = []
    for w in range(lo, hi + 1):
        vals = [int(v) for v in rng.integers(0, 1 << w, elements)]
        fab = Fabric.create(nblocks, variant=spec.variant)
        compute_here = 0
        # two predication mask patterns arrive through the memory port
        for b, blk in enumerate(fab.blocks):
            for row, stride in ((100, 2), (101, 4)):
                for lane in range(4):
                    bits = sum(1 << i for i in range(40)
                               if (4 * i + lane) % stride == 0)
                    blk.mem_write(4 * row + lane, bits)
                    meter.loaded(1)
        _load_split(fab, 0, 0, vals, w, meter, stream_dram=False)
        prog = emit_reduce_160_to_40(RowRange(0, w + 2), [100, 101],
                                     RowRange(60, w + 2))
        for b in range(nblocks):
            fab.run_local(prog, b)
            meter.ran(prog)
            compute_here += prog.cycle_count
        total = 0
        for b in range(nblocks):
            cols = _unload_split(fab, b, 0, 160, w + 2, meter,
                                 stream_dram=False)
            total += sum(cols[c] for c in range(0, 160, 4))
        want = sum(vals)
        if spec.verify and total != want:
            mism.append((f"width {w}", total, want))
        baseline_cycles = elements  # bit-parallel adder tree, one per cycle
        sweep.append({"width": w, "compute_cycles": compute_here,
                      "baseline_cycles": baseline_cycles,
                      "sum": total})
    return _report(spec, meter, mism, extra={"sweep": sweep})


_RUNNERS = {
    "gemv": run_gemv, "fir": run_fir, "eltwise": run_eltwise,
    "search": run_search, "raid": run_raid, "reduction": run_reduction,
}


def run_benchmark(spec: BenchmarkSpec) -> Report:
    return _RUNNERS[spec.name](spec)
