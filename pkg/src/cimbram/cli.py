"""Command-line surface: benchmarks, assembler, analytical model, selftest."""

import argparse
import csv
import json
import sys
import time

from . import asm, engine
from .bench import BENCHMARK_NAMES, BenchmarkSpec, run_benchmark
from .block import Variant
from .errors import CimbramError
from .perfmodel import (
    PRECISIONS,
    ArchConfig,
    area_report,
    ram_mac_cycles,
    partition_sweep,
    peak_throughput,
)

_VARIANTS = {"d": Variant.DELAY_OPTIMIZED, "a": Variant.AREA_OPTIMIZED}


def _parse_sizes(pairs):
    sizes = {}
    for item in pairs or []:
        key, _, value = item.partition("=")
        if not value:
            raise SystemExit(f"bad --size {item!r}, expected key=value")
        sizes[key] = int(value)
    return sizes


def cmd_run(args) -> int:
    spec = BenchmarkSpec(
        name=args.benchmark,
        sizes=_parse_sizes(args.size),
        precision=args.precision or "",
        variant=_VARIANTS[args.variant],
        seed=args.seed,
        verify=args.verify,
    )
    report = run_benchmark(spec)
    print(f"{report.name}: {report.verdict}  "
          f"cycles={report.total_cycles} "
          f"(load {report.phases['load']}, compute {report.phases['compute']}, "
          f"unload {report.phases['unload']}; dram {report.dram_cycles})")
    for variant, us in report.wall_time_us.items():
        print(f"  wall time ({variant}): {us:.2f} us")
    if report.mismatches:
        where, got, want = report.mismatches[0]
        print(f"  first mismatch: {where}: got {got}, want {want} "
              f"(seed {report.seed})")
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.to_json() + "\n")
    if args.csv and "sweep" in report.extra:
        rows = report.extra["sweep"]
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=rows[0].keys())
            writer.writeheader()
            writer.writerows(rows)
    return 0 if report.verdict != "FAIL" else 1


def cmd_asm(args) -> int:
    with open(args.input) as fh:
        program = asm.assemble(fh.read())
    with open(args.output, "wb") as fh:
        fh.write(asm.to_binary(program))
    print(f"{program.cycle_count} instructions -> {args.output}")
    return 0


def cmd_disasm(args) -> int:
    with open(args.input, "rb") as fh:
        program = asm.from_binary(fh.read())
    text = asm.disassemble(program)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_perf(args) -> int:
    cfg = ArchConfig.load(args.config) if args.config else ArchConfig()
    if args.what == "throughput":
        rows = []
        for prec in PRECISIONS:
            row = {"precision": prec, "mac_cycles": ram_mac_cycles(prec)}
            for key, variant in _VARIANTS.items():
                row[f"gmacs_{key}"] = round(
                    peak_throughput(variant, prec, cfg), 1)
            if prec in cfg.baseline_gmacs:
                row["gmacs_baseline"] = cfg.baseline_gmacs[prec]
            rows.append(row)
        _emit_rows(rows, args)
    elif args.what == "area":
        report = area_report(cfg)
        if args.json:
            with open(args.json, "w") as fh:
                json.dump(report, fh, indent=2)
        for comp in report["components"]:
            print(f"{comp['name']:32s} {comp['bram']:5.1f} "
                  f"{comp['delay_optimized']:5.1f} {comp['area_optimized']:5.1f}")
        print(f"{'Total (%)':32s} {100.0:5.1f} {100.0:5.1f} {100.0:5.1f}")
        print(f"block overhead: {report['block_overhead_pct']}")
        print(f"chip overhead:  {report['chip_overhead_pct']}")
    else:  # partition
        rates = {"traditional": args.rate_traditional, "in_ram": args.rate_in_ram}
        over = {"in_ram_per_op": args.overhead}
        rows = partition_sweep(args.work, rates, over, points=args.points)
        best = max(rows, key=lambda r: r["speedup"])
        print(f"best split: {best['frac_in_ram']:.2f} of work in RAM, "
              f"speedup {best['speedup']:.3f}")
        _emit_rows(rows, args)
    return 0


def _emit_rows(rows, args) -> None:
    if getattr(args, "csv", None):
        fields = list(dict.fromkeys(k for row in rows for k in row))
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, restval="")
            writer.writeheader()
            writer.writerows(rows)
    if getattr(args, "json", None):
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    if not getattr(args, "csv", None):
        for row in rows:
            print("  ".join(f"{k}={v}" for k, v in row.items()))


def cmd_selftest(args) -> int:
    """Quick equivalence and property checks plus an engine timing race."""
    import numpy as np

    import cimbram.engine.pure as pure
    from .block import Block
    from .fabric import transpose40
    from .isa import TT_XOR, Instruction
    from .microcode import RowRange, emit_add, emit_mul

    failures = 0

    def check(name, ok):
        nonlocal failures
        print(f"  [{'ok' if ok else 'FAIL'}] {name}")
        failures += 0 if ok else 1

    rng = np.random.default_rng(0)
    # full-adder exhaustive
    ok = True
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                blk = Block()
                blk.mem[0, :] = a
                blk.mem[1, :] = b
                blk.carry[:] = c
                blk.execute(Instruction(0, 1, 2, TT_XOR, c_en=True))
                ok &= int(blk.mem[2, 0]) == (a + b + c) & 1
                ok &= int(blk.carry[0]) == (a + b + c) >> 1
    check("full-adder truth table", ok)

    words = [int(w) for w in rng.integers(0, 1 << 40, 40)]
    check("transpose involution", transpose40(transpose40(words)) == words)

    lengths_ok = all(
        emit_add(RowRange(0, n), RowRange(n, n), RowRange(2 * n, n + 1)
                 ).cycle_count == n + 1
        and emit_mul(RowRange(0, n), RowRange(n, n), RowRange(2 * n, 2 * n),
                     RowRange(120, 1)).cycle_count == n * n + 3 * n - 2
        for n in range(1, 21))
    check("add/multiply cycle formulas", lengths_ok)

    # engine parity + timing comparison on one long random program
    from .isa import encode_instruction, Predicate

    prog = np.array([encode_instruction(Instruction(
        src1=int(rng.integers(128)), src2=int(rng.integers(128)),
        dst=int(rng.integers(128)), tt=int(rng.integers(16)),
        predicate=Predicate(int(rng.integers(4))),
        c_en=bool(rng.integers(2)), c_rst=bool(rng.integers(2)),
        m_en=bool(rng.integers(2)), b_inv=bool(rng.integers(2))))
        for _ in range(args.instructions)], dtype=np.uint64)
    mem = rng.integers(0, 2, (128, 160), dtype=np.uint8)
    carry = rng.integers(0, 2, 160, dtype=np.uint8)
    mask = rng.integers(0, 2, 160, dtype=np.uint8)
    state_pure = (mem.copy(), carry.copy(), mask.copy())
    t0 = time.perf_counter()
    pure.run(*state_pure, prog)
    t_pure = time.perf_counter() - t0
    print(f"  pure engine:     {args.instructions / t_pure:10.0f} instr/s")
    try:
        import cimbram.engine._core as core
    except ImportError:
        core = None
        print("  compiled engine: not built")
    if core is not None:
        state_core = (mem.copy(), carry.copy(), mask.copy())
        t0 = time.perf_counter()
        core.run(*state_core, prog)
        t_core = time.perf_counter() - t0
        print(f"  compiled engine: {args.instructions / t_core:10.0f} instr/s "
              f"({t_pure / t_core:.1f}x)")
        check("engine parity on random program",
              all((a == b).all() for a, b in zip(state_pure, state_core)))
    print(f"active engine: {engine.NAME}")
    if failures:
        print(f"{failures} selftest check(s) FAILED")
        return 1
    print("selftest passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cimbram",
        description="Compute-in-memory block RAM simulator and benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark")
    p_run.add_argument("benchmark", choices=BENCHMARK_NAMES)
    p_run.add_argument("--variant", choices=("d", "a"), default="d")
    p_run.add_argument("--precision", default=None)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--verify", action="store_true", default=True)
    p_run.add_argument("--no-verify", dest="verify", action="store_false")
    p_run.add_argument("--size", action="append", metavar="KEY=VALUE")
    p_run.add_argument("--report", help="write the JSON report here")
    p_run.add_argument("--csv", help="write sweep rows as CSV")
    p_run.set_defaults(func=cmd_run)

    p_asm = sub.add_parser("asm", help="assemble text to binary")
    p_asm.add_argument("input")
    p_asm.add_argument("output")
    p_asm.set_defaults(func=cmd_asm)

    p_dis = sub.add_parser("disasm", help="disassemble binary to text")
    p_dis.add_argument("input")
    p_dis.add_argument("output", nargs="?")
    p_dis.set_defaults(func=cmd_disasm)

    p_perf = sub.add_parser("perf", help="analytical model reports")
    p_perf.add_argument("what", choices=("throughput", "area", "partition"))
    p_perf.add_argument("--config", help="key=value architecture file")
    p_perf.add_argument("--csv")
    p_perf.add_argument("--json")
    p_perf.add_argument("--work", type=float, default=1e6)
    p_perf.add_argument("--rate-traditional", type=float, default=1e9)
    p_perf.add_argument("--rate-in-ram", type=float, default=5e8)
    p_perf.add_argument("--overhead", type=float, default=0.0,
                        help="seconds of load/unload per RAM-side op")
    p_perf.add_argument("--points", type=int, default=101)
    p_perf.set_defaults(func=cmd_perf)

    p_self = sub.add_parser("selftest", help="equivalence checks + timing")
    p_self.add_argument("--instructions", type=int, default=20000)
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CimbramError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
