"""Timing comparison: compiled kernel vs the pure-numpy fallback.

Runs identical random instruction streams and real kernel programs on
both engines, checks the final states agree, and prints a rate table.

    python3 benchmarks/engine_compare.py [--instructions N]
"""

import argparse
import time

import numpy as np

import cimbram.engine.pure as pure
from cimbram.floatcode import emit_float_add, emit_float_mul
from cimbram.isa import Instruction, Predicate, encode_instruction
from cimbram.microcode import RowRange, emit_mul
from cimbram.softref import FP16, HFP8

try:
    import cimbram.engine._core as compiled
except ImportError:
    compiled = None


def random_words(rng, count):
    return np.array([encode_instruction(Instruction(
        src1=int(rng.integers(128)), src2=int(rng.integers(128)),
        dst=int(rng.integers(128)), tt=int(rng.integers(16)),
        predicate=Predicate(int(rng.integers(4))),
        c_en=bool(rng.integers(2)), c_rst=bool(rng.integers(2)),
        m_en=bool(rng.integers(2)), b_inv=bool(rng.integers(2))))
        for _ in range(count)], dtype=np.uint64)


def bench(engine, words, state, repeat):
    mem, carry, mask = (s.copy() for s in state)
    t0 = time.perf_counter()
    for _ in range(repeat):
        engine.run(mem, carry, mask, words)
    dt = time.perf_counter() - t0
    return repeat * len(words) / dt, (mem, carry, mask)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--instructions", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    state = (rng.integers(0, 2, (128, 160), dtype=np.uint8),
             rng.integers(0, 2, 160, dtype=np.uint8),
             rng.integers(0, 2, 160, dtype=np.uint8))

    w8, w16 = HFP8.total_bits, FP16.total_bits
    programs = {
        "random stream": random_words(rng, args.instructions),
        "mul16 kernel": emit_mul(RowRange(0, 16), RowRange(16, 16),
                                 RowRange(32, 32), RowRange(120, 1)).encoded(),
        "hfp8 multiply": emit_float_mul(
            HFP8, RowRange(0, w8), RowRange(w8, w8), RowRange(2 * w8, w8)
        ).encoded(),
        "fp16 add": emit_float_add(
            FP16, RowRange(0, w16), RowRange(w16, w16), RowRange(2 * w16, w16)
        ).encoded(),
    }

    print(f"{'program':16s} {'pure instr/s':>14s} {'compiled instr/s':>18s} "
          f"{'speedup':>8s}")
    for name, words in programs.items():
        rate_pure, out_pure = bench(pure, words, state, args.repeat)
        if compiled is None:
            print(f"{name:16s} {rate_pure:14.0f} {'(not built)':>18s}")
            continue
        rate_core, out_core = bench(compiled, words, state, args.repeat)
        agree = all((a == b).all() for a, b in zip(out_pure, out_core))
        print(f"{name:16s} {rate_pure:14.0f} {rate_core:18.0f} "
              f"{rate_core / rate_pure:7.1f}x{'' if agree else '  MISMATCH!'}")


if __name__ == "__main__":
    main()
