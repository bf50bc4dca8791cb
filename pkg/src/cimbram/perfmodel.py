"""Analytical throughput, area, and work-partitioning model.

Static reference data (device resources, area breakdowns, overhead
percentages, clock rates) comes from the published evaluation of the
delay-optimized and area-optimized compute-RAM blocks on an Arria-10
class device.  Baseline DSP/LB throughputs are user-supplied config:
they come from synthesis runs that are out of scope here.
"""

from dataclasses import dataclass, field

from .block import Variant
from .errors import ConsistencyError, RangeError
from .floatcode import float_cycle_budget_add, float_cycle_budget_mul
from .softref import FP16, FP32, HFP8, HFP8_ACC

LANES = 160


@dataclass
class ArchConfig:
    """Baseline device resources and clock rates."""

    lb_count: int = 33962
    dsp_count: int = 2423
    bram_count: int = 1518
    dram_bw_bits: int = 2048
    channel_width: int = 300
    freq_bram_mhz: float = 735.0
    freq_delay_opt_mhz: float = 588.1
    freq_area_opt_mhz: float = 294.0
    dsp_freq_fixed_mhz: float = 630.0
    dsp_freq_float_mhz: float = 550.0
    # peak GMACs/s of the traditional compute units, per precision;
    # not derivable from published text, so supplied by the user
    baseline_gmacs: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("lb_count", "dsp_count", "bram_count", "dram_bw_bits",
                     "channel_width"):
            if getattr(self, name) <= 0:
                raise RangeError(f"{name} must be positive")
        for name in ("freq_bram_mhz", "freq_delay_opt_mhz",
                     "freq_area_opt_mhz", "dsp_freq_fixed_mhz",
                     "dsp_freq_float_mhz"):
            if getattr(self, name) <= 0:
                raise RangeError(f"{name} must be positive")

    def freq_mhz(self, variant: Variant) -> float:
        if variant is Variant.DELAY_OPTIMIZED:
            return self.freq_delay_opt_mhz
        return self.freq_area_opt_mhz

    def save(self, path) -> None:
        lines = []
        for name in ("lb_count", "dsp_count", "bram_count", "dram_bw_bits",
                     "channel_width", "freq_bram_mhz", "freq_delay_opt_mhz",
                     "freq_area_opt_mhz", "dsp_freq_fixed_mhz",
                     "dsp_freq_float_mhz"):
            lines.append(f"{name} = {getattr(self, name)}")
        for prec, rate in sorted(self.baseline_gmacs.items()):
            lines.append(f"baseline.{prec} = {rate}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ArchConfig":
        cfg = cls()
        ints = {"lb_count", "dsp_count", "bram_count", "dram_bw_bits",
                "channel_width"}
        with open(path) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key.startswith("baseline."):
                    cfg.baseline_gmacs[key.split(".", 1)[1]] = float(value)
                elif key in ints:
                    setattr(cfg, key, int(value))
                else:
                    setattr(cfg, key, float(value))
        return cfg


# published area-percentage breakdown of one RAM tile (columns: plain
# BRAM, delay-optimized, area-optimized), each column totalling 100
AREA_COMPONENTS = [
    ("Input and output crossbars", 5.6, 4.5, 5.2),
    ("Decoders & wordline drivers", 7.8, 6.3, 7.3),
    ("Write drivers & sense amps.", 6.9, 14.0, 6.4),
    ("Memory cell array", 53.4, 43.0, 49.6),
    ("Routing (conn. & switch)", 26.0, 20.9, 24.1),
    ("Processing elements", 0.0, 11.1, 7.1),
]
BLOCK_OVERHEAD_PCT = {Variant.DELAY_OPTIMIZED: 25.4, Variant.AREA_OPTIMIZED: 8.1}
CHIP_OVERHEAD_PCT = {Variant.DELAY_OPTIMIZED: 3.8, Variant.AREA_OPTIMIZED: 1.2}
BLOCK_OVERHEAD_UM2 = {Variant.DELAY_OPTIMIZED: 1546.78, Variant.AREA_OPTIMIZED: 493.5}

# earlier compute-BRAM proposal (simultaneous wordline activation with
# modified sense amplifiers), reported verbatim for comparison only
PRIOR_COMPUTE_BRAM_REFERENCE = {
    "clock_overhead_pct": 60.0,
    "frequency_mhz": 469.0,
    "block_area_overhead_pct": 16.8,
    "chip_area_overhead_pct": 2.5,
    "parallelism": 128,
    "floating_point": False,
    "block_chaining": False,
}

# MAC accumulator widths per precision
ACC_WIDTH = {"int4": 16, "int8": 27, "int16": 36}
ACC_FORMAT = {"hfp8": HFP8_ACC, "fp16": FP32}
MUL_FORMAT = {"hfp8": HFP8, "fp16": FP16}

PRECISIONS = ("int4", "int8", "int16", "hfp8", "fp16")


def ram_mac_cycles(precision: str) -> int:
    """Cycles for one in-RAM MAC at the given precision.

    Fixed point: the n-bit multiply formula plus an accumulator-wide
    add (acc+1 cycles).  Float: the multiply budget at the operand
    format plus the add budget at the accumulator format.
    """
    if precision.startswith("int"):
        n = int(precision[3:])
        acc = ACC_WIDTH[precision]
        return (n * n + 3 * n - 2) + (acc + 1)
    if precision in MUL_FORMAT:
        return (float_cycle_budget_mul(MUL_FORMAT[precision])
                + float_cycle_budget_add(ACC_FORMAT[precision]))
    raise RangeError(f"unknown precision {precision!r}")


def peak_throughput(variant: Variant, precision: str,
                    cfg: ArchConfig | None = None) -> float:
    """Whole-device peak MAC rate in GigaMACs/s for the RAM fabric."""
    cfg = cfg or ArchConfig()
    cycles = ram_mac_cycles(precision)
    return cfg.bram_count * LANES * cfg.freq_mhz(variant) * 1e6 / cycles / 1e9


def area_report(cfg: ArchConfig | None = None) -> dict:
    """Area breakdown table plus block/chip overhead percentages.

    Raises ConsistencyError if a percentage column strays from 100 by
    more than the published one-decimal rounding allows.
    """
    cfg = cfg or ArchConfig()
    report = {
        "components": [
            {"name": name, "bram": b, "delay_optimized": d, "area_optimized": a}
            for name, b, d, a in AREA_COMPONENTS
        ],
        "totals": {"bram": 100.0, "delay_optimized": 100.0,
                   "area_optimized": 100.0},
        "block_overhead_pct": {v.value: p for v, p in BLOCK_OVERHEAD_PCT.items()},
        "chip_overhead_pct": {v.value: p for v, p in CHIP_OVERHEAD_PCT.items()},
        "block_overhead_um2": {v.value: p for v, p in BLOCK_OVERHEAD_UM2.items()},
        "bram_chip_area_pct": 15.0,
    }
    for col in ("bram", "delay_optimized", "area_optimized"):
        total = sum(c[col] for c in report["components"])
        # six entries published to one decimal: at most 0.05 each
        if abs(total - 100.0) > 0.5:
            raise ConsistencyError(f"{col} column sums to {total}, not 100")
        report["totals"][col] = round(total, 1)
    return report


def partition_speedup(total_work: float, frac_in_ram: float,
                      unit_rates: dict, overheads: dict | None = None) -> dict:
    """Speedup of splitting work between traditional units and RAM compute.

    unit_rates: {"traditional": ops/s, "in_ram": ops/s}.
    overheads: {"in_ram_per_op": seconds} charged for load/unload of
    the RAM-side share.  Completion time is the max of the two sides;
    speedup is relative to frac=0.
    """
    f = frac_in_ram
    if not 0.0 <= f <= 1.0:
        raise RangeError(f"fraction {f} outside [0, 1]")
    if total_work <= 0:
        raise RangeError("total_work must be positive")
    ov = (overheads or {}).get("in_ram_per_op", 0.0)
    r_trad = unit_rates["traditional"]
    r_com = unit_rates["in_ram"]
    t_trad = (1.0 - f) * total_work / r_trad
    t_com = f * total_work / r_com + f * total_work * ov
    t = max(t_trad, t_com)
    baseline = total_work / r_trad
    return {
        "frac_in_ram": f,
        "time_traditional": t_trad,
        "time_in_ram": t_com,
        "completion_time": t,
        "speedup": baseline / t if t > 0 else float("inf"),
    }


def partition_sweep(total_work: float, unit_rates: dict,
                    overheads: dict | None = None, points: int = 101) -> list[dict]:
    return [partition_speedup(total_work, i / (points - 1), unit_rates, overheads)
            for i in range(points)]
