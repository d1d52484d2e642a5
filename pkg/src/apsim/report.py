"""End-to-end cost reports: energy, latency, area, and derived metrics.

Latency convention: array writes take two cycles end to end (`write_cycle=2`)
before the per-technology multiplier, and each compute step overlaps its mesh
traffic with array stages (the step costs the longer of the two). Peak-mode
metrics instead assume ideal single-cycle writes and charge only the output
buffering leg of the mesh; they bound what the array itself can stream.

Energy convention: cell energy goes to the owning phase's category
(GEMM / pooling / ReLU), every mesh bit plus all MAP-side staging goes to
data-movement, and categories always sum to the report totals.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .mapper import (CATEGORIES, ExecutionPlan, HardwareConfig, PlanPhase,
                     plan_ir, plan_lr)
from .tech import (DEFAULT_CLOCK, DEFAULT_MESH, PROFILES, SRAM_16NM,
                   AccountingError, ClockProfile, ConfigError,
                   InterconnectProfile, TechProfile, apply_voltage, area_of,
                   energy_of, latency_of, load_profile)
from .trace import EventTrace
from .workload import (ModelSpec, PrecisionConfig, load_model, load_precision,
                       total_ops)

SIM_WRITE_CYCLE = 2          # end-to-end array-write timing in cycles
PEAK_WRITE_CYCLE = 1         # peak metrics assume ideal single-cycle writes
OPS_PER_MAC_ROW_ROUND = 4    # peak: multiply + two adds counted as 2 ops/MAC x ...
MAX_BITS = 16

CSV_MAGIC = "# apsim-csv 1"


@dataclass(frozen=True)
class CostReport:
    model: str
    precision: str
    hw_mode: str
    tech: str
    energy_j: float
    latency_s: float
    area_mm2: float
    total_ops: int
    utilization: float
    energy_breakdown: dict[str, float]
    latency_breakdown: dict[str, float]

    @property
    def gops(self) -> float:
        return self.total_ops / self.latency_s / 1e9 if self.latency_s else 0.0

    @property
    def gops_per_w(self) -> float:
        return self.total_ops / self.energy_j / 1e9 if self.energy_j else 0.0

    @property
    def gops_per_w_per_mm2(self) -> float:
        return self.gops_per_w / self.area_mm2 if self.area_mm2 else 0.0

    @property
    def edp_js(self) -> float:
        return self.energy_j * self.latency_s

    def validate(self) -> None:
        if self.total_ops:
            if not (self.energy_j > 0 and self.latency_s > 0 and self.area_mm2 > 0):
                raise AccountingError("non-empty workload must cost energy, time, and area")
        for name, shares in (("energy", self.energy_breakdown),
                             ("latency", self.latency_breakdown)):
            total = sum(shares.values())
            if shares and abs(total - 1.0) > 1e-6:
                raise AccountingError(f"{name} breakdown sums to {total}, not 1")
            if any(v < -1e-12 for v in shares.values()):
                raise AccountingError(f"negative {name} share")
        if not (0.0 <= self.utilization <= 1.0 + 1e-9):
            raise AccountingError(f"utilization {self.utilization} outside [0, 1]")

    def to_dict(self) -> dict:
        d = {
            "model": self.model,
            "precision": self.precision,
            "hw_mode": self.hw_mode,
            "tech": self.tech,
            "energy_j": self.energy_j,
            "latency_s": self.latency_s,
            "area_mm2": self.area_mm2,
            "total_ops": self.total_ops,
            "utilization": self.utilization,
            "gops": self.gops,
            "gops_per_w": self.gops_per_w,
            "gops_per_w_per_mm2": self.gops_per_w_per_mm2,
            "edp_js": self.edp_js,
        }
        for cat in CATEGORIES:
            d[f"energy_{cat}"] = self.energy_breakdown.get(cat, 0.0)
            d[f"latency_{cat}"] = self.latency_breakdown.get(cat, 0.0)
        return d

    def summary(self) -> str:
        lines = [
            f"{self.model} ({self.precision}) on {self.hw_mode.upper()}/{self.tech}",
            f"  energy        {self.energy_j:.6g} J",
            f"  latency       {self.latency_s:.6g} s",
            f"  area          {self.area_mm2:.6g} mm^2",
            f"  GOPS          {self.gops:.6g}",
            f"  GOPS/W        {self.gops_per_w:.6g}",
            f"  GOPS/W/mm^2   {self.gops_per_w_per_mm2:.6g}",
            f"  EDP           {self.edp_js:.6g} J*s",
            f"  utilization   {self.utilization:.3f}",
        ]
        eb = ", ".join(f"{c}={self.energy_breakdown.get(c, 0.0):.1%}" for c in CATEGORIES)
        lb = ", ".join(f"{c}={self.latency_breakdown.get(c, 0.0):.1%}" for c in CATEGORIES)
        lines.append(f"  energy split  {eb}")
        lines.append(f"  latency split {lb}")
        return "\n".join(lines)


def _coerce_model(model) -> ModelSpec:
    return model if isinstance(model, ModelSpec) else load_model(model)


def _coerce_precision(precisions) -> PrecisionConfig:
    if isinstance(precisions, PrecisionConfig):
        return precisions
    if isinstance(precisions, int):
        return PrecisionConfig.fixed_width(precisions)
    return load_precision(precisions)


def _coerce_tech(tech) -> TechProfile:
    return tech if isinstance(tech, TechProfile) else load_profile(tech)


def _phase_latency(phase: PlanPhase, tech: TechProfile, clock: ClockProfile,
                   mesh: InterconnectProfile) -> float:
    stage_s = latency_of(phase.trace, tech, clock, write_cycle=SIM_WRITE_CYCLE)
    mesh_s = mesh.transfer_cycles(phase.mesh_bits_latency,
                                  clock.ap_frequency_hz) / clock.ap_frequency_hz
    if phase.latency_rule == "mesh":
        return mesh_s
    if phase.latency_rule == "stages":
        return stage_s
    return max(stage_s, mesh_s)


def make_plan(model: ModelSpec, precisions: PrecisionConfig,
              hw: HardwareConfig | None = None,
              mesh: InterconnectProfile = DEFAULT_MESH) -> ExecutionPlan:
    hw = hw or HardwareConfig.lr_default()
    if hw.mode == "ir":
        return plan_ir(model, precisions, mesh)
    return plan_lr(model, precisions, hw, mesh)


def aggregate_costs(plan: ExecutionPlan) -> tuple[EventTrace, float]:
    """Sum of all phase traces and mesh bits -- the calibration inputs."""
    agg, mesh_bits = EventTrace(), 0.0
    for lp in plan.layers:
        for ph in lp.phases:
            agg.add(ph.trace.scaled(ph.count))
            mesh_bits += ph.mesh_bits_energy * ph.count
    return agg, mesh_bits


def simulate(model, precisions, hw: HardwareConfig | None = None,
             tech=SRAM_16NM, interconnect: InterconnectProfile = DEFAULT_MESH,
             clock: ClockProfile = DEFAULT_CLOCK) -> CostReport:
    model = _coerce_model(model)
    precisions = _coerce_precision(precisions)
    tech = _coerce_tech(tech)
    hw = hw or HardwareConfig.lr_default()
    plan = make_plan(model, precisions, hw, interconnect)

    energy = {c: 0.0 for c in CATEGORIES}
    latency = {c: 0.0 for c in CATEGORIES}
    for lp in plan.layers:
        for ph in lp.phases:
            cell_j = energy_of(ph.trace, tech) * ph.count
            mesh_j = interconnect.energy(ph.mesh_bits_energy) * ph.count
            energy[ph.category] += cell_j
            energy["data_movement"] += mesh_j
            latency[ph.category] += _phase_latency(ph, tech, clock, interconnect) * ph.count

    e_total = sum(energy.values())
    l_total = sum(latency.values())
    report = CostReport(
        model=model.name,
        precision=precisions.name,
        hw_mode=hw.mode,
        tech=tech.name,
        energy_j=e_total,
        latency_s=l_total,
        area_mm2=area_of(hw, tech),
        total_ops=total_ops(model),
        utilization=min(1.0, plan.utilization),
        energy_breakdown={c: (v / e_total if e_total else 0.0) for c, v in energy.items()},
        latency_breakdown={c: (v / l_total if l_total else 0.0) for c, v in latency.items()},
    )
    report.validate()
    return report


# ---------------------------------------------------------------------------
# peak throughput

@dataclass(frozen=True)
class PeakMetrics:
    bits: int
    cycles_per_round: int
    gops: float
    gops_per_w: float
    gops_per_w_per_mm2: float


def peak_metrics(bits: int, hw: HardwareConfig | None = None, tech=SRAM_16NM,
                 interconnect: InterconnectProfile = DEFAULT_MESH,
                 clock: ClockProfile = DEFAULT_CLOCK) -> PeakMetrics:
    """Saturated-array throughput: every CAP row runs one MAC lane.

    A row round populates one operand word (2M writes), multiplies
    (4M^2 compares + 4M^2 writes), folds once in-CAP and once toward the MAP
    (4+4 stages each), and reads the product out (2M reads); only the
    readout's output-buffering bits touch the mesh. Four operations complete
    per row per round.
    """
    if not isinstance(bits, int) or not (1 <= bits <= MAX_BITS):
        raise ConfigError(f"unsupported bit-width {bits}: configured maximum is {MAX_BITS}")
    tech = _coerce_tech(tech)
    hw = hw or HardwareConfig.lr_default()
    m = bits
    rows = hw.total_rows

    compares = 4 * m * m + 8
    writes = 2 * m + 4 * m * m + 8
    reads = 2 * m
    cycles = compares + reads + writes * PEAK_WRITE_CYCLE * tech.write_cycle_multiplier

    wv = 2 * m + 1
    cells_compared = (16 * m * m + 12 * wv + 2 * m) * rows
    cells_written = (0.4 * m + 0.1 * m * m + 2 * 0.04 * wv) * rows
    out_bits = 2 * m * rows
    round_j = (cells_compared * tech.e_compare_cell
               + cells_written * tech.e_write_cell
               + interconnect.energy(out_bits))

    round_s = cycles / clock.ap_frequency_hz
    ops = OPS_PER_MAC_ROW_ROUND * rows
    gops = ops / round_s / 1e9
    gops_per_w = ops / round_j / 1e9
    return PeakMetrics(bits, cycles, gops, gops_per_w,
                       gops_per_w / area_of(hw, tech))


# ---------------------------------------------------------------------------
# mixed precision

@dataclass(frozen=True)
class MixedPrecisionRow:
    config: str
    average_bits: float
    energy_j: float
    latency_s: float
    edp_js: float
    energy_reduction: float     # baseline energy / this energy
    latency_norm: float         # this latency / baseline latency
    edp_norm: float


def evaluate_mixed_precision(model, configs, baseline=None, hw=None,
                             tech=SRAM_16NM,
                             interconnect: InterconnectProfile = DEFAULT_MESH,
                             clock: ClockProfile = DEFAULT_CLOCK) -> list[MixedPrecisionRow]:
    """Cost each precision configuration, normalized to the baseline
    (default: the last config, expected to be the widest)."""
    model = _coerce_model(model)
    cfgs = [_coerce_precision(c) for c in configs]
    reports = {c.name: simulate(model, c, hw, tech, interconnect, clock) for c in cfgs}
    base_cfg = _coerce_precision(baseline) if baseline is not None else cfgs[-1]
    base = reports.get(base_cfg.name) or simulate(model, base_cfg, hw, tech,
                                                  interconnect, clock)
    rows = []
    for c in cfgs:
        r = reports[c.name]
        rows.append(MixedPrecisionRow(
            config=c.name,
            average_bits=c.average_precision(),
            energy_j=r.energy_j,
            latency_s=r.latency_s,
            edp_js=r.edp_js,
            energy_reduction=base.energy_j / r.energy_j if r.energy_j else 0.0,
            latency_norm=r.latency_s / base.latency_s if base.latency_s else 0.0,
            edp_norm=r.edp_js / base.edp_js if base.edp_js else 0.0,
        ))
    return rows


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepSpec:
    models: tuple[str, ...] = ("alexnet", "vgg16", "resnet50")
    precisions: tuple[str, ...] = ("fixed:8",)
    techs: tuple[str, ...] = ("sram16nm",)
    modes: tuple[str, ...] = ("lr",)
    voltages: tuple[float, ...] = ()


def run_sweep(spec: SweepSpec, interconnect: InterconnectProfile = DEFAULT_MESH,
              clock: ClockProfile = DEFAULT_CLOCK):
    """Yield one CostReport per combination, in deterministic order."""
    for model_name in spec.models:
        model = load_model(model_name)
        for mode in spec.modes:
            hw = HardwareConfig.lr_default() if mode == "lr" else HardwareConfig.ir_for(model)
            for tech_name in spec.techs:
                base = load_profile(tech_name)
                points = spec.voltages or (base.v_dd,)
                for v in points:
                    tech = base if v == base.v_dd else apply_voltage(base, v)
                    for prec in spec.precisions:
                        yield simulate(model, prec, hw, tech, interconnect, clock)


def reports_to_csv(reports, stream=None) -> str:
    close = stream is None
    out = stream or io.StringIO()
    out.write(CSV_MAGIC + "\n")
    writer = None
    for r in reports:
        d = r.to_dict()
        if writer is None:
            writer = csv.DictWriter(out, fieldnames=list(d))
            writer.writeheader()
        writer.writerow({k: (format(v, ".6g") if isinstance(v, float) else v)
                         for k, v in d.items()})
    return out.getvalue() if close else ""


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)


# ---------------------------------------------------------------------------
# calibration

def fit_compare_energy(model="vgg16", targets={2: 80.9, 8: 63.1},
                       sram=None, reram=None,
                       interconnect: InterconnectProfile = DEFAULT_MESH) -> float:
    """Solve the per-cell compare energy from ReRAM/SRAM energy-ratio targets.

    The end-to-end energy is linear in the compare energy `e`:
    E_tech(p) = W_p * e_write_tech + C_p * e + X_p, with W (toggled write
    cells), C (engaged compare cells), and X (mesh joules) independent of the
    cell technology. Each target ratio r_p therefore pins e exactly:

        e = (W_p * (e_wR - r_p * e_wS) + X_p * (1 - r_p)) / (C_p * (r_p - 1))

    The returned value is the geometric mean of the per-target solutions.
    """
    from .tech import RERAM_16NM
    sram = _coerce_tech(sram) if sram is not None else SRAM_16NM
    reram = _coerce_tech(reram) if reram is not None else RERAM_16NM
    model = _coerce_model(model)
    solutions = []
    for p, r in sorted(targets.items()):
        plan = make_plan(model, PrecisionConfig.fixed_width(p))
        agg, mesh_bits = aggregate_costs(plan)
        w, c = agg.cells_written, agg.active_cells_compared
        x = interconnect.energy(mesh_bits)
        e = (w * (reram.e_write_cell - r * sram.e_write_cell) + x * (1 - r)) / (c * (r - 1))
        if e <= 0:
            raise ConfigError(f"ratio target {r} at {p} bits is not reachable")
        solutions.append(e)
    return math.exp(sum(math.log(s) for s in solutions) / len(solutions))
