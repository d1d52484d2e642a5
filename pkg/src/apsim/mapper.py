"""Map CNN layers onto clustered associative-processor hardware.

Limited-resources (LR) planning: an 8x8 grid of clusters, each with 8x8
compute APs (CAPs) and one memory AP (MAP). A conv/fc layer lowers to GEMM
(i output channels x depth j x u output columns). Each CAP row hosts one
MAC lane (one (output element, depth index) pair); a CAP packs
G = floor(rows / depth) lanes-groups, so a cluster offers 64*G output
elements per step. Clusters own disjoint output elements, weights stay
resident while input columns stream in from the MAP, and layers whose depth
exceeds the row budget tile the depth and merge partial sums with vector
additions. Per step, mesh transfer overlaps compute (the step takes the
longer of the two), which is how MAP write latency stays hidden.

Infinite-resources (IR) planning: one giant cluster sized to the largest
layer, every layer in a single step (fold factor 1), weights loaded offline
(excluded from inference cost). All of a layer's input columns funnel
through the single cluster port, so IR streaming is serialized where LR
distributes it across 64 cluster ports.

Stage counts vs cell counts: a pass slot is counted once per step (the
in-CAP accumulation runs its group folds in parallel segments but its
depth sequentially, so folding costs 4 compares + 4 writes per group per
depth element); energy-side cell counts cover every engaged row. Write
cells use toggle activity factors (a written cell costs energy only when
it changes state): 0.4 per populated operand bit, 0.1 per multiply-pass
product bit, 0.04 per accumulate bit. These activity constants and the
readout/vector-op cell formulas below are the documented cost-model core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .tech import DEFAULT_MESH, InterconnectProfile
from .trace import EventTrace
from .workload import COMPUTE_KINDS, LayerSpec, ModelSpec, PrecisionConfig, im2col_dims, macs_of, resolve_layer_bits

# toggle activity factors (fraction of written cells that change state)
POPULATE_TOGGLE = 0.4
MULTIPLY_TOGGLE = 0.1
ACCUMULATE_TOGGLE = 0.04

CATEGORIES = ("gemm", "pooling", "relu", "data_movement")


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class HardwareConfig:
    mode: str                              # "lr" | "ir"
    clusters: tuple[int, int] = (8, 8)
    caps_per_cluster: tuple[int, int] = (8, 8)
    maps_per_cluster: int = 1
    ap_rows: int = 4800
    ap_cols: int = 16                      # two words x 8-bit max precision

    @property
    def n_clusters(self) -> int:
        return self.clusters[0] * self.clusters[1]

    @property
    def n_caps(self) -> int:
        return self.caps_per_cluster[0] * self.caps_per_cluster[1]

    @property
    def total_caps(self) -> int:
        return self.n_clusters * self.n_caps

    @property
    def total_rows(self) -> int:
        return self.total_caps * self.ap_rows

    def total_cells(self) -> int:
        aps = self.n_clusters * (self.n_caps + self.maps_per_cluster)
        return aps * self.ap_rows * self.ap_cols

    @classmethod
    def lr_default(cls) -> "HardwareConfig":
        return cls(mode="lr")

    @classmethod
    def ir_for(cls, model: ModelSpec) -> "HardwareConfig":
        """One cluster large enough to run the fattest layer in one step."""
        rows = max((macs_of(ly) for ly in model.layers if ly.kind in COMPUTE_KINDS),
                   default=1)
        caps = max(1, math.ceil(rows / cls.ap_rows))
        return cls(mode="ir", clusters=(1, 1), caps_per_cluster=(caps, 1),
                   maps_per_cluster=max(1, caps // 64))


@dataclass(frozen=True)
class PlanPhase:
    """One repeated phase of a layer's schedule.

    latency_rule: "max" overlaps mesh transfer with array stages (step
    pipelining), "stages" is array-bound, "mesh" is transfer-bound with the
    array-side writes hidden.
    """

    name: str
    category: str
    count: int
    trace: EventTrace                   # per repetition, system-wide cells
    mesh_bits_energy: float = 0.0       # per repetition, all mesh traffic
    mesh_bits_latency: float = 0.0      # per repetition, worst single port
    latency_rule: str = "max"


@dataclass(frozen=True)
class LayerPlan:
    layer: LayerSpec
    w_bits: int
    a_bits: int
    category: str
    phases: tuple[PlanPhase, ...]
    fold_factor: int = 1
    gemm_dims: tuple[int, int, int] | None = None   # (i, j, u)
    steps: int = 0
    utilization: float = 1.0


@dataclass(frozen=True)
class ExecutionPlan:
    model: ModelSpec
    hw: HardwareConfig
    precision_name: str
    layers: tuple[LayerPlan, ...]

    @property
    def utilization(self) -> float:
        """Step-weighted MAC-row occupancy of the compute steps."""
        busy = total = 0.0
        for lp in self.layers:
            if lp.gemm_dims is not None:
                busy += macs_of(lp.layer)
                total += lp.steps * self.hw.total_rows
        return busy / total if total else 0.0

    def describe(self) -> str:
        lines = [f"plan {self.model.name} hw={self.hw.mode} precision={self.precision_name}"]
        for lp in self.layers:
            extra = ""
            if lp.gemm_dims:
                i, j, u = lp.gemm_dims
                extra = f" gemm={i}x{j}x{u} steps={lp.steps}"
            lines.append(f"  {lp.layer.name:12s} {lp.layer.kind:12s} "
                         f"({lp.w_bits},{lp.a_bits})b fold={lp.fold_factor}{extra}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# cell-count helpers (documented analytic model, see module docstring)

def _vector_add_cells(elements: float, m: int):
    """In-place addition of two stored vectors (4 passes x 3 key cells/bit)."""
    compares = 12 * m * elements
    writes = (POPULATE_TOGGLE * m + ACCUMULATE_TOGGLE * (m + 1)) * elements
    return compares, writes


def _const_add_cells(elements: float, m: int):
    """Adding a compile-time constant: the addend bit is baked into the
    program, so each bit needs only 2 passes over (carry, value)."""
    compares = 4 * m * elements
    writes = ACCUMULATE_TOGGLE * (m + 1) * elements
    return compares, writes


def _gemm_step_trace(hw: HardwareConfig, g: int, jc: int, mw: int, ma: int,
                     lanes_engaged: float) -> EventTrace:
    """Stage and cell counts of one compute step.

    Stage counts follow the full per-CAP schedule (idle lanes still take the
    cycles); cell counts cover only the lanes that hold data, matching the
    emulator's convention that unpopulated rows do not burn cell energy.
    """
    wv = mw + ma + 1                                   # accumulator width
    out_w = mw + ma + max(1, math.ceil(math.log2(max(jc, 2))))
    rows = lanes_engaged * jc
    t = EventTrace()
    t.n_write = g * jc + 4 * mw * ma + 4 * g * (jc - 1)
    t.n_compare = 4 * mw * ma + 4 * g * (jc - 1)
    t.n_read = g
    t.cells_written = (POPULATE_TOGGLE * ma + MULTIPLY_TOGGLE * mw * ma
                       + ACCUMULATE_TOGGLE * wv) * rows
    t.active_cells_compared = (16 * mw * ma * rows
                               + 12 * wv * (jc - 1) * lanes_engaged
                               + out_w * lanes_engaged)
    return t


def _elementwise_phase(name: str, category: str, kind: str, elements: int, m: int,
                       z: int, hw: HardwareConfig,
                       mesh_energy: float = 0.0, mesh_latency: float = 0.0) -> PlanPhase:
    """ReLU / pooling / vector-add work, word-parallel across all rows."""
    t = EventTrace()
    if kind == "relu":
        folds = max(1, math.ceil(elements / hw.total_rows))
        t.n_compare, t.n_write, t.n_read = (m - 1), (2 * m + 1), (m + 1)
        t.active_cells_compared = (3 * m - 1) * elements
        t.cells_written = 0.2 * (m + 1) * elements
    elif kind in ("maxpool", "avgpool"):
        s = z * z
        half = s // 2
        vops = math.ceil(s / 2) - 1
        folds = max(1, math.ceil(elements * max(half, 1) / hw.total_rows))
        lvl = max(1, math.ceil(math.log2(s)))
        if kind == "maxpool":
            t.n_compare = 4 * m * lvl + 4 * vops
            t.n_write = 2 * m + (4 * m + 2) * lvl + 6 * vops
            t.n_read = m
            t.active_cells_compared = (16 * m * half + 12 * m * vops + m * half) * elements
            t.cells_written = (POPULATE_TOGGLE * m * s + MULTIPLY_TOGGLE * m * (s - 1)) * elements
        else:
            wv = m + max(1, math.ceil(math.log2(s)))
            t.n_compare = 4 * m * lvl + 4 * vops
            t.n_write = 2 * m + 4 * m * lvl + 4 * vops
            t.n_read = m
            t.active_cells_compared = (12 * m * half + 12 * wv * vops + m * half) * elements
            t.cells_written = (POPULATE_TOGGLE * m * s + ACCUMULATE_TOGGLE * wv * (s - 1)) * elements
    elif kind == "const_add":  # offset-encoding re-centering
        folds = max(1, math.ceil(elements / hw.total_rows))
        t.n_compare, t.n_write = 2 * m, 2 * m
        c, w = _const_add_cells(elements, m)
        t.active_cells_compared, t.cells_written = c, w
    else:  # vector add of two stored tensors (residual, partial-sum merge)
        folds = max(1, math.ceil(elements / hw.total_rows))
        t.n_compare, t.n_write = 4 * m, 6 * m
        c, w = _vector_add_cells(elements, m)
        t.active_cells_compared, t.cells_written = c, w
    return PlanPhase(name, category, folds, t,
                     mesh_bits_energy=mesh_energy / folds if folds else 0.0,
                     mesh_bits_latency=mesh_latency / folds if folds else 0.0)


def reshape_cost(elements: int, bits: int, hw: HardwareConfig,
                 mesh: InterconnectProfile = DEFAULT_MESH) -> PlanPhase:
    """Inter-layer reshape through the MAPs.

    Six legs move a layer's output into the next layer's operand layout:
    CAP word reads -> bus -> MAP word writes -> MAP word reads -> bus -> CAP
    word writes. The CAP-side legs live in the producing and consuming
    steps' traces; this phase carries the MAP-side stages and the bus
    volume, with MAP write latency hidden behind the flit stream.
    """
    t = EventTrace()
    volume_bits = elements * bits
    words = elements
    t.n_write = math.ceil(words / max(hw.n_clusters, 1))
    t.n_read = math.ceil(words / max(hw.n_clusters, 1))
    t.cells_written = POPULATE_TOGGLE * bits * words
    t.active_cells_compared = max(bits * words, 1e-9)
    t.bits_transferred = volume_bits
    t.n_transfer = mesh.flits(volume_bits)
    per_port = volume_bits / max(hw.n_clusters, 1)
    return PlanPhase("reshape", "data_movement", 1, t,
                     mesh_bits_energy=volume_bits, mesh_bits_latency=per_port,
                     latency_rule="mesh")


# ---------------------------------------------------------------------------
# GEMM planning

def _plan_gemm_lr(layer: LayerSpec, mw: int, ma: int, hw: HardwareConfig,
                  mesh: InterconnectProfile) -> LayerPlan:
    (depth, u), (i, _), _ = im2col_dims(layer)
    j = depth
    tiles = max(1, math.ceil(j / hw.ap_rows))
    jc = math.ceil(j / tiles)
    g = hw.ap_rows // jc
    if g < 1:
        raise CapacityError(f"{layer.name}: depth {j} does not fit the row budget")
    lanes = hw.n_caps * g
    elements_per_cluster = math.ceil(i * u / hw.n_clusters)
    steps_per_tile = math.ceil(elements_per_cluster / lanes)
    steps = tiles * steps_per_tile
    out_w = mw + ma + max(1, math.ceil(math.log2(max(j, 2))))

    phases = []
    # weight streaming: one load per depth tile per resident channel block.
    # Convolutions give every cluster its own output columns, so each cluster
    # eventually hosts all i channels; fc layers split the outputs instead.
    chan_per_cluster = i if u > 1 else math.ceil(i / hw.n_clusters)
    loads = tiles * max(1, math.ceil(chan_per_cluster / lanes))
    wt = EventTrace()
    wt.n_write = g * jc
    wt.cells_written = POPULATE_TOGGLE * mw * hw.total_caps * g * jc
    weight_bits_cluster = lanes * jc * mw
    wt.bits_transferred = weight_bits_cluster
    phases.append(PlanPhase("weights", "gemm", loads, wt,
                            mesh_bits_energy=weight_bits_cluster,  # multicast: one traversal
                            mesh_bits_latency=weight_bits_cluster))

    # compute steps with overlapped input/output streaming
    lanes_avg = i * u * tiles / steps
    st = _gemm_step_trace(hw, g, jc, mw, ma, lanes_avg)
    cols_per_step = max(1, math.ceil(lanes / i)) if u > 1 else 1
    in_bits_cluster = cols_per_step * jc * ma
    in_bits_total = in_bits_cluster if layer.kind == "fc" else in_bits_cluster * hw.n_clusters
    out_bits_cluster = lanes * out_w
    out_bits_total = hw.total_caps * g * out_w
    st.bits_transferred = in_bits_total + out_bits_total
    st.n_transfer = mesh.flits(in_bits_cluster) + mesh.flits(out_bits_cluster)
    phases.append(PlanPhase("step", "gemm", steps, st,
                            mesh_bits_energy=in_bits_total + out_bits_total,
                            mesh_bits_latency=in_bits_cluster + out_bits_cluster))

    # partial-sum merges across depth tiles, then offset-encoding re-centering
    if tiles > 1:
        phases.append(_elementwise_phase("tile-merge", "gemm", "add",
                                         i * u * (tiles - 1), ma, 0, hw))
    phases.append(_elementwise_phase("offset", "gemm", "const_add", i * u, ma, 0, hw))
    phases.append(reshape_cost(i * u, ma, hw, mesh))
    util = macs_of(layer) / (steps * hw.total_rows)
    return LayerPlan(layer, mw, ma, "gemm", tuple(phases), fold_factor=steps,
                     gemm_dims=(i, j, u), steps=steps, utilization=util)


def _plan_gemm_ir(layer: LayerSpec, mw: int, ma: int, hw: HardwareConfig,
                  mesh: InterconnectProfile) -> LayerPlan:
    (depth, u), (i, _), _ = im2col_dims(layer)
    j = depth
    jc = min(j, hw.ap_rows)
    tiles = max(1, math.ceil(j / jc))
    g = max(1, hw.ap_rows // jc)
    rows = i * u * j
    out_w = mw + ma + max(1, math.ceil(math.log2(max(j, 2))))

    st = _gemm_step_trace(hw, g, jc, mw, ma, i * u * tiles)
    st.n_write = min(hw.ap_rows, rows) + 4 * mw * ma + 4 * g * (jc - 1)
    in_bits = u * j * ma
    out_bits = i * u * out_w
    st.bits_transferred = in_bits + out_bits
    st.n_transfer = mesh.flits(in_bits) + mesh.flits(out_bits)
    phases = [PlanPhase("step", "gemm", 1, st,
                        mesh_bits_energy=in_bits + out_bits,
                        mesh_bits_latency=in_bits + out_bits)]
    if tiles > 1:
        phases.append(_elementwise_phase("tile-merge", "gemm", "add",
                                         i * u * (tiles - 1), ma, 0, hw))
    phases.append(_elementwise_phase("offset", "gemm", "const_add", i * u, ma, 0, hw))
    phases.append(reshape_cost(i * u, ma, hw, mesh))
    util = macs_of(layer) / hw.total_rows
    return LayerPlan(layer, mw, ma, "gemm", tuple(phases), fold_factor=1,
                     gemm_dims=(i, j, u), steps=1, utilization=util)


# ---------------------------------------------------------------------------
# whole-model planning

def _plan(model: ModelSpec, precisions: PrecisionConfig, hw: HardwareConfig,
          mesh: InterconnectProfile) -> ExecutionPlan:
    bits = resolve_layer_bits(model, precisions)
    plans = []
    for ly, (mw, ma) in zip(model.layers, bits):
        if ly.kind in COMPUTE_KINDS:
            if hw.mode == "lr":
                plans.append(_plan_gemm_lr(ly, mw, ma, hw, mesh))
            else:
                plans.append(_plan_gemm_ir(ly, mw, ma, hw, mesh))
        elif ly.kind in ("maxpool", "avgpool"):
            windows = ly.element_count()
            ph = _elementwise_phase(ly.kind, "pooling", ly.kind, windows, ma, ly.z, hw)
            rs = reshape_cost(windows, ma, hw, mesh)
            plans.append(LayerPlan(ly, mw, ma, "pooling", (ph, rs),
                                   fold_factor=ph.count))
        elif ly.kind == "relu":
            ph = _elementwise_phase("relu", "relu", "relu", ly.element_count(), ma, 0, hw)
            plans.append(LayerPlan(ly, mw, ma, "relu", (ph,), fold_factor=ph.count))
        elif ly.kind == "residual_add":
            elements = ly.element_count()
            skip_bits = elements * ma
            ph = _elementwise_phase("residual", "gemm", "add", elements, ma, 0, hw,
                                    mesh_energy=skip_bits,
                                    mesh_latency=skip_bits / max(hw.n_clusters, 1))
            plans.append(LayerPlan(ly, mw, ma, "gemm", (ph,), fold_factor=ph.count))
    return ExecutionPlan(model, hw, precisions.name, tuple(plans))


def plan_lr(model: ModelSpec, precisions: PrecisionConfig,
            hw: HardwareConfig | None = None,
            mesh: InterconnectProfile = DEFAULT_MESH) -> ExecutionPlan:
    hw = hw or HardwareConfig.lr_default()
    if hw.mode != "lr":
        raise CapacityError("plan_lr needs an LR hardware config")
    return _plan(model, precisions, hw, mesh)


def plan_ir(model: ModelSpec, precisions: PrecisionConfig,
            mesh: InterconnectProfile = DEFAULT_MESH) -> ExecutionPlan:
    return _plan(model, precisions, HardwareConfig.ir_for(model), mesh)
