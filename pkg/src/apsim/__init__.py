"""Associative-processor emulation and cost simulation."""

from .cam import HORIZONTAL, VERTICAL, CamArray, DimensionError, KeyMask, UsageError, transfer_word
from .luts import ADD_STEP, BUILTIN_PROGRAMS, MAX_STEP, MULTIPLY_STEP, RELU_STEP, LutPass, LutProgram
from .mapper import (
    CATEGORIES,
    CapacityError,
    ExecutionPlan,
    HardwareConfig,
    LayerPlan,
    PlanPhase,
    plan_ir,
    plan_lr,
    reshape_cost,
)
from .ops import (
    OP_NAMES,
    ApVariant,
    OpResult,
    analytic_cycles,
    analytic_stage_counts,
    avg_pool,
    inplace_add,
    matmat,
    max_pool,
    multiply,
    reduce,
    relu,
)
from .report import (
    CostReport,
    MixedPrecisionRow,
    PeakMetrics,
    SweepSpec,
    aggregate_costs,
    evaluate_mixed_precision,
    fit_compare_energy,
    make_plan,
    peak_metrics,
    reports_to_csv,
    reports_to_json,
    run_sweep,
    simulate,
)
from .tech import (
    DEFAULT_CLOCK,
    DEFAULT_MESH,
    PROFILES,
    RERAM_16NM,
    SRAM_16NM,
    SRAM_16NM_05V,
    AccountingError,
    ClockProfile,
    ConfigError,
    InterconnectProfile,
    TechProfile,
    apply_voltage,
    area_of,
    energy_of,
    latency_of,
    load_profile,
    parse_profile,
)
from .trace import EventTrace
from .workload import (
    LayerSpec,
    ModelFormatError,
    ModelSpec,
    PrecisionConfig,
    im2col_dims,
    load_model,
    load_precision,
    parse_model,
    parse_precision,
    resolve_layer_bits,
    total_macs,
    total_ops,
)

__version__ = "0.1.0"
