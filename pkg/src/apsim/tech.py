"""Technology profiles and trace-to-physical-cost conversion.

Energy accounting works on cell counts carried by an EventTrace: compare
energy scales with the cells a search key engages, write energy with the
cells whose state actually toggles. Reads are searches, so read stages are
priced as compares. Latency accounting works on stage counts; a write stage
may take several array cycles (ReRAM writes take twice the SRAM cycles, and
the system-level simulator runs arrays with two-cycle base writes).

Cell-level write energies and the resistance/capacitance corner values are
16 nm predictive-technology numbers. Compare energy per cell is not a device
datasheet value; it is a calibrated scalar (identical for both cell kinds,
since the match-line dynamics are the same) fitted once so the analytic
VGG16 ReRAM/SRAM energy-ratio curve passes through its measured endpoints
(80.9x at 2-bit, 63.1x at 8-bit). The fitted value ships as the default and
`fit_compare_energy` in the report module re-derives it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

from .trace import EventTrace


class ConfigError(ValueError):
    pass


class AccountingError(ValueError):
    pass


# Compare energy per engaged cell, shared by both technologies (searching is
# a read-side operation on the match circuitry, not the storage cell).
# Calibrated once against the measured ReRAM/SRAM end-to-end energy ratios at
# the 2-bit and 8-bit endpoints of the VGG16 precision sweep; see
# report.fit_compare_energy for the closed-form solve this value came from.
E_COMPARE_CELL = 3.061419e-15  # J

# Cell area calibrated so the default limited-resources configuration
# (64 clusters x 65 APs x 4800 x 16 cells = 319,488,000 cells) lands on a
# 137.45 mm^2 total with the peripheral overhead fraction included.
REFERENCE_TOTAL_CELLS = 64 * 65 * 4800 * 16
PERIPHERAL_OVERHEAD = 0.25
SRAM_CELL_AREA_MM2 = 137.45 / (REFERENCE_TOTAL_CELLS * (1 + PERIPHERAL_OVERHEAD))
RERAM_AREA_SAVINGS = 4.4  # denser ReRAM cell at equal capacity


@dataclass(frozen=True)
class TechProfile:
    name: str
    cell_kind: str                 # "SRAM" or "ReRAM"
    e_write_cell: float            # J per toggled cell
    e_compare_cell: float          # J per engaged cell
    write_cycle_multiplier: int    # array cycles per write stage, relative to SRAM
    cell_area_mm2: float
    v_dd: float = 1.0
    p_bit_error: float = 0.0
    r_lrs: float | None = None     # Ohm
    r_hrs: float | None = None
    r_on: float | None = None
    r_off: float | None = None
    c_sense: float | None = None   # F
    peripheral_overhead: float = PERIPHERAL_OVERHEAD

    def __post_init__(self):
        if self.cell_kind not in ("SRAM", "ReRAM"):
            raise ConfigError(f"unknown cell kind {self.cell_kind!r}")
        if min(self.e_write_cell, self.e_compare_cell) < 0:
            raise ConfigError("cell energies must be non-negative")


SRAM_16NM = TechProfile(
    name="sram16nm",
    cell_kind="SRAM",
    e_write_cell=0.24e-15,
    e_compare_cell=E_COMPARE_CELL,
    write_cycle_multiplier=1,
    cell_area_mm2=SRAM_CELL_AREA_MM2,
    v_dd=1.0,
)

RERAM_16NM = TechProfile(
    name="reram16nm",
    cell_kind="ReRAM",
    e_write_cell=21.7e-12,
    e_compare_cell=E_COMPARE_CELL,
    write_cycle_multiplier=2,
    cell_area_mm2=SRAM_CELL_AREA_MM2 / RERAM_AREA_SAVINGS,
    v_dd=1.0,
    r_lrs=5e3,
    r_hrs=2.5e6,
    r_on=15e3,
    r_off=24.25e6,
    c_sense=50e-15,
)

# (e_write_cell, p_bit_error) at the supported SRAM operating points
_SRAM_VOLTAGE_POINTS = {1.0: (0.24e-15, 0.0), 0.5: (0.06e-15, 0.021)}


def apply_voltage(profile: TechProfile, v: float) -> TechProfile:
    """Move an SRAM profile to a supported supply-voltage operating point."""
    if profile.cell_kind != "SRAM":
        if v == profile.v_dd:
            return profile
        raise ConfigError(f"voltage scaling is characterized for SRAM only, not {profile.cell_kind}")
    point = _SRAM_VOLTAGE_POINTS.get(v)
    if point is None:
        raise ConfigError(f"unsupported voltage {v} V (supported: {sorted(_SRAM_VOLTAGE_POINTS)})")
    e_write, p_err = point
    suffix = "" if v == 1.0 else f"@{v:g}V"
    base = profile.name.split("@")[0]
    return replace(profile, name=base + suffix, e_write_cell=e_write, v_dd=v, p_bit_error=p_err)


SRAM_16NM_05V = apply_voltage(SRAM_16NM, 0.5)

PROFILES = {
    "sram16nm": SRAM_16NM,
    "reram16nm": RERAM_16NM,
    "sram16nm@0.5V": SRAM_16NM_05V,
}


@dataclass(frozen=True)
class InterconnectProfile:
    """Mesh interconnect: flit-quantized transfers over an average hop count."""

    e_per_bit_per_mm: float = 40e-15   # J / bit / mm
    avg_hops: float = 3.815
    hop_length_mm: float = 1.0
    bits_per_transfer: int = 1024
    frequency_hz: float = 500e6

    def flits(self, bits: float) -> int:
        return math.ceil(bits / self.bits_per_transfer) if bits > 0 else 0

    def energy(self, bits: float) -> float:
        return bits * self.avg_hops * self.hop_length_mm * self.e_per_bit_per_mm

    def latency(self, bits: float) -> float:
        return self.flits(bits) / self.frequency_hz

    def transfer_cycles(self, bits: float, ap_frequency_hz: float) -> int:
        """Flit latency expressed in AP clock cycles."""
        per_flit = ap_frequency_hz / self.frequency_hz
        return math.ceil(self.flits(bits) * per_flit)


@dataclass(frozen=True)
class ClockProfile:
    ap_frequency_hz: float = 1e9


DEFAULT_MESH = InterconnectProfile()
DEFAULT_CLOCK = ClockProfile()


def energy_of(trace: EventTrace, profile: TechProfile,
              interconnect: InterconnectProfile | None = None,
              mesh_bits: float | None = None) -> float:
    """Joules for a trace: toggled-cell writes + engaged-cell compares.

    Read stages engage cells like compares, so the trace's compare-cell
    counter is expected to include them. Pass an interconnect profile to add
    mesh energy for the trace's transferred bits (or an explicit mesh_bits
    override when only part of the movement rides the mesh).
    """
    if trace.n_compare + trace.n_read > 0 and trace.active_cells_compared <= 0:
        raise AccountingError("trace has compare/read stages but no engaged-cell annotation")
    if trace.n_write > 0 and trace.cells_written < 0:
        raise AccountingError("negative written-cell count")
    joules = (trace.cells_written * profile.e_write_cell
              + trace.active_cells_compared * profile.e_compare_cell)
    if interconnect is not None:
        bits = trace.bits_transferred if mesh_bits is None else mesh_bits
        joules += interconnect.energy(bits)
    return joules


def latency_of(trace: EventTrace, profile: TechProfile,
               clock: ClockProfile = DEFAULT_CLOCK, write_cycle: int = 1) -> float:
    """Seconds for a trace's stage sequence at the AP clock.

    A transfer's read and write stages are already inside n_read/n_write, so
    stages = compares + reads + writes x (write_cycle x technology multiplier).
    `write_cycle` is the base array-write timing (the end-to-end simulator
    uses two-cycle writes; the op-level formulas assume single-cycle).
    """
    stages = (trace.n_compare + trace.n_read
              + trace.n_write * write_cycle * profile.write_cycle_multiplier)
    return stages / clock.ap_frequency_hz


def area_of(hw, profile: TechProfile) -> float:
    """Total mm^2 for a hardware configuration under a cell technology."""
    cells = hw if isinstance(hw, (int, float)) else hw.total_cells()
    return cells * profile.cell_area_mm2 * (1 + profile.peripheral_overhead)


# ---------------------------------------------------------------------------
# declarative profile files

_UNIT_SCALE = {
    "J": 1.0, "mJ": 1e-3, "uJ": 1e-6, "nJ": 1e-9, "pJ": 1e-12, "fJ": 1e-15,
    "F": 1.0, "pF": 1e-12, "fF": 1e-15,
    "Ohm": 1.0, "kOhm": 1e3, "MOhm": 1e6,
    "V": 1.0, "mm2": 1.0, "": 1.0,
}

_FIELD_KEYS = {
    "name": str, "cell_kind": str,
    "e_write_cell": float, "e_compare_cell": float,
    "write_cycle_multiplier": int, "cell_area_mm2": float,
    "v_dd": float, "p_bit_error": float,
    "r_lrs": float, "r_hrs": float, "r_on": float, "r_off": float,
    "c_sense": float, "peripheral_overhead": float,
}


def parse_profile(text: str) -> TechProfile:
    """Parse `key = value [unit]` lines into a TechProfile."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"(\w+)\s*=\s*(\S+)(?:\s+(\S+))?", line)
        if not m:
            raise ConfigError(f"line {lineno}: expected 'key = value [unit]', got {raw!r}")
        key, value, unit = m.group(1), m.group(2), m.group(3) or ""
        if key not in _FIELD_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        kind = _FIELD_KEYS[key]
        if kind is str:
            fields[key] = value
        else:
            if unit not in _UNIT_SCALE:
                raise ConfigError(f"line {lineno}: unknown unit {unit!r}")
            fields[key] = kind(float(value) * _UNIT_SCALE[unit])
    missing = {"name", "cell_kind", "e_write_cell", "e_compare_cell",
               "write_cycle_multiplier", "cell_area_mm2"} - set(fields)
    if missing:
        raise ConfigError(f"profile missing required keys: {sorted(missing)}")
    return TechProfile(**fields)


def load_profile(name_or_path: str) -> TechProfile:
    """A built-in profile by name, or a profile file by path."""
    if name_or_path in PROFILES:
        return PROFILES[name_or_path]
    try:
        with open(name_or_path) as fh:
            return parse_profile(fh.read())
    except FileNotFoundError:
        raise ConfigError(f"no built-in profile or file named {name_or_path!r}") from None
