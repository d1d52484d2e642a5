"""Command-line interface.

Subcommands
-----------
run      cost a model end to end at one precision / hardware mode / tech
sweep    cross-product of models, precisions, techs, modes, voltages
peak     saturated-array throughput at a given operand bit width
emulate  run one bit-level op against a numpy reference and check its
         recorded event trace against the closed-form stage counts
mixed    cost per-layer precision configurations against a baseline

`run`, `sweep`, and `mixed` print a human-readable summary and can also
emit CSV (`--csv`) and JSON (`--json`) reports; pass `-` to write either
to stdout instead of a file. Every command exits nonzero if an invariant
is violated (cost accounting that fails validation, an emulated result
that disagrees with its reference or its closed form, a capacity or
configuration error).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import ops
from .mapper import CapacityError, HardwareConfig
from .report import (
    SweepSpec,
    evaluate_mixed_precision,
    peak_metrics,
    reports_to_csv,
    reports_to_json,
    run_sweep,
    simulate,
)
from .tech import AccountingError, ConfigError, apply_voltage, load_profile
from .trace import EventTrace
from .workload import ModelFormatError, load_model, load_precision

_ERRORS = (AccountingError, CapacityError, ConfigError, ModelFormatError,
           ValueError, OSError)

_DEFAULT_MIXED_CONFIGS = ("resnet18_low", "resnet18_int4", "resnet18_medium",
                          "resnet18_high", "resnet18_int8")


# ---------------------------------------------------------------------------
# output helpers

def _emit(text: str, path: str | None) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _rows_to_csv(rows: list[dict]) -> str:
    import csv
    import io
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(rows[0]))
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (format(v, ".6g") if isinstance(v, float) else v)
                         for k, v in r.items()})
    return out.getvalue()


def _resolve_hw(mode: str, model) -> HardwareConfig:
    if mode == "lr":
        return HardwareConfig.lr_default()
    if mode == "ir":
        return HardwareConfig.ir_for(model)
    raise ConfigError(f"unknown hardware mode {mode!r} (expected 'lr' or 'ir')")


def _resolve_tech(name: str, voltage: float | None):
    profile = load_profile(name)
    if voltage is not None and voltage != profile.v_dd:
        profile = apply_voltage(profile, voltage)
    return profile


# ---------------------------------------------------------------------------
# run

def _cmd_run(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    precision = load_precision(args.precision)
    hw = _resolve_hw(args.hw, model)
    tech = _resolve_tech(args.tech, args.voltage)
    report = simulate(model, precision, hw, tech)
    print(report.summary())
    _emit(reports_to_csv([report]), args.csv)
    _emit(reports_to_json([report]), args.json)
    return 0


# ---------------------------------------------------------------------------
# sweep

_AXES = ("model", "precision", "tech", "hw", "voltage")


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec_kw: dict = {}
    for item in args.axis or ():
        name, _, values = item.partition("=")
        name = name.strip().lower()
        if not values or name not in _AXES:
            raise ConfigError(
                f"bad --axis {item!r}: expected <name>=<v1,v2,...> with name "
                f"in {', '.join(_AXES)}")
        vals = tuple(v.strip() for v in values.split(",") if v.strip())
        if name == "voltage":
            spec_kw["voltages"] = tuple(float(v) for v in vals)
        elif name == "hw":
            spec_kw["modes"] = vals
        else:
            spec_kw[name + "s"] = vals
    spec = SweepSpec(**spec_kw)
    reports = list(run_sweep(spec))
    csv_text = reports_to_csv(reports)
    if args.csv is None and args.json is None:
        sys.stdout.write(csv_text)
    _emit(csv_text, args.csv)
    _emit(reports_to_json(reports), args.json)
    return 0


# ---------------------------------------------------------------------------
# peak

def _cmd_peak(args: argparse.Namespace) -> int:
    tech = _resolve_tech(args.tech, args.voltage)
    pm = peak_metrics(args.bits, tech=tech)
    print(f"peak throughput at {pm.bits}-bit operands ({tech.name})")
    print(f"  cycles/row-round  {pm.cycles_per_round}")
    print(f"  GOPS              {pm.gops:.6g}")
    print(f"  GOPS/W            {pm.gops_per_w:.6g}")
    print(f"  GOPS/W/mm^2       {pm.gops_per_w_per_mm2:.6g}")
    row = dataclasses.asdict(pm)
    row["tech"] = tech.name
    _emit(_rows_to_csv([row]), args.csv)
    _emit(json.dumps(row, indent=2), args.json)
    return 0


# ---------------------------------------------------------------------------
# emulate

def _rng_unsigned(rng: np.random.Generator, shape, m: int) -> np.ndarray:
    return rng.integers(0, 1 << m, size=shape, dtype=np.int64)


def _run_emulated_op(name: str, variant: ops.ApVariant, m: int, *, l: int,
                     s: int, k: int, i: int, j: int, u: int, seed: int):
    """Returns (OpResult, reference ndarray, dims dict used by the formula)."""
    rng = np.random.default_rng(seed)
    if name == "add":
        a = _rng_unsigned(rng, k, m)
        b = _rng_unsigned(rng, k, m)
        return ops.inplace_add(a, b, m, variant), a + b, {}
    if name == "multiply":
        a = _rng_unsigned(rng, k, m)
        b = _rng_unsigned(rng, k, m)
        return ops.multiply(a, b, m, variant), a * b, {}
    if name == "relu":
        x = rng.integers(-(1 << (m - 1)), 1 << (m - 1), size=k, dtype=np.int64) \
            if m > 1 else rng.integers(-1, 1, size=k, dtype=np.int64)
        return ops.relu(x, m, variant), np.maximum(x, 0), {}
    if name == "reduce":
        x = _rng_unsigned(rng, (k, l), m)
        return ops.reduce(x, m, variant), x.sum(axis=1), {"l": l, "k": k}
    if name == "matmat":
        a = _rng_unsigned(rng, (i, j), m)
        b = _rng_unsigned(rng, (j, u), m)
        return ops.matmat(a, b, m, variant), (a @ b).ravel(), \
            {"i": i, "j": j, "u": u}
    if name == "max_pool":
        x = _rng_unsigned(rng, (k, s), m)
        return ops.max_pool(x, m, s, variant), x.max(axis=1), {"s": s, "k": k}
    if name == "avg_pool":
        x = _rng_unsigned(rng, (k, s), m)
        return ops.avg_pool(x, m, s, variant), x.sum(axis=1) // s, \
            {"s": s, "k": k}
    raise ConfigError(f"unknown op {name!r} (expected one of {', '.join(ops.OP_NAMES)})")


def _cmd_emulate(args: argparse.Namespace) -> int:
    variant = ops.ApVariant.parse(args.variant)
    result, reference, dims = _run_emulated_op(
        args.op, variant, args.m, l=args.l, s=args.s, k=args.k,
        i=args.i, j=args.j, u=args.u, seed=args.seed)

    parts = [f"op={args.op}", f"variant={variant.value}", f"m={args.m}"]
    parts += [f"{n}={v}" for n, v in dims.items()]
    parts.append(f"seed={args.seed}")
    print(" ".join(parts))

    got = np.asarray(result.values).ravel()
    want = np.asarray(reference).ravel()
    values_ok = got.shape == want.shape and bool(np.array_equal(got, want))
    n = want.size
    print(f"  values  {'PASS' if values_ok else 'FAIL'} "
          f"({np.count_nonzero(got == want) if got.shape == want.shape else 0}"
          f"/{n} outputs match the reference)")
    if not values_ok:
        print(f"    expected: {want.tolist()}")
        print(f"    got:      {got.tolist()}")

    t: EventTrace = result.trace
    fc, fw, fr, ft = ops.analytic_stage_counts(args.op, variant, args.m, **dims)
    trace_ok = (t.n_compare, t.n_write, t.n_read, t.n_transfer) == (fc, fw, fr, ft)
    print(f"  trace   {'PASS' if trace_ok else 'FAIL'} "
          f"(compares {t.n_compare}, writes {t.n_write}, reads {t.n_read}, "
          f"transfers {t.n_transfer})")
    if not trace_ok:
        print(f"    closed form: compares {fc}, writes {fw}, reads {fr}, "
              f"transfers {ft}")

    cycles = ops.analytic_cycles(args.op, variant, args.m, **dims)
    cycles_ok = cycles == result.analytic_cycles == t.stage_total
    print(f"  cycles  {'PASS' if cycles_ok else 'FAIL'} "
          f"(analytic {cycles}, trace stage total {t.stage_total})")

    ok = values_ok and trace_ok and cycles_ok
    if args.json is not None:
        payload = {
            "op": args.op, "variant": variant.value, "m": args.m, **dims,
            "seed": args.seed, "values_ok": values_ok, "trace_ok": trace_ok,
            "cycles_ok": cycles_ok, "cycles": cycles,
            "trace": {"n_compare": t.n_compare, "n_write": t.n_write,
                      "n_read": t.n_read, "n_transfer": t.n_transfer},
            "outputs": got.tolist(), "reference": want.tolist(),
        }
        _emit(json.dumps(payload, indent=2), args.json)
    print("emulation check " + ("PASSED" if ok else "FAILED"))
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# mixed

def _load_config_list(spec: str) -> list:
    try:
        with open(spec) as fh:
            names = [ln.split("#", 1)[0].strip() for ln in fh]
            names = [n for n in names if n]
    except (FileNotFoundError, IsADirectoryError):
        names = [n.strip() for n in spec.split(",") if n.strip()]
    if not names:
        raise ConfigError(f"no precision configurations found in {spec!r}")
    return [load_precision(n) for n in names]


def _cmd_mixed(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    configs = _load_config_list(args.configs) if args.configs else \
        [load_precision(n) for n in _DEFAULT_MIXED_CONFIGS]
    hw = _resolve_hw(args.hw, model)
    tech = _resolve_tech(args.tech, args.voltage)
    rows = evaluate_mixed_precision(model, configs, hw=hw, tech=tech)

    header = (f"{'config':<18} {'avg_bits':>8} {'energy_j':>11} "
              f"{'latency_s':>11} {'edp_js':>11} {'E_red':>6} "
              f"{'L_norm':>6} {'EDP_norm':>8}")
    print(f"{model.name} on {args.hw.upper()}/{tech.name} "
          f"(baseline: {configs[-1].name})")
    print(header)
    for r in rows:
        print(f"{r.config:<18} {r.average_bits:>8.2f} {r.energy_j:>11.4e} "
              f"{r.latency_s:>11.4e} {r.edp_js:>11.4e} "
              f"{r.energy_reduction:>6.2f} {r.latency_norm:>6.3f} "
              f"{r.edp_norm:>8.3f}")
    dicts = [dataclasses.asdict(r) for r in rows]
    _emit(_rows_to_csv(dicts), args.csv)
    _emit(json.dumps(dicts, indent=2), args.json)
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--csv", metavar="PATH", help="write a CSV report ('-' for stdout)")
    p.add_argument("--json", metavar="PATH", help="write a JSON report ('-' for stdout)")


def _add_tech_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tech", default="sram16nm", metavar="PROFILE",
                   help="technology profile name or file (default: sram16nm)")
    p.add_argument("--voltage", type=float, default=None, metavar="V",
                   help="SRAM supply voltage operating point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apsim",
        description="Associative-processor accelerator emulator and cost simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="cost one model end to end")
    p.add_argument("--model", required=True, metavar="FILE",
                   help="bundled model name (alexnet, vgg16, resnet50, resnet18) or file")
    p.add_argument("--precision", required=True, metavar="fixed:N|FILE",
                   help="'fixed:N', a bundled config name, or a config file")
    p.add_argument("--hw", choices=("ir", "lr"), required=True,
                   help="hardware organization: in-memory (ir) or logical (lr)")
    _add_tech_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="cost a cross-product of configurations")
    p.add_argument("--axis", action="append", metavar="NAME=V1,V2,...",
                   help=f"sweep axis; names: {', '.join(_AXES)} (repeatable)")
    _add_output_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("peak", help="saturated-array throughput metrics")
    p.add_argument("--bits", type=int, required=True, metavar="{1|8|16}",
                   help="operand bit width")
    _add_tech_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_peak)

    p = sub.add_parser("emulate",
                       help="run one bit-level op against its reference")
    p.add_argument("--op", required=True, choices=ops.OP_NAMES)
    p.add_argument("--m", type=int, required=True, help="operand bit width")
    p.add_argument("--l", type=int, default=4, help="reduce group length")
    p.add_argument("--s", type=int, default=4, help="pooling window size")
    p.add_argument("--k", type=int, default=8,
                   help="parallel word/group count")
    p.add_argument("--i", type=int, default=2, help="matmat output rows")
    p.add_argument("--j", type=int, default=4, help="matmat depth")
    p.add_argument("--u", type=int, default=2, help="matmat output columns")
    p.add_argument("--variant", default="1d", choices=("1d", "2d", "2dseg"))
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--json", metavar="PATH",
                   help="write a JSON check report ('-' for stdout)")
    p.set_defaults(func=_cmd_emulate)

    p = sub.add_parser("mixed", help="cost per-layer precision configurations")
    p.add_argument("--model", default="resnet18", metavar="FILE")
    p.add_argument("--configs", metavar="FILE",
                   help="file listing one config per line (or a comma-separated "
                        "list); last entry is the baseline. Default: the bundled "
                        "resnet18 ladder with int8 baseline")
    p.add_argument("--hw", choices=("ir", "lr"), default="lr")
    _add_tech_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_mixed)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"apsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
