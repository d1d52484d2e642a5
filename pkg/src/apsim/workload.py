"""CNN model descriptions, per-layer precision configs, and GEMM shape math.

Model files are line-oriented: one layer per record with explicit input
dimensions, so every record is independently checkable and branching
(residual side paths) stays visible. Convolutions lower to GEMM via im2col:
the kernel matrix is C_K x (H_K*W_K*C_I) and the patch matrix is
(H_K*W_K*C_I) x (H_O*W_O).

Signed values are handled here, not in the bit-serial ops: weights and
activations use offset (asymmetric) encoding so the array arithmetic stays
unsigned, at the price of one extra vector addition per conv/fc layer to
re-center results. The cost model charges that addition explicitly.

Output spatial dims use floor semantics, matching the usual framework
convention (the bundled ResNet stem needs it); all bundled records chain
exactly and the loader rejects a record whose input does not match.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

COMPUTE_KINDS = ("conv", "fc")
LAYER_KINDS = ("conv", "fc", "maxpool", "avgpool", "relu", "residual_add")


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    input: tuple[int, int, int]            # (H_I, W_I, C_I); fc uses (1, 1, in)
    kernel: tuple | None = None            # conv: (H_K, W_K, C_I, C_K); fc: (in, out)
    stride: int = 1
    zero_padding: int = 0
    z: int = 0                             # pooling window edge
    path: str = "main"                     # side = residual downsample branch
    name: str = ""

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ModelFormatError(f"unknown layer kind {self.kind!r}")
        if self.kind == "conv":
            hk, wk, ci, ck = self.kernel
            if ci != self.input[2]:
                raise ModelFormatError(f"{self.name}: kernel depth {ci} != input channels {self.input[2]}")
        if self.kind in ("maxpool", "avgpool") and self.z < 2:
            raise ModelFormatError(f"{self.name}: pooling window must be >= 2")

    @property
    def output(self) -> tuple[int, int, int]:
        h, w, c = self.input
        if self.kind == "conv":
            hk, wk, _, ck = self.kernel
            ho = (h - hk + 2 * self.zero_padding) // self.stride + 1
            wo = (w - wk + 2 * self.zero_padding) // self.stride + 1
            return (ho, wo, ck)
        if self.kind == "fc":
            return (1, 1, self.kernel[1])
        if self.kind in ("maxpool", "avgpool"):
            ho = (h - self.z + 2 * self.zero_padding) // self.stride + 1
            wo = (w - self.z + 2 * self.zero_padding) // self.stride + 1
            return (ho, wo, c)
        return (h, w, c)  # relu / residual_add preserve shape

    @property
    def window(self) -> int:
        """Elements per pooling window."""
        return self.z * self.z

    def element_count(self) -> int:
        ho, wo, c = self.output
        return ho * wo * c


def im2col_dims(layer: LayerSpec):
    """((P rows, P cols), (K rows, K cols), (O rows, O cols)) for conv/fc."""
    if layer.kind == "conv":
        hk, wk, ci, ck = layer.kernel
        ho, wo, _ = layer.output
        depth = hk * wk * ci
        return ((depth, ho * wo), (ck, depth), (ck, ho * wo))
    if layer.kind == "fc":
        n_in, n_out = layer.kernel
        return ((n_in, 1), (n_out, n_in), (n_out, 1))
    raise ModelFormatError(f"im2col undefined for {layer.kind}")


def macs_of(layer: LayerSpec) -> int:
    if layer.kind == "conv":
        hk, wk, ci, ck = layer.kernel
        ho, wo, _ = layer.output
        return ck * ho * wo * hk * wk * ci
    if layer.kind == "fc":
        return layer.kernel[0] * layer.kernel[1]
    return 0


def ops_of(layer: LayerSpec) -> int:
    """Operation count for throughput metrics.

    Two ops per MAC; one op per pooling pairwise compare/add; one per ReLU
    element; one per residual-add element.
    """
    if layer.kind in COMPUTE_KINDS:
        return 2 * macs_of(layer)
    if layer.kind in ("maxpool", "avgpool"):
        return layer.element_count() * (layer.window - 1)
    return layer.element_count()  # relu, residual_add


@dataclass(frozen=True)
class ModelSpec:
    name: str
    layers: tuple[LayerSpec, ...]

    @property
    def weight_count(self) -> int:
        total = 0
        for ly in self.layers:
            if ly.kind == "conv":
                hk, wk, ci, ck = ly.kernel
                total += hk * wk * ci * ck
            elif ly.kind == "fc":
                total += ly.kernel[0] * ly.kernel[1]
        return total

    def compute_layers(self) -> list[LayerSpec]:
        return [ly for ly in self.layers if ly.kind in COMPUTE_KINDS]


def total_macs(model: ModelSpec) -> int:
    return sum(macs_of(ly) for ly in model.layers)


def total_ops(model: ModelSpec) -> int:
    return sum(ops_of(ly) for ly in model.layers)


# ---------------------------------------------------------------------------
# model files

_DIMS3 = re.compile(r"^(\d+)x(\d+)x(\d+)$")
_DIMS2 = re.compile(r"^(\d+)x(\d+)$")


def _parse_attrs(parts: list[str], lineno: int) -> dict:
    attrs = {}
    for part in parts:
        if "=" not in part:
            raise ModelFormatError(f"line {lineno}: expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        attrs[k] = v
    return attrs


def _dims3(text: str, lineno: int) -> tuple[int, int, int]:
    m = _DIMS3.match(text)
    if not m:
        raise ModelFormatError(f"line {lineno}: expected HxWxC dims, got {text!r}")
    return tuple(int(g) for g in m.groups())


def parse_model(text: str) -> ModelSpec:
    name = "model"
    layers: list[LayerSpec] = []
    main_dims: tuple | None = None   # running main-path output
    fork_dims: tuple | None = None   # input of the open residual branch
    side_dims: tuple | None = None   # output of the side conv, if any
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *rest = line.split()
        if kind == "model":
            name = rest[0]
            continue
        attrs = _parse_attrs(rest, lineno)
        if kind == "fork":
            fork_dims, side_dims = main_dims, None
            continue
        if kind not in LAYER_KINDS:
            raise ModelFormatError(f"line {lineno}: unknown record {kind!r}")

        path = attrs.pop("path", "main")
        lname = attrs.pop("name", f"{kind}{len(layers)}")
        if kind == "fc":
            n_in, n_out = int(attrs.pop("in")), int(attrs.pop("out"))
            spec = LayerSpec("fc", (1, 1, n_in), kernel=(n_in, n_out), name=lname)
            declared = spec.input
        else:
            declared = _dims3(attrs.pop("in"), lineno)
            if kind == "conv":
                m = _DIMS2.match(attrs.pop("k"))
                hk, wk = int(m.group(1)), int(m.group(2))
                spec = LayerSpec("conv", declared,
                                 kernel=(hk, wk, declared[2], int(attrs.pop("out"))),
                                 stride=int(attrs.pop("stride", 1)),
                                 zero_padding=int(attrs.pop("pad", 0)),
                                 path=path, name=lname)
            elif kind in ("maxpool", "avgpool"):
                spec = LayerSpec(kind, declared, z=int(attrs.pop("z")),
                                 stride=int(attrs.pop("stride", 1)),
                                 zero_padding=int(attrs.pop("pad", 0)), name=lname)
            else:
                spec = LayerSpec(kind, declared, name=lname)
        if attrs:
            raise ModelFormatError(f"line {lineno}: unused attributes {sorted(attrs)}")

        # chaining checks: main-path records continue the main path, side
        # records start from the open fork, residual_add joins the two
        expected = {
            "main": main_dims if kind != "fc" or main_dims is None
            else (1, 1, main_dims[0] * main_dims[1] * main_dims[2]),
            "side": fork_dims,
        }[path]
        if expected is not None and tuple(declared) != tuple(expected):
            raise ModelFormatError(
                f"line {lineno} ({lname}): input {declared} does not chain (expected {expected})")
        if kind == "residual_add":
            skip = side_dims if side_dims is not None else fork_dims
            if skip is not None and tuple(skip) != tuple(declared):
                raise ModelFormatError(
                    f"line {lineno} ({lname}): skip path {skip} != main path {declared}")
            fork_dims, side_dims = None, None
        if path == "side":
            side_dims = spec.output
        else:
            main_dims = spec.output
        layers.append(spec)
    return ModelSpec(name, tuple(layers))


def load_model(name_or_path: str) -> ModelSpec:
    """A bundled model by name (alexnet, vgg16, resnet50, resnet18) or a file."""
    bundled = os.path.join(DATA_DIR, "models", f"{name_or_path}.txt")
    path = bundled if os.path.exists(bundled) else name_or_path
    try:
        with open(path) as fh:
            return parse_model(fh.read())
    except FileNotFoundError:
        raise ModelFormatError(f"no bundled model or file named {name_or_path!r}") from None


# ---------------------------------------------------------------------------
# precision configurations

@dataclass(frozen=True)
class PrecisionConfig:
    """Per-layer (weight_bits, activation_bits) pairs, or a fixed width."""

    name: str
    entries: tuple[tuple[int, int], ...] = ()
    fixed: int | None = None

    def __post_init__(self):
        if self.fixed is None and not self.entries:
            raise ValueError("precision config needs entries or a fixed width")
        for w, a in self.entries:
            if not (1 <= w <= 16 and 1 <= a <= 16):
                raise ValueError(f"bit widths out of range: ({w}, {a})")
        if self.fixed is not None and not (1 <= self.fixed <= 16):
            raise ValueError(f"fixed width out of range: {self.fixed}")

    @classmethod
    def fixed_width(cls, bits: int) -> "PrecisionConfig":
        return cls(name=f"fixed:{bits}", fixed=bits)

    def average_precision(self) -> float:
        if self.fixed is not None:
            return float(self.fixed)
        return sum((w + a) / 2 for w, a in self.entries) / len(self.entries)

    def for_model(self, model: ModelSpec) -> list[tuple[int, int]]:
        """(w_bits, a_bits) aligned with the model's conv/fc layers.

        A config listing two entries fewer than the model's compute layers
        pins the first (stem) and last (classifier) layers at 8-bit and maps
        its entries onto the layers between them, the convention used by the
        ResNet18 mixed-precision study.
        """
        n = len(model.compute_layers())
        if self.fixed is not None:
            return [(self.fixed, self.fixed)] * n
        if len(self.entries) == n:
            return list(self.entries)
        if len(self.entries) == n - 2:
            return [(8, 8)] + list(self.entries) + [(8, 8)]
        raise ValueError(
            f"config {self.name!r} has {len(self.entries)} entries for {n} compute layers")


def average_precision(config: PrecisionConfig) -> float:
    return config.average_precision()


def parse_precision(text: str, name: str = "config") -> PrecisionConfig:
    body = text.strip()
    if body.lower().startswith("fixed:"):
        return PrecisionConfig.fixed_width(int(body.split(":", 1)[1]))
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            w = a = int(parts[0])
        elif len(parts) == 2:
            w, a = int(parts[0]), int(parts[1])
        else:
            raise ValueError(f"line {lineno}: expected 'bits' or 'w a', got {raw!r}")
        entries.append((w, a))
    return PrecisionConfig(name=name, entries=tuple(entries))


def load_precision(spec: str) -> PrecisionConfig:
    """'fixed:N', a bundled config name, or a config file path."""
    if spec.lower().startswith("fixed:"):
        return PrecisionConfig.fixed_width(int(spec.split(":", 1)[1]))
    bundled = os.path.join(DATA_DIR, "precisions", f"{spec}.txt")
    path = bundled if os.path.exists(bundled) else spec
    try:
        with open(path) as fh:
            return parse_precision(fh.read(), name=os.path.splitext(os.path.basename(path))[0])
    except FileNotFoundError:
        raise ValueError(f"no bundled precision config or file named {spec!r}") from None


def resolve_layer_bits(model: ModelSpec, config: PrecisionConfig) -> list[tuple[int, int]]:
    """(w_bits, a_bits) for every layer; non-compute layers inherit the
    activation width of the compute layer that feeds them."""
    compute_bits = config.for_model(model)
    out, it, current = [], iter(compute_bits), (8, 8)
    for ly in model.layers:
        if ly.kind in COMPUTE_KINDS:
            current = next(it)
        out.append(current)
    return out
