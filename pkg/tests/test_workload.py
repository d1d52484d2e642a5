"""Model files, layer geometry, MAC/op accounting, precision configurations."""

import pytest

from apsim.workload import (
    LayerSpec,
    ModelFormatError,
    PrecisionConfig,
    im2col_dims,
    load_model,
    load_precision,
    macs_of,
    ops_of,
    parse_model,
    parse_precision,
    resolve_layer_bits,
    total_macs,
    total_ops,
)

TINY = """
model tiny
conv in=8x8x2 k=3x3 out=4 stride=1 pad=1 name=c1
relu in=8x8x4
maxpool in=8x8x4 z=2 stride=2
fc in=64 out=10 name=head
"""


# ---------------------------------------------------------------------------
# parsing and chaining

def test_parse_tiny_model():
    m = parse_model(TINY)
    assert m.name == "tiny"
    assert [ly.kind for ly in m.layers] == ["conv", "relu", "maxpool", "fc"]
    c1 = m.layers[0]
    assert c1.output == (8, 8, 4)
    assert m.layers[2].output == (4, 4, 4)
    assert m.layers[3].output == (1, 1, 10)
    assert c1.name == "c1"


def test_parse_rejects_broken_chaining():
    with pytest.raises(ModelFormatError, match="does not chain"):
        parse_model("conv in=8x8x2 k=3x3 out=4\nrelu in=9x9x4\n")


def test_parse_rejects_unknown_records_and_attrs():
    with pytest.raises(ModelFormatError, match="unknown record"):
        parse_model("blorp in=1x1x1\n")
    with pytest.raises(ModelFormatError, match="unused attributes"):
        parse_model("relu in=2x2x1 color=red\n")
    with pytest.raises(ModelFormatError, match="expected HxWxC"):
        parse_model("relu in=2x2\n")
    with pytest.raises(ModelFormatError, match="key=value"):
        parse_model("relu 2x2x1\n")


def test_residual_fork_and_join():
    text = """
model block
conv in=8x8x4 k=1x1 out=4 name=entry
fork
conv in=8x8x4 k=3x3 out=4 pad=1 name=body
conv in=8x8x4 k=1x1 out=4 path=side name=down
residual_add in=8x8x4
"""
    m = parse_model(text)
    assert [ly.kind for ly in m.layers] == ["conv", "conv", "conv", "residual_add"]
    assert m.layers[2].path == "side"


def test_residual_join_requires_matching_shapes():
    text = """
conv in=8x8x4 k=1x1 out=4
fork
conv in=8x8x4 k=1x1 out=8 name=wide
residual_add in=8x8x8
"""
    with pytest.raises(ModelFormatError, match="skip path"):
        parse_model(text)


def test_layer_validation():
    with pytest.raises(ModelFormatError, match="kernel depth"):
        LayerSpec("conv", (4, 4, 3), kernel=(3, 3, 2, 8))
    with pytest.raises(ModelFormatError, match="unknown layer kind"):
        LayerSpec("softmax", (1, 1, 10))
    with pytest.raises(ModelFormatError, match="window"):
        LayerSpec("maxpool", (4, 4, 3), z=1)


# ---------------------------------------------------------------------------
# geometry and accounting

def test_im2col_dims_conv():
    conv = parse_model(TINY).layers[0]
    patches, kernels, out = im2col_dims(conv)
    assert patches == (3 * 3 * 2, 8 * 8)
    assert kernels == (4, 18)
    assert out == (4, 64)


def test_im2col_dims_fc():
    fc = parse_model(TINY).layers[3]
    assert im2col_dims(fc) == ((64, 1), (10, 64), (10, 1))
    with pytest.raises(ModelFormatError):
        im2col_dims(parse_model(TINY).layers[1])


def test_mac_and_op_counting_rule():
    m = parse_model(TINY)
    conv, relu, pool, fc = m.layers
    assert macs_of(conv) == 4 * 8 * 8 * 3 * 3 * 2
    assert macs_of(fc) == 64 * 10
    assert macs_of(pool) == 0
    assert ops_of(conv) == 2 * macs_of(conv)
    assert ops_of(pool) == (4 * 4 * 4) * (2 * 2 - 1)
    assert ops_of(relu) == 8 * 8 * 4
    assert total_macs(m) == macs_of(conv) + macs_of(fc)
    assert total_ops(m) == sum(ops_of(ly) for ly in m.layers)


def test_bundled_models_mac_totals():
    # anchor values with a 5% band (acceptance criterion 9 re-checks these)
    for name, target in [("vgg16", 15.5e9), ("resnet50", 4.14e9),
                         ("alexnet", 0.72e9)]:
        total = total_macs(load_model(name))
        assert abs(total - target) / target < 0.05, (name, total)
    assert total_macs(load_model("resnet18")) > 1e9


def test_load_model_by_path_and_missing(tmp_path):
    f = tmp_path / "m.txt"
    f.write_text(TINY)
    assert load_model(str(f)).name == "tiny"
    with pytest.raises(ModelFormatError):
        load_model("no_such_model")


# ---------------------------------------------------------------------------
# precision configurations

def test_fixed_precision():
    c = load_precision("fixed:6")
    assert c.fixed == 6
    assert c.average_precision() == 6.0
    assert c.name == "fixed:6"


def test_parse_per_layer_precision_one_and_two_column():
    c = parse_precision("4\n2 8\n", name="x")
    assert c.entries == ((4, 4), (2, 8))
    assert c.average_precision() == pytest.approx((4 + 5) / 2)
    with pytest.raises(ValueError):
        parse_precision("1 2 3\n")


def test_precision_width_limits():
    with pytest.raises(ValueError):
        PrecisionConfig.fixed_width(17)
    with pytest.raises(ValueError):
        PrecisionConfig(name="x", entries=((0, 4),))
    with pytest.raises(ValueError):
        PrecisionConfig(name="x")


def test_bundled_ladder_average_bits():
    expected = {
        "resnet18_int4": 4.00,
        "resnet18_low": 5.05,
        "resnet18_medium": 6.53,
        "resnet18_high": 7.16,
        "resnet18_int8": 8.00,
    }
    for name, avg in expected.items():
        got = load_precision(name).average_precision()
        assert round(got, 2) == avg, name


def test_for_model_pads_stem_and_classifier():
    model = load_model("resnet18")
    n = len(model.compute_layers())
    cfg = load_precision("resnet18_low")
    aligned = cfg.for_model(model)
    assert len(aligned) == n
    if len(cfg.entries) == n - 2:
        assert aligned[0] == (8, 8) and aligned[-1] == (8, 8)
    fixed = PrecisionConfig.fixed_width(3).for_model(model)
    assert fixed == [(3, 3)] * n


def test_for_model_rejects_wrong_entry_count():
    model = load_model("alexnet")
    with pytest.raises(ValueError, match="entries"):
        PrecisionConfig(name="x", entries=((4, 4),)).for_model(model)


def test_resolve_layer_bits_inherits_feeding_layer():
    m = parse_model(TINY)
    cfg = PrecisionConfig(name="x", entries=((2, 3), (5, 6)))
    bits = resolve_layer_bits(m, cfg)
    assert bits == [(2, 3), (2, 3), (2, 3), (5, 6)]


def test_load_precision_missing():
    with pytest.raises(ValueError):
        load_precision("no_such_config")
