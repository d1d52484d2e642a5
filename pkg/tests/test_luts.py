"""Pass programs: truth tables, pass-order safety, text serialization."""

import itertools

import pytest

from apsim.luts import (
    ADD_STEP,
    BUILTIN_PROGRAMS,
    MAX_STEP,
    MULTIPLY_STEP,
    RELU_STEP,
    LutPass,
    LutProgram,
)


def run_program(prog, state):
    """Apply the passes in order to one word's role cells; count matches."""
    s = dict(state)
    matched = 0
    for p in prog.passes:
        if all(s[r] == b for r, b in zip(prog.roles, p.match)):
            matched += 1
            for r, b in zip(prog.roles, p.write):
                if b is not None:
                    s[r] = b
    return s, matched


def all_states(prog):
    for bits in itertools.product((0, 1), repeat=len(prog.roles)):
        yield dict(zip(prog.roles, bits))


# ---------------------------------------------------------------------------
# sequential-execution safety: a pass's write must never produce a later
# pass's match pattern, or a word would be processed twice per bit position.

@pytest.mark.parametrize("name", sorted(BUILTIN_PROGRAMS))
def test_no_state_matches_more_than_one_pass(name):
    prog = BUILTIN_PROGRAMS[name]
    for state in all_states(prog):
        _, matched = run_program(prog, state)
        assert matched <= 1, f"{name}: state {state} processed {matched} times"


# ---------------------------------------------------------------------------
# truth tables

def test_add_step_is_a_full_adder():
    for state in all_states(ADD_STEP):
        out, _ = run_program(ADD_STEP, state)
        total = state["carry"] + state["a"] + state["b"]
        assert out["b"] == total & 1
        assert out["carry"] == total >> 1
        assert out["a"] == state["a"], "the addend column is read-only"


def test_multiply_step_is_an_adder_gated_by_the_multiplier_bit():
    for state in all_states(MULTIPLY_STEP):
        out, _ = run_program(MULTIPLY_STEP, state)
        assert out["b_k"] == state["b_k"]
        assert out["a"] == state["a"]
        if state["b_k"] == 0:
            assert out == state
        else:
            total = state["carry"] + state["a"] + state["c"]
            assert out["c"] == total & 1
            assert out["carry"] == total >> 1


def test_relu_step_zeroes_flagged_words_only():
    for state in all_states(RELU_STEP):
        out, _ = run_program(RELU_STEP, state)
        assert out["flag"] == state["flag"]
        assert out["a"] == (0 if state["flag"] else state["a"])


def test_max_step_bitwise_from_msb_computes_maximum():
    m = 4
    for orig_a, orig_b in itertools.product(range(1 << m), repeat=2):
        b = orig_b
        state = {"f1": 0, "f2": 0}
        for p in range(m - 1, -1, -1):
            state["a"] = (orig_a >> p) & 1
            state["b"] = (b >> p) & 1
            state, _ = run_program(MAX_STEP, state)
            b = (b & ~(1 << p)) | (state["b"] << p)
        assert b == max(orig_a, orig_b), "the b region accumulates the winner"


def test_max_step_flag_states_encode_the_decision():
    # undecided + a>b at this bit -> a wins (01); undecided + b>a -> closed (11)
    win_a, _ = run_program(MAX_STEP, {"a": 1, "b": 0, "f1": 0, "f2": 0})
    assert (win_a["f1"], win_a["f2"]) == (0, 1) and win_a["b"] == 1
    win_b, _ = run_program(MAX_STEP, {"a": 0, "b": 1, "f1": 0, "f2": 0})
    assert (win_b["f1"], win_b["f2"]) == (1, 1) and win_b["b"] == 1


# ---------------------------------------------------------------------------
# validation

def test_lut_pass_rejects_width_mismatch():
    with pytest.raises(ValueError):
        LutPass((0, 1), (None,))


def test_lut_pass_rejects_non_binary_bits():
    with pytest.raises(ValueError):
        LutPass((0, 2), (None, 1))
    with pytest.raises(ValueError):
        LutPass((0, 1), (3, None))


def test_lut_pass_must_write_something():
    with pytest.raises(ValueError):
        LutPass((0, 1), (None, None))


def test_program_rejects_pass_wider_than_roles():
    with pytest.raises(ValueError):
        LutProgram("bad", ("a",), (LutPass((0, 1), (1, None)),))


def test_write_positions():
    p = LutPass((0, 1, 1), (1, None, 0))
    assert p.write_positions() == (0, 2)


# ---------------------------------------------------------------------------
# text serialization

@pytest.mark.parametrize("name", sorted(BUILTIN_PROGRAMS))
def test_text_round_trip(name):
    prog = BUILTIN_PROGRAMS[name]
    assert LutProgram.from_text(prog.to_text()) == prog


def test_to_text_format():
    text = ADD_STEP.to_text()
    lines = text.strip().splitlines()
    assert lines[0] == "lut add_step"
    assert lines[1] == "roles carry a b"
    assert lines[2] == "pass 011 -> 1-0"


def test_from_text_ignores_comments_and_blanks():
    prog = LutProgram.from_text(
        "# header comment\nlut tiny\n\nroles x y\npass 10 -> -1  # trailing\n"
    )
    assert prog.name == "tiny"
    assert prog.passes == (LutPass((1, 0), (None, 1)),)


def test_from_text_rejects_malformed_input():
    with pytest.raises(ValueError):
        LutProgram.from_text("lut x\nroles a\npass 1 = 0\n")
    with pytest.raises(ValueError):
        LutProgram.from_text("lut x\nroles a\nfrobnicate 1\n")
    with pytest.raises(ValueError):
        LutProgram.from_text("pass 1 -> 0\n")
