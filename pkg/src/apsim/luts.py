"""Compare/write pass programs for bit-serial arithmetic.

A pass is one (match pattern, write pattern) pair over a named group of
columns (or rows); an operation applies its program's passes, per bit
position, across the whole array word-parallel. Write patterns use None for
"leave alone", so the write mask is the set of non-None positions.

Pass order matters: a pass's write must never produce a later pass's match
pattern within the same bit position, otherwise a word would be processed
twice. The shipped programs are ordered accordingly (tests verify this).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LutPass:
    match: tuple[int, ...]
    write: tuple[int | None, ...]

    def __post_init__(self):
        if len(self.match) != len(self.write):
            raise ValueError("match/write width mismatch")
        if any(b not in (0, 1) for b in self.match):
            raise ValueError("match bits must be 0/1")
        if any(b not in (0, 1, None) for b in self.write):
            raise ValueError("write bits must be 0/1/None")
        if all(b is None for b in self.write):
            raise ValueError("pass writes nothing")

    def write_positions(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.write) if b is not None)


@dataclass(frozen=True)
class LutProgram:
    """Ordered passes over a group of roles (one cell per role per word)."""

    name: str
    roles: tuple[str, ...]
    passes: tuple[LutPass, ...]

    def __post_init__(self):
        for p in self.passes:
            if len(p.match) != len(self.roles):
                raise ValueError(f"{self.name}: pass width != #roles")

    # -- text serialization ---------------------------------------------------
    # Line-oriented, diff-friendly:
    #   lut <name>
    #   roles <r0> <r1> ...
    #   pass <matchbits> -> <writebits with - for untouched>

    def to_text(self) -> str:
        lines = [f"lut {self.name}", "roles " + " ".join(self.roles)]
        for p in self.passes:
            m = "".join(str(b) for b in p.match)
            w = "".join("-" if b is None else str(b) for b in p.write)
            lines.append(f"pass {m} -> {w}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LutProgram":
        name, roles, passes = None, None, []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(" ")
            if head == "lut":
                name = rest.strip()
            elif head == "roles":
                roles = tuple(rest.split())
            elif head == "pass":
                m_str, arrow, w_str = rest.split()
                if arrow != "->":
                    raise ValueError(f"malformed pass line: {raw!r}")
                match = tuple(int(c) for c in m_str)
                write = tuple(None if c == "-" else int(c) for c in w_str)
                passes.append(LutPass(match, write))
            else:
                raise ValueError(f"unknown directive {head!r}")
        if name is None or roles is None:
            raise ValueError("missing lut/roles header")
        return cls(name, roles, tuple(passes))


# Full adder over (carry, a, b), in place: b <- a+b+carry, carry <- majority.
# The four state-changing rows of the 8-state truth table; (0,0,0), (0,0,1),
# (1,1,0), (1,1,1) are already correct and need no pass.
ADD_STEP = LutProgram(
    name="add_step",
    roles=("carry", "a", "b"),
    passes=(
        LutPass((0, 1, 1), (1, None, 0)),
        LutPass((0, 1, 0), (0, None, 1)),
        LutPass((1, 0, 0), (0, None, 1)),
        LutPass((1, 0, 1), (1, None, 0)),
    ),
)

# The same adder gated by a multiplier bit: only words whose current
# multiplier bit is 1 accumulate the shifted multiplicand.
MULTIPLY_STEP = LutProgram(
    name="multiply_step",
    roles=("b_k", "carry", "a", "c"),
    passes=(
        LutPass((1, 0, 1, 1), (None, 1, None, 0)),
        LutPass((1, 0, 1, 0), (None, 0, None, 1)),
        LutPass((1, 1, 0, 0), (None, 0, None, 1)),
        LutPass((1, 1, 0, 1), (None, 1, None, 0)),
    ),
)

# Sign-flag clear: a word whose flag (stored sign) is set has every data bit
# forced to zero, one bit position at a time. The other three states pass
# through unchanged.
RELU_STEP = LutProgram(
    name="relu_step",
    roles=("a", "flag"),
    passes=(LutPass((1, 1), (0, None)),),
)

# Pairwise maximum over (a, b, f1, f2), MSB first. Flag state: 00 undecided,
# 01 a-wins (keep copying a's bits into b), 11 b-wins (leave b alone).
# f1=1,f2=0 is unreachable.
MAX_STEP = LutProgram(
    name="max_step",
    roles=("a", "b", "f1", "f2"),
    passes=(
        LutPass((1, 0, 0, 0), (None, 1, None, 1)),
        LutPass((0, 1, 0, 0), (None, None, 1, 1)),
        LutPass((1, 0, 0, 1), (None, 1, None, None)),
        LutPass((0, 1, 0, 1), (None, 0, None, None)),
    ),
)

BUILTIN_PROGRAMS = {p.name: p for p in (ADD_STEP, MULTIPLY_STEP, RELU_STEP, MAX_STEP)}
