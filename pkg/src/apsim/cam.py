"""Functional model of a 1D/2D content-addressable array.

The array is a rows x cols bit matrix with key/mask search in both
orientations. A horizontal compare matches a column pattern against every row
at once and deposits per-row tags; a vertical compare matches a row pattern
against every column and deposits per-column tags. Selective writes drive the
masked positions of every tagged row (or column) in a single stage, which is
what makes the machine word-parallel: one compare/write pass costs the same
no matter how many words match.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .trace import EventTrace

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


class DimensionError(ValueError):
    """Key/mask/tag dimensions incompatible with the array."""


class UsageError(ValueError):
    """Structurally valid but meaningless request (e.g. empty mask)."""


@dataclass(frozen=True)
class KeyMask:
    """A search/write pattern: key bits applied at the masked positions.

    ``orientation`` decides what the positions index: columns for horizontal
    (tags land per row), rows for vertical (tags land per column). Key bits
    outside the mask are ignored.
    """

    orientation: str
    key: tuple[int, ...]
    mask: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.orientation not in (HORIZONTAL, VERTICAL):
            raise UsageError(f"unknown orientation {self.orientation!r}")
        if not self.mask:
            raise UsageError("mask must select at least one position")
        if any(b not in (0, 1) for b in self.key):
            raise UsageError("key bits must be 0/1")
        if max(self.mask) >= len(self.key) or min(self.mask) < 0:
            raise DimensionError("mask position outside key vector")

    @classmethod
    def from_pairs(cls, orientation: str, width: int, pairs: Mapping[int, int]) -> "KeyMask":
        """Build from {position: bit}; unmasked key bits default to 0."""
        key = [0] * width
        for pos, bit in pairs.items():
            if not 0 <= pos < width:
                raise DimensionError(f"position {pos} outside width {width}")
            key[pos] = bit
        return cls(orientation, tuple(key), frozenset(pairs))

    def positions(self) -> np.ndarray:
        return np.fromiter(sorted(self.mask), dtype=np.intp)

    def key_bits(self) -> np.ndarray:
        pos = self.positions()
        return np.asarray(self.key, dtype=np.uint8)[pos]


class CamArray:
    """Rectangular bit grid with tag registers in both orientations.

    Dimensions are fixed at construction; cells hold only 0/1. Tag registers
    are single-buffered: each compare (or read, which is a search) overwrites
    the register of its orientation. A shared ``EventTrace`` may be passed in
    so several arrays accumulate into one ledger.
    """

    def __init__(self, rows: int, cols: int, trace: EventTrace | None = None):
        if rows < 1 or cols < 1:
            raise DimensionError("array dimensions must be positive")
        self.rows = rows
        self.cols = cols
        self.cells = np.zeros((rows, cols), dtype=np.uint8)
        self.h_tags = np.zeros(rows, dtype=np.uint8)
        self.v_tags = np.zeros(cols, dtype=np.uint8)
        self.trace = trace if trace is not None else EventTrace()

    # -- validation helpers -------------------------------------------------

    def _check(self, km: KeyMask) -> None:
        limit = self.cols if km.orientation == HORIZONTAL else self.rows
        if len(km.key) != limit:
            raise DimensionError(
                f"key width {len(km.key)} != {limit} for {km.orientation} access"
            )

    # -- search / write -----------------------------------------------------

    def compare(self, km: KeyMask) -> np.ndarray:
        """Match the pattern; set and return the orientation's tag register.

        One compare stage; every line of the opposite dimension participates,
        so the active cell count is |mask| * (rows or cols).
        """
        self._check(km)
        pos, bits = km.positions(), km.key_bits()
        if km.orientation == HORIZONTAL:
            tags = (self.cells[:, pos] == bits).all(axis=1)
            self.h_tags = tags.astype(np.uint8)
            self.trace.active_cells_compared += len(pos) * self.rows
            result = self.h_tags
        else:
            tags = (self.cells[pos, :] == bits[:, None]).all(axis=0)
            self.v_tags = tags.astype(np.uint8)
            self.trace.active_cells_compared += len(pos) * self.cols
            result = self.v_tags
        self.trace.n_compare += 1
        return result.copy()

    def selective_write(self, km: KeyMask, tags: np.ndarray | None = None) -> None:
        """Write key bits at masked positions of every tagged row/column.

        One write stage regardless of how many lines matched. Defaults to the
        current tag register of the pattern's orientation.
        """
        self._check(km)
        pos, bits = km.positions(), km.key_bits()
        if km.orientation == HORIZONTAL:
            tags = self.h_tags if tags is None else np.asarray(tags, dtype=np.uint8)
            if tags.shape != (self.rows,):
                raise DimensionError("tag vector length != rows")
            hit = np.nonzero(tags)[0]
            self.cells[np.ix_(hit, pos)] = bits
        else:
            tags = self.v_tags if tags is None else np.asarray(tags, dtype=np.uint8)
            if tags.shape != (self.cols,):
                raise DimensionError("tag vector length != cols")
            hit = np.nonzero(tags)[0]
            self.cells[np.ix_(pos, hit)] = bits[:, None]
        self.trace.n_write += 1
        self.trace.cells_written += len(pos) * len(hit)

    # -- reading ------------------------------------------------------------

    def read_bit_sequential(self, col: int) -> np.ndarray:
        """Read one column via a key=1 search; 1 read stage, costed as a search."""
        if not 0 <= col < self.cols:
            raise DimensionError(f"column {col} out of range")
        self.h_tags = self.cells[:, col].copy()
        self.trace.n_read += 1
        self.trace.active_cells_compared += self.rows
        return self.h_tags.copy()

    def read_word_sequential(self, row: int) -> np.ndarray:
        """Read one row via the vertical search machinery; 1 read stage."""
        if not 0 <= row < self.rows:
            raise DimensionError(f"row {row} out of range")
        self.v_tags = self.cells[row, :].copy()
        self.trace.n_read += 1
        self.trace.active_cells_compared += self.cols
        return self.v_tags.copy()

    # -- population (write drivers with all tags set) ------------------------

    def load_column(self, col: int, bits: Iterable[int]) -> None:
        """Populate one column; 1 write stage driving every row."""
        data = np.asarray(list(bits), dtype=np.uint8)
        if data.shape != (self.rows,):
            raise DimensionError("column data length != rows")
        if not 0 <= col < self.cols:
            raise DimensionError(f"column {col} out of range")
        self.cells[:, col] = data
        self.trace.n_write += 1
        self.trace.cells_written += self.rows

    def load_row(self, row: int, bits: Iterable[int]) -> None:
        """Populate one row; 1 write stage driving every column."""
        data = np.asarray(list(bits), dtype=np.uint8)
        if data.shape != (self.cols,):
            raise DimensionError("row data length != cols")
        if not 0 <= row < self.rows:
            raise DimensionError(f"row {row} out of range")
        self.cells[row, :] = data
        self.trace.n_write += 1
        self.trace.cells_written += self.cols

    def dump(self) -> str:
        """Debug dump: one '0'/'1' row per line."""
        return "\n".join("".join(str(b) for b in row) for row in self.cells)


def transfer_word(
    src: CamArray,
    src_row: int,
    dst: CamArray,
    dst_row: int,
    src_cols: np.ndarray | None = None,
    dst_cols: np.ndarray | None = None,
) -> None:
    """Move a stored word between rows: one read + one write (+1 transfer).

    Column index arrays let callers move a sub-word into a different column
    region, which is how reduction trees park a partial sum next to its
    addition partner. Widths must agree.
    """
    word = src.read_word_sequential(src_row)
    if src_cols is not None:
        word = word[np.asarray(src_cols, dtype=np.intp)]
    if dst_cols is None:
        if len(word) != dst.cols:
            raise DimensionError("transfer width mismatch")
        dst.cells[dst_row, :] = word
        written = dst.cols
    else:
        dst_cols = np.asarray(dst_cols, dtype=np.intp)
        if len(word) != len(dst_cols):
            raise DimensionError("transfer width mismatch")
        dst.cells[dst_row, dst_cols] = word
        written = len(dst_cols)
    dst.trace.n_write += 1
    dst.trace.cells_written += written
    dst.trace.n_transfer += 1
    dst.trace.bits_transferred += len(word)
