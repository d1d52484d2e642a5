"""Stage-count accumulator shared by the emulator and the analytic cost model.

Every array operation decomposes into compare, write, and read stages; a word
transfer is one read plus one write and is additionally tallied in
``n_transfer`` for bookkeeping. ``stage_total`` is therefore
``n_compare + n_write + n_read`` -- transfers are never added twice.

Cell-level counters ride along for energy accounting: ``active_cells_compared``
grows on compare *and* read stages (reading is a search), ``cells_written``
grows on write stages. Emulated traces carry exact driven-cell counts
(integers); analytic traces may carry expected counts (floats).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class EventTrace:
    n_compare: int = 0
    n_write: int = 0
    n_read: int = 0
    n_transfer: int = 0
    active_cells_compared: float = 0
    cells_written: float = 0
    bits_transferred: float = 0

    @property
    def stage_total(self) -> int:
        """Total one-cycle stage units (transfers counted via their read+write)."""
        return self.n_compare + self.n_write + self.n_read

    def add(self, other: "EventTrace") -> "EventTrace":
        """In-place accumulation; returns self so calls can chain."""
        self.n_compare += other.n_compare
        self.n_write += other.n_write
        self.n_read += other.n_read
        self.n_transfer += other.n_transfer
        self.active_cells_compared += other.active_cells_compared
        self.cells_written += other.cells_written
        self.bits_transferred += other.bits_transferred
        return self

    def __add__(self, other: "EventTrace") -> "EventTrace":
        return self.copy().add(other)

    def copy(self) -> "EventTrace":
        return EventTrace(
            self.n_compare,
            self.n_write,
            self.n_read,
            self.n_transfer,
            self.active_cells_compared,
            self.cells_written,
            self.bits_transferred,
        )

    def scaled(self, factor: float) -> "EventTrace":
        """Trace for `factor` identical repetitions (counters are linear)."""
        return EventTrace(
            int(self.n_compare * factor),
            int(self.n_write * factor),
            int(self.n_read * factor),
            int(self.n_transfer * factor),
            self.active_cells_compared * factor,
            self.cells_written * factor,
            self.bits_transferred * factor,
        )

    def stage_counts(self) -> tuple[int, int, int]:
        return (self.n_compare, self.n_write, self.n_read)
