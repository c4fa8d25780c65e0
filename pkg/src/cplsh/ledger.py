"""Append-only accounting of random bits drawn by hash-family components."""

from __future__ import annotations

from .errors import ParameterError


class RandomnessLedger:
    """Exact per-component bit counts, in first-recorded order."""

    def __init__(self):
        self._entries: list[tuple[str, int]] = []

    def record(self, label: str, bits: int) -> None:
        bits = int(bits)
        if bits < 0:
            raise ParameterError("bit counts must be nonnegative")
        self._entries.append((str(label), bits))

    @property
    def entries(self) -> tuple[tuple[str, int], ...]:
        return tuple(self._entries)

    @property
    def total_bits(self) -> int:
        return sum(b for _, b in self._entries)

    def totals_by_label(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for label, bits in self._entries:
            out[label] = out.get(label, 0) + bits
        return out

    def __len__(self) -> int:
        return len(self._entries)


def ledger_report(ledger: RandomnessLedger) -> list[tuple[str, int]]:
    """Per-label totals plus a final ("total", n) row."""
    rows = list(ledger.totals_by_label().items())
    rows.append(("total", ledger.total_bits))
    return rows


def ledger_csv(ledger: RandomnessLedger) -> str:
    lines = ["label,bits"]
    lines += [f"{label},{bits}" for label, bits in ledger_report(ledger)]
    return "\n".join(lines) + "\n"
