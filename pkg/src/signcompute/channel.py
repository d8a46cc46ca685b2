"""Noiseless adder-channel model of a PLNC receiver.

The receiver is assumed to obtain the integer symbol-wise sum of the signature
segments and the mod-q symbol-wise sum of the data segments of everything sent
in a slot. No signal-level modelling happens here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .signature_code import ColumnSums, SignatureWord


@dataclass(frozen=True)
class UserWord:
    signature: SignatureWord
    data: tuple[int, ...]


@dataclass(frozen=True)
class SlotObservation:
    sig_sums: ColumnSums
    data_sum: tuple[int, ...]

    def to_record(self) -> dict:
        return {"sig_sums": list(self.sig_sums.sums), "data_sum": list(self.data_sum)}


def transmit_slot(words, q: int, sig_len: int | None = None, d_len: int | None = None) -> SlotObservation:
    """Superimpose ``words`` on the adder channel.

    ``sig_len``/``d_len`` fix the observation shape for an empty slot and are
    checked against the words otherwise.
    """
    words = list(words)
    if words:
        sig_len = len(words[0].signature.symbols) if sig_len is None else sig_len
        d_len = len(words[0].data) if d_len is None else d_len
    if sig_len is None or d_len is None:
        raise ValueError("empty slot needs explicit sig_len and d_len")
    sig = [0] * sig_len
    data = [0] * d_len
    for w in words:
        if len(w.signature.symbols) != sig_len or len(w.data) != d_len:
            raise ValueError("all words in a slot must share signature and data lengths")
        for j, s in enumerate(w.signature.symbols):
            sig[j] += s
        for j, d in enumerate(w.data):
            data[j] += d
    return SlotObservation(ColumnSums(tuple(sig)), tuple(d % q for d in data))


def subtract_data(total, known, q: int) -> tuple[int, ...]:
    """Coordinate-wise (total - known) mod q."""
    if len(total) != len(known):
        raise ValueError("length mismatch")
    return tuple((a - b) % q for a, b in zip(total, known))
