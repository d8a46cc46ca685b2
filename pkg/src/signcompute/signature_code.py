"""Lindström K-out-of-M signature codes for the integer adder channel.

User ``i`` (1..M) is mapped to b_i = i - 1 in F_M and receives the integer
s_i = log_a(a + b_i) in F_{M^K}. Its signature word is a leading count symbol 1
followed by the q-ary digits of s_i, most significant first. Any at most K
distinct users have distinct sums of s_i, so the symbol-wise integer sum of
their words identifies them.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

from sympy import isprime

from .finite_field import (
    BabyStepGiantStep,
    ExtElement,
    ExtFieldSpec,
    FieldError,
    ext_pow,
    find_primitive_extension,
    poly_add,
    roots_in_base_field,
)


class CodebookError(ValueError):
    pass


class DecodeError(ValueError):
    """Column sums that cannot be decoded into an active set."""


def signature_length(M: int, K: int, q: int) -> int:
    """Symbols per signature: ceil(log_q(M^K - 1)) + 1, computed exactly."""
    target = M**K - 1
    n, power = 0, 1
    while power < target:
        power *= q
        n += 1
    return n + 1


def to_digits(s: int, q: int, width: int) -> tuple[int, ...]:
    digits = []
    for _ in range(width):
        s, d = divmod(s, q)
        digits.append(d)
    if s:
        raise CodebookError(f"value does not fit in {width} base-{q} digits")
    return tuple(reversed(digits))


def from_digits(digits, q: int) -> int:
    """Positional value of (possibly >= q) digit sums, most significant first."""
    acc = 0
    for d in digits:
        acc = acc * q + int(d)
    return acc


@dataclass(frozen=True)
class SignatureWord:
    symbols: tuple[int, ...]


@dataclass(frozen=True)
class ColumnSums:
    sums: tuple[int, ...]

    @classmethod
    def of(cls, words) -> "ColumnSums":
        words = [w.symbols if isinstance(w, SignatureWord) else tuple(w) for w in words]
        if not words:
            raise ValueError("need at least one word to infer the length; use ColumnSums.zeros")
        return cls(tuple(sum(col) for col in zip(*words, strict=True)))

    @classmethod
    def zeros(cls, length: int) -> "ColumnSums":
        return cls((0,) * length)


@dataclass(frozen=True)
class SignatureCodebook:
    field: ExtFieldSpec
    q: int
    user_to_s: dict[int, int]
    sig_len: int

    @property
    def M(self) -> int:
        return self.field.M

    @property
    def K(self) -> int:
        return self.field.K

    @property
    def users(self) -> list[int]:
        return sorted(self.user_to_s)

    def __hash__(self):
        return hash((self.field, self.q, self.sig_len))

    def to_record(self) -> dict:
        return {
            "M": self.M,
            "K": self.K,
            "q": self.q,
            "min_poly": list(self.field.min_poly),
            "sig_len": self.sig_len,
            "signatures": [[u, str(s)] for u, s in sorted(self.user_to_s.items())],
        }

    @classmethod
    def from_record(cls, record: dict) -> "SignatureCodebook":
        fld = ExtFieldSpec.from_record(record)
        cb = cls(
            fld,
            int(record["q"]),
            {int(u): int(s) for u, s in record["signatures"]},
            int(record["sig_len"]),
        )
        if cb.sig_len != signature_length(cb.M, cb.K, cb.q):
            raise CodebookError("sig_len inconsistent with (M, K, q)")
        return cb

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_record(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "SignatureCodebook":
        return cls.from_record(json.loads(Path(path).read_text()))


def user_element(fld: ExtFieldSpec, user: int) -> ExtElement:
    """a + b_user with b_user = user - 1 embedded in F_{M^K}."""
    a = fld.generator().coeffs
    return fld.element((a[0] + user - 1,) + a[1:])


def build_codebook(M: int, K: int, q: int) -> SignatureCodebook:
    """Lindström construction with b_i = i - 1.

    For K = 1 the primitive element lies in F_M itself, so a + b_i = 0 for one
    user; that user gets no signature and the codebook holds M - 1 users.
    """
    if not isinstance(q, int) or not isprime(q):
        raise CodebookError(f"q={q} must be prime")
    if q > M:
        raise CodebookError(f"q={q} must not exceed M={M}")
    fld = find_primitive_extension(M, K)
    solver = BabyStepGiantStep(fld)
    user_to_s = {}
    for user in range(1, M + 1):
        target = user_element(fld, user)
        if not any(target.coeffs):
            continue
        user_to_s[user] = solver.log(target)
    return SignatureCodebook(fld, q, user_to_s, signature_length(M, K, q))


def encode_signature(cb: SignatureCodebook, user: int) -> SignatureWord:
    try:
        s = cb.user_to_s[user]
    except KeyError:
        raise CodebookError(f"user {user} has no signature in this codebook") from None
    return SignatureWord((1,) + to_digits(s, cb.q, cb.sig_len - 1))


def signature_bits(cb: SignatureCodebook) -> float:
    """Bit-equivalent signature length N_w = sig_len * log2(q)."""
    return cb.sig_len * math.log2(cb.q)


def within_length_bound(M: int, K: int, q: int) -> bool:
    """Exact check of N_w <= (K+2) log2 M, i.e. q^sig_len <= M^(K+2)."""
    return q ** signature_length(M, K, q) <= M ** (K + 2)


def decode_count(sums: ColumnSums) -> int:
    return sums.sums[0] if sums.sums else 0


def reconstruct_sum(cb: SignatureCodebook, sums: ColumnSums) -> int:
    """Sum of the contributing s_i, read from the digit columns."""
    if len(sums.sums) != cb.sig_len:
        raise DecodeError(f"expected {cb.sig_len} columns, got {len(sums.sums)}")
    return from_digits(sums.sums[1:], cb.q)


def decode_active_set(cb: SignatureCodebook, sums: ColumnSums) -> set[int]:
    """Algebraic decoder: a^T factors as the product of (a + b_i) over active users."""
    L = decode_count(sums)
    if L == 0:
        raise DecodeError("empty slot")
    if L > cb.K:
        raise DecodeError(f"{L} transmitters exceed decodability threshold K={cb.K}")
    fld = cb.field
    T = reconstruct_sum(cb, sums)
    e = ext_pow(fld, fld.generator(), T % fld.order).coeffs
    if L < fld.K:
        if e[L] != 1 or any(e[L + 1 :]):
            raise DecodeError("column sums are not a sum of L signatures")
        p = e[: L + 1]
    else:
        p = poly_add(fld.min_poly, e, fld.M)
    roots = roots_in_base_field(fld, p)
    if len(roots) != L or len(set(roots)) != L:
        raise DecodeError("product polynomial does not split into distinct linear factors")
    users = {(-r % fld.M) + 1 for r in roots}
    if not users <= cb.user_to_s.keys():
        raise DecodeError("decoded a user without a signature")
    return users


def brute_force_decode(cb: SignatureCodebook, sums: ColumnSums) -> set[int]:
    """Scan all C(M, L) subsets for the one whose words sum to ``sums``."""
    L = decode_count(sums)
    if L > cb.K:
        raise DecodeError(f"L={L} exceeds K={cb.K}")
    words = {u: encode_signature(cb, u).symbols for u in cb.users}
    matches = []
    for subset in itertools.combinations(cb.users, L):
        cols = tuple(sum(col) for col in zip(*(words[u] for u in subset)))
        if not subset:
            cols = (0,) * cb.sig_len
        if cols == sums.sums:
            matches.append(set(subset))
    if not matches:
        raise DecodeError("no subset matches the column sums")
    if len(matches) > 1:
        raise DecodeError(f"{len(matches)} subsets share the column sums; codebook is not uniquely decodable")
    return matches[0]


def subsets_up_to(users, K: int):
    for size in range(1, K + 1):
        yield from itertools.combinations(users, size)


def count_subsets(n: int, K: int) -> int:
    return sum(math.comb(n, j) for j in range(1, K + 1))


def verify_uniqueness(cb: SignatureCodebook, decode: bool = True) -> tuple[int, int]:
    """Exhaustively check that all subsets of size <= K have distinct column sums.

    Returns (number of unique sum vectors, number of subsets). When ``decode`` is
    set, every subset must also round-trip through :func:`decode_active_set`.
    """
    words = {u: encode_signature(cb, u).symbols for u in cb.users}
    seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    total = 0
    for subset in subsets_up_to(cb.users, cb.K):
        total += 1
        cols = tuple(sum(col) for col in zip(*(words[u] for u in subset)))
        seen.setdefault(cols, subset)
        if decode and decode_active_set(cb, ColumnSums(cols)) != set(subset):
            raise DecodeError(f"decoder failed on {subset}")
    return len(seen), total


__all__ = [
    "CodebookError",
    "ColumnSums",
    "DecodeError",
    "FieldError",
    "SignatureCodebook",
    "SignatureWord",
    "brute_force_decode",
    "build_codebook",
    "count_subsets",
    "decode_active_set",
    "decode_count",
    "encode_signature",
    "from_digits",
    "reconstruct_sum",
    "signature_bits",
    "signature_length",
    "subsets_up_to",
    "to_digits",
    "user_element",
    "verify_uniqueness",
    "within_length_bound",
]
