"""Slotted sign-compute-resolve contention resolution.

One contention period starts with every active user transmitting its signature
and payload. After each slot the receiver broadcasts feedback:

* no transmitters: the group is closed;
* 1 <= L <= K transmitters: the active set is decoded from the signature sums,
  L - 1 users are scheduled for singleton slots and the remaining payload is
  obtained by subtracting theirs from the stored mod-q sum;
* L > K: every member flips a fair coin and the two halves are resolved
  depth-first, group 1 first.

Users carry their own split path; a user transmits iff its path equals the
group currently being served, so the receiver never needs to know who is in a
group until it decodes it.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .channel import SlotObservation, UserWord, subtract_data, transmit_slot
from .signature_code import (
    SignatureCodebook,
    build_codebook,
    decode_active_set,
    decode_count,
    encode_signature,
)


class ProtocolError(RuntimeError):
    """Receiver state inconsistent with what was transmitted."""


@dataclass(frozen=True)
class SystemParams:
    M: int
    K: int
    q: int = 2
    p: float = 0.1
    P: float = 100.0
    D: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.q > self.M:
            raise ValueError("q must not exceed M")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if self.P <= 1:
            raise ValueError("P must exceed 1")
        if self.D < 1:
            raise ValueError("D must be >= 1")

    @property
    def d_len(self) -> int:
        """q-ary data symbols needed to carry D bits."""
        n, cap = 0, 1
        while cap < 2**self.D:
            cap *= self.q
            n += 1
        return n


# feedback ------------------------------------------------------------------


@dataclass(frozen=True)
class Empty:
    def to_record(self) -> dict:
        return {"type": "empty"}


@dataclass(frozen=True)
class Resolved:
    active_set: frozenset[int]
    schedule: tuple[int, ...]

    def __post_init__(self):
        if len(self.schedule) != len(self.active_set) - 1 or not set(self.schedule) < self.active_set:
            raise ValueError("schedule must omit exactly one member of the active set")

    def to_record(self) -> dict:
        return {"type": "resolved", "active_set": sorted(self.active_set), "schedule": list(self.schedule)}


@dataclass(frozen=True)
class Collision:
    split_now: bool = True

    def to_record(self) -> dict:
        return {"type": "collision"}


@dataclass(frozen=True)
class Ack:
    user: int

    def to_record(self) -> dict:
        return {"type": "ack", "user": self.user}


FeedbackMessage = Union[Empty, Resolved, Collision, Ack]


@dataclass(frozen=True)
class SlotRecord:
    index: int
    group: str
    transmitters: tuple[int, ...]
    observation: SlotObservation
    feedback: FeedbackMessage

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "group": self.group,
            "transmitters": list(self.transmitters),
            **self.observation.to_record(),
            "feedback": self.feedback.to_record(),
        }


@dataclass
class ResolutionResult:
    slots_used: int
    payloads: dict[int, tuple[int, ...]]
    transcript: list[SlotRecord] = field(default_factory=list)

    def write_log(self, fh) -> None:
        """One JSON record per slot."""
        for rec in self.transcript:
            fh.write(json.dumps(rec.to_record(), separators=(",", ":")) + "\n")


@dataclass
class SplitState:
    """A contending user's position in the splitting tree."""

    user: int
    rng: np.random.Generator
    path: tuple[int, ...] = ()

    def split(self) -> None:
        self.path = self.path + (int(self.rng.integers(1, 3)),)


def group_name(path: tuple[int, ...]) -> str:
    return "r" + "".join(map(str, path))


@functools.lru_cache(maxsize=16)
def cached_codebook(M: int, K: int, q: int) -> SignatureCodebook:
    return build_codebook(M, K, q)


def run_contention(params: SystemParams, active, codebook: SignatureCodebook | None = None) -> ResolutionResult:
    """Resolve one contention period.

    ``active`` maps user id to its payload (a length ``d_len`` tuple of q-ary
    symbols). Splitting coins come from one stream per user seeded by
    ``(params.seed, user)``.
    """
    cb = codebook or cached_codebook(params.M, params.K, params.q)
    if (cb.M, cb.K, cb.q) != (params.M, params.K, params.q):
        raise ValueError("codebook does not match system parameters")
    active = {int(u): tuple(int(x) for x in d) for u, d in dict(active).items()}
    if not active:
        raise ValueError("contention starts with at least one active user")
    d_len = len(next(iter(active.values())))
    for u, d in active.items():
        if u not in cb.user_to_s:
            raise ValueError(f"user {u} has no signature")
        if len(d) != d_len or any(not 0 <= x < cb.q for x in d):
            raise ValueError(f"payload of user {u} is not a length-{d_len} q-ary vector")

    words = {u: UserWord(encode_signature(cb, u), d) for u, d in active.items()}
    pending = {u: SplitState(u, np.random.default_rng([params.seed, u])) for u in sorted(active)}
    groups: list[tuple[int, ...]] = [()]
    recovered: dict[int, tuple[int, ...]] = {}
    transcript: list[SlotRecord] = []

    def slot(senders) -> SlotObservation:
        obs = transmit_slot((words[u] for u in senders), cb.q, cb.sig_len, d_len)
        if decode_count(obs.sig_sums) != len(senders):
            raise ProtocolError("count symbol disagrees with number of transmitters")
        return obs

    while groups:
        path = groups.pop()
        name = group_name(path)
        senders = tuple(u for u, st in pending.items() if st.path == path)
        obs = slot(senders)
        L = decode_count(obs.sig_sums)
        if L == 0:
            transcript.append(SlotRecord(len(transcript), name, senders, obs, Empty()))
        elif L <= cb.K:
            decoded = decode_active_set(cb, obs.sig_sums)
            if decoded != set(senders):
                raise ProtocolError(f"decoded {sorted(decoded)}, transmitted {list(senders)}")
            order = sorted(decoded)
            schedule, last = tuple(order[:-1]), order[-1]
            transcript.append(SlotRecord(len(transcript), name, senders, obs, Resolved(frozenset(decoded), schedule)))
            stored = obs.data_sum
            for u in schedule:
                single = slot((u,))
                if decode_active_set(cb, single.sig_sums) != {u}:
                    raise ProtocolError(f"scheduled slot of user {u} decoded wrongly")
                recovered[u] = single.data_sum
                stored = subtract_data(stored, single.data_sum, cb.q)
                transcript.append(SlotRecord(len(transcript), name, (u,), single, Ack(u)))
            recovered[last] = stored
            for u in decoded:
                del pending[u]
        else:
            transcript.append(SlotRecord(len(transcript), name, senders, obs, Collision()))
            for u in senders:
                pending[u].split()
            groups.append(path + (2,))
            groups.append(path + (1,))

    if recovered.keys() != active.keys():
        raise ProtocolError("contention ended with unresolved users")
    return ResolutionResult(len(transcript), recovered, transcript)


def sample_active_set(params: SystemParams, rng: np.random.Generator, users=None) -> set[int]:
    """Independent Bernoulli(p) activity per user."""
    users = list(range(1, params.M + 1)) if users is None else list(users)
    draws = rng.random(len(users)) < params.p
    return {u for u, on in zip(users, draws) if on}


def random_payloads(users, d_len: int, q: int, rng: np.random.Generator) -> dict[int, tuple[int, ...]]:
    return {u: tuple(int(x) for x in rng.integers(0, q, size=d_len)) for u in sorted(users)}


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    L: int
    slots_used: int
    zero_error: bool
    counts_ok: bool


def run_trial(params: SystemParams, trial: int, fixed_L: int | None = None, codebook=None, log=None) -> TrialOutcome:
    """One seeded contention period with a sampled (or fixed-size) active set."""
    cb = codebook or cached_codebook(params.M, params.K, params.q)
    rng = np.random.default_rng([params.seed, trial])
    if fixed_L is None:
        active = sample_active_set(params, rng, cb.users)
    else:
        active = set(int(u) for u in rng.choice(cb.users, size=fixed_L, replace=False))
    if not active:
        return TrialOutcome(trial, 0, 0, True, True)
    payloads = random_payloads(active, params.d_len, params.q, rng)
    result = run_contention(replace(params, seed=trial_seed(params.seed, trial)), payloads, cb)
    if log is not None:
        for rec in result.transcript:
            log.write(json.dumps({"trial": trial, **rec.to_record()}, separators=(",", ":")) + "\n")
    counts_ok = all(decode_count(r.observation.sig_sums) == len(r.transmitters) for r in result.transcript)
    return TrialOutcome(trial, len(active), result.slots_used, result.payloads == payloads, counts_ok)


# abstract slot-count process -----------------------------------------------


def sample_slot_counts(L: int, K: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Slots used by ``trials`` independent contention periods of ``L`` users.

    Groups of j <= K cost max(j, 1) slots; larger groups cost one slot plus
    their two binomial halves. Vectorised over trials, one tree level per pass.
    """
    cost = np.zeros(trials, dtype=np.int64)
    owner = np.arange(trials)
    size = np.full(trials, L, dtype=np.int64)
    while owner.size:
        done = size <= K
        np.add.at(cost, owner[done], np.maximum(size[done], 1))
        owner, size = owner[~done], size[~done]
        np.add.at(cost, owner, 1)
        left = rng.binomial(size, 0.5)
        owner = np.concatenate([owner, owner])
        size = np.concatenate([left, size - left])
    return cost


def simulate_slot_count(L: int, K: int, trials: int, seed=0) -> tuple[float, float]:
    """Monte Carlo mean and standard error of the slots needed for L users."""
    if L < 1 or trials < 1:
        raise ValueError("need L >= 1 and trials >= 1")
    counts = sample_slot_counts(L, K, trials, np.random.default_rng(seed))
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr
