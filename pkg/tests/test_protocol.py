import io
import json

import numpy as np
import pytest
from scipy import stats

from signcompute.analysis import expected_slots
from signcompute.protocol import (
    Ack,
    Collision,
    Empty,
    Resolved,
    SystemParams,
    cached_codebook,
    random_payloads,
    run_contention,
    run_trial,
    sample_active_set,
    sample_slot_counts,
    simulate_slot_count,
)


def params(M=31, K=3, q=2, D=16, seed=0, p=0.15):
    return SystemParams(M=M, K=K, q=q, p=p, P=100.0, D=D, seed=seed)


def payloads_for(users, prm, seed=0):
    return random_payloads(users, prm.d_len, prm.q, np.random.default_rng(seed))


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(M=5, K=0)
    with pytest.raises(ValueError):
        SystemParams(M=5, K=2, q=7)
    with pytest.raises(ValueError):
        SystemParams(M=5, K=2, p=1.0)
    with pytest.raises(ValueError):
        SystemParams(M=5, K=2, P=1.0)
    assert SystemParams(M=31, K=3, q=2, D=64).d_len == 64
    assert SystemParams(M=31, K=3, q=3, D=8).d_len == 6  # 3^6 = 729 >= 256 > 3^5


def test_single_user():
    prm = params()
    data = payloads_for([7], prm)
    res = run_contention(prm, data)
    assert res.slots_used == 1
    assert res.payloads == data
    assert res.transcript[0].feedback == Resolved(frozenset({7}), ())


def test_three_users_within_K():
    prm = params()
    data = payloads_for([2, 9, 30], prm)
    res = run_contention(prm, data)
    assert res.slots_used == 3
    assert res.payloads == data
    fb = [r.feedback for r in res.transcript]
    assert fb == [Resolved(frozenset({2, 9, 30}), (2, 9)), Ack(2), Ack(9)]
    assert [r.transmitters for r in res.transcript] == [(2, 9, 30), (2,), (9,)]


def test_empty_contention_rejected():
    with pytest.raises(ValueError):
        run_contention(params(), {})


def test_unknown_user_rejected():
    prm = params(M=5, K=1)
    cb = cached_codebook(5, 1, 2)
    missing = next(u for u in range(1, 6) if u not in cb.user_to_s)
    with pytest.raises(ValueError):
        run_contention(prm, payloads_for([missing], prm))


def test_resolved_feedback_invariant():
    with pytest.raises(ValueError):
        Resolved(frozenset({1, 2}), (1, 2))
    with pytest.raises(ValueError):
        Resolved(frozenset({1, 2}), (3,))


def check_transcript(res, K):
    """Depth-first audit: after a Collision in group g the following slots are
    exactly g1's subtree, then g2's subtree."""
    recs = res.transcript
    assert [r.index for r in recs] == list(range(len(recs)))
    assert res.slots_used == len(recs)

    def subtree(i, group):
        # consume the records of `group` starting at i; return next index
        r = recs[i]
        assert r.group == group
        if isinstance(r.feedback, Collision):
            assert len(r.transmitters) > K
            j = subtree(i + 1, group + "1")
            return subtree(j, group + "2")
        if isinstance(r.feedback, Empty):
            assert r.transmitters == ()
            return i + 1
        assert isinstance(r.feedback, Resolved)
        n = len(r.feedback.schedule)
        for k, u in enumerate(r.feedback.schedule, start=1):
            assert recs[i + k].feedback == Ack(u) and recs[i + k].transmitters == (u,)
            assert recs[i + k].group == group
        return i + 1 + n

    assert subtree(0, "r") == len(recs)


@pytest.mark.parametrize("K", [1, 2, 3])
def test_zero_error_and_transcript_structure(K):
    for seed in range(40):
        prm = params(K=K, seed=seed)
        rng = np.random.default_rng(seed)
        cb = cached_codebook(31, K, 2)
        users = rng.choice(cb.users, size=int(rng.integers(1, 12)), replace=False)
        data = payloads_for(users, prm, seed)
        res = run_contention(prm, data)
        assert res.payloads == data
        check_transcript(res, K)
        for r in res.transcript:
            assert r.observation.sig_sums.sums[0] == len(r.transmitters)


def test_slot_identity_for_L_le_K():
    for L in range(1, 5):
        for seed in range(25):
            prm = params(K=4, seed=seed)
            users = np.random.default_rng(seed).choice(31, size=L, replace=False) + 1
            res = run_contention(prm, payloads_for(users, prm))
            assert res.slots_used == L


def test_determinism():
    prm = params(K=2, seed=11)
    data = payloads_for(range(1, 10), prm)
    a, b = run_contention(prm, data), run_contention(prm, data)
    assert a.transcript == b.transcript
    fa, fb = io.StringIO(), io.StringIO()
    a.write_log(fa)
    b.write_log(fb)
    assert fa.getvalue() == fb.getvalue()
    first = json.loads(fa.getvalue().splitlines()[0])
    assert set(first) == {"index", "group", "transmitters", "sig_sums", "data_sum", "feedback"}
    assert first["feedback"] == {"type": "collision"}
    c = run_contention(SystemParams(31, 2, 2, 0.15, 100.0, 16, 12), data)
    assert c.payloads == data


def test_full_stack_matches_abstract_process():
    L, K, trials = 6, 2, 600
    prm = params(K=K, D=4)
    slots = [run_trial(prm, t, fixed_L=L).slots_used for t in range(trials)]
    mean = np.mean(slots)
    se = np.std(slots, ddof=1) / np.sqrt(trials)
    assert abs(mean - float(expected_slots(L, K))) < 3 * se
    abstract = sample_slot_counts(L, K, 20000, np.random.default_rng(0))
    # two-sample distribution comparison
    assert stats.ks_2samp(slots, abstract).pvalue > 1e-3


def test_abstract_process_examples():
    mean, se = simulate_slot_count(2, 2, 1000, seed=1)
    assert (mean, se) == (2.0, 0.0)
    mean, se = simulate_slot_count(2, 1, 100_000, seed=2)
    assert abs(mean - 5) < 3 * se
    mean, se = simulate_slot_count(3, 1, 100_000, seed=3)
    assert abs(mean - 23 / 3) < 3 * se
    with pytest.raises(ValueError):
        simulate_slot_count(0, 1, 10)


def test_abstract_process_small_groups_are_deterministic():
    rng = np.random.default_rng(0)
    for K in (1, 3, 5):
        for L in range(1, K + 1):
            assert (sample_slot_counts(L, K, 100, rng) == L).all()


def test_sample_active_set_statistics():
    prm = SystemParams(M=31, K=3, p=0.15)
    rng = np.random.default_rng(5)
    sizes = np.array([len(sample_active_set(prm, rng)) for _ in range(20000)])
    assert abs(sizes.mean() - 31 * 0.15) < 4 * np.sqrt(31 * 0.15 * 0.85 / 20000)
    # chi-square against Binomial(31, 0.15), tails pooled
    edges = list(range(0, 10)) + [32]
    observed = np.histogram(sizes, bins=edges)[0]
    probs = np.diff(stats.binom.cdf(np.array(edges) - 1, 31, 0.15))
    probs[-1] += 1 - probs.sum()
    chi2 = stats.chisquare(observed, probs * len(sizes))
    assert chi2.pvalue > 1e-3


def test_sample_active_set_rare_activity():
    prm = SystemParams(M=31, K=3, p=1e-4)
    rng = np.random.default_rng(6)
    empties = sum(not sample_active_set(prm, rng) for _ in range(2000))
    assert empties / 2000 >= 1 - 31 * 1e-4 - 0.01


def test_run_trial_log_and_outcome():
    prm = params(K=3, seed=4)
    buf = io.StringIO()
    out = run_trial(prm, 0, fixed_L=5, log=buf)
    assert out.zero_error and out.counts_ok and out.L == 5
    lines = buf.getvalue().splitlines()
    assert len(lines) == out.slots_used
    assert all(json.loads(x)["trial"] == 0 for x in lines)
