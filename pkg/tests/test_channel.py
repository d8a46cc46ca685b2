import random

import pytest
from hypothesis import given, settings, strategies as st

from signcompute.channel import UserWord, subtract_data, transmit_slot
from signcompute.signature_code import SignatureWord


def word(sig, data):
    return UserWord(SignatureWord(tuple(sig)), tuple(data))


def test_empty_slot():
    obs = transmit_slot([], q=2, sig_len=4, d_len=3)
    assert obs.sig_sums.sums == (0, 0, 0, 0)
    assert obs.data_sum == (0, 0, 0)
    with pytest.raises(ValueError):
        transmit_slot([], q=2)


def test_singleton_verbatim():
    w = word((1, 0, 1, 1), (1, 0, 1))
    obs = transmit_slot([w], q=2)
    assert obs.sig_sums.sums == w.signature.symbols
    assert obs.data_sum == w.data


def test_two_users_xor():
    a, b = (1, 0, 1, 1, 0), (0, 1, 1, 0, 0)
    obs = transmit_slot([word((1, 1), a), word((1, 0), b)], q=2)
    assert obs.data_sum == tuple(x ^ y for x, y in zip(a, b))
    assert obs.sig_sums.sums == (2, 1)  # integer, not reduced


def test_length_mismatch():
    with pytest.raises(ValueError):
        transmit_slot([word((1, 0), (1,)), word((1, 0, 0), (1,))], q=2)
    with pytest.raises(ValueError):
        subtract_data((1, 2), (1,), 5)


def test_subtract_examples():
    assert subtract_data((1, 0, 1), (0, 0, 0), 2) == (1, 0, 1)
    a, b = (1, 0, 1, 1), (0, 1, 1, 0)
    xor = tuple(x ^ y for x, y in zip(a, b))
    assert subtract_data(xor, b, 2) == a
    rng = random.Random(3)
    for _ in range(100):
        a = [rng.randrange(5) for _ in range(8)]
        b = [rng.randrange(5) for _ in range(8)]
        assert subtract_data([(x + y) % 5 for x, y in zip(a, b)], b, 5) == tuple(a)


words_strategy = st.integers(2, 6).flatmap(
    lambda n: st.lists(
        st.tuples(st.lists(st.integers(0, 2), min_size=4, max_size=4), st.lists(st.integers(0, 2), min_size=n, max_size=n)),
        min_size=1,
        max_size=6,
    )
)


@settings(max_examples=100, deadline=None)
@given(words_strategy, st.randoms())
def test_order_invariance_and_partitions(raw, rnd):
    q = 3
    words = [word((1, *s[1:]), d) for s, d in raw]
    obs = transmit_slot(words, q)
    shuffled = list(words)
    rnd.shuffle(shuffled)
    assert transmit_slot(shuffled, q) == obs
    cut = rnd.randrange(len(words) + 1)
    d_len = len(words[0].data)
    left = transmit_slot(words[:cut], q, 4, d_len)
    right = transmit_slot(words[cut:], q, 4, d_len)
    assert tuple((x + y) % q for x, y in zip(left.data_sum, right.data_sum)) == obs.data_sum
    assert obs.sig_sums.sums[0] == len(words)
    # removing any one transmitter exposes its data
    for i, w in enumerate(words):
        rest = transmit_slot(words[:i] + words[i + 1 :], q, 4, d_len)
        assert subtract_data(obs.data_sum, rest.data_sum, q) == w.data
