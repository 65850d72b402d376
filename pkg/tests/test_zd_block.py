import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zdsec.codes import InstantaneousCode, build_huffman, huffman_length
from zdsec.errors import Desync
from zdsec.keystream import FixedBits, KeyStream, PrivateRandomness
from zdsec.source_models import SourceModel, sample
from zdsec.zd_block import (
    block_channel,
    block_distribution,
    decode_block,
    decode_sequence,
    encode_block,
    encode_sequence,
    huffman_block_point,
    independence_tv,
    joint_block_distribution,
    multistage_joint,
    region_points,
    timeshare_schedule,
    total_variation,
)

ABC = InstantaneousCode(("0", "10", "11"))


def bits(n):
    return ("".join(b) for b in itertools.product("01", repeat=n))


def test_encode_block_examples():
    assert encode_block(ABC, 0, FixedBits("1"), FixedBits("0")) == "10"
    assert encode_block(ABC, 1, FixedBits("01"), FixedBits("")) == "11"
    assert encode_block(ABC, 2, FixedBits("00"), FixedBits("")) == "11"


def test_decode_block_examples():
    key = FixedBits("1")
    assert decode_block(ABC, "10", key) == 0
    assert key.consumed_bits == 1


def test_round_trip_many_symbols():
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    code = build_huffman(m)
    x = [int(v) for v in sample(m, 10**4, 1)]
    trace = encode_sequence(code, x, KeyStream(4), PrivateRandomness(4))
    assert all(len(b) == code.max_len for b in trace.blocks)
    assert decode_sequence(code, trace.blocks, KeyStream(4)) == x


def _decode_shifted(xs, kbits):
    """Encode with ``kbits``, decode with the key advanced by one burned bit."""
    enc_key = FixedBits(kbits)
    blocks = [encode_block(ABC, x, enc_key, FixedBits("0")) for x in xs]
    dec_key = FixedBits(kbits + "0")
    dec_key.next_bits(1)
    try:
        return [decode_block(ABC, b, dec_key) for b in blocks]
    except (Desync, IndexError):
        return None


def test_shifted_key_breaks_decoding():
    broken = [
        (xs, kb)
        for xs in itertools.product(range(3), repeat=2)
        for kb in bits(4)
        if _decode_shifted(xs, kb) != list(xs)
    ]
    assert broken
    # a concrete one: x = (a, a) with key "10..." decodes the first block as b or c
    assert _decode_shifted((0, 0), "1000") != [0, 0]


def test_desync_on_impossible_block():
    with pytest.raises(Desync):
        decode_block(InstantaneousCode(("00", "01")), "11", FixedBits("00"))


def test_decoder_never_reads_pad_exhaustive():
    rng = np.random.default_rng(0)
    for k in range(2, 6):
        for _ in range(3):
            p = rng.dirichlet(np.ones(k))
            code = build_huffman(p)
            L = code.max_len
            for x in range(k):
                l = len(code[x])
                for kb in bits(l):
                    for vb in bits(L - l):
                        z = encode_block(code, x, FixedBits(kb), FixedBits(vb))
                        key = FixedBits(kb + "1" * L)
                        assert decode_block(code, z, key) == x
                        assert key.consumed_bits == l


def test_block_distribution_uniform():
    for pmf in ([0.5, 0.25, 0.25], [0.4, 0.3, 0.2, 0.1], [0.9, 0.1]):
        m = SourceModel(pmf)
        code = build_huffman(m)
        d = block_distribution(code, m)
        assert np.allclose(d.probs, 2.0 ** -code.max_len, atol=1e-12, rtol=0)
        assert independence_tv(joint_block_distribution(code, m)) < 1e-12


def test_zero_pad_variant_leaks():
    m = SourceModel([0.5, 0.25, 0.25])
    code = build_huffman(m)
    d = block_distribution(code, m, pad="zeros")
    uniform = np.full(len(d.probs), 2.0 ** -code.max_len)
    assert total_variation(d.probs, uniform) > 0.1
    assert independence_tv(joint_block_distribution(code, m, pad="zeros")) > 0.1


@pytest.mark.parametrize("pmf", [[0.7, 0.3], [0.5, 0.3, 0.2], [0.4, 0.3, 0.2, 0.1], [0.3, 0.3, 0.2, 0.1, 0.1]])
def test_two_stage_perfect_secrecy(pmf):
    m = SourceModel(pmf)
    code = build_huffman(m)
    joint, xs, zs = multistage_joint(code, m, stages=2)
    assert joint.sum() == pytest.approx(1.0, abs=1e-12)
    cond = joint / joint.sum(axis=1, keepdims=True)
    # every x-sequence gives the same (uniform) block-pair law
    assert np.abs(cond - 1.0 / len(zs)).max() < 1e-12
    assert independence_tv(joint) < 1e-12


def test_block_channel_rows_are_distributions():
    ch = block_channel(ABC)
    assert np.allclose(ch.sum(axis=1), 1.0)


def test_region_points_four_symbols():
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    points, env = region_points(m)
    got = {p.profile: (p.R, p.R_k) for p in points}
    assert set(got) == {(1, 2, 3, 3), (2, 2, 2, 2)}
    assert got[(1, 2, 3, 3)] == pytest.approx((3.0, 1.9))
    assert got[(2, 2, 2, 2)] == pytest.approx((2.0, 2.0))
    L = huffman_length(m)
    for p in points:
        assert p.R >= math.ceil(math.log2(4))
        assert p.R_k >= L - 1e-12
        assert p.on_envelope
    assert env(2.5) == pytest.approx(1.95)


@given(st.integers(3, 6), st.integers(0, 2**31))
def test_envelope_dominance(k, seed):
    m = SourceModel(np.random.default_rng(seed).dirichlet(np.ones(k)))
    points, env = region_points(m)
    L = huffman_length(m)
    for p in points:
        assert p.R_k >= env(p.R) - 1e-12
        assert p.R_k >= L - 1e-12
        assert p.R >= math.ceil(math.log2(k))
    assert huffman_block_point(m).R_k == pytest.approx(L)


def test_region_needs_two_symbols():
    with pytest.raises(ValueError):
        region_points(SourceModel([1.0]))


def test_timeshare_schedule():
    s = timeshare_schedule(0.25, 8)
    assert s == [0, 0, 0, 1, 0, 0, 0, 1]
    assert sum(timeshare_schedule(1 / 3, 300)) == 100
    with pytest.raises(ValueError):
        timeshare_schedule(1.5, 3)


def test_timeshared_codes_round_trip():
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    points, _ = region_points(m)
    from zdsec.codes import code_for_profile

    codes = [code_for_profile(p.profile, m) for p in points]
    sched = timeshare_schedule(0.5, 1000)
    x = [int(v) for v in sample(m, 1000, 2)]
    trace = encode_sequence(codes, x, KeyStream(1), PrivateRandomness(1), sched)
    assert decode_sequence(codes, trace.blocks, KeyStream(1), sched) == x
    assert trace.coding_rate == pytest.approx(2.5)


def test_key_rate_matches_huffman_length():
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    code = build_huffman(m)
    trace = encode_sequence(code, sample(m, 10**5, 5), KeyStream(6), PrivateRandomness(6))
    assert trace.key_rate == pytest.approx(1.9, rel=0.01)
    assert trace.coding_rate == 3.0
