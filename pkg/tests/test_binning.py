import itertools
import math

import numpy as np
import pytest

from zdsec.binning import SlepianWolfCode, slepian_wolf_binning
from zdsec.errors import SWDecodeFailure
from zdsec.source_models import SourceModel, conditional_entropy, sample, sample_channel

BSC = np.array([[0.9, 0.1], [0.1, 0.9]])
JOINT = np.array([[0.45, 0.05], [0.05, 0.45]])


def draw(n, seed):
    s = sample(SourceModel.uniform(2), n, seed)
    return s, sample_channel(BSC, s, seed + 1)


def ml_in_bin_oracle(code, target, ys, table):
    """Highest P(s | y) sequence among all 2^len hashing to target (ties: lexicographic)."""
    best, best_lp = None, -math.inf
    for cand in itertools.product(range(2), repeat=len(ys)):
        h = 0
        for pos, s in enumerate(cand):
            h ^= table[pos][s]
        if h != target:
            continue
        lp = sum(math.log(code._cond[s, y]) for s, y in zip(cand, ys))
        if lp > best_lp + 1e-12:
            best, best_lp = list(cand), lp
    return best, best_lp


def test_full_rate_is_identity_and_exact():
    for seed in range(20):
        s, y = draw(200, seed)
        res = slepian_wolf_binning(s, y, 1.0, seed, JOINT)
        assert not res.error and res.failed_blocks == 0


def test_perfect_side_information():
    joint = np.diag([0.5, 0.5])
    for seed in range(20):
        s = sample(SourceModel.uniform(2), 200, seed)
        res = slepian_wolf_binning(s, s, 0.1, seed, joint)
        assert not res.error


def test_higher_rate_fewer_errors_paired():
    H = conditional_entropy(JOINT)
    errs = {0.05: 0, 0.25: 0}
    for trial in range(80):
        s, y = draw(200, 1000 + trial)
        for margin in errs:
            errs[margin] += slepian_wolf_binning(s, y, H + margin, trial, JOINT).error
    assert errs[0.25] < errs[0.05]


def test_decoder_finds_ml_sequence_in_bin():
    """On short blocks the best-first search equals exhaustive ML over the bin."""
    code = SlepianWolfCode(JOINT, 0.5, seed=3, block_len=10, cap=1 << 12)
    for seed in range(15):
        s, y = draw(10, 50 + seed)
        (target,) = code.encode(s)
        identity, _, table = code._layout(0, 10)
        assert not identity
        decoded, failed = code.decode((target,), y)
        want, want_lp = ml_in_bin_oracle(code, target, y, table)
        got_lp = sum(math.log(code._cond[a, b]) for a, b in zip(decoded, y))
        assert not failed[0]
        assert got_lp == pytest.approx(want_lp, abs=1e-9)
        assert code.encode(decoded) == (target,)


def test_bits_round_trip_and_widths():
    code = SlepianWolfCode(JOINT, 0.6, seed=1)
    s, _ = draw(55, 3)
    bins = code.encode(s)
    bits = code.bins_to_bits(bins, 55)
    assert len(bits) == code.n_bits(55) == sum(code.widths(55))
    assert code.widths(55) == [12, 12, 9]
    assert code.bits_to_bins(bits, 55) == bins
    with pytest.raises(ValueError):
        code.bits_to_bins(bits + "0", 55)


def test_decode_strict_raises_on_failure():
    code = SlepianWolfCode(JOINT, 0.05, seed=0, cap=4)
    s, y = draw(40, 8)
    with pytest.raises(SWDecodeFailure):
        for seed in range(50):
            s, y = draw(40, seed)
            code.decode_strict(code.encode(s), y)


def test_encoder_deterministic_given_seed():
    s, _ = draw(100, 2)
    assert SlepianWolfCode(JOINT, 0.6, 5).encode(s) == SlepianWolfCode(JOINT, 0.6, 5).encode(s)
    assert SlepianWolfCode(JOINT, 0.6, 5).encode(s) != SlepianWolfCode(JOINT, 0.6, 6).encode(s)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        SlepianWolfCode(JOINT, -0.1, 0)
    with pytest.raises(ValueError):
        SlepianWolfCode(JOINT, 0.5, 0, block_len=0)
    assert SlepianWolfCode(JOINT, 0.5, 0).conditional_entropy == pytest.approx(conditional_entropy(JOINT))
