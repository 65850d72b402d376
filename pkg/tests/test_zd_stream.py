import itertools
from collections import defaultdict

import numpy as np
import pytest

from zdsec.codes import InstantaneousCode, build_huffman
from zdsec.errors import Desync
from zdsec.keystream import FixedBits, KeyStream
from zdsec.source_models import SourceModel, sample
from zdsec.zd_stream import StreamEncoder, decode_stream, encode_stream

ABC = InstantaneousCode(("0", "10", "11"))


def test_single_symbol_is_one_codeword():
    s = encode_stream(ABC, [1], FixedBits("01"))
    assert s.bits == "11"
    assert s.stage_offsets == [2]


def test_one_bit_symbols_give_length_n():
    s = encode_stream(ABC, [0] * 17, KeyStream(0))
    assert len(s) == 17


def test_dyadic_rate():
    m = SourceModel([0.5, 0.25, 0.25])
    code = build_huffman(m)
    key = KeyStream(3)
    s = encode_stream(code, sample(m, 10**5, 1), key)
    assert len(s) / 1e5 == pytest.approx(1.5, rel=0.01)
    assert key.consumed_bits == len(s)


def test_round_trip_and_empty():
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    code = build_huffman(m)
    x = [int(v) for v in sample(m, 10**4, 2)]
    s = encode_stream(code, x, KeyStream(9))
    assert decode_stream(code, s, KeyStream(9), len(x)) == x
    assert decode_stream(code, encode_stream(code, [], KeyStream(9)), KeyStream(9), 0) == []


def test_truncated_stream_desyncs_at_last_stage():
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    code = build_huffman(m)
    x = [int(v) for v in sample(m, 50, 2)]
    s = encode_stream(code, x, KeyStream(9))
    with pytest.raises(Desync, match="stage 50"):
        decode_stream(code, s.bits[:-1], KeyStream(9), len(x))


def test_streaming_encoder_matches_batch():
    enc = StreamEncoder(ABC, KeyStream(4))
    for x in (0, 2, 1):
        enc.append(x)
    assert enc.finish().bits == encode_stream(ABC, [0, 2, 1], KeyStream(4)).bits


def test_adversary_view_is_flat_bits():
    s = encode_stream(ABC, [0, 1, 2], KeyStream(4))
    view = s.adversary_view()
    assert isinstance(view, str) and set(view) <= {"0", "1"}
    assert len(view) == 5


@pytest.mark.parametrize("pmf", [[0.5, 0.25, 0.25], [0.6, 0.4], [0.2, 0.5, 0.3]])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_bits_uniform_given_length(pmf, n):
    """P(B = b | x^n) = 2^-l(x^n): the content is uniform and independent of x^n."""
    m = SourceModel(pmf)
    code = build_huffman(m)
    by_len = defaultdict(lambda: defaultdict(float))
    for xs in itertools.product(range(len(pmf)), repeat=n):
        total = sum(len(code[x]) for x in xs)
        for kb in itertools.product("01", repeat=total):
            b = encode_stream(code, xs, FixedBits("".join(kb))).bits
            by_len[xs][b] += 2.0**-total
    for xs, dist in by_len.items():
        total = sum(len(code[x]) for x in xs)
        assert len(dist) == 2**total
        assert np.allclose(list(dist.values()), 2.0**-total, atol=1e-15)
