import itertools
import math
from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zdsec.adversary import (
    CipherSystem,
    StageEncoder,
    block_stage_encoder,
    convergence_curve,
    exact_equivocation,
    key_reuse_stage_encoder,
    length_distribution,
    markov_chain_check,
    noparse_posterior,
    otp_prefix_system,
    posterior_report,
)
from zdsec.codes import InstantaneousCode, build_huffman
from zdsec.errors import StateSpaceTooLarge
from zdsec.source_models import JointSourceModel, SourceModel, entropy

DYADIC = SourceModel([0.5, 0.25, 0.25])
FIXED2 = InstantaneousCode(("00", "01", "10"))


def posterior_by_enumeration(code, pmf, n, L):
    """P(X_1 = . | l(B_n) = L) by summing over all x^n."""
    num = np.zeros(len(pmf))
    for xs in itertools.product(range(len(pmf)), repeat=n):
        if sum(len(code[x]) for x in xs) == L:
            num[xs[0]] += math.prod(pmf[x] for x in xs)
    return num / num.sum()


def test_length_distribution_examples():
    code = build_huffman(DYADIC)
    d1 = length_distribution(code, DYADIC, 1)
    assert d1.probs == pytest.approx({1: 0.5, 2: 0.5})
    d2 = length_distribution(code, DYADIC, 2)
    assert d2.probs == pytest.approx({2: 0.25, 3: 0.5, 4: 0.25})
    d = length_distribution(FIXED2, DYADIC, 7)
    assert d.probs == pytest.approx({14: 1.0})
    assert d[3] == 0.0


@pytest.mark.parametrize("n", [1, 3, 5])
def test_length_distribution_exact_rational(n):
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    code = build_huffman(m)
    pmf = defaultdict(Fraction)
    for x, p in enumerate(["0.4", "0.3", "0.2", "0.1"]):
        pmf[len(code[x])] += Fraction(p)
    q = {0: Fraction(1)}
    for _ in range(n):
        nxt = defaultdict(Fraction)
        for a, pa in q.items():
            for l, pl in pmf.items():
                nxt[a + l] += pa * pl
        q = nxt
    got = length_distribution(code, m, n)
    assert set(got.probs) == set(q)
    for L, p in q.items():
        assert got[L] == pytest.approx(float(p), abs=1e-12)


def test_posterior_examples():
    code = build_huffman(DYADIC)
    # n = 1: posterior proportional to P(x) 1{l(x) = l}
    assert noparse_posterior(code, DYADIC, 1, 2) == pytest.approx([0, 0.5, 0.5])
    # unique 1-bit symbol and L = n: Eve knows every symbol
    post = noparse_posterior(code, DYADIC, 100, 100)
    assert list(post) == [1.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        noparse_posterior(code, DYADIC, 3, 7)


@pytest.mark.parametrize("n,L", [(4, 6), (5, 7), (6, 9), (6, 12)])
def test_posterior_matches_enumeration(n, L):
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    code = build_huffman(m)
    assert noparse_posterior(code, m, n, L) == pytest.approx(posterior_by_enumeration(code, m.pmf, n, L), abs=1e-12)


def test_posterior_tv_shrinks_with_n():
    code = build_huffman(DYADIC)
    tv = lambda n, L: 0.5 * np.abs(noparse_posterior(code, DYADIC, n, L) - DYADIC.pmf).sum()
    # with j two-bit codewords, P(a | L = n + j) = (n - j)/n, so at the mean both are the prior
    assert tv(10, 15) == pytest.approx(0.0, abs=1e-12)
    assert tv(100, 150) == pytest.approx(0.0, abs=1e-12)
    # one bit above the mean the leak shrinks like 1/n
    assert tv(10, 16) == pytest.approx(0.1, abs=1e-12)
    assert tv(100, 151) == pytest.approx(0.01, abs=1e-12)
    assert tv(100, 151) < tv(10, 16)


@pytest.mark.parametrize("n", [1, 7, 40])
def test_posterior_total_probability(n):
    m = SourceModel([0.4, 0.3, 0.2, 0.1])
    code = build_huffman(m)
    rep = posterior_report(code, m, n)
    mix = sum(rep.length_probs[L] * rep.per_length[L][0] for L in rep.length_probs)
    assert mix == pytest.approx(m.pmf, abs=1e-10)
    for post, _ in rep.per_length.values():
        assert post.sum() == pytest.approx(1.0, abs=1e-12)
    assert rep.expected_tv <= rep.max_tv + 1e-15


def test_convergence_curve_examples():
    assert [tv for _, tv in convergence_curve(FIXED2, DYADIC, [1, 10, 100])] == [0.0, 0.0, 0.0]
    point = SourceModel([0.0, 1.0, 0.0])
    assert all(tv == 0.0 for _, tv in convergence_curve(build_huffman(DYADIC), point, [1, 10]))
    curve = convergence_curve(build_huffman(DYADIC), DYADIC, [10, 100, 1000])
    tvs = [tv for _, tv in curve]
    assert tvs[0] > tvs[1] > tvs[2]
    with pytest.raises(ValueError):
        convergence_curve(FIXED2, DYADIC, [10, 1])


def test_length_dp_limit():
    with pytest.raises(StateSpaceTooLarge):
        length_distribution(build_huffman(DYADIC), DYADIC, 1000, limit=100)


@pytest.mark.parametrize("pmf", [[0.6, 0.4], [0.5, 0.3, 0.2], [0.2, 0.2, 0.6]])
def test_markov_chain_block_scheme(pmf):
    m = SourceModel(pmf)
    enc = block_stage_encoder(build_huffman(m))
    assert markov_chain_check(enc, m, 1) == 0.0
    assert markov_chain_check(enc, m, 2) == pytest.approx(0.0, abs=1e-12)


def test_markov_chain_key_reuse_counterexample():
    m = SourceModel([0.5, 0.5])
    assert markov_chain_check(key_reuse_stage_encoder(build_huffman(m)), m, 2) > 0.1


def test_markov_chain_limit():
    m = SourceModel([0.5, 0.3, 0.2])
    with pytest.raises(StateSpaceTooLarge):
        markov_chain_check(block_stage_encoder(build_huffman(m)), m, 3, limit=1000)


def test_markov_chain_plaintext_encoder_without_key_is_zero():
    # no key at all: K^{t-1} is empty, the chain holds trivially
    m = SourceModel([0.5, 0.5])
    code = build_huffman(m)
    enc = StageEncoder(lambda ctx: code[ctx.x[-1]], 0, 0)
    assert markov_chain_check(enc, m, 2) == 0.0


def test_exact_equivocation_examples():
    u = SourceModel.uniform(2)
    code = InstantaneousCode(("0", "1"))
    assert exact_equivocation(otp_prefix_system(code, 2), u, 2) == pytest.approx(1.0, abs=1e-12)
    assert exact_equivocation(otp_prefix_system(code, 0), u, 3) == pytest.approx(0.0, abs=1e-12)
    assert exact_equivocation(otp_prefix_system(code, 2), u, 4) == pytest.approx(0.5, abs=1e-12)


@given(st.integers(0, 2**31), st.integers(0, 4))
def test_equivocation_bounded_by_entropy(seed, key_bits):
    rng = np.random.default_rng(seed)
    m = SourceModel(rng.dirichlet(np.ones(3)))
    code = build_huffman(m)
    h = exact_equivocation(otp_prefix_system(code, key_bits), m, 2)
    assert -1e-12 <= h <= entropy(m) + 1e-12


def test_equivocation_with_eve_side_information():
    # W = X: Eve learns everything whatever the cipher
    j = JointSourceModel(SourceModel.uniform(2), np.eye(2), np.eye(2))
    sysm = otp_prefix_system(InstantaneousCode(("0", "1")), 2)
    assert exact_equivocation(sysm, j, 2) == pytest.approx(0.0, abs=1e-12)
    # W independent of X: same as without SI
    j = JointSourceModel(SourceModel.uniform(2), np.full((2, 2), 0.5), np.eye(2))
    assert exact_equivocation(sysm, j, 2) == pytest.approx(1.0, abs=1e-12)


def test_equivocation_limit():
    sysm = CipherSystem(lambda xs, key: xs, 20)
    with pytest.raises(StateSpaceTooLarge):
        exact_equivocation(sysm, SourceModel.uniform(2), 8, limit=10**4)
