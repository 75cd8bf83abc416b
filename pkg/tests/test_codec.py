import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gne import arith, codec
from gne.entropy import bernoulli_entropy
from gne.errors import DecodeError, ValidationError
from gne.graph import GraphWithNames, binary_names
from gne.hybrid import HybridParams, gen_hybrid
from gne.models import ErBinary, ErNamed, exact_entropy, generate

SLACK = 64 + codec.HEADER_BITS


def sample(model):
    return gen_hybrid(model)[0] if isinstance(model, HybridParams) else generate(model)


def brute_probability(model, graph):
    """P(graph) as a product of per-indicator and per-letter probabilities, no logs."""
    N, p = model.N, model.alpha / model.N
    prob = 1.0
    edges = {tuple(e) for e in graph.edges.tolist()}
    for u in range(N):
        for v in range(u + 1, N):
            prob *= p if (u, v) in edges else 1 - p
    if isinstance(model, ErNamed):
        prob /= math.comb(model.A ** model.L, N)
    if isinstance(model, HybridParams):
        A = model.A
        for v in range(N):
            par = [u for u, w in edges if w == v]
            for c in range(model.L):
                cnt = sum(graph.names[u, c] == graph.names[v, c] for u in par)
                prob *= (1 + A * cnt) / ((1 + len(par)) * A)
    return prob


# --- arithmetic coder ---------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 2**20), st.integers(1, 2**20)), min_size=1, max_size=200),
       st.integers(0, 2**32))
def test_coder_roundtrip_random_symbols(freqs, seed):
    rng = np.random.default_rng(seed)
    enc = arith.Encoder()
    symbols = []
    for f0, f1 in freqs:
        b = int(rng.random() < f1 / (f0 + f1))
        symbols.append(b)
        enc.encode_bit(b, f0, f0 + f1)
    bits = enc.finish()
    dec = arith.Decoder(arith.pack_bits(bits), len(bits))
    assert [dec.decode_bit(f0, f0 + f1) for f0, f1 in freqs] == symbols
    ideal = -sum(math.log2((f1 if b else f0) / (f0 + f1)) for b, (f0, f1) in zip(symbols, freqs))
    assert len(bits) <= ideal + 2 + 1e-6


def test_coder_cumulative_symbols():
    cum = [0, 3, 4, 10, 11]
    syms = [0, 3, 2, 2, 1, 0, 3]
    enc = arith.Encoder()
    for s in syms:
        enc.encode(cum[s], cum[s + 1], cum[-1])
    bits = enc.finish()
    dec = arith.Decoder(arith.pack_bits(bits), len(bits))
    assert [dec.decode_cumulative(cum) for _ in syms] == syms


@given(st.lists(st.integers(0, 2**20), max_size=8, unique=True))
def test_name_set_rank_roundtrip(vals):
    space = 2**20 + 1
    r = codec.rank_name_set(vals)
    assert 0 <= r < math.comb(space, len(vals)) or not vals
    if vals:
        assert codec.unrank_name_set(r, len(vals), space) == sorted(vals)


def test_name_set_rank_is_bijection_small():
    import itertools
    ranks = sorted(codec.rank_name_set(c) for c in itertools.combinations(range(7), 3))
    assert ranks == list(range(math.comb(7, 3)))


# --- examples -------------------------------------------------------------------------

def test_er_binary_small_example():
    m = ErBinary(4, 2.0)
    for edges in ([], [[0, 1]], [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]):
        g = GraphWithNames(2, 2, binary_names(4), edges)
        assert codec.ideal_codelength(m, g) == pytest.approx(6.0, abs=1e-12)
        s = codec.encode(m, g)
        assert codec.payload_bits(s) <= 70
        assert codec.decode(m, s).same_as(g)


@pytest.mark.parametrize("model", [ErBinary(7, 2.5, seed=1), ErNamed(6, 1.5, 1.5, 3, seed=2),
                                   HybridParams(6, 2.0, 1.5, 2, seed=3)])
def test_ideal_matches_brute_probability(model):
    for s in range(5):
        m = type(model)(**{**model.__dict__, "seed": s})
        g = sample(m)
        assert codec.ideal_codelength(m, g) == pytest.approx(-math.log2(brute_probability(m, g)), rel=1e-10)


def test_hybrid_alpha_zero_ideal():
    m = HybridParams(30, 0.0, 2.0, 3, seed=1)
    g = sample(m)
    assert codec.ideal_codelength(m, g) == pytest.approx(30 * m.L * math.log2(3), rel=1e-13)
    m2 = HybridParams(30, 1e-9, 2.0, 3, seed=1)
    g2 = sample(m2)
    assert g2.num_edges == 0
    assert codec.ideal_codelength(m2, g2) == pytest.approx(30 * m.L * math.log2(3), abs=1e-6)


# --- losslessness and length ----------------------------------------------------------------

def _models(seed):
    return [ErBinary(60, 2.0, seed=seed), ErNamed(40, 1.0, 2.0, 2, seed=seed),
            HybridParams(40, 1.5, 2.0, 3, seed=seed)]


@pytest.mark.parametrize("which", [0, 1, 2])
def test_roundtrip_100_seeds(which):
    for seed in range(100):
        m = _models(seed)[which]
        g = sample(m)
        s = codec.encode(m, g)
        assert codec.decode(m, s).same_as(g)
        gap = codec.payload_bits(s) - codec.ideal_codelength(m, g)
        assert 0 <= gap <= SLACK


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 60), st.floats(0.05, 1.0), st.integers(0, 2**32))
def test_roundtrip_property_er(N, frac, seed):
    m = ErBinary(N, frac * N, seed=seed)
    g = sample(m)
    s = codec.encode(m, g)
    assert codec.decode(m, s).same_as(g)
    assert 0 <= codec.payload_bits(s) - codec.ideal_codelength(m, g) <= SLACK


def test_dense_edge_probability_one():
    m = ErBinary(5, 5.0)
    g = sample(m)
    assert g.num_edges == 10
    s = codec.encode(m, g)
    assert codec.decode(m, s).same_as(g)
    with pytest.raises(ValidationError):
        codec.ideal_codelength(m, GraphWithNames(2, 3, binary_names(5), []))


def test_er_binary_mean_length_window():
    N, m0 = 1000, ErBinary(1000, 2.0)
    H = exact_entropy(m0).bits
    assert H == pytest.approx(N * (N - 1) / 2 * bernoulli_entropy(2 / N) / math.log(2))
    lengths = [codec.payload_bits(codec.encode(m, sample(m))) for m in (ErBinary(N, 2.0, seed=s) for s in range(200))]
    # literal window; the sample mean has stderr near 20 bits so the lower edge is a coin flip
    assert H <= np.mean(lengths) <= H + 128


def test_er_binary_mean_overhead_paired():
    N = 1000
    over, ideal = [], []
    for s in range(200):
        m = ErBinary(N, 2.0, seed=s)
        g = sample(m)
        ideal.append(codec.ideal_codelength(m, g))
        over.append(codec.payload_bits(codec.encode(m, g)) - ideal[-1])
    assert 0 <= np.mean(over) <= 128
    H = exact_entropy(ErBinary(N, 2.0)).bits
    ideal = np.array(ideal)
    assert abs(ideal.mean() - H) < 3 * ideal.std(ddof=1) / math.sqrt(len(ideal))


@pytest.mark.parametrize("N,seeds", [(100, 500), (1000, 100)])
def test_ideal_mean_matches_entropy(N, seeds):
    m0 = ErBinary(N, 1.0)
    H = exact_entropy(m0).bits
    vals = np.array([codec.ideal_codelength(m, sample(m)) for m in (ErBinary(N, 1.0, seed=s) for s in range(seeds))])
    assert abs(vals.mean() - H) < 3 * vals.std(ddof=1) / math.sqrt(seeds)


def test_er_named_ideal_mean_matches_entropy():
    N, seeds = 100, 300
    H = exact_entropy(ErNamed(N, 1.0, 2.0, 2)).bits
    vals = np.array([codec.ideal_codelength(m, sample(m)) for m in (ErNamed(N, 1.0, 2.0, 2, seed=s) for s in range(seeds))])
    assert abs(vals.mean() - H) < 3 * vals.std(ddof=1) / math.sqrt(seeds)


# --- failures ---------------------------------------------------------------------------------

def test_corruption_detected():
    m = ErNamed(30, 1.0, 2.0, 2, seed=4)
    g = sample(m)
    data = bytearray(codec.encode(m, g).data)
    rng = np.random.default_rng(0)
    for _ in range(50):
        bad = bytearray(data)
        i = int(rng.integers(0, 8 * len(bad)))
        bad[i >> 3] ^= 0x80 >> (i & 7)
        try:
            out = codec.decode(m, bytes(bad))
        except DecodeError as exc:
            assert exc.position is not None
        else:
            assert not out.same_as(g)


def test_truncated_stream():
    m = ErBinary(20, 2.0, seed=1)
    data = codec.encode(m, sample(m)).data
    for cut in (3, 20, len(data) - 1):
        with pytest.raises(DecodeError):
            codec.decode(m, data[:cut])


def test_cross_model_rejected():
    mb = ErBinary(16, 2.0, seed=1)
    s = codec.encode(mb, sample(mb))
    with pytest.raises(DecodeError):
        codec.decode(ErNamed(16, 2.0, 2.0, 2), s)
    with pytest.raises(DecodeError):
        codec.decode(ErBinary(16, 3.0), s)


def test_graph_model_mismatch():
    with pytest.raises(ValidationError):
        codec.encode(ErBinary(8, 1.0), generate(ErBinary(9, 1.0)))
    names = np.array([[0, 0], [0, 0], [1, 1]])
    with pytest.raises(ValidationError):
        codec.encode(ErNamed(3, 1.0, 1.3, 2), GraphWithNames(2, 2, names, []))
    with pytest.raises(ValidationError):
        codec.encode(HybridParams(10, 1.0, 2.0, 2, ordered=False), generate(ErBinary(10, 1.0)))


def test_bitstream_type():
    bs = codec.BitStream.from_bits([1, 0, 1, 1, 0, 0, 0, 0, 1])
    assert bs.length == 9 and bs.bits == [1, 0, 1, 1, 0, 0, 0, 0, 1]
    with pytest.raises(ValidationError):
        codec.BitStream(b"\x00", 9)
