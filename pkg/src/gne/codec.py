"""Model-conditioned arithmetic coding of graphs with names.

A realization is coded under the exact sequential probabilities of its
generating model, so the emitted length tracks ``-log2 P(realization)``.

Edge indicators are coded as gaps between successive edges in canonical pair
order: each gap (or the end marker) is located by a binary search whose
branch probabilities are exact ratios of truncated-geometric masses. The
product of those branch probabilities equals the product of the Bernoulli
indicator probabilities, so the code is the indicator code, only shorter to
run.

Container layout (GNC1)::

    b"GNC1" | tag:u8 | N,alpha,beta,A,L : 5 x 64-bit LE | payload bits:u64 LE
    | payload | crc32:u32 LE over everything before it
"""
from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import arith
from .errors import DecodeError, ValidationError
from .graph import GraphWithNames, binary_names, ints_to_names, names_to_ints
from .hybrid import HybridParams
from .models import ErBinary, ErNamed, rank_pairs, unrank_pairs

CodecModel = Union[ErBinary, ErNamed, HybridParams]

MAGIC = b"GNC1"
_PARAMS = struct.Struct("<4sBQdQQQQ")  # magic, tag, N, alpha, beta(bits), A, L, payload bits
_CRC = struct.Struct("<I")
HEADER_BYTES = _PARAMS.size + _CRC.size
HEADER_BITS = 8 * HEADER_BYTES

_TAGS = {ErBinary: 1, ErNamed: 2, HybridParams: 3}
_DECISION_TOTAL = 1 << 60   # branch probabilities are quantised to 60 bits
_UNIFORM_CUTOFF = 1 << 30   # below this a uniform range is coded in one symbol


@dataclass(frozen=True)
class BitStream:
    data: bytes
    length: int

    def __post_init__(self):
        if not 0 <= self.length <= 8 * len(self.data) or 8 * len(self.data) - self.length >= 8:
            raise ValidationError("bit length does not match the byte buffer")

    @property
    def bits(self) -> list[int]:
        return [(self.data[i >> 3] >> (7 - (i & 7))) & 1 for i in range(self.length)]

    @classmethod
    def from_bits(cls, bits) -> "BitStream":
        bits = list(bits)
        return cls(arith.pack_bits(bits), len(bits))


# --- helpers -------------------------------------------------------------------

def log2_int(n: int) -> float:
    """log2 of a positive integer of any size."""
    b = n.bit_length()
    if b <= 1000:
        return math.log2(n)
    shift = b - 64
    return math.log2(n >> shift) + shift


def _model_L(model) -> int:
    if isinstance(model, ErBinary):
        return binary_names(model.N).shape[1]
    return model.L


def _check_model(model) -> None:
    if type(model) not in _TAGS:
        raise ValidationError(f"model {type(model).__name__} is not codable")
    model.validate()
    if isinstance(model, HybridParams) and not model.ordered:
        raise ValidationError("only the ordered hybrid model is codable")


def _check_graph(model, graph: GraphWithNames) -> None:
    graph.validate()
    A = 2 if isinstance(model, ErBinary) else model.A
    if graph.N != model.N or graph.A != A or graph.L != _model_L(model):
        raise ValidationError("graph dimensions (N, A, L) do not match the model")
    ordered = isinstance(model, HybridParams)
    if graph.ordered != ordered:
        raise ValidationError("ordered/unordered names do not match the model")
    if isinstance(model, ErBinary) and not np.array_equal(graph.names, binary_names(model.N)):
        raise ValidationError("binary model requires vertex i to carry the binary encoding of i")


def _decision(lo: int, mid: int, hi: int, R: int, ls: float) -> int:
    """Quantised probability that the gap lies in [lo, mid) given [lo, hi).

    Symbols 0..R-1 are gaps with mass s^t p; symbol R is the end marker with
    mass s^R. ``ls = ln s``.
    """
    a = (mid - lo) * ls
    if hi <= R:
        den = math.expm1((hi - lo) * ls)
        p_left = math.expm1(a) / den
        p_right = math.exp(a) * math.expm1((hi - mid) * ls) / den
    else:
        p_left = -math.expm1(a)
        p_right = math.exp(a)
    T = _DECISION_TOTAL
    f0 = round(p_left * T) if p_left <= p_right else T - round(p_right * T)
    return min(max(f0, 1), T - 1)


def _encode_indicators(enc: arith.Encoder, positions, total: int, p: float) -> None:
    """Code which of ``total`` Bernoulli(p) trials succeeded (sorted positions)."""
    positions = [int(x) for x in positions]
    if p <= 0.0 or p >= 1.0:
        expected = [] if p <= 0.0 else list(range(total))
        if positions != expected:
            raise ValidationError("realization has probability zero under the model")
        return
    ls = math.log1p(-p)
    cursor = 0
    for g_abs in positions + [None]:
        R = total - cursor
        g = R if g_abs is None else g_abs - cursor
        lo, hi = 0, R + 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            f0 = _decision(lo, mid, hi, R, ls)
            if g < mid:
                enc.encode(0, f0, _DECISION_TOTAL)
                hi = mid
            else:
                enc.encode(f0, _DECISION_TOTAL, _DECISION_TOTAL)
                lo = mid
        cursor += g + 1


def _decode_indicators(dec: arith.Decoder, total: int, p: float) -> list[int]:
    if p <= 0.0:
        return []
    if p >= 1.0:
        return list(range(total))
    ls = math.log1p(-p)
    out = []
    cursor = 0
    while True:
        R = total - cursor
        lo, hi = 0, R + 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if dec.decode_bit(_decision(lo, mid, hi, R, ls), _DECISION_TOTAL):
                lo = mid
            else:
                hi = mid
        if lo == R:
            return out
        out.append(cursor + lo)
        cursor += lo + 1


def _indicator_bits(successes: int, total: int, p: float) -> float:
    if successes and p <= 0.0 or successes < total and p >= 1.0:
        raise ValidationError("realization has probability zero under the model")
    bits = 0.0
    if successes:
        bits -= successes * math.log2(p)
    if total - successes:
        bits -= (total - successes) * math.log1p(-p) / math.log(2)
    return bits


def _encode_uniform(enc: arith.Encoder, r: int, n: int) -> None:
    """Code r uniform on range(n) for arbitrarily large n."""
    lo, hi = 0, n
    while hi - lo > _UNIFORM_CUTOFF:
        mid = (lo + hi) // 2
        f0 = ((mid - lo) << 60) // (hi - lo)
        if r < mid:
            enc.encode(0, f0, _DECISION_TOTAL)
            hi = mid
        else:
            enc.encode(f0, _DECISION_TOTAL, _DECISION_TOTAL)
            lo = mid
    enc.encode(r - lo, r - lo + 1, hi - lo)


def _decode_uniform(dec: arith.Decoder, n: int) -> int:
    lo, hi = 0, n
    while hi - lo > _UNIFORM_CUTOFF:
        mid = (lo + hi) // 2
        f0 = ((mid - lo) << 60) // (hi - lo)
        if dec.decode_bit(f0, _DECISION_TOTAL):
            lo = mid
        else:
            hi = mid
    t = dec.target(hi - lo)
    dec.consume(t, t + 1, hi - lo)
    return lo + t


def rank_name_set(values) -> int:
    """Combinatorial rank ``sum_i C(x_i, i)`` of a set of integers (sorted, 1-based i)."""
    return sum(math.comb(x, i) for i, x in enumerate(sorted(values), start=1))


def unrank_name_set(r: int, N: int, space: int) -> list[int]:
    if not 0 <= r < math.comb(space, N):
        raise DecodeError("name-set rank out of range", 0)
    out = []
    hi_bound = space
    for i in range(N, 0, -1):
        # largest x < hi_bound with C(x, i) <= r
        lo, hi = i - 1, hi_bound - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if math.comb(mid, i) <= r:
                lo = mid
            else:
                hi = mid - 1
        out.append(lo)
        r -= math.comb(lo, i)
        hi_bound = lo
    return out[::-1]


def _letter_cum(counts: np.ndarray, A: int) -> list[int]:
    freqs = 1 + A * counts
    return [0] + np.cumsum(freqs).tolist()


def _parent_lists(N: int, edges: np.ndarray) -> list[np.ndarray]:
    parents = [[] for _ in range(N)]
    for u, v in edges.tolist():
        parents[v].append(u)
    return [np.array(sorted(p), dtype=np.int64) for p in parents]


# --- payloads ------------------------------------------------------------------

def _encode_payload(model, graph: GraphWithNames) -> list[int]:
    enc = arith.Encoder()
    N = model.N
    p = model.alpha / N
    if isinstance(model, ErBinary):
        pos = np.sort(rank_pairs(graph.edges, N)) if graph.num_edges else []
        _encode_indicators(enc, pos, N * (N - 1) // 2, p)
    elif isinstance(model, ErNamed):
        g = graph.sorted_by_name()
        space = model.A ** model.L
        _encode_uniform(enc, rank_name_set(names_to_ints(g.names, model.A)), math.comb(space, N))
        pos = np.sort(rank_pairs(g.edges, N)) if g.num_edges else []
        _encode_indicators(enc, pos, N * (N - 1) // 2, p)
    else:
        A = model.A
        parents = _parent_lists(N, graph.edges)
        for v in range(N):
            _encode_indicators(enc, parents[v], v, p)
            letters = graph.names[parents[v]]
            for u in range(model.L):
                cum = _letter_cum(np.bincount(letters[:, u], minlength=A), A)
                a = int(graph.names[v, u])
                enc.encode(cum[a], cum[a + 1], cum[-1])
    return enc.finish()


def _decode_payload(model, dec: arith.Decoder) -> GraphWithNames:
    N = model.N
    p = model.alpha / N
    pairs_total = N * (N - 1) // 2
    if isinstance(model, ErBinary):
        pos = np.array(_decode_indicators(dec, pairs_total, p), dtype=np.int64)
        return GraphWithNames(2, _model_L(model), binary_names(N), unrank_pairs(pos, N))
    if isinstance(model, ErNamed):
        space = model.A ** model.L
        r = _decode_uniform(dec, math.comb(space, N))
        names = ints_to_names(unrank_name_set(r, N, space), model.A, model.L)
        pos = np.array(_decode_indicators(dec, pairs_total, p), dtype=np.int64)
        return GraphWithNames(model.A, model.L, names, unrank_pairs(pos, N))
    A, L = model.A, model.L
    names = np.zeros((N, L), dtype=np.uint8)
    edges = []
    for v in range(N):
        par = np.array(_decode_indicators(dec, v, p), dtype=np.int64)
        if par.size and (par.min() < 0 or par.max() >= v):
            raise DecodeError("decoded parent out of range", dec.pos)
        edges.extend((int(u), v) for u in par)
        letters = names[par]
        for u in range(L):
            cum = _letter_cum(np.bincount(letters[:, u], minlength=A), A)
            names[v, u] = dec.decode_cumulative(cum)
    return GraphWithNames(A, L, names, np.array(edges, dtype=np.int64).reshape(-1, 2), ordered=True)


# --- public API ----------------------------------------------------------------

def _header(model, nbits: int) -> bytes:
    return _PARAMS.pack(MAGIC, _TAGS[type(model)], int(model.N), float(model.alpha),
                        struct.unpack("<Q", struct.pack("<d", float(getattr(model, "beta", 0.0))))[0],
                        int(getattr(model, "A", 2)), _model_L(model), nbits)


def encode(model: CodecModel, graph: GraphWithNames) -> BitStream:
    """Arithmetic-code ``graph`` under ``model`` into a self-checking GNC1 stream."""
    _check_model(model)
    _check_graph(model, graph)
    bits = _encode_payload(model, graph)
    body = _header(model, len(bits)) + arith.pack_bits(bits)
    data = body + _CRC.pack(zlib.crc32(body))
    return BitStream(data, 8 * len(data))


def decode(model: CodecModel, stream: BitStream | bytes) -> GraphWithNames:
    """Inverse of ``encode``; raises DecodeError on corrupt or mismatched input."""
    _check_model(model)
    data = stream.data if isinstance(stream, BitStream) else bytes(stream)
    if len(data) < HEADER_BYTES:
        raise DecodeError("stream shorter than the container header", 8 * len(data))
    if data[:4] != MAGIC:
        raise DecodeError("bad magic", 0)
    body, (crc,) = data[:-_CRC.size], _CRC.unpack(data[-_CRC.size:])
    if zlib.crc32(body) != crc:
        raise DecodeError("checksum mismatch", 8 * (len(data) - _CRC.size))
    _, tag, N, alpha, beta_raw, A, L, nbits = _PARAMS.unpack(body[:_PARAMS.size])
    if tag != _TAGS[type(model)]:
        raise DecodeError(f"stream model tag {tag} does not match {model.tag}", 32)
    if body[: _PARAMS.size - 8] != _header(model, 0)[: _PARAMS.size - 8]:
        raise DecodeError("stream parameters do not match the model", 40)
    payload = body[_PARAMS.size:]
    if (nbits + 7) // 8 != len(payload):
        raise DecodeError("payload length disagrees with header", 8 * _PARAMS.size)
    dec = arith.Decoder(payload, nbits)
    graph = _decode_payload(model, dec)
    try:
        graph.validate()
    except ValidationError as exc:
        raise DecodeError(f"decoded graph invalid: {exc}", dec.pos) from None
    return graph


def payload_bits(stream: BitStream | bytes) -> int:
    """Length of the arithmetic-coded payload, excluding container framing."""
    data = stream.data if isinstance(stream, BitStream) else bytes(stream)
    if len(data) < HEADER_BYTES:
        raise DecodeError("stream shorter than the container header", 8 * len(data))
    return _PARAMS.unpack(data[:_PARAMS.size])[-1]


def ideal_codelength(model: CodecModel, graph: GraphWithNames) -> float:
    """``-log2 P(graph)`` under the model's sequential probabilities."""
    _check_model(model)
    _check_graph(model, graph)
    N = model.N
    p = model.alpha / N
    if isinstance(model, (ErBinary, ErNamed)):
        bits = _indicator_bits(graph.num_edges, N * (N - 1) // 2, p)
        if isinstance(model, ErNamed):
            bits += log2_int(math.comb(model.A ** model.L, N))
        return bits
    A, L = model.A, model.L
    parents = _parent_lists(N, graph.edges)
    bits = 0.0
    for v in range(N):
        k = parents[v].size
        bits += _indicator_bits(k, v, p)
        if k == 0:
            bits += L * math.log2(A)
            continue
        letters = graph.names[parents[v]]
        counts = np.zeros((L, A))
        np.add.at(counts, (np.tile(np.arange(L), k), letters.ravel()), 1.0)
        own = counts[np.arange(L), graph.names[v]]
        bits -= float(np.sum(np.log2((1 + A * own) / ((1 + k) * A))))
    return bits
