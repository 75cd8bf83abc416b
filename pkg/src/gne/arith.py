"""Binary arithmetic coder with 64-bit integer range registers.

Classic low/high coder with pending-bit (underflow) handling. Symbol
frequencies are integers with ``total <= 2**32``; after renormalisation the
range always exceeds 2**62, so every positive frequency stays codable.
"""
from __future__ import annotations

from .errors import DecodeError

STATE_BITS = 64
FULL = 1 << STATE_BITS
HALF = FULL >> 1
QUARTER = FULL >> 2
MASK = FULL - 1
MAX_TOTAL = 1 << 32


class Encoder:
    def __init__(self):
        self.low = 0
        self.high = MASK
        self.pending = 0
        self.bits: list[int] = []

    def _emit(self, bit: int):
        self.bits.append(bit)
        if self.pending:
            self.bits.extend([bit ^ 1] * self.pending)
            self.pending = 0

    def encode(self, cum_low: int, cum_high: int, total: int):
        """Code the symbol occupying ``[cum_low, cum_high)`` out of ``total``."""
        if not 0 <= cum_low < cum_high <= total <= QUARTER:
            raise ValueError("bad frequency interval")
        rng = self.high - self.low + 1
        self.high = self.low + rng * cum_high // total - 1
        self.low = self.low + rng * cum_low // total
        while True:
            if self.high < HALF:
                self._emit(0)
            elif self.low >= HALF:
                self._emit(1)
                self.low -= HALF
                self.high -= HALF
            elif self.low >= QUARTER and self.high < HALF + QUARTER:
                self.pending += 1
                self.low -= QUARTER
                self.high -= QUARTER
            else:
                break
            self.low <<= 1
            self.high = (self.high << 1) | 1

    def encode_bit(self, bit: int, freq0: int, total: int = MAX_TOTAL):
        if bit:
            self.encode(freq0, total, total)
        else:
            self.encode(0, freq0, total)

    def finish(self) -> list[int]:
        self.pending += 1
        self._emit(0 if self.low < QUARTER else 1)
        return self.bits


class Decoder:
    def __init__(self, bits, nbits: int):
        self.data = bits
        self.nbits = nbits
        self.pos = 0
        self.low = 0
        self.high = MASK
        self.value = 0
        for _ in range(STATE_BITS):
            self.value = (self.value << 1) | self._read()

    def _read(self) -> int:
        # past the end the stream is implicitly zero-padded
        p = self.pos
        self.pos += 1
        if p >= self.nbits:
            return 0
        return (self.data[p >> 3] >> (7 - (p & 7))) & 1

    def target(self, total: int) -> int:
        rng = self.high - self.low + 1
        t = ((self.value - self.low + 1) * total - 1) // rng
        if not 0 <= t < total:
            raise DecodeError("arithmetic decoder left its interval", self.pos)
        return t

    def consume(self, cum_low: int, cum_high: int, total: int):
        rng = self.high - self.low + 1
        self.high = self.low + rng * cum_high // total - 1
        self.low = self.low + rng * cum_low // total
        while True:
            if self.high < HALF:
                pass
            elif self.low >= HALF:
                self.low -= HALF
                self.high -= HALF
                self.value -= HALF
            elif self.low >= QUARTER and self.high < HALF + QUARTER:
                self.low -= QUARTER
                self.high -= QUARTER
                self.value -= QUARTER
            else:
                break
            self.low <<= 1
            self.high = (self.high << 1) | 1
            self.value = (self.value << 1) | self._read()

    def decode_bit(self, freq0: int, total: int = MAX_TOTAL) -> int:
        if self.target(total) < freq0:
            self.consume(0, freq0, total)
            return 0
        self.consume(freq0, total, total)
        return 1

    def decode_cumulative(self, cum: list[int]) -> int:
        """Decode a symbol given cumulative frequencies ``cum[0] = 0 .. cum[-1] = total``."""
        total = cum[-1]
        t = self.target(total)
        lo, hi = 0, len(cum) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if cum[mid] <= t:
                lo = mid
            else:
                hi = mid
        self.consume(cum[lo], cum[lo + 1], total)
        return lo


def pack_bits(bits: list[int]) -> bytes:
    out = bytearray((len(bits) + 7) // 8)
    for i, b in enumerate(bits):
        if b:
            out[i >> 3] |= 0x80 >> (i & 7)
    return bytes(out)
