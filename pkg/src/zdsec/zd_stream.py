"""No-parsing scheme: per-symbol Huffman codewords under a one-time pad,
concatenated into one unframed bit-stream."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .codes import InstantaneousCode
from .errors import Desync
from .keystream import KeyStream, xor_bits


@dataclass
class BitStream:
    """The transmitted stream B_n.

    ``stage_offsets`` (end offset of each stage) is bookkeeping for tests
    and traces; :meth:`adversary_view` is all an eavesdropper gets.
    """

    bits: str = ""
    stage_offsets: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.bits)

    @property
    def n_stages(self) -> int:
        return len(self.stage_offsets)

    def adversary_view(self) -> str:
        return self.bits


class StreamEncoder:
    """Streaming encoder; the horizon n need not be known in advance."""

    def __init__(self, code: InstantaneousCode, key: KeyStream):
        self.code = code
        self.key = key
        self.stream = BitStream()
        self._chunks: list[str] = []

    def append(self, x: int) -> str:
        cw = self.code[int(x)]
        z = xor_bits(cw, self.key.next_bits(len(cw)))
        self.key.end_stage()
        self._chunks.append(z)
        prev = self.stream.stage_offsets[-1] if self.stream.stage_offsets else 0
        self.stream.stage_offsets.append(prev + len(z))
        return z

    def extend(self, xs: Iterable[int]):
        for x in xs:
            self.append(x)

    def finish(self) -> BitStream:
        self.stream.bits += "".join(self._chunks)
        self._chunks = []
        return self.stream


def encode_stream(code: InstantaneousCode, x_seq: Sequence[int], key: KeyStream) -> BitStream:
    enc = StreamEncoder(code, key)
    enc.extend(x_seq)
    return enc.finish()


def decode_stream(
    code: InstantaneousCode, stream: BitStream | str, key: KeyStream, n: int
) -> list[int]:
    """Decode ``n`` symbols by progressive XOR, one key bit per stream bit."""
    bits = stream.bits if isinstance(stream, BitStream) else stream
    out: list[int] = []
    pos = 0
    for t in range(n):
        plain = ""
        while True:
            if pos >= len(bits) or len(plain) >= code.max_len:
                raise Desync(f"stage {t + 1}: no codeword before position {pos}")
            plain += "1" if bits[pos] != key.next_bits(1) else "0"
            pos += 1
            s = code.symbol_of(plain)
            if s is not None:
                out.append(s)
                key.end_stage()
                break
    return out
