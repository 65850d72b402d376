"""Zero-delay and causal secure source coding: schemes, exact oracles and a CLI."""

from .codes import InstantaneousCode, build_huffman, huffman_length
from .keystream import KeyStream, PrivateRandomness
from .source_models import JointSourceModel, SourceModel, conditional_entropy, entropy

__version__ = "0.1.0"

__all__ = [
    "InstantaneousCode",
    "JointSourceModel",
    "KeyStream",
    "PrivateRandomness",
    "SourceModel",
    "build_huffman",
    "conditional_entropy",
    "entropy",
    "huffman_length",
]
