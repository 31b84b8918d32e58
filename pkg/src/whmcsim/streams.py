"""Deterministic random-stream derivation.

Every stochastic consumer (each wireless link, the operator's attention and
timing) owns a named substream derived from the scenario's master seed, so
adding or removing one consumer never shifts the draws seen by another.
The derivation is pinned: the stream key is the first 8 bytes, big endian,
of SHA-256 over the stream name, spawned as SeedSequence((master, key)).
Fading converts uniforms via an explicit inverse CDF, so run results depend
only on this documented pipeline.
"""

from __future__ import annotations

import hashlib

import numpy as np

UPLINK_STREAM = "sensor_uplink"
DOWNLINK_STREAM = "actuator_downlink"
HUMAN_LINK_STREAM = "human_link"
HUMAN_STREAM = "human"

STREAM_NAMES = (UPLINK_STREAM, DOWNLINK_STREAM, HUMAN_LINK_STREAM, HUMAN_STREAM)


def stream_key(name: str) -> int:
    """Stable 64-bit key for a stream name."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_seed(master_seed: int, name: str) -> np.random.SeedSequence:
    """SeedSequence for a named substream of ``master_seed``."""
    return np.random.SeedSequence((master_seed % 2**64, stream_key(name)))


def make_stream(master_seed: int, name: str) -> np.random.Generator:
    """Independent Generator for a named substream."""
    return np.random.default_rng(derive_seed(master_seed, name))
