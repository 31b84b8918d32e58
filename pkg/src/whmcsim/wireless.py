"""Lossy wireless links: log-distance path loss, Rayleigh block fading, outage.

Each link carries one packet per control period.  The average channel gain
follows the log-distance model anchored at the free-space gain one meter
from the transmitter,

    g_bar = G * (lambda / 4 pi)^2 * d^(-eta),    lambda = c / f,

and the mean SNR is gamma_bar = P * g_bar / N0 on linear scale.  Rayleigh
block fading scales the instantaneous SNR by a unit-mean exponential power
h, constant within a packet slot.  A packet is delivered exactly when the
instantaneous capacity supports the code rate:

    log2(1 + gamma_bar * h) >= r    <=>    h >= (2^r - 1) / gamma_bar,

with equality delivering.  The closed-form outage probability under the
unit-mean exponential is 1 - exp(-(2^r - 1) / gamma_bar).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class LinkConfig:
    """Radio parameters of one link.  Defaults are the case-study uplink.

    ``min_transmit_power_dbm`` is the radio's floor; configurations below it
    are rejected rather than silently clamped.
    """

    name: str = "link"
    transmit_power_dbm: float = 20.0
    noise_power_dbm: float = -70.0
    carrier_frequency_hz: float = 915e6
    distance_m: float = 50.0
    antenna_gain: float = 4.0
    path_loss_exponent: float = 2.9
    code_rate: float = 2.0
    packet_length_symbols: int = 500
    symbol_rate_hz: float = 50_000.0
    min_transmit_power_dbm: float = 20.0

    def __post_init__(self) -> None:
        positive = {
            "carrier_frequency_hz": self.carrier_frequency_hz,
            "distance_m": self.distance_m,
            "antenna_gain": self.antenna_gain,
            "path_loss_exponent": self.path_loss_exponent,
            "symbol_rate_hz": self.symbol_rate_hz,
        }
        for field_name, value in positive.items():
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{field_name} must be finite and > 0, got {value!r}")
        for field_name in ("transmit_power_dbm", "noise_power_dbm", "min_transmit_power_dbm"):
            value = getattr(self, field_name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValueError(f"{field_name} must be finite, got {value!r}")
        if not (math.isfinite(self.code_rate) and self.code_rate >= 0):
            raise ValueError(f"code_rate must be finite and >= 0, got {self.code_rate!r}")
        if not (isinstance(self.packet_length_symbols, int) and self.packet_length_symbols > 0):
            raise ValueError(
                f"packet_length_symbols must be a positive integer, got {self.packet_length_symbols!r}"
            )
        if self.transmit_power_dbm < self.min_transmit_power_dbm:
            raise ValueError(
                f"transmit_power_dbm {self.transmit_power_dbm} is below the radio floor "
                f"{self.min_transmit_power_dbm} dBm"
            )


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def to_db(linear: float) -> float:
    if linear <= 0:
        raise ValueError(f"cannot convert non-positive value {linear!r} to dB")
    return 10.0 * math.log10(linear)


def average_gain(
    distance_m: float,
    carrier_frequency_hz: float,
    antenna_gain: float,
    path_loss_exponent: float,
) -> float:
    """Linear average channel power gain of the log-distance model."""
    wavelength = SPEED_OF_LIGHT / carrier_frequency_hz
    return antenna_gain * (wavelength / (4.0 * math.pi)) ** 2 * distance_m ** (-path_loss_exponent)


def mean_snr(link: LinkConfig) -> float:
    """Linear mean SNR P * g_bar / N0 for the configured link."""
    gain = average_gain(
        link.distance_m, link.carrier_frequency_hz, link.antenna_gain, link.path_loss_exponent
    )
    return dbm_to_watts(link.transmit_power_dbm) * gain / dbm_to_watts(link.noise_power_dbm)


def snr_threshold(code_rate: float) -> float:
    """Instantaneous-SNR threshold 2^r - 1 that the fade must clear."""
    return 2.0**code_rate - 1.0


def analytic_outage(mean_snr_linear: float, code_rate: float) -> float:
    """Closed-form outage probability 1 - exp(-(2^r - 1) / gamma_bar)."""
    if not (math.isfinite(mean_snr_linear) and mean_snr_linear > 0):
        raise ValueError(f"mean SNR must be finite and > 0, got {mean_snr_linear!r}")
    return -math.expm1(-snr_threshold(code_rate) / mean_snr_linear)


def fading_sample(rng: np.random.Generator) -> float:
    """One unit-mean exponential fading power via the inverse CDF.

    Uses -log1p(-U) on a single uniform draw so the mapping from the
    documented uniform stream to outcomes is explicit and stable.
    """
    return -math.log1p(-rng.random())


def fading_samples(rng: np.random.Generator, count: int) -> np.ndarray:
    """Vectorized counterpart of ``fading_sample`` for statistical checks."""
    return -np.log1p(-rng.random(count))


def is_delivered(mean_snr_linear: float, code_rate: float, fading_power: float) -> bool:
    """Delivery rule: capacity meets the code rate, boundary inclusive."""
    return fading_power * mean_snr_linear >= snr_threshold(code_rate)


@dataclass(frozen=True)
class PacketOutcome:
    """Result of one slot: the fade, the instantaneous SNR, and delivery."""

    slot: int
    fading_power: float
    instantaneous_snr: float
    delivered: bool


def transmit(
    link: LinkConfig,
    rng: np.random.Generator,
    slot: int = 0,
    mean_snr_linear: float | None = None,
) -> PacketOutcome:
    """Draw one slot's fade from ``rng`` and apply the delivery rule.

    ``mean_snr_linear`` lets a caller reuse the precomputed link budget; it
    must equal ``mean_snr(link)`` when given.
    """
    gamma_bar = mean_snr(link) if mean_snr_linear is None else mean_snr_linear
    h = fading_sample(rng)
    return PacketOutcome(
        slot=slot,
        fading_power=h,
        instantaneous_snr=gamma_bar * h,
        delivered=is_delivered(gamma_bar, link.code_rate, h),
    )


class LinkChannel:
    """Per-run channel state: precomputed budget plus a dedicated RNG stream."""

    def __init__(self, link: LinkConfig, rng: np.random.Generator):
        self.link = link
        self.rng = rng
        self.mean_snr_linear = mean_snr(link)
        self.threshold = snr_threshold(link.code_rate)

    def transmit(self, slot: int) -> PacketOutcome:
        h = fading_sample(self.rng)
        snr = self.mean_snr_linear * h
        return PacketOutcome(
            slot=slot,
            fading_power=h,
            instantaneous_snr=snr,
            delivered=snr >= self.threshold,
        )

    def analytic_outage(self) -> float:
        return analytic_outage(self.mean_snr_linear, self.link.code_rate)
