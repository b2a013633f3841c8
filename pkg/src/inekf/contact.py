"""
Contact event sources: logged flags, or thresholded ground-reaction force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .measurements import ContactEvent, GrfSample


@dataclass(frozen=True)
class ThresholdConfig:
    """
    GRF contact detector settings.

    A rising edge needs the filtered force above ``on_threshold`` for
    ``min_dwell`` seconds, a falling edge below ``off_threshold`` for the same.
    """

    cutoff_hz: float
    on_threshold: float
    off_threshold: float
    min_dwell: float = 0.01

    def __post_init__(self):
        if not self.cutoff_hz > 0.0:
            raise ValueError("cutoff_hz must be positive")
        if self.off_threshold > self.on_threshold:
            raise ValueError("off_threshold must not exceed on_threshold")
        if self.min_dwell < 0.0:
            raise ValueError("min_dwell must be non-negative")

    @classmethod
    def from_weight(cls, weight, n_legs, cutoff_hz=10.0, min_dwell=0.01):
        """Thresholds at 60 % / 40 % of the per-leg share of the robot weight (N)."""
        share = weight / n_legs
        return cls(cutoff_hz, 0.6 * share, 0.4 * share, min_dwell)


class LowPass:
    """
    First-order low-pass filter with unit DC gain, one state per leg.

    The continuous filter ``tau y' = x - y`` with ``tau = 1 / (2 pi f_c)`` is
    discretized exactly assuming the input is held between samples, so
    irregular sampling is handled.
    """

    def __init__(self, cutoff_hz, initial=0.0):
        if not cutoff_hz > 0.0:
            raise ValueError("cutoff_hz must be positive")
        self.tau = 1.0 / (2.0 * math.pi * cutoff_hz)
        self.initial = initial
        self._state = {}

    def __call__(self, sample):
        prev = self._state.get(sample.leg_id)
        if prev is None:
            y = self.initial
        else:
            t_prev, y_prev, x_prev = prev
            a = math.exp(-(sample.stamp - t_prev) / self.tau)
            y = a * y_prev + (1.0 - a) * x_prev
        self._state[sample.leg_id] = (sample.stamp, y, sample.grf_normal)
        return GrfSample(sample.stamp, sample.leg_id, y)


def lowpass(samples, cutoff_hz, initial=0.0):
    """Filter a time-ordered stream of :class:`GrfSample`; yields filtered samples."""
    f = LowPass(cutoff_hz, initial)
    for s in samples:
        yield f(s)


class ThresholdDetector:
    """Hysteresis-and-dwell contact detector over filtered GRF samples."""

    def __init__(self, cfg):
        self.cfg = cfg
        self._filter = LowPass(cfg.cutoff_hz)
        self._contact = {}
        self._pending = {}

    def __call__(self, sample):
        """Feed one raw sample; return a :class:`ContactEvent` on an edge, else ``None``."""
        leg = sample.leg_id
        y = self._filter(sample).grf_normal
        in_contact = self._contact.get(leg, False)
        crossing = y < self.cfg.off_threshold if in_contact else y > self.cfg.on_threshold
        if not crossing:
            self._pending.pop(leg, None)
            return None
        since = self._pending.setdefault(leg, sample.stamp)
        if sample.stamp - since + 1e-12 < self.cfg.min_dwell:
            return None
        self._pending.pop(leg, None)
        self._contact[leg] = not in_contact
        return ContactEvent(sample.stamp, leg, not in_contact)


def detect(samples, cfg):
    """
    Contact events from raw GRF samples.

    Events alternate contact / release per leg, starting from "no contact".
    """
    det = ThresholdDetector(cfg)
    for s in samples:
        ev = det(s)
        if ev is not None:
            yield ev


def flags_to_events(flags):
    """
    Pass logged per-leg contact flags through, keeping only changes.

    ``flags`` is an iterable of :class:`ContactEvent` records that may repeat
    the current state; the first flag of each leg is always emitted.
    """
    current = {}
    for ev in flags:
        flag = bool(ev.in_contact)
        if current.get(ev.leg_id) != flag:
            current[ev.leg_id] = flag
            yield ev
