"""Uncoded symbol-by-symbol detectors used as reference curves.

ML thresholds the exact bit LLR, TIN ignores the interference structure
(Euclidean decision, i.e. the sign of the real part for BPSK), and IC
decides by distance to the interference circle of radius sqrt(I) centred
on each hypothesis.  Ties always resolve to +1.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy.special import erfc

from .channel import ChannelParams, bit_llr


class DetectorKind(enum.Enum):
    ML = "ml"
    TIN = "tin"
    IC = "ic"


def detect_sequence(y, params: ChannelParams, kind: DetectorKind) -> np.ndarray:
    """Vectorised detection; returns an array of +/-1 symbol decisions."""
    y = np.atleast_1d(np.asarray(y, dtype=np.complex128))
    if kind is DetectorKind.ML:
        llr = np.atleast_1d(bit_llr(y, params))
        return np.where(llr <= 0.0, 1.0, -1.0)
    if kind is DetectorKind.TIN:
        return np.where(y.real >= 0.0, 1.0, -1.0)
    if kind is DetectorKind.IC:
        sqrt_s = math.sqrt(params.snr)
        sqrt_i = math.sqrt(params.inr)
        dp = (np.abs(y - sqrt_s) - sqrt_i) ** 2
        dm = (np.abs(y + sqrt_s) - sqrt_i) ** 2
        return np.where(dp <= dm, 1.0, -1.0)
    raise ValueError(f"unknown detector kind {kind!r}")


def detect(y, params: ChannelParams, kind: DetectorKind) -> int:
    """Decide one symbol; returns +1 or -1."""
    return int(detect_sequence(np.asarray([y]), params, kind)[0])


def ml_ber_closed_form_awgn(snr: float) -> float:
    """Closed-form BPSK error rate Q(sqrt(2*S)) for the interference-free channel.

    Valid for unit-power complex noise (variance 1/2 per component); serves
    as the analytic oracle for simulated ML curves at I = 0.
    """
    if snr < 0:
        raise ValueError("snr must be >= 0")
    return 0.5 * erfc(math.sqrt(snr))
