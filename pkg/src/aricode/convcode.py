"""Feedforward convolutional encoding and soft Viterbi decoding.

Rate 1/n codes given by octal tap masks, MSB = current input.  The default
code is (5, 7) octal with constraint length 3.  The decoder is a terminated
(zero-tail) maximum-metric sequence detector with a pluggable per-symbol
branch metric: plain negated Euclidean distance, or the exact
interference-aware metric from :mod:`aricode.channel`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._accel import njit, use_numba
from .channel import ChannelParams, symbol_log_likelihood


class MetricKind(enum.Enum):
    AWGN_ONLY = "awgn"
    AWGN_ARI = "awgn-ari"


@dataclass(frozen=True)
class ConvCode:
    """Tap masks as octal-style integers plus the constraint length."""

    generators: tuple[int, ...] = (0o5, 0o7)
    constraint_length: int = 3

    def __post_init__(self):
        if self.constraint_length < 1:
            raise ValueError("constraint_length must be >= 1")
        if not self.generators:
            raise ValueError("need at least one generator")
        for g in self.generators:
            if g == 0:
                raise ValueError("tap masks must be nonzero")
            if g >= (1 << self.constraint_length):
                raise ValueError(f"tap mask {g:o} exceeds constraint length {self.constraint_length}")

    @property
    def n_out(self) -> int:
        return len(self.generators)

    @property
    def rate(self) -> float:
        return 1.0 / self.n_out

    @property
    def n_states(self) -> int:
        return 1 << (self.constraint_length - 1)


@lru_cache(maxsize=16)
def _trellis(code: ConvCode):
    """Predecessor-form trellis: incoming states/bits/output bits per state.

    Incoming edges are sorted by predecessor state so that a strict metric
    comparison breaks ties toward the smaller state index.
    """
    k = code.constraint_length
    n_states = code.n_states
    n_out = code.n_out
    next_state = np.empty((n_states, 2), dtype=np.int64)
    out_bits = np.empty((n_states, 2, n_out), dtype=np.uint8)
    for s in range(n_states):
        for b in (0, 1):
            window = (b << (k - 1)) | s
            next_state[s, b] = window >> 1
            for j, g in enumerate(code.generators):
                out_bits[s, b, j] = bin(window & g).count("1") & 1

    in_state = np.empty((n_states, 2), dtype=np.int64)
    in_bit = np.empty((n_states, 2), dtype=np.uint8)
    in_out = np.empty((n_states, 2, n_out), dtype=np.uint8)
    for ns in range(n_states):
        preds = sorted((s, b) for s in range(n_states) for b in (0, 1) if next_state[s, b] == ns)
        assert len(preds) == 2
        for j, (s, b) in enumerate(preds):
            in_state[ns, j] = s
            in_bit[ns, j] = b
            in_out[ns, j] = out_bits[s, b]
    return in_state, in_bit, in_out


def conv_encode(message, code: ConvCode = ConvCode()) -> np.ndarray:
    """Encode with zero-tail termination.

    Output length is n_out * (len(message) + constraint_length - 1), emitted
    per step in generator order.
    """
    msg = np.asarray(message, dtype=np.uint8)
    if msg.size == 0:
        raise ValueError("message must be nonempty")
    if not np.all((msg == 0) | (msg == 1)):
        raise ValueError("message must be 0/1 bits")
    k = code.constraint_length
    n_steps = msg.size + k - 1
    out = np.empty((n_steps, code.n_out), dtype=np.uint8)
    for j, g in enumerate(code.generators):
        taps = np.array([(g >> (k - 1 - d)) & 1 for d in range(k)], dtype=np.uint8)
        out[:, j] = np.convolve(msg, taps) & 1
    return out.reshape(-1)


def branch_symbol_metrics(y, params: ChannelParams, metric: MetricKind) -> np.ndarray:
    """Per-symbol metric table, column 0 for symbol +1 (bit 0), column 1 for -1."""
    y = np.asarray(y, dtype=np.complex128)
    table = np.empty((y.size, 2))
    if metric is MetricKind.AWGN_ARI:
        table[:, 0] = symbol_log_likelihood(y, 1.0, params)
        table[:, 1] = symbol_log_likelihood(y, -1.0, params)
    elif metric is MetricKind.AWGN_ONLY:
        sqrt_s = math.sqrt(params.snr)
        dm = y - sqrt_s
        dp = y + sqrt_s
        table[:, 0] = -(dm.real**2 + dm.imag**2)
        table[:, 1] = -(dp.real**2 + dp.imag**2)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return table


def _viterbi_impl(per_sym, in_state, in_bit, in_out, n_steps, n_msg):
    n_states = in_state.shape[0]
    n_out = in_out.shape[2]
    pm = np.full(n_states, -np.inf)
    pm[0] = 0.0
    new_pm = np.empty(n_states)
    prev_state = np.empty((n_steps, n_states), dtype=np.int32)
    prev_bit = np.empty((n_steps, n_states), dtype=np.uint8)
    for t in range(n_steps):
        base = t * n_out
        for ns in range(n_states):
            best = -np.inf
            best_s = 0
            best_b = np.uint8(0)
            for j in range(2):
                b = in_bit[ns, j]
                if t >= n_msg and b == 1:
                    continue
                cand = pm[in_state[ns, j]]
                for o in range(n_out):
                    cand = cand + per_sym[base + o, in_out[ns, j, o]]
                if cand > best:
                    best = cand
                    best_s = in_state[ns, j]
                    best_b = b
            new_pm[ns] = best
            prev_state[t, ns] = best_s
            prev_bit[t, ns] = best_b
        pm[:] = new_pm
    bits = np.empty(n_steps, dtype=np.uint8)
    cur = 0
    for t in range(n_steps - 1, -1, -1):
        bits[t] = prev_bit[t, cur]
        cur = prev_state[t, cur]
    return bits[:n_msg]


_viterbi_nb = njit(cache=True)(_viterbi_impl)


def _viterbi_np(per_sym, in_state, in_bit, in_out, n_steps, n_msg):
    n_states = in_state.shape[0]
    n_out = in_out.shape[2]
    pm = np.full(n_states, -np.inf)
    pm[0] = 0.0
    prev_state = np.empty((n_steps, n_states), dtype=np.int32)
    prev_bit = np.empty((n_steps, n_states), dtype=np.uint8)
    idx = np.arange(n_states)
    term_block = np.where(in_bit == 1, -np.inf, 0.0)
    for t in range(n_steps):
        bm = np.zeros((n_states, 2))
        base = t * n_out
        for o in range(n_out):
            bm += per_sym[base + o][in_out[:, :, o]]
        cand = pm[in_state] + bm
        if t >= n_msg:
            cand = cand + term_block
        j = (cand[:, 1] > cand[:, 0]).astype(np.int64)
        pm = cand[idx, j]
        prev_state[t] = in_state[idx, j]
        prev_bit[t] = in_bit[idx, j]
    bits = np.empty(n_steps, dtype=np.uint8)
    cur = 0
    for t in range(n_steps - 1, -1, -1):
        bits[t] = prev_bit[t, cur]
        cur = prev_state[t, cur]
    return bits[:n_msg]


def _decode_from_symbol_metrics(per_sym: np.ndarray, code: ConvCode, n_msg: int) -> np.ndarray:
    in_state, in_bit, in_out = _trellis(code)
    n_steps = per_sym.shape[0] // code.n_out
    if use_numba():
        return _viterbi_nb(per_sym, in_state, in_bit, in_out, n_steps, n_msg)
    return _viterbi_np(per_sym, in_state, in_bit, in_out, n_steps, n_msg)


def viterbi_decode(y, code: ConvCode, params: ChannelParams,
                   metric: MetricKind = MetricKind.AWGN_ARI) -> np.ndarray:
    """Maximum-metric decoding of a terminated block; returns the message bits."""
    y = np.asarray(y, dtype=np.complex128)
    if y.size % code.n_out:
        raise ValueError(f"received length {y.size} not divisible by {code.n_out}")
    n_steps = y.size // code.n_out
    n_msg = n_steps - (code.constraint_length - 1)
    if n_msg < 1:
        raise ValueError("block too short for a terminated trellis")
    per_sym = branch_symbol_metrics(y, params, metric)
    return _decode_from_symbol_metrics(per_sym, code, n_msg)
