"""Rate-1/2 punctured parallel-concatenated turbo code.

Two identical 4-state recursive systematic convolutional (RSC) encoders,
feedback 7 and feedforward 5 (octal), are joined by a random interleaver.
The systematic stream is always sent; the two parity streams alternate,
encoder 1 on even symbol indices and encoder 2 on odd ones.

Encoder 1 is terminated with ``memory`` tail steps; encoder 2 is left
open. The tail is carried separately from the rate-1/2 payload and is
excluded from the rate and BER bookkeeping.

LLR convention: ``L = log P(bit=0) / P(bit=1)``, so a positive LLR means
symbol ``+1`` and bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._trellis import log_map

__all__ = [
    "LLR_CLIP",
    "CodedFrame",
    "Interleaver",
    "RscSpec",
    "SoftFrame",
    "bits_to_symbols",
    "rsc_encode",
    "siso_decode",
    "turbo_decode",
    "turbo_encode",
]

LLR_CLIP = 50.0


def bits_to_symbols(bits) -> np.ndarray:
    """Map bits ``{0, 1}`` to antipodal symbols ``{+1, -1}``."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


@dataclass(frozen=True)
class RscSpec:
    """Tap masks of a recursive systematic convolutional encoder.

    Masks are read with the most significant of the ``memory + 1`` bits as
    the ``D^0`` tap, so octal 7 is ``1 + D + D^2`` and 5 is ``1 + D^2``.
    """

    feedback_taps: int = 0b111
    feedforward_taps: int = 0b101
    memory: int = 2

    def __post_init__(self):
        top = 1 << self.memory
        for name in ("feedback_taps", "feedforward_taps"):
            taps = getattr(self, name)
            if not 0 < taps < 2 * top or not taps & top:
                raise ValueError(f"{name}={taps:#o} must include the D^0 tap")

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def _tap(self, mask: int, delay: int) -> int:
        return (mask >> (self.memory - delay)) & 1

    def _register_step(self, register: list[int], bit: int) -> tuple[int, int]:
        """One shift-register clock; returns (feedback node value, parity bit)."""
        fb = bit
        for d in range(1, self.memory + 1):
            fb ^= self._tap(self.feedback_taps, d) & register[d - 1]
        parity = self._tap(self.feedforward_taps, 0) & fb
        for d in range(1, self.memory + 1):
            parity ^= self._tap(self.feedforward_taps, d) & register[d - 1]
        register.insert(0, fb)
        register.pop()
        return fb, parity

    def _termination_bit(self, register: list[int]) -> int:
        # the input that drives the feedback node to zero
        bit = 0
        for d in range(1, self.memory + 1):
            bit ^= self._tap(self.feedback_taps, d) & register[d - 1]
        return bit

    @cached_property
    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        """``(next_state, parity)`` lookup tables, each of shape ``(S, 2)``.

        State ``s`` packs the register with the most recent value as MSB.
        """
        S, m = self.n_states, self.memory
        next_state = np.zeros((S, 2), dtype=np.int64)
        parity = np.zeros((S, 2), dtype=np.int64)
        for s in range(S):
            for u in range(2):
                register = [(s >> (m - 1 - i)) & 1 for i in range(m)]
                _, p = self._register_step(register, u)
                next_state[s, u] = sum(b << (m - 1 - i) for i, b in enumerate(register))
                parity[s, u] = p
        return next_state, parity


def rsc_encode(bits, spec: RscSpec = RscSpec(), terminate: bool = False):
    """Encode with one RSC encoder from the all-zero state.

    Returns ``(systematic, parity)`` as uint8 arrays. With ``terminate``
    both arrays are extended by ``spec.memory`` tail bits that return the
    encoder to the zero state.
    """
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    register = [0] * spec.memory
    systematic = list(bits)
    parity = [spec._register_step(register, int(b))[1] for b in bits]
    if terminate:
        for _ in range(spec.memory):
            bit = spec._termination_bit(register)
            systematic.append(bit)
            parity.append(spec._register_step(register, bit)[1])
    return np.array(systematic, dtype=np.uint8), np.array(parity, dtype=np.uint8)


@dataclass(frozen=True)
class Interleaver:
    """Seeded uniform random permutation: ``interleave(x) = x[permutation]``."""

    permutation: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValueError("permutation must be a bijection on 0..K-1")
        object.__setattr__(self, "permutation", perm)

    @classmethod
    def random(cls, size: int, seed=None) -> "Interleaver":
        return cls(np.random.default_rng(seed).permutation(size), seed)

    def __len__(self) -> int:
        return self.permutation.size

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.permutation)
        inv[self.permutation] = np.arange(self.permutation.size)
        return inv

    def interleave(self, x):
        return np.asarray(x)[..., self.permutation]

    def deinterleave(self, x):
        return np.asarray(x)[..., self.inverse]


@dataclass
class CodedFrame:
    """Info bits and their rate-1/2 codeword.

    ``coded_bits`` holds ``2K`` bits as consecutive pairs
    ``(systematic_k, parity_k)``. ``tail_bits`` holds the ``2 * memory``
    termination bits of encoder 1 in the same pair layout.
    """

    info_bits: np.ndarray
    coded_bits: np.ndarray
    tail_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))

    @property
    def transmitted_bits(self) -> np.ndarray:
        return np.concatenate([self.coded_bits, self.tail_bits])


@dataclass
class SoftFrame:
    """Channel LLRs aligned with :class:`CodedFrame` (tail optional)."""

    llrs: np.ndarray
    tail_llrs: np.ndarray | None = None

    @classmethod
    def from_transmitted(cls, llrs, n_info: int) -> "SoftFrame":
        """Split a payload+tail LLR stream as laid out by ``transmitted_bits``."""
        llrs = np.asarray(llrs, dtype=float)
        return cls(llrs[: 2 * n_info], llrs[2 * n_info :])


def _puncture_masks(n_info: int) -> np.ndarray:
    return np.arange(n_info) % 2 == 0


def turbo_encode(info_bits, interleaver: Interleaver, spec: RscSpec = RscSpec()) -> CodedFrame:
    """Encode ``K`` info bits into ``2K`` coded bits plus the encoder-1 tail."""
    info = np.asarray(info_bits, dtype=np.uint8).reshape(-1)
    if info.size != len(interleaver):
        raise ValueError(
            f"frame length {info.size} does not match interleaver size {len(interleaver)}"
        )
    K = info.size
    sys1, par1 = rsc_encode(info, spec, terminate=True)
    _, par2 = rsc_encode(interleaver.interleave(info), spec)

    parity = np.where(_puncture_masks(K), par1[:K], par2)
    coded = np.empty(2 * K, dtype=np.uint8)
    coded[0::2] = info
    coded[1::2] = parity

    tail = np.empty(2 * spec.memory, dtype=np.uint8)
    tail[0::2] = sys1[K:]
    tail[1::2] = par1[K:]
    return CodedFrame(info, coded, tail)


def siso_decode(channel_llrs, a_priori_llrs, spec: RscSpec = RscSpec(),
                terminated: bool = False, max_log: bool = False):
    """Soft-in soft-out decoding of one RSC constituent code.

    Parameters
    ----------
    channel_llrs : array_like, shape (T, 2)
        Systematic and parity channel LLRs per trellis step; punctured
        positions carry 0.
    a_priori_llrs : array_like, shape (T,)
        Prior information on the input bits.
    terminated : bool
        Whether the trellis is known to end in the zero state.
    max_log : bool
        Use the max-log approximation instead of exact log-MAP.

    Returns
    -------
    extrinsic, posterior : ndarray, shape (T,)
        ``extrinsic = posterior - a_priori - systematic``.
    """
    ch = np.asarray(channel_llrs, dtype=float)
    la = np.asarray(a_priori_llrs, dtype=float)
    if ch.ndim != 2 or ch.shape[1] != 2 or la.shape != (ch.shape[0],):
        raise ValueError("channel_llrs must be (T, 2) and a_priori_llrs (T,)")
    if not (np.all(np.isfinite(ch)) and np.all(np.isfinite(la))):
        raise ValueError("LLRs must be finite")
    next_state, parity = spec.tables
    sys_llr = np.ascontiguousarray(ch[:, 0])
    posterior = log_map(sys_llr, np.ascontiguousarray(ch[:, 1]), np.ascontiguousarray(la),
                        next_state, parity, terminated, max_log)
    return posterior - la - sys_llr, posterior


def turbo_decode(soft: SoftFrame, interleaver: Interleaver, spec: RscSpec = RscSpec(),
                 iterations: int = 8, max_log: bool = False, return_llrs: bool = False):
    """Iterative decoding; returns hard info bits (and optionally final LLRs).

    A missing tail is treated as erased (zero LLRs).
    """
    K = len(interleaver)
    llrs = np.clip(np.asarray(soft.llrs, dtype=float), -LLR_CLIP, LLR_CLIP)
    if llrs.size != 2 * K:
        raise ValueError(f"expected {2 * K} LLRs, got {llrs.size}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    m = spec.memory
    tail = np.zeros(2 * m) if soft.tail_llrs is None or len(soft.tail_llrs) == 0 \
        else np.clip(np.asarray(soft.tail_llrs, dtype=float), -LLR_CLIP, LLR_CLIP)
    if tail.size != 2 * m:
        raise ValueError(f"expected {2 * m} tail LLRs, got {tail.size}")

    sys_llr = llrs[0::2]
    par_llr = llrs[1::2]
    even = _puncture_masks(K)

    ch1 = np.zeros((K + m, 2))
    ch1[:K, 0] = sys_llr
    ch1[:K, 1] = np.where(even, par_llr, 0.0)
    ch1[K:, 0] = tail[0::2]
    ch1[K:, 1] = tail[1::2]

    ch2 = np.zeros((K, 2))
    ch2[:, 0] = interleaver.interleave(sys_llr)
    ch2[:, 1] = np.where(even, 0.0, par_llr)

    apriori1 = np.zeros(K + m)
    for _ in range(iterations):
        ext1, _ = siso_decode(ch1, apriori1, spec, terminated=True, max_log=max_log)
        apriori2 = interleaver.interleave(ext1[:K])
        ext2, post2 = siso_decode(ch2, apriori2, spec, terminated=False, max_log=max_log)
        apriori1[:K] = interleaver.deinterleave(ext2)

    final = interleaver.deinterleave(post2)
    bits = (final < 0).astype(np.uint8)
    if return_llrs:
        return bits, final
    return bits
