"""Direct-sequence spreading, matched filtering and the chip-rate channel.

Chips are real ``+/-1/sqrt(N_c)`` so every sequence has unit norm and a
spread antipodal symbol carries unit energy. AWGN variance is given per
complex chip sample, which makes the despread noise variance equal to it.

Arrays may carry arbitrary leading batch axes; a received block for one
symbol interval has shape ``(N, N_c)`` (antennas by chips).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fading import complex_normal

__all__ = [
    "NoiseModel",
    "SpreadingSequence",
    "apply_channel",
    "despread",
    "ebn0_to_noise_variance",
    "generate_sequence",
    "interference_chips",
    "spread",
]

INTERFERENCE_MODES = ("explicit", "gaussian")


@dataclass(frozen=True)
class SpreadingSequence:
    chips: np.ndarray

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=float).reshape(-1)
        if chips.size == 0:
            raise ValueError("spreading sequence must have at least one chip")
        object.__setattr__(self, "chips", chips)

    def __len__(self) -> int:
        return self.chips.size


def generate_sequence(n_chips: int, rng=None) -> SpreadingSequence:
    """Random binary code with i.i.d. equiprobable chips."""
    if n_chips < 1:
        raise ValueError("n_chips must be >= 1")
    rng = np.random.default_rng(rng)
    signs = 1.0 - 2.0 * rng.integers(0, 2, n_chips)
    return SpreadingSequence(signs / np.sqrt(n_chips))


def _chips(seq) -> np.ndarray:
    return seq.chips if isinstance(seq, SpreadingSequence) else np.asarray(seq)


def spread(symbols, seq) -> np.ndarray:
    """``t = s * d``; vectorized over any shape of symbols (adds a chip axis)."""
    return np.asarray(symbols, dtype=float)[..., None] * _chips(seq)


def despread(block, seq) -> np.ndarray:
    """Matched filter ``y = r s^H`` along the last (chip) axis."""
    block = np.asarray(block)
    chips = _chips(seq)
    if block.shape[-1] != chips.shape[-1]:
        raise ValueError(
            f"block has {block.shape[-1]} chips, sequence has {chips.shape[-1]}"
        )
    if chips.ndim == 1:
        return block @ chips.conj()
    return np.einsum("...c,...c->...", block, chips.conj())


def ebn0_to_noise_variance(eb_n0_db: float, code_rate: float = 0.5) -> float:
    """AWGN variance per chip for unit symbol energy at the given Eb/N0."""
    return 1.0 / (code_rate * 10.0 ** (eb_n0_db / 10.0))


@dataclass(frozen=True)
class NoiseModel:
    """Thermal noise plus multiple-access interference at a receiver.

    ``mode="explicit"`` synthesizes ``n_interferers`` random-code chip streams;
    ``mode="gaussian"`` replaces them by complex Gaussian chips of the same
    despread variance ``n_interferers / spreading_length``.
    """

    awgn_variance: float
    n_interferers: int = 0
    spreading_length: int = 50
    mode: str = "explicit"

    def __post_init__(self):
        if self.awgn_variance < 0:
            raise ValueError("awgn_variance must be non-negative")
        if self.spreading_length < 1:
            raise ValueError("spreading_length must be >= 1")
        if not 0 <= self.n_interferers <= 2 * self.spreading_length:
            raise ValueError(
                f"n_interferers={self.n_interferers} outside 0..{2 * self.spreading_length}"
                " (full load is twice the spreading length)"
            )
        if self.mode not in INTERFERENCE_MODES:
            raise ValueError(f"unknown interference mode {self.mode!r}")

    @property
    def interference_variance(self) -> float:
        return self.n_interferers / self.spreading_length

    @property
    def equivalent_variance(self) -> float:
        """Noise-plus-interference variance seen after despreading."""
        return self.awgn_variance + self.interference_variance


def interference_chips(noise: NoiseModel, shape, rng, chunk: int = 256) -> np.ndarray:
    """Multiple-access interference of shape ``shape + (N_c,)``.

    ``shape`` is ``(n_symbols, n_antennas)``. In explicit mode every
    interferer has a unit-modulus random-phase gain per antenna, fixed over
    the call, and sends fresh random chips each symbol (long codes).
    """
    n_symbols, n_antennas = shape
    n_c = noise.spreading_length
    out_shape = (n_symbols, n_antennas, n_c)
    if noise.n_interferers == 0:
        return np.zeros(out_shape, dtype=complex)
    if noise.mode == "gaussian":
        return complex_normal(rng, out_shape, noise.interference_variance)

    n_i = noise.n_interferers
    gains = np.exp(2j * np.pi * rng.random((n_antennas, n_i)))
    g = np.vstack([gains.real, gains.imag]).astype(np.float32)
    g_sum = g.sum(axis=1, keepdims=True)
    scale = 1.0 / np.sqrt(n_c)
    out = np.empty(out_shape, dtype=complex)
    for start in range(0, n_symbols, chunk):
        stop = min(start + chunk, n_symbols)
        m = (stop - start) * n_c
        raw = np.frombuffer(rng.bytes(-(-n_i * m // 8)), dtype=np.uint8)
        bits = np.unpackbits(raw, count=n_i * m).reshape(n_i, m).astype(np.float32)
        # chips are (1 - 2 * bit) / sqrt(N_c)
        mixed = (g_sum - 2.0 * (g @ bits)) * scale
        block = mixed[:n_antennas] + 1j * mixed[n_antennas:]
        out[start:stop] = block.reshape(n_antennas, stop - start, n_c).transpose(1, 0, 2)
    return out


def apply_channel(chips, h, noise: NoiseModel, rng=None, interference=None,
                  partner=None) -> np.ndarray:
    """Received chip block ``r = h t (+ h_p t_p) + I + W``.

    Parameters
    ----------
    chips : array_like, shape (..., N_c)
        Transmitted chips per symbol interval.
    h : array_like, shape (..., N)
        Channel coefficients per receive antenna.
    noise : NoiseModel
    interference : array_like, optional
        Pre-generated interference, shape ``(..., N, N_c)``; drawn from
        ``noise`` when omitted.
    partner : tuple (h_p, chips_p), optional
        A second path summed at the receiver.

    Returns
    -------
    ndarray, shape (..., N, N_c)
    """
    rng = np.random.default_rng(rng)
    chips = np.asarray(chips)
    h = np.asarray(h, dtype=complex)
    r = h[..., :, None] * chips[..., None, :]
    if partner is not None:
        h_p, chips_p = partner
        r = r + np.asarray(h_p, dtype=complex)[..., :, None] * np.asarray(chips_p)[..., None, :]

    batch = r.shape[:-2]
    n_symbols = int(np.prod(batch)) if batch else 1
    if interference is None:
        interference = interference_chips(noise, (n_symbols, r.shape[-2]), rng)
    r = r + np.asarray(interference).reshape(r.shape)
    if noise.awgn_variance > 0:
        r = r + complex_normal(rng, r.shape, noise.awgn_variance)
    return r
