"""Receiver combining of the direct and relayed copies of a coded symbol.

All three combiners take perfect channel knowledge and return soft values
in the log domain, ready for the turbo decoder. Inputs may be batched over
leading axes (one entry per coded symbol).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cdma import SpreadingSequence, despread

__all__ = [
    "CombinerInput",
    "ModifiedLlrConfig",
    "compute_lc",
    "hypothesis_metrics",
    "llr_combine",
    "modified_llr_combine",
    "mrc_combine",
]


def _chips(seq):
    return seq.chips if isinstance(seq, SpreadingSequence) else np.asarray(seq, dtype=float)


@dataclass
class CombinerInput:
    """Everything the combiner sees for (a batch of) symbol intervals.

    Shapes: ``block`` ``(..., N, N_c)``, channels ``(..., N)``, sequences
    ``(N_c,)`` or broadcastable ``(..., N_c)``.
    """

    block: np.ndarray
    h_user: np.ndarray
    h_partner: np.ndarray
    seq_user: SpreadingSequence
    seq_partner: SpreadingSequence
    sigma_e_sq: float

    def __post_init__(self):
        if not self.sigma_e_sq > 0:
            raise ValueError("sigma_e_sq must be positive")
        self.block = np.asarray(self.block, dtype=complex)
        self.h_user = np.asarray(self.h_user, dtype=complex)
        self.h_partner = np.asarray(self.h_partner, dtype=complex)
        n_ant, n_c = self.block.shape[-2:]
        if self.h_user.shape[-1] != n_ant or self.h_partner.shape[-1] != n_ant:
            raise ValueError("channel vectors must have one entry per antenna")
        if _chips(self.seq_user).shape[-1] != n_c or _chips(self.seq_partner).shape[-1] != n_c:
            raise ValueError("spreading sequences must match the chip dimension")

    def user_signature(self) -> np.ndarray:
        """``h_u s_1`` as an ``(..., N, N_c)`` array."""
        return self.h_user[..., :, None] * _chips(self.seq_user)[..., None, :]

    def partner_signature(self) -> np.ndarray:
        return self.h_partner[..., :, None] * _chips(self.seq_partner)[..., None, :]


@dataclass(frozen=True)
class ModifiedLlrConfig:
    """Assumed partner decision error probability.

    Values above one half describe a partner that is more often wrong than
    right; they are accepted but are not a meaningful operating point.
    """

    pe: float = 0.025

    def __post_init__(self):
        if not 0.0 <= self.pe <= 1.0:
            raise ValueError("pe must lie in [0, 1]")

    @property
    def pc(self) -> float:
        return 1.0 - self.pe


def compute_lc(sigma_w_sq: float, n_interferers: int, n_chips: int) -> float:
    """Decoder scaling ``2 / (sigma_w^2 + N_I / N_c)``."""
    sigma_e_sq = sigma_w_sq + n_interferers / n_chips
    if sigma_e_sq <= 0:
        raise ZeroDivisionError("channel scaling is undefined for a noiseless receiver")
    return 2.0 / sigma_e_sq


def mrc_combine(inp: CombinerInput) -> np.ndarray:
    """Two-dimensional rake: despread per code, weight by conjugate channels.

    Returns the complex combiner output; the decoder uses its real part.
    """
    y1 = despread(inp.block, inp.seq_user)
    y2 = despread(inp.block, inp.seq_partner)
    lc = 2.0 / inp.sigma_e_sq
    return lc * (np.sum(inp.h_user.conj() * y1, axis=-1)
                 + np.sum(inp.h_partner.conj() * y2, axis=-1))


def _sq_norm(x) -> np.ndarray:
    return np.sum(x.real ** 2 + x.imag ** 2, axis=(-2, -1))


def hypothesis_metrics(inp: CombinerInput) -> dict[tuple[int, int], np.ndarray]:
    """Log-likelihoods ``-||r - d h_u s_1 - e h_p s_2||^2 / (2 sigma^2)``.

    Keyed by ``(d, e)``: the user's symbol and the partner's relayed decision.
    """
    a = inp.user_signature()
    b = inp.partner_signature()
    scale = -0.5 / inp.sigma_e_sq
    return {
        (d, e): scale * _sq_norm(inp.block - d * a - e * b)
        for d in (1, -1)
        for e in (1, -1)
    }


def llr_combine(inp: CombinerInput) -> np.ndarray:
    """LLR assuming the partner relayed the correct symbol."""
    signature = inp.user_signature() + inp.partner_signature()
    return (_sq_norm(inp.block + signature) - _sq_norm(inp.block - signature)) / (
        2.0 * inp.sigma_e_sq
    )


def modified_llr_combine(inp: CombinerInput, cfg: ModifiedLlrConfig = ModifiedLlrConfig()):
    """LLR marginalized over a partner decision error of probability ``pe``."""
    if cfg.pe == 0.0:
        return llr_combine(inp)
    m = hypothesis_metrics(inp)
    if cfg.pe == 1.0:
        return m[1, -1] - m[-1, 1]
    log_pc, log_pe = np.log(cfg.pc), np.log(cfg.pe)
    numerator = np.logaddexp(m[1, 1] + log_pc, m[1, -1] + log_pe)
    denominator = np.logaddexp(m[-1, 1] + log_pe, m[-1, -1] + log_pc)
    return numerator - denominator
