"""The cooperating partner: selection, hard detection and relaying.

The partner only detects coded symbols and re-spreads them with its own
code; it never runs the turbo decoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .cdma import NoiseModel, apply_channel, despread, spread
from .fading import RiceanLink

__all__ = [
    "PartnerCandidate",
    "PartnerLinkState",
    "SelectionConfig",
    "draw_candidates",
    "measure_partner_pe",
    "partner_detect",
    "relay_symbol",
    "select_partner",
]


@dataclass(frozen=True)
class PartnerCandidate:
    id: int
    k_factor_db: float

    def __post_init__(self):
        if not np.isfinite(self.k_factor_db):
            raise ValueError("k_factor_db must be finite")


@dataclass(frozen=True)
class SelectionConfig:
    """Size of the partner selection set and its K-factor statistics.

    ``set_size=None`` means no limit; the set then holds every other active
    terminal. K-factors in dB are normal with the given mean and variance.
    """

    set_size: int | None = 10
    k_factor_mean_db: float = 6.0
    k_factor_variance_db: float = 5.0

    def __post_init__(self):
        if self.set_size is not None and self.set_size < 1:
            raise ValueError("set_size must be >= 1 or None (unlimited)")
        if self.k_factor_variance_db < 0:
            raise ValueError("k_factor_variance_db must be non-negative")

    def candidate_count(self, population: int) -> int:
        """Number of candidates given how many other terminals are active."""
        if self.set_size is None:
            return max(1, population)
        return self.set_size


@dataclass
class PartnerLinkState:
    """User-to-partner link and the partner's front-end noise."""

    link: RiceanLink
    noise: NoiseModel


def draw_candidates(cfg: SelectionConfig, rng, population: int = 0) -> list[PartnerCandidate]:
    rng = np.random.default_rng(rng)
    n = cfg.candidate_count(population)
    k_db = rng.normal(cfg.k_factor_mean_db, np.sqrt(cfg.k_factor_variance_db), n)
    return [PartnerCandidate(i, float(k)) for i, k in enumerate(k_db)]


def select_partner(candidates) -> PartnerCandidate:
    """Candidate with the strongest LoS component (largest K-factor).

    Ties go to the lowest id.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("partner selection set is empty")
    return min(candidates, key=lambda c: (-c.k_factor_db, c.id))


def partner_detect(received, h_in, seq) -> np.ndarray:
    """Coherent hard decision ``sign(Re(h_in^* r s^H))``; ties give +1.

    ``received`` is ``(..., N_c)`` or ``(..., 1, N_c)`` with ``h_in`` of
    matching batch shape.
    """
    y = despread(received, seq)
    h_in = np.asarray(h_in)
    if y.ndim > h_in.ndim:
        y = y[..., 0]
    stat = np.real(np.conj(h_in) * y)
    return np.where(stat < 0, -1.0, 1.0)


def relay_symbol(d_hat, seq_partner) -> np.ndarray:
    """Re-spread the partner's decisions with its own code."""
    return spread(d_hat, seq_partner)


def measure_partner_pe(state: PartnerLinkState, seq, n_symbols: int, rng=None):
    """Empirical partner symbol error rate over ``n_symbols`` random symbols.

    Returns ``(pe, (ci_low, ci_high))`` with a 95% Wilson interval.
    """
    if n_symbols < 1000:
        raise ValueError("n_symbols must be >= 1000")
    rng = np.random.default_rng(rng)
    d = 1.0 - 2.0 * rng.integers(0, 2, n_symbols)
    h = state.link.run(n_symbols)
    r = apply_channel(spread(d, seq), h[:, None], state.noise, rng)
    d_hat = partner_detect(r, h, seq)
    errors = int(np.sum(d_hat != d))
    ci = binomtest(errors, n_symbols).proportion_ci(0.95, method="wilson")
    return errors / n_symbols, (ci.low, ci.high)
