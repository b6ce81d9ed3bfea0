"""Time-varying flat-fading channel coefficients.

Jakes-correlated Rayleigh processes are approximated by a low order
autoregressive (AR) recursion fitted with the Yule-Walker equations.
Ricean links add a constant line-of-sight term on top of a scaled
Rayleigh process.

Throughout, the variance of a complex Gaussian variable ``v`` means
``E[|v|^2]`` (half of it per real dimension).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.signal import lfilter, lfiltic
from scipy.special import j0

__all__ = [
    "ArModel",
    "DegenerateModelError",
    "FadingProcess",
    "RiceanLink",
    "complex_normal",
    "fit_ar",
    "jakes_autocorrelation",
    "make_ricean",
]

K_FACTOR_CAP_DB = 100.0


class DegenerateModelError(ValueError):
    """Raised when the Yule-Walker system has no unique solution."""


def complex_normal(rng: np.random.Generator, size, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with ``E|x|^2 = variance``."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    # interleaved re/im draws keep sample streams identical however they are chunked
    pairs = rng.standard_normal(shape + (2,))
    return np.sqrt(variance / 2.0) * (pairs[..., 0] + 1j * pairs[..., 1])


def jakes_autocorrelation(fdt, lag):
    """Normalized Jakes autocorrelation ``J0(2*pi*fdt*lag)``.

    Works elementwise on arrays as well as on scalars.
    """
    return j0(2.0 * np.pi * np.asarray(fdt, dtype=float) * np.asarray(lag, dtype=float))


@dataclass(frozen=True)
class ArModel:
    """AR(L) approximation of a unit-power Jakes fading process.

    Attributes
    ----------
    order : int
        Model order ``L``.
    coefficients : ndarray, shape (L,)
        Recursion weights ``alpha_1 .. alpha_L``.
    noise_variance : float
        Variance of the complex driving noise.
    normalized_doppler : float
        Doppler rate times symbol duration, ``f_D T``.
    """

    order: int
    coefficients: np.ndarray
    noise_variance: float
    normalized_doppler: float

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if self.order < 1 or coefficients.size != self.order:
            raise ValueError(
                f"order {self.order} does not match {coefficients.size} coefficients"
            )
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def correlation(self) -> np.ndarray:
        """Target autocorrelation at lags ``0 .. L``."""
        return jakes_autocorrelation(self.normalized_doppler, np.arange(self.order + 1))


def fit_ar(fdt: float, order: int = 1) -> ArModel:
    """Fit AR coefficients to the Jakes autocorrelation.

    Solves the ``L x L`` Toeplitz (Yule-Walker) system and sets the driving
    noise variance so the process has unit power.

    Raises
    ------
    DegenerateModelError
        If the Toeplitz matrix is singular, which happens for a static
        channel (``fdt = 0``) at ``order > 1``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if not np.isfinite(fdt) or fdt < 0:
        raise ValueError("fdt must be finite and non-negative")

    r = jakes_autocorrelation(fdt, np.arange(order + 1))
    if order == 1:
        alpha = r[1:2].copy()
    else:
        toeplitz = scipy.linalg.toeplitz(r[:order])
        if np.linalg.cond(toeplitz) > 1e14:
            raise DegenerateModelError(
                f"Yule-Walker system is singular at fdt={fdt}, order={order}"
            )
        try:
            alpha = scipy.linalg.solve_toeplitz(r[:order], r[1:])
        except np.linalg.LinAlgError as exc:
            raise DegenerateModelError(str(exc)) from exc

    noise_variance = max(0.0, 1.0 - float(alpha @ r[1:]))
    return ArModel(order, alpha, noise_variance, float(fdt))


def _fit_with_fallback(fdt: float, order: int) -> ArModel:
    try:
        return fit_ar(fdt, order)
    except DegenerateModelError:
        return fit_ar(fdt, 1)


@dataclass
class FadingProcess:
    """Sequential generator of AR-driven complex fading coefficients.

    Each of the ``dimension`` components evolves independently with the
    same AR model. The state holds the last ``L`` samples, most recent
    first, and is initialized from the stationary distribution.

    Not thread-safe: one process per trial.
    """

    model: ArModel
    dimension: int = 1
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    state: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.state is None:
            self.state = self._stationary_draw()
        else:
            self.state = np.array(self.state, dtype=complex).reshape(
                self.model.order, self.dimension
            )

    @classmethod
    def from_doppler(cls, fdt: float, dimension: int = 1, rng=None, order: int = 1):
        """Build a process for ``fdt``, falling back to order 1 if degenerate."""
        rng = np.random.default_rng(rng)
        return cls(_fit_with_fallback(fdt, order), dimension, rng)

    def _stationary_draw(self) -> np.ndarray:
        L = self.model.order
        white = complex_normal(self.rng, (L, self.dimension))
        if L == 1:
            return white
        toeplitz = scipy.linalg.toeplitz(self.model.correlation[:L])
        # state row 0 is the newest sample; the joint law is symmetric in time
        chol = np.linalg.cholesky(toeplitz + 1e-12 * np.eye(L))
        return chol @ white

    def step(self) -> np.ndarray:
        """Advance one symbol and return the new coefficient vector."""
        noise = complex_normal(self.rng, self.dimension, self.model.noise_variance)
        sample = self.model.coefficients @ self.state + noise
        self.state = np.vstack([sample[None, :], self.state[:-1]])
        return sample

    def run(self, n_steps: int) -> np.ndarray:
        """Advance ``n_steps`` symbols at once.

        Equivalent to stacking ``n_steps`` calls of :meth:`step`, but
        filtered in one pass. Returns an array of shape
        ``(n_steps, dimension)``.
        """
        if n_steps <= 0:
            return np.zeros((0, self.dimension), dtype=complex)
        noise = complex_normal(
            self.rng, (n_steps, self.dimension), self.model.noise_variance
        )
        a = np.concatenate([[1.0], -self.model.coefficients])
        L = self.model.order
        zi = np.stack(
            [lfiltic([1.0], a, self.state[:, d]) for d in range(self.dimension)], axis=1
        )
        out, _ = lfilter([1.0], a, noise, axis=0, zi=zi)
        tail = out[::-1][:L]
        if tail.shape[0] < L:
            tail = np.vstack([tail, self.state[: L - tail.shape[0]]])
        self.state = tail
        return out


@dataclass
class RiceanLink:
    """Scalar Ricean link: constant LoS term plus a scaled Rayleigh process."""

    los_component: complex
    nlos_process: FadingProcess
    nlos_power: float

    @property
    def los_power(self) -> float:
        return float(abs(self.los_component) ** 2)

    @property
    def k_factor_db(self) -> float:
        if self.nlos_power == 0:
            return np.inf
        if self.los_power == 0:
            return -np.inf
        return 10.0 * np.log10(self.los_power / self.nlos_power)

    def step(self) -> complex:
        return self.los_component + np.sqrt(self.nlos_power) * self.nlos_process.step()[0]

    def run(self, n_steps: int) -> np.ndarray:
        """Coefficients for ``n_steps`` symbols, shape ``(n_steps,)``."""
        nlos = self.nlos_process.run(n_steps)[:, 0]
        return self.los_component + np.sqrt(self.nlos_power) * nlos


def make_ricean(k_factor_db: float, fdt: float, rng=None, order: int = 1) -> RiceanLink:
    """Unit-power Ricean link with the given K-factor.

    Finite K-factors are clipped to +/-100 dB; ``+inf`` and ``-inf`` give a
    pure LoS and a pure Rayleigh link exactly. The LoS phase is uniform.
    """
    rng = np.random.default_rng(rng)
    if np.isposinf(k_factor_db):
        los_power, nlos_power = 1.0, 0.0
    elif np.isneginf(k_factor_db):
        los_power, nlos_power = 0.0, 1.0
    else:
        k = 10.0 ** (float(np.clip(k_factor_db, -K_FACTOR_CAP_DB, K_FACTOR_CAP_DB)) / 10.0)
        los_power, nlos_power = k / (k + 1.0), 1.0 / (k + 1.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    process = FadingProcess.from_doppler(fdt, 1, rng, order)
    return RiceanLink(np.sqrt(los_power) * np.exp(1j * phase), process, nlos_power)
