"""Monte Carlo BER simulation of the cooperative link.

Each trial is one frame: a random info block is turbo encoded, spread,
sent to the BS array directly and through the detect-and-forward
partner, combined, decoded and compared. Every trial draws from its own
random stream keyed by ``(master_seed, trial_index)``; the same trial
index reproduces the same channel, codes and noise shape for every
combiner and every Eb/N0, so curves are compared on common random
numbers.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.stats import binomtest

from .cdma import (
    NoiseModel,
    apply_channel,
    ebn0_to_noise_variance,
    generate_sequence,
    spread,
)
from .combine import (
    CombinerInput,
    ModifiedLlrConfig,
    llr_combine,
    modified_llr_combine,
    mrc_combine,
)
from .coop import SelectionConfig, draw_candidates, partner_detect, relay_symbol, select_partner
from .fading import FadingProcess, make_ricean
from .turbo import Interleaver, RscSpec, SoftFrame, bits_to_symbols, turbo_decode, turbo_encode

__all__ = [
    "COMBINERS",
    "BerRecord",
    "SimConfig",
    "emit_csv",
    "gain_at_ber",
    "read_csv",
    "run_sweep",
    "run_trial",
    "simulate_frame",
    "trial_seed",
    "wilson_interval",
]

log = logging.getLogger(__name__)

COMBINERS = ("mrc", "llr", "modified_llr", "none")
CODE_RATE = 0.5
CSV_HEADER = (
    "eb_n0_db", "combiner", "n_interferers", "partner_set", "r_db", "frames",
    "bits", "bit_errors", "ber", "ci95_low", "ci95_high", "seed",
)


@dataclass(frozen=True)
class SimConfig:
    """One simulated scenario.

    ``partner_set_size=None`` means an unlimited selection set, i.e. every
    other active terminal is a candidate. ``partner_interferers`` sets the
    multiple-access load heard by the partner; ``None`` reuses
    ``n_interferers``.
    """

    eb_n0_db_list: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    combiners: tuple[str, ...] = COMBINERS
    n_antennas: int = 3
    n_chips: int = 50
    n_interferers: int = 50
    partner_set_size: int | None = 10
    k_factor_variance_db: float = 5.0
    k_factor_mean_db: float = 6.0
    fdt_max: float = 0.04
    pe_assumed: float = 0.025
    frame_bits: int = 1024
    decoder_iterations: int = 8
    min_frames: int = 1
    min_bit_errors: int = 100
    max_frames: int = 2000
    master_seed: int = 0
    interference: str = "explicit"
    ar_order: int = 1
    partner_interferers: int | None = None
    max_log: bool = False
    chunk_frames: int = 8
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eb_n0_db_list", tuple(float(x) for x in self.eb_n0_db_list))
        object.__setattr__(self, "combiners", tuple(self.combiners))
        for c in self.combiners:
            if c not in COMBINERS:
                raise ValueError(f"unknown combiner {c!r}; choose from {COMBINERS}")
        if self.n_antennas < 1 or self.n_chips < 1 or self.frame_bits < 1:
            raise ValueError("n_antennas, n_chips and frame_bits must be positive")
        if not 0 <= self.n_interferers <= 2 * self.n_chips:
            raise ValueError(
                f"n_interferers={self.n_interferers} exceeds full load 2*n_chips={2 * self.n_chips}"
            )
        if self.partner_interferers is not None and not (
                0 <= self.partner_interferers <= 2 * self.n_chips):
            raise ValueError(f"partner_interferers={self.partner_interferers} out of range")
        if self.partner_set_size is not None and self.partner_set_size < 1:
            raise ValueError("partner_set_size must be positive or None")
        if self.fdt_max < 0:
            raise ValueError("fdt_max must be non-negative")
        if not 0 <= self.pe_assumed <= 1:
            raise ValueError("pe_assumed must lie in [0, 1]")
        if self.decoder_iterations < 1:
            raise ValueError("decoder_iterations must be >= 1")
        if self.min_bit_errors < 0 or self.min_frames < 0 or self.max_frames < 1:
            raise ValueError("invalid stopping rule")
        if self.interference not in ("explicit", "gaussian"):
            raise ValueError(f"unknown interference mode {self.interference!r}")
        if self.chunk_frames < 1 or self.workers < 1:
            raise ValueError("chunk_frames and workers must be >= 1")

    @property
    def selection(self) -> SelectionConfig:
        return SelectionConfig(self.partner_set_size, self.k_factor_mean_db,
                               self.k_factor_variance_db)

    @property
    def partner_load(self) -> int:
        return self.n_interferers if self.partner_interferers is None else self.partner_interferers

    @property
    def partner_set_label(self) -> str:
        return "unlimited" if self.partner_set_size is None else str(self.partner_set_size)


@dataclass(frozen=True)
class BerRecord:
    eb_n0_db: float
    combiner: str
    n_interferers: int
    partner_set: str
    r_db: float
    frames: int
    bits: int
    bit_errors: int
    ber: float
    ci95_low: float
    ci95_high: float
    seed: int


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(errors, trials).proportion_ci(0.95, method="wilson")
    return float(ci.low), float(ci.high)


def trial_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(trial_index,))


STREAMS = ("frame", "select", "inter_link", "user_link", "partner_link",
           "partner_noise", "bs_noise")


def _frame_streams(seed) -> dict[str, np.random.Generator]:
    # one child stream per frame component, so changing one scenario knob
    # (set size, K statistics, load) leaves the other draws untouched
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return {
        name: np.random.default_rng(
            np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (i,)))
        for i, name in enumerate(STREAMS)
    }


def simulate_frame(config: SimConfig, eb_n0_db: float, seed, combiners=None) -> dict[str, int]:
    """Run one frame and return info-bit errors per combiner.

    Random draws never depend on ``combiners`` or on the noise level beyond
    scaling, so results for one combiner are the same whichever others are
    evaluated alongside it.
    """
    combiners = config.combiners if combiners is None else tuple(combiners)
    streams = _frame_streams(seed)
    rng = streams["frame"]
    K, N, n_c = config.frame_bits, config.n_antennas, config.n_chips
    spec = RscSpec()

    info = rng.integers(0, 2, K, dtype=np.uint8)
    interleaver = Interleaver(rng.permutation(K))
    seq_user = generate_sequence(n_c, rng)
    seq_partner = generate_sequence(n_c, rng)
    fdt_user, fdt_partner, fdt_inter = rng.uniform(0.0, config.fdt_max, 3)

    candidates = draw_candidates(config.selection, streams["select"], config.n_interferers)
    partner = select_partner(candidates)
    link = make_ricean(partner.k_factor_db, fdt_inter, streams["inter_link"], config.ar_order)

    frame = turbo_encode(info, interleaver, spec)
    d = bits_to_symbols(frame.transmitted_bits)
    n_pairs = (d.size + 1) // 2
    pair = np.arange(d.size) // 2

    h_in = link.run(n_pairs)[pair]
    h_user = FadingProcess.from_doppler(fdt_user, N, streams["user_link"],
                                        config.ar_order).run(n_pairs)[pair]
    h_part = FadingProcess.from_doppler(fdt_partner, N, streams["partner_link"],
                                        config.ar_order).run(n_pairs)[pair]

    sigma_w_sq = ebn0_to_noise_variance(eb_n0_db, CODE_RATE)
    partner_noise = NoiseModel(sigma_w_sq, config.partner_load, n_c, mode="gaussian")
    t_user = spread(d, seq_user)
    r_partner = apply_channel(t_user, h_in[:, None], partner_noise, streams["partner_noise"])
    d_hat = partner_detect(r_partner, h_in, seq_user)
    t_partner = relay_symbol(d_hat, seq_partner)

    bs_noise = NoiseModel(sigma_w_sq, config.n_interferers, n_c, mode=config.interference)
    r_coop = apply_channel(t_user, h_user, bs_noise, streams["bs_noise"],
                           partner=(h_part, t_partner))
    sigma_e_sq = bs_noise.equivalent_variance

    errors = {}
    for name in combiners:
        if name == "none":
            r_direct = r_coop - h_part[:, :, None] * t_partner[:, None, :]
            inp = CombinerInput(r_direct, h_user, np.zeros_like(h_part), seq_user,
                                seq_partner, sigma_e_sq)
            llrs = llr_combine(inp)
        else:
            inp = CombinerInput(r_coop, h_user, h_part, seq_user, seq_partner, sigma_e_sq)
            if name == "mrc":
                llrs = mrc_combine(inp).real
            elif name == "llr":
                llrs = llr_combine(inp)
            else:
                llrs = modified_llr_combine(inp, ModifiedLlrConfig(config.pe_assumed))
        soft = SoftFrame.from_transmitted(llrs, K)
        decoded = turbo_decode(soft, interleaver, spec, config.decoder_iterations,
                               max_log=config.max_log)
        errors[name] = int(np.count_nonzero(decoded != info))
    return errors


def run_trial(config: SimConfig, eb_n0_db: float, trial_seed, combiner: str | None = None):
    """One frame for a single combiner; returns ``(bit_errors, bits)``."""
    combiner = config.combiners[0] if combiner is None else combiner
    errors = simulate_frame(config, eb_n0_db, trial_seed, (combiner,))[combiner]
    return errors, config.frame_bits


def _run_chunk(args):
    config, eb_n0_db, first, count, combiners = args
    totals = dict.fromkeys(combiners, 0)
    for i in range(first, first + count):
        for name, e in simulate_frame(config, eb_n0_db, trial_seed(config.master_seed, i),
                                      combiners).items():
            totals[name] += e
    return totals


def _point_done(config: SimConfig, frames: int, errors: int) -> bool:
    if frames >= config.max_frames:
        return True
    return frames >= config.min_frames and errors >= config.min_bit_errors


def _sweep_point(config: SimConfig, eb_n0_db: float, pool) -> dict[str, tuple[int, int]]:
    frames = dict.fromkeys(config.combiners, 0)
    errors = dict.fromkeys(config.combiners, 0)
    active = [c for c in config.combiners if not _point_done(config, 0, 0)]
    next_frame = 0
    batch_chunks = config.workers if pool is not None else 1
    while active:
        jobs = []
        for _ in range(batch_chunks):
            count = min(config.chunk_frames, config.max_frames - next_frame)
            if count <= 0:
                break
            jobs.append((config, eb_n0_db, next_frame, count, tuple(active)))
            next_frame += count
        results = pool.map(_run_chunk, jobs) if pool is not None else map(_run_chunk, jobs)
        for (_, _, _, count, dispatched), totals in zip(jobs, results):
            for name in dispatched:
                if name not in active:
                    continue
                errors[name] += totals[name]
                frames[name] += count
                if _point_done(config, frames[name], errors[name]):
                    active.remove(name)
        log.info("Eb/N0 %.2f dB: frames %s errors %s", eb_n0_db, frames, errors)
    return {c: (frames[c], errors[c]) for c in config.combiners}


def run_sweep(config: SimConfig) -> list[BerRecord]:
    """Simulate every (combiner, Eb/N0) point of ``config``.

    Each point stops once it has ``min_bit_errors`` errors (after at least
    ``min_frames`` frames) or reaches ``max_frames``. Frames are processed
    in fixed chunks and the stopping rule is applied chunk by chunk in
    index order, so the output does not depend on ``workers``.
    """
    records = []
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for eb in config.eb_n0_db_list:
            for name, (frames, errors) in _sweep_point(config, eb, pool).items():
                bits = frames * config.frame_bits
                low, high = wilson_interval(errors, bits)
                records.append(BerRecord(
                    eb_n0_db=eb, combiner=name, n_interferers=config.n_interferers,
                    partner_set=config.partner_set_label, r_db=config.k_factor_variance_db,
                    frames=frames, bits=bits, bit_errors=errors,
                    ber=errors / bits if bits else 0.0, ci95_low=low, ci95_high=high,
                    seed=config.master_seed,
                ))
    finally:
        if pool is not None:
            pool.shutdown()
    return sorted(records, key=lambda r: (r.combiner, r.eb_n0_db))


def _curve_points(curve):
    points = []
    for p in curve:
        eb, ber = (p.eb_n0_db, p.ber) if isinstance(p, BerRecord) else p
        points.append((float(eb), float(ber)))
    return sorted(points)


def _crossing(curve, target: float) -> float:
    points = [(eb, ber) for eb, ber in _curve_points(curve) if ber > 0]
    lt = math.log10(target)
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        l0, l1 = math.log10(y0), math.log10(y1)
        if min(l0, l1) <= lt <= max(l0, l1):
            if l0 == l1:
                return x0
            return x0 + (lt - l0) * (x1 - x0) / (l1 - l0)
    raise ValueError(f"curve does not bracket BER {target:g}")


def gain_at_ber(curve_a, curve_b, target_ber: float = 1e-3) -> float:
    """Eb/N0 advantage of ``curve_a`` over ``curve_b`` at ``target_ber`` in dB.

    Curves are sequences of :class:`BerRecord` or ``(eb_n0_db, ber)``
    pairs; Eb/N0 is interpolated linearly in ``log10(BER)`` and the first
    crossing is used. Zero-BER points are ignored.
    """
    if not 0 < target_ber < 1:
        raise ValueError("target_ber must lie in (0, 1)")
    return _crossing(curve_b, target_ber) - _crossing(curve_a, target_ber)


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(records, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        row = asdict(rec)
        writer.writerow([_format(row[name]) for name in CSV_HEADER])


def emit_csv(records, path) -> None:
    """Write records with a fixed header and ``.`` decimal separators.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(records, path)
        return
    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            _write_rows(records, fh)
    except OSError as exc:
        raise OSError(f"cannot write BER table to {path}: {exc}") from exc


def read_csv(path) -> list[BerRecord]:
    types = {f.name: f.type for f in fields(BerRecord)}
    casts = {"float": float, "int": int, "str": str}
    records = []
    with open(path, newline="", encoding="ascii") as fh:
        for row in csv.DictReader(fh):
            records.append(BerRecord(**{k: casts[types[k]](v) for k, v in row.items()}))
    return records
