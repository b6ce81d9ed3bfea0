"""Command line front end for BER sweeps.

Example::

    coopcdma --snr-db 0,2,4 --combiner mllr --users 50 --out ber.csv
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import SimConfig, emit_csv, run_sweep

COMBINER_ALIASES = {"mrc": "mrc", "llr": "llr", "mllr": "modified_llr",
                    "modified_llr": "modified_llr", "none": "none"}


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _combiners(text: str) -> tuple[str, ...]:
    names = []
    for name in text.split(","):
        if name not in COMBINER_ALIASES:
            raise argparse.ArgumentTypeError(
                f"unknown combiner {name!r}; choose from {sorted(COMBINER_ALIASES)}")
        names.append(COMBINER_ALIASES[name])
    return tuple(dict.fromkeys(names))


def _partner_set(text: str):
    if text == "unlimited":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'unlimited', got {text!r}")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    d = SimConfig()
    p = argparse.ArgumentParser(
        prog="coopcdma",
        description="Monte Carlo BER of a detect-and-forward cooperative CDMA uplink.")
    p.add_argument("--snr-db", type=_float_list, default=d.eb_n0_db_list,
                   help="comma-separated Eb/N0 points in dB (default %(default)s)")
    p.add_argument("--combiner", type=_combiners, default=d.combiners,
                   help="mrc, llr, mllr or none; a comma-separated list runs several "
                        "(default: all four)")
    p.add_argument("--users", type=int, default=d.n_interferers,
                   help="number of interfering users N_I (default %(default)s)")
    p.add_argument("--partner-users", type=int, default=None,
                   help="interfering users heard by the partner (default: same as --users)")
    p.add_argument("--antennas", type=int, default=d.n_antennas)
    p.add_argument("--chips", type=int, default=d.n_chips)
    p.add_argument("--partner-set", type=_partner_set, default=d.partner_set_size,
                   help="selection set size or 'unlimited' (default %(default)s)")
    p.add_argument("--r-db", type=float, default=d.k_factor_variance_db,
                   help="variance of the partner K-factor in dB^2 (default %(default)s)")
    p.add_argument("--k-mean-db", type=float, default=d.k_factor_mean_db)
    p.add_argument("--fdt-max", type=float, default=d.fdt_max,
                   help="largest normalized Doppler per link (default %(default)s)")
    p.add_argument("--pe", type=float, default=d.pe_assumed,
                   help="partner error probability assumed by mllr (default %(default)s)")
    p.add_argument("--frame-bits", type=int, default=d.frame_bits)
    p.add_argument("--iters", type=int, default=d.decoder_iterations)
    p.add_argument("--min-errors", type=int, default=d.min_bit_errors)
    p.add_argument("--min-frames", type=int, default=d.min_frames)
    p.add_argument("--max-frames", type=int, default=d.max_frames)
    p.add_argument("--seed", type=_seed, default=d.master_seed)
    p.add_argument("--interference", choices=("explicit", "gaussian"), default=d.interference)
    p.add_argument("--workers", type=int, default=d.workers)
    p.add_argument("--out", default=None, help="CSV path (default: standard output)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def config_from_args(args) -> SimConfig:
    return SimConfig(
        eb_n0_db_list=args.snr_db,
        combiners=args.combiner,
        n_antennas=args.antennas,
        n_chips=args.chips,
        n_interferers=args.users,
        partner_interferers=args.partner_users,
        partner_set_size=args.partner_set,
        k_factor_variance_db=args.r_db,
        k_factor_mean_db=args.k_mean_db,
        fdt_max=args.fdt_max,
        pe_assumed=args.pe,
        frame_bits=args.frame_bits,
        decoder_iterations=args.iters,
        min_frames=args.min_frames,
        min_bit_errors=args.min_errors,
        max_frames=args.max_frames,
        master_seed=args.seed,
        interference=args.interference,
        workers=args.workers,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        config = config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    records = run_sweep(config)
    try:
        emit_csv(records, args.out if args.out else sys.stdout)
    except OSError as exc:
        print(f"coopcdma: {exc}", file=sys.stderr)
        return 1
    return 0
