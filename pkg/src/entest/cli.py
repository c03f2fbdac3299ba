"""Command-line surface: theory curves, Monte-Carlo sweeps, rates, validation.

Four subcommands emit CSV/JSON datasets suitable for plotting:

* ``theory``   -- analytic error curves on an M grid (no sampling),
* ``simulate`` -- Monte-Carlo error sweep versus SNR with recursion overlay,
* ``rates``    -- capacities and optimized PPM rates versus brightness,
* ``validate`` -- statistical and oracle gates with pass/fail exit code.

Data goes to ``--out`` (written atomically) or stdout; progress and
diagnostics go to stderr.  Exit codes: 0 success, 1 validation-gate failure,
2 usage or parameter error.  Grids are written ``start:stop:logN`` or
``start:stop:linN``; a bare number is a single-point grid.  Reruns with the
same seed produce byte-identical files for any worker count.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__, harness, theory
from .core import ScenarioParams, derive_statistics
from .dataset import Dataset
from .harness import DEFAULT_SEED, SNR_DEFINITION
from .receiver import NullPolicy, binary_error_pair

__all__ = ["main", "build_parser", "parse_grid"]

PRESETS = {
    "fig3": {"kappa": 0.1, "nb": 10.0, "m": 10},
    "fig4": {"kappa": 0.1, "nb": 20.0},
}

EXIT_OK = 0
EXIT_GATE_FAILURE = 1
EXIT_USAGE = 2


def parse_grid(text: str, integer: bool = False) -> np.ndarray:
    """Parse ``start:stop:logN`` / ``start:stop:linN`` / bare-number grids."""
    parts = text.split(":")
    if len(parts) == 1:
        values = np.array([float(parts[0])])
    elif len(parts) == 3:
        start, stop = float(parts[0]), float(parts[1])
        kind, count = parts[2][:3], parts[2][3:]
        if kind not in ("log", "lin") or not count.isdigit() or int(count) < 1:
            raise ValueError(f"bad grid spec {text!r}: want start:stop:logN or start:stop:linN")
        n = int(count)
        if kind == "log":
            if start <= 0 or stop <= 0:
                raise ValueError(f"log grid requires positive endpoints, got {text!r}")
            values = np.geomspace(start, stop, n)
        else:
            values = np.linspace(start, stop, n)
    else:
        raise ValueError(f"bad grid spec {text!r}")
    if integer:
        values = np.unique(np.round(values).astype(np.int64))
    return values


def _add_output_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_channel_options(parser: argparse.ArgumentParser, with_m: bool) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS), default=None,
                        help="named parameter preset; explicit flags override it")
    parser.add_argument("--kappa", type=float, default=None, help="transmissivity (0, 1]")
    parser.add_argument("--ns", type=float, default=None, help="signal brightness per mode")
    parser.add_argument("--nb", type=float, default=None, help="background brightness per mode")
    if with_m:
        parser.add_argument("--m", type=int, default=None, help="number of PPM bins")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entest",
        description="Noisy entanglement-testing simulator and analytics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_theory = sub.add_parser("theory", help="analytic error curves on an M grid")
    _add_channel_options(p_theory, with_m=True)
    p_theory.add_argument("--M", dest="modes", required=True,
                          help="modes per bin: value or grid (e.g. 1000:100000:log32)")
    _add_output_options(p_theory)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo error sweep versus SNR")
    _add_channel_options(p_sim, with_m=True)
    p_sim.add_argument("--snr", required=True,
                       help=f"SNR grid ({SNR_DEFINITION})")
    p_sim.add_argument("--trials", default="auto",
                       help="trials per point, or 'auto' for the budget rule")
    p_sim.add_argument("--policy", choices=("asymptotic", "adaptive"), default="asymptotic")
    p_sim.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_sim.add_argument("--mc-cap", type=int, default=harness.MC_MODES_CAP,
                       help="largest M simulated per trial; beyond it mc columns are nan")
    p_sim.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (default: ${harness.WORKERS_ENV_VAR} or 1)")
    _add_output_options(p_sim)

    p_rates = sub.add_parser("rates", help="capacities and optimized PPM rates")
    _add_channel_options(p_rates, with_m=False)
    p_rates.add_argument("--model", choices=("both", "helstrom", "cn"), default="both")
    _add_output_options(p_rates)

    p_val = sub.add_parser("validate", help="statistical and oracle validation gates")
    p_val.add_argument("--samples", type=int, default=1000)
    p_val.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_val.add_argument("--self-test-negative", action="store_true",
                       help="corrupt the scan-success helper to prove gates can fail")
    _add_output_options(p_val)

    return parser


def _resolve(args, name: str, required: bool = True):
    value = getattr(args, name)
    if value is not None:
        return value
    if args.preset is not None and name in ("kappa", "ns", "nb", "m"):
        preset = PRESETS[args.preset]
        if name in preset:
            return preset[name]
    if required:
        raise ValueError(f"--{name} is required (directly or via --preset)")
    return None


def cmd_theory(args) -> int:
    kappa = _resolve(args, "kappa")
    ns = _resolve(args, "ns")
    nb = _resolve(args, "nb")
    m = _resolve(args, "m")
    modes_grid = parse_grid(args.modes, integer=True)
    ds = Dataset(
        meta={
            "dataset": "theory", "version": __version__, "snr_definition": SNR_DEFINITION,
            "kappa": kappa, "n_signal": ns, "n_noise": nb, "num_bins": m,
        },
        columns=[
            "modes_per_bin", "snr", "alpha_one", "e_thermal", "p_false_alarm",
            "p_false_negative", "p_cn_recursion", "p_ideal_exact", "p_ideal_approx",
            "p_helstrom_ea", "p_helstrom_classical",
        ],
    )
    for modes in modes_grid:
        params = ScenarioParams(kappa, ns, nb, m, int(modes))
        from .core import derive_statistics
        from .receiver import binary_error_pair

        stats = derive_statistics(params)
        pair = binary_error_pair(params)
        p_cn = float(theory.cn_error_recursive(m, pair))
        ideal_amp = math.sqrt(int(modes) * kappa * ns / nb) if nb > 0 else stats.alpha_one
        ideal_exact, ideal_approx = theory.cn_error_ideal(m, ideal_amp)
        ds.append(
            int(modes),
            int(modes) * kappa * ns / nb if nb > 0 else None,
            stats.alpha_one,
            stats.e_thermal,
            float(np.asarray(pair.p_false_alarm)),
            float(np.asarray(pair.p_false_negative)),
            p_cn,
            ideal_exact,
            ideal_approx,
            theory.helstrom_ea_asymptotic(params) if nb > 0 else None,
            theory.helstrom_classical_asymptotic(params),
        )
    ds.write(args.out, args.format)
    return EXIT_OK


def cmd_simulate(args) -> int:
    kappa = _resolve(args, "kappa")
    ns = _resolve(args, "ns")
    nb = _resolve(args, "nb")
    m = _resolve(args, "m")
    snr_grid = parse_grid(args.snr)
    trials = args.trials if args.trials == "auto" else int(args.trials)

    def progress(index, total, snr, modes, mc, predicted):
        mc_text = "nan" if mc is None else f"{mc:.6g}"
        print(
            f"[simulate] point {index + 1}/{total}: snr={snr:.6g} M={modes} "
            f"mc={mc_text} recursion={predicted:.6g}",
            file=sys.stderr,
        )

    ds = harness.sweep_error_vs_snr(
        kappa, ns, nb, m, snr_grid,
        trials=trials,
        policy=NullPolicy(args.policy),
        master_seed=args.seed,
        mc_modes_cap=args.mc_cap,
        workers=args.workers,
        progress=progress,
    )
    ds.write(args.out, args.format)
    return EXIT_OK


def cmd_rates(args) -> int:
    kappa = _resolve(args, "kappa")
    nb = _resolve(args, "nb")
    ns_grid = parse_grid(_require_text(args.ns, "--ns"))
    models = {
        "both": ("helstrom_ea", "cn_recursion"),
        "helstrom": ("helstrom_ea",),
        "cn": ("cn_recursion",),
    }[args.model]

    def progress(index, total, n_s):
        print(f"[rates] point {index + 1}/{total}: n_s={n_s:.6g}", file=sys.stderr)

    ds = harness.sweep_rates(kappa, nb, ns_grid, models=models, progress=progress)
    ds.write(args.out, args.format)
    return EXIT_OK


def _require_text(value, flag: str) -> str:
    if value is None:
        raise ValueError(f"{flag} is required")
    return str(value)


def cmd_validate(args) -> int:
    q_fn = theory.q_sequence
    if args.self_test_negative:
        def q_fn(n, pair):  # deliberately corrupted scan-success helper
            return min(theory.q_sequence(n, pair) + 1e-3, 1.0)

    params = ScenarioParams(0.1, 0.01, 10.0, 10, 10_000)
    reports = {
        "appendix_orthogonality": harness.validate_orthogonality(
            modes=10_000, variance=(10.0 + 0.1 * 0.01 + 1.0) / 2.0,
            samples=args.samples, master_seed=args.seed,
        ),
        "appendix_alpha_stats": harness.validate_alpha_stats(
            params, samples=args.samples, master_seed=args.seed,
        ),
        "theorem_oracle": harness.validate_theorem_oracle(q_fn=q_fn),
        "ideal_limit": harness.validate_ideal_limit(),
    }
    ds = Dataset(
        meta={
            "dataset": "validation", "version": __version__, "seed": args.seed,
            "samples": args.samples, "self_test_negative": args.self_test_negative,
        },
        columns=["suite", "gate", "observed", "target", "criterion", "passed"],
    )
    all_passed = True
    for suite, report in reports.items():
        for gate in report.gates:
            ds.append(suite, gate.name, gate.observed, gate.target, gate.criterion, gate.passed)
            status = "pass" if gate.passed else "FAIL"
            print(f"[validate] {status}: {suite}/{gate.name} "
                  f"observed={gate.observed:.6g} target={gate.target:.6g}", file=sys.stderr)
        all_passed = all_passed and report.passed
    ds.write(args.out, args.format)
    return EXIT_OK if all_passed else EXIT_GATE_FAILURE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "theory": cmd_theory,
        "simulate": cmd_simulate,
        "rates": cmd_rates,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
