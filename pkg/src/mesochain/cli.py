"""Command-line entry point.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
failures (integration, averaging or reconstruction).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, NumericalError
from .experiments import (
    default_cache_dir,
    load_config,
    run_scenario,
    synthetic_deconvolution_demo,
)

log = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mesochain",
        description="Particle-chain simulation with mesoscale averaging and "
                    "deconvolution closure",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a scenario and write CSV outputs")
    run.add_argument("--config", required=True, help="scenario config file")
    run.add_argument("--out", help="output directory (overrides out_dir)")
    run.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    run.add_argument("--method",
                     help="reconstruction method: svd | zero | landweber:<n> | tikhonov:<alpha>")

    demo = sub.add_parser("demo", help="synthetic deconvolution demonstration")
    demo.add_argument("--seed", type=int, default=0, help="noise seed")
    demo.add_argument("--out", default="demo", help="output directory")
    demo.add_argument("--noise-amplitude", type=float, default=0.05)

    pre = sub.add_parser("precompute-operator",
                         help="assemble the operator for a config and cache its SVD")
    pre.add_argument("--config", required=True, help="scenario config file")
    return parser


def _cmd_run(args) -> int:
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.method is not None:
        overrides["method"] = args.method
    cfg = load_config(args.config, **overrides)
    report = run_scenario(cfg)
    print(f"run complete: {len(report.snapshot_csvs)} snapshots in {report.run_dir}")
    final = report.error_rows[-1]
    print(f"operator condition {report.condition.condition:.3e} "
          f"({report.condition.truncated_count} truncated), "
          f"dt={report.dt_effective:g}, final closed errors: "
          f"T_c {final['err_Tc_closed']:.3g}, T_int {final['err_Tint_closed']:.3g}")
    return 0


def _cmd_demo(args) -> int:
    report = synthetic_deconvolution_demo(
        seed=args.seed, noise_amplitude=args.noise_amplitude, out_dir=args.out)
    print(f"demo written to {report.out_dir}")
    print(f"triangle retention: reconstruction {report.triangle_retention_reconstruction:.3f}, "
          f"average {report.triangle_retention_average:.3f}; "
          f"noise ratio {report.noise_ratio:.3f}; residual {report.residual:.3e}")
    return 0


def _cmd_precompute(args) -> int:
    from .deconvolution import assemble_operator, condition_report
    from .meshes import Mesh

    cfg = load_config(args.config)
    cache = default_cache_dir()
    op = assemble_operator(cfg.make_kernel(), Mesh(cfg.D, cfg.L, "coarse"),
                           Mesh(cfg.N, cfg.L, "fine"), cache_dir=cache)
    rep = condition_report(op)
    print(f"operator cached in {cache}: sigma_max={rep.sigma_max:.6f}, "
          f"sigma_min={rep.sigma_min:.3e}, condition={rep.condition:.3e}, "
          f"truncated={rep.truncated_count}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "demo":
            return _cmd_demo(args)
        return _cmd_precompute(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3 if isinstance(exc, NumericalError) else 2


if __name__ == "__main__":
    sys.exit(main())
