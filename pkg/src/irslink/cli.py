"""Command-line front end.

Subcommands:

* ``optimize``: one seeded channel draw (or an imported channel file),
  phases optimized under the chosen scheme; prints rate, iteration
  count and the phase indices.
* ``sweep``: run a configured Monte Carlo sweep and write the result
  table; ``--dump`` additionally writes a JSON dump with per-trial
  rates and traces.
* ``convergence``: print the per-sweep rate trace of one seeded run.
* ``import-channels``: validate an external channel file.

Output files are written atomically (temp file + rename). Exit status
is 0 on success, 2 on configuration or input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from .channel import Scenario, rician_channel
from .channel_io import ChannelFileError, load_channels
from .config import (ConfigError, OptimizerSettings, parse_config,
                     parse_optimizer_settings)
from .experiments import Scheme, SweepSpec, convergence_trace, run_sweep
from .link import rate
from .optimizer import (GroupingSpec, optimize_grouped, optimize_position_based,
                        successive_refinement)


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _load_scenario(args) -> tuple[Scenario, OptimizerSettings]:
    text = _read_text(args.config)
    overrides = tuple(args.set or ())
    parsed = parse_config(text, overrides)
    scenario = parsed.base_scenario if isinstance(parsed, SweepSpec) else parsed
    settings = parse_optimizer_settings(text, overrides)
    return scenario, settings


def _cmd_optimize(args) -> int:
    scenario, settings = _load_scenario(args)
    scheme = Scheme.parse(args.scheme)
    if scheme.name == "no_irs":
        print("error: scheme no_irs has nothing to optimize", file=sys.stderr)
        return 2

    if args.channels:
        channels = load_channels(args.channels)
    else:
        seed = args.seed if args.seed is not None else settings.seed
        channels = rician_channel(scenario, np.random.default_rng(seed))

    tx_power, noise = scenario.tx_power, scenario.n0
    if scheme.name == "full_csi":
        report = successive_refinement(
            channels, settings.levels, tx_power, noise,
            epsilon=settings.epsilon, max_outer_iters=settings.max_outer_iters)
    elif scheme.name == "grouped":
        report = optimize_grouped(
            channels, (scenario.irs_rows, scenario.irs_cols),
            GroupingSpec(scheme.group_rows, scheme.group_cols),
            settings.levels, tx_power, noise, epsilon=settings.epsilon,
            max_outer_iters=settings.max_outer_iters)
    else:
        report = optimize_position_based(
            scenario, channels, settings.levels, tx_power, noise,
            epsilon=settings.epsilon, max_outer_iters=settings.max_outer_iters)
    achieved = rate(channels, report.final_phases, tx_power, noise)

    out_lines = [
        "rate_bps_hz %.12g" % achieved,
        "iterations %d" % report.iterations,
        "converged %s" % ("true" if report.converged else "false"),
        "phases " + " ".join(str(int(k)) for k in report.final_phases.indices),
    ]
    text = "\n".join(out_lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sweep(args) -> int:
    text = _read_text(args.config)
    parsed = parse_config(text, tuple(args.set or ()))
    if not isinstance(parsed, SweepSpec):
        print("error: config has no [sweep] section", file=sys.stderr)
        return 2
    result = run_sweep(parsed, workers=args.workers,
                       keep_trials=bool(args.dump),
                       keep_traces=bool(args.dump and args.traces))
    _atomic_write(args.out, result.to_table())
    print(f"wrote {args.out} ({len(result.rows)} rows)")
    if args.dump:
        _atomic_write(args.dump, result.to_json())
        print(f"wrote {args.dump}")
    return 0


def _cmd_convergence(args) -> int:
    scenario, settings = _load_scenario(args)
    trace = convergence_trace(scenario, settings.levels, settings.epsilon,
                              args.seed,
                              max_outer_iters=settings.max_outer_iters)
    lines = ["iteration rate_bps_hz"]
    lines += ["%d %.12g" % (k, r) for k, r in enumerate(trace)]
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_import_channels(args) -> int:
    channels = load_channels(getattr(args, "in"))
    print(f"ok: M={channels.num_bs_antennas} N={channels.num_irs_elements}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irslink",
        description="IRS-assisted uplink simulation and phase optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="optimize phases for one draw")
    p_opt.add_argument("--config", required=True)
    p_opt.add_argument("--channels", help="channel file to use instead of "
                                          "synthesizing")
    p_opt.add_argument("--scheme", default="full_csi",
                       help="full_csi, grouped_RxC or position_based")
    p_opt.add_argument("--seed", type=int, default=None,
                       help="channel draw seed (default from [optimizer])")
    p_opt.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a config value")
    p_opt.add_argument("--out", help="write the report here instead of stdout")
    p_opt.set_defaults(func=_cmd_optimize)

    p_sweep = sub.add_parser("sweep", help="run a Monte Carlo sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True, help="result table path")
    p_sweep.add_argument("--dump", help="also write a JSON dump with "
                                        "per-trial rates")
    p_sweep.add_argument("--traces", action="store_true",
                         help="include per-trial traces in the dump")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                         help="override a config value")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_conv = sub.add_parser("convergence", help="print one refinement trace")
    p_conv.add_argument("--config", required=True)
    p_conv.add_argument("--seed", type=int, required=True)
    p_conv.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a config value")
    p_conv.add_argument("--out", help="write the trace here instead of stdout")
    p_conv.set_defaults(func=_cmd_convergence)

    p_imp = sub.add_parser("import-channels", help="validate a channel file")
    p_imp.add_argument("--in", required=True, dest="in")
    p_imp.set_defaults(func=_cmd_import_channels)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ChannelFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
