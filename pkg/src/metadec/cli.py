"""Command-line interface: train, test, list.

Flags mirror the harness options; an optional key=value config file supplies
defaults that explicit flags override.  Exit codes: 0 success, 2
configuration error, 3 runtime/numeric error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .errors import ConfigurationError, IncompatibleModelError, MetadecError
from .problems import ALL_FUNCTION_IDS, split_problem_set

_CONFIG_KEYS_HELP = "same keys as the long flags, dashes or underscores"


def _parse_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merged(args: argparse.Namespace, key: str, default, cast=None):
    """Flag value if given, else config-file value, else default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    config = getattr(args, "_config", {})
    if key in config:
        raw = config[key]
        return cast(raw) if cast else raw
    return default


def _parse_split(mode: str, dims, custom: str | None):
    if mode.startswith("custom"):
        spec = custom if custom else mode.partition(":")[2]
        if not spec:
            raise ConfigurationError("custom split needs ids, e.g. custom:1,2,3")
        ids = [int(tok) for tok in spec.split(",") if tok]
        return split_problem_set("custom", dims, custom_seen=ids)
    return split_problem_set(mode, dims)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--components", required=True, help="e.g. DQN_DE_MS")
    p.add_argument("--problem-set", dest="problem_set", default=None,
                   help="problem suite (only 'bbob')")
    p.add_argument("--config", default=None,
                   help=f"optional key=value config file ({_CONFIG_KEYS_HELP})")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--instance-seed", dest="instance_seed", type=int, default=None)
    p.add_argument("--pop-size", dest="pop_size", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metadec",
        description="Learned DE control on the BBOB2009 suite: train, test, report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a meta-optimizer")
    _add_common(p_train)
    p_train.add_argument("--split", default=None,
                         help="easy-train | all-train | custom:<ids>")
    p_train.add_argument("--custom-seen", dest="custom_seen", default=None)
    p_train.add_argument("--dim", type=int, default=None)
    p_train.add_argument("--max-episodes", dest="max_episodes", type=int, default=None)
    p_train.add_argument("--max-steps", dest="max_steps", type=int, default=None)
    p_train.add_argument("--stop-window", dest="stop_window", type=int, default=None)
    p_train.add_argument("--stop-threshold", dest="stop_threshold", type=float,
                         default=None)
    p_train.add_argument("--out", default=None, help="model output path")

    p_test = sub.add_parser("test", help="test a trained model against baseline DE")
    _add_common(p_test)
    p_test.add_argument("--model", required=True)
    p_test.add_argument("--split", default=None)
    p_test.add_argument("--custom-seen", dest="custom_seen", default=None)
    p_test.add_argument("--dims", default=None, help="comma-separated, e.g. 10,30,50")
    p_test.add_argument("--replications", type=int, default=None)
    p_test.add_argument("--max-steps", dest="max_steps", type=int, default=None)
    p_test.add_argument("--baseline", default=None)
    p_test.add_argument("--report-dir", dest="report_dir", default=None)
    p_test.add_argument("--format", dest="fmt", default=None,
                        choices=["csv", "latex", "traces"])
    p_test.add_argument("--workers", type=int, default=None)

    sub.add_parser("list", help="list registered components and problems")
    return parser


def _cmd_train(args) -> int:
    problem_set = _merged(args, "problem_set", "bbob")
    if problem_set != "bbob":
        raise ConfigurationError(f"unknown problem set {problem_set!r}")
    dim = _merged(args, "dim", 10, int)
    split = _parse_split(
        _merged(args, "split", "easy-train"),
        (dim,),
        _merged(args, "custom_seen", None),
    )
    opts = harness.TrainOptions(
        max_episodes=_merged(args, "max_episodes", 1000, int),
        max_steps_per_episode=_merged(args, "max_steps", 500, int),
        stop_window=_merged(args, "stop_window", 10, int),
        stop_threshold=_merged(args, "stop_threshold", 100.0, float),
        master_seed=_merged(args, "seed", 0, int),
        pop_size=_merged(args, "pop_size", 50, int),
        dims=(dim,),
        instance_seed=_merged(args, "instance_seed", 0, int),
    )
    model, log = harness.train(args.components, split, opts)
    out = _merged(
        args, "out", f"{args.components}_Metaoptimizer_finalAgent.json"
    )
    harness.save_model(model, out)
    stopped = "stopped early" if log.stopped_early else "hit episode limit"
    print(f"trained {args.components}: {log.episodes_run} episodes ({stopped})")
    if log.episode_rewards:
        print(f"last-episode reward: {log.episode_rewards[-1]:.4f}")
    print(f"model saved to {out}")
    return 0


def _cmd_test(args) -> int:
    problem_set = _merged(args, "problem_set", "bbob")
    if problem_set != "bbob":
        raise ConfigurationError(f"unknown problem set {problem_set!r}")
    dims_text = _merged(args, "dims", "10")
    dims = tuple(int(tok) for tok in str(dims_text).split(",") if tok)
    split = _parse_split(
        _merged(args, "split", "easy-train"),
        dims,
        _merged(args, "custom_seen", None),
    )
    model = harness.load_model(args.model)
    opts = harness.TestOptions(
        dims=dims,
        replications=_merged(args, "replications", 31, int),
        max_steps=_merged(args, "max_steps", 500, int),
        pop_size=_merged(args, "pop_size", 50, int),
        master_seed=_merged(args, "seed", 0, int),
        instance_seed=_merged(args, "instance_seed", 0, int),
        workers=_merged(args, "workers", 1, int),
    )
    baseline = _merged(args, "baseline", harness.BASELINE_NAME)
    report = harness.test(args.components, model, split, opts, baseline=baseline)
    report_dir = _merged(args, "report_dir", "reports")
    fmt = _merged(args, "fmt", "csv")
    paths = harness.emit_report(report, fmt, report_dir)
    for dim in dims:
        plus, minus, eq = report.footer_counts(dim)
        ti = report.ti.get(dim)
        ti_text = "n/a" if ti is None else harness.sci(ti, 4)
        print(f"D={dim}: +/-/= {plus}/{minus}/{eq}  TI={ti_text}")
    if report.gi is not None:
        print(f"GI={harness.sci(report.gi, 4)}")
    for path in paths:
        print(f"wrote {path}")
    return 0


def _cmd_list() -> int:
    print("components:")
    for name in sorted(harness.COMPONENTS):
        print(f"  {name}")
    print(f"baseline: {harness.BASELINE_NAME} (fixed F=0.5, CR=0.9, rand/1)")
    print("problem set: bbob (noiseless BBOB2009)")
    print(f"  functions: F{ALL_FUNCTION_IDS[0]}..F{ALL_FUNCTION_IDS[-1]}")
    print("  splits: easy-train (unseen F1,F5,F6,F10,F15,F20), all-train, custom:<ids>")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            args._config = _parse_config_file(args.config)
        else:
            args._config = {}
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "test":
            return _cmd_test(args)
        return _cmd_list()
    except (ConfigurationError, IncompatibleModelError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (MetadecError, OSError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
