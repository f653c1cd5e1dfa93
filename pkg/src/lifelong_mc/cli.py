"""Command line front end.

Four subcommands: gen (materialize an instance to disk), run (seeded trials
of one algorithm), sweep (success grid over rank and sample fractions), and
compare-mixture (full-rank versus sparsity-bounded test on shared mixture
instances). Every subcommand reads a key = value config file and accepts
--seed / --out / --trials overrides.

Exit codes: 0 on a completed command (recovery failures are data, not
errors), 2 for configuration problems, 1 for I/O problems.
"""

import argparse
import sys

from .datagen import MatrixFormatError
from .harness import RunConfig, SweepGrid, cmd_compare_mixture, cmd_gen, cmd_run, cmd_sweep


class ConfigError(ValueError):
    pass


def parse_config_file(path):
    """Read a key = value config file. Blank lines and lines starting with
    '#' are skipped; values keep internal whitespace."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise err
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def _int(raw):
    return int(raw)


def _float(raw):
    return float(raw)


def _str(raw):
    return raw


def _s0(raw):
    return raw if raw == "auto" else int(raw)


def _float_list(raw):
    return [float(x) for x in raw.split(",") if x.strip()]


def _int_list(raw):
    return [int(x) for x in raw.split(",") if x.strip()]


_RUN_KEYS = {
    "algorithm": _str, "generator": _str, "m": _int, "n": _int, "r": _int,
    "d": _int, "trials": _int, "seed": _int, "out": _str, "noise": _str,
    "noise_level": _float, "s0": _s0, "sparsity": _int, "n_subspaces": _int,
    "per_subspace": _int, "subspace_dim": _int, "target_coherence": _float,
    "block_scales": _float_list, "threshold_scale": _float, "zero_tol": _float,
    "norm_mode": _str, "matrix_path": _str, "truth_path": _str,
}

_SWEEP_KEYS = {
    "m": _int, "n": _int, "rank_ratios": _float_list,
    "sample_ratios": _float_list, "trials_per_cell": _int, "seed": _int,
    "out": _str, "zero_tol": _float, "workers": _int,
}

_COMPARE_KEYS = {
    "m": _int, "per_subspace": _int, "n_subspaces": _int, "subspace_dim": _int,
    "d_values": _int_list, "trials": _int, "seed": _int, "out": _str,
    "zero_tol": _float, "workers": _int,
}


def _coerce(pairs, table, path):
    out = {}
    for key, raw in pairs.items():
        if key not in table:
            known = ", ".join(sorted(table))
            raise ConfigError(f"{path}: unknown key {key!r} (known: {known})")
        try:
            out[key] = table[key](raw)
        except ValueError:
            raise ConfigError(f"{path}: bad value for {key!r}: {raw!r}")
    return out


def _apply_overrides(values, args, trials_key="trials"):
    if args.seed is not None:
        values["seed"] = args.seed
    if args.out is not None:
        values["out"] = args.out
    if getattr(args, "trials", None) is not None:
        values[trials_key] = args.trials
    return values


def _run(args):
    values = _coerce(parse_config_file(args.config), _RUN_KEYS, args.config)
    values = _apply_overrides(values, args)
    cfg = RunConfig(**values)
    path, fraction = cmd_run(cfg)
    print(f"wrote {path} ({cfg.trials} trials, success fraction {fraction:g})")
    return 0


def _gen(args):
    values = _coerce(parse_config_file(args.config), _RUN_KEYS, args.config)
    values = _apply_overrides(values, args)
    values.setdefault("out", "instance")
    cfg = RunConfig(**values)
    paths = cmd_gen(cfg)
    print(f"wrote {paths['L']} {paths['M']} {paths['meta']}")
    return 0


def _sweep(args):
    values = _coerce(parse_config_file(args.config), _SWEEP_KEYS, args.config)
    values = _apply_overrides(values, args, trials_key="trials_per_cell")
    seed = values.pop("seed", 0)
    out = values.pop("out", "sweep.csv")
    zero_tol = values.pop("zero_tol", 1e-8)
    workers = values.pop("workers", None)
    grid = SweepGrid(**values)
    path, rows = cmd_sweep(grid, seed=seed, out=out, zero_tol=zero_tol, workers=workers)
    print(f"wrote {path} ({len(rows)} cells)")
    return 0


def _compare(args):
    values = _coerce(parse_config_file(args.config), _COMPARE_KEYS, args.config)
    values = _apply_overrides(values, args)
    for required in ("d_values", "per_subspace", "n_subspaces", "subspace_dim"):
        if required not in values:
            raise ConfigError(f"{args.config}: missing key {required!r}")
    path, rows = cmd_compare_mixture(
        m=values.get("m", 50),
        per_subspace=values["per_subspace"],
        n_subspaces=values["n_subspaces"],
        subspace_dim=values["subspace_dim"],
        d_values=values["d_values"],
        trials=values.get("trials", 10),
        seed=values.get("seed", 0),
        out=values.get("out", "compare.csv"),
        zero_tol=values.get("zero_tol", 1e-8),
        workers=values.get("workers"),
    )
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lifelong-mc",
        description="Streaming low-rank completion experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("gen", _gen, "write one instance (clean + observed + metadata) to disk"),
        ("run", _run, "seeded trials of one algorithm, results to CSV"),
        ("sweep", _sweep, "success grid over rank and sample fractions"),
        ("compare-mixture", _compare, "full-rank vs sparsity-bounded test curves"),
    ]
    for name, func, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override output path")
        p.add_argument(
            "--trials", type=int, default=None,
            help="override trial count (trials_per_cell for sweep; unused by gen)",
        )
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TypeError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (OSError, MatrixFormatError) as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
