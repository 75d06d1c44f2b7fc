"""Command-line entry point: ``neucgc {stats,sbm,train,sweep}``.

Every option can also come from ``--config FILE``: either flat ``key = value``
lines (keys are option names, ``-`` or ``_``; ``#`` starts a comment) or the
``spec.json`` written by a previous run. Command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import FORMATS, load_dataset
from .graph import GraphError, generate_sbm, graph_stats, save_graph
from .trainer import TrainConfig, TrainingError, train

log = logging.getLogger("neucgc")

EXIT_OK, EXIT_INPUT, EXIT_TRAIN, EXIT_PARTIAL = 0, 2, 3, 4

METRIC_KEYS = ("ACC", "NMI", "ARI", "F1")
CURVE_KEYS = ("L_NCA", "L_AFC", "L_GDA", "L_total", "eta", "xi", "H_edges") + METRIC_KEYS
HOMOPHILY_KEYS = ("r_h_A", "r_h_H", "delta_A", "delta_H")

# option dest -> TrainConfig field
CONFIG_FIELDS = {
    "dim": "latent_dim",
    "lr": "learning_rate",
    "epochs": "epochs",
    "lambda1": "lambda1",
    "lambda2": "lambda2",
    "k": "k",
    "seed": "seed",
    "depth": "depth",
    "preprocessing": "preprocessing",
    "clusters": "n_clusters",
    "kmeans_restarts": "kmeans_restarts",
    "kmeans_interval": "kmeans_interval",
    "norm_scope": "norm_scope",
    "selection_scope": "selection_scope",
    "eta": "eta_override",
    "block_size": "k_block_size",
    "early_stop": "early_stop_patience",
}


class InputError(Exception):
    pass


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def _int_list(text):
    return [int(v) for v in _float_list(text)]


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_dataset_args(p):
    g = p.add_argument_group("dataset (a directory, or SBM parameters when --data is absent)")
    g.add_argument("--data", type=Path, help="dataset directory")
    g.add_argument("--format", choices=FORMATS, default="auto")
    g.add_argument("--sbm-nodes", type=int, default=300)
    g.add_argument("--sbm-classes", type=int, default=3)
    g.add_argument("--p-in", type=float, default=0.1)
    g.add_argument("--p-out", type=float, default=0.005)
    g.add_argument("--feature-dim", type=int, default=32)
    g.add_argument("--feature-noise", type=float, default=1.0)
    g.add_argument("--graph-seed", type=int, default=0)


def _add_train_args(p):
    d = TrainConfig()
    g = p.add_argument_group("training")
    g.add_argument("--dim", type=int, default=d.latent_dim)
    g.add_argument("--lr", type=float, default=d.learning_rate)
    g.add_argument("--epochs", type=int, default=d.epochs)
    g.add_argument("--lambda1", type=float, default=d.lambda1)
    g.add_argument("--lambda2", type=float, default=d.lambda2)
    g.add_argument("--k", type=float, default=d.k)
    g.add_argument("--seed", type=int, default=d.seed)
    g.add_argument("--repeat", type=int, default=1, help="number of seeds: seed, seed+1, ...")
    g.add_argument("--depth", type=int, default=d.depth)
    g.add_argument("--final-activation", type=_bool, default=d.final_activation)
    g.add_argument("--preprocessing", default=d.preprocessing)
    g.add_argument("--clusters", type=int, default=None)
    g.add_argument("--kmeans-restarts", type=int, default=d.kmeans_restarts)
    g.add_argument("--kmeans-interval", type=int, default=d.kmeans_interval)
    g.add_argument("--norm-scope", choices=("global", "row"), default=d.norm_scope)
    g.add_argument("--selection-scope", choices=("global", "cluster"), default=d.selection_scope)
    g.add_argument("--eta", type=float, default=None, help="fix the neutral factor")
    g.add_argument("--block-size", type=int, default=None, help="row block for the SKL matrix")
    g.add_argument("--early-stop", type=int, default=None, help="patience in epochs")
    o = p.add_argument_group("output")
    o.add_argument("--out", type=Path, help="output directory (required)")
    o.add_argument("--checkpoint", action="store_true", help="save encoders per seed")
    o.add_argument("--plot", action="store_true", help="also render PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neucgc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"neucgc {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="print the dataset statistics row")
    p.add_argument("data", type=Path)
    p.add_argument("--format", choices=FORMATS, default="auto")
    p.add_argument("--name", help="prefix the row with this name")
    p.add_argument("--header", action="store_true")

    p = sub.add_parser("sbm", help="generate a stochastic block model dataset")
    p.add_argument("out", type=Path)
    p.add_argument("--nodes", type=int, default=300)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--p-in", type=float, default=0.1)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--feature-dim", type=int, default=32)
    p.add_argument("--feature-noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)

    for name, text in (("train", "train and evaluate over one or more seeds"),
                       ("sweep", "grid over lambda1, lambda2, k and dim")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, help="flat key = value file, or a spec.json")
        _add_dataset_args(p)
        _add_train_args(p)
        if name == "sweep":
            g = p.add_argument_group("grid (defaults to the single training value)")
            g.add_argument("--lambda1-grid", type=_float_list)
            g.add_argument("--lambda2-grid", type=_float_list)
            g.add_argument("--k-grid", type=_float_list)
            g.add_argument("--dim-grid", type=_int_list)
    return parser


def read_config(path: Path) -> dict:
    """Option values keyed by argparse dest, as strings (JSON values kept)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if str(path).endswith(".json"):
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from exc
        return dict(spec.get("args", spec))
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is None:
        return args
    values = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in subparser._actions}
    unknown = sorted(set(values) - set(known) - {"command", "config"})
    if unknown:
        raise InputError(f"{args.config}: unknown keys {unknown}")
    defaults = {}
    for key, value in values.items():
        if key in ("command", "config"):
            continue
        action = known[key]
        try:
            defaults[key] = _coerce(action, value)
        except (argparse.ArgumentTypeError, TypeError, ValueError) as exc:
            raise InputError(f"{args.config}: bad value for {key}: {exc}") from exc
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _coerce(action, value):
    if value is None or isinstance(value, (list, bool, int, float)):
        return value
    if action.type is not None:
        return action.type(value)
    if action.const is not None:
        return _bool(value)
    if action.choices is not None and value not in action.choices:
        raise ValueError(f"expected one of {list(action.choices)}")
    return value


def _require_out(args) -> Path:
    if args.out is None:
        raise InputError("--out is required")
    return args.out


def config_from_args(args, **overrides) -> TrainConfig:
    values = {field: getattr(args, dest) for dest, field in CONFIG_FIELDS.items()}
    values["final_activation"] = args.final_activation
    values.update(overrides)
    try:
        return TrainConfig(**values)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def dataset_from_args(args):
    if args.data is not None:
        return load_dataset(args.data, args.format), {"path": str(args.data), "format": args.format}
    params = {
        "n_nodes": args.sbm_nodes, "n_classes": args.sbm_classes,
        "p_in": args.p_in, "p_out": args.p_out, "feature_dim": args.feature_dim,
        "feature_noise": args.feature_noise, "seed": args.graph_seed,
    }
    try:
        return generate_sbm(**params), {"sbm": params}
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _json_args(args) -> dict:
    out = {}
    for key, value in vars(args).items():
        if key in ("config", "verbose"):
            continue
        out[key] = str(value) if isinstance(value, Path) else value
    return out


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _mean_std(values) -> tuple[float, float]:
    a = np.asarray(values, dtype=np.float64)
    return float(a.mean()), float(a.std())


def table_row(metrics: list[dict]) -> str:
    """Tab-separated ``mean±std`` percentages for ACC, NMI, ARI, F1."""
    cells = []
    for key in ("acc", "nmi", "ari", "f1"):
        mean, std = _mean_std([100.0 * m[key] for m in metrics])
        cells.append(f"{mean:.1f}±{std:.1f}")
    return "\t".join(cells)


def run_seeds(g, cfg: TrainConfig, seeds, out: Path, checkpoint=False) -> dict:
    """Train once per seed under ``out/seed_<s>``; failures are recorded and
    the remaining seeds still run."""
    results = {}
    for seed in seeds:
        run_dir = out / f"seed_{seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        seed_cfg = TrainConfig.from_dict({**cfg.to_dict(), "seed": seed})
        ckpt = run_dir / "encoders.npz" if checkpoint else None
        try:
            res = train(g, seed_cfg, log_path=run_dir / "log.jsonl", checkpoint_path=ckpt)
        except (TrainingError, FloatingPointError) as exc:
            snapshot = getattr(exc, "snapshot", {})
            log.error("seed %d failed: %s", seed, exc)
            results[seed] = {"status": "failed", "error": str(exc), "snapshot": snapshot}
            continue
        entry = {"status": "ok", "epochs": len(res.per_epoch), "per_epoch": res.per_epoch}
        if res.final_metrics is not None:
            entry["metrics"] = {
                "acc": res.final_metrics.acc, "nmi": res.final_metrics.nmi,
                "ari": res.final_metrics.ari, "f1": res.final_metrics.f1,
            }
            entry["best_epoch"] = res.best_epoch
        np.savetxt(run_dir / "assignments.txt", res.final_assignments, fmt="%d")
        results[seed] = entry
    return results


def _write_curves(out: Path, results: dict):
    for name, keys in (("curves.csv", CURVE_KEYS), ("homophily.csv", HOMOPHILY_KEYS)):
        with open(out / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("seed", "epoch") + keys)
            for seed, entry in results.items():
                for row in entry.get("per_epoch", []):
                    w.writerow([seed, row["epoch"]] + [row.get(k, "") for k in keys])


def _plot(out: Path, results: dict):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib not installed; skipping plots")
        return
    ok = [e for e in results.values() if e["status"] == "ok"]
    if not ok:
        return
    rows = ok[0]["per_epoch"]
    epochs = [r["epoch"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(epochs, [r["L_total"] for r in rows], label="total loss")
    ax1.set_xlabel("epoch")
    ax1.legend()
    for key in METRIC_KEYS:
        if key in rows[0]:
            ax2.plot(epochs, [r[key] for r in rows], label=key)
    ax2.set_xlabel("epoch")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out / "curves.png", dpi=120)
    plt.close(fig)
    if "r_h_H" in rows[0]:
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        ax1.plot(epochs, [r["r_h_H"] for r in rows], label="r_h(H)")
        ax1.axhline(rows[0]["r_h_A"], color="gray", linestyle="--", label="r_h(A)")
        ax2.plot(epochs, [r["delta_H"] for r in rows], label="delta(H)")
        ax2.axhline(rows[0]["delta_A"], color="gray", linestyle="--", label="delta(A)")
        for ax in (ax1, ax2):
            ax.set_xlabel("epoch")
            ax.legend()
        fig.tight_layout()
        fig.savefig(out / "homophily.png", dpi=120)
        plt.close(fig)


def _spec(args, dataset, cfg, seeds, **extra) -> dict:
    return {
        "tool": "neucgc", "version": __version__, "command": args.command,
        "dataset": dataset, "config": cfg.to_dict(), "seeds": list(seeds),
        "args": _json_args(args), **extra,
    }


def cmd_stats(args) -> int:
    stats = graph_stats(load_dataset(args.data, args.format))
    if args.header:
        head = ["Nodes", "Edges", "Classes", "Attributes", "r_h", "r_nh", "delta"]
        print("\t".join((["Dataset"] if args.name else []) + head))
    print(stats.row(args.name))
    return EXIT_OK


def cmd_sbm(args) -> int:
    try:
        g = generate_sbm(
            args.nodes, args.classes, args.p_in, args.p_out,
            args.feature_dim, args.feature_noise, args.seed,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    save_graph(g, args.out)
    print(graph_stats(g).row())
    return EXIT_OK


def cmd_train(args) -> int:
    g, dataset = dataset_from_args(args)
    cfg = config_from_args(args)
    if args.repeat < 1:
        raise InputError("--repeat must be >= 1")
    seeds = list(range(args.seed, args.seed + args.repeat))
    out = _require_out(args)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "spec.json", _spec(args, dataset, cfg, seeds))

    results = run_seeds(g, cfg, seeds, out, args.checkpoint)
    _write_curves(out, results)
    ok = [e for e in results.values() if e["status"] == "ok"]
    report = {
        "version": __version__,
        "seeds": {
            str(s): {k: v for k, v in e.items() if k != "per_epoch"} for s, e in results.items()
        },
        "failed": [s for s, e in results.items() if e["status"] != "ok"],
    }
    scored = [e["metrics"] for e in ok if "metrics" in e]
    if scored:
        report["mean"] = {k: _mean_std([m[k] for m in scored])[0] for k in scored[0]}
        report["std"] = {k: _mean_std([m[k] for m in scored])[1] for k in scored[0]}
        row = table_row(scored)
        (out / "table.txt").write_text("ACC\tNMI\tARI\tF1\n" + row + "\n")
        print(row)
    _write_json(out / "report.json", report)
    if args.plot:
        _plot(out, results)
    return EXIT_OK if not report["failed"] else EXIT_TRAIN


def cmd_sweep(args) -> int:
    g, dataset = dataset_from_args(args)
    base = config_from_args(args)
    grid = {
        "lambda1": args.lambda1_grid or [base.lambda1],
        "lambda2": args.lambda2_grid or [base.lambda2],
        "k": args.k_grid or [base.k],
        "dim": args.dim_grid or [base.latent_dim],
    }
    seeds = list(range(args.seed, args.seed + args.repeat))
    out = _require_out(args)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "spec.json", _spec(args, dataset, base, seeds, grid=grid))

    n_ok = n_failed = 0
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell", "lambda1", "lambda2", "k", "dim", "seed", "status", "acc", "nmi", "ari", "f1", "error"])
        cells = itertools.product(grid["lambda1"], grid["lambda2"], grid["k"], grid["dim"])
        for i, (l1, l2, k, dim) in enumerate(cells):
            try:
                cfg = config_from_args(args, lambda1=l1, lambda2=l2, k=k, latent_dim=dim)
                results = run_seeds(g, cfg, seeds, out / f"cell_{i:04d}")
            except InputError as exc:
                results = {s: {"status": "failed", "error": str(exc)} for s in seeds}
            for seed, e in results.items():
                m = e.get("metrics", {})
                ok = e["status"] == "ok"
                n_ok += ok
                n_failed += not ok
                w.writerow([i, l1, l2, k, dim, seed, e["status"]]
                           + [m.get(key, "") for key in ("acc", "nmi", "ari", "f1")]
                           + [e.get("error", "")])
            fh.flush()
    if n_failed == 0:
        return EXIT_OK
    return EXIT_PARTIAL if n_ok else EXIT_TRAIN


COMMANDS = {"stats": cmd_stats, "sbm": cmd_sbm, "train": cmd_train, "sweep": cmd_sweep}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except InputError as exc:
        print(f"neucgc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (InputError, GraphError, OSError) as exc:
        print(f"neucgc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
