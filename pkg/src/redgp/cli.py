"""Command-line interface: ``redgp <command> [flags]``.

Commands: augment, mi, rank, select, classify, cluster, plot.  Exit codes
are 0 on success, 1 for usage errors, 2 for data errors and 3 when an
evolution run fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import evaluation as ev
from .dataset import (
    ConditioningConfig,
    DataError,
    augment,
    load,
    read_augmented,
    write_augmented,
)
from .evolution import EvolutionConfig, run
from .fitness import FitnessConfig
from .gp import to_sexpr
from .mi import DegenerateFeatureError, EstimatorConfig, baseline_psi, estimate_mi

SCHEMA_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUN = 0, 1, 2, 3

# Resolved-config keys and their built-in defaults.  A JSON config file
# may set any of them; explicit flags win over the file.
DEFAULTS = {
    "input": None,
    "out": None,
    "seed": 0,
    "label_col": None,
    "no_labels": False,
    "jobs": 1,
    "trees": 5,
    "theta": 0.7,
    "pop": 1024,
    "gens": 50,
    "k_neighbors": 4,
    "epsilon": 1e-3,
    "mi_subsample": None,
    "split": None,
    "wrapper": "knn",
    "k": None,
    "restarts": 30,
}


class UsageError(Exception):
    pass


class RunFailure(Exception):
    def __init__(self, failures: dict):
        super().__init__("; ".join(f"{k}: {v}" for k, v in failures.items()))
        self.failures = failures


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("common")
    g.add_argument("--input", help="dataset file (.csv or .arff)")
    g.add_argument("--out", help="output path or prefix")
    g.add_argument("--config", help="JSON file of settings; flags override it")
    g.add_argument("--seed", type=int)
    g.add_argument("--label-col", dest="label_col")
    g.add_argument("--no-labels", dest="no_labels", action="store_const", const=True)
    g.add_argument("--json", action="store_true", help="machine-readable output")
    g.add_argument("--jobs", type=int, help="worker processes (augment)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="redgp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("augment", help="evolve redundant features for every source feature")
    _common(p)
    p.add_argument("--trees", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--pop", type=int)
    p.add_argument("--gens", type=int)
    p.add_argument("--k-neighbors", dest="k_neighbors", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--mi-subsample", dest="mi_subsample", type=int)
    p.add_argument("--dump-trees", dest="dump_trees", action="store_true")

    p = sub.add_parser("mi", help="normalised pairwise MI of columns")
    _common(p)
    p.add_argument("--cols", help="comma-separated column names (default: all)")
    p.add_argument("--k-neighbors", dest="k_neighbors", type=int)

    p = sub.add_parser("rank", help="rank features by information gain")
    _common(p)

    p = sub.add_parser("select", help="SFFS wrapper feature selection")
    _common(p)
    p.add_argument("--split", help="train,validation,test fractions (default 60,20,20)")
    p.add_argument("--wrapper", choices=("knn", "nb"))
    p.add_argument("--k", type=int, help="neighbours of the k-NN wrapper (default 3)")

    p = sub.add_parser("classify", help="k-NN and naive Bayes test accuracy")
    _common(p)
    p.add_argument("--split", help="train,test or train,validation,test (default 70,30)")
    p.add_argument("--k", type=int, help="neighbours of k-NN (default 3)")

    p = sub.add_parser("cluster", help="k-means++ clustering scored by ARI")
    _common(p)
    p.add_argument("--k", type=int, help="clusters (default: number of label values)")
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("plot", help="scatter data and SVGs of source vs r.f")
    _common(p)
    p.add_argument("--provenance", help="provenance JSON (default: next to --input)")
    p.add_argument("--jitter", type=float, default=0.0,
                   help="rendering jitter as a fraction of the axis (SVG only)")
    p.add_argument("--k-neighbors", dest="k_neighbors", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Built-in defaults, then the ``--config`` file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise UsageError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["input"] is None:
        raise UsageError("--input is required")
    if cfg["jobs"] < 1:
        raise UsageError("--jobs must be >= 1")
    return cfg


def _split(cfg: dict, default: str) -> ev.SplitSpec:
    text = cfg["split"] or default
    if isinstance(text, (list, tuple)):
        text = ",".join(str(v) for v in text)
    try:
        return ev.SplitSpec.parse(str(text), cfg["seed"])
    except ValueError as exc:
        raise UsageError(f"bad --split {text!r}: {exc}") from exc


def _load(cfg: dict):
    return load(cfg["input"], label_col=cfg["label_col"], no_labels=cfg["no_labels"])


def _estimator(cfg: dict) -> EstimatorConfig:
    return EstimatorConfig(k_neighbors=cfg["k_neighbors"])


def feature_seed(seed: int, index: int) -> int:
    """Independent per-feature seed derived from the run seed."""
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, index])
    return int(ss.generate_state(1, np.uint64)[0])


def evolution_config(cfg: dict, seed: int) -> EvolutionConfig:
    try:
        return EvolutionConfig(
            population_size=cfg["pop"],
            generations=cfg["gens"],
            seed=seed,
            mi_subsample=cfg["mi_subsample"],
            fitness=FitnessConfig(theta=cfg["theta"], n_trees=cfg["trees"],
                                  estimator=_estimator(cfg)),
            conditioning=ConditioningConfig(epsilon=cfg["epsilon"], delta_seed=seed),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _run_one(job):
    name, values, ecfg = job
    try:
        return name, run(values, ecfg, source=name), None
    except Exception as exc:  # reported per feature
        return name, None, f"{type(exc).__name__}: {exc}"


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _envelope(command: str, cfg: dict, **body) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg, **body}


def cmd_augment(args, cfg: dict) -> int:
    if not cfg["out"]:
        raise UsageError("augment needs --out")
    data = _load(cfg)
    jobs = []
    for j, name in enumerate(data.feature_names):
        jobs.append((name, data.X[:, j].copy(), evolution_config(cfg, feature_seed(cfg["seed"], j))))
    if cfg["jobs"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg["jobs"], len(jobs))) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(job) for job in jobs]
    failures = {name: err for name, _, err in outcomes if err is not None}
    if failures:
        raise RunFailure(failures)
    results = {name: res for name, res, _ in outcomes}
    aug = augment(data, results)
    runs = {name: res.to_dict(with_timing=False) for name, res in results.items()}
    aug = replace(aug, meta={"runs": runs})
    csv_path, prov_path = write_augmented(aug, cfg["out"], cfg)

    summary = []
    for name in data.feature_names:
        rec = results[name].best.fitness
        summary.append({
            "source": name,
            "fitness": rec.fitness if rec else None,
            "min_source_mi": rec.min_source_mi if rec else None,
            "max_shared_mi": rec.max_shared_mi if rec else None,
            "feasible": rec.feasible if rec else False,
            "trees": [to_sexpr(t) for t in results[name].best.trees],
        })
    lines = [f"{'source':<10} {'fitness':>9} {'minSrc':>8} {'maxShared':>9}  feasible"]
    for row in summary:
        lines.append(f"{row['source']:<10} {row['fitness']:>9.4f} {row['min_source_mi']:>8.4f} "
                     f"{row['max_shared_mi']:>9.4f}  {row['feasible']}")
        if args.dump_trees:
            lines += [f"    {t}" for t in row["trees"]]
    lines.append(f"wrote {csv_path} ({aug.data.n_features} features) and {prov_path}")
    _emit(args, _envelope("augment", cfg, features=summary, csv=str(csv_path),
                          provenance=str(prov_path), n_features=aug.data.n_features), "\n".join(lines))
    return EXIT_OK


def mi_matrix(data, names, est: EstimatorConfig):
    """Ψ per column and the matrix MI(i, j) / Ψ_i."""
    cols = [data.column(n) for n in names]
    psi = [baseline_psi(c, est) for c in cols]
    m = [[estimate_mi(a, b, est) / psi[i] for b in cols] for i, a in enumerate(cols)]
    return psi, m


def cmd_mi(args, cfg: dict) -> int:
    data = _load(cfg)
    names = [c.strip() for c in args.cols.split(",")] if args.cols else list(data.feature_names)
    unknown = [n for n in names if n not in data.feature_names]
    if unknown:
        raise DataError(f"unknown column(s) {', '.join(unknown)}")
    psi, m = mi_matrix(data, names, _estimator(cfg))
    width = max(max(len(n) for n in names), 6)
    lines = [" " * width + "".join(f"  {n:>{width}}" for n in names)]
    for n, row in zip(names, m):
        lines.append(f"{n:<{width}}" + "".join(f"  {v:>{width}.4f}" for v in row))
    lines.append(f"{'psi':<{width}}" + "".join(f"  {p:>{width}.4f}" for p in psi))
    _emit(args, _envelope("mi", cfg, columns=names, psi=psi, matrix=m), "\n".join(lines))
    return EXIT_OK


def cmd_rank(args, cfg: dict) -> int:
    report = ev.rank_features(_load(cfg))
    _emit(args, _envelope("rank", cfg, **report.to_dict()), report.as_text())
    return EXIT_OK


def cmd_select(args, cfg: dict) -> int:
    report = ev.sffs(_load(cfg), _split(cfg, "60,20,20"), cfg["wrapper"], cfg["k"] or 3)
    _emit(args, _envelope("select", cfg, **report.to_dict()), report.as_text())
    return EXIT_OK


def cmd_classify(args, cfg: dict) -> int:
    report = ev.classify_report(_load(cfg), _split(cfg, "70,30"), cfg["k"] or 3)
    _emit(args, _envelope("classify", cfg, **report.to_dict()), report.as_text())
    return EXIT_OK


def cmd_cluster(args, cfg: dict) -> int:
    data = _load(cfg)
    if data.labels is None:
        raise DataError("clustering needs ground-truth labels for the ARI")
    k = cfg["k"] or int(np.unique(data.labels).shape[0])
    if k > data.n_instances:
        raise DataError(f"k={k} exceeds the {data.n_instances} instances")
    report = ev.kmeans_ari(data, k, cfg["restarts"], cfg["seed"])
    _emit(args, _envelope("cluster", cfg, **report.to_dict()), report.as_text())
    return EXIT_OK


def scatter_svg(xs, ys, xlabel: str, ylabel: str, jitter: float = 0.0, seed: int = 0,
                size: int = 320) -> str:
    """Minimal standalone SVG scatter plot."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)

    def unit(v):
        span = v.max() - v.min()
        return (v - v.min()) / span if span > 0 else np.full_like(v, 0.5)

    u, w = unit(xs), unit(ys)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        u = u + rng.uniform(-jitter, jitter, u.shape)
        w = w + rng.uniform(-jitter, jitter, w.shape)
    pad = 40
    inner = size - 2 * pad
    px = pad + u * inner
    py = size - pad - w * inner
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect x="{pad}" y="{pad}" width="{inner}" height="{inner}" fill="none" stroke="black"/>']
    out += [f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2" fill-opacity="0.5"/>' for a, b in zip(px, py)]
    out.append(f'<text x="{size / 2}" y="{size - 10}" text-anchor="middle" '
               f'font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{size / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 14 {size / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args, cfg: dict) -> int:
    if not cfg["out"]:
        raise UsageError("plot needs --out (a directory)")
    aug = read_augmented(cfg["input"], args.provenance, label_col=cfg["label_col"])
    run_est = aug.meta.get("config", {}).get("k_neighbors")
    est = EstimatorConfig(k_neighbors=args.k_neighbors or run_est or DEFAULTS["k_neighbors"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    data = aug.data
    labels = data.labels if data.labels is not None else np.full(data.n_instances, "", dtype=object)
    psi_cache: dict = {}
    written = []
    for rf, prov in aug.provenance.items():
        src = data.column(prov.source)
        y = data.column(rf)
        if prov.source not in psi_cache:
            psi_cache[prov.source] = baseline_psi(src, est)
        mi = estimate_mi(src, y, est) / psi_cache[prov.source]
        stem = out / f"{prov.source}_{rf}"
        with open(stem.with_suffix(".csv"), "w") as fh:
            fh.write(f"{prov.source},{rf},label\n")
            for a, b, lab in zip(src, y, labels):
                fh.write(f"{a!r},{b!r},{lab}\n")
        stem.with_suffix(".svg").write_text(
            scatter_svg(src, y, prov.source, f"{rf} (MI={mi:.2f})", args.jitter, cfg["seed"]))
        written.append({"source": prov.source, "rf": rf, "mi": mi,
                        "csv": str(stem.with_suffix(".csv")), "svg": str(stem.with_suffix(".svg"))})
    text = "\n".join(f"{w['rf']:<8} MI={w['mi']:.2f}  {w['svg']}" for w in written)
    _emit(args, _envelope("plot", cfg, plots=written), text)
    return EXIT_OK


COMMANDS = {
    "augment": cmd_augment,
    "mi": cmd_mi,
    "rank": cmd_rank,
    "select": cmd_select,
    "classify": cmd_classify,
    "cluster": cmd_cluster,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"redgp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RunFailure as exc:
        print("redgp: evolution failed for:", file=sys.stderr)
        for name, err in exc.failures.items():
            print(f"  {name}: {err}", file=sys.stderr)
        return EXIT_RUN
    except (DataError, DegenerateFeatureError, OSError, KeyError, ValueError) as exc:
        print(f"redgp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
