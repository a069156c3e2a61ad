"""Datasets, source-feature conditioning and redundant-feature assembly."""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .gp import evaluate_tree, parse_sexpr, to_sexpr
from .mi import DegenerateFeatureError

__all__ = [
    "DataError",
    "Dataset",
    "ConditioningConfig",
    "RfProvenance",
    "AugmentedDataset",
    "load",
    "load_iris",
    "save",
    "validate_source",
    "condition_source",
    "postprocess_rf",
    "regenerate_rf",
    "rf_names",
    "augment",
    "write_augmented",
    "read_augmented",
    "linear_rf",
]

RF_SUFFIXES = "abcdefghijklmnopqrstuvwxyz"
_DELTA_STREAM = 0x64656C7461


class DataError(ValueError):
    """Input data could not be parsed or violates a dataset invariant."""

    def __init__(self, message: str, row: int | None = None, column: str | int | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


@dataclass(frozen=True, eq=False)
class Dataset:
    """Named continuous features (columns of ``X``) with optional labels."""

    feature_names: tuple
    X: np.ndarray
    labels: np.ndarray | None = None
    label_name: str | None = None

    def __post_init__(self):
        names = tuple(self.feature_names)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {X.shape}")
        if X.shape[1] != len(names):
            raise DataError(f"{len(names)} names for {X.shape[1]} columns")
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate feature names: {dup}")
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels)
            if labels.shape != (X.shape[0],):
                raise DataError("labels must have one entry per instance")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def columns(self) -> list:
        return [self.X[:, j] for j in range(self.n_features)]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.X[:, self.feature_names.index(name)]
        except ValueError:
            raise KeyError(f"unknown feature {name!r}") from None

    def select(self, names) -> "Dataset":
        idx = [self.feature_names.index(n) for n in names]
        return Dataset(tuple(names), self.X[:, idx], self.labels, self.label_name)

    def rows(self, index) -> "Dataset":
        labels = None if self.labels is None else self.labels[index]
        return Dataset(self.feature_names, self.X[index], labels, self.label_name)

    def equals(self, other: "Dataset") -> bool:
        same_labels = (self.labels is None and other.labels is None) or (
            self.labels is not None
            and other.labels is not None
            and np.array_equal(self.labels, other.labels)
        )
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.X, other.X)
            and same_labels
        )


@dataclass(frozen=True)
class ConditioningConfig:
    """Source conditioning settings.

    ``jitter="instance"`` draws one delta per instance from a generator
    seeded by ``delta_seed``, which breaks ties between repeated values.
    ``jitter="value"`` draws one delta per distinct value instead, so equal
    inputs stay equal.
    """

    epsilon: float = 1e-3
    delta_seed: int = 0
    rounding_places: int = 5
    jitter: str = "instance"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.rounding_places < 1:
            raise ValueError("rounding_places must be >= 1")
        if self.jitter not in ("instance", "value"):
            raise ValueError(f"unknown jitter mode {self.jitter!r}")


# -- file formats ---------------------------------------------------------


def _parse_float(text: str, row: int, column) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"non-numeric value {text!r}", row, column) from None
    if not np.isfinite(value):
        raise DataError(f"non-finite value {text!r}", row, column)
    return value


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _load_csv(path: Path, label_col, no_labels: bool) -> Dataset:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataError(f"ragged row: {len(r)} fields, header has {len(header)}", i)
    if len(set(header)) != len(header):
        raise DataError(f"duplicate column names in header of {path}")

    if no_labels:
        label_idx = None
    elif label_col is not None:
        if label_col not in header:
            raise DataError(f"label column {label_col!r} not in header")
        label_idx = header.index(label_col)
    elif not all(_is_number(r[-1]) for r in body):
        # No flag given: a non-numeric last column is taken as the label.
        label_idx = len(header) - 1
    else:
        label_idx = None

    feat_idx = [j for j in range(len(header)) if j != label_idx]
    X = np.empty((len(body), len(feat_idx)))
    for i, r in enumerate(body):
        for out_j, j in enumerate(feat_idx):
            X[i, out_j] = _parse_float(r[j].strip(), i + 2, header[j])
    labels = None
    if label_idx is not None:
        labels = np.array([r[label_idx].strip() for r in body])
    return Dataset(
        tuple(header[j] for j in feat_idx),
        X,
        labels,
        None if label_idx is None else header[label_idx],
    )


def _arff_fields(line: str) -> list:
    return next(csv.reader([line], skipinitialspace=True, quotechar="'"))


def _load_arff(path: Path) -> Dataset:
    attributes = []  # (name, nominal values or None)
    data = []
    in_data = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if in_data:
                if line.startswith("{"):
                    raise DataError("sparse ARFF rows are not supported", lineno)
                data.append((lineno, [f.strip() for f in _arff_fields(line)]))
            elif low.startswith("@relation"):
                continue
            elif low.startswith("@attribute"):
                rest = line[len("@attribute"):].strip()
                if rest.startswith(("'", '"')):
                    q = rest[0]
                    end = rest.index(q, 1)
                    name, kind = rest[1:end], rest[end + 1:].strip()
                else:
                    name, _, kind = rest.partition(" ")
                    kind = kind.strip()
                if kind.startswith("{"):
                    values = [v.strip().strip("'\"") for v in kind.strip("{}").split(",")]
                    attributes.append((name, values))
                elif kind.lower() in ("numeric", "real", "integer"):
                    attributes.append((name, None))
                else:
                    raise DataError(f"unsupported attribute type {kind!r}", lineno, name)
            elif low.startswith("@data"):
                in_data = True
            else:
                raise DataError(f"unexpected header line {line!r}", lineno)
    if not attributes or not data:
        raise DataError(f"{path}: no attributes or no data")
    nominal = [i for i, (_, vals) in enumerate(attributes) if vals is not None]
    if len(nominal) > 1:
        raise DataError("only one nominal (class) attribute is supported")
    label_idx = nominal[0] if nominal else None
    feat_idx = [i for i in range(len(attributes)) if i != label_idx]
    X = np.empty((len(data), len(feat_idx)))
    labels = []
    for i, (lineno, fields) in enumerate(data):
        if len(fields) != len(attributes):
            raise DataError(f"ragged row: {len(fields)} fields", lineno)
        for out_j, j in enumerate(feat_idx):
            X[i, out_j] = _parse_float(fields[j], lineno, attributes[j][0])
        if label_idx is not None:
            value = fields[label_idx].strip("'\"")
            if value not in attributes[label_idx][1]:
                raise DataError(f"undeclared class value {value!r}", lineno)
            labels.append(value)
    return Dataset(
        tuple(attributes[j][0] for j in feat_idx),
        X,
        np.array(labels) if label_idx is not None else None,
        None if label_idx is None else attributes[label_idx][0],
    )


def load(path, format: str | None = None, label_col: str | None = None,
         no_labels: bool = False) -> Dataset:
    """Read a CSV (header row required) or ARFF file.

    For CSV the label column is ``label_col``; without it a non-numeric
    last column is used, unless ``no_labels`` is set.  Every other column
    must be numeric.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt == "arff":
        data = _load_arff(path)
        if no_labels:
            data = Dataset(data.feature_names, data.X)
        return data
    if fmt in ("csv", "txt", ""):
        return _load_csv(path, label_col, no_labels)
    raise DataError(f"unknown format {fmt!r}")


def load_iris() -> Dataset:
    """The 150-instance Iris data (UCI repository version) bundled with the package."""
    with resources.as_file(resources.files("redgp") / "data" / "iris.csv") as p:
        return load(p, label_col="class")


def _fmt(v: float) -> str:
    return repr(float(v))


def save(data: Dataset, path) -> None:
    """Write ``data`` as CSV; floats use shortest round-trip repr."""
    header = list(data.feature_names)
    if data.labels is not None:
        header.append(data.label_name or "class")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(data.n_instances):
            row = [_fmt(v) for v in data.X[i]]
            if data.labels is not None:
                row.append(str(data.labels[i]))
            w.writerow(row)


# -- conditioning ---------------------------------------------------------


def validate_source(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise DataError("source feature must be a 1-D vector with >= 2 values")
    if not np.all(np.isfinite(arr)):
        raise DataError("source feature contains non-finite values")
    if np.ptp(arr) == 0:
        raise DegenerateFeatureError("source feature is constant")
    return arr


def _value_uniforms(values: np.ndarray, seed: int) -> np.ndarray:
    """One U[0,1) draw per value, keyed by (seed, value bits)."""
    out = np.empty(values.shape[0])
    seed &= 0xFFFFFFFFFFFFFFFF
    for i, v in enumerate(values):
        digest = hashlib.blake2b(struct.pack("<Qd", seed, float(v) + 0.0), digest_size=8).digest()
        out[i] = (int.from_bytes(digest, "little") >> 11) * 2.0**-53
    return out


def condition_source(x, cfg: ConditioningConfig | None = None) -> np.ndarray:
    """Scale to [0, 1], add a jitter delta in [0.001 eps, eps], add eps.

    The result lies in (eps, 1 + 2 eps] and is reproducible from
    ``cfg``.  See :class:`ConditioningConfig` for the two jitter modes.
    """
    cfg = cfg or ConditioningConfig()
    arr = validate_source(x)
    lo = arr.min()
    scaled = (arr - lo) / (arr.max() - lo)
    eps = cfg.epsilon
    if cfg.jitter == "value":
        uniq, inverse = np.unique(arr, return_inverse=True)
        u = _value_uniforms(uniq, cfg.delta_seed)[inverse.ravel()]
    else:
        rng = np.random.default_rng([cfg.delta_seed & 0xFFFFFFFFFFFFFFFF, _DELTA_STREAM])
        u = rng.random(arr.shape[0])
    return scaled + (0.001 * eps + (eps - 0.001 * eps) * u) + eps


def postprocess_rf(y, cfg: ConditioningConfig | None = None) -> np.ndarray:
    """Min-max scale a constructed feature to [0, 1] and round half-up."""
    cfg = cfg or ConditioningConfig()
    arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DegenerateFeatureError("constructed feature has non-finite values")
    lo = arr.min()
    with np.errstate(over="ignore"):
        span = arr.max() - lo
    if not (span > 0 and np.isfinite(span)):
        raise DegenerateFeatureError("constructed feature is constant")
    scaled = (arr - lo) / span
    if not np.all(np.isfinite(scaled)):
        raise DegenerateFeatureError("constructed feature cannot be rescaled")
    factor = 10.0**cfg.rounding_places
    out = np.floor(scaled * factor + 0.5) / factor
    if np.ptp(out) == 0:
        raise DegenerateFeatureError("constructed feature is constant after rounding")
    return out


def regenerate_rf(tree, source_original, cfg: ConditioningConfig | None = None) -> np.ndarray:
    """Rebuild a redundant feature column from its tree and source column."""
    if isinstance(tree, str):
        tree = parse_sexpr(tree)
    raw = evaluate_tree(tree, condition_source(source_original, cfg))
    if raw is None:
        raise DegenerateFeatureError(f"tree {to_sexpr(tree)} gives a non-finite output")
    return postprocess_rf(raw, cfg)


def linear_rf(x, alpha: float, beta: float) -> np.ndarray:
    """Naive redundant feature ``alpha * x + beta``."""
    if alpha == 0:
        raise ValueError("alpha = 0 gives a constant feature")
    return alpha * np.asarray(x, dtype=float) + beta


# -- augmentation ---------------------------------------------------------


@dataclass(frozen=True)
class RfProvenance:
    source: str
    tree: str
    fitness: dict | None = None


@dataclass(frozen=True, eq=False)
class AugmentedDataset:
    data: Dataset
    provenance: dict
    sources: tuple = ()
    meta: dict = field(default_factory=dict)

    def lookup(self, rf_name: str) -> RfProvenance:
        return self.provenance[rf_name]


def rf_names(source: str, n: int) -> list:
    if n > len(RF_SUFFIXES):
        raise ValueError(f"at most {len(RF_SUFFIXES)} trees per source")
    return [f"{source}{RF_SUFFIXES[i]}" for i in range(n)]


def augment(data: Dataset, results, cfg: ConditioningConfig | None = None) -> AugmentedDataset:
    """Append the redundant features of ``results`` to ``data``.

    ``results`` maps each source feature name to a run result exposing
    ``best.trees`` and ``best.fitness``.  Columns are the originals in
    their existing order, then the r.fs of each source in turn.  A result
    carrying its own ``config.conditioning`` is regenerated with that;
    otherwise ``cfg`` applies.
    """
    default = cfg or ConditioningConfig()
    missing = [f for f in data.feature_names if f not in results]
    if missing:
        raise DataError(f"no run result for features {missing}")
    names = list(data.feature_names)
    cols = [data.X]
    provenance = {}
    taken = set(names)
    for source in data.feature_names:
        result = results[source]
        best = result.best
        run_cfg = getattr(result, "config", None)
        cfg = getattr(run_cfg, "conditioning", None) or default
        record = best.fitness
        record_dict = record.to_dict() if hasattr(record, "to_dict") else record
        for name, tree in zip(rf_names(source, len(best.trees)), best.trees):
            if name in taken:
                raise DataError(f"r.f name {name!r} clashes with an existing feature")
            taken.add(name)
            values = regenerate_rf(tree, data.column(source), cfg)
            if values.shape[0] != data.n_instances:
                raise DataError("run result length does not match dataset")
            names.append(name)
            cols.append(values[:, None])
            provenance[name] = RfProvenance(source, to_sexpr(tree), record_dict)
    out = Dataset(tuple(names), np.hstack(cols), data.labels, data.label_name)
    return AugmentedDataset(out, provenance, tuple(data.feature_names))


def write_augmented(aug: AugmentedDataset, out_prefix, config: dict | None = None) -> tuple:
    """Write ``<prefix>.csv`` and ``<prefix>.provenance.json``; returns both paths."""
    out_prefix = str(out_prefix)
    if out_prefix.endswith(".csv"):
        out_prefix = out_prefix[:-4]
    csv_path = Path(out_prefix + ".csv")
    prov_path = Path(out_prefix + ".provenance.json")
    save(aug.data, csv_path)
    doc = {
        "schema_version": 1,
        "sources": list(aug.sources),
        "features": {
            name: {"source": p.source, "tree": p.tree, "fitness": p.fitness}
            for name, p in aug.provenance.items()
        },
        "config": config or {},
    }
    doc.update(aug.meta)
    prov_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return csv_path, prov_path


def read_augmented(csv_path, provenance_path=None, label_col: str | None = None) -> AugmentedDataset:
    csv_path = Path(csv_path)
    if provenance_path is None:
        provenance_path = csv_path.with_name(csv_path.name[:-4] + ".provenance.json")
    provenance_path = Path(provenance_path)
    if not provenance_path.exists():
        raise DataError(f"missing provenance file {provenance_path}")
    doc = json.loads(provenance_path.read_text())
    data = load(csv_path, label_col=label_col)
    prov = {
        name: RfProvenance(entry["source"], entry["tree"], entry.get("fitness"))
        for name, entry in doc["features"].items()
    }
    meta = {k: v for k, v in doc.items() if k not in ("features", "sources")}
    return AugmentedDataset(data, prov, tuple(doc.get("sources", ())), meta)
