"""End-to-end pipeline runners: single run, training-ratio sweep, dimension sweep.

A run ingests the edge and target CSVs, computes pruned profiles, factorizes
them, derives pair features, then repeats a seeded split/train/evaluate cycle
(replicate seeds are ``split.seed + replicate_index``) and writes artifacts:
the pruned score CSV, the embedding CSV, a metrics JSON with per-replicate and
aggregate numbers, and a manifest (config echo, input hashes, versions).

All artifact bytes are deterministic for fixed config and inputs; the worker
count only chunks the profile computation and never changes results, so it is
deliberately excluded from config and manifest.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import platform
from contextlib import contextmanager
from dataclasses import dataclass, replace

import numpy as np
import scipy

from . import __version__
from .errors import StageError, ValidationError
from .embedding import Embedding, NmfConfig, fit_nmf, write_embedding_csv
from .graph import (
    HeteroGraph,
    PairTable,
    ingest_edges,
    read_edge_csv,
    read_target_csv,
    validate_targets,
)
from .learn import (
    GbmConfig,
    LogRegConfig,
    SplitConfig,
    fit_gbm,
    fit_logreg,
    train_test_split,
)
from .metrics import MetricsReport, evaluate_scores
from .pairs import PairFeatureTable, PairOperator, pair_features
from .ppr import PprConfig, compute_ppr, prune, write_scores_csv

SCORES_CSV = "ppr_scores.csv"
EMBEDDING_CSV = "embedding.csv"
METRICS_JSON = "metrics.json"
MANIFEST_JSON = "manifest.json"
RATIO_SWEEP_CSV = "ratio_sweep.csv"
DIMENSION_SWEEP_CSV = "dimension_sweep.csv"


@dataclass(frozen=True)
class PipelineConfig:
    edges_path: str
    targets_path: str
    out_dir: str
    ppr: PprConfig = PprConfig()
    nmf: NmfConfig = NmfConfig()
    operator: PairOperator = PairOperator.HADAMARD
    classifier: str = "gbm"
    gbm: GbmConfig = GbmConfig()
    logreg: LogRegConfig = LogRegConfig()
    split: SplitConfig = SplitConfig()
    replicates: int = 10

    def __post_init__(self):
        if self.classifier not in ("gbm", "logreg"):
            raise ValidationError(f"classifier must be 'gbm' or 'logreg', got {self.classifier!r}")
        if self.replicates < 1:
            raise ValidationError(f"replicates must be >= 1, got {self.replicates}")


@dataclass
class PipelineResult:
    reports: list[MetricsReport]
    mean: dict[str, float]
    stderr: dict[str, float]
    paths: dict[str, str]


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_to_dict(cfg: PipelineConfig) -> dict:
    return dataclasses.asdict(cfg)


def _dump_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")


def _aggregate(reports: list[MetricsReport]) -> tuple[dict, dict]:
    mean: dict[str, float] = {}
    stderr: dict[str, float] = {}
    for key in ("auroc", "aupr", "f1"):
        values = np.array([getattr(rep, key) for rep in reports], dtype=np.float64)
        mean[key] = float(values.mean())
        stderr[key] = (
            float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
        )
    return mean, stderr


def _fit_for(cfg: PipelineConfig, train: PairFeatureTable):
    if cfg.classifier == "gbm":
        return fit_gbm(train, cfg.gbm)
    return fit_logreg(train, cfg.logreg)


def _prepare_features(
    cfg: PipelineConfig, workers: int, out_dir: str | None
) -> tuple[HeteroGraph, PairTable, PairFeatureTable, Embedding]:
    with _stage("ingest"):
        graph = ingest_edges(read_edge_csv(cfg.edges_path))
    with _stage("targets"):
        targets = validate_targets(graph, read_target_csv(cfg.targets_path))
    with _stage("ppr"):
        scores = compute_ppr(graph.normalized(), cfg.ppr, workers=workers)
    with _stage("prune"):
        pruned = prune(scores, cfg.ppr.top_k)
        if out_dir is not None:
            write_scores_csv(pruned, os.path.join(out_dir, SCORES_CSV))
    with _stage("embed"):
        embedding = fit_nmf(pruned, cfg.nmf)
        if out_dir is not None:
            write_embedding_csv(embedding, os.path.join(out_dir, EMBEDDING_CSV))
    with _stage("features"):
        features = pair_features(embedding, targets, cfg.operator)
    return graph, targets, features, embedding


def _write_manifest(cfg: PipelineConfig, artifacts: dict[str, str]) -> str:
    manifest = {
        "config": config_to_dict(cfg),
        "inputs": {
            "edges": {"path": cfg.edges_path, "sha256": _sha256(cfg.edges_path)},
            "targets": {"path": cfg.targets_path, "sha256": _sha256(cfg.targets_path)},
        },
        "artifacts": artifacts,
        "versions": {
            "pprlink": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    path = os.path.join(cfg.out_dir, MANIFEST_JSON)
    _dump_json(manifest, path)
    return path


def run_pipeline(cfg: PipelineConfig, workers: int = 1) -> PipelineResult:
    """Full run; returns per-replicate reports and their mean/stderr."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    _, _, features, _ = _prepare_features(cfg, workers, cfg.out_dir)

    reports: list[MetricsReport] = []
    with _stage("train-eval"):
        for replicate in range(cfg.replicates):
            split_cfg = replace(cfg.split, seed=cfg.split.seed + replicate)
            train, test = train_test_split(features, split_cfg)
            model = _fit_for(cfg, train)
            scores = model.predict_proba(test.features)
            reports.append(evaluate_scores(scores, test.labels))
    mean, stderr = _aggregate(reports)

    with _stage("write"):
        metrics_payload = {
            "classifier": cfg.classifier,
            "operator": cfg.operator.value,
            "aggregate": {"mean": mean, "stderr": stderr},
            "replicates": [
                {"split_seed": cfg.split.seed + i, **rep.to_dict()}
                for i, rep in enumerate(reports)
            ],
        }
        metrics_path = os.path.join(cfg.out_dir, METRICS_JSON)
        _dump_json(metrics_payload, metrics_path)
        artifacts = {
            "ppr_scores": SCORES_CSV,
            "embedding": EMBEDDING_CSV,
            "metrics": METRICS_JSON,
        }
        manifest_path = _write_manifest(cfg, artifacts)

    return PipelineResult(
        reports=reports,
        mean=mean,
        stderr=stderr,
        paths={
            "ppr_scores": os.path.join(cfg.out_dir, SCORES_CSV),
            "embedding": os.path.join(cfg.out_dir, EMBEDDING_CSV),
            "metrics": metrics_path,
            "manifest": manifest_path,
        },
    )


def _sweep_cells(
    cfg: PipelineConfig,
    features: PairFeatureTable,
    subsample_sizes: dict | None,
) -> list[dict]:
    """Split/train/evaluate both classifiers across replicates.

    ``subsample_sizes`` maps a cell key to the number of training rows drawn
    (a seeded prefix of the shuffled training pool); None trains on the full
    pool. Per-cell validation failures are recorded, never raised.
    """
    cells: list[dict] = []
    for replicate in range(cfg.replicates):
        seed = cfg.split.seed + replicate
        try:
            pool, test = train_test_split(features, replace(cfg.split, seed=seed))
        except ValidationError as exc:
            for key in subsample_sizes or {None: None}:
                for classifier in ("logreg", "gbm"):
                    cells.append(
                        {"key": key, "classifier": classifier, "error": str(exc)}
                    )
            continue
        order = np.random.default_rng([seed, 1]).permutation(len(pool))
        for key, n_train in (subsample_sizes or {None: len(pool)}).items():
            if n_train is None:
                n_train = len(pool)
            if n_train < 1 or n_train > len(pool):
                for classifier in ("logreg", "gbm"):
                    cells.append(
                        {
                            "key": key,
                            "classifier": classifier,
                            "error": f"subsample of {n_train} rows not available from pool of {len(pool)}",
                        }
                    )
                continue
            subset = pool.subset(order[:n_train])
            for classifier, fit in (("logreg", fit_logreg), ("gbm", fit_gbm)):
                config = cfg.logreg if classifier == "logreg" else cfg.gbm
                try:
                    model = fit(subset, config)
                    report = evaluate_scores(model.predict_proba(test.features), test.labels)
                    cells.append(
                        {
                            "key": key,
                            "classifier": classifier,
                            "n_train": n_train,
                            "auroc": report.auroc,
                            "aupr": report.aupr,
                        }
                    )
                except ValidationError as exc:
                    cells.append({"key": key, "classifier": classifier, "error": str(exc)})
    return cells


def _summarize_cells(cells: list[dict], key_name: str) -> list[dict]:
    rows: list[dict] = []
    keys = sorted({cell["key"] for cell in cells})
    for key in keys:
        for classifier in ("logreg", "gbm"):
            matching = [c for c in cells if c["key"] == key and c["classifier"] == classifier]
            ok = [c for c in matching if "error" not in c]
            row: dict = {key_name: key, "classifier": classifier, "replicates_ok": len(ok)}
            if ok:
                for metric in ("auroc", "aupr"):
                    values = np.array([c[metric] for c in ok])
                    row[f"mean_{metric}"] = float(values.mean())
                    row[f"stderr_{metric}"] = (
                        float(values.std(ddof=1) / np.sqrt(values.size))
                        if values.size > 1
                        else 0.0
                    )
                row["n_train"] = int(ok[0]["n_train"])
                row["error"] = ""
            else:
                row.update(
                    mean_auroc=float("nan"),
                    stderr_auroc=float("nan"),
                    mean_aupr=float("nan"),
                    stderr_aupr=float("nan"),
                    n_train=0,
                    error=matching[0]["error"] if matching else "no cells",
                )
            rows.append(row)
    return rows


def _write_sweep_csv(rows: list[dict], key_name: str, path: str) -> None:
    import csv as _csv

    columns = [
        key_name,
        "classifier",
        "n_train",
        "mean_auroc",
        "stderr_auroc",
        "mean_aupr",
        "stderr_aupr",
        "replicates_ok",
        "error",
    ]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = _csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [
                    row[key_name],
                    row["classifier"],
                    row["n_train"],
                    format(row["mean_auroc"], ".17g"),
                    format(row["stderr_auroc"], ".17g"),
                    format(row["mean_aupr"], ".17g"),
                    format(row["stderr_aupr"], ".17g"),
                    row["replicates_ok"],
                    row["error"],
                ]
            )


def run_ratio_sweep(
    cfg: PipelineConfig, ratios: list[int], workers: int = 1
) -> list[dict]:
    """Training-ratio sweep: per permille ratio, train LR and GBM on a seeded
    subsample of the training pool and evaluate on the replicate's fixed test
    side. Ratios count against the full pair table."""
    for ratio in ratios:
        if not 0 < ratio < 1000:
            raise ValidationError(f"ratio must be in (0, 1000) permille, got {ratio}")
    os.makedirs(cfg.out_dir, exist_ok=True)
    _, _, features, _ = _prepare_features(cfg, workers, None)
    total = len(features)
    sizes = {int(r): int(round(total * r / 1000.0)) for r in ratios}
    cells = _sweep_cells(cfg, features, sizes)
    rows = _summarize_cells(cells, "ratio_permille")
    with _stage("write"):
        _write_sweep_csv(rows, "ratio_permille", os.path.join(cfg.out_dir, RATIO_SWEEP_CSV))
    return rows


def run_dimension_sweep(
    cfg: PipelineConfig, dims: list[int], workers: int = 1
) -> list[dict]:
    """Dimension sweep: re-fit the factorization per dimension count and run
    the replicate protocol for LR and GBM on the full training side."""
    for d in dims:
        if d < 1:
            raise ValidationError(f"dimensions must be >= 1, got {d}")
    os.makedirs(cfg.out_dir, exist_ok=True)
    with _stage("ingest"):
        graph = ingest_edges(read_edge_csv(cfg.edges_path))
    with _stage("targets"):
        targets = validate_targets(graph, read_target_csv(cfg.targets_path))
    with _stage("ppr"):
        scores = compute_ppr(graph.normalized(), cfg.ppr, workers=workers)
    with _stage("prune"):
        pruned = prune(scores, cfg.ppr.top_k)
    all_cells: list[dict] = []
    for d in dims:
        with _stage("embed"):
            embedding = fit_nmf(pruned, replace(cfg.nmf, dimensions=int(d)))
        with _stage("features"):
            features = pair_features(embedding, targets, cfg.operator)
        cells = _sweep_cells(cfg, features, None)
        for cell in cells:
            cell["key"] = int(d)
        all_cells.extend(cells)
    rows = _summarize_cells(all_cells, "dimensions")
    with _stage("write"):
        _write_sweep_csv(rows, "dimensions", os.path.join(cfg.out_dir, DIMENSION_SWEEP_CSV))
    return rows
