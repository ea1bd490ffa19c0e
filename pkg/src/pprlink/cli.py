"""Command line front end.

Subcommands: validate, ppr, embed, features, train, eval, pipeline,
sweep-ratio, sweep-dim, synth. Options mirror the config dataclasses; a JSON
file given with --config supplies defaults that explicit flags override, and
--seed re-seeds every component that was not seeded explicitly.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .errors import StageError, ValidationError
from .embedding import NmfConfig, fit_nmf, read_embedding_csv, write_embedding_csv
from .graph import ingest_edges, read_edge_csv, read_target_csv, validate_targets
from .learn import (
    GbmConfig,
    LogRegConfig,
    SplitConfig,
    fit_gbm,
    fit_logreg,
    load_model,
    save_model,
)
from .metrics import evaluate_scores
from .pairs import (
    PairOperator,
    apply_operator,
    read_feature_csv,
    write_feature_csv,
)
from .pipeline import (
    PipelineConfig,
    run_dimension_sweep,
    run_pipeline,
    run_ratio_sweep,
)
from .ppr import PprConfig, compute_ppr, prune, read_scores_csv, write_scores_csv
from .synth import SynthConfig, write_synthetic


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; explicit flags override it")
    parser.add_argument("--seed", type=int, help="master seed for all components")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for the profile computation")
    parser.add_argument("--out-dir", default=".", help="directory for output artifacts")


def _add_ppr_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, help="return probability")
    parser.add_argument("--iterations", type=int, help="propagation steps")
    parser.add_argument("--top-k", type=int, help="entries kept per drug profile")


def _add_nmf_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dimensions", type=int, help="embedding dimensions")
    parser.add_argument("--max-iter", type=int, help="factorization update sweeps")
    parser.add_argument("--nmf-seed", type=int, help="factorization init seed")


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--operator", choices=[op.value for op in PairOperator], help="pair feature operator")
    parser.add_argument("--classifier", choices=["gbm", "logreg"], help="downstream model")
    parser.add_argument("--gbm-learning-rate", type=float)
    parser.add_argument("--gbm-n-estimators", type=int)
    parser.add_argument("--gbm-max-depth", type=int)
    parser.add_argument("--gbm-min-samples-leaf", type=int)
    parser.add_argument("--lr-learning-rate", type=float)
    parser.add_argument("--lr-iterations", type=int)
    parser.add_argument("--lr-l2", type=float)
    parser.add_argument("--train-fraction", type=float)
    parser.add_argument("--split-seed", type=int)
    parser.add_argument("--replicates", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pprlink",
        description="Drug pair link prediction from pruned personalized-PageRank profiles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check edge and target files")
    _add_common(p)
    p.add_argument("--edges")
    p.add_argument("--targets")

    p = sub.add_parser("ppr", help="compute pruned profiles to CSV")
    _add_common(p)
    p.add_argument("--edges")
    p.add_argument("--out", help="output CSV (default <out-dir>/ppr_scores.csv)")
    _add_ppr_flags(p)

    p = sub.add_parser("embed", help="factorize a score CSV into an embedding CSV")
    _add_common(p)
    p.add_argument("--scores", help="pruned score CSV from the ppr step")
    p.add_argument("--out", help="output CSV (default <out-dir>/embedding.csv)")
    _add_nmf_flags(p)

    p = sub.add_parser("features", help="pair features from an embedding CSV and targets")
    _add_common(p)
    p.add_argument("--embedding")
    p.add_argument("--targets")
    p.add_argument("--out", help="output CSV (default <out-dir>/features.csv)")
    p.add_argument("--operator", choices=[op.value for op in PairOperator])

    p = sub.add_parser("train", help="fit a classifier on every row of a feature CSV")
    _add_common(p)
    p.add_argument("--features")
    p.add_argument("--model-out", help="output JSON (default <out-dir>/model.json)")
    _add_model_flags(p)

    p = sub.add_parser("eval", help="score a feature CSV with a saved model")
    _add_common(p)
    p.add_argument("--features")
    p.add_argument("--model")
    p.add_argument("--out", help="metrics JSON (default <out-dir>/metrics.json)")
    p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("pipeline", help="full run: ingest to metrics")
    _add_common(p)
    p.add_argument("--edges")
    p.add_argument("--targets")
    _add_ppr_flags(p)
    _add_nmf_flags(p)
    _add_model_flags(p)

    p = sub.add_parser("sweep-ratio", help="training-ratio sweep (permille of all pairs)")
    _add_common(p)
    p.add_argument("--edges")
    p.add_argument("--targets")
    p.add_argument("--ratios", default="1,2,3,4,5,6,7,8,9", help="comma-separated permille values")
    _add_ppr_flags(p)
    _add_nmf_flags(p)
    _add_model_flags(p)

    p = sub.add_parser("sweep-dim", help="embedding dimension sweep")
    _add_common(p)
    p.add_argument("--edges")
    p.add_argument("--targets")
    p.add_argument("--dims", default="4,8,16,32,64,128", help="comma-separated dimension counts")
    _add_ppr_flags(p)
    _add_nmf_flags(p)
    _add_model_flags(p)

    p = sub.add_parser("synth", help="generate a planted-community dataset")
    _add_common(p)
    p.add_argument("--communities", type=int)
    p.add_argument("--drugs-per-community", type=int)
    p.add_argument("--genes-per-community", type=int)
    p.add_argument("--drug-gene-p", type=float)
    p.add_argument("--gene-gene-p", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--pairs", type=int)

    return parser


def _load_config_file(args) -> dict:
    if not getattr(args, "config", None):
        return {}
    try:
        with open(args.config, encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read config file {args.config!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {args.config!r} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValidationError(f"config file {args.config!r} must hold a JSON object")
    return payload


def _section(file_cfg: dict, name: str) -> dict:
    section = file_cfg.get(name, {})
    if not isinstance(section, dict):
        raise ValidationError(f"config section {name!r} must be an object")
    return dict(section)


def _build(cls, section: dict, overrides: dict, master_seed=None, seed_field="seed"):
    """Dataclass from file section + flag overrides; master seed fills the gap."""
    values = dict(section)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if master_seed is not None and seed_field in {f.name for f in dataclasses.fields(cls)}:
        if seed_field not in values:
            values[seed_field] = master_seed
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ValidationError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise ValidationError(f"bad {cls.__name__}: {exc}") from exc


def _ppr_config(args, file_cfg: dict) -> PprConfig:
    return _build(
        PprConfig,
        _section(file_cfg, "ppr"),
        {"alpha": args.alpha, "iterations": args.iterations, "top_k": args.top_k},
    )


def _nmf_config(args, file_cfg: dict) -> NmfConfig:
    return _build(
        NmfConfig,
        _section(file_cfg, "nmf"),
        {"dimensions": args.dimensions, "max_iter": args.max_iter, "seed": args.nmf_seed},
        master_seed=args.seed,
    )


def _pipeline_config(args, file_cfg: dict) -> PipelineConfig:
    edges = args.edges or file_cfg.get("edges")
    targets = args.targets or file_cfg.get("targets")
    if not edges or not targets:
        raise ValidationError("both --edges and --targets are required (flag or config file)")
    operator = args.operator or file_cfg.get("operator") or PairOperator.HADAMARD.value
    classifier = args.classifier or file_cfg.get("classifier") or "gbm"
    replicates = args.replicates if args.replicates is not None else file_cfg.get("replicates", 10)
    return PipelineConfig(
        edges_path=edges,
        targets_path=targets,
        out_dir=args.out_dir,
        ppr=_ppr_config(args, file_cfg),
        nmf=_nmf_config(args, file_cfg),
        operator=PairOperator(operator),
        classifier=classifier,
        gbm=_build(
            GbmConfig,
            _section(file_cfg, "gbm"),
            {
                "learning_rate": args.gbm_learning_rate,
                "n_estimators": args.gbm_n_estimators,
                "max_depth": args.gbm_max_depth,
                "min_samples_leaf": args.gbm_min_samples_leaf,
            },
            master_seed=args.seed,
        ),
        logreg=_build(
            LogRegConfig,
            _section(file_cfg, "logreg"),
            {
                "learning_rate": args.lr_learning_rate,
                "iterations": args.lr_iterations,
                "l2": args.lr_l2,
            },
            master_seed=args.seed,
        ),
        split=_build(
            SplitConfig,
            _section(file_cfg, "split"),
            {"train_fraction": args.train_fraction, "seed": args.split_seed},
            master_seed=args.seed,
        ),
        replicates=int(replicates),
    )


def _int_list(raw: str, what: str) -> list[int]:
    try:
        return [int(part) for part in str(raw).split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ValidationError(f"{what} must be comma-separated integers, got {raw!r}") from exc


def _out_path(args, flag: str, default_name: str) -> str:
    explicit = getattr(args, flag, None)
    if explicit:
        return explicit
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, default_name)


def _cmd_validate(args, file_cfg):
    edges = args.edges or file_cfg.get("edges")
    targets = args.targets or file_cfg.get("targets")
    if not edges:
        raise ValidationError("--edges is required")
    graph = ingest_edges(read_edge_csv(edges))
    summary = {
        "nodes": graph.node_count,
        "drugs": graph.drug_count,
        "genes": graph.node_count - graph.drug_count,
        "edges": graph.edge_count,
    }
    if targets:
        table = validate_targets(graph, read_target_csv(targets))
        summary["pairs"] = len(table)
        summary["positives"] = table.n_positive
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_ppr(args, file_cfg):
    edges = args.edges or file_cfg.get("edges")
    if not edges:
        raise ValidationError("--edges is required")
    cfg = _ppr_config(args, file_cfg)
    graph = ingest_edges(read_edge_csv(edges))
    pruned = prune(compute_ppr(graph.normalized(), cfg, workers=args.threads), cfg.top_k)
    out = _out_path(args, "out", "ppr_scores.csv")
    write_scores_csv(pruned, out)
    print(f"wrote {pruned.nnz} scores for {pruned.drug_count} drugs to {out}")
    return 0


def _cmd_embed(args, file_cfg):
    scores = args.scores or file_cfg.get("scores")
    if not scores:
        raise ValidationError("--scores is required")
    cfg = _nmf_config(args, file_cfg)
    embedding = fit_nmf(read_scores_csv(scores), cfg)
    out = _out_path(args, "out", "embedding.csv")
    write_embedding_csv(embedding, out)
    print(f"wrote {len(embedding.drug_ids)}x{embedding.dimensions} embedding to {out}")
    return 0


def _cmd_features(args, file_cfg):
    embedding_path = args.embedding or file_cfg.get("embedding")
    targets_path = args.targets or file_cfg.get("targets")
    if not embedding_path or not targets_path:
        raise ValidationError("--embedding and --targets are required")
    operator = PairOperator(args.operator or file_cfg.get("operator") or PairOperator.HADAMARD.value)
    embedding = read_embedding_csv(embedding_path)
    known = set(embedding.drug_ids)
    rows = read_target_csv(targets_path)
    position = {drug_id: i for i, drug_id in enumerate(embedding.drug_ids)}
    seen: dict[tuple[int, int], int] = {}
    drug_1, drug_2, labels = [], [], []
    for a, b, label in rows:
        if a not in known or b not in known:
            missing = a if a not in known else b
            raise ValidationError(f"pair references drug {missing!r} absent from the embedding")
        key = (min(position[a], position[b]), max(position[a], position[b]))
        if key in seen:
            if seen[key] != label:
                raise ValidationError(f"pair ({a!r}, {b!r}) listed with both labels")
            continue
        seen[key] = label
        drug_1.append(a)
        drug_2.append(b)
        labels.append(label)
    if not drug_1:
        raise ValidationError("no target pairs")
    left = embedding.h[[position[d] for d in drug_1]]
    right = embedding.h[[position[d] for d in drug_2]]
    from .pairs import PairFeatureTable

    table = PairFeatureTable(
        drug_1, drug_2, np.array(labels, dtype=np.int64), apply_operator(operator, left, right), operator
    )
    out = _out_path(args, "out", "features.csv")
    write_feature_csv(table, out)
    print(f"wrote {len(table)} feature rows of width {table.width} to {out}")
    return 0


def _cmd_train(args, file_cfg):
    features_path = args.features or file_cfg.get("features")
    if not features_path:
        raise ValidationError("--features is required")
    table = read_feature_csv(features_path)
    classifier = args.classifier or file_cfg.get("classifier") or "gbm"
    if classifier == "gbm":
        cfg = _build(
            GbmConfig,
            _section(file_cfg, "gbm"),
            {
                "learning_rate": args.gbm_learning_rate,
                "n_estimators": args.gbm_n_estimators,
                "max_depth": args.gbm_max_depth,
                "min_samples_leaf": args.gbm_min_samples_leaf,
            },
            master_seed=args.seed,
        )
        model = fit_gbm(table, cfg)
    elif classifier == "logreg":
        cfg = _build(
            LogRegConfig,
            _section(file_cfg, "logreg"),
            {
                "learning_rate": args.lr_learning_rate,
                "iterations": args.lr_iterations,
                "l2": args.lr_l2,
            },
            master_seed=args.seed,
        )
        model = fit_logreg(table, cfg)
    else:
        raise ValidationError(f"classifier must be 'gbm' or 'logreg', got {classifier!r}")
    out = _out_path(args, "model_out", "model.json")
    save_model(model, out)
    print(f"trained {classifier} on {len(table)} rows, saved to {out}")
    return 0


def _cmd_eval(args, file_cfg):
    features_path = args.features or file_cfg.get("features")
    model_path = args.model or file_cfg.get("model")
    if not features_path or not model_path:
        raise ValidationError("--features and --model are required")
    table = read_feature_csv(features_path)
    model = load_model(model_path)
    report = evaluate_scores(model.predict_proba(table.features), table.labels, args.threshold)
    out = _out_path(args, "out", "metrics.json")
    with open(out, "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, sort_keys=True, indent=2)
        handle.write("\n")
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def _cmd_pipeline(args, file_cfg):
    cfg = _pipeline_config(args, file_cfg)
    result = run_pipeline(cfg, workers=args.threads)
    print(
        f"{cfg.classifier} x{cfg.replicates}: "
        f"auroc {result.mean['auroc']:.4f} +- {result.stderr['auroc']:.4f}, "
        f"aupr {result.mean['aupr']:.4f}, f1 {result.mean['f1']:.4f}"
    )
    print(f"artifacts in {cfg.out_dir}")
    return 0


def _cmd_sweep_ratio(args, file_cfg):
    cfg = _pipeline_config(args, file_cfg)
    rows = run_ratio_sweep(cfg, _int_list(args.ratios, "--ratios"), workers=args.threads)
    for row in rows:
        print(
            f"ratio {row['ratio_permille']:>4} {row['classifier']:>6}: "
            f"auroc {row['mean_auroc']:.4f} ({row['replicates_ok']} ok)"
        )
    return 0


def _cmd_sweep_dim(args, file_cfg):
    cfg = _pipeline_config(args, file_cfg)
    rows = run_dimension_sweep(cfg, _int_list(args.dims, "--dims"), workers=args.threads)
    for row in rows:
        print(
            f"dims {row['dimensions']:>4} {row['classifier']:>6}: "
            f"auroc {row['mean_auroc']:.4f} ({row['replicates_ok']} ok)"
        )
    return 0


def _cmd_synth(args, file_cfg):
    cfg = _build(
        SynthConfig,
        _section(file_cfg, "synth"),
        {
            "communities": args.communities,
            "drugs_per_community": args.drugs_per_community,
            "genes_per_community": args.genes_per_community,
            "drug_gene_p": args.drug_gene_p,
            "gene_gene_p": args.gene_gene_p,
            "noise_p": args.noise,
            "pair_count": args.pairs,
        },
        master_seed=args.seed,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    edges_path = os.path.join(args.out_dir, "edges.csv")
    targets_path = os.path.join(args.out_dir, "targets.csv")
    write_synthetic(cfg, edges_path, targets_path)
    print(f"wrote {edges_path} and {targets_path}")
    return 0


_HANDLERS = {
    "validate": _cmd_validate,
    "ppr": _cmd_ppr,
    "embed": _cmd_embed,
    "features": _cmd_features,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "pipeline": _cmd_pipeline,
    "sweep-ratio": _cmd_sweep_ratio,
    "sweep-dim": _cmd_sweep_dim,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_cfg = _load_config_file(args)
        return _HANDLERS[args.command](args, file_cfg)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc.__cause__, ValidationError) else 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures map to exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
