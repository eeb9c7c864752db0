"""End-to-end screening pipeline: ingest through estimate.

Every stage writes its artifacts before the next starts, so a failed run
leaves the completed stages' outputs on disk. One master seed drives sampling,
cross-validation folds, and Monte Carlo draws.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import annotation, estimator, logit
from .features import (
    FeatureConfig,
    FeatureMatrix,
    build_matrix,
    robust_normalize,
    standardize,
)
from .graph import build_graph, ego, eligible_directors, independent_companies
from .ingest import OffshoreLeaksIndex, parse_registry
from .knn import build_index, flag_candidates, flagged_set, flags_to_csv, licensed_recall
from .names import NameSimilarity
from .population import build_population, parse_register_csv


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"pipeline stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    input_dir: str
    output_dir: str
    seed: int = 0
    k: int = 100
    min_support: int = 3
    min_positions: int = 3
    logit_threshold: float = 0.01
    logit_folds: int = 5
    logit_lambda: float | None = None  # None -> cross-validate
    trigram_threshold: float = 0.90
    strict_iib: bool = True
    sample_size: int = 100
    n_mc: int = 1_000_000
    annotation_log: str | None = None
    truth_labels: str | None = None
    feature_config: str | None = None
    nn_counts: tuple[int, int, int] | None = None  # (tp, fp, n_candidates)
    logit_counts: tuple[int, int, int] | None = None

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        for key in ("nn_counts", "logit_counts"):
            if raw.get(key) is not None:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass
class PipelineState:
    """Objects handed from stage to stage."""
    graph: object = None
    population: object = None
    leaks: OffshoreLeaksIndex | None = None
    names: NameSimilarity | None = None
    matrix_raw: FeatureMatrix | None = None
    matrix_std: FeatureMatrix | None = None
    scaling: object = None
    nn_results: list = field(default_factory=list)
    nn_flagged: set = field(default_factory=set)
    model: logit.LogitModel | None = None
    probabilities: dict = field(default_factory=dict)
    logit_flagged: set = field(default_factory=set)
    samples: dict = field(default_factory=dict)  # source -> [director ids]


def _read(path: Path):
    return open(path, encoding="utf-8")


def stage_ingest(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    inp = Path(cfg.input_dir)
    with _read(inp / "companies.csv") as c, _read(inp / "directorships.csv") as d, \
            _read(inp / "events.csv") as e:
        companies, directorships, events, report = parse_registry(c, d, e)
    state.graph = build_graph(companies, directorships, events)
    state.leaks = OffshoreLeaksIndex.from_files(
        inp / "leaks_addresses.txt", inp / "leaks_companies.txt",
        inp / "leaks_officers.txt")
    (out / "parse_report.jsonl").write_text(report.to_jsonl(), encoding="utf-8")


def stage_graph(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    g = state.graph
    g.export_jsonl(out / "nodes.jsonl", out / "edges.jsonl")
    doc = {"node_counts": g.node_counts(),
           "dropped_directorships": g.report.dropped_directorships,
           "dropped_events": g.report.dropped_events,
           "unparseable_addresses": g.report.unparseable_addresses}
    (out / "graph_report.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def stage_population(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    with _read(Path(cfg.input_dir) / "register.csv") as fh:
        register = parse_register_csv(fh)
    state.population = build_population(
        register, state.graph, name_threshold=cfg.trigram_threshold,
        min_positions=cfg.min_positions, strict_thresholds=cfg.strict_iib)
    (out / "population.jsonl").write_text(state.population.to_jsonl(), encoding="utf-8")


def stage_features(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    g = state.graph
    pop = state.population
    universe = sorted(eligible_directors(g, cfg.min_positions)
                      | (set(pop.licensed_directors) & set(g.positions)))
    all_names = sorted({g.directors[d].name for d in g.directors}
                       | {r.name for r in g.companies.values()})
    state.names = NameSimilarity(all_names)
    config = (FeatureConfig.from_file(cfg.feature_config)
              if cfg.feature_config else FeatureConfig())
    state.matrix_raw = build_matrix(g, universe, pop, state.leaks, state.names, config)
    state.matrix_std, state.scaling = standardize(state.matrix_raw)
    robust = robust_normalize(state.matrix_raw, state.scaling)
    (out / "features.csv").write_text(state.matrix_raw.to_csv(), encoding="utf-8")
    (out / "features_std.csv").write_text(state.matrix_std.to_csv(), encoding="utf-8")
    (out / "features_robust.csv").write_text(robust.to_csv(), encoding="utf-8")
    (out / "scaling.json").write_text(
        json.dumps(state.scaling.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")


def stage_flag_knn(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    licensed = set(state.population.licensed_directors) & set(state.matrix_std.director_ids)
    idx = build_index(state.matrix_std)
    state.nn_results = flag_candidates(idx, licensed, k=cfg.k, min_support=cfg.min_support)
    state.nn_flagged = flagged_set(state.nn_results)
    (out / "flags_nn.csv").write_text(flags_to_csv(state.nn_results), encoding="utf-8")


def stage_fit_logit(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    m = state.matrix_std
    pop = state.population
    index = {d: i for i, d in enumerate(m.director_ids)}
    positives = sorted(set(pop.licensed_directors) & set(index))
    negatives = sorted(pop.negatives & set(index))
    if not positives or not negatives:
        raise ValueError("logit needs both licensed and negative directors")
    rows = np.vstack([m.values[[index[d] for d in positives]],
                      m.values[[index[d] for d in negatives]]])
    labels = np.concatenate([np.ones(len(positives)), np.zeros(len(negatives))])
    ts = logit.TrainingSet(rows, labels, positives + negatives)
    lam = cfg.logit_lambda
    if lam is None:
        lam = logit.cross_validate_lambda(ts, logit.default_lambda_grid(),
                                          folds=cfg.logit_folds, seed=cfg.seed)
    state.model = logit.fit(ts, lam)
    probs = logit.predict_proba(state.model, m.values)
    state.probabilities = dict(zip(m.director_ids, probs.tolist()))
    licensed = set(pop.licensed_directors)
    state.logit_flagged, confusion = logit.flag_by_threshold(
        state.probabilities, cfg.logit_threshold,
        exclude=licensed | state.nn_flagged, knn_flagged=state.nn_flagged)
    doc = state.model.to_dict()
    doc["scaling"] = state.scaling.to_dict()
    doc["confusion_vs_knn"] = confusion
    (out / "model.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    lines = ["director_id,probability,flagged_new"]
    for did in m.director_ids:
        lines.append(f"{did},{format(state.probabilities[did], '.12g')},"
                     f"{int(did in state.logit_flagged)}")
    (out / "flags_logit.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def stage_sample(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    state.samples = {
        annotation.SOURCE_NN: annotation.sample_for_annotation(
            state.nn_flagged, cfg.sample_size, cfg.seed),
        annotation.SOURCE_LOGIT: annotation.sample_for_annotation(
            state.logit_flagged, cfg.sample_size, cfg.seed + 1),
    }
    for source, name in ((annotation.SOURCE_NN, "samples_nn.csv"),
                         (annotation.SOURCE_LOGIT, "samples_logit.csv")):
        (out / name).write_text(
            "director_id\n" + "".join(d + "\n" for d in state.samples[source]),
            encoding="utf-8")


def _truth_roles(path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return {row["director_id"]: row["role"] for row in csv.DictReader(fh)}


def _counts_for(cfg: PipelineConfig, state: PipelineState, source: str,
                n_candidates: int) -> annotation.AnnotationCounts:
    explicit = cfg.nn_counts if source == annotation.SOURCE_NN else cfg.logit_counts
    if explicit is not None:
        tp, fp, n = explicit
        return annotation.AnnotationCounts(tp=tp, fp=fp, unknown=0,
                                           n_candidates=n, source=source)
    sample = state.samples[source]
    if cfg.annotation_log is not None:
        store = annotation.AnnotationStore(cfg.annotation_log)
        labels = store.labels(sample)
        return annotation.counts(labels, n_candidates, source)
    if cfg.truth_labels is not None:
        roles = _truth_roles(cfg.truth_labels)
        labels = {d: (annotation.LABEL_CSP if roles.get(d) == "illegal"
                      else annotation.LABEL_NON_CSP) for d in sample}
        return annotation.counts(labels, n_candidates, source)
    raise ValueError("estimate needs explicit counts, an annotation log, "
                     "or a ground-truth labels file")


def _licensed_tallies(state: PipelineState) -> dict[str, float]:
    g = state.graph
    licensed = sorted(set(state.population.licensed_directors) & set(g.positions))
    positions = companies = 0
    independents: set[str] = set()
    for did in licensed:
        current = g.current_companies(did)
        positions += len(current)
        companies += len(set(current))
        independents |= independent_companies(g, ego(g, did))
    return {"directors": float(len(licensed)), "positions": float(positions),
            "companies": float(companies), "independents": float(len(independents))}


def _flagged_averages(state: PipelineState) -> dict[str, float]:
    g = state.graph
    flagged = sorted(state.nn_flagged | state.logit_flagged)
    if not flagged:
        return {"positions": 0.0, "companies": 0.0, "independents": 0.0}
    positions = companies = independents = 0
    for did in flagged:
        current = g.current_companies(did)
        positions += len(current)
        companies += len(set(current))
        independents += len(independent_companies(g, ego(g, did)))
    n = len(flagged)
    return {"positions": positions / n, "companies": companies / n,
            "independents": independents / n}


def stage_estimate(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    per_source = []
    for source, candidates in ((annotation.SOURCE_NN, state.nn_flagged),
                               (annotation.SOURCE_LOGIT, state.logit_flagged)):
        counts = _counts_for(cfg, state, source, len(candidates))
        per_source.append(estimator.beta_posterior(counts))
    combined = estimator.combine(per_source, n_mc=cfg.n_mc, seed=cfg.seed)
    tallies = _licensed_tallies(state)
    averages = _flagged_averages(state)
    shares = estimator.market_share(
        combined,
        licensed_directors=int(tallies["directors"]),
        licensed_positions=tallies["positions"],
        licensed_companies=tallies["companies"],
        licensed_independents=tallies["independents"],
        avg_positions_per_flagged=averages["positions"],
        avg_companies_per_flagged=averages["companies"],
        avg_independents_per_flagged=averages["independents"],
    )
    (out / "estimate.json").write_text(
        estimator.estimate_to_json(per_source, combined, shares), encoding="utf-8")


def stage_evaluate(cfg: PipelineConfig, state: PipelineState, out: Path) -> None:
    """Planted-truth scorecard; runs only when a labels file is supplied."""
    if cfg.truth_labels is None:
        return
    roles = _truth_roles(cfg.truth_labels)
    licensed_truth = {d for d, r in roles.items() if r == "licensed"}
    illegal_truth = {d for d, r in roles.items() if r == "illegal"}
    support = {r.director_id: r.support for r in state.nn_results}
    licensed_found = {d for d in licensed_truth if support.get(d, 0) >= cfg.min_support}
    illegal_found = illegal_truth & state.nn_flagged
    doc = {
        "licensed_planted": len(licensed_truth),
        "licensed_recovered": len(licensed_found),
        "licensed_recall": (len(licensed_found) / len(licensed_truth)
                            if licensed_truth else 0.0),
        "illegal_planted": len(illegal_truth),
        "illegal_flagged_nn": len(illegal_found),
        "illegal_recall_nn": (len(illegal_found) / len(illegal_truth)
                              if illegal_truth else 0.0),
        "illegal_flagged_either": len(illegal_truth & (state.nn_flagged | state.logit_flagged)),
    }
    (out / "evaluation.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


STAGES = (
    ("ingest", stage_ingest),
    ("build-graph", stage_graph),
    ("population", stage_population),
    ("features", stage_features),
    ("flag-knn", stage_flag_knn),
    ("fit-logit", stage_fit_logit),
    ("sample", stage_sample),
    ("estimate", stage_estimate),
    ("evaluate", stage_evaluate),
)


def run_pipeline(cfg: PipelineConfig) -> PipelineState:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    state = PipelineState()
    for name, stage in STAGES:
        try:
            stage(cfg, state, out)
        except Exception as exc:
            raise StageError(name, exc) from exc
    return state
