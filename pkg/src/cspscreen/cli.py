"""Command-line entry points for the screening pipeline."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import annotation, estimator
from .pipeline import STAGES, PipelineConfig, PipelineState, run_pipeline


def _build_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        cfg = PipelineConfig.from_file(args.config)
    else:
        cfg = PipelineConfig(input_dir=args.input, output_dir=args.output)
    for attr, key in (
        ("seed", "seed"), ("k", "k"), ("min_support", "min_support"),
        ("min_positions", "min_positions"), ("threshold", "logit_threshold"),
        ("folds", "logit_folds"), ("trigram_threshold", "trigram_threshold"),
        ("sample_size", "sample_size"), ("truth_labels", "truth_labels"),
        ("annotation_log", "annotation_log"), ("n_mc", "n_mc"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def _run_until(cfg: PipelineConfig, last_stage: str) -> PipelineState:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    state = PipelineState()
    for name, stage in STAGES:
        stage(cfg, state, out)
        if name == last_stage:
            break
    return state


def _add_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="pipeline config JSON (overrides --input/--output)")
    p.add_argument("--input", help="directory with registry CSVs and leak lists")
    p.add_argument("--output", help="artifact directory")
    p.add_argument("--seed", type=int)


def _parse_counts(raw: str) -> tuple[int, int, int]:
    parts = [int(v) for v in raw.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected TP,FP,N_CANDIDATES")
    return tuple(parts)


def _parse_mapping(raw: str) -> dict[int, float]:
    out = {}
    for item in raw.split(","):
        k, v = item.split("=")
        out[int(k)] = float(v)
    return out


def _parse_profile_mix(raw: str) -> dict[str, float]:
    return {k: float(v) for k, v in (item.split("=") for item in raw.split(","))}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cspscreen",
        description="Screening for unlicensed corporate service providers")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, last in (("ingest", "ingest"), ("build-graph", "build-graph"),
                       ("population", "population"), ("features", "features")):
        p = sub.add_parser(name, help=f"run the pipeline through the {name} stage")
        _add_io(p)
        p.set_defaults(last_stage=last)
        if name == "population":
            p.add_argument("--trigram-threshold", type=float, dest="trigram_threshold")

    p = sub.add_parser("flag-knn", help="nearest-neighbor flagging")
    _add_io(p)
    p.add_argument("--k", type=int)
    p.add_argument("--min-support", type=int, dest="min_support")
    p.set_defaults(last_stage="flag-knn")

    p = sub.add_parser("fit-logit", help="penalized logistic regression flagging")
    _add_io(p)
    p.add_argument("--threshold", type=float)
    p.add_argument("--folds", type=int)
    p.set_defaults(last_stage="fit-logit")

    p = sub.add_parser("sample", help="draw annotation samples from the flag sets")
    _add_io(p)
    p.add_argument("--sample-size", type=int, dest="sample_size")
    p.set_defaults(last_stage="sample")

    p = sub.add_parser("estimate", help="Bayesian sector-size estimate")
    _add_io(p)
    p.add_argument("--nn-counts", type=_parse_counts,
                   help="TP,FP,N_CANDIDATES for the NN sample")
    p.add_argument("--logit-counts", type=_parse_counts,
                   help="TP,FP,N_CANDIDATES for the logit sample")
    p.add_argument("--n-mc", type=int, dest="n_mc")
    p.add_argument("--out", help="estimate.json path (standalone counts mode)")

    p = sub.add_parser("extrapolate", help="log-log extrapolation to small directors")
    p.add_argument("--fractions", type=_parse_mapping, required=True,
                   help="k=fraction pairs, e.g. 3=0.02,4=0.015")
    p.add_argument("--population", type=_parse_mapping, required=True,
                   help="k=director-count pairs for k in {1,2}")
    p.add_argument("--tp-rate", type=float, default=1.0)
    p.add_argument("--bound", choices=("UpperBound", "LowerBound"),
                   default="UpperBound")
    p.add_argument("--out")

    p = sub.add_parser("robustness", help="feature-subset robustness sweep")
    _add_io(p)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--fraction", type=float, default=0.8)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--min-supports", default="3,9")

    p = sub.add_parser("synth", help="generate a synthetic registry bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--directors", type=int, default=5000)
    p.add_argument("--companies", type=int, default=9000)
    p.add_argument("--addresses", type=int, default=6000)
    p.add_argument("--licensed", type=int, default=50)
    p.add_argument("--illegal", type=int, default=30)
    p.add_argument("--profiles", type=_parse_profile_mix, default=None,
                   help="profile=weight pairs, e.g. Concentrated=0.7,Frontmen=0.3")

    p = sub.add_parser("serve", help="serve the annotation API and console")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-mc", type=int, default=1_000_000, dest="n_mc")
    p.add_argument("--single-coder", action="store_true")
    p.add_argument("--console", help="directory with the built console assets")

    p = sub.add_parser("run-all", help="run every pipeline stage")
    _add_io(p)
    p.add_argument("--truth-labels", dest="truth_labels")
    p.add_argument("--annotation-log", dest="annotation_log")
    p.add_argument("--nn-counts", type=_parse_counts, dest="nn_counts_arg")
    p.add_argument("--logit-counts", type=_parse_counts, dest="logit_counts_arg")

    p = sub.add_parser("match-names", help="trigram name matching debug tool")
    p.add_argument("--queries", required=True, help="file with one name per line")
    p.add_argument("--targets", required=True)
    p.add_argument("--threshold", type=float, default=0.90)

    args = parser.parse_args(argv)

    if args.command in ("ingest", "build-graph", "population", "features",
                        "flag-knn", "fit-logit", "sample"):
        _run_until(_build_config(args), args.last_stage)
        return 0

    if args.command == "estimate":
        if args.nn_counts and args.logit_counts and not (args.config or args.input):
            seed = args.seed if args.seed is not None else 0
            n_mc = args.n_mc if args.n_mc is not None else 1_000_000
            per_source = []
            for counts, source in ((args.nn_counts, annotation.SOURCE_NN),
                                   (args.logit_counts, annotation.SOURCE_LOGIT)):
                tp, fp, n = counts
                per_source.append(estimator.beta_posterior(annotation.AnnotationCounts(
                    tp=tp, fp=fp, unknown=0, n_candidates=n, source=source)))
            combined = estimator.combine(per_source, n_mc=n_mc, seed=seed)
            doc = estimator.estimate_to_json(per_source, combined)
            if args.out:
                Path(args.out).write_text(doc, encoding="utf-8")
            else:
                sys.stdout.write(doc)
            return 0
        cfg = _build_config(args)
        if args.nn_counts:
            cfg.nn_counts = args.nn_counts
        if args.logit_counts:
            cfg.logit_counts = args.logit_counts
        _run_until(cfg, "estimate")
        return 0

    if args.command == "extrapolate":
        fit = estimator.extrapolate_small(
            args.fractions, {int(k): int(v) for k, v in args.population.items()},
            tp_rate=args.tp_rate, bound_label=args.bound)
        doc = json.dumps(fit.to_dict(), indent=2, sort_keys=True) + "\n"
        if args.out:
            Path(args.out).write_text(doc, encoding="utf-8")
        else:
            sys.stdout.write(doc)
        return 0

    if args.command == "robustness":
        from .features import FeatureMatrix
        from .robustness import robustness_sweep

        cfg = _build_config(args)
        out = Path(cfg.output_dir)
        with open(out / "features.csv", encoding="utf-8") as fh:
            raw = FeatureMatrix.from_csv(fh)
        licensed = set()
        with open(out / "population.jsonl", encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                if obj.get("role") == "licensed":
                    licensed.add(obj["director_id"])
        licensed &= set(raw.director_ids)
        summary = robustness_sweep(
            raw, licensed, n_runs=args.runs, fraction=args.fraction, k=args.k,
            min_supports=tuple(int(v) for v in args.min_supports.split(",")),
            seed=cfg.seed)
        (out / "robustness.json").write_text(summary.to_json(), encoding="utf-8")
        return 0

    if args.command == "synth":
        from .synth import SynthConfig, synth_generate

        kwargs = dict(seed=args.seed, n_directors=args.directors,
                      n_companies=args.companies, n_addresses=args.addresses,
                      n_licensed=args.licensed, n_illegal=args.illegal)
        if args.profiles is not None:
            kwargs["profile_mix"] = args.profiles
        synth_generate(SynthConfig(**kwargs)).write(args.out)
        return 0

    if args.command == "serve":
        from .api import serve

        serve(args.input, args.output, host=args.host, port=args.port,
              seed=args.seed, n_mc=args.n_mc, single_coder=args.single_coder,
              console_dir=args.console)
        return 0

    if args.command == "run-all":
        cfg = _build_config(args)
        if getattr(args, "nn_counts_arg", None):
            cfg.nn_counts = args.nn_counts_arg
        if getattr(args, "logit_counts_arg", None):
            cfg.logit_counts = args.logit_counts_arg
        run_pipeline(cfg)
        return 0

    if args.command == "match-names":
        from .names import match_names

        def read_lines(path):
            with open(path, encoding="utf-8") as fh:
                return [line.rstrip("\n") for line in fh if line.strip()]

        for query, target, sim in match_names(
                read_lines(args.queries), read_lines(args.targets), args.threshold):
            sys.stdout.write(f"{sim:.4f}\t{query}\t{target}\n")
        return 0

    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
