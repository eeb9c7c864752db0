"""HTTP API for the annotation console.

Serves the flagged-director review queue, per-director ego payloads, label
submission, live posterior estimates, and the coding handbook. All writes
funnel through a single lock around the append-only annotation log.
"""

from __future__ import annotations

import csv
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import annotation, estimator
from .features import FeatureMatrix
from .graph import EntityGraph, build_graph, ego
from .ingest import OffshoreLeaksIndex, flag_offshore, normalize_text, parse_registry

CODEBOOK = """\
# Coding handbook: is this director a corporate service provider?

Score each flagged director on a 5-point scale.

1. Certainly not a CSP. Companies are the director's own operating businesses.
2. Probably not a CSP. Mostly productive-sector companies, no client pattern.
3. Unknown. Evidence is mixed or insufficient to decide either way.
4. Probably a CSP. Many unrelated holding companies, shared office address,
   director appears to act for third parties.
5. Certainly a CSP. Advertises corporate services, or the structure (dozens of
   client holdings at one address, foreign owners) admits no other reading.

Signals to weigh: number of managed companies, share of 6420 holdings, office
address concentration, foreign and offshore-center owners, corporate keywords
in the director name, offshore-leaks appearances.

Two coders score each director independently. A director counts as a CSP when
both score 4 or 5, as a non-CSP when both score 1 or 2, and as Unknown
otherwise.
"""


@dataclass
class ArtifactBundle:
    """Pipeline inputs and outputs needed to serve the console."""
    graph: EntityGraph
    leaks: OffshoreLeaksIndex
    features_raw: FeatureMatrix
    features_robust: FeatureMatrix
    knn_support: dict[str, int]
    knn_flagged: set[str]
    logit_probability: dict[str, float]
    logit_flagged: set[str]
    licensed_provenance: dict[str, str]
    samples: dict[str, list[str]]  # source -> director ids in queue order
    seed: int = 0
    n_mc: int = 1_000_000
    estimate_path: Path | None = None
    row_raw: dict[str, int] = field(default_factory=dict)
    row_robust: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.row_raw = {d: i for i, d in enumerate(self.features_raw.director_ids)}
        self.row_robust = {d: i for i, d in enumerate(self.features_robust.director_ids)}

    @classmethod
    def load(cls, input_dir, output_dir, seed: int = 0, n_mc: int = 1_000_000) -> "ArtifactBundle":
        inp, out = Path(input_dir), Path(output_dir)
        with open(inp / "companies.csv", encoding="utf-8") as c, \
                open(inp / "directorships.csv", encoding="utf-8") as d, \
                open(inp / "events.csv", encoding="utf-8") as e:
            companies, directorships, events, _report = parse_registry(c, d, e)
        graph = build_graph(companies, directorships, events)
        leaks = OffshoreLeaksIndex.from_files(
            inp / "leaks_addresses.txt", inp / "leaks_companies.txt",
            inp / "leaks_officers.txt")

        with open(out / "features.csv", encoding="utf-8") as fh:
            raw = FeatureMatrix.from_csv(fh)
        with open(out / "features_robust.csv", encoding="utf-8") as fh:
            robust = FeatureMatrix.from_csv(fh)

        support: dict[str, int] = {}
        knn_flagged: set[str] = set()
        with open(out / "flags_nn.csv", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                support[row["director_id"]] = int(row["support"])
                if row["flagged"] == "1":
                    knn_flagged.add(row["director_id"])
        probability: dict[str, float] = {}
        logit_flagged: set[str] = set()
        with open(out / "flags_logit.csv", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                probability[row["director_id"]] = float(row["probability"])
                if row["flagged_new"] == "1":
                    logit_flagged.add(row["director_id"])

        provenance: dict[str, str] = {}
        with open(out / "population.jsonl", encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                if obj.get("role") == "licensed":
                    provenance[obj["director_id"]] = obj["provenance"]

        samples = {}
        for source, name in ((annotation.SOURCE_NN, "samples_nn.csv"),
                             (annotation.SOURCE_LOGIT, "samples_logit.csv")):
            with open(out / name, encoding="utf-8") as fh:
                samples[source] = [row["director_id"] for row in csv.DictReader(fh)]
        return cls(graph=graph, leaks=leaks, features_raw=raw, features_robust=robust,
                   knn_support=support, knn_flagged=knn_flagged,
                   logit_probability=probability, logit_flagged=logit_flagged,
                   licensed_provenance=provenance, samples=samples,
                   seed=seed, n_mc=n_mc, estimate_path=out / "estimate.json")


def _address_id(addr) -> str:
    return f"a:{addr.postcode}:{addr.street_number}"


def director_payload(bundle: ArtifactBundle, director_id: str) -> dict:
    g = bundle.graph
    if director_id not in g.directors:
        raise KeyError(director_id)
    net = ego(g, director_id)
    info = g.directors[director_id]

    nodes = [{"id": f"d:{director_id}", "type": "director", "name": info.name,
              "corporate": info.is_corporate}]
    edges = []
    seen_nodes = {nodes[0]["id"]}

    def add_node(node: dict) -> None:
        if node["id"] not in seen_nodes:
            seen_nodes.add(node["id"])
            nodes.append(node)

    for cid in net.companies:
        record = g.companies[cid]
        add_node({"id": f"c:{cid}", "type": "company", "name": record.name,
                  "legal_form": record.legal_form, "nace": record.nace_code})
        for _d, status, title in g.company_directors.get(cid, ()):
            if _d == director_id:
                edges.append({"source": f"d:{director_id}", "target": f"c:{cid}",
                              "kind": "directorship", "status": status, "title": title})
        for addr, label in ((record.office_address, "Office"),
                            (record.postal_address, "Postal")):
            if addr is not None:
                add_node({"id": _address_id(addr), "type": "address",
                          "street": addr.street, "city": addr.city,
                          "postcode": addr.postcode, "number": addr.street_number})
                edges.append({"source": f"c:{cid}", "target": _address_id(addr),
                              "kind": "located_at", "address_type": label})
        for prev in g.previous_addresses.get(cid, ()):
            if prev.key is not None:
                add_node({"id": _address_id(prev.key), "type": "address",
                          "street": prev.key.street, "city": prev.key.city,
                          "postcode": prev.key.postcode, "number": prev.key.street_number})
                edges.append({"source": f"c:{cid}", "target": _address_id(prev.key),
                              "kind": "located_at", "address_type": "Previous"})
        if record.guo_id is not None:
            add_node({"id": f"o:{record.guo_id}", "type": "owner",
                      "country": record.guo_country})
            edges.append({"source": f"c:{cid}", "target": f"o:{record.guo_id}",
                          "kind": "owned_by"})
        for other, status, title in g.company_directors.get(cid, ()):
            if other != director_id:
                add_node({"id": f"d:{other}", "type": "director",
                          "name": g.directors[other].name,
                          "corporate": g.directors[other].is_corporate})
                edges.append({"source": f"d:{other}", "target": f"c:{cid}",
                              "kind": "directorship", "status": status, "title": title})

    def feature_dict(m: FeatureMatrix, rows: dict[str, int]) -> dict[str, float] | None:
        row = rows.get(director_id)
        if row is None:
            return None
        return dict(zip(m.feature_names, (float(v) for v in m.values[row])))

    offshore = {
        "director": flag_offshore(bundle.leaks, normalize_text(info.name), "Officer"),
        "companies": sorted(
            cid for cid in net.companies
            if flag_offshore(bundle.leaks, normalize_text(g.companies[cid].name), "Company")),
    }
    provenance = {
        "knn": {"support": bundle.knn_support.get(director_id, 0),
                "flagged": director_id in bundle.knn_flagged},
        "logit": {"probability": bundle.logit_probability.get(director_id),
                  "flagged_new": director_id in bundle.logit_flagged},
        "licensed": bundle.licensed_provenance.get(director_id),
    }
    return {
        "director_id": director_id,
        "name": info.name,
        "nodes": nodes,
        "edges": edges,
        "features_raw": feature_dict(bundle.features_raw, bundle.row_raw),
        "features_robust": feature_dict(bundle.features_robust, bundle.row_robust),
        "provenance": provenance,
        "offshore": offshore,
    }


class LabelSubmission(BaseModel):
    director_id: str
    coder_id: str
    score: int
    notes: str | None = None


def compute_estimate(bundle: ArtifactBundle, store: annotation.AnnotationStore) -> dict:
    """Per-source posterior over labels so far, plus the Monte Carlo combination."""
    per_source = []
    for source, candidates in ((annotation.SOURCE_NN, bundle.knn_flagged),
                               (annotation.SOURCE_LOGIT, bundle.logit_flagged)):
        sample = bundle.samples[source]
        labels = {d: store.label_for(d) for d in sample}
        settled = {d: lab for d, lab in labels.items()
                   if lab != annotation.LABEL_PENDING}
        c = annotation.counts(settled, len(candidates), source)
        per_source.append(estimator.beta_posterior(c))
    combined = estimator.combine(per_source, n_mc=bundle.n_mc, seed=bundle.seed)
    return json.loads(estimator.estimate_to_json(per_source, combined))


def create_app(bundle: ArtifactBundle, log_path=None,
               single_coder: bool = False) -> FastAPI:
    app = FastAPI(title="CSP screening annotation API")
    store = annotation.AnnotationStore(log_path, single_coder=single_coder)
    write_lock = threading.Lock()
    app.state.bundle = bundle
    app.state.store = store

    @app.get("/api/queue")
    def queue(source: str = Query(...), coder_id: str = Query(...)):
        key = source.upper()
        if key not in bundle.samples:
            raise HTTPException(400, f"unknown source {source!r}")
        for director_id in bundle.samples[key]:
            if coder_id not in store.coders_for(director_id):
                return {"director_id": director_id, "source": key,
                        "remaining": sum(
                            1 for d in bundle.samples[key]
                            if coder_id not in store.coders_for(d))}
        return {"director_id": None, "source": key, "remaining": 0}

    @app.get("/api/directors/{director_id}")
    def director(director_id: str):
        try:
            return director_payload(bundle, director_id)
        except KeyError:
            raise HTTPException(404, f"unknown director {director_id!r}")

    @app.post("/api/labels")
    def submit(label: LabelSubmission):
        source = None
        for key in (annotation.SOURCE_NN, annotation.SOURCE_LOGIT):
            if label.director_id in bundle.samples[key]:
                source = key
                break
        if source is None:
            raise HTTPException(400, f"director {label.director_id!r} is not in any sample")
        try:
            record = annotation.AnnotationRecord(
                director_id=label.director_id, coder_id=label.coder_id,
                score=label.score, source=source, notes=label.notes)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        with write_lock:
            store.add(record)
        return {"ok": True, "label": store.label_for(label.director_id)}

    @app.get("/api/estimate")
    def estimate():
        return compute_estimate(bundle, store)

    @app.get("/api/export/positives")
    def positives():
        ids = sorted(
            d for d in store.labeled_directors()
            if store.label_for(d) == annotation.LABEL_CSP)
        return {"director_ids": ids}

    @app.get("/api/codebook", response_class=PlainTextResponse)
    def codebook():
        return CODEBOOK

    return app


def serve(input_dir, output_dir, host: str = "127.0.0.1", port: int = 8000,
          seed: int = 0, n_mc: int = 1_000_000, single_coder: bool = False,
          console_dir=None) -> None:
    import uvicorn
    from fastapi.staticfiles import StaticFiles

    bundle = ArtifactBundle.load(input_dir, output_dir, seed=seed, n_mc=n_mc)
    app = create_app(bundle, log_path=Path(output_dir) / "annotations.jsonl",
                     single_coder=single_coder)
    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")
    uvicorn.run(app, host=host, port=port)
