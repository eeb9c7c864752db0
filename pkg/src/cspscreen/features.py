"""Per-director ego-network indicators, scaling, and group means.

Every eligible director gets exactly 48 named values. Percentage features
use the number of currently managed companies as denominator; counts enter
logs as ln(1+n).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .graph import EgoNetwork, EntityGraph, independent_companies
from .ingest import OffshoreLeaksIndex, flag_offshore, normalize_text
from .names import NameSimilarity
from .population import CspPopulation

FEATURE_NAMES: tuple[str, ...] = (
    # directors
    "is_corporate_director",
    "name_contains_corporate_keyword",
    "corporate_director_in_csp_sector",
    "director_in_offshore_leaks",
    # directors + companies
    "corporate_director_shared_directors_with_companies",
    "name_similarity_director_companies",
    "pct_companies_title_director",
    "pct_companies_most_frequent_title",
    "n_shared_directors_between_companies",
    "avg_previous_directors_per_company",
    "pct_companies_previous_licensed_csp",
    # addresses
    "log_companies_top_office_address",
    "log_companies_top_postal_address",
    "pct_companies_top_office_address",
    "pct_companies_top_postal_address",
    "pct_previously_csp_address_augmented",
    "pct_previously_csp_address",
    "n_office_addresses_in_leaks",
    "n_postal_addresses_in_leaks",
    "avg_previous_addresses",
    # companies
    "any_company_csp_sector",
    "log_n_companies",
    "name_similarity_between_companies",
    "pct_finance",
    "pct_holding_6420",
    "pct_real_estate",
    "pct_top_holdings",
    "pct_administrative",
    "pct_unknown_sector",
    "pct_retail_wholesale",
    "pct_construction",
    "pct_top_sector",
    "pct_bv",
    "pct_foundation",
    "pct_vof",
    "pct_cooperative",
    "pct_cv",
    "pct_top_legal_form",
    "n_companies_in_leaks",
    # owners
    "n_directors_also_owners",
    "pct_directors_also_owners",
    "pct_unknown_owner",
    "pct_domestic_owner",
    "pct_foreign_owner",
    "pct_owner_in_ofc",
    # owners + companies
    "log_n_independent_companies",
    "directors_per_independent_company",
    "companies_per_independent_company",
)

N_FEATURES = len(FEATURE_NAMES)

DEFAULT_CORPORATE_KEYWORDS = (
    "b.v.", "n.v.", "holding", "beheer", "management", "trust",
    "services", "administratie",
)

DEFAULT_CSP_DIVISIONS = frozenset({"64", "65", "66", "69", "70", "82"})

# IMF-style small offshore financial centers.
DEFAULT_OFC_COUNTRIES = frozenset({
    "AD", "AG", "AI", "AW", "BB", "BH", "BM", "BS", "BZ", "CK", "CW", "CY",
    "GG", "GI", "GR", "HK", "IM", "JE", "KN", "KY", "LB", "LC", "LI", "LU",
    "MC", "MH", "MO", "MS", "MT", "MU", "NR", "PA", "SC", "SG", "SM", "SX",
    "TC", "VC", "VG", "VU", "WS",
})

DIRECTOR_TITLE_WORDS = ("director", "directeur", "bestuurder")

FINANCE_DIVISIONS = frozenset({"64", "65", "66"})
REAL_ESTATE_DIVISIONS = frozenset({"68"})
ADMIN_DIVISIONS = frozenset({"82"})
RETAIL_DIVISIONS = frozenset({"45", "46", "47"})
CONSTRUCTION_DIVISIONS = frozenset({"41", "42", "43"})


@dataclass(frozen=True)
class FeatureConfig:
    corporate_keywords: tuple[str, ...] = DEFAULT_CORPORATE_KEYWORDS
    csp_divisions: frozenset[str] = DEFAULT_CSP_DIVISIONS
    ofc_countries: frozenset[str] = DEFAULT_OFC_COUNTRIES
    domestic_country: str = "NL"

    @classmethod
    def from_file(cls, path) -> "FeatureConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        kwargs = {}
        if "corporate_keywords" in raw:
            kwargs["corporate_keywords"] = tuple(raw["corporate_keywords"])
        if "csp_divisions" in raw:
            kwargs["csp_divisions"] = frozenset(raw["csp_divisions"])
        if "ofc_countries" in raw:
            kwargs["ofc_countries"] = frozenset(raw["ofc_countries"])
        if "domestic_country" in raw:
            kwargs["domestic_country"] = raw["domestic_country"]
        return cls(**kwargs)


def _in_csp_sector(nace_code: str, division: str, config: FeatureConfig) -> bool:
    return division in config.csp_divisions or nace_code == "6420"


def compute_features(
    g: EntityGraph,
    ego_net: EgoNetwork,
    pop: CspPopulation,
    leaks: OffshoreLeaksIndex,
    names: NameSimilarity,
    config: FeatureConfig = FeatureConfig(),
) -> dict[str, float]:
    """All 48 indicators for one director. Requires >= 1 managed company."""
    companies = ego_net.companies
    n = len(companies)
    if n == 0:
        raise ValueError(f"director {ego_net.center!r} manages no current companies")
    records = [g.companies[cid] for cid in companies]
    info = g.directors[ego_net.center]
    f: dict[str, float] = {}

    # --- director -----------------------------------------------------------
    is_corp = info.is_corporate
    f["is_corporate_director"] = float(is_corp)
    name_lower = info.name.lower()
    f["name_contains_corporate_keyword"] = float(
        any(kw in name_lower for kw in config.corporate_keywords))
    own_entity = g.companies.get(info.director_company_id) if is_corp else None
    f["corporate_director_in_csp_sector"] = float(
        own_entity is not None
        and _in_csp_sector(own_entity.nace_code, own_entity.nace_division, config))
    f["director_in_offshore_leaks"] = float(
        flag_offshore(leaks, normalize_text(info.name), "Officer"))

    # --- directors + companies -----------------------------------------------
    shared_with_own = 0.0
    if is_corp and info.director_company_id in g.company_directors:
        own_individuals = {
            d for d, _s, _t in g.company_directors[info.director_company_id]
            if g.directors[d].director_company_id is None}
        for cid in companies:
            managed = {d for d, _s, _t in g.company_directors.get(cid, ())
                       if d != ego_net.center}
            if own_individuals & managed:
                shared_with_own = 1.0
                break
    f["corporate_director_shared_directors_with_companies"] = shared_with_own

    f["name_similarity_director_companies"] = (
        sum(names.similarity(info.name, r.name) for r in records) / n)

    titles = []
    for cid, status, title in g.positions[ego_net.center]:
        if status == "Current":
            titles.append((title or "").lower())
    f["pct_companies_title_director"] = (
        sum(1 for t in titles if any(w in t for w in DIRECTOR_TITLE_WORDS)) / n)
    modal_title = Counter(titles).most_common(1)[0][1] if titles else 0
    f["pct_companies_most_frequent_title"] = modal_title / n

    # Other directors holding positions in >= 2 of the ego's companies.
    other_counts: Counter[str] = Counter()
    for cid in companies:
        for other, _s, _t in g.company_directors.get(cid, ()):
            if other != ego_net.center:
                other_counts[other] += 1
    f["n_shared_directors_between_companies"] = float(
        sum(1 for c in other_counts.values() if c >= 2))

    prev_dir_counts = []
    prev_licensed = 0
    licensed = set(pop.licensed_directors)
    for cid in companies:
        prev = [d for d, status, _t in g.company_directors.get(cid, ())
                if status == "Previous"]
        prev_dir_counts.append(len(prev))
        if any(d in licensed for d in prev):
            prev_licensed += 1
    f["avg_previous_directors_per_company"] = sum(prev_dir_counts) / n
    f["pct_companies_previous_licensed_csp"] = prev_licensed / n

    # --- addresses -------------------------------------------------------------
    office_counts: Counter = Counter()
    postal_counts: Counter = Counter()
    for r in records:
        if r.office_address is not None:
            office_counts[r.office_address] += 1
        if r.postal_address is not None:
            postal_counts[r.postal_address] += 1
    top_office = office_counts.most_common(1)[0][1] if office_counts else 0
    top_postal = postal_counts.most_common(1)[0][1] if postal_counts else 0
    f["log_companies_top_office_address"] = math.log1p(top_office)
    f["log_companies_top_postal_address"] = math.log1p(top_postal)
    f["pct_companies_top_office_address"] = top_office / n
    f["pct_companies_top_postal_address"] = top_postal / n

    register_addrs = pop.register_addresses()
    all_csp_addrs = pop.all_addresses()
    prev_at_register = 0
    prev_at_any = 0
    prev_addr_counts = []
    for cid in companies:
        prev = g.previous_addresses.get(cid, ())
        prev_addr_counts.append(len(prev))
        keys = {p.key for p in prev if p.key is not None}
        if keys & register_addrs:
            prev_at_register += 1
        if keys & all_csp_addrs:
            prev_at_any += 1
    f["pct_previously_csp_address_augmented"] = prev_at_any / n
    f["pct_previously_csp_address"] = prev_at_register / n

    def leak_address_count(counts: Counter) -> float:
        flagged = 0
        for addr in counts:
            text = normalize_text(f"{addr.street} {addr.street_number} {addr.postcode} {addr.city}")
            if flag_offshore(leaks, text, "Address"):
                flagged += 1
        return float(flagged)

    f["n_office_addresses_in_leaks"] = leak_address_count(office_counts)
    f["n_postal_addresses_in_leaks"] = leak_address_count(postal_counts)
    f["avg_previous_addresses"] = sum(prev_addr_counts) / n

    # --- companies ---------------------------------------------------------------
    divisions = [r.nace_division for r in records]
    f["any_company_csp_sector"] = float(any(
        _in_csp_sector(r.nace_code, d, config) for r, d in zip(records, divisions)))
    f["log_n_companies"] = math.log1p(n)

    if n >= 2:
        total = 0.0
        pairs = 0
        for i in range(n):
            for j in range(i + 1, n):
                total += names.similarity(records[i].name, records[j].name)
                pairs += 1
        f["name_similarity_between_companies"] = total / pairs
    else:
        f["name_similarity_between_companies"] = 0.0

    f["pct_finance"] = sum(1 for d in divisions if d in FINANCE_DIVISIONS) / n
    f["pct_holding_6420"] = sum(1 for r in records if r.nace_code == "6420") / n
    f["pct_real_estate"] = sum(1 for d in divisions if d in REAL_ESTATE_DIVISIONS) / n
    f["pct_top_holdings"] = sum(1 for r in records if r.guo_id is None) / n
    f["pct_administrative"] = sum(1 for d in divisions if d in ADMIN_DIVISIONS) / n
    f["pct_unknown_sector"] = sum(1 for d in divisions if d == "Unknown") / n
    f["pct_retail_wholesale"] = sum(1 for d in divisions if d in RETAIL_DIVISIONS) / n
    f["pct_construction"] = sum(1 for d in divisions if d in CONSTRUCTION_DIVISIONS) / n
    # Unknown counts as its own sector class so the modal share is always >= 1/n.
    f["pct_top_sector"] = Counter(divisions).most_common(1)[0][1] / n

    forms = [r.legal_form for r in records]
    f["pct_bv"] = forms.count("BV") / n
    f["pct_foundation"] = forms.count("Foundation") / n
    f["pct_vof"] = forms.count("VOF") / n
    f["pct_cooperative"] = forms.count("Cooperative") / n
    f["pct_cv"] = forms.count("CV") / n
    f["pct_top_legal_form"] = Counter(forms).most_common(1)[0][1] / n
    f["n_companies_in_leaks"] = float(sum(
        1 for r in records if flag_offshore(leaks, normalize_text(r.name), "Company")))

    # --- owners --------------------------------------------------------------------
    all_directors: set[str] = set()
    for cid in companies:
        for d, _s, _t in g.company_directors.get(cid, ()):
            all_directors.add(d)
    owner_ids = {r.guo_id for r in records if r.guo_id is not None}
    directors_also_owners = {
        d for d in all_directors
        if d in owner_ids or (g.directors[d].director_company_id in owner_ids)}
    f["n_directors_also_owners"] = float(len(directors_also_owners))
    f["pct_directors_also_owners"] = (
        len(directors_also_owners) / len(all_directors) if all_directors else 0.0)

    unknown = domestic = foreign = in_ofc = 0
    for r in records:
        if r.guo_country == "Unknown":
            unknown += 1
        elif r.guo_country == config.domestic_country:
            domestic += 1
        else:
            foreign += 1
            if r.guo_country in config.ofc_countries:
                in_ofc += 1
    f["pct_unknown_owner"] = unknown / n
    f["pct_domestic_owner"] = domestic / n
    f["pct_foreign_owner"] = foreign / n
    f["pct_owner_in_ofc"] = in_ofc / n

    # --- owners + companies ----------------------------------------------------------
    independents = independent_companies(g, ego_net)
    n_indep = len(independents)
    f["log_n_independent_companies"] = math.log1p(n_indep)
    f["directors_per_independent_company"] = len(all_directors) / n_indep
    f["companies_per_independent_company"] = n / n_indep

    assert set(f) == set(FEATURE_NAMES)
    return f


@dataclass
class FeatureMatrix:
    director_ids: list[str]
    values: np.ndarray  # (n_directors, 48)
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def row(self, director_id: str) -> np.ndarray:
        return self.values[self.director_ids.index(director_id)]

    def to_csv(self) -> str:
        lines = ["director_id," + ",".join(self.feature_names)]
        for did, row in zip(self.director_ids, self.values):
            lines.append(did + "," + ",".join(format(v, ".12g") for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, stream) -> "FeatureMatrix":
        import csv
        reader = csv.reader(stream)
        header = next(reader)
        names = tuple(header[1:])
        ids, rows = [], []
        for row in reader:
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
        return cls(director_ids=ids, values=np.array(rows, dtype=float), feature_names=names)


def build_matrix(
    g: EntityGraph,
    director_ids: list[str],
    pop: CspPopulation,
    leaks: OffshoreLeaksIndex,
    names: NameSimilarity,
    config: FeatureConfig = FeatureConfig(),
) -> FeatureMatrix:
    from .graph import ego as ego_fn

    ids = sorted(director_ids)
    values = np.empty((len(ids), N_FEATURES), dtype=float)
    for i, did in enumerate(ids):
        vec = compute_features(g, ego_fn(g, did), pop, leaks, names, config)
        values[i] = [vec[name] for name in FEATURE_NAMES]
    return FeatureMatrix(director_ids=ids, values=values)


@dataclass
class ScalingStats:
    mean: np.ndarray
    std: np.ndarray
    median: np.ndarray
    iqr: np.ndarray

    @property
    def zero_variance_columns(self) -> list[int]:
        return [i for i, s in enumerate(self.std) if s == 0.0]

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(),
                "median": self.median.tolist(), "iqr": self.iqr.tolist()}

    @classmethod
    def from_dict(cls, raw: dict) -> "ScalingStats":
        return cls(mean=np.array(raw["mean"]), std=np.array(raw["std"]),
                   median=np.array(raw["median"]), iqr=np.array(raw["iqr"]))


def compute_scaling(m: FeatureMatrix) -> ScalingStats:
    v = m.values
    q25, q75 = np.quantile(v, [0.25, 0.75], axis=0)
    return ScalingStats(
        mean=v.mean(axis=0),
        std=v.std(axis=0),  # population sd
        median=np.median(v, axis=0),
        iqr=q75 - q25,
    )


def standardize(m: FeatureMatrix, stats: ScalingStats | None = None) -> tuple[FeatureMatrix, ScalingStats]:
    """Per-column z-scores; zero-variance columns become all zeros."""
    if m.values.shape[0] < 2 and stats is None:
        raise ValueError("standardization needs at least 2 rows")
    if stats is None:
        stats = compute_scaling(m)
    std = np.where(stats.std == 0.0, 1.0, stats.std)
    z = (m.values - stats.mean) / std
    z[:, stats.std == 0.0] = 0.0
    return FeatureMatrix(m.director_ids, z, m.feature_names), stats


def robust_normalize(m: FeatureMatrix, stats: ScalingStats | None = None) -> FeatureMatrix:
    """(x - median) / IQR; zero-IQR columns become all zeros."""
    if stats is None:
        stats = compute_scaling(m)
    iqr = np.where(stats.iqr == 0.0, 1.0, stats.iqr)
    r = (m.values - stats.median) / iqr
    r[:, stats.iqr == 0.0] = 0.0
    return FeatureMatrix(m.director_ids, r, m.feature_names)


@dataclass
class GroupMeans:
    groups: list[str]
    means: dict[str, np.ndarray]
    ci_low: dict[str, np.ndarray]
    ci_high: dict[str, np.ndarray]
    skipped_empty: list[str] = field(default_factory=list)


def group_means(m: FeatureMatrix, groups: dict[str, list[str]],
                n_boot: int = 1000, seed: int = 0) -> GroupMeans:
    """Per-group per-feature means with seeded percentile bootstrap CIs."""
    index = {d: i for i, d in enumerate(m.director_ids)}
    rng = np.random.default_rng(seed)
    result = GroupMeans(groups=[], means={}, ci_low={}, ci_high={})
    for name in sorted(groups):
        rows = [index[d] for d in groups[name] if d in index]
        if not rows:
            result.skipped_empty.append(name)
            continue
        sub = m.values[rows]
        result.groups.append(name)
        result.means[name] = sub.mean(axis=0)
        boot = np.empty((n_boot, sub.shape[1]))
        for b in range(n_boot):
            resample = rng.integers(0, len(rows), size=len(rows))
            boot[b] = sub[resample].mean(axis=0)
        result.ci_low[name] = np.quantile(boot, 0.025, axis=0)
        result.ci_high[name] = np.quantile(boot, 0.975, axis=0)
    return result
