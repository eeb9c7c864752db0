import csv
import io

import numpy as np
import pytest

from cspscreen.features import FEATURE_NAMES, build_matrix
from cspscreen.graph import build_graph, eligible_directors
from cspscreen.ingest import (
    OffshoreLeaksIndex,
    ParseReport,
    parse_companies,
    parse_directorships,
    parse_events,
)
from cspscreen.names import NameSimilarity
from cspscreen.population import CspPopulation, build_population, parse_register_csv
from cspscreen.synth import (
    PROFILE_CONCENTRATED,
    PROFILE_FRAGMENTED,
    PROFILE_FRONTMEN,
    PROFILE_ROTATING,
    SynthConfig,
    synth_generate,
)


def _small_config(**overrides):
    base = dict(seed=7, n_directors=400, n_companies=700, n_addresses=300,
                n_licensed=8, n_illegal=5)
    base.update(overrides)
    return SynthConfig(**base)


class TestDeterminism:
    def test_same_seed_byte_identical(self):
        a = synth_generate(_small_config())
        b = synth_generate(_small_config())
        assert a == b

    def test_different_seed_differs(self):
        a = synth_generate(_small_config(seed=1))
        b = synth_generate(_small_config(seed=2))
        assert a.directorships_csv != b.directorships_csv


class TestConfigValidation:
    def test_minimal_config(self):
        cfg = SynthConfig(seed=0, n_directors=10, n_companies=20,
                          n_addresses=5, n_licensed=1, n_illegal=1)
        bundle = synth_generate(cfg)
        assert bundle.companies_csv.startswith("company_id,")

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            synth_generate(SynthConfig(n_directors=0))
        with pytest.raises(ValueError):
            synth_generate(SynthConfig(n_directors=10, n_licensed=6, n_illegal=5))
        with pytest.raises(ValueError):
            synth_generate(SynthConfig(profile_mix={PROFILE_CONCENTRATED: 0.5}))


class TestParseClean:
    def test_all_files_parse_without_rejections(self):
        bundle = synth_generate(_small_config())
        report = ParseReport()
        companies = parse_companies(io.StringIO(bundle.companies_csv), report)
        directorships = parse_directorships(io.StringIO(bundle.directorships_csv), report)
        events = parse_events(io.StringIO(bundle.events_csv), report)
        assert report.rejections == []
        g = build_graph(companies, directorships, events)
        assert g.report.dropped_directorships == 0

        register = parse_register_csv(io.StringIO(bundle.register_csv))
        assert len(register.entries) >= 1

    def test_labels_cover_all_roles(self):
        bundle = synth_generate(_small_config())
        rows = list(csv.DictReader(io.StringIO(bundle.labels_csv)))
        roles = {r["role"] for r in rows}
        assert roles == {"background", "licensed", "illegal"}
        assert sum(1 for r in rows if r["role"] == "licensed") == 8
        assert sum(1 for r in rows if r["role"] == "illegal") == 5


class TestProfiles:
    @pytest.mark.parametrize("profile", [
        PROFILE_CONCENTRATED, PROFILE_FRAGMENTED, PROFILE_FRONTMEN,
        PROFILE_ROTATING])
    def test_each_profile_generates(self, profile):
        bundle = synth_generate(_small_config(profile_mix={profile: 1.0}))
        rows = list(csv.DictReader(io.StringIO(bundle.labels_csv)))
        illegal = [r for r in rows if r["role"] == "illegal"]
        assert illegal
        assert {r["profile"] for r in illegal} == {profile}

    def test_mixed_profiles(self):
        bundle = synth_generate(_small_config(
            n_illegal=12,
            profile_mix={PROFILE_CONCENTRATED: 0.5, PROFILE_FRONTMEN: 0.5}))
        rows = list(csv.DictReader(io.StringIO(bundle.labels_csv)))
        profiles = {r["profile"] for r in rows if r["role"] == "illegal"}
        assert profiles == {PROFILE_CONCENTRATED, PROFILE_FRONTMEN}


@pytest.fixture(scope="module")
def matrix_and_labels():
    bundle = synth_generate(SynthConfig(
        seed=3, n_directors=600, n_companies=1100, n_addresses=400,
        n_licensed=10, n_illegal=6))
    report = ParseReport()
    companies = parse_companies(io.StringIO(bundle.companies_csv), report)
    directorships = parse_directorships(io.StringIO(bundle.directorships_csv), report)
    events = parse_events(io.StringIO(bundle.events_csv), report)
    g = build_graph(companies, directorships, events)
    register = parse_register_csv(io.StringIO(bundle.register_csv))
    pop = build_population(register, g, min_positions=3)

    labels = {r["director_id"]: r["role"]
              for r in csv.DictReader(io.StringIO(bundle.labels_csv))}
    eligible = eligible_directors(g, 3)
    universe = sorted(eligible | {d for d in labels
                                  if labels[d] != "background" and d in g.directors
                                  and g.position_count(d) >= 3})
    leaks = OffshoreLeaksIndex(
        bundle.leaks_addresses.splitlines(),
        bundle.leaks_companies.splitlines(),
        bundle.leaks_officers.splitlines())
    names = NameSimilarity(sorted(
        {g.directors[d].name for d in g.directors}
        | {c.name for c in g.companies.values()}))
    m = build_matrix(g, universe, pop, leaks, names)
    return m, labels


class TestPlantedSignal:
    """Planted CSP-like directors must stand out on the signature features."""

    def _group_mean(self, m, labels, role, feature):
        col = FEATURE_NAMES.index(feature)
        rows = [i for i, d in enumerate(m.director_ids)
                if labels.get(d) == role]
        assert rows, f"no {role} rows in matrix"
        return float(np.mean(m.values[rows, col]))

    def test_holdings_concentration(self, matrix_and_labels):
        m, labels = matrix_and_labels
        for role in ("licensed", "illegal"):
            planted = self._group_mean(m, labels, role, "pct_holding_6420")
            background = self._group_mean(m, labels, "background", "pct_holding_6420")
            assert planted > background + 0.2, role

    def test_address_concentration(self, matrix_and_labels):
        m, labels = matrix_and_labels
        for role in ("licensed", "illegal"):
            planted = self._group_mean(m, labels, role,
                                       "pct_companies_top_office_address")
            background = self._group_mean(m, labels, "background",
                                          "pct_companies_top_office_address")
            assert planted > background + 0.2, role

    def test_foreign_owner_signal(self, matrix_and_labels):
        m, labels = matrix_and_labels
        planted = self._group_mean(m, labels, "licensed", "pct_foreign_owner")
        background = self._group_mean(m, labels, "background", "pct_foreign_owner")
        assert planted > background

    def test_register_recovers_planted_licensed(self, matrix_and_labels):
        m, labels = matrix_and_labels
        licensed_ids = {d for d, role in labels.items() if role == "licensed"}
        in_matrix = licensed_ids & set(m.director_ids)
        assert len(in_matrix) >= 0.9 * len(licensed_ids)


class TestWrite:
    def test_writes_all_files(self, tmp_path):
        bundle = synth_generate(_small_config())
        bundle.write(tmp_path / "data")
        names = {p.name for p in (tmp_path / "data").iterdir()}
        assert names == {
            "companies.csv", "directorships.csv", "events.csv", "register.csv",
            "leaks_addresses.txt", "leaks_companies.txt", "leaks_officers.txt",
            "labels.csv"}
