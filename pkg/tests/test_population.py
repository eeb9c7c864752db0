import io
import json

import pytest

from cspscreen.graph import build_graph
from cspscreen.ingest import AddressKey, CompanyRecord, DirectorshipRecord
from cspscreen.population import (
    ADDRESS_AUGMENTED,
    ADDRESS_REGISTER,
    PROVENANCE_AFFILIATED,
    PROVENANCE_EMPLOYEE,
    PROVENANCE_MATCHED_ID,
    PROVENANCE_NAME_MATCH,
    CspPopulation,
    LicensedRegister,
    RegisterEntry,
    add_employees,
    build_population,
    infer_affiliated,
    match_register,
    parse_register_csv,
    select_negatives,
)

R1 = AddressKey("1111AA", "1")   # register address
R2 = AddressKey("2222BB", "2")   # office of the matched CSP entity
R3 = AddressKey("9999ZZ", "9")   # neutral


def company(cid, nace="4110", office=None, guo=None):
    return CompanyRecord(
        company_id=cid, name=f"Company {cid}", legal_form="B.V.",
        nace_code=nace, office_address=office, postal_address=None,
        po_box=None, guo_id=guo, guo_country="Unknown" if guo is None else "NL",
        turnover=None, assets=None, employees=None, profit=None)


def dship(did, cid, name=None, status="Current", entity=None):
    return DirectorshipRecord(director_id=did, director_name=name or f"Person {did}",
                              director_company_id=entity, company_id=cid,
                              title="Director", status=status)


@pytest.fixture(scope="module")
def graph():
    companies = [
        company("E1", office=R2),              # entity of corporate CSP DC1
        company("B1", office=AddressKey("3333CC", "3"), guo="E1"),  # branch
        company("CE3"), company("CN1"), company("CN2"), company("CN3"),
        # clients of DA: two at the register address, two elsewhere
        company("K1", office=R1), company("K2", office=R1),
        company("K3", office=R3), company("K4", office=R3),
        # clients of DB: both at the augmented CSP address
        company("M1", office=R2), company("M2", office=R2),
        # boundary director DSTRICT: one of four at the register address
        company("S1", office=R1), company("S2", office=R3),
        company("S3", office=R3), company("S4", office=R3),
        # sector-negative material
        company("N1", nace="4110"), company("N2", nace="Unknown"),
        company("P1", nace="6420"), company("P2", nace="4110"),
        company("U1", nace="Unknown"), company("U2", nace="Unknown"),
    ]
    directorships = [
        # DC1 is the corporate CSP embodied by E1; it manages clients.
        dship("DC1", "K1", name="Sempter Fidelis Beheer B.V.", entity="E1"),
        dship("DC1", "M1", name="Sempter Fidelis Beheer B.V.", entity="E1"),
        dship("DC1", "M2", name="Sempter Fidelis Beheer B.V.", entity="E1"),
        dship("DC1", "S1", name="Sempter Fidelis Beheer B.V.", entity="E1"),
        dship("DC2", "K2", name="Sempter Branch B.V.", entity="B1"),
        # staff of E1
        dship("DE1", "E1", name="Anna de Boer"),
        dship("DE2", "E1", name="Joost Visser", status="Previous"),
        dship("DC3", "E1", name="Holding Drie B.V.", entity="CE3"),
        # exact and fuzzy name-match targets
        dship("DX", "N1", name="Willem van der Berg"),
        dship("DF", "N2", name="Fortuna Trust Services B.V."),
        # candidates for inference
        dship("DA", "K1"), dship("DA", "K2"), dship("DA", "K3"), dship("DA", "K4"),
        dship("DB", "M1"), dship("DB", "M2"),
        dship("DSTRICT", "S1"), dship("DSTRICT", "S2"),
        dship("DSTRICT", "S3"), dship("DSTRICT", "S4"),
        # sector negatives
        dship("DN1", "N1", entity="CN1"), dship("DN1", "N2", entity="CN1"),
        dship("DN2", "P1", entity="CN2"), dship("DN2", "P2", entity="CN2"),
        dship("DN3", "U1", entity="CN3"), dship("DN3", "U2", entity="CN3"),
    ]
    return build_graph(companies, directorships)


@pytest.fixture(scope="module")
def register():
    return LicensedRegister(entries=(
        RegisterEntry("Sempter Fidelis B.V.", "E1", (R1,)),
        RegisterEntry("Willem van der Berg", None, ()),
        RegisterEntry("Fortuna Trust Services Beheer B.V.", None, ()),
        RegisterEntry("Completely Unrelated Zzz Qqq", None, ()),
    ))


class TestMatchRegister:
    def test_registration_number_join_includes_branches(self, graph, register):
        pop = match_register(register, graph, name_threshold=0.60)
        assert pop.licensed_directors["DC1"] == PROVENANCE_MATCHED_ID
        assert pop.licensed_directors["DC2"] == PROVENANCE_MATCHED_ID

    def test_exact_name_match(self, graph, register):
        pop = match_register(register, graph, name_threshold=0.60)
        assert pop.licensed_directors["DX"] == PROVENANCE_MATCHED_ID

    def test_fuzzy_name_match(self, graph, register):
        pop = match_register(register, graph, name_threshold=0.60)
        assert pop.licensed_directors["DF"] == PROVENANCE_NAME_MATCH

    def test_unmatched_entries_recorded(self, graph, register):
        pop = match_register(register, graph, name_threshold=0.60)
        assert pop.unmatched_entries == ["Completely Unrelated Zzz Qqq"]

    def test_address_tags(self, graph, register):
        pop = match_register(register, graph, name_threshold=0.60)
        assert pop.csp_addresses[R1] == ADDRESS_REGISTER
        assert pop.csp_addresses[R2] == ADDRESS_AUGMENTED
        assert pop.csp_addresses[AddressKey("3333CC", "3")] == ADDRESS_AUGMENTED
        assert pop.register_addresses() == {R1}

    def test_register_tag_wins(self):
        pop = CspPopulation()
        pop.add_address(R1, ADDRESS_AUGMENTED)
        pop.add_address(R1, ADDRESS_REGISTER)
        pop.add_address(R1, ADDRESS_AUGMENTED)  # cannot demote
        assert pop.csp_addresses[R1] == ADDRESS_REGISTER


class TestEmployees:
    def test_current_individual_staff_only(self, graph, register):
        pop = match_register(register, graph, name_threshold=0.60)
        add_employees(pop, graph)
        assert pop.licensed_directors["DE1"] == PROVENANCE_EMPLOYEE
        assert "DE2" not in pop.licensed_directors  # previous position
        assert "DC3" not in pop.licensed_directors  # corporate co-director


class TestAffiliated:
    def _population(self, graph, register, strict=True):
        pop = match_register(register, graph, name_threshold=0.60)
        add_employees(pop, graph)
        return infer_affiliated(pop, graph, min_positions=2, strict=strict)

    def test_register_address_criterion(self, graph, register):
        pop = self._population(graph, register)
        # DA: 2 of 4 clients at the register address, 1 of 4 with a licensed
        # co-director.
        assert pop.licensed_directors["DA"] == PROVENANCE_AFFILIATED
        assert pop.affiliation_criteria["DA"] == "25/20"

    def test_any_address_criterion(self, graph, register):
        pop = self._population(graph, register)
        # DB: both clients at the augmented CSP address with a licensed
        # co-director, none at a register address.
        assert pop.licensed_directors["DB"] == PROVENANCE_AFFILIATED
        assert pop.affiliation_criteria["DB"] == "50/50"

    def test_strict_boundary_excluded(self, graph, register):
        # DSTRICT sits exactly at 25% register share: > is strict.
        pop = self._population(graph, register, strict=True)
        assert "DSTRICT" not in pop.licensed_directors

    def test_nonstrict_boundary_included(self, graph, register):
        pop = self._population(graph, register, strict=False)
        assert pop.licensed_directors["DSTRICT"] == PROVENANCE_AFFILIATED
        assert pop.affiliation_criteria["DSTRICT"] == "25/20"

    def test_no_cascade_within_one_pass(self, graph, register):
        # DA and DB become licensed in the same pass, so neither can count
        # the other as a licensed co-director during that pass.
        pop = self._population(graph, register)
        before = set(pop.licensed_directors)
        infer_affiliated(pop, graph, min_positions=2)
        assert set(pop.licensed_directors) >= before


class TestNegatives:
    def test_sector_filter(self, graph, register):
        pop = match_register(register, graph, name_threshold=0.60)
        negatives = select_negatives(graph, pop, min_positions=2)
        assert "DN1" in negatives      # 4110 + Unknown
        assert "DN2" not in negatives  # holds a 6420 company
        assert "DN3" not in negatives  # all sectors unknown
        assert "DA" not in negatives   # individual, not corporate
        assert "DC1" not in negatives  # licensed

    def test_without_population(self, graph):
        negatives = select_negatives(graph, None, min_positions=2)
        assert "DN1" in negatives


class TestBuildPopulation:
    def test_full_run_and_invariants(self, graph, register):
        pop = build_population(register, graph, name_threshold=0.60,
                               min_positions=2)
        assert set(pop.licensed_directors) == {
            "DC1", "DC2", "DX", "DF", "DE1", "DA", "DB"}
        assert not (set(pop.licensed_directors) & pop.negatives)

    def test_invariant_violation_raises(self):
        pop = CspPopulation()
        pop.add_licensed("D1", PROVENANCE_MATCHED_ID)
        pop.negatives = {"D1"}
        with pytest.raises(AssertionError):
            pop.check_invariants()

    def test_jsonl_round_trip(self, graph, register):
        pop = build_population(register, graph, name_threshold=0.60,
                               min_positions=2)
        rows = [json.loads(line) for line in pop.to_jsonl().splitlines()]
        by_id = {r["director_id"]: r for r in rows}
        assert by_id["DA"]["role"] == "licensed"
        assert by_id["DA"]["provenance"] == PROVENANCE_AFFILIATED
        assert by_id["DA"]["criterion"] == "25/20"
        assert by_id["DN1"]["role"] == "negative"
        assert "criterion" not in by_id["DC1"]


class TestParseRegisterCsv:
    CSV = (
        "csp_name,registration_number,postcode,street_number,street,city\n"
        "Alpha Trust,123,1111 AA,1,Herengracht,AMSTERDAM\n"
        "Alpha Trust,123,2222BB,2,Blaak,ROTTERDAM\n"
        "Beta Fiduciary,,,,,\n"
        ",,,,,\n"
    )

    def test_grouping_and_defaults(self):
        register = parse_register_csv(io.StringIO(self.CSV))
        assert len(register.entries) == 2
        alpha = next(e for e in register.entries if e.csp_name == "Alpha Trust")
        assert alpha.registration_number == "123"
        assert alpha.addresses == (R1, AddressKey("2222BB", "2"))
        beta = next(e for e in register.entries if e.csp_name == "Beta Fiduciary")
        assert beta.registration_number is None
        assert beta.addresses == ()
