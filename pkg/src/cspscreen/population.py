"""Licensed-CSP population construction and the productive-sector negatives.

Augmentation runs in three steps: (i) register matching by registration
number and by name, (iia) individual directors of matched corporate CSP
entities, (iib) directors inferred from company address/co-director overlap
with the licensed set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .graph import EntityGraph, eligible_directors
from .ingest import AddressKey
from .names import NameSimilarity, match_names, normalize_name

EXCLUDED_DIVISIONS = frozenset({"64", "65", "66", "69", "70", "82"})

PROVENANCE_MATCHED_ID = "MatchedId"
PROVENANCE_NAME_MATCH = "NameMatch"
PROVENANCE_EMPLOYEE = "EmployeeOfCsp"
PROVENANCE_AFFILIATED = "Affiliated"

ADDRESS_REGISTER = "Register"
ADDRESS_AUGMENTED = "Augmented"


@dataclass(frozen=True)
class RegisterEntry:
    csp_name: str
    registration_number: str | None
    addresses: tuple[AddressKey, ...]


@dataclass(frozen=True)
class LicensedRegister:
    entries: tuple[RegisterEntry, ...]


def parse_register_csv(stream) -> LicensedRegister:
    """register.csv: csp_name,registration_number,postcode,street_number,street,city.

    Multiple rows may share a csp_name (one row per address).
    """
    import csv

    reader = csv.DictReader(stream)
    grouped: dict[tuple[str, str], list[AddressKey]] = {}
    for row in reader:
        name = row["csp_name"].strip()
        if not name:
            continue
        regnum = row["registration_number"].strip()
        key = (name, regnum)
        grouped.setdefault(key, [])
        if row["postcode"].strip():
            grouped[key].append(AddressKey(
                row["postcode"], row["street_number"],
                row.get("street", "").strip(), row.get("city", "").strip()))
    entries = tuple(
        RegisterEntry(csp_name=name, registration_number=regnum or None,
                      addresses=tuple(addrs))
        for (name, regnum), addrs in sorted(grouped.items())
    )
    return LicensedRegister(entries=entries)


@dataclass
class CspPopulation:
    # director id -> provenance tag
    licensed_directors: dict[str, str] = field(default_factory=dict)
    # Affiliated directors also record which criterion fired ("25/20" | "50/50")
    affiliation_criteria: dict[str, str] = field(default_factory=dict)
    # address -> Register | Augmented (Register wins when both apply)
    csp_addresses: dict[AddressKey, str] = field(default_factory=dict)
    negatives: set[str] = field(default_factory=set)
    unmatched_entries: list[str] = field(default_factory=list)

    def add_licensed(self, director_id: str, tag: str) -> None:
        if director_id not in self.licensed_directors:
            self.licensed_directors[director_id] = tag

    def add_address(self, address: AddressKey, tag: str) -> None:
        current = self.csp_addresses.get(address)
        if current is None or (current == ADDRESS_AUGMENTED and tag == ADDRESS_REGISTER):
            self.csp_addresses[address] = tag

    def register_addresses(self) -> set[AddressKey]:
        return {a for a, tag in self.csp_addresses.items() if tag == ADDRESS_REGISTER}

    def all_addresses(self) -> set[AddressKey]:
        return set(self.csp_addresses)

    def check_invariants(self) -> None:
        overlap = set(self.licensed_directors) & self.negatives
        if overlap:
            raise AssertionError(f"licensed/negative overlap: {sorted(overlap)[:5]}")

    def to_jsonl(self) -> str:
        lines = []
        for did in sorted(self.licensed_directors):
            obj = {"director_id": did, "role": "licensed",
                   "provenance": self.licensed_directors[did]}
            if did in self.affiliation_criteria:
                obj["criterion"] = self.affiliation_criteria[did]
            lines.append(json.dumps(obj, sort_keys=True))
        for did in sorted(self.negatives):
            lines.append(json.dumps({"director_id": did, "role": "negative"}, sort_keys=True))
        return "".join(line + "\n" for line in lines)


def match_register(register: LicensedRegister, g: EntityGraph,
                   name_threshold: float = 0.90) -> CspPopulation:
    """Step (i): registration-number joins plus exact and trigram name matches."""
    pop = CspPopulation()

    director_names: dict[str, list[str]] = {}
    for did in sorted(g.directors):
        director_names.setdefault(normalize_name(g.directors[did].name), []).append(did)

    fuzzy_queries: list[str] = []
    for entry in register.entries:
        for addr in entry.addresses:
            pop.add_address(addr, ADDRESS_REGISTER)

        matched = False
        # Registration-number join: the entity itself plus branches owned by it.
        if entry.registration_number is not None:
            branch_ids = []
            if entry.registration_number in g.companies:
                branch_ids.append(entry.registration_number)
            branch_ids.extend(
                cid for cid in sorted(g.companies)
                if g.companies[cid].guo_id == entry.registration_number)
            for cid in branch_ids:
                matched = True
                record = g.companies[cid]
                for addr in (record.office_address, record.postal_address):
                    if addr is not None:
                        pop.add_address(addr, ADDRESS_AUGMENTED)
                director_id = g.entity_to_director.get(cid)
                if director_id is not None:
                    pop.add_licensed(director_id, PROVENANCE_MATCHED_ID)

        # Exact director-name match.
        for did in director_names.get(normalize_name(entry.csp_name), ()):
            pop.add_licensed(did, PROVENANCE_MATCHED_ID)
            matched = True
        if not matched:
            fuzzy_queries.append(entry.csp_name)

    # Trigram fallback for entries with no id or exact-name hit.
    if fuzzy_queries:
        all_names = sorted({g.directors[d].name for d in g.directors})
        for _query, target, _sim in match_names(fuzzy_queries, all_names, name_threshold):
            for did in sorted(g.directors):
                if g.directors[did].name == target:
                    pop.add_licensed(did, PROVENANCE_NAME_MATCH)
        still_unmatched = set(fuzzy_queries) - {
            q for q, _t, _s in match_names(fuzzy_queries, all_names, name_threshold)}
        pop.unmatched_entries = sorted(still_unmatched)
    return pop


def add_employees(pop: CspPopulation, g: EntityGraph) -> CspPopulation:
    """Step (iia): individual directors holding a current position in a matched
    corporate CSP's own entity."""
    for did in sorted(pop.licensed_directors):
        info = g.directors.get(did)
        if info is None or info.director_company_id is None:
            continue
        entity = info.director_company_id
        for other, status, _title in g.company_directors.get(entity, ()):
            if status != "Current":
                continue
            other_info = g.directors[other]
            if other_info.director_company_id is None and other not in pop.licensed_directors:
                pop.add_licensed(other, PROVENANCE_EMPLOYEE)
    return pop


def infer_affiliated(pop: CspPopulation, g: EntityGraph,
                     min_positions: int = 3, strict: bool = True) -> CspPopulation:
    """Step (iib): directors whose companies cluster at CSP addresses and share
    licensed co-directors.

    Criterion 1: share at a Register address > 25% AND share with a licensed
    co-director > 20%. Criterion 2: share at any CSP address (Register or
    Augmented) > 50% AND licensed-co-director share > 50%. Thresholds are
    strict by default; set strict=False for >=.
    """
    register_addresses = pop.register_addresses()
    all_addresses = pop.all_addresses()
    licensed = set(pop.licensed_directors)

    def exceeds(share: float, threshold: float) -> bool:
        return share > threshold if strict else share >= threshold

    added: list[tuple[str, str]] = []
    for did in sorted(eligible_directors(g, min_positions)):
        if did in licensed:
            continue
        companies = g.current_companies(did)
        if not companies:
            continue
        n = len(companies)
        at_register = 0
        at_any = 0
        shares_licensed = 0
        for cid in companies:
            record = g.companies[cid]
            locs = {a for a in (record.office_address, record.postal_address) if a is not None}
            if locs & register_addresses:
                at_register += 1
            if locs & all_addresses:
                at_any += 1
            if any(other in licensed
                   for other, _s, _t in g.company_directors.get(cid, ())
                   if other != did):
                shares_licensed += 1
        if exceeds(at_register / n, 0.25) and exceeds(shares_licensed / n, 0.20):
            added.append((did, "25/20"))
        elif exceeds(at_any / n, 0.50) and exceeds(shares_licensed / n, 0.50):
            added.append((did, "50/50"))

    for did, criterion in added:
        pop.add_licensed(did, PROVENANCE_AFFILIATED)
        pop.affiliation_criteria[did] = criterion
    return pop


def select_negatives(g: EntityGraph, pop: CspPopulation | None = None,
                     min_positions: int = 3) -> set[str]:
    """Eligible corporate directors all of whose companies' known NACE
    divisions avoid the CSP-related list. Unknown sectors do not disqualify,
    but all-Unknown directors are neither positive nor negative."""
    licensed = set(pop.licensed_directors) if pop is not None else set()
    negatives: set[str] = set()
    for did in sorted(eligible_directors(g, min_positions)):
        info = g.directors[did]
        if info.director_company_id is None or did in licensed:
            continue
        divisions = [g.companies[cid].nace_division for cid in g.current_companies(did)]
        known = [d for d in divisions if d != "Unknown"]
        if not known:
            continue
        if any(d in EXCLUDED_DIVISIONS for d in known):
            continue
        negatives.add(did)
    return negatives


def build_population(register: LicensedRegister, g: EntityGraph,
                     name_threshold: float = 0.90, min_positions: int = 3,
                     strict_thresholds: bool = True) -> CspPopulation:
    """Run steps i, iia, iib and the negative selection, with invariants checked."""
    pop = match_register(register, g, name_threshold)
    add_employees(pop, g)
    infer_affiliated(pop, g, min_positions, strict_thresholds)
    pop.negatives = select_negatives(g, pop, min_positions)
    pop.check_invariants()
    return pop
