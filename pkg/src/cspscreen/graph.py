"""Immutable director-company-address-owner graph and depth-two ego-networks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .ingest import (
    AddressKey,
    CompanyRecord,
    DirectorshipRecord,
    LegalEvent,
    PreviousAddress,
    extract_previous_addresses,
)


@dataclass(frozen=True)
class DirectorInfo:
    director_id: str
    name: str
    director_company_id: str | None

    @property
    def is_corporate(self) -> bool:
        return self.director_company_id is not None


@dataclass
class BuildReport:
    dropped_directorships: int = 0
    dropped_events: int = 0
    unparseable_addresses: int = 0


class EntityGraph:
    """Write-once graph. Mutable only inside build_graph; treat as frozen after."""

    def __init__(self):
        self.companies: dict[str, CompanyRecord] = {}
        self.directors: dict[str, DirectorInfo] = {}
        # director -> [(company_id, status, title)]
        self.positions: dict[str, list[tuple[str, str, str | None]]] = {}
        # company -> [(director_id, status, title)]
        self.company_directors: dict[str, list[tuple[str, str, str | None]]] = {}
        # company -> previous addresses parsed from legal events
        self.previous_addresses: dict[str, list[PreviousAddress]] = {}
        # entity company id -> director id of the corporate director it embodies
        self.entity_to_director: dict[str, str] = {}
        self.report = BuildReport()

    # -- traversal helpers ---------------------------------------------------

    def current_companies(self, director_id: str) -> list[str]:
        return [c for c, status, _ in self.positions.get(director_id, []) if status == "Current"]

    def position_count(self, director_id: str, include_previous: bool = False) -> int:
        edges = self.positions.get(director_id, [])
        if include_previous:
            return len(edges)
        return sum(1 for _, status, _ in edges if status == "Current")

    def owner_of(self, company_id: str) -> tuple[str, str] | None:
        """(guo_id, guo_country) when a GUO id is recorded, else None."""
        record = self.companies[company_id]
        if record.guo_id is None:
            return None
        return record.guo_id, record.guo_country

    def node_counts(self) -> dict[str, int]:
        addresses: set[AddressKey] = set()
        owners: set[str] = set()
        for record in self.companies.values():
            if record.office_address is not None:
                addresses.add(record.office_address)
            if record.postal_address is not None:
                addresses.add(record.postal_address)
            if record.guo_id is not None:
                owners.add(record.guo_id)
        for prev in self.previous_addresses.values():
            for p in prev:
                if p.key is not None:
                    addresses.add(p.key)
        return {
            "directors": len(self.directors),
            "companies": len(self.companies),
            "addresses": len(addresses),
            "owners": len(owners),
        }

    # -- export ---------------------------------------------------------------

    def export_jsonl(self, nodes_path, edges_path) -> None:
        """Dump node and edge lists for the annotation console."""
        with open(nodes_path, "w", encoding="utf-8") as fh:
            for did in sorted(self.directors):
                info = self.directors[did]
                fh.write(json.dumps({"id": f"d:{did}", "type": "director",
                                     "name": info.name,
                                     "corporate": info.is_corporate}, sort_keys=True) + "\n")
            for cid in sorted(self.companies):
                record = self.companies[cid]
                fh.write(json.dumps({"id": f"c:{cid}", "type": "company",
                                     "name": record.name,
                                     "legal_form": record.legal_form,
                                     "nace": record.nace_code}, sort_keys=True) + "\n")
            seen_addr: set[tuple[str, str]] = set()
            seen_owner: set[str] = set()
            for cid in sorted(self.companies):
                record = self.companies[cid]
                for addr in (record.office_address, record.postal_address):
                    if addr is not None and (addr.postcode, addr.street_number) not in seen_addr:
                        seen_addr.add((addr.postcode, addr.street_number))
                        fh.write(json.dumps({"id": f"a:{addr.postcode}:{addr.street_number}",
                                             "type": "address",
                                             "street": addr.street, "city": addr.city},
                                            sort_keys=True) + "\n")
                if record.guo_id is not None and record.guo_id not in seen_owner:
                    seen_owner.add(record.guo_id)
                    fh.write(json.dumps({"id": f"o:{record.guo_id}", "type": "owner",
                                         "country": record.guo_country}, sort_keys=True) + "\n")
        with open(edges_path, "w", encoding="utf-8") as fh:
            for did in sorted(self.positions):
                for cid, status, title in self.positions[did]:
                    fh.write(json.dumps({"source": f"d:{did}", "target": f"c:{cid}",
                                         "kind": "directorship", "status": status,
                                         "title": title}, sort_keys=True) + "\n")
            for cid in sorted(self.companies):
                record = self.companies[cid]
                if record.office_address is not None:
                    a = record.office_address
                    fh.write(json.dumps({"source": f"c:{cid}",
                                         "target": f"a:{a.postcode}:{a.street_number}",
                                         "kind": "located_at", "address_type": "Office",
                                         "status": "Current"}, sort_keys=True) + "\n")
                if record.postal_address is not None:
                    a = record.postal_address
                    fh.write(json.dumps({"source": f"c:{cid}",
                                         "target": f"a:{a.postcode}:{a.street_number}",
                                         "kind": "located_at", "address_type": "Postal",
                                         "status": "Current"}, sort_keys=True) + "\n")
                if record.guo_id is not None:
                    fh.write(json.dumps({"source": f"c:{cid}", "target": f"o:{record.guo_id}",
                                         "kind": "owned_by",
                                         "country": record.guo_country}, sort_keys=True) + "\n")


def build_graph(
    companies: Iterable[CompanyRecord],
    directorships: Iterable[DirectorshipRecord],
    events: Iterable[LegalEvent] = (),
) -> EntityGraph:
    """Assemble the frozen entity graph. Directorships referencing unknown
    companies are dropped and counted in the build report."""
    g = EntityGraph()
    for record in sorted(companies, key=lambda r: r.company_id):
        g.companies[record.company_id] = record

    for edge in sorted(directorships, key=lambda d: (d.director_id, d.company_id, d.status)):
        if edge.company_id not in g.companies:
            g.report.dropped_directorships += 1
            continue
        if edge.director_id not in g.directors:
            g.directors[edge.director_id] = DirectorInfo(
                director_id=edge.director_id,
                name=edge.director_name,
                director_company_id=edge.director_company_id,
            )
            if edge.director_company_id is not None:
                g.entity_to_director[edge.director_company_id] = edge.director_id
        g.positions.setdefault(edge.director_id, []).append(
            (edge.company_id, edge.status, edge.title))
        g.company_directors.setdefault(edge.company_id, []).append(
            (edge.director_id, edge.status, edge.title))

    previous, unparseable = extract_previous_addresses(events)
    g.report.unparseable_addresses = unparseable
    for company_id in sorted(previous):
        if company_id not in g.companies:
            g.report.dropped_events += len(previous[company_id])
            continue
        g.previous_addresses[company_id] = previous[company_id]
    return g


def eligible_directors(g: EntityGraph, min_positions: int = 3,
                       include_previous: bool = False) -> set[str]:
    """Directors holding at least `min_positions` positions.

    Current-only by default; set include_previous to count both statuses.
    """
    return {d for d in g.positions
            if g.position_count(d, include_previous) >= min_positions}


@dataclass(frozen=True)
class EgoNetwork:
    """Depth-two neighborhood of a director.

    companies: the center's CURRENT directorships. addresses/owners/
    co_directors: everything adjacent to those companies, including previous
    directors and previous addresses.
    """
    center: str
    companies: tuple[str, ...]
    addresses: frozenset[AddressKey]
    owners: frozenset[str]
    co_directors: frozenset[str]


def ego(g: EntityGraph, director_id: str) -> EgoNetwork:
    if director_id not in g.directors:
        raise KeyError(f"unknown director {director_id!r}")
    companies = tuple(sorted(g.current_companies(director_id)))
    addresses: set[AddressKey] = set()
    owners: set[str] = set()
    co_directors: set[str] = set()
    for cid in companies:
        record = g.companies[cid]
        if record.office_address is not None:
            addresses.add(record.office_address)
        if record.postal_address is not None:
            addresses.add(record.postal_address)
        for prev in g.previous_addresses.get(cid, ()):
            if prev.key is not None:
                addresses.add(prev.key)
        if record.guo_id is not None:
            owners.add(record.guo_id)
        for other, _status, _title in g.company_directors.get(cid, ()):
            if other != director_id:
                co_directors.add(other)
    return EgoNetwork(
        center=director_id,
        companies=companies,
        addresses=frozenset(addresses),
        owners=frozenset(owners),
        co_directors=frozenset(co_directors),
    )


def independent_companies(g: EntityGraph, ego_net: EgoNetwork) -> frozenset[str]:
    """One representative per managed company: the GUO when recorded, else
    the company itself."""
    reps: set[str] = set()
    for cid in ego_net.companies:
        owner = g.owner_of(cid)
        reps.add(owner[0] if owner is not None else cid)
    return frozenset(reps)
