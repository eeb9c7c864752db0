"""Registry extract parsing, legacy address splitting, and leak-list indexing.

Input files are plain CSV (header row required). Dirty rows never abort a
parse: each bad row becomes a line-numbered rejection in the parse report.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

CANONICAL_LEGAL_FORMS = ("BV", "NV", "Foundation", "VOF", "Cooperative", "CV")

UNKNOWN = "Unknown"

_NL_POSTCODE_RE = re.compile(r"\d{4}\s?[A-Z]{2}")
_UK_POSTCODE_RE = re.compile(r"([A-Z][A-HJ-Y]?\d[A-Z\d]? ?\d[A-Z]{2}|GIR ?0A{2})")
_US_POSTCODE_RE = re.compile(r"([A-Z]?-?\d{4,5})(-\d{4})*")
# Street-first form ("NOTELAAR 12", optional suffixes), then number-first.
_STREET_FIRST_RE = re.compile(r"^(.*?)\s+(\d*\w*(\-|\/)?\d+.*)$")
_NUMBER_FIRST_RE = re.compile(r"^(\d*\w*(\-|\/)?\d+.*?)\s+(.*?)$")

_NL_POSTCODE_FULL_RE = re.compile(r"^\d{4}[A-Z]{2}$")
_FORMERLY_MARKER = "Formerly:"

_WS_RE = re.compile(r"\s+")


def normalize_text(value: str) -> str:
    """Lowercase and collapse whitespace; used for leak-list matching."""
    return _WS_RE.sub(" ", value.strip().lower())


def normalize_postcode(raw: str) -> str:
    return raw.replace(" ", "").upper()


class AddressKey:
    """A Dutch address. Identity is (postcode, street_number) only."""

    __slots__ = ("postcode", "street_number", "street", "city")

    def __init__(self, postcode: str, street_number: str, street: str = "", city: str = ""):
        self.postcode = normalize_postcode(postcode)
        self.street_number = _WS_RE.sub(" ", street_number.strip()).upper()
        self.street = street
        self.city = city

    def __eq__(self, other) -> bool:
        if not isinstance(other, AddressKey):
            return NotImplemented
        return self.postcode == other.postcode and self.street_number == other.street_number

    def __hash__(self) -> int:
        return hash((self.postcode, self.street_number))

    def __repr__(self) -> str:
        return f"AddressKey({self.postcode!r}, {self.street_number!r})"

    @property
    def is_valid(self) -> bool:
        return bool(_NL_POSTCODE_FULL_RE.match(self.postcode)) and bool(self.street_number)


@dataclass(frozen=True)
class CompanyRecord:
    company_id: str
    name: str
    legal_form: str  # canonical form or any other string (treated as Other)
    nace_code: str  # 4 digits or Unknown
    office_address: AddressKey | None
    postal_address: AddressKey | None
    po_box: str | None
    guo_id: str | None
    guo_country: str  # ISO alpha-2 or Unknown
    turnover: float | None
    assets: float | None
    employees: float | None
    profit: float | None

    @property
    def nace_division(self) -> str:
        """2-digit NACE division, or Unknown."""
        return self.nace_code[:2] if self.nace_code != UNKNOWN else UNKNOWN


@dataclass(frozen=True)
class DirectorshipRecord:
    director_id: str
    director_name: str
    director_company_id: str | None  # set when the director is a corporate entity
    company_id: str
    title: str | None
    status: str  # Current | Previous

    @property
    def is_corporate(self) -> bool:
        return self.director_company_id is not None


@dataclass(frozen=True)
class LegalEvent:
    company_id: str
    date: str | None  # ISO date
    description: str


@dataclass
class ParseReport:
    accepted: dict[str, int] = field(default_factory=dict)
    rejections: list[dict] = field(default_factory=list)

    def reject(self, file: str, line: int, reason: str) -> None:
        self.rejections.append({"file": file, "line": line, "reason": reason})

    def rejected_count(self, file: str | None = None) -> int:
        if file is None:
            return len(self.rejections)
        return sum(1 for r in self.rejections if r["file"] == file)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.rejections)


class HeaderError(ValueError):
    """Raised when a CSV header does not match the expected schema."""


COMPANY_COLUMNS = [
    "company_id", "name", "legal_form", "nace",
    "office_postcode", "office_number", "office_street", "office_city",
    "postal_postcode", "postal_number", "postal_street", "postal_city",
    "po_box", "guo_id", "guo_country",
    "turnover", "assets", "employees", "profit",
]
DIRECTORSHIP_COLUMNS = [
    "director_id", "director_name", "director_company_id", "company_id", "title", "status",
]
EVENT_COLUMNS = ["company_id", "date", "description"]


def _check_header(reader: csv.reader, expected: list[str], file: str) -> None:
    try:
        header = next(reader)
    except StopIteration:
        raise HeaderError(f"{file}: missing header row")
    if header != expected:
        raise HeaderError(f"{file}: malformed header {header!r}, expected {expected!r}")


def _parse_address(row: dict, prefix: str) -> AddressKey | None:
    """Build an AddressKey from {prefix}_postcode/.../city columns.

    Returns None when the postcode column is empty. Raises ValueError on an
    invalid postcode or a missing street number.
    """
    postcode = row[f"{prefix}_postcode"].strip()
    if not postcode:
        return None
    key = AddressKey(
        postcode,
        row[f"{prefix}_number"],
        row[f"{prefix}_street"].strip(),
        row[f"{prefix}_city"].strip(),
    )
    if not _NL_POSTCODE_FULL_RE.match(key.postcode):
        raise ValueError("invalid postcode")
    if not key.street_number:
        raise ValueError("missing street number")
    return key


def _parse_money(raw: str, column: str) -> float | None:
    raw = raw.strip()
    if raw == "" or raw == UNKNOWN:
        return None
    value = float(raw)  # ValueError propagates to the row handler
    if value < 0:
        raise ValueError(f"negative {column}")
    return value


def parse_companies(stream: TextIO, report: ParseReport, file: str = "companies.csv") -> list[CompanyRecord]:
    reader = csv.reader(stream)
    _check_header(reader, COMPANY_COLUMNS, file)
    records: list[CompanyRecord] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(reader, start=2):
        if len(raw) != len(COMPANY_COLUMNS):
            report.reject(file, lineno, "wrong column count")
            continue
        row = dict(zip(COMPANY_COLUMNS, raw))
        try:
            company_id = row["company_id"].strip()
            if not company_id:
                raise ValueError("empty company_id")
            if company_id in seen:
                raise ValueError("duplicate company_id")
            nace = row["nace"].strip()
            if nace == "":
                nace = UNKNOWN
            elif nace != UNKNOWN and not re.fullmatch(r"\d{4}", nace):
                raise ValueError("invalid nace code")
            guo_country = row["guo_country"].strip()
            if guo_country == "":
                guo_country = UNKNOWN
            elif guo_country != UNKNOWN:
                guo_country = guo_country.upper()
                if not re.fullmatch(r"[A-Z]{2}", guo_country):
                    raise ValueError("invalid guo country")
            record = CompanyRecord(
                company_id=company_id,
                name=row["name"].strip(),
                legal_form=row["legal_form"].strip() or "Other",
                nace_code=nace,
                office_address=_parse_address(row, "office"),
                postal_address=_parse_address(row, "postal"),
                po_box=row["po_box"].strip() or None,
                guo_id=row["guo_id"].strip() or None,
                guo_country=guo_country,
                turnover=_parse_money(row["turnover"], "turnover"),
                assets=_parse_money(row["assets"], "assets"),
                employees=_parse_money(row["employees"], "employees"),
                profit=_parse_money(row["profit"], "profit"),
            )
        except ValueError as exc:
            report.reject(file, lineno, str(exc))
            continue
        seen.add(company_id)
        records.append(record)
    report.accepted[file] = len(records)
    return records


def parse_directorships(stream: TextIO, report: ParseReport, file: str = "directorships.csv") -> list[DirectorshipRecord]:
    reader = csv.reader(stream)
    _check_header(reader, DIRECTORSHIP_COLUMNS, file)
    records: list[DirectorshipRecord] = []
    seen: set[tuple[str, str, str]] = set()
    for lineno, raw in enumerate(reader, start=2):
        if len(raw) != len(DIRECTORSHIP_COLUMNS):
            report.reject(file, lineno, "wrong column count")
            continue
        row = dict(zip(DIRECTORSHIP_COLUMNS, raw))
        director_id = row["director_id"].strip()
        company_id = row["company_id"].strip()
        status = row["status"].strip()
        if not director_id or not company_id:
            report.reject(file, lineno, "empty id")
            continue
        if status not in ("Current", "Previous"):
            report.reject(file, lineno, "invalid status")
            continue
        key = (director_id, company_id, status)
        if key in seen:
            report.reject(file, lineno, "duplicate directorship")
            continue
        seen.add(key)
        records.append(DirectorshipRecord(
            director_id=director_id,
            director_name=row["director_name"].strip(),
            director_company_id=row["director_company_id"].strip() or None,
            company_id=company_id,
            title=row["title"].strip() or None,
            status=status,
        ))
    report.accepted[file] = len(records)
    return records


def parse_events(stream: TextIO, report: ParseReport, file: str = "events.csv") -> list[LegalEvent]:
    reader = csv.reader(stream)
    _check_header(reader, EVENT_COLUMNS, file)
    records: list[LegalEvent] = []
    for lineno, raw in enumerate(reader, start=2):
        if len(raw) != len(EVENT_COLUMNS):
            report.reject(file, lineno, "wrong column count")
            continue
        row = dict(zip(EVENT_COLUMNS, raw))
        company_id = row["company_id"].strip()
        description = row["description"]
        if not company_id:
            report.reject(file, lineno, "empty company_id")
            continue
        if not description.strip():
            report.reject(file, lineno, "empty description")
            continue
        records.append(LegalEvent(
            company_id=company_id,
            date=row["date"].strip() or None,
            description=description,
        ))
    report.accepted[file] = len(records)
    return records


def parse_registry(
    company_stream: TextIO,
    directorship_stream: TextIO,
    events_stream: TextIO,
) -> tuple[list[CompanyRecord], list[DirectorshipRecord], list[LegalEvent], ParseReport]:
    report = ParseReport()
    companies = parse_companies(company_stream, report)
    directorships = parse_directorships(directorship_stream, report)
    events = parse_events(events_stream, report)
    return companies, directorships, events, report


# ---------------------------------------------------------------------------
# Serialization (round-trip partner of the parsers)

def _fmt_money(value: float | None) -> str:
    if value is None:
        return ""
    # repr is the shortest string that parses back to the same float.
    return repr(value)


def _address_cells(addr: AddressKey | None) -> list[str]:
    if addr is None:
        return ["", "", "", ""]
    return [addr.postcode, addr.street_number, addr.street, addr.city]


def companies_to_csv(records: Iterable[CompanyRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COMPANY_COLUMNS)
    for r in records:
        writer.writerow(
            [r.company_id, r.name, r.legal_form, r.nace_code]
            + _address_cells(r.office_address)
            + _address_cells(r.postal_address)
            + [r.po_box or "", r.guo_id or "", "" if r.guo_country == UNKNOWN else r.guo_country,
               _fmt_money(r.turnover), _fmt_money(r.assets),
               _fmt_money(r.employees), _fmt_money(r.profit)]
        )
    return out.getvalue()


def directorships_to_csv(records: Iterable[DirectorshipRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DIRECTORSHIP_COLUMNS)
    for r in records:
        writer.writerow([r.director_id, r.director_name, r.director_company_id or "",
                         r.company_id, r.title or "", r.status])
    return out.getvalue()


def events_to_csv(records: Iterable[LegalEvent]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(EVENT_COLUMNS)
    for r in records:
        writer.writerow([r.company_id, r.date or "", r.description])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Legacy address splitting

@dataclass(frozen=True)
class SplitAddress:
    street: str
    number: str
    postcode: str | None
    city: str | None
    postcode_kind: str | None  # NL | UK | US | None


def split_former_address(description: str) -> SplitAddress | None:
    """Split a legacy "Formerly: Street Number|Postcode CITY" string.

    Returns None when no pattern combination matches. The postcode patterns
    are tried NL, UK, US in that order; the left part is tried street-first
    then number-first.
    """
    idx = description.find(_FORMERLY_MARKER)
    if idx < 0:
        return None
    body = description[idx + len(_FORMERLY_MARKER):].strip()
    if "|" not in body:
        return None
    left, right = body.split("|", 1)
    left = left.strip()
    right = right.strip()

    postcode = None
    kind = None
    city = None
    for pattern, name in ((_NL_POSTCODE_RE, "NL"), (_UK_POSTCODE_RE, "UK"), (_US_POSTCODE_RE, "US")):
        m = pattern.search(right)
        if m:
            kind = name
            postcode = m.group(0)
            if name == "NL":
                postcode = normalize_postcode(postcode)
            city = (right[: m.start()] + right[m.end():]).strip() or None
            break
    if postcode is None:
        return None

    m = _STREET_FIRST_RE.match(left)
    if m:
        street, number = m.group(1), m.group(2)
    else:
        m = _NUMBER_FIRST_RE.match(left)
        if m:
            number, street = m.group(1), m.group(3)
        else:
            return None
    return SplitAddress(street=street.strip(), number=number.strip(),
                        postcode=postcode, city=city, postcode_kind=kind)


@dataclass(frozen=True)
class PreviousAddress:
    """A parsed previous address of a company.

    `key` is set only for Dutch postcodes; foreign addresses carry the raw
    normalized postcode and count toward address tallies but never join with
    Dutch AddressKeys.
    """
    key: AddressKey | None
    postcode: str
    number: str
    kind: str  # NL | UK | US


def extract_previous_addresses(
    events: Iterable[LegalEvent],
) -> tuple[dict[str, list[PreviousAddress]], int]:
    """Map company_id -> previous addresses parsed from "Formerly:" events.

    Returns the mapping plus the count of unparseable "Formerly:" events.
    """
    result: dict[str, list[PreviousAddress]] = {}
    unparseable = 0
    for event in events:
        if _FORMERLY_MARKER not in event.description:
            continue
        split = split_former_address(event.description)
        if split is None:
            unparseable += 1
            continue
        if split.postcode_kind == "NL":
            key = AddressKey(split.postcode, split.number, split.street, split.city or "")
        else:
            key = None
        result.setdefault(event.company_id, []).append(PreviousAddress(
            key=key,
            postcode=normalize_text(split.postcode or ""),
            number=split.number,
            kind=split.postcode_kind or "",
        ))
    return result, unparseable


# ---------------------------------------------------------------------------
# Offshore-leaks index

class OffshoreLeaksIndex:
    """Substring-containment index over leak-list entries.

    Entries are lowercase, whitespace-collapsed and non-empty. Matching is a
    direct containment scan: populations here are small enough (thousands of
    entries) that C-level substring search beats any Python-side index.
    """

    KINDS = ("Address", "Company", "Officer")

    def __init__(self, addresses: Iterable[str] = (), company_names: Iterable[str] = (),
                 officer_names: Iterable[str] = ()):
        self.addresses = self._clean(addresses)
        self.company_names = self._clean(company_names)
        self.officer_names = self._clean(officer_names)

    @staticmethod
    def _clean(entries: Iterable[str]) -> frozenset[str]:
        cleaned = {normalize_text(e) for e in entries}
        cleaned.discard("")
        return frozenset(cleaned)

    def _entries(self, kind: str) -> frozenset[str]:
        if kind == "Address":
            return self.addresses
        if kind == "Company":
            return self.company_names
        if kind == "Officer":
            return self.officer_names
        raise ValueError(f"unknown kind {kind!r}")

    @classmethod
    def from_files(cls, addresses_path, companies_path, officers_path) -> "OffshoreLeaksIndex":
        def read(path):
            with open(path, encoding="utf-8") as fh:
                return [line.rstrip("\n") for line in fh]
        return cls(read(addresses_path), read(companies_path), read(officers_path))


def flag_offshore(index: OffshoreLeaksIndex, candidate: str, kind: str) -> bool:
    """True iff some leak entry of the given kind is a substring of candidate."""
    entries = index._entries(kind)
    if candidate in entries:
        return True
    return any(entry in candidate for entry in entries)
