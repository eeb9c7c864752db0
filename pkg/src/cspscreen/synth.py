"""Synthetic registry generator with planted ground truth.

Background directors get productive-sector profiles; planted CSPs (licensed
and illegal) get the trust-office signature: many holding companies
concentrated at one office address, foreign and offshore owners, corporate
keywords in the name. Realism is directional, not calibrated.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from pathlib import Path

PROFILE_CONCENTRATED = "Concentrated"
PROFILE_FRAGMENTED = "FragmentedAddresses"
PROFILE_FRONTMEN = "Frontmen"
PROFILE_ROTATING = "RotatingStrawmen"

_STREETS = ("Keizersgracht", "Herengracht", "Stationsweg", "Dorpsstraat",
            "Molenlaan", "Kerkstraat", "Hoofdweg", "Lindenlaan", "Parkweg",
            "Veldstraat", "Industrieweg", "Zeedijk", "Beukenhof", "Wilgenplein")
_CITIES = ("AMSTERDAM", "ROTTERDAM", "DEN HAAG", "UTRECHT", "EINDHOVEN",
           "GRONINGEN", "TILBURG", "ALMERE", "BREDA", "NIJMEGEN")
_SURNAMES = ("Jansen", "de Vries", "van den Berg", "Bakker", "Visser",
             "Smit", "Meijer", "Mulder", "de Boer", "Dijkstra", "Peters",
             "Hendriks", "van Dijk", "Dekker", "Vermeulen", "Koster")
_FIRST = ("Jan", "Piet", "Kees", "Anna", "Sanne", "Lars", "Emma", "Daan",
          "Lotte", "Bram", "Femke", "Ruben", "Iris", "Thijs", "Noor")
_COMPANY_WORDS = ("Zonne", "Delta", "Noord", "Veld", "Ster", "Linde", "Duin",
                  "Vecht", "Eik", "Berk", "Golf", "Rijn", "Maas", "Waal",
                  "Fortuna", "Orion", "Atlas", "Nova", "Vesta", "Castor")
_PRODUCTIVE_NACE = ("1071", "1413", "2511", "2822", "3101", "4120", "4321",
                    "4511", "4633", "4791", "4932", "5610", "5911", "6201",
                    "7111", "7420", "8121", "8621", "9001", "0150")
_CSP_NACE = ("6420", "6420", "6420", "6430", "6619", "7010", "6920")
_FOREIGN = ("DE", "BE", "FR", "GB", "US", "ES", "IT", "PL")
_OFC = ("VG", "KY", "CW", "BM", "LU", "JE", "GG", "PA")
_TITLES = ("Bestuurder", "Directeur", "CEO", "Manager", "Vennoot")


@dataclass
class SynthConfig:
    seed: int = 0
    n_directors: int = 5000
    n_companies: int = 9000
    n_addresses: int = 6000
    n_licensed: int = 50
    n_illegal: int = 30
    profile_mix: dict = field(default_factory=lambda: {PROFILE_CONCENTRATED: 1.0})
    position_exponent: float = 2.2  # power law for background positions

    def validate(self) -> None:
        if min(self.n_directors, self.n_companies, self.n_addresses) <= 0:
            raise ValueError("counts must be positive")
        if self.n_licensed + self.n_illegal >= self.n_directors:
            raise ValueError("more planted CSPs than directors")
        total = sum(self.profile_mix.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError("profile weights must sum to 1")


@dataclass
class SynthBundle:
    companies_csv: str
    directorships_csv: str
    events_csv: str
    register_csv: str
    leaks_addresses: str
    leaks_companies: str
    leaks_officers: str
    labels_csv: str

    def write(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for name, content in (
            ("companies.csv", self.companies_csv),
            ("directorships.csv", self.directorships_csv),
            ("events.csv", self.events_csv),
            ("register.csv", self.register_csv),
            ("leaks_addresses.txt", self.leaks_addresses),
            ("leaks_companies.txt", self.leaks_companies),
            ("leaks_officers.txt", self.leaks_officers),
            ("labels.csv", self.labels_csv),
        ):
            (directory / name).write_text(content, encoding="utf-8")


class _Builder:
    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.companies: list[list[str]] = []
        self.directorships: list[list[str]] = []
        self.events: list[list[str]] = []
        self.register: list[list[str]] = []
        self.labels: list[list[str]] = []
        self.leak_addresses: list[str] = []
        self.leak_companies: list[str] = []
        self.leak_officers: list[str] = []
        self._company_seq = 0
        self._owner_seq = 0
        self.addresses = [self._make_address(i) for i in range(cfg.n_addresses)]
        self._background_company_rows: list[int] = []
        self._person_names_seen: set[str] = set()

    def _make_address(self, i: int) -> tuple[str, str, str, str]:
        rng = self.rng
        postcode = f"{rng.randint(1000, 9899)}{chr(rng.randint(65, 90))}{chr(rng.randint(65, 90))}"
        return (postcode, str(rng.randint(1, 250)), rng.choice(_STREETS), rng.choice(_CITIES))

    def _person_name(self) -> str:
        name = f"{self.rng.choice(_FIRST)} {self.rng.choice(_SURNAMES)}"
        self._person_names_seen.add(name)
        return name

    def _unique_person_name(self) -> str:
        """Person name no other generated director shares.

        Planted directors get unique names so exact-name register matching
        cannot drag a background namesake into the licensed set.
        """
        while True:
            name = (f"{self.rng.choice(_FIRST)} {chr(self.rng.randint(65, 90))}. "
                    f"{self.rng.choice(_SURNAMES)}")
            if name not in self._person_names_seen:
                self._person_names_seen.add(name)
                return name

    def _company_name(self, suffix: str = "B.V.") -> str:
        rng = self.rng
        return f"{rng.choice(_COMPANY_WORDS)}{rng.choice(_COMPANY_WORDS).lower()} {rng.choice(('Groep', 'Werk', 'Bouw', 'Handel', 'Techniek', 'Zorg'))} {suffix}"

    def _next_company_id(self) -> str:
        self._company_seq += 1
        return f"C{self._company_seq:06d}"

    def _next_owner_id(self) -> str:
        self._owner_seq += 1
        return f"O{self._owner_seq:05d}"

    def _add_company(self, name: str, legal_form: str, nace: str,
                     office: tuple | None, postal: tuple | None,
                     guo_id: str, guo_country: str) -> str:
        cid = self._next_company_id()
        rng = self.rng
        office_cells = list(office) if office else ["", "", "", ""]
        postal_cells = list(postal) if postal else ["", "", "", ""]
        self.companies.append([
            cid, name, legal_form, nace,
            *office_cells, *postal_cells,
            "", guo_id, guo_country,
            str(rng.randint(10, 5000) * 1000) if rng.random() < 0.7 else "",
            str(rng.randint(10, 9000) * 1000) if rng.random() < 0.7 else "",
            str(rng.randint(1, 200)) if rng.random() < 0.6 else "",
            str(rng.randint(-500, 2000) * 100) if rng.random() < 0.0 else "",
        ])
        return cid

    def _add_directorship(self, director_id: str, name: str, entity_id: str,
                          company_id: str, title: str, status: str = "Current") -> None:
        self.directorships.append([director_id, name, entity_id, company_id, title, status])

    def _maybe_event(self, company_id: str, probability: float) -> None:
        if self.rng.random() < probability:
            addr = self.rng.choice(self.addresses)
            postcode = f"{addr[0][:4]} {addr[0][4:]}"
            self.events.append([
                company_id, f"20{self.rng.randint(10, 19)}-0{self.rng.randint(1, 9)}-15",
                f"Formerly: {addr[2]} {addr[1]}|{postcode} {addr[3]}"])

    def _owner(self, kind: str) -> tuple[str, str]:
        """(guo_id, country) for kind in none|domestic|foreign|ofc."""
        if kind == "none":
            return "", ""
        if kind == "domestic":
            return self._next_owner_id(), "NL"
        if kind == "foreign":
            return self._next_owner_id(), self.rng.choice(_FOREIGN)
        return self._next_owner_id(), self.rng.choice(_OFC)

    # -- population segments ---------------------------------------------------

    def background(self) -> None:
        cfg, rng = self.cfg, self.rng
        n_background = cfg.n_directors - cfg.n_licensed - cfg.n_illegal
        weights = [k ** (-cfg.position_exponent) for k in range(1, 31)]
        for i in range(n_background):
            did = f"D{i + 1:06d}"
            corporate = rng.random() < 0.30
            if corporate:
                name = self._company_name(rng.choice(("B.V.", "Holding B.V.", "Beheer B.V.")))
            else:
                name = self._person_name()
            k = rng.choices(range(1, 31), weights=weights)[0]
            entity_id = ""
            if corporate:
                office = rng.choice(self.addresses)
                owner_kind = rng.choices(["none", "domestic", "foreign"], [0.4, 0.5, 0.1])[0]
                guo_id, guo_country = self._owner(owner_kind)
                entity_id = self._add_company(name, "BV", rng.choice(_PRODUCTIVE_NACE),
                                              office, None, guo_id, guo_country)
            title = rng.choice(_TITLES)
            for _ in range(k):
                reuse = (self._background_company_rows
                         and self._company_seq >= cfg.n_companies)
                if reuse or (self._background_company_rows and rng.random() < 0.06):
                    cid = rng.choice(self._background_company_rows)
                else:
                    office = rng.choice(self.addresses)
                    owner_kind = rng.choices(["none", "domestic", "foreign", "ofc"],
                                             [0.35, 0.45, 0.17, 0.03])[0]
                    guo_id, guo_country = self._owner(owner_kind)
                    legal = rng.choices(["BV", "VOF", "NV", "Foundation", "CV", "Cooperative"],
                                        [0.60, 0.15, 0.05, 0.10, 0.05, 0.05])[0]
                    cid = self._add_company(self._company_name(), legal,
                                            rng.choice(_PRODUCTIVE_NACE), office,
                                            None, guo_id, guo_country)
                    self._background_company_rows.append(cid)
                    self._maybe_event(cid, 0.05)
                if any(d[0] == did and d[3] == cid for d in self.directorships[-k:]):
                    continue
                self._add_directorship(did, name, entity_id, cid, title)
            self.labels.append([did, "background", ""])

    def _csp_like(self, did: str, name: str, corporate: bool, k: int,
                  n_signature_addresses: int, entity_nace: str) -> tuple[str, list[tuple]]:
        """Create the signature companies of one CSP-profiled director.

        Returns (entity_id, signature_addresses).
        """
        rng = self.rng
        signature = [rng.choice(self.addresses) for _ in range(n_signature_addresses)]
        entity_id = ""
        if corporate:
            entity_id = self._add_company(name, "BV", entity_nace, signature[0],
                                          signature[0], "", "")
        title = "Directeur"
        for _ in range(k):
            office = rng.choice(signature)
            owner_kind = rng.choices(["foreign", "ofc", "none", "domestic"],
                                     [0.40, 0.40, 0.12, 0.08])[0]
            guo_id, guo_country = self._owner(owner_kind)
            nace = rng.choice(_CSP_NACE)
            cid = self._add_company(self._company_name(rng.choice(("Holding B.V.", "B.V."))),
                                    "BV", nace, office, office, guo_id, guo_country)
            self._add_directorship(did, name, entity_id, cid, title)
            self._maybe_event(cid, 0.45)
        return entity_id, signature

    def licensed(self) -> None:
        cfg, rng = self.cfg, self.rng
        for i in range(cfg.n_licensed):
            did = f"L{i + 1:04d}"
            corporate = rng.random() < 0.7
            base = f"{rng.choice(_COMPANY_WORDS)} {rng.choice(('Trust', 'Management', 'Corporate Services', 'Fiduciary'))}"
            name = f"{base} B.V." if corporate else self._unique_person_name()
            k = rng.randint(10, 30)
            entity_id, signature = self._csp_like(
                did, name, corporate, k, 1, entity_nace="6920")
            # Employees of corporate CSPs also direct a few managed companies.
            if corporate:
                n_employees = rng.randint(1, 3)
                managed = [d[3] for d in self.directorships if d[0] == did]
                for e in range(n_employees):
                    emp_id = f"E{i + 1:04d}{e}"
                    emp_name = self._person_name()
                    self._add_directorship(emp_id, emp_name, "", entity_id, "Directeur")
                    for cid in rng.sample(managed, min(3, len(managed))):
                        self._add_directorship(emp_id, emp_name, "", cid, "Directeur")
            addr = signature[0]
            self.register.append([name, entity_id, addr[0], addr[1], addr[2], addr[3]])
            if rng.random() < 0.3:
                self.leak_addresses.append(
                    f"{addr[2].lower()} {addr[1]} {addr[0].lower()} {addr[3].lower()}")
            self.labels.append([did, "licensed", PROFILE_CONCENTRATED])

    def illegal(self) -> None:
        cfg, rng = self.cfg, self.rng
        profiles = sorted(cfg.profile_mix)
        weights = [cfg.profile_mix[p] for p in profiles]
        ring: list[tuple[str, str]] = []
        for i in range(cfg.n_illegal):
            did = f"X{i + 1:04d}"
            profile = rng.choices(profiles, weights)[0]
            corporate = rng.random() < 0.5
            base = f"{rng.choice(_COMPANY_WORDS)}{rng.choice(_COMPANY_WORDS).lower()}"
            name = (f"{base} {rng.choice(('Beheer', 'Management', 'Services'))} B.V."
                    if corporate else self._unique_person_name())
            if profile == PROFILE_CONCENTRATED:
                self._csp_like(did, name, corporate, rng.randint(8, 20), 1, "7010")
            elif profile == PROFILE_FRAGMENTED:
                self._csp_like(did, name, corporate, rng.randint(8, 20),
                               rng.randint(5, 10), "7010")
            elif profile == PROFILE_FRONTMEN:
                self._csp_like(did, name, corporate, rng.randint(4, 8), 2, "7010")
            else:  # RotatingStrawmen: ring members co-direct each other's firms
                self._csp_like(did, name, corporate, rng.randint(4, 8), 1, "7010")
                ring.append((did, name))
            if rng.random() < 0.4:
                self.leak_officers.append(name.lower())
            self.labels.append([did, "illegal", profile])
        for idx, (did, name) in enumerate(ring):
            other = ring[(idx + 1) % len(ring)]
            companies = [d[3] for d in self.directorships if d[0] == other[0]][:2]
            for cid in companies:
                self._add_directorship(did, name, "", cid, "Directeur")

    def noise_leaks(self) -> None:
        rng = self.rng
        for _ in range(200):
            self.leak_addresses.append(
                f"{rng.choice(_STREETS).lower()} {rng.randint(1, 300)} suite {rng.randint(1, 90)} road town tortola")
        for _ in range(200):
            self.leak_companies.append(
                f"{rng.choice(_COMPANY_WORDS).lower()} {rng.choice(('overseas', 'international', 'global'))} ltd")
        for _ in range(200):
            self.leak_officers.append(self._person_name().lower())

    def build(self) -> SynthBundle:
        self.background()
        self.licensed()
        self.illegal()
        self.noise_leaks()

        def to_csv(header: list[str], rows: list[list[str]]) -> str:
            out = io.StringIO()
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
            return out.getvalue()

        from .ingest import COMPANY_COLUMNS, DIRECTORSHIP_COLUMNS, EVENT_COLUMNS

        return SynthBundle(
            companies_csv=to_csv(COMPANY_COLUMNS, self.companies),
            directorships_csv=to_csv(DIRECTORSHIP_COLUMNS, self.directorships),
            events_csv=to_csv(EVENT_COLUMNS, self.events),
            register_csv=to_csv(
                ["csp_name", "registration_number", "postcode", "street_number",
                 "street", "city"], self.register),
            leaks_addresses="".join(line + "\n" for line in self.leak_addresses),
            leaks_companies="".join(line + "\n" for line in self.leak_companies),
            leaks_officers="".join(line + "\n" for line in self.leak_officers),
            labels_csv=to_csv(["director_id", "role", "profile"], self.labels),
        )


def synth_generate(cfg: SynthConfig) -> SynthBundle:
    """Generate a parse-clean registry bundle with planted ground truth."""
    cfg.validate()
    return _Builder(cfg).build()
