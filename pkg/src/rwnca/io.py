"""Solution files (JSON) and per-demand provisioning reports (markdown / CSV).

A solution file carries an instance fingerprint (topology hash,
destination, wavelength count) and is refused when loaded against a
different topology.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from importlib import resources

from .model import CLIENT_SIDE, NETWORK_SIDE, CodingPair, Lightpath, Provision, Solution
from .topology import Demand, Instance, Topology

FORMAT = "rwnca-solution/1"


class SolutionFormatError(ValueError):
    pass


class FingerprintMismatch(SolutionFormatError):
    pass


@dataclass(frozen=True)
class Fingerprint:
    topology: str
    destination: int | None
    wavelengths: int

    @classmethod
    def of(cls, inst: Instance) -> "Fingerprint":
        dests = inst.destinations
        return cls(inst.topology.fingerprint(), next(iter(dests)) if len(dests) == 1 else None,
                   len(inst.wavelengths))


@dataclass(frozen=True)
class SolutionFile:
    fingerprint: Fingerprint
    solution: Solution
    design: int | None = None

    @classmethod
    def of(cls, inst: Instance, sol: Solution, design: int | None = None) -> "SolutionFile":
        return cls(Fingerprint.of(inst), sol, design)

    def instance(self, topology: Topology) -> Instance:
        """Rebuild the instance, refusing a topology other than the recorded one."""
        got = topology.fingerprint()
        if got != self.fingerprint.topology:
            raise FingerprintMismatch(f"solution was made for topology {self.fingerprint.topology}, "
                                      f"got {got}")
        demands = [p.demand for p in sorted(self.solution.provisions, key=lambda p: p.demand.id)]
        try:
            inst = Instance.create(topology, demands, self.fingerprint.wavelengths)
        except ValueError as exc:
            raise SolutionFormatError(str(exc)) from None
        if Fingerprint.of(inst) != self.fingerprint:
            raise FingerprintMismatch(f"demand set does not match recorded destination "
                                      f"{self.fingerprint.destination}")
        return inst

    # -- JSON ---------------------------------------------------------------------
    def to_dict(self) -> dict:
        fp = self.fingerprint
        return {
            "format": FORMAT,
            "fingerprint": {"topology": fp.topology, "destination": fp.destination, "wavelengths": fp.wavelengths},
            "design": self.design,
            "demands": [
                {
                    "id": p.demand.id, "source": p.demand.src, "destination": p.demand.dst,
                    "working": {"route": list(p.working.route), "wavelength": p.working.wavelength},
                    "protection": {"route": list(p.protection.route), "wavelength": p.protection.wavelength},
                    "configuration": p.configuration,
                }
                for p in sorted(self.solution.provisions, key=lambda p: p.demand.id)
            ],
            "coding": [
                {"pair": list(c.demands), "node": c.node, "links": list(c.route), "wavelength": c.wavelength}
                for c in self.solution.coding
            ],
        }

    def to_json(self) -> str:
        text = json.dumps(self.to_dict(), indent=2, ensure_ascii=False)
        # integer arrays (routes, pairs) on one line
        text = re.sub(r"\[\s*(-?\d+(?:,\s*-?\d+)*)\s*\]",
                      lambda m: "[" + ", ".join(re.split(r",\s*", m.group(1))) + "]", text)
        return text + "\n"

    @classmethod
    def from_dict(cls, doc) -> "SolutionFile":
        try:
            if doc.get("format") != FORMAT:
                raise SolutionFormatError(f"unsupported format tag {doc.get('format')!r}")
            fp = doc["fingerprint"]
            fingerprint = Fingerprint(str(fp["topology"]), _opt_int(fp["destination"]), _int(fp["wavelengths"]))
            provisions = []
            for row in doc["demands"]:
                demand = Demand(_int(row["id"]), _int(row["source"]), _int(row["destination"]))
                p = Provision(demand, _lightpath(row["working"]), _lightpath(row["protection"]))
                tag = row.get("configuration", p.configuration)
                if tag not in (NETWORK_SIDE, CLIENT_SIDE):
                    raise SolutionFormatError(f"demand {demand}: unknown configuration {tag!r}")
                if tag != p.configuration:
                    raise SolutionFormatError(f"demand {demand}: tagged {tag} but wavelengths say {p.configuration}")
                provisions.append(p)
            coding = []
            for row in doc.get("coding", []):
                pair = tuple(sorted(_int(v) for v in row["pair"]))
                coding.append(CodingPair(pair, _int(row["node"]), tuple(_int(v) for v in row["links"]),
                                         _int(row["wavelength"])))
            design = doc.get("design")
            return cls(fingerprint, Solution(tuple(provisions), tuple(coding)),
                       None if design is None else _int(design))
        except SolutionFormatError:
            raise
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise SolutionFormatError(f"malformed solution document: {exc!r}") from None

    @classmethod
    def from_json(cls, text: str) -> "SolutionFile":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SolutionFormatError(f"not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise SolutionFormatError("top-level JSON value must be an object")
        return cls.from_dict(doc)


def _int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SolutionFormatError(f"expected an integer, got {v!r}")
    return v


def _opt_int(v):
    return None if v is None else _int(v)


def _lightpath(row) -> Lightpath:
    return Lightpath(tuple(_int(v) for v in row["route"]), _int(row["wavelength"]))


def load_solution(text: str, topology: Topology) -> tuple[Instance, SolutionFile]:
    sf = SolutionFile.from_json(text)
    return sf.instance(topology), sf


def reference_solution_text(design: int) -> str:
    """Published optimum for all-to-one traffic into node 3 of the bundled COST239 (designs 4 and 5)."""
    if design not in (4, 5):
        raise ValueError("reference solutions exist for designs 4 and 5 only")
    return resources.files("rwnca.data").joinpath(f"reference_design{design}_dest3.json").read_text()


def reference_solution(design: int) -> SolutionFile:
    return SolutionFile.from_json(reference_solution_text(design))


# -- reports ----------------------------------------------------------------------

PROVISION_COLUMNS = ("Demand", "W-route", "λw", "P-route", "λp", "Connection Type")
CODING_COLUMNS = ("Coded Demands", "Coding Node", "Coding links", "Coding λ")
_LABEL = {NETWORK_SIDE: "Network-side", CLIENT_SIDE: "Client-side"}
_UNLABEL = {v.lower(): k for k, v in _LABEL.items()}


def _route(r) -> str:
    return "(" + "-".join(map(str, r)) + ")"


def _demand(d: Demand) -> str:
    return f"{d.src}→{d.dst}"


def _rows(sf: SolutionFile):
    sol = sf.solution
    by_id = {p.demand.id: p.demand for p in sol.provisions}
    prov = [(_demand(p.demand), _route(p.working.route), f"λ{p.working.wavelength}", _route(p.protection.route),
             f"λ{p.protection.wavelength}", _LABEL[p.configuration])
            for p in sorted(sol.provisions, key=lambda p: p.demand.id)]
    coding = [(" ⊕ ".join(f"({_demand(by_id[d])})" for d in c.demands), str(c.node), _route(c.route), f"λ{c.wavelength}")
              for c in sol.coding]
    return prov, coding


def _header(sf: SolutionFile) -> str:
    fp = sf.fingerprint
    design = "" if sf.design is None else f" design={sf.design}"
    return f"instance topology={fp.topology} destination={fp.destination} wavelengths={fp.wavelengths}{design}"


def _md_table(cols, rows) -> str:
    cells = [list(cols)] + [list(r) for r in rows]
    width = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    fmt = lambda row: "| " + " | ".join(c.ljust(w) for c, w in zip(row, width)) + " |"
    lines = [fmt(cells[0]), "| " + " | ".join("-" * w for w in width) + " |"]
    lines += [fmt(r) for r in cells[1:]]
    return "\n".join(lines)


def render_report(sf: SolutionFile, fmt: str = "markdown") -> str:
    prov, coding = _rows(sf)
    if fmt == "markdown":
        return (f"<!-- {_header(sf)} -->\n\n### Provisioning\n\n{_md_table(PROVISION_COLUMNS, prov)}\n\n"
                f"### Coding\n\n{_md_table(CODING_COLUMNS, coding)}\n")
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# {_header(sf)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PROVISION_COLUMNS)
        w.writerows(prov)
        buf.write("\n")
        w.writerow(CODING_COLUMNS)
        w.writerows(coding)
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


_HEADER_RE = re.compile(r"instance topology=(\S+) destination=(\S+) wavelengths=(\d+)(?: design=(\d+))?")
_DEMAND_RE = re.compile(r"^\s*(\d+)\s*(?:→|->)\s*(\d+)\s*$")


def _parse_route(text: str) -> tuple[int, ...]:
    m = re.fullmatch(r"\s*\(([\d\s-]+)\)\s*", text)
    if not m:
        raise SolutionFormatError(f"bad route cell {text!r}")
    return tuple(int(v) for v in m.group(1).split("-"))


def _parse_lambda(text: str) -> int:
    m = re.fullmatch(r"\s*(?:λ|lambda)?(\d+)\s*", text)
    if not m:
        raise SolutionFormatError(f"bad wavelength cell {text!r}")
    return int(m.group(1))


def parse_report(text: str) -> SolutionFile:
    """Read a report back. Demand ids follow row order, as in the files :func:`render_report` reads."""
    m = _HEADER_RE.search(text)
    if not m:
        raise SolutionFormatError("report has no instance line")
    dest = None if m.group(2) == "None" else int(m.group(2))
    fp = Fingerprint(m.group(1), dest, int(m.group(3)))
    design = int(m.group(4)) if m.group(4) else None
    if "|" in text:
        tables = _md_tables(text)
    else:
        tables = _csv_tables(text)
    if len(tables) != 2:
        raise SolutionFormatError(f"expected provisioning and coding tables, found {len(tables)}")
    (pcols, prows), (ccols, crows) = tables
    if tuple(pcols) != PROVISION_COLUMNS or tuple(ccols) != CODING_COLUMNS:
        raise SolutionFormatError("unexpected report columns")
    provisions, ids = [], {}
    for i, row in enumerate(prows):
        dm = _DEMAND_RE.match(row[0])
        if not dm:
            raise SolutionFormatError(f"bad demand cell {row[0]!r}")
        key = (int(dm.group(1)), int(dm.group(2)))
        if key in ids:
            raise SolutionFormatError(f"demand {row[0]} listed twice")
        ids[key] = i
        p = Provision(Demand(i, *key), Lightpath(_parse_route(row[1]), _parse_lambda(row[2])),
                      Lightpath(_parse_route(row[3]), _parse_lambda(row[4])))
        if _UNLABEL.get(row[5].strip().lower()) != p.configuration:
            raise SolutionFormatError(f"demand {row[0]}: connection type {row[5]!r} contradicts wavelengths")
        provisions.append(p)
    coding = []
    for row in crows:
        pair = re.findall(r"(\d+)\s*(?:→|->)\s*(\d+)", row[0])
        if len(pair) != 2:
            raise SolutionFormatError(f"bad coded-demands cell {row[0]!r}")
        try:
            d = tuple(sorted(ids[(int(a), int(b))] for a, b in pair))
        except KeyError:
            raise SolutionFormatError(f"coded pair {row[0]!r} names an unlisted demand") from None
        coding.append(CodingPair(d, int(row[1]), _parse_route(row[2]), _parse_lambda(row[3])))
    return SolutionFile(fp, Solution(tuple(provisions), tuple(coding)), design)


def _md_tables(text):
    tables, cur = [], None
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("|"):
            cells = [c.strip() for c in s.strip("|").split("|")]
            if cur is None:
                cur = (cells, [])
                tables.append(cur)
            elif not all(set(c) <= set("-: ") for c in cells):
                cur[1].append(cells)
        else:
            cur = None
    return tables


def _csv_tables(text):
    blocks, cur = [], []
    for line in text.splitlines():
        if line.startswith("#"):
            continue
        if not line.strip():
            if cur:
                blocks.append(cur)
            cur = []
        else:
            cur.append(line)
    if cur:
        blocks.append(cur)
    out = []
    for b in blocks:
        rows = list(csv.reader(b))
        out.append((rows[0], rows[1:]))
    return out
