"""Report assembly and rendering: tab-delimited tables or JSON ("structured")."""

import json
from fractions import Fraction

from .fibres import INF, LEVELS, RELATION


def render_value(lattice, v, c=None):
    """Booleans as 0/1; levels as distances, symbolic (c^n) or for a concrete c."""
    if lattice is not LEVELS:
        return "1" if v else "0"
    if v == INF:
        return "0"
    if c is not None:
        return str(Fraction(c) ** v)
    if v == 0:
        return "1"
    return "c" if v == 1 else f"c^{v}"


def fibre_rows(fe, names, c=None):
    """Rows of a relation (with a header row) or of a predicate."""
    r = lambda v: render_value(fe.lattice, v, c)
    if fe.kind == RELATION:
        rows = [[""] + list(names)]
        for x, row in enumerate(fe.rows()):
            rows.append([names[x]] + [r(v) for v in row])
        return rows
    return [["state", "value"]] + [[names[x], r(v)] for x, v in enumerate(fe.values)]


def fibre_json(fe, names, c=None):
    r = lambda v: render_value(fe.lattice, v, c)
    if fe.kind == RELATION:
        return {names[x]: {names[y]: r(fe.at(x, y)) for y in range(fe.size)} for x in range(fe.size)}
    return {names[x]: r(v) for x, v in enumerate(fe.values)}


class Report:
    def __init__(self, command):
        self.command = command
        self.meta = []           # (key, value)
        self.sections = []       # (title, rows, json payload)

    def add(self, key, value):
        self.meta.append((key, value))

    def section(self, title, rows, payload=None):
        self.sections.append((title, rows, rows if payload is None else payload))

    def fibre(self, title, fe, names, c=None):
        self.section(title, fibre_rows(fe, names, c), fibre_json(fe, names, c))

    def render(self, fmt="table"):
        if fmt == "structured":
            doc = {"command": self.command,
                   "meta": {k: v for k, v in self.meta},
                   "sections": {t: p for t, _, p in self.sections}}
            return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
        lines = [f"# {self.command}"]
        lines += [f"{k}\t{v}" for k, v in self.meta]
        for title, rows, _ in self.sections:
            lines.append(f"[{title}]")
            lines += ["\t".join(str(c) for c in row) for row in rows]
        return "\n".join(lines) + "\n"
