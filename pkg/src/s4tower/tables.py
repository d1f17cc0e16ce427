"""Plain tables: rendering to text/TSV/Markdown/JSON, TSV parsing, golden diffs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

EMPTY = "(none)"
FORMATS = ("text", "tsv", "md", "json")


@dataclass
class Table:
    columns: list[str]
    rows: list[list[str]]
    title: str = ""
    notes: list[str] = field(default_factory=list)

    def cell(self, value: str) -> str:
        return value if value else EMPTY


def render(t: Table, fmt: str) -> str:
    if fmt == "tsv":
        lines = ["\t".join(t.columns)] + ["\t".join(t.cell(c) for c in r) for r in t.rows]
        return "\n".join(lines) + "\n"
    if fmt == "md":
        lines = []
        if t.title:
            lines += ["### " + t.title, ""]
        lines.append("| " + " | ".join(t.columns) + " |")
        lines.append("|" + "|".join("---" for _ in t.columns) + "|")
        lines += ["| " + " | ".join(c for c in r) + " |" for r in t.rows]
        if t.notes:
            lines.append("")
            lines += ["- " + n for n in t.notes]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        obj = {"title": t.title, "columns": t.columns, "rows": t.rows, "notes": t.notes}
        return json.dumps(obj, indent=2) + "\n"
    if fmt == "text":
        cells = [t.columns] + [[t.cell(c) for c in r] for r in t.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(t.columns))]
        lines = [t.title] if t.title else []
        for k, r in enumerate(cells):
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        lines += t.notes
        return "\n".join(lines) + "\n"
    raise ValueError("unknown format %r (choose from %s)" % (fmt, ", ".join(FORMATS)))


def parse_tsv(text: str) -> Table:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty table")
    cols = lines[0].split("\t")
    rows = []
    for n, ln in enumerate(lines[1:], start=2):
        r = ln.split("\t")
        if len(r) != len(cols):
            raise ValueError("line %d has %d cells, expected %d" % (n, len(r), len(cols)))
        rows.append(["" if c == EMPTY else c for c in r])
    return Table(cols, rows)


def read_tsv(path: str | Path) -> Table:
    return parse_tsv(Path(path).read_text())


@dataclass(frozen=True)
class Difference:
    row: str
    column: str
    expected: str
    actual: str

    def __str__(self) -> str:
        return "row %s, column %s: expected %r, got %r" % (self.row, self.column, self.expected, self.actual)


def diff(expected: Table, actual: Table) -> list[Difference]:
    """Cell-level differences keyed by the first column."""
    out: list[Difference] = []
    if expected.columns != actual.columns:
        out.append(Difference("header", "*", "\t".join(expected.columns), "\t".join(actual.columns)))
        return out
    exp = {r[0]: r for r in expected.rows}
    act = {r[0]: r for r in actual.rows}
    for key in list(exp) + [k for k in act if k not in exp]:
        if key not in act:
            out.append(Difference(key, "*", "\t".join(exp[key]), "<missing>"))
        elif key not in exp:
            out.append(Difference(key, "*", "<missing>", "\t".join(act[key])))
        else:
            for col, a, b in zip(expected.columns, exp[key], act[key]):
                if a != b:
                    out.append(Difference(key, col, a, b))
    return out
