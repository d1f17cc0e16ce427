"""The golden-table corpus: identifiers, how to recompute each table, and diffs."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .em import Coefficients, em_table
from .tables import Difference, Table, diff, read_tsv, render

ENV_DIR = "S4TOWER_GOLDEN_DIR"
DATA = Path(__file__).parent / "data"


class GoldenError(LookupError):
    pass


def golden_dir(override: str | Path | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get(ENV_DIR)
    return Path(env) if env else DATA / "tables"


def _em(coeff: str, p: int, q: int | None, top: int) -> Callable[[], Table]:
    return lambda: em_table(Coefficients.parse(coeff), p, q, range(top + 1))


def _postnikov(primes: tuple[int, ...]) -> Callable[[], Table]:
    def run() -> Table:
        from .stable import TowerSpec, postnikov_table, run_stable_tower

        reports = [run_stable_tower(TowerSpec.load(DATA / "towers" / ("stable_p%d.yaml" % p))) for p in primes]
        return postnikov_table(reports)

    return run


def _unstable(name: str) -> Callable[[], Table]:
    def run() -> Table:
        from .sss import FibrationSpec, read_off_total, run_differentials

        t = read_off_total(run_differentials(FibrationSpec.load(DATA / "fibrations" / (name + ".yaml"))))
        return Table(t.columns, t.rows)

    return run


@dataclass(frozen=True)
class GoldenEntry:
    ident: str
    filename: str
    compute: Callable[[], Table]
    description: str


REGISTRY: dict[str, GoldenEntry] = {
    e.ident: e
    for e in [
        GoldenEntry("em-HZ-p2", "em_HZ_p2.tsv", _em("Z", 2, None, 10), "H*(HZ; F2) module generators"),
        GoldenEntry("em-HZ2-p2", "em_HZ2_p2.tsv", _em("Z2", 2, None, 7), "H*(HZ2; F2) module generators"),
        GoldenEntry("em-KZ4-p2", "em_KZ_4_p2.tsv", _em("Z", 2, 4, 10), "H*(K(Z,4); F2)"),
        GoldenEntry("em-KZ2-5-p2", "em_KZ2_5_p2.tsv", _em("Z2", 2, 5, 7), "H*(K(Z2,5); F2)"),
        GoldenEntry("em-KZ2-6-p2", "em_KZ2_6_p2.tsv", _em("Z2", 2, 6, 7), "H*(K(Z2,6); F2)"),
        GoldenEntry("em-HZ-p3", "em_HZ_p3.tsv", _em("Z", 3, None, 10), "H*(HZ; F3) module generators"),
        GoldenEntry("em-HZ3-p3", "em_HZ3_p3.tsv", _em("Z3", 3, None, 7), "H*(HZ3; F3) module generators"),
        GoldenEntry("em-KZ4-p3", "em_KZ_4_p3.tsv", _em("Z", 3, 4, 10), "H*(K(Z,4); F3)"),
        GoldenEntry("em-KZ3-7-p3", "em_KZ3_7_p3.tsv", _em("Z3", 3, 7, 7), "H*(K(Z3,7); F3)"),
        GoldenEntry("postnikov-p2", "postnikov_p2.tsv", _postnikov((2,)), "stable Postnikov stages at p = 2"),
        GoldenEntry("postnikov-p35", "postnikov_p35.tsv", _postnikov((3, 5)), "stable Postnikov stages at p = 3, 5"),
        GoldenEntry("unstable-x1", "unstable_x1.tsv", _unstable("x1"), "H*(X1; F2) from the Serre spectral sequence"),
        GoldenEntry("unstable-x2", "unstable_x2.tsv", _unstable("x2"), "H*(X2; F2) from the Serre spectral sequence"),
    ]
}


def entry(ident: str) -> GoldenEntry:
    try:
        return REGISTRY[ident]
    except KeyError:
        raise GoldenError("unknown table %r (known: %s)" % (ident, ", ".join(REGISTRY))) from None


def golden_path(ident: str, directory: str | Path | None = None) -> Path:
    return golden_dir(directory) / entry(ident).filename


def golden_diff(ident: str, directory: str | Path | None = None, computed: Table | None = None) -> list[Difference]:
    """Row-level differences between a recomputed table and its golden file.

    An empty list means the TSV serialisations are byte-identical.
    """
    path = golden_path(ident, directory)
    if not path.exists():
        raise GoldenError("golden file %s is missing" % path)
    table = computed if computed is not None else entry(ident).compute()
    expected_text = path.read_text()
    actual_text = render(table, "tsv")
    if expected_text == actual_text:
        return []
    diffs = diff(read_tsv(path), table)
    if not diffs:
        # same cells, different bytes (whitespace, trailing newline, comments)
        diffs = [Difference("file", "*", "%d bytes" % len(expected_text), "%d bytes" % len(actual_text))]
    return diffs
