"""Command-line front end: ``s4tower <subcommand> [options]``.

Exit status: 0 ok, 2 configuration error, 3 computation aborted, 4 golden
mismatch.  Failures print one JSON record on stderr.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Sequence

import yaml

from . import flux, golden, sss, stable
from .em import Coefficients, WindowError, em_table
from .steenrod import SteenrodError, format_element, op
from .tables import FORMATS, Table, render

OK, CONFIG, ABORTED, MISMATCH = 0, 2, 3, 4
DATA = Path(__file__).parent / "data"
FIBRATIONS = {p.stem: p for p in sorted((DATA / "fibrations").glob("*.yaml"))}


class Aborted(RuntimeError):
    """The computation ran but could not resolve everything it was asked for."""


class Mismatch(RuntimeError):
    def __init__(self, message: str, report: str):
        super().__init__(message)
        self.report = report


def _space(text: str) -> tuple[Coefficients, int | None]:
    t = text.replace(" ", "")
    m = re.fullmatch(r"K\((Z\d*),(\d+)\)", t)
    if m:
        return Coefficients.parse(m.group(1)), int(m.group(2))
    m = re.fullmatch(r"H(Z\d*)", t)
    if m:
        return Coefficients.parse(m.group(1)), None
    raise ValueError("bad space %r (use K(Z,4), K(Z2,5), HZ or HZ2)" % text)


# ---------------------------------------------------------------------------
# subcommands; each returns the text to print


def cmd_adem(a) -> str:
    out = format_element(op(a.expr, a.p))
    if a.format == "json":
        return json.dumps({"input": a.expr, "admissible": out}) + "\n"
    return out + "\n"


def cmd_em_basis(a) -> str:
    coeff, q = _space(a.space)
    top = a.max_degree if a.max_degree is not None else 10 if q is None else q + 10
    hi = top if q is None else top - q
    if hi < 0:
        raise ValueError("--max-degree %d is below the fundamental degree %d" % (top, q))
    return render(em_table(coeff, a.p, q, range(hi + 1)), a.format)


def _tower(path: Path | None, p: int) -> stable.TowerSpec:
    return stable.TowerSpec.load(path or DATA / "towers" / ("stable_p%d.yaml" % p))


def _check_resolved(reports) -> None:
    bad = [s.name for r in reports for s in r.stages if not s.is_resolved()]
    if bad:
        raise Aborted("stages with unresolved entries: %s" % ", ".join(bad))


def cmd_stable_tower(a) -> str:
    if a.assemble:
        reports = [stable.run_stable_tower(_tower(None, p), a.window) for p in (2, 3, 5)]
        _check_resolved(reports)
        summary = stable.assemble_primes(reports)
        rows, seen = [], set()
        for s in summary:
            # each stage inherits all earlier relations; show only the new ones
            new = [r for r in s.relations if r not in seen]
            seen.update(s.relations)
            rows.append([s.name, str(s.fiber_degree), s.fiber, str(s.order), str(len(new))])
        findings = stable.pi_consistency_check(summary, stable.HomotopyTable.load())
        notes = ["finding: " + f.message for f in findings] or ["no discrepancy with the homotopy table"]
        t = Table(["stage", "degree", "fiber", "order", "new relations"], rows, "Integral tower", notes)
        return render(t, a.format)
    if a.spec:
        reports = [stable.run_stable_tower(_tower(Path(a.spec), a.p), a.window)]
    elif a.p in (3, 5) and a.both_odd:
        reports = [stable.run_stable_tower(_tower(None, p), a.window) for p in (3, 5)]
    else:
        reports = [stable.run_stable_tower(_tower(None, a.p), a.window)]
    _check_resolved(reports)
    return render(stable.postnikov_table(reports), a.format)


def _fibration(a) -> sss.FibrationSpec:
    if a.spec:
        spec = sss.FibrationSpec.load(a.spec)
    else:
        key = (a.name or "x1").lower()
        if key not in FIBRATIONS:
            raise ValueError("unknown fibration %r (shipped: %s)" % (a.name, ", ".join(FIBRATIONS)))
        spec = sss.FibrationSpec.load(FIBRATIONS[key])
    if a.window is not None:
        spec.window = a.window
    return spec


def cmd_fiber_check(a) -> str:
    table = stable.HomotopyTable.load()
    if a.fiber:
        groups = stable.fiber_groups((0, c, n) for c, n in stable.parse_fiber(a.fiber))
        label = a.fiber
    else:
        specs = [sss.FibrationSpec.load(p) for p in FIBRATIONS.values()]
        groups = stable.fiber_groups((s.prime, f.coefficients, f.degree) for s in specs for f in s.fiber)
        label = "shipped fibrations"
    rows = [[str(n), str(g), str(table.unstable.get(n, "?"))] for n, g in groups.items()]
    findings = stable.unstable_fiber_check(groups, table, a.fiber or "")
    notes = ["finding: " + str(f) for f in findings] or ["no discrepancy with the homotopy table"]
    return render(Table(["n", "fiber pi_n", "pi_n(S^4)"], rows, "Fibers of " + label, notes), a.format)


def cmd_sss(a) -> str:
    if a.fiber_check or a.fiber:
        return cmd_fiber_check(a)
    result = sss.run_differentials(_fibration(a))
    if a.show == "log":
        return render(sss.log_table(result), a.format)
    if a.show == "einf":
        return render(sss.e_infinity_table(result), a.format)
    if a.show == "chart":
        return "E_2\n" + sss.chart(result.e2) + "\nE_infinity\n" + sss.chart(result.e_inf)
    return render(sss.read_off_total(result, a.max_degree), a.format)


def _ring(a) -> flux.FiniteGradedRing:
    if a.ring:
        return flux.FiniteGradedRing.load(a.ring)
    name = (a.witness or "hp1-cubed").replace("-", "_")
    path = DATA / "rings" / (name + ".yaml")
    if not path.exists():
        shipped = ", ".join(q.stem.replace("_", "-") for q in sorted(path.parent.glob("*.yaml")))
        raise ValueError("unknown witness %r (shipped: %s)" % (a.witness, shipped))
    return flux.FiniteGradedRing.load(path)


def cmd_flux(a) -> str:
    ring = _ring(a)
    if a.sweep is not None:
        rows, hits = [], set()
        for cs, m2, m3, pairing in flux.coefficient_sweep(ring, a.sweep):
            if m2 and m3:
                hits.add(pairing)
                if pairing % 6:
                    rows.append([" ".join(map(str, cs)), str(pairing)])
        notes = [
            "classes meeting both congruences take pairings %s" % sorted(abs(h) for h in hits if h)[:6],
            flux.NECESSARY,
        ]
        t = Table(["coefficients", "pairing"], rows, "Pairings not divisible by 6", notes)
        return render(t, a.format)
    # default class: the sum of the degree-4 basis
    x = ring.parse(a.x) if a.x else ring.element(4, [1] * ring.rank(4))
    if a.witness and not a.x:
        trace = flux.witness_lift_argument(ring, x)
        if a.format == "json":
            steps = [{"step": s.step, "holds": s.holds, "detail": s.detail} for s in trace.steps]
            return json.dumps({"steps": steps, "pairing": trace.pairing, "holds": trace.holds}, indent=2) + "\n"
        return trace.to_markdown()
    check = flux.unstable_vanishing_check if a.unstable else flux.stable_divisibility_check
    report = check(ring, x)
    if a.format == "json":
        return json.dumps(report.as_dict(), indent=2) + "\n"
    return report.to_markdown()


def cmd_golden_diff(a) -> str:
    ids = list(golden.REGISTRY) if a.all else [a.table]
    if not ids or ids == [None]:
        raise ValueError("give a table id or --all")
    lines, bad = [], []
    for ident in ids:
        diffs = golden.golden_diff(ident, a.golden_dir)
        lines.append("%s: %s" % (ident, "ok" if not diffs else "%d difference(s)" % len(diffs)))
        lines += ["  " + str(d) for d in diffs]
        if diffs:
            bad.append(ident)
    text = "\n".join(lines) + "\n"
    if bad:
        raise Mismatch("golden mismatch: %s" % ", ".join(bad), text)
    return text


def cmd_golden_list(a) -> str:
    rows = [[e.ident, e.filename, e.description] for e in golden.REGISTRY.values()]
    return render(Table(["id", "file", "contents"], rows), a.format)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=2, help="prime (default 2)")
    common.add_argument("--max-degree", "--max", dest="max_degree", type=int, default=None)
    common.add_argument("--window", type=int, default=None)
    common.add_argument("--spec", default=None, help="YAML configuration file")
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--golden-dir", default=None, help="overrides $%s" % golden.ENV_DIR)

    ap = argparse.ArgumentParser(prog="s4tower", description="Steenrod algebra and Postnikov tower computations.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="subcommand")

    s = sub.add_parser("adem", parents=[common], help="reduce a Steenrod element to admissible form")
    s.add_argument("expr")
    s.set_defaults(run=cmd_adem)

    s = sub.add_parser("em-basis", parents=[common], help="Eilenberg-MacLane cohomology table")
    s.add_argument("--space", required=True, help='e.g. "K(Z,4)", "K(Z2,5)", "HZ"')
    s.set_defaults(run=cmd_em_basis)

    s = sub.add_parser("stable-tower", parents=[common], help="stable Postnikov tower table")
    s.add_argument("--assemble", action="store_true", help="combine p = 2, 3, 5 into integral stages")
    s.add_argument("--both-odd", action="store_true", help="with --p 3 or 5: tabulate p = 3 and 5 together")
    s.set_defaults(run=cmd_stable_tower)

    s = sub.add_parser("sss", parents=[common], help="Serre spectral sequence of a tower stage")
    s.add_argument("--name", default=None, help="shipped fibration: %s" % ", ".join(FIBRATIONS))
    s.add_argument("--show", choices=("total", "einf", "log", "chart"), default="total")
    s.add_argument("--fiber-check", action="store_true", help="compare stage fibers with pi_n(S^4)")
    s.add_argument("--fiber", default=None, help='fiber to check instead, e.g. "K(Z4,7) x K(Z,7)"')
    s.set_defaults(run=cmd_sss)

    s = sub.add_parser("flux", parents=[common], help="cube-pairing integrality checks")
    s.add_argument("--witness", default=None, help="shipped ring: hp1-cubed or z-t4")
    s.add_argument("--ring", default=None, help="ring presentation (YAML)")
    s.add_argument("--x", default=None, help='degree-4 class, e.g. "u + v + w"')
    s.add_argument("--unstable", action="store_true", help="check x^2 = 0 instead of divisibility")
    s.add_argument("--sweep", type=int, default=None, metavar="BOUND")
    s.set_defaults(run=cmd_flux)

    s = sub.add_parser("golden-diff", parents=[common], help="compare recomputed tables with the golden corpus")
    s.add_argument("table", nargs="?", default=None)
    s.add_argument("--all", action="store_true")
    s.add_argument("--list", action="store_true", help="list table ids")
    s.set_defaults(run=cmd_golden_diff)
    return ap


def _error(kind: str, message: str, code: int, **extra) -> int:
    rec = {"error": kind, "message": message, "exit": code}
    rec.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "golden-diff" and args.list:
        args.run = cmd_golden_list
    try:
        text = args.run(args)
    except Mismatch as e:
        sys.stdout.write(e.report)
        return _error("golden-mismatch", str(e), MISMATCH)
    except (sss.UnknownStructure, WindowError, Aborted) as e:
        return _error(type(e).__name__, str(e), ABORTED)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        return _error("YAMLError", str(e.problem), CONFIG, line=mark.line + 1 if mark else None, column=mark.column + 1 if mark else None)
    except OSError as e:
        return _error(type(e).__name__, "%s: %s" % (e.strerror or e, e.filename), CONFIG)
    except (yaml.YAMLError, golden.GoldenError, SteenrodError, ValueError) as e:
        return _error(type(e).__name__, str(e.args[0]) if e.args else str(e), CONFIG)
    sys.stdout.write(text)
    return OK


if __name__ == "__main__":
    sys.exit(main())
