"""Command-line front end: input documents, subcommands and reports.

Exit codes: 0 success or verdict true, 2 verdict false or hypothesis violation,
1 input errors.
"""
import argparse
import json
import logging
import sys
from dataclasses import dataclass, field

from . import config
from .constructions import cartan_prolongation, normal_form, counterexample_fixtures, fixture
from .distributions import (
    Distribution, PfaffianSystem, cauchy_characteristic, derived_flag, flag_ranks,
    regularity, sample_points,
)
from .engel import (
    check_generalized_engel, check_pfaffian_criteria, distribution_to_forms, forms_to_distribution,
)
from .errors import CorankError, EmptyInputError, EngelFlagError, HypothesisViolation, InputDocumentError
from .expr import parse_expression
from .exterior import Chart, ExtForm, RationalPoint, VectorField, lie_bracket
from .moser import (
    CHECKPOINT_TIMES, OneParamFamily, integrate_moser_flow, kernel_distributions, moser_field_at,
    verify_stability_pipeline,
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "bracket", "growth", "cauchy", "check", "pfaffian", "prolong", "normal-form",
    "fixtures", "moser-verify", "pipeline",
)
KINDS = ("vector_field", "one_form", "family")


# ---------------------------------------------------------------- input documents

@dataclass
class InputObject:
    name: str
    kind: str
    role: str | None
    value: object


@dataclass
class InputDocument:
    chart: object
    objects: list
    points: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def of_kind(self, kind, role=None):
        return [o.value for o in self.objects if o.kind == kind and (role is None or o.role == role)]

    def generators(self):
        fields = self.of_kind("vector_field", "generator") or self.of_kind("vector_field")
        if not fields:
            raise EmptyInputError("no vector fields in the document")
        return Distribution(self.chart, fields)

    def pfaffian_pair(self, kind="one_form"):
        thetas = self.of_kind(kind, "theta")
        omegas = self.of_kind(kind, "omega")
        if len(thetas) != 1:
            raise InputDocumentError(f"expected exactly one {kind} with role 'theta', found {len(thetas)}")
        return thetas[0], omegas


def _rational_point(chart, raw):
    if not isinstance(raw, (list, tuple)):
        raise InputDocumentError(f"point {raw!r} is not a list")
    try:
        return RationalPoint(chart, tuple(config.as_fraction(v) for v in raw))
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise InputDocumentError(f"bad point {raw!r}: {e}") from e


def load_document(text):
    """InputDocument from JSON text; numbers must be strings holding rationals."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputDocumentError(f"not a JSON document: {e}") from e
    if not isinstance(raw, dict) or "chart" not in raw:
        raise InputDocumentError("document needs a 'chart' list")
    try:
        chart = Chart(tuple(raw["chart"]))
    except (TypeError, ValueError) as e:
        raise InputDocumentError(str(e)) from e
    raw_objects = raw.get("objects") or {}
    if not isinstance(raw_objects, dict):
        raise InputDocumentError("'objects' must map names to object specs")
    family_chart = None
    objects, scope = [], {}
    for name, spec in raw_objects.items():
        if not isinstance(spec, dict) or spec.get("kind") not in KINDS or not isinstance(spec.get("expr"), str):
            raise InputDocumentError(f"object {name!r} needs a kind in {KINDS} and an expr")
        kind = spec["kind"]
        if kind == "family":
            if family_chart is None:
                try:
                    family_chart = chart.extend(spec.get("parameter", "t"))
                except (TypeError, ValueError) as e:
                    raise InputDocumentError(f"family {name!r}: {e}") from e
            value = parse_expression(spec["expr"], family_chart)
        else:
            value = parse_expression(spec["expr"], chart, scope)
            scope[name] = value
        expected = VectorField if kind == "vector_field" else ExtForm
        if not isinstance(value, expected) or (expected is ExtForm and value.degree != 1):
            raise InputDocumentError(f"object {name!r} is not a {kind}")
        objects.append(InputObject(name, kind, spec.get("role"), value))
    raw_points, params = raw.get("points") or [], raw.get("params") or {}
    if not isinstance(raw_points, list) or not isinstance(params, dict):
        raise InputDocumentError("'points' must be a list and 'params' an object")
    points = [_rational_point(chart, p) for p in raw_points]
    return InputDocument(chart, objects, points, dict(params))


def document_json(chart, objects, points=(), params=None):
    """Serialisable document; objects are (name, kind, role, value) tuples."""
    return {
        "chart": list(chart.names),
        "objects": {
            name: {"kind": kind, "role": role, "expr": str(value)} for name, kind, role, value in objects
        },
        "points": [[str(c) for c in p.coords] for p in points],
        "params": params or {},
    }


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------- subcommands

def _points(doc, args):
    extra = list(doc.points)
    if args.points:
        extra += [_rational_point(doc.chart, p.split(",")) for p in args.points.split(";") if p.strip()]
    return sample_points(doc.chart, extra=extra)


def _vec_text(chart, v):
    return str(VectorField.from_vector(chart, v))


def cmd_bracket(doc, args):
    fields = [o for o in doc.objects if o.kind == "vector_field"]
    if len(fields) < 2:
        raise EmptyInputError("bracket needs at least two vector fields")
    out = []
    for i, a in enumerate(fields):
        for b in fields[i + 1:]:
            out.append({"pair": [a.name, b.name], "bracket": str(lie_bracket(a.value, b.value))})
    text = "\n".join(f"[{r['pair'][0]}, {r['pair'][1]}] = {r['bracket']}" for r in out)
    return {"kind": "brackets", "brackets": out}, text, 0


def cmd_growth(doc, args):
    D = doc.generators()
    points = _points(doc, args)
    vectors = [derived_flag(D, p, args.max_depth) for p in points]
    reg = regularity([g.ranks for g in vectors], points)
    data = {
        "kind": "growth",
        "growth": list(reg.majority),
        "regular": reg.regular,
        "probabilistic": True,
        "singular_witnesses": [
            {"point": [str(c) for c in p.coords], "growth": list(v)} for p, v in reg.singular_witnesses
        ],
    }
    text = f"🔍 growth vector {tuple(reg.majority)} ({'regular' if reg.regular else 'NOT regular'} on {len(points)} points)"
    return data, text, 0


def cmd_cauchy(doc, args):
    if doc.of_kind("one_form", "theta"):
        theta, _ = doc.pfaffian_pair()
        E = PfaffianSystem(doc.chart, [theta])
    else:
        E = doc.generators()
    points = _points(doc, args)
    spaces = []
    for p in points:
        try:
            spaces.append(cauchy_characteristic(E, p))
        except CorankError as e:
            # corank drops on the singular locus
            logger.info("no characteristic at %s: %s", p, e)
            spaces.append(None)
    regular_spaces = [s for s in spaces if s is not None]
    if not regular_spaces:
        raise CorankError("the Pfaffian system has the wrong corank at every sampled point")
    reg = regularity([s.rank if s is not None else None for s in spaces], points)
    first = next((s for s in regular_spaces if s.rank == reg.majority), regular_spaces[0])
    data = {
        "kind": "cauchy",
        "rank": reg.majority,
        "regular": reg.regular,
        "probabilistic": True,
        "basis_at_first_point": [_vec_text(doc.chart, v) for v in first.basis],
        "first_point": [str(c) for c in first.point.coords],
        "singular_witnesses": [
            {"point": [str(c) for c in p.coords], "rank": r} for p, r in reg.singular_witnesses
        ],
    }
    text = f"🔍 Cauchy characteristic rank {reg.majority}: <{', '.join(data['basis_at_first_point'])}> at {first.point}"
    if not reg.regular:
        text += f" (NOT regular: {len(reg.singular_witnesses)} singular points)"
    return data, text, 0


def _render_flag(name, report):
    lines = [f"🔍 {name}: generalized Engel verdict {report.verdict}"]
    for cond, ok in report.conditions().items():
        mark = "➖" if ok is None else ("✅" if ok else "❌")
        lines.append(f"   {mark} {cond}")
    lines.append(f"   corank_D={report.corank_D} corank_E={report.corank_E} corank_L_in_D={report.corank_L_in_D}")
    return "\n".join(lines)


def cmd_check(doc, args):
    if doc.of_kind("vector_field"):
        D = doc.generators()
    elif doc.of_kind("one_form"):
        theta, omegas = doc.pfaffian_pair()
        kernel = forms_to_distribution(theta, omegas, _points(doc, args))
        if kernel.distribution is None:
            raise InputDocumentError("forms have no polynomial kernel basis on this chart")
        D = kernel.distribution
    else:
        raise EmptyInputError("check needs generators or forms")
    report = check_generalized_engel(D, _points(doc, args))
    data = report.to_dict()
    data["flag_ranks"] = list(flag_ranks(D, report.witnesses[0][0]))
    return data, _render_flag("D", report), 0 if report.verdict else 2


def cmd_pfaffian(doc, args):
    points = _points(doc, args)
    if doc.of_kind("one_form"):
        theta, omegas = doc.pfaffian_pair()
    else:
        pair = distribution_to_forms(doc.generators(), points)
        if not pair.symbolic:
            raise InputDocumentError("no polynomial Pfaffian system for these generators")
        theta, omegas = pair.theta, pair.omegas
    report = check_pfaffian_criteria(theta, omegas, points)
    lines = [f"🔍 Pfaffian criteria k={report.k} l={report.l}: verdict {report.verdict}"]
    lines += [f"   {'✅' if ok else '❌'} {c}" for c, ok in report.conditions().items()]
    return report.to_dict(), "\n".join(lines), 0 if report.verdict else 2


def cmd_prolong(doc, args):
    pro = cartan_prolongation(args.n)
    objects = [(f"L{i + 1}", "vector_field", "characteristic", X) for i, X in enumerate(pro.L.generators)]
    objects += [(f"X{i + 1}", "vector_field", "generator", X) for i, X in enumerate(pro.D.generators)]
    objects.append(("theta", "one_form", "theta", pro.theta))
    objects += [(f"omega{i + 1}", "one_form", "omega", w) for i, w in enumerate(pro.omegas)]
    data = document_json(pro.chart, objects, params={"n": args.n})
    return data, _dump(data), 0


def cmd_normal_form(doc, args):
    nf = normal_form(args.l, args.r)
    objects = [("Theta", "one_form", "theta", nf.Theta)]
    objects += [(f"Omega{i + 1}", "one_form", "omega", w) for i, w in enumerate(nf.Omegas)]
    data = document_json(nf.chart, objects, params={"l": args.l, "r": args.r})
    return data, _dump(data), 0


def fixture_document(name):
    fx = fixture(name)
    objects = [(f"X{i + 1}", "vector_field", "generator", X) for i, X in enumerate(fx.distribution.generators)]
    if fx.theta is not None:
        objects.append(("theta", "one_form", "theta", fx.theta))
    return document_json(fx.distribution.chart, objects, params={"fixture": name})


def cmd_fixtures(doc, args):
    if args.export:
        data = fixture_document(args.export)
        return data, _dump(data), 0
    reports, lines, ok = {}, [], True
    for fx in counterexample_fixtures():
        points = sample_points(fx.distribution.chart, extra=[RationalPoint.origin(fx.distribution.chart)])
        report = check_generalized_engel(fx.distribution, points)
        matches = report.regular and tuple(report.failed_conditions()) == fx.expected_failed
        ok = ok and matches
        entry = report.to_dict()
        entry["expected_failed"] = list(fx.expected_failed)
        entry["matches_expected"] = matches
        reports[fx.name] = entry
        lines.append(_render_flag(f"fixture ({fx.name})", report))
        lines.append(f"   {'✅' if matches else '❌'} expected failure {list(fx.expected_failed)}: {fx.note}")
    return {"kind": "fixtures", "reports": reports}, "\n".join(lines), 0 if ok else 2


def _family(doc):
    theta, omegas = doc.pfaffian_pair("family")
    return OneParamFamily(doc.chart, theta, tuple(omegas), t_name=theta.chart.names[-1])


def _p0(doc):
    raw = doc.params.get("p0")
    if raw is not None:
        return [float(config.as_fraction(v)) for v in raw]
    if doc.points:
        return [float(c) for c in doc.points[0].coords]
    raise InputDocumentError("moser-verify needs params.p0 or at least one point")


def _times(doc):
    return [config.as_fraction(t) for t in doc.params.get("t", [])] or list(CHECKPOINT_TIMES)


def cmd_moser_verify(doc, args):
    fam = _family(doc)
    solves, kernels = [], []
    for p in doc.points:
        for t in _times(doc):
            solves.append(moser_field_at(fam, t, p).to_dict())
            kernels.append(kernel_distributions(fam, t, p).to_dict())
    flow = integrate_moser_flow(fam, _p0(doc), steps=args.steps, h=args.h)
    data = {"kind": "moser_verify", "solves": solves, "kernels": kernels, "flow": flow.to_dict()}
    exact_ok = all(s["residual_zero"] and s["membership_L"] for s in solves)
    flow_ok = not flow.truncated and flow.max_angle <= config.SETTINGS.tolerance
    text = (f"🔍 {len(solves)} exact Moser solves, residuals zero: {exact_ok}\n"
            f"🔍 flow over {len(flow.t_grid) - 1} steps, max D angle {flow.max_angle:.3e}"
            f"{' (truncated)' if flow.truncated else ''}")
    return data, text, 0 if exact_ok and flow_ok else 2


def cmd_pipeline(doc, args):
    fam = _family(doc)
    flow = verify_stability_pipeline(fam, _p0(doc), steps=args.steps, h=args.h)
    data = {"kind": "pipeline", "flow": flow.to_dict()}
    angles = flow.max_angles()
    text = "🔍 composed flow max angles: " + ", ".join(f"{k}={v:.3e}" for k, v in sorted(angles.items()))
    ok = not flow.truncated and flow.max_angle <= config.SETTINGS.tolerance
    return data, text, 0 if ok else 2


COMMANDS = {
    "bracket": cmd_bracket,
    "growth": cmd_growth,
    "cauchy": cmd_cauchy,
    "check": cmd_check,
    "pfaffian": cmd_pfaffian,
    "prolong": cmd_prolong,
    "normal-form": cmd_normal_form,
    "fixtures": cmd_fixtures,
    "moser-verify": cmd_moser_verify,
    "pipeline": cmd_pipeline,
}
NEEDS_INPUT = {"bracket", "growth", "cauchy", "check", "pfaffian", "moser-verify", "pipeline"}


def run_subcommand(name, doc, args):
    """(report text, exit code) for one subcommand; errors become tagged messages."""
    if name not in COMMANDS:
        return f"❌ unknown subcommand {name!r}", 1
    try:
        data, text, code = COMMANDS[name](doc, args)
    except HypothesisViolation as e:
        data = {"kind": "error", "module": e.module, "stage": e.stage, "message": str(e)}
        return (_dump(data) if args.format == "json" else f"❌ {e}"), e.exit_code
    except EngelFlagError as e:
        data = {"kind": "error", "module": e.module, "message": str(e)}
        return (_dump(data) if args.format == "json" else f"❌ {e}"), e.exit_code
    if name in ("prolong", "normal-form") or (name == "fixtures" and args.export):
        return text, code
    return (_dump(data) if args.format == "json" else text), code


def build_parser():
    parser = argparse.ArgumentParser(prog="EngelFlagPy", description="Generalized Engel structure toolkit")
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("input", nargs="?", help="input document (JSON); stdin when omitted")
    parser.add_argument("--points", help="extra points, e.g. '0,1/2,0,0;1,1,1,1'")
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--h", type=float)
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--parallel", action="store_true", default=None)
    parser.add_argument("--max-depth", dest="max_depth", type=int, default=8)
    parser.add_argument("--n", type=int, default=1)
    parser.add_argument("--l", type=int, default=0)
    parser.add_argument("--r", type=int, default=0)
    parser.add_argument("--export", choices=("a", "b", "c"))
    return parser


def _read_input(path):
    if path:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    return sys.stdin.read()


def main(argv=None):
    args = build_parser().parse_args(argv)
    config.configure(samples=args.samples, seed=args.seed, step=args.h,
                     tolerance=args.tolerance, parallel=args.parallel)
    logging.basicConfig(level=config.SETTINGS.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    doc = None
    if args.command in NEEDS_INPUT:
        try:
            doc = load_document(_read_input(args.input))
        except EngelFlagError as e:
            print(f"❌ {e}", file=sys.stderr)
            return e.exit_code
        except OSError as e:
            print(f"❌ cannot read input: {e}", file=sys.stderr)
            return 1
    text, code = run_subcommand(args.command, doc, args)
    print(text, file=sys.stdout if code != 1 else sys.stderr)
    return code
