"""Command-line front end.

Examples::

    algext validate --theory n2.thy --model bad.json
    algext ext --theory n2.thy --F k0.json --G k0.json --degree 1 --method both --json
    algext cofree --theory n2.thy --model k0.json --index V
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dsl import ParseError, equation_text
from .ext import ext1, ext_n
from .homfin import DEFAULT_DEPTH_BOUND, NotStabilized, cofree_model
from .io import (
    FormatError,
    dumps,
    family_from_json,
    load_model,
    load_theory,
    matrix_to_literal,
    model_to_json,
    morphism_from_json,
    morphism_to_json,
    parse_index,
    read_json,
    word_text,
)
from .linalg import LinAlgError, ShapeError, field_from_tag
from .models import (
    ModelError,
    cokernel_model,
    direct_sum,
    forget,
    forget_morphism,
    hom_space,
    image_factorization,
    kernel_model,
    validate_model,
)
from .theory import TheoryError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INVALID = 4
EXIT_NOT_STABILIZED = 5
EXIT_SHAPE = 6
EXIT_DISAGREE = 7


class UsageError(Exception):
    pass


class ValidationFailed(Exception):
    def __init__(self, what: str, report):
        super().__init__(f"{what} is not a valid model")
        self.what = what
        self.report = report


def _failures_json(report, theory) -> list:
    return [
        {
            "equation": equation_text(fl.equation, theory),
            "index": fl.index,
            "lhs": matrix_to_literal(fl.lhs),
            "rhs": matrix_to_literal(fl.rhs),
        }
        for fl in report.failures
    ]


def _failures_text(report, theory) -> str:
    lines = []
    for fl in report.failures:
        lines.append(f"  equation {fl.index}: {equation_text(fl.equation, theory)}")
        lines.append(f"    lhs = {matrix_to_literal(fl.lhs)}")
        lines.append(f"    rhs = {matrix_to_literal(fl.rhs)}")
    return "\n".join(lines)


class _Runner:
    def __init__(self, args):
        self.args = args
        self.theory = load_theory(args.theory)
        self.field = field_from_tag(args.field) if args.field else None

    def model(self, path, what):
        m = load_model(path, self.theory, self.field)
        report = validate_model(m)
        if not report.valid:
            raise ValidationFailed(what, report)
        return m

    def morphism(self):
        a = self.args
        src = self.model(a.F, "--F") if a.F else None
        tgt = self.model(a.G, "--G") if a.G else None
        path = Path(a.morphism)
        phi = morphism_from_json(read_json(path), self.theory, self.field, src, tgt, path.parent)
        for what, m in (("morphism source", phi.source), ("morphism target", phi.target)):
            report = validate_model(m)
            if not report.valid:
                raise ValidationFailed(what, report)
        bad = phi.naturality_failures()
        if bad:
            raise ModelError(f"morphism does not commute with operations {bad}")
        return phi

    def index(self):
        return parse_index(self.args.index, self.theory)

    def covering_index(self):
        index = self.index()
        missing = [s for s in self.theory.sorts if (s,) not in index]
        if missing:
            raise UsageError(f"--index must contain every sort as a one-letter word; missing {', '.join(missing)}")
        return index

    # commands

    def validate(self):
        m = load_model(self.args.model, self.theory, self.field)
        report = validate_model(m)
        payload = {
            "command": "validate",
            "theory": self.theory.name,
            "field": m.field.name,
            "valid": report.valid,
            "failures": _failures_json(report, self.theory),
            "notes": report.notes,
        }
        lines = [f"model is {'valid' if report.valid else 'INVALID'} for theory {self.theory.name} over {m.field.name}"]
        if not report.valid:
            lines.append(_failures_text(report, self.theory))
        lines.extend(f"note: {n}" for n in report.notes)
        return (EXIT_OK if report.valid else EXIT_INVALID), payload, "\n".join(lines)

    def hom(self):
        F, G = self.model(self.args.F, "--F"), self.model(self.args.G, "--G")
        basis = hom_space(F, G)
        payload = {
            "command": "hom",
            "field": F.field.name,
            "dimension": len(basis),
            "basis": [morphism_to_json(b)["components"] for b in basis],
        }
        return EXIT_OK, payload, f"dim Hom(F, G) = {len(basis)}"

    def kernel(self):
        phi = self.morphism()
        res = kernel_model(phi)
        payload = {
            "command": "kernel",
            "field": phi.field.name,
            "model": model_to_json(res.sub),
            "inclusion": morphism_to_json(res.inclusion)["components"],
        }
        return EXIT_OK, payload, f"kernel dimensions {res.sub.carrier}"

    def cokernel(self):
        phi = self.morphism()
        quot, proj = cokernel_model(phi)
        payload = {
            "command": "cokernel",
            "field": phi.field.name,
            "model": model_to_json(quot),
            "projection": morphism_to_json(proj)["components"],
        }
        return EXIT_OK, payload, f"cokernel dimensions {quot.carrier}"

    def image(self):
        phi = self.morphism()
        epi, mono = image_factorization(phi)
        payload = {
            "command": "image",
            "field": phi.field.name,
            "model": model_to_json(epi.target),
            "epi": morphism_to_json(epi)["components"],
            "mono": morphism_to_json(mono)["components"],
        }
        return EXIT_OK, payload, f"image dimensions {epi.target.carrier}"

    def dsum(self):
        F, G = self.model(self.args.F, "--F"), self.model(self.args.G, "--G")
        ds = direct_sum(F, G)
        payload = {
            "command": "dsum",
            "field": F.field.name,
            "model": model_to_json(ds.model),
            "injections": [morphism_to_json(i)["components"] for i in ds.injections],
            "projections": [morphism_to_json(p)["components"] for p in ds.projections],
        }
        return EXIT_OK, payload, f"direct sum dimensions {ds.model.carrier}"

    def forget(self):
        index = self.index()
        if self.args.morphism:
            phi = self.morphism()
            mats = forget_morphism(phi, index)
            payload = {
                "command": "forget",
                "field": phi.field.name,
                "maps": {word_text(w): matrix_to_literal(m) for w, m in mats.items()},
            }
            return EXIT_OK, payload, "\n".join(f"{word_text(w)}: {m.nrows}x{m.ncols}" for w, m in mats.items())
        if not self.args.model:
            raise UsageError("forget needs --model or --morphism")
        m = self.model(self.args.model, "--model")
        fam = forget(m, index)
        payload = {
            "command": "forget",
            "field": m.field.name,
            "dims": {word_text(w): fam.dims[w] for w in fam.index},
        }
        return EXIT_OK, payload, "\n".join(f"{word_text(w)}: {fam.dims[w]}" for w in fam.index)

    def cofree(self):
        index = self.covering_index()
        if self.args.family:
            fam = family_from_json(read_json(self.args.family), self.theory, index)
            fld = self.field or field_from_tag("Q")
        elif self.args.model:
            m = self.model(self.args.model, "--model")
            fam, fld = forget(m, index), m.field
        else:
            raise UsageError("cofree needs --model or --family")
        c = cofree_model(self.theory, fam, fld, self.args.depth_bound)
        payload = {
            "command": "cofree",
            "field": fld.name,
            "index": [word_text(w) for w in fam.index],
            "model": model_to_json(c.model),
            "valid": validate_model(c.model).valid,
        }
        return EXIT_OK, payload, f"cofree model dimensions {c.model.carrier}"

    def ext(self):
        a = self.args
        if a.degree < 0:
            raise UsageError("--degree must be non-negative")
        F, G = self.model(a.F, "--F"), self.model(a.G, "--G")
        method = a.method or ("cocycle" if a.degree == 1 else "coresolution")
        if method in ("cocycle", "both") and a.degree != 1:
            if method == "cocycle":
                raise UsageError("the cocycle method only computes degree 1")
            method = "coresolution"
        index = self.covering_index() if method != "cocycle" else None
        result, reps, agreement = None, [], "n/a"
        if method in ("cocycle", "both"):
            result = ext1(G, F)
            reps = [{op: matrix_to_literal(m) for op, m in z.c.items()} for z in result.representatives]
        if method in ("coresolution", "both"):
            other = ext_n(G, F, a.degree, index, a.depth_bound)
            if result is None:
                result = other
                reps = [morphism_to_json(r)["components"] for r in other.representatives]
            else:
                agreement = result.dimension == other.dimension
        payload = {
            "degree": a.degree,
            "dimension": result.dimension,
            "representatives": reps,
            "method": method,
            "agreement": agreement,
            "field": F.field.name,
        }
        text = f"dim Ext^{a.degree}(G, F) = {result.dimension} (method: {method}, field {F.field.name})"
        if agreement != "n/a":
            text += f"\nmethods agree: {agreement}"
        return (EXIT_DISAGREE if agreement is False else EXIT_OK), payload, text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="algext", description="Linear models of algebraic theories and their extensions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--theory", required=True, help="theory file in the DSL")
        p.add_argument("--field", help="Q (default) or fp:<p>; overrides the field named in model files")
        p.add_argument("--json", action="store_true", help="print a JSON report")
        p.add_argument("--index", help="comma-separated words, letters joined by '*', '()' for the empty word")
        p.add_argument("--depth-bound", type=int, default=DEFAULT_DEPTH_BOUND)
        return p

    common(sub.add_parser("validate")).add_argument("--model", required=True)
    for name in ("hom", "dsum"):
        p = common(sub.add_parser(name))
        p.add_argument("--F", required=True)
        p.add_argument("--G", required=True)
    for name in ("kernel", "cokernel", "image"):
        p = common(sub.add_parser(name))
        p.add_argument("--morphism", required=True)
        p.add_argument("--F", help="source model (overrides the morphism file)")
        p.add_argument("--G", help="target model (overrides the morphism file)")
    p = common(sub.add_parser("forget"))
    p.add_argument("--model")
    p.add_argument("--morphism")
    p.add_argument("--F")
    p.add_argument("--G")
    p = common(sub.add_parser("cofree"))
    p.add_argument("--model")
    p.add_argument("--family", help='JSON object {"word": dim}')
    p = common(sub.add_parser("ext"))
    p.add_argument("--F", required=True, help="sub-model of the extensions")
    p.add_argument("--G", required=True, help="quotient model of the extensions")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--method", choices=("cocycle", "coresolution", "both"))
    return parser


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    as_json = args.json

    def emit_error(code, kind, message, extra=None):
        if as_json:
            payload = {"error": kind, "message": message}
            payload.update(extra or {})
            print(dumps(payload), file=out)
        print(f"error: {message}", file=err)
        return code

    try:
        runner = _Runner(args)
        code, payload, text = getattr(runner, args.command)()
    except UsageError as exc:
        return emit_error(EXIT_USAGE, "usage", str(exc))
    except ParseError as exc:
        return emit_error(EXIT_PARSE, "parse", str(exc), {"line": exc.line, "column": exc.col})
    except (FormatError, OSError) as exc:
        return emit_error(EXIT_PARSE, "parse", str(exc))
    except ValidationFailed as exc:
        th = runner.theory
        msg = f"{exc}\n{_failures_text(exc.report, th)}"
        return emit_error(EXIT_INVALID, "validation", msg, {"failures": _failures_json(exc.report, th)})
    except NotStabilized as exc:
        table = "\n".join(f"  depth {d}: dim {n}" for d, n in exc.growth)
        return emit_error(
            EXIT_NOT_STABILIZED,
            "not_stabilized",
            f"{exc}\n{table}",
            {"depth_bound": exc.depth_bound, "growth": [[d, n] for d, n in exc.growth]},
        )
    except (ShapeError, ModelError, LinAlgError, TheoryError, ValueError) as exc:
        return emit_error(EXIT_SHAPE, "shape", str(exc))
    print(dumps(payload) if as_json else text, file=out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
