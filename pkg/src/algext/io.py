"""JSON file formats for matrices, models, morphisms and families.

Model file::

    {"theory": "N2", "field": "Q", "carrier": {"V": 2},
     "ops": {"x": [["0/1", "1/1"], ["0/1", "0/1"]]}}

``"theory"`` is either the name of the theory supplied alongside, or inline
DSL text.  Matrices are row-major lists of rows; rational entries are
``"num/den"`` strings and prime-field entries decimal residues.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .dsl import parse_theory
from .linalg import QQ, Field, Matrix, ShapeError, field_from_tag
from .models import IndexedFamily, Model, ModelError, ModelMorphism
from .theory import TheoryPresentation


class FormatError(ValueError):
    pass


def matrix_to_literal(m: Matrix) -> list:
    return m.to_literal()


def matrix_from_literal(field: Field, lit: Any, nrows: int, ncols: int) -> Matrix:
    if not isinstance(lit, list):
        raise FormatError("a matrix literal must be a list")
    if lit and not isinstance(lit[0], list):
        if len(lit) != nrows * ncols:
            raise ShapeError(f"flat literal has {len(lit)} entries, expected {nrows * ncols}")
        return Matrix.from_flat(field, nrows, ncols, [field.parse(x) for x in lit])
    if len(lit) != nrows and not (nrows * ncols == 0 and not lit):
        raise ShapeError(f"expected {nrows} rows, got {len(lit)}")
    if not lit:
        return Matrix.zeros(field, nrows, ncols)
    if any(len(r) != ncols for r in lit):
        raise ShapeError(f"expected rows of length {ncols}")
    return Matrix(field, nrows, ncols, tuple(tuple(field.parse(x) for x in r) for r in lit))


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_theory(path: str | Path) -> TheoryPresentation:
    return parse_theory(Path(path).read_text(encoding="utf-8"))


def _resolve_theory(ref: Any, theory: TheoryPresentation | None) -> TheoryPresentation:
    if isinstance(ref, str) and "{" in ref:
        inline = parse_theory(ref)
        if theory is not None and inline != theory:
            raise FormatError(f"inline theory {inline.name} differs from the supplied theory {theory.name}")
        return inline
    if theory is None:
        raise FormatError("model names a theory but no theory file was supplied")
    if ref is not None and ref != theory.name:
        raise FormatError(f"model is for theory {ref!r}, supplied theory is {theory.name!r}")
    return theory


def model_from_json(obj: Mapping, theory: TheoryPresentation | None = None, field: Field | None = None) -> Model:
    if not isinstance(obj, Mapping):
        raise FormatError("a model must be a JSON object")
    th = _resolve_theory(obj.get("theory"), theory)
    fld = field or field_from_tag(obj.get("field", "Q"))
    carrier = {s: int(d) for s, d in obj.get("carrier", {}).items()}
    unknown = set(carrier) - set(th.sorts)
    if unknown:
        raise ModelError(f"carrier mentions unknown sorts {sorted(unknown)}")
    full = {s: carrier.get(s, 0) for s in th.sorts}
    ops = {}
    for name, lit in obj.get("ops", {}).items():
        op = th.op(name)
        ops[name] = matrix_from_literal(fld, lit, full[op.codomain], sum(full[s] for s in op.domain))
    return Model(th, fld, full, ops)


def model_to_json(model: Model, inline_theory: bool = False) -> dict:
    from .dsl import print_theory

    return {
        "theory": print_theory(model.theory) if inline_theory else model.theory.name,
        "field": model.field.name,
        "carrier": dict(model.carrier),
        "ops": {name: matrix_to_literal(m) for name, m in model.ops.items()},
    }


def load_model(path: str | Path, theory: TheoryPresentation | None = None, field: Field | None = None) -> Model:
    return model_from_json(read_json(path), theory, field)


def morphism_from_json(
    obj: Mapping,
    theory: TheoryPresentation | None = None,
    field: Field | None = None,
    source: Model | None = None,
    target: Model | None = None,
    base_dir: Path | None = None,
) -> ModelMorphism:
    """``{"source": <model or path>, "target": <model or path>, "components": {sort: matrix}}``.

    Explicit ``source``/``target`` arguments take precedence over the file's entries.
    """

    def endpoint(key, given):
        if given is not None:
            return given
        ref = obj.get(key)
        if ref is None:
            raise FormatError(f"morphism needs a {key} model")
        if isinstance(ref, str):
            p = Path(ref)
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            return load_model(p, theory, field)
        return model_from_json(ref, theory, field)

    src, tgt = endpoint("source", source), endpoint("target", target)
    fld = src.field
    comps = {}
    for s, lit in obj.get("components", {}).items():
        if s not in src.theory.sorts:
            raise ModelError(f"component for unknown sort {s}")
        comps[s] = matrix_from_literal(fld, lit, tgt.carrier[s], src.carrier[s])
    return ModelMorphism(src, tgt, comps)


def morphism_to_json(phi: ModelMorphism) -> dict:
    return {"components": {s: matrix_to_literal(m) for s, m in phi.components.items()}}


def parse_word(text: str, theory: TheoryPresentation) -> tuple:
    text = text.strip()
    if text in ("", "()", "1"):
        return ()
    return theory.check_word(part.strip() for part in text.split("*"))


def parse_index(text: str | None, theory: TheoryPresentation) -> tuple:
    """``"V,W,V*W,()"`` -> words; ``None`` means one one-letter word per sort."""
    if text is None:
        return tuple((s,) for s in theory.sorts)
    return tuple(parse_word(part, theory) for part in text.split(","))


def word_text(w: tuple) -> str:
    return "*".join(w) if w else "()"


def family_from_json(obj: Mapping, theory: TheoryPresentation, index: tuple | None = None) -> IndexedFamily:
    """``{"V": 1, "V*W": 2}``; words missing from the object get dimension 0."""
    dims = {parse_word(k, theory): int(v) for k, v in obj.items()}
    idx = index if index is not None else tuple(dims)
    for w in idx:
        dims.setdefault(w, 0)
    extra = set(dims) - set(idx)
    if extra:
        raise ModelError(f"family gives dimensions for words outside the index: {sorted(map(word_text, extra))}")
    return IndexedFamily(idx, dims)


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


DEFAULT_FIELD = QQ
