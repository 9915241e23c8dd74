"""Definition files: JSON documents describing an algebroid and what to check on it.

Schema::

    {
      "description": "...",                       # optional
      "coords": ["x1", "x2"],
      "rank": 2,
      "anchor": [["1", "0"], ["0", "x1"]],        # n rows of p expression strings
      "structure": [{"lower": [1, 2], "upper": 2, "value": "1/x1"}],
      "subbundles": {"name": [["1", "x2"]]},      # optional; lists of p-vectors
      "forms": {"name": {"degree": 1, "terms": [{"indices": [1], "coeff": "x2"}]}}
    }

Structure entries use 1-based indices with ``lower[0] < lower[1]``; the
other half is filled in by antisymmetry.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from algcalc.algebroid import LieAlgebroid, Section
from algcalc.calculus import DifferentialForm
from algcalc.expr import CoordinateSystem, ExprError, ScalarExpr
from algcalc.ids import SubbundleSpec

__all__ = [
    "DefinitionError",
    "ProblemDefinition",
    "load_definition",
    "parse_definition",
    "dump_definition",
    "bundled_fixture",
    "BUNDLED",
]

BUNDLED = ("tr3.json", "so3.json", "heisenberg.json", "anchored.json",
           "so3_action.json", "rational.json", "broken_anchor.json")


class DefinitionError(ValueError):
    """Malformed or inconsistent definition file."""


@dataclass
class ProblemDefinition:
    algebroid: LieAlgebroid
    subbundles: dict[str, SubbundleSpec] = field(default_factory=dict)
    forms: dict[str, DifferentialForm] = field(default_factory=dict)
    description: str = ""
    digest: str = ""

    def __eq__(self, other):
        if not isinstance(other, ProblemDefinition):
            return NotImplemented
        return (self.algebroid == other.algebroid and self.subbundles == other.subbundles
                and self.forms == other.forms and self.description == other.description)


def bundled_fixture(name: str) -> Path:
    if name not in BUNDLED:
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return Path(str(resources.files("algcalc") / "fixtures" / name))


def load_definition(path: str | Path) -> ProblemDefinition:
    data = Path(path).read_bytes()
    return parse_definition(data, source=str(path))


def parse_definition(data: bytes | str, source: str = "<input>") -> ProblemDefinition:
    raw = data.encode() if isinstance(data, str) else data
    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise DefinitionError(f"{source}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError as exc:
        raise DefinitionError(f"{source}: not UTF-8 text at byte {exc.start}") from None
    defn = _build(doc, source)
    defn.digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    return defn


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise DefinitionError(msg)


def _expr(cs: CoordinateSystem, text: Any, where: str) -> ScalarExpr:
    if isinstance(text, int) and not isinstance(text, bool):
        text = str(text)
    _expect(isinstance(text, str), f"{where}: expected an expression string, got {text!r}")
    try:
        return cs.parse(text)
    except (ExprError, ZeroDivisionError) as exc:
        raise DefinitionError(f"{where}: {exc}") from None


def _build(doc: Any, src: str) -> ProblemDefinition:
    _expect(isinstance(doc, dict), f"{src}: top level must be an object")
    known = {"description", "coords", "rank", "anchor", "structure", "subbundles", "forms"}
    extra = set(doc) - known
    _expect(not extra, f"{src}: unknown keys {sorted(extra)}")
    for key in ("coords", "rank", "anchor"):
        _expect(key in doc, f"{src}: missing required key {key!r}")

    names = doc["coords"]
    _expect(isinstance(names, list) and names and all(isinstance(x, str) for x in names),
            f"{src}: coords must be a non-empty list of names")
    _expect(len(set(names)) == len(names), f"{src}: duplicate coordinate names")
    try:
        cs = CoordinateSystem(names)
    except ValueError as exc:
        raise DefinitionError(f"{src}: {exc}") from None
    n = cs.n
    p = doc["rank"]
    _expect(isinstance(p, int) and not isinstance(p, bool) and p >= 1, f"{src}: rank must be a positive integer")

    anchor = doc["anchor"]
    _expect(isinstance(anchor, list) and len(anchor) == n,
            f"{src}: anchor must have n={n} rows, got {len(anchor) if isinstance(anchor, list) else anchor!r}")
    rho = []
    for i, row in enumerate(anchor):
        _expect(isinstance(row, list) and len(row) == p, f"{src}: anchor row {i + 1} must have p={p} entries")
        rho.append([_expr(cs, e, f"{src}: anchor[{i + 1}][{j + 1}]") for j, e in enumerate(row)])

    zero = cs.zero()
    L = [[[zero] * p for _ in range(p)] for _ in range(p)]
    seen = set()
    structure = doc.get("structure", [])
    _expect(isinstance(structure, list), f"{src}: structure must be a list")
    for k, entry in enumerate(structure):
        where = f"{src}: structure[{k}]"
        _expect(isinstance(entry, dict) and set(entry) == {"lower", "upper", "value"},
                f"{where}: expected keys lower, upper, value")
        lower, upper = entry["lower"], entry["upper"]
        _expect(isinstance(lower, list) and len(lower) == 2 and all(isinstance(x, int) for x in lower),
                f"{where}: lower must be a pair of indices")
        a, b = lower
        _expect(isinstance(upper, int), f"{where}: upper must be an index")
        _expect(all(1 <= x <= p for x in (a, b, upper)), f"{where}: index out of range 1..{p}")
        _expect(a < b, f"{where}: antisymmetry violation, only lower indices a < b are accepted, got {lower}")
        _expect((a, b, upper) not in seen, f"{where}: duplicate entry for {lower} -> {upper}")
        seen.add((a, b, upper))
        val = _expr(cs, entry["value"], where)
        L[upper - 1][a - 1][b - 1] = val
        L[upper - 1][b - 1][a - 1] = -val
    A = LieAlgebroid(cs, rho, L)

    subbundles = {}
    subs = doc.get("subbundles", {})
    _expect(isinstance(subs, dict), f"{src}: subbundles must be an object")
    for name, gens in subs.items():
        where = f"{src}: subbundles.{name}"
        _expect(isinstance(gens, list) and gens, f"{where}: expected a non-empty list of sections")
        sections = []
        for g, vec in enumerate(gens):
            _expect(isinstance(vec, list) and len(vec) == p, f"{where}[{g + 1}]: section must have p={p} components")
            sections.append(Section(tuple(_expr(cs, e, f"{where}[{g + 1}][{j + 1}]") for j, e in enumerate(vec))))
        subbundles[name] = SubbundleSpec(tuple(sections), name)

    forms = {}
    fdoc = doc.get("forms", {})
    _expect(isinstance(fdoc, dict), f"{src}: forms must be an object")
    for name, spec in fdoc.items():
        where = f"{src}: forms.{name}"
        _expect(isinstance(spec, dict) and "degree" in spec, f"{where}: expected {{degree, terms}}")
        q = spec["degree"]
        _expect(isinstance(q, int) and 0 <= q, f"{where}: degree must be a non-negative integer")
        coeffs = {}
        for t, term in enumerate(spec.get("terms", [])):
            idx = term.get("indices") if isinstance(term, dict) else None
            _expect(isinstance(idx, list) and len(idx) == q, f"{where}.terms[{t}]: indices must have length {q}")
            _expect(all(isinstance(x, int) and 1 <= x <= p for x in idx)
                    and all(idx[i] < idx[i + 1] for i in range(q - 1)),
                    f"{where}.terms[{t}]: indices must be strictly increasing in 1..{p}")
            key = tuple(x - 1 for x in idx)
            _expect(key not in coeffs, f"{where}.terms[{t}]: duplicate indices {idx}")
            coeffs[key] = _expr(cs, term.get("coeff"), f"{where}.terms[{t}]")
        forms[name] = DifferentialForm(cs, p, q, coeffs)

    desc = doc.get("description", "")
    _expect(isinstance(desc, str), f"{src}: description must be a string")
    return ProblemDefinition(A, subbundles, forms, desc)


def dump_definition(defn: ProblemDefinition) -> dict:
    """Serialize back to the schema; ``parse_definition(json.dumps(...))`` reproduces ``defn``."""
    A = defn.algebroid
    structure = []
    for a in range(A.p):
        for b in range(a + 1, A.p):
            for c in range(A.p):
                v = A.structure[c][a][b]
                if v:
                    structure.append({"lower": [a + 1, b + 1], "upper": c + 1, "value": str(v)})
    doc: dict[str, Any] = {
        "description": defn.description,
        "coords": list(A.cs.names),
        "rank": A.p,
        "anchor": [[str(e) for e in row] for row in A.anchor],
        "structure": structure,
    }
    if defn.subbundles:
        doc["subbundles"] = {name: [[str(e) for e in s] for s in E.generators]
                             for name, E in defn.subbundles.items()}
    if defn.forms:
        doc["forms"] = {name: {"degree": w.degree,
                               "terms": [{"indices": [k + 1 for k in key], "coeff": str(c)}
                                         for key, c in sorted(w.coeffs.items())]}
                        for name, w in defn.forms.items()}
    return doc
