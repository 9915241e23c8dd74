"""Check orchestration and report rendering."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Iterable

from algcalc.algebroid import CheckReport, validate
from algcalc.calculus import DifferentialForm, maurer_cartan_check, verify_calculus_identities
from algcalc.eds import eds_closure_check, eds_involutivity_equivalence
from algcalc.ids import RankDeficiencyError, cartan_test, involutive_bracket_test
from algcalc.problem import ProblemDefinition

__all__ = ["RunReport", "SelectionError", "all_checks", "run_checks", "emit_report", "report_to_dict"]

GLOBAL_CHECKS = ("axioms", "maurer-cartan", "calculus-identities")
SUBBUNDLE_CHECKS = ("involutive", "cartan", "eds", "equivalence")

_SUBBUNDLE_FN = {
    "involutive": involutive_bracket_test,
    "cartan": cartan_test,
    "eds": eds_closure_check,
    "equivalence": eds_involutivity_equivalence,
}


class SelectionError(ValueError):
    """Unknown check or subbundle name, or an unusable subbundle."""


@dataclass
class RunReport:
    checks: list[tuple[str, CheckReport]]
    digest: str
    seed: int
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(rep.passed for _, rep in self.checks)

    @property
    def overall(self) -> str:
        return "pass" if self.passed else "fail"


def all_checks(defn: ProblemDefinition) -> list[str]:
    names = list(GLOBAL_CHECKS)
    for kind in SUBBUNDLE_CHECKS:
        names.extend(f"{kind}:{sb}" for sb in defn.subbundles)
    return names


def _canonical_order(defn: ProblemDefinition, selection: Iterable[str]) -> list[str]:
    order = {name: i for i, name in enumerate(all_checks(defn))}
    chosen = []
    for name in selection:
        name = name.strip()
        if not name:
            continue
        if name not in order:
            kind, _, sb = name.partition(":")
            if kind in SUBBUNDLE_CHECKS and sb:
                raise SelectionError(f"unknown subbundle {sb!r}; known: {sorted(defn.subbundles)}")
            raise SelectionError(f"unknown check {name!r}")
        if name not in chosen:
            chosen.append(name)
    return sorted(chosen, key=order.__getitem__)


def run_checks(defn: ProblemDefinition, selection: Iterable[str] | None = None, seed: int = 0,
               samples: int = 50) -> RunReport:
    """Run the selected checks (all when ``selection`` is None) in canonical order.

    Only the calculus-identity sampling is randomized, and it derives from ``seed``.
    """
    names = all_checks(defn) if selection is None else _canonical_order(defn, selection)
    A = defn.algebroid
    results, timing = [], {}
    for name in names:
        start = time.perf_counter()
        if name == "axioms":
            rep = validate(A)
        elif name == "maurer-cartan":
            rep = maurer_cartan_check(A)
        elif name == "calculus-identities":
            rep = verify_calculus_identities(A, samples, seed)
        else:
            kind, _, sb = name.partition(":")
            try:
                rep = _SUBBUNDLE_FN[kind](A, defn.subbundles[sb])
            except RankDeficiencyError as exc:
                raise SelectionError(f"subbundle {sb!r}: {exc}") from None
        timing[name] = time.perf_counter() - start
        results.append((name, rep))
    return RunReport(results, defn.digest, seed, timing)


def _details(rep: CheckReport) -> dict:
    d = rep.details
    out: dict = {}
    if "checks" in d:
        out["checks"] = dict(d["checks"])
    if "verdicts" in d:
        out["verdicts"] = dict(d["verdicts"])
    if "samples" in d:
        out["samples_per_identity"] = dict(d["samples"])
    dec = d.get("decomposition")
    if dec is not None and rep.passed:
        out["omegas"] = {f"{alpha + 1},{gamma + 1}": str(om)
                         for alpha, row in sorted(dec.omegas.items())
                         for gamma, om in sorted(row.items())}
    return out


def report_to_dict(report: RunReport, include_timing: bool = True) -> dict:
    checks = []
    for name, rep in report.checks:
        entry = {
            "name": name,
            "verdict": rep.verdict,
            "witnesses": [{"indices": list(w.indices), "residual": str(w.residual), "label": w.label}
                          for w in rep.witnesses],
        }
        details = _details(rep)
        if details:
            entry["details"] = details
        checks.append(entry)
    out = {
        "input_digest": report.digest,
        "seed": report.seed,
        "overall": report.overall,
        "checks": checks,
    }
    if include_timing:
        out["timing"] = {name: round(t, 6) for name, t in report.timing.items()}
    return out


def _render_text(doc: dict) -> str:
    lines = []
    for c in doc["checks"]:
        lines.append(f"{c['verdict'].upper()} {c['name']}")
        for w in c["witnesses"]:
            idx = "(" + ", ".join(str(i) for i in w["indices"]) + ")"
            label = f"{w['label']} " if w["label"] else ""
            lines.append(f"    {label}{idx}: {w['residual']}")
        for key, val in c.get("details", {}).items():
            if isinstance(val, dict):
                body = ", ".join(f"{k}={v}" for k, v in val.items())
            else:
                body = str(val)
            lines.append(f"    {key}: {body}")
    n_pass = sum(c["verdict"] == "pass" for c in doc["checks"])
    lines.append(f"overall: {doc['overall'].upper()} ({n_pass}/{len(doc['checks'])} checks passed)")
    lines.append(f"input: {doc['input_digest']}  seed: {doc['seed']}")
    if "timing" in doc:
        lines.append("timing: " + ", ".join(f"{k}={v:.3f}s" for k, v in doc["timing"].items()))
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, fmt: str = "text") -> str:
    doc = report_to_dict(report)
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt == "text":
        return _render_text(doc)
    raise ValueError(f"unknown report format {fmt!r}")
