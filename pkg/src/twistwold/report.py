"""Machine-readable reports for verification, decomposition and lattice
classification runs."""

from __future__ import annotations

import datetime as _dt

from . import __version__
from .io import number, tolerance_dict
from .lattice import LatticeReport, dense_oracle_agreement, slice_dimensions
from .multi import DecompositionResult, formula_agreement, label_name
from .twisted import RelationReport

TOOL = "twistwold"


def _header(kind, tf, tol, canonical):
    out = {"tool": TOOL, "version": __version__, "report": kind, "input_digest": tf.digest,
           "input_kind": tf.kind}
    if tf.name:
        out["name"] = tf.name
    out["seeds"] = [] if tf.seed is None else (tf.seed if isinstance(tf.seed, list) else [tf.seed])
    out["tolerance"] = tolerance_dict(tol)
    if not canonical:
        out["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return out


def relation_section(rep: RelationReport, all_entries=True) -> dict:
    bad = rep.first_failure
    out = {
        "passed": rep.passed,
        "max_residual": number(rep.max_residual, residual=True),
        "first_failure": None if bad is None else {
            "relation": bad.relation, "i": bad.i, "j": bad.j, "residual": number(bad.residual, residual=True)},
    }
    if all_entries:
        out["entries"] = [
            {"relation": e.relation, "i": e.i, "j": e.j,
             "k": list(e.k) if isinstance(e.k, tuple) else e.k,
             "residual": number(e.residual, residual=True)}
            for e in rep.entries
        ]
    return out


def lattice_relation_section(rep: LatticeReport) -> dict:
    bad = rep.first_failure
    return {
        "passed": rep.passed,
        "window": rep.window,
        "first_failure": None if bad is None else {
            "relation": bad.relation, "i": bad.i, "j": bad.j,
            "index": None if bad.first_counterexample is None else list(bad.first_counterexample)},
        "entries": [
            {"relation": c.relation, "i": c.i, "j": c.j, "k": list(c.k) if isinstance(c.k, tuple) else c.k,
             "checked": c.checked, "failures": c.failures,
             "first_counterexample": None if c.first_counterexample is None else list(c.first_counterexample)}
            for c in rep.checks
        ],
    }


def verify_report(tf, tol, rel, canonical=False) -> dict:
    out = _header("verify", tf, tol, canonical)
    out["relations"] = lattice_relation_section(rel) if isinstance(rel, LatticeReport) else relation_section(rel)
    return out


def decomposition_report(tf, tol, t, result: DecompositionResult, *, m_cap=None, lattice=None,
                         window=None, canonical=False, workers=1) -> dict:
    out = _header("decompose", tf, tol, canonical)
    if window is not None:
        out["window"] = window
    out["n"] = result.n
    out["ambient_dim"] = result.ambient_dim
    out["relations"] = relation_section(t.report, all_entries=False)
    slices = []
    for s in result.slices:
        slices.append({
            "label": label_name(s.label),
            "dim": s.dim,
            "classification": {str(i): {"kind": kind, "value": number(v, residual=kind == "unitary")}
                               for i, (kind, v) in s.classification.items()},
            "residuals": {k: number(v, residual=True) for k, v in s.residuals.items()},
        })
    out["slices"] = slices
    diag = {
        "dim_sum": result.diagnostics["dim_sum"],
        "completeness": number(result.diagnostics["completeness"], residual=True),
        "orthogonality": number(result.diagnostics["orthogonality"], residual=True),
        "off_reducing": number(result.diagnostics["off_reducing"], residual=True),
    }
    if result.n == 2:
        diag["formula_agreement"] = number(formula_agreement(t, result, m_cap), residual=True)
    if lattice is not None:
        agree = dense_oracle_agreement(lattice, window, 3, workers=workers, tol=tol)
        diag["oracle_agreement"] = number(agree.fraction)
        diag["oracle_checked"] = agree.checked
    out["diagnostics"] = diag
    return out


def wold_report(tf, tol, t, window, step_cap, oracle=False, canonical=False) -> dict:
    out = _header("wold", tf, tol, canonical)
    counts = slice_dimensions(t, window, step_cap)
    from .lattice import classify_index

    out["window"] = window
    out["step_cap"] = step_cap
    out["shape"] = {"d_plus": t.shape.d_plus, "d_bi": t.shape.d_bi}
    out["unitary_directions"] = list(range(t.shape.d_plus + 1, t.shape.ndim + 1))
    out["counts"] = {label_name(k): v for k, v in counts.counts.items()}
    out["undecided"] = [list(m) for m in counts.undecided]
    out["boundary"] = [list(m) for m in counts.outside_window]
    indices = []
    for m, lab in counts.labels.items():
        c = classify_index(t, m, step_cap)
        indices.append({"index": list(m), "label": label_name(lab),
                        "path": [list(p) for p in c.path], "residue": list(c.residue)})
    out["indices"] = indices
    if oracle:
        agree = dense_oracle_agreement(t, window, 3, tol=tol)
        out["oracle"] = {"margin": 3, "checked": agree.checked, "agreement": number(agree.fraction),
                         "mismatches": [[list(m), label_name(a), None if b is None else label_name(b)]
                                        for m, a, b in agree.mismatches]}
    return out


def text_summary(report: dict) -> str:
    """Short fixed-format rendering of a report."""
    lines = [f"{report['tool']} {report['version']} {report['report']}",
             f"input sha256 {report['input_digest']}"]
    rel = report.get("relations")
    if rel is not None:
        status = "pass" if rel["passed"] else "FAIL"
        lines.append(f"relations: {status}")
        ff = rel.get("first_failure")
        if ff:
            where = f" at index {tuple(ff['index'])}" if ff.get("index") is not None else ""
            lines.append(f"  first failure: {ff['relation']} (i, j) = ({ff['i']}, {ff['j']}){where}")
    for s in report.get("slices", []):
        cls = " ".join(f"T{i}:{c['kind']}" for i, c in s["classification"].items())
        lines.append(f"slice {s['label']:<10} dim {s['dim']:>4}  {cls}")
    if "counts" in report:
        for lab, c in report["counts"].items():
            lines.append(f"slice {lab:<10} count {c:>6}")
        lines.append(f"undecided {len(report['undecided'])}  boundary {len(report['boundary'])}")
        if report["unitary_directions"]:
            lines.append("bilateral (unitary) directions: " + ", ".join(map(str, report["unitary_directions"])))
    for k, v in report.get("diagnostics", {}).items():
        lines.append(f"{k}: {v}")
    if "oracle" in report:
        lines.append(f"oracle agreement: {report['oracle']['agreement']} over {report['oracle']['checked']}")
    return "\n".join(lines) + "\n"
