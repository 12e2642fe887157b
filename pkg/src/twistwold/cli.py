"""Command line: ``twistwold {verify,decompose,wold,zoo}``.

Exit codes: 0 pass, 1 mathematical failure, 2 input error.
The default residual tolerance can be set with ``TWISTWOLD_TOL`` (either a
number, or ``key=value`` pairs separated by commas).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .errors import (
    DimensionError,
    NotAnIsometryError,
    ParseError,
    ReductionError,
    TwistWoldError,
    VerificationError,
    WindowError,
)
from .io import dense_document, dumps, lattice_document, read_tuple, write_document
from .lattice import dense_tuple, verify_lattice_relations
from .multi import all_labels, decompose
from .report import decomposition_report, text_summary, verify_report, wold_report
from .subspace import DEFAULT_TOL, ToleranceProfile
from .twisted import twisted_tuple

ENV_TOL = "TWISTWOLD_TOL"
DEFAULT_WINDOW = 8
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def tolerance_from_env(environ=None) -> ToleranceProfile:
    raw = (os.environ if environ is None else environ).get(ENV_TOL, "").strip()
    if not raw:
        return DEFAULT_TOL
    try:
        if "=" not in raw:
            return replace(DEFAULT_TOL, residual_tol=float(raw))
        fields = {}
        for part in raw.split(","):
            k, v = (s.strip() for s in part.split("=", 1))
            fields[k] = int(v) if k == "stabilization_window" else float(v)
        return replace(DEFAULT_TOL, **fields)
    except (ValueError, TypeError) as e:
        raise InputError(f"{ENV_TOL}={raw!r}: {e}") from None


# read once at startup
_ENV_TOL = None


def _base_tol():
    global _ENV_TOL
    if _ENV_TOL is None:
        _ENV_TOL = tolerance_from_env()
    return _ENV_TOL


def _tol(args, tf):
    tol = tf.tol(_base_tol())
    if getattr(args, "tol", None) is not None:
        try:
            tol = replace(tol, residual_tol=args.tol)
        except ValueError as e:
            raise InputError(str(e)) from None
    return tol


def _emit(report, args):
    text = text_summary(report) if getattr(args, "format", "json") == "text" else dumps(report)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _window(args, tf):
    w = args.window if getattr(args, "window", None) is not None else (tf.window or DEFAULT_WINDOW)
    if w < 2:
        raise InputError("window must be >= 2")
    return w


def _say(msg):
    print(msg, file=sys.stderr)


def cmd_verify(args) -> int:
    tf = read_tuple(args.path)
    tol = _tol(args, tf)
    if tf.kind == "lattice":
        rep = verify_lattice_relations(tf.payload, _window(args, tf))
    else:
        d = tf.payload
        rep = twisted_tuple(d.ops, d.twist, tol, strict=False, support=d.support).report
    report = verify_report(tf, tol, rep, canonical=args.canonical)
    _emit(report, args)
    if rep.passed:
        return EXIT_OK
    bad = rep.first_failure
    where = ""
    if getattr(bad, "first_counterexample", None) is not None:
        where = f" at index {bad.first_counterexample}"
    _say(f"FAIL: {bad.relation} relation (i, j) = ({bad.i}, {bad.j}){where}")
    return EXIT_FAIL


def cmd_decompose(args) -> int:
    tf = read_tuple(args.path)
    tol = _tol(args, tf)
    lattice = None
    window = None
    if tf.kind == "lattice":
        lattice = tf.payload
        window = _window(args, tf)
        t = dense_tuple(lattice, window, depth=3, strict=False, tol=tol)[0]
    else:
        d = tf.payload
        t = twisted_tuple(d.ops, d.twist, tol, strict=False, support=d.support)
    if not t.report.passed:
        bad = t.report.first_failure
        msg = f"{bad.relation} relation fails for (i, j) = ({bad.i}, {bad.j})"
        if not args.audit:
            _say(f"FAIL: {msg}; rerun with --audit to decompose anyway")
            return EXIT_FAIL
        _say(f"warning: {msg}; decomposing in audit mode")
    result = decompose(t, workers=args.workers, strict=False)
    oracle = lattice if (lattice is not None and lattice.isometric and args.oracle) else None
    report = decomposition_report(tf, tol, t, result, m_cap=args.m_cap, lattice=oracle, window=window,
                                  canonical=args.canonical, workers=args.workers)
    _emit(report, args)
    return EXIT_OK


def cmd_wold(args) -> int:
    tf = read_tuple(args.path)
    if tf.kind != "lattice":
        raise InputError("wold needs a lattice tuple file")
    t = tf.payload
    if not t.isometric:
        _say("FAIL: wold classification needs isometric operators")
        return EXIT_FAIL
    window = _window(args, tf)
    step_cap = args.step_cap if args.step_cap is not None else 4 * window
    report = wold_report(tf, _tol(args, tf), t, window, step_cap, oracle=args.oracle, canonical=args.canonical)
    _emit(report, args)
    if report["undecided"]:
        _say(f"FAIL: {len(report['undecided'])} indices undecided within {step_cap} steps")
        return EXIT_FAIL
    return EXIT_OK


def parse_angle(text: str) -> float:
    """Radians from ``"0.4π"``, ``"0.4pi"``, ``"pi/3"`` or a plain number."""
    s = text.strip().lower().replace("π", "pi")
    if "pi" in s:
        head, _, tail = s.partition("pi")
        head = head.strip().rstrip("*") or "1"
        val = float(head) * math.pi
        tail = tail.strip()
        if tail:
            if not tail.startswith("/"):
                raise argparse.ArgumentTypeError(f"bad angle {text!r}")
            val /= float(tail[1:])
        return val
    return float(s)


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad complex number {text!r}") from None


def cmd_zoo(args) -> int:
    from . import zoo

    name = args.name
    sidecar = None
    if name == "hardy-ar":
        r = np.exp(1j * args.theta)
        if args.doubled:
            p = zoo.hardy_pair_Ar(r, args.alpha, args.window)
            t = p.doubled
            doc = dense_document(t.ops, t.twist, support=np.flatnonzero(np.diag(t.support.columns @ t.support.columns.conj().T).real > 0.5),
                                 name="hardy-ar-doubled")
        else:
            doc = lattice_document(zoo.ar_lattice(r, args.alpha), window=args.window)
    elif name == "hardy-du":
        doc = lattice_document(zoo.hardy_pair_DU(args.alpha1, args.alpha2, args.mode, args.theta),
                               window=args.window)
    elif name == "counterexample-br":
        doc = lattice_document(zoo.counterexample_Br(np.exp(1j * args.theta)), window=args.window)
    elif name == "shifts":
        doc = lattice_document(zoo.commuting_shifts(args.d_plus, args.d_bi), window=args.window)
    elif name == "clock-shift":
        t = zoo.clock_shift_tuple(args.d, tuple(args.scales))
        doc = dense_document(t.ops, t.twist, name="clock-shift")
    elif name == "planted":
        spec = (zoo.PlantedSpec(args.n, tuple(args.dims), args.seed) if args.dims
                else zoo.random_planted_spec(args.n, args.seed, max_dim=args.max_dim, min_block=1))
        t, truth = zoo.planted_tuple(spec)
        doc = dense_document(t.ops, t.twist, seed=args.seed, name=f"planted-n{args.n}")
        sidecar = {"format_version": 1, "kind": "ground_truth", "seed": args.seed,
                   "dims": list(spec.dims),
                   "slices": [{"label": list(lab), "basis": [[[z.real, z.imag] for z in row]
                                                               for row in truth[lab].columns]}
                              for lab in all_labels(args.n)]}
    else:
        raise InputError(f"unknown zoo name {name!r}")
    if args.out:
        write_document(doc, args.out)
        if sidecar is not None:
            write_document(sidecar, args.out + ".truth.json")
    else:
        sys.stdout.write(dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistwold", description="Twisted tuples of contractions: "
                                "relation checks, 2^n decompositions and lattice classification.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, window=True):
        sp.add_argument("path")
        sp.add_argument("--tol", type=float, help="residual tolerance override")
        if window:
            sp.add_argument("--window", type=int, help="lattice window side (default: file, else 8)")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--canonical", action="store_true", help="omit the timestamp")

    v = sub.add_parser("verify", help="check the defining relations")
    common(v)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("decompose", help="2^n slice decomposition report")
    common(d)
    d.add_argument("--m-cap", type=int, help="chain cap for the pair formulas (default 2*dim)")
    d.add_argument("--audit", action="store_true", help="decompose even if verification fails")
    d.add_argument("--workers", type=int, default=1)
    d.add_argument("--oracle", action="store_true", help="lattice input: add dense-oracle agreement")
    d.set_defaults(func=cmd_decompose)

    w = sub.add_parser("wold", help="per-index slice labels of an isometric lattice tuple")
    common(w)
    w.add_argument("--step-cap", type=int, help="backward-orbit step cap (default 4*window)")
    w.add_argument("--oracle", action="store_true", help="compare with the dense decomposition")
    w.set_defaults(func=cmd_wold)

    z = sub.add_parser("zoo", help="write a tuple file for a named instance")
    z.add_argument("name", choices=("hardy-ar", "hardy-du", "counterexample-br", "shifts", "clock-shift", "planted"))
    z.add_argument("--out")
    z.add_argument("--theta", type=parse_angle, default=0.0, help="angle, e.g. 0.4pi or 0.4π")
    z.add_argument("--alpha", type=_complex_arg, default=1.0)
    z.add_argument("--alpha1", type=_complex_arg, default=1.0)
    z.add_argument("--alpha2", type=_complex_arg, default=1.0)
    z.add_argument("--mode", choices=("phase", "bilateral"), default="phase")
    z.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    z.add_argument("--doubled", action="store_true", help="hardy-ar: dense doubled tuple")
    z.add_argument("--d", type=int, default=3)
    z.add_argument("--scales", type=float, nargs=2, default=(1.0, 1.0))
    z.add_argument("--d-plus", type=int, default=2)
    z.add_argument("--d-bi", type=int, default=0)
    z.add_argument("--n", type=int, default=2)
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--dims", type=int, nargs="+")
    z.add_argument("--max-dim", type=int, default=24)
    z.set_defaults(func=cmd_zoo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, InputError, DimensionError, WindowError, OSError) as e:
        _say(f"input error: {e}")
        return EXIT_INPUT
    except (VerificationError, ReductionError, NotAnIsometryError) as e:
        _say(f"FAIL: {e}")
        return EXIT_FAIL
    except (TwistWoldError, ValueError) as e:
        _say(f"input error: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
