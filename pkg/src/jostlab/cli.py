"""Scenario runner: ``jostlab <task> [flags]``.

Every run writes one deterministic report (JSON, or CSV for tabular tasks)
into ``--out-dir`` and exits 0 on pass, 1 on a failed check, 2 on bad input
and 3 on a numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from jostlab import __version__
from jostlab.core import (AsymptoticSeries, InputError, JacobiParameters, JostlabError, PoleSet, VerblunskyCoefficients,
                          parse_input, serialize)

log = logging.getLogger("jostlab")

TASKS = ("jost", "b-series", "sz2", "sz2-inverse", "m-function", "strip", "eigen", "extract", "poles", "g-tilde",
         "verify-thm15", "verify-thm13", "verify-thm16", "verify-thm17", "verify-thm41")

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class Scenario:
    name: str = "scenario"
    task: str = "jost"
    input: object = "free"
    tol: float = 1e-8
    cutoff: float = 8.0
    N: int = 0
    precision_bits: int = 0
    out_dir: str = "."
    format: str = "json"
    points: list = field(default_factory=list)
    level: int = 1
    which: str = "u"

    def validate(self):
        if self.task not in TASKS:
            raise InputError(f"unknown task {self.task!r}", field="task")
        if not self.tol > 0:
            raise InputError("tol must be positive", field="tol")
        if not self.cutoff > 1:
            raise InputError("cutoff must exceed 1", field="cutoff")
        if self.N < 0 or self.precision_bits < 0 or self.level < 0:
            raise InputError("N, precision_bits and level must be nonnegative")
        if self.format not in ("json", "csv"):
            raise InputError("format must be json or csv", field="format")


# ---------------------------------------------------------------------------
# fixtures


def _example_3_4_alpha():
    return VerblunskyCoefficients.example_3_4(2)


def fixtures() -> dict:
    """Named inputs: documents accepted by :func:`jostlab.core.parse_input`,
    or other JSON-ready objects for the ``extract`` and ``g-tilde`` tasks."""
    from jostlab.opuc import sz2_forward

    ex = _example_3_4_alpha()
    return {
        "free": serialize(JacobiParameters.free()),
        "free-verblunsky": serialize(VerblunskyCoefficients.free()),
        "rank-one-bound-state": serialize(JacobiParameters.from_lists(b=["2.5"])),
        "rank-one-b-half": serialize(JacobiParameters.from_lists(b=["0.5"])),
        "rank-one-a2": serialize(JacobiParameters.from_a2(a2=["1.5"])),
        "alpha0-only": serialize(VerblunskyCoefficients(("0.3",))),
        # Example 3.4 is the sharp case: the combination's radius is R**2 exactly
        "example-3-4-R2": {**serialize(sz2_forward(ex)), "sharp": True},
        "example-3-4-alpha": serialize(ex),
        "synthetic-extract": {"kind": "sequence", "N": 200,
                              "series": AsymptoticSeries.from_json(
                                  {"terms": [{"mu": "2", "poly": ["3"]}, {"mu": "3", "poly": ["0", "1"]}]}).to_json()},
        "generators-2": {"kind": "points", "points": [[2, 0], [-2, 0]]},
    }


def _load_input(spec):
    if isinstance(spec, dict):
        return spec
    spec = str(spec)
    fx = fixtures()
    if spec in fx:
        return fx[spec]
    if spec.startswith("{"):
        try:
            return json.loads(spec)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed inline JSON: {exc}") from None
    if not os.path.exists(spec):
        raise InputError(f"input {spec!r} is neither a fixture nor a file", field="input")
    with open(spec, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {spec}: {exc}") from None


def _jacobi(doc) -> JacobiParameters:
    obj = parse_input(doc)
    if isinstance(obj, VerblunskyCoefficients):
        from jostlab.opuc import sz2_forward
        return sz2_forward(obj)
    return obj


def _verblunsky(doc) -> VerblunskyCoefficients:
    obj = parse_input(doc)
    if not isinstance(obj, VerblunskyCoefficients):
        raise InputError("this task needs Verblunsky coefficients (kind 'verblunsky')", field="kind")
    return obj


def _points(s: Scenario, default):
    if not s.points:
        return np.asarray(default, dtype=complex)
    out = []
    for i, p in enumerate(s.points):
        try:
            out.append(complex(p) if not isinstance(p, (list, tuple)) else complex(p[0], p[1]))
        except (TypeError, ValueError):
            raise InputError(f"bad point {p!r}", index=i, field="points") from None
    return np.array(out, dtype=complex)


def _cplx(v):
    v = complex(v)
    return [v.real, v.imag]


# ---------------------------------------------------------------------------
# pipelines shared by the verify tasks


def _series_len(s: Scenario, default=100):
    return s.N or default


def pole_model(obj, which: str, cutoff: float, N: int = 100, tol: float = 1e-8):
    """Meromorphic model (poles within ``cutoff``) of ``u``, ``B``, ``S``, ``Q``
    or ``D^-1`` from their Taylor series."""
    from jostlab.asymptotics import MeromorphicModel, poles_from_taylor
    from jostlab.jacobi_gc import b_series, series_precision, u_series
    from jostlab import opuc

    prec = series_precision(N, cutoff)
    if which in ("u", "B"):
        params = obj if isinstance(obj, JacobiParameters) else opuc.sz2_forward(obj)
        if params.is_free_tail:
            n = 2 * params.support + 2
            ser = u_series(params, n) if which == "u" else b_series(params, n)
            return MeromorphicModel(PoleSet((), cutoff), (), np.array(ser.coeffs, dtype=complex), math.inf, 53, which)
        ser = u_series(params, N, prec=prec) if which == "u" else b_series(params, N, prec=prec)
    else:
        if not isinstance(obj, VerblunskyCoefficients):
            raise InputError(f"poles of {which} need Verblunsky coefficients", field="which")
        if obj.is_free_tail:
            n = obj.support + 3
            ser = {"S": opuc.s_series, "Q": opuc.q_series}.get(which, lambda a, n: opuc.d_inverse(a, N=n))(obj, n)
            return MeromorphicModel(PoleSet((), cutoff), (), np.array(ser.coeffs, dtype=complex), math.inf, 53, which)
        if which == "S":
            ser = opuc.s_series(obj, N, prec=prec)
        elif which == "Q":
            ser = opuc.q_series(obj, N, prec=prec)
        elif which in ("dinv", "D^-1"):
            ser = opuc.d_inverse(obj, N=N, prec=prec)
        else:
            raise InputError(f"unknown function {which!r}", field="which")
    return poles_from_taylor(ser, cutoff, tol=tol)


def _containment_pair(A: PoleSet, B: PoleSet, cutoff, tol, names):
    from jostlab.pole_algebra import check_containment
    left = check_containment(A, B, cutoff, tol)
    right = check_containment(B, A, cutoff, tol)
    return {f"{names[0]}_in_Gtilde_{names[1]}": left, f"{names[1]}_in_Gtilde_{names[0]}": right}, \
        left["contained"] and right["contained"]


# ---------------------------------------------------------------------------
# task handlers: each returns (passed, report, csv_text_or_None)


def _task_jost(s, doc):
    from jostlab.jacobi_gc import jost_u
    from jostlab.spectral_m import SpectralModel
    p = _jacobi(doc)
    z = _points(s, 0.5 * np.exp(2j * np.pi * np.arange(8) / 8))
    model = SpectralModel(p, s.cutoff)
    vals = model.u(z) if s.precision_bits <= 53 else np.array([complex(jost_u(p, w, prec=s.precision_bits)) for w in z])
    rows = [{"z": _cplx(w), "u": _cplx(v)} for w, v in zip(z, vals)]
    csv = "z_re,z_im,u_re,u_im\n" + "".join(f"{w.real!r},{w.imag!r},{v.real!r},{v.imag!r}\n" for w, v in zip(z, vals))
    return True, {"values": rows}, csv


def _task_b_series(s, doc):
    from jostlab.jacobi_gc import b_series
    ser = b_series(_jacobi(doc), _series_len(s, 32), prec=s.precision_bits or None)
    return True, ser.to_json(), ser.to_csv()


def _task_sz2(s, doc):
    from jostlab.opuc import sz2_forward
    return True, {"jacobi": serialize(sz2_forward(_verblunsky(doc)))}, None


def _task_sz2_inverse(s, doc):
    from jostlab.opuc import sz2_inverse
    return True, {"verblunsky": serialize(sz2_inverse(parse_input(doc), tol=min(s.tol, 1e-12)))}, None


def _task_m(s, doc):
    from jostlab.spectral_m import m_eval
    p = _jacobi(doc)
    z = _points(s, 0.5 * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8))
    vals = m_eval(p, z)
    csv = "z_re,z_im,M_re,M_im\n" + "".join(f"{w.real!r},{w.imag!r},{v.real!r},{v.imag!r}\n" for w, v in zip(z, vals))
    return True, {"values": [{"z": _cplx(w), "M": _cplx(v)} for w, v in zip(z, vals)]}, csv


def _task_strip(s, doc):
    from jostlab.spectral_m import strip
    fam = strip(_jacobi(doc), s.level, tol=max(s.tol, 1e-10))
    return True, fam.to_json(), None


def _task_eigen(s, doc):
    from jostlab.spectral_m import eigen_data
    return True, eigen_data(_jacobi(doc)).to_json(), None


def _task_extract(s, doc):
    from jostlab.asymptotics import certify_residual, extract_series
    from jostlab import _numeric as nm
    prec = s.precision_bits or 128
    if doc.get("kind") != "sequence":
        raise InputError("extract needs {'kind': 'sequence', 'values': [...]} or a 'series' to sample", field="kind")
    if "values" in doc:
        x = nm.as_array(doc["values"], prec)
    elif "series" in doc:
        N = s.N or int(doc.get("N", 200))
        x = AsymptoticSeries.from_json(doc["series"]).realize(N, prec=prec)
    else:
        raise InputError("sequence document needs 'values' or 'series'", field="values")
    R_target = doc.get("R_target")
    series, info = extract_series(x, R_target=R_target, tol=s.tol, prec=prec, return_info=True)
    cert = certify_residual(x, series, R=R_target, prec=prec)
    return True, {"series": series.to_json(), "rank": info.rank, "residual_rate": info.residual_rate,
                  "certificate": cert if isinstance(cert, (dict, bool, float)) else str(cert)}, None


def _task_poles(s, doc):
    obj = parse_input(doc)
    which = s.which
    m = pole_model(obj, which, s.cutoff, _series_len(s), tol=s.tol)
    return True, {"function": which, "poles": m.poles.to_json(), "model": m.to_json()}, None


def _task_g_tilde(s, doc):
    from jostlab.pole_algebra import g_tilde
    if doc.get("kind") != "points":
        raise InputError("g-tilde needs {'kind': 'points', 'points': [[re, im], ...]}", field="kind")
    pts = [complex(*p) if isinstance(p, list) else complex(p) for p in doc["points"]]
    G = g_tilde(pts, s.cutoff)
    csv = "re,im,depth\n" + "".join(f"{e.value.real!r},{e.value.imag!r},{e.depth}\n" for e in G)
    return True, G.to_json(), csv


def _task_thm15(s, doc):
    from jostlab.annulus_check import theorem15_check
    p = _jacobi(doc)
    rep, profiles = theorem15_check(p, sharp=bool(doc.get("sharp", False)), return_profiles=True)
    return rep["pass"], rep, _profiles_csv(profiles)


def _task_thm13(s, doc):
    from jostlab.annulus_check import theorem13_check
    rep, profiles = theorem13_check(_verblunsky(doc), return_profiles=True)
    return rep["pass"], rep, _profiles_csv(profiles)


def _profiles_csv(profiles) -> str:
    out = ["function,radius,k,log_abs_c\n"]
    for name, prof in profiles.items():
        out.extend(f"{name},{line}\n" for line in prof.to_csv().splitlines()[1:])
    return "".join(out)


def _task_thm16(s, doc):
    from jostlab.spectral_m import SpectralModel, eigen_data
    p = _jacobi(doc)
    data = eigen_data(p)
    pre = not data.eigen_pairs and not data.resonance_at_plus1 and not data.resonance_at_minus1
    if not pre:
        return False, {"check": "thm1.6", "pass": False, "reason": "J has bound states or a resonance at +-1",
                       "spectral_data": data.to_json()}, None
    P = pole_model(p, "u", s.cutoff, _series_len(s)).poles.within(s.cutoff)
    T = pole_model(p, "B", s.cutoff, _series_len(s)).poles.within(s.cutoff)
    rep, ok = _containment_pair(T, P, s.cutoff, max(s.tol, 1e-6), ("T", "P"))
    return ok, {"check": "thm1.6", "pass": ok, "P": P.to_json(), "T": T.to_json(), **rep}, None


def _task_thm17(s, doc):
    from jostlab.spectral_m import SpectralModel, pole_sets
    p = _jacobi(doc)
    model = SpectralModel(p, s.cutoff)
    P1, P2, P = pole_sets(model, s.cutoff)
    T = pole_model(p, "B", s.cutoff, _series_len(s)).poles.within(s.cutoff)
    rep, ok = _containment_pair(T, P, s.cutoff, max(s.tol, 1e-6), ("T", "P"))
    return ok, {"check": "thm1.7", "pass": ok, "P1": P1.to_json(), "P2": P2.to_json(), "P": P.to_json(),
                "T": T.to_json(), **rep}, None


def _task_thm41(s, doc):
    from jostlab.spectral_m import SpectralModel, pole_sets
    p = _jacobi(doc)
    tol = max(s.tol, 1e-6)
    _, _, P0 = pole_sets(SpectralModel(p, s.cutoff), s.cutoff, tol)
    _, _, P1 = pole_sets(SpectralModel(p.shift(1), s.cutoff), s.cutoff, tol)
    ok = P0.same_as(P1, rel=tol, orders=True)
    return ok, {"check": "thm4.1", "pass": ok, "P_J": P0.to_json(), "P_J1": P1.to_json()}, None


HANDLERS = {
    "jost": _task_jost, "b-series": _task_b_series, "sz2": _task_sz2, "sz2-inverse": _task_sz2_inverse,
    "m-function": _task_m, "strip": _task_strip, "eigen": _task_eigen, "extract": _task_extract,
    "poles": _task_poles, "g-tilde": _task_g_tilde, "verify-thm15": _task_thm15, "verify-thm13": _task_thm13,
    "verify-thm16": _task_thm16, "verify-thm17": _task_thm17, "verify-thm41": _task_thm41,
}


def _dump(obj) -> str:
    def default(o):
        if isinstance(o, complex):
            return [o.real, o.imag]
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        return str(o)

    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return "inf" if o > 0 else ("-inf" if o < 0 else "nan")
        if isinstance(o, dict):
            return {str(k): clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return o

    return json.dumps(clean(obj), sort_keys=True, indent=2, default=default) + "\n"


def run_scenario(s: Scenario):
    """Run one scenario; returns ``(exit_code, report)`` and writes the report
    file ``<out_dir>/<name>.<task>.<format>``."""
    config = asdict(s)
    config["input"] = s.input if isinstance(s.input, (str, dict)) else str(s.input)
    # where the report goes is not part of what was computed
    config.pop("out_dir")
    try:
        s.validate()
        doc = _load_input(s.input)
        passed, body, csv = HANDLERS[s.task](s, doc)
        code = EXIT_PASS if passed else EXIT_FAIL
        report = {"task": s.task, "verdict": "pass" if passed else "fail", "config": config,
                  "version": __version__, "result": body}
    except InputError as exc:
        code, csv = EXIT_INPUT, None
        report = {"task": s.task, "verdict": "input-error", "config": config, "error": _error(exc)}
    except (JostlabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        code, csv = EXIT_NUMERIC, None
        report = {"task": s.task, "verdict": "numerical-error", "config": config, "error": _error(exc)}
    os.makedirs(s.out_dir, exist_ok=True)
    base = os.path.join(s.out_dir, f"{s.name}.{s.task}")
    if s.format == "csv" and csv is not None:
        with open(base + ".csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv)
    else:
        with open(base + ".json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_dump(report))
    return code, report


def _error(exc) -> dict:
    out = {"type": type(exc).__name__, "message": str(exc), "module": type(exc).__module__}
    for attr in ("index", "field", "location", "level"):
        v = getattr(exc, attr, None)
        if v is not None:
            out[attr] = v if not isinstance(v, complex) else [v.real, v.imag]
    tb = exc.__traceback__
    while tb is not None and tb.tb_next is not None:
        tb = tb.tb_next
    if tb is not None:
        out["operation"] = f"{os.path.basename(tb.tb_frame.f_code.co_filename)}:{tb.tb_frame.f_code.co_name}"
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jostlab", description="Jost functions, m-functions and pole sets "
                                                             "of Jacobi matrices with exponentially decaying parameters.")
    ap.add_argument("task", nargs="?", choices=TASKS)
    ap.add_argument("--task", dest="task_flag", choices=TASKS, help="alternative to the positional task")
    ap.add_argument("--input", help="JSON file, inline JSON, or fixture name")
    ap.add_argument("--config", help="JSON config file; flags override its values")
    ap.add_argument("--name", help="report file stem (default: fixture name or 'scenario')")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--cutoff", type=float)
    ap.add_argument("--N", dest="N", type=int, help="series length")
    ap.add_argument("--precision-bits", dest="precision_bits", type=int)
    ap.add_argument("--out-dir", dest="out_dir")
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--level", type=int, help="stripping depth for 'strip'")
    ap.add_argument("--which", choices=("u", "B", "S", "Q", "dinv"), help="function for 'poles'")
    ap.add_argument("--point", dest="points", action="append", type=complex,
                    help="evaluation point (repeatable, Python complex syntax, e.g. 0.5+0.1j)")
    ap.add_argument("--list-fixtures", action="store_true")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"jostlab {__version__}")
    return ap


def scenario_from_args(ns) -> Scenario:
    base = {}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {ns.config}: {exc}", field="config") from None
        if not isinstance(base, dict):
            raise InputError("config must be a JSON object", field="config")
        unknown = set(base) - set(Scenario.__dataclass_fields__)
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}", field="config")
    task = ns.task or ns.task_flag or base.get("task")
    if ns.task and ns.task_flag and ns.task != ns.task_flag:
        raise InputError(f"conflicting tasks {ns.task!r} and {ns.task_flag!r}", field="task")
    if not task:
        raise InputError("no task given (positional, --task, or config)", field="task")
    s = Scenario(**{**base, "task": task})
    for key in ("input", "name", "tol", "cutoff", "N", "precision_bits", "out_dir", "format", "level", "which"):
        v = getattr(ns, key, None)
        if v is not None:
            s = replace(s, **{key: v})
    if ns.points:
        s = replace(s, points=[[p.real, p.imag] for p in ns.points])
    if not ns.name and "name" not in base and isinstance(s.input, str) and s.input in fixtures():
        s = replace(s, name=s.input)
    return s


def main(argv=None) -> int:
    ap = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if "--list-fixtures" in argv:
        for k in sorted(fixtures()):
            print(k)
        return EXIT_PASS
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        s = scenario_from_args(ns)
    except (InputError, TypeError) as exc:
        print(f"jostlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code, report = run_scenario(s)
    verdict = report["verdict"]
    msg = f"{s.task} [{s.name}]: {verdict}"
    if "error" in report:
        msg += f" ({report['error']['type']}: {report['error']['message']})"
    print(msg)
    return code


if __name__ == "__main__":
    sys.exit(main())
