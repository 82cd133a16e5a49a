"""
Command line interface and scenario runner.

Every subcommand prints a JSON report on stdout (and writes it, with any CSV
grids, to ``--out`` when given).  Exit codes: 0 success, 2 an inequality is
violated, 3 a numeric result is inconclusive, 64 malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import circle, connection, domain, euler, fuchsian, harmonic, inequalities

EXIT_OK, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 2, 3, 64

UNITS_NOTE = "angles, translation numbers and fibre coordinates are in turns (1 turn = 2 pi radians)"

DEFAULTS = {
    "mesh_res": 0.25,
    "theta_nodes": 512,
    "truncation_steps": [1, 2, 3, 4, 5],
    "seed": 0,
    "tol": 1e-9,
    "word_length": 30,
    "samples": 20000,
}


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# building blocks

def parse_signature(text: str) -> fuchsian.OrbifoldSignature:
    """'g;a1,a2,...;m', e.g. '2;;0', '0;2,3;1', '0;2,3,7'."""
    parts = [p.strip() for p in str(text).split(";")]
    if not 1 <= len(parts) <= 3:
        raise UsageError(f"signature {text!r} is not of the form 'g;a1,a2,...;m'")
    try:
        g = int(parts[0])
        cones = tuple(int(a) for a in parts[1].split(",") if a.strip()) if len(parts) > 1 else ()
        m = int(parts[2]) if len(parts) > 2 and parts[2] else 0
    except ValueError:
        raise UsageError(f"signature {text!r} is not of the form 'g;a1,a2,...;m'") from None
    return fuchsian.OrbifoldSignature(g, cones, m)


def build_presentation(spec: dict) -> fuchsian.LatticePresentation:
    if "catalog" in spec:
        return fuchsian.catalog(parse_signature(spec["catalog"]))
    if "file" in spec:
        return fuchsian.load_presentation(spec["file"])
    return fuchsian.presentation_from_record(spec["record"])


def build_representation(pres, spec: dict) -> euler.RepresentationSpec:
    kind = spec.get("kind", "fuchsian")
    seed = int(spec.get("seed", 0))
    rng = np.random.default_rng(seed)
    if kind == "fuchsian":
        return euler.fuchsian_rep(pres)
    if kind == "reversed":
        return euler.reversed_rep(euler.fuchsian_rep(pres))
    if kind == "rotations":
        return euler.rotation_rep(pres.signature, rng, int(spec.get("denominator", 60)))
    if kind == "pl-conjugate":
        h = circle.random_pl_lift(rng, n=int(spec.get("breakpoints", 8)))
        return euler.conjugate_rep(euler.fuchsian_rep(pres), h)
    if kind == "blowup":
        base = euler.fuchsian_rep(pres)
        gadget = euler.OrbitBlowup(base, float(spec.get("x0", rng.uniform())))
        return euler.semiconjugate_deform(base, gadget)
    if kind == "record":
        return euler.RepresentationSpec.from_record(spec["record"], pres)
    if kind == "file":
        with open(spec["file"]) as fh:
            return euler.RepresentationSpec.from_record(json.load(fh), pres)
    raise UsageError(f"unknown representation kind {kind!r}")


def build_family(spec: dict) -> harmonic.HarmonicFamily:
    kind = spec.get("kind", "poisson")
    if kind == "poisson":
        return harmonic.poisson_family()
    if kind == "constant":
        return harmonic.ConstantFamily()
    if kind == "mixture":
        shifts = spec.get("shifts", [0.0, 0.5])
        weights = spec.get("weights", [0.5, 0.5])
        if len(shifts) != len(weights):
            raise UsageError("mixture shifts and weights must have the same length")
        return harmonic.rotated_mixture(shifts, weights)
    raise UsageError(f"unknown family kind {kind!r}")


def settings_from(overrides: dict | None) -> dict:
    out = dict(DEFAULTS)
    for k, v in (overrides or {}).items():
        if v is not None:
            out[k] = v
    out["truncation_steps"] = [int(s) for s in out["truncation_steps"]]
    return out


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def dumps(report: dict) -> str:
    """Canonical JSON text: sorted keys, shortest round-trip floats."""
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def emit_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(report))


def emit_grid(field_: connection.CurvatureField, path) -> None:
    with open(path, "w") as fh:
        fh.write(field_.to_csv())


# --------------------------------------------------------------------------
# tasks; each returns (report fragment, exit status, {filename: text})

def task_euler(ctx) -> tuple:
    sd = ctx.seifert()
    e = sd.euler
    chi = fuchsian.chi_orb(ctx.rep.signature)
    return {"euler": str(e), "euler_estimate": e.estimate, "euler_error": e.error,
            "chi_orb": str(chi)}, EXIT_OK, {}


def task_seifert(ctx) -> tuple:
    return ctx.seifert().to_record(), EXIT_OK, {}


def _inequality_status(rep: inequalities.InequalityReport) -> int:
    if rep.violated:
        return EXIT_VIOLATION
    if rep.holds is None and rep.applicable:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def task_mw(ctx) -> tuple:
    rep = inequalities.milnor_wood_check(ctx.rep, ctx.seifert())
    return rep.to_record(), _inequality_status(rep), {}


def task_ehn(ctx) -> tuple:
    try:
        rep = inequalities.check_ehn(ctx.rep, ctx.seifert(), ctx.settings["tol"])
    except inequalities.InconclusiveDisplacement as exc:
        return {"inconclusive": str(exc)}, EXIT_INCONCLUSIVE, {}
    diag = inequalities.ehn_equality_diagnosis(rep, ctx.seifert())
    out = rep.to_record()
    out["diagnosis"] = diag.to_record()
    return out, _inequality_status(rep), {}


def task_curvature(ctx) -> tuple:
    step = ctx.settings["truncation_steps"][-1]
    dom = ctx.domain(step)
    cf = connection.curvature_field(ctx.evaluator(), dom)
    out = {"step": step, "triangles": len(dom.triangles), "area": dom.area,
           "K_min": float(cf.K.min()) if len(cf.K) else None,
           "K_max": float(cf.K.max()) if len(cf.K) else None,
           "K_mean": float(np.sum(cf.K * cf.areas) / np.sum(cf.areas)) if len(cf.K) else None,
           "max_abs_K": cf.max_abs, "curvature_integral": cf.integral,
           "grid": "curvature.csv"}
    return out, EXIT_OK, {"curvature.csv": cf.to_csv()}


def task_gauss_bonnet(ctx) -> tuple:
    doms = [ctx.domain(s) for s in ctx.settings["truncation_steps"]]
    rep = connection.gauss_bonnet_report(ctx.evaluator(), doms, ctx.seifert(), ctx.rep,
                                         tol=ctx.settings["tol"])
    return rep, EXIT_OK, {}


def task_stationary(ctx) -> tuple:
    st = ctx.settings
    x = harmonic.random_word_endpoints(ctx.rep.symmetric_generators(), int(st["word_length"]),
                                       int(st["samples"]), int(st["seed"]))
    mu = harmonic.CircleMeasure.from_samples(x)
    w1, noise = harmonic.equivariance_defect(ctx.rep, x, seed=int(st["seed"]))
    edges, mass = mu.bins(64)
    out = {"samples": int(st["samples"]), "word_length": int(st["word_length"]),
           "equivariance_w1": w1, "noise_bound": noise, "max_bin_mass": float(np.max(mass)),
           "histogram": "stationary.csv"}
    return out, EXIT_OK, {"stationary.csv": mu.to_csv(64)}


TASKS = {
    "euler": task_euler,
    "seifert": task_seifert,
    "mw": task_mw,
    "ehn": task_ehn,
    "curvature": task_curvature,
    "gauss-bonnet": task_gauss_bonnet,
    "stationary": task_stationary,
}
TASK_ORDER = list(TASKS)


class Context:
    """Lazily built objects shared by the tasks of one run."""

    def __init__(self, pres, rep, family, settings):
        self.pres, self.rep, self.family, self.settings = pres, rep, family, settings
        self._seifert = None
        self._domains = {}
        self._ev = None

    def seifert(self):
        if self._seifert is None:
            self._seifert = euler.seifert_data(self.rep)
        return self._seifert

    def evaluator(self):
        if self._ev is None:
            self._ev = connection.ConnectionEvaluator(self.family, int(self.settings["theta_nodes"]))
        return self._ev

    def domain(self, step):
        if step not in self._domains:
            self._domains[step] = domain.truncated_domain(self.pres, step, float(self.settings["mesh_res"]))
        return self._domains[step]


def combine_status(a: int, b: int) -> int:
    for code in (EXIT_VIOLATION, EXIT_INCONCLUSIVE):
        if code in (a, b):
            return code
    return EXIT_OK


def run_tasks(ctx: Context, tasks) -> tuple[dict, int, dict]:
    report = {"signature": str(ctx.pres.signature), "representation": ctx.rep.label,
              "family": ctx.family.describe() if ctx.family is not None else None,
              "settings": ctx.settings, "units": UNITS_NOTE,
              "hypothesis": "the group is a lattice in PSL(2,R)", "results": {}}
    status, files = EXIT_OK, {}
    for name in sorted(set(tasks), key=TASK_ORDER.index):
        frag, st, fs = TASKS[name](ctx)
        report["results"][name] = frag
        files.update(fs)
        status = combine_status(status, st)
    return report, status, files


# --------------------------------------------------------------------------
# scenarios

_MATRIX = {"type": "array", "minItems": 2, "maxItems": 2,
           "items": {"type": "array", "minItems": 2, "maxItems": 2,
                     "items": {"type": ["number", "string"]}}}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["presentation", "tasks"],
    "properties": {
        "name": {"type": "string"},
        "presentation": {
            "type": "object",
            "oneOf": [
                {"required": ["catalog"], "properties": {"catalog": {"type": "string"}},
                 "additionalProperties": False},
                {"required": ["file"], "properties": {"file": {"type": "string"}},
                 "additionalProperties": False},
                {"required": ["record"], "additionalProperties": False, "properties": {"record": {
                    "type": "object",
                    "required": ["signature", "generators"],
                    "properties": {
                        "signature": {"type": "object", "required": ["genus"],
                                      "properties": {"genus": {"type": "integer", "minimum": 0},
                                                     "cone_orders": {"type": "array",
                                                                     "items": {"type": "integer", "minimum": 2}},
                                                     "cusps": {"type": "integer", "minimum": 0}},
                                      "additionalProperties": False},
                        "generators": {"type": "object", "minProperties": 1,
                                       "additionalProperties": _MATRIX},
                        "status": {"type": "string"},
                    },
                    "additionalProperties": False}}},
            ],
        },
        "representation": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["fuchsian", "reversed", "rotations", "pl-conjugate", "blowup",
                                  "record", "file"]},
                "seed": {"type": "integer"},
                "denominator": {"type": "integer", "minimum": 1},
                "breakpoints": {"type": "integer", "minimum": 2},
                "x0": {"type": "number"},
                "record": {"type": "object"},
                "file": {"type": "string"},
            },
            "additionalProperties": False,
        },
        "family": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["poisson", "constant", "mixture"]},
                "shifts": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "weights": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                            "minItems": 1},
            },
            "additionalProperties": False,
        },
        "tasks": {"type": "array", "minItems": 1, "items": {"enum": TASK_ORDER}},
        "settings": {
            "type": "object",
            "properties": {
                "mesh_res": {"type": "number", "exclusiveMinimum": 0},
                "theta_nodes": {"type": "integer", "minimum": 8},
                "truncation_steps": {"type": "array", "minItems": 1,
                                     "items": {"type": "integer", "minimum": 1}},
                "seed": {"type": "integer", "minimum": 0},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "word_length": {"type": "integer", "minimum": 1},
                "samples": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
    },
}

NEEDS_FAMILY = {"curvature", "gauss-bonnet"}


def validate_scenario(data) -> None:
    """Raise UsageError with the JSON path of the first schema violation."""
    import jsonschema

    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise UsageError(f"scenario field {path}: {err.message}")
    missing = NEEDS_FAMILY & set(data["tasks"])
    if missing and "family" not in data:
        raise UsageError(f"scenario field family: required by task(s) {sorted(missing)}")


def run_scenario(path, out_dir=None) -> tuple[dict, int]:
    """Validate, run and write one scenario; returns the report and exit status."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read scenario {path}: {exc}") from None
    validate_scenario(data)
    name = data.get("name") or os.path.splitext(os.path.basename(str(path)))[0]
    settings = settings_from(data.get("settings"))
    try:
        pres = build_presentation(data["presentation"])
    except (fuchsian.PresentationError, fuchsian.UnsupportedSignature, KeyError, ValueError) as exc:
        raise UsageError(f"scenario field presentation: {exc}") from None
    rep = build_representation(pres, data.get("representation", {"kind": "fuchsian"}))
    family = build_family(data["family"]) if "family" in data else None
    report, status, files = run_tasks(Context(pres, rep, family, settings), data["tasks"])
    report["scenario"] = name
    out_dir = out_dir or f"{name}-out"
    os.makedirs(out_dir, exist_ok=True)
    emit_report(report, os.path.join(out_dir, "report.json"))
    for fname, text in files.items():
        with open(os.path.join(out_dir, fname), "w") as fh:
            fh.write(text)
    return report, status


# --------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _steps(text: str) -> list[int]:
    text = text.strip()
    if "," in text:
        return [int(s) for s in text.split(",") if s.strip()]
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("truncation steps must be >= 1")
    return list(range(1, n + 1))


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input")
    g.add_argument("--signature", default="2;;0",
                   help="catalog signature 'g;a1,a2,...;m' (default: genus-2 surface '2;;0')")
    g.add_argument("--presentation", metavar="FILE", help="presentation JSON instead of a catalog entry")
    g.add_argument("--rep", default="fuchsian",
                   choices=["fuchsian", "reversed", "rotations", "pl-conjugate", "blowup"],
                   help="representation built from the presentation")
    g.add_argument("--rep-file", metavar="FILE", help="representation JSON (overrides --rep)")
    g.add_argument("--family", default="poisson", choices=["poisson", "constant", "mixture"])
    g.add_argument("--shifts", type=float, nargs="+", help="mixture kernel shifts (turns)")
    g.add_argument("--weights", type=float, nargs="+", help="mixture kernel weights")
    n = p.add_argument_group("numerics")
    n.add_argument("--mesh-res", type=float, help="maximal hyperbolic side length of mesh triangles")
    n.add_argument("--theta-nodes", type=int, help="initial number of fibre quadrature nodes")
    n.add_argument("--truncation-steps", type=_steps,
                   help="N for the schedule 1..N, or a comma separated list of steps")
    n.add_argument("--seed", type=int, help="seed for random representations and Monte Carlo")
    n.add_argument("--tol", type=float, help="holonomy quadrature tolerance")
    n.add_argument("--word-length", type=int, help="random word length for the stationary measure")
    n.add_argument("--samples", type=int, help="number of Monte Carlo samples")
    p.add_argument("--out", metavar="DIR", help="write report.json and CSV files here")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="harmonic-euler",
                     description="Euler numbers of circle actions of lattices and the curvature "
                                 "of harmonic-measure connections.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [("euler", "Euler number of a representation"),
                        ("seifert", "normalized Seifert invariants"),
                        ("curvature", "curvature grid of a harmonic family on a truncated domain"),
                        ("gauss-bonnet", "interior curvature versus boundary holonomy over a truncation schedule"),
                        ("stationary", "Monte Carlo stationary measure of the random walk")]:
        _common(sub.add_parser(name, help=help_))
    check = sub.add_parser("check", help="Milnor-Wood or Eisenbud-Hirsch-Neumann inequality")
    check.add_argument("inequality", choices=["mw", "ehn"])
    _common(check)
    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario")
    run.add_argument("--out", metavar="DIR", help="output directory (default: <name>-out)")
    return parser


def _context_from_args(args) -> Context:
    settings = settings_from({"mesh_res": args.mesh_res, "theta_nodes": args.theta_nodes,
                              "truncation_steps": args.truncation_steps, "seed": args.seed,
                              "tol": args.tol, "word_length": args.word_length,
                              "samples": args.samples})
    pres = build_presentation({"file": args.presentation} if args.presentation
                              else {"catalog": args.signature})
    rep_spec = {"kind": "file", "file": args.rep_file} if args.rep_file else \
        {"kind": args.rep, "seed": settings["seed"]}
    rep = build_representation(pres, rep_spec)
    fam_spec = {"kind": args.family}
    if args.shifts is not None:
        fam_spec["shifts"] = args.shifts
    if args.weights is not None:
        fam_spec["weights"] = args.weights
    return Context(pres, rep, build_family(fam_spec), settings)


USAGE_ERRORS = (UsageError, fuchsian.UnsupportedSignature, fuchsian.PresentationError,
                euler.DegenerateSignature, euler.RelatorNotIdentity, FileNotFoundError)
NUMERIC_ERRORS = (circle.AmbiguousLift, circle.NotFiniteOrder, inequalities.InconclusiveDisplacement,
                  connection.StepTooCoarse, domain.MeshFailure)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "run":
            report, status = run_scenario(args.scenario, args.out)
            sys.stdout.write(dumps(report))
            return status
        ctx = _context_from_args(args)
        task = args.inequality if args.command == "check" else args.command
        report, status, files = run_tasks(ctx, [task])
        text = dumps(report)
        sys.stdout.write(text)
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            emit_report(report, os.path.join(args.out, "report.json"))
            for fname, body in files.items():
                with open(os.path.join(args.out, fname), "w") as fh:
                    fh.write(body)
        return status
    except USAGE_ERRORS as exc:
        sys.stderr.write(f"harmonic-euler: error: {exc}\n")
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        sys.stderr.write(f"harmonic-euler: inconclusive: {exc}\n")
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
