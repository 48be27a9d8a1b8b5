"""Command-line front end: ``talbot run|reproduce|bands|fiber``.

Exit codes: 0 success, 2 invalid input (nothing written), 3 a numerical
check in the summary failed or the library raised during computation.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import bands, fiber
from .errors import TalbotError
from .grid import TWO_PI, Family, make_potential
from .io import write_json
from .propagation import (NON_REVIVAL_TOL, REVIVAL_TOL, SAMPLES_PER_PERIOD, Profile, Scenario,
                          deviation_at, propagate, recurrence_search, write_snapshots_csv,
                          write_trace_csv)

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3
NORM_TOL = 1e-8
RECURRENCE_EPS = 0.05

FIGURES = {
    "fig2": ["fig2_v0.json", "fig2_v1.json", "fig2_v2.json"],
    "fig3": ["fig3.json", "fig3_hermitian.json", "fig3_n2m1.json", "fig3_n2m1_tilted.json"],
    "fig4": ["fig4.json"],
}

_num = {"type": "number"}
_int = {"type": "integer", "minimum": 1}
SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["potential", "commensurability"],
    "properties": {
        "name": {"type": "string"},
        "potential": {
            "type": "object", "additionalProperties": False, "required": ["family"],
            "properties": {
                "family": {"enum": [f.value for f in Family]},
                "a": {"type": "number", "exclusiveMinimum": 0},
                "rho": _num, "V0": _num,
                "n_max": _int,
                "real_part_only": {"type": "boolean"},
            },
        },
        "commensurability": {
            "type": "object", "additionalProperties": False, "required": ["N", "M"],
            "properties": {"N": _int, "M": _int},
        },
        "tilt": {
            "type": "object", "additionalProperties": False, "required": ["p_num", "p_den"],
            "properties": {"p_num": {"type": "integer"}, "p_den": _int},
        },
        "profile": {
            "type": "object", "additionalProperties": False, "required": ["kind"],
            "properties": {
                "kind": {"enum": ["GAUSSIAN_TRAIN", "JORDAN_V"]},
                "width_over_L": {"type": "number", "exclusiveMinimum": 0},
                "level": _int,
            },
        },
        "z": {
            "type": "object", "additionalProperties": False, "required": ["mode"],
            "properties": {"mode": {"enum": ["revivals", "trace", "list"]},
                           "params": {"type": "object"}},
        },
        "n_trunc": _int,
        "outputs": {
            "type": "object", "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
    },
}

_Z_PARAMS = {
    "revivals": {"type": "object", "additionalProperties": False,
                 "properties": {"count": _int, "per_period": _int}},
    "trace": {"type": "object", "additionalProperties": False, "required": ["z_max"],
              "properties": {"z_max": {"type": "number", "exclusiveMinimum": 0},
                             "samples": {"type": "integer", "minimum": 2}}},
    "list": {"type": "object", "additionalProperties": False, "required": ["values"],
             "properties": {"values": {"type": "array", "minItems": 1,
                                       "items": {"type": "number", "minimum": 0}}}},
}


class InvalidScenario(Exception):
    pass


@dataclass
class Job:
    name: str
    scenario: Scenario
    revivals: int
    out_dir: Path


def _z_samples(zspec: dict, z_t: float) -> tuple[np.ndarray, int]:
    mode = zspec.get("mode", "revivals")
    params = zspec.get("params", {})
    try:
        jsonschema.validate(params, _Z_PARAMS[mode])
    except jsonschema.ValidationError as e:
        raise InvalidScenario(f"z.params: {e.message}") from None
    if mode == "revivals":
        count = params.get("count", 2)
        per = params.get("per_period", SAMPLES_PER_PERIOD)
        return z_t * np.arange(count * per + 1) / per, count
    if mode == "trace":
        n = params.get("samples", 4097)
        return np.linspace(0.0, params["z_max"], n), 2
    return np.asarray(params["values"], dtype=float), 2


def load_job(doc: dict, default_name: str = "scenario", out_dir=None) -> Job:
    """Validate a scenario document and build the library objects; raises InvalidScenario."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise InvalidScenario(f"{where}: {e.message}") from None
    p = doc["potential"]
    try:
        pot = make_potential(p["family"], p.get("a", TWO_PI), p.get("rho"), p.get("V0"),
                             p.get("n_max", 48))
        if p.get("real_part_only"):
            pot = pot.real_part()
        c = doc["commensurability"]
        t = doc.get("tilt", {"p_num": 0, "p_den": 1})
        prof = doc.get("profile", {"kind": "GAUSSIAN_TRAIN"})
        profile = Profile(prof["kind"], prof.get("width_over_L", 0.1), prof.get("level", 1))
        scen = Scenario(pot, c["N"], c["M"], Fraction(t["p_num"], t["p_den"]), profile,
                        n_trunc=doc.get("n_trunc"))
        z, count = _z_samples(doc.get("z", {"mode": "revivals"}), scen.revival_distance)
        scen = Scenario(pot, c["N"], c["M"], scen.tilt, profile, z, doc.get("n_trunc"))
        scen.initial_field()   # profile errors are input errors
    except (TalbotError, ValueError, TypeError) as e:
        raise InvalidScenario(f"{type(e).__name__}: {e}") from None
    name = doc.get("name", default_name)
    if out_dir is None:
        out_dir = doc.get("outputs", {}).get("dir", f"talbot-out/{name}")
    return Job(name, scen, count, Path(out_dir))


def _expectation(scen: Scenario, diagram, report) -> tuple[str, str]:
    """``revival``, ``no_revival`` or ``none`` (no guarantee either way)."""
    if not diagram.is_gapless():
        return "none", "potential is not a gapless PT crystal"
    if scen.tilt != 0:
        return "revival", "tilted input satisfying the tilt conditions"
    verdict = bands.theorem1_applicable(report, scen.N)
    return ("revival" if verdict.ok else "no_revival"), verdict.reason


def execute(job: Job) -> tuple[dict, dict]:
    """Compute everything for ``job``; returns (summary, artifacts) without writing."""
    scen = job.scenario
    pot = scen.potential
    try:
        diagram = bands.band_diagram(pot)
    except bands.ComplexSpectrum:
        diagram = None
    report = bands.detect_singularities(pot)
    trace = propagate(scen)
    z_t = scen.revival_distance
    zs = [k * z_t for k in range(1, job.revivals + 1)]
    deltas = deviation_at(scen, zs)
    if diagram is not None:
        expect, reason = _expectation(scen, diagram, report)
    else:
        expect, reason = "none", "complex band spectrum"

    checks = []
    for z, d in zip(zs, deltas):
        if expect == "revival":
            checks.append({"name": f"revival at z={z:.6g}", "delta": float(d),
                           "tolerance": REVIVAL_TOL, "pass": bool(d < REVIVAL_TOL)})
        elif expect == "no_revival":
            checks.append({"name": f"no revival at z={z:.6g}", "delta": float(d),
                           "tolerance": NON_REVIVAL_TOL, "pass": bool(d > NON_REVIVAL_TOL)})
    hermitian = bool(np.allclose(pot.coeffs, np.conj(pot.coeffs[::-1]), atol=1e-14))
    recurrence = None
    if hermitian:
        drift = float(np.max(np.abs(trace.norm - trace.norm[0])) / trace.norm[0])
        checks.append({"name": "norm conservation", "delta": drift, "tolerance": NORM_TOL,
                       "pass": drift <= NORM_TOL})
        recurrence = {"epsilon": RECURRENCE_EPS, "z0": recurrence_search(trace, RECURRENCE_EPS)}

    summary = {
        "name": job.name,
        "family": pot.form_tag.value,
        "N": scen.N, "M": scen.M, "tilt": str(scen.tilt),
        "input_period": scen.input_period,
        "z_T": z_t,
        "expectation": expect,
        "reason": reason,
        "gapless": None if diagram is None else diagram.is_gapless(),
        "defective_levels": report.defective_levels,
        "revivals": [{"z": z, "delta": float(d)} for z, d in zip(zs, deltas)],
        "delta_half_at_half_period": float(deviation_half(scen)),
        "tolerances": {"revival": REVIVAL_TOL, "non_revival": NON_REVIVAL_TOL, "norm": NORM_TOL},
        "recurrence": recurrence,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }
    return summary, {"trace": trace, "diagram": diagram, "report": report}


def deviation_half(scen: Scenario) -> float:
    from .propagation import evolve
    f0 = scen.initial_field()
    tr = evolve(f0, scen.potential, [scen.revival_distance / 2], None, scen.input_period / 2,
                scen.n_trunc, keep_fields=False)
    return float(tr.delta_half[0])


def write_outputs(job: Job, summary: dict, artifacts: dict):
    out = job.out_dir
    out.mkdir(parents=True, exist_ok=True)
    trace = artifacts["trace"]
    write_trace_csv(trace, out / "trace.csv")
    write_snapshots_csv(trace, out / "snapshots.csv", every=max(1, (len(trace.z) - 1) // 64))
    if artifacts["diagram"] is not None:
        bands.write_bands_csv(artifacts["diagram"], out / "bands.csv")
    bands.write_singularities_csv(artifacts["report"], out / "singularities.csv")
    write_json(out / "summary.json", summary)


def _read(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidScenario(f"cannot read scenario {path}: {e}") from None
    if not isinstance(doc, dict):
        raise InvalidScenario("scenario must be a JSON object")
    return doc


def _run_jobs(jobs: list[Job]) -> int:
    status = EXIT_OK
    for job in jobs:
        try:
            summary, artifacts = execute(job)
        except TalbotError as e:
            print(f"{job.name}: {type(e).__name__}: {e}", file=sys.stderr)
            return EXIT_FAILED
        write_outputs(job, summary, artifacts)
        for c in summary["checks"]:
            print(f"{job.name}: {'PASS' if c['pass'] else 'FAIL'} {c['name']} "
                  f"delta={c['delta']:.3e} tol={c['tolerance']:.0e}")
        if not summary["pass"]:
            failed = [c["name"] for c in summary["checks"] if not c["pass"]]
            print(f"{job.name}: failed checks: {', '.join(failed)}", file=sys.stderr)
            status = EXIT_FAILED
    return status


def cmd_run(args) -> int:
    job = load_job(_read(args.file), Path(args.file).stem, args.out)
    return _run_jobs([job])


def bundled(name: str) -> dict:
    return json.loads(resources.files("pttalbot.scenarios").joinpath(name).read_text())


def cmd_reproduce(args) -> int:
    root = Path(args.out or f"talbot-out/{args.figure}")
    jobs = []
    for fname in FIGURES[args.figure]:
        stem = fname.removesuffix(".json")
        jobs.append(load_job(bundled(fname), stem, root / stem))
    return _run_jobs(jobs)


def cmd_bands(args) -> int:
    try:
        pot = make_potential(args.family, args.a, args.rho, args.V0, args.n_max)
    except (TalbotError, ValueError) as e:
        raise InvalidScenario(str(e)) from None
    out = Path(args.out)
    try:
        diagram = bands.band_diagram(pot, args.q_count, args.alpha_max, args.n_trunc)
        report = bands.detect_singularities(pot, args.n_energy_max, args.n_trunc)
    except TalbotError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED
    out.mkdir(parents=True, exist_ok=True)
    bands.write_bands_csv(diagram, out / "bands.csv")
    bands.write_singularities_csv(report, out / "singularities.csv")
    dev = float(diagram.parabola_deviation().max())
    print(f"max deviation from folded parabola: {dev:.3e}")
    print(f"defective levels: {report.defective_levels}")
    return EXIT_OK


def cmd_fiber(args) -> int:
    try:
        params = fiber.FiberParams.from_engineering(
            args.wavelength_nm, args.dispersion, loop_length=args.L_f,
            modulation_frequency=args.nu_m, gain=args.gain, loss=args.loss, N=args.N, M=args.M,
            pulse_count=args.pulses, group_index=args.group_index, bandwidth=args.bandwidth)
        tilt = Fraction(args.tilt)
        pot = make_potential(args.family, TWO_PI, args.rho, args.V0) if args.family else None
    except (TalbotError, ValueError, ZeroDivisionError) as e:
        raise InvalidScenario(str(e)) from None
    try:
        report = fiber.design_report(params, pot, tilt, check=args.reference_check)
    except TalbotError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED
    print(f"total dispersion  {report['total_dispersion_s2']:.6e} s^2")
    print(f"z_T               {report['z_T']:.6g}")
    print(f"n_T               {report['n_T']:.6g} round trips")
    print(f"pulse spacing     {report['pulse_spacing_s']:.6g} s")
    print(f"depth scale       {report['depth_scale']:.6g}")
    cap = report["capacity"]
    print(f"capacity          {cap['requested']} of {cap['max_pulses']} pulses "
          f"({'ok' if cap['ok'] else 'overlap'})")
    notes = report.get("reference_check") or report["annotations"]
    for a in notes:
        print(f"{a['status']:<18} {a['quantity']}: computed {a['computed']:.4g}, "
              f"quoted {a['reference']:.4g}" + (f" ({a['note']})" if a["note"] else ""))
    write_json(Path(args.out), report)
    return EXIT_OK if cap["ok"] else EXIT_FAILED


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="talbot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("file")
    p.add_argument("--out", help="output directory (overrides outputs.dir)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reproduce", help="run the pinned scenarios of a figure")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("bands", help="band diagram and singularity census")
    p.add_argument("--family", default="ONE_SS", choices=[f.value for f in Family])
    p.add_argument("--a", type=float, default=TWO_PI)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--V0", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=48)
    p.add_argument("--q-count", type=int, default=64)
    p.add_argument("--alpha-max", type=int, default=6)
    p.add_argument("--n-energy-max", type=int, default=6)
    p.add_argument("--n-trunc", type=int)
    p.add_argument("--out", default="talbot-out/bands")
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("fiber", help="fiber-loop design budget")
    p.add_argument("--wavelength-nm", type=float, default=1560.0)
    p.add_argument("--dispersion", type=float, default=50.0, help="ps/(nm km)")
    p.add_argument("--L-f", type=float, default=100.0, help="loop length (m)")
    p.add_argument("--nu-m", type=float, default=3e9, help="modulation frequency (Hz)")
    p.add_argument("--gain", type=float, default=0.0)
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--tilt", default="0")
    p.add_argument("--pulses", type=int, default=100)
    p.add_argument("--group-index", type=float, default=1.45)
    p.add_argument("--bandwidth", type=float, default=40e9, help="modulator bandwidth (Hz)")
    p.add_argument("--family", choices=[f.value for f in Family],
                   help="target potential for the drive tables")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--V0", type=float, default=1.0)
    p.add_argument("--reference-check", "--paper-check", dest="reference_check",
                   action="store_true", help="evaluate the quoted 100 m loop operating points")
    p.add_argument("--out", default="design_report.json")
    p.set_defaults(func=cmd_fiber)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidScenario as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
