"""Command-line runner: figure experiments and ad-hoc gate synthesis as CSV artifacts.

Manifests are TOML files of flat dotted keys, e.g.::

    experiment = "fig2"
    run.steps = 20000
    transmon.alpha = 280.0        # MHz
    two_qubit.beta = 1.7

Frequencies and rates are given in MHz (cycles) and converted to rad/us.
"""
from __future__ import annotations

import argparse
import ast
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .controls import hamiltonian_from_controls, synthesize_controls, write_controls_csv
from .dynamics import propagator
from .gates import (
    GATE_PARAMS,
    evolution_operator_simplified,
    gate_distance_up_to_phase,
    write_matrix_csv,
)
from .metrics import SCHEMES, sweep_decoherence, sweep_systematic
from .paths import PathParams
from .report import write_table
from .transmon import TransmonParams, mhz, omega_max_sweep, simulate_single_qubit
from .two_qubit import InfeasibleDesignError, TwoQubitParams, design_cphase, simulate_two_qubit

log = logging.getLogger("geogates")

EXPERIMENTS = {
    "fig2": "F1 versus decoherence rate, NPGQC and DG, H and T gates",
    "fig3": "F1 over the (delta, eps) systematic-error grid, NPGQC and DG, H and T",
    "fig5a": "transmon F1 versus peak drive amplitude, H and T",
    "fig5bcd": "transmon gate-fidelity, population and state-fidelity dynamics",
    "fig6": "two-qubit controlled-phase dynamics and fidelities",
    "synth": "control fields and closed-form operator of one gate",
    "sweep-custom": "single decoherence or systematic-error sweep",
}

# key -> (type, default, unit); "MHz" values are converted to rad/us
SCHEMA = {
    "run.steps": (int, 20_000, None),
    "run.jobs": (int, 1, None),
    "run.out": (str, "results", None),
    "transmon.alpha": (float, 280.0, "MHz"),
    "transmon.kappa1": (float, 2e-3, "MHz"),
    "transmon.kappa2": (float, 2e-3, "MHz"),
    "transmon.omega_max_H": (float, 51.0, "MHz"),
    "transmon.omega_max_T": (float, 38.0, "MHz"),
    "transmon.drag": (bool, True, None),
    "transmon.sweep_min": (float, 10.0, "MHz"),
    "transmon.sweep_max": (float, 80.0, "MHz"),
    "transmon.sweep_points": (int, 36, None),
    "two_qubit.g12": (float, 5.0, "MHz"),
    "two_qubit.delta12": (float, 600.0, "MHz"),
    "two_qubit.alpha1": (float, 300.0, "MHz"),
    "two_qubit.alpha2": (float, 280.0, "MHz"),
    "two_qubit.beta": (float, 1.7, None),
    "two_qubit.nu": (float, 313.1, "MHz"),
    "two_qubit.kappa1": (float, 2e-3, "MHz"),
    "two_qubit.kappa2": (float, 2e-3, "MHz"),
    "two_qubit.kappa1p": (float, 2e-3, "MHz"),
    "two_qubit.kappa2p": (float, 2e-3, "MHz"),
    "two_qubit.gamma_g": (float, float(np.pi / 2), None),
    "two_qubit.frame": (str, "interaction", None),
    "sweep.scheme": (str, "NPGQC", None),
    "sweep.gate": (str, "H", None),
    "sweep.kind": (str, "decoherence", None),
    "sweep.kappa_max": (float, 10.0, None),
    "sweep.kappa_points": (int, 21, None),
    "sweep.error_max": (float, 0.1, None),
    "sweep.error_points": (int, 41, None),
    "sweep.kappa": (float, 2.0, None),
    "sweep.threshold": (float, 0.999, None),
    "path.gate": (str, "H", None),
    "path.gamma_big": (float, float("nan"), None),
    "path.xi": (float, float("nan"), None),
    "path.phi_span": (float, float("nan"), None),
    "path.tau": (float, 1.0, None),
    "path.phi0": (float, 0.0, None),
}


class ManifestError(ValueError):
    pass


@dataclass
class Manifest:
    experiment: str | None = None
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def si(self, key):
        """Value in internal units (rad/us for MHz keys)."""
        _, _, unit = SCHEMA[key]
        v = self.values[key]
        return mhz(v) if unit == "MHz" else v


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, v


def _coerce(key, value):
    if key not in SCHEMA:
        raise ManifestError(f"unknown manifest key {key!r}")
    typ = SCHEMA[key][0]
    if typ is bool:
        if isinstance(value, bool):
            return value
    elif typ is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif typ is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(value, str):
        return value
    raise ManifestError(f"key {key!r} expects {typ.__name__}, got {value!r}")


def _parse_override(text: str):
    key, sep, raw = text.partition("=")
    if not sep:
        raise ManifestError(f"override {text!r} is not key=value")
    key, raw = key.strip(), raw.strip()
    try:
        value = ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        value = raw
    if raw in ("true", "false"):
        value = raw == "true"
    return key, value


def load_manifest(path=None, overrides=(), experiment=None) -> Manifest:
    raw = {}
    if path is not None:
        with open(path, "rb") as fh:
            try:
                raw = dict(_flatten(tomllib.load(fh)))
            except tomllib.TOMLDecodeError as exc:
                raise ManifestError(f"{path}: {exc}") from None
    exp = raw.pop("experiment", None)
    if experiment is not None:
        exp = experiment
    values = {k: v[1] for k, v in SCHEMA.items()}
    for key, value in raw.items():
        values[key] = _coerce(key, value)
    for text in overrides:
        key, value = _parse_override(text)
        values[key] = _coerce(key, value)
    if exp is not None and exp not in EXPERIMENTS:
        raise ManifestError(f"unknown experiment {exp!r}; see list-experiments")
    return Manifest(exp, values)


# --- parameter resolution -----------------------------------------------------


def transmon_params(m: Manifest, omega_max: float | None = None) -> TransmonParams:
    return TransmonParams(
        alpha=m.si("transmon.alpha"),
        kappa1=m.si("transmon.kappa1"),
        kappa2=m.si("transmon.kappa2"),
        omega_max=omega_max if omega_max is not None else m.si("transmon.omega_max_H"),
    )


def two_qubit_params(m: Manifest) -> TwoQubitParams:
    return TwoQubitParams(
        **{k: m.si(f"two_qubit.{k}") for k in (
            "g12", "delta12", "alpha1", "alpha2", "beta", "nu",
            "kappa1", "kappa2", "kappa1p", "kappa2p",
        )}
    )


def synth_path(m: Manifest) -> tuple[str, PathParams]:
    name = m["path.gate"].upper()
    base = GATE_PARAMS.get(name)
    vals = []
    for i, key in enumerate(("path.gamma_big", "path.xi", "path.phi_span")):
        v = m[key]
        if np.isnan(v):
            if base is None:
                raise ManifestError(f"gate {name!r} is not named; set {key}")
            v = base[i]
        vals.append(v)
    if not m["path.tau"] > 0:
        raise ManifestError(f"path.tau must be positive, got {m['path.tau']}")
    try:
        return name, PathParams(*vals, tau=m["path.tau"], phi0=m["path.phi0"])
    except ValueError as exc:
        raise ManifestError(f"path: {exc}") from None


def _check_choice(m, key, choices):
    if m[key] not in choices:
        raise ManifestError(f"{key} must be one of {sorted(choices)}, got {m[key]!r}")


def validate(m: Manifest) -> list[str]:
    """Resolve every parameter group and run the feasibility checks."""
    lines = []
    for key in ("run.steps", "run.jobs", "sweep.kappa_points", "sweep.error_points", "transmon.sweep_points"):
        if m[key] < (2 if "points" in key else 1):
            raise ManifestError(f"{key} too small: {m[key]}")
    _check_choice(m, "sweep.scheme", set(SCHEMES))
    _check_choice(m, "sweep.gate", {"H", "T", "S"})
    _check_choice(m, "sweep.kind", {"decoherence", "systematic"})
    _check_choice(m, "two_qubit.frame", {"interaction", "path"})
    for key in ("transmon.omega_max_H", "transmon.omega_max_T"):
        try:
            transmon_params(m, m.si(key))
        except ValueError as exc:
            raise ManifestError(f"transmon: {exc}") from None
    lines.append("transmon: ok")
    try:
        p = two_qubit_params(m)
        s = design_cphase(p, m["two_qubit.gamma_g"], m["two_qubit.frame"])
    except InfeasibleDesignError as exc:
        raise ManifestError(f"two_qubit infeasible: {exc}") from None
    except ValueError as exc:
        raise ManifestError(f"two_qubit: {exc}") from None
    lines.append(f"two_qubit: ok (tau = {s.tau:.6g} us)")
    name, path = synth_path(m)
    lines.append(f"path: ok ({name}, cos(theta) = {path.cos_theta:.6g})")
    return lines


# --- experiments ---------------------------------------------------------------


def _grid(maximum, points, symmetric=False):
    lo = -maximum if symmetric else 0.0
    return np.linspace(lo, maximum, points)


def exp_fig2(m, out, steps, jobs):
    kappas = _grid(m["sweep.kappa_max"], m["sweep.kappa_points"])
    for gate in ("H", "T"):
        cols = [sweep_decoherence(s, gate, kappas, steps, jobs).results for s in SCHEMES]
        write_table(out / f"fig2_{gate}.csv", ["kappa", *SCHEMES], np.column_stack([kappas, *cols]))


def exp_fig3(m, out, steps, jobs):
    g = _grid(m["sweep.error_max"], m["sweep.error_points"], symmetric=True)
    summary = []
    for gate in ("H", "T"):
        for scheme in SCHEMES:
            r = sweep_systematic(scheme, gate, g, g, m["sweep.kappa"], steps, jobs)
            r.to_csv(out / f"fig3_{gate}_{scheme}.csv")
            summary.append([gate, scheme, r.area_fraction(m["sweep.threshold"]), float(r.results.max())])
    write_table(out / "fig3_summary.csv", ["gate", "scheme", "area_fraction", "max_F1"], summary)


def exp_fig5a(m, out, steps, jobs):
    om = np.linspace(m.si("transmon.sweep_min"), m.si("transmon.sweep_max"), m["transmon.sweep_points"])
    tp = transmon_params(m)
    cols = [omega_max_sweep(g, tp, om, steps, jobs=jobs) for g in ("H", "T")]
    write_table(out / "fig5a.csv", ["omega_max_MHz", "F1_H", "F1_T"], np.column_stack([om / mhz(1.0), *cols]))


def exp_fig5bcd(m, out, steps, jobs):
    drag = m["transmon.drag"]
    for gate, panel in (("H", "c"), ("T", "d")):
        tp = transmon_params(m, m.si(f"transmon.omega_max_{gate}"))
        r = simulate_single_qubit(gate, tp, steps, drag=drag)
        r.write_series(out / f"fig5b_{gate}.csv", ["t", "F1"])
        r.write_series(out / f"fig5{panel}_{gate}.csv", ["t", "P0", "P1", "P2", "Fs"])
        log.info("%s: F1 %.6f, Fs %.6f, tau %.6g us", gate, r["F1"], r["Fs"], r["tau"])


def exp_fig6(m, out, steps, jobs):
    p = two_qubit_params(m)
    s = design_cphase(p, m["two_qubit.gamma_g"], m["two_qubit.frame"])
    r = simulate_two_qubit(p, s, steps)
    r.write_series(out / "fig6_dynamics.csv")
    keys = ("z1", "z2", "conditional_phase", "eta_sign", "distance_kappa0")
    write_table(out / "fig6_calibration.csv", ["quantity", "value"], [[k, float(r[k])] for k in keys])
    keys = ("Fs", "F2", "F2_corners", "tau", "peak_outside")
    write_table(out / "fig6_summary.csv", ["quantity", "value"], [[k, float(r[k])] for k in keys])
    log.info("Fs %.6f, F2 %.6f", r["Fs"], r["F2"])


def exp_synth(m, out, steps, jobs):
    name, path = synth_path(m)
    c = synthesize_controls(path)
    write_controls_csv(out / f"controls_{name}.csv", c)
    analytic = evolution_operator_simplified(path.gamma_big, path.xi, path.phi_span)
    numeric = propagator(lambda t: hamiltonian_from_controls(c, t), path.tau, steps)
    write_matrix_csv(out / f"gate_{name}.csv", analytic)
    dist = gate_distance_up_to_phase(numeric, analytic)
    write_table(out / f"synth_{name}.csv", ["quantity", "value"], [["distance", dist], ["omega_bar", c.omega_bar]])
    if dist > 1e-6:
        raise RuntimeError(f"numeric and closed-form gates differ by {dist:.3g}")


def exp_sweep_custom(m, out, steps, jobs):
    scheme, gate = m["sweep.scheme"], m["sweep.gate"]
    if m["sweep.kind"] == "decoherence":
        r = sweep_decoherence(scheme, gate, _grid(m["sweep.kappa_max"], m["sweep.kappa_points"]), steps, jobs)
    else:
        g = _grid(m["sweep.error_max"], m["sweep.error_points"], symmetric=True)
        r = sweep_systematic(scheme, gate, g, g, m["sweep.kappa"], steps, jobs)
    r.to_csv(out / f"sweep_{m['sweep.kind']}_{gate}_{scheme}.csv")


RUNNERS = {
    "fig2": exp_fig2,
    "fig3": exp_fig3,
    "fig5a": exp_fig5a,
    "fig5bcd": exp_fig5bcd,
    "fig6": exp_fig6,
    "synth": exp_synth,
    "sweep-custom": exp_sweep_custom,
}


def run(m: Manifest) -> Path:
    if m.experiment is None:
        raise ManifestError("no experiment given")
    validate(m)
    out = Path(m["run.out"])
    out.mkdir(parents=True, exist_ok=True)
    steps, jobs = m["run.steps"], m["run.jobs"]
    params = {k: (None if isinstance(v, float) and np.isnan(v) else v) for k, v in m.values.items()}
    meta = {"experiment": m.experiment, "version": __version__, "parameters": params}
    with open(out / f"{m.experiment}_run.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    RUNNERS[m.experiment](m, out, steps, jobs)
    return out


def _parser():
    ap = argparse.ArgumentParser(prog="geogates", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="TOML manifest file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a manifest key")
    common.add_argument("--out", help="output directory (run.out)")
    common.add_argument("--steps", type=int, help="RK4 steps (run.steps)")
    common.add_argument("--jobs", type=int, help="worker processes (run.jobs)")
    common.add_argument("--gate", help="gate for synth / sweep-custom")
    common.add_argument("-v", "--verbose", action="store_true")
    r = sub.add_parser("run", parents=[common], help="run an experiment")
    r.add_argument("experiment", nargs="?", help="experiment id (or set it in the manifest)")
    v = sub.add_parser("validate", parents=[common], help="resolve parameters without simulating")
    v.add_argument("experiment", nargs="?")
    sub.add_parser("list-experiments", help="show experiment ids")
    return ap


def _overrides(args):
    sets = list(args.set)
    for flag, key in (("out", "run.out"), ("steps", "run.steps"), ("jobs", "run.jobs")):
        if getattr(args, flag) is not None:
            sets.append(f"{key}={getattr(args, flag)!r}")
    if args.gate is not None:
        sets += [f"path.gate={args.gate!r}", f"sweep.gate={args.gate.upper()!r}"]
    return sets


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-experiments":
        for k, v in EXPERIMENTS.items():
            print(f"{k:14s} {v}")
        return 0
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        m = load_manifest(args.manifest, _overrides(args), args.experiment)
        if args.command == "validate":
            for line in validate(m):
                print(line)
            print("valid")
            return 0
        out = run(m)
        print(f"wrote {m.experiment} artifacts to {os.fspath(out)}")
        return 0
    except (ManifestError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
