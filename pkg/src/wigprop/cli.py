"""Scenario-driven command line: ``wigprop {flow,wigner,kernel,propagate,verify}``.

Scenarios are single YAML (or JSON) documents::

    name: harmonic-caustic
    grid: {d: 1, n: 256, delta: 0.0625}
    state: {gaussian: {center: [1.0, 1.0], width: 1.0}}   # or {file: u0.wgrd}
    flow: {preset: harmonic}        # free | magnetic (m, omega, B) | generator: [[...]]
    perturbation: {name: potential:cos, params: {amplitude: 1.0}}   # or {file: sigma.wgrd}
    times: [0.0, 0.785398, 1.570796]    # or {start: 0, stop: 6.283, count: 101}
    dt: null
    kernel: {build: true, n_kernel: 32, time: 1.047198}
    diagnostics: {compare: true, graph: true}
    output: out/harmonic

Every invocation writes ``report.json`` (also on failure) and prints it to
stdout.  Exit codes: 0 ok, 1 failed verification, 2 configuration error,
3 numeric error, 4 resource guard.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, _backend, gridio
from .fio import CausticError, metaplectic_apply
from .grid import GridError, GridSpec, SampledState, SupportError, make_gaussian
from .propagate import CauchyProblem, Flow, caustic_times, compare, perturbed_propagator, propagate
from .quantize import Symbol, SymbolError, make_symbol, materialize
from .symplectic import NotSymplecticError
from .wigkernel import MAX_KERNEL_N, KernelGuardError, graph_concentration, kernel_from_operator
from .wigner import BandLimitError, partial_wigner, wigner

FORMAT_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC, EXIT_RESOURCE = 0, 1, 2, 3, 4


class ScenarioError(ValueError):
    """Scenario file is missing, malformed or inconsistent."""


# -- scenario ---------------------------------------------------------------

@dataclass
class Scenario:
    name: str
    grid: GridSpec
    state: SampledState
    flow: Flow
    perturbation: Symbol | None
    times: list
    dt: float | None
    kernel: dict
    diagnostics: dict
    output: Path
    raw: dict = field(repr=False, default_factory=dict)

    def problem(self) -> CauchyProblem:
        return CauchyProblem(self.flow, self.state, self.times, self.perturbation, self.dt)


def _require(tree: dict, key: str, kind=None):
    if key not in tree:
        raise ScenarioError(f"missing key {key!r}")
    val = tree[key]
    if kind is not None and not isinstance(val, kind):
        raise ScenarioError(f"{key!r} must be {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _resolve(base: Path, name) -> Path:
    path = Path(name)
    path = path if path.is_absolute() else base / path
    if not path.exists():
        raise ScenarioError(f"referenced file {str(path)!r} does not exist")
    return path


def _parse_times(spec) -> list:
    if isinstance(spec, dict):
        try:
            ts = np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["count"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad times range: {exc}") from None
        return [float(t) for t in ts]
    if not isinstance(spec, list) or not spec:
        raise ScenarioError("times must be a non-empty list or {start, stop, count}")
    try:
        times = [float(t) for t in spec]
    except (TypeError, ValueError):
        raise ScenarioError("times must be numbers") from None
    if any(b < a for a, b in zip(times, times[1:])):
        raise ScenarioError("times must be ordered")
    return times


def _parse_flow(spec) -> Flow:
    if not isinstance(spec, dict):
        raise ScenarioError("flow must be a mapping")
    if "generator" in spec:
        X = np.asarray(spec["generator"], dtype=float)
        return Flow("generator", {"X": X})
    preset = spec.get("preset")
    params = {k: v for k, v in spec.items() if k != "preset"}
    if preset not in ("harmonic", "free", "magnetic"):
        raise ScenarioError(f"unknown flow preset {preset!r}")
    return Flow(preset, params)


def _parse_state(spec, grid: GridSpec, base: Path) -> SampledState:
    if not isinstance(spec, dict):
        raise ScenarioError("state must be a mapping")
    if "file" in spec:
        vals = gridio.load(_resolve(base, spec["file"]))
        if vals.shape != grid.shape:
            raise ScenarioError(f"state file has shape {vals.shape}, grid needs {grid.shape}")
        return SampledState(grid, vals.astype(complex))
    g = spec.get("gaussian", {})
    if not isinstance(g, dict):
        raise ScenarioError("state.gaussian must be a mapping")
    center = g.get("center", [0.0, 0.0])
    return make_gaussian(grid, center=tuple(center), width=float(g.get("width", 1.0)))


def _parse_perturbation(spec, grid: GridSpec, base: Path) -> Symbol | None:
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise ScenarioError("perturbation must be a mapping or null")
    if "file" in spec:
        return Symbol.from_samples(grid, gridio.load(_resolve(base, spec["file"])))
    return make_symbol(_require(spec, "name", str), **(spec.get("params") or {}))


def load_scenario(path, out: str | None = None) -> Scenario:
    """Parse and validate a scenario file; raises :class:`ScenarioError`."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario {str(path)!r} not found")
    try:
        tree = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse scenario: {exc}") from None
    if not isinstance(tree, dict):
        raise ScenarioError("scenario must be a mapping")
    base = path.parent
    g = _require(tree, "grid", dict)
    try:
        grid = GridSpec(int(_require(g, "d")), int(_require(g, "n")), float(_require(g, "delta")))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad grid: {exc}") from None
    kernel = dict(tree.get("kernel") or {})
    n_kernel = int(kernel.get("n_kernel", 32))
    kernel["n_kernel"] = n_kernel
    if kernel.get("build") and n_kernel > MAX_KERNEL_N:
        raise KernelGuardError(f"n_kernel={n_kernel} exceeds the guard {MAX_KERNEL_N}")
    dt = tree.get("dt")
    return Scenario(
        name=str(tree.get("name", path.stem)),
        grid=grid,
        state=_parse_state(_require(tree, "state"), grid, base),
        flow=_parse_flow(_require(tree, "flow")),
        perturbation=_parse_perturbation(tree.get("perturbation"), grid, base),
        times=_parse_times(_require(tree, "times")),
        dt=None if dt is None else float(dt),
        kernel=kernel,
        diagnostics=dict(tree.get("diagnostics") or {}),
        output=Path(out) if out else base / str(tree.get("output", "out")),
        raw=tree,
    )


# -- reports ----------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy; non-finite floats become ``{"value": null, "reason": ...}``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return {"value": None, "reason": "nan" if math.isnan(v) else "infinite"}
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    return obj


@dataclass
class RunReport:
    command: str
    scenario: dict | None = None
    status: str = "ok"
    error: dict | None = None
    metrics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "format_version": FORMAT_VERSION,
            "tool_version": __version__,
            "backend": _backend.NAME,
            "command": self.command,
            "status": self.status,
            "error": self.error,
            "scenario": self.scenario,
            "metrics": self.metrics,
            "files": self.files,
            "timings": self.timings,
        }
        return json.dumps(_clean(doc), indent=2, sort_keys=True)


class _Stage:
    def __init__(self, report: RunReport, name: str):
        self.report, self.name = report, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timings[self.name] = time.perf_counter() - self.t0
        return False


def _save(report: RunReport, out: Path, name: str, array) -> None:
    out.mkdir(parents=True, exist_ok=True)
    gridio.save(out / name, array)
    report.files.append(name)


# -- commands ---------------------------------------------------------------

def cmd_flow(sc: Scenario, report: RunReport, args) -> int:
    d = sc.grid.d
    rows = []
    with _Stage(report, "flow"):
        for t in sc.times:
            S = sc.flow.matrix(t, d)
            rows.append([t, *S.ravel(), float(np.linalg.det(S[:d, :d]))])
    with _Stage(report, "caustics"):
        found = caustic_times(sc.flow, (sc.times[0], sc.times[-1]), d) if len(sc.times) > 1 else []
    sc.output.mkdir(parents=True, exist_ok=True)
    with open(sc.output / "flow.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"s{i}{j}" for i in range(2 * d) for j in range(2 * d)] + ["det_a"])
        w.writerows([[repr(float(v)) for v in r] for r in rows])
    with open(sc.output / "caustics.csv", "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerow(["caustics", *(repr(t) for t in found)])
    report.files += ["flow.csv", "caustics.csv"]
    report.metrics = {"caustic_times": found, "det_a": [r[-1] for r in rows]}
    return EXIT_OK


def cmd_wigner(sc: Scenario, report: RunReport, args) -> int:
    u = sc.state
    with _Stage(report, "wigner"):
        if sc.grid.d == 1:
            W = wigner(u)
            _save(report, sc.output, "wigner.wgrd", W.values)
            report.metrics = {"total": W.total().real, "norm": W.norm(),
                              "argmax": W.argmax(), "state_norm": u.norm()}
        else:
            metrics = {"state_norm": u.norm()}
            for axis in (0, 1):
                W = partial_wigner(u, axis)
                _save(report, sc.output, f"partial_wigner_{axis}.wgrd", W.values)
                metrics[f"partial_{axis}"] = {"total": W.total().real, "argmax": W.argmax()}
            report.metrics = metrics
    return EXIT_OK


def cmd_kernel(sc: Scenario, report: RunReport, args) -> int:
    if sc.grid.d != 1:
        raise ScenarioError("kernels need d=1")
    n = int(sc.kernel.get("n_kernel", 32))
    if n > MAX_KERNEL_N:
        raise KernelGuardError(f"n_kernel={n} exceeds the guard {MAX_KERNEL_N}")
    t = float(sc.kernel.get("time", sc.times[-1]))
    kgrid = GridSpec(1, n, float(sc.kernel.get("delta", 1 / math.sqrt(2 * n))))
    dt = sc.dt or (t / 64 if t else 1.0)
    S = sc.flow.matrix(t, 1)
    with _Stage(report, "materialize"):
        op = materialize(perturbed_propagator(sc.flow, sc.perturbation, t, dt), kgrid,
                         pad=2, band=True)
    with _Stage(report, "kernel"):
        k = kernel_from_operator(op, S)
    with _Stage(report, "diagnostics"):
        diag = graph_concentration(k, S)
    _save(report, sc.output, "kernel.wgrd", k.values)
    report.metrics = {"t": t, "n_kernel": n, "hit_rate": diag["argmax_hit_rate"],
                      "hit_rate_all": diag["argmax_hit_rate_all"],
                      "significant": diag["significant"], "interior": diag["interior"],
                      "mass_profile": diag["mass_profile"],
                      "offgraph_decay_exponent_fit": diag["offgraph_decay_exponent_fit"]}
    return EXIT_OK


def cmd_propagate(sc: Scenario, report: RunReport, args) -> int:
    p = sc.problem()
    want = bool(sc.diagnostics.get("compare", True)) and p.perturbation is None
    with _Stage(report, "propagate"):
        run = propagate(p, with_wigner=want)
    for i, s in enumerate(run.slices):
        _save(report, sc.output, f"u_{i:03d}.wgrd", s.u.values)
        for j, W in enumerate(s.wigner):
            _save(report, sc.output, f"wigner_{i:03d}_{j}.wgrd", W.values)
    with _Stage(report, "compare"):
        rep = compare(run)
    report.metrics = rep
    return EXIT_OK


def cmd_verify(args, report: RunReport) -> int:
    from .verify import run_suite
    results = run_suite(args.suite, seed=args.seed, tolerance_scale=args.tolerance_scale)
    for r in results:
        print(r.line(), file=sys.stderr)
    report.metrics = {"suite": args.suite, "results": [r.to_dict() for r in results],
                      "failures": [{"criterion": r.number, "failed": r.failures()}
                                   for r in results if not r.passed]}
    ok = all(r.passed for r in results)
    report.status = "ok" if ok else "failed"
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"flow": cmd_flow, "wigner": cmd_wigner, "kernel": cmd_kernel,
            "propagate": cmd_propagate}


def _classify(exc: BaseException) -> tuple[int, str]:
    if isinstance(exc, (KernelGuardError, MemoryError)):
        return EXIT_RESOURCE, "resource"
    if isinstance(exc, (CausticError, BandLimitError, NotSymplecticError, SymbolError,
                        FloatingPointError, OverflowError, np.linalg.LinAlgError)):
        return EXIT_NUMERIC, "numeric"
    if isinstance(exc, (ScenarioError, SupportError, GridError, KeyError, ValueError,
                        TypeError, OSError, gridio.GridFormatError)):
        return EXIT_CONFIG, "config"
    return EXIT_NUMERIC, "numeric"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wigprop", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage of a scenario")
        p.add_argument("--scenario", required=True, help="YAML or JSON scenario file")
    v = sub.add_parser("verify", help="run acceptance suites")
    v.add_argument("suite", nargs="?", default="all", help="suite name or 'all'")
    for p in sub.choices.values():
        p.add_argument("--out", help="output directory (overrides the scenario)")
        p.add_argument("--threads", type=int, default=1, help="threads for compiled kernels")
        p.add_argument("--seed", type=int, default=0, help="seed for randomised suites")
        p.add_argument("--tolerance-scale", type=float, default=1.0,
                       help="multiplier on error tolerances and time budgets")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    report = RunReport(args.command)
    out = Path(args.out) if args.out else None
    code = EXIT_OK
    try:
        if args.threads < 1 or not args.tolerance_scale > 0 or args.seed < 0:
            raise ScenarioError("--threads and --tolerance-scale must be positive, --seed >= 0")
        _backend.set_threads(args.threads)
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            if args.command == "verify":
                code = cmd_verify(args, report)
            else:
                sc = load_scenario(args.scenario, args.out)
                out = sc.output
                report.scenario = sc.raw
                code = COMMANDS[args.command](sc, report, args)
    except Exception as exc:  # every failure still yields a report
        code, kind = _classify(exc)
        report.status = "error"
        report.error = {"kind": kind, "type": type(exc).__name__, "message": str(exc),
                        "exit_code": code, "traceback": traceback.format_exc(limit=3)}
    text = report.to_json()
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.json").write_text(text + "\n")
        except OSError as exc:
            print(f"cannot write report: {exc}", file=sys.stderr)
            code = code or EXIT_CONFIG
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
