"""Batch front-end: JSON-configured runs with reproducible file outputs.

Subcommands:
  run-master        deterministic master-equation run -> CSV observables + state dump
  run-trajectories  stochastic ensemble run -> per-trajectory records + averages
  verify            run the numbered verification suite -> verdict table + JSON

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 invariant violation during a run.

File formats: configs are JSON (one experiment per file); time series are CSV
with a header row, the time column first, and complex observables split into
re/im columns; state dumps are JSON with row-major nested arrays of [re, im]
pairs and an explicit basis-ordering field.  All files are written atomically
(temp file + rename) and are byte-identical for identical (config, seed).
The CASCADESIM_WORKERS environment variable sets the trajectory worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .acceptance import CRITERIA, run_criterion
from .analysis import schmidt_entropy
from .errors import (
    InvariantViolationError,
    StepProbabilityError,
    UnsupportedSourceError,
)
from .evolve import TimeGrid, evolve_master, expectation, run_ensemble
from .hilbert import (
    EXCITED,
    GROUND,
    SOURCE,
    TARGET,
    DensityOperator,
    FockSpec,
    PureState,
    annihilation,
    coherent_state,
    embed,
    fock_state,
    product_state,
    qubit_lowering,
    qubit_state,
)
from .liouvillian import CouplingConfig, build_L_ST, build_L_T
from .sources import BirthDeathLaser, CoherentDrive, FreeDecayMixture, build_L_S

BASIS_ORDERING = ("composite index 2*n + q over |n, q>; q=0 ground, q=1 excited; "
                  "matrix rows/columns in this order, entries as [re, im]")


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    name: str
    coupling: CouplingConfig
    source: object
    initial_vec: np.ndarray
    spec: FockSpec
    grid: TimeGrid
    store_every: int
    seeds: list
    output_dir: str
    resolved: dict  # fully resolved config echoed into the manifest


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise ConfigError(f"missing key {key!r} in {context}")
    return doc[key]


def _parse_source(doc: dict):
    kind = _require(doc, "kind", "source")
    if kind == "coherent_drive":
        return CoherentDrive(complex(*_require(doc, "epsilon", "source")))
    if kind == "free_decay":
        amps = tuple((complex(re, im), w)
                     for re, im, w in _require(doc, "amplitudes", "source"))
        return FreeDecayMixture(amps)
    if kind == "birth_death":
        return BirthDeathLaser(
            pump_rate=_require(doc, "pump_rate", "source"),
            gain_per_carrier=_require(doc, "gain_per_carrier", "source"),
            nonlasing_rate=_require(doc, "nonlasing_rate", "source"),
            N0=_require(doc, "N0", "source"),
            n0=_require(doc, "n0", "source"),
        )
    raise ConfigError(f"unknown source kind {kind!r}")


def _parse_initial(doc: dict, spec: FockSpec) -> PureState:
    qubit_name = doc.get("qubit", "ground")
    if qubit_name not in ("ground", "excited"):
        raise ConfigError(f"initial.qubit must be 'ground' or 'excited', got {qubit_name!r}")
    qubit = qubit_state(GROUND if qubit_name == "ground" else EXCITED)
    kind = _require(doc, "kind", "initial")
    if kind == "fock":
        return product_state(fock_state(_require(doc, "n", "initial"), spec), qubit)
    if kind == "coherent":
        alpha = complex(*_require(doc, "alpha", "initial"))
        return product_state(coherent_state(alpha, spec, warn=False), qubit)
    raise ConfigError(f"unknown initial state kind {kind!r}")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    try:
        cpl = doc.get("coupling", {})
        coupling = CouplingConfig(
            gamma_S=cpl.get("gamma_S", 1.0),
            gamma_Tf=cpl.get("gamma_Tf", 0.5),
            gamma_Ts=cpl.get("gamma_Ts", 0.5),
            delta=cpl.get("delta", 0.0),
        )
        spec = FockSpec(_require(doc, "n_max", path))
        g = _require(doc, "grid", path)
        grid = TimeGrid(g.get("t0", 0.0), _require(g, "t1", "grid"),
                        _require(g, "dt", "grid"))
        source = _parse_source(_require(doc, "source", path))
        initial = _parse_initial(_require(doc, "initial", path), spec)
        store_every = doc.get("store_every", 1)
        if grid.n_steps % store_every:
            raise ConfigError(
                f"store_every={store_every} does not divide {grid.n_steps} steps"
            )
        s = doc.get("seeds", {"start": 0, "count": 1})
        seeds = (list(s) if isinstance(s, list)
                 else list(range(s.get("start", 0), s.get("start", 0) + s["count"])))
        resolved = {
            "name": doc.get("name", os.path.splitext(os.path.basename(path))[0]),
            "coupling": {"gamma_S": coupling.gamma_S, "gamma_Tf": coupling.gamma_Tf,
                         "gamma_Ts": coupling.gamma_Ts, "delta": coupling.delta},
            "source": doc["source"],
            "initial": doc["initial"],
            "n_max": spec.n_max,
            "grid": {"t0": grid.t0, "t1": grid.t1, "dt": grid.dt},
            "store_every": store_every,
            "seeds": seeds,
            "output_dir": doc.get("output_dir", "out"),
            "basis_ordering": BASIS_ORDERING,
        }
        return ExperimentConfig(
            name=resolved["name"], coupling=coupling, source=source,
            initial_vec=initial.vec, spec=spec, grid=grid,
            store_every=store_every, seeds=seeds,
            output_dir=resolved["output_dir"], resolved=resolved,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e


def atomic_write(path: str, text: str):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as f:
        f.write(text)
    os.replace(tmp, path)


def write_json(path: str, doc):
    atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_csv(path: str, header: list, rows: list):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                              for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def state_dump(rho: DensityOperator, spec: FockSpec, t: float) -> dict:
    return {
        "time": t,
        "n_max": spec.n_max,
        "dim": rho.dim,
        "basis_ordering": BASIS_ORDERING,
        "matrix": [[[float(v.real), float(v.imag)] for v in row]
                   for row in rho.mat],
    }


def _observable_ops(spec: FockSpec):
    a = embed(annihilation(spec), SOURCE, spec).mat
    n = a.conj().T @ a
    b = embed(qubit_lowering(), TARGET, spec).mat
    pe = b.conj().T @ b
    return a, n, b, pe


def _observable_rows(times, rhos, spec: FockSpec):
    a, n, b, pe = _observable_ops(spec)
    rows = []
    for t, rho in zip(times, rhos):
        ea = expectation(rho, a)
        eb = expectation(rho, b)
        purity = float(np.trace(rho.mat @ rho.mat).real)
        rows.append([float(t), ea.real, ea.imag,
                     float(expectation(rho, n).real),
                     eb.real, eb.imag,
                     float(expectation(rho, pe).real), purity])
    header = ["time", "re_source_amp", "im_source_amp", "source_photons",
              "re_qubit_coherence", "im_qubit_coherence", "excited_population",
              "purity"]
    return header, rows


def cmd_run_master(cfg: ExperimentConfig) -> int:
    try:
        L = (build_L_S(cfg.source, cfg.spec)
             + build_L_T(cfg.coupling, cfg.spec)
             + build_L_ST(cfg.coupling, cfg.spec))
    except UnsupportedSourceError as e:
        raise ConfigError(str(e)) from e
    rho0 = DensityOperator(np.outer(cfg.initial_vec, cfg.initial_vec.conj()))
    states = evolve_master(rho0, L, cfg.grid, store_every=cfg.store_every)
    times = cfg.grid.times()[::cfg.store_every]

    os.makedirs(cfg.output_dir, exist_ok=True)
    write_json(os.path.join(cfg.output_dir, "manifest.json"),
               {"command": "run-master", **cfg.resolved})
    header, rows = _observable_rows(times, states, cfg.spec)
    write_csv(os.path.join(cfg.output_dir, "observables.csv"), header, rows)
    write_json(os.path.join(cfg.output_dir, "final_state.json"),
               state_dump(states[-1], cfg.spec, float(times[-1])))
    return 0


def cmd_run_trajectories(cfg: ExperimentConfig) -> int:
    ens = run_ensemble(PureState(cfg.initial_vec), cfg.coupling, cfg.source,
                       cfg.grid, cfg.seeds, store_every=cfg.store_every)
    os.makedirs(cfg.output_dir, exist_ok=True)
    rec_dir = os.path.join(cfg.output_dir, "records")
    os.makedirs(rec_dir, exist_ok=True)
    write_json(os.path.join(cfg.output_dir, "manifest.json"),
               {"command": "run-trajectories", **cfg.resolved})

    header, rows = _observable_rows(ens.times, ens.rho_avg, cfg.spec)
    write_csv(os.path.join(cfg.output_dir, "observables.csv"), header, rows)

    traj_rows = []
    for rec, ent, res in zip(ens.records, ens.max_schmidt_entropies,
                             ens.max_span_residuals):
        write_csv(os.path.join(rec_dir, f"record_{rec.seed}.csv"),
                  ["time", "channel"],
                  [[float(t), lab] for t, lab in rec.events])
        traj_rows.append([
            rec.seed, len(rec.events),
            rec.count("forward_f"), rec.count("side_s"),
            rec.count("pump"), rec.count("gain"), rec.count("nonlasing"),
            float(ent),
            float(res) if res is not None else "",
        ])
    write_csv(os.path.join(cfg.output_dir, "trajectories.csv"),
              ["seed", "events", "forward_f", "side_s", "pump", "gain",
               "nonlasing", "max_schmidt_entropy", "max_span_residual"],
              traj_rows)
    write_json(os.path.join(cfg.output_dir, "ensemble_state.json"),
               state_dump(ens.rho_avg[-1], cfg.spec, float(ens.times[-1])))
    return 0


def cmd_verify(suite: str, out_dir: str) -> int:
    if suite == "all":
        names = sorted(CRITERIA)
    elif suite.upper() in CRITERIA:
        names = [suite.upper()]
    else:
        print(f"error: unknown suite {suite!r}; choose 'all' or one of "
              f"{', '.join(sorted(CRITERIA))}", file=sys.stderr)
        return 2
    results = [run_criterion(n) for n in names]
    os.makedirs(out_dir, exist_ok=True)
    verdict = []
    for r in results:
        w = r.worst
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name}  {status}  tolerance={w.tolerance:g}  "
              f"measured={w.measured:g}  [{r.seconds:.1f}s]  {r.description}")
        verdict.append({
            "name": r.name,
            "description": r.description,
            "passed": r.passed,
            "seconds": r.seconds,
            "checks": [{"label": c.label, "tolerance": c.tolerance,
                        "measured": c.measured, "passed": c.passed,
                        "larger_is_better": c.larger_is_better}
                       for c in r.checks],
        })
    write_json(os.path.join(out_dir, "verdict.json"),
               {"suite": suite, "passed": all(r.passed for r in results),
                "criteria": verdict})
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascadesim",
        description="Cascaded source-qubit simulator: master-equation and "
                    "trajectory runs, plus the verification suite.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    pm = sub.add_parser("run-master", help="deterministic master-equation run")
    pm.add_argument("config", help="JSON experiment config")
    pt = sub.add_parser("run-trajectories", help="stochastic ensemble run")
    pt.add_argument("config", help="JSON experiment config")
    pv = sub.add_parser("verify", help="run the verification suite")
    pv.add_argument("--suite", default="all",
                    help="'all' or a single criterion name (A1..A9)")
    pv.add_argument("--out", default="verify-out",
                    help="directory for the verdict file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.out)
        cfg = load_config(args.config)
        if args.command == "run-master":
            return cmd_run_master(cfg)
        return cmd_run_trajectories(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (InvariantViolationError, StepProbabilityError) as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
