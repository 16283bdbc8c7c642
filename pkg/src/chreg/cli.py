"""
Command line entry point ``chreg``.

Subcommands: ``solve``, ``cauchy-study``, ``rate-study``, ``truncation-study``
and ``validate``. Each takes a config file and writes CSV files plus a
``report.txt`` into the output directory. Exit status is 0 when every check
passes, 2 when an inequality check fails and 1 on errors.
"""
import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analysis
from .config import load_config
from .errors import ConfigError, ConsistencyError, StepError
from .evolution import (
    InitialData,
    mass_balance_residual,
    phi_eps_energy,
    prepare_initial_data,
    solve_trajectory,
)
from .nonlinearity import validate_conditions

RATE_SLACK = 1.25


def fmt(x):
    return format(float(x), ".17g")


def _csv(header, rows, footer=()):
    lines = [",".join(header)]
    lines += [",".join(r if isinstance(r, str) else fmt(r) for r in row) for row in rows]
    lines += list(footer)
    return "\n".join(lines) + "\n"


class Outcome:
    """Files to write plus named pass/fail checks."""

    def __init__(self):
        self.files = {}
        self.checks = []
        self.notes = []

    def check(self, name, ok):
        self.checks.append((name, bool(ok)))
        return ok

    @property
    def passed(self):
        return all(ok for _, ok in self.checks)

    def report(self, command):
        lines = [f"command: {command}"]
        lines += [f"# {note}" for note in self.notes]
        lines += [f"{'PASS' if ok else 'FAIL'} {name}" for name, ok in self.checks]
        lines.append(f"verdict: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _run_member(cfg, eps, mode, outer=None, nodes=None):
    """Solve one trajectory; module level so it can run in a worker process."""
    engine = cfg.engine(outer, nodes)
    x = engine.op.grid.nodes
    u0 = cfg.initial_field(x)
    if mode == "cahn_hilliard":
        init = prepare_initial_data(engine, u0, eps)
        solver = cfg.solver(eps)
        pert = cfg.perturbation(eps)
    else:
        init = InitialData.unregularized(engine, u0)
        solver = cfg.solver(None)
        pert = None
    traj = solve_trajectory(engine, cfg.graph(), solver, init, cfg.forcing(x), mode, pert)
    return init, traj


def _run_many(cfg, jobs, members):
    if jobs > 1 and len(members) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_member, cfg, *m) for m in members]
            return [f.result() for f in futures]
    return [_run_member(cfg, *m) for m in members]


def _params(cfg):
    return [cfg["time.dt"], cfg["grid.nodes"], cfg["time.horizon"]]


def run_solve(cfg, jobs=1):
    out = Outcome()
    mode = cfg.mode
    ladder = sorted(cfg.ladder) if mode == "cahn_hilliard" else [0.0]
    results = _run_many(cfg, jobs, [(eps, mode) for eps in ladder])
    engine = cfg.engine()
    graph = cfg.graph()
    rows = []
    for eps, (init, traj) in zip(ladder, results):
        pert = cfg.perturbation(eps) if eps else None
        phi = [phi_eps_energy(engine, graph, u, eps, pert) for u in traj.u]
        rates = np.diff(traj.u, axis=0) / traj.dt
        vrate = np.concatenate([[0.0], engine.vstar_norms(rates)]) if traj.steps else [0.0]
        for n, t in enumerate(traj.times):
            rows.append([
                t, engine.h_norm(traj.u[n]), engine.v_norm(traj.u[n]), vrate[n], phi[n],
                traj.iterations[n - 1] if n else 0, traj.residuals[n - 1] if n else 0.0,
                eps, *_params(cfg),
            ])
        tol = cfg["solver.newton_tol"]
        balance = max(
            (mass_balance_residual(engine, traj.u[k + 1], traj.u[k], traj.mu[k], traj.dt)
             / (1 + engine.h_norm(traj.u[k])) for k in range(traj.steps)),
            default=0.0,
        )
        out.check(f"eps={fmt(eps)} mass balance residual {balance:.3e} <= newton_tol", balance <= tol)
        if mode == "cahn_hilliard":
            out.check(f"eps={fmt(eps)} initial data bounds", init.invariants_hold)
            if cfg.zero_forcing():
                worst = float(np.max(np.diff(phi))) if len(phi) > 1 else 0.0
                out.check(f"eps={fmt(eps)} energy dissipation (max increase {worst:.3e})", worst <= 10 * tol)
    out.files["trajectory.csv"] = _csv(
        ["t", "h_norm", "v_norm", "vstar_norm_of_rate", "phi_eps", "newton_iters", "residual",
         "eps", "dt", "nodes", "T"],
        rows,
    )
    return out


def _ladder_runs(cfg, jobs, extra=()):
    ladder = list(cfg.ladder)
    members = [(eps, "cahn_hilliard") for eps in ladder] + list(extra)
    results = _run_many(cfg, jobs, members)
    return ladder, results


def run_cauchy_study(cfg, jobs=1):
    out = Outcome()
    ladder, results = _ladder_runs(cfg, jobs)
    engine = cfg.engine()
    graph = cfg.graph()
    monitors = [analysis.energy_monitors(engine, traj, graph) for _, traj in results]
    M = max(m.observed for m in monitors)
    for eps, m in zip(ladder, monitors):
        out.notes.append(f"monitors eps={fmt(eps)}: " + " ".join(fmt(v) for v in m.as_tuple()))
    out.notes.append(f"M_observed={fmt(M)}")
    pairs = [(i, j) for i in range(len(ladder)) for j in range(i + 1, len(ladder))] or [(0, 0)]
    T = cfg["time.horizon"]
    c1 = cfg["model.c1"]
    rows = []
    for i, j in pairs:
        (ie, te), (ig, tg) = results[i], results[j]
        d0 = engine.vstar_norm(ie.regularized - ig.regularized)
        lhs = analysis.cauchy_gap_lhs(engine, te, tg, graph)
        rhs = analysis.cauchy_bound_rhs(ladder[i], ladder[j], M, T, c1, d0=d0)
        ok = out.check(f"cauchy eps={fmt(ladder[i])} gamma={fmt(ladder[j])}", lhs <= rhs)
        rows.append([ladder[i], ladder[j], d0 * d0, lhs, rhs, "PASS" if ok else "FAIL", *_params(cfg), M])
    out.files["cauchy.csv"] = _csv(
        ["eps", "gamma", "d0_sq", "lhs", "rhs", "verdict", "dt", "nodes", "T", "M"], rows
    )
    return out


def run_rate_study(cfg, jobs=1):
    out = Outcome()
    ref_mode = cfg["study.reference"]
    eps_ref = min(cfg.ladder) / cfg["study.reference_divisor"]
    ladder, results = _ladder_runs(cfg, jobs, [(eps_ref, ref_mode)])
    ref = results[-1][1]
    engine = cfg.engine()
    errors = [analysis.error_vs_reference(engine, traj, ref) for _, traj in results[:-1]]
    scaled = [e * e / np.sqrt(eps) for e, eps in zip(errors, ladder)]
    rows = [[eps, e, s, *_params(cfg)] for eps, e, s in zip(ladder, errors, scaled)]
    c_star = max(scaled)
    if len(ladder) >= 2 and all(e > 0 for e in errors):
        _, p = analysis.rate_fit(list(zip(ladder, [e * e for e in errors])))
    else:
        p = float("nan")
    out.notes.append(f"reference: {ref_mode} eps_ref={fmt(eps_ref if ref_mode == 'cahn_hilliard' else 0.0)}")
    out.check(
        f"max error^2/sqrt(eps) <= {RATE_SLACK} x value at largest eps",
        c_star <= RATE_SLACK * scaled[0],
    )
    out.check("error strictly decreasing along the ladder", all(b < a for a, b in zip(errors, errors[1:])))
    out.files["rate.csv"] = _csv(
        ["eps", "error", "error_sq_over_sqrt_eps", "dt", "nodes", "T"], rows,
        footer=[f"C_star={fmt(c_star)}", f"p={fmt(p)}"],
    )
    return out


def run_truncation_study(cfg, jobs=1):
    out = Outcome()
    radii = cfg["study.radii"]
    if radii is None:
        raise ConfigError("study.radii", "truncation-study needs a list of outer radii")
    a = cfg["domain.a"]
    h = (cfg["domain.b"] - a) / (cfg["grid.nodes"] - 1)
    mode = cfg.mode
    eps = max(cfg.ladder) if mode == "cahn_hilliard" else None
    counts = dict(zip(radii, analysis.nested_node_counts(list(radii), a, h)))

    def run(r):
        return _run_member(cfg, eps, mode, r, counts[r])[1].final

    if jobs > 1 and len(radii) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {r: pool.submit(_run_member, cfg, eps, mode, r, counts[r]) for r in radii}
            finals = {r: f.result()[1].final for r, f in futures.items()}
        run = finals.__getitem__
    table = analysis.truncation_study(run, radii, a, h)
    rows = [[t.r_small, t.r_large, t.sup_diff, cfg["time.dt"], h, cfg["time.horizon"], eps or 0.0] for t in table]
    diffs = [t.sup_diff for t in table]
    out.check("sup_diff strictly decreasing in R", all(b < a_ for a_, b in zip(diffs, diffs[1:])))
    out.files["truncation.csv"] = _csv(["R_small", "R_large", "sup_diff", "dt", "h", "T", "eps"], rows)
    return out


def run_validate(cfg, jobs=1):
    out = Outcome()
    graph = cfg.graph()
    engine = cfg.engine()
    u0 = cfg.initial_field(engine.op.grid.nodes)
    for eps in cfg.ladder:
        report = validate_conditions(graph, cfg.perturbation(eps))
        for name, ok in report.checks.items():
            out.check(f"eps={fmt(eps)} {name}", ok)
        init = prepare_initial_data(engine, u0, eps)
        out.check(
            f"eps={fmt(eps)} |u0_eps|_H={fmt(init.h_norm_regularized)} <= |u0|_H={fmt(init.h_norm_raw)}",
            init.h_norm_regularized <= init.h_norm_raw * (1 + 1e-10),
        )
        out.check(
            f"eps={fmt(eps)} |u0_eps-u0|_V*={fmt(init.vstar_shift)} <= eps^0.5|u0|_H={fmt(init.shift_bound)}",
            init.vstar_shift <= init.shift_bound * (1 + 1e-10) + 1e-300,
        )
    return out


COMMANDS = {
    "solve": run_solve,
    "cauchy-study": run_cauchy_study,
    "rate-study": run_rate_study,
    "truncation-study": run_truncation_study,
    "validate": run_validate,
}


def write_outputs(directory, files):
    """Write all files or none: anything written before a failure is removed."""
    os.makedirs(directory, exist_ok=True)
    written = []
    try:
        for name, text in files.items():
            path = os.path.join(directory, name)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            written.append(path)
    except OSError:
        for path in written:
            os.remove(path)
        raise
    return written


def build_parser():
    parser = argparse.ArgumentParser(prog="chreg", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="experiment file (section.key = value)")
        p.add_argument("--output-dir", help="overrides output.dir")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for ladder members")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        outcome = COMMANDS[args.command](cfg, jobs=max(1, args.jobs))
        outcome.files["report.txt"] = outcome.report(args.command)
        directory = args.output_dir or cfg.output_dir
        write_outputs(directory, outcome.files)
    except (ConfigError, StepError, ConsistencyError, OSError, ValueError) as exc:
        print(f"chreg: error: {exc}", file=sys.stderr)
        return 1
    for name, ok in outcome.checks:
        if not ok:
            print(f"FAIL {name}", file=sys.stderr)
    return 0 if outcome.passed else 2


if __name__ == "__main__":
    sys.exit(main())
