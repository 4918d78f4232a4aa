"""Command-line front end.

Subcommands:

* ``plan``   -- run the planner on a scenario file; writes plan.csv and
  trace.csv and prints a run summary.
* ``sweep``  -- re-run the planner across one parameter axis; writes sweep.csv.
* ``verify`` -- run the independent oracle suite and print a pass/fail table.

Exit codes: 0 ok, 2 input error, 3 audit failure, 4 infeasible scenario.
Set ``SEAPLAN_LOG`` (DEBUG/INFO/WARNING) to control verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import channel, oracle, power_step, sca_driver, trajectory_step
from .scenario import ScenarioError, load_scenario, canned_scenario, scenario_from_dict
from .units import dbm_to_watts, watts_to_dbm

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_AUDIT = 3
EXIT_INFEASIBLE = 4

log = logging.getLogger("seaplan")

INIT_CHOICES = {"above_user": 0, "three_quarter": 1, "midpoint": 2}


def _configure_logging():
    level = os.environ.get("SEAPLAN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(path: str):
    if path == "canned":
        return canned_scenario()
    return load_scenario(path)


def _plan_rows(scenario, plan):
    gains = channel.slot_gains(scenario)
    exp = scenario.pathloss.exponent
    rows = []
    for s in range(scenario.n_slots):
        d = float(np.linalg.norm(plan.positions[s] - scenario.user_track[s]))
        snr = plan.powers[s] * gains.user[s] * d ** (-exp)
        rate = channel.ergodic_rate(snr, scenario.rician_k)
        rows.append((s + 1, *plan.positions[s], *plan.velocities[s],
                     *plan.accelerations[s], plan.powers[s], snr, rate))
    return rows


def _write_plan_csv(path: Path, rows):
    header = ("slot,x,y,z,vx,vy,vz,ax,ay,az,P_watts,avg_snr,ergodic_rate_bps_hz")
    with path.open("w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(v) if isinstance(v, int) else repr(float(v))
                              for v in row) + "\n")


def _run_plan(scenario, args):
    init = None
    if getattr(args, "init", None):
        init = sca_driver.default_initializations(scenario)[INIT_CHOICES[args.init]]
    return sca_driver.plan(scenario, init_trajectory=init, eps=args.eps,
                           l_max=args.max_iters, mode=args.mode, audit=False)


def cmd_plan(args) -> int:
    try:
        scenario = _load(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        plan, trace = _run_plan(scenario, args)
    except trajectory_step.TrajectoryInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    report = sca_driver.audit_plan(scenario, plan)
    rows = _plan_rows(scenario, plan)
    _write_plan_csv(out / "plan.csv", rows)
    (out / "trace.csv").write_text(trace.to_csv())
    min_rate = min(r[-1] for r in rows)
    print(f"final Q (min average SNR): {plan.q_value:.6g}")
    print(f"min ergodic rate: {min_rate:.6g} bits/s/Hz")
    print(f"outer iterations: {trace.n_iterations}")
    print(f"audit max relative residual: {report['max_violation']:.3g} "
          f"({'pass' if report['passed'] else 'FAIL'})")
    if not report["passed"]:
        print("error: constraint audit failed", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def _sweep_scenario(base_cfg: dict, axis: str, value: float):
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base_cfg.items()}
    cfg["limits"] = dict(cfg["limits"])
    cfg["channel"] = dict(cfg["channel"])
    if axis == "p_max":
        cfg["limits"]["p_max_dbm"] = value
    elif axis == "e0":
        cfg["limits"]["e0_j"] = value
    elif axis == "i0":
        cfg["limits"]["i0_dbm"] = value
    elif axis == "k":
        cfg["channel"]["rician_k"] = value
    else:
        raise ScenarioError(f"unknown sweep axis {axis!r}")
    return scenario_from_dict(cfg)


def cmd_sweep(args) -> int:
    try:
        base = _load(args.scenario)
        values = [float(v) for v in args.values.split(",")]
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not values:
        print("error: empty sweep value list", file=sys.stderr)
        return EXIT_INPUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base_cfg = base.to_dict()
    results = []
    warm = None
    for value in values:
        try:
            scenario = _sweep_scenario(base_cfg, args.axis, value)
            init = warm
            if init is None and getattr(args, "init", None):
                init = sca_driver.default_initializations(scenario)[INIT_CHOICES[args.init]]
            plan, trace = sca_driver.plan(
                scenario, init_trajectory=init, eps=args.eps,
                l_max=args.max_iters, mode=args.mode, audit=False)
            report = sca_driver.audit_plan(scenario, plan)
            if not report["passed"]:
                raise sca_driver.AuditError(
                    f"audit residual {report['max_violation']:.3g}")
            rows = _plan_rows(scenario, plan)
            min_rate = min(r[-1] for r in rows)
            results.append((value, plan.q_value, min_rate, trace.n_iterations, "ok"))
            if args.warm_start:
                warm = plan.positions
        except (ScenarioError, sca_driver.PlanError,
                trajectory_step.TrajectoryInfeasible, power_step.PowerStepError) as exc:
            log.warning("sweep point %s failed: %s", value, exc)
            results.append((value, float("nan"), float("nan"), 0, f"failed: {exc}"))
    with (out / "sweep.csv").open("w") as fh:
        fh.write("param_value,final_q,min_ergodic_rate,iterations,status\n")
        for row in results:
            fh.write(",".join(str(v) for v in row[:4]) + f",{row[4]}\n")
    n_failed = sum(1 for r in results if r[4] != "ok")
    print(f"sweep over {args.axis}: {len(results)} points, {n_failed} failed")
    return EXIT_OK if n_failed == 0 else EXIT_AUDIT


def cmd_verify(args) -> int:
    checks = []
    k = args.k
    a_grid = np.logspace(-2, 4, 25)
    scan = oracle.concavity_scan(k, a_grid)
    checks.append(("rate monotone increasing", scan["first_differences_positive"]))
    checks.append(("rate strictly concave", scan["second_differences_negative"]))
    checks.append(("derivative quadrature vs finite differences",
                   scan["derivative_agreement"] <= 1e-4))

    rng = np.random.default_rng(args.seed)
    ok = True
    worst = 0.0
    for _ in range(5):
        a = float(rng.uniform(1.0, 500.0))
        mean, stderr = oracle.mc_ergodic_rate(a, k, args.mc_samples, seed=int(rng.integers(2**31)))
        gap = abs(channel.ergodic_rate(a, k) - mean)
        worst = max(worst, gap / max(stderr, 1e-12))
        if gap > 3 * stderr:
            ok = False
    checks.append((f"quadrature vs Monte Carlo (worst gap {worst:.2f} sigma)", ok))

    ok = True
    for _ in range(2000):
        ref = rng.normal(size=3) * 100
        anchor = rng.normal(size=3) * 100
        x = rng.normal(size=3) * 100
        bound = trajectory_step.taylor_lower_bound(ref, anchor, x)
        if bound > float((x - anchor) @ (x - anchor)) + 1e-9:
            ok = False
    checks.append(("Taylor minorant dominance", ok))

    ok = True
    for _ in range(1000):
        q, p, d, b = rng.uniform(0.1, 10, 4)
        exp = float(rng.uniform(0.5, 4.0))
        lhs = q ** (2 / exp) * d ** 2 <= (b * p) ** (2 / exp)
        rhs = q * d ** exp <= b * p
        if lhs != rhs:
            ok = False
    checks.append(("power-form/linear-form equivalence", ok))

    width = max(len(name) for name, _ in checks)
    failed = 0
    for name, passed in checks:
        print(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}")
        failed += 0 if passed else 1
    return EXIT_OK if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seaplan",
                                     description="UAV maritime-coverage trajectory/power planner")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True,
                       help="scenario JSON path, or 'canned' for the built-in instance")
        p.add_argument("--eps", type=float, default=1e-3)
        p.add_argument("--max-iters", type=int, default=50, dest="max_iters")
        p.add_argument("--mode", choices=["decoupled", "joint"], default="decoupled")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--init", choices=sorted(INIT_CHOICES), default=None,
                       help="stock initialization (default: midpoint)")

    p_plan = sub.add_parser("plan", help="optimize one scenario")
    common(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_sweep = sub.add_parser("sweep", help="re-plan across one parameter axis")
    common(p_sweep)
    p_sweep.add_argument("--axis", choices=["p_max", "e0", "i0", "k"], required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values (dBm for p_max/i0, J for e0, linear for k)")
    p_sweep.add_argument("--warm-start", action="store_true",
                         help="initialize each point from the previous point's trajectory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the independent oracle suite")
    p_verify.add_argument("--k", type=float, default=31.3)
    p_verify.add_argument("--mc-samples", type=int, default=10**6, dest="mc_samples")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
