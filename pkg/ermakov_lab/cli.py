"""
The ``ermakov`` command:

    ermakov <command> --scenario FILE [--scenario FILE ...] --out DIR [--jobs N] [--verbose]

Every command reads a scenario (see ``scenario.py``) and writes its reports
into DIR; with several scenarios each one writes into DIR/<scenario stem>.
Errors are written to stderr as a single line of JSON and set the exit code:
1 for configuration errors, 2 for numerical failures, 3 for a violated
reduction precondition.
"""
import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import get_version
from .constants import Command, Part
from .exceptions import ErmakovError, UsageError
from .generators import (
    DEFAULT_ANSATZE,
    corrected_catalogue,
    parse_ansatz,
    parse_generator,
    printed_catalogue,
    resolve,
)
from .integrate import integrate_cart, integrate_polar
from .reduce import (
    AngularLaw,
    angular_integrand_variants,
    check_angular_law,
    check_reduction_precondition,
    condition_audit,
    reduce_trajectory,
    reduced_residual,
)
from .scenario import Scenario, load_scenario
from .symexpr import solve_coefficients, symmetry_residual
from .symflow import (
    PULLBACK_HEADER,
    GeneratorNum,
    corrupt,
    induced_original_variables,
    time_translation_check,
    verify_solution_mapping,
)
from .systems import ermakov_invariant, paper_residual, to_polar
from .utils import max_abs, write_csv, write_json

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = ("t", "x", "y", "vx", "vy", "L", "I")
REDUCED_HEADER = ("theta", "t", "u", "u_theta", "u_theta_theta", "L", "L_sq")
AUDIT_HEADER = ("condition", "theta", "imposed_derivative", "integrand", "defect")

# The negative control for flow verification: not a symmetry
NEGATIVE_CONTROL = "u1^2*d_u1"


def trajectory_for(scenario: Scenario):
    return integrate_cart(
        scenario.system,
        scenario.initial_state,
        scenario.t_span[1],
        scenario.rtol,
        scenario.atol,
    )


def simulate(scenario: Scenario, out_dir: Optional[Path]) -> dict:
    spec = scenario.system
    traj = trajectory_for(scenario)
    invariant = traj.invariant_series()
    L = traj.angular_momentum()

    polar = integrate_polar(
        spec, to_polar(scenario.initial_state), traj.t[-1], scenario.rtol, scenario.atol
    )
    cross = max_abs(
        np.linalg.norm(polar.cart_state_at(t).as_array() - traj.states[i])
        for i, t in enumerate(traj.t)
    )

    reading = scenario.report.prime_reading
    printed = [
        paper_residual(spec, to_polar(traj.sample(i)), reading)[0]
        for i in range(len(traj))
    ]

    drift = invariant - invariant[0]
    summary = {
        "printed_polar_residual": {
            "prime_reading": reading,
            "rdd_max": max_abs(a.rdd_residual for a in printed),
            "thdd_max": max_abs(a.thdd_residual for a in printed),
        },
        "initial": invariant[0],
        "max_abs_drift": max_abs(drift),
        "max_relative_drift": max_abs(drift) / abs(invariant[0]),
        "cross_representation_max": cross,
        "samples": len(traj),
        "singular_at": traj.singular_at,
        "stats": asdict(traj.stats),
    }
    if out_dir is not None:
        rows = (
            (float(t), *map(float, state), float(l), float(i))
            for t, state, l, i in zip(traj.t, traj.states, L, invariant)
        )
        write_csv(out_dir / "trajectory.csv", TRAJECTORY_HEADER, rows)
        write_json(out_dir / "invariant.json", summary)
    traj.raise_for_singularity()
    return summary


def reduced(scenario: Scenario):
    check_reduction_precondition(scenario.system)
    traj = trajectory_for(scenario)
    rt = reduce_trajectory(traj, scenario.theta_samples)
    law = AngularLaw.from_trajectory(traj, scenario.theta_ref)
    return traj, rt, law


def reduce(scenario: Scenario, out_dir: Optional[Path]) -> dict:
    spec = scenario.system
    traj, rt, law = reduced(scenario)

    law_report = check_angular_law(law, rt)
    # I - (L^2 - alpha) / 2 is constant along the orbit
    first_integral = np.array(
        [
            ermakov_invariant(spec, traj.state_at(t)) - 0.5 * (L_sq - law.alpha(theta))
            for t, theta, L_sq in zip(rt.t, rt.theta, rt.L_sq)
        ]
    )
    summary = {
        "L0_sq": law.L0_sq,
        "theta_ref": law.theta_ref,
        "angular_law": {"max": law_report.max, "rms": law_report.rms},
        "kinematic_residual_max": max_abs(rt.kinematic_residual()),
        "first_integral_range": float(first_integral.max() - first_integral.min()),
        "forms": {
            form: reduced_residual(rt, form, law).as_dict()
            for form in scenario.report.forms
        },
    }
    if out_dir is not None:
        rows = zip(rt.theta, rt.t, rt.u, rt.u_theta, rt.u_theta_theta, rt.L, rt.L_sq)
        write_csv(out_dir / "reduced.csv", REDUCED_HEADER, rows)
        write_json(out_dir / "residuals.json", summary)
    return summary


def audit(scenario: Scenario, out_dir: Optional[Path]) -> dict:
    spec = scenario.system
    options = scenario.report
    thetas = np.linspace(*options.audit_range, options.audit_samples)
    rows = []
    for condition in options.conditions:
        rows.extend(condition_audit(spec, condition, thetas))
    if out_dir is not None:
        write_csv(out_dir / "audit.csv", AUDIT_HEADER, rows)

    summary = {"conditions": {}}
    for row in rows:
        entry = summary["conditions"].setdefault(row.condition, {"max_abs_defect": 0.0})
        entry["max_abs_defect"] = max(entry["max_abs_defect"], abs(row.defect))
    summary["integrand_variants"] = [
        {"theta": theta, **angular_integrand_variants(spec, theta)} for theta in thetas
    ]
    return summary


def residual_verdict(generator) -> dict:
    residual = symmetry_residual(generator)
    return {
        "generator": str(generator),
        "R1": str(residual.R1),
        "R2": str(residual.R2),
        "symmetry": residual.is_zero(),
    }


def symmetry_check(scenario: Scenario, out_dir: Optional[Path]) -> dict:
    summary = {
        "printed": {name: residual_verdict(g) for name, g in printed_catalogue().items()},
        "corrected": {
            name: residual_verdict(g) for name, g in corrected_catalogue().items()
        },
        "scenario": {
            name: residual_verdict(parse_generator(text))
            for name, text in scenario.symmetry.generators.items()
        },
    }
    if out_dir is not None:
        write_json(out_dir / "symmetry_check.json", summary)
    return summary


def symmetry_solve(scenario: Scenario, out_dir: Optional[Path]) -> dict:
    if scenario.symmetry.ansatz is not None:
        ansatze = {
            "scenario": (
                scenario.symmetry.ansatz.expression,
                scenario.symmetry.ansatz.unknowns,
            )
        }
    else:
        ansatze = {name: (text, ["c"]) for name, text in DEFAULT_ANSATZE.items()}

    summary = {"ansatze": {}}
    for name, (text, unknowns) in ansatze.items():
        space = solve_coefficients(parse_ansatz(text, unknowns))
        summary["ansatze"][name] = {"expression": text, "solution": space.as_dict()}
    if out_dir is not None:
        write_json(out_dir / "symmetry_solve.json", summary)
    return summary


def numeric_parts(name: str, generator) -> List[GeneratorNum]:
    parts = [GeneratorNum.from_symbolic(generator, Part.REAL, name)]
    imaginary = GeneratorNum.from_symbolic(generator, Part.IMAG, name)
    if not generator.conjugate() == generator:
        parts.append(imaginary)
    return parts


def flow_verify(scenario: Scenario, out_dir: Optional[Path]) -> dict:
    options = scenario.symmetry
    reference = options.reference.build()
    controls_available = {"G4+", "G4-", "G6+", "G6-", "G8+", "G8-"}

    symmetries, controls = [], []
    for name in options.flow_generators:
        symmetries.extend(numeric_parts(name, resolve(name)))
        if name in controls_available:
            controls.append(GeneratorNum.from_symbolic(corrupt(name), Part.REAL, f"{name}*1.1"))
    for name, text in options.generators.items():
        symmetries.extend(numeric_parts(name, parse_generator(text)))
    controls.append(
        GeneratorNum.from_symbolic(parse_generator(NEGATIVE_CONTROL), Part.REAL, NEGATIVE_CONTROL)
    )

    def verify(generators):
        return [
            verify_solution_mapping(g, epsilon, options.tol, reference).as_dict()
            for g in generators
            for epsilon in options.epsilons
        ]

    summary = {"symmetries": verify(symmetries), "controls": verify(controls)}
    summary["all_symmetries_pass"] = all(r["passed"] for r in summary["symmetries"])
    summary["all_controls_fail"] = not any(r["passed"] for r in summary["controls"])
    if out_dir is not None:
        write_json(out_dir / "flow_verify.json", summary)
    return summary


def pullback(scenario: Scenario, out_dir: Optional[Path]) -> dict:
    name, _, part = scenario.symmetry.pullback_generator.partition(":")
    generator = resolve(name, scenario.symmetry.generators)
    g = GeneratorNum.from_symbolic(generator, Part(part or Part.REAL), name)
    _, rt, law = reduced(scenario)
    report = induced_original_variables(g, rt, law)
    if out_dir is not None:
        write_csv(out_dir / "pullback.csv", PULLBACK_HEADER, report.rows())
    return report.summary()


def report(scenario: Scenario, out_dir: Optional[Path]) -> dict:
    """
    Runs every other command without writing its files and combines their
    summaries. A section that fails carries its diagnostic instead.
    """
    sections = {}
    for command, handler in COMMANDS.items():
        if command == Command.REPORT:
            continue
        try:
            sections[command] = handler(scenario, None)
        except ErmakovError as e:
            logger.info("report section %s failed: %s", command, e.message)
            sections[command] = {"error": e.as_diagnostic()}
    try:
        sections["time_translation"] = time_translation_check(
            scenario.system,
            scenario.initial_state,
            scenario.t_span[1],
            rtol=scenario.rtol,
            atol=scenario.atol,
        ).as_dict()
    except ErmakovError as e:
        sections["time_translation"] = {"error": e.as_diagnostic()}
    summary = {"version": get_version(), "sections": sections}
    if out_dir is not None:
        write_json(out_dir / "report.json", summary)
    return summary


COMMANDS: Dict[str, Callable[[Scenario, Optional[Path]], dict]] = {
    Command.SIMULATE: simulate,
    Command.REDUCE: reduce,
    Command.AUDIT: audit,
    Command.SYMMETRY_CHECK: symmetry_check,
    Command.SYMMETRY_SOLVE: symmetry_solve,
    Command.FLOW_VERIFY: flow_verify,
    Command.PULLBACK: pullback,
    Command.REPORT: report,
}


def emit_diagnostic(diagnostic: dict) -> None:
    sys.stderr.write(json.dumps(diagnostic, sort_keys=True, default=str) + "\n")


def run(command: str, scenario_path, out_dir) -> int:
    """
    Runs ``command`` for one scenario and returns the exit code.
    """
    try:
        handler = COMMANDS[Command(command)]
    except ValueError:
        error = UsageError(f"unknown command {command!r}")
        emit_diagnostic(error.as_diagnostic())
        return error.exit_code
    try:
        scenario = load_scenario(scenario_path)
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        handler(scenario, out_dir)
    except ErmakovError as e:
        emit_diagnostic({**e.as_diagnostic(), "scenario": str(scenario_path)})
        return e.exit_code
    except (ValueError, OSError) as e:
        emit_diagnostic(
            {"error": type(e).__name__, "code": 1, "message": str(e), "scenario": str(scenario_path)}
        )
        return 1
    except Exception as e:
        logger.debug("%s failed for %s", command, scenario_path, exc_info=True)
        emit_diagnostic(
            {"error": type(e).__name__, "code": 2, "message": str(e), "scenario": str(scenario_path)}
        )
        return 2
    logger.debug("%s finished for %s", command, scenario_path)
    return 0


class ArgumentParser(argparse.ArgumentParser):
    """
    Raises ``UsageError`` instead of printing usage and exiting.
    """

    def error(self, message):
        raise UsageError(message, usage=self.format_usage().strip())


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="ermakov",
        description="Simulate, reduce and audit Ermakov systems and their symmetries.",
    )
    parser.add_argument("command", choices=Command.values)
    parser.add_argument(
        "--scenario",
        action="append",
        required=True,
        help="scenario JSON file; repeat to run several",
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--jobs", type=int, default=1, help="scenarios to run concurrently"
    )
    parser.add_argument("--verbose", action="store_true", help="log to stderr")
    parser.add_argument("--version", action="version", version=get_version())
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        emit_diagnostic(e.as_diagnostic())
        return e.exit_code
    except SystemExit as e:
        # --help and --version
        return 0 if e.code == 0 else 1
    if args.verbose:
        logging.basicConfig(
            level=logging.DEBUG,
            stream=sys.stderr,
            format="%(asctime)s %(name)s %(levelname)s %(message)s",
        )
    if args.jobs < 1:
        error = UsageError("--jobs must be at least 1")
        emit_diagnostic(error.as_diagnostic())
        return error.exit_code

    out = Path(args.out)
    if len(args.scenario) == 1:
        return run(args.command, args.scenario[0], out)

    targets = [(path, out / Path(path).stem) for path in args.scenario]
    with ThreadPoolExecutor(max_workers=args.jobs) as executor:
        codes = list(
            executor.map(lambda target: run(args.command, *target), targets)
        )
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
