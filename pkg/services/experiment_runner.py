import hashlib
import json
import logging
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from flask import has_app_context

from extensions import db
from models import CaseReportRecord, ExperimentRun
from services.estimates_harness import (
    CaseReport,
    HypothesisViolation,
    alpha_limit_experiment,
    bilinear_bound_experiment,
    conditions_report,
    energy_monotonicity_check,
    h2_bound_check,
    higher_reg_weight_check,
    lipschitz_experiment,
    mapping_reports,
    projector_experiment,
    smoothing_rate_experiment,
    worked_example_reports,
)
from services.experiment_config import SUITES, ExperimentConfig
from services.initial_data import gen_random_sobolev, gen_single_mode, gen_taylor_green
from services.mild_solver import PicardError, solve_with_retry
from services.persistence import (
    RunStore,
    write_checkpoint,
    write_diagnostics_csv,
    write_json,
    write_scan_csv,
    write_trajectory_csv,
)
from services.semigroup_ops import TimeGrid, Trajectory
from services.spectral_core import Grid, SpectralField, plancherel_norm
from services.timestepper import BlowupDetected, evolve

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-4
DIVERGENCE_LIMIT = 1e-10
STANDARD_SMOOTHING_PAIRS = ((0.75, 1.0, 2.0), (0.75, 2.0, 2.0), (0.5, 1.0, 2.0),
                            (1.0, 1.5, 2.0), (0.75, 0.75, 2.0), (0.375, 1.0, 4.0))
H2_AMPLITUDE_FACTORS = (0.25, 0.5, 1.0, 1.5, 2.0)
ALPHA_SWEEP = (0.0, 0.2, 0.1, 0.05, 0.025)
PROJECTOR_ALPHAS = (0.1, 0.5, 1.0)
PROJECTOR_ENSEMBLE = 100


@dataclass
class RunOutcome:
    run_dir: Path
    reports: List[CaseReport]

    @property
    def passed(self) -> bool:
        return bool(self.reports) and all(report.passed for report in self.reports)


def initial_data(cfg: ExperimentConfig, amplitude: float = None) -> SpectralField:
    amplitude = cfg.amplitude if amplitude is None else amplitude
    if cfg.generator == "taylor_green":
        return gen_taylor_green(cfg.grid, amplitude)
    if cfg.generator == "single_mode":
        return gen_single_mode(cfg.grid, cfg.wavevector, amplitude, cfg.component)
    return gen_random_sobolev(cfg.grid, cfg.regularity, cfg.seed, amplitude)


def package_versions() -> Dict[str, str]:
    versions = {}
    for name in ("lans-alpha-lab", "numpy", "scipy", "pydantic"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def code_version() -> str:
    """sha256 over the application's Python sources, in path order."""
    root = Path(__file__).resolve().parent.parent
    digest = hashlib.sha256()
    for path in sorted([*root.glob("*.py"), *root.glob("services/*.py"), *root.glob("routes/*.py")]):
        digest.update(path.relative_to(root).as_posix().encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


def write_sample_checkpoints(directory: Path, trajectory: Trajectory, alpha: float,
                             nu: float) -> List[Path]:
    """One checkpoint per sample time, named by sample index."""
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, (t, state) in enumerate(zip(trajectory.times, trajectory.states)):
        path = directory / f"t_{i:04d}.bin"
        write_checkpoint(path, state, float(t), alpha, nu)
        paths.append(path)
    return paths


def _failure_report(criterion: str, error: Exception) -> CaseReport:
    return CaseReport(criterion, "fail", {"error_type": type(error).__name__}, notes=str(error))


# ---------------------------------------------------------------------------
# suites

def _smoothing_suite(cfg: ExperimentConfig) -> List[CaseReport]:
    points = cfg.points if "points" in cfg.model_fields_set else None
    explicit = {"s1", "s2", "p"} & cfg.model_fields_set
    pairs = [(cfg.s1, cfg.s2, cfg.p)] if explicit else list(STANDARD_SMOOTHING_PAIRS)
    return [smoothing_rate_experiment(s1, s2, p, n=cfg.dim, points=points, seed=cfg.seed)
            for s1, s2, p in pairs]


def _grids(cfg: ExperimentConfig) -> List[Grid]:
    return [Grid(cfg.dim, cfg.points), Grid(cfg.dim, 2 * cfg.points)]


def _energy_suite(cfg: ExperimentConfig) -> List[CaseReport]:
    try:
        trajectory = evolve(initial_data(cfg), cfg.horizon, cfg.step_config(), cfg.params, cfg.sample_grid())
    except BlowupDetected as e:
        return [_failure_report("energy_monotonicity", e)]
    return [energy_monotonicity_check(trajectory, cfg.alpha, cfg.nu)]


def _h2_suite(cfg: ExperimentConfig) -> List[CaseReport]:
    runs = []
    try:
        for factor in H2_AMPLITUDE_FACTORS:
            phi = initial_data(cfg, cfg.amplitude * factor)
            runs.append(evolve(phi, cfg.horizon, cfg.step_config(), cfg.params, cfg.sample_grid()))
    except BlowupDetected as e:
        return [_failure_report("h2_bound", e)]
    return [h2_bound_check(runs)]


def _higher_reg_suite(cfg: ExperimentConfig) -> List[CaseReport]:
    phi = gen_random_sobolev(cfg.grid, cfg.s1, cfg.seed, cfg.amplitude)
    samples = TimeGrid.log_graded(cfg.horizon, max(cfg.samples, 30), min_fraction=1e-4)
    try:
        trajectory = evolve(phi, cfg.horizon, cfg.step_config(), cfg.params, samples)
    except BlowupDetected as e:
        return [_failure_report("higher_regularity_weight", e)]
    return [higher_reg_weight_check(trajectory, cfg.s1, cfg.r, cfg.p)]


def _alpha_limit_suite(cfg: ExperimentConfig) -> List[CaseReport]:
    phi = initial_data(cfg)
    try:
        return [alpha_limit_experiment(ALPHA_SWEEP, phi, cfg.horizon, cfg.nu, cfg.dt)]
    except BlowupDetected as e:
        return [_failure_report("alpha_limit", e)]


def run_suite(name: str, cfg: ExperimentConfig, run_dir: Optional[Path] = None) -> List[CaseReport]:
    """Run one verification suite (or all of them) and return its reports."""
    if name not in SUITES:
        raise ValueError(f"Unknown suite '{name}'")
    if name == "all":
        reports: List[CaseReport] = []
        for suite in SUITES[:-1]:
            reports.extend(run_suite(suite, cfg, run_dir))
        return reports

    logger.info(f"Running verification suite '{name}'")
    if name == "projectors":
        return [projector_experiment(cfg.grid, alpha, PROJECTOR_ENSEMBLE, seed=cfg.seed)
                for alpha in PROJECTOR_ALPHAS]
    if name == "smoothing":
        return _smoothing_suite(cfg)
    if name == "mappings":
        return mapping_reports(cfg.grid, seed=cfg.seed, horizon=cfg.horizon, nu=cfg.nu)
    if name in ("bilinear", "lipschitz"):
        experiment = bilinear_bound_experiment if name == "bilinear" else lipschitz_experiment
        try:
            return [experiment(cfg.r, cfg.p, cfg.q, grids=_grids(cfg), alpha=cfg.alpha, seed=cfg.seed)]
        except HypothesisViolation as e:
            logger.warning(f"Suite '{name}' not measured: {e}")
            return [e.to_report()]
    if name == "energy":
        return _energy_suite(cfg)
    if name == "h2":
        return _h2_suite(cfg)
    if name == "higher-reg":
        return _higher_reg_suite(cfg)
    if name == "alpha-limit":
        return _alpha_limit_suite(cfg)

    reports, rows = [], []
    for kind in ("ct", "la"):
        report, scan = conditions_report(kind, n=cfg.dim)
        reports.append(report)
        rows.extend(scan)
    reports.extend(worked_example_reports())
    if run_dir is not None:
        write_scan_csv(Path(run_dir) / "scan.csv", rows)
    return reports


# ---------------------------------------------------------------------------
# runs

class ExperimentRunner:
    """Executes configured runs into fresh run directories and records them in the registry."""

    def __init__(self, store: RunStore = None, record: bool = True):
        self.store = store or RunStore()
        self.record = record

    def _start_record(self, cfg: ExperimentConfig, kind: str, suite: Optional[str],
                      run_dir: Path) -> Optional[ExperimentRun]:
        if not (self.record and has_app_context()):
            return None
        run = ExperimentRun(
            experiment_id=cfg.experiment_id,
            kind=kind,
            suite=suite,
            run_dir=str(run_dir),
            config_json=json.dumps(cfg.model_dump(mode="json"), sort_keys=True),
            status='processing',
        )
        db.session.add(run)
        db.session.commit()
        return run

    def _finish_record(self, run: Optional[ExperimentRun], reports: List[CaseReport],
                       elapsed: float, error: str = None):
        if run is None:
            return
        for report in reports:
            db.session.add(CaseReportRecord(
                run_id=run.id,
                criterion=report.criterion,
                verdict=report.verdict,
                measured_json=json.dumps(report.to_dict()["measured"], sort_keys=True),
                provenance=report.provenance,
            ))
        run.status = 'failed' if error else 'completed'
        run.error_message = error
        run.elapsed_seconds = elapsed
        db.session.commit()

    def _execute(self, cfg: ExperimentConfig, kind: str, body: Callable[[Path], List[CaseReport]],
                 suite: str = None) -> RunOutcome:
        config_dict = cfg.model_dump(mode="json")
        run_dir = self.store.create_run_dir(cfg.experiment_id, {"kind": kind, "suite": suite, **config_dict})
        run = self._start_record(cfg, kind, suite, run_dir)
        started = time.perf_counter()
        try:
            reports = body(run_dir)
            write_json(run_dir / "report.json", [report.to_dict() for report in reports])
            write_json(run_dir / "manifest.json", {
                "kind": kind,
                "suite": suite,
                "config": config_dict,
                "seeds": [cfg.seed],
                "versions": package_versions(),
                "code_version": code_version(),
            })
        except Exception as e:
            logger.error(f"Run {run_dir.name} failed: {e}")
            if run is not None:
                self._finish_record(run, [], time.perf_counter() - started, str(e))
            raise

        failures = [r.notes for r in reports if r.verdict == "fail" and r.measured.get("error_type")]
        self._finish_record(run, reports, time.perf_counter() - started, "; ".join(failures) or None)
        logger.info(
            f"Run {run_dir.name}: {sum(r.passed for r in reports)}/{len(reports)} criteria passed"
        )
        return RunOutcome(run_dir, reports)

    def generate(self, cfg: ExperimentConfig, out: Path) -> SpectralField:
        phi = initial_data(cfg)
        write_checkpoint(out, phi, 0.0, cfg.alpha, cfg.nu)
        return phi

    def solve(self, cfg: ExperimentConfig) -> RunOutcome:
        kind = "picard" if cfg.solver == "picard" else "solve"
        return self._execute(cfg, kind, lambda run_dir: self._solve_body(cfg, run_dir))

    def verify(self, cfg: ExperimentConfig, suite: str) -> RunOutcome:
        return self._execute(cfg, "verify", lambda run_dir: run_suite(suite, cfg, run_dir), suite=suite)

    def _solve_body(self, cfg: ExperimentConfig, run_dir: Path) -> List[CaseReport]:
        phi = initial_data(cfg)
        write_checkpoint(run_dir / "initial.bin", phi, 0.0, cfg.alpha, cfg.nu)
        reports: List[CaseReport] = []
        evolved = picard = None

        if cfg.solver in ("timestep", "both"):
            try:
                samples = cfg.picard_config().time_grid() if cfg.solver == "both" else cfg.sample_grid()
                evolved = evolve(phi, cfg.horizon, cfg.step_config(), cfg.params, samples)
            except BlowupDetected as e:
                reports.append(_failure_report("timestep_run", e))
            else:
                write_trajectory_csv(run_dir / "timeseries.csv", evolved, cfg.norm_pairs())
                write_checkpoint(run_dir / "final.bin", evolved.final, cfg.horizon, cfg.alpha, cfg.nu)
                write_sample_checkpoints(run_dir / "checkpoints", evolved, cfg.alpha, cfg.nu)
                residual = float(np.max(evolved.metadata["divergence_residual"]))
                reports.append(CaseReport(
                    "divergence_free", "pass" if residual <= DIVERGENCE_LIMIT else "fail",
                    {"max_residual": residual}, {"max": DIVERGENCE_LIMIT},
                    provenance="time stepping preserves incompressibility"))
                reports.append(energy_monotonicity_check(evolved, cfg.alpha, cfg.nu))

        if cfg.solver in ("picard", "both"):
            try:
                picard = solve_with_retry(phi, cfg.picard_config(), cfg.params)
            except PicardError as e:
                if e.diagnostics is not None:
                    write_diagnostics_csv(run_dir / "diagnostics.csv", e.diagnostics.to_rows())
                reports.append(_failure_report("picard_convergence", e))
            else:
                diagnostics = picard.diagnostics
                write_diagnostics_csv(run_dir / "diagnostics.csv", diagnostics.to_rows())
                if cfg.solver == "picard":
                    write_trajectory_csv(run_dir / "timeseries.csv", picard.solution, cfg.norm_pairs())
                    write_checkpoint(run_dir / "final.bin", picard.solution.final,
                                     picard.solution.time_grid.horizon, cfg.alpha, cfg.nu)
                    write_sample_checkpoints(run_dir / "checkpoints", picard.solution, cfg.alpha, cfg.nu)
                contracting = diagnostics.max_ratio < 1.0
                reports.append(CaseReport(
                    "picard_convergence", "pass" if diagnostics.converged and contracting else "fail",
                    {"iterations": diagnostics.iterations, "max_ratio": diagnostics.max_ratio,
                     "final_residual": diagnostics.final_residual,
                     "horizon": picard.config.horizon},
                    {"tolerance": picard.config.tolerance},
                    provenance="mild formulation solved by contraction"))

        if evolved is not None and picard is not None:
            if not np.isclose(picard.config.horizon, cfg.horizon):
                reports.append(CaseReport("picard_vs_timestepper", "inconclusive",
                                          {"picard_horizon": picard.config.horizon},
                                          notes="Picard horizon was halved; no shared final time"))
            else:
                gap = plancherel_norm(picard.solution.final - evolved.final)
                relative = gap / max(plancherel_norm(evolved.final), 1e-300)
                reports.append(CaseReport(
                    "picard_vs_timestepper", "pass" if relative <= ORACLE_TOLERANCE else "fail",
                    {"relative_l2_difference": relative}, {"max": ORACLE_TOLERANCE},
                    provenance="mild solution agrees with the time-stepped solution"))
        return reports
