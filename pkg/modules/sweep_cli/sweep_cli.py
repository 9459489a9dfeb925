"""
Sweep Command Front End

Parses JSON run configurations into a RunConfig, checks task/model
compatibility and dispatches each task to the numeric modules. Every task
returns a ResultTable whose rows come back in sorted-control order whatever
the worker count.

Version: 1.0
"""

import sys
import json
import math
import time
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from modules.analytic_phase.analytic_phase import (
    Phase, classify_point, classify_phase_grid, phase_grid_frame, dressed_cavity,
    hybrid_spectrum_np, hybrid_spectrum_sp, anharmonic_energy, anharmonic_curvature,
    anharmonic_ground_level, vacuum_intersection,
)
from modules.meanfield_variational.meanfield_variational import (
    mf_minimize_hom, hom_landscape_frame, mf_energy_hom_frame, mf_second_derivative_scan,
    landscape_oracle,
)
from modules.meanfield_variational.squeezing_solver import solve_squeezing, CLASSICAL_LIMIT
from modules.model_builder.model_builder import (
    HamiltonianKind, ModelParams, HYBRID_KINDS, default_layout,
)
from modules.spectral_engine.spectral_engine import (
    level_crossing_scan, gap_sweep, auto_layout, convergence_check,
)
from modules.sweep_cli.result_table import ResultTable
from sweep_manager import PointOutcome, sweep_manager
from validation import (
    QptConfig, QptError, ConfigRejectedError, InvalidParameterError,
    validate_config_document, check_consistent, is_finite_number,
)

logger = logging.getLogger(__name__)


###############################################################################
# TASK VOCABULARY
###############################################################################

@dataclass(frozen=True)
class TaskSpec:
    default_model: HamiltonianKind
    models: FrozenSet[HamiltonianKind]
    controls: Tuple[str, ...] = ()
    controls2: Tuple[str, ...] = ()


ANHARMONIC = frozenset({HamiltonianKind.EFFECTIVE_HOM_TILDE})
U1_KINDS = frozenset({HamiltonianKind.APPROX_HOM, HamiltonianKind.EFFECTIVE_HOM_TILDE})
ALL_KINDS = frozenset(HamiltonianKind)

TASK_SPECS: Dict[str, TaskSpec] = {
    'staircase': TaskSpec(HamiltonianKind.EFFECTIVE_HOM_TILDE, ANHARMONIC, ('kappa',)),
    'crossing-scan': TaskSpec(HamiltonianKind.EFFECTIVE_HOM_TILDE, ANHARMONIC, ('kappa',)),
    'curvature-scan': TaskSpec(HamiltonianKind.EFFECTIVE_HOM_TILDE, ANHARMONIC, ('kappa',)),
    'well-definedness': TaskSpec(HamiltonianKind.EFFECTIVE_HOM_TILDE, ANHARMONIC, ('kappa',)),
    'landscape': TaskSpec(HamiltonianKind.APPROX_HOM, U1_KINDS),
    'variational': TaskSpec(HamiltonianKind.FULL_H, frozenset({HamiltonianKind.FULL_H}), ('gamma',)),
    'phase-diagram': TaskSpec(HamiltonianKind.HYBRID_HP, HYBRID_KINDS, ('mu',), ('gamma',)),
    'hybrid-spectrum': TaskSpec(HamiltonianKind.HYBRID_HP, HYBRID_KINDS, ('mu',)),
    'gap-sweep': TaskSpec(HamiltonianKind.FULL_H, ALL_KINDS, QptConfig.ALLOWED_CONTROLS),
    'convergence-audit': TaskSpec(HamiltonianKind.FULL_H, ALL_KINDS, QptConfig.ALLOWED_CONTROLS),
}

STAIRCASE_DIM = 64
DEFAULT_ALPHA_MAX = 2.0
DEFAULT_GRID_STEPS = 101
DEFAULT_N_MAX = 10


###############################################################################
# RUN CONFIGURATION
###############################################################################

@dataclass(frozen=True)
class ControlRange:
    name: str
    lo: float
    hi: float
    steps: int

    def values(self) -> List[float]:
        return [float(v) for v in np.linspace(self.lo, self.hi, self.steps)]

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'lo': self.lo, 'hi': self.hi, 'steps': self.steps}


@dataclass(frozen=True)
class RunConfig:
    """Validated run; `document` is the normalised config echoed into metadata"""

    task: str
    model: HamiltonianKind
    params: ModelParams
    control: Optional[ControlRange]
    control2: Optional[ControlRange]
    dims: Union[str, Tuple[int, ...]]
    output_path: Optional[str]
    output_format: str
    seed: int
    report_frame: str
    options: Dict[str, Any] = field(default_factory=dict)
    workers: int = QptConfig.DEFAULT_WORKERS
    document: Dict[str, Any] = field(default_factory=dict)

    @property
    def derived(self) -> Dict[str, float]:
        return self.params.derived()


def load_document(source: str) -> Any:
    """Read a JSON config from a path, or from stdin when source is '-'"""
    try:
        if source == '-':
            return json.load(sys.stdin)
        with open(source, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigRejectedError(f"Config is not valid JSON: {e}", field='config') from e
    except OSError as e:
        raise ConfigRejectedError(f"Failed to read config {source}: {e}", field='config') from e


def build_params(raw: Dict[str, Any]) -> ModelParams:
    """Physical parameters with dimensionless groups filled in or checked against them"""
    physical = {key: raw[key] for key in raw if key not in ('gamma', 'kappa', 'eta', 'mu')}
    omega_c = physical.get('omega_c', 1.0)
    if omega_c <= 0:
        raise ConfigRejectedError('omega_c must be positive', field='params.omega_c')
    physical.setdefault('omega_a', omega_c)

    if 'omega_m' not in physical and 'eta' in raw:
        if raw['eta'] <= 0:
            raise ConfigRejectedError('eta must be positive', field='params.eta')
        physical['omega_m'] = omega_c / raw['eta']
    omega_m = physical.get('omega_m', 1.0)
    if omega_m <= 0:
        raise ConfigRejectedError('omega_m must be positive', field='params.omega_m')

    scale = math.sqrt(omega_c * omega_m)
    if 'g' not in physical:
        if 'gamma' in raw:
            physical['g'] = raw['gamma'] * scale / (2 * math.sqrt(2))
        elif 'kappa' in raw:
            if raw['kappa'] <= 0:
                raise ConfigRejectedError('kappa must be positive', field='params.kappa')
            physical['g'] = scale / (2 * raw['kappa'])
    if 'lambda' not in physical and 'mu' in raw:
        physical['lambda'] = raw['mu'] * math.sqrt(physical['omega_a'] * omega_c) / 2

    if 'lambda' in physical:
        physical['lam'] = physical.pop('lambda')
    try:
        params = ModelParams(**physical)
    except InvalidParameterError as e:
        raise ConfigRejectedError(f"Invalid model parameters: {e}", field='params') from e

    for name in ('gamma', 'kappa', 'eta', 'mu'):
        if name in raw:
            check_consistent(name, raw[name], getattr(params, name))
    return params


def _control(block: Optional[Dict[str, Any]], allowed: Tuple[str, ...], label: str,
             task: str) -> Optional[ControlRange]:
    if not allowed:
        if block is not None:
            raise ConfigRejectedError(f"task {task!r} takes no {label} block", field=label)
        return None
    if block is None:
        raise ConfigRejectedError(f"task {task!r} needs a {label} over {', '.join(allowed)}", field=label)
    if block['name'] not in allowed:
        raise ConfigRejectedError(
            f"task {task!r} sweeps {', '.join(allowed)}, not {block['name']!r}", field=f'{label}.name')
    return ControlRange(block['name'], float(block['lo']), float(block['hi']), int(block['steps']))


def _parse_options(options: Dict[str, Any]) -> Dict[str, Any]:
    """Option value checks; keys were already checked by validate_config_document"""
    def reject(key: str, message: str) -> None:
        raise ConfigRejectedError(f"options.{key}: {message}", field=f'options.{key}')

    def is_int(value: Any) -> bool:
        return isinstance(value, int) and not isinstance(value, bool)

    if 'series_order' in options:
        order = options['series_order']
        if order != 'full' and not (is_int(order) and order >= 1):
            reject('series_order', 'counts powers of gamma; must be an integer >= 1 or "full"')
    if 'regime' in options and options['regime'] not in QptConfig.ALLOWED_REGIMES:
        reject('regime', f'must be one of {", ".join(QptConfig.ALLOWED_REGIMES)}')
    for key in ('pinning', 'alpha_max', 'drive_scale'):
        if key in options:
            if not is_finite_number(options[key]):
                reject(key, 'must be a finite number')
            if key != 'drive_scale' and options[key] <= 0:
                reject(key, 'must be positive')
            if key == 'drive_scale' and options[key] < 0:
                reject(key, 'must be non-negative')
    if 'grid_steps' in options and not (is_int(options['grid_steps']) and options['grid_steps'] >= 2):
        reject('grid_steps', 'must be an integer >= 2')
    if 'n_max' in options and not (is_int(options['n_max']) and options['n_max'] >= 1):
        reject('n_max', 'must be an integer >= 1')
    return dict(options)


def config_from_document(document: Any, task: Optional[str] = None,
                         overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Validate a config document and resolve it into a RunConfig"""
    check = validate_config_document(document)
    if not check['valid']:
        raise ConfigRejectedError('; '.join(check['errors']), field=check['field'])

    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    named = document.get('task')
    if task is not None and named is not None and task != named:
        raise ConfigRejectedError(f"command task {task!r} does not match config task {named!r}",
                                  field='task')
    task = task or named
    if task not in TASK_SPECS:
        raise ConfigRejectedError(f"unknown or missing task {task!r}", field='task')
    spec = TASK_SPECS[task]

    try:
        model = HamiltonianKind.parse(document['model']) if 'model' in document else spec.default_model
    except InvalidParameterError as e:
        raise ConfigRejectedError(str(e), field='model') from e
    if model not in spec.models:
        choices = ', '.join(sorted(kind.value for kind in spec.models))
        raise ConfigRejectedError(f"task {task!r} cannot run model {model.value!r}; it needs one of {choices}",
                                  field='model')

    params = build_params(document.get('params', {}))
    control = _control(document.get('control'), spec.controls, 'control', task)
    control2 = _control(document.get('control2'), spec.controls2, 'control2', task)
    if control2 is not None and control2.steps != control.steps:
        raise ConfigRejectedError('control2.steps must equal control.steps', field='control2.steps')
    if task == 'well-definedness' and control.lo <= 0:
        raise ConfigRejectedError('well-definedness needs kappa > 0', field='control.lo')

    dims = document.get('dims', 'auto')
    if dims != 'auto':
        dims = tuple(dims)
        try:
            default_layout(model, params, dims)
        except QptError as e:
            raise ConfigRejectedError(f"dims do not fit {model.value}: {e}", field='dims') from e

    options = _parse_options(document.get('options', {}))
    seed = overrides.get('seed', document.get('seed', 0))
    frame = overrides.get('frame', document.get('frame', 'flipped'))
    output_format = overrides.get('format', document.get('format', 'csv'))
    if frame not in QptConfig.ALLOWED_FRAMES:
        raise ConfigRejectedError(f"unknown frame {frame!r}", field='frame')
    if output_format not in QptConfig.ALLOWED_FORMATS:
        raise ConfigRejectedError(f"unknown format {output_format!r}", field='format')

    normalised = {
        'schema': QptConfig.SCHEMA_VERSION,
        'task': task,
        'model': model.value,
        'params': dict(document.get('params', {})),
    }
    if control is not None:
        normalised['control'] = control.to_dict()
    if control2 is not None:
        normalised['control2'] = control2.to_dict()
    normalised.update({
        'dims': 'auto' if dims == 'auto' else list(dims),
        'seed': seed,
        'frame': frame,
        'format': output_format,
        'options': options,
    })

    config = RunConfig(
        task=task, model=model, params=params, control=control, control2=control2,
        dims=dims, output_path=overrides.get('out'), output_format=output_format,
        seed=seed, report_frame=frame, options=options,
        workers=int(overrides.get('workers', QptConfig.DEFAULT_WORKERS)), document=normalised,
    )
    logger.info(f"Config accepted: {task} on {model.value}, derived {config.derived}")
    return config


def parse_config(source: str, task: Optional[str] = None,
                 overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    return config_from_document(load_document(source), task, overrides)


###############################################################################
# TABLE HELPERS
###############################################################################

def _table(columns: List[Tuple[str, str]], frame: pd.DataFrame,
           metadata: Optional[Dict[str, Any]] = None) -> ResultTable:
    return ResultTable(columns, frame[[name for name, _ in columns]], metadata or {})


def _outcome_frame(outcomes: List[PointOutcome], control: str, blank: Dict[str, Any]) -> pd.DataFrame:
    """Rows from sweep outcomes; flagged points keep the schema with blank values"""
    rows = []
    for outcome in outcomes:
        row = {control: outcome.control}
        if outcome.flagged:
            row.update(blank)
            row['flag'] = outcome.error
        else:
            row.update(outcome.value)
            row['flag'] = '' if outcome.value.get('converged', True) else 'unconverged'
        rows.append(row)
    return pd.DataFrame(rows)


def _layout_dims(config: RunConfig):
    return None if config.dims == 'auto' else default_layout(config.model, config.params, config.dims)


###############################################################################
# TASKS
###############################################################################

def _run_staircase(config: RunConfig) -> ResultTable:
    c = config.control
    dim = STAIRCASE_DIM if config.dims == 'auto' else config.dims[0]
    report = level_crossing_scan((c.lo, c.hi), c.steps, dim)
    columns = [('kappa', '1'), ('n_ground', 'photons'), ('n_mean_field', 'photons'),
               ('degenerate', 'flag'), ('converged', 'flag')]
    crossings = [{'kappa': k, 'levels': list(pair)} for k, pair in report.crossings]
    return _table(columns, report.staircase_frame(), {'dim': dim, 'crossings': crossings})


def _run_crossing_scan(config: RunConfig) -> ResultTable:
    c = config.control
    dim = STAIRCASE_DIM if config.dims == 'auto' else config.dims[0]
    frame = level_crossing_scan((c.lo, c.hi), c.steps, dim).crossings_frame()
    frame['kappa_exact'] = [math.sqrt(2 * n + 1) for n in frame['lower_level']]
    columns = [('kappa', '1'), ('lower_level', 'photons'), ('upper_level', 'photons'),
               ('kappa_exact', '1')]
    return _table(columns, frame, {'dim': dim})


def _run_curvature_scan(config: RunConfig) -> ResultTable:
    c = config.control
    scan = mf_second_derivative_scan((c.lo, c.hi), c.steps)
    columns = [('kappa', '1'), ('energy', 'omega_c'), ('second_derivative', 'omega_c')]
    return _table(columns, scan.frame, {'second_derivative_jump': scan.jump})


def _run_well_definedness(config: RunConfig) -> ResultTable:
    n_max = config.options.get('n_max', DEFAULT_N_MAX)
    rows = []
    for kappa in config.control.values():
        x = 1.0 / kappa
        ground = anharmonic_ground_level(x, n_max)
        for n in range(n_max + 1):
            rows.append({'kappa': kappa, 'x': x, 'n': n, 'energy': anharmonic_energy(n, x),
                         'curvature': anharmonic_curvature(n), 'ground': n == ground})
    columns = [('kappa', '1'), ('x', '1'), ('n', 'photons'), ('energy', 'omega_c'),
               ('curvature', 'omega_c'), ('ground', 'flag')]
    intersections = [{'n': n, 'x': vacuum_intersection(n)} for n in range(1, n_max + 1)]
    return _table(columns, pd.DataFrame(rows), {'vacuum_intersections': intersections})


def _run_landscape(config: RunConfig) -> ResultTable:
    kappa, eta = config.params.kappa, config.params.eta
    if not math.isfinite(kappa):
        raise InvalidParameterError('landscape needs a non-zero optomechanical coupling g')
    alpha_max = config.options.get('alpha_max', DEFAULT_ALPHA_MAX)
    steps = config.options.get('grid_steps', DEFAULT_GRID_STEPS)
    frame = hom_landscape_frame(kappa, eta, config.report_frame, (-alpha_max, alpha_max), steps)

    optimum = mf_minimize_hom(kappa, eta)
    oracle = landscape_oracle(
        lambda v: mf_energy_hom_frame(complex(v[0], v[1]), 0.0, kappa, eta, 'flipped'),
        [(-alpha_max, alpha_max), (-alpha_max, alpha_max)], seed=config.seed,
    )
    columns = [('re_alpha', 'sqrt(photons)'), ('im_alpha', 'sqrt(photons)'), ('energy', 'omega_c')]
    return _table(columns, frame, {
        'optimum': {
            'alpha_mag': optimum.alpha_mag,
            'energy': optimum.energy,
            'classification': optimum.classification,
            'degenerate_ring': optimum.degenerate_ring,
        },
        'oracle': {'alpha_mag': float(np.hypot(*oracle.x)), 'energy': oracle.value},
    })


def _run_variational(config: RunConfig) -> ResultTable:
    order = config.options.get('series_order', QptConfig.DEFAULT_SERIES_ORDER)
    regime = config.options.get('regime', 'finite_eta')
    eta = math.inf if regime == CLASSICAL_LIMIT else config.params.eta

    def point(gamma: float) -> Dict[str, Any]:
        solution = solve_squeezing(gamma, eta, series_order=order, regime=regime)
        return {'r': solution.r, 's': solution.s, 'energy': solution.energy,
                'iterations': solution.iterations, 'residual': solution.residual,
                'series_warning': solution.series_warning, 'converged': True}

    outcomes = sweep_manager.map_points(point, config.control.values(), workers=config.workers)
    blank = {'r': np.nan, 's': np.nan, 'energy': np.nan, 'iterations': np.nan,
             'residual': np.nan, 'series_warning': False, 'converged': False}
    columns = [('gamma', '1'), ('r', '1'), ('s', '1'), ('energy', 'omega_c'),
               ('iterations', 'count'), ('residual', '1'), ('series_warning', 'flag'),
               ('converged', 'flag'), ('flag', 'kind')]
    return _table(columns, _outcome_frame(outcomes, 'gamma', blank),
                  {'series_order': order, 'regime': regime})


def _run_phase_diagram(config: RunConfig) -> ResultTable:
    c, c2 = config.control, config.control2
    points = classify_phase_grid((c.lo, c.hi), (c2.lo, c2.hi), c.steps, config.params.alpha_A2)
    frame = phase_grid_frame(points)
    columns = [('mu', '1'), ('gamma', '1'), ('phase', 'label'), ('epsilon_minus', 'omega_c')]
    counts = frame['phase'].value_counts()
    return _table(columns, frame, {
        'alpha_A2': config.params.alpha_A2,
        'cells': {phase.value: int(counts.get(phase.value, 0)) for phase in Phase},
    })


def _run_hybrid_spectrum(config: RunConfig) -> ResultTable:
    def point(mu: float) -> Dict[str, Any]:
        p = config.params.with_control('mu', mu)
        phase = classify_point(p.mu, p.gamma, p.alpha_A2).phase
        dressed = dressed_cavity(p)
        if phase == Phase.NORMAL:
            plus, minus = hybrid_spectrum_np(p)
        else:
            plus, minus = hybrid_spectrum_sp(dressed.delta_tilde, dressed.omega_tilde_c, p.omega_a)
        return {'phase': phase.value, 'delta_tilde': dressed.delta_tilde, 'epsilon_plus': plus,
                'epsilon_minus': np.nan if minus is None else minus}

    outcomes = sweep_manager.map_points(point, config.control.values(), workers=config.workers)
    blank = {'phase': '', 'delta_tilde': np.nan, 'epsilon_plus': np.nan, 'epsilon_minus': np.nan}
    columns = [('mu', '1'), ('phase', 'label'), ('delta_tilde', '1'), ('epsilon_plus', 'omega_c'),
               ('epsilon_minus', 'omega_c'), ('flag', 'kind')]
    return _table(columns, _outcome_frame(outcomes, 'mu', blank))


def _build_options(config: RunConfig) -> Dict[str, Any]:
    return {'drive_scale': config.options['drive_scale']} if 'drive_scale' in config.options else {}


def _run_gap_sweep(config: RunConfig) -> ResultTable:
    c = config.control
    pinning = config.options.get('pinning')
    frame = gap_sweep(config.model, config.params, c.name, c.lo, c.hi, c.steps,
                      layout=_layout_dims(config), workers=config.workers, pinning=pinning,
                      **_build_options(config))
    columns = [(c.name, '1'), ('gap', 'omega_c'), ('parity_gap', 'omega_c'),
               ('photon_number', 'photons'), ('parity', '1'), ('converged', 'flag'), ('dims', 'modes')]
    if pinning:
        columns.append(('pinned_coherence', 'sqrt(photons)'))
    columns.append(('flag', 'kind'))
    return _table(columns, frame)


def _run_convergence_audit(config: RunConfig) -> ResultTable:
    c = config.control
    layout = _layout_dims(config)
    options = _build_options(config)

    def point(value: float) -> Dict[str, Any]:
        p = config.params.with_control(c.name, value)
        if layout is None:
            _, report = auto_layout(config.model, p, **options)
        else:
            report = convergence_check(config.model, p, layout, **options)
        return {
            'dims': 'x'.join(str(d) for d in report.layout.mode_dims),
            'refined_dims': 'x'.join(str(d) for d in report.refined_layout.mode_dims),
            'eigenvalue_shift': report.eigenvalue_shift,
            'photon_shift': report.photon_shift,
            'converged': report.converged,
            'reason': report.reason,
        }

    outcomes = sweep_manager.map_points(point, c.values(), workers=config.workers)
    blank = {'dims': '', 'refined_dims': '', 'eigenvalue_shift': np.nan, 'photon_shift': np.nan,
             'converged': False, 'reason': ''}
    columns = [(c.name, '1'), ('dims', 'modes'), ('refined_dims', 'modes'),
               ('eigenvalue_shift', 'omega_c'), ('photon_shift', 'photons'), ('converged', 'flag'),
               ('reason', 'text'), ('flag', 'kind')]
    return _table(columns, _outcome_frame(outcomes, c.name, blank))


TASK_RUNNERS: Dict[str, Callable[[RunConfig], ResultTable]] = {
    'staircase': _run_staircase,
    'crossing-scan': _run_crossing_scan,
    'curvature-scan': _run_curvature_scan,
    'well-definedness': _run_well_definedness,
    'landscape': _run_landscape,
    'variational': _run_variational,
    'phase-diagram': _run_phase_diagram,
    'hybrid-spectrum': _run_hybrid_spectrum,
    'gap-sweep': _run_gap_sweep,
    'convergence-audit': _run_convergence_audit,
}


###############################################################################
# RUN
###############################################################################

def run(config: RunConfig) -> ResultTable:
    """Dispatch the task and stamp the table with the run metadata"""
    started = time.time()
    logger.info(f"Running {config.task} on {config.model.value}")
    table = TASK_RUNNERS[config.task](config)
    flagged = table.flagged_rows
    if flagged:
        logger.warning(f"{flagged} of {len(table.frame)} rows carry flags")

    table.metadata = {
        'schema': QptConfig.SCHEMA_VERSION,
        'tool_version': QptConfig.TOOL_VERSION,
        'task': config.task,
        'model': config.model.value,
        'frame': config.report_frame,
        'seed': config.seed,
        'config': config.document,
        'params': config.params.to_dict(),
        'derived': config.derived,
        'rows': len(table.frame),
        'flagged_rows': flagged,
        'status': 'complete-with-flags' if flagged else 'complete',
        **table.metadata,
        'wall_time_seconds': round(time.time() - started, 6),
    }
    return table
