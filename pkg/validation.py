###############################################################################
# VALIDATION UTILITIES MODULE
# Run configuration constants, error hierarchy and config-document checks
###############################################################################

import os
import math
import logging
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


###############################################################################
# QPT CONFIGURATION
# Constants for tolerances, truncation policy and accepted config vocabulary
###############################################################################

def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}")
        return default


class QptConfig:
    """Centralized numerical configuration - O(1) lookups for all checks"""

    SCHEMA_VERSION = 1
    TOOL_VERSION = "1.0.0"

    DEFAULT_DIMS = (16, 40)
    MAX_TOTAL_DIM = _env_int("OPTOMECH_QPT_MAX_TOTAL_DIM", 4096)
    DEFAULT_WORKERS = _env_int("OPTOMECH_QPT_WORKERS", 1)
    MIN_MECH_DIM = 2
    # Zero-point widths of b+b† kept past the vacuum radiation-pressure displacement
    MECH_WINDOW_MARGIN = 0.5

    HERMITICITY_TOL = 1e-10
    DEGENERACY_TOL = 1e-9
    CONVERGENCE_EIG_TOL = 1e-7
    CONVERGENCE_PHOTON_TOL = 1e-5
    BOUNDARY_TOL = 1e-12
    PINNING_FIELD = 1e-6
    CONSISTENCY_RTOL = 1e-9

    FIXED_POINT_DAMPING = 0.5
    FIXED_POINT_TOL = 1e-10
    FIXED_POINT_MAX_ITER = 100_000
    DEFAULT_SERIES_ORDER = 4
    FULL_SERIES_MAX_N = 40

    ORACLE_GRID = 200
    MIN_BRANCH_POINTS = 4

    ALLOWED_TASKS = (
        'staircase', 'crossing-scan', 'gap-sweep', 'landscape', 'variational',
        'phase-diagram', 'hybrid-spectrum', 'convergence-audit',
        'curvature-scan', 'well-definedness',
    )
    ALLOWED_CONTROLS = ('gamma', 'kappa', 'mu', 'xi', 'eta')
    ALLOWED_FORMATS = ('csv', 'json')
    ALLOWED_FRAMES = ('printed', 'flipped')
    ALLOWED_REGIMES = ('finite_eta', 'classical_limit')

    CONFIG_KEYS = (
        'schema', 'task', 'model', 'params', 'control', 'control2', 'dims',
        'seed', 'frame', 'format', 'options',
    )
    PARAM_KEYS = (
        'omega_c', 'omega_m', 'g', 'N_factor', 'eps1', 'eps2', 'omega_a', 'lambda',
        'alpha_A2', 'N_a', 'xi', 'theta', 'gamma', 'kappa', 'eta', 'mu',
    )
    CONTROL_KEYS = ('name', 'lo', 'hi', 'steps')
    OPTION_KEYS = (
        'series_order', 'regime', 'pinning', 'drive_scale', 'alpha_max', 'grid_steps', 'n_max',
    )


###############################################################################
# ERROR HIERARCHY
# Every library failure carries a stable kind and an exit code
###############################################################################

class QptError(Exception):
    """Base class for all domain failures"""

    kind = 'qpt-error'
    exit_code = 1


class InvalidDimensionError(QptError):
    kind = 'invalid-dimension'


class LayoutMismatchError(QptError):
    kind = 'layout-mismatch'


class InvalidParameterError(QptError):
    kind = 'invalid-parameter'


class HermiticityViolationError(QptError):
    kind = 'hermiticity-violation'


class NumericFailureError(QptError):
    kind = 'numeric-failure'


class TruncationUnresolvedError(QptError):
    kind = 'truncation-unresolved'


class DivergenceSuspectedError(QptError):
    kind = 'divergence-suspected'


class InvalidGridError(QptError):
    kind = 'invalid-grid'


class UnsupportedDirectionError(QptError):
    kind = 'unsupported-direction'


class InvalidRegimeError(QptError):
    kind = 'invalid-regime'


class ConfigRejectedError(QptError):
    """Config document rejected; `field` names the offending entry"""

    kind = 'config-rejected'

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


###############################################################################
# CONFIG DOCUMENT VALIDATION
# Structural checks returning {valid, errors} result dicts
###############################################################################

def is_finite_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def validate_control(control: Any, label: str = 'control') -> Dict[str, Any]:
    """Control block validation - O(1) complexity"""
    errors: List[str] = []
    if not isinstance(control, dict):
        return {'valid': False, 'errors': [f'{label}: must be an object']}

    for key in control:
        if key not in QptConfig.CONTROL_KEYS:
            errors.append(f'{label}.{key}: unknown field')
    if control.get('name') not in QptConfig.ALLOWED_CONTROLS:
        errors.append(f'{label}.name: must be one of {", ".join(QptConfig.ALLOWED_CONTROLS)}')
    for key in ('lo', 'hi'):
        if not is_finite_number(control.get(key)):
            errors.append(f'{label}.{key}: must be a finite number')
    steps = control.get('steps')
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 2:
        errors.append(f'{label}.steps: must be an integer >= 2')
    elif is_finite_number(control.get('lo')) and is_finite_number(control.get('hi')) and control['hi'] < control['lo']:
        errors.append(f'{label}.hi: must not be below lo')

    return {'valid': len(errors) == 0, 'errors': errors}


def validate_config_document(document: Any) -> Dict[str, Any]:
    """Top-level config validation - O(n) in the number of fields"""
    if not isinstance(document, dict):
        return {'valid': False, 'errors': ['config: must be a JSON object'], 'field': 'config'}

    errors: List[str] = []
    field: Optional[str] = None

    def reject(name: str, message: str) -> None:
        nonlocal field
        errors.append(f'{name}: {message}')
        if field is None:
            field = name

    for key in document:
        if key not in QptConfig.CONFIG_KEYS:
            reject(key, 'unknown field')

    schema = document.get('schema', QptConfig.SCHEMA_VERSION)
    if schema != QptConfig.SCHEMA_VERSION:
        reject('schema', f'unsupported schema version {schema!r}')

    task = document.get('task')
    if task is not None and task not in QptConfig.ALLOWED_TASKS:
        reject('task', f'unknown task {task!r}')

    params = document.get('params', {})
    if not isinstance(params, dict):
        reject('params', 'must be an object')
    else:
        for key, value in params.items():
            if key not in QptConfig.PARAM_KEYS:
                reject(f'params.{key}', 'unknown field')
            elif not is_finite_number(value):
                reject(f'params.{key}', 'must be a finite number')

    for name in ('control', 'control2'):
        if document.get(name) is not None:
            result = validate_control(document[name], name)
            for message in result['errors']:
                reject(message.split(':', 1)[0], message.split(':', 1)[1].strip())

    dims = document.get('dims', 'auto')
    if dims != 'auto':
        if (not isinstance(dims, list) or not dims
                or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims)):
            reject('dims', 'must be "auto" or a list of integers')

    seed = document.get('seed', 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        reject('seed', 'must be an integer')

    if document.get('frame', 'flipped') not in QptConfig.ALLOWED_FRAMES:
        reject('frame', f'must be one of {", ".join(QptConfig.ALLOWED_FRAMES)}')
    if document.get('format', 'csv') not in QptConfig.ALLOWED_FORMATS:
        reject('format', f'must be one of {", ".join(QptConfig.ALLOWED_FORMATS)}')

    options = document.get('options', {})
    if not isinstance(options, dict):
        reject('options', 'must be an object')
    else:
        for key in options:
            if key not in QptConfig.OPTION_KEYS:
                reject(f'options.{key}', 'unknown field')

    return {'valid': len(errors) == 0, 'errors': errors, 'field': field}


def check_consistent(name: str, given: float, derived: float) -> None:
    """Raise when a dimensionless group disagrees with the physical values"""
    if not (math.isfinite(given) and math.isfinite(derived)):
        if given == derived:
            return
        raise ConfigRejectedError(
            f"params.{name}={given!r} contradicts the physical parameters (implies {derived!r})",
            field=f'params.{name}',
        )
    scale = max(abs(given), abs(derived), 1e-300)
    if abs(given - derived) > QptConfig.CONSISTENCY_RTOL * scale:
        raise ConfigRejectedError(
            f"params.{name}={given!r} contradicts the physical parameters (implies {derived!r})",
            field=f'params.{name}',
        )


###############################################################################
# ERROR SUMMARIES
# Stable public messages per failure kind
###############################################################################

def error_summary(error: BaseException) -> Dict[str, Any]:
    """Map an exception to {'kind','message','exit_code'} - O(1) complexity"""
    public_messages = {
        'invalid-dimension': 'Truncation dimension must be at least 2',
        'layout-mismatch': 'Operator does not match the Fock layout',
        'invalid-parameter': 'Model parameter outside its valid range',
        'hermiticity-violation': 'Hamiltonian is not Hermitian',
        'numeric-failure': 'Linear algebra failed to converge',
        'truncation-unresolved': 'Truncation could not be resolved within the dimension cap',
        'divergence-suspected': 'Fixed-point iteration diverged',
        'invalid-grid': 'Sweep grid is unusable for this task',
        'unsupported-direction': 'Squeezing direction must be 0 or pi',
        'invalid-regime': 'Parameters lie outside the formula validity regime',
        'config-rejected': 'Run configuration rejected',
    }

    if isinstance(error, QptError):
        summary = {
            'kind': error.kind,
            'message': str(error) or public_messages.get(error.kind, 'An error occurred'),
            'exit_code': error.exit_code,
        }
        if isinstance(error, ConfigRejectedError) and error.field:
            summary['field'] = error.field
        return summary

    return {'kind': 'internal', 'message': f'{type(error).__name__}: {error}', 'exit_code': 1}
