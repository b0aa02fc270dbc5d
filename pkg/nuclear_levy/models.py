"""JSON schemas, run configuration and reference presets."""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypeAlias

from .char_func import CharTriplet, CovarianceForm
from .const import (
    CONF_CF,
    CONF_OUTPUT_DIR,
    CONF_SIM,
    CONF_TESTS,
    CONF_TRIPLET,
    DEFAULT_BLOCK_SIZE,
    DEFAULT_SHELLS,
    DEFAULT_WORKERS,
)
from .exceptions import ConfigError
from .levy_measure import Atom, AtomicAxis, AxisPart, LevyMeasureSpec, PowerLawAxis, Region
from .sequence_space import DualPoint, TestFunction
from .simulate import SimConfig
from .verify import probe_functions

LOG = logging.getLogger(__name__)

JSON: TypeAlias = dict[str, Any]

# parameters accepted by each test selector
TEST_PARAMS: dict[str, frozenset[str]] = {
    'ecf': frozenset({'t', 'phis', 'exponent_scale'}),
    'moments': frozenset({'t', 'phis', 'variance_scale'}),
    'independence': frozenset({'pairs', 'phi', 'psi', 't'}),
    'semigroup': frozenset({'s', 't', 'phis', 'level'}),
    'infdiv': frozenset({'n', 'phis', 'level'}),
    'jump_count': frozenset({'region', 't', 'intensity_scale', 'other', 'level'}),
    'fernique': frozenset({'p', 'eps', 'n_list', 'phis'}),
    'minlos': frozenset({'mu', 'p', 'q', 'eps'}),
    'small_ball': frozenset({'phis'}),
    'poisson_domination': frozenset({'regions', 'phis'}),
}

DEFAULT_SUITE = (
    'ecf',
    'moments',
    'independence',
    'semigroup',
    'infdiv',
    'jump_count',
    'small_ball',
    'poisson_domination',
)

DEFAULT_PAIRS = (
    ('wiener', 'small'),
    ('wiener', 'large'),
    ('small', 'large'),
    ('levy_minus_large', 'large'),
)
DEFAULT_PROBES = 20
DEFAULT_CF_TIMES = (0.0, 0.5, 1.0)
AXIS_KEYS = frozenset({'n', 'kind', 'c', 'alpha', 'xmax', 'side', 'atoms'})


def _check_keys(obj: Any, allowed: set[str] | frozenset[str], where: str) -> JSON:
    if not isinstance(obj, dict):
        raise ConfigError(f'{where} must be a JSON object')
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f'Unknown keys in {where}: {sorted(unknown)}')
    return obj


def _require(obj: JSON, key: str, where: str) -> Any:
    if key not in obj:
        raise ConfigError(f"Missing '{key}' in {where}")
    return obj[key]


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(f'{where} must be a number, got {value!r}')
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f'{where} must be an integer, got {value!r}')
    return value


def _array(value: Any, where: str) -> list[Any]:
    if not isinstance(value, list):
        raise ConfigError(f'{where} must be an array, got {value!r}')
    return value


def _string(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f'{where} must be a string, got {value!r}')
    return value


def _vector(value: Any, where: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f'{where} must be a non-empty array of numbers')
    return [_number(x, where) for x in value]


def measure_from_json(data: Any, dim: int) -> LevyMeasureSpec:
    """Parse {"atoms": [...], "axes": [...]} into a LevyMeasureSpec."""
    data = _check_keys(data, {'atoms', 'axes'}, 'levy')
    if not isinstance(data.get('atoms', []), list) or not isinstance(data.get('axes', []), list):
        raise ConfigError('levy atoms and axes must be arrays')
    atoms = []
    for item in data.get('atoms', []):
        item = _check_keys(item, {'point', 'mass'}, 'levy atom')
        atoms.append(
            Atom(
                point=DualPoint(_vector(_require(item, 'point', 'levy atom'), 'atom point')),
                mass=_number(_require(item, 'mass', 'levy atom'), 'atom mass'),
            )
        )
    axes: list[AxisPart] = []
    for item in data.get('axes', []):
        item = _check_keys(item, AXIS_KEYS, 'axis')
        kind = _require(item, 'kind', 'axis')
        n = _integer(_require(item, 'n', 'axis'), 'axis n')
        if kind == 'power':
            _check_keys(item, {'n', 'kind', 'c', 'alpha', 'xmax', 'side'}, 'power axis')
            axes.append(
                PowerLawAxis(
                    n=n,
                    c=_number(_require(item, 'c', 'power axis'), 'axis c'),
                    alpha=_number(_require(item, 'alpha', 'power axis'), 'axis alpha'),
                    x_max=_number(_require(item, 'xmax', 'power axis'), 'axis xmax'),
                    side=_string(item.get('side', 'positive'), 'axis side'),
                )
            )
        elif kind == 'atoms':
            _check_keys(item, {'n', 'kind', 'atoms'}, 'atomic axis')
            pairs = _require(item, 'atoms', 'atomic axis')
            if not isinstance(pairs, list) or any(
                not isinstance(p, list) or len(p) != 2 for p in pairs
            ):
                raise ConfigError('atomic axis atoms must be [[x, c], ...]')
            axes.append(
                AtomicAxis(
                    n=n,
                    atoms=tuple(
                        (_number(x, 'axis atom'), _number(c, 'axis atom')) for x, c in pairs
                    ),
                )
            )
        else:
            raise ConfigError(f"Unknown axis kind '{kind}'. Supported: ['power', 'atoms']")
    return LevyMeasureSpec(dim=dim, atoms=tuple(atoms), axes=tuple(axes))


def measure_to_json(nu: LevyMeasureSpec) -> JSON:
    axes: list[JSON] = []
    for axis in nu.axes:
        if isinstance(axis, PowerLawAxis):
            axes.append(
                {
                    'n': axis.n,
                    'kind': 'power',
                    'c': axis.c,
                    'alpha': axis.alpha,
                    'xmax': axis.x_max,
                    'side': axis.side,
                }
            )
        else:
            axes.append({'n': axis.n, 'kind': 'atoms', 'atoms': [[x, c] for x, c in axis.atoms]})
    return {
        'atoms': [{'point': a.point.to_list(), 'mass': a.mass} for a in nu.atoms],
        'axes': axes,
    }


def region_from_json(data: Any) -> Region:
    """Parse {"kind": ..., "r": ..., radius | lo/hi} into a Region."""
    data = _check_keys(data, {'kind', 'r', 'radius', 'lo', 'hi'}, 'region')
    kind = _require(data, 'kind', 'region')
    r = _number(data.get('r', 0.0), 'region r')
    if kind == 'ball':
        return Region.ball(_number(_require(data, 'radius', 'region'), 'radius'), r)
    if kind == 'complement':
        return Region.complement(_number(_require(data, 'radius', 'region'), 'radius'), r)
    if kind == 'shell':
        lo = _number(_require(data, 'lo', 'region'), 'lo')
        return Region.shell(lo, _number(_require(data, 'hi', 'region'), 'hi'), r)
    if kind == 'whole':
        return Region.whole(r)
    raise ConfigError(f"Unknown region kind '{kind}'")


def region_to_json(region: Region) -> JSON:
    if region.kind in ('ball', 'complement'):
        return {'kind': region.kind, 'r': region.r, 'radius': region.radius}
    if region.kind == 'shell':
        return {'kind': 'shell', 'r': region.r, 'lo': region.lo, 'hi': region.hi}
    return {'kind': region.kind, 'r': region.r}


def triplet_from_json(data: Any) -> CharTriplet:
    """Parse {"mean", "cov", "levy", "r"} into a validated CharTriplet."""
    data = _check_keys(data, {'mean', 'cov', 'levy', 'r'}, 'triplet')
    mean = DualPoint(_vector(_require(data, 'mean', 'triplet'), 'mean'))
    cov_rows = _require(data, 'cov', 'triplet')
    if not isinstance(cov_rows, list):
        raise ConfigError('cov must be a matrix (array of rows)')
    cov = CovarianceForm([_vector(row, 'cov row') for row in cov_rows])
    levy = measure_from_json(data.get('levy', {}), mean.dim)
    return CharTriplet(mean=mean, cov=cov, levy=levy, r=_number(data.get('r', 0.0), 'r'))


def triplet_to_json(triplet: CharTriplet) -> JSON:
    return {
        'mean': triplet.mean.to_list(),
        'cov': triplet.cov.to_list(),
        'levy': measure_to_json(triplet.levy),
        'r': triplet.r,
    }


SIM_KEYS = {
    'horizon',
    'grid_dt',
    'shells',
    'dim',
    'master_seed',
    'replicas',
    'block_size',
    'workers',
}


def sim_from_json(data: Any, dim: int) -> SimConfig:
    data = _check_keys(data, SIM_KEYS, 'sim')
    sim_dim = _integer(data.get('dim', dim), 'sim dim')
    if sim_dim != dim:
        raise ConfigError(f'sim dim {sim_dim} disagrees with triplet dim {dim}')
    return SimConfig(
        horizon=_number(_require(data, 'horizon', 'sim'), 'horizon'),
        grid_dt=_number(_require(data, 'grid_dt', 'sim'), 'grid_dt'),
        shells=_integer(data.get('shells', DEFAULT_SHELLS), 'shells'),
        dim=sim_dim,
        master_seed=_integer(_require(data, 'master_seed', 'sim'), 'master_seed'),
        replicas=_integer(_require(data, 'replicas', 'sim'), 'replicas'),
        block_size=_integer(data.get('block_size', DEFAULT_BLOCK_SIZE), 'block_size'),
        workers=_integer(data.get('workers', DEFAULT_WORKERS), 'workers'),
    )


def sim_to_json(cfg: SimConfig) -> JSON:
    return {
        'horizon': cfg.horizon,
        'grid_dt': cfg.grid_dt,
        'shells': cfg.shells,
        'dim': cfg.dim,
        'master_seed': cfg.master_seed,
        'replicas': cfg.replicas,
        'block_size': cfg.block_size,
        'workers': cfg.workers,
    }


@dataclass
class TestSelector:
    """One requested test with its raw JSON parameters."""

    __test__ = False  # keep pytest from collecting this class

    name: str
    params: JSON = field(default_factory=dict)


def selector_from_json(data: Any) -> TestSelector:
    if isinstance(data, str):
        data = {'name': data}
    if not isinstance(data, dict):
        raise ConfigError('test selector must be a name or an object')
    name = _require(data, 'name', 'test selector')
    if name not in TEST_PARAMS:
        raise ConfigError(f"Unknown test '{name}'. Supported: {list(TEST_PARAMS)}")
    params = {k: v for k, v in data.items() if k != 'name'}
    _check_keys(params, TEST_PARAMS[name], f'test {name}')
    return TestSelector(name=name, params=params)


def selector_to_json(selector: TestSelector) -> JSON:
    return {'name': selector.name, **selector.params}


@dataclass
class CfGrid:
    """Test functions and times evaluated by the cf command."""

    phis: list[TestFunction]
    times: list[float]


def cf_grid_from_json(data: Any, dim: int) -> CfGrid:
    data = _check_keys(data, {'phis', 'times'}, 'cf')
    phis = (
        [TestFunction(_vector(row, 'cf phi')) for row in _array(data['phis'], 'cf phis')]
        if 'phis' in data
        else probe_functions(dim, DEFAULT_PROBES)
    )
    raw_times = _array(data.get('times', list(DEFAULT_CF_TIMES)), 'cf times')
    times = [_number(t, 'cf time') for t in raw_times]
    return CfGrid(phis=phis, times=times)


def cf_grid_to_json(grid: CfGrid) -> JSON:
    return {'phis': [phi.to_list() for phi in grid.phis], 'times': list(grid.times)}


@dataclass
class RunConfig:
    """Parsed run configuration: triplet, simulation, tests, CF grid and output dir."""

    triplet: CharTriplet
    sim: SimConfig
    tests: list[TestSelector]
    cf: CfGrid
    output_dir: str | None = None


RUN_KEYS = {CONF_TRIPLET, CONF_SIM, CONF_TESTS, CONF_CF, CONF_OUTPUT_DIR}


def run_config_from_json(data: Any) -> RunConfig:
    """Parse a full run config; a missing tests key selects the default suite."""
    data = _check_keys(data, RUN_KEYS, 'config')
    triplet = triplet_from_json(_require(data, CONF_TRIPLET, 'config'))
    sim = sim_from_json(_require(data, CONF_SIM, 'config'), triplet.dim)
    raw_tests = data.get(CONF_TESTS, list(DEFAULT_SUITE))
    if not isinstance(raw_tests, list):
        raise ConfigError('tests must be an array')
    output_dir = data.get(CONF_OUTPUT_DIR)
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError('output_dir must be a string')
    return RunConfig(
        triplet=triplet,
        sim=sim,
        tests=[selector_from_json(item) for item in raw_tests],
        cf=cf_grid_from_json(data.get(CONF_CF, {}), triplet.dim),
        output_dir=output_dir,
    )


def run_config_to_json(config: RunConfig) -> JSON:
    data: JSON = {
        CONF_TRIPLET: triplet_to_json(config.triplet),
        CONF_SIM: sim_to_json(config.sim),
        CONF_TESTS: [selector_to_json(s) for s in config.tests],
        CONF_CF: cf_grid_to_json(config.cf),
    }
    if config.output_dir is not None:
        data[CONF_OUTPUT_DIR] = config.output_dir
    return data


def load_run_config(path: str | Path) -> RunConfig:
    """Read and parse a JSON run config file."""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as err:
        raise ConfigError(f'Cannot read config {path}: {err}') from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f'Malformed JSON in {path}: {err}') from err
    config = run_config_from_json(data)
    LOG.info(f'Loaded config {path}: D={config.triplet.dim}, N={config.sim.replicas}')
    return config


def _phis(params: JSON, key: str, dim: int) -> list[TestFunction]:
    if key not in params:
        return probe_functions(dim, DEFAULT_PROBES)
    return [TestFunction(_vector(row, key)) for row in _array(params[key], key)]


def selector_kwargs(selector: TestSelector, triplet: CharTriplet, sim: SimConfig) -> JSON:
    """Turn a selector's JSON params into keyword arguments for its verify function."""
    params = selector.params
    dim = triplet.dim
    r = triplet.r
    name = selector.name
    t = _number(params.get('t', sim.horizon), 't')

    if name in ('ecf', 'moments'):
        scale_key = 'exponent_scale' if name == 'ecf' else 'variance_scale'
        return {
            'triplet': triplet,
            't': t,
            'phis': _phis(params, 'phis', dim),
            'cfg': sim,
            scale_key: _number(params.get(scale_key, 1.0), scale_key),
        }
    if name == 'independence':
        probes = probe_functions(dim, 2)
        pairs = params.get('pairs', [list(p) for p in DEFAULT_PAIRS])
        if not isinstance(pairs, list) or any(
            not isinstance(p, list) or len(p) != 2 for p in pairs
        ):
            raise ConfigError('pairs must be [[a, b], ...]')
        return {
            'triplet': triplet,
            'pairs': [(str(a), str(b)) for a, b in pairs],
            'phi': TestFunction(_vector(params['phi'], 'phi')) if 'phi' in params else probes[0],
            'psi': TestFunction(_vector(params['psi'], 'psi')) if 'psi' in params else probes[1],
            'cfg': sim,
            't': t,
        }
    if name == 'semigroup':
        kwargs: JSON = {
            'triplet': triplet,
            's': _number(params.get('s', 0.3), 's'),
            't': _number(params.get('t', 0.7), 't'),
            'phis': _phis(params, 'phis', dim),
            'cfg': sim,
        }
        if 'level' in params:
            kwargs['level'] = _number(params['level'], 'level')
        return kwargs
    if name == 'infdiv':
        kwargs = {
            'triplet': triplet,
            'n': _integer(params.get('n', 4), 'n'),
            'phis': _phis(params, 'phis', dim),
            'cfg': sim,
        }
        if 'level' in params:
            kwargs['level'] = _number(params['level'], 'level')
        return kwargs
    if name == 'jump_count':
        region = region_from_json(params.get('region', region_to_json(Region.complement(1.0, r))))
        kwargs = {
            'triplet': triplet,
            'region': region,
            't': t,
            'cfg': sim,
            'intensity_scale': _number(params.get('intensity_scale', 1.0), 'intensity_scale'),
            'other': region_from_json(params['other']) if 'other' in params else None,
        }
        if 'level' in params:
            kwargs['level'] = _number(params['level'], 'level')
        return kwargs
    if name == 'fernique':
        n_list = params.get('n_list', [1, 2, 4, 8])
        if not isinstance(n_list, list):
            raise ConfigError('n_list must be an array of integers')
        return {
            'triplet': triplet,
            'p': _number(params.get('p', r), 'p'),
            'eps': _number(params.get('eps', 0.25), 'eps'),
            'n_list': [_integer(n, 'n_list') for n in n_list],
            'phis': _phis(params, 'phis', dim),
        }
    if name == 'minlos':
        mu = measure_from_json(params['mu'], dim) if 'mu' in params else triplet.levy
        p = _number(params.get('p', r), 'p')
        return {
            'mu': mu,
            'p': p,
            'q': _number(params.get('q', p + 1.0), 'q'),
            'eps': _number(params.get('eps', 0.25), 'eps'),
            'dim': dim,
        }
    if name == 'small_ball':
        return {'nu': triplet.levy, 'r': r, 'phis': _phis(params, 'phis', dim)}
    # poisson_domination
    default_regions = [Region.complement(1.0, r), Region.shell(0.5, 1.0, r)]
    regions = params.get('regions')
    return {
        'triplet': triplet,
        'regions': default_regions
        if regions is None
        else [region_from_json(item) for item in _array(regions, 'regions')],
        'phis': _phis(params, 'phis', dim),
    }


def _diag_cov(dim: int, decay: float) -> list[list[float]]:
    return [[(1.0 + i) ** -decay if i == j else 0.0 for j in range(dim)] for i in range(dim)]


def _basis(n: int, dim: int, scale: float = 1.0) -> list[float]:
    return [scale if i == n else 0.0 for i in range(dim)]


REFERENCE_DIM = 8
SMALL_DIM = 4

# reference presets, JSON run configs
REFERENCE_CONFIGS: dict[str, JSON] = {
    'reference': {
        CONF_TRIPLET: {
            'mean': _basis(0, REFERENCE_DIM),
            'cov': _diag_cov(REFERENCE_DIM, 2.0),
            'levy': {
                'atoms': [{'point': _basis(1, REFERENCE_DIM, 2.0), 'mass': 1.0}],
                'axes': [{'n': 0, 'kind': 'power', 'c': 1.0, 'alpha': 0.5, 'xmax': 1.0}],
            },
            'r': 0.0,
        },
        CONF_SIM: {
            'horizon': 1.0,
            'grid_dt': 0.1,
            'shells': DEFAULT_SHELLS,
            'master_seed': 20240611,
            'replicas': 100_000,
            'workers': 4,
        },
    },
    'gaussian': {
        CONF_TRIPLET: {
            'mean': [0.0] * SMALL_DIM,
            'cov': _diag_cov(SMALL_DIM, 1.0),
            'r': 0.0,
        },
        CONF_SIM: {
            'horizon': 1.0,
            'grid_dt': 0.1,
            'shells': 4,
            'master_seed': 7,
            'replicas': 20_000,
        },
    },
    'atomic': {
        CONF_TRIPLET: {
            'mean': [0.0] * SMALL_DIM,
            'cov': _diag_cov(SMALL_DIM, 2.0),
            'levy': {
                'atoms': [
                    {'point': _basis(0, SMALL_DIM, 0.6), 'mass': 2.0},
                    {'point': _basis(2, SMALL_DIM, 3.0), 'mass': 1.5},
                ],
                'axes': [{'n': 1, 'kind': 'atoms', 'atoms': [[0.3, 1.0], [-0.2, 2.0]]}],
            },
            'r': 0.0,
        },
        CONF_SIM: {
            'horizon': 1.0,
            'grid_dt': 0.25,
            'shells': 6,
            'master_seed': 11,
            'replicas': 20_000,
        },
    },
    'zero': {
        CONF_TRIPLET: {
            'mean': [0.0] * SMALL_DIM,
            'cov': [[0.0] * SMALL_DIM for _ in range(SMALL_DIM)],
            'r': 0.0,
        },
        CONF_SIM: {
            'horizon': 1.0,
            'grid_dt': 0.5,
            'shells': 2,
            'master_seed': 0,
            'replicas': 1_000,
        },
    },
}

SUPPORTED_PRESETS = list(REFERENCE_CONFIGS.keys())


def get_reference_config(name: str) -> JSON:
    """Get a copy of a preset run config."""
    if name not in REFERENCE_CONFIGS:
        raise ValueError(f"Unsupported preset '{name}'. Supported: {SUPPORTED_PRESETS}")
    return copy.deepcopy(REFERENCE_CONFIGS[name])
