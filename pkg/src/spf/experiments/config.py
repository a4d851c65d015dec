"""Experiment configuration and its text file format.

Grammar (one assignment per line)::

    line    := blank | comment | assign
    comment := '#' <anything>
    assign  := key '=' literal [comment]
    key     := name ('.' name)*
    literal := int | float | string | bool | '[' literal (',' literal)* ']'

Literals use Python syntax (``1e-4``, ``"lowest-index"``, ``True``,
``[64, 96, 128]``) and are read with :func:`ast.literal_eval`. Grid axes
take either a scalar or a list; every other key takes a scalar.

Grid axes: ``m`` or ``m_factor`` (one of them), ``n1``, ``n2``, ``s1``,
``s2``, ``k``, ``xi``, ``mu``, ``nu``. ``m_factor = c`` sets
``m = ceil(c (s1 + s2) log(max(n1/s1, n2/s2)))`` per cell.

Scalar keys: ``trials_per_cell``, ``base_seed``, ``success_threshold``
(fixed threshold for every cell), ``noiseless_threshold`` (default 1e-4),
``epsilon`` (default 1e-2; noisy threshold is ``8.3 nu + epsilon``),
``measure_rip``, ``rip_trials``, ``tail`` (``"equal"``/``"gaussian"``),
``output_dir``, ``csv_name``, and ``solver.max_outer_iter``,
``solver.max_htp_iter``, ``solver.rel_change_tol``, ``solver.tie_break``.
"""
import ast
import itertools
import math
from dataclasses import dataclass, field, fields

from ..solvers import TIE_BREAK_LOWEST_INDEX, SpfConfig

__all__ = [
    "ConfigError",
    "CellParams",
    "ExperimentConfig",
    "AXES",
    "measurements_for",
    "parse_config",
    "load_config",
]

AXES = ("m", "m_factor", "n1", "n2", "s1", "s2", "k", "xi", "mu", "nu")
_INT_AXES = {"m", "n1", "n2", "s1", "s2", "k"}
_AXIS_DEFAULTS = {"k": [1], "nu": [0.0]}
_SOLVER_KEYS = {
    "max_outer_iter": int,
    "max_htp_iter": int,
    "rel_change_tol": float,
    "tie_break": str,
}


class ConfigError(ValueError):
    pass


def measurements_for(factor, n1, n2, s1, s2):
    """``ceil(factor (s1 + s2) log(max(n1/s1, n2/s2)))``."""
    return int(math.ceil(factor * (s1 + s2) * math.log(max(n1 / s1, n2 / s2))))


@dataclass(frozen=True)
class CellParams:
    m: int
    n1: int
    n2: int
    s1: int
    s2: int
    k: int = 1
    xi: float = 0.8
    mu: float = 0.8
    nu: float = 0.0


@dataclass
class ExperimentConfig:
    axes: dict
    trials_per_cell: int = 10
    base_seed: int = 0
    success_threshold: float | None = None
    noiseless_threshold: float = 1e-4
    epsilon: float = 1e-2
    measure_rip: bool = False
    rip_trials: int = 200
    tail: str = "equal"
    solver: dict = field(default_factory=dict)
    output_dir: str = "."
    csv_name: str = "results.csv"

    def __post_init__(self):
        axes = {}
        for name, values in self.axes.items():
            if name not in AXES:
                raise ConfigError(f"unknown grid axis {name!r}")
            values = list(values) if isinstance(values, (list, tuple)) else [values]
            if not values:
                raise ConfigError(f"axis {name!r} is empty")
            axes[name] = values
        if ("m" in axes) == ("m_factor" in axes):
            raise ConfigError("exactly one of 'm' and 'm_factor' must be given")
        for name in ("n1", "n2", "s1", "s2", "mu"):
            if name not in axes:
                raise ConfigError(f"missing grid axis {name!r}")
        for name, default in _AXIS_DEFAULTS.items():
            axes.setdefault(name, list(default))
        for name in _INT_AXES & axes.keys():
            if any(not isinstance(v, int) or isinstance(v, bool) for v in axes[name]):
                raise ConfigError(f"axis {name!r} must hold integers")
        self.axes = axes
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be at least 1")
        for name in ("noiseless_threshold", "epsilon"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.success_threshold is not None and self.success_threshold <= 0:
            raise ConfigError("success_threshold must be positive")
        for key in self.solver:
            if key not in _SOLVER_KEYS:
                raise ConfigError(f"unknown solver option {key!r}")
        try:
            SpfConfig(1, 1, **self.solver)
        except ValueError as exc:
            raise ConfigError(f"invalid solver options: {exc}") from exc
        if self.tail not in ("equal", "gaussian"):
            raise ConfigError(f"tail must be 'equal' or 'gaussian', got {self.tail!r}")

    def threshold_for(self, nu):
        if self.success_threshold is not None:
            return self.success_threshold
        if nu == 0:
            return self.noiseless_threshold
        return 8.3 * nu + self.epsilon

    def solver_options(self):
        opts = {"tie_break": TIE_BREAK_LOWEST_INDEX}
        opts.update(self.solver)
        return opts

    def cells(self):
        """Grid cells in canonical (lexicographic, axis-declaration) order."""
        names = [a for a in AXES if a in self.axes]
        out = []
        for combo in itertools.product(*(self.axes[a] for a in names)):
            values = dict(zip(names, combo))
            if "xi" not in values:
                values["xi"] = values["mu"]
            for name in ("xi", "mu", "nu"):
                values[name] = float(values[name])
            factor = values.pop("m_factor", None)
            if factor is not None:
                values["m"] = measurements_for(
                    factor, values["n1"], values["n2"], values["s1"], values["s2"]
                )
            out.append(CellParams(**values))
        return out

    def varying_axes(self):
        return [a for a in AXES if len(self.axes.get(a, ())) > 1]


_SCALAR_KEYS = {
    f.name: f for f in fields(ExperimentConfig) if f.name not in ("axes", "solver")
}


def parse_config(text, source="<config>"):
    axes, solver, scalars = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = _strip_comment(value).strip()
        try:
            parsed = ast.literal_eval(value)
        except (ValueError, SyntaxError) as exc:
            raise ConfigError(f"{source}:{lineno}: cannot parse value {value!r}") from exc
        if key in AXES:
            axes[key] = parsed
        elif key.startswith("solver."):
            name = key[len("solver."):]
            if name not in _SOLVER_KEYS:
                raise ConfigError(f"{source}:{lineno}: unknown solver option {name!r}")
            solver[name] = _SOLVER_KEYS[name](parsed)
        elif key in _SCALAR_KEYS:
            if isinstance(parsed, list):
                raise ConfigError(f"{source}:{lineno}: {key!r} takes a scalar")
            scalars[key] = parsed
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    try:
        return ExperimentConfig(axes=axes, solver=solver, **scalars)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _strip_comment(value):
    # '#' inside a quoted string is kept
    quote = None
    for i, ch in enumerate(value):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            return value[:i]
    return value


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))
