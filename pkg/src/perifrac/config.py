"""Flat key-value run configuration.

Format: UTF-8 text, one `section.key = value` per line, '#' comments, blank
lines ignored.  Values are ints, floats, booleans (true/false), the literal
string "auto" (for problem.lambda and solver.rho), or bare strings.
serialize(parse(text)) is idempotent.

Sections and keys:

    problem.s .m .gamma .lambda .T .N
    discretization.M .grid_points
    nonlinearity.key .a1 .a2 .q .alpha .r0      (params optional: registry
                                                 defaults apply when absent)
    solver.<any SolverConfig field>, with solver.rho also accepting "auto"
    verify.inject_theta_fault
    command                                      (optional echo/default)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dataclass_fields

from .solvers import SolverConfig
from .spectral import ProblemSpec, SpectrumParams
from .variational import Nonlinearity, get_nonlinearity

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config",
           "load_config", "default_example_text", "AUTO"]

AUTO = "auto"

_COMMANDS = ("constants", "solve", "verify", "reproduce-example")

_SOLVER_FIELDS = {f.name: f.type for f in dataclass_fields(SolverConfig)}

_BOOL_WORDS = {"true": True, "false": False}


class ConfigError(ValueError):
    """Malformed configuration; the message carries the offending line or
    field and the violated constraint."""


def _parse_value(raw: str):
    word = raw.strip()
    low = word.lower()
    if low in _BOOL_WORDS:
        return _BOOL_WORDS[low]
    if low == AUTO:
        return AUTO
    try:
        return int(word)
    except ValueError:
        pass
    try:
        return float(word)
    except ValueError:
        pass
    return word


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class RunConfig:
    # problem block
    s: float = 0.75
    m: float = 1.0
    gamma: float = 0.5
    lam: float | str = AUTO
    T: float = 2.0 * math.pi
    N: int = 2
    # discretization block
    modes: int = 8
    grid_points: int = 32
    # nonlinearity block
    nonlinearity_key: str = "cubic_plus_one"
    nl_overrides: dict = field(default_factory=dict)   # a1/a2/q/alpha/r0
    # solver block (raw values; rho may be "auto")
    solver_values: dict = field(default_factory=dict)
    # verification block
    inject_theta_fault: float = 0.0
    # optional command echo
    command: str = ""

    # -- builders ---------------------------------------------------------

    def problem(self, lam: float | None = None) -> ProblemSpec:
        """Realize the ProblemSpec; an explicit lam resolves 'auto'."""
        value = lam if lam is not None else self.lam
        if value == AUTO:
            raise ConfigError(
                "problem.lambda is 'auto' and no resolved value was supplied"
            )
        try:
            return ProblemSpec(s=self.s, m=self.m, gamma=self.gamma,
                               lam=float(value), T=self.T, N=self.N)
        except ValueError as exc:
            raise ConfigError(f"problem block invalid: {exc}") from exc

    def params(self, modes: int | None = None,
               grid_points: int | None = None) -> SpectrumParams:
        M = self.modes if modes is None else modes
        n = self.grid_points if grid_points is None else grid_points
        try:
            return SpectrumParams(M, n)
        except ValueError as exc:
            raise ConfigError(f"discretization block invalid: {exc}") from exc

    def nonlinearity(self) -> Nonlinearity:
        try:
            return get_nonlinearity(self.nonlinearity_key, **self.nl_overrides)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"nonlinearity block invalid: {exc}") from exc

    def solver(self, rho: float | None = None, seed: int | None = None) -> SolverConfig:
        """Realize the SolverConfig; an explicit rho resolves 'auto'."""
        values = dict(self.solver_values)
        raw_rho = values.get("rho", AUTO)
        if rho is not None:
            values["rho"] = float(rho)
        elif raw_rho == AUTO:
            raise ConfigError("solver.rho is 'auto' and no resolved value "
                              "was supplied")
        if seed is not None:
            values["seed"] = int(seed)
        try:
            return SolverConfig(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"solver block invalid: {exc}") from exc

    @property
    def rho_raw(self):
        return self.solver_values.get("rho", AUTO)

    @property
    def seed(self) -> int:
        return int(self.solver_values.get("seed", 0))

    # -- flat mapping ------------------------------------------------------

    def to_mapping(self) -> dict:
        out = {
            "problem.s": self.s,
            "problem.m": self.m,
            "problem.gamma": self.gamma,
            "problem.lambda": self.lam,
            "problem.T": self.T,
            "problem.N": self.N,
            "discretization.M": self.modes,
            "discretization.grid_points": self.grid_points,
            "nonlinearity.key": self.nonlinearity_key,
            "verify.inject_theta_fault": self.inject_theta_fault,
        }
        for k, v in self.nl_overrides.items():
            out[f"nonlinearity.{k}"] = v
        defaults = SolverConfig()
        for f in dataclass_fields(SolverConfig):
            out[f"solver.{f.name}"] = self.solver_values.get(
                f.name, AUTO if f.name == "rho" else getattr(defaults, f.name))
        if self.command:
            out["command"] = self.command
        return out


def _require_number(key: str, value, integer: bool = False):
    if isinstance(value, bool) or isinstance(value, str):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; raises ConfigError with a line/field
    diagnostic on any violation (unknown key, bad type, bad constraint)."""
    cfg = RunConfig()
    seen: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got "
                              f"{raw_line.strip()!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        value = _parse_value(raw_value)
        if key in seen:
            raise ConfigError(
                f"line {lineno}: duplicate key {key!r} (first set on line "
                f"{seen[key]})")
        seen[key] = lineno
        try:
            _apply(cfg, key, value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    _validate(cfg)
    return cfg


def _apply(cfg: RunConfig, key: str, value) -> None:
    if key == "problem.s":
        cfg.s = _require_number(key, value)
    elif key == "problem.m":
        cfg.m = _require_number(key, value)
    elif key == "problem.gamma":
        cfg.gamma = _require_number(key, value)
    elif key == "problem.lambda":
        cfg.lam = value if value == AUTO else _require_number(key, value)
    elif key == "problem.T":
        cfg.T = _require_number(key, value)
    elif key == "problem.N":
        cfg.N = _require_number(key, value, integer=True)
    elif key == "discretization.M":
        cfg.modes = _require_number(key, value, integer=True)
    elif key == "discretization.grid_points":
        cfg.grid_points = _require_number(key, value, integer=True)
    elif key == "nonlinearity.key":
        if not isinstance(value, str):
            raise ConfigError(f"nonlinearity.key must be a registry name, "
                              f"got {value!r}")
        cfg.nonlinearity_key = value
    elif key.startswith("nonlinearity."):
        name = key.split(".", 1)[1]
        if name not in ("a1", "a2", "q", "alpha", "r0"):
            raise ConfigError(f"unknown configuration key {key!r}")
        cfg.nl_overrides[name] = _require_number(key, value)
    elif key.startswith("solver."):
        name = key.split(".", 1)[1]
        if name not in _SOLVER_FIELDS:
            raise ConfigError(f"unknown configuration key {key!r}")
        if name == "rho" and value == AUTO:
            cfg.solver_values["rho"] = AUTO
        elif name == "polish":
            if not isinstance(value, bool):
                raise ConfigError(f"solver.polish must be true or false, "
                                  f"got {value!r}")
            cfg.solver_values["polish"] = value
        elif name in ("max_iter", "path_points", "max_halvings",
                      "max_doublings", "polish_every", "polish_max_steps",
                      "seed", "sigma_starts"):
            cfg.solver_values[name] = _require_number(key, value, integer=True)
        else:
            cfg.solver_values[name] = _require_number(key, value)
    elif key == "verify.inject_theta_fault":
        cfg.inject_theta_fault = _require_number(key, value)
    elif key == "command":
        if value not in _COMMANDS:
            raise ConfigError(f"command must be one of {_COMMANDS}, got "
                              f"{value!r}")
        cfg.command = value
    else:
        raise ConfigError(f"unknown configuration key {key!r}")


def _validate(cfg: RunConfig) -> None:
    if not (0.0 < cfg.s < 1.0):
        raise ConfigError(f"problem.s = {cfg.s!r} violates 0 < s < 1")
    if cfg.m <= 0.0:
        raise ConfigError(f"problem.m = {cfg.m!r} violates m > 0")
    threshold = cfg.m ** (2.0 * cfg.s)
    if not (0.0 <= cfg.gamma < threshold):
        raise ConfigError(
            f"problem.gamma = {cfg.gamma!r} violates the constraint "
            f"0 <= gamma < m^(2s) = {threshold!r}"
        )
    if cfg.lam != AUTO and cfg.lam <= 0.0:
        raise ConfigError(f"problem.lambda = {cfg.lam!r} violates lambda > 0 "
                          f"(or 'auto')")
    if cfg.T <= 0.0:
        raise ConfigError(f"problem.T = {cfg.T!r} violates T > 0")
    if cfg.N < 1 or cfg.N > 3:
        raise ConfigError(f"problem.N = {cfg.N!r} must be 1, 2, or 3")
    if cfg.N <= 2.0 * cfg.s:
        raise ConfigError(f"problem.N = {cfg.N!r} violates N > 2s "
                          f"(s = {cfg.s!r})")
    if cfg.modes < 0:
        raise ConfigError(f"discretization.M = {cfg.modes!r} must be >= 0")
    if cfg.grid_points < 2 * cfg.modes + 1:
        raise ConfigError(
            f"discretization.grid_points = {cfg.grid_points!r} must be at "
            f"least 2M+1 = {2 * cfg.modes + 1}"
        )
    rho = cfg.solver_values.get("rho", AUTO)
    if rho != AUTO and rho <= 0.0:
        raise ConfigError(f"solver.rho = {rho!r} violates rho > 0 (or 'auto')")
    # realize the blocks that do not depend on auto values, so bad numbers
    # surface at parse time with their constraint text
    cfg.nonlinearity()
    if rho != AUTO:
        cfg.solver()
    else:
        cfg.solver(rho=1.0)


def serialize_config(cfg: RunConfig) -> str:
    mapping = cfg.to_mapping()
    lines = [f"{k} = {_format_value(v)}" for k, v in sorted(mapping.items())]
    return "\n".join(lines) + "\n"


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    return parse_config(text)


def default_example_text() -> str:
    """The benchmark configuration: quartic forcing 1 + t^3 on the
    two-dimensional torus of period 2*pi, s = 3/4, unit mass, gamma at half
    the spectral gap, lambda and rho resolved automatically."""
    return serialize_config(RunConfig())
