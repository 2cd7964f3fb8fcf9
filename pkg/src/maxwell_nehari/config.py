"""Run configuration: an INI-style document with flat sections.

Grammar (every key is optional unless marked *)::

    [run]
    command* = eigs | ground | symmetric | check-nonlinearity | oracle
    seed = 0

    [domain]
    type* = box | cylinder
    edges = pi, pi, pi          # box; numbers or multiples of pi ("2pi", "0.5 pi")
    cutoff = 6.5                # box
    modes = 1 1 0; 1 0 1        # box; restrict to these divergence-free modes
    gradient_modes = 1 1 1      # box; gradient modes kept once modes/gradient_modes restrict the basis
    R = pi                      # cylinder
    H = pi                      # cylinder
    Nr = 16                     # cylinder
    Nz = 16                     # cylinder

    [model]
    lambda = 0                  # or the four physics keys below (not both)
    eps = 1
    mu = 1
    omega = 1
    kerr = 1                    # Kerr coefficient alpha(x) (constant)

    [nonlinearity]
    family = power | expression
    p = 4                       # power
    gamma = 1 | step(axis, threshold, low, high) | gaussian(base, amp, c1, c2, c3, width)
    M = 1, 1, 1                 # diagonal, or nine entries row by row
    expression = 0.25*s**4      # sympy expression in u1..u3, x1..x3, s = |u|

    [solver]
    tol_inner, tol_outer, max_inner_iters, max_outer_iters, restarts, threads, sectors

    [output]
    vtk_resolution = 24

Unknown sections or keys are errors, reported with their line and column.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import RegimeError

COMMANDS = ("eigs", "ground", "symmetric", "check-nonlinearity", "oracle")

SCHEMA = {
    "run": {"command", "seed"},
    "domain": {"type", "edges", "cutoff", "modes", "gradient_modes", "R", "H", "Nr", "Nz"},
    "model": {"lambda", "eps", "mu", "omega", "kerr"},
    "nonlinearity": {"family", "p", "gamma", "M", "expression"},
    "solver": {"tol_inner", "tol_outer", "max_inner_iters", "max_outer_iters", "restarts", "threads", "sectors"},
    "output": {"vtk_resolution"},
}


class ConfigError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class ConfigRefusal(ConfigError, RegimeError):
    """A well-formed config asking for a regime the tools refuse."""


@dataclass(frozen=True)
class DomainConfig:
    type: str
    edges: tuple = (math.pi, math.pi, math.pi)
    cutoff: float = 6.5
    modes: tuple | None = None
    gradient_modes: tuple | None = None
    R: float = math.pi
    H: float = math.pi
    Nr: int = 16
    Nz: int = 16


@dataclass(frozen=True)
class ModelConfig:
    lam: float = 0.0
    physics: tuple | None = None  # (eps, mu, omega, kerr)


@dataclass(frozen=True)
class NonlinearityConfig:
    family: str = "power"
    p: float = 4.0
    gamma: str = "1"
    M: tuple = (1.0, 1.0, 1.0)
    expression: str | None = None


@dataclass(frozen=True)
class SolverOptions:
    tol_inner: float = 1e-10
    tol_outer: float = 1e-7
    max_inner_iters: int = 200
    max_outer_iters: int = 2000
    restarts: int = 4
    threads: int = 1
    sectors: tuple = ("even", "odd", "all")


@dataclass(frozen=True)
class RunConfig:
    command: str
    domain: DomainConfig
    model: ModelConfig = ModelConfig()
    nonlinearity: NonlinearityConfig = NonlinearityConfig()
    solver: SolverOptions = SolverOptions()
    vtk_resolution: int = 24
    seed: int = 0
    source: str = field(default="", compare=False)

    def echo(self):
        d = asdict(self)
        d.pop("source")
        d["model"]["lambda_effective"] = self.lam
        return d

    @property
    def lam(self):
        if self.model.physics is not None:
            from .nonlinearity import kerr_from_physics

            return kerr_from_physics(*self.model.physics)[1]
        return self.model.lam


# -- scanning ------------------------------------------------------------------


def _locate(text):
    """(section, key) -> (line, column) of the key, 1-based."""
    where, section = {}, None
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        if s.startswith("["):
            section = s.strip("[]").strip()
            where[(section, None)] = (n, raw.index("[") + 1)
            continue
        m = re.match(r"\s*([^=:\s]+)\s*[=:]", raw)
        if m and section is not None:
            where[(section, m.group(1))] = (n, m.start(1) + 1)
    return where


_PI = re.compile(r"^\s*([-+]?[0-9.eE+-]*)\s*\*?\s*pi\s*$")


def parse_number(s):
    s = s.strip()
    m = _PI.match(s)
    if m:
        coef = m.group(1)
        return (float(coef) if coef not in ("", "+", "-") else float(coef + "1")) * math.pi
    return float(s)


def _numbers(s):
    return tuple(parse_number(v) for v in s.split(",") if v.strip())


def _mode_list(s):
    out = []
    for chunk in s.split(";"):
        if chunk.strip():
            k = tuple(int(v) for v in chunk.replace(",", " ").split())
            if len(k) != 3:
                raise ValueError(f"mode index {chunk.strip()!r} needs three integers")
            out.append(k)
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    where = _locate(text)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed document: {exc}", getattr(exc, "lineno", None), 1) from exc

    def loc(section, key=None):
        return where.get((section, key), (None, None))

    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", *loc(sec))
        for key in cp[sec]:
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", *loc(sec, key))

    def get(sec, key, conv, default=None, required=False):
        if cp.has_option(sec, key):
            raw = cp.get(sec, key)
            try:
                return conv(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})", *loc(sec, key)) from exc
        if required:
            line = loc(sec)[0]
            raise ConfigError(f"missing mandatory key {key!r} in [{sec}]", line, 1 if line else None)
        return default

    command = get("run", "command", str.strip, required=True)
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {COMMANDS}", *loc("run", "command"))
    seed = get("run", "seed", int, 0)

    dtype = get("domain", "type", str.strip, required=True)
    if dtype == "box":
        for k in ("R", "H", "Nr", "Nz"):
            if cp.has_option("domain", k):
                raise ConfigError(f"key {k!r} belongs to a cylinder domain", *loc("domain", k))
        edges = get("domain", "edges", _numbers, (math.pi,) * 3)
        if len(edges) != 3 or min(edges) <= 0:
            raise ConfigError("edges must be three positive lengths", *loc("domain", "edges"))
        domain = DomainConfig(
            "box",
            edges=edges,
            cutoff=get("domain", "cutoff", parse_number, 6.5),
            modes=get("domain", "modes", _mode_list, None),
            gradient_modes=get("domain", "gradient_modes", _mode_list, None),
        )
    elif dtype == "cylinder":
        for k in ("edges", "cutoff", "modes", "gradient_modes"):
            if cp.has_option("domain", k):
                raise ConfigError(f"key {k!r} belongs to a box domain", *loc("domain", k))
        domain = DomainConfig(
            "cylinder",
            R=get("domain", "R", parse_number, math.pi),
            H=get("domain", "H", parse_number, math.pi),
            Nr=get("domain", "Nr", int, 16),
            Nz=get("domain", "Nz", int, 16),
        )
        if domain.R <= 0 or domain.H <= 0:
            raise ConfigError("cylinder R and H must be positive", *loc("domain", "type"))
    else:
        raise ConfigError(f"domain type must be 'box' or 'cylinder', got {dtype!r}", *loc("domain", "type"))
    if command == "symmetric" and dtype != "cylinder":
        raise ConfigError("command 'symmetric' needs a cylinder domain", *loc("domain", "type"))
    if command in ("ground", "oracle", "eigs") and dtype != "box":
        raise ConfigError(f"command {command!r} needs a box domain", *loc("domain", "type"))

    phys_keys = [k for k in ("eps", "mu", "omega", "kerr") if cp.has_option("model", k)]
    if phys_keys and cp.has_option("model", "lambda"):
        raise ConfigError("give either lambda or the physics keys, not both", *loc("model", "lambda"))
    if phys_keys:
        vals = tuple(get("model", k, parse_number, 1.0 if k == "kerr" else None) for k in ("eps", "mu", "omega", "kerr"))
        missing = [k for k, v in zip(("eps", "mu", "omega"), vals) if v is None]
        if missing:
            raise ConfigError(f"physics block is missing {missing}", *loc("model"))
        if vals[0] <= 0 or vals[1] <= 0:
            raise ConfigError("eps and mu must be positive", *loc("model", phys_keys[0]))
        model = ModelConfig(lam=-vals[1] * vals[2] ** 2 * vals[0], physics=vals)
        lam_where = loc("model", phys_keys[0])
    else:
        model = ModelConfig(lam=get("model", "lambda", parse_number, 0.0))
        lam_where = loc("model", "lambda")
    if command in ("ground", "oracle") and model.lam > 0:
        raise ConfigRefusal(
            f"lambda = {model.lam} > 0: ground states exist under the hypothesis lambda <= 0 only", *lam_where
        )

    family = get("nonlinearity", "family", str.strip, "power")
    if family not in ("power", "expression"):
        raise ConfigError("nonlinearity family must be 'power' or 'expression'", *loc("nonlinearity", "family"))
    p = get("nonlinearity", "p", float, 4.0)
    if model.physics is not None and cp.has_option("nonlinearity", "p") and p != 4.0:
        raise ConfigError("the physics block fixes the Kerr exponent p = 4", *loc("nonlinearity", "p"))
    if not (2 < p < 6):
        raise ConfigRefusal(f"exponent p = {p} outside the admissible range (2, 6)", *loc("nonlinearity", "p"))
    M = get("nonlinearity", "M", _numbers, (1.0, 1.0, 1.0))
    if len(M) not in (3, 9):
        raise ConfigError("M takes 3 (diagonal) or 9 entries", *loc("nonlinearity", "M"))
    gamma = get("nonlinearity", "gamma", str.strip, "1")
    try:
        parse_gamma(gamma)
    except ValueError as exc:
        raise ConfigError(str(exc), *loc("nonlinearity", "gamma")) from exc
    expression = get("nonlinearity", "expression", str.strip, None)
    if family == "expression" and expression is None:
        raise ConfigError("family 'expression' needs an expression", *loc("nonlinearity", "family"))
    nl = NonlinearityConfig(family, p, gamma, M, expression)

    sectors = get("solver", "sectors", lambda s: tuple(v.strip() for v in s.split(",") if v.strip()),
                  SolverOptions.sectors)
    if any(s not in ("all", "even", "odd") for s in sectors):
        raise ConfigError("sectors are drawn from all, even, odd", *loc("solver", "sectors"))
    solver = SolverOptions(
        tol_inner=get("solver", "tol_inner", float, SolverOptions.tol_inner),
        tol_outer=get("solver", "tol_outer", float, SolverOptions.tol_outer),
        max_inner_iters=get("solver", "max_inner_iters", int, SolverOptions.max_inner_iters),
        max_outer_iters=get("solver", "max_outer_iters", int, SolverOptions.max_outer_iters),
        restarts=get("solver", "restarts", int, SolverOptions.restarts),
        threads=get("solver", "threads", int, SolverOptions.threads),
        sectors=sectors,
    )
    return RunConfig(command, domain, model, nl, solver, get("output", "vtk_resolution", int, 24), seed, text)


# -- building objects ------------------------------------------------------------


_FUNC = re.compile(r"^\s*(step|gaussian)\s*\((.*)\)\s*$")


def parse_gamma(s):
    from .nonlinearity import ConstantField, GaussianBump, StepField

    m = _FUNC.match(s)
    if not m:
        return ConstantField(parse_number(s))
    args = _numbers(m.group(2))
    if m.group(1) == "step":
        if len(args) != 4:
            raise ValueError("step(axis, threshold, low, high) takes four numbers")
        return StepField(int(args[0]), args[1], args[2], args[3])
    if len(args) != 6:
        raise ValueError("gaussian(base, amplitude, c1, c2, c3, width) takes six numbers")
    return GaussianBump(args[0], args[1], tuple(args[2:5]), args[5])


def build_nonlinearity(cfg: RunConfig):
    """(nonlinearity, lambda) for a run."""
    from .nonlinearity import BlackBoxNonlinearity, NonlinearitySpec, kerr_from_physics

    if cfg.model.physics is not None:
        eps, mu, omega, kerr = cfg.model.physics
        return kerr_from_physics(eps, mu, omega, kerr)
    n = cfg.nonlinearity
    if n.family == "expression":
        return BlackBoxNonlinearity.from_expression(n.expression, p=n.p), cfg.model.lam
    M = np.diag(n.M) if len(n.M) == 3 else np.reshape(n.M, (3, 3))
    return NonlinearitySpec.power(n.p, parse_gamma(n.gamma), M), cfg.model.lam


def solver_config(cfg: RunConfig, threads=None):
    from .nehari import SolverConfig

    s = cfg.solver
    return SolverConfig(tol_inner=s.tol_inner, tol_outer=s.tol_outer, max_inner_iters=s.max_inner_iters,
                        max_outer_iters=s.max_outer_iters, restarts=s.restarts, seed=cfg.seed,
                        threads=threads if threads is not None else s.threads)


# -- serialization -------------------------------------------------------------------


def _num(x):
    return repr(float(x))


def serialize(cfg: RunConfig) -> str:
    """Canonical document; ``parse_config(serialize(c)) == c``."""
    d = cfg.domain
    lines = ["[run]", f"command = {cfg.command}", f"seed = {cfg.seed}", "", "[domain]", f"type = {d.type}"]
    if d.type == "box":
        lines.append("edges = " + ", ".join(_num(e) for e in d.edges))
        lines.append(f"cutoff = {_num(d.cutoff)}")
        if d.modes is not None:
            lines.append("modes = " + "; ".join(" ".join(map(str, k)) for k in d.modes))
        if d.gradient_modes is not None:
            lines.append("gradient_modes = " + "; ".join(" ".join(map(str, k)) for k in d.gradient_modes))
    else:
        lines += [f"R = {_num(d.R)}", f"H = {_num(d.H)}", f"Nr = {d.Nr}", f"Nz = {d.Nz}"]
    lines += ["", "[model]"]
    if cfg.model.physics is not None:
        lines += [f"{k} = {_num(v)}" for k, v in zip(("eps", "mu", "omega", "kerr"), cfg.model.physics)]
    else:
        lines.append(f"lambda = {_num(cfg.model.lam)}")
    n = cfg.nonlinearity
    lines += ["", "[nonlinearity]", f"family = {n.family}", f"p = {_num(n.p)}", f"gamma = {n.gamma}",
              "M = " + ", ".join(_num(m) for m in n.M)]
    if n.expression is not None:
        lines.append(f"expression = {n.expression}")
    lines += ["", "[solver]"]
    for f in fields(SolverOptions):
        v = getattr(cfg.solver, f.name)
        if f.name == "sectors":
            v = ", ".join(v)
        elif isinstance(v, float):
            v = _num(v)
        lines.append(f"{f.name} = {v}")
    lines += ["", "[output]", f"vtk_resolution = {cfg.vtk_resolution}", ""]
    return "\n".join(lines)
