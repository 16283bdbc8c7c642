"""
Flat ``section.key = value`` experiment files.

Example::

    # Stefan problem on an exterior domain
    domain.kind = radial_exterior
    domain.a = 1
    domain.b = 8
    domain.dimension = 2
    grid.nodes = 141
    time.horizon = 1
    time.dt = 1e-3
    model.beta.kind = stefan
    model.beta.ks = 2
    model.beta.kl = 3
    model.beta.latent = 1
    model.epsilon = 0.2, 0.1, 0.05, 0.025
    initial.kind = gaussian
    initial.amplitude = 3
    initial.center = 2
    initial.width = 0.5
"""
from dataclasses import dataclass

import numpy as np

from .dual import DualEngine
from .errors import ConfigError
from .evolution import MODES, SolverConfig
from .grid import KINDS, assemble_operator, build_grid
from .nonlinearity import Perturbation, make_graph


def _float(text):
    value = float(text)
    if not np.isfinite(value):
        raise ValueError("not finite")
    return value


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError("not an integer")
    return int(value)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _float_list(text):
    items = [s.strip() for s in text.split(",")]
    if not items or any(not s for s in items):
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(_float(s) for s in items)


def _str(text):
    if not text:
        raise ValueError("empty value")
    return text


# key -> (parser, default)
SCHEMA = {
    "domain.kind": (_choice(*KINDS), "interval"),
    "domain.a": (_float, 0.0),
    "domain.b": (_float, 1.0),
    "domain.dimension": (_int, 1),
    "grid.nodes": (_int, 101),
    "time.horizon": (_float, 1.0),
    "time.dt": (_float, 1e-3),
    "model.beta.kind": (_choice("linear", "power", "stefan"), "linear"),
    "model.beta.q": (_float, 2.0),
    "model.beta.ks": (_float, 1.0),
    "model.beta.kl": (_float, 1.0),
    "model.beta.latent": (_float, 1.0),
    "model.epsilon": (_float_list, (0.1,)),
    "model.c1": (_float, 0.5),
    "model.mode": (_choice(*MODES), "cahn_hilliard"),
    "initial.kind": (_choice("constant", "gaussian", "step"), "constant"),
    "initial.value": (_float, 1.0),
    "initial.amplitude": (_float, 1.0),
    "initial.center": (_float, None),
    "initial.width": (_float, 0.1),
    "initial.offset": (_float, 0.0),
    "initial.left": (_float, 1.0),
    "initial.right": (_float, 0.0),
    "initial.position": (_float, None),
    "forcing.kind": (_choice("zero", "constant", "gaussian_pulse"), "zero"),
    "forcing.value": (_float, 0.0),
    "forcing.amplitude": (_float, 1.0),
    "forcing.center": (_float, None),
    "forcing.width": (_float, 0.1),
    "forcing.time": (_float, 0.0),
    "forcing.duration": (_float, 0.1),
    "solver.newton_tol": (_float, 1e-10),
    "solver.newton_max_iters": (_int, 50),
    "solver.yosida_lambda": (_float, 0.0),
    "solver.derivative_cap": (_float, 1e8),
    "solver.max_halvings": (_int, 30),
    "study.reference": (_choice(*MODES), "cahn_hilliard"),
    "study.reference_divisor": (_float, 16.0),
    "study.radii": (_float_list, None),
    "output.dir": (_str, "output"),
}


@dataclass
class ExperimentConfig:
    """Validated experiment settings; missing keys take documented defaults."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def ladder(self):
        return self.values["model.epsilon"]

    @property
    def mode(self):
        return self.values["model.mode"]

    @property
    def output_dir(self):
        return self.values["output.dir"]

    def grid(self, outer=None, nodes=None):
        v = self.values
        return build_grid(
            v["domain.kind"], v["domain.a"], v["domain.b"] if outer is None else outer,
            v["grid.nodes"] if nodes is None else nodes, v["domain.dimension"],
        )

    def engine(self, outer=None, nodes=None):
        return DualEngine(assemble_operator(self.grid(outer, nodes)))

    def graph(self):
        v = self.values
        return make_graph(
            v["model.beta.kind"], q=v["model.beta.q"], ks=v["model.beta.ks"],
            kl=v["model.beta.kl"], latent=v["model.beta.latent"],
        )

    def perturbation(self, eps):
        return Perturbation(eps, c1=self.values["model.c1"])

    def solver(self, eps=None):
        v = self.values
        return SolverConfig(
            dt=v["time.dt"], horizon=v["time.horizon"], eps=eps,
            newton_tol=v["solver.newton_tol"], newton_max_iters=v["solver.newton_max_iters"],
            yosida_lambda=v["solver.yosida_lambda"], derivative_cap=v["solver.derivative_cap"],
            max_halvings=v["solver.max_halvings"],
        )

    def initial_field(self, x):
        v = self.values
        kind = v["initial.kind"]
        mid = 0.5 * (v["domain.a"] + v["domain.b"])
        if kind == "constant":
            return np.full_like(x, v["initial.value"], dtype=float)
        if kind == "gaussian":
            c = mid if v["initial.center"] is None else v["initial.center"]
            return v["initial.offset"] + v["initial.amplitude"] * np.exp(-((x - c) ** 2) / (2 * v["initial.width"] ** 2))
        pos = mid if v["initial.position"] is None else v["initial.position"]
        return np.where(x < pos, v["initial.left"], v["initial.right"])

    def forcing(self, x):
        """Callable ``g(t)`` on nodes ``x``, or ``None`` for the zero source."""
        v = self.values
        kind = v["forcing.kind"]
        if kind == "zero":
            return None
        if kind == "constant":
            field = np.full_like(x, v["forcing.value"], dtype=float)
            return lambda t: field
        c = 0.5 * (v["domain.a"] + v["domain.b"]) if v["forcing.center"] is None else v["forcing.center"]
        shape = v["forcing.amplitude"] * np.exp(-((x - c) ** 2) / (2 * v["forcing.width"] ** 2))
        t0, tau = v["forcing.time"], v["forcing.duration"]
        return lambda t: shape * np.exp(-((t - t0) ** 2) / (2 * tau * tau))

    def zero_forcing(self):
        v = self.values
        return v["forcing.kind"] == "zero" or (v["forcing.kind"] == "constant" and v["forcing.value"] == 0)


def parse_config(text):
    """Parse and validate experiment text; raises :class:`ConfigError` naming key and line."""
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, "expected 'section.key = value'", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key", lineno)
        if key in raw:
            raise ConfigError(key, f"duplicate key (first set on line {lines[key]})", lineno)
        parser = SCHEMA[key][0]
        try:
            raw[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(key, f"malformed value {value!r}: {exc}", lineno) from None
        lines[key] = lineno
    values = {key: raw.get(key, default) for key, (_, default) in SCHEMA.items()}

    def fail(key, message):
        raise ConfigError(key, message, lines.get(key))

    ladder = values["model.epsilon"]
    if any(not (0 < e <= 1) for e in ladder):
        fail("model.epsilon", f"every entry must lie in (0, 1], got {ladder}")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        fail("model.epsilon", f"ladder must be strictly decreasing, got {ladder}")
    if not 0.5 <= values["model.c1"] < 1:
        fail("model.c1", "must lie in [0.5, 1)")
    if values["study.reference_divisor"] <= 1:
        fail("study.reference_divisor", "must be > 1")
    for key in ("initial.width", "forcing.width", "forcing.duration"):
        if values[key] <= 0:
            fail(key, "must be > 0")
    radii = values["study.radii"]
    if radii is not None and any(b <= a for a, b in zip(radii, radii[1:])):
        fail("study.radii", "must be strictly increasing")

    cfg = ExperimentConfig(values)
    # surface range errors from the domain model with the right line number
    for build in (cfg.grid, cfg.graph, cfg.solver):
        try:
            build()
        except ConfigError as exc:
            raise ConfigError(exc.key, str(exc).split(": ", 1)[-1], lines.get(exc.key)) from None
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
