"""Named scenarios, their exact solutions, and config-file round trips.

A ScenarioSpec is the fully serializable description of one experiment:
physical parameters, coupling builders, initial configuration, target
profile, terminal payoff, and the default run knobs (tau, samples, stencil
width, method, seed).  Six presets cover the standard battery:

  test1  single spin, no coupling, terminal data w_T = m_3 + 2; closed-form
         w and gradients, used for convergence and variance checks
  test2  two exchange-coupled spins (strength mu), w_T = m_{1,3}+m_{2,3}+2,
         closed form available because the exchange term annihilates it
  spin3  three-spin ring with strong anisotropy and cheap control, middle
         target leg swings from -e1 to e1
  spin4-setup1 / spin4-setup2   four-spin rings, two swinging legs
  spin10 ten-spin ring started on a great circle, all legs tracking e1

The full experiments in the source studies ran with samples up to 10^6;
presets store those values and the CLI caps the effective count at 10^4
unless --full is given.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from . import model
from .driver import ControlledRun, run_algorithm
from .errors import ConfigError
from .feynman_kac import EstimatorConfig
from .gradient import exact_gradient_provider
from .integrator import Partition
from .model import ModelParams, TargetProfile, TerminalPayoff
from .rng import SeedPolicy

OVERFLOW_RATIO = 100.0


@dataclass
class ScenarioSpec:
    """Serializable description of one experiment."""

    name: str
    n_spins: int
    alpha: float
    nu: float
    lam: float
    delta: float
    c_ext: float
    horizon: float
    exchange_kind: str = "zero"          # zero | two-spin-mu | ring | dense
    exchange_mu: float = 1.0
    exchange_rows: Optional[list] = None
    d_diag: Optional[list] = None        # N rows of 3, omitted means zero
    m0: list = field(default_factory=list)
    target_kind: str = "constant"
    target_vectors: list = field(default_factory=list)
    switch_spins: list = field(default_factory=list)
    target_times: Optional[list] = None
    target_table: Optional[list] = None
    payoff_kind: str = "quadratic-tracking"
    payoff_scale: float = 1.0
    tau: float = 0.01
    samples: int = 10_000
    hbar: Optional[float] = None         # None means 1/sqrt(samples)
    quad_points: int = 2
    method: str = "B"
    seed: int = 2024

    # -- builders -----------------------------------------------------------

    def exchange_matrix(self) -> np.ndarray:
        if self.exchange_kind == "zero":
            return model.exchange_zero(self.n_spins)
        if self.exchange_kind == "two-spin-mu":
            if self.n_spins != 2:
                raise ConfigError("two-spin-mu exchange needs exactly 2 spins")
            return model.exchange_two_spin(self.exchange_mu)
        if self.exchange_kind == "ring":
            return model.exchange_ring(self.n_spins)
        if self.exchange_kind == "dense":
            if self.exchange_rows is None:
                raise ConfigError("dense exchange needs explicit rows")
            return np.asarray(self.exchange_rows, dtype=float)
        raise ConfigError(f"unknown exchange kind {self.exchange_kind!r}")

    def model_params(self) -> ModelParams:
        return ModelParams(
            n_spins=self.n_spins,
            alpha=self.alpha,
            nu=self.nu,
            lam=self.lam,
            delta=self.delta,
            c_ext=self.c_ext,
            horizon=self.horizon,
            exchange=self.exchange_matrix(),
            d_blocks=None if self.d_diag is None else np.asarray(self.d_diag, dtype=float),
        )

    def initial_config(self) -> np.ndarray:
        from . import manifold

        return manifold.spin_config(np.asarray(self.m0, dtype=float))

    def target_profile(self) -> TargetProfile:
        return TargetProfile(
            kind=self.target_kind,
            n_spins=self.n_spins,
            horizon=self.horizon,
            vectors=None if not self.target_vectors else np.asarray(self.target_vectors, dtype=float),
            switch_spins=tuple(self.switch_spins),
            times=None if self.target_times is None else np.asarray(self.target_times, dtype=float),
            table=None if self.target_table is None else np.asarray(self.target_table, dtype=float),
        )

    def terminal_payoff(self) -> TerminalPayoff:
        if self.payoff_kind == "quadratic-tracking":
            m_ref = self.target_profile().eval(self.horizon)
            return TerminalPayoff("quadratic-tracking", m_ref=m_ref, scale=self.payoff_scale)
        if self.payoff_kind in ("log-harmonic-1", "log-harmonic-2"):
            return TerminalPayoff(self.payoff_kind, scale=self.payoff_scale)
        raise ConfigError(f"payoff kind {self.payoff_kind!r} is not config-constructible")

    def partition(self, tau: Optional[float] = None) -> Partition:
        t = self.tau if tau is None else tau
        steps = round(self.horizon / t)
        if steps < 1 or abs(steps * t - self.horizon) > 1e-9 * self.horizon:
            raise ConfigError(f"tau = {t} does not divide the horizon {self.horizon}")
        return Partition(self.horizon, steps)

    def estimator_config(self, samples=None, hbar=None, quad_points=None,
                         method=None, threads=1) -> EstimatorConfig:
        return EstimatorConfig(
            samples=self.samples if samples is None else samples,
            hbar=self.hbar if hbar is None else hbar,
            quad_points=self.quad_points if quad_points is None else quad_points,
            method=self.method if method is None else method,
            threads=threads,
        )

    def overflow_warning(self) -> Optional[str]:
        """Text of the known-regime warning, or None when safely outside it."""
        if self.delta <= 0 or self.nu == 0:
            return None
        drive = min(self.delta, 1.0) * self.c_ext**2 * (1.0 + self.alpha**2)
        damp = self.lam * self.nu**2
        if drive > OVERFLOW_RATIO * damp:
            return (
                f"scenario {self.name!r} sits in the overflow regime of the "
                f"exponential transform (min(delta,1)*c_ext^2*(1+alpha^2) = {drive:.3g} "
                f">> lambda*nu^2 = {damp:.3g}); sampled values of w may all "
                "truncate to zero"
            )
        return None

    def to_dict(self) -> dict:
        return asdict(self)


def from_dict(data: dict) -> ScenarioSpec:
    try:
        spec = ScenarioSpec(**data)
    except TypeError as exc:
        raise ConfigError(f"bad scenario fields: {exc}") from exc
    # construct everything once so malformed specs fail loudly at load time
    spec.model_params()
    spec.initial_config()
    spec.target_profile()
    spec.terminal_payoff()
    spec.partition()
    return spec


# ---------------------------------------------------------------------------
# presets

E1 = (1.0, 0.0, 0.0)
E2 = (0.0, 1.0, 0.0)
E3 = (0.0, 0.0, 1.0)


def _preset_test1() -> ScenarioSpec:
    return ScenarioSpec(
        name="test1", n_spins=1, alpha=1.0, nu=1.0, lam=1.0, delta=0.0,
        c_ext=1.0, horizon=0.5, exchange_kind="zero",
        m0=[list(E1)], target_kind="constant", target_vectors=[list(E3)],
        payoff_kind="log-harmonic-1", tau=0.01, samples=10_000, method="B",
    )


def _preset_test2() -> ScenarioSpec:
    return ScenarioSpec(
        name="test2", n_spins=2, alpha=0.0, nu=1.0, lam=1.0, delta=0.0,
        c_ext=1.0, horizon=0.5, exchange_kind="two-spin-mu", exchange_mu=1.0,
        m0=[list(E1), list(E2)], target_kind="constant",
        target_vectors=[list(E3), list(E3)],
        payoff_kind="log-harmonic-2", tau=0.01, samples=10_000, method="B",
    )


def _spin_ring(name, n, m0, switch, samples, hbar, alpha, nu, lam, c_ext,
               d_row=(-5.0, 1.0, 3.5)) -> ScenarioSpec:
    return ScenarioSpec(
        name=name, n_spins=n, alpha=alpha, nu=nu, lam=lam, delta=0.0,
        c_ext=c_ext, horizon=0.5, exchange_kind="ring",
        d_diag=None if d_row is None else [list(d_row)] * n,
        m0=m0, target_kind="rotating-switch",
        target_vectors=[list(E1)] * n, switch_spins=list(switch),
        payoff_kind="quadratic-tracking", tau=0.01, samples=samples,
        hbar=hbar, method="B",
    )


def _preset_spin3() -> ScenarioSpec:
    minus = [-1.0, 0.0, 0.0]
    return _spin_ring("spin3", 3, [list(E1), minus, list(E1)], (1,),
                      1_000_000, 1e-3, alpha=0.1, nu=0.3, lam=1e-3, c_ext=0.1)


def _preset_spin4_setup1() -> ScenarioSpec:
    minus = [-1.0, 0.0, 0.0]
    return _spin_ring("spin4-setup1", 4, [list(E1), minus, list(E1), minus],
                      (1, 3), 1_000_000, 1e-3, alpha=0.1, nu=0.3, lam=1e-3, c_ext=0.1)


def _preset_spin4_setup2() -> ScenarioSpec:
    minus = [-1.0, 0.0, 0.0]
    return _spin_ring("spin4-setup2", 4, [list(E1), minus, minus, list(E1)],
                      (1, 2), 1_000_000, 1e-3, alpha=0.1, nu=0.3, lam=1e-3, c_ext=0.1)


def _preset_spin10() -> ScenarioSpec:
    m0 = [
        [0.0, math.sin(2.0 * math.pi * i / 10.0), math.cos(2.0 * math.pi * i / 10.0)]
        for i in range(1, 11)
    ]
    return _spin_ring("spin10", 10, m0, (), 10_000, 1e-2,
                      alpha=1.0, nu=0.5, lam=1.0, c_ext=1.0, d_row=None)


PRESETS = {
    "test1": _preset_test1,
    "test2": _preset_test2,
    "spin3": _preset_spin3,
    "spin4-setup1": _preset_spin4_setup1,
    "spin4-setup2": _preset_spin4_setup2,
    "spin10": _preset_spin10,
}


def preset(name: str) -> ScenarioSpec:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


# ---------------------------------------------------------------------------
# closed-form solutions of the two test problems


class ExactTest1:
    """w(t, m) = e^(t-T) m_3 + 2 for the uncoupled single spin (beta = 2)."""

    def __init__(self, horizon: float = 0.5):
        self.horizon = horizon
        self.beta = 2.0

    def w(self, t: float, m: np.ndarray) -> float:
        return math.exp(t - self.horizon) * float(m[2]) + 2.0

    def grad_w(self, t: float, m: np.ndarray) -> np.ndarray:
        f = math.exp(t - self.horizon)
        m1, m2, m3 = (float(x) for x in m)
        return f * np.array([-m1 * m3, -m2 * m3, 1.0 - m3 * m3])

    def grad_W(self, t: float, m: np.ndarray) -> np.ndarray:
        return -self.grad_w(t, m) / (self.beta * self.w(t, m))


class ExactTest2:
    """w(t, m) = e^(t-T)(m_{1,3} + m_{2,3}) + 2 for the exchange pair (beta = 1).

    Holds for any exchange strength mu: the coupling term annihilates the
    harmonic sum, so mu never enters the formula.
    """

    def __init__(self, horizon: float = 0.5):
        self.horizon = horizon
        self.beta = 1.0

    def w(self, t: float, m: np.ndarray) -> float:
        return math.exp(t - self.horizon) * (float(m[2]) + float(m[5])) + 2.0

    def grad_w(self, t: float, m: np.ndarray) -> np.ndarray:
        f = math.exp(t - self.horizon)
        out = np.empty(6)
        for b in range(2):
            x, y, z = (float(v) for v in m[3 * b : 3 * b + 3])
            out[3 * b : 3 * b + 3] = (-x * z, -y * z, 1.0 - z * z)
        return f * out

    def grad_W(self, t: float, m: np.ndarray) -> np.ndarray:
        return -self.grad_w(t, m) / (self.beta * self.w(t, m))


def exact_solution(name: str, horizon: float = 0.5):
    """Closed-form solution object for a preset, or None if there is none."""
    if name == "test1":
        return ExactTest1(horizon)
    if name == "test2":
        return ExactTest2(horizon)
    return None


# ---------------------------------------------------------------------------
# validation harness: estimated feedback vs exact feedback, shared outer walk


@dataclass
class ValidationResult:
    spec: ScenarioSpec
    run: ControlledRun
    oracle: ControlledRun
    err: np.ndarray            # (J+1,) squared config distance per grid time

    @property
    def err_time_avg(self) -> float:
        return float(self.err.mean())


def validate_run(
    spec: ScenarioSpec,
    method: str,
    samples: int,
    seed: Optional[int] = None,
    tau: Optional[float] = None,
    hbar: Optional[float] = None,
    quad_points: Optional[int] = None,
    threads: int = 1,
) -> ValidationResult:
    """Drive the feedback loop twice from one outer walk: estimated vs exact."""
    exact = exact_solution(spec.name, spec.horizon)
    if exact is None:
        raise ConfigError(
            f"validation needs a closed-form solution; {spec.name!r} has none "
            "(use test1 or test2)"
        )
    from .driver import err_metric

    params = spec.model_params()
    payoff = spec.terminal_payoff()
    target = spec.target_profile()
    part = spec.partition(tau)
    cfg = spec.estimator_config(samples=samples, hbar=hbar,
                                quad_points=quad_points, method=method,
                                threads=threads)
    policy = SeedPolicy(spec.seed if seed is None else seed)
    m0 = spec.initial_config()
    run = run_algorithm(params, m0, payoff, target, part, cfg, policy)
    oracle = run_algorithm(
        params, m0, payoff, target, part, cfg, policy,
        u_provider=exact_gradient_provider(params, exact.grad_W),
    )
    return ValidationResult(spec, run, oracle, err_metric(oracle.states, run.states))


# ---------------------------------------------------------------------------
# config file round trip (TOML subset)

try:
    import tomllib as _toml  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml


_SECTION_FIELDS = {
    "scenario": ("name", "n_spins"),
    "parameters": ("alpha", "nu", "lam", "delta", "c_ext", "horizon"),
    "exchange": ("exchange_kind", "exchange_mu", "exchange_rows"),
    "anisotropy": ("d_diag",),
    "initial": ("m0",),
    "target": ("target_kind", "target_vectors", "switch_spins",
               "target_times", "target_table"),
    "payoff": ("payoff_kind", "payoff_scale"),
    "defaults": ("tau", "samples", "hbar", "quad_points", "method", "seed"),
}
_KEY_RENAME = {"lam": "lambda", "exchange_kind": "kind", "exchange_mu": "mu",
               "exchange_rows": "rows", "target_kind": "kind",
               "target_vectors": "vectors", "target_times": "times",
               "target_table": "table", "payoff_kind": "kind",
               "payoff_scale": "scale"}
_KEY_RESTORE = {
    (sec, _KEY_RENAME.get(f, f)): f
    for sec, fields in _SECTION_FIELDS.items()
    for f in fields
}


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize {type(v).__name__} into config")


def emit_config(spec: ScenarioSpec) -> str:
    """Render a spec as the TOML subset parse_config understands."""
    data = spec.to_dict()
    out = io.StringIO()
    for section, fields in _SECTION_FIELDS.items():
        lines = []
        for f in fields:
            v = data.get(f)
            if v is None or (isinstance(v, (list, tuple)) and len(v) == 0):
                continue
            lines.append(f"{_KEY_RENAME.get(f, f)} = {_toml_value(v)}")
        if lines:
            out.write(f"[{section}]\n" + "\n".join(lines) + "\n\n")
    return out.getvalue()


def parse_config(text: str) -> ScenarioSpec:
    """Parse a config file produced by emit_config (or written by hand)."""
    try:
        doc = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    data: dict = {}
    for section, content in doc.items():
        if section not in _SECTION_FIELDS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in content.items():
            try:
                field_name = _KEY_RESTORE[(section, key)]
            except KeyError:
                raise ConfigError(f"unknown key {key!r} in [{section}]") from None
            data[field_name] = value
    missing = {"name", "n_spins", "alpha", "nu", "lam", "delta", "c_ext",
               "horizon", "m0"} - set(data)
    if missing:
        raise ConfigError(f"config missing required keys: {sorted(missing)}")
    return from_dict(data)


def load_scenario(source: str) -> ScenarioSpec:
    """Resolve a CLI scenario argument: preset name or config file path."""
    from pathlib import Path

    if source in PRESETS:
        return preset(source)
    path = Path(source)
    if path.suffix == ".toml" and path.exists():
        return parse_config(path.read_text())
    if path.exists():
        raise ConfigError(f"cannot load scenario from {source!r}: expected a "
                          ".toml config or a preset name")
    raise ConfigError(f"{source!r} is neither a preset nor an existing config file")
