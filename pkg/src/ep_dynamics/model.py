"""Physical parameter types, reservoir occupation functions and configuration I/O.

Everything here is plain data plus pure functions; all downstream solvers
(Heisenberg, Lindblad, finite-bath) consume the same ``ChainParams`` /
``ReservoirSpec`` objects so there is a single source of physical truth.

Units: energies in units of k_B*T_1 with hbar = k_B = 1, rates Gamma_j are
energies, time is 1/energy.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

__all__ = [
    "ChainParams",
    "ReservoirSpec",
    "InitialConditions",
    "TimeGrid",
    "QuadratureSettings",
    "TimeSeries",
    "ValidationError",
    "fermi",
    "validate",
    "load_config",
    "RunConfig",
]


class ValidationError(ValueError):
    """Raised when a parameter set violates its invariants.

    ``problems`` lists every violated invariant, not just the first one.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ChainParams:
    """Chain of quantum dots: energies, inter-dot coupling, bare tunneling rates.

    ``eps[j]`` is the energy of dot j, ``g`` the nearest-neighbour tunnel
    coupling and ``gamma[j]`` the bare (wide-band) rate to the reservoir
    attached to dot j; ``gamma[j] == 0`` means no reservoir on that dot.
    """

    n_dots: int
    eps: tuple
    g: float
    gamma: tuple

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in np.atleast_1d(self.eps)))
        object.__setattr__(self, "gamma", tuple(float(x) for x in np.atleast_1d(self.gamma)))
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "n_dots", int(self.n_dots))

    @property
    def gamma_total(self) -> float:
        return float(sum(self.gamma))

    @property
    def resonant(self) -> bool:
        return all(e == self.eps[0] for e in self.eps)

    def problems(self):
        out = []
        if self.n_dots < 1:
            out.append(f"n_dots must be >= 1, got {self.n_dots}")
        if len(self.eps) != self.n_dots:
            out.append(f"length mismatch: {len(self.eps)} dot energies for {self.n_dots} dots")
        if len(self.gamma) != self.n_dots:
            out.append(f"length mismatch: {len(self.gamma)} rates for {self.n_dots} dots")
        for j, gj in enumerate(self.gamma):
            if not np.isfinite(gj):
                out.append(f"non-finite rate at dot {j + 1}")
            elif gj < 0:
                out.append(f"negative rate at dot {j + 1}")
        if not all(np.isfinite(self.eps)):
            out.append("non-finite dot energy")
        if not np.isfinite(self.g):
            out.append("non-finite inter-dot coupling")
        return out


@dataclass(frozen=True)
class ReservoirSpec:
    """Thermal reservoir: temperature, chemical potential, optional overrides.

    ``occupation`` replaces the Fermi function by a constant c in [0, 1]
    (used by the stationarity cross-checks).  ``zero_temperature`` selects the
    step-function limit explicitly instead of passing T = 0, which would
    overflow the exponential.
    """

    temperature: float = 1.0
    mu: float = 0.0
    occupation: float | None = None
    zero_temperature: bool = False

    def problems(self, label="reservoir"):
        out = []
        if not self.zero_temperature and not (self.temperature > 0):
            out.append(f"{label}: temperature must be > 0 (or set zero_temperature)")
        if self.occupation is not None and not (0.0 <= self.occupation <= 1.0):
            out.append(f"{label}: occupation override {self.occupation} outside [0, 1]")
        if not np.isfinite(self.mu):
            out.append(f"{label}: non-finite chemical potential")
        return out


@dataclass(frozen=True)
class InitialConditions:
    """Initial dot occupations; coherences are fixed to zero."""

    n: tuple

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(float(x) for x in np.atleast_1d(self.n)))

    def problems(self):
        return [
            f"initial occupation n_{j + 1} = {nj} outside [0, 1]"
            for j, nj in enumerate(self.n)
            if not (0.0 <= nj <= 1.0)
        ]


@dataclass(frozen=True)
class TimeGrid:
    t0: float = 0.0
    t_end: float = 10.0
    steps: int = 200

    def __post_init__(self):
        probs = []
        if not (self.t_end > self.t0):
            probs.append(f"t_end {self.t_end} must exceed t0 {self.t0}")
        if self.steps < 2:
            probs.append(f"steps must be >= 2, got {self.steps}")
        if probs:
            raise ValidationError(probs)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t_end, self.steps)


@dataclass(frozen=True)
class QuadratureSettings:
    """Controls for the reservoir-energy integrals."""

    abs_tol: float = 1e-9
    window_factor: float = 40.0
    max_panels: int = 60000

    def __post_init__(self):
        probs = []
        if not (self.abs_tol > 0):
            probs.append("abs_tol must be > 0")
        if self.window_factor < 10:
            probs.append("window_factor must be >= 10")
        if probs:
            raise ValidationError(probs)


@dataclass
class TimeSeries:
    """Time grid plus named data channels with provenance metadata."""

    times: np.ndarray
    channels: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.channels[name]


def fermi(eps, spec: ReservoirSpec):
    """Reservoir occupation at energy ``eps``.

    Returns the Fermi factor 1/(exp((eps - mu)/T) + 1), the constant override
    when one is set, or the zero-temperature step (1/2 exactly at eps = mu).
    Accepts scalars or arrays.
    """
    eps = np.asarray(eps, dtype=float)
    if not np.all(np.isfinite(eps)):
        raise ValidationError(["non-finite energy passed to fermi"])
    if spec.occupation is not None:
        out = np.full_like(eps, spec.occupation)
    elif spec.zero_temperature:
        out = np.where(eps < spec.mu, 1.0, np.where(eps > spec.mu, 0.0, 0.5))
    else:
        x = np.clip((eps - spec.mu) / spec.temperature, -700.0, 700.0)
        out = 1.0 / (np.exp(x) + 1.0)
    return out if out.ndim else float(out)


def validate(params: ChainParams, specs, init: InitialConditions | None = None):
    """Check a full configuration; raise ``ValidationError`` listing every violation.

    Returns ``(params, specs, init)`` unchanged on success.
    """
    specs = tuple(specs)
    problems = list(params.problems())
    if len(specs) != params.n_dots:
        problems.append(
            f"length mismatch: {len(specs)} reservoir specs for {params.n_dots} dots"
        )
    for j, spec in enumerate(specs):
        problems.extend(spec.problems(label=f"reservoir {j + 1}"))
    if init is not None:
        problems.extend(init.problems())
        if len(init.n) != params.n_dots:
            problems.append(
                f"length mismatch: {len(init.n)} initial occupations for {params.n_dots} dots"
            )
    if problems:
        raise ValidationError(problems)
    return (params, specs, init)


# ---------------------------------------------------------------------------
# configuration files
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Parsed configuration file; ``extras`` holds command-specific sections."""

    params: ChainParams
    specs: tuple
    init: InitialConditions
    grid: TimeGrid
    quad: QuadratureSettings
    output_dir: str = "."
    formats: tuple = ("csv", "json")
    extras: dict = field(default_factory=dict)


def _floats(text):
    return [float(tok) for tok in text.replace(",", " ").split()]


def load_config(path) -> RunConfig:
    """Read an INI-style configuration file (see README for the schema)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(str(path))
    if not read:
        raise ValidationError([f"cannot read config file {path}"])
    try:
        sys = cp["system"]
        n_dots = sys.getint("n_dots", 2)
        eps = _floats(sys.get("eps", "1.0"))
        if len(eps) == 1:
            eps = eps * n_dots
        gamma = _floats(sys.get("gamma"))
        params = ChainParams(n_dots=n_dots, eps=eps, g=sys.getfloat("g"), gamma=gamma)

        res = cp["reservoirs"] if cp.has_section("reservoirs") else {}
        temps = _floats(res.get("T", "1.0"))
        mus = _floats(res.get("mu", "0.0"))
        occ_raw = res.get("occupation", "").strip() if hasattr(res, "get") else ""
        occs = _floats(occ_raw) if occ_raw else None
        if len(temps) == 1:
            temps = temps * n_dots
        if len(mus) == 1:
            mus = mus * n_dots
        specs = tuple(
            ReservoirSpec(
                temperature=temps[j],
                mu=mus[j],
                occupation=(occs[j] if occs else None),
            )
            for j in range(n_dots)
        )

        sim = cp["simulation"] if cp.has_section("simulation") else {}
        grid = TimeGrid(
            t0=float(sim.get("t0", 0.0)),
            t_end=float(sim.get("t_end", 10.0)),
            steps=int(sim.get("steps", 200)),
        )
        n0 = _floats(sim.get("n0", "0.0")) if hasattr(sim, "get") else [0.0]
        if len(n0) == 1:
            n0 = n0 * n_dots
        init = InitialConditions(n=n0)

        qsec = cp["quadrature"] if cp.has_section("quadrature") else {}
        quad = QuadratureSettings(
            abs_tol=float(qsec.get("abs_tol", 1e-9)),
            window_factor=float(qsec.get("window_factor", 40.0)),
            max_panels=int(qsec.get("max_panels", 60000)),
        )

        out = cp["output"] if cp.has_section("output") else {}
        output_dir = out.get("directory", ".") if hasattr(out, "get") else "."
        formats = tuple(
            tok.strip()
            for tok in (out.get("formats", "csv,json") if hasattr(out, "get") else "csv,json").split(",")
            if tok.strip()
        )

        extras = {
            name: dict(cp[name])
            for name in cp.sections()
            if name not in ("system", "reservoirs", "simulation", "quadrature", "output")
        }
    except ValidationError:
        raise
    except (KeyError, ValueError, configparser.Error) as exc:
        raise ValidationError([f"malformed config {path}: {exc}"]) from exc

    validate(params, specs, init)
    return RunConfig(
        params=params,
        specs=specs,
        init=init,
        grid=grid,
        quad=quad,
        output_dir=output_dir,
        formats=formats,
        extras=extras,
    )
