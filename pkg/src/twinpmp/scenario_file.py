"""TOML scenario files: parsing with field-anchored errors and a canonical dump.

Layout (matrices are lists of rows; a bare number is accepted for 1x1)::

    [plant]         A, B
    [model]         A, B
    [cost]          q_matrix, r_matrix, q_terminal, linear_control_weight = true
    [penalty]       kind = "constant", beta = 1.0     (or kind = "tabulated", values = [...])
    [excitation]    kind = "square", amplitude, omega (or "zero", or "tabulated", values)
    [control_set]   kind = "interval" | "box" (lo, hi), "ball" (center, radius), "unbounded"
    [grid]          T, N = 2400
    [initial]       x0
    [sweep]         max_iterations, damping, tol, anderson_memory  (all optional)

Omitting [penalty] gives a constant beta = 1; omitting [excitation] gives d = 0.
"""
from __future__ import annotations

import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core_types import (
    Ball, Box, Interval, Scenario, Trajectory, Unbounded, ValidationError, make_uniform_grid,
)
from .costs import PenaltySchedule, QuadraticCostSpec, _check_sym_psd
from .pmp import SweepSettings
from .systems import ExcitationSpec, LinearAffineSystem

DEFAULT_N = 2400

_ALLOWED = {
    "plant": {"A", "B"},
    "model": {"A", "B"},
    "cost": {"q_matrix", "r_matrix", "q_terminal", "linear_control_weight"},
    "penalty": {"kind", "beta", "values"},
    "excitation": {"kind", "amplitude", "omega", "values"},
    "control_set": {"kind", "lo", "hi", "center", "radius"},
    "grid": {"T", "N"},
    "initial": {"x0"},
    "sweep": {"max_iterations", "damping", "tol", "anderson_memory"},
}
_REQUIRED_SECTIONS = ("plant", "model", "cost", "control_set", "grid", "initial")


class ScenarioParseError(ValidationError):
    """Bad scenario file; ``field`` names the offending entry, e.g. ``[cost].r_matrix``."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@contextmanager
def _field(name):
    try:
        yield
    except ScenarioParseError:
        raise
    except (ValidationError, ValueError, TypeError) as exc:
        raise ScenarioParseError(name, str(exc)) from None


def _get(doc, section, key, default=...):
    sec = doc.get(section, {})
    if key not in sec:
        if default is ...:
            raise ScenarioParseError(f"[{section}].{key}", "required field is missing")
        return default
    return sec[key]


def _matrix(doc, section, key, default=...):
    name = f"[{section}].{key}"
    raw = _get(doc, section, key, default)
    with _field(name):
        if isinstance(raw, bool):
            raise ValueError("expected a number or a list of rows")
        M = np.array(raw, dtype=float)
        if M.ndim == 0:
            M = M.reshape(1, 1)
        if M.ndim != 2:
            raise ValueError(f"expected a matrix (list of rows), got {M.ndim}-d data")
        if not np.all(np.isfinite(M)):
            raise ValueError("entries must be finite")
    return M


def _vector(doc, section, key, default=...):
    name = f"[{section}].{key}"
    raw = _get(doc, section, key, default)
    with _field(name):
        if isinstance(raw, bool):
            raise ValueError("expected a number or a list")
        v = np.atleast_1d(np.array(raw, dtype=float))
        if v.ndim != 1:
            raise ValueError("expected a flat list")
        if not np.all(np.isfinite(v)):
            raise ValueError("entries must be finite")
    return v


def _scalar(doc, section, key, default=..., kind=float):
    name = f"[{section}].{key}"
    raw = _get(doc, section, key, default)
    with _field(name):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise TypeError(f"expected a number, got {raw!r}")
        if kind is int and int(raw) != raw:
            raise ValueError(f"expected an integer, got {raw!r}")
        return kind(raw)


def _string(doc, section, key, default=...):
    raw = _get(doc, section, key, default)
    if not isinstance(raw, str):
        raise ScenarioParseError(f"[{section}].{key}", f"expected a string, got {raw!r}")
    return raw


def _system(doc, section):
    A = _matrix(doc, section, "A")
    B = _matrix(doc, section, "B")
    with _field(f"[{section}].A"):
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
    with _field(f"[{section}].B"):
        return LinearAffineSystem(A, B)


def _table(doc, section, grid, nonneg=False):
    vals = _vector(doc, section, "values")
    with _field(f"[{section}].values"):
        if len(vals) != len(grid):
            raise ValueError(f"expected {len(grid)} values (one per grid node), got {len(vals)}")
        if nonneg and np.any(vals < 0):
            raise ValueError("values must be >= 0")
        return Trajectory(grid, vals)


def scenario_from_dict(doc: dict) -> tuple[Scenario, SweepSettings]:
    """Build a validated (Scenario, SweepSettings) pair from a parsed TOML document."""
    for section, body in doc.items():
        if section not in _ALLOWED:
            raise ScenarioParseError(f"[{section}]", "unknown section")
        if not isinstance(body, dict):
            raise ScenarioParseError(f"[{section}]", "expected a table")
        for key in body:
            if key not in _ALLOWED[section]:
                raise ScenarioParseError(f"[{section}].{key}", "unknown field")
    for section in _REQUIRED_SECTIONS:
        if section not in doc:
            raise ScenarioParseError(f"[{section}]", "required section is missing")

    plant = _system(doc, "plant")
    model = _system(doc, "model")
    n, m = plant.n, plant.m
    with _field("[model].A"):
        if model.n != n:
            raise ValueError(f"model state dimension {model.n} differs from plant {n}")
    with _field("[model].B"):
        if model.m != m:
            raise ValueError(f"model input dimension {model.m} differs from plant {m}")

    mats = {}
    for key, shape in (("q_matrix", n), ("r_matrix", m), ("q_terminal", n)):
        M = _matrix(doc, "cost", key)
        with _field(f"[cost].{key}"):
            if M.shape != (shape, shape):
                raise ValueError(f"expected shape ({shape}, {shape}), got {M.shape}")
            _check_sym_psd(M, key)
        mats[key] = M
    with _field("[cost].r_matrix"):
        if np.min(np.linalg.eigvalsh(mats["r_matrix"])) <= 0:
            raise ValueError("r_matrix must be positive definite")
    lcw = _get(doc, "cost", "linear_control_weight", True)
    if not isinstance(lcw, bool):
        raise ScenarioParseError("[cost].linear_control_weight", "expected true or false")
    cost = QuadraticCostSpec(mats["q_matrix"], mats["r_matrix"], mats["q_terminal"], lcw)

    T = _scalar(doc, "grid", "T")
    N = _scalar(doc, "grid", "N", DEFAULT_N, kind=int)
    with _field("[grid].T"):
        if not T > 0:
            raise ValueError(f"horizon must be positive, got {T}")
    with _field("[grid].N"):
        grid = make_uniform_grid(T, N)

    pkind = _string(doc, "penalty", "kind", "constant")
    if pkind == "constant":
        beta = _scalar(doc, "penalty", "beta", 1.0)
        with _field("[penalty].beta"):
            penalty = PenaltySchedule.constant(beta)
    elif pkind == "tabulated":
        penalty = PenaltySchedule.tabulated(_table(doc, "penalty", grid, nonneg=True))
    else:
        raise ScenarioParseError("[penalty].kind", f"unknown kind {pkind!r}")

    ekind = _string(doc, "excitation", "kind", "zero")
    if ekind == "zero":
        excitation = ExcitationSpec.zero()
    elif ekind == "square":
        amp = _scalar(doc, "excitation", "amplitude")
        omega = _scalar(doc, "excitation", "omega")
        with _field("[excitation].amplitude"):
            if not amp >= 0:
                raise ValueError(f"amplitude must be >= 0, got {amp}")
        with _field("[excitation].omega"):
            excitation = ExcitationSpec.square_wave(amp, omega)
    elif ekind == "tabulated":
        excitation = ExcitationSpec.tabulated(_table(doc, "excitation", grid))
    else:
        raise ScenarioParseError("[excitation].kind", f"unknown kind {ekind!r}")

    ckind = _string(doc, "control_set", "kind")
    if ckind in ("interval", "box"):
        lo = _vector(doc, "control_set", "lo")
        hi = _vector(doc, "control_set", "hi")
        with _field("[control_set].hi"):
            if lo.shape != hi.shape:
                raise ValueError("lo and hi must have the same length")
            if np.any(lo > hi):
                raise ValueError(f"need lo <= hi, got lo={lo.tolist()}, hi={hi.tolist()}")
        with _field("[control_set].lo"):
            if ckind == "interval":
                if len(lo) != 1:
                    raise ValueError("an interval takes scalar lo and hi; use kind = 'box'")
                U = Interval(lo[0], hi[0])
            else:
                U = Box(lo, hi)
    elif ckind == "ball":
        center = _vector(doc, "control_set", "center")
        radius = _scalar(doc, "control_set", "radius")
        with _field("[control_set].radius"):
            U = Ball(center, radius)
    elif ckind == "unbounded":
        U = Unbounded(m)
    else:
        raise ScenarioParseError("[control_set].kind", f"unknown kind {ckind!r}")
    with _field("[control_set]"):
        if U.dimension != m:
            raise ValueError(f"set dimension {U.dimension} differs from input dimension {m}")

    x0 = _vector(doc, "initial", "x0")
    with _field("[initial].x0"):
        if x0.shape != (n,):
            raise ValueError(f"expected {n} entries, got {len(x0)}")

    defaults = SweepSettings()
    sweep = {}
    for key, attr, kind in (("max_iterations", "max_iterations", int), ("damping", "damping", float),
                            ("tol", "convergence_tol", float),
                            ("anderson_memory", "anderson_memory", int)):
        sweep[attr] = _scalar(doc, "sweep", key, getattr(defaults, attr), kind=kind)
    with _field("[sweep]"):
        settings = SweepSettings(**sweep)

    scenario = Scenario(plant, model, cost, penalty, excitation, U, grid, x0)
    return scenario, settings


def load_scenario(path) -> tuple[Scenario, SweepSettings]:
    """Read a scenario file; returns the scenario and its sweep settings."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(str(path), f"malformed file: {exc}") from None
    return scenario_from_dict(doc)


def parse_scenario(path) -> Scenario:
    return load_scenario(path)[0]


# --- canonical dump -----------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    x = float(v)
    if not np.isfinite(x):
        raise ValidationError(f"cannot write non-finite value {x}")
    return repr(x)


def _rows(M) -> list:
    return [list(map(float, row)) for row in np.asarray(M)]


def dump_scenario(scenario: Scenario, settings: SweepSettings | None = None) -> str:
    """Canonical TOML text; :func:`load_scenario` reads it back to an equal scenario."""
    s = scenario
    sections = [
        ("plant", [("A", _rows(s.plant.A)), ("B", _rows(s.plant.B))]),
        ("model", [("A", _rows(s.model.A)), ("B", _rows(s.model.B))]),
        ("cost", [("q_matrix", _rows(s.cost.Q)), ("r_matrix", _rows(s.cost.R)),
                  ("q_terminal", _rows(s.cost.Q_T)),
                  ("linear_control_weight", s.cost.linear_control_weight)]),
    ]
    pen = s.penalty
    if pen.kind == "constant":
        sections.append(("penalty", [("kind", "constant"), ("beta", pen.beta)]))
    else:
        if pen.table.grid != s.grid:
            raise ValidationError("tabulated penalty must live on the scenario grid to be written")
        sections.append(("penalty", [("kind", "tabulated"), ("values", pen.table.values[:, 0])]))
    exc = s.excitation
    if exc.kind == "zero":
        sections.append(("excitation", [("kind", "zero")]))
    elif exc.kind == "square":
        sections.append(("excitation", [("kind", "square"), ("amplitude", exc.amplitude),
                                        ("omega", exc.omega)]))
    else:
        if exc.table.grid != s.grid:
            raise ValidationError("tabulated excitation must live on the scenario grid to be written")
        sections.append(("excitation", [("kind", "tabulated"), ("values", exc.table.values[:, 0])]))
    U = s.control_set
    if isinstance(U, Interval):
        cs = [("kind", "interval"), ("lo", float(U.lo[0])), ("hi", float(U.hi[0]))]
    elif isinstance(U, Box):
        cs = [("kind", "box"), ("lo", U.lo), ("hi", U.hi)]
    elif isinstance(U, Ball):
        cs = [("kind", "ball"), ("center", U.center), ("radius", U.radius)]
    else:
        cs = [("kind", "unbounded")]
    sections.append(("control_set", cs))
    sections.append(("grid", [("T", s.grid.horizon_T), ("N", s.grid.num_steps)]))
    sections.append(("initial", [("x0", s.initial_state)]))
    st = settings or SweepSettings()
    sections.append(("sweep", [("max_iterations", st.max_iterations), ("damping", st.damping),
                               ("tol", st.convergence_tol),
                               ("anderson_memory", st.anderson_memory)]))
    out = []
    for name, items in sections:
        out.append(f"[{name}]")
        out.extend(f"{k} = {_fmt(v)}" for k, v in items)
        out.append("")
    return "\n".join(out)
