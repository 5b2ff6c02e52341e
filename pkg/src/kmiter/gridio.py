"""Grid-sampled functions: ingestion, rendering, and synthetic data.

The spectral models with sine bases have explicit eigenfunctions, so a
function sampled on a uniform grid over the domain can be turned into
coefficients by quadrature against the basis (composite trapezoid), and
coefficients can be rendered back to samples.  Both directions live here,
together with the CSV exchange format (`x,value` for one dimension,
`x,y,value` for a rectangle, header row required) and the named synthetic
data generators used by the benchmark harness.

Grid functions represent members of the zero-trace spaces, so their
boundary samples must vanish (within 1e-12); the readers accept a policy
flag deciding whether a violated trace is an error or just a warning.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import warnings
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .problems import parabolic_solution_at
from .spectral import (
    CustomBasis,
    Sine1D,
    SineRect2D,
    SpectralVec,
    SpectrumModel,
    unit_mode,
)

__all__ = [
    "GridFunction",
    "make_grid_function",
    "read_grid_csv",
    "write_grid_csv",
    "ingest_grid",
    "render_grid",
    "synth_data",
]

TRACE_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class GridFunction:
    """Samples of a function on a uniform grid over (0, L) or a rectangle.

    ``axes`` holds one or two strictly ascending, uniformly spaced sample
    coordinate arrays; ``values`` has shape ``(len(x),)`` or
    ``(len(x), len(y))``.  Use :func:`make_grid_function` or
    :func:`read_grid_csv` so the zero-trace condition is checked.
    """

    axes: tuple[np.ndarray, ...]
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if len(axes) not in (1, 2):
            raise ConfigError("GridFunction supports one or two axes")
        for a in axes:
            if a.ndim != 1 or a.size < 2:
                raise ConfigError("each axis needs at least two samples")
            d = np.diff(a)
            if np.any(d <= 0.0):
                raise ConfigError("axis samples must be strictly ascending")
            if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12 * (a[-1] - a[0])):
                raise ConfigError("axis samples must be uniformly spaced")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != tuple(a.size for a in axes):
            raise ConfigError(
                f"values of shape {vals.shape} do not match axes of sizes "
                f"{tuple(a.size for a in axes)}"
            )
        if not np.all(np.isfinite(vals)):
            raise ConfigError("values must be finite")
        for a in axes:
            a.setflags(write=False)
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)

    @property
    def ndim(self) -> int:
        return len(self.axes)


def _boundary_values(gf: GridFunction) -> np.ndarray:
    if gf.ndim == 1:
        return gf.values[[0, -1]]
    frame = np.concatenate(
        [gf.values[0, :], gf.values[-1, :], gf.values[:, 0], gf.values[:, -1]]
    )
    return frame


def _check_trace(gf: GridFunction, boundary: str) -> GridFunction:
    if boundary not in ("error", "warn"):
        raise ConfigError(f"boundary policy must be 'error' or 'warn', got {boundary!r}")
    worst = float(np.max(np.abs(_boundary_values(gf))))
    if worst > TRACE_TOL:
        msg = (
            f"boundary samples reach {worst:.3e}, above the zero-trace "
            f"tolerance {TRACE_TOL:g}"
        )
        if boundary == "error":
            raise ConfigError(msg)
        warnings.warn(msg, stacklevel=3)
    return gf


def make_grid_function(
    axes: Sequence[np.ndarray], values: np.ndarray, boundary: str = "error"
) -> GridFunction:
    """Validated constructor enforcing the zero-trace condition per policy."""
    return _check_trace(GridFunction(axes=tuple(axes), values=values), boundary)


# ---------------------------------------------------------------------------
# CSV exchange


def read_grid_csv(path, boundary: str = "error") -> GridFunction:
    """Read `x,value` or `x,y,value` rows (header required) into a GridFunction.

    Rows may come in any order; the grid must be complete (every (x, y)
    combination present exactly once in two dimensions).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file, expected a header row") from None
        header = [h.strip().lower() for h in header]
        if header == ["x", "value"]:
            ndim = 1
        elif header == ["x", "y", "value"]:
            ndim = 2
        else:
            raise ConfigError(
                f"{path}: header must be 'x,value' or 'x,y,value', got {header!r}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != ndim + 1:
                raise ConfigError(f"{path}:{lineno}: expected {ndim + 1} fields")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    data = np.asarray(rows)
    if ndim == 1:
        order = np.argsort(data[:, 0])
        x = data[order, 0]
        if np.unique(x).size != x.size:
            raise ConfigError(f"{path}: duplicate x samples")
        return make_grid_function((x,), data[order, 1], boundary)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if xs.size * ys.size != data.shape[0]:
        raise ConfigError(
            f"{path}: {data.shape[0]} rows do not fill a {xs.size} x {ys.size} grid"
        )
    values = np.full((xs.size, ys.size), np.nan)
    xi = np.searchsorted(xs, data[:, 0])
    yi = np.searchsorted(ys, data[:, 1])
    values[xi, yi] = data[:, 2]
    if np.any(np.isnan(values)):
        raise ConfigError(f"{path}: grid is incomplete (some (x, y) pairs missing)")
    return make_grid_function((xs, ys), values, boundary)


def write_grid_csv(gf: GridFunction, path) -> None:
    """Write a GridFunction in the `x,value` / `x,y,value` exchange format."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if gf.ndim == 1:
            writer.writerow(["x", "value"])
            for x, v in zip(gf.axes[0], gf.values):
                writer.writerow([repr(float(x)), repr(float(v))])
        else:
            writer.writerow(["x", "y", "value"])
            for i, x in enumerate(gf.axes[0]):
                for j, y in enumerate(gf.axes[1]):
                    writer.writerow([repr(float(x)), repr(float(y)), repr(float(gf.values[i, j]))])


# ---------------------------------------------------------------------------
# quadrature against the sine bases


def _axis_against_interval(a: np.ndarray, length: float, what: str) -> None:
    tol = 1e-9 * length
    if abs(a[0]) > tol or abs(a[-1] - length) > tol:
        raise ConfigError(
            f"{what} axis spans [{a[0]:g}, {a[-1]:g}] but the model domain is "
            f"[0, {length:g}]"
        )


def _sine_matrix(a: np.ndarray, length: float, n: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    return math.sqrt(2.0 / length) * np.sin(np.outer(a, j * (math.pi / length)))


def _trapezoid_weights(a: np.ndarray) -> np.ndarray:
    h = (a[-1] - a[0]) / (a.size - 1)
    w = np.full(a.size, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _axis_mode_counts(model: SpectrumModel) -> tuple[int, ...]:
    basis = model.basis
    if isinstance(basis, Sine1D):
        return (model.n_modes,)
    if isinstance(basis, SineRect2D):
        return (basis.nx, basis.ny)
    raise ConfigError("this model has no known eigenfunctions to sample against")


def ingest_grid(gf: GridFunction, model: SpectrumModel) -> SpectralVec:
    """Coefficients of a sampled function by trapezoid quadrature.

    Requires at least ``2 * n + 1`` samples along an axis carrying n modes
    (Nyquist guard) and a grid spanning the model's domain.
    """
    counts = _axis_mode_counts(model)
    if gf.ndim != len(counts):
        raise ConfigError(
            f"grid has {gf.ndim} axes but the model domain has {len(counts)}"
        )
    for a, n in zip(gf.axes, counts):
        if a.size < 2 * n + 1:
            raise ConfigError(
                f"resolution {a.size} is below the Nyquist guard {2 * n + 1} "
                f"for {n} modes along an axis"
            )
    basis = model.basis
    if isinstance(basis, Sine1D):
        x = gf.axes[0]
        _axis_against_interval(x, basis.length, "x")
        B = _sine_matrix(x, basis.length, counts[0])
        c = np.trapezoid(gf.values[:, None] * B, x, axis=0)
        return SpectralVec(c, model)
    x, y = gf.axes
    _axis_against_interval(x, basis.lx, "x")
    _axis_against_interval(y, basis.ly, "y")
    Bx = _sine_matrix(x, basis.lx, basis.nx)
    By = _sine_matrix(y, basis.ly, basis.ny)
    wx = _trapezoid_weights(x)
    wy = _trapezoid_weights(y)
    table = (Bx * wx[:, None]).T @ gf.values @ (By * wy[:, None])
    c = np.array([table[j - 1, k - 1] for (j, k) in model.mode_index_map])
    return SpectralVec(c, model)


def render_grid(v: SpectralVec, points_per_axis: Optional[int] = None) -> GridFunction:
    """Evaluate a coefficient vector back to samples on a uniform grid.

    The default resolution comfortably exceeds the Nyquist guard, so
    ``ingest_grid(render_grid(v), model)`` recovers the coefficients up to
    quadrature error.
    """
    model = v.model
    counts = _axis_mode_counts(model)
    basis = model.basis
    if points_per_axis is None:
        points_per_axis = max(257, 4 * max(counts) + 1)
    p = int(points_per_axis)
    if p < 2:
        raise ConfigError("points_per_axis must be at least 2")
    if isinstance(basis, Sine1D):
        x = np.linspace(0.0, basis.length, p)
        B = _sine_matrix(x, basis.length, counts[0])
        return GridFunction(axes=(x,), values=B @ v.coeffs)
    x = np.linspace(0.0, basis.lx, p)
    y = np.linspace(0.0, basis.ly, p)
    Bx = _sine_matrix(x, basis.lx, basis.nx)
    By = _sine_matrix(y, basis.ly, basis.ny)
    C = np.zeros((basis.nx, basis.ny))
    for c, (j, k) in zip(v.coeffs, model.mode_index_map):
        C[j - 1, k - 1] = c
    return GridFunction(axes=(x, y), values=Bx @ C @ By.T)


# ---------------------------------------------------------------------------
# synthetic data generators


def _profile_1d(xi: np.ndarray, smooth_amplitude, rough_amplitude, rough_frequency):
    smooth = 16.0 * xi**2 * (1.0 - xi) ** 2
    rough = np.sign(np.sin(2.0 * math.pi * rough_frequency * xi))
    return smooth_amplitude * smooth + rough_amplitude * rough


def synth_data(name: str, model: SpectrumModel, **params) -> SpectralVec:
    """Named data generators for experiments.

    ``unit_mode(k)``
        Unit coefficient on the k-th mode position.
    ``parabolic_terminal(u0, T, a2=1.0)``
        Terminal state of the forward heat flow started at ``u0`` (a
        SpectralVec), with the diffusion constant absorbed into an
        effective horizon ``T / a2``.
    ``piecewise_profile(smooth_amplitude=1.0, rough_amplitude=0.3,
    rough_frequency=4, resolution=None)``
        A smooth quartic bump plus a square-wave component, sampled on the
        model's domain and ingested by quadrature.  The boundary samples
        are set exactly to zero, and the same profile is used as a product
        over both axes on a rectangle.
    """
    if name == "unit_mode":
        try:
            k = params.pop("k")
        except KeyError:
            raise ConfigError("unit_mode needs a mode position k") from None
        _no_extras(name, params)
        return unit_mode(model, int(k))

    if name == "parabolic_terminal":
        try:
            u0 = params.pop("u0")
            T = float(params.pop("T"))
        except KeyError as exc:
            raise ConfigError(f"parabolic_terminal needs {exc}") from None
        a2 = float(params.pop("a2", 1.0))
        _no_extras(name, params)
        if not isinstance(u0, SpectralVec):
            raise ConfigError("parabolic_terminal needs u0 as a SpectralVec")
        if u0.model != model:
            raise ConfigError("u0 lives over a different model")
        if not (a2 > 0.0):
            raise ConfigError(f"a2 must be positive, got {a2!r}")
        return parabolic_solution_at(u0, T / a2)

    if name == "piecewise_profile":
        smooth_amplitude = float(params.pop("smooth_amplitude", 1.0))
        rough_amplitude = float(params.pop("rough_amplitude", 0.3))
        rough_frequency = int(params.pop("rough_frequency", 4))
        resolution = params.pop("resolution", None)
        _no_extras(name, params)
        counts = _axis_mode_counts(model)
        if resolution is None:
            resolution = max(257, 4 * max(counts) + 1)
        resolution = int(resolution)
        basis = model.basis
        if isinstance(basis, Sine1D):
            x = np.linspace(0.0, basis.length, resolution)
            vals = _profile_1d(x / basis.length, smooth_amplitude, rough_amplitude, rough_frequency)
            vals[0] = vals[-1] = 0.0
            gf = GridFunction(axes=(x,), values=vals)
        else:
            x = np.linspace(0.0, basis.lx, resolution)
            y = np.linspace(0.0, basis.ly, resolution)
            px = _profile_1d(x / basis.lx, smooth_amplitude, rough_amplitude, rough_frequency)
            py = _profile_1d(y / basis.ly, smooth_amplitude, rough_amplitude, rough_frequency)
            vals = np.outer(px, py)
            vals[0, :] = vals[-1, :] = 0.0
            vals[:, 0] = vals[:, -1] = 0.0
            gf = GridFunction(axes=(x, y), values=vals)
        return ingest_grid(gf, model)

    raise ConfigError(f"unknown data generator {name!r}")


def _no_extras(name: str, params: dict) -> None:
    if params:
        raise ConfigError(f"{name} got unexpected parameters {sorted(params)}")
