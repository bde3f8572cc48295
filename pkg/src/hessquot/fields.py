"""Periodic grid fields on flat tori, 4th-order stencils, built-in families and CSV I/O.

Grids are cell-vertex and periodic: axis ``j`` has ``grid[j]`` points at
``x = i * spacing[j]``, so the period is ``grid[j] * spacing[j]``.  Arrays are
indexed ``values[i1, i2, (i3)]`` (row-major), tensor fields carry two extra
trailing axes.
"""

import csv
import re
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InvalidInputError

MIN_POINTS = 8


def _grid_meta(dim, grid, spacing):
    if dim not in (2, 3):
        raise InvalidInputError(f"dim must be 2 or 3, got {dim}")
    grid = tuple(int(g) for g in grid)
    spacing = tuple(float(h) for h in spacing)
    if len(grid) != dim or len(spacing) != dim:
        raise InvalidInputError("grid and spacing need one entry per axis")
    if min(grid) < MIN_POINTS:
        raise InvalidInputError(f"need at least {MIN_POINTS} points per axis, got {grid}")
    if not all(h > 0.0 and np.isfinite(h) for h in spacing):
        raise InvalidInputError("spacing must be positive and finite")
    return grid, spacing


@dataclass(frozen=True)
class ScalarField:
    dim: int
    grid: tuple
    spacing: tuple
    values: np.ndarray

    def __post_init__(self):
        grid, spacing = _grid_meta(self.dim, self.grid, self.spacing)
        values = np.asarray(self.values, dtype=float)
        if values.shape != grid:
            raise InvalidInputError(f"values shape {values.shape} does not match grid {grid}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("scalar field has non-finite values")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "values", values)

    periodic = True


@dataclass(frozen=True)
class SymTensorField:
    dim: int
    grid: tuple
    spacing: tuple
    values: np.ndarray

    def __post_init__(self):
        grid, spacing = _grid_meta(self.dim, self.grid, self.spacing)
        values = np.asarray(self.values, dtype=float)
        if values.shape != grid + (self.dim, self.dim):
            raise InvalidInputError(f"values shape {values.shape} does not match grid {grid} x {self.dim}x{self.dim}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("tensor field has non-finite values")
        if not np.array_equal(values, np.swapaxes(values, -1, -2)):
            raise InvalidInputError("tensor field is not symmetric")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "values", values)

    periodic = True

    @property
    def npoints(self):
        return int(np.prod(self.grid))

    def flat(self):
        return self.values.reshape(-1, self.dim, self.dim)

    def coords(self, index):
        """Coordinates of a grid multi-index."""
        return tuple(i * h for i, h in zip(index, self.spacing))


def constant_tensor(dim, grid, spacing, matrix):
    m = np.asarray(matrix, dtype=float)
    grid = tuple(grid)
    return SymTensorField(dim, grid, spacing, np.broadcast_to(m, grid + (dim, dim)).copy())


def same_grid(a, b):
    return a.dim == b.dim and a.grid == b.grid and np.allclose(a.spacing, b.spacing, rtol=1e-13, atol=0.0)


# stencils -------------------------------------------------------------------


def d1(values, axis, h):
    """Centered 4th-order first derivative along a grid axis."""
    p1, m1 = np.roll(values, -1, axis), np.roll(values, 1, axis)
    p2, m2 = np.roll(values, -2, axis), np.roll(values, 2, axis)
    return (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)


def d2(values, axis, h):
    p1, m1 = np.roll(values, -1, axis), np.roll(values, 1, axis)
    p2, m2 = np.roll(values, -2, axis), np.roll(values, 2, axis)
    return (-p2 + 16.0 * p1 - 30.0 * values + 16.0 * m1 - m2) / (12.0 * h * h)


def gradient(values, spacing):
    """Stack of first derivatives on a trailing axis."""
    return np.stack([d1(values, j, h) for j, h in enumerate(spacing)], axis=-1)


def hessian(values, spacing):
    """Second derivatives on two trailing axes; mixed ones as d1 composed with d1."""
    dim = len(spacing)
    out = np.empty(values.shape + (dim, dim))
    for i in range(dim):
        out[..., i, i] = d2(values, i, spacing[i])
    for i, j in combinations(range(dim), 2):
        mixed = d1(d1(values, i, spacing[i]), j, spacing[j])
        out[..., i, j] = mixed
        out[..., j, i] = mixed
    return out


def tensor_gradient(values, spacing):
    """D_l w_ij on a trailing axis: shape grid + (n, n, dim)."""
    return np.stack([d1(values, j, h) for j, h in enumerate(spacing)], axis=-1)


# families -------------------------------------------------------------------


def torus_grid(dim, n_points):
    h = 2.0 * np.pi / n_points
    grid = (n_points,) * dim
    axes = np.meshgrid(*[np.arange(n_points) * h for _ in range(dim)], indexing="ij")
    return grid, (h,) * dim, axes


def cosine_family(dim, n_points, a=0.3, spread=1.0):
    """u = a (sum_j cos(x_j + p_j) + sum_{j<l} sin(x_j + x_l) / 2) with diagonal chi.

    ||D^2 u|| <= a M with M = dim + dim(dim-1)/2, and chi_jj = 1 + aM + spread (dim - j)(1 + 2aM)
    (j 1-based), so W is positive definite with lambda_1 - lambda_2 >= spread whenever spread > 0.
    """
    if a < 0.0 or spread < 0.0:
        raise InvalidInputError("cosine family needs a >= 0 and spread >= 0")
    grid, spacing, x = torus_grid(dim, n_points)
    u = sum(np.cos(x[j] + 0.7 * j) for j in range(dim))
    u = u + 0.5 * sum(np.sin(x[j] + x[l]) for j, l in combinations(range(dim), 2))
    bound = a * (dim + dim * (dim - 1) / 2)
    diag = [1.0 + bound + spread * (dim - j) * (1.0 + 2.0 * bound) for j in range(1, dim + 1)]
    return ScalarField(dim, grid, spacing, a * u), constant_tensor(dim, grid, spacing, np.diag(diag))


def bumps_family(dim, n_points, a=0.5, width=1.0):
    """u = a exp((sum_j cos(x_j - c_j) - dim) / width) with chi a constant multiple of Id."""
    if a < 0.0 or width <= 0.0:
        raise InvalidInputError("bumps family needs a >= 0 and width > 0")
    grid, spacing, x = torus_grid(dim, n_points)
    g = sum(np.cos(x[j] - 0.9 * (j + 1)) for j in range(dim)) - dim
    shift = 1.0 + a * (dim / width**2 + 1.0 / width)
    return ScalarField(dim, grid, spacing, a * np.exp(g / width)), constant_tensor(dim, grid, spacing, shift * np.eye(dim))


def constant_family(dim, n_points, c=2.0):
    if c <= 0.0:
        raise InvalidInputError("constant family needs c > 0")
    grid, spacing, _ = torus_grid(dim, n_points)
    return ScalarField(dim, grid, spacing, np.zeros(grid)), constant_tensor(dim, grid, spacing, c * np.eye(dim))


FAMILIES = {"cosine": cosine_family, "bumps": bumps_family, "constant": constant_family}

_SPEC_RE = re.compile(r"^([a-z]+)(?::(.*))?$")


def parse_field_spec(text):
    """``name:key=val,key=val`` -> (name, params) or ``file:path`` -> ("file", {"path": path})."""
    m = _SPEC_RE.match(text.strip())
    if not m:
        raise InvalidInputError(f"malformed field spec {text!r}")
    name, rest = m.group(1), m.group(2)
    if name == "file":
        if not rest:
            raise InvalidInputError("file: field spec needs a path")
        return name, {"path": rest}
    if name not in FAMILIES:
        raise InvalidInputError(f"unknown field family {name!r}; choose from {sorted(FAMILIES)} or file:PATH")
    params = {}
    for item in filter(None, (rest or "").split(",")):
        key, sep, val = item.partition("=")
        if not sep or not key.isidentifier():
            raise InvalidInputError(f"malformed parameter {item!r} in field spec")
        try:
            params[key] = float(val)
        except ValueError:
            raise InvalidInputError(f"parameter {key} is not a number: {val!r}") from None
    return name, params


def build_family(name, dim, n_points, **params):
    try:
        return FAMILIES[name](dim, n_points, **params)
    except TypeError as exc:
        raise InvalidInputError(f"bad parameters for {name}: {exc}") from None


# CSV ------------------------------------------------------------------------


def _entry_names(dim):
    return [f"w{i + 1}{j + 1}" for i in range(dim) for j in range(dim)]


def write_field_csv(path, wf):
    coord = [f"x{j + 1}" for j in range(wf.dim)]
    idx = np.indices(wf.grid).reshape(wf.dim, -1).T
    vals = wf.flat().reshape(wf.npoints, -1)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(coord + _entry_names(wf.dim))
        for ix, row in zip(idx, vals):
            xs = [repr(float(i * h)) for i, h in zip(ix, wf.spacing)]
            out.writerow(xs + [repr(float(v)) for v in row])


def read_field_csv(path):
    """Read a tensor field; columns x1..xd then all d*d entries or the upper triangle."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidInputError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    dim = sum(1 for c in header if re.fullmatch(r"x\d", c))
    if dim not in (2, 3) or header[:dim] != [f"x{j + 1}" for j in range(dim)]:
        raise InvalidInputError(f"{path}: header must start with x1,x2[,x3]")
    full = _entry_names(dim)
    upper = [f"w{i + 1}{j + 1}" for i in range(dim) for j in range(i, dim)]
    names = header[dim:]
    if names not in (full, upper):
        raise InvalidInputError(f"{path}: entry columns must be {','.join(full)} or {','.join(upper)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InvalidInputError(f"{path}: ragged rows")
    grid, spacing = [], []
    for j in range(dim):
        ticks = np.unique(data[:, j])
        steps = np.diff(ticks)
        if ticks.size < MIN_POINTS or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise InvalidInputError(f"{path}: axis x{j + 1} is not a uniform grid of >= {MIN_POINTS} points")
        grid.append(ticks.size)
        spacing.append(float(steps[0]))
    grid = tuple(grid)
    if data.shape[0] != int(np.prod(grid)):
        raise InvalidInputError(f"{path}: expected {int(np.prod(grid))} rows, got {data.shape[0]}")
    index = tuple(np.rint((data[:, j] - data[:, j].min()) / spacing[j]).astype(int) for j in range(dim))
    values = np.empty(grid + (dim, dim))
    cols = data[:, dim:]
    if names == full:
        values[index] = cols.reshape(-1, dim, dim)
    else:
        iu = np.triu_indices(dim)
        m = np.zeros((data.shape[0], dim, dim))
        m[:, iu[0], iu[1]] = cols
        m[:, iu[1], iu[0]] = cols
        values[index] = m
    return SymTensorField(dim, grid, tuple(spacing), values)
