"""Closed-form and numeric geometry kernels.

Lune/lens measures and their inverses drive the short-range distance
estimators; geodesics and symmetry groups support evaluation.  All functions
accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gamma

from .config import DomainSpec, SPHERE, SQUARE, HYPERCUBE
from .errors import GeometryDomainError, ParameterError


def _check_range(x, lo, hi, what):
    x = np.asarray(x, dtype=float)
    if np.any(x < lo) or np.any(x > hi):
        raise GeometryDomainError(f"{what} outside [{lo:g}, {hi:g}]")
    return x


def lune_area(x, r: float):
    """Area of the lune B(p,r) \\ B(q,r) for centers x apart (2D).

    Equals pi r^2 - 2 r^2 arccos(x / 2r) + (x/2) sqrt(4 r^2 - x^2); zero at
    x=0 and the full disc area at x=2r, strictly increasing in between.
    """
    x = _check_range(x, 0.0, 2.0 * r, "lune separation")
    arg = np.clip(x / (2.0 * r), -1.0, 1.0)
    out = math.pi * r * r - 2.0 * r * r * np.arccos(arg) + 0.5 * x * np.sqrt(
        np.maximum(4.0 * r * r - x * x, 0.0)
    )
    out = np.clip(out, 0.0, math.pi * r * r)
    return float(out) if np.ndim(x) == 0 else out


def lune_area_deriv(x, r: float):
    """Derivative of lune_area in the separation: sqrt(4 r^2 - x^2)."""
    x = _check_range(x, 0.0, 2.0 * r, "lune separation")
    out = np.sqrt(np.maximum(4.0 * r * r - x * x, 0.0))
    return float(out) if np.ndim(x) == 0 else out


def lune_area_inverse(area, r: float):
    """Separation x with lune_area(x, r) == area, by monotone bisection.

    60 iterations bracketed on [0, 2r]; unconditionally convergent even at the
    x = 2r endpoint where the derivative vanishes.
    """
    area = _check_range(area, 0.0, math.pi * r * r * (1.0 + 1e-12), "lune area")
    return _bisect_increasing(lambda t: lune_area(t, r), area, 0.0, 2.0 * r)


def _bisect_increasing(f, target, lo: float, hi: float, iters: int = 60):
    target = np.asarray(target, dtype=float)
    scalar = target.ndim == 0
    t = np.atleast_1d(target).astype(float)
    a = np.full_like(t, lo)
    b = np.full_like(t, hi)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        below = f(mid) < t
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    out = 0.5 * (a + b)
    return float(out[0]) if scalar else out


def ball_volume(r: float, m: int) -> float:
    """Volume of the m-dimensional Euclidean ball of radius r."""
    return math.pi ** (m / 2.0) / gamma(m / 2.0 + 1.0) * r**m


def cap_volume(h, r: float, m: int):
    """Volume of an m-ball cap of height h (0 <= h <= 2r)."""
    h = _check_range(h, 0.0, 2.0 * r, "cap height")
    full = ball_volume(r, m)
    # split at the equator: caps taller than r via complement
    hs = np.minimum(h, 2.0 * r - h)
    x = np.clip(1.0 - (1.0 - hs / r) ** 2, 0.0, 1.0)
    small = 0.5 * full * betainc((m + 1) / 2.0, 0.5, x)
    out = np.where(h <= r, small, full - small)
    return float(out) if np.ndim(h) == 0 else out


def lune_volume(x, r: float, m: int):
    """m-dimensional lune measure: ball volume minus the equal-radius lens."""
    x = _check_range(x, 0.0, 2.0 * r, "lune separation")
    out = ball_volume(r, m) - 2.0 * cap_volume(np.maximum(r - 0.5 * x, 0.0), r, m)
    return float(out) if np.ndim(x) == 0 else out


def lens_area(d, r1: float, r2: float):
    """Area of B(., r1) ∩ B(., r2) with centers d apart (2D, any radii).

    Clamps to the degenerate cases: 0 once the balls separate, the smaller
    disc once it nests inside the larger.
    """
    if r1 <= 0 or r2 <= 0:
        raise GeometryDomainError("radii must be positive")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise GeometryDomainError("separation must be nonnegative")
    scalar = d.ndim == 0
    d = np.atleast_1d(d)
    rmin, rmax = min(r1, r2), max(r1, r2)
    out = np.empty_like(d)
    apart = d >= r1 + r2
    nested = d <= rmax - rmin
    mid = ~(apart | nested)
    out[apart] = 0.0
    out[nested] = math.pi * rmin * rmin
    if np.any(mid):
        dm = d[mid]
        a1 = np.clip((dm * dm + r1 * r1 - r2 * r2) / (2.0 * dm * r1), -1.0, 1.0)
        a2 = np.clip((dm * dm + r2 * r2 - r1 * r1) / (2.0 * dm * r2), -1.0, 1.0)
        s = (
            (r1 + r2 - dm)
            * (dm + r1 - r2)
            * (dm - r1 + r2)
            * (dm + r1 + r2)
        )
        out[mid] = (
            r1 * r1 * np.arccos(a1)
            + r2 * r2 * np.arccos(a2)
            - 0.5 * np.sqrt(np.maximum(s, 0.0))
        )
    return float(out[0]) if scalar else out


def lens_width_scaling(delta, rmin: float, m: int = 2):
    """Order-of-magnitude proxy for the measure of a lens of width delta.

    Returns delta^((m+1)/2) * rmin^((m-1)/2).  An envelope used to size
    probing lenses, not an exact measure.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0) or np.any(delta > 2.0 * rmin):
        raise GeometryDomainError("width must lie in (0, 2*rmin]")
    out = delta ** ((m + 1) / 2.0) * rmin ** ((m - 1) / 2.0)
    return float(out) if np.ndim(delta) == 0 else out


def spherical_cap_area(rho, R: float):
    """Area of a geodesic cap of radius rho on the sphere of radius R."""
    rho = _check_range(rho, 0.0, math.pi * R, "cap radius")
    out = 2.0 * math.pi * R * R * (1.0 - np.cos(rho / R))
    return float(out) if np.ndim(rho) == 0 else out


def _sphere_lens_area(psi, theta: float, R: float, nodes: int = 192):
    """Area of the intersection of two geodesic caps of angular radius theta
    whose centers are psi apart, by Gauss-Legendre quadrature."""
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * theta * (t + 1.0)
    w = 0.5 * theta * w
    # arc of the circle of angular radius t (around one center) lying inside
    # the other cap, from the spherical law of cosines
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (math.cos(theta) - np.cos(t)[None, :] * np.cos(psi)[:, None]) / (
            np.sin(t)[None, :] * np.sin(psi)[:, None]
        )
    c = np.nan_to_num(c, nan=-1.0, posinf=1.0, neginf=-1.0)
    phi = np.arccos(np.clip(c, -1.0, 1.0))
    area = 2.0 * R * R * (phi * np.sin(t)[None, :]) @ w
    cap = spherical_cap_area(theta * R, R)
    area[psi <= 1e-12] = cap
    return np.clip(area, 0.0, cap)


class LuneKernel:
    """Lune measure of the r-ball geometry for one domain, plus its inverse.

    Exposes the quantities the short-range estimators need: the full ball
    measure, the measure at separation r, the forward map and the inverse.
    """

    def __init__(self, ball: float, xmax: float):
        self.ball = ball
        self.xmax = xmax

    def lune(self, x):
        raise NotImplementedError

    def inverse(self, area):
        area = _check_range(area, 0.0, self.ball * (1.0 + 1e-12), "lune area")
        return _bisect_increasing(self.lune, np.minimum(area, self.ball), 0.0, self.xmax)

    @property
    def lune_at_r(self) -> float:
        return float(self.lune(self.r))


class _Flat2DLune(LuneKernel):
    def __init__(self, r: float):
        super().__init__(math.pi * r * r, 2.0 * r)
        self.r = r

    def lune(self, x):
        return lune_area(x, self.r)


class _FlatMLune(LuneKernel):
    def __init__(self, r: float, m: int):
        super().__init__(ball_volume(r, m), 2.0 * r)
        self.r = r
        self.m = m

    def lune(self, x):
        return lune_volume(x, self.r, self.m)


class _SphereLune(LuneKernel):
    """Tabulated lune area on the sphere (monotone grid + interpolation)."""

    GRID = 4096

    def __init__(self, r: float, R: float):
        xmax = min(2.0 * r, math.pi * R)
        super().__init__(spherical_cap_area(min(r, math.pi * R), R), xmax)
        self.r = r
        self.R = R
        theta = min(r / R, math.pi)
        self._x = np.linspace(0.0, xmax, self.GRID)
        lens = _sphere_lens_area(self._x / R, theta, R)
        f = self.ball - lens
        # enforce monotonicity against quadrature jitter
        self._f = np.maximum.accumulate(np.clip(f, 0.0, self.ball))

    def lune(self, x):
        x = _check_range(x, 0.0, self.xmax * (1 + 1e-12), "lune separation")
        out = np.interp(x, self._x, self._f)
        return float(out) if np.ndim(x) == 0 else out

    def inverse(self, area):
        area = _check_range(area, 0.0, self.ball * (1.0 + 1e-12), "lune area")
        out = np.interp(area, self._f, self._x)
        return float(out) if np.ndim(area) == 0 else out


def lune_kernel(domain: DomainSpec, r: float) -> LuneKernel:
    if domain.kind == SPHERE:
        return _SphereLune(r, domain.sphere_radius)
    if domain.m == 2:
        return _Flat2DLune(r)
    return _FlatMLune(r, domain.m)


def geodesic_distance(u, v, domain: DomainSpec):
    """Distance between points of the domain (rows or single points)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != domain.ndim or v.shape[-1] != domain.ndim:
        raise ParameterError(
            f"points must have {domain.ndim} coordinates for {domain.kind}"
        )
    if domain.kind == SPHERE:
        dots = np.clip(np.sum(u * v, axis=-1), -1.0, 1.0)
        out = domain.sphere_radius * np.arccos(dots)
    else:
        out = np.linalg.norm(u - v, axis=-1)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# symmetry groups


@dataclass(frozen=True)
class SymmetryElement:
    """One element of the domain's symmetry group.

    kind "dihedral8": index 0-3 rotations by index*90deg, 4-7 reflections.
    kind "hypercube": axis permutation with per-axis reflection flags.
    kind "orthogonal3": explicit 3x3 orthogonal matrix (sphere).
    """

    kind: str
    index: int = 0
    perm: tuple = ()
    flips: tuple = ()
    matrix: tuple = ()

    def describe(self) -> str:
        if self.kind == "dihedral8":
            names = [
                "identity", "rot90", "rot180", "rot270",
                "reflect-x", "reflect-y", "reflect-diag", "reflect-antidiag",
            ]
            return names[self.index]
        if self.kind == "hypercube":
            return f"perm={list(self.perm)} flips={list(self.flips)}"
        return "orthogonal3"


def dihedral8_elements() -> list[SymmetryElement]:
    return [SymmetryElement(kind="dihedral8", index=k) for k in range(8)]


def hypercube_elements(m: int) -> list[SymmetryElement]:
    """All 2^m * m! signed axis permutations."""
    out = []
    for perm in itertools.permutations(range(m)):
        for flips in itertools.product((False, True), repeat=m):
            out.append(SymmetryElement(kind="hypercube", perm=perm, flips=flips))
    return out


def apply_symmetry(sigma: SymmetryElement, points, domain: DomainSpec):
    """Image of points (row-wise) under a symmetry of the domain."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if domain.kind == SPHERE:
        if sigma.kind != "orthogonal3":
            raise ParameterError("sphere symmetries are 3x3 orthogonal matrices")
        mat = np.asarray(sigma.matrix, dtype=float).reshape(3, 3)
        if not np.allclose(mat.T @ mat, np.eye(3), atol=1e-9):
            raise ParameterError("matrix is not orthogonal")
        out = pts @ mat.T
    elif sigma.kind == "dihedral8":
        if domain.kind == HYPERCUBE and domain.m != 2:
            raise ParameterError("dihedral symmetry applies to two dimensions")
        s = domain.side
        x, y = pts[:, 0], pts[:, 1]
        table = {
            0: lambda: (x, y),
            1: lambda: (s - y, x),
            2: lambda: (s - x, s - y),
            3: lambda: (y, s - x),
            4: lambda: (s - x, y),
            5: lambda: (x, s - y),
            6: lambda: (y, x),
            7: lambda: (s - y, s - x),
        }
        out = np.column_stack(table[sigma.index]())
    elif sigma.kind == "hypercube":
        if len(sigma.perm) != domain.m:
            raise ParameterError("permutation length must match domain dimension")
        s = domain.side
        out = pts[:, list(sigma.perm)]
        flips = np.asarray(sigma.flips, dtype=bool)
        out[:, flips] = s - out[:, flips]
    else:
        raise ParameterError(f"symmetry {sigma.kind!r} incompatible with {domain.kind}")
    return out if np.asarray(points).ndim > 1 else out[0]


def domain_symmetries(domain: DomainSpec) -> list[SymmetryElement]:
    if domain.kind == SPHERE:
        raise ParameterError("sphere symmetry group is continuous; use Procrustes")
    if domain.m == 2:
        return dihedral8_elements()
    return hypercube_elements(domain.m)
