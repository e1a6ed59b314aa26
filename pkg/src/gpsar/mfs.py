"""Method-of-fundamental-solutions solver for scattering by a penetrable
target buried under a (possibly rough) air-soil interface.

The scattered fields in the three regions are represented as superpositions
of free-space Green's functions with sources displaced off the interface
(vertically, by delta_int) and off the target boundary (along the normals, by
delta_tar).  Collocating the two interface conditions and the two target
transmission conditions at the sample points yields a dense complex block
system in the expansion coefficients (a, b, c_ext, c_int):

    [ -A1   A2   B1    0  ] [a    ]   [y1]
    [ -A3   A4   B2    0  ] [b    ] = [y2]
    [  0    C1   S1  -S2  ] [c_ext]   [0 ]
    [  0    C2   S3  -S4  ] [c_int]   [0 ]

The system matrix depends only on geometry and frequency, so one
factorization serves every source position.  Besides the full solve, three
reduced variants are provided: first-order target-interface interaction,
first-order with a flat interface for the return trip (shower-curtain
argument), and a point-target model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .geometry import MfsOffsets, RoughSurface, TargetBoundary, flat_surface
from .special_functions import _hankel1_01

__all__ = [
    "MediumParams",
    "PointTarget",
    "MfsSolution",
    "FrequencyFactorization",
    "SolverError",
    "assemble_blocks",
    "solve_full",
    "solve_no_target",
    "solve_first_order",
    "solve_first_order_flat",
    "solve_point_target",
    "solve_isolated_target",
    "evaluate_field",
    "classify_points",
    "cylinder_series_oracle",
    "FullEngine",
    "NoTargetEngine",
    "FirstOrderEngine",
    "PointTargetEngine",
]

# Pivoted LU with one refinement step keeps the backward residual near eps up
# to condition ~1e14; beyond that a truncated-SVD least-squares solve is the
# safer choice.  Above 1e15 the factorization carries no usable information.
CONDITION_SVD_FALLBACK = 1e14
CONDITION_FAILURE = 1e15
RESIDUAL_LIMIT = 1e-10


class SolverError(RuntimeError):
    """Linear-solve failure (singular or unacceptably conditioned system)."""


@dataclass(frozen=True)
class MediumParams:
    """Media at one frequency: f in GHz, wavespeed in cm GHz, wavenumbers in
    rad/cm (k0 air, k1 soil, k2 target interior)."""

    frequency: float
    eps_r1: float
    eps_r2: float
    wavespeed: float = 30.0

    def __post_init__(self):
        if self.frequency <= 0 or self.wavespeed <= 0:
            raise ValueError("frequency and wavespeed must be positive")
        if self.eps_r1 < 1 or self.eps_r2 < 1:
            raise ValueError("relative dielectric constants must be >= 1")

    @property
    def omega(self):
        return 2.0 * math.pi * self.frequency

    @property
    def k0(self):
        return self.omega / self.wavespeed

    @property
    def k1(self):
        return self.k0 * math.sqrt(self.eps_r1)

    @property
    def k2(self):
        return self.k0 * math.sqrt(self.eps_r2)


@dataclass(frozen=True)
class PointTarget:
    """Point scatterer at `position` with complex scattering strength
    `reflectivity`."""

    position: tuple[float, float]
    reflectivity: complex = 1.0

    def __post_init__(self):
        if self.position[1] >= 0:
            raise ValueError("point target must sit below the interface")


@dataclass(eq=False)
class MfsSolution:
    """Expansion coefficients of one solve plus solve diagnostics.

    `a`, `b` live on the scenario interface sources; `c_ext`, `c_int` on the
    target sources.  The flat-interface variants carry their return-trip
    coefficients separately in `a_flat`, `b_flat` (sources on z = +/- delta
    of the flattened interface).
    """

    variant: str
    a: np.ndarray
    b: np.ndarray
    c_ext: np.ndarray | None = None
    c_int: np.ndarray | None = None
    a_flat: np.ndarray | None = None
    b_flat: np.ndarray | None = None
    residual: float = 0.0
    condition: float = 0.0
    parts: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def _kernel_pair(k, eval_pts, src_pts, eval_normals=None):
    """Green's matrix G and, when normals are given, the collocation-side
    normal-derivative matrix dG, sharing one Hankel evaluation."""
    dx = eval_pts[:, 0:1] - src_pts[None, :, 0]
    dz = eval_pts[:, 1:2] - src_pts[None, :, 1]
    dist = np.hypot(dx, dz)
    if np.any(dist == 0.0):
        raise SolverError("kernel evaluated at zero distance (offsets must be > 0)")
    h0, h1 = _hankel1_01(k * dist)
    g = 0.25j * h0
    if eval_normals is None:
        return g, None
    ndotr = eval_normals[:, 0:1] * dx + eval_normals[:, 1:2] * dz
    dg = (-0.25j * k) * h1 * ndotr / dist
    return g, dg


def _greens_sum(k, eval_pts, src_pts, coeffs):
    """Superposition sum(G(r - s_j) c_j) at eval points, chunked for memory."""
    eval_pts = np.atleast_2d(eval_pts)
    out = np.empty(eval_pts.shape[0], dtype=np.complex128)
    step = max(1, 4_000_000 // max(src_pts.shape[0], 1))
    for i in range(0, eval_pts.shape[0], step):
        g, _ = _kernel_pair(k, eval_pts[i:i + step], src_pts)
        out[i:i + step] = g @ coeffs
    return out


# ---------------------------------------------------------------------------
# block assembly
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Blocks:
    """The dense collocation blocks for one (geometry, frequency) pair."""

    media: MediumParams
    offsets: MfsOffsets
    surface: RoughSurface
    target: TargetBoundary | None
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    a4: np.ndarray
    b1: np.ndarray | None = None
    b2: np.ndarray | None = None
    c1: np.ndarray | None = None
    c2: np.ndarray | None = None
    s1: np.ndarray | None = None
    s2: np.ndarray | None = None
    s3: np.ndarray | None = None
    s4: np.ndarray | None = None

    def interface_matrix(self):
        return np.block([[-self.a1, self.a2], [-self.a3, self.a4]])

    def target_matrix(self):
        return np.block([[self.s1, -self.s2], [self.s3, -self.s4]])

    def full_matrix(self):
        p = self.a1.shape[0]
        q = self.s1.shape[0]
        zero_pq = np.zeros((p, q), dtype=complex)
        zero_qp = np.zeros((q, p), dtype=complex)
        return np.block([
            [-self.a1, self.a2, self.b1, zero_pq],
            [-self.a3, self.a4, self.b2, zero_pq],
            [zero_qp, self.c1, self.s1, -self.s2],
            [zero_qp, self.c2, self.s3, -self.s4],
        ])


def _interface_blocks(surface, media, offsets):
    pts = surface.points
    nrm = surface.normals
    below = surface.source_points(offsets.delta_int, -1)
    above = surface.source_points(offsets.delta_int, +1)
    a1, a3 = _kernel_pair(media.k0, pts, below, nrm)
    a2, a4 = _kernel_pair(media.k1, pts, above, nrm)
    a4 = a4 / media.eps_r1
    return a1, a2, a3, a4, above


def assemble_blocks(surface, target, media, offsets):
    """All twelve collocation blocks (A, B, C, S groups).

    Interface sources are displaced vertically (+/- delta_int z-hat), target
    sources along -/+ delta_tar times the outward normal; the soil-side flux
    rows carry 1/eps_r1 and the target-interior rows 1/eps_r2.
    """
    a1, a2, a3, a4, above = _interface_blocks(surface, media, offsets)
    blocks = Blocks(media=media, offsets=offsets, surface=surface,
                    target=target, a1=a1, a2=a2, a3=a3, a4=a4)
    if target is None:
        return blocks

    spts = surface.points
    snrm = surface.normals
    tpts = target.points
    tnrm = target.normals
    text = target.source_points(offsets.delta_tar, -1)   # inside the target
    tint = target.source_points(offsets.delta_tar, +1)   # outside, in soil

    blocks.b1, blocks.b2 = _kernel_pair(media.k1, spts, text, snrm)
    blocks.b2 = blocks.b2 / media.eps_r1
    blocks.c1, blocks.c2 = _kernel_pair(media.k1, tpts, above, tnrm)
    blocks.c2 = blocks.c2 / media.eps_r1
    blocks.s1, blocks.s3 = _kernel_pair(media.k1, tpts, text, tnrm)
    blocks.s3 = blocks.s3 / media.eps_r1
    blocks.s2, blocks.s4 = _kernel_pair(media.k2, tpts, tint, tnrm)
    blocks.s4 = blocks.s4 / media.eps_r2

    if not all(np.all(np.isfinite(m)) for m in
               (blocks.b1, blocks.b2, blocks.c1, blocks.c2,
                blocks.s1, blocks.s2, blocks.s3, blocks.s4, a1, a2, a3, a4)):
        raise SolverError("non-finite entries in collocation blocks")
    return blocks


def interface_rhs(surface, media, src):
    """Incident-field column [G0(r_p - r_src); dG0/dn] on the interface."""
    src = np.asarray(src, dtype=float)
    if src[1] <= surface.heights.max():
        raise ValueError("source must lie strictly above the interface")
    g, dg = _kernel_pair(media.k0, surface.points, src[None, :], surface.normals)
    return np.concatenate([g[:, 0], dg[:, 0]])


# ---------------------------------------------------------------------------
# factorization with diagnostics
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class FrequencyFactorization:
    """Row-pivoted LU of one system matrix, reusable across all sources at a
    given frequency (only the right-hand side depends on the source)."""

    matrix: np.ndarray
    lu: np.ndarray
    piv: np.ndarray
    condition: float
    use_svd: bool

    @classmethod
    def from_matrix(cls, matrix):
        anorm = np.linalg.norm(matrix, 1)
        lu, piv = sla.lu_factor(matrix, check_finite=False)
        gecon = lapack.zgecon
        rcond, info = gecon(lu, anorm, norm="1")
        cond = np.inf if rcond == 0.0 else 1.0 / rcond
        if info != 0 or cond > CONDITION_FAILURE:
            raise SolverError(
                f"system numerically singular: condition estimate {cond:.3e} "
                f"(n={matrix.shape[0]}, 1-norm={anorm:.3e})")
        return cls(matrix=matrix, lu=lu, piv=piv, condition=cond,
                   use_svd=cond > CONDITION_SVD_FALLBACK)

    def solve(self, rhs):
        """Solve with one step of iterative refinement; returns (x, residual).

        `residual` is ||Mx - y|| / ||y||.  The failure check uses the
        normwise backward error ||Mx - y|| / (||M|| ||x|| + ||y||), which
        stays near machine precision for a healthy factorization even when
        ill-conditioning amplifies ||x||.  Falls back to an SVD least-squares
        solve when the condition estimate exceeds the LU trust threshold.
        """
        rhs = np.asarray(rhs, dtype=complex)
        single = rhs.ndim == 1
        y = rhs[:, None] if single else rhs
        if self.use_svd:
            x = np.linalg.lstsq(self.matrix, y, rcond=1e-14)[0]
        else:
            x = sla.lu_solve((self.lu, self.piv), y, check_finite=False)
            r = y - self.matrix @ x
            x = x + sla.lu_solve((self.lu, self.piv), r, check_finite=False)
        r = y - self.matrix @ x
        ynorm = np.linalg.norm(y)
        residual = np.linalg.norm(r) / ynorm if ynorm > 0 else 0.0
        mnorm = np.linalg.norm(self.matrix)
        backward = np.linalg.norm(r) / (mnorm * np.linalg.norm(x) + ynorm)
        if backward > RESIDUAL_LIMIT:
            raise SolverError(
                f"normwise backward error {backward:.3e} exceeds "
                f"{RESIDUAL_LIMIT:.1e} (condition estimate {self.condition:.3e})")
        return (x[:, 0] if single else x), residual


# ---------------------------------------------------------------------------
# solve engines (one factorization, many sources)
# ---------------------------------------------------------------------------

class NoTargetEngine:
    """Reflection/transmission by the bare interface: the 2P x 2P system."""

    variant = "no_target"

    def __init__(self, surface, media, offsets):
        self.surface = surface
        self.media = media
        self.offsets = offsets
        a1, a2, a3, a4, _ = _interface_blocks(surface, media, offsets)
        self.factorization = FrequencyFactorization.from_matrix(
            np.block([[-a1, a2], [-a3, a4]]))

    def solve(self, src):
        y = interface_rhs(self.surface, self.media, src)
        x, res = self.factorization.solve(y)
        p = self.surface.num_points
        return MfsSolution(variant=self.variant, a=x[:p], b=x[p:],
                           residual=res, condition=self.factorization.condition)


class FullEngine:
    """The full coupled interface-target system."""

    variant = "full"

    def __init__(self, surface, target, media, offsets):
        self.surface = surface
        self.target = target
        self.media = media
        self.offsets = offsets
        self.blocks = assemble_blocks(surface, target, media, offsets)
        self.factorization = FrequencyFactorization.from_matrix(
            self.blocks.full_matrix())

    def solve(self, src):
        p = self.surface.num_points
        q = self.target.num_points
        y = np.zeros(2 * p + 2 * q, dtype=complex)
        y[:2 * p] = interface_rhs(self.surface, self.media, src)
        x, res = self.factorization.solve(y)
        return MfsSolution(variant=self.variant, a=x[:p], b=x[p:2 * p],
                           c_ext=x[2 * p:2 * p + q], c_int=x[2 * p + q:],
                           residual=res, condition=self.factorization.condition)


class FirstOrderEngine:
    """Single transmit-scatter-transmit chain: interface solve, isolated
    target solve, interface solve for the returned field.  With
    `flat_return=True` the third solve uses a flattened interface."""

    def __init__(self, surface, target, media, offsets, flat_return=False):
        self.surface = surface
        self.target = target
        self.media = media
        self.offsets = offsets
        self.flat_return = flat_return
        self.variant = "first_order_flat" if flat_return else "first_order"
        self.blocks = assemble_blocks(surface, target, media, offsets)
        self.factorization = FrequencyFactorization.from_matrix(
            self.blocks.interface_matrix())
        self.target_factorization = FrequencyFactorization.from_matrix(
            self.blocks.target_matrix())
        if flat_return:
            self.flat = flat_surface(surface.length, surface.num_points)
            fa1, fa2, fa3, fa4, _ = _interface_blocks(self.flat, media, offsets)
            fb1, fb2 = _kernel_pair(media.k1, self.flat.points,
                                    target.source_points(offsets.delta_tar, -1),
                                    self.flat.normals)
            self.flat_b1 = fb1
            self.flat_b2 = fb2 / media.eps_r1
            self.return_factorization = FrequencyFactorization.from_matrix(
                np.block([[-fa1, fa2], [-fa3, fa4]]))
        else:
            self.flat = None
            self.return_factorization = self.factorization

    def solve(self, src):
        p = self.surface.num_points
        q = self.target.num_points
        bl = self.blocks

        y = interface_rhs(self.surface, self.media, src)
        x0, res0 = self.factorization.solve(y)
        a0, b0 = x0[:p], x0[p:]

        rhs_t = -np.concatenate([bl.c1 @ b0, bl.c2 @ b0])
        xt, res1 = self.target_factorization.solve(rhs_t)
        c_ext, c_int = xt[:q], xt[q:]

        if self.flat_return:
            rhs_r = -np.concatenate([self.flat_b1 @ c_ext, self.flat_b2 @ c_ext])
        else:
            rhs_r = -np.concatenate([bl.b1 @ c_ext, bl.b2 @ c_ext])
        x1, res2 = self.return_factorization.solve(rhs_r)
        a1, b1 = x1[:p], x1[p:]

        res = max(res0, res1, res2)
        cond = max(self.factorization.condition,
                   self.target_factorization.condition,
                   self.return_factorization.condition)
        if self.flat_return:
            return MfsSolution(variant=self.variant, a=a0, b=b0,
                               c_ext=c_ext, c_int=c_int, a_flat=a1, b_flat=b1,
                               residual=res, condition=cond,
                               parts={"a0": a0, "b0": b0, "a1": a1, "b1": b1})
        return MfsSolution(variant=self.variant, a=a0 + a1, b=b0 + b1,
                           c_ext=c_ext, c_int=c_int,
                           residual=res, condition=cond,
                           parts={"a0": a0, "b0": b0, "a1": a1, "b1": b1})


class PointTargetEngine:
    """Point scatterer under a flat interface, excited through the scenario
    interface: interface solve, excitation field at the point, flat-interface
    solve of the reradiated field."""

    variant = "point_target"

    def __init__(self, surface, media, offsets, point):
        if point.position[1] >= surface.heights.min():
            raise ValueError("point target must lie strictly below the interface")
        self.surface = surface
        self.media = media
        self.offsets = offsets
        self.point = point
        a1, a2, a3, a4, self._above = _interface_blocks(surface, media, offsets)
        self.factorization = FrequencyFactorization.from_matrix(
            np.block([[-a1, a2], [-a3, a4]]))

        self.flat = flat_surface(surface.length, surface.num_points)
        fa1, fa2, fa3, fa4, _ = _interface_blocks(self.flat, media, offsets)
        self.return_factorization = FrequencyFactorization.from_matrix(
            np.block([[-fa1, fa2], [-fa3, fa4]]))

        r0 = np.asarray(point.position, dtype=float)
        f1, f2 = _kernel_pair(media.k1, self.flat.points, r0[None, :],
                              self.flat.normals)
        rhs = np.concatenate([f1[:, 0], f2[:, 0] / media.eps_r1])
        # unit-strength reradiation; scaled by -rho u_E per source below
        self._unit_return, self._unit_res = self.return_factorization.solve(rhs)

    def excitation(self, b0):
        """Field transmitted through the scenario interface at the point."""
        r0 = np.asarray(self.point.position, dtype=float)
        g, _ = _kernel_pair(self.media.k1, r0[None, :], self._above)
        return complex(g[0] @ b0)

    def solve(self, src):
        p = self.surface.num_points
        y = interface_rhs(self.surface, self.media, src)
        x0, res0 = self.factorization.solve(y)
        a0, b0 = x0[:p], x0[p:]
        u_e = self.excitation(b0)
        scale = -self.point.reflectivity * u_e
        x1 = scale * self._unit_return
        return MfsSolution(variant=self.variant, a=a0, b=b0,
                           a_flat=x1[:p], b_flat=x1[p:],
                           residual=max(res0, self._unit_res),
                           condition=max(self.factorization.condition,
                                         self.return_factorization.condition),
                           parts={"a0": a0, "b0": b0, "u_excite": u_e})


# one-shot wrappers -----------------------------------------------------------

def solve_full(surface, target, media, offsets, src):
    return FullEngine(surface, target, media, offsets).solve(src)


def solve_no_target(surface, media, offsets, src):
    return NoTargetEngine(surface, media, offsets).solve(src)


def solve_first_order(surface, target, media, offsets, src):
    return FirstOrderEngine(surface, target, media, offsets).solve(src)


def solve_first_order_flat(surface, target, media, offsets, src):
    return FirstOrderEngine(surface, target, media, offsets,
                            flat_return=True).solve(src)


def solve_point_target(surface, media, offsets, src, point):
    return PointTargetEngine(surface, media, offsets, point).solve(src)


def solve_isolated_target(target, media, offsets, incident_vals, incident_flux):
    """Scattering by the bare target in a homogeneous soil background.

    `incident_vals` / `incident_flux` are the incident field and its
    (1/eps_r1-weighted) normal derivative at the boundary samples; returns
    (c_ext, c_int) and solve diagnostics.
    """
    tpts = target.points
    tnrm = target.normals
    text = target.source_points(offsets.delta_tar, -1)
    tint = target.source_points(offsets.delta_tar, +1)
    s1, s3 = _kernel_pair(media.k1, tpts, text, tnrm)
    s3 = s3 / media.eps_r1
    s2, s4 = _kernel_pair(media.k2, tpts, tint, tnrm)
    s4 = s4 / media.eps_r2
    fact = FrequencyFactorization.from_matrix(
        np.block([[s1, -s2], [s3, -s4]]))
    rhs = -np.concatenate([incident_vals, incident_flux])
    x, res = fact.solve(rhs)
    q = target.num_points
    return MfsSolution(variant="isolated_target",
                       a=np.zeros(0, complex), b=np.zeros(0, complex),
                       c_ext=x[:q], c_int=x[q:],
                       residual=res, condition=fact.condition)


# ---------------------------------------------------------------------------
# field evaluation
# ---------------------------------------------------------------------------

def classify_points(surface, target, points):
    """Region index per point: 0 above the interface, 1 in soil, 2 inside
    the target.  Interface crossing uses linear interpolation of h between
    the grid nodes; the target test is point-in-polygon."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    h = np.interp(points[:, 0], surface.x, surface.heights,
                  period=surface.length)
    region = np.where(points[:, 1] > h, 0, 1)
    if target is not None:
        inside = target.contains(points)
        region = np.where(inside, 2, region)
    return region


def evaluate_field(solution, media, surface, target, region, points,
                   offsets=None, check=True):
    """Evaluate one region's scattered-field expansion at the given points.

    Points must lie in the named region (checked against the interface and
    target polygon unless `check=False`).
    """
    offsets = offsets or MfsOffsets()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if check:
        actual = classify_points(surface, target, points)
        bad = np.nonzero(actual != region)[0]
        if bad.size:
            raise ValueError(
                f"{bad.size} evaluation points are not in region {region} "
                f"(first offender: {points[bad[0]]} in region {actual[bad[0]]})")

    out = np.zeros(points.shape[0], dtype=complex)
    if region == 0:
        src = surface.source_points(offsets.delta_int, -1)
        out += _greens_sum(media.k0, points, src, solution.a)
        if solution.a_flat is not None:
            flat = flat_surface(surface.length, surface.num_points)
            fsrc = flat.source_points(offsets.delta_int, -1)
            out += _greens_sum(media.k0, points, fsrc, solution.a_flat)
    elif region == 1:
        src = surface.source_points(offsets.delta_int, +1)
        out += _greens_sum(media.k1, points, src, solution.b)
        if solution.b_flat is not None:
            flat = flat_surface(surface.length, surface.num_points)
            fsrc = flat.source_points(offsets.delta_int, +1)
            out += _greens_sum(media.k1, points, fsrc, solution.b_flat)
        if solution.c_ext is not None and target is not None:
            tsrc = target.source_points(offsets.delta_tar, -1)
            out += _greens_sum(media.k1, points, tsrc, solution.c_ext)
    elif region == 2:
        if solution.c_int is None or target is None:
            raise ValueError("solution carries no interior-target expansion")
        tsrc = target.source_points(offsets.delta_tar, +1)
        out += _greens_sum(media.k2, points, tsrc, solution.c_int)
    else:
        raise ValueError(f"unknown region {region!r}")
    return out


# ---------------------------------------------------------------------------
# cylindrical-harmonics oracle
# ---------------------------------------------------------------------------

def cylinder_series_oracle(media, radius, src, eval_points, max_order=200,
                           tol=1e-14):
    """Scattered field of a penetrable circular cylinder (radius `radius`,
    centered at the origin, interior wavenumber k2) in a homogeneous k1
    background, driven by a line source at `src`.

    Separation-of-variables reference solution, used to validate the
    fundamental-solutions target blocks; evaluation points must lie outside
    the cylinder.  Truncation is adaptive: orders are added until their
    coefficients fall below `tol` relative to the running maximum.
    """
    import scipy.special as sp

    src = np.asarray(src, dtype=float)
    rs = np.hypot(*src)
    if rs <= radius:
        raise ValueError("line source must lie outside the cylinder")
    pts = np.atleast_2d(np.asarray(eval_points, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r <= radius):
        raise ValueError("evaluation points must lie outside the cylinder")
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    phi_s = math.atan2(src[1], src[0])

    k1, k2 = media.k1, media.k2
    inv1, inv2 = 1.0 / media.eps_r1, 1.0 / media.eps_r2

    total = np.zeros(pts.shape[0], dtype=complex)
    peak = 0.0
    below = 0
    for m in range(max_order + 1):
        jm1 = sp.jv(m, k1 * radius)
        jm1p = sp.jvp(m, k1 * radius)
        jm2 = sp.jv(m, k2 * radius)
        jm2p = sp.jvp(m, k2 * radius)
        hm = sp.hankel1(m, k1 * radius)
        hmp = sp.h1vp(m, k1 * radius)
        # continuity of value and eps-weighted flux at r = radius:
        #   alpha H + J = beta Jint ; inv1 k1 (alpha H' + J') = inv2 k2 beta Jint'
        mat = np.array([[hm, -jm2],
                        [inv1 * k1 * hmp, -inv2 * k2 * jm2p]], dtype=complex)
        rhs = -np.array([jm1, inv1 * k1 * jm1p], dtype=complex)
        alpha, _beta = np.linalg.solve(mat, rhs)

        weight = alpha * sp.hankel1(m, k1 * rs)
        if not np.isfinite(weight):
            raise SolverError(f"cylinder series diverged at order {m}")
        term = 0.25j * weight * sp.hankel1(m, k1 * r) * np.cos(m * (phi - phi_s))
        if m > 0:
            term = 2.0 * term
        total += term

        size = abs(weight) * abs(sp.hankel1(m, k1 * r.min()))
        peak = max(peak, size)
        below = below + 1 if size < tol * max(peak, 1e-300) else 0
        if below >= 3:
            return total
    raise SolverError("cylinder series did not converge "
                      f"(radius*k too large for order cap {max_order})")
