"""Scattering geometry: random rough air-soil interface and closed target
boundaries, sampled with unit normals and off-boundary source offsets for the
fundamental-solutions solver.

Units are cm throughout.  The interface normal points up into the air region;
target normals point outward into the soil region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RoughSurface",
    "TargetBoundary",
    "MfsOffsets",
    "generate_gaussian_surface",
    "flat_surface",
    "surface_normals",
    "make_target",
    "gaussian_roughness_spectrum",
    "save_surface_csv",
    "load_surface_csv",
]


@dataclass(frozen=True)
class MfsOffsets:
    """Source standoff distances for the interface and target expansions."""

    delta_int: float = 0.1
    delta_tar: float = 0.1

    def __post_init__(self):
        if self.delta_int <= 0 or self.delta_tar <= 0:
            raise ValueError("MFS offsets must be strictly positive")


@dataclass(frozen=True, eq=False)
class RoughSurface:
    """Sampled interface z = h(x) on a uniform periodic grid of length L."""

    length: float
    x: np.ndarray            # (P,), x_p = -L/2 + (p-1) L/P
    heights: np.ndarray      # (P,)
    normals: np.ndarray      # (P, 2), unit, positive z-component
    h_rms: float
    corr_len: float
    seed: int | None = None

    @property
    def num_points(self):
        return self.x.size

    @property
    def points(self):
        return np.column_stack([self.x, self.heights])

    def height_at(self, x):
        """Trigonometric interpolation of h (the surface is band-limited)."""
        coeffs = np.fft.rfft(self.heights)
        kappa = 2.0 * np.pi * np.arange(coeffs.size) / self.length
        xq = np.atleast_1d(np.asarray(x, dtype=float)) - self.x[0]
        phases = np.exp(1j * np.outer(xq, kappa))
        weights = np.full(coeffs.size, 2.0)
        weights[0] = 1.0
        if self.x.size % 2 == 0:
            weights[-1] = 1.0
        vals = (phases * (weights * coeffs)).real.sum(axis=1) / self.x.size
        return vals if np.ndim(x) else float(vals[0])

    def source_points(self, delta, side):
        """Offset source grid: side=-1 below the interface, +1 above."""
        return np.column_stack([self.x, self.heights + side * delta])


@dataclass(frozen=True, eq=False)
class TargetBoundary:
    """Closed parameterized curve sampled at t_q = 2 pi (q-1)/Q."""

    shape: str
    params: dict
    points: np.ndarray       # (Q, 2)
    normals: np.ndarray      # (Q, 2), unit, outward
    centroid: np.ndarray     # (2,)

    @property
    def num_points(self):
        return self.points.shape[0]

    def source_points(self, delta, side):
        """Offset sources: side=-1 inside the target, +1 outside."""
        return self.points + side * delta * self.normals

    def contains(self, pts):
        """Even-odd ray-casting test against the sampled polygon."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vx, vz = self.points[:, 0], self.points[:, 1]
        wx, wz = np.roll(vx, -1), np.roll(vz, -1)
        inside = np.zeros(pts.shape[0], dtype=bool)
        for (x0, z0), (x1, z1) in zip(zip(vx, vz), zip(wx, wz)):
            crosses = (z0 > pts[:, 1]) != (z1 > pts[:, 1])
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = x0 + (pts[:, 1] - z0) * (x1 - x0) / (z1 - z0)
            inside ^= crosses & (pts[:, 0] < xint)
        return inside


def gaussian_roughness_spectrum(kappa, h_rms, corr_len):
    """Roughness power spectrum of a Gaussian-correlated profile.

    W(kappa) = h_rms^2 corr_len / (2 sqrt(pi)) * exp(-kappa^2 corr_len^2 / 4),
    normalized so that the integral over all kappa equals h_rms^2.
    """
    kappa = np.asarray(kappa, dtype=float)
    return (h_rms**2 * corr_len / (2.0 * np.sqrt(np.pi))
            * np.exp(-0.25 * (kappa * corr_len) ** 2))


def _spectral_heights(length, num, h_rms, corr_len, rng):
    """Filter Hermitian white noise by the roughness spectrum, transform."""
    kappa = 2.0 * np.pi * np.fft.fftfreq(num, d=length / num)
    amp = np.sqrt(2.0 * np.pi * length * gaussian_roughness_spectrum(kappa, h_rms, corr_len))

    noise = np.zeros(num, dtype=complex)
    half = num // 2
    re = rng.standard_normal(half - 1)
    im = rng.standard_normal(half - 1)
    noise[1:half] = (re + 1j * im) / np.sqrt(2.0)
    noise[half + 1:] = np.conj(noise[1:half][::-1])
    noise[half] = rng.standard_normal()  # Nyquist, real
    noise[0] = 0.0                       # zero-mean realization

    spectrum = amp * noise
    return np.fft.ifft(spectrum).real * (num / length)


def generate_gaussian_surface(length, num, h_rms, corr_len, seed):
    """One realization of a Gaussian-correlated random rough interface.

    The profile is synthesized spectrally: complex white noise shaped by the
    Gaussian roughness spectrum, Hermitian-symmetrized and inverse-transformed
    to periodic real heights.  Deterministic per seed.
    """
    if num < 64 or (num & (num - 1)) != 0:
        raise ValueError("surface sample count must be a power of two >= 64")
    if length <= 0 or corr_len <= 0 or h_rms < 0:
        raise ValueError("surface needs length > 0, corr_len > 0, h_rms >= 0")

    x = -0.5 * length + np.arange(num) * (length / num)
    if h_rms == 0.0:
        heights = np.zeros(num)
    else:
        rng = np.random.default_rng(seed)
        heights = _spectral_heights(length, num, h_rms, corr_len, rng)
    normals = surface_normals(heights, length)
    return RoughSurface(length=length, x=x, heights=heights, normals=normals,
                        h_rms=h_rms, corr_len=corr_len, seed=seed)


def flat_surface(length, num):
    """Flat interface z = 0 on the same grid convention."""
    x = -0.5 * length + np.arange(num) * (length / num)
    heights = np.zeros(num)
    return RoughSurface(length=length, x=x, heights=heights,
                        normals=surface_normals(heights, length),
                        h_rms=0.0, corr_len=1.0, seed=None)


def surface_normals(heights, length):
    """Unit upward normals (-h', 1)/sqrt(1 + h'^2), h' by spectral derivative."""
    heights = np.asarray(heights, dtype=float)
    num = heights.size
    kappa = 2.0 * np.pi * np.fft.rfftfreq(num, d=length / num)
    spec = np.fft.rfft(heights) * (1j * kappa)
    if num % 2 == 0:
        spec[-1] = 0.0  # Nyquist mode has no well-defined derivative sign
    slope = np.fft.irfft(spec, n=num)
    normals = np.column_stack([-slope, np.ones(num)])
    normals /= np.hypot(slope, 1.0)[:, None]
    return normals


# ---------------------------------------------------------------------------
# target shapes
# ---------------------------------------------------------------------------

def _kite_curve(t, params):
    cx, cz = params["center"]
    x = cx + 3.0 * np.cos(t) + 1.8 * np.cos(2 * t) - 0.65
    z = cz + 3.4 * np.sin(t)
    dx = -3.0 * np.sin(t) - 3.6 * np.sin(2 * t)
    dz = 3.4 * np.cos(t)
    return x, z, dx, dz


def _circle_curve(t, params):
    cx, cz = params["center"]
    r = params["radius"]
    if r <= 0:
        raise ValueError("circle radius must be positive")
    return (cx + r * np.cos(t), cz + r * np.sin(t),
            -r * np.sin(t), r * np.cos(t))


def _ellipse_curve(t, params):
    cx, cz = params["center"]
    a, b = params["semi_x"], params["semi_z"]
    if a <= 0 or b <= 0:
        raise ValueError("ellipse semi-axes must be positive")
    return (cx + a * np.cos(t), cz + b * np.sin(t),
            -a * np.sin(t), b * np.cos(t))


def _star_curve(t, params):
    cx, cz = params["center"]
    x = cx + 2.5 + 0.6 * np.cos(5 * t)
    z = cz - 3.0 * np.sin(5 * t)
    dx = -3.0 * np.sin(5 * t)
    dz = -15.0 * np.cos(5 * t)
    return x, z, dx, dz


_DEFAULT_PARAMS = {
    "kite": {"center": (3.0, -14.0)},
    "circle": {"center": (3.0, -14.0), "radius": 3.5},
    "ellipse": {"center": (3.0, -14.0), "semi_x": 3.5, "semi_z": 2.5},
    "star": {"center": (3.0, -14.0)},
    "rectangle": {"center": (3.0, -15.0), "width": 7.0, "height": 5.0,
                  "corner_exponent": 5.0},
}

_PARAMETRIC = {
    "kite": _kite_curve,
    "circle": _circle_curve,
    "ellipse": _ellipse_curve,
    "star": _star_curve,
}


def _superellipse_boundary(params, num):
    """Rounded-corner rectangle |2x/w|^(2s) + |2z/h|^(2s) = 1, resampled at
    (approximately) equal arc length; normals from the implicit gradient.

    The naive trigonometric parameterization concentrates nearly all of its
    speed at the face centers, starving them of collocation points, so we
    resample by arc length instead.
    """
    cx, cz = params["center"]
    w, h = params["width"], params["height"]
    s = params.get("corner_exponent", 5.0)
    if w <= 0 or h <= 0:
        raise ValueError("rectangle width/height must be positive")
    if s < 1:
        raise ValueError("rectangle corner exponent must be >= 1")

    fine = max(4096, 64 * num)
    tt = 2.0 * np.pi * np.arange(fine + 1) / fine
    ex = 1.0 / s
    px = 0.5 * w * np.sign(np.cos(tt)) * np.abs(np.cos(tt)) ** ex
    pz = 0.5 * h * np.sign(np.sin(tt)) * np.abs(np.sin(tt)) ** ex
    seg = np.hypot(np.diff(px), np.diff(pz))
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    stations = arc[-1] * np.arange(num) / num
    x = np.interp(stations, arc, px) + cx
    z = np.interp(stations, arc, pz) + cz

    # outward normal = grad F / |grad F|, F = |2x/w|^(2s) + |2z/h|^(2s)
    gx = (2.0 / w) * np.sign(x - cx) * np.abs(2.0 * (x - cx) / w) ** (2 * s - 1)
    gz = (2.0 / h) * np.sign(z - cz) * np.abs(2.0 * (z - cz) / h) ** (2 * s - 1)
    norm = np.hypot(gx, gz)
    normals = np.column_stack([gx / norm, gz / norm])
    return np.column_stack([x, z]), normals


def make_target(shape, params=None, num=128):
    """Sample a closed target boundary with outward unit normals.

    Shapes: kite, circle, ellipse (axis-aligned, semi-axes), star, rectangle
    (smooth superellipse).  Normals are (dz, -dx)/|(dx, dz)| flipped, if
    needed, to point away from the sample centroid.
    """
    if num < 16:
        raise ValueError("target boundary needs at least 16 samples")
    if shape not in _DEFAULT_PARAMS:
        raise ValueError(f"unknown target shape {shape!r}")
    merged = dict(_DEFAULT_PARAMS[shape])
    if params:
        unknown = set(params) - set(merged)
        if unknown:
            raise ValueError(f"unknown {shape} parameters: {sorted(unknown)}")
        merged.update(params)

    if shape == "rectangle":
        points, normals = _superellipse_boundary(merged, num)
    else:
        t = 2.0 * np.pi * np.arange(num) / num
        x, z, dx, dz = _PARAMETRIC[shape](t, merged)
        speed = np.hypot(dx, dz)
        if np.any(speed == 0.0):
            raise ValueError(f"degenerate {shape} parameterization")
        points = np.column_stack([x, z])
        normals = np.column_stack([dz / speed, -dx / speed])

    centroid = points.mean(axis=0)
    outward = np.einsum("ij,ij->i", normals, points - centroid)
    if np.all(outward < 0):
        normals = -normals
    elif not np.all(outward > 0):
        raise ValueError(f"inconsistent normal orientation for {shape}")
    return TargetBoundary(shape=shape, params=merged, points=points,
                          normals=normals, centroid=centroid)


# ---------------------------------------------------------------------------
# surface CSV round trip
# ---------------------------------------------------------------------------

def save_surface_csv(surface, path):
    seed = surface.seed if surface.seed is not None else -1
    with open(path, "w") as fh:
        fh.write(f"# L={surface.length:.17g} P={surface.num_points} "
                 f"h_rms={surface.h_rms:.17g} corr_len={surface.corr_len:.17g} "
                 f"seed={seed}\n")
        for xv, hv in zip(surface.x, surface.heights):
            fh.write(f"{xv:.17g},{hv:.17g}\n")


def load_surface_csv(path):
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing '#' header line")
        meta = {}
        for token in header[1:].split():
            key, _, val = token.partition("=")
            meta[key] = val
        try:
            length = float(meta["L"])
            num = int(meta["P"])
            h_rms = float(meta["h_rms"])
            corr_len = float(meta["corr_len"])
            seed = int(meta["seed"])
        except KeyError as exc:
            raise ValueError(f"{path}: header missing field {exc}") from exc
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'x,h'")
            rows.append((float(parts[0]), float(parts[1])))
    if len(rows) != num:
        raise ValueError(f"{path}: header declares P={num} but found {len(rows)} rows")
    x = np.array([r[0] for r in rows])
    heights = np.array([r[1] for r in rows])
    return RoughSurface(length=length, x=x, heights=heights,
                        normals=surface_normals(heights, length),
                        h_rms=h_rms, corr_len=corr_len,
                        seed=None if seed < 0 else seed)
