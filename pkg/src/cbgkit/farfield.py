"""Upward far-field patterns from monitor-plane near fields, and collection
efficiency within a numerical aperture.

The near field of an on-axis azimuthal-mode-1 source separates into two
circular components, (E_x - iE_y) uniform in phi and (E_x + iE_y) going as
exp(2*i*phi).  Their plane-wave spectra are order-0 and order-2 Hankel
transforms of the radial profiles, so the hemisphere pattern follows from two
1-D quadratures per angle instead of a 2-D FFT.  The resulting intensity is
phi-uniform, which is exactly the incoherent average of the two orthogonal
in-plane dipoles the mode-1 run represents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0, jv

from .errors import ConfigError, DataError, SpecError


@dataclass(frozen=True)
class MonitorPlaneFields:
    """Tangential E of one azimuthal mode on a plane above the device.

    ``e_r`` and ``e_phi`` are the complex mode amplitudes sampled on the
    common radii ``r_nm`` (cell centers, PML excluded).
    """

    wavelength_nm: float
    r_nm: np.ndarray
    e_r: np.ndarray
    e_phi: np.ndarray
    plane_z_nm: float = 0.0
    mode_number: int = 1


@dataclass(frozen=True)
class FarFieldPattern:
    """Radiated intensity per solid angle on the upward hemisphere."""

    wavelength_nm: float
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    intensity: np.ndarray  # (n_theta, n_phi), >= 0

    def __post_init__(self):
        th = np.asarray(self.theta_deg, dtype=float)
        ph = np.asarray(self.phi_deg, dtype=float)
        inten = np.asarray(self.intensity, dtype=float)
        object.__setattr__(self, "theta_deg", th)
        object.__setattr__(self, "phi_deg", ph)
        object.__setattr__(self, "intensity", inten)
        if inten.shape != (len(th), len(ph)):
            raise SpecError(f"intensity shape {inten.shape} does not match grids")
        if np.any(inten < 0):
            raise SpecError("far-field intensity must be non-negative")

    def phi_integrated(self) -> np.ndarray:
        """Intensity integrated over phi, one value per theta (radiance ring)."""
        phi_rad = np.deg2rad(self.phi_deg)
        return np.trapz(self.intensity, phi_rad, axis=1)

    def cumulative_power(self) -> np.ndarray:
        """Power inside each theta grid point: cumtrapz of ring radiance * sin."""
        th = np.deg2rad(self.theta_deg)
        ring = self.phi_integrated() * np.sin(th)
        out = np.zeros_like(th)
        out[1:] = np.cumsum(0.5 * (ring[1:] + ring[:-1]) * np.diff(th))
        return out

    def total_power(self) -> float:
        """Hemisphere integral of the intensity (trapezoid, sin-theta weight)."""
        return float(self.cumulative_power()[-1])


def default_angle_grids(theta_step_deg: float = 1.0,
                        phi_step_deg: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    n_t = int(round(90.0 / theta_step_deg))
    n_p = int(round(360.0 / phi_step_deg))
    return (np.linspace(0.0, 90.0, n_t + 1), np.linspace(0.0, 360.0, n_p + 1))


def near_to_far(plane: MonitorPlaneFields,
                theta_deg: np.ndarray | None = None,
                phi_deg: np.ndarray | None = None) -> FarFieldPattern:
    """Angular-spectrum projection of a monitor plane to the upward hemisphere.

    Intensity units are arbitrary but consistent with the Poynting flux of
    the same run, so the hemisphere integral can be checked against the
    upward plane flux.
    """
    if plane.mode_number != 1:
        raise ConfigError(f"only azimuthal mode 1 is supported, got {plane.mode_number}")
    if theta_deg is None or phi_deg is None:
        t_def, p_def = default_angle_grids()
        theta_deg = t_def if theta_deg is None else theta_deg
        phi_deg = p_def if phi_deg is None else phi_deg

    r = np.asarray(plane.r_nm, dtype=float)
    s0 = np.asarray(plane.e_r) - 1j * np.asarray(plane.e_phi)
    s2 = np.asarray(plane.e_r) + 1j * np.asarray(plane.e_phi)
    if r.ndim != 1 or s0.shape != r.shape:
        raise DataError("radial grid and field profiles must be 1-D and congruent")

    k = 2.0 * math.pi / plane.wavelength_nm
    theta = np.deg2rad(np.asarray(theta_deg, dtype=float))
    dr = np.gradient(r)
    krs = np.outer(k * np.sin(theta), r)  # (n_theta, nr)
    w0 = j0(krs)
    w2 = jv(2, krs)
    h0 = w0 @ (s0 * r * dr)
    h2 = w2 @ (s2 * r * dr)

    cos2 = np.cos(theta) ** 2
    sin2 = np.sin(theta) ** 2
    radial_intensity = (k**2 / 8.0) * (
        2.0 * cos2 * (np.abs(h0) ** 2 + np.abs(h2) ** 2)
        + sin2 * np.abs(h0 - h2) ** 2
    )
    intensity = np.tile(radial_intensity[:, None], (1, len(phi_deg)))
    return FarFieldPattern(
        wavelength_nm=plane.wavelength_nm,
        theta_deg=np.asarray(theta_deg, dtype=float),
        phi_deg=np.asarray(phi_deg, dtype=float),
        intensity=intensity,
    )


def na_to_half_angle(na: float) -> float:
    """Acceptance half-angle in degrees of a numerical aperture (in air)."""
    if not 0.0 <= na <= 1.0:
        raise SpecError(f"numerical aperture must lie in [0, 1], got {na}")
    return math.degrees(math.asin(na))


def collection_efficiency(pattern: FarFieldPattern, na: float) -> float:
    """Fraction of the total upward power within the cone theta <= arcsin(na)."""
    if not 0.0 < na <= 1.0:
        raise SpecError(f"numerical aperture must lie in (0, 1], got {na}")
    theta_c = na_to_half_angle(na)
    th = pattern.theta_deg
    cum = pattern.cumulative_power()
    total = cum[-1]
    if total <= 0:
        raise DataError("pattern carries no power; collection efficiency undefined")
    if theta_c >= th[-1]:
        return 1.0
    # exact-endpoint trapezoid within the straddling cell
    j = int(np.searchsorted(th, theta_c, side="right")) - 1
    j = max(j, 0)
    th_rad = np.deg2rad(th)
    ring = pattern.phi_integrated() * np.sin(th_rad)
    tc = math.radians(theta_c)
    frac = (tc - th_rad[j]) / (th_rad[j + 1] - th_rad[j])
    ring_c = ring[j] + frac * (ring[j + 1] - ring[j])
    partial = cum[j] + 0.5 * (ring[j] + ring_c) * (tc - th_rad[j])
    return float(partial / total)


def eta_curve(pattern: FarFieldPattern, na_values: np.ndarray) -> np.ndarray:
    """Collection efficiency over a list of numerical apertures."""
    return np.array([collection_efficiency(pattern, float(v)) for v in na_values])


def cross_section(pattern: FarFieldPattern, phi_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Great-circle slice through the pattern: intensity vs theta in [-90, 90].

    The negative-theta half is the phi + 180 degrees side, so an azimuthally
    uniform pattern yields a symmetric curve.
    """
    def slice_at(phi):
        phi = phi % 360.0
        return np.array([
            np.interp(phi, pattern.phi_deg, pattern.intensity[i, :], period=360.0)
            for i in range(len(pattern.theta_deg))
        ])

    pos = slice_at(phi_deg)
    neg = slice_at(phi_deg + 180.0)
    theta = np.concatenate([-pattern.theta_deg[::-1], pattern.theta_deg[1:]])
    values = np.concatenate([neg[::-1], pos[1:]])
    return theta, values


def analytic_inplane_dipole_intensity(theta_deg: np.ndarray) -> np.ndarray:
    """Azimuthally averaged free-space pattern of an in-plane dipole pair.

    Normalized to 1 at theta = 0; the reference oracle for vacuum runs.
    """
    th = np.deg2rad(np.asarray(theta_deg, dtype=float))
    return 0.5 * (1.0 + np.cos(th) ** 2)


def analytic_inplane_dipole_collection(na: float) -> float:
    """Closed-form cone fraction of the in-plane dipole hemisphere pattern."""
    tc = math.asin(na)
    c = math.cos(tc)
    return (3.0 * (1.0 - c) + (1.0 - c**3)) / 4.0
