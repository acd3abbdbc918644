"""Parametric circular Bragg grating structures and their discretized permittivity maps.

Two device families are supported: ring gratings (concentric air trenches,
``RCbgSpec``) and hole gratings (``HCbgSpec``), where each ring of holes is
reduced to an axisymmetric annulus with a volume-averaged permittivity so that
a body-of-revolution solver applies.  Maps are cell-centered on a uniform
(r, z) grid; a cell takes the permittivity of the material covering its
center unless area-weighted smoothing is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import SpecError

# InP membrane near 1250 nm; configurable everywhere it is used.
DEFAULT_MATERIAL_INDEX = 3.17


@dataclass(frozen=True)
class RCbgSpec:
    """Ring-based circular Bragg grating: solid disk + concentric air trenches."""

    radial_period_nm: float
    center_disk_radius_nm: float
    trench_width_nm: float
    thickness_nm: float
    num_rings: int
    material_index: float = DEFAULT_MATERIAL_INDEX

    def __post_init__(self):
        if not (self.radial_period_nm > self.trench_width_nm > 0):
            raise SpecError(
                f"need radial_period > trench_width > 0, got "
                f"{self.radial_period_nm} and {self.trench_width_nm}"
            )
        if self.center_disk_radius_nm <= 0 or self.thickness_nm <= 0:
            raise SpecError("center disk radius and thickness must be positive")
        if self.num_rings < 1:
            raise SpecError(f"num_rings must be >= 1, got {self.num_rings}")
        if self.material_index <= 1:
            raise SpecError(f"material_index must exceed 1, got {self.material_index}")

    @property
    def outer_radius_nm(self) -> float:
        """Membrane extent: disk plus num_rings full grating periods."""
        return self.center_disk_radius_nm + self.num_rings * self.radial_period_nm


@dataclass(frozen=True)
class HCbgSpec:
    """Hole-based circular Bragg grating; hole rings are azimuthally smeared."""

    radial_period_nm: float
    center_disk_radius_nm: float
    hole_diameter_nm: float
    azimuthal_period_nm: float
    thickness_nm: float
    num_rings: int
    material_index: float = DEFAULT_MATERIAL_INDEX

    def __post_init__(self):
        if self.hole_diameter_nm >= self.azimuthal_period_nm:
            raise SpecError(
                f"holes overlap: diameter {self.hole_diameter_nm} >= "
                f"azimuthal period {self.azimuthal_period_nm}"
            )
        if self.hole_diameter_nm >= self.radial_period_nm:
            raise SpecError(
                f"hole diameter {self.hole_diameter_nm} must fit within one "
                f"radial period {self.radial_period_nm}"
            )
        for name in ("radial_period_nm", "center_disk_radius_nm", "hole_diameter_nm",
                     "azimuthal_period_nm", "thickness_nm"):
            if getattr(self, name) <= 0:
                raise SpecError(f"{name} must be positive")
        if self.num_rings < 1:
            raise SpecError(f"num_rings must be >= 1, got {self.num_rings}")
        if self.material_index <= 1:
            raise SpecError(f"material_index must exceed 1, got {self.material_index}")

    @property
    def outer_radius_nm(self) -> float:
        return self.center_disk_radius_nm + self.num_rings * self.radial_period_nm


StructureSpec = RCbgSpec | HCbgSpec


@dataclass(frozen=True)
class GridSpec:
    """Discretization and domain-size choices for rasterization and FDTD.

    ``radius_nm``/``height_nm`` of None auto-size the domain to the device
    plus ``air_margin_nm`` of free space plus the absorbing layer.
    """

    dr_nm: float = 15.0
    dz_nm: float = 15.0
    radius_nm: float | None = None
    height_nm: float | None = None
    pml_cells: int = 12
    air_margin_nm: float = 1500.0
    smoothing: bool = False

    def __post_init__(self):
        if self.dr_nm <= 0 or self.dz_nm <= 0:
            raise SpecError("grid steps must be positive")
        if self.pml_cells < 4:
            raise SpecError(f"pml_cells must be >= 4, got {self.pml_cells}")


@dataclass(frozen=True)
class PermittivityMap:
    """Relative permittivity on a uniform cylindrical (r, z) cell grid.

    ``eps[i, k]`` is the cell whose center sits at ((i + 1/2) dr, (k + 1/2) dz).
    The map is axisymmetric by construction; the azimuthal structure of hole
    gratings enters only through the effective-medium annulus values.
    """

    dr_nm: float
    dz_nm: float
    eps: np.ndarray
    membrane_zmin_nm: float
    membrane_zmax_nm: float
    pml_cells: int
    radius_nm: float
    height_nm: float
    material_index: float = field(default=DEFAULT_MATERIAL_INDEX)

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        object.__setattr__(self, "eps", eps)
        eps_max = self.material_index**2
        if eps.min() < 1.0 - 1e-12 or eps.max() > eps_max + 1e-9:
            raise SpecError(
                f"permittivity out of range [1, {eps_max:.4f}]: "
                f"[{eps.min():.4f}, {eps.max():.4f}]"
            )

    @property
    def nr(self) -> int:
        return self.eps.shape[0]

    @property
    def nz(self) -> int:
        return self.eps.shape[1]

    def r_centers(self) -> np.ndarray:
        return (np.arange(self.nr) + 0.5) * self.dr_nm

    def z_centers(self) -> np.ndarray:
        return (np.arange(self.nz) + 0.5) * self.dz_nm

    def membrane_mid_z_nm(self) -> float:
        return 0.5 * (self.membrane_zmin_nm + self.membrane_zmax_nm)

    def eps_at(self, r_nm: float, z_nm: float) -> float:
        """Permittivity of the cell containing (r, z); clamps to the domain."""
        i = min(max(int(r_nm / self.dr_nm), 0), self.nr - 1)
        k = min(max(int(z_nm / self.dz_nm), 0), self.nz - 1)
        return float(self.eps[i, k])


def bragg_seed(target_wavelength_nm: float, effective_index: float) -> float:
    """Radial period satisfying the second-order Bragg condition lambda/n_eff.

    The same seed fixes the center disk radius at 1.1x the returned period.
    """
    if target_wavelength_nm <= 0:
        raise SpecError(f"wavelength must be positive, got {target_wavelength_nm}")
    if effective_index <= 0:
        raise SpecError(f"effective index must be positive, got {effective_index}")
    return target_wavelength_nm / effective_index


def seed_center_disk(radial_period_nm: float) -> float:
    """Center disk radius seeded from the radial period (factor 1.1)."""
    return 1.1 * radial_period_nm


def emt_annulus(h_nm: float, a_nm: float, period_nm: float,
                material_index: float) -> tuple[float, float]:
    """Effective-medium reduction of one hole ring to an annulus.

    Returns (fill_factor, eps_eff): the air fill fraction of a unit cell of
    size a x period punched by one hole of diameter h, and the
    volume-fraction permittivity average f*1 + (1-f)*n^2.
    """
    if h_nm <= 0 or a_nm <= 0 or period_nm <= 0 or material_index < 1:
        raise SpecError("emt_annulus requires positive dimensions and index >= 1")
    if h_nm >= a_nm:
        raise SpecError(f"hole diameter {h_nm} must be smaller than azimuthal period {a_nm}")
    f = math.pi * (h_nm / 2.0) ** 2 / (a_nm * period_nm)
    if f >= 1.0:
        raise SpecError(f"holes overfill the annulus: fill factor {f:.3f} >= 1")
    eps_eff = f * 1.0 + (1.0 - f) * material_index**2
    return f, eps_eff


def te_slab_effective_index(wavelength_nm: float, thickness_nm: float,
                            core_index: float, clad_index: float = 1.0) -> float:
    """Effective index of the fundamental TE mode of a symmetric slab.

    Solves the standard transcendental dispersion relation; used to seed the
    Bragg period of a membrane device.
    """
    if not core_index > clad_index:
        raise SpecError("core index must exceed cladding index")
    k0 = 2.0 * math.pi / wavelength_nm

    def disp(neff):
        kappa = k0 * math.sqrt(max(core_index**2 - neff**2, 1e-300))
        gamma = k0 * math.sqrt(max(neff**2 - clad_index**2, 0.0))
        return kappa * math.tan(kappa * thickness_nm / 2.0) - gamma

    lo, hi = clad_index + 1e-9, core_index - 1e-9
    # TE0 branch: restrict to kappa*T/2 < pi/2 where tan is continuous
    branch_floor = core_index**2 - (math.pi / (k0 * thickness_nm)) ** 2
    if branch_floor > lo**2:
        lo = math.sqrt(branch_floor) + 1e-9
    return brentq(disp, lo, hi, xtol=1e-10)


def _grid_sizes(spec_outer_radius_nm: float, thickness_nm: float,
                grid: GridSpec) -> tuple[int, int, float, float]:
    """Resolve the domain cell counts, honoring explicit sizes when given."""
    pml_r = grid.pml_cells * grid.dr_nm
    pml_z = grid.pml_cells * grid.dz_nm
    radius = grid.radius_nm
    if radius is None:
        radius = spec_outer_radius_nm + grid.air_margin_nm + pml_r
    height = grid.height_nm
    if height is None:
        height = thickness_nm + 2.0 * (grid.air_margin_nm + pml_z)
    nr = int(round(radius / grid.dr_nm))
    nz = int(round(height / grid.dz_nm))
    if nr * grid.dr_nm < spec_outer_radius_nm:
        raise SpecError(
            f"domain radius {nr * grid.dr_nm:.0f} nm too small for device "
            f"extent {spec_outer_radius_nm:.0f} nm"
        )
    if nz * grid.dz_nm < thickness_nm + 2 * pml_z:
        raise SpecError("domain height too small for membrane plus absorbers")
    return nr, nz, nr * grid.dr_nm, nz * grid.dz_nm


def _check_resolution(period_nm: float, grid: GridSpec) -> None:
    cap = period_nm / 10.0
    if grid.dr_nm > cap or grid.dz_nm > cap:
        raise SpecError(
            f"grid step must not exceed period/10 = {cap:.1f} nm "
            f"(got dr={grid.dr_nm}, dz={grid.dz_nm})"
        )


def _membrane_bounds(thickness_nm: float, nz: int, dz_nm: float) -> tuple[float, float]:
    """Membrane z-extent, mid-plane snapped onto an integer grid plane.

    Snapping puts the dipole plane exactly on the E_r/E_phi z-nodes.
    """
    k_mid = int(round(0.5 * nz))
    z_mid = k_mid * dz_nm
    return z_mid - thickness_nm / 2.0, z_mid + thickness_nm / 2.0


def _rasterize(radial_eps, spec, grid: GridSpec) -> PermittivityMap:
    """Shared (r, z) rasterization: radial_eps(r) inside the membrane, air outside."""
    nr, nz, radius, height = _grid_sizes(spec.outer_radius_nm, spec.thickness_nm, grid)
    zmin, zmax = _membrane_bounds(spec.thickness_nm, nz, grid.dz_nm)

    def eval_points(r, z):
        eps_r = radial_eps(r)
        inside = (z >= zmin) & (z < zmax)
        return np.where(inside[None, :], eps_r[:, None], 1.0)

    if not grid.smoothing:
        r = (np.arange(nr) + 0.5) * grid.dr_nm
        z = (np.arange(nz) + 0.5) * grid.dz_nm
        eps = eval_points(r, z)
    else:
        # area-weighted: 4x4 subsamples per cell, averaged
        sub = (np.arange(4) + 0.5) / 4.0
        eps = np.zeros((nr, nz))
        for fr in sub:
            for fz in sub:
                r = (np.arange(nr) + fr) * grid.dr_nm
                z = (np.arange(nz) + fz) * grid.dz_nm
                eps += eval_points(r, z)
        eps /= 16.0

    return PermittivityMap(
        dr_nm=grid.dr_nm, dz_nm=grid.dz_nm, eps=eps,
        membrane_zmin_nm=zmin, membrane_zmax_nm=zmax,
        pml_cells=grid.pml_cells, radius_nm=radius, height_nm=height,
        material_index=spec.material_index,
    )


def build_rcbg(spec: RCbgSpec, grid: GridSpec | None = None) -> PermittivityMap:
    """Rasterize a ring grating: air trenches of width w at each period start."""
    grid = grid or GridSpec()
    _check_resolution(spec.radial_period_nm, grid)
    n2 = spec.material_index**2
    c = spec.center_disk_radius_nm
    period = spec.radial_period_nm
    w = spec.trench_width_nm
    outer = spec.outer_radius_nm

    def radial_eps(r):
        eps = np.full(r.shape, n2)
        in_grating = (r >= c) & (r < outer)
        frac = np.mod(r - c, period)
        eps[in_grating & (frac < w)] = 1.0
        eps[r >= outer] = 1.0
        return eps

    return _rasterize(radial_eps, spec, grid)


def build_hcbg(spec: HCbgSpec, grid: GridSpec | None = None) -> PermittivityMap:
    """Rasterize a hole grating via effective-medium annuli of width h."""
    grid = grid or GridSpec()
    _check_resolution(spec.radial_period_nm, grid)
    n2 = spec.material_index**2
    _, eps_eff = emt_annulus(spec.hole_diameter_nm, spec.azimuthal_period_nm,
                             spec.radial_period_nm, spec.material_index)
    c = spec.center_disk_radius_nm
    period = spec.radial_period_nm
    h = spec.hole_diameter_nm
    outer = spec.outer_radius_nm

    def radial_eps(r):
        eps = np.full(r.shape, n2)
        # annulus k centered at c + (k - 1/2) * period, radial width h
        in_grating = (r >= c) & (r < outer)
        dist = np.abs(np.mod(r - c, period) - 0.5 * period)
        eps[in_grating & (dist < 0.5 * h)] = eps_eff
        eps[r >= outer] = 1.0
        return eps

    return _rasterize(radial_eps, spec, grid)


def build_structure(spec: StructureSpec, grid: GridSpec | None = None) -> PermittivityMap:
    if isinstance(spec, RCbgSpec):
        return build_rcbg(spec, grid)
    if isinstance(spec, HCbgSpec):
        return build_hcbg(spec, grid)
    raise SpecError(f"unknown structure spec type {type(spec).__name__}")


def uniform_map(material_index: float, thickness_nm: float,
                grid: GridSpec | None = None,
                reference_extent_nm: float = 0.0) -> PermittivityMap:
    """Homogeneous map of eps = n^2 everywhere (bulk normalization runs).

    The membrane bookkeeping fields are kept so the same source placement
    logic applies; ``reference_extent_nm`` lets the caller reuse a device
    domain size.
    """
    if material_index < 1:
        raise SpecError("material_index must be >= 1")
    grid = grid or GridSpec()
    nr, nz, radius, height = _grid_sizes(reference_extent_nm, thickness_nm, grid)
    zmin, zmax = _membrane_bounds(thickness_nm, nz, grid.dz_nm)
    eps = np.full((nr, nz), material_index**2)
    return PermittivityMap(
        dr_nm=grid.dr_nm, dz_nm=grid.dz_nm, eps=eps,
        membrane_zmin_nm=zmin, membrane_zmax_nm=zmax,
        pml_cells=grid.pml_cells, radius_nm=radius, height_nm=height,
        material_index=material_index,
    )


def spec_from_mapping(mapping: dict) -> StructureSpec:
    """Build a structure spec from a ``[structure]`` config table."""
    m = dict(mapping)
    kind = str(m.pop("kind", "")).lower()
    common = {
        "radial_period_nm": m.pop("radial_period_nm", None),
        "center_disk_radius_nm": m.pop("center_disk_radius_nm", None),
        "thickness_nm": m.pop("thickness_nm", None),
        "num_rings": m.pop("num_rings", None),
        "material_index": m.pop("material_index", DEFAULT_MATERIAL_INDEX),
    }
    if kind == "rcbg":
        common["trench_width_nm"] = m.pop("trench_width_nm", None)
        cls = RCbgSpec
    elif kind == "hcbg":
        common["hole_diameter_nm"] = m.pop("hole_diameter_nm", None)
        common["azimuthal_period_nm"] = m.pop("azimuthal_period_nm", None)
        cls = HCbgSpec
    else:
        raise SpecError(f"structure kind must be 'rcbg' or 'hcbg', got {kind!r}")
    if m:
        raise SpecError(f"unknown structure keys: {sorted(m)}")
    missing = [k for k, v in common.items() if v is None]
    if missing:
        raise SpecError(f"missing structure keys: {missing}")
    common["num_rings"] = int(common["num_rings"])
    try:
        return cls(**common)
    except TypeError as exc:
        raise SpecError(str(exc)) from exc


def spec_to_mapping(spec: StructureSpec) -> dict:
    if isinstance(spec, RCbgSpec):
        return {
            "kind": "rcbg",
            "radial_period_nm": spec.radial_period_nm,
            "center_disk_radius_nm": spec.center_disk_radius_nm,
            "trench_width_nm": spec.trench_width_nm,
            "thickness_nm": spec.thickness_nm,
            "num_rings": spec.num_rings,
            "material_index": spec.material_index,
        }
    return {
        "kind": "hcbg",
        "radial_period_nm": spec.radial_period_nm,
        "center_disk_radius_nm": spec.center_disk_radius_nm,
        "hole_diameter_nm": spec.hole_diameter_nm,
        "azimuthal_period_nm": spec.azimuthal_period_nm,
        "thickness_nm": spec.thickness_nm,
        "num_rings": spec.num_rings,
        "material_index": spec.material_index,
    }
