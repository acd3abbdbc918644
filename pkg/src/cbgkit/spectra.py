"""Resonance extraction from emitted-power spectra: Lorentzian fits, Q factors,
multi-mode search, and Purcell spectra from device/bulk flux ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from .errors import DataError, FitError

# relative RMS residual above which a fit is flagged (still returned)
RESIDUAL_FLAG_THRESHOLD = 0.15


@dataclass(frozen=True)
class ResonanceFit:
    """Lorentzian resonance: center, FWHM, Q = center/FWHM, fit residual."""

    lambda0_nm: float
    fwhm_nm: float
    q: float
    residual: float
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "lambda0_nm": self.lambda0_nm,
            "fwhm_nm": self.fwhm_nm,
            "q": self.q,
            "residual": self.residual,
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class PurcellSpectrum:
    """Pointwise emitted-power ratio of a device run to its bulk reference."""

    wavelengths_nm: np.ndarray
    factor: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "wavelengths_nm",
                           np.asarray(self.wavelengths_nm, dtype=float))
        object.__setattr__(self, "factor", np.asarray(self.factor, dtype=float))

    @property
    def peak(self) -> float:
        return float(np.max(self.factor))

    @property
    def peak_wavelength_nm(self) -> float:
        return float(self.wavelengths_nm[int(np.argmax(self.factor))])


def purcell_spectrum(device_flux: np.ndarray, bulk_flux: np.ndarray,
                     wavelengths_nm: np.ndarray) -> PurcellSpectrum:
    """Pointwise device/bulk power ratio on a shared wavelength grid.

    The source spectrum cancels in the ratio, so no pulse deconvolution is
    needed as long as both runs used identical source settings.
    """
    dev = np.asarray(device_flux, dtype=float)
    bulk = np.asarray(bulk_flux, dtype=float)
    wl = np.asarray(wavelengths_nm, dtype=float)
    if dev.shape != bulk.shape or dev.shape != wl.shape:
        raise DataError(
            f"mismatched grids: device {dev.shape}, bulk {bulk.shape}, "
            f"wavelengths {wl.shape}"
        )
    if np.any(bulk <= 0):
        raise DataError("bulk reference flux must be positive at every wavelength")
    return PurcellSpectrum(wavelengths_nm=wl, factor=dev / bulk)


def _lorentzian(x, amp, x0, fwhm, offset):
    return amp / (1.0 + (2.0 * (x - x0) / fwhm) ** 2) + offset


def fit_resonance(wavelengths_nm: np.ndarray, power: np.ndarray) -> ResonanceFit:
    """Least-squares Lorentzian fit around the global maximum of a spectrum.

    Q is reported spectrally as lambda0/FWHM.  A poor relative residual flags
    the result without suppressing it; a spectrum whose maximum sits on the
    edge (no interior peak) raises ``FitError``.
    """
    wl = np.asarray(wavelengths_nm, dtype=float)
    p = np.asarray(power, dtype=float)
    if wl.ndim != 1 or wl.shape != p.shape or len(wl) < 10:
        raise FitError("need a 1-D spectrum with at least 10 samples")
    order = np.argsort(wl)
    wl, p = wl[order], p[order]

    imax = int(np.argmax(p))
    if imax == 0 or imax == len(p) - 1:
        raise FitError("spectrum maximum lies on the edge; no resonance to fit")
    pmax, pmin = float(p[imax]), float(np.min(p))
    if pmax - pmin <= 0 or (pmax - pmin) < 1e-12 * abs(pmax):
        raise FitError("spectrum is flat; no resonance to fit")

    # initial FWHM from half-max crossings around the peak
    half = pmin + 0.5 * (pmax - pmin)
    left = imax
    while left > 0 and p[left] > half:
        left -= 1
    right = imax
    while right < len(p) - 1 and p[right] > half:
        right += 1
    fwhm0 = max(wl[right] - wl[left], 2.0 * float(np.min(np.diff(wl))))

    p0 = [pmax - pmin, wl[imax], fwhm0, pmin]
    span = wl[-1] - wl[0]
    bounds = ([0.0, wl[0], 1e-9, -np.inf], [np.inf, wl[-1], 10.0 * span, np.inf])
    try:
        popt, _ = curve_fit(_lorentzian, wl, p, p0=p0, bounds=bounds, maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"Lorentzian fit failed to converge: {exc}") from exc

    amp, x0, fwhm, offset = popt
    resid = float(np.sqrt(np.mean((_lorentzian(wl, *popt) - p) ** 2)) / (pmax - pmin))
    return ResonanceFit(
        lambda0_nm=float(x0), fwhm_nm=float(fwhm), q=float(x0 / fwhm),
        residual=resid, flagged=resid > RESIDUAL_FLAG_THRESHOLD,
    )


def find_modes(wavelengths_nm: np.ndarray, power: np.ndarray,
               min_prominence: float) -> list[ResonanceFit]:
    """All local maxima above the prominence threshold, each Lorentzian-fitted.

    Prominence is measured on the raw spectrum (same units as ``power``).
    Returns fits sorted by center wavelength; may be empty.
    """
    wl = np.asarray(wavelengths_nm, dtype=float)
    p = np.asarray(power, dtype=float)
    if len(wl) == 0:
        raise DataError("empty spectrum")
    order = np.argsort(wl)
    wl, p = wl[order], p[order]

    peaks, props = find_peaks(p, prominence=min_prominence)
    fits: list[ResonanceFit] = []
    for j, peak in enumerate(peaks):
        # local window: out to the nearer base on each side, at least 5 samples
        lo = max(int(props["left_bases"][j]), 0)
        hi = min(int(props["right_bases"][j]), len(p) - 1)
        lo = min(lo, max(peak - 5, 0))
        hi = max(hi, min(peak + 5, len(p) - 1))
        window = slice(lo, hi + 1)
        try:
            fits.append(fit_resonance(wl[window], p[window]))
        except FitError:
            continue
    fits.sort(key=lambda f: f.lambda0_nm)
    return fits


def ringdown_q(time_fs: np.ndarray, probe: np.ndarray,
               wavelength_nm: float) -> float:
    """Cross-check Q from the exponential energy decay of a field probe.

    Fits log|probe|^2 over the trailing portion of the trace; Q = omega * tau
    with tau the energy decay time.  The spectral fit remains canonical.
    """
    t = np.asarray(time_fs, dtype=float)
    u = np.abs(np.asarray(probe)) ** 2
    if len(t) < 16 or np.all(u == 0):
        raise DataError("probe trace too short or identically zero")
    tail = slice(int(np.argmax(u)), len(u))
    tt, uu = t[tail], u[tail]
    keep = uu > 1e-12 * np.max(u)
    if np.count_nonzero(keep) < 8:
        raise DataError("probe trace decays too fast to fit")
    slope, _ = np.polyfit(tt[keep], np.log(uu[keep]), 1)
    if slope >= 0:
        raise FitError("probe trace does not decay")
    tau_fs = -1.0 / slope
    c_nm_per_fs = 299.792458
    omega = 2.0 * np.pi * c_nm_per_fs / wavelength_nm  # rad/fs
    return float(omega * tau_fs)
