"""Photon-counting calibration: g2(0) from pulsed coincidence histograms,
multi-photon correction, setup efficiency chains, and the count-rate to
source-efficiency conversion with quadrature uncertainty propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, SpecError


@dataclass(frozen=True)
class CoincidenceHistogram:
    """Pulsed HBT coincidence histogram.

    ``bin_edges_ns`` has len(counts)+1 uniform edges; ``rep_period_ns`` is the
    laser pulse spacing; peak areas are integrated within
    ``window_half_ns`` of each expected peak delay (defaults to a quarter
    period).
    """

    bin_edges_ns: np.ndarray
    counts: np.ndarray
    rep_period_ns: float
    window_half_ns: float | None = None

    def __post_init__(self):
        edges = np.asarray(self.bin_edges_ns, dtype=float)
        counts = np.asarray(self.counts)
        object.__setattr__(self, "bin_edges_ns", edges)
        object.__setattr__(self, "counts", counts)
        if edges.ndim != 1 or counts.ndim != 1 or len(edges) != len(counts) + 1:
            raise SpecError("need len(bin_edges) == len(counts) + 1")
        widths = np.diff(edges)
        if not np.allclose(widths, widths[0], rtol=1e-9):
            raise SpecError("histogram bins must be uniform")
        if np.any(counts < 0):
            raise SpecError("counts must be non-negative")
        if self.rep_period_ns <= 0:
            raise SpecError("repetition period must be positive")
        if self.window_half_ns is None:
            object.__setattr__(self, "window_half_ns", self.rep_period_ns / 4.0)
        if self.rep_period_ns <= 2.0 * self.window_half_ns:
            raise SpecError("repetition period must exceed twice the window")

    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges_ns[:-1] + self.bin_edges_ns[1:])


@dataclass(frozen=True)
class EfficiencyStage:
    """One element of a detection chain: label, efficiency, relative sigma."""

    label: str
    efficiency: float
    rel_uncertainty: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise SpecError(f"stage '{self.label}': efficiency must be in (0, 1]")
        if self.rel_uncertainty < 0.0:
            raise SpecError(f"stage '{self.label}': uncertainty must be >= 0")


@dataclass(frozen=True)
class BudgetInput:
    """Inputs of one source-efficiency calibration."""

    detected_rate_hz: float
    detected_rate_sigma_hz: float
    repetition_rate_hz: float
    stages: tuple[EfficiencyStage, ...]
    g2_at_power: float
    g2_sigma: float = 0.0
    nd_filter_db: float = 0.0
    dark_afterpulse_rate_hz: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.detected_rate_hz < 0:
            raise SpecError("detected rate must be >= 0")
        if self.repetition_rate_hz <= 0:
            raise SpecError("repetition rate must be positive")
        if not 0.0 <= self.g2_at_power < 1.0:
            raise SpecError("g2 must lie in [0, 1) for the correction to apply")
        if self.nd_filter_db < 0:
            raise SpecError("ND filter attenuation must be >= 0 dB")


def _peak_area(hist: CoincidenceHistogram, t_ns: float) -> tuple[float, float]:
    """Raw counts within the window around delay t; Poisson sigma = sqrt(sum)."""
    centers = hist.bin_centers()
    sel = np.abs(centers - t_ns) <= hist.window_half_ns
    area = float(np.sum(hist.counts[sel]))
    return area, math.sqrt(area)


def g2_zero(hist: CoincidenceHistogram) -> tuple[float, float]:
    """Zero-delay coincidence ratio: center-peak area over mean side-peak area.

    The two side peaks adjacent to tau = 0 are excluded from the mean, which
    guards against blinking or bunching shoulders.  Poisson counting errors
    are propagated in quadrature.
    """
    t0, t1 = hist.bin_edges_ns[0], hist.bin_edges_ns[-1]
    period = hist.rep_period_ns
    n_lo = int(math.ceil((t0 + hist.window_half_ns) / period))
    n_hi = int(math.floor((t1 - hist.window_half_ns) / period))
    orders = [n for n in range(n_lo, n_hi + 1) if n != 0]
    side_orders = [n for n in orders if abs(n) >= 2]
    if len(orders) < 5 or not side_orders:
        raise DataError(
            f"histogram must span at least 5 side peaks, found {len(orders)}"
        )
    center, center_sig = _peak_area(hist, 0.0)
    sides = np.array([_peak_area(hist, n * period)[0] for n in side_orders])
    side_mean = float(np.mean(sides))
    if side_mean <= 0:
        raise DataError("side peaks carry no counts; g2(0) undefined")
    # sigma of the mean side area from Poisson counts: sqrt(sum)/N
    side_mean_sig = math.sqrt(float(np.sum(sides))) / len(sides)
    g2 = center / side_mean
    if center > 0:
        rel = math.hypot(center_sig / center, side_mean_sig / side_mean)
        sigma = g2 * rel
    else:
        sigma = center_sig / side_mean if center_sig > 0 else 1.0 / side_mean
    return g2, sigma


def multiphoton_correction(g2: float) -> float:
    """Single-photon fraction factor sqrt(1 - g2(0))."""
    if not 0.0 <= g2 < 1.0:
        raise SpecError(f"g2 must lie in [0, 1), got {g2}")
    return math.sqrt(1.0 - g2)


def db_to_factor(db: float) -> float:
    """Linear attenuation factor of a dB value: 10^(db/10)."""
    if db < 0:
        raise SpecError(f"dB value must be >= 0, got {db}")
    return 10.0 ** (db / 10.0)


def chain_efficiency(stages: list[EfficiencyStage] | tuple[EfficiencyStage, ...],
                     ) -> tuple[float, float]:
    """Product of stage efficiencies; relative sigmas combined in quadrature.

    Returns (efficiency, absolute sigma).  An empty chain is the identity.
    """
    eff = 1.0
    rel_sq = 0.0
    for s in stages:
        eff *= s.efficiency
        rel_sq += s.rel_uncertainty**2
    return eff, eff * math.sqrt(rel_sq)


@dataclass(frozen=True)
class BudgetResult:
    """Stage-by-stage ledger of one calibration."""

    efficiency: float
    sigma: float
    corrected_rate_hz: float
    system_efficiency: float
    system_sigma: float
    multiphoton_factor: float
    nd_factor: float
    unphysical: bool
    ledger: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def rate_at_repetition_hz(self, repetition_rate_hz: float) -> float:
        """Source photon rate this efficiency implies at another laser rate."""
        return self.efficiency * repetition_rate_hz


def source_efficiency(inp: BudgetInput) -> BudgetResult:
    """Detected count rate -> source (collection/coupling) efficiency.

    eta = (detected - dark) * 10^(nd/10) / (rep * chain) * sqrt(1 - g2),
    with the relative uncertainties of the rate, the chain, and the g2
    correction combined in quadrature.
    """
    corrected = inp.detected_rate_hz - inp.dark_afterpulse_rate_hz
    if corrected <= 0:
        raise DataError(
            f"corrected rate {corrected:.3g} Hz is not positive; "
            "dark/afterpulse subtraction exhausted the signal"
        )
    nd = db_to_factor(inp.nd_filter_db)
    system, system_sig = chain_efficiency(inp.stages)
    mp = multiphoton_correction(inp.g2_at_power)
    eta = corrected * nd / (inp.repetition_rate_hz * system) * mp

    rel_sq = 0.0
    if inp.detected_rate_sigma_hz > 0:
        rel_sq += (inp.detected_rate_sigma_hz / corrected) ** 2
    if system_sig > 0:
        rel_sq += (system_sig / system) ** 2
    if inp.g2_sigma > 0:
        # d(sqrt(1-g2))/dg2 = -1/(2 sqrt(1-g2))
        rel_sq += (inp.g2_sigma / (2.0 * (1.0 - inp.g2_at_power))) ** 2
    sigma = eta * math.sqrt(rel_sq)

    ledger = [
        ("detected_rate_hz", inp.detected_rate_hz),
        ("dark_afterpulse_rate_hz", inp.dark_afterpulse_rate_hz),
        ("corrected_rate_hz", corrected),
        ("nd_factor", nd),
        ("repetition_rate_hz", inp.repetition_rate_hz),
        ("system_efficiency", system),
        ("multiphoton_factor", mp),
        ("efficiency", eta),
    ]
    return BudgetResult(
        efficiency=eta, sigma=sigma, corrected_rate_hz=corrected,
        system_efficiency=system, system_sigma=system_sig,
        multiphoton_factor=mp, nd_factor=nd,
        unphysical=eta > 1.0, ledger=tuple(ledger),
    )
