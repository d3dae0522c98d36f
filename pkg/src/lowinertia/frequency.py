"""Frequency response after a generation loss.

Three routes are provided, from cheapest to most detailed:

* closed-form RoCoF from the swing equation (:func:`rocof`),
* the linear IFD regression used by the Nordic control rooms
  (:func:`ifd_regression`), with deviations counted from 49.9 Hz because
  FCR-N is assumed fully deployed when the incident happens,
* a single-machine-equivalent time-domain simulation with a lumped
  governor and an optional HVDC emergency-power step (:func:`simulate_response`).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .core import EnergyGWs, FrequencyHz, PowerMW
from .errors import ConfigurationError, DomainError, NumericalInstabilityError, SingularFitError

MWS_PER_GWS = 1000.0


@dataclass(frozen=True)
class RegressionCoefficients:
    """``delta_f = alpha * dP[MW] / E_k[GWs] + beta``."""

    alpha: float
    beta: float
    direction: str = "under"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.direction not in ("under", "over"):
            raise ValueError(f"direction must be 'under' or 'over', got {self.direction!r}")


UNDER_FREQUENCY = RegressionCoefficients(alpha=0.0757, beta=0.0369, direction="under")


@dataclass(frozen=True)
class SecurityLimits:
    nominal_f0: FrequencyHz = 50.0
    fcr_n_band: FrequencyHz = 0.1
    max_ifd: FrequencyHz = 1.0
    safety_margin: FrequencyHz = 0.05
    load_shed_floor: FrequencyHz = 48.8

    def __post_init__(self):
        if not 0 < self.safety_margin < self.max_ifd:
            raise ValueError("safety margin must lie strictly between 0 and the maximum IFD")

    @property
    def ifd_limit(self) -> FrequencyHz:
        """Allowed IFD from nominal once the safety margin is kept (0.95 Hz)."""
        return self.max_ifd - self.safety_margin

    @property
    def fcr_n_edge(self) -> FrequencyHz:
        """Frequency at which FCR-N is exhausted and the disturbance reserve starts."""
        return self.nominal_f0 - self.fcr_n_band


def rocof(delta_p: PowerMW, e_k: EnergyGWs, f0: FrequencyHz = 50.0) -> float:
    """Initial rate of change of frequency, Hz/s.

    Positive for a generation deficit ``delta_p > 0``; the frequency falls
    at this rate.
    """
    if not e_k > 0:
        raise DomainError(f"kinetic energy must be positive, got {e_k}")
    return f0 * delta_p / (2.0 * e_k * MWS_PER_GWS)


def ifd_regression(delta_p: PowerMW, e_k_n1: EnergyGWs,
                   coeffs: RegressionCoefficients = UNDER_FREQUENCY) -> FrequencyHz:
    """Instantaneous frequency deviation predicted by the linear regression.

    Parameters
    ----------
    delta_p : float
        Lost generation in MW.
    e_k_n1 : float
        Kinetic energy left after the incident, GWs.
    coeffs : RegressionCoefficients
        Defaults to the published under-frequency fit.

    Returns
    -------
    float
        Deviation in Hz measured from 49.9 Hz (not from nominal). Use
        :func:`total_ifd_from_nominal` to compare against the IFD allowance.
    """
    if not e_k_n1 > 0:
        raise DomainError(f"post-fault kinetic energy must be positive, got {e_k_n1}")
    if delta_p < 0:
        raise DomainError(f"power imbalance must be non-negative, got {delta_p}")
    return coeffs.alpha * (delta_p / e_k_n1) + coeffs.beta


def ifd_over_frequency(delta_p: PowerMW, e_k_n1: EnergyGWs,
                       coeffs: RegressionCoefficients | None) -> FrequencyHz:
    """Over-frequency counterpart of :func:`ifd_regression`.

    No default coefficients exist; they have to come from configuration.
    """
    if coeffs is None:
        raise ConfigurationError("over-frequency regression coefficients are not configured")
    if coeffs.direction != "over":
        raise ConfigurationError("over-frequency IFD needs coefficients with direction='over'")
    return ifd_regression(delta_p, e_k_n1, coeffs)


def total_ifd_from_nominal(delta_f_under: FrequencyHz, limits: SecurityLimits = SecurityLimits()) -> FrequencyHz:
    """Deviation from nominal: the FCR-N band plus the post-49.9 Hz deviation."""
    if delta_f_under < 0:
        raise DomainError(f"deviation must be non-negative, got {delta_f_under}")
    return limits.fcr_n_band + delta_f_under


def regression_threshold(delta_p: PowerMW, limits: SecurityLimits = SecurityLimits(),
                         coeffs: RegressionCoefficients = UNDER_FREQUENCY) -> EnergyGWs:
    """Post-fault kinetic energy at which the predicted IFD equals the allowance."""
    headroom = limits.ifd_limit - limits.fcr_n_band - coeffs.beta
    if headroom <= 0:
        raise DomainError("the regression intercept alone exceeds the IFD allowance")
    return coeffs.alpha * delta_p / headroom


# --- regression fitting --------------------------------------------------


def r_squared(points: Iterable[tuple[float, float]], coeffs: RegressionCoefficients) -> float:
    """Coefficient of determination of ``points`` against a given line."""
    x, y = _as_xy(points)
    resid = y - (coeffs.alpha * x + coeffs.beta)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def residual_std(points: Iterable[tuple[float, float]], coeffs: RegressionCoefficients) -> float:
    """Sample standard deviation (ddof=1) of the residuals around a line."""
    x, y = _as_xy(points)
    resid = y - (coeffs.alpha * x + coeffs.beta)
    return float(np.std(resid, ddof=1))


def fit_regression(points: Sequence[tuple[float, float]],
                   direction: str = "under") -> tuple[RegressionCoefficients, float]:
    """Ordinary least-squares line through ``(dP/E_k, delta_f)`` points.

    Returns the fitted coefficients and the in-sample R^2, clipped to [0, 1].

    Raises
    ------
    SingularFitError
        With fewer than two points or a single distinct abscissa.
    DomainError
        If the fitted slope is not positive.
    """
    x, y = _as_xy(points)
    if len(x) < 2:
        raise SingularFitError("at least two points are needed")
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0 or np.ptp(x) == 0.0:
        raise SingularFitError("all abscissae are equal; slope is undetermined")
    slope = float(np.dot(dx, y - y.mean())) / sxx
    if not slope > 0:
        raise DomainError(f"fitted slope {slope} is not positive; the deviation must grow with dP/E_k")
    intercept = float(y.mean() - slope * x.mean())
    coeffs = RegressionCoefficients(alpha=slope, beta=intercept, direction=direction)
    return coeffs, min(1.0, max(0.0, r_squared(zip(x, y), coeffs)))


def _as_xy(points) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(points), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    return arr[:, 0], arr[:, 1]


def load_disturbance_points() -> list[tuple[float, float]]:
    """The 19 under-frequency disturbances behind the published regression.

    Values are read off the scatter plot, so each carries digitisation error
    of a few mHz.
    """
    text = resources.files("lowinertia.data").joinpath("under_frequency_disturbances.csv").read_text()
    rows = csv.DictReader(io.StringIO(text))
    return [(float(r["dp_over_ek"]), float(r["delta_f_hz"])) for r in rows]


# --- time-domain single-machine equivalent -------------------------------


@dataclass(frozen=True)
class GovernorConfig:
    """Lumped FCR-D response ``R * gain / (1 + s*time_constant)``.

    ``water_time_constant`` cascades the classical hydro penstock term
    ``(1 - s*Tw) / (1 + 0.5*s*Tw)``. ``max_power_mw`` caps the delivered
    reserve.
    """

    gain: float = 1.0
    time_constant: float = 3.0
    water_time_constant: float | None = 0.5
    max_power_mw: float | None = None

    def __post_init__(self):
        if not self.time_constant > 0:
            raise ValueError("governor time constant must be positive")
        if self.water_time_constant is not None and not self.water_time_constant > 0:
            raise ValueError("water time constant must be positive")


@dataclass(frozen=True)
class EpcConfig:
    """Step-wise HVDC emergency power control, identical on every link."""

    trigger_frequency: FrequencyHz = 49.5
    activation_delay: float = 0.5
    injected_power: PowerMW = 0.0
    links: int = 4

    def __post_init__(self):
        if self.injected_power < 0:
            raise ValueError("injected power must be non-negative")
        if self.activation_delay < 0:
            raise ValueError("activation delay must be non-negative")
        if self.links < 1:
            raise ValueError("at least one link is needed")


@dataclass(frozen=True)
class FrequencyModelConfig:
    system_base_mva: float = 100_000.0
    regulating_strength: float = 3625.0
    governor: GovernorConfig = field(default_factory=GovernorConfig)
    epc: EpcConfig = field(default_factory=EpcConfig)
    limits: SecurityLimits = field(default_factory=SecurityLimits)
    step_s: float = 0.01

    def __post_init__(self):
        if not self.system_base_mva > 0:
            raise ValueError("system base must be positive")
        if self.regulating_strength < 0:
            raise ValueError("regulating strength must be non-negative")
        if not 0 < self.step_s <= 0.01:
            raise ValueError("integration step must be positive and at most 10 ms")
        if not self.epc.trigger_frequency < self.limits.fcr_n_edge:
            raise ValueError("EPC trigger must lie below the FCR-N band")

    def with_epc_power(self, injected_power: PowerMW) -> "FrequencyModelConfig":
        return replace(self, epc=replace(self.epc, injected_power=injected_power))


@dataclass(frozen=True)
class Trajectory:
    """Simulated frequency after the incident.

    ``time`` is the fixed grid plus, when EPC fires, the activation instant,
    so a kink in the response is sampled exactly.
    """

    time: np.ndarray
    frequency: np.ndarray
    nadir: FrequencyHz
    nadir_time: float
    initial_rocof: float
    epc_activation_time: float | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_s", "frequency_hz"])
        for t, f in zip(self.time, self.frequency):
            w.writerow([repr(float(t)), repr(float(f))])
        return buf.getvalue()

    def ifd_from_nominal(self, f0: FrequencyHz = 50.0) -> FrequencyHz:
        return f0 - self.nadir


class _Plant:
    """Right-hand side of the swing equation with reserve dynamics.

    State: (f, governor output, hydro lag state). Powers in MW.
    """

    def __init__(self, cfg: FrequencyModelConfig, delta_p: float, e_k: float):
        self.f0 = cfg.limits.nominal_f0
        self.f_start = cfg.limits.fcr_n_edge
        self.h_sys = e_k * MWS_PER_GWS / cfg.system_base_mva
        self.s_n = cfg.system_base_mva
        self.delta_p = delta_p
        self.r = cfg.regulating_strength
        g = cfg.governor
        self.k = g.gain
        self.t_gov = g.time_constant
        self.tw = g.water_time_constant
        self.p_cap = g.max_power_mw
        self.epc_power = cfg.epc.injected_power

    def reserve_power(self, x_gov: float, z: float) -> float:
        if self.tw is None:
            p = x_gov
        else:
            p = 3.0 * z - 2.0 * x_gov
        if self.p_cap is not None:
            p = min(p, self.p_cap)
        return p

    def deriv(self, y: tuple[float, float, float], epc_on: bool) -> tuple[float, float, float]:
        f, x_gov, z = y
        p_res = self.reserve_power(x_gov, z)
        p_epc = self.epc_power if epc_on else 0.0
        # 2H d(omega)/dt = Pm - Pe in per unit of S_n, omega = f/f0
        dw = (p_res + p_epc - self.delta_p) / self.s_n / (2.0 * self.h_sys)
        df = dw * self.f0
        dx = (self.k * self.r * (self.f_start - f) - x_gov) / self.t_gov
        dz = 0.0 if self.tw is None else (x_gov - z) / (0.5 * self.tw)
        return df, dx, dz


def _rk4(plant: _Plant, y, h: float, epc_on: bool):
    k1 = plant.deriv(y, epc_on)
    y2 = tuple(a + 0.5 * h * b for a, b in zip(y, k1))
    k2 = plant.deriv(y2, epc_on)
    y3 = tuple(a + 0.5 * h * b for a, b in zip(y, k2))
    k3 = plant.deriv(y3, epc_on)
    y4 = tuple(a + h * b for a, b in zip(y, k3))
    k4 = plant.deriv(y4, epc_on)
    return tuple(a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def simulate_response(cfg: FrequencyModelConfig, delta_p: PowerMW, e_k: EnergyGWs,
                      horizon: float = 30.0) -> Trajectory:
    """Integrate the single-machine equivalent after losing ``delta_p`` MW.

    The run starts at 49.9 Hz with the disturbance reserve at rest. When EPC
    is configured with a positive injection, the step is applied
    ``activation_delay`` seconds after the frequency first reaches the
    trigger level; the integrator splits the step at that instant.

    Raises
    ------
    DomainError
        For non-positive kinetic energy or horizon.
    NumericalInstabilityError
        If the state becomes non-finite.
    """
    if not e_k > 0:
        raise DomainError(f"kinetic energy must be positive, got {e_k}")
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")

    plant = _Plant(cfg, delta_p, e_k)
    h = cfg.step_s
    n_steps = int(round(horizon / h))
    trigger = cfg.epc.trigger_frequency
    epc_enabled = cfg.epc.injected_power > 0

    y = (plant.f_start, 0.0, 0.0)
    initial_rocof = -plant.deriv(y, False)[0]
    times = [0.0]
    freqs = [y[0]]
    epc_on = False
    t_act = None

    for i in range(n_steps):
        t0 = i * h
        t1 = (i + 1) * h
        if t_act is not None and not epc_on and t_act < t1:
            y_new, extra = _split_step(plant, y, t0, t_act, t1)
            epc_on = True
        else:
            y_new = _rk4(plant, y, h, epc_on)
            extra = None
            if epc_enabled and t_act is None and y_new[0] <= trigger:
                frac = (y[0] - trigger) / (y[0] - y_new[0])
                t_act = t0 + frac * h + cfg.epc.activation_delay
                if t_act < t1:
                    y_new, extra = _split_step(plant, y, t0, t_act, t1)
                    epc_on = True
        if not all(math.isfinite(v) for v in y_new):
            raise NumericalInstabilityError(f"non-finite state at t={t1:.4f} s")
        if extra is not None:
            times.append(extra[0])
            freqs.append(extra[1])
        times.append(t1)
        freqs.append(y_new[0])
        y = y_new

    time = np.asarray(times)
    freq = np.asarray(freqs)
    k = int(np.argmin(freq))
    return Trajectory(
        time=time,
        frequency=freq,
        nadir=float(freq[k]),
        nadir_time=float(time[k]),
        initial_rocof=float(initial_rocof),
        epc_activation_time=t_act if epc_on else None,
    )


def _split_step(plant, y, t0, t_act, t1):
    """Advance from t0 to t1 with EPC switching on at t_act in between."""
    y_mid = _rk4(plant, y, t_act - t0, False) if t_act > t0 else y
    y_end = _rk4(plant, y_mid, t1 - t_act, True)
    return y_end, (t_act, y_mid[0])


def nadir_sweep(cfg: FrequencyModelConfig, delta_p: PowerMW, energies: Iterable[EnergyGWs],
                horizon: float = 30.0) -> list[FrequencyHz]:
    return [simulate_response(cfg, delta_p, ek, horizon).nadir for ek in energies]


def epc_power_for_limit(cfg: FrequencyModelConfig, delta_p: PowerMW, e_k: EnergyGWs,
                        nadir_floor: FrequencyHz, horizon: float = 30.0,
                        resolution: PowerMW = 1.0, max_power: PowerMW = 2000.0) -> PowerMW:
    """Smallest EPC step (to ``resolution``) that keeps the nadir at or above ``nadir_floor``.

    Bisection on the injected power; used to regenerate sizing curves from
    the simulator.
    """
    def ok(p):
        return simulate_response(cfg.with_epc_power(p), delta_p, e_k, horizon).nadir >= nadir_floor

    if ok(0.0):
        return 0.0
    if not ok(max_power):
        raise DomainError(f"even {max_power} MW of EPC cannot hold the nadir at {nadir_floor} Hz")
    lo, hi = 0.0, max_power
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
