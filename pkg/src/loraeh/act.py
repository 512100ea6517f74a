"""Adaptive charging-time plans: constant duty cycle and mean-voltage equalization.

Both schemes pick one free distribution parameter per spreading factor
(uniform upper bound with a = 0, or exponential scale with shape 1),
following the convention of the reference configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .capacitor import CapacitorModel, CycleConstants, build_model, estimate_mean_voltage
from .errors import InfeasibleError, NumericalError
from .markov import DEFAULT_BINS, DecayFactorDistribution, steady_state
from .phy import ChargingScheme, N_RINGS, PhyConfig, SF_TABLE, duty_cycle

PARAM_FLOOR_S = 1.0  # sub-second mean recharge is outside the model's regime
ETSI_DUTY_CAP = 0.01


@dataclass(frozen=True)
class ActPlan:
    """Per-SF charging schemes solved for a common target."""

    kind: str  # "cdc" | "cve"
    dist_kind: str  # "uniform" | "weibull"
    target: float  # duty multiplier theta, or voltage multiplier vartheta
    schemes: tuple[ChargingScheme, ...]
    mean_nu: np.ndarray  # E[nu] per SF [s]
    mean_decay: np.ndarray  # E[exp(-nu/tau_off)] per SF
    predicted_mean_v: np.ndarray  # affine fixed-point mean [V]
    stationary_mean_v: np.ndarray  # steady-state chain mean [V]
    stationary_std_v: np.ndarray  # steady-state chain spread [V]
    predicted_outage: np.ndarray  # steady-state outage at the operating threshold
    duty_simple: np.ndarray  # airtime/(E[nu]+airtime) per SF
    etsi_ok: np.ndarray  # duty_simple <= 1%


def _scheme_for(dist_kind: str, mean_nu: float) -> ChargingScheme:
    if dist_kind == "uniform":
        return ChargingScheme.uniform(0.0, 2.0 * mean_nu)
    if dist_kind == "weibull":
        return ChargingScheme.weibull(1.0, mean_nu)
    raise ValueError(f"unknown distribution kind {dist_kind!r}")


def _achieved(
    schemes: list[ChargingScheme],
    m: CapacitorModel,
    cfg: PhyConfig,
    n_bins: int,
) -> tuple[np.ndarray, ...]:
    mean_nu = np.array([s.mean() for s in schemes])
    decay = np.empty(N_RINGS)
    mean_v = np.empty(N_RINGS)
    st_mean = np.empty(N_RINGS)
    st_std = np.empty(N_RINGS)
    outage = np.empty(N_RINGS)
    duty = np.empty(N_RINGS)
    for r, scheme in enumerate(schemes):
        airtime = SF_TABLE[r].airtime_s
        cc = CycleConstants.from_model(m, airtime)
        dist = DecayFactorDistribution(scheme=scheme, tau_charge=m.tau_off)
        decay[r] = dist.mean()
        mean_v[r] = estimate_mean_voltage(cc, decay[r])
        sd = steady_state(scheme, airtime, m, n_bins=n_bins)
        st_mean[r] = sd.mean()
        st_std[r] = sd.std()
        outage[r] = sd.outage(cfg.v_operating)
        duty[r] = duty_cycle(scheme, airtime).simple_ratio
    return mean_nu, decay, mean_v, st_mean, st_std, outage, duty


def plan_cdc(
    theta: float,
    dist_kind: str,
    cfg: PhyConfig,
    mode: str = "thevenin",
    n_bins: int = DEFAULT_BINS,
) -> ActPlan:
    """Constant duty cycle: E[nu] = theta * airtime per SF (duty 1/(1+theta))."""
    if theta <= 0:
        raise InfeasibleError(f"duty multiplier must be positive, got {theta}")
    m = build_model(cfg, mode)
    schemes = [_scheme_for(dist_kind, theta * entry.airtime_s) for entry in SF_TABLE]
    mean_nu, decay, mean_v, st_mean, st_std, outage, duty = _achieved(schemes, m, cfg, n_bins)
    return ActPlan(
        kind="cdc",
        dist_kind=dist_kind,
        target=theta,
        schemes=tuple(schemes),
        mean_nu=mean_nu,
        mean_decay=decay,
        predicted_mean_v=mean_v,
        stationary_mean_v=st_mean,
        stationary_std_v=st_std,
        predicted_outage=outage,
        duty_simple=duty,
        etsi_ok=duty <= ETSI_DUTY_CAP + 1e-15,
    )


def _solve_mean_decay(dist_kind: str, target: float, tau_charge: float, sf: int) -> float:
    """Bisect the free parameter (uniform b, or exponential w) to hit E[decay].

    E[decay] is strictly decreasing in the parameter, from 1 at 0+ toward 0.
    Returns the parameter; |achieved - target| <= 1e-10.
    """

    def mean_decay(par: float) -> float:
        scheme = ChargingScheme.uniform(0.0, par) if dist_kind == "uniform" else ChargingScheme.weibull(1.0, par)
        return DecayFactorDistribution(scheme=scheme, tau_charge=tau_charge).mean()

    lo, hi = 1e-9, max(4.0 * tau_charge, 1.0)
    for _ in range(200):
        if mean_decay(hi) < target:
            break
        hi *= 2.0
        if hi > 1e12:
            raise NumericalError(f"SF{sf}: no bracket for the charging-time solve")
    else:
        raise NumericalError(f"SF{sf}: no bracket for the charging-time solve")
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        if mean_decay(mid) > target:
            lo = mid
        else:
            hi = mid
        if abs(mean_decay(mid) - target) <= 1e-10:
            return mid
    raise NumericalError(f"SF{sf}: charging-time bisection did not converge")


def plan_cve(
    vartheta: float,
    dist_kind: str,
    cfg: PhyConfig,
    mode: str = "thevenin",
    n_bins: int = DEFAULT_BINS,
) -> ActPlan:
    """Voltage equalization: solve E[nu] per SF so the stationary mean is vartheta * V_op."""
    m = build_model(cfg, mode)
    v_target = vartheta * cfg.v_operating
    if not m.v_limit_on < v_target < m.v_limit_off:
        raise InfeasibleError(
            f"target mean voltage {v_target:.4f} V outside ({m.v_limit_on:.4f}, {m.v_limit_off:.4f}) V"
        )
    schemes = []
    for entry in SF_TABLE:
        cc = CycleConstants.from_model(m, entry.airtime_s)
        target = (v_target - cc.v_after_full) / (cc.retention * (v_target - cc.ceiling))
        if not 0.0 < target < 1.0:
            raise InfeasibleError(
                f"SF{entry.sf}: required mean decay factor {target:.6f} outside (0, 1)", sf=entry.sf
            )
        par = _solve_mean_decay(dist_kind, target, m.tau_off, entry.sf)
        if par < PARAM_FLOOR_S:
            raise InfeasibleError(
                f"SF{entry.sf}: solved charging parameter {par:.3f} s below the {PARAM_FLOOR_S} s floor",
                sf=entry.sf,
            )
        schemes.append(_scheme_for(dist_kind, par / 2.0 if dist_kind == "uniform" else par))
    mean_nu, decay, mean_v, st_mean, st_std, outage, duty = _achieved(schemes, m, cfg, n_bins)
    return ActPlan(
        kind="cve",
        dist_kind=dist_kind,
        target=vartheta,
        schemes=tuple(schemes),
        mean_nu=mean_nu,
        mean_decay=decay,
        predicted_mean_v=mean_v,
        stationary_mean_v=st_mean,
        stationary_std_v=st_std,
        predicted_outage=outage,
        duty_simple=duty,
        etsi_ok=duty <= ETSI_DUTY_CAP + 1e-15,
    )
