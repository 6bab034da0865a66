"""Closed-form ergodic sum-rate approximations.

The perfect-CSI rates follow from zero-forcing plus the expected inverse
column norms of the precoder and combiner (Wishart identities M-K+1,
M-N-K+1 and N-K+1).  The imperfect-CSI uplink rates use a high-SNR
ratio-of-means approximation in which the three SIC modes differ only by
the factor chi multiplying the residual self-interference power:

    no SIC                chi = 1
    SI subtraction        chi = eps2_si
    spatial suppression   chi = eps2_si / (1 + eps2_si)

The spatial-suppression factor is the harmonic-mean blend of the channel
and error powers: nulling the estimated SI channel leaves only the
component of the true channel aligned with the estimation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import SystemConfig
from .transceiver import SicMode


@dataclass(frozen=True)
class ClosedFormPoint:
    """One closed-form evaluation; fields are None where undefined."""

    dl_rate: float
    ul_rate: float
    ul_sinr: float | None = None
    omega_bar: float | None = None

    @property
    def total(self) -> float:
        return self.dl_rate + self.ul_rate


def _chi(mode: SicMode, eps2_si: float) -> float:
    if mode is SicMode.NO_SIC:
        return 1.0
    if mode is SicMode.SUBTRACTION:
        return eps2_si
    if eps2_si == 0.0:
        return 0.0
    return 1.0 / (1.0 / eps2_si + 1.0)


def expected_si_power(mode: SicMode, config: SystemConfig,
                      perfect: bool) -> float:
    """Expected residual SI power E{Omega} per user.

    All modes share the combiner-norm factor E{||w_k||^2} = 1/(N-K); the
    mode determines what fraction of the SI channel power survives.
    """
    base = 1.0 / (config.N - config.K)
    if mode is SicMode.NO_SIC:
        return base
    eps2 = 0.0 if perfect else config.nmse
    return _chi(mode, eps2) * base


def rate_perfect(mode: SicMode, config: SystemConfig, *,
                 rho_dl: float | None = None,
                 rho_ul: float | None = None) -> ClosedFormPoint:
    """Perfect-CSI downlink and uplink sum rates for one mode.

    Downlink: K log2(1 + rho_dl (M-K+1)/K), with M-N-K+1 replacing M-K+1
    under spatial suppression (the null-space constraint costs N antennas).
    Uplink: K log2(1 + rho_ul (N-K+1)); without SIC the SNR is divided by
    rho_si / alpha_anc + 1, the residual SI power after analog attenuation.
    rho_dl / rho_ul override the config-derived values when given (linear).
    """
    m, n, k = config.M, config.N, config.K
    rdl = config.rho_dl if rho_dl is None else rho_dl
    rul = config.rho_ul if rho_ul is None else rho_ul
    if mode is SicMode.SPATIAL_SUPPRESSION:
        dl_gain = m - n - k + 1
    else:
        dl_gain = m - k + 1
    dl_rate = k * math.log2(1.0 + rdl * dl_gain / k)
    ul_sinr = rul * (n - k + 1)
    omega_bar = 0.0
    if mode is SicMode.NO_SIC:
        ul_sinr = ul_sinr / (config.rho_si / config.alpha_anc + 1.0)
        omega_bar = expected_si_power(mode, config, perfect=True)
    ul_rate = k * math.log2(1.0 + ul_sinr)
    return ClosedFormPoint(dl_rate=dl_rate, ul_rate=ul_rate,
                           ul_sinr=ul_sinr, omega_bar=omega_bar)


def ul_sinr_imperfect(mode: SicMode, config: SystemConfig) -> float:
    """Imperfect-CSI per-user uplink SINR approximation.

        K rho_ul^2 (N - K)
        ------------------------------------------------------------
        2 K rho_ul + (rho_si/alpha_anc) chi (K rho_ul + 1) + 1

    assuming the user-link estimation variance 1/(K rho_ul + 1) and the
    SI estimation NMSE from the config.
    """
    m = config  # alias keeps the expression readable
    k, n = m.K, m.N
    rho = m.rho_ul
    chi = _chi(mode, m.nmse)
    num = k * rho * rho * (n - k)
    den = 2.0 * k * rho + (m.rho_si / m.alpha_anc) * chi * (k * rho + 1.0) + 1.0
    return num / den


def ul_rate_imperfect(mode: SicMode, config: SystemConfig) -> float:
    """Imperfect-CSI uplink sum rate K log2(1 + sinr)."""
    return config.K * math.log2(1.0 + ul_sinr_imperfect(mode, config))
