"""Instantaneous SINRs, sum rates, and the Monte Carlo engine.

Symbols and noise are never sampled: conditioned on the channel matrices
and the transceiver, every SINR is a deterministic ratio of quadratic
forms, so averaging the resulting rates over channel draws estimates the
ergodic sum rate directly.

Per-user downlink SINR (user k, row h_k of the true downlink channel):

    rho_dl |h_k g_k|^2 / (rho_dl sum_{l != k} |h_k g_l|^2 + 1)

Per-user uplink SINR (row w_k of the combiner, column h_k of the true
uplink channel):

    rho_ul |w_k h_k|^2
    ---------------------------------------------------------------
    rho_ul sum_{l != k} |w_k h_l|^2 + (rho_si/alpha_anc) Omega_k + ||w_k||^2

where Omega_k = ||w_k X G||^2 is the residual self-interference power:
X is the true SI channel without digital cancellation, the estimation
error (true minus estimate) under SI subtraction, and again the true SI
channel under spatial suppression, whose precoder already nulls the
estimated SI rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import closedform
from .channel import (ChannelRealization, ConfigError, CorrelatedSampler,
                      ArrayGeometry, RicianParams, SystemConfig, generate_iid)
from .estimation import EstimatedChannels, EstimationModel, estimate
from .numerics import RngStream, SingularMatrixError
from .transceiver import (DegeneratePrecoderError, SicMode, TransceiverSet,
                          build)


@dataclass(frozen=True)
class SinrSample:
    """Per-user SINRs and residual SI powers of a single trial."""

    dl: np.ndarray
    ul: np.ndarray
    omega: np.ndarray


@dataclass(frozen=True)
class RateReport:
    """Monte Carlo estimate of the ergodic sum rates for one operating point."""

    dl_sum_rate: float
    ul_sum_rate: float
    dl_ci95: float
    ul_ci95: float
    trials: int
    failures: int

    @property
    def valid(self) -> bool:
        """False when more than 0.1 percent of trials failed."""
        return self.trials > 0 and self.failures / self.trials < 1e-3


def _dl_terms(h_dl_true: np.ndarray, g: np.ndarray):
    p = np.abs(h_dl_true @ g) ** 2
    sig = np.diagonal(p).copy()
    np.fill_diagonal(p, 0.0)
    return sig, p.sum(axis=1)


def _ul_terms(h_ul_true: np.ndarray, w: np.ndarray):
    p = np.abs(w @ h_ul_true) ** 2
    sig = np.diagonal(p).copy()
    np.fill_diagonal(p, 0.0)
    noise = np.sum(np.abs(w) ** 2, axis=1)
    return sig, p.sum(axis=1), noise


def dl_sinr(h_dl_true: np.ndarray, g: np.ndarray, rho_dl: float) -> np.ndarray:
    """Per-user downlink SINRs against the true channel."""
    sig, intf = _dl_terms(h_dl_true, g)
    return rho_dl * sig / (rho_dl * intf + 1.0)


def residual_si(mode: SicMode, w: np.ndarray, h_si_true: np.ndarray,
                h_si_hat: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Residual SI powers Omega_k = ||w_k X G||^2 for the given mode."""
    if mode is SicMode.SUBTRACTION:
        x = h_si_true - h_si_hat
    else:
        x = h_si_true
    rows = w @ x @ g
    return np.sum(np.abs(rows) ** 2, axis=1)


def ul_sinr(h_ul_true: np.ndarray, w: np.ndarray, omega: np.ndarray,
            config: SystemConfig, mode: SicMode,
            si_snr: float | None = None) -> np.ndarray:
    """Per-user uplink SINRs against the true channel.

    si_snr is the linear received SI SNR multiplying omega (before the
    analog-cancellation division); it defaults to config.rho_si and is
    overridden when per-element path gains are already folded into the SI
    channel.  The analog attenuation applies in every mode, so the mode
    argument only documents how omega was produced.
    """
    del mode
    sig, intf, noise = _ul_terms(h_ul_true, w)
    pref = (config.rho_si if si_snr is None else si_snr) / config.alpha_anc
    return config.rho_ul * sig / (config.rho_ul * intf + pref * omega + noise)


def sum_rate(sinrs: np.ndarray) -> float:
    """Sum of log2(1 + sinr) over users, in bps/Hz."""
    return float(np.sum(np.log2(1.0 + np.asarray(sinrs))))


def trial_sample(config: SystemConfig, mode: SicMode,
                 channels: ChannelRealization, est: EstimatedChannels,
                 ts: TransceiverSet,
                 si_snr: float | None = None) -> SinrSample:
    """Evaluate all SINRs of one already-drawn trial."""
    omega = residual_si(mode, ts.w, channels.h_si, est.h_si_hat, ts.g)
    return SinrSample(
        dl=dl_sinr(channels.h_dl, ts.g, config.rho_dl),
        ul=ul_sinr(channels.h_ul, ts.w, omega, config, mode, si_snr=si_snr),
        omega=omega)


class _Welford:
    """Streaming mean/variance accumulator (fixed accumulation order)."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self) -> None:
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def ci95(self) -> float:
        if self.n < 2:
            return math.nan
        return 1.96 * math.sqrt(self.m2 / (self.n - 1) / self.n)


def monte_carlo_sweep(configs: Sequence[SystemConfig], mode: SicMode, *,
                      trials: int, master_seed: int,
                      estimation: EstimationModel | None = None,
                      geometry: ArrayGeometry | None = None,
                      rician: RicianParams | None = None,
                      si_snrs: Sequence[float] | None = None
                      ) -> list[RateReport]:
    """Monte Carlo rates for several operating points sharing all draws.

    The configs must agree on (M, N, K); they may differ in the SNR
    scalars.  Trial t draws its channels from substream 2t and its
    estimation errors from substream 2t+1 of master_seed, so the draws are
    identical for every config, every mode, and any execution order
    (paired sampling / common random numbers).  Each point's report is
    bit-identical to running monte_carlo on it alone with the same seed.
    """
    if trials < 1:
        raise ConfigError("trials must be positive")
    if not configs:
        raise ConfigError("at least one config is required")
    base = configs[0]
    for cfg in configs:
        if (cfg.M, cfg.N, cfg.K) != (base.M, base.N, base.K):
            raise ConfigError("sweep configs must share M, N, K")
    if (geometry is None) != (rician is None):
        raise ConfigError("geometry and rician must be given together")
    model = estimation if estimation is not None else EstimationModel()

    si_scale = None
    if geometry is not None:
        sampler = CorrelatedSampler(base, geometry, rician)
        draw = sampler.sample
        # Path gains replace the flat beta_si, so the SI term scales with
        # the raw transmit SNR; estimation error follows the local channel
        # power to keep the NMSE meaningful per element.
        si_scale = sampler.si_gains
        defaults = [cfg.rho_t for cfg in configs]
    else:
        def draw(stream: RngStream) -> ChannelRealization:
            return generate_iid(base, stream)
        defaults = [cfg.rho_si for cfg in configs]
    if si_snrs is None:
        si_levels = defaults
    else:
        if len(si_snrs) != len(configs):
            raise ConfigError("si_snrs must match configs")
        si_levels = [d if s is None else s for s, d in zip(si_snrs, defaults)]

    acc_dl = [_Welford() for _ in configs]
    acc_ul = [_Welford() for _ in configs]
    failures = 0
    for t in range(trials):
        try:
            ch = draw(RngStream(master_seed, 2 * t))
            est = estimate(ch, model, RngStream(master_seed, 2 * t + 1),
                           si_error_scale=si_scale)
            ts = build(mode, est)
        except (SingularMatrixError, DegeneratePrecoderError):
            failures += 1
            continue
        dl_sig, dl_intf = _dl_terms(ch.h_dl, ts.g)
        ul_sig, ul_intf, noise = _ul_terms(ch.h_ul, ts.w)
        omega = residual_si(mode, ts.w, ch.h_si, est.h_si_hat, ts.g)
        for j, cfg in enumerate(configs):
            gdl = cfg.rho_dl * dl_sig / (cfg.rho_dl * dl_intf + 1.0)
            pref = si_levels[j] / cfg.alpha_anc
            gul = cfg.rho_ul * ul_sig / (
                cfg.rho_ul * ul_intf + pref * omega + noise)
            acc_dl[j].add(sum_rate(gdl))
            acc_ul[j].add(sum_rate(gul))
    return [RateReport(dl_sum_rate=acc_dl[j].mean, ul_sum_rate=acc_ul[j].mean,
                       dl_ci95=acc_dl[j].ci95(), ul_ci95=acc_ul[j].ci95(),
                       trials=trials, failures=failures)
            for j in range(len(configs))]


def monte_carlo(config: SystemConfig, mode: SicMode, *, trials: int,
                master_seed: int,
                estimation: EstimationModel | None = None,
                geometry: ArrayGeometry | None = None,
                rician: RicianParams | None = None,
                si_snr: float | None = None) -> RateReport:
    """Monte Carlo ergodic sum rates for a single operating point.

    estimation=None means perfect CSI.  geometry together with rician
    switches on the correlated Rician channel model.
    """
    return monte_carlo_sweep(
        [config], mode, trials=trials, master_seed=master_seed,
        estimation=estimation, geometry=geometry, rician=rician,
        si_snrs=None if si_snr is None else [si_snr])[0]


def half_duplex_rate(config: SystemConfig,
                     rho_dl_linear: float | None = None) -> float:
    """Half-duplex baseline: half the perfect-CSI SI-subtraction rate.

    A half-duplex BS splits the resources between the two directions, and
    each direction then runs the same zero-forcing link with no SI at all.
    """
    point = closedform.rate_perfect(SicMode.SUBTRACTION, config,
                                    rho_dl=rho_dl_linear)
    return 0.5 * point.total
