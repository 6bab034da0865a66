"""System configuration and channel generation.

A base station with M transmit and N receive antennas serves K single-antenna
uplink users and K single-antenna downlink users at the same time on the same
band.  Three matrices describe one coherence block:

    h_dl : (K, M)  downlink channel, row k is user k's channel transposed
    h_ul : (N, K)  uplink channel, column k belongs to user k
    h_si : (N, M)  self-interference channel between the BS arrays

The i.i.d. generator draws all entries CN(0, 1).  The correlated generator
applies Jakes (J0) spatial correlation at both BS arrays, gives the
self-interference channel a Rician line-of-sight component, and scales each
of its entries by the free-space path gain of the corresponding
transmit/receive element pair.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import RngStream, _complex_gaussian, bessel_j0, hermitian_sqrt

SPEED_OF_LIGHT = 299792458.0


class ConfigError(ValueError):
    """A configuration value violates one of the documented constraints."""


def db_to_linear(db: float) -> float:
    """Power ratio from decibels; -inf maps to exactly 0."""
    return 10.0 ** (db / 10.0)


def _check_db_field(name: str, value: float, allow_neg_inf: bool = True) -> None:
    if np.isnan(value):
        raise ConfigError(f"{name} must not be NaN")
    if value == np.inf:
        raise ConfigError(f"{name} must be finite")
    if value == -np.inf and not allow_neg_inf:
        raise ConfigError(f"{name} must be finite")


@dataclass(frozen=True)
class SystemConfig:
    """Static system parameters.

    All *_db fields are power ratios in dB (converted as 10**(x/10)); -inf is
    accepted where a zero linear value makes sense.  rho_t_db is the BS
    transmit SNR before path loss, so the received downlink SNR is
    rho_t * beta_ue and the received self-interference SNR is rho_t * beta_si.
    """

    M: int = 64                  # BS transmit antennas
    N: int = 20                  # BS receive antennas
    K: int = 10                  # users per direction
    rho_t_db: float = 50.0       # BS transmit SNR
    beta_ue_db: float = -80.0    # BS-to-user path loss
    beta_si_db: float = -40.0    # transmit-to-receive array path loss
    rho_ul_db: float = 10.0      # received uplink SNR per user
    alpha_anc_db: float = 40.0   # analog cancellation attenuation
    nmse: float = 0.2            # self-interference estimation NMSE

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ConfigError("K must be at least 1")
        if self.N <= self.K:
            raise ConfigError(
                f"N must exceed K for the uplink combiner (N={self.N}, K={self.K})")
        if self.M < self.N + self.K:
            raise ConfigError(
                f"M must be at least N + K for the spatial-suppression "
                f"precoder (M={self.M}, N={self.N}, K={self.K})")
        for name in ("rho_t_db", "beta_ue_db", "beta_si_db", "rho_ul_db"):
            _check_db_field(name, getattr(self, name))
        _check_db_field("alpha_anc_db", self.alpha_anc_db, allow_neg_inf=False)
        if not np.isfinite(self.nmse) or self.nmse < 0.0:
            raise ConfigError("nmse must be finite and nonnegative")

    @property
    def L(self) -> int:
        """Total BS antenna count M + N."""
        return self.M + self.N

    @property
    def rho_t(self) -> float:
        return db_to_linear(self.rho_t_db)

    @property
    def rho_dl(self) -> float:
        """Received downlink SNR rho_t * beta_ue (linear)."""
        return self.rho_t * db_to_linear(self.beta_ue_db)

    @property
    def rho_ul(self) -> float:
        return db_to_linear(self.rho_ul_db)

    @property
    def rho_si(self) -> float:
        """Received self-interference SNR rho_t * beta_si (linear)."""
        return self.rho_t * db_to_linear(self.beta_si_db)

    @property
    def alpha_anc(self) -> float:
        return db_to_linear(self.alpha_anc_db)


@dataclass(frozen=True)
class ChannelRealization:
    """One coherence block of true channels (treated as immutable)."""

    h_dl: np.ndarray   # (K, M)
    h_ul: np.ndarray   # (N, K)
    h_si: np.ndarray   # (N, M)


@dataclass(frozen=True)
class RicianParams:
    """Rician factor and line-of-sight amplitude of the SI channel."""

    kappa: float = 1.0
    sigma_si: float = 1.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.kappa) or self.kappa < 0.0:
            raise ConfigError("kappa must be finite and nonnegative")
        if not np.isfinite(self.sigma_si) or self.sigma_si < 0.0:
            raise ConfigError("sigma_si must be finite and nonnegative")


@dataclass(frozen=True)
class ArrayGeometry:
    """Element positions (meters, 3-vectors) of both BS arrays.

    Transmit/receive element pairs must be at least wavelength/6 apart and
    no two elements may coincide.
    """

    tx_positions: np.ndarray   # (M, 3)
    rx_positions: np.ndarray   # (N, 3)
    wavelength: float

    def __post_init__(self) -> None:
        tx = np.asarray(self.tx_positions, dtype=float)
        rx = np.asarray(self.rx_positions, dtype=float)
        object.__setattr__(self, "tx_positions", tx)
        object.__setattr__(self, "rx_positions", rx)
        if tx.ndim != 2 or tx.shape[1] != 3 or rx.ndim != 2 or rx.shape[1] != 3:
            raise ConfigError("positions must be arrays of 3-vectors")
        if not np.isfinite(self.wavelength) or self.wavelength <= 0.0:
            raise ConfigError("wavelength must be positive")
        for name, pos in (("tx", tx), ("rx", rx)):
            d = _pairwise_distances(pos, pos)
            off = d[~np.eye(len(pos), dtype=bool)]
            if off.size and off.min() <= 0.0:
                raise ConfigError(f"duplicate {name} element positions")
        cross = _pairwise_distances(rx, tx)
        if cross.size:
            if cross.min() <= 0.0:
                raise ConfigError("transmit and receive elements coincide")
            floor = self.wavelength / 6.0
            if cross.min() < floor * (1.0 - 1e-12):
                raise ConfigError(
                    f"minimum tx/rx element separation {cross.min():.6g} m is "
                    f"below wavelength/6 = {floor:.6g} m")

    def cross_distances(self) -> np.ndarray:
        """(N, M) matrix of tx/rx element distances."""
        return _pairwise_distances(self.rx_positions, self.tx_positions)


def _pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def default_geometry(config: SystemConfig, carrier_hz: float) -> ArrayGeometry:
    """Colinear uniform linear arrays in the default layout.

    M transmit elements at wavelength/6 spacing, then a wavelength/6 gap,
    then N receive elements at the same spacing, all on the x axis.
    """
    if not np.isfinite(carrier_hz) or carrier_hz <= 0.0:
        raise ConfigError("carrier frequency must be positive")
    lam = SPEED_OF_LIGHT / carrier_hz
    s = lam / 6.0
    tx = np.zeros((config.M, 3))
    tx[:, 0] = s * np.arange(config.M)
    rx = np.zeros((config.N, 3))
    rx[:, 0] = s * (config.M + np.arange(config.N))
    return ArrayGeometry(tx_positions=tx, rx_positions=rx, wavelength=lam)


def generate_iid(config: SystemConfig, rng: RngStream) -> ChannelRealization:
    """Draw one i.i.d. CN(0, 1) realization of all three channels.

    The three matrices are drawn sequentially (h_dl, h_ul, h_si) from a
    single generator so a given stream always yields the same realization.
    """
    gen = rng.generator()
    h_dl = _complex_gaussian(gen, config.K, config.M, 1.0)
    h_ul = _complex_gaussian(gen, config.N, config.K, 1.0)
    h_si = _complex_gaussian(gen, config.N, config.M, 1.0)
    return ChannelRealization(h_dl=h_dl, h_ul=h_ul, h_si=h_si)


def jakes_correlation(positions: np.ndarray, wavelength: float) -> np.ndarray:
    """Jakes spatial correlation matrix r_ij = J0(2 pi d_ij / wavelength).

    Returns a real symmetric matrix with a unit diagonal.  Duplicate
    positions are mathematically permitted but usually a mistake, so they
    trigger a warning.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ConfigError("positions must be an array of 3-vectors")
    if not np.isfinite(wavelength) or wavelength <= 0.0:
        raise ConfigError("wavelength must be positive")
    d = _pairwise_distances(pos, pos)
    off = d[~np.eye(len(pos), dtype=bool)]
    if off.size and off.min() <= 0.0:
        warnings.warn("duplicate antenna positions give a singular "
                      "correlation matrix", RuntimeWarning, stacklevel=2)
    r = bessel_j0(2.0 * np.pi * d / wavelength)
    np.fill_diagonal(r, 1.0)
    return (r + r.T) / 2.0


def free_space_gains(distances: np.ndarray, wavelength: float) -> np.ndarray:
    """Free-space power gain min(1, (wavelength / (4 pi d))^2) per entry."""
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0.0):
        raise ConfigError("distances must be strictly positive")
    g = (wavelength / (4.0 * np.pi * d)) ** 2
    return np.minimum(g, 1.0)


def si_pathloss_gains(geometry: ArrayGeometry) -> np.ndarray:
    """(N, M) free-space power gains between receive and transmit elements."""
    return free_space_gains(geometry.cross_distances(), geometry.wavelength)


class CorrelatedSampler:
    """Draws correlated Rician realizations for a fixed geometry.

    The correlation square roots and path-gain matrix only depend on the
    geometry, so they are computed once here and reused across trials.
    Keyword overrides exist so tests can substitute explicit correlation
    matrices or gains.
    """

    def __init__(self, config: SystemConfig, geometry: ArrayGeometry,
                 rician: RicianParams, *, r_tx: np.ndarray | None = None,
                 r_rx: np.ndarray | None = None,
                 si_gains: np.ndarray | None = None) -> None:
        self.config = config
        self.geometry = geometry
        self.rician = rician
        lam = geometry.wavelength
        if r_tx is None:
            r_tx = jakes_correlation(geometry.tx_positions, lam)
        if r_rx is None:
            r_rx = jakes_correlation(geometry.rx_positions, lam)
        if si_gains is None:
            si_gains = si_pathloss_gains(geometry)
        if r_tx.shape != (config.M, config.M):
            raise ConfigError("transmit correlation matrix shape mismatch")
        if r_rx.shape != (config.N, config.N):
            raise ConfigError("receive correlation matrix shape mismatch")
        if si_gains.shape != (config.N, config.M):
            raise ConfigError("path-gain matrix shape mismatch")
        self.r_tx_sqrt = hermitian_sqrt(r_tx)
        self.r_rx_sqrt = hermitian_sqrt(r_rx)
        self.si_gains = np.asarray(si_gains, dtype=float)
        self._si_amp = np.sqrt(self.si_gains)
        k = rician.kappa
        self._los_amp = np.sqrt(k / (k + 1.0)) * rician.sigma_si
        self._nlos_amp = np.sqrt(1.0 / (k + 1.0))

    def sample(self, rng: RngStream) -> ChannelRealization:
        cfg = self.config
        gen = rng.generator()
        h_dl_iid = _complex_gaussian(gen, cfg.K, cfg.M, 1.0)
        h_ul_iid = _complex_gaussian(gen, cfg.N, cfg.K, 1.0)
        h_si_iid = _complex_gaussian(gen, cfg.N, cfg.M, 1.0)
        h_dl = h_dl_iid @ self.r_tx_sqrt
        h_ul = self.r_rx_sqrt @ h_ul_iid
        los = self._los_amp * np.ones((cfg.N, cfg.M))
        h_si = self.r_rx_sqrt @ (los + self._nlos_amp * h_si_iid) @ self.r_tx_sqrt
        h_si = self._si_amp * h_si
        return ChannelRealization(h_dl=h_dl, h_ul=h_ul, h_si=h_si)


def generate_correlated(config: SystemConfig, geometry: ArrayGeometry,
                        rician: RicianParams,
                        rng: RngStream) -> ChannelRealization:
    """One correlated Rician realization (see CorrelatedSampler).

    h_dl = H_iid R_tx^(1/2); h_ul = R_rx^(1/2) H_iid; the self-interference
    channel is R_rx^(1/2) (LOS + NLOS) R_tx^(1/2) scaled entrywise by the
    square root of the free-space path gains, which replace the flat
    beta_si of the i.i.d. model.
    """
    return CorrelatedSampler(config, geometry, rician).sample(rng)
