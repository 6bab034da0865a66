import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdmimo.channel import SystemConfig
from fdmimo.closedform import (ClosedFormPoint, expected_si_power,
                               rate_perfect, ul_rate_imperfect,
                               ul_sinr_imperfect)
from fdmimo.transceiver import SicMode

CFG = SystemConfig()  # M=64, N=20, K=10, defaults throughout


def test_point_total():
    p = ClosedFormPoint(dl_rate=2.0, ul_rate=3.5)
    assert p.total == 5.5


# ----------------------------------------------------- perfect CSI rates

def test_perfect_subtraction_rates_frozen():
    # 10 log2(1 + 55/10) and 10 log2(1 + 10*11) at rho_dl=1, rho_ul=10
    p = rate_perfect(SicMode.SUBTRACTION, CFG, rho_dl=1.0)
    assert p.dl_rate == pytest.approx(27.004397181410923, rel=1e-14)
    assert p.ul_rate == pytest.approx(67.94415866350106, rel=1e-14)
    assert p.omega_bar == 0.0


def test_perfect_sps_loses_null_space_antennas():
    p = rate_perfect(SicMode.SPATIAL_SUPPRESSION, CFG, rho_dl=1.0)
    # gain 35 instead of 55
    assert p.dl_rate == pytest.approx(21.69925001442312, rel=1e-14)
    assert p.ul_rate == pytest.approx(67.94415866350106, rel=1e-14)


def test_perfect_nosic_divides_by_attenuated_si():
    # rho_t = 80 dB, beta_si = -40 dB, alpha = 40 dB -> rho_si/alpha = 1
    cfg = dataclasses.replace(CFG, rho_t_db=80.0)
    p = rate_perfect(SicMode.NO_SIC, cfg)
    assert p.ul_sinr == pytest.approx(55.0, rel=1e-14)
    assert p.ul_rate == pytest.approx(58.07354922057604, rel=1e-14)
    assert p.omega_bar == pytest.approx(0.1, rel=1e-14)


def test_perfect_rate_overrides():
    p = rate_perfect(SicMode.SUBTRACTION, CFG, rho_dl=0.0, rho_ul=0.0)
    assert p.dl_rate == 0.0 and p.ul_rate == 0.0
    q = rate_perfect(SicMode.SUBTRACTION, CFG, rho_ul=1.0)
    assert q.ul_sinr == 11.0


def test_perfect_si_free_limit():
    # with the transmit chain off there is no self-interference, so all
    # three modes collapse to the same uplink rate
    cfg = dataclasses.replace(CFG, rho_t_db=-math.inf)
    rates = {m: rate_perfect(m, cfg).ul_rate for m in SicMode}
    assert len(set(rates.values())) == 1
    assert rate_perfect(SicMode.NO_SIC, cfg).ul_sinr == 110.0


# ------------------------------------------------------- residual power

def test_expected_si_power_frozen():
    assert expected_si_power(SicMode.NO_SIC, CFG, perfect=True) == 0.1
    assert expected_si_power(SicMode.SUBTRACTION, CFG, perfect=False) \
        == pytest.approx(0.02, rel=1e-14)
    assert expected_si_power(SicMode.SPATIAL_SUPPRESSION, CFG, perfect=False) \
        == pytest.approx(0.2 / 1.2 / 10.0, rel=1e-14)


def test_expected_si_power_perfect_est_vanishes():
    for mode in (SicMode.SUBTRACTION, SicMode.SPATIAL_SUPPRESSION):
        assert expected_si_power(mode, CFG, perfect=True) == 0.0


def test_expected_si_power_saturates_at_nosic():
    cfg = dataclasses.replace(CFG, nmse=1e9)
    top = expected_si_power(SicMode.NO_SIC, cfg, perfect=False)
    sub = expected_si_power(SicMode.SUBTRACTION, cfg, perfect=False)
    assert sub / top == pytest.approx(1e9, rel=1e-12)
    sps = expected_si_power(SicMode.SPATIAL_SUPPRESSION, cfg, perfect=False)
    assert sps == pytest.approx(top, rel=1e-6)


# ------------------------------------------------- imperfect CSI uplink

def test_imperfect_sinr_frozen_defaults():
    # num = 10*100*10 = 10000; den = 201 + 0.001*chi*101
    want = {
        SicMode.NO_SIC: 10000.0 / (201.0 + 0.101),
        SicMode.SUBTRACTION: 10000.0 / (201.0 + 0.101 * 0.2),
        SicMode.SPATIAL_SUPPRESSION: 10000.0 / (201.0 + 0.101 / 6.0),
    }
    for mode, w in want.items():
        assert ul_sinr_imperfect(mode, CFG) == pytest.approx(w, rel=1e-12)


def test_imperfect_sinr_ordering_strict():
    cfg = dataclasses.replace(CFG, rho_t_db=60.0)  # rho_si/alpha = 0.01
    nosic = ul_sinr_imperfect(SicMode.NO_SIC, cfg)
    stt = ul_sinr_imperfect(SicMode.SUBTRACTION, cfg)
    sps = ul_sinr_imperfect(SicMode.SPATIAL_SUPPRESSION, cfg)
    assert sps > stt > nosic


def test_imperfect_rate_frozen():
    assert ul_rate_imperfect(SicMode.SUBTRACTION, CFG) == pytest.approx(
        10.0 * math.log2(1.0 + 10000.0 / (201.0 + 0.101 * 0.2)), rel=1e-14)


def test_imperfect_perfect_si_estimate_removes_chi():
    cfg = dataclasses.replace(CFG, nmse=0.0)
    stt = ul_sinr_imperfect(SicMode.SUBTRACTION, cfg)
    sps = ul_sinr_imperfect(SicMode.SPATIAL_SUPPRESSION, cfg)
    assert stt == sps == pytest.approx(10000.0 / 201.0, rel=1e-14)
    # no-SIC keeps the full SI term
    assert ul_sinr_imperfect(SicMode.NO_SIC, cfg) < stt


# ------------------------------------------------------------ hypothesis

_cfg_st = st.builds(
    lambda n, extra_k, extra_m, rho_t, nmse: SystemConfig(
        M=n + (n - extra_k) + extra_m, N=n, K=n - extra_k,
        rho_t_db=rho_t, nmse=nmse),
    st.integers(min_value=3, max_value=24),
    st.integers(min_value=1, max_value=2),
    st.integers(min_value=0, max_value=40),
    st.floats(min_value=-20.0, max_value=90.0),
    st.floats(min_value=1e-6, max_value=5.0),
).filter(lambda c: c.K >= 1)


@settings(max_examples=60, deadline=None)
@given(_cfg_st)
def test_modes_order_by_residual_si(cfg):
    nosic = ul_sinr_imperfect(SicMode.NO_SIC, cfg)
    stt = ul_sinr_imperfect(SicMode.SUBTRACTION, cfg)
    sps = ul_sinr_imperfect(SicMode.SPATIAL_SUPPRESSION, cfg)
    # suppression always helps (chi = eps2/(1+eps2) < min(1, eps2));
    # subtraction only helps while the estimate is better than nothing
    assert sps >= stt and sps >= nosic
    if cfg.nmse <= 1.0:
        assert stt >= nosic
    if cfg.rho_si > 0.0:
        assert sps > nosic


@settings(max_examples=60, deadline=None)
@given(_cfg_st)
def test_subtraction_beats_sps_with_perfect_csi(cfg):
    # the null space costs downlink array gain and buys nothing once the
    # SI channel is known exactly
    a = rate_perfect(SicMode.SUBTRACTION, cfg)
    b = rate_perfect(SicMode.SPATIAL_SUPPRESSION, cfg)
    assert a.total >= b.total


@settings(max_examples=40, deadline=None)
@given(_cfg_st, st.floats(min_value=0.1, max_value=10.0))
def test_imperfect_sinr_monotone_in_rho_ul(cfg, factor):
    cfg2 = dataclasses.replace(cfg, rho_ul_db=cfg.rho_ul_db
                               + 10.0 * math.log10(factor))
    for mode in SicMode:
        lo = ul_sinr_imperfect(mode, cfg)
        hi = ul_sinr_imperfect(mode, cfg2)
        if factor >= 1.0:
            assert hi >= lo * (1.0 - 1e-12)
        else:
            assert hi <= lo * (1.0 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(_cfg_st)
def test_imperfect_sinr_nonincreasing_in_si(cfg):
    louder = dataclasses.replace(cfg, beta_si_db=cfg.beta_si_db + 10.0)
    for mode in SicMode:
        assert ul_sinr_imperfect(mode, louder) \
            <= ul_sinr_imperfect(mode, cfg) * (1.0 + 1e-12)
