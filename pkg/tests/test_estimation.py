import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdmimo.channel import ConfigError, SystemConfig, generate_iid
from fdmimo.estimation import (EstimationModel, estimate, model_from_config,
                               uldl_error_variance)
from fdmimo.numerics import RngStream


def _draw(seed=0):
    cfg = SystemConfig(M=16, N=6, K=3)
    return cfg, generate_iid(cfg, RngStream(seed, 0))


# ----------------------------------------------------------------- model

def test_model_perfect_flag():
    assert EstimationModel().perfect
    assert not EstimationModel(eps2_si=0.1).perfect


@pytest.mark.parametrize("kw", [dict(eps2_dl=-0.1), dict(eps2_ul=math.nan),
                                dict(eps2_si=math.inf)])
def test_model_rejects_bad_variances(kw):
    with pytest.raises(ConfigError):
        EstimationModel(**kw)


def test_error_variance_matches_pilot_model():
    # beta / (K rho beta + 1); at beta=1, rho=10, K=10 this is 1/101
    assert uldl_error_variance(1.0, 10.0, 10) == pytest.approx(
        0.009900990099009901, rel=1e-15)
    assert uldl_error_variance(0.0, 10.0, 10) == 0.0


def test_error_variance_decreases_with_pilot_snr_and_users():
    base = uldl_error_variance(1.0, 10.0, 10)
    assert uldl_error_variance(1.0, 20.0, 10) < base
    assert uldl_error_variance(1.0, 10.0, 20) < base


def test_error_variance_validation():
    with pytest.raises(ConfigError):
        uldl_error_variance(-1.0, 10.0, 10)
    with pytest.raises(ConfigError):
        uldl_error_variance(1.0, 10.0, 0)


def test_model_from_config():
    cfg = SystemConfig()
    assert model_from_config(cfg, perfect=True) == EstimationModel()
    m = model_from_config(cfg, perfect=False)
    assert m.eps2_dl == pytest.approx(1.0 / 101.0, rel=1e-15)
    assert m.eps2_ul == m.eps2_dl
    assert m.eps2_si == 0.2


# -------------------------------------------------------------- estimate

def test_estimate_is_truth_plus_error_bitwise():
    cfg, ch = _draw()
    est = estimate(ch, EstimationModel(0.1, 0.2, 0.3), RngStream(1, 1))
    assert np.array_equal(est.h_dl_hat, ch.h_dl + est.e_dl)
    assert np.array_equal(est.h_ul_hat, ch.h_ul + est.e_ul)
    assert np.array_equal(est.h_si_hat, ch.h_si + est.e_si)


def test_perfect_estimation_is_exact():
    cfg, ch = _draw()
    est = estimate(ch, EstimationModel(), RngStream(1, 1))
    assert np.all(est.e_dl == 0.0) and np.all(est.e_si == 0.0)
    assert np.array_equal(est.h_dl_hat, ch.h_dl)
    assert np.array_equal(est.h_si_hat, ch.h_si)


def test_estimate_deterministic_per_stream():
    cfg, ch = _draw()
    model = EstimationModel(0.1, 0.1, 0.1)
    a = estimate(ch, model, RngStream(4, 9))
    b = estimate(ch, model, RngStream(4, 9))
    assert np.array_equal(a.e_si, b.e_si)
    c = estimate(ch, model, RngStream(4, 11))
    assert not np.array_equal(a.e_si, c.e_si)


def test_error_statistics_match_variances():
    cfg = SystemConfig()
    ch = generate_iid(cfg, RngStream(2, 0))
    model = EstimationModel(eps2_dl=0.05, eps2_ul=0.3, eps2_si=0.2)
    acc_dl = acc_ul = acc_si = 0.0
    trials = 300
    for t in range(trials):
        est = estimate(ch, model, RngStream(2, t))
        acc_dl += np.mean(np.abs(est.e_dl) ** 2)
        acc_ul += np.mean(np.abs(est.e_ul) ** 2)
        acc_si += np.mean(np.abs(est.e_si) ** 2)
    assert acc_dl / trials == pytest.approx(0.05, rel=0.05)
    assert acc_ul / trials == pytest.approx(0.3, rel=0.05)
    assert acc_si / trials == pytest.approx(0.2, rel=0.05)


def test_si_error_scale_sets_per_element_variance():
    cfg, ch = _draw()
    scale = np.linspace(0.1, 2.0, ch.h_si.size).reshape(ch.h_si.shape)
    model = EstimationModel(eps2_si=0.2)
    acc = np.zeros_like(scale)
    trials = 2000
    for t in range(trials):
        est = estimate(ch, model, RngStream(6, t), si_error_scale=scale)
        acc += np.abs(est.e_si) ** 2
    ratio = acc / trials / (0.2 * scale)
    assert abs(np.mean(ratio) - 1.0) < 0.05


def test_si_error_scale_shape_checked():
    cfg, ch = _draw()
    with pytest.raises(ConfigError, match="shape"):
        estimate(ch, EstimationModel(eps2_si=0.2), RngStream(0),
                 si_error_scale=np.ones((2, 2)))


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=5000))
def test_errors_uncorrelated_with_channel(seed):
    cfg, ch = _draw(seed)
    est = estimate(ch, EstimationModel(1.0, 1.0, 1.0), RngStream(seed, 1))
    # independence by stream separation; a single draw's correlation is
    # noisy, so only rule out gross coupling
    corr = abs(np.vdot(ch.h_si, est.e_si)) / (
        np.linalg.norm(ch.h_si) * np.linalg.norm(est.e_si))
    assert corr < 0.5
