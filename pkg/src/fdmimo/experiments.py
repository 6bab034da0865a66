"""Named experiment scenarios, config files, and CSV emission.

Three named scenarios cover the standard sweeps, plus a free-form one:

    fig-perfect       perfect CSI, i.i.d. channels, sweep of the received
                      downlink SNR; closed forms for both directions
    fig-imperfect-si  imperfect CSI, i.i.d. channels, sweep of the received
                      SI SNR (transmit SNR varies, beta_si fixed); uplink
                      closed form only
    fig-correlated    imperfect CSI, spatially correlated Rician channels
                      with per-element SI path loss at 2.1 GHz; sweep of
                      the received downlink SNR; simulation only
    custom            imperfect CSI, i.i.d. channels, free sweep bounds

Config files are flat UTF-8 ``key = value`` lines with ``#`` comments.
Unknown keys are rejected with their line number; missing keys fall back
to the defaults of the named scenario.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence, TextIO

from . import closedform, metrics
from .channel import (ArrayGeometry, ConfigError, RicianParams, SystemConfig,
                      default_geometry)
from .estimation import model_from_config
from .transceiver import SicMode

CORRELATED_CARRIER_HZ = 2.1e9
CORRELATED_RICIAN = RicianParams(kappa=1.0, sigma_si=1.0)

#: Baseline row tag for the half-duplex reference curve.
HALF_DUPLEX = "hd"

MODE_TOKENS = ("nosic", "stt", "sps", HALF_DUPLEX)

SCENARIO_NAMES = ("fig-perfect", "fig-imperfect-si", "fig-correlated",
                  "custom")

CSV_HEADER = ("scenario,mode,x_db,dl_sim,dl_sim_ci,ul_sim,ul_sim_ci,"
              "dl_cf,ul_cf,trials,failures")


@dataclass(frozen=True)
class Scenario:
    """A sweep definition: what to vary, which curves, how many trials."""

    name: str
    sweep_variable: str          # "rho_dl_db" or "rho_si_db"
    sweep_start: float
    sweep_stop: float
    sweep_step: float
    modes: tuple[str, ...]
    trials: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.name not in SCENARIO_NAMES:
            raise ConfigError(f"unknown scenario '{self.name}'; expected one "
                              f"of {', '.join(SCENARIO_NAMES)}")
        if self.sweep_variable not in ("rho_dl_db", "rho_si_db"):
            raise ConfigError("sweep_variable must be rho_dl_db or rho_si_db")
        if not self.sweep_step > 0.0:
            raise ConfigError("sweep_step must be positive")
        if self.sweep_start > self.sweep_stop:
            raise ConfigError("sweep_start must not exceed sweep_stop")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")
        if not self.modes:
            raise ConfigError("modes must not be empty")
        for token in self.modes:
            if token not in MODE_TOKENS:
                raise ConfigError(f"unknown mode '{token}'; expected one of "
                                  f"{', '.join(MODE_TOKENS)}")

    def sweep_values(self) -> list[float]:
        count = int((self.sweep_stop - self.sweep_start) / self.sweep_step
                    + 1e-9)
        return [self.sweep_start + i * self.sweep_step
                for i in range(count + 1)]


@dataclass(frozen=True)
class SweepRow:
    """One CSV row; closed-form fields are None where no formula exists."""

    scenario: str
    mode: str
    x_db: float
    dl_sim: float
    dl_sim_ci: float
    ul_sim: float
    ul_sim_ci: float
    dl_cf: float | None
    ul_cf: float | None
    trials: int
    failures: int


def default_config() -> SystemConfig:
    return SystemConfig()


_SCENARIO_DEFAULTS = {
    "fig-perfect": dict(sweep_variable="rho_dl_db", sweep_start=0.0,
                        sweep_stop=30.0, sweep_step=2.0,
                        modes=("nosic", "stt", "sps"), trials=10_000),
    "fig-imperfect-si": dict(sweep_variable="rho_si_db", sweep_start=-10.0,
                             sweep_stop=30.0, sweep_step=2.0,
                             modes=("nosic", "stt", "sps"), trials=10_000),
    "fig-correlated": dict(sweep_variable="rho_dl_db", sweep_start=0.0,
                           sweep_stop=30.0, sweep_step=2.0,
                           modes=("stt", "sps"), trials=5_000),
    "custom": dict(sweep_variable="rho_dl_db", sweep_start=0.0,
                   sweep_stop=30.0, sweep_step=2.0,
                   modes=("nosic", "stt", "sps"), trials=10_000),
}


def default_scenario(name: str) -> Scenario:
    if name not in _SCENARIO_DEFAULTS:
        raise ConfigError(f"unknown scenario '{name}'; expected one of "
                          f"{', '.join(SCENARIO_NAMES)}")
    return Scenario(name=name, master_seed=1, **_SCENARIO_DEFAULTS[name])


_CONFIG_INT_KEYS = {"M": "M", "N": "N", "K": "K"}
_CONFIG_FLOAT_KEYS = {
    "rho_t_db": "rho_t_db", "beta_ue_db": "beta_ue_db",
    "beta_si_db": "beta_si_db", "rho_ul_db": "rho_ul_db",
    "alpha_anc_db": "alpha_anc_db", "nmse": "nmse",
}
_SCENARIO_FLOAT_KEYS = ("sweep_start", "sweep_stop", "sweep_step")
_SCENARIO_INT_KEYS = ("trials", "master_seed")
_ALL_KEYS = (set(_CONFIG_INT_KEYS) | set(_CONFIG_FLOAT_KEYS)
             | set(_SCENARIO_FLOAT_KEYS) | set(_SCENARIO_INT_KEYS)
             | {"scenario", "sweep_variable", "modes"})


def _parse_lines(text: str) -> dict[str, tuple[int, str]]:
    entries: dict[str, tuple[int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        entries[key] = (lineno, value)
    return entries


def _convert(key: str, lineno: int, value: str, kind: type):
    try:
        return kind(value)
    except ValueError as exc:
        raise ConfigError(
            f"line {lineno}: invalid {kind.__name__} for '{key}': "
            f"'{value}'") from exc


def parse_config(text: str,
                 scenario_name: str | None = None
                 ) -> tuple[SystemConfig, Scenario]:
    """Parse config text; see load_config."""
    entries = _parse_lines(text)
    if scenario_name is None:
        if "scenario" in entries:
            scenario_name = entries["scenario"][1]
        else:
            scenario_name = "custom"
    entries.pop("scenario", None)

    cfg_kwargs = {}
    for key, field in _CONFIG_INT_KEYS.items():
        if key in entries:
            lineno, value = entries.pop(key)
            cfg_kwargs[field] = _convert(key, lineno, value, int)
    for key, field in _CONFIG_FLOAT_KEYS.items():
        if key in entries:
            lineno, value = entries.pop(key)
            cfg_kwargs[field] = _convert(key, lineno, value, float)

    scn = default_scenario(scenario_name)
    scn_kwargs: dict = {}
    if "sweep_variable" in entries:
        scn_kwargs["sweep_variable"] = entries.pop("sweep_variable")[1]
    if "modes" in entries:
        _, value = entries.pop("modes")
        scn_kwargs["modes"] = tuple(
            token.strip() for token in value.split(",") if token.strip())
    for key in _SCENARIO_FLOAT_KEYS:
        if key in entries:
            lineno, value = entries.pop(key)
            scn_kwargs[key] = _convert(key, lineno, value, float)
    for key in _SCENARIO_INT_KEYS:
        if key in entries:
            lineno, value = entries.pop(key)
            scn_kwargs[key] = _convert(key, lineno, value, int)
    config = SystemConfig(**cfg_kwargs)
    scenario = dataclasses.replace(scn, **scn_kwargs)
    return config, scenario


def load_config(path: str,
                scenario_name: str | None = None
                ) -> tuple[SystemConfig, Scenario]:
    """Load a config file, overlaying it on the named scenario's defaults.

    scenario_name (e.g. from a CLI flag) wins over a ``scenario`` key in
    the file; with neither, the file configures the ``custom`` scenario.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, scenario_name)


def format_config(config: SystemConfig, scenario: Scenario) -> str:
    """Render a config + scenario as a loadable key = value document."""
    lines = ["# system"]
    for key, field in (*_CONFIG_INT_KEYS.items(), *_CONFIG_FLOAT_KEYS.items()):
        lines.append(f"{key} = {getattr(config, field)!r}")
    lines.append("")
    lines.append("# sweep")
    lines.append(f"scenario = {scenario.name}")
    lines.append(f"sweep_variable = {scenario.sweep_variable}")
    for key in _SCENARIO_FLOAT_KEYS:
        lines.append(f"{key} = {getattr(scenario, key)!r}")
    lines.append(f"modes = {','.join(scenario.modes)}")
    for key in _SCENARIO_INT_KEYS:
        lines.append(f"{key} = {getattr(scenario, key)}")
    return "\n".join(lines) + "\n"


def save_config(config: SystemConfig, scenario: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_config(config, scenario))


def _point_config(config: SystemConfig, scenario: Scenario,
                  x_db: float) -> SystemConfig:
    if scenario.sweep_variable == "rho_dl_db":
        rho_t_db = x_db - config.beta_ue_db
    else:
        rho_t_db = x_db - config.beta_si_db
    return dataclasses.replace(config, rho_t_db=rho_t_db)


def _closed_forms(scenario: Scenario, mode_token: str,
                  cfg: SystemConfig) -> tuple[float | None, float | None]:
    if scenario.name == "fig-perfect":
        if mode_token == HALF_DUPLEX:
            point = closedform.rate_perfect(SicMode.SUBTRACTION, cfg)
            return 0.5 * point.dl_rate, 0.5 * point.ul_rate
        point = closedform.rate_perfect(SicMode(mode_token), cfg)
        return point.dl_rate, point.ul_rate
    if scenario.name in ("fig-imperfect-si", "custom"):
        if mode_token == HALF_DUPLEX:
            return None, None
        return None, closedform.ul_rate_imperfect(SicMode(mode_token), cfg)
    return None, None


def run_scenario(config: SystemConfig, scenario: Scenario,
                 progress: Callable[[str], None] | None = None,
                 sink: list[SweepRow] | None = None) -> list[SweepRow]:
    """Run every (mode, sweep point) pair and return rows in CSV order.

    Rows are mode-major in the scenario's mode order, sweep value
    ascending within a mode.  All modes and points share the same per-trial
    channel and error draws (common random numbers keyed by master_seed).
    If a sink list is supplied, rows land there as each mode completes, so
    a caller can still flush partial results when a later mode raises.
    """
    xs = scenario.sweep_values()
    configs = [_point_config(config, scenario, x) for x in xs]

    correlated = scenario.name == "fig-correlated"
    geometry: ArrayGeometry | None = None
    rician = None
    if correlated:
        geometry = default_geometry(config, CORRELATED_CARRIER_HZ)
        rician = CORRELATED_RICIAN
    model = model_from_config(config, perfect=(scenario.name == "fig-perfect"))

    rows: list[SweepRow] = sink if sink is not None else []
    for token in scenario.modes:
        if token == HALF_DUPLEX:
            engine_mode = SicMode.SUBTRACTION
            si_snrs: list[float] | None = [0.0] * len(configs)
            scale = 0.5
        else:
            engine_mode = SicMode(token)
            si_snrs = None
            scale = 1.0
        if progress is not None:
            progress(f"{scenario.name}: mode {token}, {len(xs)} points, "
                     f"{scenario.trials} trials")
        reports = metrics.monte_carlo_sweep(
            configs, engine_mode, trials=scenario.trials,
            master_seed=scenario.master_seed, estimation=model,
            geometry=geometry, rician=rician, si_snrs=si_snrs)
        for x, cfg, rep in zip(xs, configs, reports):
            dl_cf, ul_cf = _closed_forms(scenario, token, cfg)
            rows.append(SweepRow(
                scenario=scenario.name, mode=token, x_db=x,
                dl_sim=scale * rep.dl_sum_rate,
                dl_sim_ci=scale * rep.dl_ci95,
                ul_sim=scale * rep.ul_sum_rate,
                ul_sim_ci=scale * rep.ul_ci95,
                dl_cf=dl_cf, ul_cf=ul_cf,
                trials=rep.trials, failures=rep.failures))
    return rows


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.6g}"


def render_csv(rows: Sequence[SweepRow]) -> str:
    """CSV text with LF line endings and 6-significant-digit reals."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.scenario, r.mode, _fmt(r.x_db),
            _fmt(r.dl_sim), _fmt(r.dl_sim_ci),
            _fmt(r.ul_sim), _fmt(r.ul_sim_ci),
            _fmt(r.dl_cf), _fmt(r.ul_cf),
            str(r.trials), str(r.failures)]))
    return "\n".join(lines) + "\n"


def emit_csv(rows: Sequence[SweepRow], destination: str | TextIO) -> None:
    """Write rows to a path or text stream, byte-deterministically."""
    text = render_csv(rows)
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        destination.write(text)
