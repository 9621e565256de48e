"""JSON configuration loading, overrides, and validation errors."""

from __future__ import annotations

import json

import pytest

from breather.config import config_from_dict, load_config
from breather.errors import ConfigError
from breather.susceptibility import TruncatedLorentz

from conftest import OMEGA0_REF, T_REF


def base_dict():
    return {
        "model": "lorentz", "c_L": 20.0, "gamma": 0.5, "omega_star": 2.0,
        "j": 1001, "alpha": 2.0, "k": 3.0,
        "c2": 2000.0, "c3": 1000.0, "gamma_tilde": 1.0,
        "omega_star_tilde": 3.0, "T_N": 0.12,
        "nonlinear_sides": ["minus", "plus"],
        "grid": {"d": 40.0, "N": 2000}, "eps": 0.5, "nu_max": 10,
    }


class TestBundledExample:
    def test_loads_and_refines(self):
        cfg = load_config()
        assert isinstance(cfg.interface.minus, TruncatedLorentz)
        assert cfg.T == pytest.approx(T_REF)
        ctx = cfg.context()
        assert abs(ctx.omega0 - OMEGA0_REF) < 1e-10

    def test_overrides(self):
        cfg = load_config(eps=0.25, nu_max=3, grid_n=400, solver="analytic")
        assert cfg.eps == 0.25 and cfg.nu_max == 3
        assert cfg.grid_n == 400 and cfg.solver == "analytic"


class TestValidation:
    def test_odd_grid_means_node_count(self):
        cfg = config_from_dict({**base_dict(), "grid": {"d": 40.0, "N": 2001}})
        assert cfg.grid_n == 2000

    def test_missing_field(self):
        d = base_dict()
        del d["k"]
        with pytest.raises(ConfigError, match="'k'"):
            config_from_dict(d)

    def test_even_window_index_rejected(self):
        with pytest.raises(ConfigError, match="odd"):
            config_from_dict({**base_dict(), "j": 1000})

    def test_t_and_j_exclusive(self):
        with pytest.raises(ConfigError, match="not both"):
            config_from_dict({**base_dict(), "T": 100.0})

    def test_overdamped_rejected(self):
        with pytest.raises(ConfigError, match="omega_star > gamma"):
            config_from_dict({**base_dict(), "gamma": 2.5})

    def test_nonlinear_window_vs_memory(self):
        with pytest.raises(ConfigError, match="T_N"):
            config_from_dict({**base_dict(), "T_N": 500.0})

    def test_bad_solver(self):
        with pytest.raises(ConfigError, match="solver"):
            config_from_dict({**base_dict(), "solver": "spectral"})

    def test_bad_omega0(self):
        with pytest.raises(ConfigError, match="omega0"):
            config_from_dict({**base_dict(), "omega0": 1.8})

    def test_bad_sides(self):
        with pytest.raises(ConfigError, match="nonlinear_sides"):
            config_from_dict({**base_dict(), "nonlinear_sides": ["left"]})

    def test_invalid_json_reports_location(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{\n  'single': 1\n}")
        with pytest.raises(ConfigError, match="line 2"):
            load_config(str(p))

    def test_linear_config(self):
        d = base_dict()
        d["nonlinear_sides"] = []
        cfg = config_from_dict(d)
        assert cfg.interface.nl_minus is None
        assert cfg.interface.nl_plus is None

    def test_explicit_omega0_pair(self):
        d = {**base_dict(), "omega0": [1.8178532310080142,
                                       -0.14883348930017135]}
        cfg = config_from_dict(d)
        assert cfg.omega0 == OMEGA0_REF
