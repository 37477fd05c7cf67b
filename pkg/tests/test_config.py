import math

import pytest

from fdrelay.config import (CONFIG_KEYS, DEFAULTS, SystemConfig,
                            config_from_key_values, dbm_to_watts,
                            default_config, parse_config_file, watts_to_dbm)


def test_dbm_round_trip():
    for x in (-70.0, -50.0, 0.0, 10.0, 26.0):
        assert watts_to_dbm(dbm_to_watts(x)) == pytest.approx(x, abs=1e-12)
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-70.0) == pytest.approx(1e-10)


def test_defaults():
    cfg = default_config()
    assert cfg.p_s == pytest.approx(0.1)
    assert cfg.sigma2_r == pytest.approx(1e-10)
    assert cfg.sigma2_rr == pytest.approx(1e-8)
    assert cfg.m_r == cfg.m_t == 3
    assert cfg.gamma_th == pytest.approx(3.0)
    assert cfg.rho1 == pytest.approx(1e9)
    assert cfg.dl1 == pytest.approx(8000.0)


@pytest.mark.parametrize("field,value", [
    ("p_s", -1.0), ("p_s", 0.0), ("sigma2_r", 0.0), ("sigma2_d", -2.0),
    ("sigma2_rr", -1e-9), ("d1", 0.0), ("d2", -5.0), ("tau", 1.5),
    ("eta", 0.0), ("eta", 1.2), ("m_r", 0), ("m_t", 0), ("r_c", -1.0),
    ("p_s", math.inf), ("d1", math.nan),
])
def test_validation(field, value):
    kwargs = dict(p_s=0.1, sigma2_r=1e-10, sigma2_d=1e-10, sigma2_rr=1e-8,
                  d1=20.0, d2=10.0, tau=3.0, eta=0.5, m_r=3, m_t=3, r_c=2.0)
    kwargs[field] = value
    with pytest.raises(ValueError):
        SystemConfig(**kwargs)


def test_config_file(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(
        "# small-cell scenario\n"
        "p_s_dbm = 26\n"
        "li_dbm = -40\n"
        "d1 = 15\n"
        "m_t = 2\n",
        encoding="utf-8")
    values = parse_config_file(str(path))
    cfg = config_from_key_values(values)
    assert cfg.p_s == pytest.approx(dbm_to_watts(26.0))
    assert cfg.sigma2_rr == pytest.approx(1e-7)
    assert cfg.d1 == 15.0
    assert cfg.m_t == 2
    assert cfg.m_r == DEFAULTS["m_r"]


def test_config_file_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("p_x_dbm = 3\n", encoding="utf-8")
    with pytest.raises(ValueError, match="unknown key"):
        parse_config_file(str(path))
    with pytest.raises(ValueError, match="unknown config key"):
        config_from_key_values({"nope": 1.0})


def test_all_keys_accepted():
    values = {k: DEFAULTS[k] for k in CONFIG_KEYS}
    cfg = config_from_key_values(values)
    assert cfg == default_config()
