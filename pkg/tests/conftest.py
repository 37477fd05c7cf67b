import sys
from dataclasses import replace
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fdrelay.config import config_from_key_values


@pytest.fixture
def cfg33():
    """(3,3) scenario with visible loopback interference and mid-range outage."""
    cfg = config_from_key_values({"p_s_dbm": 10, "d1": 25.0, "d2": 12.0})
    return replace(cfg, sigma2_rr=0.1)


@pytest.fixture
def cfg_strong():
    """(3,3) high-SNR scenario, second hop energy-rich (small d2)."""
    cfg = config_from_key_values({"p_s_dbm": 20, "d1": 10.0, "d2": 2.0})
    return replace(cfg, sigma2_rr=0.3)
