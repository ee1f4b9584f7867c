import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vsarm.config import default_config
from vsarm.control import TrackingSetup, track
from vsarm.params import default_params


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture(scope="session")
def tracking_log(config):
    """The reference 6 s tracking run (shared: it is the most expensive
    single simulation in the suite)."""
    return track(config.arm, config.tracking_target, config.tracking,
                 start_theta=np.radians(config.task.home_pose_deg))
