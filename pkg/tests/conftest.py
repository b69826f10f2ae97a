import numpy as np
import pytest

from diracflow import PacketParams


@pytest.fixture(scope="session")
def fig3_packet():
    """The ensemble-experiment parameter set: k0=10, m=3, sigma=1, theta0=pi/2."""
    return PacketParams(sigma=1.0, k0=10.0, theta0=np.pi / 2, omega0=0.0, mass=3.0)
