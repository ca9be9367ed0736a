import math
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from atsmem.cloud import CloudState, TrapConfig, isotropic_trap_for_tf_radius
from atsmem.phys import rb87

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=1000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def rb():
    return rb87()


@pytest.fixture(scope="session")
def nearly_pure_bec(rb):
    """N = 1e5 at 280 nK, 80% condensed, 2 R_TF = 10 um in an isotropic trap."""
    trap = isotropic_trap_for_tf_radius(8e4, 5e-6, rb)
    return CloudState(1e5, 280e-9, 0.8, trap, rb)


@pytest.fixture(scope="session")
def thermal_cloud(rb):
    trap = TrapConfig.isotropic(2 * math.pi * 120.0)
    return CloudState(2e5, 1.2e-6, 0.0, trap, rb)


@pytest.fixture(scope="session")
def anisotropic_mixed(rb):
    trap = TrapConfig(2 * math.pi * 90.0, 2 * math.pi * 140.0, 2 * math.pi * 60.0)
    return CloudState(3e5, 350e-9, 0.4, trap, rb)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
