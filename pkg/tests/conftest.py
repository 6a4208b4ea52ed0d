import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wfgames.channel import (ChannelTopology, RayleighProfile, normalize,
                             sample_admissible_channel)

settings.register_profile(
    "suite", max_examples=60, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

# one line per acceptance criterion, re-emitted after the run so the
# verdicts survive pytest's output capture
ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rayleigh_profile():
    return RayleighProfile()


def draw_admissible(num_users, num_bins, seed, cross_power=0.5):
    """One diagonally dominant normalized channel, deterministic in seed."""
    topo = ChannelTopology.symmetric(num_users, num_bins,
                                     cross_power=cross_power, noise=0.01)
    ch, _ = sample_admissible_channel(RayleighProfile(), topo, seed)
    return normalize(ch)


def random_noise_rows(rng, n):
    # log-uniform over several decades keeps both flat and spiky profiles
    return np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=n))
