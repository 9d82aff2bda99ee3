import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from sospack.model import Profile

settings.register_profile("default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brute_profile_after(profile: Profile, h: int, s: int) -> Profile:
    """The profile after placing s at h, built by hand from the definition."""
    B = profile.B
    c = [int(x) for x in profile.counts]
    if h > 0:
        c[h] -= 1
    if h + s < B:
        c[h + s] += 1
    c[0] = c[B] = 0
    return Profile(B, c)


def sq(profile: Profile) -> int:
    return sum(int(x) ** 2 for x in profile.counts[1 : profile.B])


def legal(profile: Profile, s: int) -> list[int]:
    return [0] + [h for h in range(1, profile.B - s + 1) if profile.counts[h] > 0]


@st.composite
def profiles(draw, max_B=12, max_count=3, min_B=2):
    B = draw(st.integers(min_B, max_B))
    counts = [0] + [draw(st.integers(0, max_count)) for _ in range(B - 1)] + [0]
    return Profile(B, counts)


@st.composite
def profile_and_size(draw, max_B=12, max_count=3):
    p = draw(profiles(max_B=max_B, max_count=max_count))
    s = draw(st.integers(1, p.B))
    return p, s


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
