import numpy as np
import pytest

from circlemaps import (
    build_acip_map,
    build_density,
    build_lebesgue_member,
    make_almost_lipschitz,
    make_holder,
    make_log_nondini,
    make_zero,
)

MODULI = {
    "holder-0.5": lambda: make_holder(0.5, 1.0),
    "holder-0.25": lambda: make_holder(0.25, 1.0),
    "almost-lipschitz": make_almost_lipschitz,
    "log-nondini": make_log_nondini,
    "zero": make_zero,
}

DINI_NAMES = ["holder-0.5", "holder-0.25", "almost-lipschitz"]
BUILTIN_NAMES = ["holder-0.5", "holder-0.25", "almost-lipschitz", "log-nondini"]


@pytest.fixture(scope="session")
def moduli():
    return {name: maker() for name, maker in MODULI.items()}


@pytest.fixture(scope="session")
def profiles(moduli):
    return {name: build_density(om) for name, om in moduli.items()}


@pytest.fixture(scope="session")
def acip_maps(profiles):
    return {name: build_acip_map(prof) for name, prof in profiles.items()}


@pytest.fixture(scope="session")
def member_cache(moduli):
    cache = {}

    def get(name, seed=1):
        key = (name, seed)
        if key not in cache:
            cache[key] = build_lebesgue_member(moduli[name], seed)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
