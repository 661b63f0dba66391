import functools
import gc

import pytest
from hypothesis import HealthCheck, settings

from hypergibbs.lattice import TilingParams, dual, generate
from hypergibbs.interfaces import corona

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@functools.lru_cache(maxsize=8)
def lattice(p, q, n):
    return generate(TilingParams(p, q), n)


@functools.lru_cache(maxsize=4)
def corona_of(p, q, n):
    return corona(dual(lattice(p, q, n)), n)


def drop_caches():
    corona_of.cache_clear()
    lattice.cache_clear()
    gc.collect()


@pytest.fixture(scope="session")
def lat55():
    return lattice(5, 5, 5)


@pytest.fixture(scope="session")
def lat54():
    return lattice(5, 4, 5)
