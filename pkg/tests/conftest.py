import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "slowok",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("slowok")


@pytest.fixture(scope="session")
def tower312():
    from orthosig.fields import make_tower

    return make_tower(3, 1, 2)


@pytest.fixture(scope="session")
def minus32(tower312):
    from orthosig.forms import build_space

    return build_space("minus", tower312)


@pytest.fixture(scope="session")
def plus32(tower312):
    from orthosig.forms import build_space

    return build_space("plus", tower312)
