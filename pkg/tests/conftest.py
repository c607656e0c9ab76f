import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def gaussian():
    from boussinesq_rh.scattering import gaussian_fixture

    return gaussian_fixture()


@pytest.fixture(scope="session")
def bump_spec():
    from boussinesq_rh.scattering import bump_profile, synthetic_spectral

    return synthetic_spectral(bump_profile())
