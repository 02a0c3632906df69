import pytest

from conicvol import CurvatureBand, Divisor, build_extremal


@pytest.fixture(scope="session")
def teardrop():
    return Divisor.from_orders([-0.5])


@pytest.fixture(scope="session")
def minvol_model(teardrop):
    return build_extremal("MinVol", teardrop)


@pytest.fixture(scope="session")
def pinch_model(teardrop):
    # pinching equality: a/b = (1+beta)^2/(1+alpha)^2 = 1/4
    return build_extremal("Vmin", teardrop, CurvatureBand(0.25, 1.0))


@pytest.fixture(scope="session")
def v0b_model(teardrop):
    return build_extremal("V0b", teardrop, CurvatureBand(0.0, 1.0))


@pytest.fixture(scope="session")
def round_sphere():
    return build_extremal("Vmin", Divisor(), CurvatureBand(1.0, 1.0))
