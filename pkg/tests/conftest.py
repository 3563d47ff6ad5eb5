import pytest

from homotrace import t1_instance, torus_instance, transferred_morphism


@pytest.fixture(scope="session")
def t1():
    return t1_instance()


@pytest.fixture(scope="session")
def t1_morphism(t1):
    return transferred_morphism(t1.bundle, t1.splitting)


@pytest.fixture(scope="session")
def torus1():
    return torus_instance(1)


@pytest.fixture(scope="session")
def torus_morphism(torus1):
    return transferred_morphism(torus1.bundle, torus1.splitting)
