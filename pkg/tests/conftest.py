import pytest

from app import create_app
from extensions import db
from services.initial_data import gen_random_sobolev, gen_taylor_green
from services.spectral_core import AlphaParam, Grid


@pytest.fixture
def app(tmp_path):
    app = create_app({
        'TESTING': True,
        'SQLALCHEMY_DATABASE_URI': 'sqlite:///:memory:',
        'RUNS_ROOT': str(tmp_path / 'runs'),
    })
    with app.app_context():
        db.create_all()
    yield app
    with app.app_context():
        db.drop_all()


@pytest.fixture
def client(app):
    with app.test_client() as client:
        yield client


@pytest.fixture
def grid2d():
    return Grid(2, 16)


@pytest.fixture
def grid3d():
    return Grid(3, 16)


@pytest.fixture
def params():
    return AlphaParam(alpha=0.3, nu=0.1)


@pytest.fixture
def smooth2d(grid2d):
    return gen_random_sobolev(grid2d, s=3.0, seed=7, amplitude=0.1)


@pytest.fixture
def smooth3d(grid3d):
    return gen_random_sobolev(grid3d, s=3.0, seed=11, amplitude=0.1)


@pytest.fixture
def taylor_green2d(grid2d):
    return gen_taylor_green(grid2d, amplitude=0.1)
