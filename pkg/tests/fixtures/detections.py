import pytest
from conftest import FEATURE_DIM, make_detection, unit_vector

DET_TEXT = (
    "2,-1,30.0,40.0,10.0,20.0,0.3\n"
    "1,-1,100,50,20,40,0.9\n"
    "\n"
    "1,7,0,0,5,5,0.05\n"
)
FEATURE_TEXT = (
    "0 1 0\n"
    "1 0 0\n"
    "\n"
    "0 0 2\n"
)


@pytest.fixture
def det_text():
    return DET_TEXT


@pytest.fixture
def feature_text():
    return FEATURE_TEXT


@pytest.fixture
def orthogonal_features():
    return [unit_vector(i) for i in range(FEATURE_DIM)]


@pytest.fixture
def random_detection(rng):
    def factory(frame: int = 1):
        x, y = rng.uniform(0, 500, 2)
        w, h = rng.uniform(5, 100, 2)
        feature = rng.standard_normal(FEATURE_DIM)
        return make_detection(frame, (x, y, w, h), feature)
    return factory


@pytest.fixture
def detection_at(orthogonal_features):
    def factory(frame, box, identity=0):
        return make_detection(frame, box, orthogonal_features[identity])
    return factory
