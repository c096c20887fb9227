import pytest

from fracwave.filters import validate_filter

CORPUS = [(1, -1), (1, -2, 1), (1, -3, 3, -1)]


@pytest.fixture(params=CORPUS, ids=lambda c: ",".join(map(str, c)))
def corpus_filter(request):
    return validate_filter(request.param)


@pytest.fixture
def inc():
    return validate_filter((1, -1))


@pytest.fixture
def d2():
    return validate_filter((1, -2, 1))
