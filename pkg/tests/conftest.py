import warnings

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_nu_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="non-integer or negative nu")
        yield
