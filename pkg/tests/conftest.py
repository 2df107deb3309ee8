import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _instances import lasso, path5  # noqa: E402


@pytest.fixture
def lasso_unit():
    return lasso(1.0, 1.0)


@pytest.fixture
def five_path():
    return path5()
