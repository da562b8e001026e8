import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from memeaffect.fixtures import generate_fixtures, table1_dataset  # noqa: E402


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    generate_fixtures(out, n_samples=40, seed=0)
    return out


@pytest.fixture(scope="session")
def table1():
    return table1_dataset(seed=0)
