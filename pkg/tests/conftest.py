from __future__ import annotations

import pytest

from helpers import FIXTURES, build_oracle_dataset
from hurricane_nra.ingest import write_buoys_csv, write_storms_csv


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def oracle_dataset():
    return build_oracle_dataset()


@pytest.fixture
def oracle_files(tmp_path, oracle_dataset):
    storms, buoys = oracle_dataset
    storms_path = tmp_path / "storms.csv"
    buoys_path = tmp_path / "buoys.csv"
    with open(storms_path, "w", encoding="utf-8", newline="") as f:
        write_storms_csv(storms, f)
    with open(buoys_path, "w", encoding="utf-8", newline="") as f:
        write_buoys_csv(buoys, f)
    return storms_path, buoys_path
