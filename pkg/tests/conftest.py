"""Shared fixtures: bundled datasets and a temporary model directory."""

from __future__ import annotations

from pathlib import Path

import pytest

from fcip import cli
from fcip.data import Dataset, load_training, load_validation, table_from_dataset

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def train() -> Dataset:
    return load_training()


@pytest.fixture(scope="session")
def valid() -> Dataset:
    return load_validation()


@pytest.fixture(scope="session")
def train_table(train):
    return table_from_dataset(train)


@pytest.fixture(scope="session")
def fitted_models(tmp_path_factory) -> Path:
    """Fit all four model kinds once and share the JSON artifacts."""
    root = tmp_path_factory.mktemp("fitted")
    for kind in ("regression", "mlp", "cbr", "fuzzy"):
        out = root / f"{kind}_model.json"
        code = cli.main(
            [
                "fit",
                kind,
                "--data",
                str(DATA_DIR / "train.csv"),
                "--valid",
                str(DATA_DIR / "valid.csv"),
                "--out",
                str(out),
            ]
        )
        assert code == 0, f"fit {kind} failed"
    return root
