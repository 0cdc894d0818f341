"""Dataset parsing, validation, descriptive statistics, and bundled fixtures."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from fcip.data import (
    DRIVER_NAMES,
    Dataset,
    ParseError,
    PipeSegment,
    ProjectCase,
    bundled_data_dir,
    describe,
    driver_bounds,
    equivalent_diameter,
    load_training,
    load_validation,
    parse_dataset,
    parse_extended,
    serialize_dataset,
    split,
    table_from_dataset,
)

REPO_DATA = Path(__file__).resolve().parent.parent / "data"


def make_case(**overrides) -> ProjectCase:
    values = dict(id="c1", area_ha=20.0, length_m=500.0, valves=4, year=2014, cost_le=300000.0)
    values.update(overrides)
    return ProjectCase(**values)


class TestProjectCase:
    def test_drivers_tuple(self):
        case = make_case()
        assert case.drivers == (20.0, 500.0, 4.0, 2014.0)

    @pytest.mark.parametrize(
        "field,value",
        [
            ("id", ""),
            ("area_ha", 0.0),
            ("area_ha", -3.0),
            ("length_m", 0.0),
            ("valves", 0),
            ("year", 1980),
            ("year", 2150),
            ("cost_le", 0.0),
        ],
    )
    def test_validation(self, field, value):
        with pytest.raises(ValueError):
            make_case(**{field: value})


class TestDataset:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            Dataset(cases=(make_case(), make_case()))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Dataset(cases=())

    def test_unknown_role_rejected(self):
        with pytest.raises(ValueError):
            Dataset(cases=(make_case(),), role="other")

    def test_matrix_shapes(self, train):
        X = train.driver_matrix()
        assert X.shape == (len(train), 4)
        assert train.costs().shape == (len(train),)
        np.testing.assert_array_equal(X[0], train.cases[0].drivers)


class TestParsing:
    def test_roundtrip(self, train):
        assert parse_dataset(serialize_dataset(train), role="training") == train

    def test_bad_header(self):
        with pytest.raises(ParseError):
            parse_dataset("id,foo\nc1,2\n")

    def test_bad_number(self):
        text = "id,area_ha,length_m,valves,year,cost_le\nc1,x,500,4,2014,1000\n"
        with pytest.raises(ParseError):
            parse_dataset(text)

    def test_extended_drops_gappy_columns(self):
        text = "id,p1,p2,cost_le\nc1,1,,100\nc2,2,3,200\nc3,3,4,300\n"
        table = parse_extended(text)
        assert table.names == ("p1",)
        assert table.X.shape == (3, 1)

    def test_extended_bad_header(self):
        with pytest.raises(ParseError):
            parse_extended("name,p1,cost_le\nc,1,2\n")


class TestBundledData:
    def test_sizes_and_ids(self, train, valid):
        assert len(train) == 111
        assert len(valid) == 33
        assert train.cases[0].id == "M1"
        assert valid.cases[-1].id == "M144"

    def test_roles(self, train, valid):
        assert train.role == "training"
        assert valid.role == "validation"

    def test_packaged_copies_match_repo_data(self):
        packaged = Path(bundled_data_dir())
        for name in ("train.csv", "valid.csv"):
            assert (packaged / name).read_bytes() == (REPO_DATA / name).read_bytes()

    def test_env_override(self, tmp_path, monkeypatch):
        for name in ("train.csv", "valid.csv"):
            (tmp_path / name).write_bytes((REPO_DATA / name).read_bytes())
        monkeypatch.setenv("FCIP_DATA", str(tmp_path))
        assert bundled_data_dir() == str(tmp_path)
        assert len(load_training()) == 111
        assert len(load_validation()) == 33


class TestDerived:
    def test_split(self, train):
        left, right = split(train, 100)
        assert len(left) == 100 and len(right) == 11
        assert left.cases[-1].id == train.cases[99].id

    def test_split_bad_boundary(self, train):
        with pytest.raises(ValueError):
            split(train, 0)
        with pytest.raises(ValueError):
            split(train, len(train))

    def test_describe_matches_numpy(self, train):
        stats = describe(train)
        X = train.driver_matrix()
        for j, name in enumerate(DRIVER_NAMES):
            assert stats[name].mean == pytest.approx(X[:, j].mean())
            assert stats[name].sd == pytest.approx(X[:, j].std(ddof=1))
            assert stats[name].minimum == X[:, j].min()
            assert stats[name].maximum == X[:, j].max()
        assert stats["cost_le"].mean == pytest.approx(train.costs().mean())

    def test_driver_bounds(self, train):
        bounds = driver_bounds(train)
        assert bounds["year"] == (2010.0, 2015.0)
        assert bounds["length_m"] == (119.0, 1832.0)

    def test_equivalent_diameter_weighted(self):
        segments = [PipeSegment(length_m=100.0, diameter_mm=200.0),
                    PipeSegment(length_m=300.0, diameter_mm=400.0)]
        assert equivalent_diameter(segments) == pytest.approx(350.0)

    def test_equivalent_diameter_empty(self):
        with pytest.raises(ValueError):
            equivalent_diameter([])

    def test_table_view(self, train, train_table):
        assert train_table.names == DRIVER_NAMES
        np.testing.assert_array_equal(train_table.X, train.driver_matrix())
        np.testing.assert_array_equal(train_table.y, train.costs())
        np.testing.assert_array_equal(train_table.column("length_m"), train.driver_matrix()[:, 1])
