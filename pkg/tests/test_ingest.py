import json

import numpy as np
import pytest

from popsynth.errors import InputFileError, ParseError, ValidationError
from popsynth.ingest import (
    MarginalSet,
    load_boundary,
    load_density_grid,
    load_marginals,
    load_seed_sample,
)

from conftest import DATA, MUMBAI

MARGINALS = "attribute,category,target\nage_band,0-17,30\nage_band,18+,70\nsex,M,50\nsex,F,50\n"


def square(x0=0.0, y0=0.0, side=1.0):
    return [[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]]


def polygon_doc(*rings):
    return json.dumps({"type": "Polygon", "coordinates": [list(r) for r in rings]})


class TestMarginals:
    def test_two_dimensions(self, write):
        m = load_marginals(write("m.csv", MARGINALS))
        assert m.names == ["age_band", "sex"]
        assert m.categories("sex") == ("M", "F")
        assert [sum(t) for t in m.targets] == [100, 100]

    def test_inconsistent_totals_names_both_dimensions(self, write):
        bad = MARGINALS.replace("sex,F,50", "sex,F,60")
        with pytest.raises(ValidationError, match="age_band.*100.*sex.*110"):
            load_marginals(write("m.csv", bad))

    def test_empty_file(self, write):
        with pytest.raises(ValidationError, match="no dimensions"):
            load_marginals(write("m.csv", ""))

    def test_header_only(self, write):
        with pytest.raises(ValidationError, match="no dimensions"):
            load_marginals(write("m.csv", "attribute,category,target\n"))

    def test_malformed_row_reports_line(self, write):
        bad = MARGINALS.replace("sex,M,50", "sex,M,fifty")
        with pytest.raises(ParseError) as exc:
            load_marginals(write("m.csv", bad))
        assert exc.value.line == 4

    def test_short_row(self, write):
        with pytest.raises(ParseError, match=":3:"):
            load_marginals(write("m.csv", "attribute,category,target\nsex,M,5\nsex,F\n"))

    def test_negative_target(self, write):
        with pytest.raises(ParseError, match="negative"):
            load_marginals(write("m.csv", "attribute,category,target\nsex,M,-5\n"))

    def test_tolerance_absorbs_rounding(self, write):
        text = "attribute,category,target\na,x,50.00001\na,y,50\nb,z,100\n"
        m = load_marginals(write("m.csv", text))
        assert m.shape == (2, 1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileError, match="nope.csv"):
            load_marginals(tmp_path / "nope.csv")

    def test_type_invariants(self):
        with pytest.raises(ValidationError):
            MarginalSet((("a", ()),), ((),))
        with pytest.raises(ValidationError):
            MarginalSet((("a", ("x",)),), ((1.0, 2.0),))


class TestSeedSample:
    HEADER = "hh_id,age,sex,height,weight,religion,caste,job_label\n"

    def test_grouping(self, write):
        text = self.HEADER + "7,30,Male,170,70,Hindu,other,Clerical\n7,28,Female,155,52,Hindu,other,Homemaker\n"
        s = load_seed_sample(write("s.csv", text))
        assert len(s.households) == 1
        assert [p.age for p in s.households[0].members] == [30, 28]

    def test_non_contiguous_rows_keep_file_order(self, write):
        text = self.HEADER + ("1,30,Male,170,70,H,o,J\n2,40,Male,170,70,H,o,J\n"
                              "1,5,Female,100,20,H,o,Student\n")
        s = load_seed_sample(write("s.csv", text))
        assert [hh.hh_id for hh in s.households] == ["1", "2"]
        assert [p.age for p in s.households[0].members] == [30, 5]

    @pytest.mark.parametrize("row,line", [
        ("1,150,Male,170,70,H,o,J", 2),
        ("1,30,Male,0,70,H,o,J", 2),
        ("1,30,Male,280,70,H,o,J", 2),
        ("1,30,Male,170,501,H,o,J", 2),
        ("1,30.5,Male,170,70,H,o,J", 2),
    ])
    def test_out_of_range(self, write, row, line):
        with pytest.raises(ParseError) as exc:
            load_seed_sample(write("s.csv", self.HEADER + row + "\n"))
        assert exc.value.line == line

    def test_orphan_columns_ignored_with_warning(self, write, caplog):
        text = "hh_id,age,sex,height,weight,religion,caste,job_label,extra\n1,30,Male,170,70,H,o,J,x\n"
        s = load_seed_sample(write("s.csv", text))
        assert len(s.persons) == 1
        assert "extra" in caplog.text

    def test_ten_person_sample(self):
        s = load_seed_sample(DATA / "tiny_seed.csv")
        assert [p.age for p in s.persons] == [56, 10, 3, 63, 37, 46, 35, 7, 29, 74]

    def test_missing_column(self, write):
        with pytest.raises(ParseError, match="weight"):
            load_seed_sample(write("s.csv", "hh_id,age,sex,height\n1,2,M,50\n"))


class TestBoundary:
    def test_unit_square(self, write):
        b = load_boundary(write("b.geojson", polygon_doc(square())))
        assert len(b.outer) == 4
        assert b.holes == ()
        # GeoJSON [lon, lat] becomes (lat, lon)
        assert b.outer[1] == (0.0, 1.0)

    def test_explicit_closure_dropped(self, write):
        ring = square() + [square()[0]]
        b = load_boundary(write("b.geojson", polygon_doc(ring)))
        assert len(b.outer) == 4

    def test_repeated_vertex_collapsed(self, write):
        ring = [[0, 0], [0, 0], [1, 0], [0, 1]]
        b = load_boundary(write("b.geojson", polygon_doc(ring)))
        assert len(b.outer) == 3

    def test_too_few_after_collapse(self, write):
        ring = [[0, 0], [0, 0], [1, 0], [1, 0]]
        with pytest.raises(ValidationError, match="fewer than 3"):
            load_boundary(write("b.geojson", polygon_doc(ring)))

    def test_hole(self, write):
        b = load_boundary(write("b.geojson", polygon_doc(square(0, 0, 3), square(1, 1, 1))))
        assert len(b.holes) == 1

    def test_multipolygon_rejected(self, write):
        doc = json.dumps({"type": "MultiPolygon", "coordinates": [[square()]]})
        with pytest.raises(ValidationError, match="unsupported geometry"):
            load_boundary(write("b.geojson", doc))

    def test_feature_wrappers(self, write):
        geom = json.loads(polygon_doc(square()))
        fc = {"type": "FeatureCollection", "features": [{"type": "Feature", "geometry": geom}]}
        assert len(load_boundary(write("b.geojson", json.dumps(fc))).outer) == 4

    def test_fixture(self):
        b = load_boundary(MUMBAI / "boundary.geojson")
        assert len(b.holes) == 1


class TestDensityGrid:
    HEADER = "lat,lon,cell_size,density\n"

    def test_uniform(self, write):
        rows = "".join(f"{i},{j},1,1\n" for i in range(2) for j in range(2))
        g = load_density_grid(write("g.csv", self.HEADER + rows))
        assert len(g) == 4
        assert np.all(g.density == 1)

    def test_zero_density_kept(self, write):
        g = load_density_grid(write("g.csv", self.HEADER + "0.5,0.5,1,0\n"))
        assert len(g) == 1 and g.density[0] == 0

    def test_negative_density(self, write):
        with pytest.raises(ParseError, match="negative density"):
            load_density_grid(write("g.csv", self.HEADER + "0.5,0.5,1,-3\n"))


@pytest.mark.parametrize("loader,name", [
    (load_marginals, "person_marginals.csv"),
    (load_seed_sample, "seed_sample.csv"),
    (load_boundary, "boundary.geojson"),
    (load_density_grid, "density_grid.csv"),
])
def test_loading_twice_is_identical(loader, name):
    assert loader(MUMBAI / name) == loader(MUMBAI / name)
