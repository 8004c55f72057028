import math

import numpy as np
import pytest

from popsynth.assignment import (
    CONDITIONS,
    DEFAULT_ADHERENCE,
    ID_PREFIX,
    DiscreteDistribution,
    Facility,
    JobRow,
    JobTable,
    PrevalenceRow,
    PrevalenceTable,
    assign_comorbidities,
    assign_flags,
    assign_homebound,
    assign_job_labels,
    assign_public_places,
    assign_school,
    assign_workplace,
    assign_schools,
    assign_workplaces,
    choose_inverse_distance,
    load_job_table,
    load_prevalence,
    place_facilities,
)
from popsynth.errors import ConfigError, ValidationError
from popsynth.geo import GeoPoint
from popsynth.ingest import DensityGrid, GeoBoundary
from popsynth.synthesis import Household, Person, Population

from conftest import MUMBAI

RATES = {"Male": 0.0, "Female": 1.0}
JOBS = JobTable.simple([("Clerical", 30, 1.0, 0, 1), ("Drivers", 98, 1.0, 1, 0)])


def person(age, sex="Male", seed_label="Clerical", aid=1, hhid=1):
    return Person(agent_id=aid, hhid=hhid, psuid=1, age=age, sex=sex, height=160.0,
                  weight=60.0, religion="Hindu", caste="other", seed_job_label=seed_label)


def one_house_pop(*persons, lat=0.0, lon=0.0):
    house = Household(hhid=1, psuid=1, members=[p.agent_id for p in persons],
                      admin_unit="A", home_lat=lat, home_lon=lon)
    return Population([house], list(persons))


class TestHomebound:
    @pytest.mark.parametrize("age,hb", [(0, True), (2, True), (3, False), (17, False),
                                        (60, False), (61, True), (95, True)])
    def test_age_rules_for_male_rate_zero(self, rng, age, hb):
        p = person(age)
        assign_homebound([p], RATES, rng)
        assert p.homebound is hb

    def test_forced_labels(self, rng):
        ps = [person(30, seed_label="Homemaker"), person(30, seed_label="unemployed"),
              person(30, seed_label="Clerical")]
        assign_homebound(ps, RATES, rng)
        assert [p.homebound for p in ps] == [True, True, False]

    def test_rate_applies_to_working_age(self, rng):
        ps = [person(30, "Female") for _ in range(10)]
        assign_homebound(ps, RATES, rng)
        assert all(p.homebound for p in ps)
        assert all(p.job_id == 0 and p.workplace_id == 0 and math.isnan(p.w_lat) for p in ps)

    def test_bernoulli_frequency(self):
        ps = [person(30) for _ in range(20000)]
        assign_homebound(ps, {"Male": 0.3}, np.random.default_rng(2))
        assert np.mean([p.homebound for p in ps]) == pytest.approx(0.3, abs=0.01)

    def test_missing_rate(self, rng):
        with pytest.raises(ConfigError, match="Other"):
            assign_homebound([person(30, "Other")], RATES, rng)


class TestJobs:
    def test_students_and_jobs(self, rng):
        ps = [person(10), person(30), person(70)]
        assign_homebound(ps, RATES, rng)
        assign_job_labels(ps, JOBS, rng)
        assert [p.job_label for p in ps][0] == "Student"
        assert ps[0].job_id == 199
        assert ps[1].job_label in ("Clerical", "Drivers")
        assert ps[2].job_label == "Homebound" and ps[2].job_id == 0

    def test_conditional_weights(self, rng):
        table = JobTable([JobRow("Teachers", 15, "Female", "*", 1.0, 1, 1),
                          JobRow("Drivers", 98, "Male", "*", 1.0, 1, 0)])
        ps = [person(30, "Female", aid=1), person(30, "Male", aid=2)]
        assign_job_labels(ps, table, rng)
        assert [p.job_label for p in ps] == ["Teachers", "Drivers"]

    def test_no_weights_for_group(self, rng):
        table = JobTable([JobRow("Teachers", 15, "Female", "18-59", 1.0, 1, 1)])
        with pytest.raises(ConfigError, match="age=65"):
            assign_job_labels([person(65, "Female")], table, rng)

    def test_table_invariants(self):
        with pytest.raises(ValidationError, match="reserved"):
            JobTable.simple([("Student", 5, 1.0, 0, 0)])
        with pytest.raises(ValidationError, match="reserved"):
            JobTable.simple([("Clerks", 199, 1.0, 0, 0)])
        with pytest.raises(ValidationError, match="inconsistent flags"):
            JobTable([JobRow("A", 1, "Male", "*", 1, 0, 0), JobRow("A", 1, "Female", "*", 1, 1, 0)])
        with pytest.raises(ValidationError, match="more than one"):
            JobTable([JobRow("A", 1, "Male", "*", 1, 0, 0), JobRow("A", 2, "Female", "*", 1, 0, 0)])
        assert JOBS.flags("Student") == (0, 0)
        with pytest.raises(ValidationError):
            JOBS.flags("Astronaut")

    def test_fixture_tables_load(self):
        jobs = load_job_table(MUMBAI / "jobs.csv")
        assert jobs.job_id("Construction") == 95
        assert jobs.flags("Student") == (0, 1)
        prev = load_prevalence(MUMBAI / "prevalence.csv")
        assert prev.probability("Diabetes", "Male", 70) == 0.12
        assert prev.probability("Diabetes", "Male", 30) == 0.03


class TestInverseDistance:
    def test_two_schools(self):
        rng = np.random.default_rng(11)
        n = 40000
        k = choose_inverse_distance(np.zeros(n), np.zeros(n), [0.0, 0.0], [1.0, 3.0], rng)
        assert np.mean(k == 0) == pytest.approx(0.75, abs=0.01)

    def test_coincident_facility_dominates(self):
        rng = np.random.default_rng(0)
        k = choose_inverse_distance(np.zeros(1000), np.zeros(1000), [0.0, 0.0], [0.0, 1.0], rng)
        # weights 1e6 and 1
        assert np.mean(k == 0) > 0.99

    def test_single_person_form(self, rng):
        schools = [Facility(ID_PREFIX["school"] + 1, "school", 0.0, 1.0)]
        p = person(10)
        assign_school(p, GeoPoint(0.0, 0.0), schools, rng)
        assert p.school_id == ID_PREFIX["school"] + 1
        assert (p.school_lat, p.school_lon) == (0.0, 1.0)


class TestFacilities:
    GRID = DensityGrid.from_cells([(0.5, 0.5, 1.0, 1.0)])
    BOX = GeoBoundary(((0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)))

    def test_ids_and_units(self, rng):
        fs = place_facilities("school", {"A": 2, "B": 1}, self.GRID, self.BOX, rng)
        assert [f.facility_id - ID_PREFIX["school"] for f in fs] == [1, 2, 3]
        assert [f.admin_unit for f in fs] == ["A", "A", "B"]

    def test_unknown_kind(self, rng):
        with pytest.raises(ConfigError):
            place_facilities("hospital", {"A": 1}, self.GRID, self.BOX, rng)

    def test_school_and_workplace_assignment(self, rng):
        ps = [person(10, aid=1), person(30, aid=2), person(70, aid=3)]
        pop = one_house_pop(*ps)
        assign_homebound(pop.persons, RATES, rng)
        assign_job_labels(pop.persons, JobTable.simple([("Clerical", 30, 1.0, 0, 1)]), rng)
        school = Facility(ID_PREFIX["school"] + 1, "school", 0.1, 0.1)
        office = Facility(ID_PREFIX["workplace"] + 1, "workplace", 0.2, 0.2,
                          allowed_job_labels=frozenset({"Clerical"}))
        assign_schools(pop, [school], rng)
        assign_workplaces(pop, [office], rng)
        kid, adult, elder = pop.persons
        assert kid.school_id == school.facility_id and kid.workplace_id == 0
        assert adult.workplace_id == office.facility_id and adult.school_id == 0
        assert elder.workplace_id == 0 and math.isnan(elder.w_lat) and math.isnan(elder.school_lat)

    def test_workplace_must_allow_label(self, rng):
        pop = one_house_pop(person(30))
        pop.persons[0].job_label = "Drivers"
        office = Facility(ID_PREFIX["workplace"] + 1, "workplace", 0.2, 0.2,
                          allowed_job_labels=frozenset({"Clerical"}))
        with pytest.raises(ConfigError, match="Drivers"):
            assign_workplaces(pop, [office], rng)

    def test_public_place_for_everyone(self, rng):
        pop = one_house_pop(person(1, aid=1), person(30, aid=2))
        place = Facility(ID_PREFIX["public_place"] + 4, "public_place", 0.3, 0.3)
        assign_public_places(pop, [place], rng)
        assert all(p.public_place_id == place.facility_id for p in pop.persons)

    def test_students_without_schools(self, rng):
        pop = one_house_pop(person(10))
        pop.persons[0].job_label = "Student"
        with pytest.raises(ConfigError):
            assign_schools(pop, [], rng)


class TestFlagsAndHealth:
    def test_flags_from_table(self, rng):
        ps = [person(30, aid=1), person(30, aid=2)]
        ps[0].job_label, ps[1].job_label = "Drivers", "Homebound"
        assign_flags(ps, JOBS, DiscreteDistribution.point_mass(0.5), rng)
        assert (ps[0].essential_worker, ps[0].public_transport) == (1, 0)
        assert (ps[1].essential_worker, ps[1].public_transport) == (0, 0)
        assert ps[0].adherence == 0.5

    def test_default_adherence_support(self, rng):
        vals = DEFAULT_ADHERENCE.sample(rng, 5000)
        assert set(vals) == {round(k / 10, 1) for k in range(11)}

    def test_distribution_validation(self):
        with pytest.raises(ConfigError):
            DiscreteDistribution((0.0, 1.0), (0.5, 0.6))

    def test_comorbidity_rates(self):
        prev = PrevalenceTable([PrevalenceRow("Diabetes", "*", "60+", 0.5),
                                PrevalenceRow("Diabetes", "*", "*", 0.0)])
        ps = [person(70, aid=i) for i in range(4000)] + [person(20, aid=i) for i in range(1000)]
        assign_comorbidities(ps, prev, np.random.default_rng(4))
        old = np.mean([p.comorbidities["Diabetes"] for p in ps[:4000]])
        young = [p.comorbidities["Diabetes"] for p in ps[4000:]]
        assert old == pytest.approx(0.5, abs=0.03)
        assert sum(young) == 0
        assert set(ps[0].comorbidities) == set(CONDITIONS)
        assert all(p.comorbidities["Fever"] == 0 for p in ps)


class TestMonteCarlo:
    N = 100_000

    def test_job_weights_one_to_three(self):
        table = JobTable.simple([("A", 1, 1.0, 0, 0), ("B", 2, 3.0, 0, 0)])
        ps = [person(30, aid=i) for i in range(self.N)]
        assign_job_labels(ps, table, np.random.default_rng(21))
        assert np.mean([p.job_label == "A" for p in ps]) == pytest.approx(0.25, abs=0.01)

    def test_single_job_for_everyone(self, rng):
        ps = [person(age, aid=i) for i, age in enumerate(range(18, 60))]
        assign_job_labels(ps, JobTable.simple([("Only", 5, 2.0, 0, 0)]), rng)
        assert {p.job_label for p in ps} == {"Only"}

    def test_female_rate_point_three(self):
        ps = [person(30, "Female", aid=i) for i in range(self.N)]
        assign_homebound(ps, {"Female": 0.3}, np.random.default_rng(22))
        assert np.mean([p.homebound for p in ps]) == pytest.approx(0.3, abs=0.01)

    def test_equidistant_workplaces(self):
        k = choose_inverse_distance(np.zeros(self.N), np.zeros(self.N), [2.0, -2.0], [0.0, 0.0],
                                    np.random.default_rng(23))
        assert np.mean(k == 0) == pytest.approx(0.5, abs=0.01)

    def test_comorbidity_rate(self):
        ps = [person(30, aid=i) for i in range(self.N)]
        prev = PrevalenceTable([PrevalenceRow("Asthma", "*", "*", 0.05),
                                PrevalenceRow("Epilepsy", "*", "*", 1.0)])
        assign_comorbidities(ps, prev, np.random.default_rng(24))
        assert np.mean([p.comorbidities["Asthma"] for p in ps]) == pytest.approx(0.05, abs=0.005)
        assert all(p.comorbidities["Epilepsy"] == 1 for p in ps)


class TestSingleForms:
    OFFICE = Facility(ID_PREFIX["workplace"] + 1, "workplace", 0.2, 0.2,
                      allowed_job_labels=frozenset({"Clerical"}))

    def test_one_workplace_always_chosen(self, rng):
        p = person(30)
        p.job_label = "Clerical"
        for _ in range(20):
            assert assign_workplace(p, GeoPoint(0.0, 0.0), [self.OFFICE], rng) is self.OFFICE
        assert (p.workplace_id, p.w_lat) == (self.OFFICE.facility_id, 0.2)

    def test_homebound_gets_no_workplace(self, rng):
        p = person(70)
        p.job_label = "Homebound"
        assert assign_workplace(p, GeoPoint(0.0, 0.0), [self.OFFICE], rng) is None
        assert p.workplace_id == 0 and math.isnan(p.w_lat)

    def test_zero_count_gives_no_facilities(self, rng):
        grid = DensityGrid.from_cells([(0.5, 0.5, 1.0, 1.0)])
        box = GeoBoundary(((0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)))
        assert place_facilities("school", {"A": 0}, grid, box, rng) == []

    def test_id_magnitudes(self):
        assert f"{ID_PREFIX['school'] + 1:.3e}" == "2.001e+12"
        assert f"{ID_PREFIX['public_place'] + 1:.3e}" == "3.001e+12"
