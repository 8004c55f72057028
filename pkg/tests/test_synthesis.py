import numpy as np
import pytest

from popsynth.errors import ConfigError, ValidationError
from popsynth.synthesis import (
    ID_BLOCK,
    AdminUnit,
    Household,
    allocate_admin_units,
    expand_population,
    integerize,
)


class TestIntegerize:
    def test_integral_weights_unchanged(self, rng):
        assert integerize([2.0, 0.0, 5.0], rng).tolist() == [2, 0, 5]

    def test_total_is_rounded_sum(self, rng):
        w = rng.uniform(0, 4, size=200)
        c = integerize(w, rng)
        assert c.sum() == int(np.floor(w.sum() + 0.5))

    def test_each_count_is_floor_or_ceil(self, rng):
        w = rng.uniform(0, 4, size=200)
        c = integerize(w, rng)
        assert np.all((c == np.floor(w)) | (c == np.floor(w) + 1))

    def test_residual_follows_fractions(self):
        # fractions 0.75 and 0.25 with one residual replica to hand out
        hits = np.zeros(2)
        rng = np.random.default_rng(5)
        for _ in range(4000):
            hits += integerize([1.75, 2.25], rng) - [1, 2]
        assert hits.sum() == 4000
        assert hits[0] / 4000 == pytest.approx(0.75, abs=0.03)

    def test_half_rounds_up(self, rng):
        assert integerize([0.25, 0.25], rng).sum() == 1

    def test_rejects_negative(self, rng):
        with pytest.raises(ValidationError):
            integerize([1.0, -0.5], rng)

    def test_deterministic_for_seed(self):
        w = np.linspace(0.1, 3.3, 17)
        a = integerize(w, np.random.default_rng(9))
        b = integerize(w, np.random.default_rng(9))
        assert a.tolist() == b.tolist()


class TestExpand:
    def test_clone_counts_and_ids(self, tiny_sample):
        pop = expand_population(tiny_sample, [2, 0, 1, 0, 0, 1], region_code=5)
        assert len(pop.households) == 4
        assert [p.age for p in pop.persons] == [56, 10, 56, 10, 37, 74]
        assert pop.households[0].hhid == 5 * ID_BLOCK + 1
        assert [p.agent_id % ID_BLOCK for p in pop.persons] == [1, 2, 3, 4, 5, 6]
        assert [hh.psuid for hh in pop.households] == [1, 1, 3, 6]

    def test_members_share_household(self, tiny_sample):
        pop = expand_population(tiny_sample, [1] * 6)
        for hh in pop.households:
            for aid in hh.members:
                person = next(p for p in pop.persons if p.agent_id == aid)
                assert person.hhid == hh.hhid
        assert len({p.agent_id for p in pop.persons}) == 10

    def test_attributes_copied(self, tiny_sample):
        pop = expand_population(tiny_sample, [1] * 6)
        src = tiny_sample.persons
        for s, p in zip(src, pop.persons):
            assert (p.age, p.sex, p.height, p.weight, p.religion, p.caste, p.seed_job_label) == \
                (s.age, s.sex, s.height, s.weight, s.religion, s.caste, s.job_label)
            assert p.job_label is None

    def test_count_length_mismatch(self, tiny_sample):
        with pytest.raises(ValidationError):
            expand_population(tiny_sample, [1, 1])


class TestAdminUnits:
    UNITS = [AdminUnit("A", 18.9, 72.8, 3.0), AdminUnit("B", 19.0, 72.9, 1.0)]

    def test_proportional(self, rng):
        houses = [Household(hhid=i, psuid=1) for i in range(20000)]
        idx = allocate_admin_units(houses, self.UNITS, rng)
        assert np.mean(idx == 0) == pytest.approx(0.75, abs=0.01)
        assert houses[0].admin_unit in ("A", "B")
        k = int(idx[0])
        assert (houses[0].admin_lat, houses[0].admin_lon) == (self.UNITS[k].lat, self.UNITS[k].lon)

    def test_empty_units(self, rng):
        with pytest.raises(ConfigError):
            allocate_admin_units([Household(1, 1)], [], rng)
