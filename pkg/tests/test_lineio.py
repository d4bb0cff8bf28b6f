import numpy as np
import pytest

from p2ptest import (
    LineListError,
    Outbreak,
    Population,
    StudyConfig,
    TransmissionParams,
    parse_line_list,
    simulate_epidemic,
    write_line_list,
)


@pytest.fixture
def cfg(g13, f35):
    return StudyConfig(s_days=30, latent=g13, infectious=f35, t_days=40)


class TestParse:
    def test_header_only_is_empty_population(self, cfg):
        with pytest.raises(LineListError, match="empty population"):
            parse_line_list("person_id,household_id,onset_day\n", cfg)

    def test_missing_header(self, cfg):
        with pytest.raises(LineListError, match="line 1"):
            parse_line_list("a,b,c\np1,h1,\n", cfg)

    def test_basic(self, cfg):
        text = (
            "person_id,household_id,onset_day\n"
            "alice,h1,9\n"
            "bob,h1,\n"
            "carol,h2,12\n"
        )
        pop, ob = parse_line_list(text, cfg)
        assert pop.n_persons == 3
        assert pop.n_households == 2
        assert pop.household_of == (0, 0, 1)
        assert ob.onsets == (9, None, 12)
        assert pop.ids == ("alice", "bob", "carol")

    def test_duplicate_person_id(self, cfg):
        text = (
            "person_id,household_id,onset_day\n"
            "alice,h1,9\n"
            "alice,h2,\n"
        )
        with pytest.raises(LineListError, match="line 3.*duplicate"):
            parse_line_list(text, cfg)

    def test_onset_bounds_with_line_numbers(self, cfg):
        text = (
            "person_id,household_id,onset_day\n"
            "a,h1,1\n"  # before latent.min_days + 1 = 2
            "b,h1,41\n"  # after t_days = 40
            "c,h2,9\n"
        )
        with pytest.raises(LineListError) as err:
            parse_line_list(text, cfg)
        msg = str(err.value)
        assert "line 2" in msg and "line 3" in msg

    def test_malformed_rows_reported(self, cfg):
        text = (
            "person_id,household_id,onset_day\n"
            "a,h1,soon\n"
            "b,h1\n"
            ",h1,5\n"
            "d,,5\n"
        )
        with pytest.raises(LineListError) as err:
            parse_line_list(text, cfg)
        msg = str(err.value)
        for line in (2, 3, 4, 5):
            assert f"line {line}" in msg

    def test_row_conservation(self, cfg):
        rows = [f"p{i},h{i % 7},{'' if i % 3 else 9 + i % 5}" for i in range(40)]
        text = "person_id,household_id,onset_day\n" + "\n".join(rows) + "\n"
        pop, _ = parse_line_list(text, cfg)
        assert pop.n_persons == 40

    def test_study_scale_fixture(self, cfg):
        lines = ["person_id,household_id,onset_day"]
        for h in range(100):
            for k in range(5):
                onset = 9 if (h, k) == (3, 0) else ""
                lines.append(f"p{h * 5 + k},hh{h},{onset}")
        pop, ob = parse_line_list("\n".join(lines) + "\n", cfg)
        assert pop.n_households == 100
        assert pop.uniform_household_size == 5
        assert ob.n_infected == 1


class TestRoundTrip:
    def test_write_then_parse_is_identity(self, cfg):
        pop = Population(
            ((0, 1, 2), (3,), (4, 5)),
            ids=("a", "b", "c", "d", "e", "f"),
            household_ids=("h1", "h2", "h3"),
        )
        ob = Outbreak(pop, (9, None, 12, None, 30, None), cfg)
        text = write_line_list(pop, ob)
        pop2, ob2 = parse_line_list(text, cfg)
        assert pop2 == pop
        assert ob2.onsets == ob.onsets
        assert write_line_list(pop2, ob2) == text

    def test_round_trip_on_simulated_data(self, paper_config):
        pop = Population.uniform(20, 5)
        out = simulate_epidemic(
            pop, paper_config, TransmissionParams(b=0.005, p1=0.02),
            np.random.default_rng(3),
        )
        text = write_line_list(pop, out.outbreak)
        pop2, ob2 = parse_line_list(text, out.outbreak.config)
        assert ob2.onsets == out.outbreak.onsets
        assert pop2.households == pop.households

    def test_lf_line_endings(self, cfg):
        pop = Population.uniform(2, 2)
        text = write_line_list(pop, Outbreak(pop, (None,) * 4, cfg))
        assert "\r" not in text
        assert text.endswith("\n")
