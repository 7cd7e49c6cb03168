import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lsmdp.objectives import (CnfInstance, DimacsParseError, cnf_objective,
                              cnf_to_dimacs, load_dimacs, make_leading_ones,
                              make_nk_landscape, make_onemax, make_trap,
                              parse_objective)


class TestOneMax:
    def test_counts_ones(self):
        assert make_onemax(3)(0b011) == 2.0

    def test_zero_state(self):
        assert make_onemax(3)(0b000) == 0.0

    def test_all_ones_is_known_optimum(self):
        obj = make_onemax(5)
        assert obj(0b11111) == 5.0 == obj.known_optimum

    @pytest.mark.parametrize("n", [0, -1, 64, "3"])
    def test_rejects_bad_length(self, n):
        with pytest.raises(ValueError):
            make_onemax(n)


class TestLeadingOnes:
    def test_prefix_run(self):
        assert make_leading_ones(4)(0b1101) == 2.0

    def test_broken_prefix(self):
        assert make_leading_ones(4)(0b0111) == 0.0

    def test_full_run_is_optimum(self):
        obj = make_leading_ones(4)
        assert obj(0b1111) == 4.0 == obj.known_optimum


class TestTrap:
    def test_single_block_closed_form(self):
        obj = make_trap(4, 4)
        for x in range(16):
            u = x.bit_count()
            assert obj(x) == (4.0 if u == 4 else 3.0 - u)
        assert obj(0b0000) == 3.0
        assert obj(0b1111) == 4.0

    def test_two_blocks_sum(self):
        obj = make_trap(4, 2)
        # low block 11 scores 2, high block 01 has one one -> scores 0
        assert obj(0b0111) == 2.0

    def test_block_size_must_divide(self):
        with pytest.raises(ValueError):
            make_trap(4, 3)


class TestNkLandscape:
    def test_deterministic_for_seed(self):
        a = make_nk_landscape(6, 2, 42)
        b = make_nk_landscape(6, 2, 42)
        assert a(0b101010) == a(0b101010) == b(0b101010)

    def test_different_seed_differs(self):
        a = make_nk_landscape(6, 2, 42)
        b = make_nk_landscape(6, 2, 43)
        assert a(0b101010) != b(0b101010)

    def test_k0_contributions_are_separable(self):
        obj = make_nk_landscape(8, 0, seed=3)
        for i in range(8):
            base = obj(0) - obj(1 << i)
            for x in (0b10101010, 0b11110000, 0b11111111, 0b00000001):
                lo = x & ~(1 << i)
                hi = x | (1 << i)
                assert math.isclose(obj(lo) - obj(hi), base, abs_tol=1e-12)

    def test_rejects_bad_epistasis(self):
        with pytest.raises(ValueError):
            make_nk_landscape(4, 4, 0)


@pytest.mark.parametrize("obj", [make_onemax(10), make_leading_ones(10), make_trap(10, 5),
                                 make_onemax(16), make_leading_ones(16), make_trap(16, 4)])
def test_exhaustive_maximum_matches_known_optimum(obj):
    assert max(obj(x) for x in range(1 << obj.n)) == obj.known_optimum


def _write_cnf(tmp_path, text, name="f.cnf"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestDimacs:
    def test_hand_evaluated_two_clause_file(self, tmp_path):
        path = _write_cnf(tmp_path, "p cnf 2 2\n1 2 0\n-1 0\n")
        obj = cnf_objective(load_dimacs(path))
        # bit 0 holds variable 1
        assert obj(0b01) == 1.0
        assert obj(0b10) == 2.0
        assert obj(0b00) == 1.0
        assert obj(0b11) == 1.0

    def test_comments_and_multiline_clauses(self, tmp_path):
        text = "c a comment\n\np cnf 3 2\nc inner comment\n1 2\n3 0\n-2 0\n"
        instance = load_dimacs(_write_cnf(tmp_path, text))
        assert instance.num_vars == 3
        assert instance.clauses == ((1, 2, 3), (-2,))

    def test_clause_count_mismatch_names_line(self, tmp_path):
        path = _write_cnf(tmp_path, "p cnf 2 2\n1 0\n2 0\n-1 0\n")
        with pytest.raises(DimacsParseError) as err:
            load_dimacs(path)
        assert err.value.line == 4
        assert "line 4" in str(err.value)

    def test_too_few_clauses(self, tmp_path):
        path = _write_cnf(tmp_path, "p cnf 2 3\n1 0\n2 0\n")
        with pytest.raises(DimacsParseError):
            load_dimacs(path)

    def test_literal_out_of_range(self, tmp_path):
        path = _write_cnf(tmp_path, "p cnf 2 1\n3 0\n")
        with pytest.raises(DimacsParseError) as err:
            load_dimacs(path)
        assert err.value.line == 2

    def test_empty_clause_rejected(self, tmp_path):
        path = _write_cnf(tmp_path, "p cnf 2 1\n0\n")
        with pytest.raises(DimacsParseError):
            load_dimacs(path)

    def test_missing_header(self, tmp_path):
        path = _write_cnf(tmp_path, "c only a comment\n")
        with pytest.raises(DimacsParseError):
            load_dimacs(path)

    def test_clause_before_header(self, tmp_path):
        path = _write_cnf(tmp_path, "1 2 0\np cnf 2 1\n")
        with pytest.raises(DimacsParseError) as err:
            load_dimacs(path)
        assert err.value.line == 1

    def test_unterminated_clause(self, tmp_path):
        path = _write_cnf(tmp_path, "p cnf 2 1\n1 2\n")
        with pytest.raises(DimacsParseError):
            load_dimacs(path)

    def test_round_trip(self, tmp_path):
        text = "c x\np cnf 3 3\n1 -2 0\n2 3 0\n-3 0\n"
        instance = load_dimacs(_write_cnf(tmp_path, text))
        again = load_dimacs(_write_cnf(tmp_path, cnf_to_dimacs(instance), name="g.cnf"))
        assert again == instance

    def test_satisfied_count_upper_bound(self, tmp_path):
        path = _write_cnf(tmp_path, "p cnf 3 3\n1 2 0\n-1 3 0\n2 -3 0\n")
        obj = cnf_objective(load_dimacs(path))
        values = [obj(x) for x in range(8)]
        assert all(v <= 3 for v in values)
        assert max(values) == 3.0  # x = 011 satisfies everything

    def test_instance_invariants(self):
        with pytest.raises(ValueError):
            CnfInstance(0, ())
        with pytest.raises(ValueError):
            CnfInstance(2, ((),))
        with pytest.raises(ValueError):
            CnfInstance(2, ((3,),))


class TestDescriptors:
    def test_onemax(self):
        obj = parse_objective("onemax:n=10")
        assert obj.n == 10 and obj(0b1111111111) == 10.0

    def test_nk(self):
        obj = parse_objective("nk:n=12,k=3,seed=7")
        assert obj.n == 12
        assert obj(5) == make_nk_landscape(12, 3, 7)(5)

    def test_maxsat(self, tmp_path):
        path = _write_cnf(tmp_path, "p cnf 2 2\n1 2 0\n-1 0\n")
        obj = parse_objective(f"maxsat:path={path}")
        assert obj(0b10) == 2.0

    @pytest.mark.parametrize("bad", ["nope:n=3", "onemax", "onemax:n=x", "trap:n=8"])
    def test_bad_descriptors_name_the_input(self, bad):
        with pytest.raises(ValueError) as err:
            parse_objective(bad)
        assert bad.split(":")[0] in str(err.value)


@given(st.integers(1, 16), st.data())
def test_onemax_matches_popcount_everywhere(n, data):
    x = data.draw(st.integers(0, (1 << n) - 1))
    assert make_onemax(n)(x) == float(bin(x).count("1"))
