"""Network model and the line-oriented description format: parsing,
serialization round-trips, stoichiometry, linkage structure, and the
reactant polytope."""

from fractions import Fraction

import numpy as np
import pytest

from crnkit import (
    Complex,
    InvariantPolyhedron,
    ParseError,
    Reaction,
    Tempering,
    linkage_classes,
    parse_network,
    reactant_polytope_vertices,
    serialize_network,
    stoichiometric_subspace,
)
from crnkit.geometry import rank

from conftest import NETWORKS, load


F = Fraction


class TestParsing:
    def test_species_header_fixes_order(self):
        net, _ = parse_network("species: Y X\nX -> Y\n")
        assert net.species_names == ["Y", "X"]
        assert net.reactions[0].source.coeffs == (F(0), F(1))

    def test_first_appearance_order_without_header(self):
        net, _ = parse_network("B -> A\nC -> B\n")
        assert net.species_names == ["B", "A", "C"]

    def test_coefficient_forms_equivalent(self):
        for text in ["2A -> B", "2*A -> B", "2 A -> B"]:
            net, _ = parse_network(f"species: A B\n{text}\n")
            assert net.reactions[0].source.coeffs == (F(2), F(0))

    def test_fraction_and_decimal_coefficients_exact(self):
        net, _ = parse_network("species: A B\n1/2A + 0.25B -> B\n")
        assert net.reactions[0].source.coeffs == (F(1, 2), F(1, 4))

    def test_scientific_notation_rejected(self):
        with pytest.raises(ParseError):
            parse_network("species: A B\n1e3A -> B\n")

    def test_zero_complex(self):
        net, _ = parse_network("species: A\n0 -> A\n")
        assert net.reactions[0].source.coeffs == (F(0),)

    def test_reversible_expands_forward_then_backward(self):
        net, _ = parse_network("species: A B\nA <-> B\n")
        assert net.n_reactions == 2
        assert net.reactions[0].source.coeffs == (F(1), F(0))
        assert net.reactions[1].source.coeffs == (F(0), F(1))

    def test_rate_intervals(self):
        _, temp = parse_network("species: A B\nA -> B rate [1,2]\n")
        assert temp is not None
        assert temp.intervals == ((F(1), F(2)),)

    def test_singleton_interval(self):
        _, temp = parse_network("species: A B\nA -> B rate [3]\n")
        assert temp.intervals == ((F(3), F(3)),)

    def test_reversible_single_interval_applies_both_ways(self):
        _, temp = parse_network("species: A B\nA <-> B rate [1,2]\n")
        assert temp.intervals == ((F(1), F(2)), (F(1), F(2)))

    def test_reversible_two_intervals(self):
        _, temp = parse_network("species: A B\nA <-> B rate [1] [3,4]\n")
        assert temp.intervals == ((F(1), F(1)), (F(3), F(4)))

    def test_missing_rate_defaults_to_one(self):
        _, temp = parse_network("species: A B\nA -> B rate [2]\nB -> A\n")
        assert temp.intervals == ((F(2), F(2)), (F(1), F(1)))

    def test_no_rates_means_no_tempering(self):
        _, temp = parse_network("species: A B\nA -> B\n")
        assert temp is None

    def test_comments_ignored(self):
        net, _ = parse_network("# header\nspecies: A B  # two species\nA -> B\n")
        assert net.n_reactions == 1

    def test_parse_error_reports_line(self):
        with pytest.raises(ParseError) as err:
            parse_network("species: A B\nA -> B\nA + -> B\n")
        assert "line 3" in str(err.value)

    def test_unknown_species_with_fixed_header(self):
        with pytest.raises(ParseError):
            parse_network("species: A\nA -> B\n")

    def test_duplicate_species_rejected(self):
        with pytest.raises(ParseError):
            parse_network("species: A A\nA -> A\n")

    def test_header_after_reactions_rejected(self):
        with pytest.raises(ParseError):
            parse_network("A -> B\nspecies: A B\n")

    def test_nonpositive_rate_rejected(self):
        with pytest.raises(ParseError):
            parse_network("species: A B\nA -> B rate [0,1]\n")

    def test_inverted_interval_rejected(self):
        with pytest.raises(ParseError):
            parse_network("species: A B\nA -> B rate [2,1]\n")

    def test_missing_arrow_rejected(self):
        with pytest.raises(ParseError):
            parse_network("species: A B\nA + B\n")

    def test_empty_input_rejected(self):
        with pytest.raises(ParseError):
            parse_network("# nothing here\n")

    def test_self_loop_allowed(self):
        net, _ = parse_network("species: A\nA -> A\n")
        assert net.reactions[0].flux == (F(0),)
        info = linkage_classes(net)
        assert info.weakly_reversible  # single complex is vacuously strong

    def test_duplicate_complexes_stored_once(self):
        net, _ = parse_network("species: A B\nA -> B\nB -> A\n")
        assert len(net.complexes) == 2


class TestSerialization:
    @pytest.mark.parametrize("name", sorted(NETWORKS))
    def test_round_trip(self, name):
        net, temp = load(name)
        text = serialize_network(net, temp)
        net2, temp2 = parse_network(text)
        assert net2 == net
        assert temp2 == temp

    def test_formats_fractions(self):
        net, _ = parse_network("species: A B\n1/2A -> 3B\n")
        text = serialize_network(net)
        assert "1/2A" in text and "3B" in text


class TestTempering:
    def test_contains_is_exact(self):
        temp = Tempering(((F(1, 3), F(1, 2)),))
        assert temp.contains([F(1, 3)])
        assert temp.contains([F(2, 5)])
        assert not temp.contains([F(1, 3) - F(1, 10**12)])

    def test_midpoints_lows_highs(self):
        temp = Tempering(((F(1), F(2)), (F(3), F(3))))
        assert np.allclose(temp.midpoints(), [1.5, 3.0])
        assert np.allclose(temp.lows(), [1.0, 3.0])
        assert np.allclose(temp.highs(), [2.0, 3.0])

    def test_invalid_interval_rejected(self):
        with pytest.raises(ValueError):
            Tempering(((F(2), F(1)),))
        with pytest.raises(ValueError):
            Tempering(((F(0), F(1)),))


class TestStoichiometry:
    def test_ab_reversible_one_dimensional(self):
        net, _ = load("ab_reversible")
        st = stoichiometric_subspace(net)
        assert st.dimension == 1
        assert len(st.Hperp_basis) == 1
        # conservation law is total mass x_A + x_B
        a, b = st.Hperp_basis[0]
        assert a == b != 0

    def test_reverse_lv_full_dimensional(self):
        net, _ = load("reverse_lv")
        st = stoichiometric_subspace(net)
        assert st.dimension == 2
        assert st.Hperp_basis == ()
        assert st.Hperp_matrix().shape == (0, 2)

    def test_futile_cycle_two_conservation_laws(self):
        net, _ = load("futile_cycle")
        st = stoichiometric_subspace(net)
        assert st.dimension == 3
        assert len(st.Hperp_basis) == 2
        # total substrate and total enzyme+carrier are conserved
        for law in [(1, 1, 1, 0, 0), (0, 0, 0, 1, 1)]:
            law = tuple(F(v) for v in law)
            assert rank(list(st.Hperp_basis) + [law]) == 2

    def test_h_and_hperp_are_orthogonal(self):
        for name in ["ab_reversible", "futile_cycle", "pyramid"]:
            net, _ = load(name)
            st = stoichiometric_subspace(net)
            for h in st.H_basis:
                for p in st.Hperp_basis:
                    assert sum(a * b for a, b in zip(h, p)) == 0

    def test_basis_dimensions_add_up(self):
        for name in sorted(NETWORKS):
            net, _ = load(name)
            st = stoichiometric_subspace(net)
            assert len(st.H_basis) == st.dimension
            assert st.dimension + len(st.Hperp_basis) == net.n_species


class TestLinkage:
    def test_two_classes_not_weakly_reversible(self):
        net, _ = load("endo_not_strong")
        info = linkage_classes(net)
        assert len(info.classes) == 2
        assert not info.weakly_reversible

    def test_prism_three_reversible_classes(self):
        net, _ = load("prism")
        info = linkage_classes(net)
        assert len(info.classes) == 3
        assert info.weakly_reversible

    def test_single_cycle_class(self):
        net, _ = load("chain_cycle")
        info = linkage_classes(net)
        assert len(info.classes) == 1
        assert info.weakly_reversible

    def test_chain_not_reversible(self):
        net, _ = load("a_to_b")
        assert not linkage_classes(net).weakly_reversible

    def test_class_subspaces_span_h(self):
        net, _ = load("pyramid")
        info = linkage_classes(net)
        st = stoichiometric_subspace(net)
        combined = [v for basis in info.class_subspaces for v in basis]
        assert rank(combined) == st.dimension


class TestReactantPolytope:
    def test_triangle_sources_all_vertices(self):
        net, _ = load("strong_not_wr")
        verts = {v.coeffs for v in reactant_polytope_vertices(net)}
        assert verts == {(F(0), F(0)), (F(2), F(0)), (F(0), F(2))}

    def test_tetrahedron_sources_all_vertices(self):
        net, _ = load("tetrahedron")
        verts = reactant_polytope_vertices(net)
        assert len(verts) == 4

    def test_interior_source_not_vertex(self):
        # (1,1) lies inside the triangle hull of (0,0), (3,0), (0,3)
        net, _ = parse_network(
            "species: A B\n3A -> A\nA + B -> 2A + 2B\n3B -> B\n0 -> A\n"
        )
        verts = {v.coeffs for v in reactant_polytope_vertices(net)}
        assert (F(1), F(1)) not in verts
        assert len(verts) == 3


class TestInvariantPolyhedron:
    def test_membership(self):
        net, _ = load("ab_reversible")
        st = stoichiometric_subspace(net)
        poly = InvariantPolyhedron((1.0, 3.0), st)
        assert poly.contains((2.0, 2.0))
        assert poly.contains((0.0, 4.0))
        assert not poly.contains((1.0, 1.0))
        assert not poly.contains((5.0, -1.0))

    def test_full_dimensional_orthant(self):
        net, _ = load("reverse_lv")
        st = stoichiometric_subspace(net)
        poly = InvariantPolyhedron((1.0, 1.0), st)
        assert poly.contains((17.0, 0.01))
        assert not poly.contains((-0.5, 1.0))


class TestModelValidation:
    def test_reaction_flux(self):
        src = Complex((F(2), F(0)))
        tgt = Complex((F(1), F(1)))
        assert Reaction(src, tgt).flux == (F(-1), F(1))

    def test_negative_coefficient_rejected(self):
        with pytest.raises(ValueError):
            Complex((F(-1), F(0)))
