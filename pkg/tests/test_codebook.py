import numpy as np
import pytest

from conftest import design_gram, exhaustive_best, masked_coherence_ref
from lowcoh import (
    DegenerateDesignError,
    DimensionError,
    PilotConstraintError,
    combiner_codebook,
    dft_matrix,
    fast_coherence,
    greedy_order,
    partition_codebook,
    pilot_codebook,
    random_permutation_design,
    s_matrix,
    select_pilots_and_order,
)


class TestPilotCodebook:
    def test_vectors_are_dft_columns(self):
        pilot = pilot_codebook(4, (0, 2))
        assert np.allclose(pilot.vectors, dft_matrix(4)[:, [0, 2]], atol=1e-14)
        assert pilot.selected == (0, 2)
        assert pilot.m_x == 2

    def test_gram_formula(self):
        pilot = pilot_codebook(4, (0, 1, 3))
        x = sum(
            np.outer(np.conj(pilot.vectors[:, k]), pilot.vectors[:, k])
            for k in range(3)
        )
        assert np.allclose(pilot.gram, x, atol=1e-12)

    def test_full_subset_gram_is_scaled_identity(self):
        pilot = pilot_codebook(4, (0, 1, 2, 3))
        assert np.allclose(pilot.gram, 4 * np.eye(4), atol=1e-9)

    @pytest.mark.parametrize("subset", [(), (1, 2), (0, 0), (0, 4), (0, -1)])
    def test_invalid_subsets_rejected(self, subset):
        with pytest.raises(PilotConstraintError):
            pilot_codebook(4, subset)


class TestPartitionCodebook:
    def test_identity_default(self):
        book = partition_codebook(6, 3)
        assert book.ordering == (0, 1, 2, 3, 4, 5)
        assert np.array_equal(book.matrix, dft_matrix(6))

    def test_blocks_partition_columns(self):
        book = partition_codebook(6, 3, ordering=(5, 0, 3, 1, 4, 2))
        blocks = book.blocks
        assert len(blocks) == 2
        assert np.array_equal(blocks[0], dft_matrix(6)[:, [5, 0, 3]])
        assert np.array_equal(blocks[1], dft_matrix(6)[:, [1, 4, 2]])

    def test_combiner_is_identity_ordered(self):
        w = combiner_codebook(4, 2)
        assert w.ordering == (0, 1, 2, 3)
        assert len(w.blocks) == 2

    @pytest.mark.parametrize("ordering", [(0, 1), (0, 0, 1, 2, 3, 5), (0, 1, 2, 3, 4, 6)])
    def test_bad_orderings_rejected(self, ordering):
        with pytest.raises(DimensionError):
            partition_codebook(6, 3, ordering=ordering)

    def test_block_length_must_divide(self):
        with pytest.raises(DimensionError):
            partition_codebook(6, 4)


class TestSMatrix:
    def test_matches_direct_formula(self):
        pilot = pilot_codebook(3, (0, 2))
        precoder = partition_codebook(6, 3, ordering=(2, 4, 0, 1, 5, 3))
        s = s_matrix(precoder, pilot)
        assert np.allclose(s, design_gram(6, 3, precoder.ordering, pilot), atol=1e-12)

    def test_rejects_mismatched_pilot(self):
        with pytest.raises(DimensionError):
            s_matrix(partition_codebook(6, 3), pilot_codebook(2, (0,)))


class TestFastCoherence:
    def test_full_pilot_set_gives_zero(self):
        # all l_t pilots make X = l_t I, so S = l_t F^* F^T is diagonal
        s = s_matrix(partition_codebook(8, 4), pilot_codebook(4, (0, 1, 2, 3)))
        assert fast_coherence(s) <= 1e-12

    def test_agrees_with_masked_scorer_when_healthy(self):
        # this greedy design excites every direction, so the strict and
        # masked scores coincide
        result = select_pilots_and_order(12, 4, 2)
        assert fast_coherence(result.s) == pytest.approx(
            masked_coherence_ref(result.s), abs=1e-12
        )
        assert fast_coherence(result.s) == pytest.approx(result.coherence, abs=1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            fast_coherence(np.ones((2, 3)))

    def test_rejects_non_hermitian(self):
        with pytest.raises(DegenerateDesignError):
            fast_coherence(np.array([[1.0, 2.0], [0.5, 1.0]]))

    def test_rejects_dead_direction(self):
        with pytest.raises(DegenerateDesignError):
            fast_coherence(np.diag([1.0, 0.0, 2.0]))


class TestGreedyOrder:
    def test_small_design_frozen(self):
        # 4 antennas, 2 beams per frame, single pilot: the greedy search
        # reaches a zero-coherence (masked) design with this ordering
        result = greedy_order(4, 2, pilot_codebook(2, (0,)))
        assert result.precoder.ordering == (2, 0, 1, 3)
        assert result.coherence == pytest.approx(0.0, abs=1e-12)

    def test_deterministic(self):
        a = greedy_order(6, 3, pilot_codebook(3, (0, 1)))
        b = greedy_order(6, 3, pilot_codebook(3, (0, 1)))
        assert a.precoder.ordering == b.precoder.ordering
        assert a.coherence == b.coherence

    def test_reported_coherence_matches_reference_scorer(self):
        result = greedy_order(6, 3, pilot_codebook(3, (0, 2)))
        s = design_gram(6, 3, result.precoder.ordering, result.pilot)
        assert result.coherence == pytest.approx(masked_coherence_ref(s), abs=1e-12)

    def test_full_pilot_set_reaches_zero(self):
        result = greedy_order(6, 3, pilot_codebook(3, (0, 1, 2)))
        assert result.coherence <= 1e-10


class TestSelectPilotsAndOrder:
    def test_frozen_small_instance(self):
        result = select_pilots_and_order(6, 3, 2)
        assert result.pilot.selected == (0, 1)
        assert result.precoder.ordering == (1, 0, 3, 2, 4, 5)
        assert result.coherence == pytest.approx(0.570087712550, abs=1e-9)

    def test_pool_matches_serial(self):
        serial = select_pilots_and_order(6, 3, 2, workers=1)
        pooled = select_pilots_and_order(6, 3, 2, workers=2)
        assert pooled.pilot.selected == serial.pilot.selected
        assert pooled.precoder.ordering == serial.precoder.ordering
        assert pooled.coherence == serial.coherence

    def test_matches_exhaustive_on_tractable_instance(self):
        # (0, 1) is the only size-2 subset containing column 0 at l_t=2, so
        # brute force over orderings is the complete search
        result = select_pilots_and_order(4, 2, 2)
        best, _ = exhaustive_best(4, 2, (0, 1))
        assert result.coherence == pytest.approx(best, abs=1e-9)

    def test_rejects_bad_m_x(self):
        with pytest.raises(PilotConstraintError):
            select_pilots_and_order(6, 3, 4)


class TestRandomPermutationDesign:
    def test_deterministic_given_rng(self):
        a = random_permutation_design(8, 4, 2, np.random.default_rng(5))
        b = random_permutation_design(8, 4, 2, np.random.default_rng(5))
        assert a.precoder.ordering == b.precoder.ordering
        assert a.coherence == b.coherence

    def test_defaults_to_selected_pilot_subset(self):
        expected = select_pilots_and_order(8, 4, 2).pilot.selected
        design = random_permutation_design(8, 4, 2, np.random.default_rng(6))
        assert design.pilot.selected == expected

    def test_random_subset_contains_zero(self):
        design = random_permutation_design(
            8, 4, 2, np.random.default_rng(7), random_subset=True
        )
        assert 0 in design.pilot.selected
        assert len(design.pilot.selected) == 2

    def test_coherence_scored_with_masked_reference(self):
        design = random_permutation_design(8, 4, 2, np.random.default_rng(8))
        s = design_gram(8, 4, design.precoder.ordering, design.pilot)
        assert design.coherence == pytest.approx(masked_coherence_ref(s), abs=1e-12)

    def test_rejects_mismatched_pilot(self):
        with pytest.raises(PilotConstraintError):
            random_permutation_design(
                8, 4, 2, np.random.default_rng(9), pilot=pilot_codebook(4, (0,))
            )
