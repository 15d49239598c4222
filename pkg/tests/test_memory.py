import logging

import numpy as np
import pytest

from mostnet.core import Tensor, double_precision
from mostnet.errors import MemoryDictionaryError
from mostnet.memory import (
    MemoryDictionary,
    SlotSet,
    assignment_matrix,
    attention_weights,
    attentive_read,
    cosine_similarity,
    init_memory,
    map_from_slots,
    memory_usage,
    mr_loss,
    nearest_key,
    slots_from_map,
    update_memory,
)


def _dictionary(keys, values=None, alpha=0.999) -> MemoryDictionary:
    keys = np.array(keys, dtype=np.float64)
    values = keys.copy() if values is None else np.array(values, dtype=np.float64)
    return MemoryDictionary(keys, values, alpha)


def _slots(vectors) -> SlotSet:
    vectors = np.array(vectors, dtype=np.float64)
    return SlotSet(Tensor(vectors, dtype=np.float64), 1, len(vectors))


class TestInitMemory:
    def test_shapes(self):
        memory = init_memory(512, 64, seed=1)
        assert memory.keys.shape == (512, 64)
        assert memory.values.shape == (512, 64)
        assert memory.size == 512
        assert memory.dim == 64
        assert memory.alpha == pytest.approx(0.999)

    def test_same_seed_is_bitwise_identical(self):
        assert init_memory(32, 8, seed=5).equals(init_memory(32, 8, seed=5))

    def test_different_seeds_differ(self):
        assert not init_memory(32, 8, seed=1).equals(init_memory(32, 8, seed=2))

    @pytest.mark.parametrize("size, dim", [(0, 4), (4, 0)])
    def test_empty_rejected(self, size, dim):
        with pytest.raises(MemoryDictionaryError):
            init_memory(size, dim, seed=0)

    def test_alpha_out_of_range(self):
        with pytest.raises(MemoryDictionaryError, match="alpha"):
            _dictionary([[1.0, 0.0]], alpha=1.5)

    def test_mismatched_values(self):
        with pytest.raises(MemoryDictionaryError):
            MemoryDictionary(np.ones((2, 3)), np.ones((3, 3)), 0.5)


class TestSlots:
    def test_single_position(self):
        feature_map = Tensor(np.array([[[2.0]], [[-3.0]]]))
        slot_set = slots_from_map(feature_map)
        assert slot_set.count == 1
        np.testing.assert_array_equal(slot_set.slots.data, [[2.0, -3.0]])

    def test_count(self, rng):
        slot_set = slots_from_map(Tensor(rng.standard_normal((5, 2, 3))))
        assert slot_set.count == 6
        assert slot_set.dim == 5

    def test_batched_count(self, rng):
        slot_set = slots_from_map(Tensor(rng.standard_normal((4, 5, 2, 3))))
        assert slot_set.count == 24
        assert slot_set.batched

    def test_row_major_order(self):
        feature_map = np.arange(12.0).reshape(2, 2, 3)
        slots = slots_from_map(Tensor(feature_map)).slots.data
        np.testing.assert_array_equal(slots[1], feature_map[:, 0, 1])
        np.testing.assert_array_equal(slots[3], feature_map[:, 1, 0])

    @pytest.mark.parametrize("shape", [(3, 2, 4), (2, 3, 2, 4)])
    def test_map_round_trip(self, rng, shape):
        feature_map = rng.standard_normal(shape)
        restored = map_from_slots(slots_from_map(Tensor(feature_map, dtype=np.float64)))
        np.testing.assert_array_equal(restored.data, feature_map)

    def test_permuted_slots_permute_map(self, rng):
        feature_map = rng.standard_normal((3, 2, 2))
        slot_set = slots_from_map(Tensor(feature_map, dtype=np.float64))
        permuted = SlotSet(Tensor(slot_set.slots.data[::-1].copy(), dtype=np.float64), 2, 2)
        restored = map_from_slots(permuted).data
        np.testing.assert_array_equal(restored, feature_map[:, ::-1, ::-1])

    def test_slot_count_mismatch(self):
        slot_set = SlotSet(Tensor(np.ones((4, 2))), 3, 2)
        with pytest.raises(MemoryDictionaryError, match="4 slots"):
            map_from_slots(slot_set)


class TestCosineSimilarity:
    def test_self_similarity(self, rng):
        v = rng.standard_normal(7)
        assert cosine_similarity(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)

    def test_diagonal(self):
        assert cosine_similarity([1.0, 1.0], [1.0, 0.0]) == pytest.approx(0.70711, abs=1e-5)

    def test_zero_norm_rejected(self):
        with pytest.raises(MemoryDictionaryError, match="norm"):
            cosine_similarity([0.0, 0.0], [1.0, 0.0])

    def test_tensor_input_is_differentiable(self):
        a = Tensor([1.0, 1.0], requires_grad=True)
        sim = cosine_similarity(a, np.array([1.0, 0.0]))
        assert isinstance(sim, Tensor)
        assert sim.requires_grad


class TestNearestKey:
    def test_closest(self):
        memory = _dictionary([[1.0, 0.0], [0.0, 1.0]])
        assert nearest_key([0.9, 0.1], memory) == 0

    def test_exact_key(self, rng):
        memory = MemoryDictionary(rng.standard_normal((6, 3)), rng.standard_normal((6, 3)), 0.5)
        assert nearest_key(memory.keys[4], memory) == 4

    def test_tie_goes_to_lower_index(self):
        memory = _dictionary([[0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
        assert nearest_key([2.0, 0.0], memory) == 1


class TestUpdateMemory:
    def test_fixed_point(self):
        memory = _dictionary([[1.0, 0.0], [0.0, 1.0]], alpha=0.5)
        update_memory(memory, _slots([[1.0, 0.0]]), _slots([[1.0, 0.0]]))
        np.testing.assert_allclose(memory.keys, [[1.0, 0.0], [0.0, 1.0]])

    def test_alpha_zero_overwrites(self):
        memory = _dictionary([[1.0, 0.0], [0.0, 1.0]], alpha=0.0)
        update_memory(memory, _slots([[0.2, 0.9]]), _slots([[3.0, 0.5]]))
        np.testing.assert_array_equal(memory.keys[1], [0.2, 0.9])
        np.testing.assert_array_equal(memory.keys[0], [1.0, 0.0])
        np.testing.assert_array_equal(memory.values[0], [3.0, 0.5])

    def test_single_decay_step(self):
        memory = _dictionary([[1.0, 0.0]], alpha=0.999)
        update_memory(memory, _slots([[0.0, 1.0]]), _slots([[0.0, 1.0]]))
        np.testing.assert_allclose(memory.keys[0], [0.999, 0.001], atol=1e-12)
        np.testing.assert_allclose(memory.values[0], [0.999, 0.001], atol=1e-12)

    def test_moves_towards_mean_of_assigned_slots(self):
        memory = _dictionary([[1.0, 0.0], [0.0, 1.0]], alpha=0.5)
        photo = _slots([[1.0, 0.2], [1.0, -0.2], [0.1, 1.0]])
        update_memory(memory, photo, photo)
        np.testing.assert_allclose(memory.keys[0], [1.0, 0.0])
        np.testing.assert_allclose(memory.keys[1], [0.05, 1.0])

    def test_alpha_one_is_bitwise_noop(self, rng):
        memory = init_memory(8, 4, seed=3, alpha=1.0)
        before = memory.copy()
        slots = SlotSet(Tensor(rng.standard_normal((5, 4))), 1, 5)
        update_memory(memory, slots, slots)
        assert memory.equals(before)

    def test_ema_converges(self):
        # a single key keeps being pulled towards one fixed query
        memory = _dictionary([[2.0, -1.0, 0.5]], alpha=0.999)
        query = _slots([[0.3, 0.4, 1.0]])
        initial = np.linalg.norm(memory.keys[0] - query.slots.data[0])

        for _ in range(5000):
            update_memory(memory, query, query)

        residual = np.linalg.norm(memory.keys[0] - query.slots.data[0])
        assert residual <= 0.007 * initial
        assert residual == pytest.approx(0.999**5000 * initial, rel=1e-6)

    @pytest.mark.parametrize("seed", range(3))
    def test_overwrite_then_nearest_read_returns_sketch_slots(self, seed):
        rng = np.random.default_rng(seed)
        photo_basis, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        sketch_basis, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        sketch_vectors = sketch_basis * rng.uniform(0.5, 2.0, (6, 1))
        order = rng.permutation(6)
        # key j starts at photo slot order[j], value j next to sketch slot order[j]
        memory = MemoryDictionary(
            photo_basis[order].copy(),
            sketch_vectors[order] + 0.05 * rng.standard_normal((6, 6)),
            0.0,
        )
        photo = _slots(photo_basis)
        sketch = _slots(sketch_vectors)

        update_memory(memory, photo, sketch)
        with double_precision():
            read = attentive_read(memory, photo, strategy="nearest")

        np.testing.assert_array_equal(memory.values, sketch_vectors[order])
        np.testing.assert_array_equal(read.slots.data, sketch.slots.data)

    def test_slot_count_mismatch(self):
        memory = _dictionary([[1.0, 0.0]])
        with pytest.raises(MemoryDictionaryError, match="slot counts"):
            update_memory(memory, _slots([[1.0, 0.0]]), _slots([[1.0, 0.0], [0.0, 1.0]]))

    def test_dimension_mismatch(self):
        memory = _dictionary([[1.0, 0.0]])
        with pytest.raises(MemoryDictionaryError, match="dimension"):
            update_memory(memory, _slots([[1.0, 0.0, 0.0]]), _slots([[1.0, 0.0, 0.0]]))

    def test_gradients_are_not_recorded(self):
        memory = _dictionary([[1.0, 0.0]], alpha=0.5)
        photo = SlotSet(Tensor([[0.0, 1.0]], dtype=np.float64, requires_grad=True), 1, 1)
        update_memory(memory, photo, photo)
        assert isinstance(memory.keys, np.ndarray)


class TestAttentiveRead:
    def test_single_item(self, rng):
        memory = MemoryDictionary(rng.standard_normal((1, 3)), rng.standard_normal((1, 3)), 0.5)
        read = attentive_read(memory, _slots(rng.standard_normal((4, 3))))
        np.testing.assert_allclose(read.slots.data, np.repeat(memory.values, 4, axis=0))

    def test_identical_keys_give_mean_value(self, rng):
        keys = np.tile(rng.standard_normal(3), (5, 1))
        memory = MemoryDictionary(keys, rng.standard_normal((5, 3)), 0.5)
        read = attentive_read(memory, _slots(rng.standard_normal((2, 3))))
        np.testing.assert_allclose(read.slots.data[0], memory.values.mean(axis=0))

    def test_hand_evaluated(self):
        memory = _dictionary([[1.0, 0.0], [0.0, 1.0]], [[0.0, 2.0], [2.0, 0.0]])
        query = _slots([[1.0, 0.0]])
        weights = attention_weights(memory, query).data[0]
        np.testing.assert_allclose(weights, [0.7311, 0.2689], atol=1e-3)
        read = attentive_read(memory, query).slots.data[0]
        np.testing.assert_allclose(read, [0.5379, 1.4622], atol=1e-3)

    def test_nearest_strategy(self):
        memory = _dictionary([[1.0, 0.0], [0.0, 1.0]], [[0.0, 2.0], [2.0, 0.0]])
        read = attentive_read(memory, _slots([[0.1, 0.9]]), strategy="nearest")
        np.testing.assert_array_equal(read.slots.data[0], [2.0, 0.0])

    def test_unknown_strategy(self):
        memory = _dictionary([[1.0, 0.0]])
        with pytest.raises(ValueError, match="strategy"):
            attentive_read(memory, _slots([[1.0, 0.0]]), strategy="random")

    def test_zero_query_rejected(self):
        memory = _dictionary([[1.0, 0.0]])
        with pytest.raises(MemoryDictionaryError, match="norm"):
            attentive_read(memory, _slots([[0.0, 0.0]]))

    def test_layout_is_kept(self, rng):
        memory = init_memory(8, 4, seed=0)
        photo_slots = slots_from_map(Tensor(rng.standard_normal((2, 4, 3, 5))))
        read = attentive_read(memory, photo_slots)
        assert map_from_slots(read).shape == (2, 4, 3, 5)

    def test_weights_normalized_and_scale_invariant(self):
        rng = np.random.default_rng(0)
        with double_precision():
            for _ in range(1000):
                size, dim = rng.integers(1, 9), rng.integers(1, 6)
                memory = MemoryDictionary(
                    rng.standard_normal((size, dim)), rng.standard_normal((size, dim)), 0.5
                )
                query = rng.standard_normal((1, dim))
                scale = rng.uniform(0.01, 100.0)

                weights = attention_weights(memory, _slots(query)).data
                np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-6)

                read = attentive_read(memory, _slots(query)).slots.data
                scaled = attentive_read(memory, _slots(query * scale)).slots.data
                assert np.max(np.abs(read - scaled)) <= 1e-6

    def test_gradient_reaches_queries_only(self):
        memory = _dictionary([[1.0, 0.0], [0.0, 1.0]], [[0.0, 2.0], [2.0, 0.0]])
        queries = Tensor([[0.5, 0.5]], dtype=np.float64, requires_grad=True)
        attentive_read(memory, SlotSet(queries, 1, 1)).slots.sum().backward()
        assert queries.grad is not None
        assert queries.grad.shape == (1, 2)


class TestAssignmentMatrix:
    def test_hard_rows_are_one_hot(self, rng):
        memory = init_memory(6, 3, seed=2)
        rows = assignment_matrix(_slots(rng.standard_normal((5, 3))), memory.keys, "hard").rows
        np.testing.assert_array_equal(rows.data.sum(axis=1), 1.0)
        np.testing.assert_array_equal((rows.data == 1.0).sum(axis=1), 1)

    def test_small_tau_approaches_hard(self, rng):
        keys = init_memory(6, 3, seed=2).keys.astype(np.float64)
        candidates = rng.standard_normal((64, 3))
        unit_keys = keys / np.linalg.norm(keys, axis=1, keepdims=True)
        sims = np.sort(
            candidates @ unit_keys.T / np.linalg.norm(candidates, axis=1, keepdims=True), axis=1
        )
        slots = _slots(candidates[sims[:, -1] - sims[:, -2] >= 0.01][:5])
        assert slots.count == 5

        soft = assignment_matrix(slots, keys, "soft", tau=1e-3).rows
        hard = assignment_matrix(slots, keys, "hard").rows
        assert np.all(soft.data.max(axis=1) >= 0.99)
        np.testing.assert_array_equal(soft.data.argmax(axis=1), hard.data.argmax(axis=1))

    def test_equal_similarities_give_uniform_rows(self):
        entries = np.tile([1.0, 2.0], (4, 1))
        rows = assignment_matrix(_slots([[0.3, -1.0]]), entries, "soft", tau=0.1).rows
        np.testing.assert_allclose(rows.data, 0.25)

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_non_positive_tau(self, tau):
        with pytest.raises(MemoryDictionaryError, match="tau"):
            assignment_matrix(_slots([[1.0, 0.0]]), np.eye(2), "soft", tau=tau)

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            assignment_matrix(_slots([[1.0, 0.0]]), np.eye(2), "fuzzy")


class TestMRLoss:
    AXES = [[1.0, 0.0], [0.0, 1.0]]

    def test_perfect_agreement(self, rng):
        keys = rng.standard_normal((5, 3))
        memory = MemoryDictionary(keys, keys.copy(), 0.5)
        slots = _slots(rng.standard_normal((4, 3)))
        for mode in ("hard", "soft"):
            assert float(mr_loss(slots, slots, memory, mode).data) == pytest.approx(0.0)

    def test_full_disagreement(self):
        memory = _dictionary(self.AXES)
        photo = _slots([[1.0, 0.0], [0.0, 1.0]])
        sketch = _slots([[0.0, 1.0], [1.0, 0.0]])
        assert float(mr_loss(photo, sketch, memory, "hard").data) == pytest.approx(1.0)

    def test_half_disagreement(self):
        memory = _dictionary(self.AXES)
        photo = _slots([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        sketch = _slots([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        assert float(mr_loss(photo, sketch, memory, "hard").data) == pytest.approx(0.5)

    @pytest.mark.parametrize(
        "sketch, expected",
        [
            ([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]], 0.0),
            ([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]], 0.5),
            ([[0.0, 1.0], [0.0, 1.0], [1.0, 0.0], [1.0, 0.0]], 1.0),
        ],
    )
    def test_soft_at_low_temperature_matches_hard(self, sketch, expected):
        memory = _dictionary(self.AXES)
        photo = _slots([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        hard = float(mr_loss(photo, _slots(sketch), memory, "hard").data)
        soft = float(mr_loss(photo, _slots(sketch), memory, "soft", tau=1e-3).data)
        assert hard == pytest.approx(expected)
        assert abs(soft - hard) <= 0.02

    def test_soft_is_differentiable(self, rng):
        memory = init_memory(5, 3, seed=0)
        photo = SlotSet(Tensor(rng.standard_normal((4, 3)), requires_grad=True), 2, 2)
        sketch = SlotSet(Tensor(rng.standard_normal((4, 3)), requires_grad=True), 2, 2)
        loss = mr_loss(photo, sketch, memory, "soft", tau=0.5)
        assert 0.0 <= float(loss.data) <= 1.0
        loss.backward()
        assert photo.slots.grad is not None and sketch.slots.grad is not None

    def test_slot_count_mismatch(self):
        memory = _dictionary(self.AXES)
        with pytest.raises(MemoryDictionaryError):
            mr_loss(_slots([[1.0, 0.0]]), _slots([[1.0, 0.0], [0.0, 1.0]]), memory, "hard")


class TestMemoryUsage:
    def test_dead_entries(self):
        memory = _dictionary([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        usage = memory_usage(memory, _slots([[1.0, 0.1], [0.9, 0.0]]))
        assert usage.hit_count == 1
        np.testing.assert_array_equal(usage.dead_indices, [1, 2])

    def test_update_is_logged(self, caplog):
        memory = _dictionary([[1.0, 0.0]], alpha=0.5)
        with caplog.at_level(logging.DEBUG, logger="mostnet.memory"):
            update_memory(memory, _slots([[0.0, 1.0]]), _slots([[0.0, 1.0]]))
        assert "touched 1 keys" in caplog.text
