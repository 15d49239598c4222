import json

import numpy as np
import pytest

from mostnet.container import (
    FORMAT_VERSION,
    decode_records,
    encode_records,
    read_container,
    write_container,
)
from mostnet.core import Tensor
from mostnet.data import gen_synthetic_pairs, read_png, save_dataset, write_png
from mostnet.errors import (
    CheckpointError,
    ConfigError,
    NonFiniteLossError,
    ReportError,
    ShapeMismatchError,
)
from mostnet.evaluation import mean_l1, ssim
from mostnet.losses import LossWeights
from mostnet.training import (
    CHECKPOINT_NAME,
    METRIC_NAMES,
    Adam,
    TrainConfig,
    batch_indices,
    create_state,
    generate,
    infer,
    load_checkpoint,
    read_metrics,
    resume,
    sample_grid,
    save_checkpoint,
    train,
    train_from_dir,
    train_step,
    write_metrics,
)
from mostnet.training.samples import PADDING


def _weighted_sum(metrics, weights: LossWeights) -> float:
    return sum(metrics[name] * value for name, value in weights.to_dict().items() if value)


class TestConfig:
    def test_defaults(self):
        config = TrainConfig()
        assert (config.lr_g, config.lr_d) == (4.0e-4, 1.0e-3)
        assert config.betas == (0.9, 0.999)
        assert (config.alpha, config.tau, config.memory_size) == (0.999, 0.1, 512)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"lr_g": 0.0},
            {"betas": (0.9, 1.0)},
            {"alpha": 1.5},
            {"tau": 0.0},
            {"batch_size": 0},
            {"epochs": 0},
            {"log_every": -1},
            {"content_target": "edges"},
        ],
    )
    def test_invalid_values(self, make_config, overrides):
        with pytest.raises(ConfigError):
            make_config(**overrides)

    def test_effective_weights(self, make_config):
        assert make_config().effective_weights.memory_refinement == 10.0
        weights = make_config(mr_loss_enabled=False).effective_weights
        assert weights.memory_refinement == 0.0
        assert weights.reconstruction == 200.0

    def test_dict_round_trip(self, make_config):
        config = make_config(tau=0.5, weights=LossWeights(style=3.0))
        assert TrainConfig.from_dict(config.to_dict()) == config

    def test_json_round_trip(self, make_config):
        config = make_config(epochs=3)
        restored = TrainConfig.from_dict(json.loads(json.dumps(config.to_dict())))
        assert restored == config

    def test_unknown_keys(self):
        with pytest.raises(ConfigError, match="learning_rate"):
            TrainConfig.from_dict({"learning_rate": 0.1})

    def test_steps(self, make_config):
        config = make_config(batch_size=4)
        assert config.steps_per_epoch(8) == 2
        assert config.steps_per_epoch(9) == 3
        assert config.total_steps(9) == config.steps
        assert make_config(batch_size=4, epochs=2).total_steps(9) == 6


class TestAdam:
    def test_matches_scalar_reference(self):
        lr, beta1, beta2, eps = 0.01, 0.9, 0.999, 1e-8
        values = np.array([0.5, -1.5, 2.0])
        param = Tensor(values.copy(), dtype=np.float64, requires_grad=True)
        optimizer = Adam({"p": param}, lr, (beta1, beta2), eps)

        expected = values.copy()
        m = np.zeros(3)
        v = np.zeros(3)
        for t in range(1, 11):
            grad = 2.0 * expected + np.sin(t)
            param.grad = 2.0 * param.data + np.sin(t)
            optimizer.step()

            m = beta1 * m + (1 - beta1) * grad
            v = beta2 * v + (1 - beta2) * grad**2
            m_hat = m / (1 - beta1**t)
            v_hat = v / (1 - beta2**t)
            expected = expected - lr * m_hat / (np.sqrt(v_hat) + eps)

        np.testing.assert_allclose(param.data, expected, rtol=0, atol=1e-7)

    def test_parameters_without_gradient_are_untouched(self):
        a = Tensor([1.0], requires_grad=True)
        b = Tensor([1.0], requires_grad=True)
        optimizer = Adam({"a": a, "b": b}, lr=0.1)
        a.grad = np.array([1.0], dtype=np.float32)
        optimizer.step()

        assert a.data[0] < 1.0
        assert b.data[0] == 1.0
        assert optimizer.t == {"a": 1, "b": 0}

    def test_state_round_trip(self):
        param = Tensor([1.0, 2.0], requires_grad=True)
        optimizer = Adam({"w": param}, lr=0.1)
        param.grad = np.array([0.5, -0.5], dtype=np.float32)
        optimizer.step()

        other = Adam({"w": Tensor([1.0, 2.0], requires_grad=True)}, lr=0.1)
        other.load_state_dict(optimizer.state_dict())
        np.testing.assert_array_equal(other.m["w"], optimizer.m["w"])
        np.testing.assert_array_equal(other.v["w"], optimizer.v["w"])
        assert other.t["w"] == 1

    def test_state_with_missing_entry(self):
        optimizer = Adam({"w": Tensor([1.0], requires_grad=True)}, lr=0.1)
        with pytest.raises(CheckpointError, match="w.m"):
            optimizer.load_state_dict({})


class TestContainer:
    def test_round_trip(self, tmp_path):
        records = {
            "f4": np.arange(6, dtype=np.float32).reshape(2, 3),
            "f8": np.array([np.pi]),
            "i8": np.array(7, dtype=np.int64),
            "u1": np.frombuffer(b"text", dtype=np.uint8),
            "empty": np.zeros((0, 4)),
        }
        write_container(tmp_path / "x.mnet", records)
        restored = read_container(tmp_path / "x.mnet")

        assert list(restored) == list(records)
        for name, array in records.items():
            assert restored[name].dtype == array.dtype
            np.testing.assert_array_equal(restored[name], array)

    def test_version_mismatch(self):
        buffer = encode_records({"a": np.zeros(2)}, version=FORMAT_VERSION + 1)
        with pytest.raises(CheckpointError) as info:
            decode_records(buffer)
        assert f"version {FORMAT_VERSION + 1}" in str(info.value)
        assert f"version {FORMAT_VERSION}" in str(info.value)

    def test_truncated(self):
        buffer = encode_records({"a": np.zeros(4)})
        with pytest.raises(CheckpointError, match="truncated"):
            decode_records(buffer[:-3])

    def test_bad_magic(self):
        buffer = encode_records({"a": np.zeros(4)})
        with pytest.raises(CheckpointError, match="not a mostnet container"):
            decode_records(b"XXXXXXXX" + buffer[8:])

    def test_trailing_bytes(self):
        buffer = encode_records({"a": np.zeros(4)})
        with pytest.raises(CheckpointError, match="1 unexpected trailing bytes"):
            decode_records(buffer + b"\x00")

    def test_unsupported_dtype(self):
        with pytest.raises(CheckpointError, match="complex"):
            encode_records({"z": np.zeros(2, dtype=np.complex128)})

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(CheckpointError, match="Cannot write"):
            write_container(blocker / "x.mnet", {"a": np.zeros(2)})

    def test_metrics_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(ReportError, match="Cannot write"):
            write_metrics([], blocker / "metrics.csv")

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError, match="does not exist"):
            read_container(tmp_path / "absent.mnet")


class TestTrainStep:
    def test_deterministic(self, config, pairs):
        photos, sketches = pairs.stack([0, 1])
        first = train_step(create_state(config), photos, sketches)
        second = train_step(create_state(config), photos, sketches)
        assert first == second
        assert list(first) == list(METRIC_NAMES)
        assert first["step"] == 1.0

    def test_total_is_the_weighted_sum(self, config, pairs):
        metrics = train_step(create_state(config), *pairs.stack([0, 1]))
        expected = _weighted_sum(metrics, config.weights)
        assert metrics["total"] == pytest.approx(expected, rel=1e-12)
        assert 0.0 <= metrics["mr_hard"] <= 1.0

    def test_disabled_memory_refinement(self, make_config, pairs):
        config = make_config(mr_loss_enabled=False)
        state = create_state(config)
        metrics = train_step(state, *pairs.stack([0, 1]))

        assert np.isfinite(metrics["memory_refinement"])
        expected = _weighted_sum(metrics, config.effective_weights)
        assert metrics["total"] == pytest.approx(expected, rel=1e-12)

        params = state.generator.sketch_encoder.parameters()
        assert params
        for name, param in params.items():
            assert param.grad is None or not np.any(param.grad), name

    def test_memory_refinement_trains_the_sketch_encoder(self, config, pairs):
        state = create_state(config)
        train_step(state, *pairs.stack([0, 1]))
        grads = [p.grad for p in state.generator.sketch_encoder.parameters().values()]
        assert any(grad is not None and np.any(grad) for grad in grads)

    @pytest.mark.parametrize(
        "weights, tracked",
        [
            (LossWeights(style=0.0, content=0.0), False),
            (LossWeights(), True),
        ],
    )
    def test_zero_perceptual_weights_stay_out_of_the_graph(
        self, monkeypatch, make_config, pairs, weights, tracked
    ):
        state = create_state(make_config(weights=weights))
        features = state.extractor.features
        recorded = []

        def recording_features(image, level):
            out = features(image, level)
            recorded.append(out.requires_grad)
            return out

        monkeypatch.setattr(state.extractor, "features", recording_features)
        metrics = train_step(state, *pairs.stack([0, 1]))

        assert recorded
        assert any(recorded) is tracked
        assert np.isfinite(metrics["style"]) and np.isfinite(metrics["content"])
        assert metrics["total"] == pytest.approx(_weighted_sum(metrics, weights), rel=1e-12)

    def test_updates_networks_and_memory(self, config, pairs):
        state = create_state(config)
        memory = state.memory.copy()
        output = state.generator.parameters()["decoder.output.weight"]
        score = state.discriminator.parameters()["score.weight"]
        output_before, score_before = output.data.copy(), score.data.copy()

        train_step(state, *pairs.stack([0, 1]))

        assert state.step == 1
        assert not state.memory.equals(memory)
        assert not np.array_equal(output.data, output_before)
        assert not np.array_equal(score.data, score_before)
        assert all(p.grad is None for p in state.discriminator.parameters().values())

    def test_non_finite_loss(self, config, pairs):
        state = create_state(config)
        state.generator.parameters()["decoder.output.bias"].data[...] = np.nan
        with pytest.raises(NonFiniteLossError) as info:
            train_step(state, *pairs.stack([0, 1]))
        assert info.value.component == "discriminator"


class TestBatchIndices:
    def test_epoch_visits_every_pair_once(self, make_config):
        config = make_config(batch_size=2)
        indices = np.concatenate([batch_indices(config, 5, step) for step in range(3)])
        assert sorted(indices) == [0, 1, 2, 3, 4]

    def test_depends_on_seed_and_step_only(self, make_config):
        config = make_config(batch_size=2, seed=3)
        np.testing.assert_array_equal(
            batch_indices(config, 7, 9), batch_indices(make_config(batch_size=2, seed=3), 7, 9)
        )


class TestTrain:
    def test_epochs(self, make_config):
        dataset = gen_synthetic_pairs(8, 32, seed=0)
        state = train(make_config(batch_size=4, epochs=1), dataset)
        assert state.step == 2
        assert len(state.metrics) == 2

    def test_identical_seeds_give_identical_traces(self, make_config, pairs):
        config = make_config(steps=10)
        first = train(config, pairs).metrics
        second = train(config, pairs).metrics
        assert len(first) == 10
        assert first == second

    def test_resume_matches_an_uninterrupted_run(self, tmp_path, make_config, pairs):
        uninterrupted = train(make_config(steps=4), pairs)

        train(make_config(steps=2), pairs, out_dir=tmp_path)
        state = load_checkpoint(tmp_path / CHECKPOINT_NAME, config=make_config(steps=4))
        resumed = train(state.config, pairs, state=state)

        assert resumed.metrics == uninterrupted.metrics
        assert resumed.memory.equals(uninterrupted.memory)
        for name, param in resumed.generator.parameters().items():
            np.testing.assert_array_equal(
                param.data, uninterrupted.generator.parameters()[name].data
            )

    def test_resume_from_stored_config(self, tmp_path, make_config, pairs):
        train(make_config(steps=2), pairs, out_dir=tmp_path)
        state = resume(tmp_path / CHECKPOINT_NAME, pairs)
        assert state.step == 2
        assert len(state.metrics) == 2

    def test_from_directory(self, tmp_path, make_config, pairs):
        save_dataset(pairs, tmp_path / "data")
        state = train_from_dir(
            make_config(steps=2), tmp_path / "data", tmp_path / "run", progress=False
        )
        assert state.step == 2
        assert (tmp_path / "run" / CHECKPOINT_NAME).exists()

        resumed = train_from_dir(
            None,
            tmp_path / "data",
            tmp_path / "run",
            checkpoint=tmp_path / "run" / CHECKPOINT_NAME,
            progress=False,
        )
        assert resumed.step == 2
        assert len(resumed.metrics) == 2

    def test_from_directory_needs_a_config(self, tmp_path, pairs):
        save_dataset(pairs, tmp_path / "data")
        with pytest.raises(ConfigError, match="checkpoint"):
            train_from_dir(None, tmp_path / "data", tmp_path / "run", progress=False)

    def test_outputs(self, tmp_path, make_config, pairs):
        state = train(make_config(steps=2, sample_every=2), pairs, out_dir=tmp_path)

        assert read_metrics(tmp_path / "metrics.csv") == state.metrics
        grid = read_png(tmp_path / "samples" / "step_000002.png")
        assert grid.shape == (3, 3 * 32 + 4 * PADDING, 4 * 32 + 5 * PADDING)
        assert (tmp_path / CHECKPOINT_NAME).exists()

    def test_empty_dataset(self, config):
        from mostnet.data import Dataset
        from mostnet.errors import DatasetError

        with pytest.raises(DatasetError):
            train(config, Dataset())


class TestCheckpoint:
    def test_round_trip(self, tmp_path, config, pairs):
        state = train(config, pairs)
        path = tmp_path / "state.mnet"
        save_checkpoint(state, path)
        restored = load_checkpoint(path)

        assert restored.config == state.config
        assert restored.step == state.step
        assert restored.metrics == state.metrics
        np.testing.assert_array_equal(restored.memory.keys, state.memory.keys)
        np.testing.assert_array_equal(restored.memory.values, state.memory.values)
        for module in ("generator", "discriminator"):
            original = getattr(state, module).parameters()
            for name, param in getattr(restored, module).parameters().items():
                assert param.dtype == original[name].dtype
                np.testing.assert_array_equal(param.data, original[name].data)
        for name in state.opt_g.m:
            np.testing.assert_array_equal(restored.opt_g.m[name], state.opt_g.m[name])
            assert restored.opt_g.t[name] == state.opt_g.t[name]

    def test_truncated_file(self, tmp_path, config):
        path = tmp_path / "state.mnet"
        save_checkpoint(create_state(config), path)
        path.write_bytes(path.read_bytes()[:-100])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_memory_size_mismatch(self, tmp_path, config, make_config):
        path = tmp_path / "state.mnet"
        save_checkpoint(create_state(config), path)
        with pytest.raises(CheckpointError, match="memory of shape"):
            load_checkpoint(path, config=make_config(memory_size=32))

    def test_network_mismatch(self, tmp_path, config, make_config):
        path = tmp_path / "state.mnet"
        save_checkpoint(create_state(config), path)
        with pytest.raises(CheckpointError, match="networks"):
            load_checkpoint(path, config=make_config(discriminator_channels=8))


class TestInference:
    def test_infer_directory(self, tmp_path, config, pairs):
        save_checkpoint(train(config, pairs), tmp_path / CHECKPOINT_NAME)
        save_dataset(pairs, tmp_path / "data")

        written = infer(tmp_path / CHECKPOINT_NAME, tmp_path / "data" / "photos", tmp_path / "a")
        assert [path.name for path in written] == [f"{name}.png" for name in pairs.names]

        for path in written:
            sketch = read_png(path)
            assert sketch.shape == (1, 32, 32)
            assert sketch.min() >= 0.0 and sketch.max() <= 1.0

        again = infer(tmp_path / CHECKPOINT_NAME, tmp_path / "data" / "photos", tmp_path / "b")
        for first, second in zip(written, again):
            assert first.read_bytes() == second.read_bytes()

    def test_generate_leaves_memory_untouched(self, config, pairs):
        state = create_state(config)
        memory = state.memory.copy()
        photos, _ = pairs.stack()
        out = generate(state, photos)
        assert out.shape == (4, 1, 32, 32)
        assert state.memory.equals(memory)

    def test_gray_photo_files(self, tmp_path, config):
        save_checkpoint(create_state(config), tmp_path / CHECKPOINT_NAME)
        write_png(tmp_path / "photos" / "gray.png", np.full((1, 32, 32), 0.3))
        written = infer(tmp_path / CHECKPOINT_NAME, tmp_path / "photos", tmp_path / "out")
        assert read_png(written[0]).shape == (1, 32, 32)


class TestSampleGrid:
    def test_layout(self):
        photos = np.zeros((2, 3, 4, 4))
        fakes = np.full((2, 1, 4, 4), 0.25)
        reals = np.full((2, 1, 4, 4), 0.5)
        grid = sample_grid(photos, fakes, reals)

        assert grid.shape == (3, 3 * 4 + 4 * PADDING, 2 * 4 + 3 * PADDING)
        assert np.all(grid[:, :PADDING] == 1.0)
        np.testing.assert_array_equal(grid[:, PADDING : PADDING + 4, PADDING : PADDING + 4], 0.0)
        top = 2 * PADDING + 4
        np.testing.assert_array_equal(grid[:, top : top + 4, PADDING : PADDING + 4], 0.25)

    def test_row_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            sample_grid(np.zeros((2, 3, 4, 4)), np.zeros((1, 1, 4, 4)), np.zeros((2, 1, 4, 4)))


@pytest.fixture(scope="module")
def overfit_runs():
    dataset = gen_synthetic_pairs(8, 64, seed=0)
    runs = {}
    for enabled in (True, False):
        config = TrainConfig(batch_size=4, steps=2000, mr_loss_enabled=enabled, log_every=0)
        runs[enabled] = train(config, dataset)
    return dataset, runs


@pytest.mark.slow
class TestOverfit:
    def test_memorizes_the_training_pairs(self, overfit_runs):
        dataset, runs = overfit_runs
        photos, sketches = dataset.stack()
        state = runs[True]

        fakes = []
        for i in range(0, len(dataset), 4):
            fakes.append(generate(state, photos[i : i + 4]))
        fakes = np.concatenate(fakes)

        assert np.mean([mean_l1(f, s) for f, s in zip(fakes, sketches)]) <= 0.08
        assert np.mean([ssim(f, s) for f, s in zip(fakes, sketches)]) >= 0.6

    def test_photo_only_inference_retrieves_sketch_features(self, overfit_runs):
        dataset, runs = overfit_runs
        photos, sketches = dataset.stack()
        fakes = generate(runs[True], photos)
        assert np.mean([ssim(f, s) for f, s in zip(fakes, sketches)]) >= 0.5

    def test_memory_refinement_lowers_disagreement(self, overfit_runs):
        _, runs = overfit_runs
        tail = {
            enabled: np.mean([row["mr_hard"] for row in state.metrics[-50:]])
            for enabled, state in runs.items()
        }
        assert tail[True] < tail[False]
