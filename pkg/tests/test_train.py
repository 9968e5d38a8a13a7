import numpy as np
import pytest

from docking_attention.analysis import two_proportion_z_test
from docking_attention.attention import init_params
from docking_attention.config import DEFAULT_TOY, DEFAULT_TRAIN
from docking_attention.errors import TrainingDiverged, ValidationError
from docking_attention.train import (
    RunMetrics,
    TrainConfig,
    TrainResult,
    compare_runs,
    evaluate,
    format_history,
    make_toy_task,
    run_ablation_suite,
    train_daa_classifier,
    train_static_baseline,
)


def default_task():
    return make_toy_task(DEFAULT_TOY.n_samples, DEFAULT_TOY.n, DEFAULT_TOY.d, seed=0)


@pytest.fixture(scope="module")
def suite():
    return run_ablation_suite(default_task(), DEFAULT_TRAIN)


def metrics_only(name, correct, total):
    return TrainResult(
        name=name,
        params=None,
        head_weights=np.zeros(1),
        head_bias=0.0,
        history=[],
        metrics=RunMetrics(train_correct=0, train_total=1, test_correct=correct, test_total=total),
    )


class TestToyTask:
    def test_deterministic(self):
        a, b = make_toy_task(20, 6, 4, seed=3), make_toy_task(20, 6, 4, seed=3)
        np.testing.assert_array_equal(a.embeddings, b.embeddings)
        np.testing.assert_array_equal(a.scores, b.scores)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.test_idx, b.test_idx)

    def test_balanced_classes_in_both_splits(self):
        task = make_toy_task(30, 6, 4, seed=1)
        assert np.sum(task.labels == 0) == 15
        for split in ("train", "test"):
            _, _, y = task.split(split)
            assert set(y.tolist()) == {0, 1}
        assert len(set(task.train_idx) | set(task.test_idx)) == 30

    def test_high_score_marks_class(self):
        task = make_toy_task(40, 6, 4, seed=2)
        a, b = (i - 1 for i in task.signal_residues)
        hot = np.argmax(task.scores, axis=1)
        np.testing.assert_array_equal(hot, np.where(task.labels == 0, a, b))

    def test_samples_view(self):
        task = make_toy_task(8, 5, 3, seed=4)
        E, s, y = task.samples[0]
        assert E.values.shape == (5, 3)
        assert s.shape == (5,)
        assert y in (0, 1)

    @pytest.mark.parametrize("sizes", [(3, 6, 4), (7, 6, 4), (10, 3, 4), (10, 6, 1)])
    def test_invalid_sizes(self, sizes):
        with pytest.raises(ValidationError):
            make_toy_task(*sizes, seed=0)


class TestTrainConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(learning_rate=0.0, steps=10, seed=0),
            dict(learning_rate=0.1, steps=-1, seed=0),
            dict(learning_rate=0.1, steps=10, seed=0, l2=-1.0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            TrainConfig(**kwargs)


class TestTraining:
    def test_zero_steps_keeps_initial_params(self):
        task = default_task()
        config = TrainConfig(learning_rate=0.05, steps=0, seed=0)
        result = train_daa_classifier(task, config)
        initial = init_params(DEFAULT_TOY.d, config.d_h, config.d_v, seed=0)
        for name in ("w_q", "w_k", "w_v", "q_pool"):
            np.testing.assert_array_equal(getattr(result.params, name), getattr(initial, name))
        assert len(result.history) == 1
        assert abs(result.metrics.test_accuracy - 0.5) <= 0.15

    def test_zero_steps_static_is_chance(self):
        result = train_static_baseline(default_task(), TrainConfig(0.05, steps=0, seed=0))
        assert abs(result.metrics.test_accuracy - 0.5) <= 0.15

    def test_daa_separates(self, suite):
        assert suite["full"].metrics.test_accuracy >= 0.9

    def test_static_baseline_near_chance(self, suite):
        assert suite["static"].metrics.test_accuracy <= 0.65

    def test_separation_is_significant(self, suite):
        full, static = suite["full"], suite["static"]
        assert full.metrics.test_accuracy - static.metrics.test_accuracy >= 0.2
        assert compare_runs(full, static).z_test.significant

    def test_ablation_ordering(self, suite):
        full = suite["full"].metrics.test_accuracy
        assert full >= suite["standard"].metrics.test_accuracy
        assert full >= suite["docking"].metrics.test_accuracy

    def test_loss_non_increasing_over_windows(self, suite):
        losses = [row.loss for row in suite["full"].history]
        assert len(losses) == DEFAULT_TRAIN.steps + 1
        assert all(losses[t + 50] <= losses[t] + 1e-12 for t in range(len(losses) - 50))

    def test_small_steps_decrease_loss(self):
        config = TrainConfig(learning_rate=1e-3, steps=100, seed=0)
        losses = [row.loss for row in train_daa_classifier(default_task(), config).history]
        assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))

    def test_deterministic_history(self):
        config = TrainConfig(learning_rate=0.05, steps=30, seed=2)
        task = make_toy_task(40, 6, 4, seed=2)
        a = train_daa_classifier(task, config)
        b = train_daa_classifier(task, config)
        assert a.history == b.history

    def test_shuffled_labels_are_chance_for_static(self):
        task = default_task().with_shuffled_labels(seed=99)
        result = train_static_baseline(task, DEFAULT_TRAIN)
        assert abs(result.metrics.test_accuracy - 0.5) <= 0.15

    def test_evaluate_matches_metrics(self, suite):
        task = default_task()
        for result in suite.values():
            assert evaluate(result, task) == (result.metrics.test_correct, result.metrics.test_total)

    def test_beta_stays_in_range(self, suite):
        assert 0.0 <= suite["full"].params.beta <= 1.0

    def test_history_format(self, suite):
        lines = format_history(suite["static"]).splitlines()
        assert lines[:2] == ["# run static", "step\tloss\ttrain_acc\ttest_acc"]
        assert len(lines) == DEFAULT_TRAIN.steps + 3

    def test_huge_learning_rate_diverges(self):
        config = TrainConfig(learning_rate=1e300, steps=10, seed=0)
        with pytest.raises(TrainingDiverged) as info:
            train_daa_classifier(make_toy_task(20, 6, 4, seed=1), config)
        assert 1 <= info.value.step <= 10
        assert info.value.exit_code == 4

    def test_static_baseline_diverges_too(self):
        config = TrainConfig(learning_rate=1e300, steps=10, seed=0)
        with pytest.raises(TrainingDiverged):
            train_static_baseline(make_toy_task(20, 6, 4, seed=1), config)


class TestCompareRuns:
    def test_identical_runs(self):
        cmp = compare_runs(metrics_only("a", 70, 100), metrics_only("b", 70, 100))
        assert cmp.accuracy_delta == 0.0
        assert not cmp.z_test.significant

    def test_clear_difference(self):
        cmp = compare_runs(metrics_only("a", 90, 100), metrics_only("b", 55, 100))
        assert cmp.z_test.significant
        assert cmp.z_test.z == pytest.approx(two_proportion_z_test(90, 100, 55, 100).z)
        assert cmp.z_test.z > 5.0

    def test_small_difference(self):
        assert not compare_runs(metrics_only("a", 51, 100), metrics_only("b", 50, 100)).z_test.significant

    def test_mismatched_test_sets(self):
        with pytest.raises(ValidationError, match="different test sets"):
            compare_runs(metrics_only("a", 50, 100), metrics_only("b", 40, 80))
