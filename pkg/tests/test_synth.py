import pytest

from vista.errors import ValidationError
from vista.evaluation import EvalConfig, evaluate
from vista.rng import CounterRng, mix64
from vista.synth import (
    CANVAS_H,
    CANVAS_W,
    NoiseConfig,
    generate_scenario,
    perturb_to_predictions,
)


class TestCounterRng:
    def test_mix64_is_deterministic(self):
        assert mix64(0) == mix64(0)
        assert mix64(1) != mix64(2)

    def test_streams_are_independent(self):
        a = CounterRng(7, stream=1)
        b = CounterRng(7, stream=2)
        assert [a.next_u64() for _ in range(5)] != [b.next_u64() for _ in range(5)]

    def test_uniform_range(self):
        rng = CounterRng(1)
        values = [rng.uniform(2.0, 5.0) for _ in range(200)]
        assert all(2.0 <= v < 5.0 for v in values)

    def test_gaussian_moments_roughly_standard(self):
        rng = CounterRng(2)
        values = [rng.gaussian() for _ in range(4000)]
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        assert abs(mean) < 0.1
        assert abs(var - 1.0) < 0.15


class TestGenerateScenario:
    def test_same_seed_identical(self):
        a = generate_scenario(3, 4, 5, 2, seed=42)
        b = generate_scenario(3, 4, 5, 2, seed=42)
        assert a == b

    def test_counting(self):
        _, gts = generate_scenario(3, 2, 2, 2, seed=1)
        assert len(gts) == 6

    def test_different_seeds_differ(self):
        differing = 0
        for s in range(100):
            a = generate_scenario(2, 2, 2, 1, seed=s)[1]
            b = generate_scenario(2, 2, 2, 1, seed=s + 10_000)[1]
            if a != b:
                differing += 1
        assert differing == 100

    def test_boxes_inside_canvas_and_ttc_in_range(self):
        _, gts = generate_scenario(10, 4, 4, 3, seed=5)
        for gt in gts:
            assert 0 <= gt.box.x1 <= gt.box.x2 <= CANVAS_W
            assert 0 <= gt.box.y1 <= gt.box.y2 <= CANVAS_H
            assert 0.1 <= gt.ttc <= 3.0

    def test_counts_validated(self):
        with pytest.raises(ValidationError):
            generate_scenario(0, 1, 1, 1, seed=0)


class TestPerturbToPredictions:
    def test_zero_noise_identity_scores_100(self):
        taxonomy, gts = generate_scenario(4, 3, 3, 2, seed=8)
        preds = perturb_to_predictions(taxonomy, gts, NoiseConfig(seed=8), 1)[0]
        for hyps in preds.values():
            assert all(h.score == 1.0 for h in hyps)
        report = evaluate(preds, gts, EvalConfig())
        assert report.map_overall == 100.0

    def test_full_drop_empties_predictions(self):
        taxonomy, gts = generate_scenario(3, 2, 2, 2, seed=9)
        preds = perturb_to_predictions(taxonomy, gts, NoiseConfig(drop_prob=1.0, seed=9), 1)[0]
        assert preds == {}
        report = evaluate(preds, gts, EvalConfig())
        assert report.map_overall == 0.0

    def test_moderate_noise_degrades_overall(self):
        taxonomy, gts = generate_scenario(6, 3, 3, 2, seed=10)
        noise = NoiseConfig(box_jitter_sigma=20, label_flip_prob=0.2, seed=10)
        preds = perturb_to_predictions(taxonomy, gts, noise, 1)[0]
        report = evaluate(preds, gts, EvalConfig())
        assert report.map_overall < 100.0

    def test_deterministic_under_seed(self):
        taxonomy, gts = generate_scenario(3, 3, 3, 2, seed=11)
        noise = NoiseConfig(box_jitter_sigma=15, label_flip_prob=0.3, seed=11)
        a = perturb_to_predictions(taxonomy, gts, noise, 2)
        b = perturb_to_predictions(taxonomy, gts, noise, 2)
        assert a == b

    def test_sources_differ(self):
        taxonomy, gts = generate_scenario(3, 3, 3, 2, seed=12)
        noise = NoiseConfig(box_jitter_sigma=15, seed=12)
        sources = perturb_to_predictions(taxonomy, gts, noise, 2)
        stripped = [
            {uid: [(h.box, h.ttc) for h in hyps] for uid, hyps in src.items()} for src in sources
        ]
        assert stripped[0] != stripped[1]

    def test_ttc_noise_only_affects_ttc_variants(self):
        taxonomy, gts = generate_scenario(5, 3, 3, 2, seed=13)
        quiet = perturb_to_predictions(taxonomy, gts, NoiseConfig(seed=13), 1)[0]
        noisy = perturb_to_predictions(
            taxonomy, gts, NoiseConfig(ttc_noise_sigma=0.5, seed=13), 1
        )[0]
        a = evaluate(quiet, gts, EvalConfig())
        b = evaluate(noisy, gts, EvalConfig())
        assert b.map_noun == a.map_noun
        assert b.map_noun_ttc <= a.map_noun_ttc

    def test_invalid_noise_rejected(self):
        with pytest.raises(ValidationError):
            NoiseConfig(drop_prob=1.5)
        with pytest.raises(ValidationError):
            NoiseConfig(box_jitter_sigma=-1)
