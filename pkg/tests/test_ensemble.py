import pytest

from vista.boxes import Box2D
from vista.ensemble import (
    EnsembleConfig,
    HypothesisGroup,
    compatible,
    ensemble_predictions,
    group_hypotheses,
    merge_group,
)
from vista.errors import ValidationError
from vista.rng import CounterRng
from vista.types import StaHypothesis


def hyp(x1=0.0, y1=0.0, x2=10.0, y2=10.0, noun=0, verb=0, ttc=1.0, score=0.5, source=None):
    return StaHypothesis(
        box=Box2D(x1, y1, x2, y2), noun_id=noun, verb_id=verb, ttc=ttc, score=score,
        source_id=source,
    )


def random_hyp(rng, n_nouns=3, n_verbs=3, source=None):
    x1 = rng.uniform(0, 300)
    y1 = rng.uniform(0, 300)
    return StaHypothesis(
        box=Box2D(x1, y1, x1 + rng.uniform(10, 100), y1 + rng.uniform(10, 100)),
        noun_id=rng.randint(n_nouns),
        verb_id=rng.randint(n_verbs),
        ttc=rng.uniform(0.1, 3.0),
        score=rng.uniform(0.01, 1.0),
        source_id=source,
    )


class TestCompatible:
    def test_identical(self):
        a = hyp()
        assert compatible(a, a)

    def test_ttc_threshold(self):
        a = hyp(ttc=1.0)
        b = hyp(ttc=1.3)
        assert not compatible(a, b)
        assert compatible(a, hyp(ttc=1.25))

    def test_verb_is_a_grouping_key(self):
        assert not compatible(hyp(verb=0), hyp(verb=1))

    def test_noun_is_a_grouping_key(self):
        assert not compatible(hyp(noun=0), hyp(noun=1))

    def test_box_overlap_threshold(self):
        assert not compatible(hyp(), hyp(x1=8, x2=18))


class TestGroupHypotheses:
    def test_all_compatible_single_group(self):
        hyps = [hyp(score=s, source=i) for i, s in enumerate((0.9, 0.6, 0.3))]
        groups = group_hypotheses(hyps)
        assert len(groups) == 1
        assert len(groups[0].members) == 3
        assert groups[0].seed.score == 0.9

    def test_disjoint_clusters_split(self):
        hyps = [hyp(), hyp(x1=100, x2=110, y1=100, y2=110)]
        assert len(group_hypotheses(hyps)) == 2

    def test_seed_anchored_not_transitive(self):
        # A~B and B~C but A and C overlap too little; grouping is tested
        # against the seed A, so C falls into its own group.
        a = hyp(x1=0, x2=10, score=0.9)
        b = hyp(x1=4, x2=14, score=0.6)
        c = hyp(x1=8, x2=18, score=0.3)
        cfg = EnsembleConfig(box_iou_min=0.3)
        assert compatible(a, b, cfg) and compatible(b, c, cfg) and not compatible(a, c, cfg)
        groups = group_hypotheses([a, b, c], cfg)
        assert [len(g.members) for g in groups] == [2, 1]
        assert groups[0].seed == a
        assert groups[1].seed == c

    def test_partition_property(self):
        for seed in range(20):
            rng = CounterRng(2000 + seed)
            hyps = [random_hyp(rng) for _ in range(30)]
            groups = group_hypotheses(hyps)
            assert sum(len(g.members) for g in groups) == len(hyps)


class TestMergeGroup:
    def test_singleton_identity(self):
        h = hyp(score=0.7, source=0)
        cfg = EnsembleConfig(n_sources=1)
        merged = merge_group(HypothesisGroup(members=(h,), seed_index=0), cfg)
        assert merged == h

    def test_equal_weight_corner_average(self):
        a = hyp(x1=0, y1=0, x2=2, y2=2, score=0.5, source=0)
        b = hyp(x1=0, y1=0, x2=4, y2=4, score=0.5, source=0)
        merged = merge_group(HypothesisGroup(members=(a, b), seed_index=0))
        assert merged.box == Box2D(0, 0, 3, 3)

    def test_weighted_ttc_mean(self):
        a = hyp(ttc=1.0, score=0.6, source=0)
        b = hyp(ttc=2.0, score=0.2, source=0)
        merged = merge_group(HypothesisGroup(members=(a, b), seed_index=0))
        assert merged.ttc == pytest.approx(1.25)

    def test_agreement_factor_monotone_in_sources(self):
        a = hyp(score=0.5, source=0)
        b = hyp(score=0.5, source=0)
        c = hyp(score=0.5, source=1)
        cfg = EnsembleConfig(n_sources=2)
        same_source = merge_group(HypothesisGroup(members=(a, b), seed_index=0), cfg)
        cross_source = merge_group(HypothesisGroup(members=(a, c), seed_index=0), cfg)
        assert cross_source.score > same_source.score

    def test_convex_hull_property(self):
        for seed in range(20):
            rng = CounterRng(3000 + seed)
            base = random_hyp(rng, source=0)
            members = [base]
            for s in range(1, 4):
                members.append(
                    StaHypothesis(
                        box=Box2D(
                            base.box.x1 + rng.uniform(-2, 2),
                            base.box.y1 + rng.uniform(-2, 2),
                            base.box.x2 + rng.uniform(-2, 2),
                            base.box.y2 + rng.uniform(-2, 2),
                        ),
                        noun_id=base.noun_id,
                        verb_id=base.verb_id,
                        ttc=max(0.0, base.ttc + rng.uniform(-0.2, 0.2)),
                        score=rng.uniform(0.01, 1.0),
                        source_id=s,
                    )
                )
            members.sort(key=lambda h: -h.score)
            merged = merge_group(
                HypothesisGroup(members=tuple(members), seed_index=0),
                EnsembleConfig(n_sources=4),
            )
            for i in range(4):
                corners = [m.box.corners()[i] for m in members]
                assert min(corners) - 1e-9 <= merged.box.corners()[i] <= max(corners) + 1e-9
            assert min(m.ttc for m in members) - 1e-9 <= merged.ttc
            assert merged.ttc <= max(m.ttc for m in members) + 1e-9

    def test_empty_group_rejected(self):
        with pytest.raises((ValidationError, IndexError)):
            merge_group(HypothesisGroup(members=(), seed_index=0))


class TestEnsemblePredictions:
    def make_source(self, seed, n_examples=3, per_example=4):
        rng = CounterRng(seed)
        out = {}
        for e in range(n_examples):
            out[f"ex_{e}"] = sorted(
                (random_hyp(rng) for _ in range(per_example)), key=lambda h: -h.score
            )
        return out

    def test_identical_sources_preserve_ranking(self):
        src = self.make_source(40)
        single = ensemble_predictions([src])
        tripled = ensemble_predictions([src, src, src])
        for uid in single:
            assert [(h.noun_id, h.verb_id) for h in single[uid]] == [
                (h.noun_id, h.verb_id) for h in tripled[uid]
            ]
            for a, b in zip(single[uid], tripled[uid]):
                # duplicate members re-average the corners, so allow float noise
                assert a.box.corners() == pytest.approx(b.box.corners(), abs=1e-9)

    def test_disagreeing_nouns_both_survive(self):
        a = {"ex": [hyp(noun=0, score=0.8)]}
        b = {"ex": [hyp(noun=1, score=0.6)]}
        merged = ensemble_predictions([a, b])
        assert len(merged["ex"]) == 2
        assert {h.noun_id for h in merged["ex"]} == {0, 1}

    def test_source_order_invariance(self):
        a = self.make_source(41)
        b = self.make_source(42)
        ab = ensemble_predictions([a, b])
        # swapping sources relabels source_id, so compare everything else
        ba = ensemble_predictions([b, a])
        for uid in ab:
            assert [
                (h.box, h.noun_id, h.verb_id, round(h.ttc, 12), round(h.score, 12))
                for h in ab[uid]
            ] == [
                (h.box, h.noun_id, h.verb_id, round(h.ttc, 12), round(h.score, 12))
                for h in ba[uid]
            ]

    def test_uid_union(self):
        a = {"only_a": [hyp()]}
        b = {"only_b": [hyp()]}
        merged = ensemble_predictions([a, b])
        assert set(merged) == {"only_a", "only_b"}

    def test_needs_at_least_one_source(self):
        with pytest.raises(ValidationError):
            ensemble_predictions([])
