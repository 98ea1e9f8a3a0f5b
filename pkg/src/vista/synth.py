"""Seeded synthetic scenarios: ground truth plus noisy multi-source predictions.

Makes the metric, NMS, and ensemble stages testable at desk scale without
any real dataset. Distributions carry no realism claims; they exist to
exercise the algorithms. Everything is deterministic under the seed via
the counter-based RNG.
"""

from __future__ import annotations

from dataclasses import dataclass

from .boxes import Box2D
from .errors import ValidationError
from .rng import CounterRng
from .types import GroundTruthInstance, PredictionSet, StaHypothesis, Taxonomy, sort_canonical

CANVAS_W = 1920.0
CANVAS_H = 1080.0
TTC_RANGE = (0.1, 3.0)


@dataclass(frozen=True)
class NoiseConfig:
    box_jitter_sigma: float = 0.0   # pixels, per corner
    label_flip_prob: float = 0.0
    verb_flip_prob: float = 0.0
    ttc_noise_sigma: float = 0.0    # seconds
    drop_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        problems = []
        for name in ("label_flip_prob", "verb_flip_prob", "drop_prob"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                problems.append(f"{name} must be in [0, 1], got {p}")
        for name in ("box_jitter_sigma", "ttc_noise_sigma"):
            s = getattr(self, name)
            if s < 0.0:
                problems.append(f"{name} must be >= 0, got {s}")
        if problems:
            raise ValidationError(problems)


def generate_scenario(
    n_examples: int,
    n_nouns: int,
    n_verbs: int,
    gts_per_example: int,
    seed: int,
) -> tuple[Taxonomy, list[GroundTruthInstance]]:
    """Random taxonomy and ground truth on a 1920x1080 canvas."""
    if min(n_examples, n_nouns, n_verbs, gts_per_example) < 1:
        raise ValidationError("all scenario counts must be >= 1")
    taxonomy = Taxonomy(
        noun_names=tuple(f"noun_{i:03d}" for i in range(n_nouns)),
        verb_names=tuple(f"verb_{i:03d}" for i in range(n_verbs)),
    )
    gts = []
    for ex in range(n_examples):
        rng = CounterRng(seed, stream=ex + 1)
        uid = f"ex_{ex:04d}"
        for _ in range(gts_per_example):
            w = rng.uniform(40.0, 400.0)
            h = rng.uniform(40.0, 300.0)
            x1 = rng.uniform(0.0, CANVAS_W - w)
            y1 = rng.uniform(0.0, CANVAS_H - h)
            gts.append(
                GroundTruthInstance(
                    example_uid=uid,
                    box=Box2D(x1, y1, x1 + w, y1 + h),
                    noun_id=rng.randint(n_nouns),
                    verb_id=rng.randint(n_verbs),
                    ttc=rng.uniform(*TTC_RANGE),
                )
            )
    return taxonomy, gts


def _flip_category(rng: CounterRng, current: int, n: int) -> int:
    """Uniformly random category different from `current` (needs n >= 2)."""
    return (current + 1 + rng.randint(n - 1)) % n


def perturb_to_predictions(
    taxonomy: Taxonomy,
    gts: list[GroundTruthInstance],
    noise: NoiseConfig,
    n_sources: int = 1,
) -> list[PredictionSet]:
    """One independently perturbed prediction set per source.

    Each ground truth gets Gaussian corner jitter, category flips to a
    uniformly random other id, Gaussian TTC noise clamped at 0, and a
    Bernoulli drop. Surviving predictions are scored 1 / (1 + distortion),
    so less-perturbed hypotheses rank higher; zero noise reproduces the
    ground truth with score exactly 1.0.
    """
    if n_sources < 1:
        raise ValidationError(f"n_sources must be >= 1, got {n_sources}")
    sources: list[PredictionSet] = []
    for s in range(n_sources):
        preds: PredictionSet = {}
        for gi, gt in enumerate(gts):
            rng = CounterRng(noise.seed, stream=((s + 1) << 32) ^ (gi + 1))
            if rng.uniform() < noise.drop_prob:
                continue
            jitter = [rng.gaussian(0.0, noise.box_jitter_sigma) for _ in range(4)]
            x1, x2 = sorted((gt.box.x1 + jitter[0], gt.box.x2 + jitter[2]))
            y1, y2 = sorted((gt.box.y1 + jitter[1], gt.box.y2 + jitter[3]))
            distortion = sum(abs(j) for j in jitter) / 100.0

            noun_id = gt.noun_id
            if rng.uniform() < noise.label_flip_prob and taxonomy.n_nouns > 1:
                noun_id = _flip_category(rng, noun_id, taxonomy.n_nouns)
                distortion += 1.0
            verb_id = gt.verb_id
            if rng.uniform() < noise.verb_flip_prob and taxonomy.n_verbs > 1:
                verb_id = _flip_category(rng, verb_id, taxonomy.n_verbs)
                distortion += 1.0

            ttc_delta = rng.gaussian(0.0, noise.ttc_noise_sigma)
            ttc = max(0.0, gt.ttc + ttc_delta)
            distortion += abs(ttc_delta)

            hyp = StaHypothesis(
                box=Box2D(x1, y1, x2, y2),
                noun_id=noun_id,
                verb_id=verb_id,
                ttc=ttc,
                score=1.0 / (1.0 + distortion),
                source_id=s,
            )
            preds.setdefault(gt.example_uid, []).append(hyp)
        for uid in preds:
            preds[uid] = sort_canonical(preds[uid])
        sources.append(preds)
    return sources
