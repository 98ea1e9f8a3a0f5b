"""Raw head outputs -> ranked, NMS-filtered, export-ready hypotheses.

The inference chain: cap proposals by objectness, expand each retained
proposal into its top noun/verb pairs with a class-specific refined box
and a softplus TTC, rank everything by the product of objectness,
interaction quality, noun probability and verb probability, suppress
per-noun-class duplicates, and truncate to the export cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxes import Box2D, iou
from .errors import ValidationError
from .types import StaHypothesis, Taxonomy, canonical_key, sort_canonical

# Conventional clamp on log-size deltas so exp() cannot blow up boxes.
BOX_DELTA_CLAMP = math.log(1000.0 / 16.0)


@dataclass(frozen=True)
class InferenceConfig:
    max_proposals: int = 300
    k_noun: int = 3
    k_verb: int = 3
    nms_iou: float = 0.5
    max_exports: int = 100

    def __post_init__(self):
        problems = []
        if self.max_proposals < 1:
            problems.append(f"max_proposals must be >= 1, got {self.max_proposals}")
        if self.k_noun < 1 or self.k_verb < 1:
            problems.append(f"expansion widths must be >= 1, got {self.k_noun}/{self.k_verb}")
        if not (0.0 < self.nms_iou):
            problems.append(f"nms_iou must be positive, got {self.nms_iou}")
        if self.max_exports < 1:
            problems.append(f"max_exports must be >= 1, got {self.max_exports}")
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class ProposalRecord:
    """Per-proposal head outputs, before any post-processing."""

    proposal_box: Box2D
    objectness: float          # (0, 1]
    noun_logits: np.ndarray    # (n_nouns,)
    verb_logits: np.ndarray    # (n_verbs,)
    box_deltas: np.ndarray     # (n_nouns, 4): dx, dy, dw, dh per noun class
    ttc_raw: float
    quality: float             # (0, 1]

    def __post_init__(self):
        problems = []
        if not (0.0 < self.objectness <= 1.0):
            problems.append(f"objectness must be in (0, 1], got {self.objectness}")
        if not (0.0 < self.quality <= 1.0):
            problems.append(f"quality must be in (0, 1], got {self.quality}")
        if not math.isfinite(self.ttc_raw):
            problems.append(f"ttc_raw must be finite, got {self.ttc_raw}")
        for name in ("noun_logits", "verb_logits", "box_deltas"):
            if not np.all(np.isfinite(getattr(self, name))):
                problems.append(f"{name} contains non-finite values")
        if self.box_deltas.shape != (len(self.noun_logits), 4):
            problems.append(
                f"box_deltas shape {self.box_deltas.shape} != "
                f"({len(self.noun_logits)}, 4)"
            )
        if problems:
            raise ValidationError(problems)


def softmax(logits) -> np.ndarray:
    """Stable softmax (max-subtracted) over a 1-D logit vector."""
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"softmax needs a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("softmax input contains non-finite values")
    shifted = np.exp(arr - arr.max())
    return shifted / shifted.sum()


def ttc_from_raw(raw: float) -> float:
    """Softplus: ln(1 + e^raw), overflow-safe, always >= 0."""
    if not math.isfinite(raw):
        raise ValidationError(f"ttc_raw must be finite, got {raw}")
    # log1p(exp(-|raw|)) + max(raw, 0) never overflows.
    return max(raw, 0.0) + math.log1p(math.exp(-abs(raw)))


def apply_box_deltas(proposal: Box2D, deltas) -> Box2D:
    """Decode (dx, dy, dw, dh) against a proposal: center shifts scale with
    the proposal size, sizes scale by exp of the clamped log deltas."""
    if proposal.width <= 0.0 or proposal.height <= 0.0:
        raise ValidationError(f"proposal must have positive size, got {proposal.corners()}")
    dx, dy, dw, dh = (float(d) for d in deltas)
    cx, cy = proposal.center
    w, h = proposal.width, proposal.height
    cx += dx * w
    cy += dy * h
    w *= math.exp(min(dw, BOX_DELTA_CLAMP))
    h *= math.exp(min(dh, BOX_DELTA_CLAMP))
    return Box2D(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h)


def expand_hypotheses(
    proposals: list[ProposalRecord],
    taxonomy: Taxonomy,
    cfg: InferenceConfig = InferenceConfig(),
) -> list[StaHypothesis]:
    """Expand each retained proposal into its top noun x verb pairs.

    Proposals beyond cfg.max_proposals are dropped, lowest objectness
    first. Each hypothesis carries the noun-specific refined box,
    ttc = softplus(ttc_raw), and
    score = objectness * quality * p_noun * p_verb.
    Output sorted canonically.
    """
    if taxonomy.n_nouns == 0 or taxonomy.n_verbs == 0:
        raise ValidationError("taxonomy must be non-empty")
    retained = sorted(proposals, key=lambda p: -p.objectness)[: cfg.max_proposals]
    k_noun = min(cfg.k_noun, taxonomy.n_nouns)
    k_verb = min(cfg.k_verb, taxonomy.n_verbs)

    hyps = []
    for prop in retained:
        if len(prop.noun_logits) != taxonomy.n_nouns or len(prop.verb_logits) != taxonomy.n_verbs:
            raise ValidationError(
                f"logit lengths ({len(prop.noun_logits)}, {len(prop.verb_logits)}) do not "
                f"match taxonomy ({taxonomy.n_nouns}, {taxonomy.n_verbs})"
            )
        p_noun = softmax(prop.noun_logits)
        p_verb = softmax(prop.verb_logits)
        # Stable argsort so probability ties resolve to the lower class id.
        top_nouns = np.argsort(-p_noun, kind="stable")[:k_noun]
        top_verbs = np.argsort(-p_verb, kind="stable")[:k_verb]
        ttc = ttc_from_raw(prop.ttc_raw)
        for ni in top_nouns:
            refined = apply_box_deltas(prop.proposal_box, prop.box_deltas[ni])
            for vi in top_verbs:
                score = prop.objectness * prop.quality * p_noun[ni] * p_verb[vi]
                hyps.append(
                    StaHypothesis(
                        box=refined,
                        noun_id=int(ni),
                        verb_id=int(vi),
                        ttc=ttc,
                        score=float(score),
                    )
                )
    return sort_canonical(hyps)


def class_aware_nms(hyps: list[StaHypothesis], nms_iou: float = 0.5) -> list[StaHypothesis]:
    """Greedy suppression run independently within each noun class.

    A hypothesis is dropped when a higher-ranked kept hypothesis of the
    same noun class overlaps it with IoU > nms_iou. Verb is not part of
    the suppression key. Input is re-sorted canonically; output preserves
    that order and is always a subset of the input.
    """
    ordered = sort_canonical(hyps)
    kept_per_noun: dict[int, list[StaHypothesis]] = {}
    out = []
    for h in ordered:
        kept = kept_per_noun.setdefault(h.noun_id, [])
        if any(iou(h.box, k.box) > nms_iou for k in kept):
            continue
        kept.append(h)
        out.append(h)
    return out


def finalize_submission(hyps: list[StaHypothesis], max_exports: int = 100) -> list[StaHypothesis]:
    """Canonical sort, then truncate to the export cap."""
    return sort_canonical(hyps)[:max_exports]


# Tensor names one proposal batch must provide, optionally prefixed
# "<example_uid>/" when one container carries several examples.
REQUIRED_TENSORS = (
    "proposal_boxes",
    "objectness",
    "noun_logits",
    "verb_logits",
    "box_deltas",
    "ttc_raw",
    "quality",
)


def proposals_from_tensors(tensors: dict[str, np.ndarray]) -> list[ProposalRecord]:
    """Assemble ProposalRecords from one batch of named head-output tensors.

    Expects proposal_boxes (P, 4), objectness/ttc_raw/quality (P,),
    noun_logits (P, N), verb_logits (P, V), box_deltas (P, N, 4).
    Missing names are reported exhaustively.
    """
    missing = [name for name in REQUIRED_TENSORS if name not in tensors]
    if missing:
        raise ValidationError([f"missing tensor {name!r}" for name in missing])
    boxes = np.asarray(tensors["proposal_boxes"], dtype=np.float64)
    if boxes.ndim != 2 or boxes.shape[1] != 4:
        raise ValidationError(f"proposal_boxes must be (P, 4), got {boxes.shape}")
    p = boxes.shape[0]
    deltas = np.asarray(tensors["box_deltas"], dtype=np.float64)
    if deltas.ndim != 3 or deltas.shape[0] != p or deltas.shape[2] != 4:
        raise ValidationError(f"box_deltas must be (P, n_nouns, 4), got {deltas.shape}")
    records = []
    for i in range(p):
        records.append(
            ProposalRecord(
                proposal_box=Box2D(*boxes[i]),
                objectness=float(tensors["objectness"][i]),
                noun_logits=np.asarray(tensors["noun_logits"][i], dtype=np.float64),
                verb_logits=np.asarray(tensors["verb_logits"][i], dtype=np.float64),
                box_deltas=deltas[i],
                ttc_raw=float(tensors["ttc_raw"][i]),
                quality=float(tensors["quality"][i]),
            )
        )
    return records


def load_proposal_batches(path, default_uid: str) -> dict[str, list[ProposalRecord]]:
    """Read proposal batches from a tensor container.

    Tensor names may be plain (single example, keyed by `default_uid`) or
    prefixed "<uid>/<name>" for multi-example containers.
    """
    from .io_formats import read_tensor_file

    tensors = read_tensor_file(path)
    per_uid: dict[str, dict[str, np.ndarray]] = {}
    for name, arr in tensors.items():
        uid, _, base = name.rpartition("/")
        per_uid.setdefault(uid or default_uid, {})[base] = arr
    batches = {}
    problems = []
    for uid in sorted(per_uid):
        try:
            batches[uid] = proposals_from_tensors(per_uid[uid])
        except ValidationError as e:
            problems += [f"example {uid!r}: {p}" for p in e.problems]
    if problems:
        raise ValidationError(problems)
    return batches


def run_inference_chain(
    proposals: list[ProposalRecord],
    taxonomy: Taxonomy,
    cfg: InferenceConfig = InferenceConfig(),
) -> list[StaHypothesis]:
    """expand -> class-aware NMS -> finalize, the full per-example chain."""
    hyps = expand_hypotheses(proposals, taxonomy, cfg)
    hyps = class_aware_nms(hyps, cfg.nms_iou)
    return finalize_submission(hyps, cfg.max_exports)
