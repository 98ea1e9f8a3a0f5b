"""From raw per-proposal head outputs to an export-ready hypothesis list.

Builds a batch of random proposals, then walks the inference chain:
expansion into noun x verb pairs, class-aware NMS, and the top-100 cut.
"""

import numpy as np

from vista import (
    Box2D,
    InferenceConfig,
    ProposalRecord,
    Taxonomy,
    class_aware_nms,
    expand_hypotheses,
    finalize_submission,
)

rng = np.random.default_rng(1)
taxonomy = Taxonomy(
    noun_names=("cup", "knife", "plank", "pan", "bowl"),
    verb_names=("take", "cut", "place", "stir"),
)

proposals = []
for _ in range(40):
    x1, y1 = rng.uniform(0, 600), rng.uniform(0, 400)
    proposals.append(
        ProposalRecord(
            proposal_box=Box2D(x1, y1, x1 + rng.uniform(30, 200), y1 + rng.uniform(30, 150)),
            objectness=rng.uniform(0.1, 1.0),
            noun_logits=rng.standard_normal(taxonomy.n_nouns),
            verb_logits=rng.standard_normal(taxonomy.n_verbs),
            box_deltas=rng.standard_normal((taxonomy.n_nouns, 4)) * 0.05,
            ttc_raw=rng.standard_normal(),
            quality=rng.uniform(0.1, 1.0),
        )
    )

cfg = InferenceConfig(k_noun=3, k_verb=3, nms_iou=0.5, max_exports=10)
expanded = expand_hypotheses(proposals, taxonomy, cfg)
print(f"{len(proposals)} proposals -> {len(expanded)} expanded hypotheses")

kept = class_aware_nms(expanded, cfg.nms_iou)
print(f"class-aware NMS keeps {len(kept)}")

final = finalize_submission(kept, cfg.max_exports)
print(f"export cap keeps {len(final)}\n")
print("rank  noun    verb    ttc    score")
for i, h in enumerate(final):
    print(
        f"{i:>4}  {taxonomy.noun_names[h.noun_id]:<6}  "
        f"{taxonomy.verb_names[h.verb_id]:<6}  {h.ttc:5.2f}  {h.score:.4f}"
    )
