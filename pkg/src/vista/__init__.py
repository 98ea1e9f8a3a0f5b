"""Short-term object interaction anticipation toolkit.

Pure-computation stages downstream of frozen backbones: sampling
arithmetic, temporal-context fusion kernels, prediction post-processing,
class-aware NMS, multi-source ensembling, and the four-variant Top-5 mAP
evaluation protocol, plus a seeded synthetic harness so every stage can
be exercised without real data.
"""

from .boxes import Box2D, clip_box, iou
from .ensemble import (
    EnsembleConfig,
    HypothesisGroup,
    compatible,
    ensemble_predictions,
    group_hypotheses,
    merge_group,
)
from .errors import FormatError, ValidationError
from .evaluation import (
    EvalConfig,
    EvalReport,
    MatchVariant,
    average_precision,
    evaluate,
    format_report_table,
    matches,
    top_k_filter,
)
from .fusion import (
    ContextMlpParams,
    FilmParams,
    ProbeParams,
    attentive_probe,
    film_modulate,
    roi_context_fuse,
)
from .oracle import brute_force_evaluate
from .postprocess import (
    InferenceConfig,
    ProposalRecord,
    apply_box_deltas,
    class_aware_nms,
    expand_hypotheses,
    finalize_submission,
    run_inference_chain,
    softmax,
    ttc_from_raw,
)
from .sampling import SamplingPlan, plan_frames
from .synth import NoiseConfig, generate_scenario, perturb_to_predictions
from .types import (
    GroundTruthInstance,
    PredictionSet,
    StaHypothesis,
    Taxonomy,
    canonical_key,
    sort_canonical,
)

__version__ = "0.1.0"
