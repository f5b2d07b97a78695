"""Visual attention entropy and gaze-transition entropy from eye-tracking fixations."""

__version__ = "0.1.0"

from .aoi import (
    AoiSequence,
    AoiSet,
    MarkovEntropy,
    TransitionModel,
    aoi_sequence,
    cluster_aoi,
    estimate_transition_model,
    markov_entropy,
)
from .attention_map import (
    AttentionMap,
    KernelConfig,
    PageVaeSummary,
    build_attention_map,
    page_vae_summary,
    shannon_entropy,
    to_pgm,
    vae,
)
from .descriptive import DescriptiveIndices, descriptive_indices, saccade_lengths
from .errors import ComputationError, GazeError, ParseError, ValidationError
from .gaze_data import (
    Dataset,
    Fixation,
    RatingTable,
    Recording,
    Screen,
    aggregate_scores,
    parse_fixation_table,
    parse_ratings,
    slice_recording,
)
from .inference import (
    AnovaResult,
    SweepCurve,
    f_survival,
    one_way_anova,
    pearson_r,
    regularized_incomplete_beta,
    sweep_sigma,
    sweep_subjects,
    sweep_time,
)
