"""Crowd-curated AI radio: a generation queue, a rating-driven prompt
scheduler, a personalized recommender, and the analytics around them."""

from .domain import (
    ALL_QUESTIONS,
    ArtistProfile,
    FeatureVector,
    GenreProfile,
    PreferenceProfile,
    Prime,
    PromptFeatures,
    Rating,
    RatingQuestion,
    Song,
    center_likert,
    prompt_features,
)
from .catalog import Catalog, load_catalog, aggregate_artist_features, standardize
from .generation import GenerationJob, GenerationQueue, JobState, mock_generate
from .scheduler import (
    OutcomeMode,
    OutcomeSpec,
    PromptDecision,
    RatingModel,
    SchedulerConfig,
    compute_outcome,
    fit_rating_model,
    sample_candidates,
    select_prompt,
)
from .recommender import (
    RecommenderConfig,
    SessionState,
    advance_session,
    next_song,
    quality_score,
    selection_probabilities,
)
from .analytics import (
    analytics_report,
    correlation_matrix,
    one_sided_question_test,
    student_t_cdf,
    summarize_questions,
)
from .sim import SimConfig, SyntheticListener, oracle_best_pair, run_simulation

__version__ = "0.1.0"
