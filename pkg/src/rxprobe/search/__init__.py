"""Gradient-guided search for scenarios where the neural receiver fails."""
from .criteria import compute_loss, failure_criterion
from .episode import (
    FAIL_INIT,
    FAIL_SEARCH,
    NOT_FAIL,
    OUTCOMES,
    CampaignResult,
    EpisodeRecord,
    IterationRow,
    SearchConfig,
    run_campaign,
    run_episode,
    sample_initial,
)
from .schedule import PlateauSchedule
from .space import SearchAxis, SearchSpace, denormalize, normalize

__all__ = [
    "FAIL_INIT",
    "FAIL_SEARCH",
    "NOT_FAIL",
    "OUTCOMES",
    "CampaignResult",
    "EpisodeRecord",
    "IterationRow",
    "PlateauSchedule",
    "SearchAxis",
    "SearchConfig",
    "SearchSpace",
    "compute_loss",
    "denormalize",
    "failure_criterion",
    "normalize",
    "run_campaign",
    "run_episode",
    "sample_initial",
]
