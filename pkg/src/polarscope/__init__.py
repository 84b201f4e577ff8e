"""polarscope: short-term topic polarization in retweet networks.

Measure structural polarization of a topic's retweet network (balanced
bisection + normalized density-contrast score) and predict the full-data
polarization level from small random tweet subsets.
"""

from .config import (
    ForestParams,
    PartitionParams,
    PolarizationParams,
    RunConfig,
    SamplingParams,
    derive_seed,
)
from .features import TopicFeatures, assemble_features, url_hashtag_ratios, vocal_minority
from .graph import (
    NetworkStats,
    RetweetNetwork,
    build_network,
    from_edges,
    read_edgelist,
    stats,
    viable,
    write_edgelist,
)
from .ingest import (
    GENRES,
    NewsArticle,
    TopicDataset,
    Tweet,
    default_tokenizer,
    load_stopwords,
    mine_subkeywords,
    parse_dump,
    read_topics,
    seed_select,
    slice_topic,
    write_topics,
)
from .model import ForestModel, cross_validate, fit, predict
from .partition import Bisection, bisect, cut_quality, write_partition
from .polarization import (
    PolarizationResult,
    adaptive_ei,
    normalized_score,
    rewire_null,
)
from .sampler import (
    EvalCell,
    EvalReport,
    SampleSpec,
    draw_sample,
    evaluate,
    hour_level,
    naive_estimate,
)

__version__ = "0.1.0"
