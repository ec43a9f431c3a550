"""Novel-class retrieval benchmark engine.

Builds class-disjoint base/novel splits of a labeled image corpus, stores
frozen embeddings in a bit-exact binary format, ranks test queries by exact
cosine similarity, and reports R-Precision separately for base and novel
classes.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    DatasetMismatchError,
    EmbeddingValidationError,
    FormatError,
    InvalidArgumentError,
    LabelMismatchError,
    NotFoundError,
    NovevalError,
    StoreIOError,
    UndefinedMetricError,
)
from .metrics import (  # noqa: F401
    MetricsReport,
    evaluate_split,
    r_precision_query,
    recall_at_k,
    render_report,
)
from .retrieval import RetrievalResult, normalize_rows, top_r_neighbors  # noqa: F401
from .splits import (  # noqa: F401
    ClassTaxonomy,
    SamplePartition,
    SplitSpec,
    builtin_split,
    builtin_taxonomy,
    partition_samples,
    random_split,
    semantic_split,
    stratified_random_split,
)
from .store import EmbeddingSet, read_embedding_set, write_embedding_set  # noqa: F401
