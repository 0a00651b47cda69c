"""Beam search over passage chains for multi-hop question answering.

The package covers the whole retrieval loop: dataset ingestion into a
canonical JSONL format, chain-level scoring behind a pluggable scorer
interface (deterministic built-ins plus a remote HTTP client), hop-wise beam
search with fixed-hop or threshold stopping, training-signal emission with
per-hop losses, open-domain chain reranking, and evaluation with report and
figure rendering. See the CLI (``chainbeam --help``) for end-to-end runs.
"""

__version__ = "0.1.0"

from .engine import (
    FixedHops,
    RetrievalResult,
    SearchConfig,
    StopReason,
    Threshold,
    exhaustive_retrieve,
    expand,
    fixed_hop_beams,
    rerank_chains,
    retrieve,
    select_top,
)
from .evaluation import (
    MetricsReport,
    additional_hop_probe,
    aggregate_report,
    chain_top2_em,
    retrieval_em,
    retrieval_f1,
)
from .remote import RemoteScorer
from .scoring import (
    AssemblyConfig,
    Head,
    LexicalScorer,
    LookupScorer,
    LookupTable,
    Scorer,
    ScoreRequest,
    assemble_sequence,
    default_threshold,
    lexical_score,
    lookup_score,
    score_batch,
    softmax_distribution,
    tokenize,
)
from .supervision import (
    LabeledSequence,
    SupervisionBatch,
    assign_label,
    emit_training_batch,
    hop_loss,
    shuffle_prefix,
    total_loss,
)
from .types import (
    Beam,
    CandidateSet,
    ChainHypothesis,
    ExpansionSet,
    MultiHopExample,
    Passage,
    Question,
    extend_chain,
    validate_example,
)

__all__ = [
    "__version__",
    "AssemblyConfig",
    "Beam",
    "CandidateSet",
    "ChainHypothesis",
    "ExpansionSet",
    "FixedHops",
    "Head",
    "LabeledSequence",
    "LexicalScorer",
    "LookupScorer",
    "LookupTable",
    "MetricsReport",
    "MultiHopExample",
    "Passage",
    "Question",
    "RemoteScorer",
    "RetrievalResult",
    "Scorer",
    "ScoreRequest",
    "SearchConfig",
    "StopReason",
    "SupervisionBatch",
    "Threshold",
    "additional_hop_probe",
    "aggregate_report",
    "assemble_sequence",
    "assign_label",
    "chain_top2_em",
    "default_threshold",
    "emit_training_batch",
    "exhaustive_retrieve",
    "expand",
    "extend_chain",
    "fixed_hop_beams",
    "hop_loss",
    "lexical_score",
    "lookup_score",
    "rerank_chains",
    "retrieval_em",
    "retrieval_f1",
    "retrieve",
    "score_batch",
    "select_top",
    "shuffle_prefix",
    "softmax_distribution",
    "tokenize",
    "total_loss",
    "validate_example",
]
