"""Red-team toolkit for poisoning RAG-grounded threat-analysis pipelines.

The pipeline in one pass: paraphrase a corpus of attack descriptions, train
a TF-IDF logistic-regression surrogate on it, craft meaning-preserving
adversarial rewrites against that surrogate, swap the rewrites into a
vector-indexed knowledge base, and measure how far the downstream analyst
responses degrade under a fixed 10-point rubric. A hand-built random-forest
detector covers the traffic-classification side of the testbed.
"""

from .attacker import (
    AdversarialRewrite,
    AttackConfig,
    Substitution,
    attack_all,
    check_rewrite,
    greedy_attack,
    load_rewrites,
    save_rewrites,
    substitution_budget,
    word_importance,
)
from .corpus import (
    AttackClass,
    Corpus,
    DescriptionRecord,
    LabelMap,
    SplitCorpus,
    build_from_variants,
    canonicalize_label,
    default_label_map,
    load_corpus_csv,
    save_corpus_csv,
    split_shuffled,
)
from .detector import (
    DetectionResult,
    ForestParams,
    PreprocessPipeline,
    RandomForestModel,
    Schema,
    fit_pipeline,
    infer_schema,
    load_detector,
    load_traffic_csv,
    predict,
    save_detector,
    train_forest,
    transform,
    transform_all,
)
from .errors import (
    CorpusError,
    KnowledgeBaseError,
    LexsemError,
    PipelineError,
    PromptError,
    ToolkitError,
    TrainingError,
    VectorFileError,
    VerdictError,
)
from .evaluation import (
    EvaluationReport,
    JudgeVerdict,
    RubricScore,
    aggregate,
    emit_report,
    is_human_judge,
    load_verdicts_csv,
    parse_judge_response,
    save_verdicts_csv,
)
from .knowledge_base import (
    KbEntry,
    KnowledgeBase,
    PoisonReport,
    RetrievalResult,
    build_kb,
    corruption_metrics,
    load_kb,
    poison,
    retrieve,
    retrieve_by_label,
    save_kb,
)
from .lexsem import (
    SynonymCandidate,
    WordVectorStore,
    cosine,
    default_stopwords,
    embed_sentence,
    is_zero_sentinel,
    load_stopwords,
    load_vectors,
    nearest_synonyms,
    pos_tag,
)
from .prompts import (
    DatasetGenRequest,
    EvaluationRequest,
    HttpLlmClient,
    MockLlmClient,
    ScenarioContext,
    make_client,
    parse_variants,
    prompt_fingerprint,
    render_dataset_generation_prompt,
    render_evaluation_prompt,
    render_scenario_prompt,
)
from .surrogate import (
    SurrogateClassifier,
    Vocabulary,
    build_vocabulary,
    classification_report,
    featurize,
    fit,
    idf_weights,
    load_model,
    predict_proba,
    save_model,
    tokenize,
    tokenize_with_spans,
)

__version__ = "0.1.0"

__all__ = [
    "AdversarialRewrite",
    "AttackClass",
    "AttackConfig",
    "Corpus",
    "CorpusError",
    "DatasetGenRequest",
    "DescriptionRecord",
    "DetectionResult",
    "EvaluationReport",
    "EvaluationRequest",
    "ForestParams",
    "HttpLlmClient",
    "JudgeVerdict",
    "KbEntry",
    "KnowledgeBase",
    "KnowledgeBaseError",
    "LabelMap",
    "LexsemError",
    "MockLlmClient",
    "PipelineError",
    "PoisonReport",
    "PreprocessPipeline",
    "PromptError",
    "RandomForestModel",
    "RetrievalResult",
    "RubricScore",
    "ScenarioContext",
    "Schema",
    "SplitCorpus",
    "Substitution",
    "SurrogateClassifier",
    "SynonymCandidate",
    "ToolkitError",
    "TrainingError",
    "VectorFileError",
    "VerdictError",
    "Vocabulary",
    "WordVectorStore",
    "aggregate",
    "attack_all",
    "build_from_variants",
    "build_kb",
    "build_vocabulary",
    "canonicalize_label",
    "check_rewrite",
    "classification_report",
    "corruption_metrics",
    "cosine",
    "default_label_map",
    "default_stopwords",
    "embed_sentence",
    "emit_report",
    "featurize",
    "fit",
    "fit_pipeline",
    "greedy_attack",
    "idf_weights",
    "infer_schema",
    "is_human_judge",
    "is_zero_sentinel",
    "load_corpus_csv",
    "load_detector",
    "load_kb",
    "load_model",
    "load_rewrites",
    "load_stopwords",
    "load_traffic_csv",
    "load_vectors",
    "load_verdicts_csv",
    "make_client",
    "nearest_synonyms",
    "parse_judge_response",
    "parse_variants",
    "poison",
    "pos_tag",
    "predict",
    "predict_proba",
    "prompt_fingerprint",
    "render_dataset_generation_prompt",
    "render_evaluation_prompt",
    "render_scenario_prompt",
    "retrieve",
    "retrieve_by_label",
    "save_corpus_csv",
    "save_detector",
    "save_kb",
    "save_model",
    "save_rewrites",
    "save_verdicts_csv",
    "split_shuffled",
    "substitution_budget",
    "tokenize",
    "tokenize_with_spans",
    "train_forest",
    "transform",
    "transform_all",
    "word_importance",
]
