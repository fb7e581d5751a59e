"""hintkit: generate hints for factoid questions and score them on
relevance, readability, convergence, familiarity, and answer leakage."""

from .dataset_io import (
    export_archive,
    export_json,
    import_archive,
    import_json,
    load_dataset,
    save_dataset,
    validate_dataset,
)
from .enrich import classify_question_type, extract_entities
from .generation import GenerationConfig, generate_answer_agnostic, generate_answer_aware
from .metrics import Backends, MetricConfig, evaluate_dataset
from .model import (
    Answer,
    Dataset,
    Entity,
    EntityLabel,
    Hint,
    Instance,
    MetricResult,
    QTypeMajor,
    Question,
    QuestionType,
    Subset,
    attach_metric,
    get_instance,
)
from .registry import available_datasets, download_dataset

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "Backends",
    "Dataset",
    "Entity",
    "EntityLabel",
    "GenerationConfig",
    "Hint",
    "Instance",
    "MetricConfig",
    "MetricResult",
    "QTypeMajor",
    "Question",
    "QuestionType",
    "Subset",
    "attach_metric",
    "available_datasets",
    "classify_question_type",
    "download_dataset",
    "evaluate_dataset",
    "export_archive",
    "export_json",
    "extract_entities",
    "generate_answer_agnostic",
    "generate_answer_aware",
    "get_instance",
    "import_archive",
    "import_json",
    "load_dataset",
    "save_dataset",
    "validate_dataset",
]
