"""Pre-editing and prompt orchestration for Japanese-Chinese translation
of attributive clauses."""

__version__ = "0.1.0"

from .morphology import (
    AnalysisError,
    EmptyInput,
    FixtureAnalyzer,
    FixtureMiss,
    PartOfSpeech,
    Token,
    TokenizedSentence,
)
from .clause import CaseRole, Relation, ScopeDecision, scope_check
from .preedit import PreEditResult, preedit, structural_check

__all__ = [
    "AnalysisError",
    "CaseRole",
    "EmptyInput",
    "FixtureAnalyzer",
    "FixtureMiss",
    "PartOfSpeech",
    "PreEditResult",
    "Relation",
    "ScopeDecision",
    "Token",
    "TokenizedSentence",
    "preedit",
    "scope_check",
    "structural_check",
    "__version__",
]
