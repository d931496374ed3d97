"""Causal explanation models for timed automata.

The pipeline builds a complete causal forest from an automaton, narrows it
by purpose and by explainee, attaches expert snippets, and then answers
"how, because why" questions at run time from a belief-state replay of
observed events, including lookahead queries and feedback-driven
personalization.
"""
from .annotation import (AnnotationBase, AnnotationEntry, CoverageReport,
                         annotate, load_annotations, match_element)
from .bundles import (bundled_names, bundled_text, crossing_annotations,
                      crossing_model, crossing_profile, crossing_purpose,
                      crossing_trace)
from .emodel import (Annotation, CauseGroup, ChainLink, ExplanationModel,
                     ObservableNode, ReasonElement)
from .errors import (DuplicateId, DuplicateSelector, EmptySliceWarning,
                     ExmoError, HiddenForExplainee, MissingInitialLocation,
                     ModelSyntaxError, NoObservablesWarning, NotObserved,
                     NothingMoreToReveal, NovelSituationFrozen,
                     ProvenanceMismatch, SelectorWarning, StageMismatch,
                     TimestampRegression, TraceFormatError, UndeclaredSymbol,
                     UnknownNode)
from .extraction import (ExtractionConfig, Observable, backward_paths,
                         enumerate_observables, extract_em1)
from .model import (Diagnostic, TimedAutomaton, load_model, model_from_dict,
                    model_to_dict, parse_model, serialize_model,
                    validate_model)
from .runtime import (AnalyseConfig, BeliefEngine, Event, ExplanationPath,
                      Session, TakenTransition, load_trace, new_session,
                      parse_trace, render_explanation)
from .slicing import (ExplaineeProfile, ExplanationPurpose,
                      ObservableSelector, clear_overlay, slice_by_profile,
                      slice_by_purpose, visible_view)

__version__ = "0.1.0"

__all__ = [
    "Annotation", "AnnotationBase", "AnnotationEntry", "AnalyseConfig",
    "BeliefEngine", "CauseGroup", "ChainLink", "CoverageReport",
    "Diagnostic", "DuplicateId", "DuplicateSelector", "EmptySliceWarning",
    "Event", "ExmoError", "ExplaineeProfile", "ExplanationModel",
    "ExplanationPath", "ExplanationPurpose", "ExtractionConfig",
    "HiddenForExplainee", "MissingInitialLocation", "ModelSyntaxError",
    "NoObservablesWarning", "NotObserved", "NothingMoreToReveal",
    "NovelSituationFrozen", "Observable", "ObservableNode",
    "ObservableSelector", "ProvenanceMismatch", "ReasonElement",
    "SelectorWarning", "Session", "StageMismatch", "TakenTransition",
    "TimedAutomaton", "TimestampRegression", "TraceFormatError",
    "UndeclaredSymbol", "UnknownNode", "annotate", "backward_paths",
    "bundled_names", "bundled_text", "clear_overlay",
    "crossing_annotations", "crossing_model", "crossing_profile",
    "crossing_purpose", "crossing_trace", "enumerate_observables",
    "extract_em1", "load_annotations", "load_model", "load_trace",
    "match_element", "model_from_dict", "model_to_dict", "new_session",
    "parse_model", "parse_trace", "render_explanation", "serialize_model",
    "slice_by_profile", "slice_by_purpose", "validate_model",
    "visible_view",
]
