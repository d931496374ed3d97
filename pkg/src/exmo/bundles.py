"""Bundled crossing-controller scenario: a car controller negotiating a
prioritized crossing, with ready-made purpose, profiles, annotations and
event traces."""
from __future__ import annotations

from importlib import resources

from .annotation import AnnotationBase
from .model import TimedAutomaton, parse_model
from .runtime import Event, parse_trace
from .slicing import ExplaineeProfile, ExplanationPurpose

_FILES = {
    "model": {"crossing": "model.json"},
    "purpose": {"driving": "purpose_driving.json"},
    "profile": {"end_user": "profile_end_user.json",
                "engineer": "profile_engineer.json"},
    "annotations": {"crossing": "annotations.json"},
    "trace": {"emergency": "trace_emergency.jsonl",
              "clear_crossing": "trace_clear_crossing.jsonl",
              "path_collision": "trace_path_collision.jsonl"},
}


def bundled_text(kind: str, name: str) -> str:
    try:
        filename = _FILES[kind][name]
    except KeyError:
        raise KeyError(f"no bundled {kind} named {name!r}") from None
    return (resources.files("exmo") / "assets" / "crossing"
            / filename).read_text(encoding="utf-8")


def bundled_names() -> dict[str, list[str]]:
    return {kind: sorted(names) for kind, names in _FILES.items()}


def crossing_model() -> TimedAutomaton:
    return parse_model(bundled_text("model", "crossing"))


def crossing_purpose() -> ExplanationPurpose:
    return ExplanationPurpose.loads(bundled_text("purpose", "driving"))


def crossing_profile(name: str = "end_user") -> ExplaineeProfile:
    return ExplaineeProfile.loads(bundled_text("profile", name))


def crossing_annotations() -> AnnotationBase:
    return AnnotationBase.loads(bundled_text("annotations", "crossing"))


def crossing_trace(name: str = "emergency") -> list[Event]:
    return parse_trace(bundled_text("trace", name))
