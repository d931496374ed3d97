from __future__ import annotations

import json

import pytest

from exmo import (AnnotationBase, Event, ExplaineeProfile,
                  ExplanationPurpose, annotate, bundled_text, extract_em1,
                  new_session, parse_model, slice_by_profile,
                  slice_by_purpose)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): label printed as a pass/fail line")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    terminal = item.config.pluginmanager.get_plugin("terminalreporter")
    if terminal is not None:
        terminal.write_line(f"[{status}] {marker.args[0]}")


@pytest.fixture(scope="session")
def crossing_doc():
    return json.loads(bundled_text("model", "crossing"))


@pytest.fixture(scope="session")
def crossing_ta():
    return parse_model(bundled_text("model", "crossing"))


@pytest.fixture(scope="session")
def driving_purpose():
    return ExplanationPurpose.loads(bundled_text("purpose", "driving"))


@pytest.fixture(scope="session")
def end_user_profile():
    return ExplaineeProfile.loads(bundled_text("profile", "end_user"))


@pytest.fixture(scope="session")
def engineer_profile():
    return ExplaineeProfile.loads(bundled_text("profile", "engineer"))


@pytest.fixture(scope="session")
def crossing_base():
    return AnnotationBase.loads(bundled_text("annotations", "crossing"))


@pytest.fixture
def em1(crossing_ta):
    return extract_em1(crossing_ta)


@pytest.fixture
def em2(em1, driving_purpose):
    return slice_by_purpose(em1, driving_purpose)


@pytest.fixture
def em3(em2, end_user_profile):
    return slice_by_profile(em2, end_user_profile)


@pytest.fixture
def em4(em3, crossing_base):
    model, _coverage = annotate(em3, crossing_base)
    return model


@pytest.fixture(scope="session")
def emergency_events():
    lines = bundled_text("trace", "emergency").splitlines()
    return [Event.from_dict(json.loads(line)) for line in lines if line.strip()]


@pytest.fixture
def end_user_session(em4, crossing_ta, end_user_profile, crossing_base):
    return new_session(em4, crossing_ta, end_user_profile,
                       annotation_base=crossing_base)


@pytest.fixture
def emergency_session(end_user_session, emergency_events):
    for event in emergency_events:
        end_user_session.step(event)
    return end_user_session
