from __future__ import annotations

import pytest

from exmo import ExplanationModel


def test_find_node_accepts_all_selector_forms(em1):
    node = em1.find_node("n:ctrl:abort")
    assert node is not None
    assert em1.find_node("ctrl:abort") is node
    assert em1.find_node("abort") is node
    comm = em1.find_node("prio!")
    assert comm is not None and comm.kind == "comm"
    assert em1.find_node("comm:prio") is comm
    assert em1.find_node("nope") is None


def test_element_ids_are_unique_and_prefixed(em1):
    ids = em1.element_ids()
    assert len(ids) == len(set(ids))
    roots = {n.element_id for n in em1.roots}
    for element_id in ids:
        assert any(element_id == r or element_id.startswith(r + "/")
                   for r in roots)


def test_iter_elements_is_preorder(em1):
    node = em1.find_node("abort")
    elements = list(em1.iter_elements(node))
    assert elements[0] is node
    ids = [e.element_id for e in elements]
    # every child id follows its parent id
    for i, element_id in enumerate(ids[1:], start=1):
        parent = element_id.rsplit("/", 1)[0]
        assert parent in ids[:i]


def test_copy_is_deep(em1):
    clone = em1.copy()
    clone.roots[0].hidden_at = "EM2"
    clone.roots[0].cause_groups[0].reasons[0].text = "changed"
    assert em1.roots[0].hidden_at is None
    assert em1.roots[0].cause_groups[0].reasons[0].text != "changed"


def test_round_trip_preserves_document(em4):
    doc = em4.to_dict()
    again = ExplanationModel.from_dict(doc)
    assert again.to_dict() == doc


def test_loads_rejects_foreign_documents():
    with pytest.raises(ValueError):
        ExplanationModel.loads('{"format": "something-else"}')
    with pytest.raises(ValueError):
        ExplanationModel.loads(
            '{"format": "explanation-model/1", "stage": "EM0",'
            ' "provenance": {}, "roots": []}')


def test_dumps_ends_with_newline(em1):
    assert em1.dumps().endswith("\n")
