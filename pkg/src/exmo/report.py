"""Reports over an explanation model: a delimited element table plus
rendered figures.

Output is deterministic: figures are SVG with a fixed hash salt and no
embedded date, so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import os
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .emodel import CauseGroup, ChainLink, ExplanationModel, ObservableNode  # noqa: E402

plt.rcParams["svg.hashsalt"] = "exmo"

CSV_FIELDS = ("root", "element_id", "element", "detail", "hidden_at",
              "snippet")


def _element_tag(element: Any) -> tuple[str, str]:
    if isinstance(element, ObservableNode):
        return "observable", element.display_name
    if isinstance(element, CauseGroup):
        return "cause_group", element.transition
    if isinstance(element, ChainLink):
        return "chain_link", element.transition
    return "reason", element.text


def element_rows(em: ExplanationModel) -> list[dict[str, str]]:
    rows = []
    for node in em.roots:
        for element in em.iter_elements(node):
            tag, detail = _element_tag(element)
            annotation = getattr(element, "annotation", None)
            rows.append({"root": node.display_name,
                         "element_id": element.element_id,
                         "element": tag,
                         "detail": detail,
                         "hidden_at": element.hidden_at or "",
                         "snippet": annotation.snippet if annotation else ""})
    return rows


def write_csv(em: ExplanationModel, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(element_rows(em))


def _root_stats(em: ExplanationModel) -> list[dict[str, Any]]:
    stats = []
    for node in em.roots:
        visible = hidden = annotated = 0
        for element in em.iter_elements(node):
            if element.hidden_at is None:
                visible += 1
                if getattr(element, "annotation", None) is not None:
                    annotated += 1
            else:
                hidden += 1
        stats.append({"root": node.display_name, "visible": visible,
                      "hidden": hidden, "annotated": annotated})
    return stats


def _save(fig: Any, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_figures(em: ExplanationModel, out_dir: str) -> list[str]:
    stats = _root_stats(em)
    labels = [s["root"] for s in stats]
    positions = range(len(stats))

    fig, ax = plt.subplots(figsize=(7, 0.6 * max(len(stats), 4) + 1))
    visible = [s["visible"] for s in stats]
    hidden = [s["hidden"] for s in stats]
    ax.barh(positions, visible, color="#4878a8", label="visible")
    ax.barh(positions, hidden, left=visible, color="#c8c8c8", label="hidden")
    ax.set_yticks(list(positions), labels)
    ax.invert_yaxis()
    ax.set_xlabel("elements")
    ax.set_title(f"{em.stage} causal forest")
    ax.legend(loc="lower right")
    structure = os.path.join(out_dir, "structure.svg")
    _save(fig, structure)

    fig, ax = plt.subplots(figsize=(7, 0.6 * max(len(stats), 4) + 1))
    annotated = [s["annotated"] for s in stats]
    bare = [s["visible"] - s["annotated"] for s in stats]
    ax.barh(positions, annotated, color="#589858", label="annotated")
    ax.barh(positions, bare, left=annotated, color="#c8c8c8",
            label="unannotated")
    ax.set_yticks(list(positions), labels)
    ax.invert_yaxis()
    ax.set_xlabel("visible elements")
    ax.set_title(f"{em.stage} annotation coverage")
    ax.legend(loc="lower right")
    coverage = os.path.join(out_dir, "annotations.svg")
    _save(fig, coverage)

    return [structure, coverage]


def write_report(em: ExplanationModel, out_dir: str) -> dict[str, Any]:
    """Write elements.csv and the figures into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    table = os.path.join(out_dir, "elements.csv")
    write_csv(em, table)
    figures = render_figures(em, out_dir)
    return {"csv": table, "figures": figures}
