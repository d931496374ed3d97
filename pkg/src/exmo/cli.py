"""Command-line front door for the explanation pipeline.

Pipeline stages read and write files; `--out -` selects standard output.
Inputs may also name bundled artifacts with a `bundle:` prefix, e.g.
`--model bundle:crossing`.  Diagnostics go to standard error.  Exit codes:
0 success, 1 user error, 2 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import bundles
from .annotation import AnnotationBase, annotate
from .emodel import ExplanationModel
from .errors import ExmoError
from .extraction import ExtractionConfig, extract_em1
from .model import parse_model, validate_model
from .runtime import (AnalyseConfig, BeliefEngine, Event, new_session,
                      parse_trace)
from .slicing import (ExplaineeProfile, ExplanationPurpose,
                      ObservableSelector, matches_any, slice_by_profile,
                      slice_by_purpose)


class _Parser(argparse.ArgumentParser):
    """argparse variant matching the documented exit-code contract."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_artifact(ref: str, kind: str) -> str:
    if ref.startswith("bundle:"):
        return bundles.bundled_text(kind, ref[len("bundle:"):])
    with open(ref, encoding="utf-8") as fh:
        return fh.read()


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_em(ref: str) -> ExplanationModel:
    return ExplanationModel.loads(_read_artifact(ref, "em"))


def _cmd_extract(args: argparse.Namespace) -> int:
    ta = parse_model(_read_artifact(args.model, "model"))
    for diag in validate_model(ta):
        print(f"warning: {diag.code}: {diag.message}", file=sys.stderr)
    config = ExtractionConfig(include_clock_resets=args.include_clock_resets,
                              chain_depth=args.chain_depth)
    _write(extract_em1(ta, config).dumps(), args.out)
    return 0


def _cmd_slice(args: argparse.Namespace) -> int:
    em = _load_em(args.em)
    purpose = ExplanationPurpose.loads(_read_artifact(args.purpose, "purpose"))
    _write(slice_by_purpose(em, purpose).dumps(), args.out)
    return 0


def _cmd_tailor(args: argparse.Namespace) -> int:
    em = _load_em(args.em)
    profile = ExplaineeProfile.loads(_read_artifact(args.profile, "profile"))
    _write(slice_by_profile(em, profile).dumps(), args.out)
    return 0


def _cmd_annotate(args: argparse.Namespace) -> int:
    em = _load_em(args.em)
    base = AnnotationBase.loads(_read_artifact(args.annotations, "annotations"))
    em4, coverage = annotate(em, base)
    _write(em4.dumps(), args.out)
    if args.coverage:
        _write(json.dumps(coverage.to_dict(), indent=2) + "\n", args.coverage)
    for warning in coverage.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if coverage.unannotated:
        print(f"coverage: {coverage.annotated} annotated, "
              f"{len(coverage.unannotated)} gaps", file=sys.stderr)
    return 0


def _parse_triggers(text: str | None) -> AnalyseConfig:
    if not text:
        return AnalyseConfig()
    selectors = tuple(ObservableSelector(token.strip())
                      for token in text.split(",") if token.strip())
    return AnalyseConfig(triggers=selectors)


def _cmd_explain(args: argparse.Namespace) -> int:
    em = _load_em(args.em)
    ta = parse_model(_read_artifact(args.model, "model"))
    profile = ExplaineeProfile.loads(_read_artifact(args.profile, "profile"))
    events = parse_trace(_read_artifact(args.trace, "trace"))
    session = new_session(em, ta, profile)
    for event in events:
        session.step(event)
    path = session.build_explanation(args.query, args.occurrence,
                                     args.verbosity)
    if args.json:
        _write(json.dumps(path.to_dict(), indent=2) + "\n", args.out)
    else:
        _write(path.rendered() + "\n", args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    ta = parse_model(_read_artifact(args.model, "model"))
    events = parse_trace(_read_artifact(args.trace, "trace"))
    engine = BeliefEngine(ta)
    analyse = _parse_triggers(args.triggers)
    steps = []
    for event in events:
        taken = engine.apply_event(event)
        steps.append({"event": event.to_dict(),
                      "time": engine.time,
                      "taken": [t.to_dict() for t in taken],
                      "belief": engine.belief_dict(),
                      "flags": {"novel_situation": engine.novel_situation,
                                "frozen": engine.frozen}})
    need = None
    for entry in reversed(engine.taken):
        for obs in entry.observables:
            if analyse.always_on or matches_any(analyse.triggers,
                                                obs["kind"], obs["name"]):
                need = {"kind": obs["kind"], "name": obs["name"],
                        "occurrence": {"timestamp": entry.timestamp,
                                       "transition": entry.transition}}
                break
        if need:
            break
    doc = {"steps": steps, "explanation_need": need}
    if args.horizon is not None:
        doc["lookahead"] = engine.lookahead(args.horizon)
    _write(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    from .report import write_report  # defer: pulls in matplotlib
    em = _load_em(args.em)
    written = write_report(em, args.out_dir)
    for path in [written["csv"], *written["figures"]]:
        print(path)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port,
                log_level=args.log_level)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exmo",
                     description="causal explanation models for timed "
                                 "automata: extract, refine, explain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="build the full explanation model")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--chain-depth", type=int, default=1)
    p.add_argument("--include-clock-resets", action="store_true")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("slice", help="hide branches outside a purpose")
    p.add_argument("--em", required=True)
    p.add_argument("--purpose", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_slice)

    p = sub.add_parser("tailor", help="tailor a sliced model to an explainee")
    p.add_argument("--em", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_tailor)

    p = sub.add_parser("annotate", help="attach expert snippets")
    p.add_argument("--em", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--coverage", help="also write the coverage report here")
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("explain",
                       help="replay a trace and explain one observable")
    p.add_argument("--em", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--occurrence", type=int, default=0)
    p.add_argument("--verbosity", choices=("brief", "detailed"))
    p.add_argument("--json", action="store_true",
                   help="emit the full explanation path as JSON")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("simulate", help="replay a trace against the belief "
                                        "engine and report each step")
    p.add_argument("--model", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--triggers", help="comma-separated observables that "
                                      "raise an explanation need")
    p.add_argument("--horizon", type=int,
                   help="append a lookahead over this many time units")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("report", help="write the element table and figures")
    p.add_argument("--em", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ExmoError, OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
