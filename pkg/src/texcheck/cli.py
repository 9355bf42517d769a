"""Command-line interface.

``texcheck run paper.tex -o out.md`` drives the full pipeline headlessly and
writes the markdown export (section E becomes a TODO entry for the author).
``texcheck serve`` starts the HTTP service.

Exit codes for ``run``: 2 parse failure, 3 provider failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import AppConfig, load_config
from .errors import BankSchemaError
from .pipeline import EventLog, run_pipeline
from .questions import load_question_bank
from .responses import JobStore, apply_edit, export_markdown, new_job

EXIT_PARSE = 2
EXIT_PROVIDER = 3
EXIT_IO = 4

_PARSE_ERRORS = ("NoAbstractFound", "EmptyDocument")
_PROVIDER_ERRORS = ("ProviderError", "EmbedderUnavailable", "ContextOverflow",
                    "UnparseableResponse")

_E_TODO = "TODO: answer manually — AI-assistant use can only be disclosed by the authors."


def _build_config(args) -> AppConfig:
    config = load_config(args.config) if args.config else AppConfig()
    if getattr(args, "stub_llm", False):
        config.stub_llm = True
    if getattr(args, "data_root", None):
        config.data_root = Path(args.data_root)
    if getattr(args, "question_bank", None):
        config.question_bank = Path(args.question_bank)
    return config


def _cmd_run(args) -> int:
    config = _build_config(args)
    path = Path(args.tex_path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        bank = load_question_bank(config.question_bank)
    except BankSchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    store = JobStore(config.data_root)
    record = new_job(path.name)
    log = EventLog(record.job_id,
                   on_emit=lambda e: print(f"[{e.stage}]" + (f" {e.detail}" if e.detail else ""),
                                           file=sys.stderr))
    artifacts: dict = {}
    record = run_pipeline(record, data, config, bank, store, log, artifacts=artifacts)

    if record.state == "failed":
        error = record.error or ""
        kind = error.split(":", 1)[0]
        print(f"error: {error}", file=sys.stderr)
        if kind in _PARSE_ERRORS:
            return EXIT_PARSE
        if kind in _PROVIDER_ERRORS:
            return EXIT_PROVIDER
        return 1

    llm_qids = [q.qid for q in bank.llm_questions]
    if llm_qids and all(qid in record.failures for qid in llm_qids):
        print("error: every question failed; provider unavailable?", file=sys.stderr)
        return EXIT_PROVIDER
    for qid, err in record.failures.items():
        print(f"warning: {qid} failed: {err}", file=sys.stderr)

    for q in bank.human_questions:
        apply_edit(record, q.qid, _E_TODO)
    markdown = export_markdown(record, bank)

    out_path = Path(args.output) if args.output else path.with_suffix(".checklist.md")
    try:
        out_path.write_bytes(markdown)
        if args.dump_nodes:
            nodes_path = out_path.with_suffix(".nodes.json")
            nodes_path.write_text(artifacts["graph"].to_json(), encoding="utf-8")
            print(f"nodes: {nodes_path}", file=sys.stderr)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out_path}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _build_config(args)
    static_dir = Path(args.static_dir) if args.static_dir else Path("frontend/dist")
    app = create_app(config, static_dir=static_dir if static_dir.is_dir() else None)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="texcheck",
                                     description="Checklist assistant over a paper's TeX source")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the pipeline headlessly on a local .tex file")
    run_p.add_argument("tex_path")
    run_p.add_argument("-o", "--output", help="markdown output path")
    run_p.add_argument("--stub-llm", action="store_true",
                       help="use deterministic local stubs for chat and embeddings (no network)")
    run_p.add_argument("--dump-nodes", action="store_true",
                       help="write the chunk-node graph as JSON next to the output")
    run_p.add_argument("--question-bank", help="path to an alternative question bank JSON")
    run_p.add_argument("--config", help="path to a YAML config file")
    run_p.add_argument("--data-root", help="directory for job records and caches")
    run_p.set_defaults(fn=_cmd_run)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--stub-llm", action="store_true")
    serve_p.add_argument("--question-bank")
    serve_p.add_argument("--config")
    serve_p.add_argument("--data-root")
    serve_p.add_argument("--static-dir", help="built frontend assets to serve at /")
    serve_p.set_defaults(fn=_cmd_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
