"""Command-line surface for batch workflows.

Exit codes: 0 success, 1 domain error (machine-readable code printed to
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dialogue
from .bench import (
    RecordStatus,
    aggregate,
    execute,
    make_plan,
    plan_from_doc,
    render_report,
    report_tables,
)
from .canonical import stable_seed
from .config import AppConfig, load_config
from .errors import ConfigError, SimQGenError, ValidationFailedError
from .fixtures import load_conversations
from .gateway import Gateway
from .parsing import classify
from .prompts import TelerLevel, build_prompt
from .sim_model import deserialize, from_json_dict, serialize, to_json_dict, validate_representation
from .store import AppStore
from .taxonomy import QuestionFormat, QuestionType, context_for

LEVELS = tuple(TelerLevel)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simqgen")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--store", help="store root (overrides config)")
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("sim").add_subparsers(dest="action", required=True)
    p = sim.add_parser("validate")
    p.add_argument("path")
    p.add_argument("--lenient", action="store_true", help="preserve unknown top-level keys")
    p = sim.add_parser("import")
    p.add_argument("path")
    p = sim.add_parser("export")
    p.add_argument("sim_id")
    p.add_argument("-o", "--output", help="write to a file instead of stdout")

    dlg = commands.add_parser("dialogue").add_subparsers(dest="action", required=True)
    p = dlg.add_parser("start")
    p.add_argument("--sim-id", required=True)
    p.add_argument("--title", default="")
    p = dlg.add_parser("answer")
    p.add_argument("session_id")
    p.add_argument("--text", default="")
    p.add_argument("--skip", action="store_true")
    p = dlg.add_parser("extract")
    p.add_argument("session_id")
    p.add_argument("--model", help="model name from the config registry")
    p = dlg.add_parser("commit")
    p.add_argument("session_id")
    p.add_argument("--edits-file", help="JSON file with a list of edit commands")

    p = commands.add_parser("generate")
    p.add_argument("--sim", help="sim id in the store")
    p.add_argument("--sim-file", help="representation JSON file (bypasses the store)")
    p.add_argument("--qtype", required=True, choices=[t.value for t in QuestionType])
    p.add_argument("--format", required=True, choices=[f.value for f in QuestionFormat])
    p.add_argument("--level", default="L3", choices=[lv.value for lv in TelerLevel])
    p.add_argument("--model")
    p.add_argument("--seed", type=int)

    bench = commands.add_parser("bench").add_subparsers(dest="action", required=True)
    for name in ("plan", "run"):
        p = bench.add_parser(name)
        p.add_argument("--conversations", type=int, default=8, help="how many bundled conversations to use")
        p.add_argument("--levels", type=int, default=4, help="use levels L1..Ln")
        p.add_argument("--models", type=int, default=1, help="how many registry models to benchmark")
        if name == "run":
            p.add_argument("--out", required=True, help="run directory")
            p.add_argument("--judge", action="store_true", help="also collect judge ratings")
    p = bench.add_parser("resume")
    p.add_argument("--out", required=True)
    p.add_argument("--judge", action="store_true")
    p = bench.add_parser("report")
    p.add_argument("--out", required=True)
    p.add_argument("--group-by", default="model", choices=["model", "teler_level", "format", "qtype"])
    p.add_argument("--target", default="markdown", choices=["markdown", "csv"])
    p.add_argument("-o", "--output")

    judge = commands.add_parser("judge").add_subparsers(dest="action", required=True)
    p = judge.add_parser("run")
    p.add_argument("--out", required=True, help="run directory with generation records")

    commands.add_parser("serve")
    return parser


def _load_app_config(args) -> AppConfig:
    config = load_config(args.config) if args.config else AppConfig()
    if args.store:
        config = AppConfig(
            models=config.models,
            judges=config.judges,
            default_levels=config.default_levels,
            parallelism=config.parallelism,
            store_root=args.store,
            bind_host=config.bind_host,
            bind_port=config.bind_port,
            static_dir=config.static_dir,
        )
    return config


def _plan_inputs(config: AppConfig, args):
    conversations = load_conversations(limit=args.conversations)
    if args.conversations > len(conversations):
        raise ConfigError(f"only {len(conversations)} bundled conversations exist")
    if args.models > len(config.models):
        raise ConfigError(f"only {len(config.models)} models are configured")
    if not 1 <= args.levels <= 4:
        raise ConfigError("--levels must be between 1 and 4")
    return conversations, config.models[: args.models], LEVELS[: args.levels]


def _cmd_sim(config: AppConfig, store: AppStore, args) -> int:
    if args.action == "validate":
        rep = deserialize(Path(args.path).read_text(encoding="utf-8"), strict=not args.lenient)
        report = validate_representation(rep)
        for violation in report:
            print(f"{violation.code}: {violation.message}")
        if report:
            return 1
        print(f"valid: {rep.sim_id}")
        return 0
    if args.action == "import":
        rep = deserialize(Path(args.path).read_text(encoding="utf-8"), strict=False)
        report = validate_representation(rep)
        if report:
            raise ValidationFailedError(report)
        store.put("sims", rep.sim_id, to_json_dict(rep))
        print(rep.sim_id)
        return 0
    rep = from_json_dict(store.get("sims", args.sim_id), strict=False)
    text = serialize(rep)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def _cmd_dialogue(config: AppConfig, store: AppStore, args) -> int:
    if args.action == "start":
        session = dialogue.start_session(args.sim_id, args.title)
        store.put("sessions", session.session_id, session.to_json_dict())
        print(session.session_id)
        print(f"prompt: {session.queue[0]}")
        return 0
    session = dialogue.session_from_json_dict(store.get("sessions", args.session_id))
    if args.action == "answer":
        session = dialogue.skip_prompt(session) if args.skip else dialogue.record_answer(session, args.text)
        store.put("sessions", session.session_id, session.to_json_dict())
        print(f"prompt: {session.queue[0]}" if session.queue else "queue empty")
        return 0
    if args.action == "extract":
        cfg = config.model(args.model) if args.model else config.models[0]
        gateway = Gateway(mode="interactive", max_in_flight=config.parallelism)
        session = dialogue.with_status(session, dialogue.SessionStatus.extracting)
        store.put("sessions", session.session_id, session.to_json_dict())
        draft = dialogue.extract_structure(session, gateway, cfg)
        session = dialogue.with_status(session, dialogue.SessionStatus.review)
        store.put("sessions", session.session_id, session.to_json_dict())
        doc = draft.to_json_dict()
        doc["session_id"] = session.session_id
        store.put("drafts", session.sim_ref, doc)
        print(json.dumps(doc, indent=2))
        return 0
    # commit
    draft_doc = store.get("drafts", session.sim_ref)
    draft = dialogue.DraftRepresentation(
        base=from_json_dict(draft_doc["base"], strict=False),
        provenance=draft_doc.get("provenance", {}),
        confidence_notes=tuple(draft_doc.get("confidence_notes", [])),
    )
    edits = []
    if args.edits_file:
        for raw in json.loads(Path(args.edits_file).read_text(encoding="utf-8")):
            edits.append(
                dialogue.EditCommand(
                    op=raw["op"],
                    target_id=raw.get("target_id"),
                    fields=raw.get("fields", {}),
                    cascade=raw.get("cascade", False),
                )
            )
    committed = dialogue.apply_teacher_edits(draft, edits)
    store.put("sims", committed.sim_id, to_json_dict(committed))
    session = dialogue.with_status(session, dialogue.SessionStatus.committed)
    store.put("sessions", session.session_id, session.to_json_dict())
    print(committed.sim_id)
    return 0


def _cmd_generate(config: AppConfig, store: AppStore, args) -> int:
    if args.sim_file:
        rep = deserialize(Path(args.sim_file).read_text(encoding="utf-8"), strict=False)
    elif args.sim:
        rep = from_json_dict(store.get("sims", args.sim), strict=False)
    else:
        raise ValidationFailedError(message="provide --sim or --sim-file")
    qtype = QuestionType(args.qtype)
    fmt = QuestionFormat(args.format)
    level = TelerLevel(args.level)
    cfg = config.model(args.model) if args.model else config.models[0]
    seed = args.seed if args.seed is not None else stable_seed(rep.sim_id, qtype.value, level.value)
    slice = context_for(rep, qtype, seed)
    pkg = build_prompt(slice, fmt, level)
    gateway = Gateway(mode="interactive", max_in_flight=config.parallelism)
    raw = gateway.generate(pkg, cfg)
    if not raw.ok:
        print(f"transport failed: {raw.transport_status.value} {raw.detail}", file=sys.stderr)
        return 1
    validity, question = classify(raw.raw_text, fmt)
    result = {
        "sim_ref": rep.sim_id,
        "qtype": qtype.value,
        "format": fmt.value,
        "level": level.value,
        "model": cfg.model_id,
        "validity": {
            "json_ok": validity.json_ok,
            "format_ok": validity.format_ok,
            "failure": validity.failure.value if validity.failure else None,
        },
        "payload": dict(question.payload) if question else None,
    }
    print(json.dumps(result, indent=2))
    return 0


def _cmd_bench(config: AppConfig, store: AppStore, args) -> int:
    if args.action == "plan":
        conversations, models, levels = _plan_inputs(config, args)
        plan = make_plan(conversations, models, levels)
        print(f"cells: {len(plan.cells)}")
        if plan.unsupported_cells:
            print(f"unsupported: {len(plan.unsupported_cells)}")
        print(f"plan_id: {plan.plan_id}")
        return 0
    if args.action in ("run", "resume"):
        run_store_ = _run_store(args.out)
        if args.action == "run":
            conversations, models, levels = _plan_inputs(config, args)
            plan = make_plan(conversations, models, levels)
        else:
            plan = plan_from_doc(run_store_.read_plan())
        gateway = Gateway(mode="benchmark", max_in_flight=config.parallelism)
        judges = config.judges if args.judge else ()
        summary = execute(plan, gateway, run_store_, parallelism=config.parallelism, judge_configs=judges)
        for status in RecordStatus:
            if status.value in summary.counts:
                print(f"{status.value}: {summary.counts[status.value]}")
        print(f"total: {summary.total}")
        return 0
    # report
    run_store_ = _run_store(args.out)
    report = aggregate(run_store_, args.group_by)
    text = render_report(report_tables(report), args.target)
    suffix = "md" if args.target == "markdown" else "csv"
    (run_store_.root / f"report-{args.group_by}.{suffix}").write_text(text, encoding="utf-8")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def _cmd_judge(config: AppConfig, store: AppStore, args) -> int:
    from .bench import judge_existing

    run_store_ = _run_store(args.out)
    gateway = Gateway(mode="benchmark", max_in_flight=config.parallelism)
    rated = judge_existing(run_store_, gateway, config.judges, parallelism=config.parallelism)
    print(f"rated: {rated}")
    return 0


def _run_store(out: str):
    from .store import RunStore

    return RunStore(out)


def _cmd_serve(config: AppConfig, store: AppStore, args) -> int:
    import uvicorn

    from .service import create_app

    static_dir = Path(config.static_dir)
    app = create_app(config, store, static_dir=str(static_dir) if static_dir.is_dir() else None)
    uvicorn.run(app, host=config.bind_host, port=config.bind_port, log_level="warning")
    return 0


def cli_dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_app_config(args)
        store = AppStore(config.store_root)
        handler = {
            "sim": _cmd_sim,
            "dialogue": _cmd_dialogue,
            "generate": _cmd_generate,
            "bench": _cmd_bench,
            "judge": _cmd_judge,
            "serve": _cmd_serve,
        }[args.command]
        return handler(config, store, args)
    except SimQGenError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
