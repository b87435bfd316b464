"""Command-line surface: dataset building, indexing, benchmarking, mu
tuning, an interactive REPL, and the HTTP session service."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .config import AppConfig, load_config
from .core import Status
from .dataset import DatasetError, load_dataset, load_doc_source, save_dataset
from .engine import GeneratorConfig
from .evaluation import (
    BenchConfig,
    DEFAULT_MU_GRID,
    EvalRecord,
    format_table,
    mean_f1,
    report_to_json,
    run_benchmark,
    save_records,
)
from .fixtures import write_fixture_files
from .goldcg import build_gold_cg, build_selector_examples, enrich_with_doc, save_selector_examples, split_train_validation
from .pipeline import LiveConversation
from .retrieval import Bm25Index, Bm25Params, CollectionError, load_passages
from .setups import ConfigurationError


class CliError(Exception):
    pass


def _load_app_config(args: argparse.Namespace) -> AppConfig:
    config = load_config(getattr(args, "config", None))
    for name in ("generator", "selector", "reader", "setup", "index", "dataset"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if getattr(args, "mu", None) is not None:
        config.mu = args.mu
    config.validate()
    return config


def _cmd_fixture(args: argparse.Namespace) -> int:
    files = write_fixture_files(args.out_dir)
    for name in sorted(files):
        print(f"{name}: {files[name]}")
    return 0


def _cmd_build_gold_cg(args: argparse.Namespace) -> int:
    conversations = load_dataset(args.infile)
    if args.doc_source:
        mapping = load_doc_source(args.doc_source)
        conversations = [enrich_with_doc(c, mapping) for c in conversations]
    conversations = [build_gold_cg(c) for c in conversations]
    save_dataset(conversations, args.out)
    print(f"wrote {sum(len(c.turns) for c in conversations)} turns to {args.out}")
    return 0


def _cmd_build_selector_data(args: argparse.Namespace) -> int:
    conversations = load_dataset(args.infile)
    examples = []
    for conversation in conversations:
        if any(t.gold_cg is None for t in conversation.turns):
            conversation = build_gold_cg(conversation)
        examples.extend(build_selector_examples(conversation))
    save_selector_examples(examples, args.out)
    print(f"wrote {len(examples)} selector examples to {args.out}")
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    conversations = load_dataset(args.infile)
    train, validation = split_train_validation(conversations, args.fraction, args.seed)
    save_dataset(train, args.out_train)
    save_dataset(validation, args.out_validation)
    print(f"train: {len(train)} conversations, validation: {len(validation)} conversations")
    return 0


def _cmd_index(args: argparse.Namespace) -> int:
    passages = load_passages(args.collection)
    index = Bm25Index(passages)
    index.save(args.out)
    print(f"indexed {index.n_passages} passages to {args.out}")
    return 0


def _parse_grid(raw: Optional[str]) -> list[float]:
    if not raw:
        return list(DEFAULT_MU_GRID)
    if ":" in raw:
        start, stop, step = (float(x) for x in raw.split(":"))
        grid = []
        value = start
        while value <= stop + 1e-9:
            grid.append(round(value, 6))
            value += step
        return grid
    return [float(x) for x in raw.split(",")]


def _bench_config(args: argparse.Namespace, mu_by_setup: dict[str, float]) -> BenchConfig:
    app = _load_app_config(args)
    return BenchConfig(
        params=Bm25Params(top_n=args.top_n),
        generator=app.generator,
        selector=app.selector,
        gen_config=GeneratorConfig(
            context_sources=frozenset(args.context_sources.split(",")),
            include_current_question=not args.no_current_question,
        ),
        mu=app.mu,
        mu_by_setup=mu_by_setup,
        max_query_tokens=app.max_query_tokens,
        history=args.history,
        fusion_raw=args.fusion_raw,
    )


def _cmd_bench(args: argparse.Namespace) -> int:
    conversations = load_dataset(args.dataset)
    index = Bm25Index.load(args.index)
    mu_by_setup: dict[str, float] = {}
    if args.mu_file and Path(args.mu_file).exists():
        with open(args.mu_file, "r", encoding="utf-8") as handle:
            mu_by_setup = {k: float(v) for k, v in json.load(handle).items()}
    setups = [s.strip() for s in args.setups.split(",") if s.strip()]
    config = _bench_config(args, mu_by_setup)
    result = run_benchmark(conversations, index, setups, config)
    print(format_table(result.reports))
    for setup, message in sorted(result.errors.items()):
        print(f"error: setup {setup}: {message}", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(report_to_json(result.reports) + "\n", encoding="utf-8")
    if args.emit_records:
        flat: list[EvalRecord] = [r for records in result.records.values() for r in records]
        save_records(flat, args.emit_records)
    return 1 if result.errors else 0


def _cmd_tune_mu(args: argparse.Namespace) -> int:
    from .evaluation import tune_mu

    conversations = load_dataset(args.validation)
    index = Bm25Index.load(args.index)
    grid = _parse_grid(args.grid)
    cache: dict[float, list[EvalRecord]] = {}

    def records_for(mu_value: float) -> list[EvalRecord]:
        if mu_value not in cache:
            config = _bench_config(args, {})
            config.mu = mu_value
            result = run_benchmark(conversations, index, [args.setup], config)
            if result.errors:
                raise CliError(result.errors[args.setup])
            cache[mu_value] = result.records[args.setup]
        return cache[mu_value]

    best = tune_mu(records_for, grid)
    mu_file = Path(args.mu_file)
    current: dict[str, float] = {}
    if mu_file.exists():
        current = json.loads(mu_file.read_text(encoding="utf-8"))
    current[args.setup] = best
    mu_file.write_text(
        json.dumps(current, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"tuned mu for {args.setup}: {best} (validation F1 {mean_f1(records_for(best)):.4f})")
    return 0


def _render_cg_lines(result) -> list[str]:
    dim = sys.stdout.isatty()
    lines = []
    for p, status in result.cg_full.entries():
        if status is Status.SELECTED:
            lines.append(f"  [*] {p.surface} (t{p.origin_turn})")
        else:
            line = f"  [ ] {p.surface} (t{p.origin_turn})  (retained)"
            lines.append(f"\x1b[2m{line}\x1b[0m" if dim else line)
    return lines


def _cmd_chat(args: argparse.Namespace) -> int:
    config = _load_app_config(args)
    index = Bm25Index.load(args.index)
    conversation = None
    if config.dataset:
        conversations = load_dataset(config.dataset)
        if not conversations:
            raise CliError("dataset is empty")
        conversation = conversations[0]
    live = LiveConversation.start(index, config, conversation=conversation)
    print(f"cground chat (setup={config.setup}, generator={config.generator}, "
          f"selector={config.selector}); empty line quits")
    while True:
        try:
            line = input("> ")
        except EOFError:
            break
        question = line.strip()
        if not question:
            break
        result = live.ask(question)
        print(f"answer: {result.answer or '(no answer found)'}")
        for rp in result.passages[:3]:
            print(f"  [passage {rp.passage.passage_id} rank {rp.rank}]")
        print("CG:")
        for cg_line in _render_cg_lines(result):
            print(cg_line)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import ServiceApp, make_server

    config = _load_app_config(args)
    index = Bm25Index.load(args.index)
    oracle_conversations = None
    if config.dataset:
        oracle_conversations = [build_gold_cg(c) for c in load_dataset(config.dataset)]
    app = ServiceApp(
        index,
        config,
        oracle_conversations=oracle_conversations,
        session_log=args.session_log,
        static_dir=args.static_dir,
    )
    server = make_server(app, host=args.host, port=args.port)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} (setup={config.setup})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cground", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cground {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixture", help="write the bundled fixture datasets")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_fixture)

    p = sub.add_parser("build-gold-cg", help="attach gold CG (and doc context) to a dataset")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--doc-source", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_gold_cg)

    p = sub.add_parser("build-selector-data", help="derive selector training labels")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_selector_data)

    p = sub.add_parser("split", help="split a dataset into train and validation")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-validation", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("index", help="build and persist a BM25 index")
    p.add_argument("--collection", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_index)

    def add_shared(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None)
        p.add_argument("--generator", choices=["oracle", "rule", "external"], default=None)
        p.add_argument("--selector", choices=["oracle", "rule", "external"], default=None)
        p.add_argument("--reader", choices=["lexical", "external"], default=None)
        p.add_argument("--mu", type=float, default=None)
        p.add_argument("--top-n", type=int, default=20)
        p.add_argument("--context-sources", default="doc,conv")
        p.add_argument("--no-current-question", action="store_true")
        p.add_argument("--history", choices=["gold", "system"], default="gold")
        p.add_argument("--fusion-raw", action="store_true")

    p = sub.add_parser("bench", help="run the benchmark table over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--setups", default="original,cg,cg_full,cg_full_cg")
    p.add_argument("--mu-file", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--emit-records", default=None)
    add_shared(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("tune-mu", help="grid-search mu on a validation split")
    p.add_argument("--setup", required=True)
    p.add_argument("--validation", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--grid", default=None, help="comma list or start:stop:step")
    p.add_argument("--mu-file", required=True)
    add_shared(p)
    p.set_defaults(func=_cmd_tune_mu)

    p = sub.add_parser("chat", help="interactive REPL against an index")
    p.add_argument("--index", required=True)
    p.add_argument("--setup", choices=["original", "concat", "cg", "cg_full", "cg_full_cg"], default=None)
    p.add_argument("--dataset", default=None, help="gold dataset for oracle backends")
    add_shared(p)
    p.set_defaults(func=_cmd_chat)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--index", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8240)
    p.add_argument("--setup", choices=["original", "concat", "cg", "cg_full", "cg_full_cg"], default=None)
    p.add_argument("--dataset", default=None, help="gold dataset for oracle backends")
    p.add_argument("--session-log", default=None)
    p.add_argument("--static-dir", default=None)
    add_shared(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, DatasetError, CollectionError, ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
