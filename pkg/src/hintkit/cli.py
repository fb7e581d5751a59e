"""Command-line interface.

Subcommands: ``dataset`` (list/info/download/validate/convert),
``generate``, ``evaluate``, and ``report``.  Settings merge from flags over
environment variables over the config file; ``--offline`` forbids all
network use for the run.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import dataset_io, registry, report as report_mod
from .clients import ChatClient, EmbeddingClient, PageviewsClient, RemoteScorerClient, ResponseCache, load_static_vectors
from .config import RunConfig, load_run_config
from .errors import HintkitError, MissingAnswer
from .generation import GenerationConfig, generate_answer_agnostic, generate_answer_aware, load_prompt_template
from .metrics import Backends, MetricConfig, evaluate_dataset
from .metrics.familiarity import load_frequency_table
from .metrics.readability import load_linear_scorer


def _print_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    print(fmt.format(*headers))
    print(fmt.format(*("-" * w for w in widths)))
    for row in rows:
        print(fmt.format(*row))


def _chat_client(cfg: RunConfig) -> ChatClient:
    if cfg.offline:
        raise HintkitError("offline mode forbids chat endpoints")
    if not cfg.chat_url:
        raise HintkitError("no chat endpoint configured (set chat_url or HINTKIT_CHAT_URL)")
    cache = ResponseCache(cfg.resolved_cache_dir() / "responses")
    return ChatClient(cfg.chat_url, api_key=cfg.chat_key or None, cache=cache)


def _build_backends(cfg: RunConfig) -> Backends:
    backends = Backends(chat_model=cfg.model, window_days=cfg.window_days)
    cache = ResponseCache(cfg.resolved_cache_dir() / "responses")
    if not cfg.offline:
        if cfg.chat_url:
            backends.chat = ChatClient(cfg.chat_url, api_key=cfg.chat_key or None, cache=cache)
        if cfg.embed_url:
            backends.embed = EmbeddingClient(cfg.embed_url, api_key=cfg.embed_key or None,
                                             model=cfg.embed_model, cache=cache)
        backends.pageviews = PageviewsClient(cache=cache)
        if cfg.specificity_url:
            backends.specificity = RemoteScorerClient(cfg.specificity_url, cache=cache)
        if cfg.regression_url:
            backends.regression = RemoteScorerClient(cfg.regression_url, cache=cache)
    if cfg.vectors_path:
        backends.vectors = load_static_vectors(cfg.vectors_path)
    if cfg.freq_table_path:
        backends.freq_table = load_frequency_table(cfg.freq_table_path)
    if cfg.linear_scorer_path:
        backends.linear_scorer = load_linear_scorer(cfg.linear_scorer_path)
    return backends


# --- dataset ------------------------------------------------------------------

def cmd_dataset_list(args: argparse.Namespace, cfg: RunConfig) -> int:
    manifest = registry.available_datasets(update=args.update,
                                           cache_dir=cfg.resolved_cache_dir(),
                                           registry_url=args.registry or cfg.registry_url)
    rows = [[e.dataset_name, str(len(e.subsets)), f"{e.num_questions:,}",
             f"{e.num_hints:,}", e.description] for e in manifest.entries]
    _print_table(["Dataset", "Subsets", "Questions", "Hints", "Description"], rows)
    if manifest.fetched_at:
        print(f"\nmanifest fetched at {manifest.fetched_at}")
    return 0


def cmd_dataset_info(args: argparse.Namespace, cfg: RunConfig) -> int:
    manifest = registry.available_datasets(update=args.update,
                                           cache_dir=cfg.resolved_cache_dir(),
                                           registry_url=args.registry or cfg.registry_url)
    entry = manifest.entry(args.name)
    print(f"{entry.dataset_name}: {entry.description}")
    rows = [[s.name, "yes" if s.finetuned else "no", "yes" if s.uses_answer else "no",
             f"{s.num_questions:,}", f"{s.num_hints:,}"] for s in entry.subsets]
    _print_table(["Subset", "Finetuned", "Use Answer", "Questions", "Hints"], rows)
    return 0


def cmd_dataset_download(args: argparse.Namespace, cfg: RunConfig) -> int:
    dataset = registry.download_dataset(args.name, cache_dir=cfg.resolved_cache_dir(),
                                        registry_url=args.registry or cfg.registry_url)
    print(f"downloaded {dataset.name} v{dataset.version}: "
          f"{dataset.num_questions()} questions, {dataset.num_hints()} hints")
    if args.out:
        dataset_io.save_dataset(dataset, args.out)
        print(f"saved to {args.out}")
    return 0


def cmd_dataset_validate(args: argparse.Namespace, cfg: RunConfig) -> int:
    path = Path(args.file)
    try:
        if path.suffix == ".json":
            dataset = dataset_io.parse_json(path.read_text(encoding="utf-8"))
        else:
            dataset = dataset_io.import_archive(path.read_bytes())
    except HintkitError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    violations = dataset_io.validate_dataset(dataset)
    if violations:
        for violation in violations:
            print(violation, file=sys.stderr)
        return 1
    print(f"OK: {dataset.name} v{dataset.version} "
          f"({dataset.num_questions()} questions, {dataset.num_hints()} hints)")
    return 0


def cmd_dataset_convert(args: argparse.Namespace, cfg: RunConfig) -> int:
    dataset = dataset_io.load_dataset(args.src)
    dataset_io.save_dataset(dataset, args.dst)
    print(f"wrote {args.dst}")
    return 0


# --- generate -----------------------------------------------------------------

def cmd_generate(args: argparse.Namespace, cfg: RunConfig) -> int:
    dataset = dataset_io.load_dataset(args.input)
    chat = _chat_client(cfg)
    gen_cfg = GenerationConfig(num_hints=args.n_hints or cfg.n_hints, model=cfg.model,
                               temperature=cfg.temperature)
    user_template = None
    if cfg.prompt_template_path:
        user_template = load_prompt_template(cfg.prompt_template_path)

    for sname, subset in dataset.subsets.items():
        ids = list(subset.instances)
        instances = [subset.instances[i] for i in ids]
        if args.replace:
            for inst in instances:
                inst.hints.clear()
        if args.mode == "aware":
            if args.skip_missing:
                kept = [(i, inst) for i, inst in zip(ids, instances) if inst.answers]
                dropped = len(instances) - len(kept)
                if dropped:
                    print(f"subset {sname}: skipping {dropped} instance(s) without answers")
                ids = [i for i, _ in kept]
                instances = [inst for _, inst in kept]
            generate_answer_aware(instances, gen_cfg, chat, ids=ids, workers=cfg.workers)
        else:
            generate_answer_agnostic(instances, gen_cfg, chat, ids=ids, workers=cfg.workers)
        generated = gen_cfg.num_hints * len(instances)
        print(f"subset {sname}: generated {generated} hints across {len(instances)} instances")

    dataset_io.save_dataset(dataset, args.output)
    print(f"wrote {args.output}")
    return 0


# --- evaluate -----------------------------------------------------------------

def cmd_evaluate(args: argparse.Namespace, cfg: RunConfig) -> int:
    dataset = dataset_io.load_dataset(args.input)
    config = MetricConfig.parse(args.metrics or cfg.metrics)
    backends = _build_backends(cfg)
    summary = evaluate_dataset(dataset, config, backends,
                               overwrite=args.overwrite,
                               include_questions=args.include_questions,
                               include_answers=args.include_answers,
                               workers=cfg.workers, offline=cfg.offline or None)
    for name, reason in summary.failures.items():
        print(f"warning: {name} failed: {reason}", file=sys.stderr)
    print(f"{summary.computed} computed, {summary.skipped} skipped")
    for sname, means in summary.per_subset.items():
        for name, mean in means.items():
            print(f"{sname}  {name}  {mean:.4f}")
    if not summary.method_names and summary.failures:
        return 1
    dataset_io.save_dataset(dataset, args.output)
    print(f"wrote {args.output}")
    return 0


# --- report -------------------------------------------------------------------

def cmd_report(args: argparse.Namespace, cfg: RunConfig) -> int:
    dataset = dataset_io.load_dataset(args.input)
    table = report_mod.collect_metric_means(dataset)
    if args.format == "csv":
        text = report_mod.to_long_csv(table) if args.long else report_mod.to_csv(table)
    elif args.format == "json":
        text = report_mod.to_json(table)
    else:
        text = report_mod.to_markdown(table)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8", newline="")
        print(f"wrote {out}")
        if not args.no_figures:
            figures_dir = Path(args.figures_dir) if args.figures_dir else out.parent
            for path in report_mod.render_figures(table, figures_dir, stem=out.stem):
                print(f"wrote {path}")
    else:
        sys.stdout.write(text)
        if args.figures_dir:
            for path in report_mod.render_figures(table, Path(args.figures_dir)):
                print(f"wrote {path}")
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hintkit",
                                     description="Generate and evaluate hints for factoid questions.")
    parser.add_argument("--config", help="path to the config file")
    parser.add_argument("--offline", action="store_true",
                        help="forbid all network use (remote methods fail fast)")
    sub = parser.add_subparsers(dest="command", required=True)

    ds = sub.add_parser("dataset", help="registry and dataset file operations")
    ds_sub = ds.add_subparsers(dest="subcommand", required=True)

    p = ds_sub.add_parser("list", help="list datasets available in the registry")
    p.add_argument("--update", action="store_true", help="refetch the registry manifest")
    p.add_argument("--registry", help="registry manifest URL")
    p.set_defaults(fn=cmd_dataset_list)

    p = ds_sub.add_parser("info", help="per-subset statistics for one dataset")
    p.add_argument("name")
    p.add_argument("--update", action="store_true")
    p.add_argument("--registry")
    p.set_defaults(fn=cmd_dataset_info)

    p = ds_sub.add_parser("download", help="download, verify, and load a dataset")
    p.add_argument("name")
    p.add_argument("--registry")
    p.add_argument("--out", help="also save the dataset to this path")
    p.set_defaults(fn=cmd_dataset_download)

    p = ds_sub.add_parser("validate", help="validate a dataset file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_dataset_validate)

    p = ds_sub.add_parser("convert", help="convert between .json and archive formats")
    p.add_argument("src")
    p.add_argument("dst")
    p.set_defaults(fn=cmd_dataset_convert)

    p = sub.add_parser("generate", help="generate hints with a chat endpoint")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=("aware", "agnostic"), required=True)
    p.add_argument("--n-hints", type=int, default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--replace", action="store_true", help="drop existing hints first")
    p.add_argument("--skip-missing", action="store_true",
                   help="in aware mode, skip instances without answers")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("evaluate", help="run metric methods over a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--metrics", help="comma list of metric/method[/variant]")
    p.add_argument("--overwrite", action="store_true", help="recompute existing results")
    p.add_argument("--include-questions", action="store_true",
                   help="also score questions with text-level methods")
    p.add_argument("--include-answers", action="store_true",
                   help="also score answers with text-level methods")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("report", help="per-subset metric means")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "json", "md"), default="csv")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--long", action="store_true", help="long-format CSV (subset,metric,value)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.add_argument("--figures-dir", help="directory for rendered figures")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.offline:
        os.environ["HINTKIT_OFFLINE"] = "1"
    flag_values = {
        "offline": True if args.offline else None,
        "model": getattr(args, "model", None),
        "workers": getattr(args, "workers", None),
    }
    try:
        cfg = load_run_config(flag_values, config_path=args.config)
        return args.fn(args, cfg)
    except MissingAnswer as exc:
        print(f"error: {exc} (use --skip-missing to skip such instances)", file=sys.stderr)
        return 1
    except (HintkitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
