"""Command-line entry point orchestrating all pipelines.

Exit codes are a stable contract: 0 on success, 1 on runtime failure, 2 on
usage errors. Every subcommand that writes into an output directory also
writes a manifest naming each artifact and its content hash. Given an intact
cache and fixed seeds, subcommands are idempotent (byte-identical outputs,
timestamps aside).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path
from typing import Sequence

from . import corpus, distillgen, diststat, evalrun, gapstats, mixer, mockserver
from .config import RunConfig, load_run_config
from .corpus import canonical_json
from .errors import CotmixError
from .inference import InferenceClient

MANIFEST_FILENAME = "manifest.json"


def write_manifest(out_dir: Path) -> Path:
    artifacts = {}
    for p in sorted(out_dir.rglob("*")):
        if not p.is_file() or p.name == MANIFEST_FILENAME:
            continue
        data = p.read_bytes()
        artifacts[str(p.relative_to(out_dir))] = {
            "sha256": hashlib.sha256(data).hexdigest(),
            "bytes": len(data),
        }
    path = out_dir / MANIFEST_FILENAME
    path.write_text(json.dumps({"artifacts": artifacts}, indent=2, sort_keys=True) + "\n")
    return path


def _load_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    if not getattr(args, "config", None):
        parser.error("--config is required for this command")
    cfg = load_run_config(args.config)
    # flags override config values
    if getattr(args, "cache_dir", None):
        cfg = dataclasses.replace(cfg, cache_dir=Path(args.cache_dir))
    if getattr(args, "output_dir", None):
        cfg = dataclasses.replace(cfg, output_dir=Path(args.output_dir))
    if getattr(args, "run_seed", None) is not None:
        cfg = dataclasses.replace(cfg, run_seed=args.run_seed)
    return cfg


def _client(cfg: RunConfig) -> InferenceClient:
    return InferenceClient(cache_dir=cfg.cache_dir)


def _parse_benchmark_args(pairs: Sequence[str], parser: argparse.ArgumentParser) -> dict[str, str]:
    benchmarks: dict[str, str] = {}
    for item in pairs:
        name, sep, path = item.partition("=")
        if not sep or not path:
            parser.error(f"--benchmarks entries must look like name=path, got {item!r}")
        if name not in corpus.SOURCES:
            parser.error(f"unknown benchmark {name!r}; expected one of {corpus.SOURCES}")
        if name in benchmarks:
            parser.error(f"benchmark {name!r} given twice")
        benchmarks[name] = path
    return benchmarks


# -- subcommand handlers -------------------------------------------------------


def cmd_generate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cfg = _load_config(args, parser)
    teacher = cfg.endpoint(args.teacher)
    problems = corpus.load_problems(args.problems, source=args.source)
    job = distillgen.GenerationJob(
        problems=tuple(problems),
        teacher=teacher,
        style=args.style,
        prompt_template=args.template,
        max_attempts=args.max_attempts,
        sampling_temperature=args.sampling_temperature,
        run_seed=cfg.run_seed,
        max_tokens=cfg.defaults.max_tokens,
    )
    out_dir = Path(args.out_dir) if args.out_dir else cfg.output_dir / f"gen-{args.teacher}-{args.style}"
    client = _client(cfg)
    summary = distillgen.run_generation(client, job, out_dir)
    write_manifest(out_dir)
    print(
        f"{summary['solved']} traces, {summary['dropped']} dropped, "
        f"{summary['network_requests']} new requests"
    )
    print(f"outputs in {out_dir}")
    return 0 if summary["complete"] else 1


def cmd_mix(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if not 0 <= args.alpha <= 1:
        parser.error(f"--alpha must be in [0, 1], got {args.alpha}")
    a = corpus.load_dataset(args.a)
    b = corpus.load_dataset(args.b)
    spec = mixer.MixSpec(
        source_a=str(args.a), source_b=str(args.b), alpha=args.alpha, seed=args.seed, mode=args.mode
    )
    mixed = mixer.mix(spec, a, b)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus.save_dataset(mixed, out)
    n_a = mixed.provenance["count_a"]
    n_b = mixed.provenance["count_b"]
    print(f"mixed {len(mixed.examples)} examples: {n_a} from source a, {n_b} from source b")
    if args.format:
        export_path = out.with_suffix(f".{args.format}.jsonl")
        mixer.export(mixed, args.format, export_path)
        print(f"exported {args.format} file to {export_path}")
    print(f"dataset written to {out}")
    return 0


def cmd_eval(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cfg = _load_config(args, parser)
    student = cfg.endpoint(args.student)
    judge_name = args.judge if args.judge is not None else cfg.judge
    judge = cfg.endpoint(judge_name) if judge_name else None
    benchmarks = _parse_benchmark_args(args.benchmarks, parser)
    run_id = hashlib.sha256(
        canonical_json({"model": student.model, "benchmarks": benchmarks}).encode()
    ).hexdigest()[:12]
    out_dir = Path(args.out_dir) if args.out_dir else cfg.output_dir / f"eval-{args.student}-{run_id}"
    client = _client(cfg)
    report, records = evalrun.evaluate(
        client,
        student,
        benchmarks,
        judge=judge,
        out_dir=out_dir,
        allow_partial=args.allow_partial,
    )
    write_manifest(out_dir)
    print(evalrun.render_report_md(report))
    print(f"{client.network_requests} new requests, {client.cache_hits} cache hits")
    print(f"outputs in {out_dir}")
    return 0


def cmd_gap(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    first = evalrun.load_score_report(args.first)
    second = evalrun.load_score_report(args.second)
    gap = gapstats.compute_gap(first, second, label=args.label)
    label = args.model_label or first.model
    markdown, csv_text = gapstats.render_gap_table([(label, gap)], max_abs=args.shade_max)
    print(markdown)
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "gap.md").write_text(markdown, encoding="utf-8")
        (out_dir / "gap.csv").write_text(csv_text, encoding="utf-8")
        write_manifest(out_dir)
        print(f"outputs in {out_dir}")
    return 0


def cmd_ablate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    points = []
    for item in args.points:
        alpha_text, sep, path = item.partition("=")
        if not sep:
            parser.error(f"--points entries must look like alpha=path, got {item!r}")
        try:
            alpha = float(alpha_text)
        except ValueError:
            parser.error(f"bad alpha in {item!r}")
        points.append((alpha, evalrun.load_score_report(path)))
    curve, best = gapstats.ablation_curve(points)
    for alpha, avg in curve:
        print(f"alpha={alpha:g} average={avg:.2f}")
    print(f"argmax alpha: {best:g}")
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        lines = ["alpha,average_pct"] + [f"{a!r},{avg!r}" for a, avg in curve]
        (out_dir / "ablation.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        (out_dir / "ablation.json").write_text(
            json.dumps({"curve": curve, "argmax_alpha": best}, indent=2) + "\n", encoding="utf-8"
        )
        write_manifest(out_dir)
    return 0


def cmd_recipe(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    text = mixer.emit_recipe(args.size, lr=args.lr, num_epochs=args.epochs, name=args.name)
    print(text, end="")
    if args.out:
        mixer.write_recipe(text, args.out)
        print(f"recipe written to {args.out}")
    return 0


def cmd_mock_serve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    script = mockserver.load_script(args.script) if args.script else {}
    server = mockserver.MockInferenceServer(script, host=args.host, port=args.port)
    print(f"mock inference server listening on {server.url}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def _load_trace_prompt_pairs(
    args: argparse.Namespace,
) -> list[tuple[str, corpus.CoTTrace]]:
    problems = {p.id: p for p in corpus.load_problems(args.problems, source=args.source)}
    traces = corpus.load_traces(args.traces)
    missing = [t.problem_id for t in traces if t.problem_id not in problems]
    if missing:
        raise CotmixError(f"traces reference unknown problems: {missing[:10]}")
    return [
        (distillgen.render_teacher_prompt(problems[t.problem_id], "standard"), t) for t in traces
    ]


def cmd_analyze(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    out_dir = Path(args.out_dir) if getattr(args, "out_dir", None) else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    if args.analysis == "length":
        stats = corpus.corpus_token_stats(corpus.load_traces(args.traces))
        print(
            f"mean={stats['mean']:.1f} median={stats['median']:.1f} max={stats['max']}"
        )
        if out_dir:
            (out_dir / "length.json").write_text(json.dumps(stats, indent=2) + "\n")
            write_manifest(out_dir)
        return 0

    if args.analysis == "tfidf":
        report = diststat.tfidf_similarity(_load_pairs(args.pairs))
        _print_similarity(report, out_dir)
        return 0

    if args.analysis == "embed":
        cfg = _load_config(args, parser)
        endpoint = cfg.endpoint(args.endpoint)
        report = diststat.embedding_similarity(_load_pairs(args.pairs), endpoint, _client(cfg))
        _print_similarity(report, out_dir)
        return 0

    if args.analysis == "ppl":
        cfg = _load_config(args, parser)
        scorer = cfg.endpoint(args.scorer)
        client = _client(cfg)
        scored = []
        skips = []
        for prompt, trace in _load_trace_prompt_pairs(args):
            seq = client.score_sequence(scorer, prompt + trace.text, args.top_k)
            scored.append(seq)
            skips.append(diststat.prompt_token_count(seq.tokens, len(prompt)))
        ppl = diststat.corpus_perplexity(scored, skips)
        print(f"corpus perplexity: {ppl:.4f}")
        if out_dir:
            (out_dir / "ppl.json").write_text(
                json.dumps({"perplexity": ppl, "sequences": len(scored)}, indent=2) + "\n"
            )
            write_manifest(out_dir)
        return 0

    if args.analysis == "rankshift":
        cfg = _load_config(args, parser)
        scorer = cfg.endpoint(args.scorer)
        client = _client(cfg)
        annotated: list[diststat.RankShiftRecord] = []
        stream_lines = []
        for prompt, trace in _load_trace_prompt_pairs(args):
            records, top_positions = diststat.rank_shift(
                client, scorer, prompt, trace, k=args.top_k, top_m=args.top_m
            )
            chosen = set(top_positions)
            for record in records:
                stream_lines.append(canonical_json(record.to_record()))
            annotated.extend(r for r in records if r.position in chosen)
        summary = diststat.shifted_token_summary(annotated)
        print("token,occurrences")
        for token, count in summary:
            print(f"{token!r},{count}")
        if out_dir:
            (out_dir / "rankshift_records.jsonl").write_text(
                "\n".join(stream_lines) + ("\n" if stream_lines else ""), encoding="utf-8"
            )
            csv_lines = ["token,occurrences"] + [f"{json.dumps(t)},{c}" for t, c in summary]
            (out_dir / "rankshift_summary.csv").write_text("\n".join(csv_lines) + "\n")
            write_manifest(out_dir)
        return 0

    parser.error(f"unknown analysis {args.analysis!r}")
    return 2


def _load_pairs(path: str) -> list[tuple[str, str]]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                pairs.append((rec["a"], rec["b"]))
    return pairs


def _print_similarity(report: diststat.SimilarityReport, out_dir: Path | None) -> None:
    print(
        f"{report.metric} similarity over {report.n_pairs} pairs: "
        f"{report.mean:.4f} ± {report.ci_halfwidth:.4f}"
    )
    if out_dir:
        (out_dir / f"{report.metric}_similarity.json").write_text(
            json.dumps(
                {
                    "metric": report.metric,
                    "n_pairs": report.n_pairs,
                    "mean": report.mean,
                    "ci_halfwidth": report.ci_halfwidth,
                },
                indent=2,
            )
            + "\n"
        )
        write_manifest(out_dir)


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cotmix",
        description="Chain-of-thought distillation data pipelines and math-benchmark evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a verified teacher corpus by rejection sampling")
    p.add_argument("--config", required=True)
    p.add_argument("--teacher", required=True, help="endpoint name from the config")
    p.add_argument("--style", required=True, choices=corpus.STYLES)
    p.add_argument("--problems", required=True)
    p.add_argument("--source", default="custom", choices=corpus.SOURCES)
    p.add_argument("--template", default="standard", choices=distillgen.PROMPT_TEMPLATES)
    p.add_argument("--max-attempts", type=int, default=4)
    p.add_argument("--sampling-temperature", type=float, default=0.7)
    p.add_argument("--out-dir")
    p.add_argument("--cache-dir")
    p.add_argument("--output-dir")
    p.add_argument("--run-seed", type=int)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("mix", help="blend two datasets with a mixing weight")
    p.add_argument("--a", required=True, help="first source dataset file")
    p.add_argument("--b", required=True, help="second source dataset file")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", default="mix_long", choices=mixer.MIX_MODES)
    p.add_argument("--format", choices=mixer.EXPORT_FORMATS)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_mix)

    p = sub.add_parser("eval", help="evaluate a student endpoint on benchmark files")
    p.add_argument("--config", required=True)
    p.add_argument("--student", required=True)
    p.add_argument("--benchmarks", nargs="+", required=True, metavar="NAME=PATH")
    p.add_argument("--judge", help="judge endpoint name (default: config judge)")
    p.add_argument("--allow-partial", action="store_true")
    p.add_argument("--out-dir")
    p.add_argument("--cache-dir")
    p.add_argument("--output-dir")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("gap", help="compute the gap between two score reports")
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--label", default="delta_long", choices=gapstats.GAP_LABELS)
    p.add_argument("--model-label")
    p.add_argument("--shade-max", type=float, default=gapstats.DEFAULT_SHADE_MAX)
    p.add_argument("--out-dir")
    p.set_defaults(handler=cmd_gap)

    p = sub.add_parser("ablate", help="summarize a mixing-weight sweep")
    p.add_argument("--points", nargs="+", required=True, metavar="ALPHA=REPORT")
    p.add_argument("--out-dir")
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("analyze", help="distribution and length analytics")
    asub = p.add_subparsers(dest="analysis", required=True)

    a = asub.add_parser("ppl", help="pooled corpus perplexity under a scoring endpoint")
    a.add_argument("--config", required=True)
    a.add_argument("--scorer", required=True)
    a.add_argument("--traces", required=True)
    a.add_argument("--problems", required=True)
    a.add_argument("--source", default="custom", choices=corpus.SOURCES)
    a.add_argument("--top-k", type=int, default=20)
    a.add_argument("--out-dir")
    a.add_argument("--cache-dir")
    a.set_defaults(handler=cmd_analyze)

    a = asub.add_parser("tfidf", help="tf-idf cosine similarity over document pairs")
    a.add_argument("--pairs", required=True, help="jsonl of {a, b} records")
    a.add_argument("--out-dir")
    a.set_defaults(handler=cmd_analyze)

    a = asub.add_parser("embed", help="embedding cosine similarity over document pairs")
    a.add_argument("--config", required=True)
    a.add_argument("--endpoint", required=True)
    a.add_argument("--pairs", required=True)
    a.add_argument("--out-dir")
    a.add_argument("--cache-dir")
    a.set_defaults(handler=cmd_analyze)

    a = asub.add_parser("rankshift", help="most-shifted-token analysis under a base scorer")
    a.add_argument("--config", required=True)
    a.add_argument("--scorer", required=True)
    a.add_argument("--traces", required=True)
    a.add_argument("--problems", required=True)
    a.add_argument("--source", default="custom", choices=corpus.SOURCES)
    a.add_argument("--top-k", type=int, default=20)
    a.add_argument("--top-m", type=int, default=20)
    a.add_argument("--out-dir")
    a.add_argument("--cache-dir")
    a.set_defaults(handler=cmd_analyze)

    a = asub.add_parser("length", help="token-length statistics of a trace corpus")
    a.add_argument("--traces", required=True)
    a.add_argument("--out-dir")
    a.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("recipe", help="emit a training recipe for a student size")
    p.add_argument("--size", type=float, required=True, help="student size in billions of parameters")
    p.add_argument("--lr", type=float, help="sensitivity override for the learning rate")
    p.add_argument("--epochs", type=int, help="sensitivity override for the epoch count")
    p.add_argument("--name", help="optional config name line")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_recipe)

    p = sub.add_parser("mock-serve", help="run the bundled mock inference server")
    p.add_argument("--script", help="JSON script of scripted responses")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)
    p.set_defaults(handler=cmd_mock_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except CotmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
