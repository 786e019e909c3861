"""Command-line entry point: `python main.py <command> ...`.

Exit codes: 0 success, 1 input error, 2 internal error.
"""

import argparse
import json
import logging
import subprocess
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

from app.config import RunConfig, Settings
from app.errors import BiasKitError, EmptyInput, InputError
from app.models.scores import report_value, round_half_up
from app.services import metrics
from app.services.conll_io import extract_chains, read_conll, write_conll_file
from app.services.gender_swap import DEFAULT_ENTITY_TYPES, augment_corpus, load_dictionary, write_dictionary
from app.services.report_store import ReportStore
from app.services.resources import (analyze_corpus_bias, balance_gender_list, load_gazetteer, load_gender_list,
                                   write_gender_list)
from app.services.rule_mining import load_span_pairs, mine_rules
from app.services.winogen import (PAIRING_STRATEGIES, emit, generate, gold_counts, load_examples_jsonl,
                                  load_occupations, load_templates, parity, split_dev_test, unpaired_occupations)

logger = logging.getLogger(__name__)

DASHBOARD = Path(__file__).resolve().parent.parent / "dashboard.py"


def _out(config: RunConfig, payload: Dict, text: str) -> None:
    if config.output_format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _write_json(path: Optional[Path], payload: Dict) -> None:
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info("Wrote %s", path)


def cmd_validate(config: RunConfig) -> int:
    path = config.inputs["conll"]
    try:
        corpus = read_conll(path)
        if not len(corpus):
            raise EmptyInput(f"{path} contains no documents")
        chains = [chain for part in corpus for chain in extract_chains(part)]
    except InputError as exc:
        _out(config, {"valid": False, "file": str(path), "error": str(exc), "line": exc.line},
             f"{path}: INVALID: {exc}")
        return exc.exit_code

    sentences = sum(len(part.sentences) for part in corpus)
    tokens = sum(1 for part in corpus for _ in part.tokens())
    payload = {
        "valid": True,
        "file": str(path),
        "parts": len(corpus),
        "sentences": sentences,
        "tokens": tokens,
        "chains": len(chains),
        "mentions": sum(len(chain) for chain in chains),
    }
    _out(config, payload, f"{path}: OK ({len(corpus)} parts, {sentences} sentences, {tokens} tokens, "
                          f"{payload['chains']} chains, {payload['mentions']} mentions)")
    return 0


def cmd_augment(config: RunConfig) -> int:
    corpus = read_conll(config.inputs["conll"])
    dictionary = load_dictionary(config.inputs["dictionary"])
    augmented = augment_corpus(corpus, dictionary, anonymize=config.flags["anonymize"],
                               entity_types=config.flags["entity_types"])
    write_conll_file(augmented, config.output)
    _out(config, {"input_parts": len(corpus), "output_parts": len(augmented), "output": str(config.output)},
         f"Wrote {len(augmented)} parts ({len(corpus)} original + {len(corpus)} swapped) to {config.output}")
    return 0


def cmd_mine_rules(config: RunConfig) -> int:
    pairs = load_span_pairs(config.inputs["pairs"])
    dictionary = mine_rules(pairs, min_support=config.flags["min_support"])
    config.output.parent.mkdir(parents=True, exist_ok=True)
    config.output.write_text(write_dictionary(dictionary), encoding="utf-8")
    _out(config, {"pairs": len(pairs), "rules": len(dictionary), "output": str(config.output)},
         f"Mined {len(dictionary)} rules from {len(pairs)} span pairs into {config.output}")
    return 0


def cmd_generate(config: RunConfig) -> int:
    templates = load_templates(config.inputs["templates"])
    occupations = load_occupations(config.inputs["occupations"])
    examples = generate(templates, occupations, config.flags["pairing"], config.seed)
    dev, test = split_dev_test(examples, config.seed)
    unpaired = unpaired_occupations(occupations, config.flags["pairing"])

    prefix = config.output
    files = []
    for name, subset in (("dev", dev), ("test", test)):
        for fmt in ("conll", "jsonl"):
            files.append(str(emit(subset, fmt, prefix.with_name(f"{prefix.name}.{name}.{fmt}"))))

    payload = {
        "examples": len(examples),
        "dev": {"size": len(dev), "parity": parity(dev)},
        "test": {"size": len(test), "parity": parity(test)},
        "gold_counts": dict(sorted(gold_counts(examples).items())),
        "unpaired_occupations": unpaired,
        "files": files,
    }
    lines = [f"Generated {len(examples)} examples ({len(dev)} dev / {len(test)} test)"]
    if unpaired:
        lines.append(f"  {unpaired} occupations left unpaired")
    for name, subset in (("dev", dev), ("test", test)):
        for kind, counts in parity(subset).items():
            lines.append(f"  {name} {kind}: pro={counts['pro']} anti={counts['anti']}")
    lines.extend(f"  wrote {f}" for f in files)
    _out(config, payload, "\n".join(lines))
    return 0


def _score_payload(config: RunConfig) -> Dict:
    key = read_conll(config.inputs["key"])
    response = read_conll(config.inputs["response"])
    keep_singletons = not config.flags["no_singletons"]

    ontonotes = None
    if config.inputs.get("ontonotes_key") is not None:
        _, ontonotes = metrics.score_corpora(read_conll(config.inputs["ontonotes_key"]),
                                             read_conll(config.inputs["ontonotes_response"]), keep_singletons)

    challenge = config.inputs.get("challenge")
    if challenge is not None:
        examples = load_examples_jsonl(challenge.read_text(encoding="utf-8"))
        report = metrics.wino_bias_report(examples, key, response, config.flags["metric"],
                                          config.iterations, config.seed)
        if ontonotes is not None:
            report = replace(report, ontonotes_f1=100 * ontonotes)
        payload = report.to_report()
    else:
        report = None
        scores, conll = metrics.score_corpora(key, response, keep_singletons)
        payload = {name: triple.to_report() for name, triple in scores.items()}
        payload["conll_avg"] = report_value(conll)
        if ontonotes is not None:
            payload["ontonotes_f1"] = report_value(ontonotes)

    if config.inputs.get("reversed_response") is not None:
        metric = config.flags["metric"] if config.flags["metric"] != "accuracy" else "conll"
        original = metrics.per_document_scores(key, response, metric, keep_singletons)
        reversed_key = read_conll(config.inputs["reversed_key"])
        reversed_scores = metrics.per_document_scores(reversed_key, read_conll(config.inputs["reversed_response"]),
                                                      metric, keep_singletons)
        comparison = metrics.compare_reversed(original, reversed_scores, config.iterations, config.seed)
        payload["reversed"] = {
            "original": round_half_up(comparison["original"]),
            "reversed": round_half_up(comparison["reversed"]),
            "diff": round_half_up(comparison["diff"]),
            "p": comparison["p"],
        }

    if report is not None:
        payload["passes"] = metrics.passes_winobias(report)
        label = config.flags.get("store")
        if label:
            store = ReportStore()
            try:
                payload["stored_id"] = store.save(
                    report, label,
                    anonymized=config.flags["anonymized"],
                    debiased_resources=config.flags["debiased_resources"],
                    augmented=config.flags["augmented"],
                    extra={"reversed": payload["reversed"]} if "reversed" in payload else None,
                )
            finally:
                store.db.close()
    elif config.flags.get("store"):
        logger.warning("--store needs --challenge; nothing stored")
    return payload


def _score_text(payload: Dict) -> str:
    lines = []
    for name in metrics.METRICS:
        if name in payload:
            triple = payload[name]
            lines.append(f"{name:<6} P={triple['P']:5.1f} R={triple['R']:5.1f} F1={triple['F1']:5.1f}")
    if "conll_avg" in payload:
        lines.append(f"CoNLL average F1 {payload['conll_avg']:.1f}")
    if "ontonotes_f1" in payload:
        lines.append(f"OntoNotes F1 {payload['ontonotes_f1']:.1f}")
    bias = payload.get("bias")
    if bias:
        lines.append(f"WinoBias ({bias['metric']})  Pro   Anti   Avg  |Diff|  p")
        for kind in ("t1", "t2"):
            row = bias[kind]
            p = "-" if row["p"] is None else f"{row['p']:.4f}"
            lines.append(f"  {kind.upper()}  {row['pro']:5.1f} {row['anti']:5.1f} {row['avg']:5.1f} "
                         f"{row['diff']:5.1f}  {p}")
        lines.append("no significant pro/anti difference" if payload["passes"]
                     else "significant pro/anti difference")
    if "reversed" in payload:
        rev = payload["reversed"]
        lines.append(f"Original {rev['original']:.1f} vs gender-reversed {rev['reversed']:.1f}: "
                     f"|Diff| {rev['diff']:.1f}, p={rev['p']:.4f}")
    if "stored_id" in payload:
        lines.append(f"Stored as report {payload['stored_id']}")
    return "\n".join(lines)


def cmd_score(config: RunConfig) -> int:
    payload = _score_payload(config)
    _write_json(config.output, payload)
    _out(config, payload, _score_text(payload))
    return 0


def cmd_balance(config: RunConfig) -> int:
    gender_list = load_gender_list(config.inputs["gender_list"])
    balanced = balance_gender_list(gender_list)
    config.output.parent.mkdir(parents=True, exist_ok=True)
    config.output.write_text(write_gender_list(balanced), encoding="utf-8")
    _out(config, {"phrases": len(balanced), "output": str(config.output)},
         f"Balanced {len(balanced)} phrases into {config.output}")
    return 0


def cmd_analyze(config: RunConfig) -> int:
    corpus = read_conll(config.inputs["conll"])
    stats = analyze_corpus_bias(corpus, load_gazetteer(config.inputs["gazetteer"]))
    payload = stats.to_report()
    _write_json(config.output, payload)
    if stats.empty:
        text = "No chain is headed by a gendered pronoun"
    else:
        text = "\n".join([
            f"Gendered entities: {stats.gendered_entity_total} "
            f"({stats.male_chains} male, {stats.female_chains} female), {100 * stats.male_fraction:.1f}% male",
            f"Job title rate: male {100 * stats.male_jobtitle_rate:.1f}%, "
            f"female {100 * stats.female_jobtitle_rate:.1f}% (ratio {stats.jobtitle_ratio:.2f})",
            *(f"  {genre}: {tally.gendered_entity_total} entities, {100 * tally.male_fraction:.1f}% male"
              for genre, tally in sorted(stats.per_genre.items())),
        ])
    _out(config, payload, text)
    return 0


def cmd_dashboard(config: RunConfig) -> int:
    return subprocess.run([sys.executable, "-m", "streamlit", "run", str(DASHBOARD)]).returncode


COMMANDS = {
    "validate": cmd_validate,
    "augment": cmd_augment,
    "mine-rules": cmd_mine_rules,
    "generate": cmd_generate,
    "score": cmd_score,
    "balance": cmd_balance,
    "analyze": cmd_analyze,
    "dashboard": cmd_dashboard,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Gender bias toolkit for coreference resolution",
        epilog="--format and --verbose are global options and go before the command, "
               "e.g. main.py --format json validate train.conll",
    )
    parser.add_argument("--format", choices=("json", "text"), default="text",
                        help="output format, given before COMMAND (default: text)")
    parser.add_argument("--verbose", action="store_true", help="log debug messages to stderr, given before COMMAND")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    validate = sub.add_parser("validate", help="check a CoNLL-2012 file")
    validate.add_argument("conll", type=Path)

    augment = sub.add_parser("augment", help="append gender-swapped copies of every document part")
    augment.add_argument("conll", type=Path)
    augment.add_argument("output", type=Path)
    augment.add_argument("--dictionary", type=Path, help="swap rule TSV (default: bundled rules)")
    augment.add_argument("--no-anonymize", action="store_true", help="keep named entities as they are")
    augment.add_argument("--entity-types", nargs="+", default=list(DEFAULT_ENTITY_TYPES), metavar="TYPE",
                         help="named entity types to anonymize (default: PERSON)")

    mine = sub.add_parser("mine-rules", help="mine swap rules from annotated span edits")
    mine.add_argument("pairs", type=Path)
    mine.add_argument("output", type=Path)
    mine.add_argument("--min-support", type=int, default=1, metavar="N")

    gen = sub.add_parser("generate", help="generate WinoBias-style dev/test challenge files")
    gen.add_argument("output_prefix", type=Path)
    gen.add_argument("--templates", type=Path, help="template TOML (default: bundled templates)")
    gen.add_argument("--occupations", type=Path, help="occupation CSV (default: bundled statistics)")
    gen.add_argument("--pairing", choices=PAIRING_STRATEGIES, default="cross")
    gen.add_argument("--seed", type=int, default=None)

    score = sub.add_parser("score", help="score a response against a key, with bias gaps for challenge sets")
    score.add_argument("key", type=Path)
    score.add_argument("response", type=Path)
    score.add_argument("--challenge", type=Path, help="challenge JSONL matching the key")
    score.add_argument("--metric", choices=metrics.BIAS_METRICS, default="conll",
                       help="score behind the pro/anti columns (default: conll)")
    score.add_argument("--ontonotes-key", type=Path)
    score.add_argument("--ontonotes-response", type=Path)
    score.add_argument("--reversed-response", type=Path, help="response on the gender-reversed documents")
    score.add_argument("--reversed-key", type=Path, help="key of the gender-reversed documents")
    score.add_argument("--no-singletons", action="store_true", help="drop single-mention chains before scoring")
    score.add_argument("--output", type=Path, help="also write the JSON report here")
    score.add_argument("--store", metavar="LABEL", help="save the bias report to the report database")
    score.add_argument("--anonymized", action="store_true", help="stored condition: trained with anonymization")
    score.add_argument("--debiased-resources", action="store_true",
                       help="stored condition: trained with debiased resources")
    score.add_argument("--augmented", action="store_true", help="stored condition: trained on augmented data")
    score.add_argument("--seed", type=int, default=None)
    score.add_argument("--iterations", type=int, default=None)

    balance = sub.add_parser("balance", help="balance male and female counts of a gender list")
    balance.add_argument("gender_list", type=Path)
    balance.add_argument("output", type=Path)

    analyze = sub.add_parser("analyze", help="gender statistics of a coreference corpus")
    analyze.add_argument("conll", type=Path)
    analyze.add_argument("--gazetteer", type=Path, help="job title list (default: bundled titles)")
    analyze.add_argument("--output", type=Path, help="also write the JSON statistics here")

    sub.add_parser("dashboard", help="open the report dashboard")
    return parser


def run_config(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """Translate parsed arguments into a RunConfig, filling bundled defaults."""
    command = args.command
    inputs: Dict[str, Optional[Path]] = {}
    output = None
    flags: Dict = {}
    if command in ("validate", "analyze"):
        inputs["conll"] = args.conll
    if command == "augment":
        inputs["conll"] = args.conll
        inputs["dictionary"] = args.dictionary or settings.dictionary_file
        output = args.output
        flags = {"anonymize": not args.no_anonymize, "entity_types": tuple(args.entity_types)}
    elif command == "mine-rules":
        inputs["pairs"] = args.pairs
        output = args.output
        if args.min_support < 1:
            raise InputError("--min-support must be at least 1")
        flags = {"min_support": args.min_support}
    elif command == "generate":
        inputs["templates"] = args.templates or settings.templates_file
        inputs["occupations"] = args.occupations or settings.occupations_file
        output = args.output_prefix
        flags = {"pairing": args.pairing}
    elif command == "score":
        if (args.ontonotes_key is None) != (args.ontonotes_response is None):
            raise InputError("--ontonotes-key and --ontonotes-response go together")
        if (args.reversed_key is None) != (args.reversed_response is None):
            raise InputError("--reversed-key and --reversed-response go together")
        if args.metric == "accuracy" and args.challenge is None:
            raise InputError("--metric accuracy needs --challenge")
        inputs.update(key=args.key, response=args.response, challenge=args.challenge,
                      ontonotes_key=args.ontonotes_key, ontonotes_response=args.ontonotes_response,
                      reversed_key=args.reversed_key, reversed_response=args.reversed_response)
        output = args.output
        flags = {"metric": args.metric, "no_singletons": args.no_singletons, "store": args.store,
                 "anonymized": args.anonymized, "debiased_resources": args.debiased_resources,
                 "augmented": args.augmented}
    elif command == "balance":
        inputs["gender_list"] = args.gender_list
        output = args.output
    elif command == "analyze":
        inputs["gazetteer"] = args.gazetteer or settings.gazetteer_file
        output = args.output

    seed = getattr(args, "seed", None)
    iterations = getattr(args, "iterations", None)
    return RunConfig(
        command=command,
        inputs=inputs,
        output=output,
        seed=settings.seed if seed is None else seed,
        iterations=settings.iterations if iterations is None else iterations,
        output_format=args.format,
        flags=flags,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = run_config(args, Settings.from_env())
        logger.debug("Running %s with %s", config.command, config)
        return COMMANDS[config.command](config)
    except (InputError, FileNotFoundError) as exc:
        logger.error("%s", exc)
        return 1
    except BiasKitError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except Exception as exc:
        logger.error("Internal error while running %s: %s", args.command, exc)
        logger.debug("Traceback", exc_info=True)
        return 2
