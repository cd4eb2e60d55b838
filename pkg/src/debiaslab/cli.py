"""Command line interface.

Verbs: augment, train-debias, train-task, eval {weat,becpro,disco,sts,nli},
sweep, heatmap, gen {becpro,disco,nli,corpus,tasknli}. Shared flags:
--config, --seed, --out. Exit codes: 0 success, 1 usage error, 2 data
error, 3 numeric failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from debiaslab import cda, generators
from debiaslab.checkpoint import load_checkpoint, save_checkpoint
from debiaslab.config import RunConfig
from debiaslab.errors import DataError, NumericError, UsageError
from debiaslab.metrics import (
    BiasSpec, EncoderMlmScorer, LayerRange, becpro_score, disco_scores,
    nli_accuracy, nli_bias, sts_bias, sts_pearson, weat_test,
)
from debiaslab.model import NLI_HEAD, STS_HEAD, AdapterConfig, Encoder, ModelConfig
from debiaslab.reports import make_report, write_csv, write_report
from debiaslab.sweep import SWEEP_MODES, fairness_sweep, heatmap_grid
from debiaslab.training import (
    MODE_ADAPTER, MODE_FULL, make_nli_prob_fn, make_sts_score_fn,
    train_debias, train_mlm, train_task,
)
from debiaslab.vocab import Vocab


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common_flags(p):
    p.add_argument("--config", help="run config JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file or directory")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="debiaslab", description=__doc__)
    sub = root.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="two-sided counterfactual augmentation")
    _common_flags(p)
    p.add_argument("--lexicon", help="term-pair TSV (default: shipped gender pairs)")
    p.add_argument("--corpus", required=True, help="input corpus, one sentence per line")
    p.add_argument("--annotate", action="store_true",
                   help="write text<TAB>orig|cf<TAB>source-line")
    p.add_argument("--one-sided", action="store_true",
                   help="keep only the counterfactual side")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train-debias", help="train the debias adapter via MLM")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True, help="input model checkpoint")
    p.set_defaults(func=cmd_train_debias)

    p = sub.add_parser("train-task", help="downstream fine-tuning")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--task", choices=("nli", "sts"), required=True)
    p.add_argument("--mode", choices=(MODE_FULL, MODE_ADAPTER), default=MODE_FULL)
    p.add_argument("--data", required=True, help="training TSV")
    p.add_argument("--dev", help="labeled dev TSV")
    p.set_defaults(func=cmd_train_task)

    p = sub.add_parser("pretrain", help="from-scratch MLM training of the toy model")
    _common_flags(p)
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("eval", help="bias evaluations")
    _common_flags(p)
    evalsub = p.add_subparsers(dest="measure", required=True)

    pw = evalsub.add_parser("weat")
    _common_flags(pw)
    pw.add_argument("--checkpoint", required=True)
    pw.add_argument("--spec", help="bias-spec JSON (default: shipped gender test)")
    pw.add_argument("--range", default=None, help="level range m:n (default 0:L)")
    pw.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    pw.add_argument("--samples", type=int, default=50_000)
    pw.set_defaults(func=cmd_eval_weat)

    pb = evalsub.add_parser("becpro")
    _common_flags(pb)
    pb.add_argument("--checkpoint", required=True)
    pb.add_argument("--data", required=True, help="male<TAB>female<TAB>profession TSV")
    pb.add_argument("--signed", action="store_true",
                    help="threshold on signed bias instead of |bias|")
    pb.set_defaults(func=cmd_eval_becpro)

    pd = evalsub.add_parser("disco")
    _common_flags(pd)
    pd.add_argument("--checkpoint", required=True)
    pd.add_argument("--data", required=True, help="male/female filled-template TSV")
    pd.add_argument("--threshold", type=float, default=0.1)
    pd.add_argument("--denominator", choices=("corrected", "literal"), default="corrected")
    pd.set_defaults(func=cmd_eval_disco)

    ps = evalsub.add_parser("sts")
    _common_flags(ps)
    ps.add_argument("--checkpoint", required=True)
    ps.add_argument("--data", required=True, help="male-pair/female-pair TSV (4 columns)")
    ps.add_argument("--dev", help="labeled s1/s2/score TSV for Pearson")
    ps.set_defaults(func=cmd_eval_sts)

    pn = evalsub.add_parser("nli")
    _common_flags(pn)
    pn.add_argument("--checkpoint", required=True)
    pn.add_argument("--data", required=True, help="premise/hypothesis(/label) TSV")
    pn.add_argument("--dev", help="labeled dev TSV for accuracy")
    pn.set_defaults(func=cmd_eval_nli)

    p = sub.add_parser("sweep", help="fairness-forgetting sweep")
    _common_flags(p)
    p.add_argument("--plain", required=True, help="checkpoint without debias adapter")
    p.add_argument("--debiased", required=True, help="checkpoint with trained debias adapter")
    p.add_argument("--data", required=True, help="task training TSV")
    p.add_argument("--bias", required=True, help="bias eval premise/hypothesis TSV")
    p.add_argument("--dev", help="labeled dev TSV")
    p.add_argument("--sizes", default="100,250,500,1000")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--modes", default=",".join(SWEEP_MODES))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("heatmap", help="effect-size grid over all level ranges")
    _common_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--spec", help="bias-spec JSON (default: shipped gender test)")
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--samples", type=int, default=50_000)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("gen", help="dataset generators")
    _common_flags(p)
    gensub = p.add_subparsers(dest="dataset", required=True)
    for name in ("becpro", "disco", "nli", "corpus", "tasknli"):
        pg = gensub.add_parser(name)
        _common_flags(pg)
        if name == "corpus":
            pg.add_argument("--sentences", type=int, default=3000)
            pg.add_argument("--asymmetry", type=float, default=0.95)
        if name == "tasknli":
            pg.add_argument("--n", type=int, default=1000)
            pg.add_argument("--bias-strength", type=float, default=0.0)
        pg.set_defaults(func=cmd_gen, dataset=name)

    return root


def _out_path(args, default_name: str) -> Path:
    if args.out:
        path = Path(args.out)
        if path.is_dir():
            return path / default_name
        return path
    return Path(default_name)


def _load_config(args) -> RunConfig:
    if args.config:
        return RunConfig.from_file(args.config)
    return RunConfig()


def _shipped(name: str) -> str:
    return str(generators.data_path(name))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_augment(args) -> int:
    lexicon = cda.load_lexicon(args.lexicon or _shipped("gender_pairs.tsv"))
    corpus = cda.load_corpus(args.corpus)
    records = cda.augment_two_sided(corpus, lexicon)
    if args.one_sided:
        records = [r for r in records if r.origin == cda.ORIGIN_COUNTERFACTUAL]
    out = _out_path(args, "augmented.tsv" if args.annotate else "augmented.txt")
    cda.save_augmented(records, out, annotate=args.annotate)
    n_cf = sum(1 for r in records if r.origin == cda.ORIGIN_COUNTERFACTUAL)
    print(f"wrote {len(records)} sentences ({n_cf} counterfactual) to {out}")
    return 0


def _load_corpus_records(path):
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if "\t" in first:
        return cda.load_augmented(path)
    return [cda.SentenceRecord(text=t, origin=cda.ORIGIN_ORIGINAL)
            for t in cda.load_corpus(path)]


def cmd_train_debias(args) -> int:
    cfg = _load_config(args)
    corpus_path = cfg.data.get("corpus")
    if not corpus_path:
        raise DataError("config.data must name a 'corpus' path")
    records = _load_corpus_records(corpus_path)
    model = load_checkpoint(args.checkpoint)
    if "debias" not in model.adapter_configs:
        model.add_adapter("debias", cfg.adapter, seed=args.seed)
    stats = train_debias(model, records, lr=cfg.lr, batch_size=cfg.batch_size,
                         epochs=cfg.epochs, mask_rate=cfg.mask_rate, seed=args.seed,
                         schedule=cfg.schedule)
    out = _out_path(args, "debiased.ckpt")
    save_checkpoint(model, out)
    report = make_report(
        "train-debias", config=cfg.to_dict(), seed=args.seed,
        metrics={"final_loss": stats.losses[-1] if stats.losses else None,
                 "steps": stats.steps},
        datasets={"corpus": corpus_path},
        extra={"loss_curve": stats.losses},
    )
    write_report(report, str(out) + ".report.json")
    print(f"trained debias adapter for {stats.steps} steps -> {out}")
    return 0


def cmd_train_task(args) -> int:
    cfg = _load_config(args)
    model = load_checkpoint(args.checkpoint)
    head = NLI_HEAD if args.task == "nli" else STS_HEAD
    if args.task == "nli":
        rows = generators.load_nli_tsv(args.data)
        dev = generators.load_nli_tsv(args.dev) if args.dev else None
    else:
        rows = generators.load_sts_labeled_tsv(args.data)
        dev = generators.load_sts_labeled_tsv(args.dev) if args.dev else None
    stats = train_task(model, rows, head, args.mode, lr=cfg.lr,
                       batch_size=cfg.batch_size, epochs=cfg.epochs,
                       seed=args.seed, dev_rows=dev, adapter_config=cfg.adapter)
    out = _out_path(args, "task.ckpt")
    save_checkpoint(model, out)
    datasets = {"train": args.data}
    if args.dev:
        datasets["dev"] = args.dev
    report = make_report(
        "train-task", config=cfg.to_dict(), seed=args.seed,
        metrics={"final_loss": stats.losses[-1] if stats.losses else None,
                 "steps": stats.steps, "dev_metric": stats.dev_metric},
        datasets=datasets,
        extra={"task": args.task, "mode": args.mode},
    )
    write_report(report, str(out) + ".report.json")
    print(f"fine-tuned ({args.task}, {args.mode}) for {stats.steps} steps -> {out}")
    return 0


def cmd_pretrain(args) -> int:
    cfg = _load_config(args)
    sentences = cda.load_corpus(args.corpus)
    vocab = Vocab.from_corpus(sentences)
    model = Encoder(ModelConfig(**{**cfg.model.__dict__, "vocab_size": 0}), vocab,
                    seed=args.seed)
    stats = train_mlm(model, sentences, lr=cfg.lr, batch_size=cfg.batch_size,
                      epochs=cfg.epochs, mask_rate=cfg.mask_rate, seed=args.seed)
    out = _out_path(args, "pretrained.ckpt")
    save_checkpoint(model, out)
    report = make_report(
        "pretrain", config=cfg.to_dict(), seed=args.seed,
        metrics={"final_loss": stats.losses[-1] if stats.losses else None,
                 "steps": stats.steps},
        datasets={"corpus": args.corpus},
    )
    write_report(report, str(out) + ".report.json")
    print(f"pretrained {stats.steps} steps (final loss "
          f"{stats.losses[-1]:.4f}) -> {out}")
    return 0


def cmd_eval_weat(args) -> int:
    model = load_checkpoint(args.checkpoint)
    spec = BiasSpec.from_file(args.spec or _shipped("weat7.json"))
    layer_range = (LayerRange.parse(args.range) if args.range
                   else LayerRange(0, model.config.layers))
    res = weat_test(model, spec, layer_range, mode=args.mode,
                    samples=args.samples, seed=args.seed)
    out = _out_path(args, "weat.report.json")
    report = make_report(
        "eval-weat", config={"spec": spec.to_dict(), "mode": args.mode,
                             "samples": args.samples},
        metrics=res.to_dict(), seed=args.seed, layer_range=str(layer_range),
        datasets={"checkpoint": args.checkpoint},
    )
    write_report(report, out)
    print(f"effect size {res.effect_size:+.4f}  p {res.p_value:.6f} "
          f"({'exact' if res.exact else 'sampled'}, {res.permutations} partitions) -> {out}")
    return 0


def cmd_eval_becpro(args) -> int:
    model = load_checkpoint(args.checkpoint)
    rows = generators.load_becpro_tsv(args.data)
    res = becpro_score(EncoderMlmScorer(model), rows, signed=args.signed)
    out = _out_path(args, "becpro.report.json")
    report = make_report(
        "eval-becpro", config={"signed": args.signed}, metrics=res.to_dict(),
        seed=args.seed, n=res.n_evaluated,
        datasets={"data": args.data, "checkpoint": args.checkpoint},
    )
    write_report(report, out)
    print(f"avg bias {res.avg_bias:+.4f}  " +
          "  ".join(f"t({t})={v:.3f}" for t, v in res.fraction_below.items()) +
          f"  (n={res.n_evaluated}, skipped {res.n_skipped}) -> {out}")
    return 0


def cmd_eval_disco(args) -> int:
    model = load_checkpoint(args.checkpoint)
    rows = generators.load_disco_tsv(args.data)
    res = disco_scores(EncoderMlmScorer(model), rows, threshold=args.threshold,
                       denominator=args.denominator)
    out = _out_path(args, "disco.report.json")
    report = make_report(
        "eval-disco", config={"threshold": args.threshold,
                              "denominator": args.denominator},
        metrics=res.to_dict(), seed=args.seed, n=res.n_frac,
        datasets={"data": args.data, "checkpoint": args.checkpoint},
    )
    write_report(report, out)
    print(f"avg frac {res.avg_frac:.4f}  avg diff {res.avg_diff:.4f} "
          f"(n={res.n_frac}, skipped {res.n_skipped}) -> {out}")
    return 0


def cmd_eval_sts(args) -> int:
    model = load_checkpoint(args.checkpoint)
    if STS_HEAD not in model.heads:
        raise DataError("checkpoint has no trained similarity head")
    score_fn = make_sts_score_fn(model)
    pairs = generators.load_sts_pairs_tsv(args.data)
    bias = sts_bias(score_fn, pairs)
    pear = None
    datasets = {"data": args.data, "checkpoint": args.checkpoint}
    if args.dev:
        pear = sts_pearson(score_fn, generators.load_sts_labeled_tsv(args.dev))
        datasets["dev"] = args.dev
    out = _out_path(args, "sts.report.json")
    report = make_report(
        "eval-sts", config={}, metrics={"sts_diff": bias, "pear": pear},
        seed=args.seed, n=len(pairs), datasets=datasets,
    )
    write_report(report, out)
    print(f"avg |score gap| {bias:.4f}  pearson "
          f"{'n/a' if pear is None else f'{pear:.4f}'} -> {out}")
    return 0


def cmd_eval_nli(args) -> int:
    model = load_checkpoint(args.checkpoint)
    if NLI_HEAD not in model.heads:
        raise DataError("checkpoint has no trained NLI head")
    prob_fn = make_nli_prob_fn(model)
    rows = generators.load_nli_tsv(args.data)
    fn, nn = nli_bias(prob_fn, [(p, h) for p, h, _ in rows])
    acc = None
    datasets = {"data": args.data, "checkpoint": args.checkpoint}
    if args.dev:
        acc = nli_accuracy(prob_fn, generators.load_nli_tsv(args.dev))
        datasets["dev"] = args.dev
    out = _out_path(args, "nli.report.json")
    report = make_report(
        "eval-nli", config={}, metrics={"fn": fn, "nn": nn, "acc": acc},
        seed=args.seed, n=len(rows), datasets=datasets,
    )
    write_report(report, out)
    print(f"FN {fn:.4f}  NN {nn:.4f}  acc "
          f"{'n/a' if acc is None else f'{acc:.4f}'} -> {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    sizes = [int(s) for s in args.sizes.split(",") if s]
    seeds = [int(s) for s in args.seeds.split(",") if s]
    modes = [m for m in args.modes.split(",") if m]
    task_rows = generators.load_nli_tsv(args.data)
    bias_rows = generators.load_nli_tsv(args.bias)
    dev = generators.load_nli_tsv(args.dev) if args.dev else None
    result = fairness_sweep(
        args.plain, args.debiased, task_rows, [(p, h) for p, h, _ in bias_rows],
        sizes=sizes, seeds=seeds, modes=modes, dev_rows=dev,
        lr=cfg.lr, batch_size=cfg.batch_size, epochs=cfg.epochs,
    )
    out = _out_path(args, "sweep.report.json")
    datasets = {"task": args.data, "bias": args.bias,
                "plain": args.plain, "debiased": args.debiased}
    if args.dev:
        datasets["dev"] = args.dev
    report = make_report(
        "sweep", config=cfg.to_dict(), metrics=result.to_dict(),
        seed=seeds, datasets=datasets,
        extra={"sizes": sizes, "modes": modes},
    )
    write_report(report, out)
    csv_out = Path(str(out)).with_suffix(".csv")
    write_csv(csv_out, ["mode", "size", "seed", "nn", "fn", "acc", "runtime"],
              [c.to_dict() for c in result.cells])
    for (mode, size), entry in sorted(result.aggregates.items()):
        nn = entry.get("nn")
        line = f"{mode:12s} size {size:6d}  n={entry['n']}"
        if nn:
            line += f"  NN {nn[0]:.4f} +- {nn[1]:.4f}"
        print(line)
    print(f"-> {out}, {csv_out}")
    return 0


def cmd_heatmap(args) -> int:
    model = load_checkpoint(args.checkpoint)
    spec = BiasSpec.from_file(args.spec or _shipped("weat7.json"))
    rows = heatmap_grid(model, spec, mode=args.mode, samples=args.samples,
                        seed=args.seed)
    out = _out_path(args, "heatmap.csv")
    write_csv(out, ["m", "n", "effect", "p"], rows)
    print(f"wrote {len(rows)} cells -> {out}")
    return 0


def cmd_gen(args) -> int:
    if args.dataset == "becpro":
        rows = generators.generate_becpro(
            generators.load_lines(_shipped("becpro_templates.txt")),
            generators.load_pairs_tsv(_shipped("becpro_person_pairs.tsv")),
            generators.load_lines(_shipped("becpro_professions.txt")),
        )
        out = _out_path(args, "becpro.tsv")
    elif args.dataset == "disco":
        rows = generators.generate_disco(
            generators.load_lines(_shipped("disco_templates.txt")),
            generators.load_pairs_tsv(_shipped("name_pairs.tsv")),
        )
        out = _out_path(args, "disco.tsv")
    elif args.dataset == "nli":
        rows = generators.generate_biasnli(
            generators.load_lines(_shipped("nli_verbs.txt")),
            generators.load_lines(_shipped("nli_objects.txt")),
            generators.load_lines(_shipped("nli_occupations.txt")),
            generators.load_lines(_shipped("nli_gendered.txt")),
        )
        out = _out_path(args, "bias_nli.tsv")
    elif args.dataset == "corpus":
        world = generators.BiasedWorldConfig(n_sentences=args.sentences,
                                             asymmetry=args.asymmetry)
        rows = [(s,) for s in generators.generate_biased_world(world, seed=args.seed)]
        out = _out_path(args, "biased_world.txt")
    else:  # tasknli
        rows = generators.generate_task_nli(args.n, seed=args.seed,
                                            bias_strength=args.bias_strength)
        out = _out_path(args, "task_nli.tsv")
    generators.write_tsv(out, rows)
    print(f"wrote {len(rows)} rows -> {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (DataError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
