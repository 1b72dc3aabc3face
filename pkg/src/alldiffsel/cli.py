"""Command-line pipeline: generate, extract, bench, label, train, select, evaluate.

Exit codes: 0 success, 2 usage error, 3 input error, 4 internal invariant
violation. Options can also come from a JSON file given with ``--config``;
flags on the command line override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .csp import Family, InstanceError, ParseError, generate_instance, load_instance, serialize_instance
from .evaluation import baselines, evaluate, format_table, instance_csv
from .features import FeatureSet, extract_features
from .harness import CostMode, benchmark, label_matrix
from .io import (
    FORMAT_VERSION,
    SchemaError,
    features_csv,
    load_features,
    load_labels,
    load_matrix,
    load_model,
    save_features,
    save_labels,
    save_matrix,
    save_model,
)
from .learners import DEFAULT_ALGORITHMS, Dataset, LabeledExample, train_ensemble
from .solver import ALL_VARIANTS, SearchLimits

log = logging.getLogger("alldiffsel")

EXIT_INPUT = 3
EXIT_INTERNAL = 4


class InputError(Exception):
    """A referenced file or its contents cannot be used."""


def _config_snapshot(args) -> dict:
    snap = {}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "config"):
            continue
        snap[key] = str(value) if isinstance(value, Path) else value
    return snap


def _deterministic(args) -> bool:
    return CostMode(args.cost_mode) is CostMode.DETERMINISTIC


def _load_corpus(corpus: Path):
    files = sorted(Path(corpus).glob("*.csp"))
    if not files:
        raise InputError(f"{corpus}: no .csp instance files found")
    return [load_instance(f) for f in files]


# -- commands ----------------------------------------------------------------


def cmd_generate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        inst = generate_instance(args.family, args.size, args.seed + i)
        path = out / f"{inst.name}.csp"
        path.write_text(
            f"# generated by alldiffsel {FORMAT_VERSION}: family={args.family} "
            f"size={args.size} seed={args.seed + i}\n" + serialize_instance(inst),
            encoding="utf-8",
        )
        print(path)


def _extract_one(job):
    inst, fs, seed = job
    return extract_features(inst, fs, seed)


def cmd_extract(args):
    corpus = _load_corpus(args.corpus)
    fs = FeatureSet(args.feature_set)
    jobs = [(inst, fs, args.seed) for inst in corpus]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            vectors = list(pool.map(_extract_one, jobs))
    else:
        vectors = [_extract_one(j) for j in jobs]
    with_time = not _deterministic(args)
    save_features(args.out, vectors, _config_snapshot(args), include_time=with_time)
    if args.csv:
        Path(args.csv).write_text(features_csv(vectors), encoding="utf-8")
    for v in vectors:
        suffix = f" {v.extraction_time:.4f}s" if with_time else ""
        print(f"{v.instance}{suffix}")


def cmd_bench(args):
    corpus = _load_corpus(args.corpus)
    runs = 1 if _deterministic(args) else args.runs
    limits = SearchLimits(args.time_limit, args.node_limit)
    matrix = benchmark(corpus, limits, runs, args.cost_mode, ALL_VARIANTS, args.jobs)
    save_matrix(args.out, matrix, _config_snapshot(args))
    print(f"{len(matrix.instances)} instances x {len(matrix.variants)} variants -> {args.out}")


def cmd_label(args):
    matrix = load_matrix(args.matrix)
    labels = label_matrix(matrix)
    save_labels(args.out, labels, _config_snapshot(args))
    for c in labels:
        print(f"{c.instance} {c.label.code} {c.cost!r}")


def _dataset(features, labels, feature_set):
    examples = []
    for name, cl in labels.items():
        if cl.label.dont_know:
            continue
        if name not in features:
            raise InputError(f"no features for labelled instance {name!r}")
        fv = features[name]
        if fv.feature_set is not feature_set:
            raise InputError(f"{name}: features are {fv.feature_set.value}, expected {feature_set.value}")
        examples.append(LabeledExample(name, fv, cl.label.variant, cl.cost))
    return Dataset(tuple(examples))


def cmd_train(args):
    features = load_features(args.features)
    labels = load_labels(args.labels)
    if not features:
        raise InputError(f"{args.features}: empty feature file")
    fs = next(iter(features.values())).feature_set
    data = _dataset(features, labels, fs)
    try:
        model = train_ensemble(
            data,
            k=args.folds,
            seed=args.seed,
            feature_set=fs,
            duplicate=not args.no_duplicate,
            algorithms=args.algorithms,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    save_model(args.out, model, _config_snapshot(args))
    print(f"trained on {len(data)} examples ({fs.value} features) -> {args.out}")


def cmd_select(args):
    model = load_model(args.model)
    features = load_features(args.features)
    choices = {}
    for name, fv in features.items():
        try:
            choices[name] = model.select_variant(fv).code
        except ValueError as exc:
            raise InputError(str(exc)) from None
        print(f"{name} {choices[name]}")
    if args.out:
        from .io import dump_artifact

        dump_artifact(args.out, "selections", {"choices": choices}, _config_snapshot(args))


def cmd_evaluate(args):
    matrix = load_matrix(args.matrix)
    features = load_features(args.features)
    missing = [n for n in matrix.instances if n not in features]
    if missing:
        raise InputError(f"no features for {len(missing)} instance(s), e.g. {missing[0]!r}")
    deterministic = matrix.cost_mode is CostMode.DETERMINISTIC
    if deterministic:
        # wallclock overheads would make the report non-reproducible
        features = {
            n: type(fv)(fv.instance, fv.feature_set, fv.seed, fv.values, fv.flags, None)
            for n, fv in features.items()
        }
    rows = baselines(matrix, args.random_seed)
    zeros = [0.0] * len(matrix.instances) if deterministic else None

    if args.oracle:
        focus = rows[0]
    else:
        if not args.model:
            raise InputError("evaluate needs --model unless --oracle is given")
        model = load_model(args.model)
        for fv in features.values():
            if fv.feature_set.value != model.feature_set:
                raise InputError(f"{fv.instance}: model needs {model.feature_set} features")
        individual = [
            evaluate(model.restricted_to(alg).select_variant, features, matrix, alg, zeros)
            for alg in model.algorithms
        ]
        if individual:
            best = min(individual, key=lambda r: r.total)
            worst = max(individual, key=lambda r: r.total)
            best.name = f"best classifier ({best.name})"
            worst.name = f"worst classifier ({worst.name})"
            rows += [best, worst] if best is not worst else [best]
        focus = evaluate(model.select_variant, features, matrix, "meta-classifier", zeros)
        rows.append(focus)

    if deterministic:
        for r in rows:
            r.select_times = (None,) * len(r.instances)
            r.feature_times = (None,) * len(r.instances)
            r.speedups_with_overhead = (None,) * len(r.instances)

    header = f"# format_version={FORMAT_VERSION} config={json.dumps(_config_snapshot(args), sort_keys=True)}\n"
    table = format_table(rows, title=f"total misclassification penalty over {len(matrix.instances)} instances")
    Path(args.out).write_text(header + table, encoding="utf-8")
    per_instance = Path(args.instances_out) if args.instances_out else Path(args.out).with_suffix(".csv")
    per_instance.write_text(header + instance_csv(focus), encoding="utf-8")
    sys.stdout.write(table)


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alldiffsel", description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=Path, help="JSON file with default option values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *names):
        if "cost_mode" in names:
            p.add_argument(
                "--cost-mode",
                choices=[m.value for m in CostMode],
                default=CostMode.WALLCLOCK.value,
            )
        if "jobs" in names:
            p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("generate", help="write synthetic instance files")
    p.add_argument("--family", choices=[f.value for f in Family], required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("extract", help="compute instance features")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--feature-set", choices=[f.value for f in FeatureSet], default="full")
    p.add_argument("--seed", type=int, default=0, help="tightness sampling seed")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--csv", type=Path, help="also write features as CSV")
    common(p, "cost_mode", "jobs")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("bench", help="run all variants on a corpus")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--node-limit", type=int)
    p.add_argument("--runs", type=int, default=3, help="runs per cell (odd)")
    p.add_argument("--out", type=Path, required=True)
    common(p, "cost_mode", "jobs")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("label", help="label instances from a runtime matrix")
    p.add_argument("--matrix", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train", help="train the two-level ensemble")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--seed", type=int, default=0, help="fold split seed")
    p.add_argument("--no-duplicate", action="store_true", help="skip cost-based duplication")
    p.add_argument("--algorithms", nargs="+", default=list(DEFAULT_ALGORITHMS))
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("select", help="choose a variant per instance")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="penalty report against baselines")
    p.add_argument("--model", type=Path)
    p.add_argument("--oracle", action="store_true", help="evaluate the oracle instead of a model")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--matrix", type=Path, required=True)
    p.add_argument("--random-seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--instances-out", type=Path, help="per-instance CSV (default: <out>.csv)")
    p.set_defaults(func=cmd_evaluate)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    try:
        cfg = json.loads(known.config.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{known.config}: cannot read config ({exc})") from None
    if not isinstance(cfg, dict):
        raise InputError(f"{known.config}: config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
            # config values satisfy required options
            for a in sp._actions:
                if a.dest in cfg:
                    a.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except InputError as exc:
        print(f"alldiffsel: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (InputError, SchemaError, ParseError, InstanceError) as exc:
        print(f"alldiffsel: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"alldiffsel: I/O error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"alldiffsel: precondition failed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"alldiffsel: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
