"""Command-line interface.

Subcommands: train-style-dict, train-content-dict, score, score-batch,
bt-fit, eval. Exit codes: 0 success, 2 input error, 3 degenerate data,
4 configuration incompatibility.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import RunConfig, _parse_scalar, load_config
from .dictlearn import save_dictionaries, train_content_dicts, train_style_dicts
from .errors import (
    ConfigurationError,
    DecodeError,
    DegenerateInputError,
    FittingError,
    InvalidDictionaryError,
    InvalidInputError,
)
from .evaluation import bt_fit, group_eval, read_scores_csv, read_votes_csv
from .imaging import load_image
from .scoring import TripleScorer, read_manifest, score_manifest_rows
from .style import build_style_matrix
from .weights_io import read_weight_file

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_CONFIG = 4

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


def _build_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {
        "weights": getattr(args, "weights", None),
        "style_dict": getattr(args, "style_dict", None),
        "content_dict": getattr(args, "content_dict", None),
        "seed": getattr(args, "seed", None),
        "workers": getattr(args, "workers", None),
        "similarity_form": getattr(args, "similarity_form", None),
    }
    if getattr(args, "normalized_pooling", False):
        overrides["normalized_pooling"] = True
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        value = value.strip()
        if value.startswith("[") and value.endswith("]"):
            parsed = tuple(
                _parse_scalar(tok, "--set") for tok in value[1:-1].split(",") if tok.strip()
            )
        else:
            parsed = _parse_scalar(value, "--set")
        overrides[key.strip().replace("-", "_")] = parsed
    return config.apply(overrides)


def _list_images(directory) -> list[str]:
    if not os.path.isdir(directory):
        raise InvalidInputError(f"not a directory: {directory}")
    paths = [
        os.path.join(directory, name)
        for name in sorted(os.listdir(directory))
        if name.lower().endswith(IMAGE_EXTENSIONS)
    ]
    if not paths:
        raise InvalidInputError(f"no decodable images found in {directory}")
    return paths


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_train_style(args) -> int:
    config = _build_config(args).validate(require_files=("weights",))
    weights = read_weight_file(config.weights)
    images = [load_image(p, config.target_size) for p in _list_images(args.image_dir)]
    matrices = build_style_matrix(images, weights, config.blocks_per_layer)
    dicts = train_style_dicts(
        matrices,
        config.style_atoms,
        config.tau,
        seed=config.seed,
        epochs=config.epochs,
        batch_size=config.batch_size,
    )
    save_dictionaries(args.out, dicts)
    print(f"wrote {len(dicts)} style dictionaries to {args.out}")
    for d in dicts:
        err = d.meta["epoch_errors"][-1]
        print(f"  layer {d.key[0]}: {d.dim}x{d.n_atoms} atoms, final recon error {err:.6f}")
    return EXIT_OK


def cmd_train_content(args) -> int:
    config = _build_config(args).validate()
    images = [load_image(p, config.target_size) for p in _list_images(args.image_dir)]
    dicts = train_content_dicts(
        images,
        config.z_count,
        config.o_count,
        n_atoms=config.content_atoms,
        patch_count=config.patch_count,
        tau=config.tau,
        seed=config.seed,
        patch_size=config.patch_size,
        sigma_list=config.sigma_list,
        k=config.k,
        epochs=config.epochs,
        batch_size=config.batch_size,
    )
    save_dictionaries(args.out, dicts)
    print(f"wrote {len(dicts)} content dictionaries to {args.out}")
    for key in sorted(dicts):
        d = dicts[key]
        err = d.meta["epoch_errors"][-1]
        print(f"  scale {key[0]} octave {key[1]}: {d.dim}x{d.n_atoms}, final recon error {err:.6f}")
    return EXIT_OK


def cmd_score(args) -> int:
    config = _build_config(args)
    scorer = TripleScorer.from_paths(config)
    triple = scorer.score_files(args.content, args.style, args.stylized)
    payload = triple.as_dict()
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        _write_json(args.out, payload)
    return EXIT_OK


_WORKER_SCORER: TripleScorer | None = None


def _worker_init(config_dict):
    global _WORKER_SCORER
    config = RunConfig().apply(config_dict)
    _WORKER_SCORER = TripleScorer.from_paths(config)


def _worker_score(task):
    index, row = task
    size = _WORKER_SCORER.config.target_size
    ref = _WORKER_SCORER.reference(
        load_image(row["content"], size), load_image(row["style"], size)
    )
    triple = _WORKER_SCORER.score_stylized(ref, load_image(row["stylized"], size))
    return index, triple


def cmd_score_batch(args) -> int:
    config = _build_config(args)
    rows = read_manifest(args.manifest)
    if not rows:
        raise InvalidInputError(f"manifest {args.manifest} lists no triples")
    if config.workers > 1:
        triples = [None] * len(rows)
        with ProcessPoolExecutor(
            max_workers=config.workers,
            initializer=_worker_init,
            initargs=(config.as_dict(),),
        ) as pool:
            for index, triple in pool.map(_worker_score, list(enumerate(rows))):
                triples[index] = triple
    else:
        scorer = TripleScorer.from_paths(config)
        triples = score_manifest_rows(scorer, rows)

    out = args.out or (os.path.splitext(args.manifest)[0] + ".scores.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["content", "style", "stylized", "q_content", "q_style", "q_overall"])
        for row, triple in zip(rows, triples):
            writer.writerow(
                [
                    row["content"],
                    row["style"],
                    row["stylized"],
                    f"{triple.q_content:.10g}",
                    f"{triple.q_style:.10g}",
                    f"{triple.q_overall:.10g}",
                ]
            )
    _write_json(out + ".config.json", triples[0].config if triples else config.as_dict())
    print(f"wrote {len(triples)} scores to {out}")
    return EXIT_OK


def cmd_bt_fit(args) -> int:
    groups = read_votes_csv(args.votes)
    if not groups:
        raise InvalidInputError(f"votes file {args.votes} holds no comparisons")
    out = args.out or (os.path.splitext(args.votes)[0] + ".bt.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "method", "score", "smoothed"])
        for group in sorted(groups):
            fitted = bt_fit(groups[group])
            for method, score in zip(fitted.methods, fitted.scores):
                writer.writerow([group, method, f"{score:.10g}", int(fitted.smoothed)])
    print(f"wrote fitted scores to {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    config = _build_config(args)
    scores = read_scores_csv(args.scores)
    votes = read_votes_csv(args.votes)
    fitted = {group: bt_fit(matrix) for group, matrix in votes.items()}

    columns = (
        [args.score_column]
        if args.score_column
        else ["q_content", "q_style", "q_overall"]
    )
    reports = {}
    for column in columns:
        per_group = {
            group: {method: values[column] for method, values in methods.items()}
            for group, methods in scores.items()
        }
        report = group_eval(per_group, fitted)
        report.config = {"score_column": column, **config.as_dict()}
        reports[column] = report

    out = args.out or "eval_report.json"
    _write_json(out, {column: report.as_dict() for column, report in reports.items()})

    base = os.path.splitext(out)[0]
    with open(base + ".csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["column", "group", "srcc", "krcc", "plcc", "hitr"])
        for column, report in reports.items():
            for group in sorted(report.per_group):
                entry = report.per_group[group]
                writer.writerow(
                    [column, group]
                    + [
                        "" if entry[c] is None else f"{entry[c]:.10g}"
                        for c in ("srcc", "krcc", "plcc", "hitr")
                    ]
                )

    if not args.no_figures:
        from .figures import render_report_figures

        figure_paths = render_report_figures(reports, fitted, base + "_figures")
        print(f"wrote {len(figure_paths)} figures to {base}_figures/")

    for column, report in reports.items():
        avg = report.averages
        parts = ", ".join(
            f"{c}={avg[c]:.4f}" if avg[c] is not None else f"{c}=n/a" for c in avg
        )
        print(f"{column}: {parts}")
    print(f"wrote report to {out} and {base}.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srqe",
        description="Quality scores for arbitrary style transfer image triples",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, dicts=False):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--weights", help="weight bundle path")
        p.add_argument("--seed", type=int, help="run seed")
        p.add_argument("--workers", type=int, help="parallel workers")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
        if dicts:
            p.add_argument("--style-dict", dest="style_dict", help="style dictionary file")
            p.add_argument("--content-dict", dest="content_dict", help="content dictionary file")
            p.add_argument("--normalized-pooling", action="store_true")
            p.add_argument(
                "--similarity-form", choices=("as-written", "ssim-form"), dest="similarity_form"
            )

    p = sub.add_parser("train-style-dict", help="learn the per-layer style dictionaries")
    common(p)
    p.add_argument("image_dir")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_style)

    p = sub.add_parser("train-content-dict", help="learn the (scale, octave) patch dictionaries")
    common(p)
    p.add_argument("image_dir")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_content)

    p = sub.add_parser("score", help="score one content/style/stylized triple")
    common(p, dicts=True)
    p.add_argument("content")
    p.add_argument("style")
    p.add_argument("stylized")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("score-batch", help="score every triple in a manifest CSV")
    common(p, dicts=True)
    p.add_argument("manifest")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_score_batch)

    p = sub.add_parser("bt-fit", help="fit pairwise votes to per-group scores")
    p.add_argument("votes")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bt_fit)

    p = sub.add_parser("eval", help="run the criteria suite against fitted votes")
    common(p)
    p.add_argument("scores")
    p.add_argument("votes")
    p.add_argument("--out")
    p.add_argument("--score-column", choices=("q_content", "q_style", "q_overall"))
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=cmd_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (DegenerateInputError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigurationError, InvalidDictionaryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidInputError, DecodeError, FittingError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
