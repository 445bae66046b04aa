"""Command-line entry point: ``framewarp <command> [options]``.

Exit status is 0 on success, 1 on usage errors and 2 on bad input data.
Options may also come from a JSON file given with ``--config``; its
top-level keys apply to every command and a section named after the
command overrides them. Explicit flags always win.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    FORMAT_VERSION, DimensionError, FormatError, InvariantError, _atomic_write_text, read_json,
    read_label_track, read_time_series, write_json,
)

logger = logging.getLogger("framewarp")

COMMANDS = ("build-dict", "featurize", "train", "recognize", "segment", "eval", "synth", "bench")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _add_common(p):
    g = p.add_argument_group("common options")
    g.add_argument("--config", help="JSON file with option values")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--threads", type=int, help="worker threads (default 1)")
    g.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="diagnostics on stderr")
    g.add_argument("--verbose", action="store_true", default=None, help="echo the effective configuration")
    g.add_argument("--out", help="output path (default: standard output)")


def _add_distance(p):
    p.add_argument("--w-meta", type=int, help="metaframe pooling window, odd (default 1)")
    p.add_argument("--gamma", type=float, help="sparse-coding residual target (default 0.05)")
    p.add_argument("--max-support", type=int, help="sparse-coding atom budget (default 8)")


def _add_window(p):
    p.add_argument("--Q", type=int, help="keypoints per adaptive window (default 10)")
    p.add_argument("--cap", type=int, help="maximum window half-width (default: video length)")
    p.add_argument("--fixed-window", type=int, metavar="W", help="use a fixed W-frame window instead")
    p.add_argument("--idf", dest="idf", action="store_true", default=None, help="IDF weighting (default)")
    p.add_argument("--no-idf", dest="idf", action="store_false", help="disable IDF weighting")


DEFAULTS = {
    "seed": 0, "threads": 1, "log_level": "WARNING", "verbose": False, "out": None,
    "w_meta": 1, "gamma": 0.05, "max_support": 8,
    "Q": 10, "cap": None, "fixed_window": None, "idf": True, "K": 64,
    "mode": "one-pass", "t_min": 2, "no_length_constraints": False, "lengths": "exact",
    "alias": None, "dump_grid": None, "patterns": [], "null_max_frames": 512,
    "bench_mode": "one-pass", "repeats": 3,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="framewarp", description="Template-based recognition and segmentation of vector time series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("build-dict", help="cluster keypoint descriptors into a visual dictionary")
    p.add_argument("--streams", nargs="+", help="keypoint JSON-lines files")
    p.add_argument("--K", type=int, help="number of words (default 64)")
    _add_window(p)
    _add_common(p)

    p = sub.add_parser("featurize", help="turn a keypoint stream into a frame series")
    p.add_argument("--dict", dest="dictionary", help="dictionary JSON")
    p.add_argument("--input", help="keypoint JSON-lines file")
    _add_window(p)
    _add_common(p)

    p = sub.add_parser("train", help="learn class templates")
    p.add_argument("--examples", help="directory with one sub-directory per label, or an annotation CSV")
    p.add_argument("--patterns", type=_int_list, help="labels trained as repeatable motion patterns")
    p.add_argument("--null-max-frames", type=int, help="background frames kept in the null template (default 512)")
    _add_common(p)

    p = sub.add_parser("recognize", help="label a whole series with one class")
    p.add_argument("--model", help="template store JSON")
    p.add_argument("--input", help="series CSV or JSON")
    _add_distance(p)
    _add_common(p)

    p = sub.add_parser("segment", help="segment and label a continuous series")
    p.add_argument("--model", help="template store JSON")
    p.add_argument("--input", help="series CSV or JSON")
    p.add_argument("--mode", choices=["one-pass", "two-pass"])
    p.add_argument("--t-min", type=int, help="two-pass: segments span at least t_min + 1 frames (default 2)")
    p.add_argument("--no-length-constraints", action="store_true", default=None,
                   help="one-pass: ignore per-class duration bounds")
    p.add_argument("--lengths", choices=["exact", "greedy"], help="one-pass duration tracking (default exact)")
    p.add_argument("--alias", help="JSON object mapping labels to reported labels")
    p.add_argument("--dump-grid", help="write the accumulated-cost grid (float32, row-major) here")
    _add_distance(p)
    _add_common(p)

    p = sub.add_parser("eval", help="score a predicted labeling against ground truth")
    p.add_argument("--pred", help="segmentation JSON or label CSV")
    p.add_argument("--gt", help="segmentation JSON or label CSV")
    p.add_argument("--alias", help="JSON object mapping predicted labels to ground-truth labels")
    _add_common(p)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    _add_common(p)

    p = sub.add_parser("bench", help="measure runtime against input length")
    p.add_argument("--model", help="template store JSON")
    p.add_argument("--lengths", type=_int_list, help="comma-separated input lengths")
    p.add_argument("--mode", dest="bench_mode", choices=["one-pass", "two-pass"])
    p.add_argument("--t-min", type=int)
    p.add_argument("--repeats", type=int, help="timed runs per length (default 3)")
    _add_distance(p)
    _add_common(p)
    return parser


def _resolve(args, parser) -> tuple:
    """Merge flags over config file over defaults. Returns ``(options, extra)``
    where ``extra`` holds config keys no flag of the command knows."""
    explicit = {k: v for k, v in vars(args).items() if v is not None}
    file_opts, extra = {}, {}
    if args.config:
        obj = read_json(args.config)
        if not isinstance(obj, dict):
            raise FormatError(f"{args.config}: expected a JSON object")
        section = obj.get(args.command, {})
        merged = {k: v for k, v in obj.items() if k not in COMMANDS}
        merged.update(section if isinstance(section, dict) else {})
        known = set(vars(args))
        for k, v in merged.items():
            key = k.replace("-", "_")
            (file_opts if key in known else extra)[key] = v
    opts = {k: DEFAULTS.get(k) for k in vars(args)}
    opts.update(file_opts)
    opts.update(explicit)
    return argparse.Namespace(**opts), extra


def _require(opts, *names):
    missing = [n for n in names if getattr(opts, n, None) in (None, [], "")]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _emit_json(obj, out):
    if out:
        write_json(obj, out)
    else:
        sys.stdout.write(json.dumps(obj, indent=1) + "\n")


def _distance_cfg(o):
    from .metaframe import DistanceConfig
    try:
        return DistanceConfig(gamma=o.gamma, max_support=o.max_support, w_meta=o.w_meta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_alias(path) -> dict:
    obj = read_json(path)
    if not isinstance(obj, dict):
        raise FormatError(f"{path}: alias file must hold a JSON object")
    obj.pop("format_version", None)
    try:
        return {int(k): int(v) for k, v in obj.items()}
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _with_identity(alias, labels):
    full = {int(l): int(l) for l in labels}
    full.update(alias)
    return full


# ------------------------------------------------------------------ commands

def cmd_build_dict(o, extra):
    from .features import build_dictionary, compute_idf, histograms, read_keypoints, save_dictionary
    _require(o, "streams", "out")
    streams = [read_keypoints(p) for p in o.streams]
    d = build_dictionary(streams, o.K, seed=o.seed)
    if o.idf:
        counts = [histograms(s, d, o.Q, o.cap, o.fixed_window) for s in streams]
        d = d.with_idf(compute_idf(counts))
    save_dictionary(d, o.out)


def cmd_featurize(o, extra):
    from .core import write_time_series
    from .features import featurize, load_dictionary, read_keypoints
    _require(o, "dictionary", "input")
    series = featurize(read_keypoints(o.input), load_dictionary(o.dictionary), o.Q, o.cap, o.idf, o.fixed_window)
    if o.out:
        write_time_series(series, o.out)
    else:
        sys.stdout.write("\n".join(",".join(repr(float(v)) for v in row) for row in series.frames) + "\n")


def _examples_from_dir(root: Path):
    examples, background = {}, []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        name = sub.name
        label = 0 if name.lower() == "null" else None
        if label is None:
            try:
                label = int(name)
            except ValueError:
                logger.warning("skipping directory %s: name is not an integer label", sub)
                continue
        files = sorted(p for p in sub.iterdir() if p.suffix.lower() in (".csv", ".json"))
        for f in files:
            ts = read_time_series(f)
            if label == 0:
                background.append(ts.frames[~ts.empty])
            else:
                examples.setdefault(label, []).append(ts)
    return examples, background


def _examples_from_annotations(path: Path):
    import csv
    examples, background, cache = {}, [], {}
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and rows[0][0].strip() == "series_path":
        rows = rows[1:]
    for lineno, row in enumerate(rows, start=2):
        try:
            series_path, b, e, label = row[0].strip(), int(row[1]), int(row[2]), int(row[3])
        except (IndexError, ValueError) as exc:
            raise FormatError(f"{path}: row {lineno}: {exc}") from exc
        full = (path.parent / series_path) if not Path(series_path).is_absolute() else Path(series_path)
        if full not in cache:
            cache[full] = read_time_series(full)
        ts = cache[full]
        if not 1 <= b <= e <= len(ts):
            raise FormatError(f"{path}: row {lineno}: segment {b}..{e} outside 1..{len(ts)}")
        piece = ts.slice(b, e)
        if label == 0:
            background.append(piece.frames[~piece.empty])
        else:
            examples.setdefault(label, []).append(piece)
    return examples, background


def cmd_train(o, extra):
    from .templates import save_model, train
    _require(o, "examples", "out")
    root = Path(o.examples)
    if not root.exists():
        raise FileNotFoundError(f"{root}: no such file or directory")
    examples, background = _examples_from_dir(root) if root.is_dir() else _examples_from_annotations(root)
    if not examples:
        raise FormatError(f"{root}: no labeled examples found")
    bg = np.concatenate(background) if background else None
    model = train(examples, bg, patterns=o.patterns, null_max_frames=o.null_max_frames, seed=o.seed)
    save_model(model, o.out)


def cmd_recognize(o, extra):
    from .isolated import classify_isolated
    from .templates import load_model
    _require(o, "model", "input")
    model = load_model(o.model)
    label, scores = classify_isolated(read_time_series(o.input), model, _distance_cfg(o), o.threads)
    _emit_json({"format_version": FORMAT_VERSION, "label": label,
                "scores": {str(k): v for k, v in sorted(scores.items())}}, o.out)


def _dump_grid(grid, model, path):
    data = np.ascontiguousarray(grid, dtype="<f4")
    _atomic_write_text(path, data.tobytes(order="C"))
    write_json({
        "format_version": FORMAT_VERSION,
        "rows": int(data.shape[0]),
        "cols": int(data.shape[1]),
        "dtype": "float32",
        "byte_order": "little",
        "order": "row-major",
        "labels": model.labels,
        "offsets": model.offsets.tolist(),
        "lengths": model.lengths.tolist(),
    }, str(path) + ".json")


def cmd_segment(o, extra):
    from .onepass import alias_segmentation, op_dfw_segment
    from .templates import load_model
    from .twopass import tp_dfw_segment
    _require(o, "model", "input")
    model = load_model(o.model)
    Z = read_time_series(o.input)
    cfg = _distance_cfg(o)
    result = {"format_version": FORMAT_VERSION, "mode": o.mode}
    if o.mode == "one-pass":
        res = op_dfw_segment(Z, model, cfg, enforce_lengths=not o.no_length_constraints,
                             lengths=o.lengths, threads=o.threads)
        seg, score = res.segmentation, res.score
        result["relaxed"] = res.relaxed
        if o.dump_grid:
            _dump_grid(res.grid, model, o.dump_grid)
    else:
        if o.dump_grid:
            raise UsageError("--dump-grid is only available in one-pass mode")
        seg, score = tp_dfw_segment(Z, model, o.t_min, cfg, o.threads)
    if o.alias:
        seg = alias_segmentation(seg, _with_identity(_load_alias(o.alias), model.labels))
    result.update(seg.to_dict())
    result["score"] = score
    _emit_json(result, o.out)


def cmd_eval(o, extra):
    from .evaluation import frame_accuracy
    _require(o, "pred", "gt")
    pred, gt = read_label_track(o.pred), read_label_track(o.gt)
    if o.alias:
        alias = _with_identity(_load_alias(o.alias), np.unique(pred))
        pred = np.array([alias[int(l)] for l in pred], dtype=int)
    _emit_json(frame_accuracy(pred, gt).to_dict(), o.out)


def cmd_synth(o, extra):
    from .synth import SynthConfig, generate_corpus, write_corpus
    _require(o, "out")
    params = dict(extra)
    params["seed"] = o.seed
    try:
        cfg = SynthConfig.from_dict(params)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"synth config: {exc}") from exc
    manifest = write_corpus(generate_corpus(cfg), o.out)
    logger.info("wrote %s", manifest)


def cmd_bench(o, extra):
    from .evaluation import benchmark_scaling
    from .templates import load_model
    _require(o, "model", "lengths")
    model = load_model(o.model)
    try:
        report = benchmark_scaling(model, o.lengths, o.bench_mode, _distance_cfg(o), t_min=o.t_min,
                                   repeats=o.repeats, seed=o.seed, threads=o.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit_json(report, o.out)


HANDLERS = {
    "build-dict": cmd_build_dict, "featurize": cmd_featurize, "train": cmd_train, "recognize": cmd_recognize,
    "segment": cmd_segment, "eval": cmd_eval, "synth": cmd_synth, "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        sys.stderr.write("framewarp: error: a command is required\n")
        return 1
    try:
        opts, extra = _resolve(args, parser)
    except (FormatError, OSError) as exc:
        sys.stderr.write(f"framewarp: error: {exc}\n")
        return 2
    logging.basicConfig(level=getattr(logging, str(opts.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    if opts.verbose:
        shown = {k: v for k, v in sorted(vars(opts).items()) if k != "verbose"}
        shown.update({k: v for k, v in sorted(extra.items())})
        sys.stderr.write(json.dumps(shown, indent=1, default=str) + "\n")
    if extra and args.command != "synth":
        logger.warning("ignoring unknown config keys: %s", ", ".join(sorted(extra)))
    if opts.threads is not None and opts.threads < 1:
        sys.stderr.write("framewarp: error: --threads must be >= 1\n")
        return 1
    try:
        HANDLERS[args.command](opts, extra)
    except UsageError as exc:
        parser._subparsers._group_actions[0].choices[args.command].print_usage(sys.stderr)
        sys.stderr.write(f"framewarp {args.command}: error: {exc}\n")
        return 1
    except (FormatError, DimensionError, InvariantError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"framewarp {args.command}: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
