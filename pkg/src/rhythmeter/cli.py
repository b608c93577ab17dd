"""Command-line entry point: ``rhythmeter {analyze,beats,synth,sweep,compare}``.

Exit codes: 0 success, 1 hard error, 2 when no sample qualifies for any metric.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .audio import load_wav
from .errors import NoQualifyingSamples, RhythmeterError
from .harness import DEFAULT_GRID, DEFAULT_SEGMENT, evaluate, rank_consistency, scan_dataset, sweep
from .metrics import MetricsConfig
from .report import emit, load_report
from .synth import DEFAULT_TRACKS, SynthSpec, corpus, write_ground_truth
from .tracker import TrackerConfig, beats_from_clip

EXIT_OK, EXIT_ERROR, EXIT_NO_QUALIFYING = 0, 1, 2


def _segment_arg(value):
    if value.lower() in ("full", "none"):
        return None
    seconds = float(value)
    if seconds <= 0:
        raise argparse.ArgumentTypeError("segment length must be positive")
    return seconds


def _grid_arg(value):
    if value == "default":
        return list(DEFAULT_GRID)
    grid = []
    for item in value.split(","):
        fps, tl = item.split(":")
        grid.append((float(fps), float(tl)))
    return grid


def _tracker_args(p):
    p.add_argument("--fps", type=float, default=150.0, help="beat tracking frame rate")
    p.add_argument("--tl", type=float, default=100.0, help="transition lambda")
    p.add_argument("--bpm-min", type=float, default=55.0)
    p.add_argument("--bpm-max", type=float, default=215.0)


def _frontend_args(p):
    p.add_argument("--window", type=int, default=1024)
    p.add_argument("--hop", type=int, default=160)
    p.add_argument("--n-mels", type=int, default=64)


def _dataset_args(p):
    p.add_argument("--tracks", default=",".join(DEFAULT_TRACKS), help="comma-separated stem names")
    p.add_argument("--segment", type=_segment_arg, default=DEFAULT_SEGMENT,
                   help="segment length in seconds, or 'full' (default 10.24)")
    p.add_argument("--cbs-window", type=float, default=0.1)
    p.add_argument("--penalize-unmatched", action="store_true",
                   help="count unmatched reference beats as CBD error 1.0")


def _tracker_cfg(args):
    return TrackerConfig(fps=args.fps, transition_lambda=args.tl, bpm_min=args.bpm_min, bpm_max=args.bpm_max)


def _metrics_cfg(args):
    return MetricsConfig(cbs_window=args.cbs_window, penalize_unmatched=args.penalize_unmatched)


def build_parser():
    parser = argparse.ArgumentParser(prog="rhythmeter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="evaluate IRS/CBS/CBD over a dataset directory")
    p.add_argument("directory")
    _tracker_args(p)
    _frontend_args(p)
    _dataset_args(p)
    p.add_argument("--beats-from", choices=("tracker", "files"), default="tracker")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("beats", help="print detected beat times of one WAV file")
    p.add_argument("wav")
    _tracker_args(p)
    _frontend_args(p)

    p = sub.add_parser("synth", help="write a synthetic click corpus with ground truth")
    p.add_argument("--spec", required=True, help="JSON file with SynthSpec fields")
    p.add_argument("--out", required=True)
    p.add_argument("--n-samples", type=int, default=None)

    p = sub.add_parser("sweep", help="evaluate methods over an (fps, tl) grid and check rankings")
    p.add_argument("--methods", nargs="+", required=True, metavar="NAME=DIR")
    p.add_argument("--grid", type=_grid_arg, default=list(DEFAULT_GRID),
                   help="'default' or 'fps:tl,fps:tl,...'")
    _frontend_args(p)
    _dataset_args(p)
    p.add_argument("--out", help="sweep JSON path (default: stdout)")

    p = sub.add_parser("compare", help="compare aggregate metrics of two report JSON files")
    p.add_argument("first")
    p.add_argument("second")
    return parser


def _all_undefined(report):
    return all(v is None for v in report.summary().values())


def cmd_analyze(args):
    descriptors = scan_dataset(args.directory, args.tracks.split(","))
    report = evaluate(
        descriptors,
        _tracker_cfg(args),
        _metrics_cfg(args),
        segment_seconds=args.segment,
        beats_from=args.beats_from,
        window=args.window,
        hop=args.hop,
        n_mels=args.n_mels,
    )
    if args.out:
        emit(report, args.format, args.out)
    elif args.format == "json":
        sys.stdout.write(report.to_json() + "\n")
    else:
        import csv

        csv.writer(sys.stdout).writerows(report.csv_rows())
    if _all_undefined(report):
        raise NoQualifyingSamples("no sample qualified for any metric")
    return EXIT_OK


def cmd_beats(args):
    clip = load_wav(args.wav)
    beats = beats_from_clip(clip, _tracker_cfg(args), window=args.window, hop=args.hop, n_mels=args.n_mels)
    for t in beats.times:
        print(f"{t:.6f}")
    return EXIT_OK


def cmd_synth(args):
    with open(args.spec) as fh:
        raw = json.load(fh)
    n = raw.pop("n_samples", 1)
    if args.n_samples is not None:
        n = args.n_samples
    spec = SynthSpec.from_dict(raw)
    for gt in corpus(spec, n):
        path = write_ground_truth(gt, os.path.join(args.out, gt.sample.sample_id))
        logging.getLogger(__name__).info("wrote %s", path)
    return EXIT_OK


def cmd_sweep(args):
    tracks = args.tracks.split(",")
    methods = {}
    for item in args.methods:
        name, _, directory = item.partition("=")
        if not directory:
            raise ValueError(f"--methods entries must be NAME=DIR, got {item!r}")
        methods[name] = scan_dataset(directory, tracks)
    report = sweep(
        methods,
        args.grid,
        metrics_cfg=_metrics_cfg(args),
        segment_seconds=args.segment,
        window=args.window,
        hop=args.hop,
        n_mels=args.n_mels,
    )
    if args.out:
        emit(report, "json", args.out)
    else:
        sys.stdout.write(report.to_json() + "\n")
    for metric in ("irs", "cbs", "cbd_mean"):
        try:
            res = rank_consistency(report, metric)
        except RhythmeterError as exc:
            print(f"{metric}: {exc}", file=sys.stderr)
            continue
        print(f"{metric}: consistent={res['consistent']} min_tau={res['min_kendall_tau']:.4f} "
              f"settings={res['n_settings']}", file=sys.stderr)
    return EXIT_OK


def _fmt(v):
    return "n/a" if v is None else f"{v:.4f}"


def cmd_compare(args):
    a, b = load_report(args.first), load_report(args.second)
    sa, sb = a.summary(), b.summary()
    keys = list(sa) + [k for k in sb if k not in sa]
    width = max(len(k) for k in keys)
    print(f"{'metric':<{width}}  {'first':>8}  {'second':>8}  {'delta':>8}")
    for k in keys:
        va, vb = sa.get(k), sb.get(k)
        delta = None if va is None or vb is None else vb - va
        print(f"{k:<{width}}  {_fmt(va):>8}  {_fmt(vb):>8}  {_fmt(delta):>8}")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "beats": cmd_beats,
    "synth": cmd_synth,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NoQualifyingSamples as exc:
        print(f"rhythmeter: {exc}", file=sys.stderr)
        return EXIT_NO_QUALIFYING
    except (RhythmeterError, OSError, ValueError) as exc:
        print(f"rhythmeter: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
