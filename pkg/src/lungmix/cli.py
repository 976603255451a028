"""Command-line entry point: preprocess / augment / synth / eval / inspect-mask.

Every run descends from one master seed; flags override values from an
optional JSON config file, and the resolved configuration is snapshotted next
to the outputs of any command that writes artifacts.

Exit codes: 0 ok, 2 config error, 3 data error, 4 I/O error.
"""

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .audio_io import read_wav, write_spectrogram, write_spectrogram_csv, write_wav
from .augment import AugmentPlan, augment_corpus
from .dataset import align_records, load_label_maps, load_manifest
from .errors import InvalidConfig, LungmixError
from .labels import FOUR_CLASS
from .masks import MixParams
from .metrics import score
from .mixing import MixRequest, lungmix_trace
from .pipeline import PipelineConfig, preprocess
from .synth import make_corpus
from .rng import derive_rng

EXIT_CODES = {"config": 2, "data": 3, "io": 4}


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfig("config file must hold a JSON object")
    return data


def _merged(file_section: dict, flag_values: dict) -> dict:
    """Config-file values overridden by explicitly given flags."""
    out = dict(file_section)
    out.update({k: v for k, v in flag_values.items() if v is not None})
    return out


def _pipeline_config(args, config: dict) -> PipelineConfig:
    section = _merged(
        config.get("pipeline", {}),
        {
            "target_rate": args.target_rate,
            "band_low": args.band_low,
            "band_high": args.band_high,
            "clip_seconds": args.clip_seconds,
        },
    )
    try:
        return PipelineConfig(**section)
    except TypeError as exc:
        raise InvalidConfig(f"bad pipeline config: {exc}") from exc


def _write_snapshot(out_dir: Path, command: str, resolved: dict) -> None:
    snapshot = {"command": command, **resolved}
    with open(out_dir / "config_snapshot.json", "w") as fh:
        json.dump(snapshot, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_preprocess(args) -> int:
    config = _load_config(args.config)
    cfg = _pipeline_config(args, config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else config.get("master_seed", 0)

    wave = read_wav(args.infile)
    processed, spec = preprocess(wave, cfg, derive_rng(seed, "preprocess"))
    stem = Path(args.infile).stem
    write_wav(out_dir / f"{stem}_preprocessed.wav", processed)
    write_spectrogram(out_dir / f"{stem}.spec", spec)
    if args.csv:
        write_spectrogram_csv(out_dir / f"{stem}.csv", spec)
    _write_snapshot(out_dir, "preprocess", {"pipeline": asdict(cfg), "master_seed": seed})
    print(f"wrote {stem}_preprocessed.wav and {stem}.spec to {out_dir}")
    return 0


def cmd_augment(args) -> int:
    config = _load_config(args.config)
    section = _merged(
        config.get("augment", {}),
        {
            "strategy": args.strategy,
            "interpolation": args.mode,
            "alpha": args.alpha,
            "lam": args.lam,
            "random_density": args.density,
            "semantics": args.semantics,
            "pairing": args.pairing,
            "n_pairs": args.pairs,
            "master_seed": args.seed,
            "workers": args.workers,
        },
    )
    if args.no_roll:
        section["apply_roll"] = False
    try:
        plan = AugmentPlan(**section)
    except TypeError as exc:
        raise InvalidConfig(f"bad augment config: {exc}") from exc
    pipeline_cfg = PipelineConfig(**config.get("pipeline", {})) if "pipeline" in config else None

    maps = load_label_maps(args.label_maps) if args.label_maps else None
    records = load_manifest(args.manifest)
    records = align_records(records, maps=maps)
    out_dir = Path(args.out)
    manifest = augment_corpus(
        records, args.manifest, out_dir, plan, schema=FOUR_CLASS, pipeline_cfg=pipeline_cfg
    )
    _write_snapshot(out_dir, "augment", {"augment": asdict(plan)})
    print(f"wrote {plan.n_pairs} augmented records, manifest at {manifest}")
    return 0


def cmd_synth(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else config.get("master_seed", 0)
    out_dir = Path(args.out)
    manifest = make_corpus(
        out_dir,
        per_class=args.per_class,
        duration_s=args.duration,
        sample_rate=args.sample_rate,
        n_events=args.n_events,
        seed=seed,
    )
    _write_snapshot(
        out_dir,
        "synth",
        {
            "per_class": args.per_class,
            "duration_s": args.duration,
            "sample_rate": args.sample_rate,
            "n_events": args.n_events,
            "master_seed": seed,
        },
    )
    print(f"wrote synthetic corpus manifest at {manifest}")
    return 0


def cmd_eval(args) -> int:
    pairs = []
    path = Path(args.predictions)
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                pairs.append((row["true"], row["predicted"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise LungmixError(f"{path}:{lineno}: bad prediction row: {exc}") from exc
    report = score(pairs)
    print(report.format_table())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_json() + "\n")
    return 0


def cmd_inspect_mask(args) -> int:
    audio_a = read_wav(args.file_a)
    audio_b = read_wav(args.file_b)
    params = MixParams(
        alpha=args.alpha,
        lam=args.lam,
        seed=args.seed,
        random_density=args.density,
        semantics=args.semantics,
    )
    normal = FOUR_CLASS.vector("normal")
    req = MixRequest(audio_a, normal, audio_b, normal, params, strategy="lungmix")
    trace = lungmix_trace(req)
    sink = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(sink)
        writer.writerow(["sample_index", "m_i", "m_j", "r", "combined"])
        for t in range(len(trace.mask)):
            writer.writerow(
                [t, int(trace.mask_a[t]), int(trace.mask_b[t]), int(trace.rand[t]), trace.mask.values[t]]
            )
    finally:
        if args.out:
            sink.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lungmix", description="Deterministic respiratory-sound augmentation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")

    p = sub.add_parser("preprocess", parents=[common], help="resample, filter, fit, mel")
    p.add_argument("--in", dest="infile", required=True, help="input WAV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--csv", action="store_true", help="also write the spectrogram as CSV")
    p.add_argument("--target-rate", type=int)
    p.add_argument("--band-low", type=float)
    p.add_argument("--band-high", type=float)
    p.add_argument("--clip-seconds", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("augment", parents=[common], help="mix pairs from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strategy", choices=["lungmix", "mixup", "cutmix", "patchmix"])
    p.add_argument("--mode", choices=["linear", "nonlinear", "combined", "preserve"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--pairing", choices=["uniform", "cross-class"])
    p.add_argument("--density", type=float)
    p.add_argument("--semantics", choices=["loudness_precedence", "max"])
    p.add_argument("--workers", type=int)
    p.add_argument("--no-roll", action="store_true", help="skip the pre-mix shift/roll")
    p.add_argument("--label-maps", help="JSON file overriding the shipped label maps")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("synth", parents=[common], help="generate the synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=1)
    p.add_argument("--duration", type=float, default=9.0)
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--n-events", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", parents=[common], help="score a predictions JSONL")
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", help="also write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect-mask", parents=[common], help="dump mix masks as CSV")
    p.add_argument("--a", dest="file_a", required=True)
    p.add_argument("--b", dest="file_b", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lam", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--semantics", choices=["loudness_precedence", "max"], default="loudness_precedence")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_inspect_mask)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LungmixError as exc:
        print(
            json.dumps({"error": str(exc), "category": exc.category}),
            file=sys.stderr,
        )
        return EXIT_CODES.get(exc.category, 3)
    except OSError as exc:
        print(json.dumps({"error": str(exc), "category": "io"}), file=sys.stderr)
        return 4


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
