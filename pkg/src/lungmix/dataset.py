"""Manifest ingestion, label unification across corpora, and augmented export.

Manifests are JSONL, one record per line. Label maps translate each corpus's
raw vocabulary into the four reference classes; they are shipped as editable
data (see data/label_maps.json) seeded with the documented unification rules,
and raw names outside those rules must be added by the operator.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .audio_io import write_spectrogram, write_wav
from .errors import InvalidConfig, MissingAudio, ParseError, UnknownLabel
from .pipeline import Spectrogram, Waveform

log = logging.getLogger(__name__)

DATASETS = ("icbhi", "spr", "hf", "synthetic")
SPLITS = ("train", "test")
UNIFIED = ("normal", "crackle", "wheeze", "both")


@dataclass
class RecordManifest:
    """One annotated audio segment with provenance."""

    record_id: str
    audio_path: str
    dataset: str
    split: str
    label_raw: str
    label_unified: str | None = None
    segment: tuple[float, float] | None = None
    events: list[tuple[float, float, str]] | None = None
    soft_target: dict | None = None
    provenance: dict | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise InvalidConfig(f"unknown dataset {self.dataset!r}")
        if self.split not in SPLITS:
            raise InvalidConfig(f"unknown split {self.split!r}")
        if self.label_unified is not None and self.label_unified not in UNIFIED:
            raise InvalidConfig(f"unknown unified label {self.label_unified!r}")
        if self.segment is not None:
            start, end = self.segment
            if not (0 <= start < end):
                raise InvalidConfig(f"segment times must satisfy 0 <= start < end, got {self.segment}")

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None and k != "extras"}
        out.update(self.extras)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RecordManifest":
        known = set(cls.__dataclass_fields__) - {"extras"}
        kwargs = {k: v for k, v in data.items() if k in known}
        extras = {k: v for k, v in data.items() if k not in known}
        for req in ("record_id", "audio_path", "dataset", "split", "label_raw"):
            if req not in kwargs:
                raise ParseError(f"missing required field {req!r}")
        if kwargs.get("segment") is not None:
            kwargs["segment"] = tuple(kwargs["segment"])
        if kwargs.get("events") is not None:
            kwargs["events"] = [tuple(e) for e in kwargs["events"]]
        return cls(**kwargs, extras=extras)


def default_label_maps() -> dict[str, dict[str, str]]:
    text = resources.files("lungmix.data").joinpath("label_maps.json").read_text()
    return load_label_maps_data(json.loads(text))


def load_label_maps(path) -> dict[str, dict[str, str]]:
    with open(path) as fh:
        return load_label_maps_data(json.load(fh))


def load_label_maps_data(raw: dict) -> dict[str, dict[str, str]]:
    """Validate a raw label-map table; hf must never map onto 'both'."""
    maps: dict[str, dict[str, str]] = {}
    for dataset, table in raw.items():
        if dataset not in DATASETS:
            raise InvalidConfig(f"label map for unknown dataset {dataset!r}")
        clean = {}
        for raw_label, unified in table.items():
            if unified not in UNIFIED:
                raise InvalidConfig(
                    f"label map {dataset}: {raw_label!r} -> unknown class {unified!r}"
                )
            clean[raw_label.strip().lower()] = unified
        if dataset == "hf" and "both" in clean.values():
            raise InvalidConfig("hf label map must not produce 'both'")
        maps[dataset] = clean
    return maps


_DEFAULT_MAPS: dict[str, dict[str, str]] | None = None


def _maps(maps=None) -> dict[str, dict[str, str]]:
    global _DEFAULT_MAPS
    if maps is not None:
        return maps
    if _DEFAULT_MAPS is None:
        _DEFAULT_MAPS = default_label_maps()
    return _DEFAULT_MAPS


def align_label(dataset: str, raw: str, maps=None) -> str:
    """Table lookup from a corpus's raw label to the unified four-class name."""
    table = _maps(maps).get(dataset)
    if table is None:
        raise UnknownLabel(f"no label map registered for dataset {dataset!r}")
    unified = table.get(raw.strip().lower())
    if unified is None:
        raise UnknownLabel(f"unknown raw label {raw!r} for dataset {dataset!r}")
    return unified


def align_records(
    records: list[RecordManifest], maps=None, max_skip_rate: float = 0.05
) -> list[RecordManifest]:
    """Fill label_unified on every record; skip-and-log records whose raw
    label is unregistered, failing the run if too many were skipped."""
    aligned: list[RecordManifest] = []
    skipped = 0
    for rec in records:
        try:
            rec.label_unified = align_label(rec.dataset, rec.label_raw, maps)
        except UnknownLabel as exc:
            skipped += 1
            log.warning("skipping %s: %s", rec.record_id, exc)
            continue
        aligned.append(rec)
    if records and skipped / len(records) > max_skip_rate:
        raise UnknownLabel(
            f"{skipped}/{len(records)} records failed label alignment "
            f"(threshold {max_skip_rate:.0%})"
        )
    return aligned


def load_manifest(path, check_audio: bool = True) -> list[RecordManifest]:
    """Read a JSONL manifest, validating every line; order is preserved.

    Relative audio paths are resolved against the manifest's directory when
    checking existence, but stored verbatim.
    """
    path = Path(path)
    if not path.exists():
        raise MissingAudio(f"manifest not found: {path}")
    records: list[RecordManifest] = []
    root = path.parent
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                rec = RecordManifest.from_dict(data)
            except (ParseError, InvalidConfig, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if check_audio:
                audio = Path(rec.audio_path)
                if not audio.is_absolute():
                    audio = root / audio
                if not rec.audio_path or not audio.exists():
                    raise MissingAudio(
                        f"{path}:{lineno}: audio file not found: {rec.audio_path!r}"
                    )
            records.append(rec)
    return records


def resolve_audio_path(record: RecordManifest, manifest_path) -> Path:
    audio = Path(record.audio_path)
    if audio.is_absolute():
        return audio
    return Path(manifest_path).parent / audio


def save_manifest(records: list[RecordManifest], path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
    return path


def export_augmented(results, out_dir, datasets=None) -> Path:
    """Write one audio file plus one manifest row per mix result.

    Waveform results become 16-bit PCM WAVs, spectrogram results the flat
    binary format. Re-running with identical inputs produces byte-identical
    files; manifest rows are emitted in input order with relative paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[RecordManifest] = []
    for i, result in enumerate(results):
        record_id = f"aug-{i:05d}"
        if isinstance(result.audio, Waveform):
            filename = f"{record_id}.wav"
            write_wav(out_dir / filename, result.audio)
        elif isinstance(result.audio, Spectrogram):
            filename = f"{record_id}.spec"
            write_spectrogram(out_dir / filename, result.audio)
        else:
            raise InvalidConfig(f"cannot export audio of type {type(result.audio)!r}")
        soft = None
        if result.soft_target is not None:
            soft = {
                "y_a": result.soft_target.y_a.name,
                "y_b": result.soft_target.y_b.name,
                "lam": result.soft_target.lam,
            }
        rows.append(
            RecordManifest(
                record_id=record_id,
                audio_path=filename,
                dataset=datasets[i] if datasets is not None else "synthetic",
                split="train",
                label_raw=result.label.name,
                label_unified=result.label.name,
                soft_target=soft,
                provenance=result.provenance.to_dict(),
            )
        )
    return save_manifest(rows, out_dir / "augmented.jsonl")


def pair_records(
    records: list[RecordManifest],
    n_pairs: int,
    pairing: str,
    rng: np.random.Generator,
) -> list[tuple[RecordManifest, RecordManifest]]:
    """Draw mixing pairs from the train split only.

    uniform: any two distinct records; cross-class: unified labels must
    differ (rejection sampled, bounded).
    """
    train = [r for r in records if r.split == "train"]
    if len(train) < 2:
        raise InvalidConfig("need at least two train records to form pairs")
    if pairing not in ("uniform", "cross-class"):
        raise InvalidConfig(f"unknown pairing policy {pairing!r}")
    if pairing == "cross-class":
        labels = {r.label_unified for r in train}
        if len(labels) < 2:
            raise InvalidConfig("cross-class pairing needs at least two classes")
    pairs = []
    for _ in range(n_pairs):
        for _attempt in range(10000):
            i, j = rng.choice(len(train), size=2, replace=False)
            a, b = train[int(i)], train[int(j)]
            if pairing == "uniform" or a.label_unified != b.label_unified:
                pairs.append((a, b))
                break
        else:
            raise InvalidConfig("could not draw a valid pair")
    return pairs
