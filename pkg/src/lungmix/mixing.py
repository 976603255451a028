"""Waveform and spectrogram mixing strategies.

`lungmix` blends two waveforms through the three-valued mask built from their
loudness outliers and a Bernoulli mask; `vanilla_mixup`, `cutmix`, and
`patchmix` are the reference baselines. All strategies are pure functions of
the request, so identical (sources, params) regenerate bit-identical output.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyAudio, InvalidConfig, RateMismatch, ShapeMismatch
from .labels import LabelVector, SoftTriple, interpolate_label
from .masks import MixMask, MixParams, combine_masks, loudness_mask, random_mask, sample_lambda
from .pipeline import Spectrogram, Waveform, pad_to_length
from .rng import derive_rng

STRATEGIES = ("lungmix", "mixup", "cutmix", "patchmix")


@dataclass(frozen=True, eq=False)
class MixRequest:
    audio_a: Waveform
    label_a: LabelVector
    audio_b: Waveform
    label_b: LabelVector
    params: MixParams
    strategy: str = "lungmix"
    interpolation: str = "nonlinear"
    id_a: str = ""
    id_b: str = ""

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidConfig(f"unknown strategy {self.strategy!r}")
        if self.audio_a.sample_rate != self.audio_b.sample_rate:
            raise RateMismatch(
                f"sources differ in rate: {self.audio_a.sample_rate} vs "
                f"{self.audio_b.sample_rate} Hz"
            )


@dataclass(frozen=True)
class Provenance:
    """Everything needed to regenerate one augmented record bit-exactly."""

    source_a: str
    source_b: str
    strategy: str
    interpolation: str
    alpha: float
    lam: float
    seed: int
    semantics: str | None = None
    rolled: str | None = None
    roll_offset: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class MixResult:
    audio: "Waveform | Spectrogram"
    label: LabelVector
    soft_target: SoftTriple | None
    provenance: Provenance


@dataclass(frozen=True, eq=False)
class LungmixTrace:
    """Intermediate mask state, exposed for inspection and oracle tests."""

    audio_a: Waveform
    audio_b: Waveform
    mask_a: np.ndarray
    mask_b: np.ndarray
    rand: np.ndarray
    mask: MixMask
    lam: float
    mixed: Waveform


def shift_roll(w: Waveform, rng: np.random.Generator) -> Waveform:
    """Circular rotation by a uniform offset in [0, len)."""
    if len(w) == 0:
        raise EmptyAudio("cannot roll empty waveform")
    offset = int(rng.integers(0, len(w)))
    return Waveform(np.roll(w.samples, offset), w.sample_rate)


def shift_roll_pair(
    a: Waveform, b: Waveform, rng: np.random.Generator
) -> tuple[Waveform, Waveform, str, int]:
    """Roll one of the two waveforms, chosen by a seeded coin flip.

    Returns the pair plus which side was rolled and by how much.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptyAudio("cannot roll empty waveform")
    target = "b" if rng.integers(0, 2) == 0 else "a"
    w = b if target == "b" else a
    offset = int(rng.integers(0, len(w)))
    rolled = Waveform(np.roll(w.samples, offset), w.sample_rate)
    if target == "b":
        return a, rolled, target, offset
    return rolled, b, target, offset


def apply_mix_mask(a: Waveform, b: Waveform, mask: MixMask) -> Waveform:
    """Per-sample blend: mask value 1 copies a, 0 copies b, lam interpolates.

    The 0/1 positions copy their source bit-exactly; lam positions evaluate
    lam * a[t] + (1 - lam) * b[t].
    """
    if a.sample_rate != b.sample_rate:
        raise RateMismatch("cannot blend waveforms with different rates")
    if not (len(a) == len(b) == len(mask)):
        raise ShapeMismatch(
            f"lengths differ: a={len(a)}, b={len(b)}, mask={len(mask)}"
        )
    m = mask.values
    lam = mask.lam
    blend = lam * a.samples + (1.0 - lam) * b.samples
    out = np.where(m == 1.0, a.samples, np.where(m == 0.0, b.samples, blend))
    return Waveform(out, a.sample_rate)


def _resolve_labels(
    y_a: LabelVector, y_b: LabelVector, lam: float, mode: str
) -> tuple[LabelVector, SoftTriple | None]:
    """Hard manifest label plus optional soft target for a mixed record.

    Linear mode has no merged hard label; the manifest then records the label
    of the dominant-weight source.
    """
    interp = interpolate_label(y_a, y_b, lam, mode)
    if interp.hard is not None:
        return interp.hard, interp.soft
    return (y_a if lam >= 0.5 else y_b), interp.soft


def _align_sources(
    req: MixRequest, rng: np.random.Generator
) -> tuple[Waveform, Waveform, np.ndarray, np.ndarray]:
    """Pad the shorter source to max length; loudness statistics are taken on
    the original samples and padded positions never count as loud."""
    a, b = req.audio_a, req.audio_b
    n = max(len(a), len(b))
    mask_a = loudness_mask(a)
    mask_b = loudness_mask(b)
    pad = req.params.pad_mode
    eps = req.params.pad_eps
    a_pad = pad_to_length(a, n, pad_mode=pad, pad_eps=eps, rng=rng)
    b_pad = pad_to_length(b, n, pad_mode=pad, pad_eps=eps, rng=rng)
    mask_a = np.concatenate([mask_a, np.zeros(n - mask_a.size, dtype=bool)])
    mask_b = np.concatenate([mask_b, np.zeros(n - mask_b.size, dtype=bool)])
    return a_pad, b_pad, mask_a, mask_b


def _draw_lambda(params: MixParams, rng: np.random.Generator) -> float:
    if params.lam is not None:
        return params.lam
    return sample_lambda(params.alpha, rng)


def lungmix_trace(req: MixRequest) -> LungmixTrace:
    """Run the lungmix strategy and keep every intermediate mask.

    Stream order per request seed: lambda, padding noise (a then b), random
    mask. Changing this order changes outputs, so it is part of the contract.
    """
    if req.strategy != "lungmix":
        raise InvalidConfig(f"expected strategy 'lungmix', got {req.strategy!r}")
    rng = derive_rng(req.params.seed)
    lam = _draw_lambda(req.params, rng)
    a, b, mask_a, mask_b = _align_sources(req, rng)
    rand = random_mask(len(a), req.params.random_density, rng)
    mask = combine_masks(mask_a, mask_b, rand, lam, req.params.semantics)
    mixed = apply_mix_mask(a, b, mask)
    return LungmixTrace(a, b, mask_a, mask_b, rand, mask, lam, mixed)


def lungmix(req: MixRequest) -> MixResult:
    """Mask-based waveform mix with OR-style label interpolation."""
    trace = lungmix_trace(req)
    label, soft = _resolve_labels(req.label_a, req.label_b, trace.lam, req.interpolation)
    prov = Provenance(
        source_a=req.id_a,
        source_b=req.id_b,
        strategy="lungmix",
        interpolation=req.interpolation,
        alpha=req.params.alpha,
        lam=trace.lam,
        seed=req.params.seed,
        semantics=req.params.semantics,
    )
    return MixResult(trace.mixed, label, soft, prov)


def vanilla_mixup(req: MixRequest) -> MixResult:
    """Convex combination of the two waveforms with coefficient lambda."""
    if req.strategy != "mixup":
        raise InvalidConfig(f"expected strategy 'mixup', got {req.strategy!r}")
    rng = derive_rng(req.params.seed)
    lam = _draw_lambda(req.params, rng)
    a, b, _, _ = _align_sources(req, rng)
    mixed = Waveform(lam * a.samples + (1.0 - lam) * b.samples, a.sample_rate)
    label, soft = _resolve_labels(req.label_a, req.label_b, lam, "linear")
    prov = Provenance(
        source_a=req.id_a,
        source_b=req.id_b,
        strategy="mixup",
        interpolation=req.interpolation,
        alpha=req.params.alpha,
        lam=lam,
        seed=req.params.seed,
    )
    return MixResult(mixed, label, soft, prov)


def cut_splice(a: Waveform, b: Waveform, lam: float, offset: int) -> Waveform:
    """Replace a's contiguous segment of round((1 - lam) * len) samples,
    starting at `offset`, with the corresponding samples of b."""
    if a.sample_rate != b.sample_rate:
        raise RateMismatch("cannot splice waveforms with different rates")
    if len(a) != len(b):
        raise ShapeMismatch("cut splice needs equal lengths")
    n = len(a)
    seg = int(round((1.0 - lam) * n))
    if not 0 <= offset <= n - seg:
        raise InvalidConfig(f"offset {offset} leaves no room for a {seg}-sample cut")
    out = a.samples.copy()
    out[offset : offset + seg] = b.samples[offset : offset + seg]
    return Waveform(out, a.sample_rate)


def cutmix(req: MixRequest) -> MixResult:
    """Replace one contiguous segment of a with the same segment of b.

    The cut spans round((1 - lambda) * len) samples at a seeded offset; the
    label coefficient is the exact surviving fraction of a.
    """
    if req.strategy != "cutmix":
        raise InvalidConfig(f"expected strategy 'cutmix', got {req.strategy!r}")
    rng = derive_rng(req.params.seed)
    lam = _draw_lambda(req.params, rng)
    a, b, _, _ = _align_sources(req, rng)
    n = len(a)
    seg = int(round((1.0 - lam) * n))
    offset = int(rng.integers(0, n - seg + 1))
    out = cut_splice(a, b, lam, offset).samples
    lam_eff = 1.0 - seg / n
    label, soft = _resolve_labels(req.label_a, req.label_b, lam_eff, req.interpolation)
    prov = Provenance(
        source_a=req.id_a,
        source_b=req.id_b,
        strategy="cutmix",
        interpolation=req.interpolation,
        alpha=req.params.alpha,
        lam=lam,
        seed=req.params.seed,
    )
    return MixResult(Waveform(out, a.sample_rate), label, soft, prov)


def patchmix(
    s_a: Spectrogram,
    s_b: Spectrogram,
    params: MixParams,
    label_a: LabelVector,
    label_b: LabelVector,
    interpolation: str = "preserve",
    patch_size: int = 16,
    id_a: str = "",
    id_b: str = "",
) -> MixResult:
    """Swap a seeded random fraction (1 - lambda) of square spectrogram patches."""
    if s_a.bins.shape != s_b.bins.shape:
        raise ShapeMismatch(
            f"spectrogram shapes differ: {s_a.bins.shape} vs {s_b.bins.shape}"
        )
    rows, cols = s_a.bins.shape
    if rows % patch_size or cols % patch_size:
        raise ShapeMismatch(
            f"shape {s_a.bins.shape} not divisible into {patch_size}x{patch_size} patches"
        )
    rng = derive_rng(params.seed)
    lam = _draw_lambda(params, rng)
    grid_r, grid_c = rows // patch_size, cols // patch_size
    n_patches = grid_r * grid_c
    n_replace = int(round((1.0 - lam) * n_patches))
    chosen = rng.choice(n_patches, size=n_replace, replace=False)
    out = s_a.bins.copy()
    for idx in chosen:
        r = (idx // grid_c) * patch_size
        c = (idx % grid_c) * patch_size
        out[r : r + patch_size, c : c + patch_size] = s_b.bins[
            r : r + patch_size, c : c + patch_size
        ]
    mixed = Spectrogram(
        out,
        window_ms=s_a.window_ms,
        hop_ms=s_a.hop_ms,
        mel_low_hz=s_a.mel_low_hz,
        mel_high_hz=s_a.mel_high_hz,
    )
    lam_eff = 1.0 - n_replace / n_patches
    label, soft = _resolve_labels(label_a, label_b, lam_eff, interpolation)
    prov = Provenance(
        source_a=id_a,
        source_b=id_b,
        strategy="patchmix",
        interpolation=interpolation,
        alpha=params.alpha,
        lam=lam,
        seed=params.seed,
    )
    return MixResult(mixed, label, soft, prov)


def mix(req: MixRequest) -> MixResult:
    """Dispatch a waveform mixing request to its strategy."""
    if req.strategy == "lungmix":
        return lungmix(req)
    if req.strategy == "mixup":
        return vanilla_mixup(req)
    if req.strategy == "cutmix":
        return cutmix(req)
    raise InvalidConfig(
        f"strategy {req.strategy!r} does not operate on raw waveform requests"
    )
