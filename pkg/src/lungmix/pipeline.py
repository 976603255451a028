"""Deterministic audio preprocessing: resample, bandpass, length fit, log-mel.

All operations are pure functions over `Waveform`; randomness (noise padding)
comes from an explicitly passed generator, never global state.
"""

from dataclasses import dataclass, replace
from math import gcd

import numpy as np
from scipy.signal import butter, resample_poly, sosfiltfilt

from .errors import EmptyAudio, InvalidConfig

# log-power floor: a zero-energy mel frame evaluates to log(POWER_FLOOR)
POWER_FLOOR = 1e-10

# log-mel statistics commonly used to normalize inputs of spectrogram
# transformers pretrained on large-scale audio corpora; config defaults only,
# override per run if the downstream model expects different statistics.
DEFAULT_NORM_MEAN = -4.2677393
DEFAULT_NORM_STD = 4.5689974


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono PCM samples (float64, nominally in [-1, 1]) at a fixed rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidConfig(f"waveform must be 1-D, got shape {arr.shape}")
        if arr.size and not np.isfinite(arr).all():
            raise InvalidConfig("waveform contains NaN or Inf")
        if int(self.sample_rate) <= 0:
            raise InvalidConfig(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Log-mel bins with shape (mel_bins, frames) plus the analysis settings."""

    bins: np.ndarray
    window_ms: float
    hop_ms: float
    mel_low_hz: float
    mel_high_hz: float

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidConfig(f"spectrogram must be 2-D, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise InvalidConfig("spectrogram contains NaN or Inf")
        object.__setattr__(self, "bins", arr)

    @property
    def shape(self):
        return self.bins.shape


@dataclass(frozen=True)
class PipelineConfig:
    target_rate: int = 16000
    band_low: float = 50.0
    band_high: float = 1500.0
    clip_seconds: float = 9.0
    pad_mode: str = "noise"  # "zeros" | "noise"
    pad_eps: float = 1e-4
    window_ms: float = 25.0
    hop_ms: float = 10.0
    mel_bins: int = 128
    frames: int = 1024
    mel_scale: str = "htk"  # "htk" | "slaney"
    norm_mean: float = DEFAULT_NORM_MEAN
    norm_std: float = DEFAULT_NORM_STD

    def __post_init__(self):
        if self.target_rate <= 0:
            raise InvalidConfig("target_rate must be positive")
        if not (0 < self.band_low < self.band_high < self.target_rate / 2):
            raise InvalidConfig(
                f"band edges must satisfy 0 < low < high < rate/2, got "
                f"({self.band_low}, {self.band_high}) at {self.target_rate} Hz"
            )
        if self.clip_seconds <= 0:
            raise InvalidConfig("clip_seconds must be positive")
        if self.norm_std <= 0:
            raise InvalidConfig("norm_std must be positive")
        if self.pad_mode not in ("zeros", "noise"):
            raise InvalidConfig(f"unknown pad_mode {self.pad_mode!r}")
        if self.mel_scale not in ("htk", "slaney"):
            raise InvalidConfig(f"unknown mel_scale {self.mel_scale!r}")


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Polyphase windowed-sinc resampling to `target_rate`.

    Identical rates pass the samples through untouched.
    """
    if len(w) == 0:
        raise EmptyAudio("cannot resample empty waveform")
    if target_rate <= 0:
        raise InvalidConfig(f"target_rate must be positive, got {target_rate}")
    if target_rate == w.sample_rate:
        return Waveform(w.samples.copy(), target_rate)
    g = gcd(target_rate, w.sample_rate)
    up, down = target_rate // g, w.sample_rate // g
    out = resample_poly(w.samples, up, down)
    return Waveform(out, target_rate)


def bandpass(w: Waveform, low: float, high: float) -> Waveform:
    """4th-order Butterworth bandpass, applied forward-backward (zero phase)."""
    if not (0 < low < high < w.sample_rate / 2):
        raise InvalidConfig(
            f"band edges must satisfy 0 < low < high < rate/2, got ({low}, {high})"
        )
    if len(w) == 0:
        raise EmptyAudio("cannot filter empty waveform")
    sos = butter(4, [low, high], btype="bandpass", fs=w.sample_rate, output="sos")
    # sosfiltfilt needs padlen < signal length; shrink it for short inputs
    default_padlen = 3 * (2 * sos.shape[0] + 1)
    padlen = min(default_padlen, len(w) - 1)
    out = sosfiltfilt(sos, w.samples, padlen=padlen)
    return Waveform(out, w.sample_rate)


def pad_to_length(
    w: Waveform,
    length: int,
    pad_mode: str = "zeros",
    pad_eps: float = 1e-4,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """Truncate to `length` keeping the head, or pad the tail.

    Noise padding draws uniform samples in [-pad_eps, pad_eps] from `rng`.
    """
    if length < 0:
        raise InvalidConfig("target length must be non-negative")
    n = len(w)
    if n >= length:
        return Waveform(w.samples[:length].copy(), w.sample_rate)
    if pad_mode == "zeros":
        tail = np.zeros(length - n)
    elif pad_mode == "noise":
        if rng is None:
            raise InvalidConfig("noise padding requires an explicit rng")
        tail = rng.uniform(-pad_eps, pad_eps, length - n)
    else:
        raise InvalidConfig(f"unknown pad_mode {pad_mode!r}")
    return Waveform(np.concatenate([w.samples, tail]), w.sample_rate)


def fit_length(
    w: Waveform,
    clip_seconds: float,
    pad_mode: str = "zeros",
    pad_eps: float = 1e-4,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """Cut or pad the waveform to exactly round(clip_seconds * rate) samples."""
    if clip_seconds <= 0:
        raise InvalidConfig("clip_seconds must be positive")
    target = int(round(clip_seconds * w.sample_rate))
    return pad_to_length(w, target, pad_mode=pad_mode, pad_eps=pad_eps, rng=rng)


def hz_to_mel(f, scale: str = "htk"):
    f = np.asarray(f, dtype=np.float64)
    if scale == "htk":
        return 2595.0 * np.log10(1.0 + f / 700.0)
    # slaney: linear below 1 kHz, logarithmic above
    linear = f / (200.0 / 3.0)
    log_step = np.log(6.4) / 27.0
    return np.where(f < 1000.0, linear, 15.0 + np.log(np.maximum(f, 1000.0) / 1000.0) / log_step)


def mel_to_hz(m, scale: str = "htk"):
    m = np.asarray(m, dtype=np.float64)
    if scale == "htk":
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    log_step = np.log(6.4) / 27.0
    return np.where(m < 15.0, m * (200.0 / 3.0), 1000.0 * np.exp(log_step * (m - 15.0)))


def mel_filterbank(
    n_mels: int, n_fft: int, sample_rate: int, scale: str = "htk"
) -> np.ndarray:
    """Triangular mel filterbank, (n_mels, n_fft // 2 + 1), spanning 0..Nyquist."""
    nyquist = sample_rate / 2.0
    mel_pts = np.linspace(hz_to_mel(0.0, scale), hz_to_mel(nyquist, scale), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts, scale)
    fft_freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    fb = np.zeros((n_mels, fft_freqs.size))
    for m in range(n_mels):
        lo, center, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        rising = (fft_freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - fft_freqs) / max(hi - center, 1e-12)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return fb


def mel_spectrogram(w: Waveform, cfg: PipelineConfig) -> Spectrogram:
    """Log-mel spectrogram with exactly (cfg.mel_bins, cfg.frames) bins.

    Frames past the end of the signal are filled with log(POWER_FLOOR), the
    value a zero-energy frame produces, so padding is indistinguishable from
    silence.
    """
    if w.sample_rate != cfg.target_rate:
        raise InvalidConfig(
            f"expected {cfg.target_rate} Hz input, got {w.sample_rate} Hz"
        )
    win = int(round(cfg.window_ms / 1000.0 * w.sample_rate))
    hop = int(round(cfg.hop_ms / 1000.0 * w.sample_rate))
    if win <= 0 or hop <= 0:
        raise InvalidConfig("window and hop must be positive")
    n_fft = 1
    while n_fft < win:
        n_fft *= 2

    x = w.samples
    n_frames_raw = 0 if len(x) < win else (len(x) - win) // hop + 1
    n_frames = min(n_frames_raw, cfg.frames)

    window = np.hanning(win)
    fb = mel_filterbank(cfg.mel_bins, n_fft, w.sample_rate, cfg.mel_scale)

    floor_value = np.log(POWER_FLOOR)
    bins = np.full((cfg.mel_bins, cfg.frames), floor_value)
    if n_frames > 0:
        idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
        frames = x[idx] * window[None, :]
        power = np.abs(np.fft.rfft(frames, n=n_fft, axis=1)) ** 2
        mel_power = power @ fb.T  # (frames, mel_bins)
        bins[:, :n_frames] = np.log(np.maximum(mel_power, POWER_FLOOR)).T

    return Spectrogram(
        bins,
        window_ms=cfg.window_ms,
        hop_ms=cfg.hop_ms,
        mel_low_hz=0.0,
        mel_high_hz=w.sample_rate / 2.0,
    )


def normalize_spectrogram(s: Spectrogram, mean: float, std: float) -> Spectrogram:
    """Elementwise (x - mean) / std."""
    if std <= 0:
        raise InvalidConfig(f"std must be positive, got {std}")
    return replace(s, bins=(s.bins - mean) / std)


def preprocess(
    w: Waveform, cfg: PipelineConfig, rng: np.random.Generator | None = None
) -> tuple[Waveform, Spectrogram]:
    """Full pipeline: resample -> bandpass -> fit length -> log-mel -> normalize.

    Returns the preprocessed waveform together with its normalized spectrogram.
    """
    out = resample(w, cfg.target_rate)
    out = bandpass(out, cfg.band_low, cfg.band_high)
    out = fit_length(out, cfg.clip_seconds, pad_mode=cfg.pad_mode, pad_eps=cfg.pad_eps, rng=rng)
    spec = mel_spectrogram(out, cfg)
    return out, normalize_spectrogram(spec, cfg.norm_mean, cfg.norm_std)
