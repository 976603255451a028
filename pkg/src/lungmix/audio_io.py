"""File formats: mono WAV in/out and the flat binary spectrogram container.

WAV input accepts 16-bit PCM or 32-bit float; output is always 16-bit PCM.
Spectrograms serialize as an 8-byte header (two uint32 LE: mel_bins, frames)
followed by row-major float32 LE values, or as CSV on request.
"""

import struct
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import EmptyAudio, InvalidConfig, MissingAudio, ParseError
from .pipeline import Spectrogram, Waveform


def read_wav(path) -> Waveform:
    path = Path(path)
    if not path.exists():
        raise MissingAudio(f"audio file not found: {path}")
    try:
        rate, data = wavfile.read(path)
    except (ValueError, struct.error) as exc:
        raise ParseError(f"cannot read WAV {path}: {exc}") from exc
    if data.ndim != 1:
        raise InvalidConfig(f"expected mono WAV, got {data.ndim} channels: {path}")
    if data.size == 0:
        raise EmptyAudio(f"WAV contains no samples: {path}")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise InvalidConfig(f"unsupported WAV sample format {data.dtype}: {path}")
    return Waveform(samples, rate)


def write_wav(path, w: Waveform) -> None:
    """Write 16-bit PCM; samples are clipped to [-1, 1] before quantization."""
    scaled = np.round(np.clip(w.samples, -1.0, 1.0) * 32768.0)
    pcm = np.clip(scaled, -32768, 32767).astype(np.int16)
    wavfile.write(Path(path), w.sample_rate, pcm)


def write_spectrogram(path, s: Spectrogram) -> None:
    mel_bins, frames = s.bins.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", mel_bins, frames))
        fh.write(s.bins.astype("<f4").tobytes(order="C"))


def read_spectrogram(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise MissingAudio(f"spectrogram file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < 8:
        raise ParseError(f"spectrogram file too short: {path}")
    mel_bins, frames = struct.unpack("<II", raw[:8])
    expected = 8 + 4 * mel_bins * frames
    if len(raw) != expected:
        raise ParseError(
            f"spectrogram size mismatch in {path}: expected {expected} bytes, got {len(raw)}"
        )
    values = np.frombuffer(raw[8:], dtype="<f4")
    return values.reshape(mel_bins, frames).astype(np.float64)


def write_spectrogram_csv(path, s: Spectrogram) -> None:
    """One CSV row per mel bin, frames as columns."""
    np.savetxt(path, s.bins, delimiter=",", fmt="%.8g")
