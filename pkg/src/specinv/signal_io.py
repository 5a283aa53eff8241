"""WAV and spectrogram file I/O, mixture synthesis, magnitude models.

The spectrogram container is a small little-endian binary format ("SPGM"):
magic, version byte, payload-kind byte (0 = real float64, 1 = complex
float64 interleaved), two u32 dimensions, then the row-major payload.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .spectral import StftConfig, TimeSignal, stft

SPGM_MAGIC = b"SPGM"
SPGM_VERSION = 1
_KIND_REAL = 0
_KIND_COMPLEX = 1


# ---------------------------------------------------------------------------
# WAV
# ---------------------------------------------------------------------------

def read_wav(path) -> TimeSignal:
    """Read a mono PCM16 or float32 WAV file.

    16-bit samples are scaled to [-1, 1) by 1/32768; float32 samples are
    returned as-is (promoted to float64).
    """
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"unreadable WAV file {path}: {exc}") from exc
    if data.ndim != 1:
        raise ValueError("mono required")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format: {data.dtype}")
    return TimeSignal(samples, int(rate))


def write_wav(path, signal: TimeSignal, fmt: str = "float32") -> None:
    """Write a mono WAV file as IEEE float32 (default) or PCM16."""
    samples = signal.samples
    if fmt == "float32":
        wavfile.write(path, signal.sample_rate, samples.astype(np.float32))
    elif fmt == "pcm16":
        clipped = np.clip(samples, -1.0, 32767.0 / 32768.0)
        wavfile.write(path, signal.sample_rate, np.round(clipped * 32768.0).astype(np.int16))
    else:
        raise ValueError(f"unsupported WAV format: {fmt}")


# ---------------------------------------------------------------------------
# SPGM spectrogram files
# ---------------------------------------------------------------------------

def write_spectrogram(path, matrix: np.ndarray) -> None:
    """Write a real or complex F x T matrix as an SPGM file."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError("spectrogram must be a 2-D matrix")
    if max(matrix.shape) >= 2**32:
        raise ValueError("dimension overflow")
    if np.iscomplexobj(matrix):
        kind = _KIND_COMPLEX
        payload = np.ascontiguousarray(matrix, dtype="<c16").tobytes()
    else:
        kind = _KIND_REAL
        payload = np.ascontiguousarray(matrix, dtype="<f8").tobytes()
    header = struct.pack("<4sBBII", SPGM_MAGIC, SPGM_VERSION, kind, *matrix.shape)
    Path(path).write_bytes(header + payload)


def read_spectrogram(path) -> np.ndarray:
    """Read an SPGM file back into a float64 or complex128 matrix."""
    raw = Path(path).read_bytes()
    header_size = struct.calcsize("<4sBBII")
    if len(raw) < header_size:
        raise ValueError("not a spectrogram file (truncated header)")
    magic, version, kind, n_rows, n_cols = struct.unpack("<4sBBII", raw[:header_size])
    if magic != SPGM_MAGIC:
        raise ValueError("not a spectrogram file")
    if version != SPGM_VERSION:
        raise ValueError(f"unsupported spectrogram version {version}")
    if kind == _KIND_REAL:
        dtype, itemsize = "<f8", 8
    elif kind == _KIND_COMPLEX:
        dtype, itemsize = "<c16", 16
    else:
        raise ValueError(f"unknown payload kind {kind}")
    expected = header_size + n_rows * n_cols * itemsize
    if len(raw) != expected:
        raise ValueError("truncated spectrogram payload")
    data = np.frombuffer(raw, dtype=dtype, offset=header_size)
    return data.reshape(n_rows, n_cols).astype(data.dtype.newbyteorder("="))


# ---------------------------------------------------------------------------
# Mixture synthesis and magnitude models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixtureResult:
    mixture: TimeSignal
    scaled_noise: TimeSignal
    offset: int
    gain: float
    achieved_isnr_db: float


def make_mixture(clean: TimeSignal, noise: TimeSignal, isnr_db: float, seed: int) -> MixtureResult:
    """Mix clean speech with a randomly cropped, rescaled noise excerpt.

    The noise gain is chosen so the achieved input SNR equals the target
    exactly (power ratio of clean to scaled noise).
    """
    if clean.sample_rate != noise.sample_rate:
        raise ValueError("sample rate mismatch between clean and noise")
    if len(noise) < len(clean):
        raise ValueError("noise must be at least as long as the clean signal")
    rng = np.random.default_rng(seed)
    offset = int(rng.integers(0, len(noise) - len(clean) + 1))
    crop = noise.samples[offset : offset + len(clean)]
    p_clean = float(np.mean(clean.samples**2))
    p_noise = float(np.mean(crop**2))
    if p_noise == 0:
        raise ValueError("zero-power noise crop")
    gain = float(np.sqrt(p_clean / (p_noise * 10.0 ** (isnr_db / 10.0))))
    scaled = gain * crop
    achieved = 10.0 * np.log10(p_clean / float(np.mean(scaled**2)))
    return MixtureResult(
        mixture=TimeSignal(clean.samples + scaled, clean.sample_rate),
        scaled_noise=TimeSignal(scaled, clean.sample_rate),
        offset=offset,
        gain=gain,
        achieved_isnr_db=float(achieved),
    )


def oracle_magnitudes(sources: list[TimeSignal], cfg: StftConfig) -> np.ndarray:
    """Ground-truth magnitude spectrograms |STFT(s_j)| as a J x F x T array."""
    lengths = {len(s) for s in sources}
    if len(lengths) != 1:
        raise ValueError("sources must have equal lengths")
    return np.stack([np.abs(stft(s.samples, cfg)) for s in sources])


def degrade_magnitudes(mags: np.ndarray, level: float, seed: int) -> np.ndarray:
    """Multiplicative log-Gaussian degradation, a stand-in for DNN estimation error.

    Each bin is multiplied by exp(e) with e ~ N(0, level^2).  Level 0 returns
    the input unchanged; the output is nonnegative by construction.
    """
    if level < 0:
        raise ValueError("degradation level must be nonnegative")
    mags = np.asarray(mags, dtype=np.float64)
    if level == 0:
        return mags.copy()
    rng = np.random.default_rng(seed)
    return mags * np.exp(rng.normal(0.0, level, size=mags.shape))


# ---------------------------------------------------------------------------
# Dataset manifest
# ---------------------------------------------------------------------------

@dataclass
class ManifestItem:
    clean_path: str
    noise_path: str
    isnr_db: float
    seed: int
    split: str  # "validation" | "test"

    def __post_init__(self):
        if not self.clean_path or not self.noise_path:
            raise ValueError("manifest paths must be non-empty")
        if self.split not in ("validation", "test"):
            raise ValueError(f"unknown split: {self.split}")


@dataclass
class DatasetManifest:
    items: list[ManifestItem]
    sample_rate: int = 16000
    window_length: int = 1024
    hop: int = 256
    n_sources: int = 2
    root: Path = field(default_factory=Path)

    def stft_config(self) -> StftConfig:
        return StftConfig(
            window_length=self.window_length,
            hop=self.hop,
            sample_rate=self.sample_rate,
        )

    def split_items(self, split: str) -> list[ManifestItem]:
        return [it for it in self.items if it.split == split]

    def resolve(self, rel_path: str) -> Path:
        return self.root / rel_path


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    doc = json.loads(path.read_text())
    items = [ManifestItem(**it) for it in doc["items"]]
    return DatasetManifest(
        items=items,
        sample_rate=doc.get("sample_rate", 16000),
        window_length=doc.get("window_length", 1024),
        hop=doc.get("hop", 256),
        n_sources=doc.get("n_sources", 2),
        root=path.parent,
    )


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "sample_rate": manifest.sample_rate,
        "window_length": manifest.window_length,
        "hop": manifest.hop,
        "n_sources": manifest.n_sources,
        "items": [
            {
                "clean_path": it.clean_path,
                "noise_path": it.noise_path,
                "isnr_db": it.isnr_db,
                "seed": it.seed,
                "split": it.split,
            }
            for it in manifest.items
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
