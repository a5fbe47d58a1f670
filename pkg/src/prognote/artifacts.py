"""Versioned single-file binary artifacts: embedding model, sequence model,
and the vectorized labeled dataset.

Every file starts with a 4-byte magic and a little-endian u32 format version;
loaders validate the header and every tensor shape before use, and writes go
to a temporary name renamed into place only on success.
"""
from __future__ import annotations

import datetime as dt
import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .atomic import atomic_write_bytes, atomic_write_text
from .embedding import SkipGramEmbedding
from .exceptions import ArtifactError
from .lstm import HEAD_INPUTS, LstmLayerParams, ModelParams

EMBEDDING_MAGIC = b"PGNE"
MODEL_MAGIC = b"PGNM"
DATASET_MAGIC = b"PGND"
FORMAT_VERSION = 1


class _Reader:
    def __init__(self, data: bytes, where: str):
        self._buf = io.BytesIO(data)
        self._where = where

    def read(self, n: int) -> bytes:
        chunk = self._buf.read(n)
        if len(chunk) != n:
            raise ArtifactError(f"{self._where}: truncated file")
        return chunk

    def u8(self) -> int:
        return struct.unpack("<B", self.read(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.read(4))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self.read(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.read(8))[0]

    def string(self) -> str:
        return self.read(self.u32()).decode("utf-8")

    def f32_array(self, *shape: int) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 0
        raw = self.read(4 * count)
        return np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)

    def expect_eof(self):
        if self._buf.read(1):
            raise ArtifactError(f"{self._where}: trailing bytes after payload")


def _check_header(reader: _Reader, magic: bytes, where: str) -> None:
    found = reader.read(4)
    if found != magic:
        raise ArtifactError(
            f"{where}: bad magic {found!r}, expected {magic!r} "
            "(wrong artifact type?)"
        )
    version = reader.u32()
    if version != FORMAT_VERSION:
        raise ArtifactError(
            f"{where}: unsupported format version {version}, "
            f"this build reads version {FORMAT_VERSION}"
        )


def _pack_string(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _pack_f32(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


# --- embedding -------------------------------------------------------------

def save_embedding(est: SkipGramEmbedding, path: str | Path) -> None:
    est._check_fitted()
    vocab_tokens = sorted(est.vocab_, key=est.vocab_.get)
    out = io.BytesIO()
    out.write(EMBEDDING_MAGIC)
    out.write(struct.pack("<I", FORMAT_VERSION))
    out.write(struct.pack("<IIIq", est.dim, est.window, est.min_count, est.seed))
    out.write(struct.pack("<I", len(vocab_tokens)))
    for token in vocab_tokens:
        out.write(_pack_string(token))
    out.write(_pack_f32(est.in_vectors_))
    out.write(_pack_f32(est.out_vectors_))
    atomic_write_bytes(path, out.getvalue())


def load_embedding(path: str | Path) -> SkipGramEmbedding:
    path = Path(path)
    reader = _Reader(path.read_bytes(), str(path))
    _check_header(reader, EMBEDDING_MAGIC, str(path))
    dim, window, min_count = (reader.u32(), reader.u32(), reader.u32())
    seed = reader.i64()
    vocab_size = reader.u32()
    tokens = [reader.string() for _ in range(vocab_size)]
    est = SkipGramEmbedding(dim=dim, window=window, min_count=min_count, seed=seed)
    est.vocab_ = {token: idx for idx, token in enumerate(tokens)}
    if len(est.vocab_) != vocab_size:
        raise ArtifactError(f"{path}: duplicate vocabulary tokens")
    est.in_vectors_ = reader.f32_array(vocab_size, dim)
    est.out_vectors_ = reader.f32_array(vocab_size, dim)
    reader.expect_eof()
    return est


# --- sequence model ----------------------------------------------------------

def save_model(params: ModelParams, path: str | Path, seed: int = 0) -> None:
    params.validate()
    out = io.BytesIO()
    out.write(MODEL_MAGIC)
    out.write(struct.pack("<I", FORMAT_VERSION))
    out.write(struct.pack("<II", params.input_size, params.hidden_size))
    out.write(struct.pack("<B", HEAD_INPUTS.index(params.head_input)))
    out.write(struct.pack("<d", params.y0))
    out.write(struct.pack("<q", seed))
    for tensor in (params.layer1.w, params.layer1.u, params.layer1.b,
                   params.layer2.w, params.layer2.u, params.layer2.b,
                   params.head_w, np.array([params.head_b])):
        out.write(_pack_f32(tensor))
    atomic_write_bytes(path, out.getvalue())


def load_model(path: str | Path) -> tuple[ModelParams, int]:
    """Returns (params, training seed recorded at save time)."""
    path = Path(path)
    reader = _Reader(path.read_bytes(), str(path))
    _check_header(reader, MODEL_MAGIC, str(path))
    input_size = reader.u32()
    hidden = reader.u32()
    head_idx = reader.u8()
    if head_idx >= len(HEAD_INPUTS):
        raise ArtifactError(f"{path}: unknown head-input code {head_idx}")
    head_input = HEAD_INPUTS[head_idx]
    y0 = reader.f64()
    seed = reader.i64()
    head_len = 2 * hidden + 1 if head_input == "both" else hidden + 1
    layer1 = LstmLayerParams(w=reader.f32_array(4 * hidden, input_size),
                             u=reader.f32_array(4 * hidden, hidden),
                             b=reader.f32_array(4 * hidden))
    layer2 = LstmLayerParams(w=reader.f32_array(4 * hidden, hidden),
                             u=reader.f32_array(4 * hidden, hidden),
                             b=reader.f32_array(4 * hidden))
    head_w = reader.f32_array(head_len)
    head_b = float(reader.f32_array(1)[0])
    reader.expect_eof()
    params = ModelParams(layer1=layer1, layer2=layer2, head_w=head_w,
                         head_b=head_b, y0=y0, head_input=head_input)
    try:
        params.validate()
    except ValueError as exc:
        raise ArtifactError(f"{path}: {exc}") from exc
    return params, seed


# --- vectorized labeled dataset ----------------------------------------------

@dataclass(frozen=True)
class DatasetSequence:
    patient_id: str
    dates: tuple[dt.date, ...]
    labels: np.ndarray     # (T,) in {1, 0, -1}
    coverage: np.ndarray   # (T,) in-vocabulary token fraction per visit
    xs: np.ndarray         # (T, D)


def save_dataset(sequences: Sequence[DatasetSequence], dim: int,
                 path: str | Path, seed: int = 0) -> None:
    out = io.BytesIO()
    out.write(DATASET_MAGIC)
    out.write(struct.pack("<I", FORMAT_VERSION))
    out.write(struct.pack("<IIq", dim, len(sequences), seed))
    for seq in sequences:
        if seq.xs.shape != (len(seq.dates), dim):
            raise ArtifactError(
                f"sequence {seq.patient_id}: xs shape {seq.xs.shape} does not "
                f"match {len(seq.dates)} visits and dim {dim}"
            )
        out.write(_pack_string(seq.patient_id))
        out.write(struct.pack("<I", len(seq.dates)))
        for k, date in enumerate(seq.dates):
            out.write(struct.pack("<ib", date.toordinal(), int(seq.labels[k])))
        out.write(_pack_f32(seq.coverage))
        out.write(_pack_f32(seq.xs))
    atomic_write_bytes(path, out.getvalue())


def load_dataset(path: str | Path) -> tuple[list[DatasetSequence], int, int]:
    """Returns (sequences, dim, split seed recorded at save time)."""
    path = Path(path)
    reader = _Reader(path.read_bytes(), str(path))
    _check_header(reader, DATASET_MAGIC, str(path))
    dim = reader.u32()
    n_seq = reader.u32()
    seed = reader.i64()
    sequences: list[DatasetSequence] = []
    for _ in range(n_seq):
        pid = reader.string()
        n_steps = reader.u32()
        dates = []
        labels = np.empty(n_steps, dtype=np.int64)
        for k in range(n_steps):
            ordinal, label = struct.unpack("<ib", reader.read(5))
            dates.append(dt.date.fromordinal(ordinal))
            labels[k] = label
        coverage = reader.f32_array(n_steps)
        xs = reader.f32_array(n_steps, dim)
        sequences.append(DatasetSequence(
            patient_id=pid, dates=tuple(dates), labels=labels,
            coverage=coverage, xs=xs))
    reader.expect_eof()
    return sequences, dim, seed
