"""
.gfn model files.

    magic     b"PPFDNN\\x00v1"
    uint64    header length in bytes, little-endian
    header    UTF-8 JSON (ModelHeader)
    block     float64 little-endian parameters, laid out as the header says
"""

import json
import struct
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from ..exceptions import DataLoadError, ModelFormatError, ReportWriteError, ShapeMismatchError
from ..models.outputs import ModelHeader, NormalizerStats, ParameterSlot
from ..sampling.normalizer import Normalizer
from .network import DnnModel

MAGIC = b"PPFDNN\x00v1"
_LEN = struct.Struct("<Q")
_F8 = np.dtype("<f8")


def _stats(norm: Normalizer) -> NormalizerStats:
    return NormalizerStats(mean=norm.mean.tolist(), std=norm.std.tolist())


def model_header(model: DnnModel) -> ModelHeader:
    slots = []
    offset = 0
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        for name, arr in ((f"w{i}", w), (f"b{i}", b)):
            slots.append(ParameterSlot(name=name, shape=list(arr.shape), offset=offset))
            offset += arr.size
    return ModelHeader(
        layer_sizes=list(model.layer_sizes),
        output_activation=model.output_activation,
        mode=model.mode,
        init=model.init,
        seed=model.seed,
        case_name=model.case_name,
        x_norm=_stats(model.x_norm),
        y_norm=_stats(model.y_norm),
        parameters=slots,
    )


def dumps_model(model: DnnModel) -> bytes:
    header = json.dumps(model_header(model).model_dump(mode="json"), sort_keys=True).encode("utf-8")
    block = b"".join(
        np.ascontiguousarray(arr, dtype=_F8).tobytes()
        for w, b in zip(model.weights, model.biases)
        for arr in (w, b)
    )
    return MAGIC + _LEN.pack(len(header)) + header + block


def save_model(model: DnnModel, path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(dumps_model(model))
    except OSError as e:
        raise ReportWriteError(str(path), str(e)) from e
    return path


def loads_model(data: bytes, source: str = "<bytes>") -> DnnModel:
    if not data.startswith(MAGIC):
        raise ModelFormatError(source, "missing PPFDNN magic")
    pos = len(MAGIC)
    if len(data) < pos + _LEN.size:
        raise ModelFormatError(source, "truncated before header length")
    (hlen,) = _LEN.unpack_from(data, pos)
    pos += _LEN.size
    if len(data) < pos + hlen:
        raise ModelFormatError(source, "truncated header")

    try:
        header = ModelHeader.model_validate(json.loads(data[pos:pos + hlen].decode("utf-8")))
    except (UnicodeDecodeError, json.JSONDecodeError, ValidationError) as e:
        raise ModelFormatError(source, f"bad header: {e}") from e
    if header.format_version != 1:
        raise ModelFormatError(source, f"unsupported format version {header.format_version}")

    if (len(data) - pos - hlen) % _F8.itemsize:
        raise ModelFormatError(source, "parameter block is not a whole number of float64 values")
    block = np.frombuffer(data, dtype=_F8, offset=pos + hlen)
    params = {}
    for slot in header.parameters:
        size = int(np.prod(slot.shape))
        if slot.offset + size > block.size:
            raise ModelFormatError(source, f"parameter block too short for {slot.name}")
        params[slot.name] = block[slot.offset:slot.offset + size].reshape(slot.shape).astype(float)

    n = len(header.layer_sizes) - 1
    try:
        weights = [params[f"w{i}"] for i in range(n)]
        biases = [params[f"b{i}"] for i in range(n)]
    except KeyError as e:
        raise ModelFormatError(source, f"missing parameter {e.args[0]}") from e

    try:
        return DnnModel(
            layer_sizes=tuple(header.layer_sizes),
            weights=weights,
            biases=biases,
            x_norm=Normalizer.from_dict(header.x_norm.model_dump()),
            y_norm=Normalizer.from_dict(header.y_norm.model_dump()),
            output_activation=header.output_activation,
            mode=header.mode,
            init=header.init,
            seed=header.seed,
            case_name=header.case_name,
        )
    except (ValueError, ShapeMismatchError) as e:
        raise ModelFormatError(source, str(e)) from e


def load_model(path: Path) -> DnnModel:
    path = Path(path)
    if not path.exists():
        raise DataLoadError(str(path), "file not found")
    with open(path, "rb") as f:
        data = f.read()
    return loads_model(data, source=str(path))
