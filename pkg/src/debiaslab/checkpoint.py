"""Self-describing model checkpoints.

Layout: 8-byte magic, little-endian uint32 header length, UTF-8 JSON
header (format version, model/adapter configs, vocab, heads, named
parameter entries with group/shape/offset), then the raw parameter blobs
as little-endian float64. Save -> load round-trips are bit-exact.
"""

import json
import struct
from dataclasses import asdict

import numpy as np

from debiaslab.errors import DataError
from debiaslab.model import AdapterConfig, Encoder, ModelConfig
from debiaslab.vocab import Vocab

MAGIC = b"DBLBCKP1"
FORMAT_VERSION = 1
DTYPE = np.dtype("<f8")


def save_checkpoint(model: Encoder, path) -> None:
    entries = []
    offset = 0
    blobs = []
    for name in sorted(model.params):
        arr = np.ascontiguousarray(model.params[name], dtype=DTYPE)
        blob = arr.tobytes()
        entries.append({
            "name": name,
            "group": model.groups[name],
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(blob),
        })
        blobs.append(blob)
        offset += len(blob)
    header = {
        "format": FORMAT_VERSION,
        "dtype": "<f8",
        "model_config": asdict(model.config),
        "adapters": {k: asdict(v) for k, v in model.adapter_configs.items()},
        "heads": list(model.heads),
        "vocab": model.vocab.tokens,
        "params": entries,
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(payload)))
        fh.write(payload)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path) -> Encoder:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise DataError(f"{path}: not a checkpoint file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("format") != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported checkpoint format {header.get('format')}")
        body = fh.read()
    vocab = Vocab(header["vocab"])
    model = Encoder(ModelConfig(**header["model_config"]), vocab, seed=0)
    for kind, cfg in header["adapters"].items():
        model.add_adapter(kind, AdapterConfig(**cfg), seed=0)
    for head in header["heads"]:
        model.ensure_head(head, seed=0)
    expected = set(model.params)
    loaded = set()
    for entry in header["params"]:
        name = entry["name"]
        if name not in expected:
            raise DataError(f"{path}: unexpected parameter {name!r}")
        blob = body[entry["offset"] : entry["offset"] + entry["nbytes"]]
        arr = np.frombuffer(blob, dtype=DTYPE).reshape(entry["shape"]).copy()
        if arr.shape != model.params[name].shape:
            raise DataError(f"{path}: shape mismatch for {name!r}")
        if entry["group"] != model.groups[name]:
            raise DataError(f"{path}: group mismatch for {name!r}")
        model.params[name] = arr
        loaded.add(name)
    missing = expected - loaded
    if missing:
        raise DataError(f"{path}: missing parameters {sorted(missing)[:4]}...")
    return model
