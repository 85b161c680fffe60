"""Signal and field storage.

CSV: a ``#`` header line ``n=<n> J=<J> K=<K>`` then one value per line
(row-major for n = 2). Binary: magic ``APSG``, three little-endian int32
(n, J, K), then little-endian float64 samples. Fields use magic ``APSF`` and
add the t-grid (t_min, ratio as float64, L as int32) before the samples.
"""
from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np

from .signal import Domain, Signal

SIGNAL_MAGIC = b"APSG"
FIELD_MAGIC = b"APSF"
_HEAD = struct.Struct("<4s3i")
_TGRID = struct.Struct("<ddi")


class FormatError(ValueError):
    pass


def save_csv(f: Signal, path) -> None:
    d = f.domain
    lines = [f"# n={d.n} J={d.J} K={d.K}"]
    lines += [repr(float(v)) for v in f.values.ravel()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_csv(path) -> Signal:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise FormatError(f"{path}: missing '# n= J= K=' header")
    meta = dict(re.findall(r"(\w+)=(-?\d+)", text[0]))
    try:
        dom = Domain(int(meta["n"]), int(meta["J"]), int(meta["K"]))
    except KeyError as exc:
        raise FormatError(f"{path}: header lacks {exc}") from None
    vals = np.array([float(x) for x in text[1:] if x.strip()])
    if vals.size != dom.cells**dom.n:
        raise FormatError(f"{path}: expected {dom.cells ** dom.n} values, found {vals.size}")
    return Signal(dom, vals.reshape(dom.shape))


def save_binary(f: Signal, path) -> None:
    d = f.domain
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(SIGNAL_MAGIC, d.n, d.J, d.K))
        fh.write(f.values.astype("<f8").tobytes())


def load_binary(path) -> Signal:
    raw = Path(path).read_bytes()
    magic, n, J, K = _HEAD.unpack_from(raw)
    if magic != SIGNAL_MAGIC:
        raise FormatError(f"{path}: not a signal file")
    dom = Domain(n, J, K)
    vals = np.frombuffer(raw, dtype="<f8", offset=_HEAD.size)
    if vals.size != dom.cells**n:
        raise FormatError(f"{path}: truncated sample block")
    return Signal(dom, vals.reshape(dom.shape))


def save_field(F, path) -> None:
    """Write a :class:`apsquare.cone.Field` (levels first, then space)."""
    d, tg = F.domain, F.tgrid
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(FIELD_MAGIC, d.n, d.J, d.K))
        fh.write(_TGRID.pack(tg.t_min, tg.ratio, tg.L))
        fh.write(np.ascontiguousarray(F.values, dtype="<f8").tobytes())


def load_field(path):
    from .cone import Field, TGrid

    raw = Path(path).read_bytes()
    magic, n, J, K = _HEAD.unpack_from(raw)
    if magic != FIELD_MAGIC:
        raise FormatError(f"{path}: not a field file")
    t_min, ratio, L = _TGRID.unpack_from(raw, _HEAD.size)
    dom = Domain(n, J, K)
    vals = np.frombuffer(raw, dtype="<f8", offset=_HEAD.size + _TGRID.size)
    if vals.size != L * dom.cells**n:
        raise FormatError(f"{path}: truncated field block")
    return Field(dom, TGrid(t_min, ratio, L), vals.reshape((L,) + dom.shape))
