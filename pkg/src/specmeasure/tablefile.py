"""On-disk format for coefficient tables.

Layout (all integers little-endian)::

    8 bytes   magic  b"SPMTBL\\x00\\x00"
    uint32    format version
    uint32    header length in bytes
    header    UTF-8 JSON, sorted keys
    body      lambdas as <f8[levels], then weights as <f8[levels]

Floats in the header are stored with ``float.hex`` so a round trip is
bitwise. The header carries a SHA-256 of the body; any mismatch, short read
or bad magic raises :class:`TableFormatError`.
"""

import hashlib
import json
import struct

import numpy as np

from .counting import CoefficientTable
from .errors import TableFormatError, TableVersionMismatch
from .spectra import SpectralCatalog

MAGIC = b"SPMTBL\x00\x00"
VERSION = 1
_PREFIX = struct.Struct("<8sII")


def encode_table(table, key=""):
    lam = np.ascontiguousarray(table.lambdas, dtype="<f8").tobytes()
    wts = np.ascontiguousarray(table.weights, dtype="<f8").tobytes()
    body = lam + wts
    header = {
        "catalog": table.catalog.kind,
        "dimension": table.catalog.dimension,
        "measure": table.measure,
        "k": table.k,
        "norm_sq": float(table.norm_sq).hex(),
        "lambda_max": float(table.lambda_max).hex(),
        "levels": int(len(table.lambdas)),
        "key": key,
        "body_sha256": hashlib.sha256(body).hexdigest(),
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    return _PREFIX.pack(MAGIC, VERSION, len(raw)) + raw + body


def decode_table(data):
    """Returns ``(table, header)``."""
    if len(data) < _PREFIX.size:
        raise TableFormatError("truncated table file")
    magic, version, hlen = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise TableFormatError("not a coefficient table file")
    if version != VERSION:
        raise TableVersionMismatch(f"table format version {version}, expected {VERSION}")
    start = _PREFIX.size
    if len(data) < start + hlen:
        raise TableFormatError("truncated table header")
    try:
        header = json.loads(data[start:start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TableFormatError(f"unreadable table header: {exc}") from exc
    levels = header["levels"]
    body = data[start + hlen:]
    if len(body) != 16 * levels:
        raise TableFormatError(f"body has {len(body)} bytes, expected {16 * levels}")
    if hashlib.sha256(body).hexdigest() != header["body_sha256"]:
        raise TableFormatError("table body checksum mismatch")
    lam = np.frombuffer(body[:8 * levels], dtype="<f8").astype(np.float64)
    wts = np.frombuffer(body[8 * levels:], dtype="<f8").astype(np.float64)
    table = CoefficientTable(
        SpectralCatalog(header["catalog"], header["dimension"]), header["measure"],
        header["k"], float.fromhex(header["norm_sq"]), float.fromhex(header["lambda_max"]),
        lam, wts)
    return table, header


def write_table(path, table, key=""):
    with open(path, "wb") as fh:
        fh.write(encode_table(table, key))


def read_table(path):
    with open(path, "rb") as fh:
        return decode_table(fh.read())
