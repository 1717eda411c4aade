"""On-disk coefficient cache.

One file per (label, precision): a small JSON header carrying the label,
precision and a payload checksum, then the coefficients c_1..c_P as
length-prefixed little-endian signed big integers. Writes go through a
temp file and os.replace, so readers never see a torn file; corrupted
files are detected by checksum and silently recomputed (with a warning).

A request at precision P is served by any cached file for the same label
with precision >= P.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import struct
import tempfile
from pathlib import Path

log = logging.getLogger(__name__)

MAGIC = b"QCF1"
ENV_CACHE_DIR = "FORMLAB_CACHE_DIR"

_LABEL_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


def validate_label(label: str) -> str:
    if not _LABEL_RE.match(label):
        raise ValueError(f"label {label!r} is not filesystem-safe")
    return label


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "formlab"


def coeff_path(cache_dir: Path, label: str, precision: int) -> Path:
    return Path(cache_dir) / f"{validate_label(label)}.P{precision}.qcf"


def _encode_payload(coeffs: list[int]) -> bytes:
    parts = []
    for v in coeffs:
        raw = v.to_bytes((v.bit_length() + 8) // 8 or 1, "little", signed=True)
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    return b"".join(parts)


def _decode_payload(data: bytes, count: int) -> list[int]:
    out = []
    pos = 0
    for _ in range(count):
        (length,) = struct.unpack_from("<I", data, pos)
        pos += 4
        out.append(int.from_bytes(data[pos : pos + length], "little", signed=True))
        pos += length
    if pos != len(data):
        raise ValueError("trailing bytes in payload")
    return out


def save_coeffs(cache_dir: Path, label: str, coeffs: list[int]) -> Path:
    """Store c_1..c_P (coeffs[0] is ignored and must be 0). Atomic."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    precision = len(coeffs) - 1
    payload = _encode_payload(coeffs[1:])
    header = json.dumps(
        {
            "label": label,
            "precision": precision,
            "sha256": hashlib.sha256(payload).hexdigest(),
        },
        sort_keys=True,
    ).encode()
    path = coeff_path(cache_dir, label, precision)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, prefix=".tmp-", suffix=".qcf")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def _read_file(path: Path) -> tuple[dict, list[int]] | None:
    try:
        data = path.read_bytes()
        if data[:4] != MAGIC:
            raise ValueError("bad magic")
        (hlen,) = struct.unpack_from("<I", data, 4)
        header = json.loads(data[8 : 8 + hlen])
        payload = data[8 + hlen :]
        if hashlib.sha256(payload).hexdigest() != header["sha256"]:
            raise ValueError("checksum mismatch")
        coeffs = _decode_payload(payload, header["precision"])
        return header, coeffs
    except (OSError, ValueError, KeyError, json.JSONDecodeError, struct.error) as exc:
        log.warning("discarding unreadable cache file %s (%s)", path, exc)
        return None


def load_coeffs(cache_dir: Path, label: str, precision: int) -> list[int] | None:
    """c_0..c_P for the label (c_0 = 0), or None on miss/corruption.

    Any cached precision >= the request is accepted and truncated.
    """
    cache_dir = Path(cache_dir)
    validate_label(label)
    if not cache_dir.is_dir():
        return None
    candidates = []
    for path in cache_dir.glob(f"{label}.P*.qcf"):
        m = re.fullmatch(rf"{re.escape(label)}\.P(\d+)\.qcf", path.name)
        if m and int(m.group(1)) >= precision:
            candidates.append((int(m.group(1)), path))
    for _, path in sorted(candidates):
        got = _read_file(path)
        if got is None:
            continue
        header, coeffs = got
        if header.get("label") != label:
            log.warning("cache file %s carries label %r", path, header.get("label"))
            continue
        return [0] + coeffs[:precision]
    return None
