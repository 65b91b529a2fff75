"""Image and dictionary file I/O.

Images are binary PGM (P5), 8- or 16-bit, mapped linearly to [0, 1] floats
internally. Dictionary files hold one coupled triple per scale in a small
binary format (magic "CDL1", little-endian headers, float64 row-major
payloads). All writes go through a temp file + rename so a crash never
leaves a partial artifact.
"""

import os
import struct
import tempfile

import numpy as np

from .dictlearn import CoupledDictionaryTriple

__all__ = ["read_pgm", "write_pgm", "read_dictionaries", "write_dictionaries"]

DICT_MAGIC = b"CDL1"


def _atomic_write(path, payload):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".xsep-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_token(data, pos):
    # skip whitespace and '#' comments between header tokens
    while pos < len(data):
        c = data[pos : pos + 1]
        if c == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("truncated PGM header")
    return data[start:pos], pos


def read_pgm(path):
    """Read a binary PGM; returns (float image in [0, 1], maxval)."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, pos = _read_token(data, 0)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {magic!r})")
    w_tok, pos = _read_token(data, pos)
    h_tok, pos = _read_token(data, pos)
    m_tok, pos = _read_token(data, pos)
    width, height, maxval = int(w_tok), int(h_tok), int(m_tok)
    if not (0 < maxval < 65536):
        raise ValueError(f"{path}: invalid maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    if len(data) - pos < count * dtype.itemsize:
        raise ValueError(f"{path}: truncated pixel payload")
    raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    img = raw.astype(np.float64).reshape(height, width) / maxval
    return img, maxval


def write_pgm(path, img, maxval=65535):
    """Write a [0, 1] float image as binary PGM (values clipped and rounded)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    if not (0 < maxval < 65536):
        raise ValueError(f"invalid maxval {maxval}")
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode("ascii")
    _atomic_write(path, header + q.astype(dtype).tobytes())


def _pack_matrix(M):
    M = np.ascontiguousarray(M, dtype=np.float64)
    return struct.pack("<II", M.shape[0], M.shape[1]) + M.astype("<f8").tobytes()


def write_dictionaries(path, triples):
    """Serialize per-scale coupled triples to a dictionary file."""
    payload = [DICT_MAGIC, struct.pack("<I", len(triples))]
    for tr in triples:
        for M in (tr.psi_c, tr.phi_c, tr.phi):
            payload.append(_pack_matrix(M))
    _atomic_write(path, b"".join(payload))


def read_dictionaries(path):
    """Load per-scale coupled triples; validates sizes and unit norms."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != DICT_MAGIC:
        raise ValueError(f"{path}: bad dictionary file magic")
    (count,) = struct.unpack_from("<I", data, 4)
    pos = 8
    triples = []
    for _ in range(count):
        mats = []
        for _ in range(3):
            rows, cols = struct.unpack_from("<II", data, pos)
            pos += 8
            nbytes = rows * cols * 8
            if pos + nbytes > len(data):
                raise ValueError(f"{path}: truncated dictionary payload")
            M = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=pos)
            pos += nbytes
            mats.append(M.reshape(rows, cols).copy())
        for M in mats:
            norms = np.linalg.norm(M, axis=0)
            if np.any(np.abs(norms - 1.0) > 1e-8):
                raise ValueError(f"{path}: dictionary columns not unit-norm")
        triples.append(CoupledDictionaryTriple(*mats))
    if pos != len(data):
        raise ValueError(f"{path}: trailing bytes after dictionary payload")
    return triples
