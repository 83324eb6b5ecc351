"""Plain-text import/export of channel realizations.

File layout (whitespace separated, ``#`` comments and blank lines are
ignored):

    channelset v1
    M N
    M lines of 2N floats   (h_r rows, interleaved "re im" pairs)
    N lines of 2 floats    (h_v entries)
    M lines of 2 floats    (h_d entries)

Floats are written with 17 significant digits, which round-trips IEEE
binary64 exactly.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .channel import ChannelSet

FORMAT_TAG = "channelset"
FORMAT_VERSION = "v1"


class ChannelFileError(ValueError):
    """Malformed channel file; message carries the offending line."""


def save_channels(channels: ChannelSet, path: str) -> None:
    """Write a ChannelSet atomically (temp file + rename)."""
    lines = [f"{FORMAT_TAG} {FORMAT_VERSION}",
             f"{channels.num_bs_antennas} {channels.num_irs_elements}"]

    def fmt_row(row: np.ndarray) -> str:
        parts = []
        for z in row:
            parts.append("%.17g %.17g" % (z.real, z.imag))
        return " ".join(parts)

    for row in channels.h_r:
        lines.append(fmt_row(row))
    for z in channels.h_v:
        lines.append("%.17g %.17g" % (z.real, z.imag))
    for z in channels.h_d:
        lines.append("%.17g %.17g" % (z.real, z.imag))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_channels(path: str) -> ChannelSet:
    """Read a ChannelSet, validating dimensions and finiteness."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.readlines()

    content = []
    for lineno, text in enumerate(raw, start=1):
        stripped = text.strip()
        if not stripped or stripped.startswith("#"):
            continue
        content.append((lineno, stripped))

    if not content:
        raise ChannelFileError("line 1: empty channel file")

    lineno, header = content[0]
    fields = header.split()
    if fields[:1] != [FORMAT_TAG] or len(fields) != 2:
        raise ChannelFileError(f"line {lineno}: expected '{FORMAT_TAG} <version>' "
                               f"header, got {header!r}")
    if fields[1] != FORMAT_VERSION:
        raise ChannelFileError(f"line {lineno}: unsupported format version "
                               f"{fields[1]!r}")

    if len(content) < 2:
        raise ChannelFileError(f"line {lineno}: missing dimension line")
    lineno, dims = content[1]
    parts = dims.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise ChannelFileError(f"line {lineno}: expected 'M N', got {dims!r}")
    m, n = int(parts[0]), int(parts[1])
    if m < 1 or n < 1:
        raise ChannelFileError(f"line {lineno}: dimensions must be positive")

    body = content[2:]
    expected = m + n + m
    if len(body) != expected:
        raise ChannelFileError(
            f"line {content[-1][0]}: expected {expected} data lines for "
            f"M={m}, N={n}, found {len(body)}")

    def parse_row(lineno: int, text: str, pairs: int) -> np.ndarray:
        tokens = text.split()
        if len(tokens) != 2 * pairs:
            raise ChannelFileError(f"line {lineno}: expected {2 * pairs} floats, "
                                   f"found {len(tokens)}")
        try:
            vals = np.array([float(tok) for tok in tokens])
        except ValueError as exc:
            raise ChannelFileError(f"line {lineno}: {exc}") from None
        if not np.all(np.isfinite(vals)):
            raise ChannelFileError(f"line {lineno}: non-finite entry")
        return vals[0::2] + 1j * vals[1::2]

    h_r = np.empty((m, n), dtype=np.complex128)
    for i in range(m):
        lineno, text = body[i]
        h_r[i] = parse_row(lineno, text, n)
    h_v = np.empty(n, dtype=np.complex128)
    for i in range(n):
        lineno, text = body[m + i]
        h_v[i] = parse_row(lineno, text, 1)[0]
    h_d = np.empty(m, dtype=np.complex128)
    for i in range(m):
        lineno, text = body[m + n + i]
        h_d[i] = parse_row(lineno, text, 1)[0]
    return ChannelSet(h_r=h_r, h_v=h_v, h_d=h_d)


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
