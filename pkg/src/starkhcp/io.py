"""CSV and PPM output.

CSV layout::

    # starkhcp <version> <kind>
    # config: {...}          RunConfig as JSON
    # params: {...}          subcommand parameters as JSON
    # created: <timestamp>   omitted in deterministic mode
    col_a,col_b,...
    1.5,2.5,...

Files are written to a temporary sibling and renamed into place, so a
failure never leaves a partial output behind.
"""

from __future__ import annotations

import contextlib
import datetime as _dt
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

FORMAT = ".12g"


def _version() -> str:
    from . import __version__

    return __version__


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


@contextlib.contextmanager
def atomic_write(path, mode: str = "w"):
    """Open a temporary file next to ``path``; rename it over ``path`` on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".part")
    try:
        with os.fdopen(fd, mode, **({} if "b" in mode else {"newline": "\n"})) as fh:
            yield fh
        os.chmod(tmp, 0o666 & ~_umask())  # mkstemp creates 0600
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def header_lines(kind: str, config=None, params: dict | None = None, deterministic: bool = False) -> list[str]:
    lines = [f"# starkhcp {_version()} {kind}"]
    if config is not None:
        lines.append(f"# config: {config.to_json()}")
        lines.append(f"# config_sha256: {config.digest()}")
    if params:
        lines.append(f"# params: {json.dumps(params, sort_keys=True, separators=(',', ':'))}")
    if not deterministic:
        lines.append(f"# created: {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}")
    return lines


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), FORMAT)


def write_csv(path, kind: str, columns, rows, config=None, params=None, deterministic=False):
    """Write a table; ``rows`` is an iterable of sequences or a 2-D array."""
    with atomic_write(path) as fh:
        for line in header_lines(kind, config, params, deterministic):
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


@dataclass
class Table:
    kind: str
    columns: list[str]
    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise ConfigError(f"column {name!r} not in {self.kind} file") from None

    def config(self):
        from .config import RunConfig

        if "config" not in self.meta:
            raise ConfigError("file header carries no configuration")
        return RunConfig.from_json(self.meta["config"])

    def params(self) -> dict:
        return json.loads(self.meta.get("params", "{}"))


def read_csv(path) -> Table:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    meta, body = {}, []
    kind = "unknown"
    for line in text.splitlines():
        if line.startswith("#"):
            content = line[1:].strip()
            if content.startswith("starkhcp "):
                kind = content.split()[-1]
            elif ":" in content:
                key, _, value = content.partition(":")
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise ConfigError(f"{path} has no column header")
    columns = body[0].split(",")
    try:
        data = np.array([[float(v) for v in row.split(",")] for row in body[1:]], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric data ({exc})") from None
    if data.size == 0:
        data = np.zeros((0, len(columns)))
    if data.shape[1] != len(columns):
        raise ConfigError(f"{path}: rows do not match the {len(columns)} header columns")
    return Table(kind, columns, data, meta)


def data_section(path) -> bytes:
    """Bytes of a CSV file without its ``#`` header lines."""
    return b"".join(l for l in Path(path).read_bytes().splitlines(keepends=True) if not l.startswith(b"#"))


def write_ppm(path, signal):
    """Binary P6 image: one row per delay (top = first), linear gray scaled to the maximum."""
    s = np.asarray(signal, dtype=float)
    if s.ndim != 2 or s.size == 0:
        raise ConfigError("PPM output needs a non-empty 2-D array")
    top = s.max()
    gray = np.zeros(s.shape, dtype=np.uint8) if top <= 0 else np.rint(255 * np.clip(s, 0, None) / top).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    with atomic_write(path, "wb") as fh:
        fh.write(f"P6\n{s.shape[1]} {s.shape[0]}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    # only the exact layout written above: three newline-terminated header lines
    magic, size, _maxval, pixels = raw.split(b"\n", 3)
    if magic != b"P6":
        raise ConfigError(f"{path} is not a binary PPM")
    w, h = map(int, size.split())
    pix = np.frombuffer(pixels, dtype=np.uint8, count=w * h * 3)
    return pix.reshape(h, w, 3)[:, :, 0]
