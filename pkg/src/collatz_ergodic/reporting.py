"""JSON/CSV output with atomic writes and exact rational rendering."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__


def ratio_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def atomic_write(path: Path | str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, dumps(obj))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return atomic_write(path, buf.getvalue())


def envelope(kind: str, config: dict, payload: dict) -> dict:
    return {"schema": f"collatz-ergodic/{kind}", "version": __version__, "config": config, **payload}


def load_schema(kind: str) -> dict:
    text = resources.files("collatz_ergodic").joinpath("schemas", f"{kind}.json").read_text("utf-8")
    return json.loads(text)
