"""Small file helpers: delimited tables, JSON Lines, hashing."""

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd


def fmt(value):
    """Serialize a scalar with 6 significant digits; missing values become ``NA``."""
    if value is None:
        return "NA"
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "NA"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        out = f"{float(value):.6g}"
        return "0" if out == "-0" else out
    return str(value)


def write_table(path, frame, sep="\t"):
    """Write a DataFrame as delimited text with a header, numbers at 6 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = list(frame.columns)
    lines = [sep.join(str(c) for c in cols)]
    for row in frame.itertuples(index=False, name=None):
        lines.append(sep.join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_table(path, sep=None):
    path = Path(path)
    if sep is None:
        sep = "," if path.suffix.lower() == ".csv" else "\t"
    return pd.read_csv(path, sep=sep, na_values=["NA"], keep_default_na=False)


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_jsonl(path, records):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def file_sha256(path, chunk=1 << 20):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while True:
            block = fh.read(chunk)
            if not block:
                break
            h.update(block)
    return h.hexdigest()
