"""Text formats for tensors, observation masks, factors and traces.

``.tns3``
    Header ``tns3 n1 n2 n3`` followed by ``n1*n2*n3`` whitespace-separated
    reals in vec order (first index fastest).
triplet CSV
    Header ``i,j,t,value`` and one row per entry, indices 1-based. Missing
    entries are zeros when read as a tensor and unobserved when read as a mask.
PGM stack
    Equally sized 8-bit grayscale PGM images (P2 or P5) stacked along mode 3
    and rescaled to ``[0, 1]``.
"""

from __future__ import annotations

import csv
import math
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .recovery import MaskOperator
from .tensor import CPFactors, TripleFactors, TuckerFactors, as_tensor3, unvec, vec

__all__ = [
    "FormatError",
    "load_tns3",
    "save_tns3",
    "load_triplets",
    "load_triplet_tensor",
    "load_triplet_mask",
    "save_triplet_tensor",
    "save_triplet_mask",
    "load_pgm_stack",
    "save_pgm",
    "load_tensor",
    "save_tensor",
    "save_factors",
    "load_factors",
    "write_trace_csv",
    "write_curve_csv",
]

TRIPLET_HEADER = ["i", "j", "t", "value"]


class FormatError(ValueError):
    """Malformed or inconsistent input file."""

    def __init__(self, message, path=None, lineno=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if lineno is not None:
                where += f":{lineno}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.lineno = lineno


def _fmt(x):
    # repr gives the shortest string that round-trips exactly
    return repr(float(x))


def load_tns3(path):
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 4 or parts[0] != "tns3":
            raise FormatError("expected header 'tns3 <n1> <n2> <n3>'", path, 1)
        try:
            dims = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise FormatError(f"bad dimensions in header {header.strip()!r}", path, 1) from None
        if min(dims) < 1:
            raise FormatError(f"dimensions must be positive, got {dims}", path, 1)
        values = []
        for lineno, line in enumerate(fh, start=2):
            for token in line.split():
                try:
                    x = float(token)
                except ValueError:
                    raise FormatError(f"not a number: {token!r}", path, lineno) from None
                if not math.isfinite(x):
                    raise FormatError(f"non-finite value {token!r}", path, lineno)
                values.append(x)
    expected = dims[0] * dims[1] * dims[2]
    if len(values) != expected:
        raise FormatError(f"header promises {expected} values, found {len(values)}", path)
    return unvec(np.array(values), dims)


def save_tns3(path, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[:, :, None]
    X = as_tensor3(X)
    lines = ["tns3 {} {} {}".format(*X.shape)]
    lines.extend(_fmt(x) for x in vec(X))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_triplets(path):
    """Rows of a triplet CSV as 0-based ``(N, 3)`` indices and values."""
    path = Path(path)
    idx, vals = [], []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRIPLET_HEADER:
            raise FormatError("expected header 'i,j,t,value'", path, 1)
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise FormatError(f"expected 4 fields, got {len(row)}", path, lineno)
            try:
                ijt = [int(c) for c in row[:3]]
                value = float(row[3])
            except ValueError:
                raise FormatError(f"cannot parse row {row!r}", path, lineno) from None
            if min(ijt) < 1:
                raise FormatError(f"indices are 1-based, got {tuple(ijt)}", path, lineno)
            if not math.isfinite(value):
                raise FormatError(f"non-finite value {row[3]!r}", path, lineno)
            idx.append([k - 1 for k in ijt])
            vals.append(value)
    return np.array(idx, dtype=np.int64).reshape(-1, 3), np.array(vals, dtype=float)


def _linear(idx, dims, path):
    dims = tuple(int(n) for n in dims)
    if idx.size and np.any(idx >= np.array(dims)):
        bad = idx[np.any(idx >= np.array(dims), axis=1)][0] + 1
        raise FormatError(f"index {tuple(int(k) for k in bad)} out of range for dims {dims}", path)
    lin = np.ravel_multi_index(idx.T, dims, order="F") if idx.size else np.zeros(0, np.int64)
    if np.unique(lin).size != lin.size:
        raise FormatError("duplicate (i, j, t) entry", path)
    return lin


def load_triplet_tensor(path, dims=None):
    """Dense tensor from a triplet CSV; ``dims`` defaults to the largest indices."""
    idx, vals = load_triplets(path)
    if dims is None:
        if not idx.size:
            raise FormatError("cannot infer dimensions of an empty triplet file", path)
        dims = tuple(int(k) + 1 for k in idx.max(axis=0))
    lin = _linear(idx, dims, path)
    v = np.zeros(int(np.prod(dims)))
    v[lin] = vals
    return unvec(v, dims)


def load_triplet_mask(path, dims):
    """Entry mask whose observed set is exactly the rows present."""
    idx, vals = load_triplets(path)
    if not idx.size:
        raise FormatError("no observed entries", path)
    lin = _linear(idx, dims, path)
    return MaskOperator.from_entries(dims, lin, vals)


def _write_triplets(path, lin, vals, dims):
    i, j, t = np.unravel_index(lin, dims, order="F")
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIPLET_HEADER)
        for a, b, c, v in zip(i, j, t, vals):
            writer.writerow([int(a) + 1, int(b) + 1, int(c) + 1, _fmt(v)])


def save_triplet_tensor(path, X, skip_zeros=False):
    X = as_tensor3(X)
    v = vec(X)
    lin = np.flatnonzero(v) if skip_zeros else np.arange(v.size)
    _write_triplets(path, lin, v[lin], X.shape)


def save_triplet_mask(path, mask):
    if mask.observed is None:
        raise ValueError("only entry masks can be written as triplets")
    _write_triplets(path, mask.observed, mask.data, mask.dims)


def _natural_key(path):
    # "2.pgm" sorts before "10.pgm"
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", path.name)]


def load_pgm_stack(paths):
    """Stack grayscale PGM images into an ``height x width x count`` tensor.

    ``paths`` is a directory (all ``*.pgm`` files, sorted by name with digit
    runs compared as numbers) or a list of files in stacking order.
    """
    if isinstance(paths, (str, Path)) and Path(paths).is_dir():
        files = sorted(Path(paths).glob("*.pgm"), key=_natural_key)
    elif isinstance(paths, (str, Path)):
        files = [Path(paths)]
    else:
        files = [Path(p) for p in paths]
    if not files:
        raise FormatError("no PGM images found", paths)
    slices = []
    for f in files:
        with Image.open(f) as im:
            if im.format != "PPM" or im.mode != "L":
                raise FormatError(f"not an 8-bit grayscale PGM (mode {im.mode})", f)
            slices.append(np.asarray(im, dtype=float) / 255.0)
        if slices[-1].shape != slices[0].shape:
            raise FormatError(
                f"image is {slices[-1].shape}, expected {slices[0].shape} like {files[0].name}", f
            )
    return np.stack(slices, axis=2)


def save_pgm(path, image):
    """Write a 2-D array in ``[0, 1]`` as an 8-bit binary PGM."""
    image = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    Image.fromarray(np.rint(image * 255).astype(np.uint8), mode="L").save(path, format="PPM")


def load_tensor(path, dims=None):
    """Load a tensor by file type: ``.tns3``, ``.csv`` or PGM (file or directory)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file or directory: {path}")
    if path.is_dir() or path.suffix.lower() == ".pgm":
        X = load_pgm_stack(path)
    elif path.suffix.lower() == ".csv":
        X = load_triplet_tensor(path, dims)
    else:
        X = load_tns3(path)
    if dims is not None and X.shape != tuple(dims):
        raise FormatError(f"tensor has shape {X.shape}, expected {tuple(dims)}", path)
    return X


def save_tensor(path, X):
    if Path(path).suffix.lower() == ".csv":
        save_triplet_tensor(path, X)
    else:
        save_tns3(path, X)


def _factor_arrays(factors):
    if isinstance(factors, TripleFactors):
        return "triple", {"A": factors.A, "B": factors.B, "C": factors.C}
    if isinstance(factors, CPFactors):
        return "cp", {"A": factors.A, "B": factors.B, "C": factors.C}
    if isinstance(factors, TuckerFactors):
        return "tucker", {"core": factors.core, "U": factors.U, "V": factors.V, "W": factors.W}
    raise TypeError(f"cannot save factors of type {type(factors).__name__}")


def save_factors(directory, factors, meta=None):
    """One ``.tns3`` file per factor plus ``meta.txt``; matrices become ``n x r x 1``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    method, arrays = _factor_arrays(factors)
    for name, arr in arrays.items():
        save_tns3(directory / f"{name}.tns3", arr)
    info = {"method": method}
    info.update(meta or {})
    lines = [f"{k} = {v}" for k, v in info.items()]
    (directory / "meta.txt").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_factors(directory):
    directory = Path(directory)
    meta = {}
    for line in (directory / "meta.txt").read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            meta[key.strip()] = value.strip()
    method = meta.get("method")

    def mat(name):
        return load_tns3(directory / f"{name}.tns3")[:, :, 0]

    if method == "triple":
        return TripleFactors(*(load_tns3(directory / f"{n}.tns3") for n in "ABC"))
    if method == "cp":
        return CPFactors(mat("A"), mat("B"), mat("C"))
    if method == "tucker":
        return TuckerFactors(load_tns3(directory / "core.tns3"), mat("U"), mat("V"), mat("W"))
    raise FormatError(f"unknown method {method!r} in meta.txt", directory / "meta.txt")


def write_trace_csv(path, trace, timings=False):
    """Per-iteration trace; row 0 is the starting point.

    ``seconds`` is left empty unless ``timings`` is set, which keeps the file
    byte-for-byte reproducible.
    """
    names = list(trace.block_names)
    header = ["iteration", "objective"] + [f"change_{n}" for n in names]
    header += ["step_sq", "decrease_slack"]
    recovery = bool(trace.feasibility)
    if recovery:
        header.append("feasibility")
    header.append("seconds")
    slack = trace.decrease_slack() if trace.step_sq else []
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        row = [0, _fmt(trace.objective[0])] + [""] * (len(names) + 2)
        writer.writerow(row + ([""] if recovery else []) + [""])
        for k in range(trace.iterations):
            row = [k + 1, _fmt(trace.objective[k + 1])]
            row += [_fmt(c) for c in trace.changes[k]]
            row += [_fmt(trace.step_sq[k]), _fmt(slack[k])]
            if recovery:
                row.append(_fmt(trace.feasibility[k]))
            row.append(_fmt(trace.seconds[k]) if timings else "")
            writer.writerow(row)


def write_curve_csv(path, points, timings=False):
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["r", "relative_error", "iterations", "seconds"])
        for p in points:
            writer.writerow(
                [p.rank, _fmt(p.relative_error), p.iterations, _fmt(p.seconds) if timings else ""]
            )
