"""CSV and JSON exchange formats.

CSV files carry a single header row and '%.17g' numbers so that a write/read
cycle is lossless and repeated runs are byte-identical. Scalar metadata goes
to JSON sidecars with sorted keys.
"""

import csv
import hashlib
import json
import math
import os

import numpy as np

from . import __version__
from .acoustic import AcousticResponse
from .dynamics import ResponseFunction
from .errors import SchemaError
from .inversion import ReconstructionResult
from .numerics import Grid1D, SampledFunction
from .scattering import BoundState, ScatteringData
from .spectral import RegularizedSpectralMeasure
from .weyl import WeylSamples

__all__ = [
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
    "write_response",
    "read_response",
    "write_measure",
    "read_measure",
    "write_scattering",
    "read_scattering",
    "write_weyl",
    "read_weyl",
    "write_acoustic",
    "read_acoustic",
    "write_reconstruction",
    "write_manifest",
    "sidecar_path",
]

FMT = "%.17g"


def _fmt(v):
    return FMT % v


def write_csv(path, columns, names):
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    n = cols[0].size
    if any(c.size != n for c in cols):
        raise ValueError("columns must have equal length")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path, names):
    """Columns of ``path`` in the order of ``names`` (header must match)."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    missing = [n for n in names if n not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    idx = [header.index(n) for n in names]
    try:
        data = np.array([[float(r[i]) for i in idx] for r in rows[1:] if r], dtype=float)
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: non-numeric or short row") from exc
    if data.size == 0:
        raise SchemaError(f"{path}: no data rows")
    if not np.all(np.isfinite(data)):
        raise SchemaError(f"{path}: non-finite values")
    return [data[:, j] for j in range(len(names))]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_json(path, obj):
    with open(path, "w", newline="") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def sidecar_path(path):
    return os.path.splitext(path)[0] + ".json"


def _uniform(x, path):
    if x.size < 2:
        raise SchemaError(f"{path}: need at least two rows")
    d = np.diff(x)
    if np.any(d <= 0) or not np.allclose(d, d[0], rtol=1e-9, atol=1e-12 * max(1.0, abs(x[-1]))):
        raise SchemaError(f"{path}: first column must be uniformly increasing")
    return Grid1D(float(x[0]), float(x[-1]), x.size)


# response function --------------------------------------------------------

def write_response(path, r, Phi=None):
    """``Phi`` overrides the running integral of r (closed-form spectral sums)."""
    Phi = r.Phi() if Phi is None else np.asarray(Phi.values if hasattr(Phi, "values") else Phi)
    write_csv(path, [r.grid.nodes, r.values, Phi], ["t", "r", "Phi"])


def read_response(path):
    t, r = read_csv(path, ["t", "r"])
    g = _uniform(t, path)
    if g.start != 0.0:
        raise SchemaError(f"{path}: response must start at t = 0")
    return ResponseFunction(SampledFunction(g, r))


# spectral measure ---------------------------------------------------------

def write_measure(path, sigma):
    write_csv(path, [sigma.lambdas, sigma.weights, sigma.signs], ["lambda", "weight", "sign"])
    write_json(sidecar_path(path), {"T": sigma.T, "tag": sigma.tag, "bc": sigma.bc,
                                    "atoms": int(sigma.lambdas.size)})


def read_measure(path):
    lam, w, s = read_csv(path, ["lambda", "weight", "sign"])
    meta = read_json(sidecar_path(path))
    try:
        return RegularizedSpectralMeasure(lam, w, s.astype(int), float(meta["T"]),
                                          meta.get("tag", "sigma_d"), meta.get("bc", "dirichlet"))
    except KeyError as exc:
        raise SchemaError(f"{sidecar_path(path)}: missing field {exc}") from exc


# scattering data ----------------------------------------------------------

def write_scattering(path, data):
    S = data.S
    write_csv(path, [data.k, S.real, S.imag, data.eta, data.A, data.U],
              ["k", "ReS", "ImS", "eta", "A", "U"])
    write_json(sidecar_path(path), {
        "support": data.support,
        "bound_searched": data.bound_searched,
        "bound_states": [{"k": b.k, "C": b.C, "de0": b.de0} for b in data.bound],
    })


def read_scattering(path):
    k, eta, A = read_csv(path, ["k", "eta", "A"])
    meta = read_json(sidecar_path(path))
    sup = meta.get("support", "inf")
    bound = [BoundState(float(b["k"]), float(b["C"]), float(b["de0"]))
             for b in meta.get("bound_states", [])]
    return ScatteringData(_uniform(k, path), A * np.exp(1j * eta), tuple(bound),
                          bool(meta.get("bound_searched", False)),
                          math.inf if sup == "inf" else float(sup))


# Weyl function ------------------------------------------------------------

def write_weyl(path, m):
    write_csv(path, [m.k, m.values, m.error], ["k", "m", "tail_bound"])


def read_weyl(path):
    k, m, e = read_csv(path, ["k", "m", "tail_bound"])
    return WeylSamples(k, m, e)


# acoustic response --------------------------------------------------------

def _echo_path(path):
    base, ext = os.path.splitext(path)
    return base + "_echo" + ext


def write_acoustic(path, p):
    write_csv(path, [p.grid.nodes, p.values], ["t", "p_reg"])
    meta = {"deltaCoefficient": p.delta_coefficient, "a": p.support,
            "t_max": p.grid.stop, "note": p.note, "echo": p.echo is not None}
    if p.echo is not None:
        write_csv(_echo_path(path), [p.echo.grid.nodes, p.echo.values], ["tau", "p_echo"])
        meta["echo_t_max"] = p.echo.grid.stop
    write_json(sidecar_path(path), meta)


def read_acoustic(path):
    t, v = read_csv(path, ["t", "p_reg"])
    meta = read_json(sidecar_path(path))
    echo = None
    if meta.get("echo"):
        tau, e = read_csv(_echo_path(path), ["tau", "p_echo"])
        echo = SampledFunction(_uniform(tau, _echo_path(path)), e)
    try:
        return AcousticResponse(SampledFunction(_uniform(t, path), v),
                                float(meta["deltaCoefficient"]), echo, float(meta["a"]),
                                None, meta.get("note", ""))
    except KeyError as exc:
        raise SchemaError(f"{sidecar_path(path)}: missing field {exc}") from exc


# reconstruction -----------------------------------------------------------

def write_reconstruction(path, rec: ReconstructionResult):
    write_csv(path, [rec.x, rec.q, rec.lambda_used, rec.conditioning],
              ["x", "q", "lambdaUsed", "conditioning"])


# manifest -----------------------------------------------------------------

def config_hash(config_dict):
    blob = json.dumps(_clean(config_dict), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(out_dir, command, config_dict, files):
    write_json(os.path.join(out_dir, "manifest.json"), {
        "command": command,
        "config": config_dict,
        "config_hash": config_hash(config_dict),
        "version": __version__,
        "files": sorted(files),
    })
