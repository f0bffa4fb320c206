"""Command-line pipelines driven by a flat TOML run configuration.

    bcinverse forward --config run.toml --out results/

Exit codes: 0 success, 1 failed cross-check, 2 invalid configuration or
input schema, 3 solver error.
"""

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import io
from .acoustic import p_from_phase, scattering_matrix_from_p, simulate_acoustic_response
from .checks import run_all
from .dynamics import response_function
from .errors import AllTracesVanish, BCInverseError, SchemaError, UnsupportedConversion
from .inversion import DEFAULT_LAMBDAS, recover_potential
from .kernels import BACKEND
from .numerics import Grid1D
from .potentials import PRESETS, PotentialSpec
from .scattering import MODES, response_from_scattering, scattering_data
from .spectral import (BOUNDARY_CONDITIONS, build_sigma_d, dirichlet_eigendata,
                       Phi_from_sigma, reference_eigendata,
                       response_from_sigma, with_asymptotic_tail)
from .weyl import TAIL_MODES, weyl_from_response

__all__ = ["RunConfig", "ConfigError", "load_config", "main"]

COMMANDS = ("forward", "spectral", "scattering", "acoustic", "convert", "invert", "xcheck")
CONVERSIONS = {
    ("response", "weyl"),
    ("sigma", "response"),
    ("scattering", "response"),
    ("scattering", "acoustic_p"),
    ("acoustic", "scattering_matrix"),
}
VARIANT_PARAMS = {
    "zero": (),
    "constant": ("c",),
    "sech_well": ("depth", "width"),
    "gaussian": ("amplitude", "center", "rate"),
    "tabulated": ("table",),
}
# default horizon of sigma -> response as a fraction of 2L
SIGMA_REACH = 0.9
# keys that may be zero or negative
SIGNED = {"c", "depth", "center", "amplitude", "taper", "T_min"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Flat run description. ``source``/``target`` are the ``from``/``to`` keys."""

    potential: str = None
    c: float = None
    depth: float = None
    width: float = None
    center: float = None
    amplitude: float = None
    rate: float = None
    support: float = None
    taper: float = None
    table: str = None
    T: float = None
    h: float = None
    K_max: float = None
    dk: float = None
    N: int = None
    t_max: float = None
    bc: str = None
    mode: str = None
    coefficient: str = None
    tail_mode: str = None
    source: str = None
    target: str = None
    input: str = None
    k_min: float = None
    k_max: float = None
    n_k: int = None
    T_min: float = None
    T_max: float = None
    dT: float = None
    lambdas: tuple = None
    out: str = None

    @classmethod
    def from_dict(cls, d):
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for key, value in d.items():
            name = {"from": "source", "to": "target"}.get(key, key)
            if name not in types or key in ("source", "target"):
                raise ConfigError(f"unknown field '{key}'")
            kw[name] = _coerce(key, value, types[name])
        return cls(**kw)

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None:
                out[{"source": "from", "target": "to"}.get(f.name, f.name)] = (
                    list(v) if isinstance(v, tuple) else v)
        return out

    def dumps(self):
        """TOML text that loads back to an equal config."""
        lines = []
        for k, v in self.to_dict().items():
            lines.append(f"{k} = {_toml_value(v)}")
        return "\n".join(lines) + "\n"

    def require(self, *names):
        for n in names:
            if getattr(self, n) is None:
                raise ConfigError(f"missing field '{ {'source': 'from', 'target': 'to'}.get(n, n)}'")


def _toml_value(v):
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "inf" if v == math.inf else repr(v)
    return "[" + ", ".join(_toml_value(x) for x in v) + "]"


def _number(key, value):
    if isinstance(value, bool):
        raise ConfigError(f"field '{key}' must be a number")
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"field '{key}' must be a number, got {value!r}") from None
    if isinstance(value, (int, float)):
        return float(value)
    raise ConfigError(f"field '{key}' must be a number")


def _coerce(key, value, typ):
    if typ == "str" or typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"field '{key}' must be a string")
        return value
    if typ == "int" or typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"field '{key}' must be an integer")
        if value <= 0:
            raise ConfigError(f"field '{key}' must be positive")
        return value
    if typ == "tuple" or typ is tuple:
        if not isinstance(value, list) or not value:
            raise ConfigError(f"field '{key}' must be a nonempty list of numbers")
        return tuple(_number(key, v) for v in value)
    v = _number(key, value)
    if math.isnan(v) or (key not in SIGNED and not v > 0):
        raise ConfigError(f"field '{key}' must be positive")
    return v


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for k, v in raw.items():
        if isinstance(v, dict):
            raise ConfigError(f"field '{k}': the config must be flat (no tables)")
    return RunConfig.from_dict(raw)


def _steps(name, length, h):
    n = round(length / h)
    if n < 1 or abs(n * h - length) > 1e-9 * max(1.0, length):
        raise ConfigError(f"field 'h' = {h} must divide {name} = {length}")
    return n


def build_potential(cfg):
    cfg.require("potential")
    name = cfg.potential
    if name in PRESETS:
        if name == "smooth_bump" and cfg.support is not None:
            return PRESETS[name](cfg.support)
        return PRESETS[name]()
    if name not in VARIANT_PARAMS:
        known = sorted(set(PRESETS) | set(VARIANT_PARAMS))
        raise ConfigError(f"field 'potential': unknown potential {name!r} (known: {known})")
    cfg.require(*VARIANT_PARAMS[name])
    sup = math.inf if cfg.support is None else cfg.support
    taper = cfg.taper or 0.0
    if name == "zero":
        return PotentialSpec.zero()
    if name == "constant":
        return PotentialSpec.constant(cfg.c, sup, taper)
    if name == "sech_well":
        return PotentialSpec.sech_well(cfg.depth, cfg.width, cfg.center or 0.0, sup, taper)
    if name == "gaussian":
        return PotentialSpec.gaussian(cfg.amplitude, cfg.center, cfg.rate, sup, taper)
    try:
        return PotentialSpec.from_csv(cfg.table, cfg.support)
    except OSError as exc:
        raise ConfigError(f"field 'table': {exc}") from exc


def _k_grid(cfg):
    cfg.require("k_min", "k_max", "n_k")
    if cfg.k_max <= cfg.k_min and cfg.n_k > 1:
        raise ConfigError("field 'k_max' must exceed 'k_min'")
    return Grid1D(cfg.k_min, cfg.k_max, cfg.n_k)


def _t_grid(cfg, default_stop=None):
    cfg.require("h")
    stop = cfg.t_max if cfg.t_max is not None else default_stop
    if stop is None:
        cfg.require("t_max")
    n = _steps("t_max", stop, cfg.h)
    return Grid1D(0.0, n * cfg.h, n + 1)


def _continuum_grid(cfg):
    cfg.require("K_max", "dk")
    n = round(cfg.K_max / cfg.dk)
    if abs(n * cfg.dk - cfg.K_max) > 1e-9 * cfg.K_max:
        raise ConfigError(f"field 'dk' = {cfg.dk} must divide K_max = {cfg.K_max}")
    return Grid1D(cfg.dk, n * cfg.dk, n)


def _path(out, name):
    return os.path.join(out, name)


# commands -----------------------------------------------------------------

def cmd_forward(cfg, out, threads):
    q = build_potential(cfg)
    cfg.require("T", "h")
    n = _steps("T", cfg.T, cfg.h)
    r = response_function(q, 2 * n * cfg.h, cfg.h)
    io.write_response(_path(out, "response.csv"), r)
    io.write_json(_path(out, "goursat_meta.json"), {
        "scheme": "characteristic march, second order",
        "h": cfg.h, "T": cfg.T, "horizon": 2 * cfg.T,
        "potential": q.to_dict(), "preset_hash": q.digest(), "backend": BACKEND,
    })
    return ["response.csv", "goursat_meta.json"]


def cmd_spectral(cfg, out, threads):
    q = build_potential(cfg)
    cfg.require("T", "N")
    bc = cfg.bc or "dirichlet"
    if bc not in BOUNDARY_CONDITIONS:
        raise ConfigError(f"field 'bc' must be one of {BOUNDARY_CONDITIONS}")
    sigma = build_sigma_d(dirichlet_eigendata(q, cfg.T, bc, cfg.N),
                          reference_eigendata(cfg.T, bc, cfg.N))
    io.write_measure(_path(out, "sigma.csv"), sigma)
    return ["sigma.csv", "sigma.json"]


def cmd_scattering(cfg, out, threads):
    q = build_potential(cfg)
    data = scattering_data(q, _continuum_grid(cfg))
    io.write_scattering(_path(out, "scattering.csv"), data)
    return ["scattering.csv", "scattering.json"]


def cmd_acoustic(cfg, out, threads):
    q = build_potential(cfg)
    cfg.require("t_max", "h")
    p = simulate_acoustic_response(q, cfg.t_max, cfg.h, store_kernel=False)
    io.write_acoustic(_path(out, "acoustic.csv"), p)
    return ["acoustic.csv", "acoustic_echo.csv", "acoustic.json"]


def _read(kind, path):
    readers = {"response": io.read_response, "sigma": io.read_measure,
               "scattering": io.read_scattering, "acoustic": io.read_acoustic}
    return readers[kind](path)


def cmd_convert(cfg, out, threads):
    cfg.require("source", "target", "input")
    pair = (cfg.source, cfg.target)
    if pair not in CONVERSIONS:
        raise UnsupportedConversion(f"no conversion from {cfg.source!r} to {cfg.target!r}; "
                                    f"supported: {sorted(CONVERSIONS)}")
    obj = _read(cfg.source, cfg.input)
    files = []
    if pair == ("response", "weyl"):
        mode = cfg.tail_mode or "strict"
        if mode not in TAIL_MODES:
            raise ConfigError(f"field 'tail_mode' must be one of {TAIL_MODES}")
        m = weyl_from_response(obj, _k_grid(cfg), mode)
        io.write_weyl(_path(out, "weyl.csv"), m)
        budget = {"horizon": obj.horizon, "tail_bound_max": float(np.max(m.error)),
                  "k_min_admissible": m.k_min}
        files.append("weyl.csv")
    elif pair == ("sigma", "response"):
        sigma = obj
        tail = sigma.tag == "sigma_d"
        if tail:
            sigma = with_asymptotic_tail(sigma)
        # the atom sums jump at t = 2L (echo off the far end of [0, L])
        stop = cfg.t_max
        if stop is None:
            cfg.require("h")
            stop = cfg.h * math.floor(SIGMA_REACH * 2 * obj.T / cfg.h + 1e-9)
        g = _t_grid(cfg, stop)
        r = response_from_sigma(sigma, g)
        io.write_response(_path(out, "response.csv"), r, Phi_from_sigma(sigma, g))
        budget = {"atoms": int(obj.lambdas.size), "truncation_length": obj.T,
                  "horizon": g.stop, "Phi": "closed-form atom sums",
                  "asymptotic_tail_atoms": int(sigma.lambdas.size - obj.lambdas.size)}
        files.append("response.csv")
    elif pair == ("scattering", "response"):
        mode = cfg.mode or "measure_consistent"
        if mode not in MODES:
            raise ConfigError(f"field 'mode' must be one of {MODES}")
        r = response_from_scattering(obj, _t_grid(cfg), mode)
        io.write_response(_path(out, "response.csv"), r)
        budget = {"K_max": float(obj.k[-1]), "dk": float(obj.k[1] - obj.k[0]),
                  "mode": mode, "bound_states": len(obj.bound), "continuum_tail": "1/k^2 fit"}
        files.append("response.csv")
    elif pair == ("scattering", "acoustic_p"):
        p = p_from_phase(obj, _t_grid(cfg), cfg.K_max, cfg.coefficient or "C2")
        io.write_acoustic(_path(out, "acoustic_p.csv"), p)
        budget = {"K_max": float(cfg.K_max or obj.k[-1]), "note": p.note,
                  "coefficient": cfg.coefficient or "C2", "phase_at_K": float(abs(obj.eta[-1]))}
        files += ["acoustic_p.csv", "acoustic_p.json"]
    else:
        S = scattering_matrix_from_p(obj, _k_grid(cfg))
        k = _k_grid(cfg).nodes
        io.write_csv(_path(out, "scattering_matrix.csv"), [k, S.real, S.imag], ["k", "ReS", "ImS"])
        echo_end = float(obj.echo.grid.stop) if obj.echo is not None else 0.0
        budget = {"p_reg_length": float(obj.grid.stop), "echo_length": echo_end}
        files.append("scattering_matrix.csv")
    budget["conversion"] = f"{cfg.source}->{cfg.target}"
    io.write_json(_path(out, "error_budget.json"), budget)
    return files + ["error_budget.json"]


def cmd_invert(cfg, out, threads):
    cfg.require("input", "T_max")
    r = io.read_response(cfg.input)
    h = r.step
    if r.horizon < 2 * cfg.T_max * (1 - 1e-9):
        raise SchemaError(f"{cfg.input}: response covers [0, {r.horizon}], "
                          f"need [0, {2 * cfg.T_max}]")
    dT = cfg.dT if cfg.dT is not None else 10 * h
    T_min = cfg.T_min if cfg.T_min is not None else dT
    step = _steps("dT", dT, h) if abs(dT - h) > 1e-12 else 1
    lo = _steps("T_min", T_min, h)
    hi = _steps("T_max", cfg.T_max, h)
    idx = np.arange(lo, hi + 1, step)
    if idx.size < 5:
        raise ConfigError("fields 'T_min', 'T_max', 'dT' give fewer than 5 horizons")
    Ts = Grid1D(idx[0] * h, idx[-1] * h, idx.size)
    rec = recover_potential(r, Ts, cfg.lambdas or DEFAULT_LAMBDAS, threads)
    io.write_reconstruction(_path(out, "q_recovered.csv"), rec)
    return ["q_recovered.csv"]


def cmd_xcheck(cfg, out, threads):
    q = build_potential(cfg)
    T = cfg.T or 1.0
    h = cfg.h or 1 / 200
    _steps("T", T, h)
    r = None
    if cfg.input is not None:
        r = io.read_response(cfg.input)
        if abs(r.step - h) > 1e-9 * h:
            raise ConfigError(f"field 'h' = {h} does not match the step {r.step} of {cfg.input}")
    results = run_all(q, r, T, h, cfg.N or 2000, cfg.K_max or 300.0, cfg.dk or 0.1)
    ok = all(c.passed for c in results)
    io.write_json(_path(out, "report.json"), {"passed": ok,
                                              "checks": [c.to_dict() for c in results]})
    for c in results:
        status = "SKIP" if c.note.startswith("skipped") else ("PASS" if c.passed else "FAIL")
        print(f"{status} {c.name}: difference {c.difference:.3e} "
              f"(tolerance {c.tolerance:g}) {c.note}".rstrip())
    return ["report.json"], (0 if ok else 1)


HANDLERS = {
    "forward": cmd_forward,
    "spectral": cmd_spectral,
    "scattering": cmd_scattering,
    "acoustic": cmd_acoustic,
    "convert": cmd_convert,
    "invert": cmd_invert,
    "xcheck": cmd_xcheck,
}


def _parser():
    ap = argparse.ArgumentParser(prog="bcinverse", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--threads", type=int, metavar="N")
    return ap


def _threads(flag):
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("BCINVERSE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return None


def _prepare_out(cfg, flag):
    out = flag or cfg.out
    if out is None:
        raise ConfigError("missing field 'out' (or pass --out)")
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"field 'out': {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"field 'out': directory {out} is not writable")
    return out


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = _prepare_out(cfg, args.out)
        res = HANDLERS[args.command](cfg, out, _threads(args.threads))
    except (ConfigError, UnsupportedConversion, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AllTracesVanish as exc:
        print(f"error: {exc} (node index {exc.node_index})", file=sys.stderr)
        return 3
    except (BCInverseError, ArithmeticError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    files, code = res if isinstance(res, tuple) else (res, 0)
    present = [f for f in files if os.path.exists(_path(out, f))]
    io.write_manifest(out, args.command, cfg.to_dict(), present)
    return code


if __name__ == "__main__":
    sys.exit(main())
