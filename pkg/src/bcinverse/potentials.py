"""Real potentials on the half-line: analytic presets and tabulated data."""

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import NonFiniteValues, SchemaError
from .numerics import Grid1D, SampledFunction

VARIANTS = ("zero", "constant", "sech_well", "gaussian", "tabulated")


def smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        v = 1.0 - u
        b = np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)
        out = a / (a + b)
    return np.where(u <= 0, 0.0, np.where(u >= 1, 1.0, out))


@dataclass(frozen=True)
class PotentialSpec:
    """A potential q(x), x >= 0.

    ``support`` is the bound a beyond which q vanishes (``inf`` for none).
    With ``taper > 0`` the profile is switched off smoothly on [a - taper, a];
    otherwise it is cut sharply at a.
    """

    variant: str = "zero"
    params: dict = field(default_factory=dict)
    support: float = math.inf
    taper: float = 0.0
    table: SampledFunction = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown potential variant {self.variant!r}")
        if self.support < 0 or self.taper < 0:
            raise ValueError("support and taper must be non-negative")
        if self.taper > 0 and not math.isfinite(self.support):
            raise ValueError("a taper needs a finite support bound")
        if self.variant == "tabulated":
            if self.table is None:
                raise ValueError("tabulated potential needs samples")
            if self.table.grid.start != 0.0:
                raise ValueError("tabulated grids must start at 0")
        if self.variant == "sech_well":
            p = self.params
            if p.get("depth", 0) <= 0 or p.get("width", 0) <= 0 or p.get("center", 0) < 0:
                raise ValueError("sech_well needs depth > 0, width > 0, center >= 0")
        object.__setattr__(self, "params", dict(self.params))

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls("zero", {}, 0.0)

    @classmethod
    def constant(cls, c, support=math.inf, taper=0.0):
        return cls("constant", {"c": float(c)}, support, taper)

    @classmethod
    def sech_well(cls, depth, width, center=0.0, cutoff=math.inf, taper=0.0):
        return cls("sech_well", {"depth": float(depth), "width": float(width),
                                 "center": float(center)}, cutoff, taper)

    @classmethod
    def gaussian(cls, amplitude, center, rate, support=math.inf, taper=0.0):
        return cls("gaussian", {"amplitude": float(amplitude), "center": float(center),
                                "rate": float(rate)}, support, taper)

    @classmethod
    def tabulated(cls, x, q, support=None):
        x = np.asarray(x, dtype=float)
        q = np.asarray(q, dtype=float)
        if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
            raise SchemaError("tabulated x must be strictly increasing")
        if x[0] != 0.0:
            raise SchemaError("tabulated x must start at 0")
        if not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9, atol=0):
            # resample non-uniform tables on a uniform grid (linear interpolation)
            n = int(math.ceil(x[-1] / np.min(np.diff(x)))) + 1
            xu = np.linspace(0.0, x[-1], n)
            q = np.interp(xu, x, q)
            x = xu
        grid = Grid1D(0.0, float(x[-1]), x.size)
        sup = float(x[-1]) if support is None else float(support)
        return cls("tabulated", {}, sup, 0.0, SampledFunction(grid, q))

    @classmethod
    def from_csv(cls, path, support=None):
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        try:
            data = np.array([[float(r[0]), float(r[1])] for r in rows])
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"{path}: expected two numeric columns (x, q)") from exc
        if data.size == 0:
            raise SchemaError(f"{path}: no samples")
        return cls.tabulated(data[:, 0], data[:, 1], support)

    # evaluation ---------------------------------------------------------
    def _profile(self, x):
        p = self.params
        if self.variant == "zero":
            return np.zeros_like(x)
        if self.variant == "constant":
            return np.full_like(x, p["c"])
        if self.variant == "sech_well":
            return -p["depth"] / np.cosh((x - p["center"]) / p["width"]) ** 2
        if self.variant == "gaussian":
            return p["amplitude"] * np.exp(-p["rate"] * (x - p["center"]) ** 2)
        t = self.table
        return np.interp(x, t.grid.nodes, t.values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._profile(x)
        a = self.support
        if math.isfinite(a):
            if self.taper > 0:
                out = out * smooth_step((a - x) / self.taper)
            else:
                out = np.where(x <= a, out, 0.0)
        if not np.all(np.isfinite(out)):
            raise NonFiniteValues("potential evaluated to a non-finite value")
        return out if out.ndim else float(out)

    @property
    def compact(self):
        return math.isfinite(self.support)

    def antiderivative(self, x_max, h):
        """Q(x) = int_0^x q on the grid x = 0, h, ..., x_max (Simpson on h/4)."""
        n = int(round(x_max / h))
        fine = np.linspace(0.0, n * h, 4 * n + 1)
        q = self(fine)
        cum = np.concatenate([[0.0], cumulative_simpson(q, x=fine)])
        return cum[::4]

    def total_mass(self, h=1e-3):
        if not self.compact:
            raise ValueError("total mass needs a finite support")
        a = self.support
        n = max(8, int(math.ceil(a / h)))
        return float(self.antiderivative(a, a / n)[-1]) if a > 0 else 0.0

    # serialization ------------------------------------------------------
    def to_dict(self):
        d = {"variant": self.variant, **self.params,
             "support": self.support if self.compact else "inf",
             "taper": self.taper}
        if self.variant == "tabulated":
            d["x"] = self.table.grid.nodes.tolist()
            d["q"] = self.table.values.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        variant = d.pop("variant", None)
        if variant is None:
            raise SchemaError("potential descriptor needs a 'variant' field")
        sup = d.pop("support", "inf")
        sup = math.inf if sup in ("inf", None) else float(sup)
        taper = float(d.pop("taper", 0.0))
        if variant == "zero":
            return cls.zero()
        if variant == "constant":
            return cls.constant(d["c"], sup, taper)
        if variant == "sech_well":
            return cls.sech_well(d["depth"], d["width"], d.get("center", 0.0), sup, taper)
        if variant == "gaussian":
            return cls.gaussian(d["amplitude"], d["center"], d["rate"], sup, taper)
        if variant == "tabulated":
            if "path" in d:
                return cls.from_csv(d["path"], None if not math.isfinite(sup) else sup)
            return cls.tabulated(d["x"], d["q"], None if not math.isfinite(sup) else sup)
        raise SchemaError(f"unknown potential variant {variant!r}")

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


# named presets used across tests and the CLI
def barrier():
    """q = 1 on [0, 0.75], switched smoothly off by x = 1."""
    return PotentialSpec.constant(1.0, support=1.0, taper=0.25)


def deep_well():
    """Half of a sech^2 well of depth 8 centred at the origin; one bound state."""
    return PotentialSpec.sech_well(8.0, 1.0, 0.0, cutoff=5.0, taper=1.0)


def shallow_well():
    return PotentialSpec.sech_well(1.0, 1.0, 1.0, cutoff=4.0, taper=1.0)


def smooth_bump(support=math.inf):
    """q(x) = 0.5 exp(-20 (x - 0.5)^2)."""
    return PotentialSpec.gaussian(0.5, 0.5, 20.0, support=support)


PRESETS = {
    "zero": PotentialSpec.zero,
    "barrier": barrier,
    "deep_well": deep_well,
    "shallow_well": shallow_well,
    "smooth_bump": smooth_bump,
}
