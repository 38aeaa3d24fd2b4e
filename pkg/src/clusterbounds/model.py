"""Lattice model: volume, Hermitian pair coupling and quartic strength.

The measure on fields psi over a finite volume is proportional to

    exp(-sum_{x,y} J(x-y) psi*(x) psi(y) - lambda/4 sum_x |psi(x)|^4)

and this module owns the standing hypotheses on ``J`` together with the
derived scalars J(0), J_neq and the support radius r0.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError

Site = tuple[int, ...]

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Volume:
    """Ordered finite set of lattice sites."""

    sites: tuple[Site, ...]

    def __post_init__(self):
        if not self.sites:
            raise ValueError("volume must be nonempty")
        d = len(self.sites[0])
        if any(len(s) != d for s in self.sites):
            raise ValueError("all sites must have the same dimension")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("sites must be distinct")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.sites)})

    @classmethod
    def box(cls, shape: Sequence[int]) -> "Volume":
        """Sites of the box prod_i [0, shape_i), origin first."""
        return cls(tuple(itertools.product(*(range(n) for n in shape))))

    @classmethod
    def chain(cls, n: int) -> "Volume":
        return cls.box((n,))

    @property
    def dimension(self) -> int:
        return len(self.sites[0])

    @property
    def contains_origin(self) -> bool:
        return (0,) * self.dimension in self._index

    def index(self, site: Site) -> int:
        return self._index[tuple(site)]

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str
    offset: Site | None = None


@dataclass(frozen=True)
class Model:
    """Dimension, coupling offsets -> complex values, and quartic strength lambda."""

    dimension: int
    couplings: tuple[tuple[Site, complex], ...]
    lam: float
    _table: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        table = {}
        for off, val in self.couplings:
            off = tuple(int(c) for c in off)
            if len(off) != self.dimension:
                raise ConfigError(f"offset {off} has wrong dimension")
            table[off] = table.get(off, 0j) + complex(val)
        object.__setattr__(self, "couplings", tuple(sorted(table.items())))
        object.__setattr__(self, "_table", table)

    @classmethod
    def from_mapping(cls, dimension: int, coupling: Mapping[Site, complex], lam: float,
                     hermitian_autocomplete: bool = False) -> "Model":
        items = {tuple(k): complex(v) for k, v in coupling.items()}
        if hermitian_autocomplete:
            items = hermitian_complete(items)
        return cls(dimension, tuple(items.items()), float(lam))

    @classmethod
    def nearest_neighbor(cls, dimension: int, j0: float, hop: complex, lam: float) -> "Model":
        """J(0)=j0 and J(+-e_i)=hop (mirror entries conjugated)."""
        table = {(0,) * dimension: complex(j0)}
        for i in range(dimension):
            e = [0] * dimension
            e[i] = 1
            table[tuple(e)] = complex(hop)
            e[i] = -1
            table[tuple(e)] = complex(hop).conjugate()
        return cls(dimension, tuple(table.items()), float(lam))

    def J(self, offset: Iterable[int]) -> complex:
        return self._table.get(tuple(offset), 0j)

    @property
    def coupling(self) -> dict[Site, complex]:
        return dict(self._table)

    @property
    def origin(self) -> Site:
        return (0,) * self.dimension

    @property
    def j0(self) -> float:
        return self.J(self.origin).real

    @property
    def j_neq(self) -> float:
        return j_neq(self)

    @property
    def r0(self) -> float:
        return support_radius(self)

    def with_lambda(self, lam: float) -> "Model":
        return Model(self.dimension, self.couplings, float(lam))

    def scaled(self, factor: float) -> "Model":
        """Coupling multiplied by ``factor``; lambda untouched."""
        return Model(self.dimension, tuple((o, v * factor) for o, v in self.couplings), self.lam)


def hermitian_complete(table: Mapping[Site, complex]) -> dict[Site, complex]:
    """Fill in J(-x) = J(x)* for offsets whose mirror is missing."""
    out = dict(table)
    for off, val in table.items():
        mirror = tuple(-c for c in off)
        if mirror not in out:
            out[mirror] = complex(val).conjugate()
    return out


def j_neq(model: Model) -> float:
    """Sum of |J(x)| over nonzero offsets."""
    return float(sum(abs(v) for o, v in model.couplings if any(o)))


def support_radius(model: Model) -> float:
    """r0 = (largest Euclidean norm in the support) + 1, so J vanishes for |x| >= r0."""
    norms = [math.sqrt(sum(c * c for c in o)) for o, v in model.couplings if v != 0]
    return max(norms, default=0.0) + 1.0


def validate(model: Model) -> list[Violation]:
    """Check the standing hypotheses; an empty list means the model is valid."""
    out: list[Violation] = []
    if not model.lam > 0:
        out.append(Violation("LAMBDA_NONPOSITIVE", f"lambda={model.lam!r} must be > 0"))
    j0 = model.J(model.origin)
    if abs(j0.imag) > HERMITIAN_TOL:
        out.append(Violation("J0_NOT_REAL", f"J(0)={j0!r}", model.origin))
    if not j0.real > 0:
        out.append(Violation("J0_NONPOSITIVE", f"J(0)={j0.real!r} must be > 0", model.origin))
    for off, val in model.couplings:
        if not any(off):
            continue
        mirror = tuple(-c for c in off)
        if abs(model.J(mirror) - val.conjugate()) > HERMITIAN_TOL:
            out.append(Violation("HERMITIAN_VIOLATION",
                                 f"J{mirror}={model.J(mirror)!r} != conj(J{off})", off))
    jn = j_neq(model)
    if jn <= 0:
        out.append(Violation("J_NEQ_ZERO", "off-diagonal coupling is empty"))
    if jn >= j0.real:
        out.append(Violation("J_NEQ_NOT_LESS", f"J_neq={jn!r} >= J(0)={j0.real!r}"))
    return out


def random_model(rng: np.random.Generator, dimension: int, *, max_range: int = 1,
                 lam: float | None = None, margin: tuple[float, float] = (0.05, 0.95)) -> Model:
    """Random valid model with Hermitian couplings supported in |x|_inf <= max_range.

    The ratio J_neq / J(0) is drawn uniformly from ``margin``.
    """
    offsets = [o for o in itertools.product(range(-max_range, max_range + 1), repeat=dimension)
               if o > (0,) * dimension]
    vals = rng.normal(size=len(offsets)) + 1j * rng.normal(size=len(offsets))
    vals *= rng.random(len(offsets)) < 0.7
    if not np.any(vals):
        vals[0] = 1.0
    j0 = float(rng.uniform(0.5, 5.0))
    ratio = float(rng.uniform(*margin))
    vals *= ratio * j0 / (2 * np.abs(vals).sum())
    table = {(0,) * dimension: complex(j0)}
    for o, v in zip(offsets, vals):
        if v != 0:
            table[o] = complex(v)
            table[tuple(-c for c in o)] = complex(v).conjugate()
    if lam is None:
        lam = float(rng.uniform(0.1, 4.0))
    return Model(dimension, tuple(table.items()), lam)


# -- config files ------------------------------------------------------------

def _fmt(x: float) -> float:
    # 17 significant digits round-trips every double exactly
    return float(f"{x:.17g}")


def model_to_dict(model: Model) -> dict:
    return {
        "dimension": model.dimension,
        "lambda": _fmt(model.lam),
        "coupling": [{"offset": list(o), "re": _fmt(v.real), "im": _fmt(v.imag)}
                     for o, v in model.couplings],
        "hermitian_autocomplete": False,
    }


def model_from_dict(data: Mapping) -> Model:
    try:
        dim = int(data["dimension"])
        lam = float(data["lambda"])
        table = {}
        for rec in data["coupling"]:
            off = tuple(int(c) for c in rec["offset"])
            table[off] = table.get(off, 0j) + complex(float(rec.get("re", 0.0)),
                                                      float(rec.get("im", 0.0)))
        auto = bool(data.get("hermitian_autocomplete", False))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed model config: {exc}") from exc
    if dim < 1:
        raise ConfigError("dimension must be >= 1")
    return Model.from_mapping(dim, table, lam, hermitian_autocomplete=auto)


def load_model(path: str | Path) -> Model:
    try:
        text = Path(path).read_text(encoding="utf-8")
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model config {path}: {exc}") from exc
    return model_from_dict(data)


def dump_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SourceSpec:
    """Field arguments psi^#(x_i); ``star[i]`` is True for psi*."""

    sites: tuple[Site, ...]
    star: tuple[bool, ...]

    def __post_init__(self):
        if len(self.sites) != len(self.star):
            raise ValueError("sites and star flags differ in length")

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def balanced(self) -> bool:
        return 2 * sum(self.star) == len(self.star)
