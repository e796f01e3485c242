"""Domain descriptions, model parameters, and the tunable-constants ledger.

Every quantity the underlying method leaves as an unnamed constant lives in
``Constants`` so that runs are reproducible: reports embed the ledger that
produced them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, asdict

from .errors import ParameterError, FormatError

SQUARE = "square"
HYPERCUBE = "hypercube"
SPHERE = "sphere"

_KINDS = (SQUARE, HYPERCUBE, SPHERE)


@dataclass(frozen=True)
class DomainSpec:
    """Which manifold the points live on, scaled so total measure equals n.

    kind: "square" (side sqrt(n)), "hypercube" (m >= 2, side n^(1/m)) or
    "sphere" (2-sphere of area n, radius sqrt(n / 4 pi)).
    """

    kind: str
    n: int
    m: int = 2

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown domain kind {self.kind!r}")
        if self.n < 1:
            raise ParameterError("n must be a positive integer")
        if self.kind == SQUARE and self.m != 2:
            raise ParameterError("square domain is two-dimensional")
        if self.kind == SPHERE and self.m != 2:
            raise ParameterError("only the 2-sphere is supported")
        if self.kind == HYPERCUBE and self.m < 2:
            raise ParameterError("hypercube dimension m must be >= 2")

    @property
    def side(self) -> float:
        """Side length of a flat domain (volume n)."""
        if self.kind == SPHERE:
            raise ParameterError("sphere has no side length")
        return self.n ** (1.0 / self.m)

    @property
    def sphere_radius(self) -> float:
        """Radius of the 2-sphere scaled to surface area n."""
        if self.kind != SPHERE:
            raise ParameterError("not a sphere domain")
        return math.sqrt(self.n / (4.0 * math.pi))

    @property
    def ndim(self) -> int:
        """Number of stored coordinates per point (3 for sphere unit vectors)."""
        return 3 if self.kind == SPHERE else self.m

    def max_radius(self) -> float:
        """Largest admissible connection radius for this domain."""
        if self.kind == SPHERE:
            return math.pi * self.sphere_radius
        return self.side / 2.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "n": self.n}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        _reject_unknown_keys(d, {"kind", "m", "n"}, "domain")
        if "kind" not in d or "n" not in d:
            raise FormatError("domain requires 'kind' and 'n'")
        return cls(kind=d["kind"], n=int(d["n"]), m=int(d.get("m", 2)))


UNIFORM = "uniform"
POISSON = "poisson"


@dataclass(frozen=True)
class ModelParams:
    """Connection radius and point process for one graph instance."""

    r: float
    alpha: float | None = None
    point_process: str = UNIFORM

    def __post_init__(self):
        if self.point_process not in (UNIFORM, POISSON):
            raise ParameterError(f"unknown point process {self.point_process!r}")
        if not (self.r > 0.0):
            raise ParameterError("radius r must be positive")

    def validate_for(self, domain: DomainSpec) -> None:
        if self.r >= domain.max_radius():
            raise ParameterError(
                f"r={self.r:g} too large for domain (max {domain.max_radius():g})"
            )
        if self.alpha is not None:
            expect = resolve_radius(domain.n, self.alpha, domain.m)
            if self.r != expect:
                raise ParameterError("r inconsistent with alpha: expected n**alpha")


def resolve_radius(n: int, alpha: float, m: int = 2) -> float:
    """Connection radius n**alpha; alpha must lie strictly inside (0, 1/m)."""
    if n < 1:
        raise ParameterError("n must be positive")
    if not (0.0 < alpha < 1.0 / m):
        raise ParameterError(f"alpha={alpha:g} outside (0, 1/{m})")
    return float(n) ** alpha


def expected_distortion_exponent(alpha: float, m: int = 2) -> float:
    """Predicted growth exponent of the reconstruction distortion in n.

    Equals 1/m - (2m/(m+1)) * alpha, clamped at zero (beyond that point the
    distortion is governed by the sqrt(log n) floor, not a power of n).
    """
    if not (0.0 < alpha < 1.0 / m):
        raise ParameterError(f"alpha={alpha:g} outside (0, 1/{m})")
    return max(0.0, 1.0 / m - (2.0 * m * alpha) / (m + 1.0))


@dataclass(frozen=True)
class Constants:
    """Ledger of tunable constants; serialized with every report.

    deep_factor: two-hop-count threshold is deep_factor * r**m.
    hop_slack_scale: scale of the additive slack in the graph-distance upper
        bound, slack/r = scale * (d / r**(7/3) + log n / r**(4/3)).
    short_range_pad: additive sqrt(log n) pad turning the short-range estimate
        into an upper bound.
    envelope_pad: sqrt(log n) coefficient added to the hybrid error envelope.
    landmark_window_lo/hi: admissible pairwise landmark distances as a
        fraction of sqrt(n) (flat domains).
    min_triangle_side_frac: minimum embedded landmark side, fraction of sqrt(n).
    lens_log_area_factor: area of the probing lenses in units of log n.
    """

    deep_factor: float = 11.0
    hop_slack_scale: float = 10.0
    short_range_pad: float = 1.0
    envelope_pad: float = 2.0
    landmark_window_lo: float = 0.2
    landmark_window_hi: float = 0.3
    min_triangle_side_frac: float = 0.1
    lens_log_area_factor: float = 3.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ParameterError(f"constant {f.name} must be finite and > 0")
        if self.landmark_window_lo >= self.landmark_window_hi:
            raise ParameterError("landmark window must satisfy lo < hi")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Constants":
        known = {f.name for f in fields(cls)}
        _reject_unknown_keys(d, known, "constants")
        return cls(**{k: float(v) for k, v in d.items()})

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, s: str) -> "Constants":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class RunConfig:
    """One fully-specified experiment cell."""

    domain: DomainSpec
    model: ModelParams
    seed: int
    constants: Constants = field(default_factory=Constants)


def _reject_unknown_keys(d: dict, known: set, where: str) -> None:
    unknown = set(d) - known
    if unknown:
        raise FormatError(f"unknown {where} key(s): {sorted(unknown)}")


def load_config(obj: dict | str) -> RunConfig:
    """Parse the run-configuration JSON document (strict: unknown keys fail).

    Keys: n, alpha or r, domain {kind, m}, model, seed, constants.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise FormatError("config must be a JSON object")
    _reject_unknown_keys(obj, {"n", "alpha", "r", "domain", "model", "seed", "constants"}, "config")
    if "n" not in obj:
        raise FormatError("config requires 'n'")
    n = int(obj["n"])
    dom = obj.get("domain", {"kind": SQUARE})
    dom = dict(dom)
    dom.setdefault("n", n)
    if int(dom["n"]) != n:
        raise FormatError("domain.n disagrees with top-level n")
    domain = DomainSpec.from_dict(dom)
    if "alpha" in obj and "r" in obj:
        raise FormatError("give exactly one of 'alpha' or 'r'")
    if "alpha" in obj:
        alpha = float(obj["alpha"])
        r = resolve_radius(n, alpha, domain.m)
    elif "r" in obj:
        alpha = None
        r = float(obj["r"])
    else:
        raise FormatError("config requires 'alpha' or 'r'")
    model = ModelParams(r=r, alpha=alpha, point_process=obj.get("model", UNIFORM))
    model.validate_for(domain)
    constants = Constants.from_dict(obj.get("constants", {}))
    return RunConfig(domain=domain, model=model, seed=int(obj.get("seed", 0)), constants=constants)
