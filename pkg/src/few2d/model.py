"""Potential catalog: parameter validation and pointwise evaluation.

Units are fixed to hbar = 2m = 1 throughout, so every Hamiltonian reads
-Laplacian + V and all energies are reported in these units.

Each potential family carries its own natural chart:

================   =========================================
family             natural chart of ``eval_potential``
================   =========================================
HydrogenPair       radii ``(r1, r2)``
CagedOscillator    quadrant point ``(x, y)``
TTW                polar ``(rho, theta)``
ThreeBodyTTW       Jacobi polar ``(rho, theta)``
PW                 polar ``(rho, theta)``
Calogero           ``ThreeBodyConfig`` of pair distances
Wolfes             ``ThreeBodyConfig`` of pair distances
Custom2D           quadrant point ``(x, y)``
================   =========================================

Points closer than ``SINGULAR_TOL`` (absolute, in the angle or the
coordinate) to a singular line are rejected with :class:`SingularPoint`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from .errors import (
    BoundViolation,
    NonPositiveDistance,
    NonPositiveMassOrFrequency,
    SingularPoint,
    ZeroK,
)

SINGULAR_TOL = 1e-12


# ---------------------------------------------------------------------
# rational-or-real angular parameter k
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class Rational:
    """Reduced fraction m/n with positive integer numerator and denominator."""

    m: int
    n: int

    def reduced(self) -> "Rational":
        g = math.gcd(self.m, self.n)
        return Rational(self.m // g, self.n // g)

    @property
    def value(self) -> float:
        return self.m / self.n


KValue = Union[Rational, float]


def coerce_k(k) -> KValue:
    """Normalize user input into a :class:`Rational` or a plain real.

    Integers, integer pairs and :class:`fractions.Fraction` become reduced
    fractions; floats stay real with no rational approximation (degeneracy
    scans need genuinely irrational k as a control).
    """
    if isinstance(k, Rational):
        return k.reduced()
    if isinstance(k, bool):
        raise ZeroK("k must be a number, not a bool")
    if isinstance(k, int):
        if k <= 0:
            raise ZeroK(f"rational k must be positive, got {k}")
        return Rational(k, 1)
    if isinstance(k, Fraction):
        if k <= 0:
            raise ZeroK(f"rational k must be positive, got {k}")
        return Rational(k.numerator, k.denominator)
    if isinstance(k, tuple) and len(k) == 2:
        return validate_k(Rational(int(k[0]), int(k[1])))
    if isinstance(k, float):
        if k == 0.0:
            raise ZeroK("k must be nonzero")
        return k
    raise TypeError(f"cannot interpret {k!r} as rational-or-real k")


def validate_k(k: KValue) -> KValue:
    if isinstance(k, Rational):
        if k.m <= 0 or k.n <= 0:
            raise ZeroK(f"rational k requires positive integers, got {k.m}/{k.n}")
        return k.reduced()
    if k == 0.0:
        raise ZeroK("k must be nonzero")
    return float(k)


def k_float(k: KValue) -> float:
    return k.value if isinstance(k, Rational) else float(k)


# ---------------------------------------------------------------------
# potential specs
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class HydrogenPair:
    """Two attractive Coulomb centers, V = -1/r1 - 1/r2."""


@dataclass(frozen=True)
class CagedOscillator:
    """Anisotropic oscillator with inverse-square walls on the quadrant.

    V = a w^2 x^2 + b w^2 y^2 + A/x^2 + B/y^2.
    """

    a: float = 1.0
    b: float = 1.0
    omega: float = 1.0
    A: float = 0.0
    B: float = 0.0


@dataclass(frozen=True)
class TTW:
    """Oscillator plus angular inverse-square barriers, plain-coupling form.

    V = w^2 rho^2 + [alpha / cos^2(k theta) + beta / sin^2(k theta)] / rho^2.
    """

    omega: float
    k: KValue
    alpha: float = 0.0
    beta: float = 0.0


@dataclass(frozen=True)
class ThreeBodyTTW:
    """Same family as :class:`TTW` but with k^2-weighted angular couplings.

    V = w^2 rho^2 + k^2 [alpha / cos^2(k theta) + beta / sin^2(k theta)] / rho^2.

    The two weightings are kept as distinct variants instead of silently
    rescaling alpha and beta.
    """

    omega: float
    k: KValue
    alpha: float = 0.0
    beta: float = 0.0


@dataclass(frozen=True)
class PW:
    """Coulomb analogue of TTW; angular arguments use k/2.

    V = -a/rho + [mu / cos^2(k theta / 2) + nu / sin^2(k theta / 2)] / rho^2.
    """

    a: float
    k: KValue
    mu: float = 0.0
    nu: float = 0.0


@dataclass(frozen=True)
class Calogero:
    """Three bodies on a line with pairwise quadratic plus inverse-square terms."""

    omega: float
    A: float = 0.0


@dataclass(frozen=True)
class Wolfes:
    """Calogero plus genuinely three-body inverse-square terms.

    The three-body distances are t_k = |x_i + x_j - 2 x_k|, computed from
    pair distances via t_k^2 = 2 r_ik^2 + 2 r_jk^2 - r_ij^2, which is
    permutation symmetric and valid in any ordering.
    """

    omega: float
    A: float = 0.0
    B: float = 0.0


@dataclass(frozen=True)
class Custom2D:
    """Escape hatch: arbitrary W(x, y) on the open quadrant.

    ``func`` must accept numpy arrays. ``depends_on_angles`` marks potentials
    that are not functions of the two radii alone; the 3-body mapping rejects
    those.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "custom"
    depends_on_angles: bool = False
    expression: str | None = None


PotentialSpec = Union[
    HydrogenPair, CagedOscillator, TTW, ThreeBodyTTW, PW, Calogero, Wolfes, Custom2D
]

_ANGULAR_FAMILIES = (TTW, ThreeBodyTTW, PW)


# ---------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------

def validate(spec: PotentialSpec) -> PotentialSpec:
    """Certify a spec's invariants; returns the normalized spec.

    Rational k is reduced to lowest terms. Raises ``BoundViolation``,
    ``ZeroK`` or ``NonPositiveMassOrFrequency`` on invalid parameters.
    """
    if isinstance(spec, HydrogenPair):
        return spec
    if isinstance(spec, CagedOscillator):
        if spec.a <= 0 or spec.b <= 0 or spec.omega <= 0:
            raise NonPositiveMassOrFrequency(
                f"caged oscillator requires a, b, omega > 0, got "
                f"a={spec.a}, b={spec.b}, omega={spec.omega}"
            )
        if spec.A <= -0.125 or spec.B <= -0.125:
            raise BoundViolation(
                f"caged oscillator requires A, B > -1/8, got A={spec.A}, B={spec.B}"
            )
        return spec
    if isinstance(spec, (TTW, ThreeBodyTTW)):
        k = validate_k(spec.k)
        if spec.omega <= 0:
            raise NonPositiveMassOrFrequency(f"omega must be > 0, got {spec.omega}")
        bound = -1.0 / (4.0 * k_float(k) ** 2)
        # strict inequality: alpha, beta > -1/(4 k^2)
        if spec.alpha <= bound or spec.beta <= bound:
            raise BoundViolation(
                f"require alpha, beta > {bound:.9g} for k={k_float(k):g}, "
                f"got alpha={spec.alpha}, beta={spec.beta}"
            )
        return replace(spec, k=k)
    if isinstance(spec, PW):
        k = validate_k(spec.k)
        if spec.a <= 0:
            raise NonPositiveMassOrFrequency(
                f"Coulomb strength a must be > 0, got {spec.a}"
            )
        return replace(spec, k=k)
    if isinstance(spec, Calogero):
        if spec.omega <= 0:
            raise NonPositiveMassOrFrequency(f"omega must be > 0, got {spec.omega}")
        return spec
    if isinstance(spec, Wolfes):
        if spec.omega <= 0:
            raise NonPositiveMassOrFrequency(f"omega must be > 0, got {spec.omega}")
        return spec
    if isinstance(spec, Custom2D):
        return spec
    raise TypeError(f"not a potential spec: {spec!r}")


# ---------------------------------------------------------------------
# three-body configurations on the line / in d dimensions
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ThreeBodyConfig:
    """Pair distances (r12, r13, r23), all strictly positive."""

    r12: float
    r13: float
    r23: float

    def __post_init__(self):
        for name in ("r12", "r13", "r23"):
            if getattr(self, name) <= 0:
                raise NonPositiveDistance(f"{name} must be > 0, got {getattr(self, name)}")
        # weak triangle inequality; collinear configs meet it with equality
        r = sorted((self.r12, self.r13, self.r23))
        if r[2] > r[0] + r[1] + 1e-12 * r[2]:
            raise ValueError(
                f"distances ({self.r12}, {self.r13}, {self.r23}) are not realizable"
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r12, self.r13, self.r23)


def permute_particles(config: ThreeBodyConfig, sigma: tuple[int, int, int]) -> ThreeBodyConfig:
    """Relabel particles: position i of the new config holds particle sigma[i].

    ``sigma`` is a permutation of (1, 2, 3).
    """
    if sorted(sigma) != [1, 2, 3]:
        raise ValueError(f"sigma must be a permutation of (1, 2, 3), got {sigma}")
    dist = {
        frozenset((1, 2)): config.r12,
        frozenset((1, 3)): config.r13,
        frozenset((2, 3)): config.r23,
    }
    return ThreeBodyConfig(
        r12=dist[frozenset((sigma[0], sigma[1]))],
        r13=dist[frozenset((sigma[0], sigma[2]))],
        r23=dist[frozenset((sigma[1], sigma[2]))],
    )


def _threebody_t_squared(config: ThreeBodyConfig) -> tuple[float, float, float]:
    """Squares of the three-body distances |x_i + x_j - 2 x_k|.

    t_k^2 = 2 r_ik^2 + 2 r_jk^2 - r_ij^2 holds for collinear and planar
    configurations alike and is manifestly permutation symmetric.  It is
    evaluated as (r_ik - r_jk)^2 + (r_ik + r_jk - r_ij)(r_ik + r_jk + r_ij),
    which avoids the cancellation the raw form suffers near collinear
    configurations with k between i and j.
    """
    def t2(a: float, b: float, c: float) -> float:
        # a = r_ik, b = r_jk, c = r_ij
        return (a - b) ** 2 + (a + b - c) * (a + b + c)

    r12, r13, r23 = config.r12, config.r13, config.r23
    return (
        t2(r12, r13, r23),  # k = 1
        t2(r12, r23, r13),  # k = 2
        t2(r13, r23, r12),  # k = 3
    )


# ---------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------

def _angular_rays(kf: float, half_angle: bool = False) -> list[tuple[str, float]]:
    """Singular rays theta = j pi / (2k) inside the open quadrant.

    With ``half_angle`` the arguments are k theta / 2, so rays sit at
    theta = j pi / k.
    """
    step = math.pi / kf if half_angle else math.pi / (2.0 * kf)
    rays = []
    j = 0
    while True:
        th = j * step
        if th > math.pi / 2 + 1e-15:
            break
        which = "sin" if j % 2 == 0 else "cos"
        rays.append((which, th))
        j += 1
    return rays


def singular_rays(spec: PotentialSpec) -> list[tuple[str, float]]:
    """Angular singular lines of a polar-family potential, as (kind, theta).

    Includes the quadrant boundaries theta = 0 and pi/2 when they are
    singular for the family. Non-angular families return an empty list.
    """
    spec = validate(spec)
    if isinstance(spec, (TTW, ThreeBodyTTW)):
        return _angular_rays(k_float(spec.k))
    if isinstance(spec, PW):
        return _angular_rays(k_float(spec.k), half_angle=True)
    return []


def _check_angle(theta: float, rays: list[tuple[str, float]]) -> None:
    for which, th in rays:
        if abs(theta - th) < SINGULAR_TOL:
            raise SingularPoint(f"{which}(k*theta)=0", f"theta={theta!r} ray={th!r}")


def eval_potential(spec: PotentialSpec, point) -> float:
    """Evaluate a potential at one point of its natural chart.

    Parameters
    ----------
    spec : PotentialSpec
        Potential family with parameters (validated on entry).
    point : tuple or ThreeBodyConfig
        ``(r1, r2)``, ``(x, y)`` or ``(rho, theta)`` per the family's chart;
        Calogero/Wolfes take a :class:`ThreeBodyConfig`.

    Returns
    -------
    float
        Finite potential value in hbar = 2m = 1 units.

    Raises
    ------
    SingularPoint
        If the point lies within ``SINGULAR_TOL`` of a singular line.
    """
    spec = validate(spec)

    if isinstance(spec, HydrogenPair):
        r1, r2 = point
        if r1 < SINGULAR_TOL:
            raise SingularPoint("r1=0")
        if r2 < SINGULAR_TOL:
            raise SingularPoint("r2=0")
        return -1.0 / r1 - 1.0 / r2

    if isinstance(spec, CagedOscillator):
        x, y = point
        if x < SINGULAR_TOL:
            raise SingularPoint("x=0")
        if y < SINGULAR_TOL:
            raise SingularPoint("y=0")
        w2 = spec.omega**2
        return spec.a * w2 * x * x + spec.b * w2 * y * y + spec.A / (x * x) + spec.B / (y * y)

    if isinstance(spec, (TTW, ThreeBodyTTW)):
        rho, theta = point
        if rho < SINGULAR_TOL:
            raise SingularPoint("rho=0")
        kf = k_float(spec.k)
        _check_angle(theta, _angular_rays(kf))
        weight = kf**2 if isinstance(spec, ThreeBodyTTW) else 1.0
        c = math.cos(kf * theta)
        s = math.sin(kf * theta)
        return (
            spec.omega**2 * rho * rho
            + weight * (spec.alpha / (c * c) + spec.beta / (s * s)) / (rho * rho)
        )

    if isinstance(spec, PW):
        rho, theta = point
        if rho < SINGULAR_TOL:
            raise SingularPoint("rho=0")
        kf = k_float(spec.k)
        _check_angle(theta, _angular_rays(kf, half_angle=True))
        c = math.cos(kf * theta / 2.0)
        s = math.sin(kf * theta / 2.0)
        return -spec.a / rho + (spec.mu / (c * c) + spec.nu / (s * s)) / (rho * rho)

    if isinstance(spec, (Calogero, Wolfes)):
        config = point
        if not isinstance(config, ThreeBodyConfig):
            config = ThreeBodyConfig(*config)
        r12, r13, r23 = config.as_tuple()
        for name, r in (("r12", r12), ("r13", r13), ("r23", r23)):
            if r < SINGULAR_TOL:
                raise SingularPoint(f"{name}=0")
        w2 = spec.omega**2
        val = w2 * (r12**2 + r13**2 + r23**2)
        val += spec.A * (1.0 / r12**2 + 1.0 / r13**2 + 1.0 / r23**2)
        if isinstance(spec, Wolfes):
            for idx, t2 in enumerate(_threebody_t_squared(config), start=1):
                if t2 < SINGULAR_TOL**2:
                    raise SingularPoint(f"t{idx}=0", "three-body collinear collision")
                val += spec.B / t2
        return val

    if isinstance(spec, Custom2D):
        x, y = point
        if x < SINGULAR_TOL:
            raise SingularPoint("x=0")
        if y < SINGULAR_TOL:
            raise SingularPoint("y=0")
        return float(spec.func(np.asarray(x), np.asarray(y)))

    raise TypeError(f"not a potential spec: {spec!r}")


def quadrant_values(spec: PotentialSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized potential on quadrant points (x, y), broadcasting.

    The caller is responsible for keeping nodes off the singular lines
    (grids are screened by ``discretize.make_grid``). Calogero/Wolfes have
    no quadrant chart; map them through ``reduction.map_threebody`` first.
    """
    spec = validate(spec)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    if isinstance(spec, HydrogenPair):
        return -1.0 / x - 1.0 / y
    if isinstance(spec, CagedOscillator):
        w2 = spec.omega**2
        return spec.a * w2 * x**2 + spec.b * w2 * y**2 + spec.A / x**2 + spec.B / y**2
    if isinstance(spec, (TTW, ThreeBodyTTW)):
        kf = k_float(spec.k)
        weight = kf**2 if isinstance(spec, ThreeBodyTTW) else 1.0
        rho2 = x**2 + y**2
        theta = np.arctan2(y, x)
        c = np.cos(kf * theta)
        s = np.sin(kf * theta)
        return spec.omega**2 * rho2 + weight * (spec.alpha / c**2 + spec.beta / s**2) / rho2
    if isinstance(spec, PW):
        kf = k_float(spec.k)
        rho = np.hypot(x, y)
        theta = np.arctan2(y, x)
        c = np.cos(kf * theta / 2.0)
        s = np.sin(kf * theta / 2.0)
        return -spec.a / rho + (spec.mu / c**2 + spec.nu / s**2) / rho**2
    if isinstance(spec, Custom2D):
        xb, yb = np.broadcast_arrays(x, y)
        return np.asarray(spec.func(xb, yb), dtype=float)
    raise NotImplementedError(
        f"{type(spec).__name__} has no quadrant chart; use reduction.map_threebody"
    )


# ---------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------

_FAMILY_NAMES = {
    HydrogenPair: "hydrogen_pair",
    CagedOscillator: "caged_oscillator",
    TTW: "ttw",
    ThreeBodyTTW: "three_body_ttw",
    PW: "pw",
    Calogero: "calogero",
    Wolfes: "wolfes",
    Custom2D: "custom2d",
}


def _k_to_json(k: KValue):
    if isinstance(k, Rational):
        return {"m": k.m, "n": k.n}
    return float(k)


def _k_from_json(obj) -> KValue:
    if isinstance(obj, dict):
        return validate_k(Rational(int(obj["m"]), int(obj["n"])))
    if isinstance(obj, int):
        return validate_k(Rational(obj, 1))
    return validate_k(float(obj))


def spec_to_dict(spec: PotentialSpec) -> dict:
    """JSON-ready dictionary; field names are the parameter symbols spelled out."""
    spec = validate(spec)
    family = _FAMILY_NAMES[type(spec)]
    if isinstance(spec, HydrogenPair):
        return {"family": family}
    if isinstance(spec, CagedOscillator):
        return {"family": family, "a": spec.a, "b": spec.b, "omega": spec.omega,
                "A": spec.A, "B": spec.B}
    if isinstance(spec, (TTW, ThreeBodyTTW)):
        return {"family": family, "omega": spec.omega, "k": _k_to_json(spec.k),
                "alpha": spec.alpha, "beta": spec.beta}
    if isinstance(spec, PW):
        return {"family": family, "a": spec.a, "k": _k_to_json(spec.k),
                "mu": spec.mu, "nu": spec.nu}
    if isinstance(spec, Calogero):
        return {"family": family, "omega": spec.omega, "A": spec.A}
    if isinstance(spec, Wolfes):
        return {"family": family, "omega": spec.omega, "A": spec.A, "B": spec.B}
    if isinstance(spec, Custom2D):
        if spec.expression is None:
            raise ValueError("only expression-backed Custom2D specs serialize to JSON")
        return {"family": family, "expression": spec.expression,
                "depends_on_angles": spec.depends_on_angles}
    raise TypeError(f"not a potential spec: {spec!r}")


_CUSTOM_NAMESPACE = {
    "np": np, "pi": np.pi, "sqrt": np.sqrt, "exp": np.exp, "log": np.log,
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "hypot": np.hypot,
    "arctan2": np.arctan2, "abs": np.abs, "minimum": np.minimum,
    "maximum": np.maximum,
}


def compile_expression(expression: str) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Compile a numpy expression in x, y for Custom2D specs.

    The expression is evaluated with numpy functions only; configs are
    trusted input, as usual for scientific run files.
    """
    code = compile(expression, "<custom2d>", "eval")

    def func(x, y):
        return eval(code, {"__builtins__": {}}, dict(_CUSTOM_NAMESPACE, x=x, y=y))

    return func


def spec_from_dict(obj: dict) -> PotentialSpec:
    """Inverse of :func:`spec_to_dict`; rejects unknown keys."""
    if "family" not in obj:
        raise ValueError("potential block needs a 'family' key")
    family = obj["family"]
    known = {
        "hydrogen_pair": ({"family"}, lambda o: HydrogenPair()),
        "caged_oscillator": (
            {"family", "a", "b", "omega", "A", "B"},
            lambda o: CagedOscillator(a=float(o.get("a", 1.0)), b=float(o.get("b", 1.0)),
                                      omega=float(o.get("omega", 1.0)),
                                      A=float(o.get("A", 0.0)), B=float(o.get("B", 0.0))),
        ),
        "ttw": (
            {"family", "omega", "k", "alpha", "beta"},
            lambda o: TTW(omega=float(o["omega"]), k=_k_from_json(o["k"]),
                          alpha=float(o.get("alpha", 0.0)), beta=float(o.get("beta", 0.0))),
        ),
        "three_body_ttw": (
            {"family", "omega", "k", "alpha", "beta"},
            lambda o: ThreeBodyTTW(omega=float(o["omega"]), k=_k_from_json(o["k"]),
                                   alpha=float(o.get("alpha", 0.0)),
                                   beta=float(o.get("beta", 0.0))),
        ),
        "pw": (
            {"family", "a", "k", "mu", "nu"},
            lambda o: PW(a=float(o["a"]), k=_k_from_json(o["k"]),
                         mu=float(o.get("mu", 0.0)), nu=float(o.get("nu", 0.0))),
        ),
        "calogero": (
            {"family", "omega", "A"},
            lambda o: Calogero(omega=float(o["omega"]), A=float(o.get("A", 0.0))),
        ),
        "wolfes": (
            {"family", "omega", "A", "B"},
            lambda o: Wolfes(omega=float(o["omega"]), A=float(o.get("A", 0.0)),
                             B=float(o.get("B", 0.0))),
        ),
        "custom2d": (
            {"family", "expression", "depends_on_angles"},
            lambda o: Custom2D(func=compile_expression(o["expression"]),
                               name="custom", expression=o["expression"],
                               depends_on_angles=bool(o.get("depends_on_angles", False))),
        ),
    }
    if family not in known:
        raise ValueError(f"unknown potential family {family!r}")
    allowed, build = known[family]
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"unknown keys for family {family!r}: {sorted(extra)}")
    return validate(build(obj))
