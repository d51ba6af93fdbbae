"""Physical and dimensionless parameters of the rubber/diffusant moving-boundary model.

The physical problem lives on the growing interval (0, s(t)); after the
front-fixing map y = x / s(t) and the scalings

    tau = D t / s0**2,   u = m / m0,   h = s / s0,
    Bi = beta s0 / D,    A0 = a0 m0 s0 / D,

it becomes a parabolic problem on (0, 1) coupled to an ODE for h(tau).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


_SCALARS = (float, int)


def _as_output(x, values):
    if np.ndim(x) == 0:
        return float(values)
    return values


# ---------------------------------------------------------------------------
# coefficient functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, x: ArrayLike) -> ArrayLike:
        if isinstance(x, _SCALARS):
            return float(self.value)
        return _as_output(x, np.full(np.shape(x), self.value, dtype=float))

    @property
    def saturates(self) -> bool:
        return True

    def __str__(self):
        return f"constant({self.value!r})"


@dataclass(frozen=True)
class Linear:
    """``intercept + slope * x``."""

    slope: float
    intercept: float = 0.0

    def __call__(self, x: ArrayLike) -> ArrayLike:
        if isinstance(x, _SCALARS):
            return self.intercept + self.slope * x
        return _as_output(x, self.intercept + self.slope * np.asarray(x, dtype=float))

    @property
    def saturates(self) -> bool:
        return self.slope == 0.0

    def __str__(self):
        if self.intercept == 0.0:
            return f"linear({self.slope!r})"
        return f"linear({self.slope!r}, {self.intercept!r})"


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolation through ``(x, value)`` knots.

    Values are held constant beyond the first and last knot.
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.knots) < 1:
            raise ValueError("tabulated function needs at least one knot")
        xs = [k[0] for k in self.knots]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("tabulated knots must be strictly increasing")

    def __call__(self, x: ArrayLike) -> ArrayLike:
        xs = np.array([k[0] for k in self.knots])
        vs = np.array([k[1] for k in self.knots])
        return _as_output(x, np.interp(np.asarray(x, dtype=float), xs, vs))

    @property
    def saturates(self) -> bool:
        return True

    def __str__(self):
        return "table(" + ", ".join(f"{a!r}:{b!r}" for a, b in self.knots) + ")"


@dataclass(frozen=True)
class Clamped:
    """``min(inner(x), plateau)``: the saturated variant of a rising coefficient."""

    inner: Callable[[ArrayLike], ArrayLike]
    plateau: float

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return _as_output(x, np.minimum(np.asarray(self.inner(x), dtype=float), self.plateau))

    @property
    def saturates(self) -> bool:
        return True


@dataclass(frozen=True)
class Rescaled:
    """``inner(arg_scale * x) / value_scale``."""

    inner: Callable[[ArrayLike], ArrayLike]
    arg_scale: float
    value_scale: float

    def __call__(self, x: ArrayLike) -> ArrayLike:
        if isinstance(x, _SCALARS):
            return float(self.inner(self.arg_scale * x)) / self.value_scale
        out = np.asarray(self.inner(self.arg_scale * np.asarray(x, dtype=float)), dtype=float)
        return _as_output(x, out / self.value_scale)

    @property
    def saturates(self) -> bool:
        return getattr(self.inner, "saturates", False)

    @property
    def plateau(self) -> float | None:
        p = getattr(self.inner, "plateau", None)
        return None if p is None else p / self.value_scale


_SPEC_RE = re.compile(r"^\s*([A-Za-z_]+)\s*\((.*)\)\s*$")


def parse_coefficient(text: str):
    """Build a coefficient function from ``constant(v)``, ``linear(a[, b])`` or
    ``table(x0:v0, x1:v1, ...)``."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ValueError(f"not a function spec: {text!r}")
    name, body = m.group(1).lower(), m.group(2).strip()
    args = [a.strip() for a in body.split(",")] if body else []
    try:
        if name == "constant":
            if len(args) != 1:
                raise ValueError("constant() takes one argument")
            return Constant(float(args[0]))
        if name == "linear":
            if len(args) not in (1, 2):
                raise ValueError("linear() takes a slope and an optional intercept")
            return Linear(*(float(a) for a in args))
        if name in ("table", "tabulated"):
            knots = []
            for a in args:
                x, sep, v = a.partition(":")
                if not sep:
                    raise ValueError(f"table entry {a!r} is not 'x:value'")
                knots.append((float(x), float(v)))
            return Tabulated(tuple(knots))
    except ValueError as exc:
        raise ValueError(f"bad function spec {text!r}: {exc}") from None
    raise ValueError(f"unknown function {name!r} in {text!r}")


# ---------------------------------------------------------------------------
# parameter sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhysicalParameters:
    """Dimensional data in mm / min / gram units.

    ``b_fn`` is the exterior concentration as a function of physical time,
    ``sigma_fn`` the interface resistance as a function of interface position.
    """

    D: float
    beta: float
    H: float
    a0: float
    s0: float
    m0: float
    L: float
    Tf: float
    b_fn: Callable[[ArrayLike], ArrayLike]
    sigma_fn: Callable[[ArrayLike], ArrayLike]

    def __post_init__(self):
        for name in ("D", "beta", "H", "a0", "s0", "m0", "L", "Tf"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not self.s0 < self.L:
            raise ValueError(f"initial position s0={self.s0} must lie below L={self.L}")


@dataclass(frozen=True)
class DimensionlessParameters:
    Bi: float
    A0: float
    H: float
    b_scaled: Callable[[ArrayLike], ArrayLike]
    sigma_scaled: Callable[[ArrayLike], ArrayLike]
    T: float
    u0: Callable[[ArrayLike], ArrayLike]
    h_max: float


def default_rubber_parameters(L: float = 1.0) -> PhysicalParameters:
    """Rubber exposure experiment: s0 = 0.01 mm, m0 = 0.1 g/mm^3, b = 1 g/mm^3,
    D = 3.66e-4 mm^2/min, beta = 0.564 mm/min, H = 2.5, sigma(s) = s/10, a0 = 50,
    ten minutes of exposure."""
    return PhysicalParameters(
        D=3.66e-4, beta=0.564, H=2.5, a0=50.0, s0=0.01, m0=0.1, L=L, Tf=10.0,
        b_fn=Constant(1.0), sigma_fn=Linear(0.1),
    )


def interface_equilibrium_profile(p: PhysicalParameters) -> Constant:
    """Uniform initial concentration m(0, x) = sigma(s0), so the interface starts at rest."""
    return Constant(float(p.sigma_fn(p.s0)))


def nondimensionalize(p: PhysicalParameters,
                      u0_physical: Callable[[ArrayLike], ArrayLike] | None = None
                      ) -> DimensionlessParameters:
    """Map physical data onto the fixed-domain problem.

    ``u0_physical`` is the initial concentration m(0, x) on [0, s0]; it
    defaults to :func:`interface_equilibrium_profile`.
    """
    if p.s0 == 0.0 or p.D == 0.0:
        raise ValueError("s0 and D must be nonzero")
    if u0_physical is None:
        u0_physical = interface_equilibrium_profile(p)
    t_scale = p.s0 ** 2 / p.D
    d = DimensionlessParameters(
        Bi=p.beta * p.s0 / p.D,
        A0=p.a0 * p.m0 * p.s0 / p.D,
        H=p.H,
        b_scaled=Rescaled(p.b_fn, t_scale, p.m0),
        sigma_scaled=Rescaled(p.sigma_fn, p.s0, p.m0),
        T=p.Tf / t_scale,
        u0=Rescaled(u0_physical, p.s0, p.m0),
        h_max=p.L / p.s0,
    )
    for name in ("Bi", "A0", "T", "h_max"):
        if not math.isfinite(getattr(d, name)):
            raise ValueError(f"non-finite {name} after scaling")
    probe = np.array([d.b_scaled(0.0), d.sigma_scaled(1.0), d.u0(0.0), d.u0(1.0)])
    if not np.all(np.isfinite(probe)):
        raise ValueError("coefficient functions are non-finite after scaling")
    return d


def eval_b(d: DimensionlessParameters, tau: float) -> float:
    if not -1e-12 * max(1.0, d.T) <= tau <= d.T * (1 + 1e-12):
        raise ValueError(f"tau={tau} outside [0, {d.T}]")
    v = float(d.b_scaled(tau))
    if not math.isfinite(v):
        raise ValueError(f"b is not finite at tau={tau}")
    return v


def eval_sigma(d: DimensionlessParameters, h: float) -> float:
    # sigma vanishes on the negative half-line
    if h < 0.0:
        return 0.0
    v = float(d.sigma_scaled(h))
    if not math.isfinite(v):
        raise ValueError(f"sigma is not finite at h={h}")
    return v


# ---------------------------------------------------------------------------
# assumption checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    violations: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __str__(self):
        lines = [f"assumptions {'passed' if self.passed else 'FAILED'}"]
        lines += [f"  violation {aid}: {msg}" for aid, msg in self.violations]
        lines += [f"  warning: {msg}" for msg in self.warnings]
        return "\n".join(lines)


def _finite_positive(x) -> bool:
    try:
        return math.isfinite(x) and x > 0.0
    except TypeError:
        return False


def validate_assumptions(d: DimensionlessParameters, n_samples: int = 2001) -> ValidationReport:
    """Check positivity, boundary-datum bounds, sigma shape and initial-data bounds.

    Never raises: every finding, including a coefficient that cannot be
    evaluated, is recorded in the report.
    """
    violations: list[tuple[str, str]] = []
    warnings: list[str] = []

    for name in ("Bi", "A0", "H", "T"):
        v = getattr(d, name)
        if not _finite_positive(v):
            violations.append(("A1", f"{name} must be positive and finite, got {v!r}"))
    if not (_finite_positive(d.h_max) and d.h_max > 1.0):
        violations.append(("A1", f"h_max must exceed 1, got {d.h_max!r}"))

    T = d.T if _finite_positive(d.T) else 1.0
    h_top = d.h_max if _finite_positive(d.h_max) else 1.0
    taus = np.linspace(0.0, T, n_samples)
    hs = np.linspace(0.0, h_top, n_samples)
    ys = np.linspace(0.0, 1.0, n_samples)

    def sample(fn, xs, label):
        try:
            with np.errstate(all="ignore"):
                vals = np.asarray(fn(xs), dtype=float) * np.ones_like(xs)
        except Exception as exc:  # noqa: BLE001 - report, never raise
            violations.append(("eval", f"{label} could not be evaluated: {exc}"))
            return None
        if not np.all(np.isfinite(vals)):
            violations.append(("eval", f"{label} has non-finite values"))
            return None
        return vals

    b = sample(d.b_scaled, taus, "b")
    b_hi = None
    if b is not None:
        b_lo, b_hi = float(b.min()), float(b.max())
        if b_lo <= 0.0:
            violations.append(("A2", f"0 < b_* <= b fails: min b/m0 = {b_lo!r}"))

    sigma = sample(d.sigma_scaled, hs, "sigma")
    if sigma is not None:
        if sigma.min() < 0.0:
            violations.append(("A4", f"sigma takes negative values (min {sigma.min()!r})"))
        if np.any(np.diff(sigma) < -1e-12 * max(1.0, np.abs(sigma).max())):
            violations.append(("A4", "sigma is not nondecreasing on [0, h_max]"))
        if not getattr(d.sigma_scaled, "saturates", False):
            warnings.append("sigma has no saturation plateau (A4 asks sigma = c0 beyond r_sigma)")
        plateau = getattr(d.sigma_scaled, "plateau", None)
        if plateau is not None:
            if b_hi is not None and _finite_positive(d.H) and not 0.0 < plateau < b_hi / d.H:
                violations.append(("A4", f"plateau c0={plateau!r} must lie in (0, b*/H)"))
            if not plateau < 2.0 * float(sigma[0]):
                warnings.append(f"plateau c0={plateau!r} is not below 2 sigma(0)")
            if not float(d.sigma_scaled(1.0)) < plateau:
                violations.append(("A5", "initial interface already at the sigma plateau"))

    u0 = sample(d.u0, ys, "u0")
    if u0 is not None and sigma is not None and b_hi is not None and _finite_positive(d.H):
        tol = 1e-12 * max(1.0, b_hi)
        if u0.min() < sigma[0] - tol:
            violations.append(("A5", f"u0 dips below sigma(0): min u0 = {u0.min()!r}"))
        if u0.max() > b_hi / d.H + tol:
            violations.append(("A5", f"u0 exceeds b*/H = {b_hi / d.H!r}: max u0 = {u0.max()!r}"))

    return ValidationReport(violations=violations, warnings=warnings)
