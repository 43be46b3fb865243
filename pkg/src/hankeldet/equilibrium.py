"""Equilibrium densities of the logarithmic energy and their potentials.

Three closed-form densities are provided:

* ``rho``  - the saturated density of the lattice problem: 1 on [0, 1/2], then
  (2/pi)(arctan(1/sqrt(2x-1)) - sqrt(2x-1)/(2x)), decaying like x^(-3/2);
* ``rhoS`` - the continuum density 1/(pi x sqrt(x-1)) on (1, inf);
* ``rhoP`` - arccos(1-x)/pi on [0, 2] (``rhoP_mirror`` is arccos(x-1)/pi).

Quadrature is double precision (scipy's QUADPACK).  Endpoint square-root
behaviour is removed by substitution: y = (1+s^2)/2 on the tail of ``rho``
and y = 1+s^2 for ``rhoS``.  Logarithmic singularities are placed at panel
ends, where the adaptive rule extrapolates them away.  Principal values use
symmetric excision around the pole with Richardson extrapolation in the
excision radius.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate

__all__ = [
    "Density",
    "QuadratureError",
    "RHO",
    "RHO_P",
    "RHO_P_MIRROR",
    "RHO_S",
    "density_cdf",
    "density_eval",
    "density_table",
    "get_density",
    "log_potential_quadrature",
    "log_potential_rho",
    "normalization",
    "phi_bracket",
    "phi_functional",
    "pv_integral",
    "pv_residual",
]

_EPSABS = 1e-13
_EPSREL = 1e-13
_LIMIT = 400


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Density:
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in _SUPPORT:
            raise ValueError(f"unknown density kind {self.kind!r}; expected one of {sorted(_SUPPORT)}")

    @property
    def support(self) -> tuple[float, float]:
        return _SUPPORT[self.kind]

    def __call__(self, x: float) -> float:
        return density_eval(self, x)


_SUPPORT = {
    "rho": (0.0, math.inf),
    "rhoS": (1.0, math.inf),
    "rhoP": (0.0, 2.0),
    "rhoP_mirror": (0.0, 2.0),
}
# points where the density or its derivative is not smooth
_BREAKS = {"rho": (0.0, 0.5), "rhoS": (1.0,), "rhoP": (0.0, 2.0), "rhoP_mirror": (0.0, 2.0)}

RHO = Density("rho")
RHO_S = Density("rhoS")
RHO_P = Density("rhoP")
RHO_P_MIRROR = Density("rhoP_mirror")


def get_density(kind: str) -> Density:
    return Density(kind)


def _rho_tail_t(t: float) -> float:
    """(2/pi)(arctan t - t/(1+t^2)) with t = 1/sqrt(2x-1), stable for small t."""
    if t < 0.05:
        t2 = t * t
        acc, power = 0.0, t * t2
        for k in range(1, 10):
            acc += (-1) ** (k + 1) * (2 * k) / (2 * k + 1) * power
            power *= t2
        return 2 / math.pi * acc
    return 2 / math.pi * (math.atan(t) - t / (1 + t * t))


def density_eval(d: Density, x: float) -> float:
    """Piecewise closed form; zero outside the support."""
    kind = d.kind
    if kind == "rho":
        if x < 0:
            return 0.0
        if x <= 0.5:
            return 1.0
        return _rho_tail_t(1 / math.sqrt(2 * x - 1))
    if kind == "rhoS":
        if x <= 1:
            return 0.0
        return 1 / (math.pi * x * math.sqrt(x - 1))
    if x < 0 or x > 2:
        return 0.0
    if kind == "rhoP":
        return math.acos(1 - x) / math.pi
    return math.acos(x - 1) / math.pi


def density_table(xs: Iterable[float]) -> list[dict]:
    """Rows ``x, rho, rhoP`` for plotting the two lattice densities side by side."""
    return [{"x": x, "rho": density_eval(RHO, x), "rhoP": density_eval(RHO_P, x)} for x in xs]


# ---------------------------------------------------------------------------
# quadrature on smooth pieces
# ---------------------------------------------------------------------------


def _quad(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    # QUADPACK warns when it cannot reach the (deliberately strict) tolerance;
    # callers judge the returned error estimate instead.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT)
    return val, err


def _piece(d: Density, g: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """int_a^b d(y) g(y) dy over an interval on which d has a single closed form."""
    if b <= a:
        return 0.0, 0.0
    kind = d.kind
    if kind == "rho" and a >= 0.5:
        # y = (1+s^2)/2, dy = s ds, density in terms of t = 1/s
        sa = math.sqrt(2 * a - 1)
        if math.isinf(b):
            # t = 1/s maps the tail onto (0, 1/sa]; rho_t(t)/t^3 stays bounded
            return _quad(lambda t: _rho_tail_t(t) / t**3 * g((1 + 1 / t**2) / 2) if t > 0 else 0.0, 0, 1 / sa)
        sb = math.sqrt(2 * b - 1)

        def f(s: float) -> float:
            if s == 0:
                return 0.0
            y = (1 + s * s) / 2
            return _rho_tail_t(1 / s) * g(y) * s

        return _quad(f, sa, sb)
    if kind == "rho":
        return _quad(g, a, b)  # density is 1 on [0, 1/2]
    if kind == "rhoS":
        # y = 1+s^2, rhoS(y) dy = 2 ds / (pi (1+s^2))
        sa = math.sqrt(a - 1)
        if math.isinf(b):
            # w = 1/s on the tail
            return _quad(lambda w: 2 / (math.pi * (1 + w * w)) * g(1 + 1 / (w * w)) if w > 0 else 0.0, 0, 1 / sa)
        sb = math.sqrt(b - 1)
        return _quad(lambda s: 2 / (math.pi * (1 + s * s)) * g(1 + s * s), sa, sb)
    return _quad(lambda y: density_eval(d, y) * g(y), a, b)


def _integrate(d: Density, g: Callable[[float], float], singular: Iterable[float] = ()) -> tuple[float, float]:
    """int d(y) g(y) dy over the support, with panels split at breaks and at ``singular``."""
    lo, hi = d.support
    # extra panels at half and twice each singular point keep far-out singularities well resolved
    marks = [q for p in singular for q in (p / 2, p, 2 * p)]
    cuts = sorted({lo, *(p for p in (*_BREAKS[d.kind], *marks) if lo < p < hi)})
    if math.isinf(hi):
        last = cuts[-1]
        cuts += [2 * last + 1]
    cuts.append(hi)
    total = err = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        v, e = _piece(d, g, a, b)
        total += v
        err += e
    return total, err


def normalization(d: Density) -> tuple[float, float]:
    """(integral of the density over its support, quadrature error estimate)."""
    if d.kind == "rho":
        # 1/2 from the flat part; the tail in t = 1/sqrt(2y-1): dy = t^-3 dt
        v1, e1 = _quad(lambda t: _rho_tail_t(t) / t**3 if t > 0 else 4 / (3 * math.pi), 0, 1)
        v2, e2 = _quad(lambda t: _rho_tail_t(t) / t**3, 1, math.inf)
        val, err = 0.5 + v1 + v2, e1 + e2
    else:
        val, err = _integrate(d, lambda y: 1.0)
    if err > 1e-10:
        raise QuadratureError(f"normalization of {d.kind} did not converge (error {err:.2e})")
    return val, err


def log_potential_rho(x: float) -> float:
    """Closed form of int rho(y) log|x-y| dy for x >= 0.

    With q = sqrt(1-2x) the middle branch is
    x log(2x) - 2(x-1) log(1+q) - log 2 - q, which is continuous with log 2 - 1
    at 0 and with log(1/2) at 1/2.
    """
    if x < 0:
        raise ValueError("log_potential_rho needs x >= 0")
    if x == 0:
        return math.log(2) - 1
    if x < 0.5:
        q = math.sqrt(1 - 2 * x)
        # x log(2x) = x log(1-q) + x log(1+q); this form avoids log(2x) cancellation
        return x * math.log1p(-q) + (2 - x) * math.log1p(q) - math.log(2) - q
    return math.log(x)


def _log_potential_rho_printed(x: float) -> float:
    """Middle branch with +2(x-1) log(1+q), kept to document the sign it gets wrong."""
    q = math.sqrt(1 - 2 * x)
    return -q - math.log(2) + 2 * (x - 1) * math.log1p(q) + x * math.log(2 * x)


def density_cdf(d: Density, x: float) -> float:
    """int_{-inf}^x d(y) dy."""
    lo, hi = d.support
    if x <= lo:
        return 0.0
    if x >= hi:
        return 1.0
    if d.kind == "rho":
        if x <= 0.5:
            return x
        # 1 - int_x^inf rho, in t = 1/sqrt(2y-1)
        tx = 1 / math.sqrt(2 * x - 1)
        tail, _ = _quad(lambda t: _rho_tail_t(t) / t**3 if t > 0 else 4 / (3 * math.pi), 0, tx)
        return 1 - tail
    return _integrate_range(d, lambda y: 1.0, lo, x)[0]


def log_potential_quadrature(d: Density, x: float, tol: float = 1e-6) -> tuple[float, float]:
    """int d(y) log|x-y| dy by quadrature, split at the logarithmic singularity y = x."""
    val, err = _integrate(d, lambda y: math.log(abs(x - y)) if y != x else 0.0, singular=(x,))
    if err > tol:
        raise QuadratureError(f"log potential of {d.kind} at x={x}: error {err:.2e} > {tol:.0e}")
    return val, err


def _excision_radius(d: Density, x: float) -> float:
    lo, hi = d.support
    gaps = [abs(x - p) for p in _BREAKS[d.kind]] + ([hi - x] if not math.isinf(hi) else [])
    return 0.5 * min(g for g in gaps if g > 0)


def pv_integral(d: Density, x: float, levels: int = 6) -> tuple[float, float]:
    """Principal value of int d(y)/(x-y) dy.

    The integral outside (x-delta, x+delta) is regular.  Inside, the symmetric
    excision integral I(eps) = int_eps^delta (d(x-t) - d(x+t))/t dt is evaluated
    for eps = delta/2, delta/4, ... and extrapolated to eps -> 0; the excision
    error expands in odd powers of eps.  Returns (value, extrapolation error).
    """
    lo, hi = d.support
    if not lo < x < hi:
        raise ValueError(f"x={x} is not interior to the support of {d.kind}")
    delta = _excision_radius(d, x)
    kernel = lambda y: 1.0 / (x - y)  # noqa: E731
    outer = _integrate_range(d, kernel, lo, x - delta)[0] + _integrate_range(d, kernel, x + delta, hi)[0]

    def pair(t: float) -> float:
        return (density_eval(d, x - t) - density_eval(d, x + t)) / t

    eps = [delta / 2**k for k in range(1, levels + 1)]
    table = [[_quad(pair, e, delta)[0] for e in eps]]
    # Richardson in odd powers: I(eps) = I0 + a1 eps + a3 eps^3 + ...
    for p in range(1, 2 * levels, 2):
        prev = table[-1]
        if len(prev) < 2:
            break
        f = 2.0**p
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    best = table[-1][-1]
    est_err = abs(table[-1][-1] - table[-2][-1]) if len(table) > 1 else math.inf
    return outer + best, est_err


def _integrate_range(d: Density, g: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    lo, hi = d.support
    a, b = max(a, lo), min(b, hi)
    if b <= a:
        return 0.0, 0.0
    cuts = sorted({a, *(p for p in _BREAKS[d.kind] if a < p < b)})
    if math.isinf(b):
        cuts.append(2 * cuts[-1] + 1)
    cuts.append(b)
    total = err = 0.0
    for u, v in zip(cuts[:-1], cuts[1:]):
        val, e = _piece(d, g, u, v)
        total += val
        err += e
    return total, err


_TARGETS = {
    "rho": lambda x: 1 / x,
    "rhoS": lambda x: 1 / x,
    "rhoP": math.log,
    "rhoP_mirror": math.log,
}
_STATIONARY = {
    "rho": lambda x: x > 0.5,
    "rhoS": lambda x: x > 1,
    "rhoP": lambda x: 0 < x < 2,
    "rhoP_mirror": lambda x: 0 < x < 2,
}


def pv_residual(d: Density, x: float) -> float:
    """|target(x) - PV int d(y)/(x-y) dy|, target 1/x for rho and rhoS, log x for rhoP."""
    if not _STATIONARY[d.kind](x):
        raise ValueError(f"stationarity for {d.kind} is not claimed at x={x}")
    val, err = pv_integral(d, x)
    if err > 1e-7:
        raise QuadratureError(f"excision extrapolation did not converge at x={x} (error {err:.2e})")
    return abs(_TARGETS[d.kind](x) - val)


# ---------------------------------------------------------------------------
# energy functional
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def phi_bracket(d: Density) -> tuple[float, float]:
    """(int d log x, double integral of d(x) d(y) log|x-y|).

    For ``rho`` the inner integral uses the closed-form potential; otherwise it
    is itself computed by quadrature.
    """
    single, _ = _integrate(d, lambda y: math.log(y) if y > 0 else 0.0, singular=())
    if d.kind == "rho":
        double, _ = _integrate(d, log_potential_rho)
    else:
        double, _ = _integrate(d, lambda y: log_potential_quadrature(d, y)[0])
    return single, double


def phi_functional(d: Density, n: int) -> float:
    """Energy of the density for n charges.

    ``rho`` (and the Plancherel densities) use the rescaled lattice form
    -n^2 log n - n^2 (2 int rho log x - double integral); ``rhoS`` uses the
    unscaled continuum form -n^2 (2 int rho log x - double integral).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    single, double = phi_bracket(d)
    bracket = 2 * single - double
    if not math.isfinite(bracket):
        raise QuadratureError(f"energy integrals of {d.kind} diverge")
    if d.kind == "rhoS":
        return -(n**2) * bracket
    return -(n**2) * math.log(n) - n**2 * bracket


def pv_profile(d: Density, xs: Iterable[float]) -> np.ndarray:
    """PV integral on a grid (plot helper)."""
    return np.array([pv_integral(d, x)[0] for x in xs])
