"""Parabolic germs in one and two variables.

A germ pairs a closed-form evaluator (an expression tree, evaluated exactly)
with a truncated jet. The evaluator drives orbits; the jet drives everything
algebraic (normalization, correction coefficients, residue extraction). Both
must describe the same map, and the constructor spot-checks that they do.

Charts: origin germs fix 0 with derivative the identity. Infinity germs live
in the reciprocal coordinate and look like a translation plus decaying terms.
A skew product keeps its base map as a Germ1D in z and its fiber as an
expression in (z, w); the second-coordinate jet is stored as origin-chart
data in all charts, since that is where coefficients are extracted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ChartMismatch,
    NewtonDiverged,
    NonFiniteValue,
    NonvanishingConstant,
    NotNormalized,
    NotTangentToIdentity,
    WrongForm,
)
from .expressions import (
    Const,
    Expr,
    Var,
    Z,
    as_rational_poly2,
    diff,
    ev,
    fold_deep,
    parse_expr,
    poly2_to_expr,
    poly_eq,
    subst,
    to_series1,
    to_series2,
)
from .series import (
    INFINITY,
    ORIGIN,
    TruncatedSeries1,
    TruncatedSeries2,
    infinity_chart1,
    origin_chart1,
)

_CHECK_ANGLES = (0.37, 1.91, 3.43, 5.08)


@dataclass(frozen=True)
class Point2:
    """A point in C^2 tagged with the chart its coordinates refer to."""

    z: complex
    w: complex
    chart: str = ORIGIN

    @property
    def u(self) -> complex:
        return self.z

    @property
    def v(self) -> complex:
        return self.w

    def as_tuple(self) -> tuple[complex, complex]:
        return (self.z, self.w)


def _as_expr(e) -> Expr:
    return parse_expr(e) if isinstance(e, str) else e


def _finite(x) -> bool:
    return bool(np.all(np.isfinite(x)))


def _num_eval(expr: Expr, env: dict):
    """ev with scalar-division blowups mapped to NonFiniteValue."""
    try:
        return ev(expr, env)
    except (ZeroDivisionError, OverflowError) as exc:
        raise NonFiniteValue(str(exc)) from exc


class Germ1D:
    """One-variable germ: evaluator plus jet in a common chart.

    `expr` is the closed form used for evaluation and differentiation. An
    evaluator callable may be supplied instead when no closed form exists
    (numerically inverted maps); such germs cannot be differentiated.
    """

    def __init__(self, jet: TruncatedSeries1, expr: Expr | None = None,
                 chart: str = ORIGIN, var: str = "z", evaluator=None,
                 check: bool = True):
        if expr is None and evaluator is None:
            raise ValueError("need expr or evaluator")
        if jet.chart != chart:
            raise ChartMismatch(f"jet chart {jet.chart!r} vs germ {chart!r}")
        self.jet = jet
        self.expr = fold_deep(_as_expr(expr)) if expr is not None else None
        self.chart = chart
        self.var = var
        self._evaluator = evaluator
        self._dexpr = diff(self.expr, var) if self.expr is not None else None
        if chart == ORIGIN:
            if abs(jet.coeff(0)) > 1e-12:
                raise NonvanishingConstant(
                    f"germ does not fix 0: constant {jet.coeff(0)}")
            if abs(jet.coeff(1) - 1) > 1e-12:
                raise NotTangentToIdentity(
                    f"derivative at 0 is {jet.coeff(1)}")
        if check:
            self._check_agreement()

    def _check_agreement(self) -> None:
        r = 1e-3 if self.chart == ORIGIN else 1e3
        for t in _CHECK_ANGLES:
            x = r * np.exp(1j * t)
            a = self(x)
            b = self.jet.eval(x)
            if abs(a - b) > 1e-6 * max(abs(a), 1e-30):
                raise WrongForm(
                    f"evaluator and jet disagree at {x}: {a} vs {b}")

    def __call__(self, x):
        if self._evaluator is not None:
            y = self._evaluator(x)
        else:
            y = _num_eval(self.expr, {self.var: x})
        if not _finite(y):
            raise NonFiniteValue(f"germ evaluation at {x}")
        return y

    def derivative(self, x):
        if self._dexpr is None:
            raise WrongForm("no closed form to differentiate")
        return _num_eval(self._dexpr, {self.var: x})

    def local_inverse(self, target, guess=None, max_steps: int = 50):
        """Newton solve self(x) = target near guess (default: target)."""
        x = target if guess is None else guess
        tol = max(1e-12, 4 * np.finfo(float).eps * abs(target))
        bound = 1e8 * max(1.0, abs(x))
        for _ in range(max_steps):
            r = self(x) - target
            if abs(r) <= tol:
                return x
            d = self.derivative(x)
            if d == 0 or not _finite(d):
                raise NewtonDiverged("flat derivative", last_value=x)
            x = x - r / d
            if abs(x) > bound:
                raise NewtonDiverged("left the local region", last_value=x)
        raise NewtonDiverged(
            f"no convergence to {target} in {max_steps} steps",
            last_value=x)


def _strip_common_powers(p: dict, q: dict) -> tuple[dict, dict]:
    """Cancel z^m w^n factors shared by two polynomial dicts."""
    for i in (0, 1):
        m = min(min(k[i] for k in p), min(k[i] for k in q))
        if m:
            p = {(k[0] - m * (i == 0), k[1] - m * (i == 1)): c
                 for k, c in p.items()}
            q = {(k[0] - m * (i == 0), k[1] - m * (i == 1)): c
                 for k, c in q.items()}
    return p, q


def reciprocal_transport(e: Expr, var: str = "z") -> Expr:
    """Closed form of 1 / e(1/x), reduced so it is analytic at the origin.

    This moves an infinity-chart map back to the origin chart (and vice
    versa, the operation is an involution). Denominators are cleared first;
    a bare substitution would leave 1/x subtrees that poison series
    expansion even when the composite is regular.
    """
    body = subst(_as_expr(e), {var: Const(1) / Var(var)})
    p, q = as_rational_poly2(body)
    if not p:
        raise WrongForm("reciprocal of the zero map")
    p, q = _strip_common_powers(p, q)
    return fold_deep(poly2_to_expr(q) / poly2_to_expr(p))


def make_germ1d(expr, order: int, chart: str = ORIGIN, var: str = "z",
                check: bool = True) -> Germ1D:
    """Build a germ from a closed form, expanding the jet to `order`."""
    e = fold_deep(_as_expr(expr))
    if chart == ORIGIN:
        jet = to_series1(e, order, var=var)
    else:
        origin = to_series1(reciprocal_transport(e, var), order + 2, var=var)
        jet = infinity_chart1(origin)
    return Germ1D(jet, expr=e, chart=chart, var=var, check=check)


class SkewGerm2D:
    """Skew product (z, w) -> (first(z), fiber(z, w)).

    `jet2` is always origin-chart coefficient data, even for a germ whose
    evaluator works at infinity; coefficient extraction happens there.
    """

    def __init__(self, first: Germ1D, fiber_expr,
                 jet2: TruncatedSeries2 | None, chart: str = ORIGIN,
                 check: bool = True):
        self.first = first
        self.fiber_expr = fold_deep(_as_expr(fiber_expr))
        self.jet2 = jet2
        self.chart = chart
        self._dfdw = diff(self.fiber_expr, "w")
        if first.chart != chart:
            raise ChartMismatch(
                f"base chart {first.chart!r} vs product {chart!r}")
        if chart == ORIGIN:
            if jet2 is None:
                raise WrongForm("origin-chart product needs its jet2")
            if abs(jet2.coeff(0, 0)) > 1e-12:
                raise NonvanishingConstant(
                    f"fiber does not fix 0: constant {jet2.coeff(0, 0)}")
            c01 = jet2.coeff(0, 1)
            c10 = jet2.coeff(1, 0)
            if abs(c01 - 1) > 1e-12 or abs(c10) > 1e-12:
                raise NotTangentToIdentity(
                    f"fiber derivative at 0 is {c10} dz + {c01} dw")
        if check and chart == ORIGIN:
            self._check_agreement()

    def _check_agreement(self) -> None:
        for t in _CHECK_ANGLES:
            zz = 1e-3 * np.exp(1j * t)
            ww = 1e-3 * np.exp(1j * (t + 0.83))
            a = self.fiber(zz, ww)
            b = self.jet2.eval(zz, ww)
            if abs(a - b) > 1e-6 * max(abs(a), 1e-30):
                raise WrongForm(
                    f"fiber and jet disagree at ({zz}, {ww}): {a} vs {b}")

    # Scalar or numpy-array arguments both work here.
    def fiber(self, z, w):
        return _num_eval(self.fiber_expr, {"z": z, "w": w})

    def fiber_dw(self, z, w):
        return _num_eval(self._dfdw, {"z": z, "w": w})

    @property
    def a2(self) -> complex:
        return self.first.jet.coeff(2)

    @property
    def b2(self) -> complex:
        return self.jet2.coeff(0, 2)

    def evaluate(self, p: Point2) -> Point2:
        if p.chart != self.chart:
            raise ChartMismatch(
                f"point in chart {p.chart!r}, germ in {self.chart!r}")
        z1 = self.first(p.z)
        w1 = self.fiber(p.z, p.w)
        if not (_finite(z1) and _finite(w1)):
            raise NonFiniteValue(f"evaluation at {p.as_tuple()}")
        return Point2(z1, w1, self.chart)

    def __call__(self, p: Point2) -> Point2:
        return self.evaluate(p)

    def local_inverse(self, p: Point2, guess: Point2 | None = None) -> Point2:
        """Solve evaluate(q) = p, base coordinate first, then the fiber."""
        if p.chart != self.chart:
            raise ChartMismatch(
                f"point in chart {p.chart!r}, germ in {self.chart!r}")
        if guess is None:
            if self.chart == ORIGIN:
                guess = p
            else:
                guess = Point2(p.z - 1, p.w - 1, self.chart)
        z0 = self.first.local_inverse(p.z, guess.z)
        w0 = guess.w
        tol = max(1e-12, 4 * np.finfo(float).eps * abs(p.w))
        bound = 1e8 * max(1.0, abs(w0))
        for _ in range(50):
            r = self.fiber(z0, w0) - p.w
            if abs(r) <= tol:
                return Point2(z0, w0, self.chart)
            d = self.fiber_dw(z0, w0)
            if d == 0 or not _finite(d):
                raise NewtonDiverged("flat fiber derivative", last_value=w0)
            w0 = w0 - r / d
            if abs(w0) > bound:
                raise NewtonDiverged("left the local region", last_value=w0)
        raise NewtonDiverged(
            f"fiber inversion stalled at {p.as_tuple()}", last_value=w0)


def make_skew_germ(lam, fiber, order: int, check: bool = True) -> SkewGerm2D:
    """Origin-chart skew product from closed forms for base and fiber."""
    lam_e = fold_deep(_as_expr(lam))
    fib_e = fold_deep(_as_expr(fiber))
    first = make_germ1d(lam_e, order, chart=ORIGIN, check=check)
    jet2 = to_series2(fib_e, order)
    return SkewGerm2D(first, fib_e, jet2, chart=ORIGIN, check=check)


def _is_exact_translation(expr: Expr) -> bool:
    p, q = as_rational_poly2(expr)
    shift = {}
    for (j, k), c in q.items():
        for (dj, dc) in ((1, c), (0, c)):
            key = (j + dj, k)
            s = shift.get(key, 0j) + dc
            if s == 0:
                shift.pop(key, None)
            else:
                shift[key] = s
    return poly_eq(p, shift, tol=1e-14)


def to_infinity(germ: SkewGerm2D) -> SkewGerm2D:
    """Transport an origin skew product to the chart at infinity.

    Requires the quadratic coefficients of base and fiber to already be -1;
    the result's base then looks like u + 1 + O(1/u) and its fiber like
    v + 1 + O(1/u, 1/v). The origin-chart jet2 is carried along unchanged.
    """
    if germ.chart != ORIGIN:
        raise ChartMismatch("already at infinity")
    if abs(germ.a2 + 1) > 1e-12 or abs(germ.b2 + 1) > 1e-12:
        raise NotNormalized(
            f"need quadratic coefficients -1, got a2={germ.a2}, "
            f"b2={germ.b2}")
    inv = Const(1)
    base_e = fold_deep(
        inv / subst(germ.first.expr, {"z": inv / Z}))
    base_jet = infinity_chart1(germ.first.jet)
    if _is_exact_translation(base_e):
        # The transported base is u + 1 on the nose; keep the jet exact
        # so downstream consumers can recognize that and iterate exactly.
        base_e = fold_deep(Z + Const(1))
        base_jet = TruncatedSeries1(
            [1] + [0] * base_jet.order, INFINITY)
    base = Germ1D(base_jet, expr=base_e, chart=INFINITY, check=True)
    fib_e = fold_deep(
        inv / subst(germ.fiber_expr, {"z": inv / Z, "w": inv / Var("w")}))
    return SkewGerm2D(base, fib_e, germ.jet2, chart=INFINITY, check=False)


def to_origin(germ: SkewGerm2D) -> SkewGerm2D:
    """Transport an infinity-chart skew product back to the origin chart.

    Inverse of to_infinity: conjugating by the reciprocal chart twice is the
    identity, and the round trip recovers the original evaluator.
    """
    if germ.chart != INFINITY:
        raise ChartMismatch("already at the origin")
    base_e = reciprocal_transport(germ.first.expr, "z")
    base_jet = origin_chart1(germ.first.jet)
    base = Germ1D(base_jet, expr=base_e, chart=ORIGIN, check=True)

    body = subst(germ.fiber_expr,
                 {"z": Const(1) / Z, "w": Const(1) / Var("w")})
    p, q = as_rational_poly2(body)
    if not p:
        raise WrongForm("reciprocal of the zero map")
    p, q = _strip_common_powers(p, q)
    fib_e = fold_deep(poly2_to_expr(q) / poly2_to_expr(p))
    jet2 = germ.jet2
    if jet2 is None:
        jet2 = to_series2(fib_e, base_jet.order)
    return SkewGerm2D(base, fib_e, jet2, chart=ORIGIN, check=True)


def fiber_limit_map(germ: SkewGerm2D, order: int | None = None) -> Germ1D:
    """Limit of the fiber maps as the base coordinate runs to infinity.

    Works chart-side: the fiber expression is put in rational normal form
    P(u, v)/Q(u, v) and the limit is the ratio of the top u-degree slices.
    Equal top degrees are required; anything else means the fiber does not
    settle and the product is of the wrong shape.
    """
    if germ.chart != INFINITY:
        raise ChartMismatch("fiber limit is taken at infinity")
    p, q = as_rational_poly2(germ.fiber_expr)
    if not p or not q:
        raise WrongForm("degenerate fiber expression")
    dp = max(j for (j, _) in p)
    dq = max(j for (j, _) in q)
    if dp != dq:
        raise WrongForm(
            f"fiber has no finite limit (degrees {dp} over {dq})")
    top_p = {(0, k): c for (j, k), c in p.items() if j == dp}
    top_q = {(0, k): c for (j, k), c in q.items() if j == dq}
    expr = fold_deep(
        poly2_to_expr(top_p) / poly2_to_expr(top_q))
    expr = fold_deep(subst(expr, {"w": Z}))
    if order is None:
        if germ.jet2 is not None:
            order = germ.jet2.order
        else:
            order = germ.first.jet.order + 2
    return make_germ1d(expr, order, chart=INFINITY, var="z")
