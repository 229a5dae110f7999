"""Reduction of a parabolic skew product to its working normal form.

Three stages, each returning a new germ plus the conjugacy chain that links
it to the input: rescale so both quadratic coefficients are -1, kill the low
pure-z and z^k w fiber coefficients with polynomial shears and fiber
scalings, and (after transport to infinity) read off the two log-shear
parameters that cancel the 1/u and 1/v tails.

The zw and z^2 coefficients are genuinely different: no fiber-preserving
polynomial change removes them independently (the one shear that reaches
them has a single parameter for the pair), so they are required to vanish
up front and rejected otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ChainDomainError,
    ChartMismatch,
    DegenerateQuadratic,
    NewtonDiverged,
    NotNormalized,
    OrderTooLargeForJet,
    WrongForm,
)
from .expressions import Const, Pow, W, Z, fold_deep, subst, to_series2
from .germs import Germ1D, Point2, SkewGerm2D, make_germ1d
from .series import INFINITY, ORIGIN, TruncatedSeries2

DEFAULT_M = 4
MAX_M = 10


class BranchedLog:
    """log with the branch cut rotated to point away from a given center.

    Values have imaginary part within pi of the center angle, so sectors
    around that direction see a single-valued, continuous branch.  The
    branch is pinned when the object is built; evaluation refuses points
    more than 3pi/4 away from the center, which is how a long orbit that
    silently drifts across the cut gets caught instead of producing a
    2*pi*i jump.
    """

    __slots__ = ("center",)

    _DOMAIN = 0.75 * np.pi + 1e-9

    def __init__(self, center: float = 0.0):
        self.center = float(center)

    def __call__(self, xi):
        rot = np.exp(-1j * self.center)
        rel = np.angle(np.asarray(xi) * rot)
        if np.any(np.abs(rel) > self._DOMAIN):
            raise ChainDomainError(
                f"argument left the log branch centered at {self.center:g}")
        return np.log(xi * rot) + 1j * self.center

    def __repr__(self):
        return f"BranchedLog(center={self.center})"


# ----------------------------------------------------------------- steps


@dataclass(frozen=True)
class Scaling:
    """(z, w) -> (s z, t w)."""

    s: complex
    t: complex

    def forward(self, p: Point2) -> Point2:
        return Point2(self.s * p.z, self.t * p.w, p.chart)

    def inverse(self, p: Point2) -> Point2:
        return Point2(p.z / self.s, p.w / self.t, p.chart)

    def describe(self) -> str:
        return f"scale(s={self.s}, t={self.t})"


@dataclass(frozen=True)
class Shear:
    """(z, w) -> (z, w + c z^k)."""

    c: complex
    k: int

    def forward(self, p: Point2) -> Point2:
        return Point2(p.z, p.w + self.c * p.z**self.k, p.chart)

    def inverse(self, p: Point2) -> Point2:
        return Point2(p.z, p.w - self.c * p.z**self.k, p.chart)

    def describe(self) -> str:
        return f"shear(w -> w + {self.c} z^{self.k})"


@dataclass(frozen=True)
class FiberScale:
    """(z, w) -> (z, w (1 + c z^k))."""

    c: complex
    k: int

    def forward(self, p: Point2) -> Point2:
        return Point2(p.z, p.w * (1 + self.c * p.z**self.k), p.chart)

    def inverse(self, p: Point2) -> Point2:
        return Point2(p.z, p.w / (1 + self.c * p.z**self.k), p.chart)

    def describe(self) -> str:
        return f"fiber_scale(w -> w (1 + {self.c} z^{self.k}))"


@dataclass(frozen=True)
class Inversion:
    """(z, w) -> (1/z, 1/w), flipping the chart tag."""

    def _flip(self, p: Point2) -> Point2:
        chart = INFINITY if p.chart == ORIGIN else ORIGIN
        return Point2(1 / p.z, 1 / p.w, chart)

    forward = _flip
    inverse = _flip

    def describe(self) -> str:
        return "inversion"


@dataclass(frozen=True)
class Translation:
    """(u, v) -> (u + a, v + b)."""

    a: complex
    b: complex

    def forward(self, p: Point2) -> Point2:
        return Point2(p.z + self.a, p.w + self.b, p.chart)

    def inverse(self, p: Point2) -> Point2:
        return Point2(p.z - self.a, p.w - self.b, p.chart)

    def describe(self) -> str:
        return f"translate({self.a}, {self.b})"


def _newton_log_free(target, alpha, log, guess, label):
    """Solve x + alpha log(x) = target."""
    x = guess
    for _ in range(60):
        r = x + alpha * log(x) - target
        if abs(r) <= 1e-12 * max(1.0, abs(target)):
            return x
        x = x - r / (1 + alpha / x)
    raise NewtonDiverged(f"{label} inversion stalled", last_value=x)


@dataclass(frozen=True)
class LogCorrection:
    """One coordinate gets xi -> xi + alpha log(xi); the other is kept."""

    alpha: complex
    coord: str = "w"
    log: BranchedLog = field(default_factory=BranchedLog)

    def _apply(self, p: Point2, sign: int) -> Point2:
        if self.alpha == 0:
            return p
        if self.coord == "z":
            if sign > 0:
                return Point2(p.z + self.alpha * self.log(p.z), p.w, p.chart)
            z = _newton_log_free(p.z, self.alpha, self.log, p.z, "L")
            return Point2(z, p.w, p.chart)
        if sign > 0:
            return Point2(p.z, p.w + self.alpha * self.log(p.w), p.chart)
        w = _newton_log_free(p.w, self.alpha, self.log, p.w, "L")
        return Point2(p.z, w, p.chart)

    def forward(self, p: Point2) -> Point2:
        return self._apply(p, +1)

    def inverse(self, p: Point2) -> Point2:
        return self._apply(p, -1)

    def describe(self) -> str:
        return f"log_correction(alpha={self.alpha}, coord={self.coord})"


@dataclass(frozen=True)
class LogShear:
    """(u, v) -> (u, v + alpha log u + beta log v)."""

    alpha: complex
    beta: complex
    log_u: BranchedLog = field(default_factory=BranchedLog)
    log_v: BranchedLog = field(default_factory=BranchedLog)

    def forward(self, p: Point2) -> Point2:
        v = p.w
        if self.alpha != 0:
            v = v + self.alpha * self.log_u(p.z)
        if self.beta != 0:
            v = v + self.beta * self.log_v(p.w)
        return Point2(p.z, v, p.chart)

    def inverse(self, p: Point2) -> Point2:
        target = p.w
        if self.alpha != 0:
            target = target - self.alpha * self.log_u(p.z)
        if self.beta == 0:
            return Point2(p.z, target, p.chart)
        w = _newton_log_free(target, self.beta, self.log_v, p.w, "theta")
        return Point2(p.z, w, p.chart)

    def describe(self) -> str:
        return f"log_shear(alpha={self.alpha}, beta={self.beta})"


class CallableStep:
    """A coordinate change given by opaque forward/inverse callables.

    Wraps the one-dimensional conjugations whose only representation is
    numeric (a Fatou coordinate and its Newton inverse) acting on one
    coordinate of the pair.
    """

    __slots__ = ("fwd", "inv", "coord", "label")

    def __init__(self, fwd, inv, coord: str = "z", label: str = "psi"):
        self.fwd = fwd
        self.inv = inv
        self.coord = coord
        self.label = label

    def _apply(self, p: Point2, f) -> Point2:
        if self.coord == "z":
            return Point2(f(p.z), p.w, p.chart)
        return Point2(p.z, f(p.w), p.chart)

    def forward(self, p: Point2) -> Point2:
        return self._apply(p, self.fwd)

    def inverse(self, p: Point2) -> Point2:
        return self._apply(p, self.inv)

    def describe(self) -> str:
        return f"{self.label}({self.coord})"


# ----------------------------------------------------------------- chains


@dataclass(frozen=True)
class ConjugacyChain:
    """Composite coordinate change, stored in application order.

    forward maps a point in the final (most-conjugated) coordinates back to
    the original ones: steps[0] is applied first. A germ pair (F, F') with
    chain C satisfies F'(p) = C^{-1}(F(C(p))) on the chain's domain.
    """

    steps: tuple = ()
    domain: object | None = None

    def forward(self, p: Point2) -> Point2:
        for s in self.steps:
            p = s.forward(p)
        return p

    def inverse(self, p: Point2) -> Point2:
        for s in reversed(self.steps):
            p = s.inverse(p)
        return p

    def prepend(self, step) -> "ConjugacyChain":
        """Record one more conjugation applied after the existing ones."""
        return ConjugacyChain((step,) + self.steps, self.domain)

    def describe(self) -> str:
        if not self.steps:
            return "identity"
        return " ; ".join(s.describe() for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


def compose_chains(later: ConjugacyChain,
                   earlier: ConjugacyChain) -> ConjugacyChain:
    """Chain for conjugations applied in two rounds.

    `earlier` links the intermediate germ to the original, `later` links the
    final germ to the intermediate one.
    """
    return ConjugacyChain(later.steps + earlier.steps,
                          later.domain or earlier.domain)


@dataclass(frozen=True)
class LogShearParams:
    alpha: complex
    beta: complex


# ------------------------------------------------------- quadratic rescale


def normalize_quadratic(
        F: SkewGerm2D) -> tuple[SkewGerm2D, ConjugacyChain]:
    """Rescale coordinates so both quadratic coefficients become -1."""
    if F.chart != ORIGIN:
        raise ChartMismatch("normalization happens in the origin chart")
    a2, b2 = F.a2, F.b2
    if abs(a2) < 1e-13 or abs(b2) < 1e-13:
        raise DegenerateQuadratic(
            f"quadratic coefficients a2={a2}, b2={b2} must be nonzero")
    if abs(a2 + 1) <= 1e-12 and abs(b2 + 1) <= 1e-12:
        return F, ConjugacyChain()
    s = -1 / a2
    t = -1 / b2
    lam_e = fold_deep(
        subst(F.first.expr, {"z": Const(s) * Z}) * Const(1 / s))
    fib_e = fold_deep(
        subst(F.fiber_expr, {"z": Const(s) * Z, "w": Const(t) * W})
        * Const(1 / t))
    first = make_germ1d(lam_e, F.first.jet.order, chart=ORIGIN)
    jet2 = to_series2(fib_e, F.jet2.order)
    out = SkewGerm2D(first, fib_e, jet2, chart=ORIGIN)
    return out, ConjugacyChain((Scaling(s, t),))


# --------------------------------------------------------- order raising


def _elimination_targets(M: int) -> list[tuple[int, int]]:
    """Fiber-jet indices to kill, ascending degree, pure before cross."""
    out = []
    for d in range(3, M + 1):
        if d <= M - 1:
            out.append((d, 0))
        if 2 <= d - 1 <= M - 1:
            out.append((d - 1, 1))
    return out


def _apply_fiber_step(F: SkewGerm2D, step) -> SkewGerm2D:
    """Conjugate F by a shear or fiber scaling, rebuilding expr and jet."""
    lam_e = F.first.expr
    if isinstance(step, Shear):
        mono = Const(step.c) * Pow(Z, step.k)
        fib = subst(F.fiber_expr, {"w": W + mono})
        fib = fib - Const(step.c) * Pow(lam_e, step.k)
    else:
        factor = Const(1) + Const(step.c) * Pow(Z, step.k)
        lam_factor = Const(1) + Const(step.c) * Pow(lam_e, step.k)
        fib = subst(F.fiber_expr, {"w": W * factor}) / lam_factor
    fib = fold_deep(fib)
    jet2 = to_series2(fib, F.jet2.order)
    return SkewGerm2D(F.first, fib, jet2, chart=ORIGIN, check=False)


def _zeroed(jet2: TruncatedSeries2, j: int, k: int) -> TruncatedSeries2:
    arr = np.array(jet2.coeffs)
    arr[j, k] = 0
    return TruncatedSeries2(arr, jet2.order)


def raise_order(F: SkewGerm2D, M: int = DEFAULT_M
                ) -> tuple[SkewGerm2D, ConjugacyChain]:
    """Remove fiber-jet terms below the degree-M pattern.

    After success, the second-coordinate jet has zero coefficients on pure
    z^k for 2 <= k < M and on z^k w for 1 <= k < M, exactly (the solved
    entries are snapped once their residual clears 1e-12). Each eliminated
    coefficient costs one shear (pure terms) or one fiber scaling (cross
    terms); the target coefficient is affine in the step parameter, which
    probe evaluations at c=0 and c=1 pin down.
    """
    if F.chart != ORIGIN:
        raise ChartMismatch("raise_order works in the origin chart")
    if not 2 <= M <= MAX_M:
        raise ValueError(f"M must be in [2, {MAX_M}]")
    if abs(F.a2 + 1) > 1e-12 or abs(F.b2 + 1) > 1e-12:
        raise NotNormalized("normalize_quadratic must run first")
    if F.jet2.order < 2 * M + 4:
        raise OrderTooLargeForJet(
            f"need jet order >= {2 * M + 4}, have {F.jet2.order}")
    for (j, k), name in (((1, 1), "z w"), ((2, 0), "z^2")):
        if abs(F.jet2.coeff(j, k)) > 1e-12:
            raise WrongForm(
                f"the {name} coefficient ({F.jet2.coeff(j, k)}) is not "
                "removable by fiber-preserving polynomial changes and "
                "must vanish in the input")

    targets = _elimination_targets(M)
    if all(abs(F.jet2.coeff(j, k)) <= 1e-12 for j, k in targets):
        return F, ConjugacyChain()

    cur = F
    chain = ConjugacyChain()
    for j, k in targets:
        g0 = cur.jet2.coeff(j, k)
        scale = max(1.0, abs(g0))
        if abs(g0) <= 1e-13:
            if g0 != 0:
                cur = SkewGerm2D(cur.first, cur.fiber_expr,
                                 _zeroed(cur.jet2, j, k),
                                 chart=ORIGIN, check=False)
            continue
        if k == 0:
            make = lambda c: Shear(c, j - 1)  # noqa: E731
        else:
            make = lambda c: FiberScale(c, j - 1)  # noqa: E731
        g1 = _apply_fiber_step(cur, make(1.0)).jet2.coeff(j, k)
        slope = g1 - g0
        if slope == 0:
            raise WrongForm(f"coefficient z^{j} w^{k} does not respond "
                            "to its elimination step")
        c_star = -g0 / slope
        nxt = _apply_fiber_step(cur, make(c_star))
        for _ in range(3):
            g = nxt.jet2.coeff(j, k)
            if abs(g) <= 1e-12 * scale:
                break
            c_star = c_star - g / slope
            nxt = _apply_fiber_step(cur, make(c_star))
        if abs(nxt.jet2.coeff(j, k)) > 1e-12 * scale:
            raise WrongForm(
                f"elimination of z^{j} w^{k} did not converge")
        cur = SkewGerm2D(nxt.first, nxt.fiber_expr,
                         _zeroed(nxt.jet2, j, k), chart=ORIGIN, check=False)
        chain = chain.prepend(make(c_star))

    # final agreement check between the rebuilt evaluator and snapped jet
    cur = SkewGerm2D(cur.first, cur.fiber_expr, cur.jet2, chart=ORIGIN)
    return cur, chain


# ------------------------------------------------------ parameter readout


def extract_alpha(g: Germ1D) -> complex:
    """The 1/w coefficient of an infinity-chart germ w + 1 + alpha/w + ..."""
    if g.chart != INFINITY:
        raise ChartMismatch("extract_alpha reads infinity-chart jets")
    if abs(g.jet.coeff(0) - 1) > 1e-12:
        raise WrongForm(
            f"translation part is {g.jet.coeff(0)}, expected 1")
    return g.jet.coeff(1)


def _laurent_of_fiber(jet2: TruncatedSeries2, wmax: int) -> dict:
    """Weight-truncated expansion of 1/f(1/u, 1/v) at infinity.

    Keys (j, m) stand for u^-j v^-m (m < 0 meaning positive powers of v);
    the weight is j + m. Writing f = y (1 + E) with x = 1/u, y = 1/v and E
    collecting every jet term but the leading y (pure-x terms enter as
    x^j v), the reciprocal is v times a finite geometric series in E, since
    tangency makes every E entry carry weight >= 1.
    """
    E: dict = {}
    n = jet2.order
    for j in range(n + 1):
        for k in range(n + 1 - j):
            c = jet2.coeff(j, k)
            if c == 0 or (j, k) == (0, 1):
                continue
            key = (j, k - 1)
            if key[0] + key[1] > wmax:
                continue
            E[key] = E.get(key, 0j) + c

    def mul(A: dict, B: dict) -> dict:
        out: dict = {}
        for (j1, m1), c1 in A.items():
            for (j2, m2), c2 in B.items():
                if j1 + j2 + m1 + m2 > wmax:
                    continue
                key = (j1 + j2, m1 + m2)
                out[key] = out.get(key, 0j) + c1 * c2
        return out

    neg = {k: -c for k, c in E.items()}
    total = {(0, 0): 1 + 0j}
    term = {(0, 0): 1 + 0j}
    for _ in range(wmax + 3):
        term = mul(term, neg)
        if not term:
            break
        for key, c in term.items():
            total[key] = total.get(key, 0j) + c
    return {(j, m - 1): c for (j, m), c in total.items()}


def solve_log_shear(Gj: SkewGerm2D) -> LogShearParams:
    """Read the two linear tail coefficients of the fiber at infinity.

    The fiber must look like v + 1 + alpha/u + beta/v + (weight >= 2): the
    returned parameters are exactly the coefficients a log shear needs to
    cancel. Any other monomial of weight <= 1 in the expansion (v/u from a
    zw term, v/u^2 from z^2 w, and so on) means the product is not in the
    required shape.
    """
    if Gj.chart != INFINITY:
        raise ChartMismatch("solve_log_shear works at infinity")
    if Gj.jet2 is None:
        raise WrongForm("needs origin-chart jet data for the fiber")
    lau = _laurent_of_fiber(Gj.jet2, wmax=2)
    lead = lau.get((0, -1), 0j)
    const = lau.get((0, 0), 0j)
    if abs(lead - 1) > 1e-12 or abs(const - 1) > 1e-12:
        raise WrongForm(
            f"fiber at infinity starts {lead} v + {const}, expected v + 1")
    for (j, m), c in lau.items():
        if (j, m) in ((0, -1), (0, 0), (1, 0), (0, 1)):
            continue
        if j + m <= 1 and abs(c) > 1e-12:
            raise WrongForm(
                f"unexpected weight-{j + m} term u^-{j} v^-{m} "
                f"(coefficient {c}) in the fiber expansion")
    return LogShearParams(lau.get((1, 0), 0j), lau.get((0, 1), 0j))
