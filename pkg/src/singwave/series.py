"""Truncated multivariate power series.

Two layers:

* ``XSeries`` -- a polynomial jet in the spatial variables around a base
  point, truncated at a total degree ``D``.  It is the coefficient object
  for everything else in the package (the surface function, its
  derivatives, every order of the regular part of a singular solution).
* ``SigmaSeries`` -- a truncated series in the transverse variable sigma
  with ``XSeries`` coefficients.  sigma is ``T = t - psi(x)`` for the
  logarithmic regimes and ``s = T^(1/m)`` for the fractional-power
  regime.

Coefficients are ordinary Python numbers.  ``float`` gives the default
double-precision mode; ``fractions.Fraction`` (or ``int``) coefficients
give the exact rational mode used by test oracles.  All operations are
pure and the objects are treated as immutable, so values can be shared
freely between threads and problems.

Truncation is silent: arithmetic never produces terms above the
truncation degree/order.  Each ``XSeries`` additionally tracks
``reliable_degree``, the degree through which its stored coefficients
are those of the exact underlying function (a partial derivative of a
degree-``D`` jet is only reliable through ``D - 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import CompatibilityError, DomainError, InputError, SingularDivisionError

#: A monomial exponent: one non-negative integer power per spatial variable.
Exponent = tuple
Scalar = Union[int, float, Fraction]


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction))


def _inv_scalar(value):
    """1/value, staying exact for int/Fraction inputs."""
    if _is_exact(value):
        return Fraction(1, 1) / Fraction(value)
    return 1.0 / value


def exact_fraction_sqrt(value: Fraction):
    """Square root of a non-negative Fraction if it is exactly rational, else None."""
    value = Fraction(value)
    if value < 0:
        return None
    ns = math.isqrt(value.numerator)
    ds = math.isqrt(value.denominator)
    if ns * ns == value.numerator and ds * ds == value.denominator:
        return Fraction(ns, ds)
    return None


@dataclass(frozen=True)
class SeriesContext:
    """Shared metadata of a family of compatible series: variable count,
    expansion center and total-degree truncation."""

    n: int
    base_point: tuple
    max_degree: int

    def __post_init__(self):
        if len(self.base_point) != self.n:
            raise InputError(f"base point has {len(self.base_point)} entries, expected {self.n}")
        if self.max_degree < 0:
            raise InputError("max_degree must be >= 0")

    # -- constructors ------------------------------------------------

    def zero(self) -> "XSeries":
        return XSeries(self, {})

    def constant(self, value: Scalar) -> "XSeries":
        return XSeries(self, {self.zero_exponent(): value})

    def variable(self, i: int, coeff: Scalar = 1) -> "XSeries":
        """The coordinate function x_i as a series around the base point."""
        if not 0 <= i < self.n:
            raise InputError(f"variable index {i} out of range for n={self.n}")
        e = tuple(1 if j == i else 0 for j in range(self.n))
        coeffs = {e: coeff}
        b = self.base_point[i]
        if b != 0:
            coeffs[self.zero_exponent()] = coeff * b
        return XSeries(self, coeffs)

    def from_coeffs(self, coeffs: dict) -> "XSeries":
        return XSeries(self, dict(coeffs))

    def zero_exponent(self) -> Exponent:
        return (0,) * self.n

    def exponents_of_degree(self, d: int) -> Iterable[Exponent]:
        """All exponent tuples of total degree exactly d."""

        def rec(k, rem):
            if k == 1:
                yield (rem,)
                return
            for first in range(rem + 1):
                for rest in rec(k - 1, rem - first):
                    yield (first,) + rest

        if self.n == 0:
            if d == 0:
                yield ()
            return
        yield from rec(self.n, d)


class XSeries:
    """Truncated multivariate power series in the spatial variables.

    ``coeffs`` maps exponent tuples to scalar coefficients; missing
    entries are zero.  Total degrees never exceed ``ctx.max_degree``.
    """

    __slots__ = ("ctx", "coeffs", "reliable_degree")

    def __init__(self, ctx: SeriesContext, coeffs: dict, reliable_degree: int | None = None):
        clean = {}
        for e, c in coeffs.items():
            if len(e) != ctx.n or any(p < 0 for p in e):
                raise InputError(f"bad exponent {e} for n={ctx.n}")
            if sum(e) > ctx.max_degree:
                raise InputError(
                    f"exponent {e} exceeds truncation degree {ctx.max_degree}"
                )
            if c != 0:
                clean[tuple(e)] = c
        self.ctx = ctx
        self.coeffs = clean
        self.reliable_degree = ctx.max_degree if reliable_degree is None else min(
            reliable_degree, ctx.max_degree
        )

    # -- metadata ----------------------------------------------------

    @property
    def n(self) -> int:
        return self.ctx.n

    @property
    def base_point(self) -> tuple:
        return self.ctx.base_point

    @property
    def max_degree(self) -> int:
        return self.ctx.max_degree

    def _check_compat(self, other: "XSeries"):
        if self.ctx != other.ctx:
            raise CompatibilityError(
                f"incompatible series contexts {self.ctx} vs {other.ctx}"
            )

    def _coerce(self, value) -> "XSeries":
        if isinstance(value, XSeries):
            self._check_compat(value)
            return value
        return self.ctx.constant(value)

    # -- ring arithmetic ----------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for e, c in sorted(other.coeffs.items()):
            s = out.get(e, 0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return XSeries(self.ctx, out, min(self.reliable_degree, other.reliable_degree))

    __radd__ = __add__

    def __neg__(self):
        return XSeries(self.ctx, {e: -c for e, c in self.coeffs.items()}, self.reliable_degree)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, XSeries):
            if other == 0:
                return self.ctx.zero()
            return XSeries(
                self.ctx, {e: c * other for e, c in self.coeffs.items()}, self.reliable_degree
            )
        self._check_compat(other)
        cap = self.ctx.max_degree
        out: dict = {}
        # sorted iteration keeps float accumulation order independent of
        # the operands' insertion order (determinism invariant)
        for e1, c1 in sorted(self.coeffs.items()):
            d1 = sum(e1)
            for e2, c2 in sorted(other.coeffs.items()):
                if d1 + sum(e2) > cap:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return XSeries(self.ctx, out, min(self.reliable_degree, other.reliable_degree))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, XSeries):
            return self * other.reciprocal()
        return self * _inv_scalar(other)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise InputError("powers must be non-negative integers")
        result = self.ctx.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- calculus -----------------------------------------------------

    def partial(self, i: int) -> "XSeries":
        """Formal partial derivative in variable i (0-based).

        The result is reliable one degree lower than the input: the
        degree-D sources of its degree-D coefficients were truncated.
        """
        if not 0 <= i < self.n:
            raise InputError(f"variable index {i} out of range for n={self.n}")
        out = {}
        for e, c in self.coeffs.items():
            if e[i] == 0:
                continue
            de = tuple(p - 1 if j == i else p for j, p in enumerate(e))
            out[de] = c * e[i]
        return XSeries(self.ctx, out, self.reliable_degree - 1)

    def reciprocal(self) -> "XSeries":
        """Multiplicative inverse as a truncated geometric series.

        Requires a nonzero constant term; a vanishing one signals
        division by a function that is zero on the expansion center
        (e.g. a characteristic surface).
        """
        c0 = self.coeffs.get(self.ctx.zero_exponent(), 0)
        if c0 == 0:
            raise SingularDivisionError("constant term vanishes; cannot invert series")
        inv0 = _inv_scalar(c0)
        # self = c0 (1 - q) with q of valuation >= 1
        q = self.ctx.constant(1) - self * inv0
        acc = self.ctx.constant(1)
        power = self.ctx.constant(1)
        for _ in range(self.ctx.max_degree):
            power = power * q
            if not power.coeffs:
                break
            acc = acc + power
        return (acc * inv0).with_reliable(self.reliable_degree)

    # -- evaluation and queries ----------------------------------------

    def eval(self, point: Sequence[Scalar]):
        """Evaluate the truncated polynomial at ``point`` (absolute
        coordinates), Horner-style variable by variable."""
        if len(point) != self.n:
            raise InputError(f"point has {len(point)} entries, expected {self.n}")
        local = tuple(p - b for p, b in zip(point, self.base_point))
        return _eval_grouped(sorted(self.coeffs.items()), local, self.n)

    def constant_term(self):
        return self.coeffs.get(self.ctx.zero_exponent(), 0)

    def max_abs(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(abs(c) for c in self.coeffs.values())

    def is_zero(self, tol: float = 0.0) -> bool:
        if tol == 0.0:
            return not self.coeffs
        return all(abs(c) <= tol for c in self.coeffs.values())

    def truncated(self, degree: int) -> "XSeries":
        return XSeries(
            self.ctx,
            {e: c for e, c in self.coeffs.items() if sum(e) <= degree},
            self.reliable_degree,
        )

    def up_to_reliable(self) -> "XSeries":
        return self.truncated(max(self.reliable_degree, -1))

    def with_reliable(self, degree: int) -> "XSeries":
        return XSeries(self.ctx, self.coeffs, degree)

    def map_coeffs(self, fn: Callable) -> "XSeries":
        return XSeries(self.ctx, {e: fn(c) for e, c in self.coeffs.items()}, self.reliable_degree)

    def __eq__(self, other):
        if not isinstance(other, XSeries):
            return NotImplemented
        return self.ctx == other.ctx and self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self):
        if not self.coeffs:
            return "XSeries(0)"
        terms = []
        for e, c in sorted(self.coeffs.items(), key=lambda item: (sum(item[0]), item[0])):
            mono = "*".join(f"dx{i}^{p}" for i, p in enumerate(e) if p)
            terms.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "XSeries(" + " + ".join(terms) + ")"


def _eval_grouped(items, local, n):
    """Horner-style evaluation: recurse over variables, Horner in each."""
    if not items:
        return 0
    if n == 0:
        return items[0][1]

    def rec(items, depth):
        if depth == n:
            return items[0][1]
        groups: dict = {}
        for e, c in items:
            groups.setdefault(e[depth], []).append((e, c))
        x = local[depth]
        value = 0
        prev_power = None
        for power in sorted(groups, reverse=True):
            if prev_power is None:
                value = rec(groups[power], depth + 1)
            else:
                for _ in range(prev_power - power):
                    value = value * x
                value = value + rec(groups[power], depth + 1)
            prev_power = power
        for _ in range(prev_power or 0):
            value = value * x
        return value

    return rec(items, 0)


# ----------------------------------------------------------------------
# sigma series
# ----------------------------------------------------------------------

KIND_T = "T"
KIND_S = "s"


class SigmaSeries:
    """Truncated series in the transverse variable sigma with XSeries
    coefficients.

    ``kind`` is ``"T"`` (sigma = T, logarithmic regimes, m == 1) or
    ``"s"`` (sigma = T^(1/m), fractional regime, m >= 2).  ``coeffs[k]``
    is the coefficient of sigma^k; the list may be shorter than
    ``max_order + 1``, missing entries are zero.
    """

    __slots__ = ("kind", "m", "max_order", "xctx", "coeffs")

    def __init__(self, kind: str, m: int, max_order: int, xctx: SeriesContext,
                 coeffs: Sequence[XSeries] = ()):
        if kind not in (KIND_T, KIND_S):
            raise InputError(f"unknown sigma kind {kind!r}")
        if kind == KIND_T and m != 1:
            raise InputError("kind 'T' requires m == 1")
        if kind == KIND_S and m < 2:
            raise InputError("kind 's' requires m >= 2")
        if max_order < 0:
            raise InputError("max_order must be >= 0")
        coeffs = list(coeffs)[: max_order + 1]
        for c in coeffs:
            if c.ctx != xctx:
                raise CompatibilityError("sigma coefficient over a different XSeries context")
        while coeffs and not coeffs[-1].coeffs:
            coeffs.pop()
        self.kind = kind
        self.m = m
        self.max_order = max_order
        self.xctx = xctx
        self.coeffs = tuple(coeffs)

    # -- constructors --------------------------------------------------

    @classmethod
    def zeros(cls, kind: str, m: int, max_order: int, xctx: SeriesContext) -> "SigmaSeries":
        return cls(kind, m, max_order, xctx, ())

    @classmethod
    def from_xseries(cls, xs: XSeries, kind: str, m: int, max_order: int) -> "SigmaSeries":
        return cls(kind, m, max_order, xs.ctx, (xs,))

    # -- helpers -------------------------------------------------------

    def _check_compat(self, other: "SigmaSeries"):
        if self.kind != other.kind or self.m != other.m:
            raise CompatibilityError(
                f"cannot mix sigma kinds {self.kind}(m={self.m}) and {other.kind}(m={other.m})"
            )
        if self.max_order != other.max_order or self.xctx != other.xctx:
            raise CompatibilityError("sigma series truncations or contexts differ")

    def coeff(self, k: int) -> XSeries:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.xctx.zero()

    def _coerce(self, value) -> "SigmaSeries":
        if isinstance(value, SigmaSeries):
            self._check_compat(value)
            return value
        if isinstance(value, XSeries):
            return SigmaSeries.from_xseries(value, self.kind, self.m, self.max_order)
        return SigmaSeries.from_xseries(
            self.xctx.constant(value), self.kind, self.m, self.max_order
        )

    def _like(self, coeffs) -> "SigmaSeries":
        return SigmaSeries(self.kind, self.m, self.max_order, self.xctx, coeffs)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        size = max(len(self.coeffs), len(other.coeffs))
        return self._like([self.coeff(k) + other.coeff(k) for k in range(size)])

    __radd__ = __add__

    def __neg__(self):
        return self._like([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        """Truncated convolution in sigma (or scaling by a scalar/XSeries)."""
        if not isinstance(other, SigmaSeries):
            if isinstance(other, XSeries):
                return self._like([c * other for c in self.coeffs])
            return self._like([c * other for c in self.coeffs])
        self._check_compat(other)
        size = min(self.max_order, len(self.coeffs) + len(other.coeffs) - 2) if self.coeffs and other.coeffs else -1
        out = [self.xctx.zero() for _ in range(size + 1)]
        for i, ci in enumerate(self.coeffs):
            if not ci.coeffs:
                continue
            for j, cj in enumerate(other.coeffs):
                if i + j > self.max_order:
                    break
                if not cj.coeffs:
                    continue
                out[i + j] = out[i + j] + ci * cj
        return self._like(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise InputError("powers must be non-negative integers")
        result = self._coerce(1)
        for _ in range(k):
            result = result * self
        return result

    def shift(self, j: int) -> "SigmaSeries":
        """Multiply by sigma^j (truncating above max_order)."""
        if j < 0:
            raise InputError("shift power must be >= 0")
        return self._like([self.xctx.zero()] * j + list(self.coeffs))

    def euler(self) -> "SigmaSeries":
        """Apply sigma * d/dsigma: coefficient k picks up a factor k."""
        return self._like([c * k for k, c in enumerate(self.coeffs)])

    def map_indexed(self, fn: Callable[[int, XSeries], XSeries]) -> "SigmaSeries":
        return self._like([fn(k, c) for k, c in enumerate(self.coeffs)])

    def deriv_sigma(self) -> "SigmaSeries":
        """d/dsigma.  The top stored order loses one reliable order, as
        with XSeries.partial; callers track this through max_order use."""
        return self._like([self.coeff(k + 1) * (k + 1) for k in range(len(self.coeffs))])

    def partial_x(self, i: int) -> "SigmaSeries":
        return self._like([c.partial(i) for c in self.coeffs])

    # -- evaluation -------------------------------------------------------

    def sigma_of(self, T_value):
        """The sigma value for a given T > 0 (positive real root for kind s)."""
        if T_value <= 0:
            raise DomainError("sigma series live on the side T = t - psi(x) > 0")
        if self.kind == KIND_T:
            return T_value
        if _is_exact(T_value):
            fr = Fraction(T_value)
            num = _exact_int_root(fr.numerator, self.m)
            den = _exact_int_root(fr.denominator, self.m)
            if num is not None and den is not None:
                return Fraction(num, den)
        return float(T_value) ** (1.0 / self.m)

    def eval(self, T_value, point):
        return self.eval_at_sigma(self.sigma_of(T_value), point)

    def eval_at_sigma(self, sigma, point):
        value = 0
        for c in reversed(self.coeffs):
            value = value * sigma + c.eval(point)
        return value

    def max_abs(self) -> float:
        return max((c.max_abs() for c in self.coeffs), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(c.is_zero(tol) for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, SigmaSeries):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.m == other.m
            and self.max_order == other.max_order
            and self.coeffs == other.coeffs
        )

    __hash__ = None

    def __repr__(self):
        return f"SigmaSeries[{self.kind},m={self.m},K={self.max_order}]({list(self.coeffs)!r})"


def _exact_int_root(value: int, m: int):
    if value < 0:
        return None
    root = round(value ** (1.0 / m))
    for candidate in (root - 1, root, root + 1):
        if candidate >= 0 and candidate**m == value:
            return candidate
    return None


# ----------------------------------------------------------------------
# free-function aliases for the core operations
# ----------------------------------------------------------------------


def xs_arith(a: XSeries, b: XSeries, op: str) -> XSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise InputError(f"unknown op {op!r}")


def xs_reciprocal(a: XSeries) -> XSeries:
    return a.reciprocal()


def xs_partial(a: XSeries, i: int) -> XSeries:
    return a.partial(i)


def xs_eval(a: XSeries, point):
    return a.eval(point)


def sigma_arith(a: SigmaSeries, b, op: str, j: int = 1) -> SigmaSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "shift_by_power":
        return a.shift(j)
    raise InputError(f"unknown op {op!r}")


def sigma_eval(a: SigmaSeries, T_value, x_point):
    return a.eval(T_value, x_point)
