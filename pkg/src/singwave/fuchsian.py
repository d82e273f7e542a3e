"""Order-by-order solution of the reduced equations.

The logarithmic-family divisor k(k+1) never vanishes for k >= 1, the
fractional divisor (k+m)(k+m+1) never vanishes for k >= 0, so one
direct pass determines every coefficient uniquely: the recursion is the
constructive content of the existence statements.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .reduction import (
    REGIME_FRACTIONAL,
    ReducedEquation,
    SingularSolution,
)
from .series import SigmaSeries, XSeries, _inv_scalar

DEFAULT_ORDER = 8


@dataclass
class RecursionSpec:
    """A reduced equation plus the data that selects one solution:
    the trace v0 on the surface (log family only) and the truncation
    order K.  Memory and time grow like K^2 times the square of the
    number of stored x-coefficients."""

    equation: ReducedEquation
    v0: XSeries | None = None
    K: int = DEFAULT_ORDER

    def __post_init__(self):
        eq = self.equation
        if eq.regime == REGIME_FRACTIONAL:
            if self.v0 is not None:
                raise InputError("the fractional regime has no free trace; leave v0 unset")
        else:
            if self.v0 is None:
                self.v0 = eq.xctx.zero()
            elif self.v0.ctx != eq.xctx:
                raise InputError("v0 lives over a different series context")
        if self.K > eq.max_order:
            raise InputError(
                f"requested order {self.K} exceeds the equation's truncation {eq.max_order}"
            )
        for k in range(eq.first_index, self.K + 1):
            assert eq.divisor(k) != 0, "recursion divisor vanished; invalid regime"


def shift_initial_data(spec: RecursionSpec) -> RecursionSpec:
    """Equivalent spec with zero trace: substituting v = v0 + w folds the
    trace into the evaluator, so solving the shifted spec for w and
    adding v0 back solves the original."""
    if spec.equation.regime == REGIME_FRACTIONAL:
        raise InputError("only the logarithmic family carries a trace")
    if spec.v0.is_zero():
        return spec
    v0 = spec.v0
    inner = spec.equation

    class _Shifted:
        regime = inner.regime
        first_index = inner.first_index
        max_order = inner.max_order
        xctx = inner.xctx

        @staticmethod
        def divisor(k):
            return inner.divisor(k)

        @staticmethod
        def rhs_slice(known):
            if not known:
                return inner.rhs_slice(known)
            return inner.rhs_slice([v0 + known[0]] + list(known[1:]))

    return RecursionSpec(equation=_Shifted(), v0=inner.xctx.zero(), K=spec.K)


def solve_recursion(spec: RecursionSpec) -> SigmaSeries:
    """All coefficients of v through order K.

    Logarithmic family: v_0 is the trace, v_k = rhs_slice(v_0..v_{k-1}) / (k(k+1)).
    Fractional regime:  v_k = rhs_slice(v_0..v_{k-1}) / ((k+m)(k+m+1)), from k = 0.
    """
    eq = spec.equation
    if eq.regime == REGIME_FRACTIONAL:
        coeffs: list[XSeries] = []
        for k in range(spec.K + 1):
            num = eq.rhs_slice(coeffs)
            coeffs.append(num * _inv_scalar(eq.divisor(k)))
        return SigmaSeries("s", eq.m, spec.K, eq.xctx, coeffs)

    shifted = shift_initial_data(spec)
    coeffs = [shifted.v0]
    for k in range(1, spec.K + 1):
        num = shifted.equation.rhs_slice(coeffs)
        coeffs.append(num * _inv_scalar(shifted.equation.divisor(k)))
    coeffs[0] = spec.v0
    return SigmaSeries("T", 1, spec.K, eq.xctx, coeffs)


def assemble_solution(spec: RecursionSpec, v: SigmaSeries,
                      f=None, surface: XSeries | None = None) -> SingularSolution:
    """Package the solved series with its surface and evaluators.

    ``surface`` overrides the equation's stored surface; the negative-side
    builder works with the reflected psi, but the assembled solution is
    expressed with the original one (its transverse variable is
    psi(x) - t)."""
    eq = spec.equation
    if surface is None:
        surface = eq.surface if eq.regime != "negative_side" else -eq.surface
    return SingularSolution(
        regime=eq.regime,
        a=eq.a,
        m=eq.m,
        surface=surface,
        v=v,
        v0=spec.v0,
        f=f,
    )
