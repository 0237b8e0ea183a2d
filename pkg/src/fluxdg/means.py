"""Scalar mean values used by two-point volume fluxes.

All functions take plain floats and return floats; the batched module has
array versions. The logarithmic mean is the numerically delicate one: the
naive quotient cancels catastrophically for nearly equal arguments, so the
production versions switch to a truncated series once the squared normalized
jump u = ((a+ - a-)/(a+ + a-))^2 falls below SERIES_EPSILON.
"""

import math

from .errors import DomainError

# Branch threshold for 64-bit floats: series truncation error ~ u^4 stays
# below roundoff while the log quotient is still well conditioned above it.
SERIES_EPSILON = 1.0e-4


def arithmetic_mean(a_minus, a_plus):
    return 0.5 * (a_minus + a_plus)


def product_mean(a_minus, a_plus, b_minus, b_plus):
    """Mean of a product, {{a b}} = (a+ b- + a- b+)/2.

    Equals 2 {a}{b} - {ab}; keeping it in this form costs one multiplication
    less and is the form used inside the energy fluxes.
    """
    return 0.5 * (a_plus * b_minus + a_minus * b_plus)


def _check_positive(a_minus, a_plus):
    if a_minus <= 0.0 or a_plus <= 0.0:
        raise DomainError(
            "logarithmic mean needs positive arguments, got (%r, %r)" % (a_minus, a_plus)
        )


def logmean_reference(a_minus, a_plus):
    """Textbook quotient (a+ - a-)/(log a+ - log a-).

    No special casing: equal arguments are a domain error here. Only useful
    as a cross-check for well separated arguments.
    """
    _check_positive(a_minus, a_plus)
    if a_minus == a_plus:
        raise DomainError("logmean_reference is singular for equal arguments")
    return (a_plus - a_minus) / (math.log(a_plus) - math.log(a_minus))


def logmean_ismail_roe(a_minus, a_plus):
    """Log mean via the ratio xi = a-/a+ and F = log(xi)/2/f.

    Series branch for u = f^2 < SERIES_EPSILON with
    F = 1 + u/3 + u^2/5 + u^3/7.
    """
    _check_positive(a_minus, a_plus)
    xi = a_minus / a_plus
    f = (xi - 1.0) / (xi + 1.0)
    u = f * f
    if u < SERIES_EPSILON:
        big_f = 1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u * (1.0 / 7.0)))
    else:
        big_f = math.log(xi) / (2.0 * f)
    return (a_minus + a_plus) / (2.0 * big_f)


def logmean_optimized(a_minus, a_plus):
    """Division-minimal log mean.

    u is computed directly from the arguments (one division total in the
    series branch), and the log branch needs a single log and division.
    """
    _check_positive(a_minus, a_plus)
    u = (a_minus * (a_minus - 2.0 * a_plus) + a_plus * a_plus) / (
        a_minus * (a_minus + 2.0 * a_plus) + a_plus * a_plus
    )
    if u < SERIES_EPSILON:
        return (a_minus + a_plus) / (
            2.0 + u * (2.0 / 3.0 + u * (2.0 / 5.0 + u * (2.0 / 7.0)))
        )
    return (a_plus - a_minus) / math.log(a_plus / a_minus)


def logmean_reciprocal_series(a_minus, a_plus):
    """Variant of logmean_optimized with the series reciprocal expanded.

    Trades the series-branch division for a polynomial:
    (a- + a+) * (1/2 + u (-1/6 + u (-2/45 + u (-22/945)))).
    Not the default; kept for instruction-mix experiments.
    """
    _check_positive(a_minus, a_plus)
    u = (a_minus * (a_minus - 2.0 * a_plus) + a_plus * a_plus) / (
        a_minus * (a_minus + 2.0 * a_plus) + a_plus * a_plus
    )
    if u < SERIES_EPSILON:
        return (a_minus + a_plus) * (
            0.5 + u * (-1.0 / 6.0 + u * (-2.0 / 45.0 + u * (-22.0 / 945.0)))
        )
    return (a_plus - a_minus) / math.log(a_plus / a_minus)


def inv_logmean_optimized(a_minus, a_plus):
    """Reciprocal 1/logmean(a-, a+) without dividing by the mean.

    The energy flux needs the reciprocal of a log mean; computing it directly
    turns the series branch into (2 + u(...))/(a- + a+) and the log branch
    into log(a+/a-)/(a+ - a-).
    """
    _check_positive(a_minus, a_plus)
    u = (a_minus * (a_minus - 2.0 * a_plus) + a_plus * a_plus) / (
        a_minus * (a_minus + 2.0 * a_plus) + a_plus * a_plus
    )
    if u < SERIES_EPSILON:
        return (2.0 + u * (2.0 / 3.0 + u * (2.0 / 5.0 + u * (2.0 / 7.0)))) / (
            a_minus + a_plus
        )
    return math.log(a_plus / a_minus) / (a_plus - a_minus)
