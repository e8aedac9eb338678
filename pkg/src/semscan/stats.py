"""2x2 contingency statistics for the condition comparison.

Pearson chi-square without continuity correction, with the 1-dof p-value
from the closed-form survival function (erfc of sqrt(stat/2)) rather than
a stats-library dependency, and the odds ratio with the Haldane-Anscombe
+0.5 correction when a denominator cell is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError


def chi_square_2x2(a: float, b: float, c: float, d: float) -> tuple[float, float]:
    """Pearson statistic and p-value for the table [[a, b], [c, d]]."""
    if min(a, b, c, d) < 0:
        raise InputError("contingency counts must be nonnegative")
    n = a + b + c + d
    marginals = ((a + b), (c + d), (a + c), (b + d))
    if any(m == 0 for m in marginals):
        raise InputError(f"chi-square undefined: zero marginal in [[{a},{b}],[{c},{d}]]")
    statistic = n * (a * d - b * c) ** 2 / (marginals[0] * marginals[1] * marginals[2] * marginals[3])
    return statistic, chi_square_p_value(statistic)


def chi_square_p_value(statistic: float, dof: int = 1) -> float:
    """Survival function of the chi-square distribution (1 dof only)."""
    if dof != 1:
        raise InputError("only 1 degree of freedom is supported")
    if statistic < 0:
        raise InputError("chi-square statistic must be nonnegative")
    return math.erfc(math.sqrt(statistic / 2.0))


@dataclass(frozen=True)
class OddsRatioResult:
    value: float
    corrected: bool  # Haldane-Anscombe +0.5 applied to every cell


def odds_ratio(a: float, b: float, c: float, d: float) -> OddsRatioResult:
    """(a*d)/(b*c); zero b or c triggers the +0.5 correction, flagged."""
    if min(a, b, c, d) < 0:
        raise InputError("contingency counts must be nonnegative")
    if b == 0 or c == 0:
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
        return OddsRatioResult(value=(a * d) / (b * c), corrected=True)
    return OddsRatioResult(value=(a * d) / (b * c), corrected=False)
