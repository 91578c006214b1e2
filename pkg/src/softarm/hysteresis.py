"""Bouc-Wen hysteresis force per actuator (exponent one)."""

from dataclasses import dataclass

import numpy as np

RATE_DRIVEN = "rate"
LITERAL = "literal"
MODES = (RATE_DRIVEN, LITERAL)


@dataclass(frozen=True)
class BoucWenParams:
    alpha: float = 23.705
    beta: float = 1.7267
    gamma: float = -42.593
    mode: str = RATE_DRIVEN

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"hysteresis mode must be one of {MODES}, got {self.mode!r}")


def hysteresis_rate(h, l, ldot, coeffs=BoucWenParams()):
    """dh/dt = f * [alpha - (beta sgn(ldot h) + gamma) |h|].

    ``f`` is the actuator velocity in rate-driven mode and the actuator
    displacement in literal mode.
    """
    h = np.asarray(h, dtype=float)
    ldot = np.asarray(ldot, dtype=float)
    lead = ldot if coeffs.mode == RATE_DRIVEN else np.asarray(l, dtype=float)
    return lead * (coeffs.alpha - (coeffs.beta * np.sign(ldot * h) + coeffs.gamma) * np.abs(h))
