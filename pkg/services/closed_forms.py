"""
Printed closed forms for the golden-rule coefficients R_{j,mn,p} and the
interconversion amplitudes D_{m,j,k}.

Entries are transcribed as published, including their channel labels, so the
table verifier can compare them with numerically built matrix elements. Each
entry is a list of (channel q, coefficient) terms; a channel may repeat.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

Term = Tuple[int, Callable[["Angles"], float]]


@dataclass(frozen=True)
class Angles:
    """Field inclination Θ and the two mixing angles."""

    big_theta: float
    theta1: float
    theta2: float

    @property
    def sT(self) -> float:
        return math.sin(self.big_theta)

    @property
    def cT(self) -> float:
        return math.cos(self.big_theta)

    @property
    def s1(self) -> float:
        return math.sin(self.theta1 / 2.0)

    @property
    def c1(self) -> float:
        return math.cos(self.theta1 / 2.0)

    @property
    def S1(self) -> float:
        return math.sin(self.theta1)

    @property
    def s2(self) -> float:
        return math.sin(self.theta2 / 2.0)

    @property
    def c2(self) -> float:
        return math.cos(self.theta2 / 2.0)

    @property
    def S2(self) -> float:
        return math.sin(self.theta2)


# ==========================================
# GOLDEN-RULE COEFFICIENTS R_{j,mn,p}
# ==========================================

def _cos2(a: Angles) -> float:
    return a.cT ** 2


def _sin2(a: Angles) -> float:
    return a.sT ** 2


def _scaled(prefactor: Callable[[Angles], float], terms: List[Term]) -> List[Term]:
    return [(q, (lambda a, f=f: prefactor(a) * f(a))) for q, f in terms]


RATE_TABLE: Dict[Tuple[int, int], List[Term]] = {
    (1, 21): _scaled(_cos2, [
        (2, lambda a: a.s2 ** 4),
        (3, lambda a: a.c2 ** 4),
        (5, lambda a: a.s1 ** 4),
        (9, lambda a: a.c1 ** 4),
    ]),
    (1, 22): _scaled(lambda a: 0.25 * _sin2(a), [
        (6, lambda a: a.s1 ** 4 * a.S2 ** 2),
        (7, lambda a: a.s1 ** 4 * a.S2 ** 2),
        (10, lambda a: a.c1 ** 4 * a.S2 ** 2),
        (11, lambda a: a.c1 ** 4 * a.S2 ** 2),
    ]),
    (1, 23): _scaled(lambda a: 0.25 * _sin2(a), [
        (6, lambda a: a.S1 ** 2 * a.s2 ** 4),
        (7, lambda a: a.S1 ** 2 * a.c2 ** 4),
        (10, lambda a: a.S1 ** 2 * a.s2 ** 4),
        (11, lambda a: a.S1 ** 2 * a.c2 ** 4),
    ]),
    (1, 24): [],
    (2, 21): _scaled(_sin2, [
        (2, lambda a: a.c2 ** 2 * a.s2 ** 2),
        (3, lambda a: a.s2 ** 2 * a.c2 ** 2),
    ]),
    (2, 22): _scaled(_cos2, [
        (4, lambda a: 1.0),
        (6, lambda a: a.s1 ** 4 * a.c2 ** 4),
        (7, lambda a: a.s1 ** 4 * a.s2 ** 4),
        (10, lambda a: a.c1 ** 4 * a.c2 ** 4),
        (11, lambda a: a.c1 ** 4 * a.s2 ** 4),
    ]),
    (2, 23): _scaled(lambda a: _cos2(a) / 16.0, [
        (6, lambda a: a.S1 ** 2 * a.S2 ** 2),
        (7, lambda a: a.S1 ** 2 * a.S2 ** 2),
        (10, lambda a: a.S1 ** 2 * a.S2 ** 2),
        (11, lambda a: a.S1 ** 2 * a.S2 ** 2),
    ]),
    (2, 24): _scaled(_sin2, [
        (8, lambda a: a.s1 ** 2 * a.c1 ** 2),
        (12, lambda a: a.c1 ** 2 * a.s1 ** 2),
    ]),
    (3, 21): _scaled(_sin2, [
        (5, lambda a: a.s1 ** 2 * a.c1 ** 2),
        (9, lambda a: a.s1 ** 2 * a.c1 ** 2),
    ]),
    (3, 22): _scaled(lambda a: _cos2(a) / 16.0, [
        (6, lambda a: a.S1 ** 2 * a.S2 ** 2),
        (7, lambda a: a.S1 ** 2 * a.S2 ** 2),
        (10, lambda a: a.S1 ** 2 * a.S2 ** 2),
        (11, lambda a: a.S1 ** 2 * a.S2 ** 2),
    ]),
    (3, 23): _scaled(_cos2, [
        (11, lambda a: 1.0),
        (6, lambda a: a.c1 ** 4 * a.s2 ** 4),
        (7, lambda a: a.c1 ** 4 * a.c2 ** 4),
        (10, lambda a: a.s1 ** 4 * a.s2 ** 4),
        (11, lambda a: a.s1 ** 4 * a.c2 ** 4),
    ]),
    (3, 24): _scaled(_sin2, [
        (14, lambda a: a.s2 ** 2 * a.c2 ** 2),
        (15, lambda a: a.s2 ** 2 * a.c2 ** 2),
    ]),
    (4, 21): [],
    (4, 22): _scaled(lambda a: 0.25 * _sin2(a), [
        (6, lambda a: a.S1 ** 2 * a.c2 ** 4),
        (7, lambda a: a.S1 ** 2 * a.s2 ** 4),
        (10, lambda a: a.S1 ** 2 * a.c2 ** 4),
        (11, lambda a: a.S1 ** 2 * a.c2 ** 2),
    ]),
    (4, 23): _scaled(lambda a: 0.25 * _sin2(a), [
        (6, lambda a: a.c1 ** 4 * a.S2 ** 2),
        (7, lambda a: a.c1 ** 4 * a.S2 ** 2),
        (10, lambda a: a.s1 ** 4 * a.S2 ** 2),
        (11, lambda a: a.s1 ** 4 * a.S2 ** 2),
    ]),
    (4, 24): _scaled(_cos2, [
        (8, lambda a: a.c1 ** 4),
        (11, lambda a: a.s1 ** 4),
        (14, lambda a: a.c2 ** 4),
        (15, lambda a: a.s2 ** 2),
    ]),
}


# ==========================================
# INTERCONVERSION AMPLITUDES D_{m,j,k}
# ==========================================

def _half_cos(a: Angles) -> float:
    return 0.5 * a.cT


def _half_sin(a: Angles) -> float:
    return 0.5 * a.sT


CONVERSION_TABLE: Dict[Tuple[int, int], List[Term]] = {
    (1, 1): _scaled(_half_cos, [
        (2, lambda a: -a.s2 ** 2),
        (3, lambda a: -a.c2 ** 2),
        (5, lambda a: a.s1 ** 2),
        (9, lambda a: a.c1 ** 2),
    ]),
    (1, 2): _scaled(lambda a: 0.25 * a.sT, [
        (6, lambda a: -a.s1 ** 2 * a.S2),
        (7, lambda a: a.s1 ** 2 * a.S2),
        (10, lambda a: -a.c1 ** 2 * a.S2),
        (11, lambda a: a.c1 ** 2 * a.S2),
    ]),
    (1, 3): _scaled(lambda a: 0.25 * a.sT, [
        (6, lambda a: a.S1 * a.s2 ** 2),
        (7, lambda a: a.S1 * a.c2 ** 2),
        (10, lambda a: -a.S1 * a.s2 ** 2),
        (11, lambda a: -a.S1 * a.c2 ** 2),
    ]),
    (1, 4): [],
    (2, 1): _scaled(_half_sin, [
        (2, lambda a: -a.s2 * a.c2),
        (3, lambda a: a.c2 * a.s2),
    ]),
    (2, 2): _scaled(_half_cos, [
        (4, lambda a: -1.0),
        (6, lambda a: a.s1 ** 2 * a.c2 ** 2),
        (7, lambda a: a.s1 ** 2 * a.s2 ** 2),
        (10, lambda a: a.c1 ** 2 * a.c2 ** 2),
        (11, lambda a: a.c1 ** 2 * a.s2 ** 2),
    ]),
    (2, 3): _scaled(lambda a: a.cT / 8.0, [
        (6, lambda a: -a.S1 * a.S2),
        (7, lambda a: a.S1 * a.S2),
        (10, lambda a: a.S1 * a.S2),
        (11, lambda a: -a.S1 * a.S2),
    ]),
    (2, 4): _scaled(_half_sin, [
        (8, lambda a: a.c1 * a.s1),
        (12, lambda a: -a.s1 * a.c1),
    ]),
    (3, 1): _scaled(_half_sin, [
        (5, lambda a: a.s1 * a.c1),
        (9, lambda a: -a.c1 * a.s1),
    ]),
    (3, 2): _scaled(lambda a: a.cT / 8.0, [
        (6, lambda a: a.S1 * a.S2),
        (7, lambda a: -a.S1 * a.S2),
        (10, lambda a: -a.S1 * a.S2),
        (11, lambda a: a.S1 * a.S2),
    ]),
    (3, 3): _scaled(_half_cos, [
        (6, lambda a: -a.c1 ** 2 * a.s2 ** 2),
        (7, lambda a: -a.c1 ** 2 * a.c2 ** 2),
        (10, lambda a: -a.s1 ** 2 * a.s2 ** 2),
        (11, lambda a: -a.s1 ** 2 * a.c2 ** 2),
        (13, lambda a: 1.0),
    ]),
    (3, 4): _scaled(_half_sin, [
        (14, lambda a: -a.c2 * a.s2),
        (15, lambda a: a.s2 * a.c2),
    ]),
    (4, 1): [],
    (4, 2): _scaled(lambda a: 0.25 * a.sT, [
        (6, lambda a: a.S1 * a.c2 ** 2),
        (7, lambda a: a.S1 * a.s2 ** 2),
        (10, lambda a: -a.S1 * a.c2 ** 2),
        (11, lambda a: -a.S1 * a.s2 ** 2),
    ]),
    (4, 3): _scaled(lambda a: 0.25 * a.sT, [
        (6, lambda a: -a.c1 ** 2 * a.S2),
        (7, lambda a: a.c1 ** 2 * a.S2),
        (10, lambda a: -a.s1 ** 2 * a.S2),
        (11, lambda a: a.s1 ** 2 * a.S2),
    ]),
    (4, 4): _scaled(_half_cos, [
        (8, lambda a: -a.c1 ** 2),
        (12, lambda a: -a.s1 ** 2),
        (14, lambda a: a.c2 ** 2),
        (15, lambda a: a.s2 ** 2),
    ]),
}


def channel_coefficients(terms: List[Term], angles: Angles) -> Dict[int, float]:
    """Collapse a term list to {channel q: summed coefficient}."""
    out: Dict[int, float] = {}
    for q, coeff in terms:
        out[q] = out.get(q, 0.0) + coeff(angles)
    return out


def rate_coefficients(j: int, p_row: int, angles: Angles) -> Dict[int, float]:
    return channel_coefficients(RATE_TABLE[(j, p_row)], angles)


def conversion_coefficients(j: int, k: int, angles: Angles) -> Dict[int, float]:
    return channel_coefficients(CONVERSION_TABLE[(j, k)], angles)
