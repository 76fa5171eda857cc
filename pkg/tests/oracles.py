"""Independent reference computations used to derive expected values.

Nothing here imports the package's estimators; exact values use rationals,
collision counts use brute-force index scans.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def pairs_brute(stream) -> int:
    return sum(1 for i, j in itertools.combinations(range(len(stream)), 2) if stream[i] == stream[j])


def triples_brute(stream) -> int:
    return sum(
        1
        for i, j, k in itertools.combinations(range(len(stream)), 3)
        if stream[i] == stream[j] == stream[k]
    )


def l2_rational(masses) -> Fraction:
    return sum((Fraction(m) ** 2 for m in masses), Fraction(0))


def l3_rational(masses) -> Fraction:
    return sum((Fraction(m) ** 3 for m in masses), Fraction(0))


def t_rational(masses) -> Fraction:
    return l3_rational(masses) / l2_rational(masses) ** 2 - 1


def expected_triples_enumerated(masses, m: int) -> Fraction:
    """E[T_m] by enumerating every length-m outcome sequence."""
    masses = [Fraction(x) for x in masses]
    total = Fraction(0)
    for seq in itertools.product(range(len(masses)), repeat=m):
        p = math.prod((masses[i] for i in seq), start=Fraction(1))
        total += p * triples_brute(seq)
    return total


def amplification_copies(eta: float) -> int:
    return 1 if eta >= 1 / 3 else math.ceil(18 * math.log(1 / eta))


def base_m_raw(eps, eta, ell, r) -> float:
    """Unscaled base sample count, written out term by term."""
    term_norm = 10 ** 3 / (math.sqrt(eta) * eps * math.sqrt(ell))
    term_advice = 10 ** 6 * r / (eta * eps * eps)
    return (1 / math.sqrt(eta)) * max(term_norm, term_advice)


def sign_sum_table(weights) -> list[float]:
    """All 2^J signed sums by explicit product over sign vectors."""
    out = []
    for signs in itertools.product((1, -1), repeat=len(weights)):
        out.append(sum(s * w for s, w in zip(signs, weights)))
    return out


def binomial_lower(p: float, n: int, z: float = 2.326) -> float:
    return p - z * math.sqrt(p * (1 - p) / n)


def collision_scan(stream) -> tuple[int, int]:
    """(pairs, triples) from the equality matrix: a triple i<j<k collides iff x_i = x_j = x_k."""
    import numpy as np

    x = np.asarray(stream)
    upper = np.triu(x[:, None] == x[None, :], 1)
    after = upper.sum(axis=1)
    return int(upper.sum()), int((upper * after[None, :]).sum())
