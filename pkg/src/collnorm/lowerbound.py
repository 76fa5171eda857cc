"""Hard-instance constructions and desk-scale indistinguishability experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist import ExplicitDistribution, exact_l2_sq
from .oracle import derive_seed, make_rng

LAMBDAS = (2, 6, 8, 10)
# {X : |lam X + lam^2| < 5} for each lam; pairwise disjoint
LAMBDA_INTERVALS = {
    2: (-9 / 2, 1 / 2),
    6: (-41 / 6, -31 / 6),
    8: (-69 / 8, -59 / 8),
    10: (-21 / 2, -19 / 2),
}
MAX_EXACT_PAIRS = 20


class PreconditionError(ValueError):
    pass


def build_skewed_perturbation(d: ExplicitDistribution, eps: float) -> ExplicitDistribution:
    """Move 10 eps ||mu||_2 mass from the heaviest element to a fresh label.

    Needs an element of mass >= ||mu||_2 / 8. The result is 10 eps ||mu||_2
    away in TV yet has collision norm below (1 - 9 eps / 4) ||mu||_2^2.
    """
    if not 0 < eps <= 1 / 500:
        raise PreconditionError("eps must lie in (0, 1/500]")
    norm = math.sqrt(exact_l2_sq(d))
    a = int(np.argmax(d.masses))
    if d.masses[a] < norm / 8:
        raise PreconditionError("no element with mass >= ||mu||_2 / 8")
    shift = 10 * eps * norm
    if shift > d.masses[a]:
        raise PreconditionError("10 eps ||mu||_2 exceeds the heavy mass")
    masses = np.append(d.masses, shift)
    masses[a] -= shift
    fresh = int(d.labels.max()) + 1
    return ExplicitDistribution(np.append(d.labels, fresh), masses)


def check_pairing(d: ExplicitDistribution, tol: float = 1e-15) -> None:
    m = d.masses
    if m.size % 2:
        raise PreconditionError("pairing needs an even number of entries")
    odd, even = m[0::2], m[1::2]
    if np.any(even > odd + tol) or np.any(odd > math.sqrt(2) * even + tol):
        raise PreconditionError("pairs must satisfy mu(2j) <= mu(2j-1) <= sqrt(2) mu(2j)")


def _pair_terms(base: ExplicitDistribution, eps: float) -> tuple[np.ndarray, float]:
    """Per-pair weights w_j = mu(2j)(mu(2j) - mu(2j-1)) / (sqrt(eps) ||mu||^2)."""
    odd, even = base.masses[0::2], base.masses[1::2]
    return even * (even - odd) / (math.sqrt(eps) * exact_l2_sq(base)), exact_l2_sq(base)


def _all_sign_sums(w: np.ndarray) -> np.ndarray:
    sums = np.zeros(1)
    for x in w:
        sums = np.concatenate([sums + x, sums - x])
    return sums


def lambda_probabilities(base: ExplicitDistribution, eps: float, mode: str = "exact",
                         samples: int = 100_000, seed: int = 0) -> dict[int, float]:
    """Pr[|lam X + lam^2| >= 5] for each candidate lam, over uniform random signs."""
    check_pairing(base)
    w, _ = _pair_terms(base, eps)
    if mode == "exact":
        if w.size > MAX_EXACT_PAIRS:
            raise PreconditionError(f"exact mode enumerates 2^J sign vectors; J={w.size} > {MAX_EXACT_PAIRS}")
        x = _all_sign_sums(w)
    elif mode == "monte_carlo":
        signs = make_rng(seed).choice(np.array([-1.0, 1.0]), size=(samples, w.size))
        x = signs @ w
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return {lam: float(np.mean(np.abs(lam * x + lam * lam) >= 5)) for lam in LAMBDAS}


def ensemble_select_lambda(base: ExplicitDistribution, eps: float, mode: str = "exact",
                           samples: int = 100_000, seed: int = 0) -> int:
    """The lam in {2, 6, 8, 10} most likely to push |lam X + lam^2| to 5 or more."""
    probs = lambda_probabilities(base, eps, mode, samples, seed)
    return max(LAMBDAS, key=lambda lam: (probs[lam], -lam))


@dataclass
class PerturbationEnsemble:
    """nu(i) = mu(i) -+ s_j eps_hat mu(2j) on pair j, with eps_hat = lam sqrt(eps)."""

    base: ExplicitDistribution
    eps: float
    lam: int | None = None
    _probs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        check_pairing(self.base)
        if not 0 < self.eps:
            raise PreconditionError("eps must be positive")
        if self.lam is None:
            mode = "exact" if self.pairs <= MAX_EXACT_PAIRS else "monte_carlo"
            self._probs = lambda_probabilities(self.base, self.eps, mode)
            self.lam = max(LAMBDAS, key=lambda lam: (self._probs[lam], -lam))
        if self.lam not in LAMBDAS:
            raise PreconditionError("lam must be one of 2, 6, 8, 10")
        if self.eps_hat > 1:
            raise PreconditionError("lam sqrt(eps) must be at most 1")

    @property
    def pairs(self) -> int:
        return self.base.n // 2

    @property
    def eps_hat(self) -> float:
        return self.lam * math.sqrt(self.eps)

    def masses_for(self, signs: np.ndarray) -> np.ndarray:
        shift = np.asarray(signs, dtype=float) * self.eps_hat * self.base.masses[1::2]
        m = self.base.masses.copy()
        m[0::2] -= shift
        m[1::2] += shift
        return m

    def nu(self, signs: np.ndarray) -> ExplicitDistribution:
        m = self.masses_for(signs)
        assert np.all(m >= 0)
        return ExplicitDistribution(self.base.labels, m)

    def signs(self, seed: int) -> np.ndarray:
        return make_rng(seed).choice(np.array([-1, 1]), size=self.pairs)

    def draw(self, seed: int) -> tuple[np.ndarray, ExplicitDistribution]:
        s = self.signs(seed)
        return s, self.nu(s)

    def l2_shift(self, signs: np.ndarray) -> float:
        """||nu||^2 - ||mu||^2 = 2 eps_hat sum s_j mu(2j)(mu(2j) - mu(2j-1)) + 2 eps_hat^2 sum mu(2j)^2."""
        odd, even = self.base.masses[0::2], self.base.masses[1::2]
        e = self.eps_hat
        return 2 * e * math.fsum((np.asarray(signs) * even * (even - odd)).tolist()) + 2 * e * e * math.fsum((even ** 2).tolist())


def ensemble_draw(e: PerturbationEnsemble, seed: int) -> ExplicitDistribution:
    return e.draw(seed)[1]


def deviates(e: PerturbationEnsemble, l2_nu: float) -> bool:
    """||nu||^2 outside (1 +- 5 eps/2) ||mu||^2."""
    l2 = exact_l2_sq(e.base)
    return abs(l2_nu - l2) > 2.5 * e.eps * l2


def deviation_probability_exact(e: PerturbationEnsemble) -> float:
    """Exact deviation probability over all 2^J sign vectors."""
    if e.pairs > MAX_EXACT_PAIRS:
        raise PreconditionError("too many pairs to enumerate")
    odd, even = e.base.masses[0::2], e.base.masses[1::2]
    x = _all_sign_sums(even * (even - odd))
    shift = 2 * e.eps_hat * x + 2 * e.eps_hat ** 2 * math.fsum((even ** 2).tolist())
    return float(np.mean(np.abs(shift) > 2.5 * e.eps * exact_l2_sq(e.base)))


@dataclass
class DeviationRow:
    trial: int
    seed: int
    lam: int
    l2_nu: float
    deviates: bool


def deviation_rows(e: PerturbationEnsemble, trials: int, seed: int) -> list[DeviationRow]:
    rows = []
    for i in range(trials):
        s = derive_seed(seed, i)
        nu = ensemble_draw(e, s)
        val = exact_l2_sq(nu)
        rows.append(DeviationRow(i, s, e.lam, val, deviates(e, val)))
    return rows


def deviation_experiment(e: PerturbationEnsemble, trials: int, seed: int) -> float:
    """Fraction of drawn nu whose collision norm leaves (1 +- 5 eps/2) ||mu||^2."""
    if e.eps > 1 / 8000:
        raise PreconditionError("deviation experiment needs eps <= 1/8000")
    rows = deviation_rows(e, trials, seed)
    return sum(r.deviates for r in rows) / trials


@dataclass
class ReducedInstance:
    """mu split into a pairing-compatible part A and erased elements B1, B2."""

    source: ExplicitDistribution
    a_labels: np.ndarray
    b1_labels: np.ndarray
    b2_labels: np.ndarray

    def _mass(self, labels, power: int = 1) -> float:
        m = self.source.masses[np.isin(self.source.labels, labels)]
        return math.fsum((m ** power).tolist())

    @property
    def base(self) -> ExplicitDistribution:
        """mu conditioned on A, pairs kept in descending order."""
        order = {x: i for i, x in enumerate(self.source.labels.tolist())}
        idx = np.array([order[x] for x in self.a_labels.tolist()], dtype=np.int64)
        return ExplicitDistribution.from_weights(self.source.masses[idx], self.a_labels)

    @property
    def mass_a(self) -> float:
        return self._mass(self.a_labels)

    def checks(self) -> dict[str, bool]:
        l2 = exact_l2_sq(self.source)
        return {
            "b1_squares": self._mass(self.b1_labels, 2) <= l2 / 32,
            "b2_squares": self._mass(self.b2_labels, 2) <= l2 / 64,
            "a_squares": self._mass(self.a_labels, 2) >= 15 / 16 * l2,
            "a_mass": self.mass_a >= 1 / 4,
        }

    def compose(self, nu_a: ExplicitDistribution) -> ExplicitDistribution:
        """mu(A) nu_A + mu restricted to the erased elements."""
        rest = ~np.isin(self.source.labels, self.a_labels)
        labels = np.concatenate([nu_a.labels, self.source.labels[rest]])
        masses = np.concatenate([self.mass_a * nu_a.masses, self.source.masses[rest]])
        return ExplicitDistribution.from_weights(masses, labels)


def pair_and_reduce(d: ExplicitDistribution) -> ReducedInstance:
    """Pair consecutive elements by descending mass and erase pairs that are too uneven.

    B1 holds odd positions i with mu(i) > sqrt(2) mu(i+1), B2 their partners.
    Needs every mass below ||mu||_2 / 8.
    """
    norm = math.sqrt(exact_l2_sq(d))
    if np.any(d.masses >= norm / 8):
        raise PreconditionError("an element has mass >= ||mu||_2 / 8; use build_skewed_perturbation")
    order = np.argsort(-d.masses, kind="stable")
    m = d.masses[order]
    labels = d.labels[order]
    if m.size % 2:
        m = np.append(m, 0.0)
        labels = np.append(labels, int(d.labels.max()) + 1)
    odd, even = m[0::2], m[1::2]
    bad = odd > math.sqrt(2) * even
    pair_bad = np.repeat(bad, 2)
    a = labels[~pair_bad]
    b1 = labels[0::2][bad]
    b2 = labels[1::2][bad]
    known = set(d.labels.tolist())
    b2 = np.array([x for x in b2.tolist() if x in known], dtype=np.int64)
    return ReducedInstance(d, a, b1, b2)


@dataclass
class DistinguishReport:
    q: float
    trials: int
    success: float
    advantage: float
    sigma: float
    threshold: float
    budget_limit: float
    distinguisher: str
    mode: str


def lower_bound_budget(mu: ExplicitDistribution, eps: float, scale: float = 1.0) -> float:
    """q = scale / (10^4 eps ||mu||_2): below it no test beats advantage 1/12."""
    return scale / (1e4 * eps * math.sqrt(exact_l2_sq(mu)))


def _counts(rng, masses: np.ndarray, q: float, mode: str) -> np.ndarray:
    if mode == "poisson":
        return rng.poisson(q * masses)
    if mode == "fixed":
        return rng.multinomial(int(round(q)), masses)
    raise ValueError(f"unknown mode {mode!r}")


def _collision_stat(counts: np.ndarray, l2: float) -> float:
    n = int(counts.sum())
    if n < 2:
        return 0.0
    s = float(np.sum(counts * (counts - 1) / 2))
    return s / math.comb(n, 2) - l2


def _likelihood_stat(counts: np.ndarray, e: PerturbationEnsemble, q: float) -> float:
    """log of E_s[P_nu(counts)] / P_mu(counts) under Poisson sampling."""
    odd, even = counts[0::2].astype(float), counts[1::2].astype(float)
    mu_odd, mu_even = e.base.masses[0::2], e.base.masses[1::2]
    d = e.eps_hat * mu_even
    with np.errstate(divide="ignore"):
        plus = odd * np.log1p(-d / mu_odd) + even * np.log1p(d / mu_even)
        minus = odd * np.log1p(d / mu_odd) + even * np.log1p(-d / mu_even)
    return float(np.sum(np.logaddexp(plus, minus) - math.log(2)))


def distinguish_experiment(mu: ExplicitDistribution, ensemble: PerturbationEnsemble, q: float,
                           trials: int, seed: int, mode: str = "poisson",
                           distinguisher: str = "collision", scale: float = 1.0) -> DistinguishReport:
    """Empirical success of a fixed test telling mu apart from a random nu.

    Half of the trials sample from mu, half from a fresh nu of the ensemble;
    the test sees only the q sample counts (odd ``trials`` is rounded up). ``collision`` thresholds
    |S/C(n,2) - ||mu||^2|, with the threshold tuned on a separate calibration
    batch; ``likelihood`` is the Bayes-optimal rule for Poisson sampling.
    """
    if mu.n > 1000:
        raise PreconditionError("distinguishing experiments are for domains of at most 1000 labels")
    if not np.array_equal(mu.labels, ensemble.base.labels):
        raise PreconditionError("mu must be the ensemble base")
    l2 = exact_l2_sq(mu)
    trials += trials % 2

    def stats(tag: int, n: int) -> tuple[np.ndarray, np.ndarray]:
        rng = make_rng(derive_seed(seed, tag))
        truth = np.arange(n) % 2
        out = np.empty(n)
        for i in range(n):
            masses = mu.masses if truth[i] == 0 else ensemble.masses_for(ensemble.signs(derive_seed(seed, tag, i)))
            c = _counts(rng, masses, q, mode)
            if distinguisher == "collision":
                out[i] = abs(_collision_stat(c, l2))
            elif distinguisher == "likelihood":
                out[i] = _likelihood_stat(c, ensemble, q)
            else:
                raise ValueError(f"unknown distinguisher {distinguisher!r}")
        return out, truth

    if distinguisher == "collision":
        cal, cal_truth = stats(1, trials)
        cands = np.unique(np.concatenate([[0.0], cal]))
        score = [np.mean((cal > tau) == (cal_truth == 1)) for tau in cands]
        tau = float(cands[int(np.argmax(score))])
    else:
        tau = 0.0
    val, truth = stats(2, trials)
    success = float(np.mean((val > tau) == (truth == 1)))
    return DistinguishReport(q=q, trials=trials, success=success, advantage=success - 0.5,
                             sigma=math.sqrt(max(success * (1 - success), 1e-300) / trials), threshold=tau,
                             budget_limit=lower_bound_budget(mu, ensemble.eps, scale),
                             distinguisher=distinguisher, mode=mode)

