"""In-process session simulation for statistical checks.

Simulation operates at the share level: the result d is (sum of shares)
mod index_space regardless of the surrounding crypto, so sampling shares
directly measures exactly the distributional claim while staying fast
enough for hundreds of thousands of trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import SpecError
from .weights import WeightedEligibleList


@dataclass
class AdversaryConfig:
    """Colluding stakeholders submit fixed shares instead of sampling."""

    colluders: int = 0
    fixed_shares: tuple[int, ...] = ()

    def collusion_sum(self) -> int:
        if self.colluders == 0:
            return 0
        shares = self.fixed_shares or (0,) * self.colluders
        if len(shares) != self.colluders:
            raise SpecError(
                f"{self.colluders} colluders but {len(shares)} fixed shares"
            )
        return sum(shares)


@dataclass
class SimulationResult:
    n_trials: int
    n_stakeholders: int
    index_space: int
    honest: int
    candidate_counts: dict[str, int]
    expected_probs: dict[str, float]
    index_counts: np.ndarray = field(repr=False)
    chi2_stat: float = float("nan")
    p_value: float = float("nan")
    all_colluding: bool = False

    def rows(self):
        """(candidate, count, empirical freq, expected prob, deviation in sigma)."""
        out = []
        for cand, count in self.candidate_counts.items():
            p = self.expected_probs[cand]
            sigma = (self.n_trials * p * (1 - p)) ** 0.5
            dev = (count - self.n_trials * p) / sigma if sigma > 0 else 0.0
            out.append((cand, count, count / self.n_trials, p, dev))
        return out


def simulate(
    eligible: WeightedEligibleList,
    n_stakeholders: int,
    n_trials: int,
    adversary: AdversaryConfig | None = None,
    seed: int | None = None,
) -> SimulationResult:
    """Run n_trials share-level sessions and tabulate the drawn candidates."""
    if n_stakeholders < 1:
        raise SpecError("need at least one stakeholder")
    adversary = adversary or AdversaryConfig()
    if adversary.colluders > n_stakeholders:
        raise SpecError("more colluders than stakeholders")
    honest = n_stakeholders - adversary.colluders
    n = eligible.index_space
    rng = np.random.default_rng(seed)
    offset = adversary.collusion_sum()
    if honest > 0:
        d = (rng.integers(0, n, size=(n_trials, honest), dtype=np.int64).sum(axis=1)
             + offset) % n
    else:
        d = np.full(n_trials, offset % n, dtype=np.int64)

    index_counts = np.bincount(d, minlength=n)
    cumulative = np.cumsum([w for _, w in eligible.entries])
    positions = np.searchsorted(cumulative, d, side="right")
    per_candidate = np.bincount(positions, minlength=len(eligible.entries))

    candidate_counts = {
        c.identifier: int(per_candidate[i]) for i, (c, _) in enumerate(eligible.entries)
    }
    expected_probs = {c.identifier: w / n for c, w in eligible.entries}

    expected_counts = np.array([w for _, w in eligible.entries], dtype=float)
    expected_counts = expected_counts / n * n_trials
    chi2, p = stats.chisquare(per_candidate, expected_counts)
    return SimulationResult(
        n_trials=n_trials,
        n_stakeholders=n_stakeholders,
        index_space=n,
        honest=honest,
        candidate_counts=candidate_counts,
        expected_probs=expected_probs,
        index_counts=index_counts,
        chi2_stat=float(chi2),
        p_value=float(p),
        all_colluding=honest == 0,
    )


def uniformity_pvalue(result: SimulationResult) -> float:
    """Chi-square p-value of the raw index distribution against uniform."""
    expected = np.full(result.index_space, result.n_trials / result.index_space)
    _, p = stats.chisquare(result.index_counts, expected)
    return float(p)
