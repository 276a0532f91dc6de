"""Shared builders for randomized election states.

Everything takes an explicit numpy Generator so each test controls its
own seed; nothing here touches global RNG state.
"""

from __future__ import annotations

from decimal import Decimal

import numpy as np

from decent_meter import DailyProduction, DailySnapshot, EngineConfig, make_snapshot
from decent_meter.fixedpoint import from_micro


def build_random_state(
    rng: np.random.Generator,
    max_accounts: int = 40,
    committee_size: int = 21,
    acyclic: bool = False,
    max_chain: int = 8,
    min_candidates: int = 1,
):
    """Random power/votes/proxy/candidates tables (not yet a snapshot).

    acyclic=True restricts proxy edges to lower-index targets with a
    bounded chain length, so resolved voters are always well-defined and
    a test may insert one extra hop without hitting the depth limit.
    With acyclic=False arbitrary edges (including cycles) may appear.
    """
    lo = max(2, min_candidates)
    n = int(rng.integers(lo, max(lo + 1, max_accounts + 1)))
    accounts = [f"a{i:03d}" for i in range(n)]
    powers = {a: from_micro(int(rng.integers(0, 1_000_000_001))) for a in accounts}
    n_cand = int(rng.integers(min_candidates, max(min_candidates, n // 2) + 1))
    n_cand = min(n_cand, n)
    cand_idx = rng.choice(n, size=n_cand, replace=False)
    candidates = {accounts[int(i)] for i in cand_idx}
    votes: dict[str, set[str]] = {}
    proxy: dict[str, str] = {}
    depth = {a: 0 for a in accounts}
    cand_list = sorted(candidates)
    for i, account in enumerate(accounts):
        roll = rng.random()
        if roll < 0.25 and n > 1:
            if acyclic:
                options = [j for j in range(i) if depth[accounts[j]] < max_chain]
                if not options:
                    continue
                target = accounts[int(rng.choice(options))]
                depth[account] = depth[target] + 1
            else:
                others = [a for a in accounts if a != account]
                target = others[int(rng.integers(0, len(others)))]
            proxy[account] = target
        elif roll < 0.75:
            k = int(rng.integers(1, min(5, len(cand_list)) + 1))
            picks = rng.choice(len(cand_list), size=k, replace=False)
            votes[account] = {cand_list[int(j)] for j in picks}
    return powers, votes, proxy, candidates


def build_random_snapshot(
    rng: np.random.Generator,
    day: int = 0,
    committee_size: int = 21,
    **kwargs,
) -> DailySnapshot:
    powers, votes, proxy, candidates = build_random_state(
        rng, committee_size=committee_size, **kwargs
    )
    cfg = EngineConfig(committee_size=committee_size)
    return make_snapshot(day, powers, votes, proxy, candidates, cfg)


def build_random_production(
    rng: np.random.Generator, snapshot: DailySnapshot, ghost_prob: float = 0.1
) -> DailyProduction:
    """Block counts for a random subset of registered candidates, plus an
    occasional unregistered producer to exercise the residual path."""
    produced: dict[str, Decimal] = {}
    for candidate in sorted(snapshot.candidates):
        if rng.random() < 0.7:
            produced[candidate] = from_micro(int(rng.integers(0, 100_000_001)))
    if rng.random() < ghost_prob:
        produced["zz.ghost"] = from_micro(int(rng.integers(1, 100_000_001)))
    return DailyProduction(day=snapshot.day, produced=produced)


def seat_attackers(snapshot: DailySnapshot, seats: int, power: Decimal, cfg: EngineConfig) -> int:
    """Simulate a fresh attacker holding `power` who registers `seats` new
    candidates and votes for all of them; count how many get seated.

    Attacker ids start with 'zz' so they sort after every generated id
    and lose weight ties, which is the worst case for the attacker.
    """
    attacker = "zz.attacker"
    attacker_candidates = [f"zz.cand-{i:02d}" for i in range(seats)]
    powers = dict(snapshot.power)
    powers[attacker] = power
    votes = {a: set(s) for a, s in snapshot.votes.items()}
    votes[attacker] = set(attacker_candidates)
    candidates = set(snapshot.candidates) | set(attacker_candidates)
    staged = make_snapshot(snapshot.day, powers, votes, dict(snapshot.proxy), candidates, cfg)
    seated = {c for c, _ in staged.committee}
    return sum(1 for c in attacker_candidates if c in seated)
