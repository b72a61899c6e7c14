"""Combinatorial identity planning.

New virtual identities are minted from 9-identity subsets accepted by a
greedy first-fit scan over all C(N, 9) candidates in lexicographic order,
subject to a pairwise-overlap cap, then expanded 9x by circular shift.
The two resulting guarantees: every combination uses 9 distinct identities
(one block each), and any two combinations differ in at least 4 of their 9
position assignments.
"""

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import ConfigError

GRID_POSITIONS = 9


@dataclass(frozen=True)
class PlannerConfig:
    n_identities: int
    combination_length: int = 9   # M: one identity per grid position
    max_shared: int = 5           # K: overlap cap between accepted subsets

    def __post_init__(self):
        if self.combination_length != GRID_POSITIONS:
            raise ConfigError(
                f"combination length must be {GRID_POSITIONS} (3x3 grid), "
                f"got {self.combination_length}"
            )
        if not 0 <= self.max_shared < self.combination_length:
            raise ConfigError(f"need 0 <= K < M, got K={self.max_shared}")
        if self.n_identities < self.combination_length:
            raise ConfigError(
                f"need at least {self.combination_length} source identities, "
                f"got {self.n_identities}"
            )


@dataclass(frozen=True)
class IdentitySubset:
    """A sorted choice of M distinct identity indices, mirrored as a bitmask."""

    indices: tuple[int, ...]

    @property
    def mask(self) -> int:
        m = 0
        for i in self.indices:
            m |= 1 << i
        return m

    @classmethod
    def from_mask(cls, mask: int) -> "IdentitySubset":
        idx = []
        while mask:
            low = mask & -mask
            idx.append(low.bit_length() - 1)
            mask ^= low
        return cls(tuple(idx))


def duplicates(a: IdentitySubset, b: IdentitySubset) -> int:
    """Number of identities shared by two subsets (popcount of mask AND)."""
    return (a.mask & b.mask).bit_count()


def candidate_stream(n: int, m: int = 9) -> Iterator[IdentitySubset]:
    """All C(n, m) subsets in lexicographic order, generated lazily."""
    if n < m:
        raise ConfigError(f"need n >= m, got n={n} m={m}")
    for tup in itertools.combinations(range(n), m):
        yield IdentitySubset(tup)


def greedy_clique(candidates: Iterable[IdentitySubset], max_shared: int) -> list[IdentitySubset]:
    """First-fit greedy scan: accept a candidate iff it shares at most
    ``max_shared`` identities with every previously accepted subset.

    The accepted list is checked newest-first with an early exit, since in
    lexicographic order a candidate overlaps most with recent accepts.
    """
    accepted_masks: list[int] = []
    out: list[IdentitySubset] = []
    for cand in candidates:
        mask = cand.mask
        ok = True
        for acc in reversed(accepted_masks):
            if (mask & acc).bit_count() > max_shared:
                ok = False
                break
        if ok:
            accepted_masks.append(mask)
            out.append(cand)
    return out


def greedy_clique_lex(n: int, m: int = 9, max_shared: int = 5) -> list[IdentitySubset]:
    """Fast path for the lexicographic scan; output is identical to
    ``greedy_clique(candidate_stream(n, m), max_shared)``.

    Two accelerations, neither changing any accept/reject outcome:
    - prefix pruning: a partial subset already sharing more than K
      identities with an accepted subset cannot be completed into an
      acceptable candidate, so its whole lexicographic subtree is skipped;
    - the overlap scan checks the most recent accepts in Python with an
      early exit, then sweeps the older bulk with vectorized popcounts.
    """
    if n < m:
        raise ConfigError(f"need n >= m, got n={n} m={m}")
    if n > 64:
        # multi-word masks: Python ints keep exact semantics, no numpy mirror
        return greedy_clique(candidate_stream(n, m), max_shared)

    accepted: list[int] = []
    buf = np.zeros(4096, dtype=np.uint64)
    tail = 48

    def acceptable(mask: int) -> bool:
        n_acc = len(accepted)
        lo = max(0, n_acc - tail)
        for i in range(n_acc - 1, lo - 1, -1):
            if (mask & accepted[i]).bit_count() > max_shared:
                return False
        if lo and int(np.bitwise_count(buf[:lo] & np.uint64(mask)).max()) > max_shared:
            return False
        return True

    def extend(prefix_mask: int, start: int, depth: int) -> None:
        nonlocal buf
        for v in range(start, n - (m - depth) + 1):
            cand = prefix_mask | (1 << v)
            # overlap with a prefix of size <= K can never exceed K
            if depth + 1 > max_shared and not acceptable(cand):
                continue
            if depth + 1 == m:
                if len(accepted) == len(buf):
                    buf = np.resize(buf, 2 * len(buf))
                buf[len(accepted)] = cand
                accepted.append(cand)
            else:
                extend(cand, v + 1, depth + 1)

    extend(0, 0, 0)
    return [IdentitySubset.from_mask(mask) for mask in accepted]


@dataclass(frozen=True)
class Combination:
    """One synthetic identity: grid position j holds block j of identities[j]."""

    identities: tuple[int, ...]   # position (0-based) -> source identity
    subset: tuple[int, ...]       # provenance: the sorted accepted subset
    rotation: int

    def __post_init__(self):
        if len(self.identities) != GRID_POSITIONS:
            raise ConfigError(f"combination needs {GRID_POSITIONS} positions")
        if len(set(self.identities)) != GRID_POSITIONS:
            raise ConfigError("combination repeats an identity")


def rotations(subset: IdentitySubset) -> list[Combination]:
    """The 9 circular-shift combinations of a subset (consumed sorted)."""
    ids = subset.indices
    if len(ids) != GRID_POSITIONS:
        raise ConfigError(f"subset size {len(ids)} != {GRID_POSITIONS}")
    return [
        Combination(
            identities=tuple(ids[(j + r) % GRID_POSITIONS] for j in range(GRID_POSITIONS)),
            subset=ids,
            rotation=r,
        )
        for r in range(GRID_POSITIONS)
    ]


@dataclass(frozen=True)
class IdentityPlan:
    """Ordered combinations from the greedy clique, with provenance."""

    combinations: tuple[Combination, ...]
    n_identities: int
    max_shared: int
    clique_size: int

    def __len__(self) -> int:
        return len(self.combinations)


def plan(cfg: PlannerConfig) -> IdentityPlan:
    """Greedy clique over all candidates, then the 9 rotations of each accept."""
    clique = greedy_clique_lex(cfg.n_identities, cfg.combination_length, cfg.max_shared)
    combos = []
    for subset in clique:
        combos.extend(rotations(subset))
    return IdentityPlan(
        combinations=tuple(combos),
        n_identities=cfg.n_identities,
        max_shared=cfg.max_shared,
        clique_size=len(clique),
    )


@dataclass(frozen=True)
class PlanReport:
    ok: bool
    pairs_checked: int
    message: str
    first_violation: Optional[tuple[int, int]] = None


def verify_plan(p: IdentityPlan, min_position_diff: int = 4) -> PlanReport:
    """Brute-force re-check of the plan's distinctness guarantees.

    Independently of how the plan was built, verifies that every
    combination holds 9 distinct identities, that every pair of source
    subsets shares at most K identities, and that every pair of
    combinations differs in at least ``min_position_diff`` of the 9
    position assignments (exhaustive pairwise scan).
    """
    combos = p.combinations
    for i, c in enumerate(combos):
        if len(set(c.identities)) != GRID_POSITIONS:
            return PlanReport(False, 0, f"combination {i} repeats an identity", (i, i))

    # overlap cap applies between distinct source subsets (rotations of one
    # subset share all 9 identities by construction)
    uniq_masks: list[int] = []
    first_combo: list[int] = []
    seen_masks: set[int] = set()
    for i, c in enumerate(combos):
        m = 0
        for v in c.subset:
            m |= 1 << v
        if m not in seen_masks:
            seen_masks.add(m)
            uniq_masks.append(m)
            first_combo.append(i)
    if len(uniq_masks) > 1 and p.n_identities <= 64:
        arr = np.array(uniq_masks, dtype=np.uint64)
        for a in range(len(arr) - 1):
            overlap = np.bitwise_count(arr[a + 1 :] & arr[a])
            bad = np.nonzero(overlap > p.max_shared)[0]
            if bad.size:
                i, j = first_combo[a], first_combo[a + 1 + int(bad[0])]
                return PlanReport(
                    False, 0,
                    f"subsets of combinations {i} and {j} share more than "
                    f"{p.max_shared} identities", (i, j),
                )
    else:
        for a in range(len(uniq_masks) - 1):
            for b in range(a + 1, len(uniq_masks)):
                if (uniq_masks[a] & uniq_masks[b]).bit_count() > p.max_shared:
                    i, j = first_combo[a], first_combo[b]
                    return PlanReport(
                        False, 0,
                        f"subsets of combinations {i} and {j} share more than "
                        f"{p.max_shared} identities", (i, j),
                    )

    if not combos:
        return PlanReport(True, 0, "empty plan")

    table = np.array([c.identities for c in combos], dtype=np.int32)
    pairs = 0
    for i in range(len(table) - 1):
        same = (table[i + 1 :] == table[i]).sum(axis=1)
        pairs += len(same)
        bad = np.nonzero(same > GRID_POSITIONS - min_position_diff)[0]
        if bad.size:
            j = i + 1 + int(bad[0])
            return PlanReport(
                False, pairs,
                f"combinations {i} and {j} agree in {int(same[bad[0]])} positions "
                f"(differ in fewer than {min_position_diff})", (i, j),
            )
    return PlanReport(True, pairs, f"all {pairs} pairs differ in >= {min_position_diff} positions")


def write_plan_jsonl(p: IdentityPlan, path) -> None:
    """One JSON record per combination; positions serialized 1-based."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for idx, c in enumerate(p.combinations):
            rec = {
                "plan_index": idx,
                "subset": list(c.subset),
                "rotation": c.rotation,
                "assignment": [[j + 1, ident] for j, ident in enumerate(c.identities)],
            }
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_plan_jsonl(path, n_identities: int, max_shared: int) -> IdentityPlan:
    combos = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            assignment = sorted(rec["assignment"])  # by 1-based position
            combos.append(
                Combination(
                    identities=tuple(ident for _, ident in assignment),
                    subset=tuple(rec["subset"]),
                    rotation=rec["rotation"],
                )
            )
    subsets = {c.subset for c in combos}
    return IdentityPlan(
        combinations=tuple(combos),
        n_identities=n_identities,
        max_shared=max_shared,
        clique_size=len(subsets),
    )
