"""Variation operators and the population update rule.

Every operator takes a population snapshot and a random stream and returns a
:class:`Batch` of child designs, each tagged with the index of the parent it
competes against. Operators never evaluate; the engine evaluates a batch and
hands it to :func:`population_update`, which merges children serially in
batch order.

Continuous values and discrete *indices* are treated together as the scalar
part of a design. Permutations are only touched by the permutation
operators (3-opt, combinatorial Lévy flight, inversion crossover, 2-opt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .levy import LevyParams, levy_sample, tlf_sample
from .problem import Evaluation, better, rank_key
from .space import DesignSpace, DesignVector

__all__ = [
    "PHI",
    "Batch",
    "OperatorFractions",
    "Population",
    "comb_levy_flight",
    "cont_levy_flight",
    "crossover",
    "disc_levy_flight",
    "inversion_crossover",
    "levy_flights",
    "link",
    "mutation",
    "population_update",
    "reflect_index",
    "scatter_search",
    "three_opt",
    "three_opt_children",
    "two_opt",
]

PHI = (1.0 + math.sqrt(5.0)) / 2.0

_MAX_BOUNDARY_REDRAWS = 100
_NEIGHBOUR_LIST = 10


@dataclass(frozen=True)
class OperatorFractions:
    f_l: float = 1.0  # share of parents receiving a Lévy flight
    f_e: float = 0.2  # elite share
    f_mh: float = 0.2  # Metropolis-Hastings second-chance probability
    f_m: float = 0.2  # probability that a mutation mask entry is zero
    beta: float = 10.0  # step-size divisor for continuous Lévy flights

    def __post_init__(self):
        for name in ("f_l", "f_e", "f_mh", "f_m"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")


def n_select(fraction: float, p: int) -> int:
    return min(p, math.ceil(fraction * p - 1e-9))


class Population:
    """Fixed-size parent population stored as stacked slice arrays."""

    def __init__(self, space: DesignSpace, designs: list[DesignVector], evals: list[Evaluation]):
        if len(designs) != len(evals):
            raise ValueError("designs and evaluations differ in length")
        p = len(designs)
        self.space = space
        self.cont = np.array([d.cont for d in designs], dtype=float).reshape(p, space.n_cont)
        self.disc = np.array([d.disc for d in designs], dtype=int).reshape(p, space.n_disc)
        self.perm = None
        if space.perm_index is not None:
            self.perm = np.array([d.perm for d in designs], dtype=int).reshape(p, space.perm_length)
        self.evals = list(evals)
        self.generation = 0

    def __len__(self):
        return len(self.evals)

    @property
    def size(self) -> int:
        return len(self.evals)

    def design(self, i: int) -> DesignVector:
        return DesignVector(
            self.cont[i].copy(), self.disc[i].copy(), None if self.perm is None else self.perm[i].copy()
        )

    @property
    def members(self) -> list[tuple[DesignVector, Evaluation]]:
        return [(self.design(i), self.evals[i]) for i in range(self.size)]

    def ranking(self) -> list[int]:
        """Member indices from best to worst (stable on ties)."""
        return sorted(range(self.size), key=lambda i: rank_key(self.evals[i]))

    def scalars(self) -> np.ndarray:
        return np.hstack([self.cont, self.disc.astype(float)])

    def assign(self, i: int, batch: "Batch", r: int, ev: Evaluation):
        self.cont[i] = batch.cont[r]
        self.disc[i] = batch.disc[r]
        if self.perm is not None:
            self.perm[i] = batch.perm[r]
        self.evals[i] = ev


@dataclass
class Batch:
    """Child designs plus the parent index each one competes against."""

    cont: np.ndarray
    disc: np.ndarray
    perm: np.ndarray | None
    parents: np.ndarray

    def __len__(self):
        return len(self.parents)

    @classmethod
    def from_parents(cls, pop: Population, idx) -> "Batch":
        idx = np.asarray(idx, dtype=int)
        return cls(
            pop.cont[idx].copy(),
            pop.disc[idx].copy(),
            None if pop.perm is None else pop.perm[idx].copy(),
            idx.copy(),
        )

    @classmethod
    def empty(cls, pop: Population) -> "Batch":
        return cls.from_parents(pop, np.zeros(0, dtype=int))

    def design(self, r: int) -> DesignVector:
        return DesignVector(self.cont[r], self.disc[r], None if self.perm is None else self.perm[r])

    def set_scalars(self, space: DesignSpace, x: np.ndarray):
        nc = space.n_cont
        self.cont = space.clip_cont(x[:, :nc])
        self.disc = space.round_disc(x[:, nc:])

    def same_as_parent(self, pop: Population) -> np.ndarray:
        """Rows identical to their parent's current design."""
        p = self.parents
        same = np.all(self.cont == pop.cont[p], axis=1) & np.all(self.disc == pop.disc[p], axis=1)
        if self.perm is not None:
            same &= np.all(self.perm == pop.perm[p], axis=1)
        return same


# ---------------------------------------------------------------------------
# Lévy flights
# ---------------------------------------------------------------------------


def levy_step_continuous(cont, lower, upper, beta, levy: LevyParams, rng) -> np.ndarray:
    """``cont + L / beta`` with per-component boundary rejection.

    Out-of-bounds components redraw their Lévy sample up to 100 times and are
    then clamped.
    """
    base = np.asarray(cont, dtype=float)
    new = base + levy_sample(levy, rng, base.shape) / beta
    bad = ~((new >= lower) & (new <= upper))
    for _ in range(_MAX_BOUNDARY_REDRAWS):
        m = int(bad.sum())
        if m == 0:
            break
        new[bad] = base[bad] + levy_sample(levy, rng, m) / beta
        bad = ~((new >= lower) & (new <= upper))
    return np.clip(np.nan_to_num(new, nan=0.0), lower, upper)


def reflect_index(idx, card):
    """Reflect integer indices back into ``[0, card - 1]``."""
    idx = np.asarray(idx)
    card = np.asarray(card)
    top = card - 1
    period = np.maximum(2 * top, 1)
    m = np.mod(idx, period)
    out = np.where(m > top, period - m, m)
    return np.where(top == 0, 0, out)


def discrete_move(idx, t, card, sign):
    """Index after a truncated-Lévy step of ``ROUND(t * card)`` in direction ``sign``."""
    step = np.floor(np.asarray(t) * card + 0.5).astype(int)
    return reflect_index(np.asarray(idx) + np.asarray(sign) * step, card)


def levy_step_discrete(disc, card, levy: LevyParams, rng) -> np.ndarray:
    disc = np.asarray(disc, dtype=int)
    t = tlf_sample(levy.alpha, levy.gamma, rng, disc.shape)
    sign = np.where(rng.random(disc.shape) < 0.5, -1, 1)
    return discrete_move(disc, t, card, sign).astype(int)


def link(perm, a: int, b: int) -> np.ndarray:
    """Reverse the run between positions ``a`` and ``b`` so the two elements become adjacent.

    For ``b > a`` the run ``a+1..b`` is reversed; for ``b < a`` the run
    ``b..a-1``. Equal or adjacent positions give an unchanged copy.
    """
    out = np.array(perm, copy=True)
    if b > a:
        out[a + 1 : b + 1] = out[a + 1 : b + 1][::-1]
    elif b < a:
        out[b:a] = out[b:a][::-1]
    return out


def _neighbour_position(row, pos, a, t, distances):
    city = row[a]
    order = np.argsort(distances[city], kind="stable")
    order = order[order != city]
    k = min(len(order), _NEIGHBOUR_LIST)
    j = min(int(math.floor(t * (k - 1) + 0.5)), k - 1)
    return int(pos[order[j]])


def levy_step_permutation(perm, levy: LevyParams, rng, distances=None) -> np.ndarray:
    """Inversion of a run whose span is a truncated Lévy fraction of the length."""
    perm = np.atleast_2d(np.asarray(perm, dtype=int))
    out = perm.copy()
    m, n = perm.shape
    first = rng.integers(0, n - 1, size=m)
    t = tlf_sample(levy.alpha, levy.gamma, rng, m)
    for r in range(m):
        a = int(first[r])
        if distances is None:
            span = max(1, int(math.floor(t[r] * n + 0.5)))
            b = min(a + span, n - 1)
        else:
            pos = np.empty(n, dtype=int)
            pos[perm[r]] = np.arange(n)
            b = _neighbour_position(perm[r], pos, a, t[r], distances)
        out[r] = link(perm[r], a, b)
    return out


def _select_levy_parents(pop: Population, fractions: OperatorFractions, rng) -> np.ndarray:
    return rng.choice(pop.size, n_select(fractions.f_l, pop.size), replace=False)


def cont_levy_flight(pop, fractions, levy, rng) -> Batch:
    batch = Batch.from_parents(pop, _select_levy_parents(pop, fractions, rng))
    if pop.space.n_cont:
        batch.cont = levy_step_continuous(
            batch.cont, pop.space.lower, pop.space.upper, fractions.beta, levy, rng
        )
    return batch


def disc_levy_flight(pop, fractions, levy, rng) -> Batch:
    batch = Batch.from_parents(pop, _select_levy_parents(pop, fractions, rng))
    if pop.space.n_disc:
        batch.disc = levy_step_discrete(batch.disc, pop.space.cardinality, levy, rng)
    return batch


def comb_levy_flight(pop, fractions, levy, rng, distances=None) -> Batch:
    batch = Batch.from_parents(pop, _select_levy_parents(pop, fractions, rng))
    if batch.perm is not None and len(batch):
        batch.perm = levy_step_permutation(batch.perm, levy, rng, distances)
    return batch


def levy_flights(pop, fractions, levy, rng, distances=None) -> Batch:
    """One child per selected parent with every slice moved by its own Lévy flight."""
    space = pop.space
    batch = Batch.from_parents(pop, _select_levy_parents(pop, fractions, rng))
    if space.n_cont:
        batch.cont = levy_step_continuous(batch.cont, space.lower, space.upper, fractions.beta, levy, rng)
    if space.n_disc:
        batch.disc = levy_step_discrete(batch.disc, space.cardinality, levy, rng)
    if batch.perm is not None and len(batch):
        batch.perm = levy_step_permutation(batch.perm, levy, rng, distances)
    return batch


# ---------------------------------------------------------------------------
# elite-driven scalar operators
# ---------------------------------------------------------------------------


def crossover(pop: Population, fractions: OperatorFractions, rng) -> Batch:
    """Push non-elite parents past an elite one by a golden-ratio step.

    The child ``x_0 + (x_0 - x_r) / PHI`` competes against the non-elite
    ``x_r``; its permutation is copied from the elite ``x_0``.
    """
    ranking = pop.ranking()
    ne = n_select(fractions.f_e, pop.size)
    elites, rest = ranking[:ne], ranking[ne:]
    k = min(len(elites), len(rest))
    if k == 0:
        return Batch.empty(pop)
    partners = rng.choice(rest, k, replace=False)
    elites = np.asarray(elites[:k])
    x = pop.scalars()
    x0, xr = x[elites], x[partners]
    batch = Batch.from_parents(pop, elites)
    batch.parents = np.asarray(partners, dtype=int)
    batch.set_scalars(pop.space, x0 + (x0 - xr) / PHI)
    return batch


def scatter_search(pop: Population, fractions: OperatorFractions, rng) -> Batch:
    """Sample a hyper-rectangle built from an elite member and a random partner.

    Ranks are 1-based positions in the current ranking. The rectangle lies on
    the elite's side away from the partner and widens with their rank gap.
    """
    p = pop.size
    if p < 3:
        return Batch.empty(pop)
    ranking = pop.ranking()
    ne = n_select(fractions.f_e, p)
    x = pop.scalars()
    idx_i = np.asarray(ranking[:ne], dtype=int)
    children = np.empty((ne, x.shape[1]))
    for k in range(ne):
        i = k + 1
        j = int(rng.integers(1, p))
        if j >= i:
            j += 1
        xi, xj = x[ranking[i - 1]], x[ranking[j - 1]]
        d = (xj - xi) / 2.0
        sgn = 1.0 if i < j else -1.0
        spread = (abs(j - i) - 1) / (p - 2)
        c1 = xi - d * (1.0 + sgn * spread)
        c2 = xi - d * (1.0 - sgn * spread)
        children[k] = c1 + (c2 - c1) * rng.random(x.shape[1])
    batch = Batch.from_parents(pop, idx_i)
    batch.set_scalars(pop.space, children)
    return batch


def mutation(pop: Population, fractions: OperatorFractions, rng) -> Batch:
    """``X + r * D o (P1 - P2)`` over the scalar slices of the whole population."""
    p = pop.size
    x = pop.scalars()
    r = rng.random()
    mask = (rng.random(x.shape) >= fractions.f_m).astype(float)
    p1 = x[rng.permutation(p)]
    p2 = x[rng.permutation(p)]
    batch = Batch.from_parents(pop, np.arange(p))
    batch.set_scalars(pop.space, x + r * mask * (p1 - p2))
    return batch


# ---------------------------------------------------------------------------
# permutation operators
# ---------------------------------------------------------------------------


def three_opt_children(perm, points) -> tuple[np.ndarray, np.ndarray]:
    """Both 3-opt reorderings for break positions ``i < j < k``.

    With ``S1 = P[:i+1]``, ``S2 = P[i+1:j+1]``, ``S3 = P[j+1:k+1]`` and
    ``S4 = P[k+1:]`` the children are ``S1 S3 S2 S4`` and
    ``S1 rev(S2) rev(S3) S4``.
    """
    perm = np.asarray(perm)
    i, j, k = sorted(int(v) for v in points)
    s1, s2, s3, s4 = perm[: i + 1], perm[i + 1 : j + 1], perm[j + 1 : k + 1], perm[k + 1 :]
    return np.concatenate([s1, s3, s2, s4]), np.concatenate([s1, s2[::-1], s3[::-1], s4])


def three_opt(pop: Population, rng) -> Batch:
    """Two 3-opt children for every parent, the second judged after the first."""
    if pop.perm is None:
        return Batch.empty(pop)
    n = pop.perm.shape[1]
    if n < 4:
        raise ValueError(f"3-opt needs a permutation of length >= 4, got {n}")
    p = pop.size
    batch = Batch.from_parents(pop, np.repeat(np.arange(p), 2))
    for i in range(p):
        pts = rng.choice(n, 3, replace=False)
        batch.perm[2 * i], batch.perm[2 * i + 1] = three_opt_children(pop.perm[i], pts)
    return batch


def inversion_step(p1, p2, a: int, looping: bool = True):
    """The two children of one inversion-crossover exchange starting at ``p1[a]``.

    ``c1`` links ``p1[a]`` to the element following it in ``p2``; ``c2``
    then links that element, inside ``p2``, to its follower in ``p1``.
    Returns ``None`` for a child whose follower does not exist.
    """
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    n = len(p1)
    pos1 = np.empty(n, dtype=int)
    pos1[p1] = np.arange(n)
    pos2 = np.empty(n, dtype=int)
    pos2[p2] = np.arange(n)
    v = p1[a]
    nxt = pos2[v] + 1
    if nxt >= n and not looping:
        return None, None
    w = p2[nxt % n]
    c1 = link(p1, a, pos1[w])
    nxt = pos1[w] + 1
    if nxt >= n and not looping:
        return c1, None
    u = p1[nxt % n]
    c2 = link(p2, pos2[w], pos2[u])
    return c1, c2


def inversion_crossover(pop: Population, fractions: OperatorFractions, rng) -> Batch:
    """Exchange structure between each elite parent and a random partner.

    With a permutation, the exchange is cycled over every position of the
    elite parent. Without one, the discrete-index slice swaps a random
    segment; purely continuous designs are left alone.
    """
    ranking = pop.ranking()
    ne = n_select(fractions.f_e, pop.size)
    elites, rest = ranking[:ne], ranking[ne:]
    k = min(len(elites), len(rest))
    if k == 0:
        return Batch.empty(pop)
    partners = [int(v) for v in rng.choice(rest, k, replace=False)]
    elites = elites[:k]
    if pop.perm is not None:
        looping = pop.space.looping
        n = pop.perm.shape[1]
        parents, perms = [], []
        for e, r in zip(elites, partners):
            for a in range(n):
                c1, c2 = inversion_step(pop.perm[e], pop.perm[r], a, looping)
                if c1 is not None:
                    parents.append(e)
                    perms.append(c1)
                if c2 is not None:
                    parents.append(r)
                    perms.append(c2)
        batch = Batch.from_parents(pop, parents)
        if parents:
            batch.perm = np.array(perms, dtype=int)
        return batch
    disc = pop.disc
    nd = disc.shape[1]
    if nd == 0:
        return Batch.empty(pop)
    parents, rows = [], []
    for e, r in zip(elites, partners):
        lo, hi = sorted(int(v) for v in rng.choice(nd + 1, 2, replace=False))
        c1, c2 = disc[e].copy(), disc[r].copy()
        c1[lo:hi], c2[lo:hi] = disc[r, lo:hi], disc[e, lo:hi]
        parents += [e, r]
        rows += [c1, c2]
    batch = Batch.from_parents(pop, parents)
    batch.disc = np.array(rows, dtype=int)
    return batch


def two_opt(pop: Population, fractions: OperatorFractions, levy: LevyParams, rng, distances=None) -> Batch:
    """2-opt moves on each elite parent, first break cycling over the sequence.

    The second break sits a truncated-Lévy fraction of the length further on
    (or, with ``distances``, at one of the first city's nearest neighbours).
    """
    if pop.perm is None:
        return Batch.empty(pop)
    n = pop.perm.shape[1]
    looping = pop.space.looping
    starts = np.arange(n) if looping else np.arange(max(n - 2, 0))
    ranking = pop.ranking()
    elites = ranking[: n_select(fractions.f_e, pop.size)]
    parents, perms = [], []
    for e in elites:
        row = pop.perm[e]
        t = tlf_sample(levy.alpha, levy.gamma, rng, len(starts))
        if distances is not None:
            pos = np.empty(n, dtype=int)
            pos[row] = np.arange(n)
        for a, ta in zip(starts, t):
            a = int(a)
            if distances is None:
                b = a + max(1, int(math.floor(ta * n + 0.5)))
                b = b % n if looping else min(b, n - 1)
            else:
                b = _neighbour_position(row, pos, a, ta, distances)
            parents.append(e)
            perms.append(link(row, a, b))
    batch = Batch.from_parents(pop, parents)
    if parents:
        batch.perm = np.array(perms, dtype=int)
    return batch


# ---------------------------------------------------------------------------
# population update
# ---------------------------------------------------------------------------


def population_update(
    pop: Population,
    batch: Batch,
    evals: list[Evaluation | None],
    rng,
    mh: bool = False,
    f_mh: float = 0.0,
) -> int:
    """Merge evaluated children in batch order; returns the number of replacements.

    A child replaces its parent's current occupant when strictly better. With
    ``mh`` set, a rejected child gets, with probability ``f_mh``, one try
    against a uniformly chosen other member. Unevaluated children (``None``)
    are dropped.
    """
    replaced = 0
    p = pop.size
    second_chance = mh and f_mh > 0.0 and p > 1
    for r, ev in enumerate(evals):
        if ev is None:
            continue
        i = int(batch.parents[r])
        if better(ev, pop.evals[i]):
            pop.assign(i, batch, r, ev)
            replaced += 1
        elif second_chance and rng.random() < f_mh:
            j = int(rng.integers(p - 1))
            if j >= i:
                j += 1
            if better(ev, pop.evals[j]):
                pop.assign(j, batch, r, ev)
                replaced += 1
    return replaced
