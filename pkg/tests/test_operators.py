import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import INVARIANT_CASES
from gnowee.levy import LevyParams, levy_sample
from gnowee.operators import (
    PHI,
    Batch,
    OperatorFractions,
    Population,
    comb_levy_flight,
    cont_levy_flight,
    crossover,
    disc_levy_flight,
    discrete_move,
    inversion_crossover,
    inversion_step,
    levy_flights,
    levy_step_continuous,
    levy_step_permutation,
    link,
    mutation,
    n_select,
    population_update,
    reflect_index,
    scatter_search,
    three_opt,
    three_opt_children,
    two_opt,
)
from gnowee.problem import EvalCounter, Evaluation, Problem, better
from gnowee.space import DesignSpace, VariableSpec

LETTERS = "ABCDEFGH"


def seq(text):
    return np.array([LETTERS.index(c) for c in text.split()])


def txt(arr):
    return " ".join(LETTERS[i] for i in arr)


# -- worked examples --------------------------------------------------------


def test_three_opt_worked_example():
    p = seq("A H B D G F C E")
    # breaks after H, G and C
    c1, c2 = three_opt_children(p, [1, 4, 6])
    assert txt(c1) == "A H F C B D G E"
    assert txt(c2) == "A H G D B C F E"


def test_comb_levy_worked_example():
    assert txt(link(seq("A H B D G F C E"), 1, 4)) == "A H G D B F C E"


def test_inversion_crossover_worked_example():
    p1, p2 = seq("A H G D B F C E"), seq("E A G C H B D F")
    c1, c2 = inversion_step(p1, p2, 1)
    assert txt(c1) == "A H B D G F C E"
    assert txt(c2) == "E A G C H B F D"


def test_two_opt_worked_example():
    assert txt(link(seq("A H B D G F C E"), 0, 4)) == "A G D B H F C E"


# -- permutation helpers ----------------------------------------------------


def test_link_identity_cases():
    p = seq("A H B D G F C E")
    for a in range(8):
        assert np.array_equal(link(p, a, a), p)
        if a + 1 < 8:
            assert np.array_equal(link(p, a, a + 1), p)


def test_link_backwards():
    # b < a reverses b..a-1 so that p[b] ends up next to p[a]
    out = link(seq("A B C D E F G H"), 5, 1)
    assert txt(out) == "A E D C B F G H"


def edges(tour):
    return {frozenset((int(tour[i]), int(tour[(i + 1) % len(tour)]))) for i in range(len(tour))}


def test_inversion_identical_parents_same_tour():
    p = seq("A H G D B F C E")
    for a in range(8):
        c1, c2 = inversion_step(p, p.copy(), a)
        # at the wrap the tour may come back reversed, which is the same cycle
        assert edges(c1) == edges(p) and edges(c2) == edges(p)


def test_inversion_non_looping_skips_last():
    p1, p2 = seq("A B C D"), seq("B C D A")
    # A is last in p2, so it has no follower there
    assert inversion_step(p1, p2, 0, looping=False) == (None, None)


def test_three_opt_needs_four():
    space = DesignSpace([VariableSpec.combinatorial(3)])
    pop = make_pop(space, [[np.array([0, 1, 2])]] * 3)
    with pytest.raises(ValueError):
        three_opt(pop, np.random.default_rng(0))


# -- scalar arithmetic ------------------------------------------------------


def test_phi_constant():
    assert PHI == (1 + math.sqrt(5)) / 2


def test_discrete_move_examples():
    assert int(discrete_move(10, 0.07, 100, +1)) == 17
    assert int(reflect_index(-3, 100)) == 3
    # index 2 stepping down by 5 reflects to 3
    assert int(discrete_move(2, 0.05, 100, -1)) == 3
    assert int(discrete_move(4, 0.0, 100, -1)) == 4


def test_reflect_upper_and_singleton():
    assert reflect_index(np.array([100, 101, 198, 0]), 100).tolist() == [98, 97, 0, 0]
    assert reflect_index(np.array([5, -2]), 1).tolist() == [0, 0]


def test_continuous_levy_shared_draw_oracle():
    """Out-of-bounds components are redrawn from the same stream."""
    params = LevyParams()
    beta = 10.0
    for seed in range(200):
        first = levy_sample(params, np.random.default_rng(seed), (1, 1)) / beta
        if not 0.0 <= 0.5 + first[0, 0] <= 1.0:
            break
    else:  # pragma: no cover
        pytest.fail("no out-of-bounds first draw in 200 seeds")
    g = np.random.default_rng(seed)
    levy_sample(params, g, (1, 1))
    expected = None
    for _ in range(100):
        step = levy_sample(params, g, 1)[0] / beta
        if 0.0 <= 0.5 + step <= 1.0:
            expected = 0.5 + step
            break
    child = levy_step_continuous(np.array([[0.5]]), 0.0, 1.0, beta, params, np.random.default_rng(seed))
    assert child[0, 0] == expected


def test_continuous_levy_stays_in_bounds(rng):
    lo, hi = np.array([0.0, -5.0]), np.array([1e-3, 5.0])
    x = np.tile([5e-4, 0.0], (200, 1))
    out = levy_step_continuous(x, lo, hi, 0.01, LevyParams(alpha=0.3), rng)
    assert np.all((out >= lo) & (out <= hi))


# -- populations ------------------------------------------------------------


def make_pop(space, values, objectives=None):
    counter = EvalCounter()
    designs = [space.encode(v) for v in values]
    objectives = objectives if objectives is not None else list(range(len(values)))
    evals = [Evaluation(float(f), 0.0, True, counter.next()) for f in objectives]
    return Population(space, designs, evals)


def line_space(lo=-10.0, hi=10.0):
    return DesignSpace([VariableSpec.continuous(lo, hi)])


def test_levy_flight_fraction_counts(rng):
    space = DesignSpace([VariableSpec.continuous(0, 1), VariableSpec.integer(0, 9), VariableSpec.combinatorial(6)])
    values = [[rng.random(), int(rng.integers(10)), rng.permutation(6)] for _ in range(25)]
    pop = make_pop(space, values)
    fr = OperatorFractions()
    for op in (cont_levy_flight, disc_levy_flight, comb_levy_flight, levy_flights):
        batch = op(pop, fr, LevyParams(), rng)
        assert len(batch) == 25 and len(set(batch.parents.tolist())) == 25
    half = levy_flights(pop, OperatorFractions(f_l=0.5), LevyParams(), rng)
    assert len(half) == 13


def test_single_slice_levy_flights_copy_other_slices(rng):
    space = DesignSpace([VariableSpec.continuous(0, 1), VariableSpec.integer(0, 9), VariableSpec.combinatorial(6)])
    pop = make_pop(space, [[rng.random(), int(rng.integers(10)), rng.permutation(6)] for _ in range(10)])
    fr = OperatorFractions()
    b = cont_levy_flight(pop, fr, LevyParams(), rng)
    assert np.array_equal(b.disc, pop.disc[b.parents]) and np.array_equal(b.perm, pop.perm[b.parents])
    b = disc_levy_flight(pop, fr, LevyParams(), rng)
    assert np.array_equal(b.cont, pop.cont[b.parents]) and np.array_equal(b.perm, pop.perm[b.parents])
    b = comb_levy_flight(pop, fr, LevyParams(), rng)
    assert np.array_equal(b.cont, pop.cont[b.parents]) and np.array_equal(b.disc, pop.disc[b.parents])


def test_crossover_golden_ratio_step(rng):
    pop = make_pop(line_space(), [[1.0], [0.0]], [0.0, 1.0])
    batch = crossover(pop, OperatorFractions(f_e=0.5), rng)
    assert batch.parents.tolist() == [1]
    assert batch.cont[0, 0] == pytest.approx(1.0 + 1.0 / PHI, abs=1e-12)
    assert batch.cont[0, 0] == pytest.approx(1.6180339887, abs=1e-10)


def test_crossover_clamps(rng):
    pop = make_pop(line_space(-1.0, 1.5), [[1.0], [0.0]], [0.0, 1.0])
    assert crossover(pop, OperatorFractions(f_e=0.5), rng).cont[0, 0] == 1.5


def test_crossover_identical_members_identity(rng):
    pop = make_pop(line_space(), [[0.3]] * 5)
    batch = crossover(pop, OperatorFractions(), rng)
    assert np.all(batch.cont == 0.3)
    assert batch.same_as_parent(pop).all()


def test_scatter_search_hand_arithmetic():
    p = 5
    xs = [[0.0], [1.0], [2.0], [3.0], [4.0]]
    pop = make_pop(line_space(), xs)  # ranking equals index order
    batch = scatter_search(pop, OperatorFractions(f_e=0.2), np.random.default_rng(11))
    g = np.random.default_rng(11)
    j = int(g.integers(1, p))
    j = j + 1 if j >= 1 else j
    xi, xj = 0.0, xs[j - 1][0]
    d = (xj - xi) / 2
    a = 1.0 if 1 < j else -1.0
    b = (abs(j - 1) - 1) / (p - 2)
    c1, c2 = xi - d * (1 + a * b), xi - d * (1 - a * b)
    expected = c1 + (c2 - c1) * g.random(1)[0]
    assert batch.parents.tolist() == [0]
    assert batch.cont[0, 0] == pytest.approx(expected, abs=1e-15)


def test_scatter_search_coefficients():
    # rank 1 against rank p=25 gives a spread of exactly 1; i > j flips the sign
    assert (abs(25 - 1) - 1) / (25 - 2) == 1.0
    pop = make_pop(line_space(), [[0.7]] * 25)
    batch = scatter_search(pop, OperatorFractions(), np.random.default_rng(0))
    assert np.all(batch.cont == 0.7)


def test_mutation_hand_arithmetic():
    space = DesignSpace([VariableSpec.continuous(-100, 100), VariableSpec.continuous(-100, 100)])
    xs = [[1.0, 2.0], [3.0, -1.0], [0.5, 0.25], [-2.0, 4.0]]
    pop = make_pop(space, xs)
    fr = OperatorFractions(f_m=0.3)
    batch = mutation(pop, fr, np.random.default_rng(8))
    g = np.random.default_rng(8)
    x = np.array(xs)
    r = g.random()
    mask = (g.random(x.shape) >= 0.3).astype(float)
    p1, p2 = x[g.permutation(4)], x[g.permutation(4)]
    assert np.allclose(batch.cont, x + r * mask * (p1 - p2), rtol=0, atol=1e-15)
    assert batch.parents.tolist() == [0, 1, 2, 3]


def test_mutation_full_mask_identity(rng):
    pop = make_pop(line_space(), [[float(i)] for i in range(6)])
    batch = mutation(pop, OperatorFractions(f_m=1.0), rng)
    assert np.array_equal(batch.cont, pop.cont)


def test_inversion_crossover_continuous_only_is_skipped(rng):
    pop = make_pop(line_space(), [[float(i)] for i in range(6)])
    assert len(inversion_crossover(pop, OperatorFractions(), rng)) == 0


def test_inversion_crossover_swaps_discrete_segment(rng):
    space = DesignSpace([VariableSpec.continuous(0, 1)] + [VariableSpec.integer(0, 9) for _ in range(3)])
    xs = [[0.1 * k, k, k, k] for k in range(5)]
    pop = make_pop(space, xs)
    batch = inversion_crossover(pop, OperatorFractions(), rng)
    assert len(batch) == 2 and batch.parents[0] == 0
    r = batch.parents[1]
    assert np.array_equal(batch.cont, pop.cont[[0, r]])
    # every position comes from one of the two parents and the pair swaps
    a, b = batch.disc
    assert np.array_equal(np.sort(np.stack([a, b]), axis=0), np.sort(pop.disc[[0, r]], axis=0))


def test_inversion_crossover_permutation_children(rng):
    space = DesignSpace([VariableSpec.combinatorial(8)])
    pop = make_pop(space, [[rng.permutation(8)] for _ in range(10)])
    batch = inversion_crossover(pop, OperatorFractions(), rng)
    # two elites, each cycling over 8 start positions, two children per step
    assert len(batch) == 2 * 8 * 2


def test_two_opt_counts(rng):
    space = DesignSpace([VariableSpec.combinatorial(8)])
    pop = make_pop(space, [[rng.permutation(8)] for _ in range(10)])
    assert len(two_opt(pop, OperatorFractions(), LevyParams(), rng)) == 2 * 8
    open_space = DesignSpace([VariableSpec.combinatorial(8, looping=False)])
    pop = make_pop(open_space, [[rng.permutation(8)] for _ in range(10)])
    assert len(two_opt(pop, OperatorFractions(), LevyParams(), rng)) == 2 * 6


def test_distance_biased_cuts_are_permutations(rng):
    coords = rng.random((9, 2))
    dist = np.sqrt(((coords[:, None] - coords[None]) ** 2).sum(-1))
    space = DesignSpace([VariableSpec.combinatorial(9)])
    pop = make_pop(space, [[rng.permutation(9)] for _ in range(6)])
    for batch in (
        levy_flights(pop, OperatorFractions(), LevyParams(), rng, dist),
        two_opt(pop, OperatorFractions(), LevyParams(), rng, dist),
    ):
        assert np.all(np.sort(batch.perm, axis=1) == np.arange(9))


def test_n_select():
    assert n_select(0.2, 25) == 5
    assert n_select(1.0, 25) == 25
    assert n_select(0.2, 7) == 2
    assert n_select(0.0, 7) == 0


# -- population update ------------------------------------------------------


def one_child_batch(pop, value, parent):
    b = Batch.from_parents(pop, [parent])
    b.cont[0, 0] = value
    return b


def test_update_worse_child_rejected():
    pop = make_pop(line_space(), [[0.0], [1.0]], [1.0, 2.0])
    b = one_child_batch(pop, 5.0, 0)
    n = population_update(pop, b, [Evaluation(3.0, 0.0, True, 9)], np.random.default_rng(0))
    assert n == 0 and pop.cont[0, 0] == 0.0


def test_update_better_child_replaces_parent():
    pop = make_pop(line_space(), [[0.0], [1.0]], [1.0, 2.0])
    b = one_child_batch(pop, 5.0, 1)
    n = population_update(pop, b, [Evaluation(1.5, 0.0, True, 9)], np.random.default_rng(0))
    assert n == 1 and pop.cont[1, 0] == 5.0 and pop.evals[1].objective == 1.5


def test_update_skips_unevaluated():
    pop = make_pop(line_space(), [[0.0], [1.0]], [1.0, 2.0])
    b = one_child_batch(pop, 5.0, 1)
    assert population_update(pop, b, [None], np.random.default_rng(0)) == 0


def test_update_mh_zero_fraction_matches_plain():
    space = line_space()
    base = make_pop(space, [[float(i)] for i in range(6)], [5, 1, 4, 2, 6, 3])
    b = Batch.from_parents(base, list(range(6)))
    b.cont[:, 0] += 0.5
    evals = [Evaluation(float(f), 0.0, True, 10 + k) for k, f in enumerate([9, 0.5, 7, 1, 8, 2.5])]
    pops = []
    for mh in (False, True):
        pop = make_pop(space, [[float(i)] for i in range(6)], [5, 1, 4, 2, 6, 3])
        g = np.random.default_rng(1)
        population_update(pop, b, evals, g, mh=mh, f_mh=0.0)
        pops.append((pop.cont.copy(), [e.objective for e in pop.evals], g.random()))
    assert np.array_equal(pops[0][0], pops[1][0]) and pops[0][1:] == pops[1][1:]


def test_update_mh_second_chance():
    # child loses to its parent but beats another member; f_mh = 1 forces the try
    pop = make_pop(line_space(), [[0.0], [1.0]], [1.0, 9.0])
    b = one_child_batch(pop, 5.0, 0)
    n = population_update(pop, b, [Evaluation(3.0, 0.0, True, 7)], np.random.default_rng(0), mh=True, f_mh=1.0)
    assert n == 1 and pop.cont[1, 0] == 5.0 and pop.cont[0, 0] == 0.0


# -- invariants over random cases -------------------------------------------

perm_strategy = st.integers(2, 30).flatmap(lambda n: st.permutations(list(range(n))))


@settings(max_examples=INVARIANT_CASES)
@given(perm=perm_strategy, data=st.data())
def test_permutation_operators_preserve_multiset(perm, data):
    p = np.array(perm)
    n = len(p)
    a = data.draw(st.integers(0, n - 1))
    b = data.draw(st.integers(0, n - 1))
    assert sorted(link(p, a, b).tolist()) == list(range(n))
    other = np.array(data.draw(st.permutations(list(range(n)))))
    for looping in (True, False):
        for child in inversion_step(p, other, a, looping):
            if child is not None:
                assert sorted(child.tolist()) == list(range(n))
    if n >= 4:
        pts = data.draw(st.lists(st.integers(0, n - 1), min_size=3, max_size=3, unique=True))
        for child in three_opt_children(p, pts):
            assert sorted(child.tolist()) == list(range(n))
    seed = data.draw(st.integers(0, 2**32 - 1))
    out = levy_step_permutation(p[None, :], LevyParams(), np.random.default_rng(seed))
    assert sorted(out[0].tolist()) == list(range(n))


def _random_space(data):
    variables = []
    for _ in range(data.draw(st.integers(0, 3))):
        lo = data.draw(st.floats(-100, 100))
        variables.append(VariableSpec.continuous(lo, lo + data.draw(st.floats(1e-3, 100))))
    for _ in range(data.draw(st.integers(0, 2))):
        lo = data.draw(st.integers(-5, 5))
        variables.append(VariableSpec.integer(lo, lo + data.draw(st.integers(1, 20))))
    if data.draw(st.booleans()):
        variables.append(VariableSpec.binary())
    if data.draw(st.booleans()):
        vals = sorted(set(data.draw(st.lists(st.floats(-50, 50), min_size=1, max_size=8))))
        variables.append(VariableSpec.discrete(vals))
    if data.draw(st.booleans()) or not variables:
        variables.append(VariableSpec.combinatorial(data.draw(st.integers(4, 9)), data.draw(st.booleans())))
    return DesignSpace(variables)


def _random_pop(space, p, rng):
    designs = space.uniform_initialize(p, rng)
    counter = EvalCounter()
    evals = []
    for _ in designs:
        feasible = rng.random() < 0.7
        evals.append(Evaluation(float(rng.normal()), 0.0 if feasible else float(rng.random()), feasible, counter.next()))
    return Population(space, designs, evals)


def _all_batches(pop, rng):
    fr, levy = OperatorFractions(), LevyParams()
    yield levy_flights(pop, fr, levy, rng)
    yield crossover(pop, fr, rng)
    yield scatter_search(pop, fr, rng)
    yield mutation(pop, fr, rng)
    yield inversion_crossover(pop, fr, rng)
    if pop.perm is not None:
        yield three_opt(pop, rng)
        yield two_opt(pop, fr, levy, rng)


@settings(max_examples=INVARIANT_CASES)
@given(data=st.data(), p=st.integers(3, 12), seed=st.integers(0, 2**32 - 1))
def test_all_candidates_validate(data, p, seed):
    space = _random_space(data)
    rng = np.random.default_rng(seed)
    pop = _random_pop(space, p, rng)
    for batch in _all_batches(pop, rng):
        for r in range(len(batch)):
            ok, why = space.validate(space.decode(batch.design(r)))
            assert ok, why


@settings(max_examples=INVARIANT_CASES)
@given(data=st.data(), p=st.integers(3, 12), seed=st.integers(0, 2**32 - 1), mh=st.booleans())
def test_update_keeps_size_and_best(data, p, seed, mh):
    space = _random_space(data)
    rng = np.random.default_rng(seed)
    pop = _random_pop(space, p, rng)
    best = min(pop.evals, key=lambda e: (not e.feasible, e.objective if e.feasible else e.violation))
    for batch in _all_batches(pop, rng):
        evals = []
        for _ in range(len(batch)):
            feasible = rng.random() < 0.7
            evals.append(Evaluation(float(rng.normal()), 0.0 if feasible else float(rng.random()), feasible, 0))
        population_update(pop, batch, evals, rng, mh=mh, f_mh=0.5)
        assert len(pop) == p and pop.cont.shape[0] == p and pop.disc.shape[0] == p
        current = pop.evals[pop.ranking()[0]]
        assert not better(best, current)
        best = current
        if pop.perm is not None:
            assert np.all(np.sort(pop.perm, axis=1) == np.arange(pop.perm.shape[1]))


def test_problem_batch_roundtrip():
    # candidates decode to values the problem accepts
    space = DesignSpace([VariableSpec.continuous(0, 1), VariableSpec.discrete([0.5, 1.5])])
    prob = Problem("s", space, lambda x: float(x[0] + x[1]))
    pop = make_pop(space, [[0.2, 0.5], [0.4, 1.5], [0.9, 0.5]])
    batch = mutation(pop, OperatorFractions(), np.random.default_rng(2))
    c = EvalCounter()
    for r in range(len(batch)):
        assert prob.evaluate(batch.design(r), c).feasible
