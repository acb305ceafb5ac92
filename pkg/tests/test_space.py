import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import INVARIANT_CASES
from gnowee.space import DesignSpace, DesignVector, Kind, SpaceError, VariableSpec

THICKNESS = [0.0625 * k for k in range(1, 100)]


def mixed_space(perm_len=5):
    return DesignSpace(
        [
            VariableSpec.continuous(-1.0, 2.0, "a"),
            VariableSpec.integer(3, 9, "n"),
            VariableSpec.binary("flag"),
            VariableSpec.discrete(THICKNESS, "t"),
            VariableSpec.combinatorial(perm_len, name="tour"),
        ]
    )


@pytest.mark.parametrize(
    "kw",
    [
        {"kind": "continuous", "lower": 1.0, "upper": 1.0},
        {"kind": "continuous", "lower": 2.0, "upper": 1.0},
        {"kind": "integer", "lower": 0.5, "upper": 3},
        {"kind": "discrete", "values": ()},
        {"kind": "discrete", "values": (1.0, 1.0, 2.0)},
        {"kind": "discrete", "values": (2.0, 1.0)},
        {"kind": "combinatorial", "length": 1},
        {"kind": "nonsense"},
    ],
)
def test_invalid_variable_specs(kw):
    with pytest.raises((SpaceError, ValueError)):
        VariableSpec(**kw)


def test_single_permutation_only():
    with pytest.raises(SpaceError):
        DesignSpace([VariableSpec.combinatorial(3), VariableSpec.combinatorial(4)])


def test_partition_covers_all_variables():
    s = mixed_space()
    parts = sorted([*s.cont_index.tolist(), *s.disc_index.tolist(), s.perm_index])
    assert parts == list(range(len(s)))
    assert s.n_cont == 1 and s.n_disc == 3 and s.perm_length == 5
    assert s.cardinality.tolist() == [7, 2, 99]


def test_validate_examples():
    s = DesignSpace([VariableSpec.continuous(0, 1)])
    assert s.validate([0.5]) == (True, None)
    t = DesignSpace([VariableSpec.continuous(0, 1), VariableSpec.discrete(THICKNESS, "t_s")])
    ok, msg = t.validate([0.5, 0.07])
    assert not ok and "index 1" in msg
    assert t.validate([0.5, 0.0625 * 3]) == (True, None)
    p = DesignSpace([VariableSpec.combinatorial(4)])
    assert not p.validate([[0, 1, 1, 3]])[0]
    assert p.validate([[3, 1, 0, 2]])[0]


def test_validate_length_mismatch():
    with pytest.raises(SpaceError):
        mixed_space().validate([0.0])


def test_validate_integer_and_binary():
    s = DesignSpace([VariableSpec.integer(0, 5), VariableSpec.binary()])
    assert s.validate([3, 1])[0]
    assert not s.validate([2.5, 1])[0]
    assert not s.validate([6, 0])[0]
    assert not s.validate([1, 0.5])[0]


def test_repair_examples():
    s = DesignSpace([VariableSpec.continuous(0, 1), VariableSpec.discrete(THICKNESS), VariableSpec.integer(0, 4)])
    assert s.repair_to_bounds([1.7, 0.10, 2.5]) == [1.0, 0.125, 3.0]
    assert s.repair_to_bounds([-3.0, 0.09375, 9.0]) == [0.0, 0.0625, 4.0]


def test_repair_leaves_permutation():
    s = mixed_space()
    perm = np.array([4, 2, 0, 1, 3])
    out = s.repair_to_bounds([5.0, 10.2, 0.4, 7.0, perm])
    assert out[:4] == [2.0, 9.0, 0.0, 6.1875]
    assert out[4] is perm


def test_encode_decode_roundtrip():
    s = mixed_space()
    values = [0.25, 7, 1, 0.5, np.array([1, 0, 4, 3, 2])]
    vec = s.encode(values)
    assert vec.disc.tolist() == [4, 1, 7]
    out = s.decode(vec)
    assert out[:4] == [0.25, 7.0, 1.0, 0.5]
    assert np.array_equal(out[4], values[4])


def test_encode_rejects_invalid():
    with pytest.raises(SpaceError):
        mixed_space().encode([0.25, 7, 1, 0.51, np.arange(5)])


def test_dict_roundtrip():
    s = mixed_space()
    assert DesignSpace.from_dict(s.to_dict()).to_dict() == s.to_dict()


def test_discrete_from_step():
    v = VariableSpec.from_dict({"kind": "discrete", "step": 0.0625, "lower": 0.0625, "upper": 6.1875})
    assert v.values == tuple(THICKNESS)


def test_lhc_one_sample_per_stratum(rng):
    s = DesignSpace([VariableSpec.continuous(0, 10)])
    pts = np.array([d.cont[0] for d in s.lhc_initialize(5, rng)])
    assert sorted(np.floor(pts / 2).astype(int).tolist()) == [0, 1, 2, 3, 4]


def test_lhc_discrete_each_value_once(rng):
    s = DesignSpace([VariableSpec.discrete([1.0, 2.0, 5.0, 9.0])])
    idx = sorted(d.disc[0] for d in s.lhc_initialize(4, rng))
    assert idx == [0, 1, 2, 3]


def test_lhc_deterministic():
    s = mixed_space()
    a = s.lhc_initialize(12, np.random.default_rng(4))
    b = s.lhc_initialize(12, np.random.default_rng(4))
    assert all(x == y for x, y in zip(a, b))


def test_uniform_initialize_validates(rng):
    s = mixed_space()
    for d in s.uniform_initialize(50, rng):
        assert s.validate(s.decode(d))[0]


def test_round_disc_half_up_and_clamp():
    s = DesignSpace([VariableSpec.integer(0, 4), VariableSpec.binary()])
    out = s.round_disc(np.array([[1.5, -0.7], [2.49, 3.2], [9.0, 0.5]]))
    assert out.tolist() == [[2, 0], [2, 1], [4, 1]]


@settings(max_examples=INVARIANT_CASES)
@given(
    count=st.integers(1, 40),
    bounds=st.lists(
        st.tuples(st.floats(-1e3, 1e3), st.floats(1e-3, 1e3)).map(lambda t: (t[0], t[0] + t[1])),
        min_size=1,
        max_size=4,
    ),
    cards=st.lists(st.integers(1, 30), max_size=3),
    seed=st.integers(0, 2**32 - 1),
)
def test_lhc_stratification_property(count, bounds, cards, seed):
    variables = [VariableSpec.continuous(lo, hi) for lo, hi in bounds]
    variables += [VariableSpec.discrete(np.arange(c, dtype=float)) for c in cards]
    space = DesignSpace(variables)
    designs = space.lhc_initialize(count, np.random.default_rng(seed))
    assert len(designs) == count
    cont = np.array([d.cont for d in designs])
    for j, (lo, hi) in enumerate(bounds):
        strata = np.floor((cont[:, j] - lo) / (hi - lo) * count).astype(int)
        strata = np.minimum(strata, count - 1)
        # rounding at a stratum edge may shift one point by one stratum
        assert len(set(strata.tolist())) >= count - 1
        assert np.all((cont[:, j] >= lo) & (cont[:, j] <= hi))
    disc = np.array([d.disc for d in designs]).reshape(count, len(cards))
    for j, c in enumerate(cards):
        counts = np.bincount(disc[:, j], minlength=c)
        # each value owns count/c strata; only the two edge strata are shared
        assert np.all(np.abs(counts - count / c) < 2)
    for d in designs:
        assert space.validate(space.decode(d))[0]


def test_kind_values():
    assert Kind("binary") is Kind.BINARY
    assert DesignVector(np.zeros(1), np.zeros(0, dtype=int)) != DesignVector(
        np.zeros(1), np.zeros(0, dtype=int), np.arange(2)
    )


@settings(max_examples=INVARIANT_CASES)
@given(data=st.data())
def test_repair_is_idempotent_and_valid(data):
    space = mixed_space()
    finite = st.floats(-1e4, 1e4)
    values = [data.draw(finite) for _ in range(4)] + [np.array(data.draw(st.permutations(range(5))))]
    once = space.repair_to_bounds(values)
    assert space.validate(once)[0]
    twice = space.repair_to_bounds(once)
    assert twice[:4] == once[:4] and np.array_equal(twice[4], once[4])
