import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metadec.errors import (
    DimensionError,
    DomainError,
    InvalidDimensionError,
    InvalidFunctionError,
    InvalidSplitError,
    PopulationSizeError,
)
from metadec.problems import (
    ALL_FUNCTION_IDS,
    EASY_TRAIN_UNSEEN,
    evaluate,
    evaluate_many,
    initialize_population,
    make_bbob,
    split_problem_set,
)


def test_sphere_optimum_identity():
    p = make_bbob(1, 10, 0)
    assert abs(evaluate(p, p.x_opt) - p.f_opt) <= 1e-9


def test_invalid_function_id():
    with pytest.raises(InvalidFunctionError):
        make_bbob(25, 10, 0)
    with pytest.raises(InvalidFunctionError):
        make_bbob(0, 10, 0)


def test_invalid_dimension():
    with pytest.raises(InvalidDimensionError):
        make_bbob(2, 1, 0)


def test_ellipsoid_unit_offset_is_one():
    # the oscillation transform fixes 0 and 1, so a unit step along the first
    # axis costs exactly the first ellipsoid scale (= 1)
    p = make_bbob(2, 2, 0)
    x = p.x_opt + np.array([1.0, 0.0])
    assert evaluate(p, x) == pytest.approx(p.f_opt + 1.0, abs=1e-9)


def test_sphere_unit_offset_is_one():
    p = make_bbob(1, 10, 3)
    e = np.zeros(10)
    e[4] = 1.0
    assert evaluate(p, p.x_opt + e) == pytest.approx(p.f_opt + 1.0, abs=1e-9)


def test_evaluate_rejects_bad_input():
    p = make_bbob(1, 10, 0)
    with pytest.raises(DimensionError):
        evaluate(p, np.zeros(9))
    bad = np.zeros(10)
    bad[0] = np.nan
    with pytest.raises(DomainError):
        evaluate(p, bad)
    with pytest.raises(DimensionError):
        evaluate_many(p, np.zeros((3, 9)))


def test_optimum_identity_all_functions():
    for fid in ALL_FUNCTION_IDS:
        for dim in (2, 5):
            p = make_bbob(fid, dim, 1)
            assert abs(evaluate(p, p.x_opt) - p.f_opt) <= 1e-9, (fid, dim)
            assert np.all(p.x_opt >= p.lower_bound)
            assert np.all(p.x_opt <= p.upper_bound)


def test_bounds_sane():
    p = make_bbob(7, 5, 0)
    assert np.all(p.lower_bound < p.upper_bound)
    assert np.all(p.lower_bound == -5.0)
    assert np.all(p.upper_bound == 5.0)


def test_instance_determinism_on_probes():
    rng = np.random.default_rng(5)
    for fid in (3, 9, 21):
        a = make_bbob(fid, 10, 42)
        b = make_bbob(fid, 10, 42)
        probes = rng.uniform(-5, 5, size=(100, 10))
        assert np.array_equal(evaluate_many(a, probes), evaluate_many(b, probes))
        assert np.array_equal(a.x_opt, b.x_opt)
        assert a.f_opt == b.f_opt


def test_distinct_seeds_differ():
    a = make_bbob(1, 10, 0)
    b = make_bbob(1, 10, 1)
    assert not np.array_equal(a.x_opt, b.x_opt)


@settings(max_examples=40, deadline=None)
@given(
    fid=st.sampled_from(ALL_FUNCTION_IDS),
    dim=st.integers(min_value=2, max_value=12),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_global_minimum_property(fid, dim, seed):
    p = make_bbob(fid, dim, seed)
    assert abs(evaluate(p, p.x_opt) - p.f_opt) <= 1e-9
    rng = np.random.default_rng(seed + 1)
    pts = rng.uniform(-5, 5, size=(200, dim))
    assert np.all(evaluate_many(p, pts) >= p.f_opt)


def test_split_easy_train():
    split = split_problem_set("easy-train", [10])
    assert split.unseen == EASY_TRAIN_UNSEEN
    assert set(split.seen) | set(split.unseen) == set(ALL_FUNCTION_IDS)
    assert not set(split.seen) & set(split.unseen)
    assert len(split.seen) == 18


def test_split_all_train():
    split = split_problem_set("all-train", [2, 10])
    assert split.seen == ALL_FUNCTION_IDS
    assert split.unseen == ()
    assert split.dims == (2, 10)


def test_split_custom_errors():
    with pytest.raises(InvalidSplitError):
        split_problem_set("custom", [10], custom_seen=[0])
    with pytest.raises(InvalidSplitError):
        split_problem_set("custom", [10], custom_seen=[])
    with pytest.raises(InvalidSplitError):
        split_problem_set("nonsense", [10])


def test_split_custom():
    split = split_problem_set("custom", [5], custom_seen=[3, 1, 3])
    assert split.seen == (1, 3)
    assert len(split.unseen) == 22


def test_initialize_population_deterministic():
    p = make_bbob(1, 2, 0)
    a = initialize_population(p, 4, np.random.default_rng(7))
    b = initialize_population(p, 4, np.random.default_rng(7))
    assert np.array_equal(a, b)
    assert a.shape == (4, 2)


def test_initialize_population_bounds():
    p = make_bbob(13, 6, 2)
    pop = initialize_population(p, 40, np.random.default_rng(0))
    assert np.all(pop >= -5.0) and np.all(pop <= 5.0)


def test_initialize_population_too_small():
    p = make_bbob(1, 2, 0)
    with pytest.raises(PopulationSizeError):
        initialize_population(p, 3, np.random.default_rng(7))
