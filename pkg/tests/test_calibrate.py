import dataclasses
import json
import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from synthmot.calibrate import (
    GAP_EPS, OBJECTIVE_VERSION, ObjectiveError, ParamDim, ParamSpace, check_hyperparam_space,
    default_param_space, gap_objective, gap_report_json, optimize, run_gap_protocol,
)
from synthmot.motmetrics import MotReport
from synthmot.pipeline import prepare_sequence
from synthmot.scene import generate_seed_scene


def stub(mota, motp=0.8, mt=0.5, ml=0.1, p=0.9, r=0.8, idsw=0, frag=0, gt=100, tp=50):
    # a free-standing report: MOTA is tied to P, R and IDSW in a real MotReport,
    # so "only MOTA differs" needs a stand-in with the same attributes
    return SimpleNamespace(MOTA=mota, MOTP=motp, MT=mt, ML=ml, P=p, R=r, idsw=idsw, frag=frag,
                           total_gt=gt, tp=tp)


# ---------------------------------------------------------------------------
# objective


def test_identical_reports():
    assert gap_objective([(stub(0.8), stub(0.8))]) == pytest.approx(1.6)


def test_only_mota_differs_is_heavily_penalized():
    o = gap_objective([(stub(0.8), stub(0.6))])
    assert o == pytest.approx(1.4 - 0.2 / GAP_EPS)
    assert o < -100


def test_additive_over_equal_pairs():
    a, b = stub(0.7, p=0.8), stub(0.5, p=0.7)
    one = gap_objective([(a, b)])
    assert gap_objective([(a, b), (a, b)]) == pytest.approx(2 * one)


def test_real_reports():
    a = MotReport(tp=90, fp=5, fn=10, idsw=2, frag=1, total_gt=100, iou_sum=72.0,
                  n_trajectories=10, n_mostly_tracked=8, n_mostly_lost=1)
    b = MotReport(tp=60, fp=8, fn=40, idsw=1, frag=3, total_gt=100, iou_sum=45.0,
                  n_trajectories=10, n_mostly_tracked=4, n_mostly_lost=3)
    o = gap_objective([(a, b)])
    other = np.mean(np.abs(np.array([0.8, 0.8, 0.1, 90 / 95, 0.9, 0.02, 0.01])
                           - np.array([0.75, 0.4, 0.3, 60 / 68, 0.6, 0.01, 0.03])))
    expected = (a.MOTA + b.MOTA) - abs(a.MOTA - b.MOTA) / (GAP_EPS + other)
    assert o == pytest.approx(expected, abs=1e-12)
    assert gap_objective([(a, a)]) == pytest.approx(2 * a.MOTA)


def test_no_matches_is_minus_infinity():
    assert gap_objective([(stub(0.0, tp=0), stub(0.8))]) == -math.inf
    with pytest.raises(ValueError):
        gap_objective([])


metric = st.floats(0, 1)


@given(ma=metric, mb=metric, others=st.lists(metric, min_size=10, max_size=10))
def test_symmetric_under_swap(ma, mb, others):
    a = stub(ma, *others[:5])
    b = stub(mb, *others[5:])
    assert gap_objective([(a, b)]) == pytest.approx(gap_objective([(b, a)]), abs=1e-12)


@given(ma=st.floats(0, 0.5), gap=st.floats(0, 0.4), extra=st.floats(1e-3, 0.1),
       others=st.lists(metric, min_size=10, max_size=10))
def test_strictly_decreasing_in_mota_gap(ma, gap, extra, others):
    a = stub(ma + 0.5, *others[:5])
    near = gap_objective([(a, stub(ma + 0.5 - gap, *others[5:]))])
    # widen the gap with the joint MOTA held fixed
    a2 = stub(ma + 0.5 + extra / 2, *others[:5])
    far = gap_objective([(a2, stub(ma + 0.5 - gap - extra / 2, *others[5:]))])
    assert far < near


# ---------------------------------------------------------------------------
# search space


def test_param_dims():
    d = ParamDim("x", "log", 0.01, 10)
    assert d.from_unit(0) == pytest.approx(0.01) and d.from_unit(1) == pytest.approx(10)
    assert d.from_unit(0.5) == pytest.approx(math.sqrt(0.1))
    i = ParamDim("k", "int", 1, 5)
    assert [i.from_unit(u) for u in (0, 0.19, 0.2, 0.99, 1.0)] == [1, 1, 2, 5, 5]
    c = ParamDim("c", "categorical", choices=("a", "b"))
    assert c.from_unit(0.7) == "b" and c.to_unit("a") == 0.25
    with pytest.raises(ValueError):
        ParamDim("x", "log", 0, 1)
    with pytest.raises(ValueError):
        ParamDim("x", "linear", 2, 1)


@given(u=st.lists(st.floats(0, 1), min_size=7, max_size=7))
def test_space_round_trip(u):
    space = default_param_space()
    params = space.from_unit(u)
    assert space.from_unit(space.to_unit(params)) == pytest.approx(params)
    assert ParamSpace.from_list(space.to_list()) == space


def test_space_names_checked():
    check_hyperparam_space(default_param_space())
    with pytest.raises(ValueError):
        check_hyperparam_space(ParamSpace((ParamDim("nonsense", "linear"),)))
    with pytest.raises(ValueError):
        ParamSpace((ParamDim("a", "linear"), ParamDim("a", "linear")))


# ---------------------------------------------------------------------------
# optimizer

LINE = ParamSpace((ParamDim("x", "linear", 0.0, 1.0),))


def test_budget_one_returns_the_sample():
    best, hist = optimize(lambda p: -p["x"], LINE, 1, "smbo", seed=3)
    assert len(hist) == 1 and best == hist[0].params


@pytest.mark.parametrize("strategy", ["random", "smbo"])
def test_optimizer_is_deterministic(strategy):
    f = lambda p: -(p["x"] - 0.3) ** 2  # noqa: E731
    a = optimize(f, LINE, 25, strategy, seed=5)
    b = optimize(f, LINE, 25, strategy, seed=5)
    assert a == b
    assert optimize(f, LINE, 25, strategy, seed=6)[1] != a[1]


@given(seed=st.integers(0, 2**32 - 1), n1=st.integers(1, 20), extra=st.integers(0, 20))
def test_random_best_so_far_is_monotone(seed, n1, extra):
    f = lambda p: math.sin(7 * p["x"]) + p["x"]  # noqa: E731
    b1, _ = optimize(f, LINE, n1, "random", seed)
    b2, _ = optimize(f, LINE, n1 + extra, "random", seed)
    assert f(b2) >= f(b1)


def test_first_seen_tie_break():
    best, hist = optimize(lambda p: 0.0, LINE, 5, "random", seed=0)
    assert best == hist[0].params


def test_objective_errors_carry_params():
    def boom(p):
        raise RuntimeError("tracker crashed")

    with pytest.raises(ObjectiveError) as e:
        optimize(boom, LINE, 3)
    assert "x" in e.value.params
    assert isinstance(e.value.__cause__, RuntimeError)


def test_optimizer_argument_errors():
    with pytest.raises(ValueError):
        optimize(lambda p: 0.0, LINE, 0)
    with pytest.raises(ValueError):
        optimize(lambda p: 0.0, LINE, 5, "grid")


def test_mixed_space_smbo_runs():
    space = ParamSpace((ParamDim("a", "log", 0.1, 10), ParamDim("k", "int", 1, 5),
                        ParamDim("c", "categorical", choices=("u", "v", "w"))))
    f = lambda p: -abs(math.log(p["a"])) - abs(p["k"] - 3) + (p["c"] == "v")  # noqa: E731
    best, hist = optimize(f, space, 40, "smbo", seed=1)
    assert len(hist) == 40
    assert all(1 <= t.params["k"] <= 5 and t.params["c"] in "uvw" for t in hist)
    assert f(best) == max(t.value for t in hist)


# ---------------------------------------------------------------------------
# protocol


@pytest.fixture(scope="module")
def small_pairs():
    sc = generate_seed_scene(4, 4, 25, "highway")
    sc = dataclasses.replace(sc, intrinsics=sc.intrinsics.scaled(0.5))
    clone = prepare_sequence("s/clone", sc, "clone")
    clone2 = prepare_sequence("s/clone2", sc, "clone")
    fog = prepare_sequence("s/fog", sc, "fog")
    return clone, clone2, fog


def test_self_pair_has_zero_deltas(small_pairs):
    clone, clone2, _ = small_pairs
    rep = run_gap_protocol([(clone, clone2)], budget=6, seed=1)
    (p,) = rep.pairs
    assert all(v == 0 for v in p.deltas.values())
    assert rep.objective == 2 * p.report_a.MOTA
    assert rep.formula == OBJECTIVE_VERSION


def test_protocol_is_deterministic(small_pairs):
    clone, _, fog = small_pairs
    a = run_gap_protocol([(clone, fog)], budget=6, seed=2)
    b = run_gap_protocol([(clone, fog)], budget=6, seed=2)
    assert gap_report_json(a) == gap_report_json(b)
    assert a.history_csv(default_param_space()) == b.history_csv(default_param_space())


def test_global_mode_shares_params(small_pairs):
    clone, clone2, fog = small_pairs
    rep = run_gap_protocol([(clone, fog), (clone2, fog)], budget=5, seed=0, mode="global")
    assert rep.pairs[0].hyperparams == rep.pairs[1].hyperparams
    assert rep.best_params()["mode"] == "global"
    csv_lines = rep.history_csv(default_param_space()).splitlines()
    assert len(csv_lines) == 1 + 5 and csv_lines[1].startswith("global,0,")
    d = json.loads(gap_report_json(rep))
    assert d["mode"] == "global" and len(d["pairs"]) == 2


def test_per_pair_total_is_sum(small_pairs):
    clone, clone2, fog = small_pairs
    rep = run_gap_protocol([(clone, fog), (clone2, clone)], budget=4, seed=0)
    assert rep.objective == pytest.approx(sum(p.objective for p in rep.pairs))
    assert set(rep.best_params()["pairs"]) == {"s/clone~s/fog", "s/clone2~s/clone"}
    assert "total_A" in rep.table() and "total_B" in rep.table()


def test_protocol_argument_errors(small_pairs):
    clone, _, _ = small_pairs
    with pytest.raises(ValueError):
        run_gap_protocol([])
    with pytest.raises(ValueError):
        run_gap_protocol([(clone, clone)], mode="both")
