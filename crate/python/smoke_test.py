"""Smoke test for the `multiverse` extension module.

Build and install the module first:

    pip install --no-build-isolation -e crates/python

then run `python python/smoke_test.py` (or `pytest python/`).
"""

import math
from fractions import Fraction

import multiverse as mv


def test_spin():
    s = mv.make_skew_state(math.pi / 2)
    assert abs(mv.born_weight(s) - 0.5) < 1e-15
    assert abs(s.up - math.sqrt(0.5)) < 1e-15
    assert mv.branch_weights(0.75) == (1.5, 0.5)
    try:
        mv.Spinor(1, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("unnormalized spinor accepted")


def test_counting():
    naive = mv.closed_form(10, mode="naive")
    assert naive.exact_counts[5] == 252
    assert naive.total == 1024
    assert naive.peak == 5

    third = mv.enumerate_tree(12, Fraction(1, 3))
    assert third.exact_counts == mv.closed_form(12, "1/3").exact_counts
    assert third.total == 2**12

    assert mv.closed_form(20, 0.75).peak == 15
    assert mv.peak(40, Fraction(1, 4)) == 10
    assert not mv.closed_form(20, 0.75).is_exact


def test_sampling():
    a = mv.sample_histories(8, 0.25, 2000, seed=3)
    assert a == mv.sample_histories(8, 0.25, 2000, seed=3)
    assert all(len(h) == 8 and set(h) <= {"+", "-"} for h in a)
    plus = sum(h.count("+") for h in a) / (8 * len(a))
    assert abs(plus - 0.25) < 4 * math.sqrt(0.25 * 0.75 / (8 * len(a)))


def test_narratives():
    r = mv.compare_narratives(20, math.pi / 3)
    assert (r.peak_weighted, r.peak_naive) == (15, 10)
    assert r.narratives_disagree and r.tv_naive_weighted > 0.3
    assert r.empirical is None
    assert mv.compare_narratives(20, math.pi / 2).tv_naive_weighted == 0.0

    b = mv.born_convergence(2 * math.pi / 3, 1, 100_000, seed=1)
    assert abs(b.empirical["plus_frequency"] - 0.25) < 0.0055


def test_dynamics():
    p = mv.SgParams()
    assert (p.grid_points, p.dt, p.t_final) == (1024, 1e-3, 4.0)
    state = mv.init_packet(mv.make_skew_state(math.pi / 2), p)
    end, rows = mv.evolve_recorded(state, p, record_every=1.0)
    assert [r["t"] for r in rows] == [0.0, 1.0, 2.0, 3.0, 4.0]
    d = end.diagnostics()
    assert abs(d["mean_y_plus"] - 4.0) < 0.04 and abs(d["mean_y_minus"] + 4.0) < 0.04
    assert d["spatial_overlap"] < 1e-6
    q_plus, q_minus = end.branch_amplitudes()
    assert abs(q_plus - 0.5) < 1e-6 and abs(q_minus - 0.5) < 1e-6
    assert abs(mv.projection_infidelity(math.pi / 2, p) - 0.5) < 1e-6
    assert len(end.plus) == len(end.positions) == 1024

    try:
        mv.evolve(state, mv.SgParams(t_final=40.0))
    except mv.SolverError:
        pass
    else:
        raise AssertionError("boundary guard did not trigger")


def test_end_to_end():
    r = mv.end_to_end(2 * math.pi / 3, 20)
    assert abs(r.q_numeric - 0.25) < 1e-6
    assert r.report.peak_weighted == 5
    assert r.max_distribution_deviation < 1e-6


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_")]
    for name, fn in tests:
        fn()
        print(f"ok   {name}")
    print(f"{len(tests)} passed")
