import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teachset.density import build_surrogate, density_profile
from teachset.errors import (
    AlreadySelectedError,
    EtaNonPositiveError,
    KOutOfRangeError,
    TooManyHalvingsError,
    TooSmallToHalveError,
)
from teachset.geometry import BallDataset, pairwise_distances, poincare_distance
from teachset.halving import (
    SelectionState,
    all_gains,
    build_kernel,
    deflate,
    deflation_gain,
    greedy_select,
    halve_once,
    halving_sizes,
    run_halving,
)

from conftest import random_in_ball

ETA = 1e-4


def ds_from(points):
    return BallDataset(np.asarray(points, float), None, 1.0)


def direct_greedy(H, c_diag, eta, k):
    """Unscaled textbook deflation, recomputing every gain from scratch."""
    m = len(H)
    tr = np.trace(H) / m
    eps = max(1e-9 * (tr if tr > 0 else np.abs(H).mean()), np.finfo(float).tiny)
    R = H.astype(float).copy()
    picks, all_steps = [], []
    for _ in range(k):
        cand = [c for c in range(m) if c not in picks]
        gains = {}
        traces = {}
        for c in cand:
            d = R[c, c] + eta * c_diag[c] + eps
            gains[c] = float(R[:, c] @ R[:, c] / d)
            traces[c] = float(np.trace(R - np.outer(R[:, c], R[:, c]) / d))
        all_steps.append((gains, traces))
        best = max(gains.values())
        c = min(c for c in cand if gains[c] == best)
        d = R[c, c] + eta * c_diag[c] + eps
        R = R - np.outer(R[:, c], R[:, c]) / d
        np.fill_diagonal(R, np.maximum(np.diag(R), 0.0))
        picks.append(c)
    return picks, all_steps


class TestBuildKernel:
    def test_single_point(self):
        km = build_kernel(ds_from([[0.3, 0.4]]), [0], ETA)
        assert km.H.tolist() == [[0.0]]
        assert km.C_diag[0] == pytest.approx(0.25)

    def test_collinear(self):
        ds = ds_from([[-0.5], [0.0], [0.5]])
        km = build_kernel(ds, [0, 1, 2], ETA)
        for i in range(3):
            for j in range(3):
                assert km.H[i, j] == pytest.approx(
                    poincare_distance(ds.points[i], ds.points[j]), abs=1e-12)
        assert km.C_diag.tolist() == [0.25, 0.0, 0.25]

    def test_restriction_bit_exact(self, rng):
        ds = ds_from(random_in_ball(rng, 40, 3))
        dm = pairwise_distances(ds)
        prof = density_profile(ds, dm=dm)
        sur = build_surrogate(prof, 30)
        km = build_kernel(ds, sur, ETA)
        idx = sur.kept_indices
        assert np.array_equal(km.H, dm.values[np.ix_(idx, idx)])
        assert np.array_equal(km.index_map, idx)
        assert np.array_equal(build_kernel(ds, sur, ETA, dm=dm).H, km.H)

    def test_eta_positive(self):
        with pytest.raises(EtaNonPositiveError):
            build_kernel(ds_from([[0.1, 0.0]]), [0], 0.0)

    def test_rbf_option(self, rng):
        ds = ds_from(random_in_ball(rng, 12, 2))
        km = build_kernel(ds, range(12), ETA, kind="rbf", bandwidth=0.5)
        assert np.allclose(np.diag(km.H), 1.0)
        assert km.bandwidth == 0.5


class TestGain:
    def test_zero_column(self):
        km = build_kernel(ds_from([[0.2, 0.1]]), [0], ETA)
        assert deflation_gain(SelectionState.start(km), km, 0) == 0.0

    def test_symmetric_pair_ties_low(self):
        km = build_kernel(ds_from([[-0.5], [0.5]]), [0, 1], ETA)
        state = SelectionState.start(km)
        assert deflation_gain(state, km, 0) == deflation_gain(state, km, 1)
        assert greedy_select(km, 1).selected == [0]

    def test_collinear_argmax(self):
        ds = ds_from([[-0.5], [0.0], [0.5]])
        km = build_kernel(ds, [0, 1, 2], ETA)
        state = SelectionState.start(km)
        direct = [deflation_gain(state, km, c) for c in range(3)]
        assert greedy_select(km, 1).selected == [int(np.argmax(direct))]

    def test_already_selected(self):
        km = build_kernel(ds_from([[-0.5], [0.5]]), [0, 1], ETA)
        state = greedy_select(km, 1)
        with pytest.raises(AlreadySelectedError):
            deflation_gain(state, km, 0)
        assert np.isnan(all_gains(state, km)[0])

    def test_gains_nonnegative(self, rng):
        km = build_kernel(ds_from(random_in_ball(rng, 30, 2)), range(30), ETA)
        assert min(greedy_select(km, 15).gains) >= -1e-9


class TestGreedy:
    def test_k_range(self):
        km = build_kernel(ds_from([[0.1], [0.2]]), [0, 1], ETA)
        with pytest.raises(KOutOfRangeError):
            greedy_select(km, 0)
        with pytest.raises(KOutOfRangeError):
            greedy_select(km, 3)

    def test_exhaustion(self, rng):
        km = build_kernel(ds_from(random_in_ball(rng, 7, 2)), range(7), ETA)
        assert sorted(greedy_select(km, 7).selected) == list(range(7))

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_direct_oracle(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 11))
        k = int(rng.integers(1, min(3, m) + 1))
        ds = ds_from(random_in_ball(rng, m, int(rng.integers(1, 4))))
        km = build_kernel(ds, range(m), ETA)
        picks, steps = direct_greedy(km.H, km.C_diag, ETA, k)
        state = greedy_select(km, k)
        assert state.selected == picks
        for g, (gains, traces) in zip(state.gains, steps):
            assert g == pytest.approx(max(gains.values()), rel=1e-9)

    def test_min_mode_differs(self, rng):
        km = build_kernel(ds_from(random_in_ball(rng, 9, 2)), range(9), ETA)
        lo = greedy_select(km, 1, mode="min").selected[0]
        gains = all_gains(SelectionState.start(km), km)
        assert lo == int(np.argmin(gains))

    def test_duplicate_collapses_relative(self):
        # zero-diagonal kernel: the twin's column is untouched by the first
        # pick, but every other gain grows by orders of magnitude past it
        pts = [[0.3, 0.1], [0.3, 0.1], [-0.4, 0.2], [0.0, -0.5]]
        km = build_kernel(ds_from(pts), range(4), ETA)
        state = SelectionState.start(km)
        deflate(state, km, 0)
        state.selected.append(0)
        gains = all_gains(state, km)
        assert gains[1] < 1e-6 * np.nanmax(gains)

    def test_duplicate_collapses_rbf(self):
        pts = [[0.3, 0.1], [0.3, 0.1], [-0.4, 0.2], [0.0, -0.5]]
        km = build_kernel(ds_from(pts), range(4), ETA, kind="rbf", bandwidth=0.5)
        state = SelectionState.start(km)
        before = deflation_gain(state, km, 1)
        deflate(state, km, 0)
        state.selected.append(0)
        assert deflation_gain(state, km, 1) < 1e-3 * before

    def test_trace_nonincreasing(self, rng):
        km = build_kernel(ds_from(random_in_ball(rng, 12, 2)), range(12), ETA,
                          kind="rbf", bandwidth=0.8)
        state = SelectionState.start(km)
        prev = state.trace
        for _ in range(6):
            gains = all_gains(state, km)
            c = int(np.nanargmax(gains))
            deflate(state, km, c)
            state.selected.append(c)
            assert state.trace <= prev * (1 + 1e-9) + 1e-9
            prev = state.trace

    def test_residual_symmetric(self, rng):
        km = build_kernel(ds_from(random_in_ball(rng, 25, 3)), range(25), ETA)
        state = greedy_select(km, 12)
        R = state.residual_H
        assert np.array_equal(R, R.T)
        assert np.all(np.diag(R) >= 0)

    def test_no_overflow_long_run(self, rng):
        km = build_kernel(ds_from(random_in_ball(rng, 200, 2)), range(200), ETA)
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            state = greedy_select(km, 100)
        assert len(set(state.selected)) == 100
        assert np.all(np.isfinite(state.residual_H))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 31), st.integers(3, 12))
    def test_permutation_equivariance(self, seed, m):
        rng = np.random.default_rng(seed)
        pts = random_in_ball(rng, m, 2)
        perm = rng.permutation(m)
        a = greedy_select(build_kernel(ds_from(pts), range(m), ETA), m // 2).selected
        b = greedy_select(build_kernel(ds_from(pts[perm]), range(m), ETA), m // 2).selected
        assert [int(perm[j]) for j in b] == a


class TestHalving:
    def test_sizes(self):
        assert halving_sizes(1230, 6) == [1230, 615, 307, 153, 76, 38, 19]

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 5000), st.integers(0, 12))
    def test_floor_law(self, n, l):
        sizes = halving_sizes(n, l)
        assert all(b == a // 2 for a, b in zip(sizes, sizes[1:]))

    def test_halve_two(self):
        ds = ds_from([[0.1], [0.3]])
        idx, gains, _ = halve_once(ds, [0, 1], ETA)
        assert len(idx) == 1
        with pytest.raises(TooSmallToHalveError):
            halve_once(ds, [0], ETA)

    def test_halve_615(self, rng):
        ds = ds_from(random_in_ball(rng, 615, 2, 0.7))
        idx, _, _ = halve_once(ds, np.arange(615), ETA)
        assert len(idx) == 307
        assert len(set(idx.tolist())) == 307

    def test_l_zero(self, rng):
        ds = ds_from(random_in_ball(rng, 10, 2))
        trace = run_halving(ds, np.arange(10), ETA, 0)
        assert trace.sizes == [10] and trace.halving_count == 0

    def test_too_many(self, rng):
        ds = ds_from(random_in_ball(rng, 10, 2))
        with pytest.raises(TooManyHalvingsError):
            run_halving(ds, np.arange(10), ETA, 4)
        with pytest.raises(TooManyHalvingsError):
            run_halving(ds, np.arange(10), ETA, -1)

    def test_nesting_and_determinism(self, rng):
        ds = ds_from(random_in_ball(rng, 100, 2, 0.8))
        a = run_halving(ds, np.arange(100), ETA, 4)
        b = run_halving(ds, np.arange(100), ETA, 4)
        assert a.sizes == [100, 50, 25, 12, 6]
        for prev, cur in zip(a.stages, a.stages[1:]):
            assert set(cur.tolist()) <= set(prev.tolist())
        for x, y in zip(a.stages, b.stages):
            assert np.array_equal(x, y)
