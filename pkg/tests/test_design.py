"""Design-layer tests: extraction, water-filling, baselines, dominance."""

import numpy as np
import pytest

from pilotsnr import design, snr
from pilotsnr.channel import (
    ChannelSubspace,
    build_exponential_correlation,
    eigen_subspace,
    standard_circular,
)
from pilotsnr.design import (
    DegeneratePilotWarning,
    PilotMatrix,
    SolverConvergenceWarning,
    design_block_iid,
    design_mse_min,
    design_orthogonal_baseline,
    design_random_baseline,
    design_sdr,
    factorize_or_randomize,
    waterfill_nu,
    waterfill_pilot,
)
from pilotsnr.kalman import KalmanBelief
from pilotsnr.sdp import SolverConfig


def _random_belief(rng, dim, mean_scale=1.0):
    mean = mean_scale * standard_circular(rng, dim)
    q, _ = np.linalg.qr(standard_circular(rng, (dim, dim)))
    lam = rng.uniform(0.2, 2.0, dim)
    cov = (q * lam) @ q.conj().T
    return KalmanBelief(mean, (cov + cov.conj().T) / 2)


class TestPilotMatrix:
    def test_rejects_power_above_budget(self):
        s = np.full((2, 2), 10.0 + 0j)
        with pytest.raises(ValueError):
            PilotMatrix(s, 1.0)

    def test_rejects_more_columns_than_rows(self):
        with pytest.raises(ValueError):
            PilotMatrix(np.zeros((2, 3), dtype=complex), 4.0)

    def test_symbols_read_only(self):
        p = PilotMatrix(np.eye(2, dtype=complex), 4.0)
        with pytest.raises(ValueError):
            p.symbols[0, 0] = 5.0

    def test_power_property(self):
        p = PilotMatrix(np.diag([1.0, 2.0]).astype(complex), 5.0)
        assert p.power == pytest.approx(5.0, rel=1e-15)
        assert p.train_len == 2
        assert p.rank == 2


class TestFactorization:
    def _obj(self, rng, dim, budget):
        belief = _random_belief(rng, dim)
        return snr.build_objective(belief, 2.0, budget)

    def test_exact_rank_one(self):
        rng = np.random.default_rng(121)
        s = standard_circular(rng, 3)
        gram = np.outer(s, s.conj())
        out = factorize_or_randomize(gram, 2, 10, self._obj(rng, 3, 20.0), rng)
        assert out.shape == (3, 2)
        np.testing.assert_allclose(out @ out.conj().T, gram, atol=1e-10)

    def test_exact_rank_matches_train_len(self):
        rng = np.random.default_rng(122)
        q, _ = np.linalg.qr(standard_circular(rng, (4, 4)))
        gram = (q[:, :2] * np.array([2.0, 1.0])) @ q[:, :2].conj().T
        gram = (gram + gram.conj().T) / 2
        out = factorize_or_randomize(gram, 2, 10, self._obj(rng, 4, 3.0), rng)
        np.testing.assert_allclose(out @ out.conj().T, gram, atol=1e-10)

    def test_zero_gram_warns_and_returns_zeros(self):
        rng = np.random.default_rng(123)
        with pytest.warns(DegeneratePilotWarning):
            out = factorize_or_randomize(
                np.zeros((3, 3), dtype=complex), 2, 10, self._obj(rng, 3, 6.0), rng
            )
        np.testing.assert_array_equal(out, np.zeros((3, 2)))

    def test_randomized_beats_plain_truncation(self):
        rng = np.random.default_rng(124)
        obj = self._obj(rng, 5, 8.0)
        raw = standard_circular(rng, (5, 5))
        gram = raw @ raw.conj().T
        gram = 8.0 * (gram + gram.conj().T) / 2 / np.trace(gram).real
        out = factorize_or_randomize(gram, 2, 50, obj, np.random.default_rng(9))
        assert out.shape == (5, 2)
        # full budget is spent
        assert np.linalg.norm(out) ** 2 == pytest.approx(8.0, rel=1e-9)
        # the deterministic eigenvalue truncation is always in the candidate
        # set, so the winner can only improve on it
        w, v = np.linalg.eigh(gram)
        top = v[:, ::-1][:, :2] * np.sqrt(np.clip(w[::-1][:2], 0, None))
        top *= np.sqrt(8.0) / np.linalg.norm(top)
        assert snr.expected_snr_analytic(
            obj, out @ out.conj().T
        ) >= snr.expected_snr_analytic(obj, top @ top.conj().T) - 1e-9

    def test_high_rank_without_rng_raises(self):
        rng = np.random.default_rng(125)
        obj = self._obj(rng, 4, 4.0)
        raw = standard_circular(rng, (4, 4))
        gram = raw @ raw.conj().T
        gram = (gram + gram.conj().T) / 2
        with pytest.raises(ValueError):
            factorize_or_randomize(gram, 2, 10, obj, None)


class TestBlockIidDesign:
    # 16-antenna exponential profile, r = 0.9, budget 30, gamma = 10
    _LEVELS = np.array([17.232334623423, 9.285976572839, 3.481688797663])
    _NU = 0.0943584828346502

    def _paper_like(self):
        corr = build_exponential_correlation(16, 0.9)
        return eigen_subspace(corr, 0.9997)

    def test_strong_direction_allocation(self):
        sub = self._paper_like()
        sol = design_block_iid(sub.eigenvalues, 10.0, 10.0, 3)
        np.testing.assert_array_equal(sol.indices, [0, 1, 2])
        np.testing.assert_allclose(sol.levels, self._LEVELS, rtol=1e-7)
        assert sol.nu == pytest.approx(self._NU, rel=1e-7)
        assert sol.levels.sum() == pytest.approx(30.0, rel=1e-9)

    def test_budget_conserved(self):
        rng = np.random.default_rng(131)
        for _ in range(25):
            rank = int(rng.integers(1, 9))
            t_t = int(rng.integers(1, rank + 1))
            lam = np.sort(10.0 ** rng.uniform(-1, 1, rank))[::-1]
            gamma = float(10.0 ** rng.uniform(-0.5, 1.0))
            rho = float(10.0 ** rng.uniform(-0.5, 1.0))
            sol = design_block_iid(lam, gamma, rho, t_t)
            assert sol.levels.sum() == pytest.approx(rho * t_t, rel=1e-9)

    def test_level_formulas_agree(self):
        rng = np.random.default_rng(132)
        for _ in range(25):
            rank = int(rng.integers(1, 9))
            t_t = int(rng.integers(1, rank + 1))
            lam = np.sort(10.0 ** rng.uniform(-1, 1, rank))[::-1]
            gamma = float(10.0 ** rng.uniform(-0.5, 1.0))
            rho = float(10.0 ** rng.uniform(-0.5, 1.0))
            sol = design_block_iid(lam, gamma, rho, t_t)
            top = lam[sol.indices]
            b = gamma + 1.0 / top
            form_a = np.clip(-b + np.sqrt(b / (sol.nu * (b - gamma))), 0, None)
            form_b = np.clip(
                -gamma - 1.0 / top + np.sqrt((gamma * top + 1.0) / sol.nu),
                0,
                None,
            )
            np.testing.assert_allclose(form_a, form_b, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(sol.levels, form_a, rtol=1e-7, atol=1e-9)

    def test_active_set_is_prefix_and_monotone(self):
        rng = np.random.default_rng(133)
        for _ in range(25):
            rank = int(rng.integers(2, 10))
            lam = np.sort(10.0 ** rng.uniform(-1, 1, rank))[::-1]
            # force distinct eigenvalues so the prefix claim is sharp
            lam += np.linspace(rank * 1e-6, 0, rank)
            t_t = int(rng.integers(1, rank + 1))
            sol = design_block_iid(lam, 3.0, 0.8, t_t)
            active = sol.levels > 0
            first_off = (
                int(np.argmin(active)) if not active.all() else active.size
            )
            assert not active[first_off:].any()
            on = sol.levels[active]
            assert np.all(np.diff(on) <= 1e-12)

    def test_single_direction_takes_all_power(self):
        sol = design_block_iid(np.array([1.7]), 2.0, 5.0, 1)
        assert sol.levels[0] == pytest.approx(5.0, rel=1e-9)

    def test_waterfill_nu_rejects_bad_offsets(self):
        with pytest.raises(ValueError):
            waterfill_nu(np.array([1.0, 0.5]), 1.0, 3.0)  # offsets must exceed gamma


class TestWaterfillPilot:
    def test_embeds_levels_on_indexed_directions(self):
        sol = design_block_iid(np.array([3.0, 2.0, 1.0]), 5.0, 2.0, 2)
        pilot = waterfill_pilot(sol, 3, 2.0)
        s = pilot.symbols
        assert s.shape == (3, 2)
        for col, (idx, level) in enumerate(zip(sol.indices, sol.levels)):
            expected = np.zeros(3, dtype=complex)
            expected[idx] = np.sqrt(level)
            np.testing.assert_allclose(s[:, col], expected, atol=1e-12)


class TestSdrDesign:
    def test_matches_waterfill_at_stationary_zero_mean_belief(self):
        sub = eigen_subspace(build_exponential_correlation(16, 0.9), 0.0)
        belief = KalmanBelief(
            np.zeros(16, dtype=complex), np.diag(sub.eigenvalues).astype(complex)
        )
        pilot = design_sdr(belief, 10.0, 10.0, 3, rng=np.random.default_rng(0))
        gram = pilot.symbols @ pilot.symbols.conj().T
        sol = design_block_iid(sub.eigenvalues, 10.0, 10.0, 3)
        levels_full = np.zeros(16)
        levels_full[sol.indices] = sol.levels
        np.testing.assert_allclose(
            np.diag(gram).real, levels_full, atol=1e-3 * levels_full.max()
        )
        obj = snr.build_objective(belief, 10.0, 30.0)
        assert snr.expected_snr_analytic(obj, gram) == pytest.approx(
            snr.expected_snr_analytic(obj, np.diag(levels_full)), rel=1e-6
        )

    def test_spends_full_budget(self):
        rng = np.random.default_rng(141)
        belief = _random_belief(rng, 5)
        pilot = design_sdr(belief, 4.0, 2.0, 2, rng=rng)
        assert pilot.power == pytest.approx(4.0, rel=1e-9)

    def test_warns_when_not_certified(self):
        rng = np.random.default_rng(142)
        belief = _random_belief(rng, 4)
        cfg = SolverConfig(max_iters=1, kkt_tol=1e-30)
        with pytest.warns(SolverConvergenceWarning, match="not certified"):
            design_sdr(belief, 2.0, 2.0, 2, solver_cfg=cfg, rng=rng)


class TestMseMinDesign:
    def test_matches_classical_waterfill_on_diagonal_prior(self):
        # zero-mean diagonal prior: the error-minimizing allocation levels
        # the inverse eigenvalues, x_i = max(sqrt(1/nu) - 1/lam_i, 0); the
        # budget is small enough that only train_len directions activate
        lam = np.array([4.0, 2.0, 1.0, 0.25])
        budget = 1.0
        belief = KalmanBelief(
            np.zeros(4, dtype=complex), np.diag(lam).astype(complex)
        )
        pilot = design_mse_min(belief, 0.5, 2, rng=np.random.default_rng(3))
        gram = pilot.symbols @ pilot.symbols.conj().T

        def alloc(nu):
            return np.clip(np.sqrt(1.0 / nu) - 1.0 / lam, 0.0, None)

        lo, hi = 1e-8, 1e8
        for _ in range(200):
            mid = np.sqrt(lo * hi)
            if alloc(mid).sum() > budget:
                lo = mid
            else:
                hi = mid
        expected = alloc(np.sqrt(lo * hi))
        np.testing.assert_allclose(
            np.diag(gram).real, expected, atol=1e-3 * expected.max()
        )

    def test_lowers_error_against_uniform_split(self):
        rng = np.random.default_rng(143)
        for _ in range(10):
            belief = _random_belief(rng, 5)
            pilot = design_mse_min(belief, 2.0, 2, rng=rng)
            gram = pilot.symbols @ pilot.symbols.conj().T
            prior_info = np.linalg.inv(belief.cov)
            uniform = standard_circular(rng, (5, 2))
            uniform *= np.sqrt(4.0) / np.linalg.norm(uniform)

            def post_err(x):
                return np.trace(np.linalg.inv(prior_info + x)).real

            assert post_err(gram) <= post_err(
                uniform @ uniform.conj().T
            ) + 1e-9


class TestBaselines:
    def _sub(self, rank=5):
        lam = np.linspace(2.0, 1.0, rank)
        return ChannelSubspace(np.eye(rank, dtype=complex), lam, 0.9)

    def test_orthogonal_round_robin_structure(self):
        sub = self._sub(5)
        rho, t_t = 3.0, 2.0
        p0 = design_orthogonal_baseline(sub, 3.0, 2, 0)
        p1 = design_orthogonal_baseline(sub, 3.0, 2, 1)
        np.testing.assert_allclose(
            p0.symbols[:, 0], np.sqrt(3.0) * np.eye(5)[:, 0], atol=1e-12
        )
        np.testing.assert_allclose(
            p0.symbols[:, 1], np.sqrt(3.0) * np.eye(5)[:, 1], atol=1e-12
        )
        np.testing.assert_allclose(
            p1.symbols[:, 0], np.sqrt(3.0) * np.eye(5)[:, 2], atol=1e-12
        )

    def test_orthogonal_wraps_around(self):
        sub = self._sub(5)
        p2 = design_orthogonal_baseline(sub, 3.0, 2, 2)
        np.testing.assert_allclose(
            p2.symbols[:, 0], np.sqrt(3.0) * np.eye(5)[:, 4], atol=1e-12
        )
        np.testing.assert_allclose(
            p2.symbols[:, 1], np.sqrt(3.0) * np.eye(5)[:, 0], atol=1e-12
        )

    def test_orthogonal_covers_every_direction(self):
        sub = self._sub(5)
        trained = set()
        for block in range(5):
            p = design_orthogonal_baseline(sub, 1.0, 2, block)
            trained |= set(np.flatnonzero(np.abs(p.symbols).sum(axis=1) > 0))
        assert trained == set(range(5))

    def test_random_baseline_column_power(self):
        rng = np.random.default_rng(151)
        p = design_random_baseline(6, 2.5, 3, rng)
        assert p.symbols.shape == (6, 3)
        for col in range(3):
            assert np.linalg.norm(p.symbols[:, col]) ** 2 == pytest.approx(
                2.5, rel=1e-12
            )

    def test_random_baseline_varies_with_rng(self):
        p1 = design_random_baseline(4, 1.0, 2, np.random.default_rng(1))
        p2 = design_random_baseline(4, 1.0, 2, np.random.default_rng(2))
        assert not np.allclose(p1.symbols, p2.symbols)


class TestDesignDominance:
    def test_sdr_beats_alternatives_at_design_time(self):
        rng = np.random.default_rng(161)
        sub = ChannelSubspace(
            np.eye(5, dtype=complex), np.linspace(2.0, 0.5, 5), 0.9
        )
        for trial in range(20):
            belief = _random_belief(rng, 5, mean_scale=float(rng.uniform(0, 2)))
            gamma = float(10.0 ** rng.uniform(-0.5, 1.0))
            rho = float(10.0 ** rng.uniform(-0.5, 1.0))
            obj = snr.build_objective(belief, gamma, rho * 2)
            best = design_sdr(belief, gamma, rho, 2, rng=rng)
            own = snr.expected_snr_analytic(
                obj, best.symbols @ best.symbols.conj().T
            )
            rivals = [
                design_mse_min(belief, rho, 2, rng=rng),
                design_orthogonal_baseline(sub, rho, 2, trial),
                design_random_baseline(5, rho, 2, rng),
            ]
            for rival in rivals:
                other = snr.expected_snr_analytic(
                    obj, rival.symbols @ rival.symbols.conj().T
                )
                assert own >= other - 1e-6 * max(1.0, abs(own))
