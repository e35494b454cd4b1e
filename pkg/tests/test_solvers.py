"""Solver kernels: update-rule statistics, annealing, replication contracts."""

import itertools
from dataclasses import replace

import numpy as np
import pytest

from isingmimo import (
    AnnealSchedule,
    BinaryIsingModel,
    OimParams,
    SolverConfig,
    binary_energy,
    bpim_solve,
    build_constellation,
    build_instance,
    build_pdit_model,
    default_parameters,
    dpim_solve,
    ml_exhaustive,
    oim_solve,
    pdit_energy,
    run_replicated,
    sample_pdit_chain,
    sample_spin_chain,
)
from isingmimo.solvers import (
    bpim_replica,
    bpim_solve_many,
    dpim_replica,
    oim_replica,
    _spawn_rngs,
)


def ferromagnet(coupling=1.0):
    j = np.array([[0.0, coupling], [coupling, 0.0]])
    return BinaryIsingModel(j, np.zeros(2), 0.0, 2)


class TestAnnealSchedule:
    def test_beta_ramp_boundaries(self):
        sched = AnnealSchedule("beta", 0.8, 100)
        vals = sched.values()
        assert vals[0] == pytest.approx(0.008)
        assert vals[-1] == pytest.approx(0.8)
        assert (np.diff(vals) > 0).all()

    def test_temperature_ramp_reaches_zero(self):
        vals = AnnealSchedule("temperature", 30.0, 4).values()
        np.testing.assert_allclose(vals, [22.5, 15.0, 7.5, 0.0])

    def test_constant_shape(self):
        np.testing.assert_array_equal(
            AnnealSchedule("beta", 0.5, 3, shape="constant").values(), [0.5] * 3
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            AnnealSchedule("gamma", 1.0, 10)
        with pytest.raises(ValueError):
            AnnealSchedule("beta", 0.0, 10)
        with pytest.raises(ValueError):
            AnnealSchedule("beta", 1.0, 0)
        with pytest.raises(ValueError):
            AnnealSchedule("beta", 1.0, 10, shape="cubic")


class TestDefaultParameters:
    def test_bpsk_bpim_scaling(self):
        cfg = default_parameters("bpim", 64, 2)
        assert cfg.schedule.peak == pytest.approx(np.sqrt(3) / 16)
        assert cfg.replicas == 64 and cfg.schedule.n_iterations == 100

    def test_qam_bpim_scaling(self):
        cfg = default_parameters("bpim", 32, 16)
        assert cfg.schedule.peak == pytest.approx(13 / 128)

    def test_dpim_scaling_is_order_free(self):
        for order in (4, 16, 64, 256):
            cfg = default_parameters("dpim", 32, order)
            assert cfg.schedule.peak == pytest.approx(np.sqrt(2) / 16)

    def test_oim_parameters(self):
        cfg = default_parameters("oim", 64, 2)
        assert cfg.schedule.kind == "temperature"
        assert cfg.schedule.peak == 30.0
        assert cfg.oim.coupling == pytest.approx(3.5 / 16)
        assert cfg.oim.binarization == pytest.approx(1.3 / 16)
        assert cfg.oim.dt == 0.01

    def test_oim_rejected_for_qam(self):
        with pytest.raises(ValueError):
            default_parameters("oim", 16, 4)

    def test_unknown_paradigm(self):
        with pytest.raises(ValueError):
            default_parameters("tabu", 16, 2)


class TestPbitKernel:
    def test_zero_beta_is_fair_coin(self):
        # With beta = 0 the update ignores the field entirely.
        model = BinaryIsingModel(np.zeros((4, 4)), np.full(4, 5.0), 0.0, 4)
        chains = sample_spin_chain(model, 0.0, 2500, seed=0, n_chains=10)
        frac_up = (chains > 0).mean()
        # 10^5 draws, sigma = 0.5/sqrt(1e5)
        assert abs(frac_up - 0.5) < 3 * 0.5 / np.sqrt(chains.size)

    def test_large_beta_saturates(self):
        model = BinaryIsingModel(np.zeros((2, 2)), np.array([3.0, -3.0]), 0.0, 2)
        chains = sample_spin_chain(model, 50.0, 500, seed=1, n_chains=4)
        assert (chains[:, :, 0] == 1).all()
        assert (chains[:, :, 1] == -1).all()

    def test_single_site_detailed_balance(self):
        # P(+1)/P(-1) must equal exp(2 beta I); pin the neighbour spin by a
        # huge bias and measure the conditional of the free spin.
        beta, coupling = 0.7, 0.9
        j = np.array([[0.0, coupling], [coupling, 0.0]])
        model = BinaryIsingModel(j, np.array([0.0, 50.0]), 0.0, 2)
        chains = sample_spin_chain(model, beta, 40000, seed=3, n_chains=5)
        assert (chains[:, :, 1] == 1).all()
        p_up = (chains[:, :, 0] == 1).mean()
        expected = 1.0 / (1.0 + np.exp(-2 * beta * coupling))
        sigma = np.sqrt(expected * (1 - expected) / chains[:, :, 0].size)
        # sequential-scan samples are weakly correlated; allow 5 sigma
        assert abs(p_up - expected) < 5 * max(sigma, 1e-4)

    def test_ferromagnet_ground_state(self):
        model = ferromagnet()
        sched = AnnealSchedule("beta", 5.0, 100)
        aligned = 0
        for seed in range(100):
            out = bpim_solve(model, SolverConfig(1, sched, seed=seed))
            aligned += out.best_state[0] == out.best_state[1]
        assert aligned >= 99

    def test_stationary_distribution_small_model(self):
        c = build_constellation(2)
        inst, _ = build_instance(c, 3, 6.0, 17)
        from isingmimo import build_binary_model, realify

        model = build_binary_model(realify(inst.channel, inst.rx_vector, 2))
        beta = 0.15
        states = np.array(list(itertools.product((-1.0, 1.0), repeat=3)))
        exact = np.exp(-beta * np.array([binary_energy(s, model) for s in states]))
        exact /= exact.sum()
        chains = sample_spin_chain(model, beta, 20000, seed=6, n_chains=25)
        samples = chains[:, 1000:, :].reshape(-1, 3)
        keys = ((samples > 0) * (2 ** np.arange(2, -1, -1))).sum(axis=1)
        emp = np.bincount(keys, minlength=8) / keys.size
        order = ((states > 0) * (2 ** np.arange(2, -1, -1))).sum(axis=1)
        tv = 0.5 * np.abs(emp[order] - exact).sum()
        assert tv < 0.01


class TestPditKernel:
    def test_zero_beta_uniform(self):
        c = build_constellation(4)
        model = build_pdit_model(np.eye(2, dtype=complex), np.ones(2) + 1j, 4)
        chains = sample_pdit_chain(model, 0.0, 3000, seed=2, n_chains=8)
        symbols = chains[..., 0] + 1j * chains[..., 1]
        counts = np.array([(symbols == p).mean() for p in c.alphabet])
        sigma = np.sqrt(0.25 * 0.75 / symbols.size)
        assert np.abs(counts - 0.25).max() < 4 * sigma

    def test_single_site_conditional_exact(self):
        # One p-dit: the chain must sample the exact Boltzmann distribution.
        rng = np.random.default_rng(4)
        H = np.array([[0.7 - 0.2j]])
        y = np.array([1.1 + 0.4j])
        model = build_pdit_model(H, y, 16)
        beta = 0.3
        levels = model.pam_levels
        cand = np.array([(a, b) for a in levels for b in levels])
        energies = np.array([pdit_energy(d.reshape(1, 2), model) for d in cand])
        exact = np.exp(-beta * (energies - energies.min()))
        exact /= exact.sum()
        chains = sample_pdit_chain(model, beta, 40000, seed=5, n_chains=5)
        samples = chains.reshape(-1, 2)
        emp = np.array(
            [((samples[:, 0] == a) & (samples[:, 1] == b)).mean() for a, b in cand]
        )
        tv = 0.5 * np.abs(emp - exact).sum()
        assert tv < 0.01

    def test_finds_exhaustive_argmin(self):
        c = build_constellation(4)
        inst, _ = build_instance(c, 8, 12.0, 55)
        oracle = ml_exhaustive(inst.channel, inst.rx_vector, c)
        model = build_pdit_model(inst.channel, inst.rx_vector, 4)
        cfg = default_parameters("dpim", 8, 4)
        hits = 0
        for seed in range(100):
            out = dpim_solve(model, c, replace(cfg, seed=seed))
            symbols = out.best_state[:, 0] + 1j * out.best_state[:, 1]
            hits += bool(np.array_equal(symbols, oracle.symbols))
        assert hits >= 95

    def test_energy_bookkeeping(self):
        c = build_constellation(16)
        inst, _ = build_instance(c, 6, 10.0, 77)
        model = build_pdit_model(inst.channel, inst.rx_vector, 16)
        out = dpim_solve(model, c, replace(default_parameters("dpim", 6, 16), seed=1))
        assert out.best_energy == pytest.approx(
            pdit_energy(out.best_state, model), rel=1e-9
        )
        assert out.best_energy <= out.final_energies.min() + 1e-12
        assert out.final_energies.shape == (64,)

    def test_order_mismatch_rejected(self):
        c = build_constellation(16)
        model = build_pdit_model(np.eye(2, dtype=complex), np.ones(2) + 0j, 4)
        with pytest.raises(ValueError, match="order"):
            dpim_solve(model, c, replace(default_parameters("dpim", 2, 4), seed=0))


class TestOscillatorKernel:
    def test_coupling_vanishes_at_equal_phases(self):
        from isingmimo.solvers import _oim_drift

        model = ferromagnet()
        phi = np.full((1, 2), 0.83)
        drift = _oim_drift(
            np.sin(phi), np.cos(phi), model.j_matrix, np.zeros((1, 2)), OimParams(1.0, 0.0)
        )
        np.testing.assert_allclose(drift, 0.0, atol=1e-12)

    def test_binarization_term_values(self):
        from isingmimo.solvers import _oim_drift

        model = BinaryIsingModel(np.zeros((1, 1)), np.zeros(1), 0.0, 1)
        for phi_val, expected in ((np.pi / 2, 0.0), (np.pi / 4, -1.0)):
            phi = np.array([[phi_val]])
            drift = _oim_drift(
                np.sin(phi), np.cos(phi), model.j_matrix, np.zeros((1, 1)), OimParams(0.0, 1.0)
            )
            assert drift[0, 0] == pytest.approx(expected, abs=1e-12)

    def test_two_oscillator_locking(self):
        # Noiseless relaxation from a small phase split locks in phase and
        # reads out aligned spins.
        model = ferromagnet()
        rep = oim_replica(
            model, np.zeros(3000), OimParams(1.0, 1.0), np.random.default_rng(12)
        )
        assert rep.final_state[0] == rep.final_state[1]

    def test_field_pinning(self):
        # Positive bias must pull the readout to +1 (annealed run).
        model = BinaryIsingModel(np.zeros((1, 1)), np.array([2.0]), 0.0, 1)
        cfg = SolverConfig(
            replicas=8,
            schedule=AnnealSchedule("temperature", 2.0, 500),
            oim=OimParams(1.0, 0.2),
            seed=3,
        )
        out = oim_solve(model, cfg)
        assert out.best_state[0] == 1.0

    def test_readout_local_minimum_property(self):
        # At zero noise with a binarizing slope the converged readout should
        # be single-flip stable on most random coupling instances.
        rng = np.random.default_rng(123)
        ok = 0
        n_models = 60
        for trial in range(n_models):
            a = rng.standard_normal((8, 8))
            j = (a + a.T) / 2
            np.fill_diagonal(j, 0.0)
            model = BinaryIsingModel(j, np.zeros(8), 0.0, 8)
            rep = oim_replica(
                model,
                np.zeros(5000),
                OimParams(coupling=1.0, binarization=0.15),
                np.random.default_rng(5000 + trial),
            )
            s = rep.final_state
            flip_gain = 2 * s * (j @ s)
            ok += bool((flip_gain >= -1e-9).all())
        assert ok >= 0.9 * n_models

    def test_requires_temperature_schedule_and_params(self):
        model = ferromagnet()
        with pytest.raises(ValueError):
            oim_solve(model, SolverConfig(2, AnnealSchedule("beta", 1.0, 10), seed=0))
        with pytest.raises(ValueError):
            oim_solve(
                model, SolverConfig(2, AnnealSchedule("temperature", 1.0, 10), seed=0)
            )


class TestReplication:
    def test_r1_identical_to_kernel_run(self):
        model = ferromagnet()
        betas = AnnealSchedule("beta", 2.0, 50).values()

        def kernel(rng):
            return bpim_replica(model, betas, rng)

        out = run_replicated(kernel, 1, seed=9, n_iterations=50)
        direct = kernel(_spawn_rngs(9, 1)[0])
        np.testing.assert_array_equal(out.best_state, direct.best_state)
        assert out.best_energy == direct.best_energy

    def test_best_energy_monotone_in_replicas(self):
        c = build_constellation(2)
        inst, _ = build_instance(c, 10, 3.0, 8)
        from isingmimo import build_binary_model, realify

        model = build_binary_model(realify(inst.channel, inst.rx_vector, 2))
        sched = AnnealSchedule("beta", 0.2, 30)
        energies = [
            bpim_solve(model, SolverConfig(r, sched, seed=13)).best_energy
            for r in (1, 2, 4, 8, 16)
        ]
        assert all(a >= b for a, b in zip(energies, energies[1:]))

    def test_parallel_serial_bit_identical(self):
        model = ferromagnet()
        betas = AnnealSchedule("beta", 1.5, 40).values()

        def kernel(rng):
            return bpim_replica(model, betas, rng)

        serial = run_replicated(kernel, 6, seed=21, n_iterations=40)
        threaded = run_replicated(kernel, 6, seed=21, max_workers=3, n_iterations=40)
        np.testing.assert_array_equal(serial.best_state, threaded.best_state)
        np.testing.assert_array_equal(serial.final_energies, threaded.final_energies)
        assert serial.best_replica == threaded.best_replica

    def test_solve_matches_replica_kernels(self):
        c = build_constellation(2)
        inst, _ = build_instance(c, 6, 8.0, 30)
        from isingmimo import build_binary_model, realify

        model = build_binary_model(realify(inst.channel, inst.rx_vector, 2))
        cfg = SolverConfig(5, AnnealSchedule("beta", 0.5, 25), seed=77)
        out = bpim_solve(model, cfg)
        via_kernels = run_replicated(
            lambda rng: bpim_replica(model, cfg.schedule.values(), rng),
            cfg.replicas,
            cfg.seed,
            n_iterations=25,
        )
        np.testing.assert_array_equal(out.best_state, via_kernels.best_state)
        np.testing.assert_array_equal(out.final_energies, via_kernels.final_energies)
        assert out.best_energy == via_kernels.best_energy
        assert out.best_iteration == via_kernels.best_iteration

    def test_batched_solve_matches_singles(self):
        c = build_constellation(4)
        from isingmimo import build_binary_model, build_transform, realify

        cfg = replace(default_parameters("bpim", 5, 4), replicas=10)
        t = build_transform(5, 4)
        inst0, _ = build_instance(c, 5, 8.0, 40, message_index=0)
        models = []
        for msg in range(6):
            inst, _ = build_instance(c, 5, 8.0, 40, message_index=msg)
            models.append(build_binary_model(realify(inst.channel, inst.rx_vector, 4), t))
        seeds = list(range(6))
        batched = bpim_solve_many(models, cfg, seeds)
        for model, seed, out in zip(models, seeds, batched):
            single = bpim_solve(model, replace(cfg, seed=seed))
            np.testing.assert_array_equal(out.best_state, single.best_state)
            assert out.best_energy == single.best_energy
            np.testing.assert_array_equal(out.final_energies, single.final_energies)

    def test_batched_requires_shared_coupling(self):
        c = build_constellation(4)
        from isingmimo import build_binary_model, build_transform, realify

        t = build_transform(3, 4)
        models = []
        for ch in range(2):
            inst, _ = build_instance(c, 3, 8.0, ch)
            models.append(build_binary_model(realify(inst.channel, inst.rx_vector, 4), t))
        with pytest.raises(ValueError, match="share"):
            bpim_solve_many(models, default_parameters("bpim", 3, 4), [0, 1])

    def test_outcome_energy_consistent(self):
        c = build_constellation(2)
        inst, _ = build_instance(c, 12, 6.0, 19)
        from isingmimo import build_binary_model, realify

        model = build_binary_model(realify(inst.channel, inst.rx_vector, 2))
        out = bpim_solve(model, replace(default_parameters("bpim", 12, 2), seed=4))
        assert out.best_energy == pytest.approx(
            binary_energy(out.best_state, model), rel=1e-9
        )
        assert out.best_energy <= out.final_energies.min() + 1e-12
        assert 1 <= out.best_iteration <= out.n_iterations

    def test_random_scan_supported_and_seeded(self):
        model = ferromagnet()
        cfg = SolverConfig(
            3, AnnealSchedule("beta", 2.0, 30), seed=5, random_scan=True
        )
        a = bpim_solve(model, cfg)
        b = bpim_solve(model, cfg)
        np.testing.assert_array_equal(a.best_state, b.best_state)
        assert a.best_energy == b.best_energy


class TestChainSampling:
    def test_spin_chain_shapes_and_values(self):
        model = ferromagnet()
        chains = sample_spin_chain(model, 0.4, 12, seed=0, n_chains=3)
        assert chains.shape == (3, 12, 2)
        assert set(np.unique(chains)) <= {-1, 1}

    def test_pdit_chain_shapes_and_values(self):
        model = build_pdit_model(np.eye(2, dtype=complex), np.ones(2) + 0j, 16)
        chains = sample_pdit_chain(model, 0.2, 9, seed=0, n_chains=2)
        assert chains.shape == (2, 9, 2, 2)
        assert set(np.unique(chains)) <= {-3, -1, 1, 3}
