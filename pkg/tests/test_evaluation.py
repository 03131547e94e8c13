import numpy as np
import pytest

from rydcomb import (ArchitectureError, ArrayGeometry, ArrayKind,
                     ChannelParams, ConfigError, EvalUnit, ExperimentSpec,
                     NumericError, OptimizerConfig, ReuseArchitecture,
                     compose_wrf, conventional_pc_baseline,
                     evaluate_architecture, fully_digital_se,
                     generate_channel, optimal_digital_combiner,
                     pc_architecture, run_convergence, run_experiment,
                     spectral_efficiency)


def rand_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_unitary(rng, n):
    q, r = np.linalg.qr(rand_complex(rng, (n, n)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def known_sv_channel(rng, n_rx, n_tx, singular_values):
    """Channel with prescribed singular values (oracle construction)."""
    u = rand_unitary(rng, n_rx)
    v = rand_unitary(rng, n_tx)
    s = np.zeros((n_rx, n_tx))
    for i, sv in enumerate(singular_values):
        s[i, i] = sv
    return u @ s @ v.conj().T


def nonupa(n_blocks, depth):
    return ArrayGeometry(ArrayKind.RYDBERG_NON_UPA, n_blocks, depth)


def small_spec(**overrides):
    geometry = nonupa(4, 2)
    arch = ReuseArchitecture(n_blocks=4, lo_depth=2, apd_depth=2)
    units = (
        EvalUnit(label="reuse", kind="rydberg", geometry=geometry, arch=arch),
        EvalUnit(label="digital", kind="ideal_digital", geometry=geometry),
    )
    base = dict(
        channel=ChannelParams(n_tx=16, rx_geometry=geometry, n_clusters=3,
                              n_rays=4),
        units=units, n_streams=2, snr_db=(-10.0, 0.0, 10.0), trials=6, seed=11)
    base.update(overrides)
    return ExperimentSpec(**base)


class TestSpectralEfficiency:
    def test_known_singular_values_closed_form(self):
        # with the combiner equal to the digital optimum the rate is
        # sum_k log2(1 + snr * sigma_k^2 / n_streams)
        rng = np.random.default_rng(0)
        h = known_sv_channel(rng, 4, 5, [2.0, 1.0])
        ref = optimal_digital_combiner(h, 1)
        se = spectral_efficiency(h, np.eye(4), ref.w_opt, ref.f_opt, 1, 1.0)
        assert se == pytest.approx(np.log2(1 + 4.0), abs=1e-10)
        assert se == pytest.approx(2.3219, abs=1e-3)

    def test_zero_snr_gives_zero(self):
        rng = np.random.default_rng(1)
        h = rand_complex(rng, (6, 6))
        ref = optimal_digital_combiner(h, 2)
        se = spectral_efficiency(h, np.eye(6), ref.w_opt, ref.f_opt, 2, 0.0)
        assert se == pytest.approx(0.0, abs=1e-12)

    def test_right_factor_invariance(self):
        rng = np.random.default_rng(2)
        h = rand_complex(rng, (8, 8))
        ref = optimal_digital_combiner(h, 3)
        arch = ReuseArchitecture(n_blocks=4, lo_depth=2, apd_depth=2)
        w_rf = compose_wrf(arch, rng.uniform(0, 2 * np.pi, 4))
        w_bb = rand_complex(rng, (4, 3))
        base = spectral_efficiency(h, w_rf, w_bb, ref.f_opt, 3, 2.0)
        scaled = spectral_efficiency(h, w_rf, w_bb @ np.diag([0.3, -2.0, 5j]),
                                     ref.f_opt, 3, 2.0)
        invertible = rand_complex(rng, (3, 3))
        mixed = spectral_efficiency(h, w_rf, w_bb @ invertible, ref.f_opt, 3,
                                    2.0)
        assert scaled == pytest.approx(base, abs=1e-10)
        assert mixed == pytest.approx(base, abs=1e-10)

    def test_monotone_in_snr(self):
        rng = np.random.default_rng(3)
        h = rand_complex(rng, (6, 6))
        ref = optimal_digital_combiner(h, 2)
        values = [spectral_efficiency(h, np.eye(6), ref.w_opt, ref.f_opt, 2, s)
                  for s in (0.0, 0.5, 1.0, 4.0, 10.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert all(v >= 0 for v in values)

    def test_rank_deficient_combiner_rejected(self):
        rng = np.random.default_rng(4)
        h = rand_complex(rng, (4, 4))
        ref = optimal_digital_combiner(h, 2)
        w_bb = np.zeros((4, 2), dtype=complex)
        with pytest.raises(NumericError):
            spectral_efficiency(h, np.eye(4), w_bb, ref.f_opt, 2, 1.0)

    def test_fully_digital_closed_form_matches_general_path(self):
        rng = np.random.default_rng(5)
        h = rand_complex(rng, (9, 9))
        ref = optimal_digital_combiner(h, 3)
        for snr in (0.1, 1.0, 10.0):
            direct = fully_digital_se(ref.singular_values, 3, snr)
            general = spectral_efficiency(h, np.eye(9), ref.w_opt, ref.f_opt,
                                          3, snr)
            assert direct == pytest.approx(general, abs=1e-10)


class TestEvaluateArchitecture:
    def test_fully_dedicated_equals_ideal_digital(self):
        geometry = nonupa(16, 1)
        params = ChannelParams(n_tx=36, rx_geometry=geometry, n_clusters=3,
                               n_rays=5)
        arch = ReuseArchitecture(n_blocks=16, lo_depth=1, apd_depth=1)
        snr = 10.0 ** (np.array([-10.0, 0.0, 10.0]) / 10.0)
        for seed in range(5):
            h = generate_channel(params, np.random.default_rng(seed)).matrix
            ref = optimal_digital_combiner(h, 3)
            rates, sol = evaluate_architecture(
                h, arch, 3, snr, solver="altmin",
                rng=np.random.default_rng(100 + seed), reference=ref)
            ideal = [fully_digital_se(ref.singular_values, 3, s) for s in snr]
            np.testing.assert_allclose(rates, ideal, atol=1e-9)
            assert sol.residual < 1e-8

    def test_hybrid_never_beats_digital_ceiling(self):
        geometry = nonupa(9, 4)
        params = ChannelParams(n_tx=16, rx_geometry=geometry, n_clusters=3,
                               n_rays=5)
        arch = ReuseArchitecture(n_blocks=9, lo_depth=4, apd_depth=12)
        for seed in range(10):
            h = generate_channel(params, np.random.default_rng(seed)).matrix
            ref = optimal_digital_combiner(h, 2)
            rates, _ = evaluate_architecture(
                h, arch, 2, [1.0], rng=np.random.default_rng(seed),
                reference=ref)
            assert rates[0] <= fully_digital_se(ref.singular_values, 2, 1.0) + 1e-9


class TestConventionalPc:
    def test_full_chain_count_is_fully_digital(self):
        rng = np.random.default_rng(6)
        geometry = ArrayGeometry(ArrayKind.UPA, 16, 1)
        w_opt = np.linalg.qr(rand_complex(rng, (16, 3)))[0][:, :3]
        sol = conventional_pc_baseline(geometry, 16, w_opt, rng=rng)
        assert sol.residual < 1e-8

    def test_row_count_checked(self):
        geometry = ArrayGeometry(ArrayKind.UPA, 16, 1)
        with pytest.raises(ValueError):
            conventional_pc_baseline(geometry, 4,
                                     np.zeros((9, 2), dtype=complex))

    def test_pc_architecture_shape(self):
        arch = pc_architecture(144, 12)
        assert arch.n_blocks == 144
        assert arch.lo_depth == 1
        assert arch.apd_depth == 12
        with pytest.raises(ArchitectureError):
            pc_architecture(144, 13)


class TestRunExperiment:
    def test_deterministic_rerun(self):
        t1 = run_experiment(small_spec())
        t2 = run_experiment(small_spec())
        assert [(r.label, r.sweep_value, r.mean_se, r.stderr) for r in t1.rows] \
            == [(r.label, r.sweep_value, r.mean_se, r.stderr) for r in t2.rows]

    def test_thread_count_invariant(self):
        t1 = run_experiment(small_spec(), threads=1)
        t4 = run_experiment(small_spec(), threads=4)
        assert [(r.mean_se, r.stderr) for r in t1.rows] \
            == [(r.mean_se, r.stderr) for r in t4.rows]

    def test_row_layout(self):
        table = run_experiment(small_spec())
        assert len(table.rows) == 2 * 3
        assert {r.label for r in table.rows} == {"reuse", "digital"}
        assert all(r.sweep_param == "snr_db" for r in table.rows)
        assert all(r.trials == 6 for r in table.rows)
        assert table.failures == 0

    def test_paired_channels_give_identical_digital_curves(self):
        # two digital units on the same geometry must coincide exactly
        geometry = nonupa(4, 2)
        spec = small_spec(units=(
            EvalUnit(label="a", kind="ideal_digital", geometry=geometry),
            EvalUnit(label="b", kind="ideal_digital", geometry=geometry),
        ))
        table = run_experiment(spec)
        a = [r.mean_se for r in table.rows if r.label == "a"]
        b = [r.mean_se for r in table.rows if r.label == "b"]
        assert a == b

    def test_digital_dominates_hybrid_rows(self):
        table = run_experiment(small_spec())
        means = {(r.label, r.sweep_value): r.mean_se for r in table.rows}
        for snr in (-10.0, 0.0, 10.0):
            assert means[("digital", snr)] >= means[("reuse", snr)] - 1e-9

    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            small_spec(units=())
        with pytest.raises(ConfigError):
            small_spec(trials=0)
        with pytest.raises(ConfigError):
            small_spec(snr_db=())
        with pytest.raises(ConfigError, match="chains"):
            # 8 antennas, 8-deep adders -> single chain < 2 streams
            geometry = nonupa(4, 2)
            arch = ReuseArchitecture(n_blocks=4, lo_depth=2, apd_depth=8)
            small_spec(units=(EvalUnit(label="x", kind="rydberg",
                                       geometry=geometry, arch=arch),))

    def test_unit_validation(self):
        geometry = nonupa(4, 2)
        with pytest.raises(ConfigError):
            EvalUnit(label="x", kind="rydberg", geometry=geometry)
        with pytest.raises(ConfigError):
            EvalUnit(label="x", kind="nonsense", geometry=geometry)
        with pytest.raises(ConfigError):
            EvalUnit(label="x", kind="rydberg", geometry=geometry,
                     arch=ReuseArchitecture(n_blocks=9, lo_depth=2,
                                            apd_depth=2))


class TestRunConvergence:
    def test_mean_residual_nonincreasing(self):
        geometry = nonupa(16, 6)
        arch = ReuseArchitecture(n_blocks=16, lo_depth=6, apd_depth=4)
        spec = ExperimentSpec(
            channel=ChannelParams(n_tx=16, rx_geometry=geometry, n_clusters=3,
                                  n_rays=4),
            units=(EvalUnit(label="trace", kind="rydberg", geometry=geometry,
                            arch=arch),),
            n_streams=2, snr_db=(0.0,), trials=5, seed=3,
            solver=OptimizerConfig(epsilon=1e-12, max_iterations=15))
        table = run_convergence(spec)
        values = [r.mean_se for r in table.rows]
        assert len(values) == 15
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
        assert table.sweep_param == "iteration"

    def test_digital_units_rejected(self):
        spec = small_spec()
        with pytest.raises(ConfigError):
            run_convergence(spec)
