"""Exact oracles, Monte-Carlo estimation, and end-to-end verification."""

from __future__ import annotations

import math

import numpy as np
import pytest

from genbound.bounds_catalog import BoundId
from genbound.divergence_core import MixtureSpec, mixture_distribution, kl_divergence
from genbound.errors import InputError
from genbound.oracle_harness import (
    ExperimentConfig,
    cover_for_bound,
    default_loss_table,
    exact_expected_gen_error,
    exact_mutual_information,
    exact_type_distribution,
    load_experiment_config,
    mc_expected_gen_error,
    per_dataset_kl_to_cover_mixture,
    random_mechanism,
    reference_configs,
    run_verification,
)
from genbound.privacy_mechanisms import (
    Mechanism,
    PrivacyParams,
    exponential_mechanism_over_types,
    identity_mechanism,
    save_mechanism_csv,
    uniform_mechanism,
)
from genbound.types_core import (
    Alphabet,
    SourceDistribution,
    enumerate_types,
    num_types,
    sigma_sub_gaussian,
    type_probability,
)


def small_identity_config(alphabet_size=2, n=4, source=None, seed=5,
                          mc_samples=500):
    src = source or SourceDistribution.uniform(alphabet_size)
    return ExperimentConfig(
        alphabet=Alphabet(alphabet_size), n=n, source=src,
        mechanism=identity_mechanism(alphabet_size, n),
        loss_table=default_loss_table(alphabet_size, n),
        seed=seed, mc_samples=mc_samples,
    )


def test_type_distribution_sums_to_one():
    probs = exact_type_distribution(3, 5, SourceDistribution([0.2, 0.3, 0.5]))
    assert math.isclose(math.fsum(probs.tolist()), 1.0, abs_tol=1e-12)
    types = list(enumerate_types(3, 5))
    src = SourceDistribution([0.2, 0.3, 0.5])
    for i in (0, 7, len(types) - 1):
        assert math.isclose(probs[i], type_probability(types[i], src),
                            rel_tol=1e-12)


def test_identity_mechanism_mi_is_type_entropy():
    config = small_identity_config()
    mi = exact_mutual_information(config)
    entropy = -math.fsum(
        math.comb(4, c) / 16 * math.log(math.comb(4, c) / 16) for c in range(5)
    )
    assert math.isclose(mi, entropy, rel_tol=1e-12)
    assert math.isclose(mi, 1.4075317407193153, rel_tol=1e-12)


def test_input_independent_mechanism_has_zero_mi():
    config = ExperimentConfig(
        alphabet=Alphabet(2), n=6, source=SourceDistribution.uniform(2),
        mechanism=uniform_mechanism(2, 6),
        loss_table=default_loss_table(2, 6), seed=0, mc_samples=100,
    )
    assert exact_mutual_information(config) == 0.0


def test_mi_never_exceeds_output_entropy_cap(make_config):
    config = make_config(alphabet_size=2, n=10, epsilon=0.8)
    mi = exact_mutual_information(config)
    assert 0.0 <= mi <= math.log(config.mechanism.hypothesis_count)


def test_mi_equals_expected_kl_to_exact_marginal(make_config):
    # the mixture of kernel rows weighted by type probabilities is the
    # output marginal; expected KL to it must equal the information
    config = make_config(alphabet_size=2, n=7, epsilon=0.6)
    p_types = exact_type_distribution(2, 7, config.source)
    mix = MixtureSpec(list(config.mechanism.kernel), p_types)
    marginal = mixture_distribution(mix)
    expected_kl = math.fsum(
        float(p) * kl_divergence(row, marginal)
        for p, row in zip(p_types, config.mechanism.kernel) if p > 0
    )
    mi = exact_mutual_information(config)
    assert math.isclose(expected_kl, mi, abs_tol=1e-10)


def test_per_dataset_kl_rows(make_config):
    config = make_config(alphabet_size=2, n=6, epsilon=0.5)
    cover = cover_for_bound(
        BoundId.DP_GRID, PrivacyParams.eps_dp(0.5), 2, 6
    )
    rows = per_dataset_kl_to_cover_mixture(config, cover)
    assert len(rows) == num_types(2, 6)
    for row in rows:
        assert row.exact_kl <= row.bound_logsumexp + 1e-10
        assert row.bound_logsumexp <= row.bound_min + 1e-10


def test_per_dataset_kl_rejects_mismatched_cover(make_config):
    config = make_config(alphabet_size=2, n=6, epsilon=0.5)
    other = cover_for_bound(BoundId.TYPE_COUNT, PrivacyParams.none(), 2, 8)
    with pytest.raises(InputError):
        per_dataset_kl_to_cover_mixture(config, other)


def test_exact_gen_error_identity_hand_case():
    # identity mechanism, frequency loss 1 - freq_w[z]: the exact
    # expected generalization error is E||freq||^2 - ||p||^2
    config = small_identity_config(alphabet_size=2, n=1)
    assert math.isclose(exact_expected_gen_error(config), 0.5, rel_tol=1e-14)

    config4 = small_identity_config(alphabet_size=2, n=4)
    freqs = np.array([[c / 4, 1 - c / 4] for c in range(5)])
    weights = np.array([math.comb(4, c) / 16 for c in range(5)])
    expected = float(weights @ (freqs**2).sum(axis=1)) - 0.5
    assert math.isclose(exact_expected_gen_error(config4), expected, rel_tol=1e-12)


def test_mc_matches_exact_for_deterministic_case():
    config = small_identity_config(alphabet_size=2, n=1, mc_samples=500)
    result = mc_expected_gen_error(config)
    assert result.estimate == 0.5
    assert result.standard_error == 0.0
    assert result.samples == 500


def test_mc_deterministic_across_worker_counts(make_config):
    config = make_config(alphabet_size=2, n=8, epsilon=0.5, mc_samples=4000)
    one = mc_expected_gen_error(config, workers=1)
    three = mc_expected_gen_error(config, workers=3)
    assert one.estimate == three.estimate
    assert one.standard_error == three.standard_error


def test_mc_sample_floor(make_config):
    config = make_config(mc_samples=99)
    with pytest.raises(InputError):
        mc_expected_gen_error(config)
    with pytest.raises(InputError):
        mc_expected_gen_error(make_config(mc_samples=1000), workers=0)


def test_mc_within_four_standard_errors(make_config):
    config = make_config(alphabet_size=2, n=8, epsilon=0.5, mc_samples=20000)
    result = mc_expected_gen_error(config)
    exact = exact_expected_gen_error(config)
    assert abs(result.estimate - exact) <= 4 * result.standard_error


def test_default_loss_table_is_one_minus_frequency():
    table = default_loss_table(2, 4)
    assert table.shape == (num_types(2, 4), 2)
    types = list(enumerate_types(2, 4))
    for i, s in enumerate(types):
        np.testing.assert_allclose(table[i], 1.0 - s.frequencies())
    assert sigma_sub_gaussian(table) == 0.5


def test_random_mechanism_rows_and_determinism():
    a = random_mechanism(2, 5, hypothesis_count=4, seed=11)
    b = random_mechanism(2, 5, hypothesis_count=4, seed=11)
    c = random_mechanism(2, 5, hypothesis_count=4, seed=12)
    np.testing.assert_array_equal(a.kernel, b.kernel)
    assert not np.array_equal(a.kernel, c.kernel)
    np.testing.assert_allclose(a.kernel.sum(axis=1), 1.0, atol=1e-12)


def test_cover_for_bound_routes():
    none = PrivacyParams.none()
    all_types = cover_for_bound(BoundId.TYPE_COUNT, none, 2, 6)
    assert len(all_types.centers) == num_types(2, 6)

    dp = PrivacyParams.eps_dp(0.5)
    grid = cover_for_bound(BoundId.DP_GRID, dp, 2, 6)
    assert grid.t == 3  # round(eps * n)

    low = cover_for_bound(BoundId.DP_SIMPLEX_LOW, dp, 2, 6)
    assert low.t == 1 and len(low.centers) == 1

    with pytest.raises(InputError):
        cover_for_bound(BoundId.GEN_SUB_GAUSSIAN, dp, 2, 6)


def test_run_verification_passes_reference_suite():
    for name, config in reference_configs().items():
        report = run_verification(config)
        assert report.all_pass, (name, report.violations)
        assert BoundId.GEN_SUB_GAUSSIAN in report.bound_values
        assert report.sigma == sigma_sub_gaussian(config.loss_table)
        assert abs(report.exact_gen_error) <= report.gen_bound + 1e-9


def test_run_verification_sigma_override(make_config):
    config = make_config(alphabet_size=2, n=6, epsilon=0.5)
    report = run_verification(config, sigma=2.0)
    assert report.sigma == 2.0
    baseline = run_verification(config)
    assert report.gen_bound == 4.0 * baseline.gen_bound


def test_run_verification_catches_false_declaration():
    # an identity kernel declared as 0.5-DP cannot satisfy the certified
    # bounds: its per-dataset divergences are infinite
    mech = identity_mechanism(2, 5)
    liar = Mechanism(mech.kernel, 2, 5, PrivacyParams.eps_dp(0.5))
    config = ExperimentConfig(
        alphabet=Alphabet(2), n=5, source=SourceDistribution.uniform(2),
        mechanism=liar, loss_table=default_loss_table(2, 5),
        seed=0, mc_samples=100,
    )
    report = run_verification(config)
    assert not report.all_pass
    assert "dp_grid" in report.violations


def test_reference_configs_are_stable():
    names = list(reference_configs())
    assert names == ["exp-eps0.5-uniform", "exp-eps1-skewed", "identity-3symbols"]


class TestConfigLoader:
    def good_text(self):
        return (
            "# demo experiment\n"
            "alphabet_size = 2\n"
            "n = 8\n"
            "source = 0.4, 0.6\n"
            "mechanism = exponential\n"
            "epsilon = 0.5\n"
            "seed = 99\n"
            "mc_samples = 5000\n"
        )

    def test_round_trip(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.good_text())
        config, sigma = load_experiment_config(str(path))
        assert sigma is None
        assert config.alphabet.size == 2 and config.n == 8
        assert config.seed == 99 and config.mc_samples == 5000
        assert config.mechanism.privacy == PrivacyParams.eps_dp(0.5)
        np.testing.assert_allclose(config.source.probs, [0.4, 0.6])

    def test_sigma_override_returned(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.good_text() + "sigma = 0.25\n")
        _, sigma = load_experiment_config(str(path))
        assert sigma == 0.25

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.good_text() + "wokers = 2\n")
        with pytest.raises(InputError) as err:
            load_experiment_config(str(path))
        assert "wokers" in str(err.value)

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.good_text() + "n = 9\n")
        with pytest.raises(InputError):
            load_experiment_config(str(path))

    def test_epsilon_mu_exclusive(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(self.good_text() + "mu = 0.5\n")
        with pytest.raises(InputError):
            load_experiment_config(str(path))

    def test_exponential_needs_epsilon(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "alphabet_size = 2\nn = 4\nsource = 0.5,0.5\nmechanism = exponential\n"
        )
        with pytest.raises(InputError):
            load_experiment_config(str(path))

    def test_privacy_declaration_for_builtin(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "alphabet_size = 2\nn = 4\nsource = 0.5,0.5\n"
            "mechanism = identity\nepsilon = 1.0\n"
        )
        config, _ = load_experiment_config(str(path))
        assert config.mechanism.privacy == PrivacyParams.eps_dp(1.0)

    def test_mechanism_from_saved_kernel(self, tmp_path):
        mech = exponential_mechanism_over_types(2, 4, 0.7)
        kernel_path = str(tmp_path / "kernel.csv")
        save_mechanism_csv(mech, kernel_path)
        path = tmp_path / "exp.cfg"
        path.write_text(
            f"alphabet_size = 2\nn = 4\nsource = 0.5,0.5\nmechanism = {kernel_path}\n"
        )
        config, _ = load_experiment_config(str(path))
        np.testing.assert_array_equal(config.mechanism.kernel, mech.kernel)
        assert config.mechanism.privacy == PrivacyParams.eps_dp(0.7)

    def test_source_length_mismatch(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "alphabet_size = 3\nn = 4\nsource = 0.5,0.5\nmechanism = identity\n"
        )
        with pytest.raises(InputError):
            load_experiment_config(str(path))
