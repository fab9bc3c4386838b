"""Model fitting, likelihood queries, and persistence."""

import json

import numpy as np
import pytest
from scipy.stats import multivariate_normal, norm

from conftest import random_full, random_gnb, random_spd
from woebox.data import Dataset, SyntheticSpec, generate_synthetic, synthetic_class_means
from woebox.errors import DegenerateModelError, LikelihoodUnavailableError
from woebox.model_io import load_model, model_from_json_obj, model_to_json_obj, save_model
from woebox.models import (
    BlackBox,
    GaussianNBModel,
    LogisticModel,
    class_set_log_likelihood,
    conditional_gaussian,
    fit_gnb,
    fit_lda,
    fit_logistic,
    fit_qda,
    posterior_log_odds,
    predict,
    predict_batch,
    predict_proba,
)


def _dataset(features, labels, k=None):
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    k = k or int(labels.max()) + 1
    return Dataset(
        features,
        labels,
        tuple(f"x{i}" for i in range(features.shape[1])),
        tuple(f"c{i}" for i in range(k)),
    )


class TestFitGnb:
    def test_degenerate_duplicates_hit_smoothing_floor(self):
        # two classes of exact duplicates at 0 and 1: class variance is the floor
        features = np.array([[0.0]] * 10 + [[1.0]] * 10)
        labels = np.array([0] * 10 + [1] * 10)
        model = fit_gnb(_dataset(features, labels), smoothing=1e-3)
        pooled_max = features.var()  # 0.25 for the balanced split
        assert pooled_max == pytest.approx(0.25)
        np.testing.assert_allclose(model.variances, 1e-3 * pooled_max)
        np.testing.assert_allclose(model.means[:, 0], [0.0, 1.0])

    def test_balanced_priors(self):
        features = np.arange(8, dtype=float).reshape(-1, 1)
        labels = np.array([0, 1] * 4)
        model = fit_gnb(_dataset(features, labels))
        np.testing.assert_allclose(model.log_priors, np.log([0.5, 0.5]))

    def test_consistency_against_generator(self):
        spec = SyntheticSpec(dim=10, n_classes=2, n_samples=100_000, seed=11)
        data = generate_synthetic(spec)
        model = fit_gnb(data)
        true_means = synthetic_class_means(spec)
        assert np.abs(model.means - true_means).max() < 0.05

    def test_small_class_error_names_class(self):
        features = np.array([[0.0], [1.0], [2.0]])
        labels = np.array([0, 0, 1])
        with pytest.raises(DegenerateModelError, match="'c1'"):
            fit_gnb(_dataset(features, labels))

    def test_variance_lower_bound_invariant(self, rng):
        data = generate_synthetic(SyntheticSpec(dim=5, n_classes=3, n_samples=300, seed=5))
        smoothing = 1e-4
        model = fit_gnb(data, smoothing=smoothing)
        floor = smoothing * data.features.var(axis=0).max()
        assert np.all(model.variances >= floor - 1e-15)

    def test_uniform_priors_option(self):
        features = np.arange(9, dtype=float).reshape(-1, 1)
        labels = np.array([0, 0, 0, 0, 0, 1, 1, 1, 1])
        model = fit_gnb(_dataset(features, labels), priors="uniform")
        np.testing.assert_allclose(model.log_priors, np.log([0.5, 0.5]))


class TestClassSetLogLikelihood:
    def test_singleton_equals_marginal(self, rng):
        model = random_gnb(rng, k=4, d=3)
        x = rng.normal(size=3)
        for c in range(4):
            expected = float(
                sum(norm.logpdf(x[i], model.means[c, i], np.sqrt(model.variances[c, i])) for i in range(3))
            )
            got = class_set_log_likelihood(model, x, (c,))
            assert got == pytest.approx(expected, abs=1e-10)

    def test_all_classes_equals_full_mixture(self, rng):
        model = random_gnb(rng, k=3, d=2)
        x = rng.normal(size=2)
        priors = np.exp(model.log_priors)
        density = sum(
            priors[c]
            * np.prod(norm.pdf(x, model.means[c], np.sqrt(model.variances[c])))
            for c in range(3)
        )
        got = class_set_log_likelihood(model, x, (0, 1, 2))
        assert got == pytest.approx(np.log(density), abs=1e-10)

    def test_three_mean_mixture_oracle(self):
        # d=1, means (0,2,4), unit variances, uniform priors, U={0,1}, x=1
        model = GaussianNBModel(
            means=np.array([[0.0], [2.0], [4.0]]),
            variances=np.ones((3, 1)),
            log_priors=np.log(np.ones(3) / 3),
            feature_names=("x0",),
            class_names=("a", "b", "c"),
        )
        expected = np.log(0.5 * norm.pdf(1, 0, 1) + 0.5 * norm.pdf(1, 2, 1))
        got = class_set_log_likelihood(model, np.array([1.0]), (0, 1))
        assert got == pytest.approx(float(expected), abs=1e-12)

    def test_permutation_invariant_in_class_set(self, rng):
        model = random_gnb(rng, k=5, d=2)
        x = rng.normal(size=2)
        assert class_set_log_likelihood(model, x, (3, 0, 2)) == class_set_log_likelihood(
            model, x, (2, 3, 0)
        )

    def test_black_box_unavailable(self):
        opaque = BlackBox(predict_fn=lambda x: 0, n_classes=2)
        with pytest.raises(LikelihoodUnavailableError, match="likelihood unavailable"):
            class_set_log_likelihood(opaque, np.zeros(2), (0,))

    def test_empty_class_set_rejected(self, rng):
        model = random_gnb(rng)
        with pytest.raises(ValueError, match="nonempty"):
            class_set_log_likelihood(model, np.zeros(4), ())


class TestPosteriorLogOdds:
    def test_symmetric_midpoint_is_zero(self):
        model = GaussianNBModel(
            means=np.array([[-1.0], [1.0]]),
            variances=np.ones((2, 1)),
            log_priors=np.log([0.5, 0.5]),
            feature_names=("x0",),
            class_names=("a", "b"),
        )
        assert posterior_log_odds(model, np.array([0.0]), (0,), (1,)) == pytest.approx(0.0, abs=1e-12)

    def test_logistic_decision_value(self, rng):
        model = LogisticModel(
            weights=np.array([0.7, -1.2]),
            bias=0.3,
            log_priors=np.log([0.5, 0.5]),
            feature_names=("x0", "x1"),
            class_names=("n", "p"),
        )
        x = rng.normal(size=2)
        assert posterior_log_odds(model, x, (1,), (0,)) == pytest.approx(
            float(model.weights @ x + model.bias), abs=1e-12
        )

    def test_three_class_bayes_rule_oracle(self, rng):
        model = random_gnb(rng, k=3, d=2)
        for _ in range(20):
            x = rng.normal(size=2, scale=2.0)
            dens = np.array(
                [
                    np.prod(norm.pdf(x, model.means[c], np.sqrt(model.variances[c])))
                    for c in range(3)
                ]
            )
            post = dens * np.exp(model.log_priors)
            post /= post.sum()
            expected = np.log(post[0]) - np.log(post[1] + post[2])
            got = posterior_log_odds(model, x, (0,), (1, 2))
            assert got == pytest.approx(float(expected), abs=1e-9)

    def test_posteriors_sum_to_one(self, rng):
        for k, d in [(2, 3), (4, 2), (6, 5)]:
            model = random_gnb(rng, k=k, d=d)
            for _ in range(20):
                p = predict_proba(model, rng.normal(size=d, scale=3.0))
                assert abs(p.sum() - 1.0) < 1e-10
        full = random_full(rng, k=3, d=3)
        for _ in range(10):
            p = predict_proba(full, rng.normal(size=3))
            assert abs(p.sum() - 1.0) < 1e-10

    def test_overlapping_sets_rejected(self, rng):
        model = random_gnb(rng, k=3)
        with pytest.raises(ValueError, match="disjoint"):
            posterior_log_odds(model, np.zeros(4), (0, 1), (1, 2))


class TestConditionalGaussian:
    def test_diagonal_reduces_to_marginal(self, rng):
        cov = np.diag(rng.uniform(0.5, 2.0, size=4))
        model = random_full(rng, k=2, d=4)
        model = GaussianFullModel_replace(model, cov)
        for given in (rng.normal(size=2), rng.normal(size=2) * 10):
            mean, var = conditional_gaussian(model, 0, 2, given)
            assert mean == pytest.approx(model.means[0, 2], abs=1e-12)
            assert var == pytest.approx(cov[2, 2], abs=1e-12)

    def test_bivariate_textbook_formula(self):
        rho = 0.6
        cov = np.array([[1.0, rho], [rho, 1.0]])
        model = GaussianFullModel_from(np.array([[0.5, -0.25]]), cov[None, :, :])
        x1 = 1.7
        mean, var = conditional_gaussian(model, 0, 1, np.array([x1]))
        assert mean == pytest.approx(-0.25 + rho * (x1 - 0.5), abs=1e-12)
        assert var == pytest.approx(1 - rho**2, abs=1e-12)

    def test_precision_matrix_oracle(self, rng):
        # independent route: conditional from the joint precision matrix
        for _ in range(25):
            d = int(rng.integers(2, 6))
            cov = random_spd(rng, d)
            mu = rng.normal(size=d)
            model = GaussianFullModel_from(mu[None, :], cov[None, :, :])
            i = int(rng.integers(1, d))
            given = rng.normal(size=i)
            mean, var = conditional_gaussian(model, 0, i, given)
            precision = np.linalg.inv(cov[: i + 1, : i + 1])
            var_oracle = 1.0 / precision[i, i]
            mean_oracle = mu[i] - var_oracle * precision[i, :i] @ (given - mu[:i])
            assert var == pytest.approx(var_oracle, abs=1e-10)
            assert mean == pytest.approx(mean_oracle, abs=1e-10)

    def test_lda_variance_class_independent(self, rng):
        model = random_full(rng, k=3, d=4, lda=True)
        given = rng.normal(size=2)
        variances = {conditional_gaussian(model, c, 2, given)[1] for c in range(3)}
        assert len({round(v, 14) for v in variances}) == 1

    def test_full_subset_likelihood_matches_scipy(self, rng):
        model = random_full(rng, k=2, d=4)
        x = rng.normal(size=4)
        idx = [3, 1]
        got = class_set_log_likelihood(model, x, (0,), indices=idx)
        expected = multivariate_normal(
            mean=model.means[0, idx], cov=model.covariances[0][np.ix_(idx, idx)]
        ).logpdf(x[idx])
        assert got == pytest.approx(float(expected), abs=1e-10)


def GaussianFullModel_from(means, covs, lda=False):
    from woebox.models import GaussianFullModel

    k, d = means.shape
    return GaussianFullModel(
        means=means,
        covariances=covs,
        log_priors=np.log(np.ones(k) / k),
        feature_names=tuple(f"x{i}" for i in range(d)),
        class_names=tuple(f"c{i}" for i in range(k)) if k > 1 else ("c0", ),
    )


def GaussianFullModel_replace(model, shared_cov):
    from woebox.models import GaussianFullModel

    k = model.n_classes
    return GaussianFullModel(
        means=model.means,
        covariances=np.broadcast_to(shared_cov, (k, *shared_cov.shape)).copy(),
        log_priors=model.log_priors,
        feature_names=model.feature_names,
        class_names=model.class_names,
    )


class TestFitLogisticAndDiscriminants:
    def test_logistic_separates_synthetic(self):
        data = generate_synthetic(SyntheticSpec(dim=3, n_classes=2, n_samples=400, seed=9))
        model = fit_logistic(data)
        accuracy = np.mean(predict_batch(model, data.features) == data.labels)
        assert accuracy > 0.8

    def test_logistic_requires_binary(self):
        data = generate_synthetic(SyntheticSpec(dim=2, n_classes=3, n_samples=90, seed=1))
        with pytest.raises(DegenerateModelError, match="2 classes"):
            fit_logistic(data)

    def test_lda_shares_covariance(self):
        data = generate_synthetic(SyntheticSpec(dim=3, n_classes=3, n_samples=300, seed=2))
        model = fit_lda(data)
        assert model.lda
        assert np.array_equal(model.covariances[0], model.covariances[1])

    def test_qda_beats_chance(self):
        data = generate_synthetic(SyntheticSpec(dim=4, n_classes=3, n_samples=600, seed=3))
        model = fit_qda(data)
        accuracy = np.mean(predict_batch(model, data.features) == data.labels)
        assert accuracy > 0.5


class TestModelPersistence:
    @pytest.mark.parametrize("fitter", [fit_gnb, fit_logistic, fit_lda, fit_qda])
    def test_round_trip_exact(self, tmp_path, fitter):
        k = 2 if fitter is fit_logistic else 3
        data = generate_synthetic(SyntheticSpec(dim=3, n_classes=k, n_samples=200, seed=4))
        model = fitter(data)
        path = str(tmp_path / "model.json")
        save_model(model, path)
        back = load_model(path)
        assert type(back) is type(model)
        for name in ("means", "variances", "weights", "covariances", "log_priors"):
            if hasattr(model, name):
                np.testing.assert_array_equal(getattr(back, name), getattr(model, name))
        assert back.class_names == model.class_names
        # saving the loaded model reproduces the file byte for byte
        obj_a = model_to_json_obj(model)
        obj_b = model_to_json_obj(back)
        assert json.dumps(obj_a) == json.dumps(obj_b)

    def test_unknown_type_rejected(self):
        with pytest.raises(ValueError, match="model_type"):
            model_from_json_obj({"model_type": "mystery", "parameters": {}, "feature_names": [], "class_names": []})


class TestBlackBox:
    def test_predict_and_wrap(self, rng):
        model = random_gnb(rng, k=3, d=2)
        opaque = BlackBox.from_model(model)
        x = rng.normal(size=2)
        assert opaque.predict(x) == predict(model, x)
        assert opaque.n_classes == 3

    def test_proba_clamped(self):
        opaque = BlackBox(
            predict_fn=lambda x: 0,
            n_classes=2,
            predict_proba_fn=lambda x: np.array([1.0, 0.0]),
        )
        p = opaque.predict_proba(np.zeros(1))
        assert p[1] >= 1e-12
        assert p[0] <= 1 - 1e-12
