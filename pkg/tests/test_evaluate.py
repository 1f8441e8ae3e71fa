import numpy as np
import pytest

from bregpath.evaluate import (irr_constant, kfold_cv_ising_mdc,
                               kfold_cv_logistic, mdc, pair_marginals,
                               path_auc, sign_consistency_scan)
from bregpath.losses import Dataset
from bregpath.simulate import (IsingSpec, gen_ising, gen_logistic,
                               LogisticSpec, toeplitz_design_cov)
from bregpath.solver import Checkpoint, Path, SolverConfig


def make_path(entries, betas, n_beta, stride=1, delta=0.1):
    """Assemble a Path by hand; ``betas`` maps k -> dense coefficients."""
    checkpoints = []
    for k in sorted(betas):
        dense = np.asarray(betas[k], dtype=float)
        idx = np.flatnonzero(dense)
        checkpoints.append(Checkpoint(k, k * delta, np.zeros(1),
                                      idx.astype(np.int64), dense[idx]))
    meta = {"n_alpha": 1, "n_beta": n_beta, "checkpoint_stride": stride,
            "delta": delta}
    return Path(checkpoints, np.asarray(entries, dtype=float), meta)


def test_path_auc_hand_example():
    # true entries {3, 5}, false {4, inf}: wins 3 of 4 pairs
    path = make_path([3, 4, 5, np.inf], {0: np.zeros(4)}, 4)
    assert path_auc(path, [0, 2]) == pytest.approx(0.75)


def test_path_auc_tie_counts_half():
    path = make_path([2, 2, np.inf, np.inf], {0: np.zeros(4)}, 4)
    assert path_auc(path, [0, 2]) == pytest.approx(0.5)


def test_path_auc_monotone_reindexing_invariance(rng):
    entries = np.concatenate([rng.integers(1, 40, 6).astype(float),
                              [np.inf, np.inf]])
    path_a = make_path(entries, {0: np.zeros(8)}, 8)
    squashed = np.where(np.isinf(entries), np.inf, entries ** 2 + 3)
    path_b = make_path(squashed, {0: np.zeros(8)}, 8)
    support = [0, 1, 5]
    assert path_auc(path_a, support) == path_auc(path_b, support)


def test_path_auc_errors():
    path = make_path([1, 2, 3], {0: np.zeros(3)}, 3)
    with pytest.raises(ValueError):
        path_auc(path, [])
    with pytest.raises(ValueError):
        path_auc(path, [0, 1, 2])
    with pytest.raises(ValueError):
        path_auc(path, [5])


def test_pair_marginals_hand_example():
    X = np.array([[1.0, 1.0], [1.0, -1.0]])
    tables = pair_marginals(X)
    assert tables.shape == (2, 2, 2, 2)
    assert np.allclose(tables[0, 1], [[0.5, 0.5], [0.0, 0.0]])
    weighted = pair_marginals(X, weights=[2.0, 1.0])
    assert np.allclose(weighted[0, 1], [[2 / 3, 1 / 3], [0.0, 0.0]])


def test_pair_marginals_properties(rng):
    X = rng.choice([-1.0, 1.0], size=(40, 5))
    tables = pair_marginals(X)
    assert np.allclose(tables.sum(axis=(2, 3)), 1.0, atol=1e-12)
    for a in range(5):
        for b in range(5):
            assert np.allclose(tables[a, b], tables[b, a].T)
        # same-variable tables live on the diagonal cells
        assert tables[a, a, 0, 1] == 0.0
        assert tables[a, a, 1, 0] == 0.0


def test_pair_marginals_validation(rng):
    with pytest.raises(ValueError):
        pair_marginals(np.array([[0.5, 1.0]]))
    X = rng.choice([-1.0, 1.0], size=(4, 3))
    with pytest.raises(ValueError):
        pair_marginals(X, weights=[-1.0, 1.0, 1.0, 1.0])


def test_mdc_identity_and_sensitivity(rng):
    X = rng.choice([-1.0, 1.0], size=(60, 5))
    t = pair_marginals(X)
    assert mdc(t, t) == pytest.approx(1.0)
    flipped = pair_marginals(-X[: 30])
    assert mdc(t, flipped) < 1.0


def test_mdc_degenerate_tables():
    flat = np.full((2, 2, 2, 2), 0.25)
    varied = flat.copy()
    varied[0, 0, 0, 0] = 0.5
    with pytest.raises(ValueError, match="zero variance"):
        mdc(flat, varied)
    with pytest.raises(ValueError):
        mdc(np.zeros((2, 2)), np.zeros((3, 3)))


def test_irr_identity_is_zero():
    assert irr_constant(np.eye(6), [0, 1]) == 0.0


def test_irr_empty_and_full_support():
    sigma = toeplitz_design_cov(4, 0.3)
    assert irr_constant(sigma, []) == 0.0
    assert irr_constant(sigma, [0, 1, 2, 3]) == 0.0


def test_irr_scale_invariance():
    sigma = toeplitz_design_cov(10, 0.4)
    S = [0, 1, 2]
    assert irr_constant(3.0 * sigma, S) == pytest.approx(irr_constant(sigma, S))


def test_irr_toeplitz_table_one_setting():
    sigma = toeplitz_design_cov(80, 0.25)
    value = irr_constant(sigma, np.arange(20))
    assert 0.0 < value < 1.0


def test_irr_validation():
    with pytest.raises(ValueError):
        irr_constant(np.ones((2, 3)), [0])
    with pytest.raises(ValueError):
        irr_constant(np.eye(3), [4])


def test_sign_scan_hand_path():
    truth = np.array([1.0, -2.0, 0.0])
    betas = {
        0: [0.0, 0.0, 0.0],
        1: [0.5, 0.0, 0.0],
        2: [0.8, 0.0, 0.1],   # false positive on coordinate 2
        3: [1.0, -0.5, 0.0],  # exact signed support
    }
    path = make_path([1, 3, 2], betas, 3)
    first, clean = sign_consistency_scan(path, truth)
    assert first == 3
    assert clean == 1


def test_sign_scan_never_matching():
    truth = np.array([1.0, 1.0])
    path = make_path([np.inf, np.inf], {0: [0.0, 0.0], 1: [0.0, 0.0]}, 2)
    first, clean = sign_consistency_scan(path, truth)
    assert first is None
    assert clean == 1


def test_sign_scan_requires_stride_one():
    path = make_path([np.inf], {0: [0.0]}, 1, stride=2)
    with pytest.raises(ValueError, match="stride-1"):
        sign_consistency_scan(path, np.array([1.0]))


def cv_config():
    return SolverConfig(max_iters=150, checkpoint_stride=1)


def test_cv_logistic_deterministic_and_consistent():
    data, _ = gen_logistic(LogisticSpec(p=10, s=3, n=90, seed=21))
    r1 = kfold_cv_logistic(data, cv_config(), folds=3, grid_size=8, seed=4)
    r2 = kfold_cv_logistic(data, cv_config(), folds=3, grid_size=8, seed=4)
    assert np.array_equal(r1.mean_scores, r2.mean_scores, equal_nan=True)
    assert r1.selected_k == r2.selected_k
    assert r1.mode == "min"
    assert r1.fold_scores.shape == (3, r1.grid_k.size)
    assert np.all(np.diff(r1.grid_k) > 0)
    assert r1.selected_score == r1.mean_scores[r1.selected_index]
    assert 0.0 <= r1.selected_score <= 1.0
    # the report carries the full-data estimator at the selected position
    assert r1.alpha.shape == (1,)
    assert r1.beta_indices.shape == r1.beta_values.shape


def test_cv_logistic_skips_single_class_fold(rng):
    X = rng.standard_normal((25, 4))
    y = np.full(25, 1.0)
    y[7] = -1.0
    report = kfold_cv_logistic(Dataset(X, y), cv_config(), folds=5,
                               grid_size=5, seed=0)
    assert len(report.warnings) == 1
    assert "single-class" in report.warnings[0]
    assert np.all(np.isnan(report.fold_scores).sum(axis=1)
                  [np.isnan(report.fold_scores).all(axis=1)])


def test_cv_fold_sizes_partition(rng):
    # folds differ by at most one sample and cover everything: observable
    # through scores when every fold contributes
    data, _ = gen_logistic(LogisticSpec(p=6, s=2, n=31, seed=2))
    report = kfold_cv_logistic(data, cv_config(), folds=4, grid_size=4, seed=1)
    assert report.fold_scores.shape[0] == 4
    assert not np.isnan(report.fold_scores).all(axis=1).any()


def test_cv_mdc_runs_and_selects():
    data, _ = gen_ising(IsingSpec(side=2, temperature=1.2, n=120, seed=6))
    report = kfold_cv_ising_mdc(data, kind="ising-mpf", config=cv_config(),
                                folds=3, grid_size=5, seed=3,
                                burn_in=20, thin=2)
    assert report.mode == "max"
    assert np.isfinite(report.selected_score)
    assert -1.0 <= report.selected_score <= 1.0
    assert report.meta["loss"] == "ising-mpf"
    assert report.meta["burn_in"] == 20


def test_cv_mdc_rejects_labeled_data(rng):
    X = rng.choice([-1.0, 1.0], size=(20, 3))
    with pytest.raises(ValueError):
        kfold_cv_ising_mdc(Dataset(X, np.ones(20)), config=cv_config())


def test_cv_validation(rng):
    data, _ = gen_logistic(LogisticSpec(p=4, s=1, n=30, seed=0))
    with pytest.raises(ValueError):
        kfold_cv_logistic(data, cv_config(), folds=1)
    with pytest.raises(ValueError):
        kfold_cv_logistic(data, cv_config(), folds=40)
    with pytest.raises(ValueError):
        kfold_cv_logistic(data, cv_config(), grid_size=0)
