"""SMO solver against a scipy dual oracle, one-vs-one voting, grid search."""

import numpy as np
import pytest
import scipy.optimize

from covkern import svc


def slsqp_dual(kernel, y, c):
    """Box-and-equality constrained dual optimum, solved generically."""
    m = y.shape[0]
    q = kernel * np.outer(y, y)

    def neg_dual(a):
        return 0.5 * a @ q @ a - a.sum()

    def grad(a):
        return q @ a - np.ones(m)

    res = scipy.optimize.minimize(
        neg_dual, np.full(m, 0.5 * c), jac=grad, method="SLSQP",
        bounds=[(0.0, c)] * m,
        constraints={"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y},
        options={"maxiter": 500, "ftol": 1e-12})
    assert res.success
    return res.x


def separable_problem(seed, m=14):
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=(m, 2))
    y = np.where(xs[:, 0] + 0.3 * xs[:, 1] > 0, 1.0, -1.0)
    if len(np.unique(y)) < 2:  # reroll is overkill; shift one point
        y[0] = -y[0]
    kernel = svc.rbf_matrix(xs, None, 0.8)
    return xs, y, kernel


# ------------------------------------------------------- binary solver

def test_smo_matches_scipy_dual_optimum():
    for seed in (0, 1, 2, 3):
        _, y, kernel = separable_problem(seed)
        for c in (0.5, 10.0):
            model = svc.fit_binary(kernel, y, c=c, tol=1e-6)
            alpha_smo = model.coef * y
            alpha_ref = slsqp_dual(kernel, y, c)
            got = svc.dual_objective(kernel, y, alpha_smo)
            ref = svc.dual_objective(kernel, y, alpha_ref)
            assert got == pytest.approx(ref, abs=1e-5)
            assert abs(np.sum(model.coef)) < 1e-9  # equality constraint
            assert np.all(alpha_smo >= -1e-12)
            assert np.all(alpha_smo <= c + 1e-12)


def test_smo_satisfies_kkt_conditions():
    _, y, kernel = separable_problem(7)
    c = 2.0
    tol = 1e-6
    model = svc.fit_binary(kernel, y, c=c, tol=tol)
    alpha = model.coef * y
    margins = y * svc.decision_function(model, kernel)
    for a, margin in zip(alpha, margins):
        if a < 1e-8:
            assert margin >= 1.0 - 1e-4
        elif a > c - 1e-8:
            assert margin <= 1.0 + 1e-4
        else:
            assert margin == pytest.approx(1.0, abs=1e-4)
    assert model.kkt_gap <= tol


def test_binary_separable_train_accuracy():
    _, y, kernel = separable_problem(11)
    model = svc.fit_binary(kernel, y, c=100.0, tol=1e-6)
    pred = np.sign(svc.decision_function(model, kernel))
    assert np.all(pred == y)
    assert model.support.shape[0] >= 2


def test_binary_input_validation():
    kernel = np.eye(4)
    with pytest.raises(ValueError):
        svc.fit_binary(np.eye(3), np.array([1.0, -1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        svc.fit_binary(kernel, np.array([1.0, 2.0, -1.0, -1.0]))
    with pytest.raises(ValueError):
        svc.fit_binary(kernel, np.array([1.0, 1.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        svc.fit_binary(kernel, np.array([1.0, -1.0, 1.0, -1.0]), c=0.0)


def test_dual_objective_formula():
    kernel = np.array([[2.0, 0.5], [0.5, 1.0]])
    y = np.array([1.0, -1.0])
    alpha = np.array([0.3, 0.3])
    q = alpha * y
    expected = alpha.sum() - 0.5 * q @ kernel @ q
    assert svc.dual_objective(kernel, y, alpha) == pytest.approx(expected, abs=1e-15)


# ------------------------------------------------------- multiclass

def three_class_problem(seed=0, per_class=10):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]])
    xs = np.vstack([c + 0.3 * rng.normal(size=(per_class, 2)) for c in centers])
    labels = np.repeat(np.arange(3), per_class)
    return xs, labels


def test_multiclass_fits_separated_clusters():
    xs, labels = three_class_problem()
    kernel = svc.rbf_matrix(xs, None, 0.5)
    model = svc.fit_multiclass(kernel, labels, c=10.0)
    assert model.pair_classes.shape == (3, 2)
    pred = svc.predict(model, kernel)
    assert svc.accuracy(labels, pred) == 1.0
    # each pair's coefficients live only on that pair's samples
    for p, (a, b) in enumerate(model.pair_classes):
        outside = ~np.isin(labels, [model.classes[a], model.classes[b]])
        assert np.all(model.coefs[p][outside] == 0.0)


def test_multiclass_validation():
    with pytest.raises(ValueError):
        svc.fit_multiclass(np.eye(3), [0, 0, 0])
    with pytest.raises(ValueError):
        svc.fit_multiclass(np.eye(3), [0, 1])


def test_predict_tie_breaks():
    # zero coefficients let the biases set every decision value directly
    def model_with_biases(biases):
        return svc.MulticlassSVC(
            classes=np.array([0, 1, 2]),
            pair_classes=np.array([(0, 1), (0, 2), (1, 2)]),
            coefs=np.zeros((3, 1)),
            biases=np.array(biases, dtype=float),
            c=1.0)

    cross = np.zeros((1, 1))
    # one vote each: pair wins 0, 2, 1; magnitudes 1, 2, 3 so class 1 leads
    pred = svc.predict(model_with_biases([1.0, -2.0, 3.0]), cross)
    assert pred[0] == 1
    # full tie in votes and magnitudes falls back to the lowest class index
    pred = svc.predict(model_with_biases([1.0, -1.0, 1.0]), cross)
    assert pred[0] == 0


def test_pairwise_decisions_shape_check():
    model = svc.MulticlassSVC(np.array([0, 1]), np.array([(0, 1)]),
                              np.zeros((1, 4)), np.zeros(1), 1.0)
    with pytest.raises(ValueError):
        svc.pairwise_decisions(model, np.zeros((2, 3)))


def test_accuracy_validation():
    assert svc.accuracy([1, 2, 3], [1, 2, 0]) == pytest.approx(2.0 / 3.0)
    with pytest.raises(ValueError):
        svc.accuracy([1, 2], [1, 2, 3])


# ------------------------------------------------------- baseline kernels

def test_rbf_matrix_matches_direct_formula():
    rng = np.random.default_rng(20)
    xs = rng.normal(size=(5, 3))
    ys = rng.normal(size=(4, 3))
    got = svc.rbf_matrix(xs, ys, gamma=0.9)
    for i in range(5):
        for j in range(4):
            d2 = np.sum((xs[i] - ys[j]) ** 2)
            assert got[i, j] == pytest.approx(np.exp(-0.9 * d2), abs=1e-12)
    with pytest.raises(ValueError):
        svc.rbf_matrix(xs, None, gamma=0.0)


def test_generalized_rbf_matches_direct_formula():
    rng = np.random.default_rng(21)
    xs = rng.normal(size=(4, 2))
    got = svc.generalized_rbf_matrix(xs, None, gamma1=0.7, sigma1=1.3,
                                     gamma2=0.2, sigma2=0.4)
    for i in range(4):
        for j in range(4):
            d2 = np.sum((xs[i] - xs[j]) ** 2)
            expected = (0.7 * np.exp(-d2 / (2 * 1.3 ** 2))
                        + 0.2 * np.exp(-d2 / (2 * 0.4 ** 2)))
            assert got[i, j] == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        svc.generalized_rbf_matrix(xs, sigma1=0.0)
    # single-width reduction agrees with the plain RBF at gamma = 1/(2 s^2)
    one = svc.generalized_rbf_matrix(xs, gamma1=1.0, sigma1=0.5, gamma2=0.0)
    np.testing.assert_allclose(one, svc.rbf_matrix(xs, None, 2.0), atol=1e-12)


# ------------------------------------------------------- CV grid search

def test_stratified_folds_balance_classes():
    labels = np.array([0] * 10 + [1] * 7 + [2] * 5)
    fold = svc.stratified_folds(labels, 5, seed=4)
    for cls, count in ((0, 10), (1, 7), (2, 5)):
        sizes = np.bincount(fold[labels == cls], minlength=5)
        assert sizes.max() - sizes.min() <= 1
        assert sizes.sum() == count
    with pytest.raises(ValueError):
        svc.stratified_folds(np.array([0, 0, 1]), 2)


def test_grid_search_picks_better_kernel():
    xs, labels = three_class_problem(seed=5, per_class=10)
    good = svc.rbf_matrix(xs, None, 0.5)
    # gamma so large the kernel is the identity: CV accuracy collapses
    bad = svc.rbf_matrix(xs, None, 1e6)
    best, results = svc.grid_search(
        [("bad", bad), ("good", good)], labels, c=10.0, n_folds=5, seed=0)
    assert best == "good"
    assert dict(results)["good"] > dict(results)["bad"]
    again = svc.grid_search([("bad", bad), ("good", good)], labels, c=10.0,
                            n_folds=5, seed=0)[1]
    assert results == again
    # ties keep the earliest candidate
    tied_best, _ = svc.grid_search([("first", good), ("second", good)],
                                   labels, c=10.0, n_folds=5, seed=0)
    assert tied_best == "first"


# ------------------------------------------------------- serialization

def test_model_csv_roundtrip_preserves_predictions(tmp_path):
    xs, labels = three_class_problem(seed=9, per_class=8)
    kernel = svc.rbf_matrix(xs, None, 0.5)
    model = svc.fit_multiclass(kernel, labels, c=5.0)
    path = tmp_path / "model.csv"
    svc.save_model_csv(model, path)
    back = svc.load_model_csv(path)
    np.testing.assert_array_equal(back.classes, model.classes)
    np.testing.assert_array_equal(back.pair_classes, model.pair_classes)
    np.testing.assert_array_equal(back.coefs, model.coefs)
    np.testing.assert_array_equal(back.biases, model.biases)
    assert back.c == model.c
    rng = np.random.default_rng(1)
    probe = svc.rbf_matrix(rng.normal(size=(6, 2)), xs, 0.5)
    np.testing.assert_array_equal(svc.predict(back, probe), svc.predict(model, probe))
    with pytest.raises(ValueError):
        bad = tmp_path / "bad.csv"
        bad.write_text("kind,i,j,value\nclass,0,,0\n")
        svc.load_model_csv(bad)
