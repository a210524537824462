from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ruinlab.core import all_orders, icm_probability
from ruinlab.exact import exact_orders_3
from ruinlab.regression import (
    RankDeficient,
    RatioDataset,
    build_ratio_dataset,
    design_matrix,
    exponents,
    fit_all,
    fit_sextic,
    load_models,
    predict,
    predict_distribution,
    read_model,
    save_models,
    sorted_region,
    write_model,
)
from ruinlab.tables import lookup_full


@pytest.fixture(scope="module")
def small_models(small_table_k3):
    return fit_all(small_table_k3)


@pytest.fixture(scope="module")
def models_n300(table_k3_n300):
    return fit_all(table_k3_n300)


def test_exponent_order():
    assert exponents()[:10] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
                                (3, 0), (2, 1), (1, 2), (0, 3)]
    assert len(exponents()) == 28


def test_sorted_region_size():
    assert len(sorted_region(300)) == 7500
    assert len(sorted_region(30)) == 75
    rows = sorted_region(17)
    assert np.all(rows[:, 0] <= rows[:, 1]) and np.all(rows[:, 1] <= rows[:, 2])


def test_recovers_a_known_sextic():
    rng = np.random.default_rng(0)
    beta = rng.normal(size=28)
    stacks = sorted_region(120)
    x, y = stacks[:, 0] / 120, stacks[:, 1] / 120
    data = RatioDataset((3, 2, 1), 120, stacks, design_matrix(x, y) @ beta)
    model = fit_sextic(data)
    assert np.allclose(model.coefficients, beta, rtol=1e-8, atol=1e-8)


def test_rank_deficient_design():
    stacks = sorted_region(30)[:20]
    data = RatioDataset((3, 2, 1), 30, stacks, np.ones(20))
    with pytest.raises(RankDeficient):
        fit_sextic(data)
    # only two distinct x values: powers of x beyond the first collapse
    stacks = np.array([(a, b, 200 - a - b) for a in (5, 6) for b in range(a, 90)])
    data = RatioDataset((3, 2, 1), 200, stacks, np.ones(len(stacks)))
    with pytest.raises(RankDeficient, match="condition"):
        fit_sextic(data)


def test_unfitted_order_rejected(small_table_k3):
    with pytest.raises(ValueError):
        build_ratio_dataset(small_table_k3, "123")


def test_order_123_needs_no_fit_on_symmetric_family():
    for i in range(1, 15):
        stacks = (i, i, 30 - 2 * i)
        ratio = exact_orders_3(stacks)[(1, 2, 3)] / icm_probability(stacks, "123")
        assert ratio == pytest.approx(1.0, abs=1e-13)


def test_model_round_trip(tmp_path, small_models):
    model = small_models[(3, 2, 1)]
    back = read_model(write_model(model, tmp_path / "m"))
    assert back.sigma == model.sigma and back.training_N == 30
    assert np.array_equal(back.coefficients, model.coefficients)
    save_models(small_models, tmp_path)
    loaded = load_models(tmp_path, 30)
    assert set(loaded) == set(small_models)
    with pytest.raises(FileNotFoundError):
        load_models(tmp_path, 300)


def test_missing_model():
    with pytest.raises(KeyError):
        predict_distribution({}, (1, 2, 3))


@settings(max_examples=100, deadline=None)
@given(st.tuples(*[st.integers(1, 400)] * 3))
def test_predictions_sum_to_one_and_obey_identities(small_models, stacks):
    dist = predict_distribution(small_models, stacks)
    assert float(dist.total()) == pytest.approx(1.0, abs=1e-9)
    assert max(abs(r) for r in dist.identity_residuals(stacks)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.tuples(*[st.integers(1, 400)] * 3), st.permutations([1, 2, 3]))
def test_prediction_is_relabeling_equivariant(small_models, stacks, perm):
    # player p in ``stacks`` is player perm[p-1] in ``moved``
    moved = [0, 0, 0]
    for p, q in enumerate(perm, start=1):
        moved[q - 1] = stacks[p - 1]
    if len(set(stacks)) < 3:
        return  # ties make the stable sort pick a different representative
    for s in all_orders(3):
        a = predict(small_models, stacks, s)
        b = predict(small_models, moved, tuple(perm[p - 1] for p in s))
        assert a == pytest.approx(b, abs=1e-12)


def test_ratios_on_reference_table(table_k3_n300):
    data = build_ratio_dataset(table_k3_n300, "321")
    assert len(data) == 7500
    for s in ("321", "312", "213"):
        r = build_ratio_dataset(table_k3_n300, s).ratio
        assert r.min() > 0.015 and r.max() < 1.15


def test_training_fit_quality(models_n300, table_k3_n300):
    model = models_n300[(3, 2, 1)]
    assert model.diagnostics["normal_determinant"] == pytest.approx(1.14e-136, rel=0.01)
    stacks = sorted_region(300)
    stacks = stacks[stacks[:, 0] >= 3]
    errs = np.array([predict(models_n300, s, "321") - lookup_full(table_k3_n300, s, "321")
                     for s in stacks])
    assert np.abs(errs).max() <= 1e-4
    assert np.sqrt(np.mean(errs ** 2)) <= 1e-5


def test_held_out_total(models_n300, table_k3_n200):
    stacks = sorted_region(200)
    for s in ("321", "312"):
        errs = [abs(predict(models_n300, c, s) - lookup_full(table_k3_n200, c, s)) for c in stacks]
        assert max(errs) <= 5e-4


def test_normal_determinant_against_exact_arithmetic():
    # small design so the exact determinant is cheap
    stacks = sorted_region(42)
    X = [[Fraction(int(a), 42) ** i * Fraction(int(b), 42) ** j for i, j in exponents(3)]
         for a, b, _ in stacks]
    n = len(X[0])
    G = [[sum(r[p] * r[q] for r in X) for q in range(n)] for p in range(n)]
    det = Fraction(1)
    for c in range(n):
        piv = next(r for r in range(c, n) if G[r][c] != 0)
        if piv != c:
            G[c], G[piv] = G[piv], G[c]
            det = -det
        det *= G[c][c]
        for r in range(c + 1, n):
            f = G[r][c] / G[c][c]
            G[r] = [u - f * v for u, v in zip(G[r], G[c])]
    from ruinlab.regression import normal_determinant

    Xf = design_matrix(stacks[:, 0] / 42, stacks[:, 1] / 42, 3)
    assert normal_determinant(Xf) == pytest.approx(float(det), rel=1e-6)
