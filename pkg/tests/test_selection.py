import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsquant.selection import F_SENTINEL, anova_f_scores, select_k_best


def test_two_group_hand_case():
    # groups {1,2} and {4,5}: between SS 9 over 2 groups -> MS 4.5,
    # within SS 1 over n-G=2 -> MS 0.5, F = 9
    X = np.array([[1.0], [2.0], [4.0], [5.0]])
    y = np.array([0, 0, 1, 1])
    assert anova_f_scores(X, y)[0] == pytest.approx(9.0, rel=1e-12)


def test_perfect_separator_hits_sentinel():
    y = np.array([-1, -1, 1, 1, 0, 0])
    X = np.column_stack([y.astype(float)])
    assert anova_f_scores(X, y)[0] == F_SENTINEL


def test_constant_feature_scores_zero():
    X = np.full((8, 1), 3.25)
    y = np.array([0, 1] * 4)
    assert anova_f_scores(X, y)[0] == 0.0


def test_single_class_rejected():
    X = np.random.default_rng(0).normal(size=(6, 2))
    with pytest.raises(ValueError, match="two classes"):
        anova_f_scores(X, np.ones(6))


def test_non_finite_rejected():
    X = np.array([[1.0], [np.nan], [2.0], [3.0]])
    with pytest.raises(ValueError, match="non-finite"):
        anova_f_scores(X, np.array([0, 0, 1, 1]))


@settings(deadline=None, max_examples=50)
@given(
    seed=st.integers(0, 10_000),
    a=st.floats(min_value=0.1, max_value=50.0),
    b=st.floats(min_value=-100.0, max_value=100.0),
)
def test_affine_invariance(seed, a, b):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 3))
    y = rng.integers(0, 3, size=30)
    if len(np.unique(y)) < 2:
        y[0], y[1] = 0, 1
    base = anova_f_scores(X, y)
    scaled = anova_f_scores(a * X + b, y)
    np.testing.assert_allclose(base, scaled, rtol=1e-7)


class TestSelectKBest:
    NAMES = ["f1", "f2", "f3", "f4"]

    def test_keeps_top_k_in_registry_order(self):
        scores = np.array([1.0, 9.0, 3.0, 7.0])
        result = select_k_best(self.NAMES, scores, k=2)
        assert result.selected == ["f2", "f4"]
        assert result.k_effective == 2
        assert [r[:2] for r in result.ranking[:2]] == [(1, "f2"), (2, "f4")]

    def test_k_exceeding_count_keeps_all(self):
        result = select_k_best(self.NAMES, np.arange(4.0), k=100)
        assert result.selected == self.NAMES
        assert result.k_effective == 4

    def test_k_one(self):
        result = select_k_best(self.NAMES, np.array([1.0, 9.0, 3.0, 7.0]), k=1)
        assert result.selected == ["f2"]

    def test_tie_at_cut_prefers_earlier_entry(self):
        scores = np.array([5.0, 1.0, 5.0, 5.0])
        result = select_k_best(self.NAMES, scores, k=2)
        assert result.selected == ["f1", "f3"]

    def test_rank_is_permutation(self):
        scores = np.array([2.0, 2.0, 2.0, 2.0])
        result = select_k_best(self.NAMES, scores, k=3)
        assert sorted(r[0] for r in result.ranking) == [1, 2, 3, 4]

    def test_validation(self):
        with pytest.raises(ValueError):
            select_k_best(self.NAMES, np.arange(4.0), k=0)
        with pytest.raises(ValueError):
            select_k_best(self.NAMES, np.arange(3.0), k=1)
