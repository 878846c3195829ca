"""Vote fitting and performance criteria."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srqe.errors import FittingError, InvalidInputError, UndefinedCorrelationError
from srqe.evaluation import (
    BTScores,
    WinMatrix,
    bt_fit,
    group_eval,
    hitr,
    krcc,
    plcc_fit,
    read_scores_csv,
    read_votes_csv,
    srcc,
)


def rank_oracle(values):
    """Average ranks with tie sharing, the long way."""
    values = np.asarray(values, dtype=float)
    ranks = np.empty(values.size)
    for i, v in enumerate(values):
        less = np.sum(values < v)
        equal = np.sum(values == v)
        ranks[i] = less + (equal + 1) / 2.0
    return ranks


def srcc_oracle(x, y):
    rx, ry = rank_oracle(x), rank_oracle(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(rx @ ry / math.sqrt((rx @ rx) * (ry @ ry)))


def krcc_oracle(x, y):
    """Tau-b by explicit pair counting."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = x.size
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = x[i] - x[j], y[i] - y[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx * dy > 0:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) / 2
    return float(
        (concordant - discordant)
        / math.sqrt((n0 - ties_x) * (n0 - ties_y))
    )


class TestBtFit:
    def test_two_player_closed_form(self):
        fitted = bt_fit(np.array([[0.0, 75.0], [25.0, 0.0]]))
        assert abs(fitted.scores[0] - math.log(3.0) / 2) < 1e-6
        assert abs(fitted.scores[1] + math.log(3.0) / 2) < 1e-6
        assert abs(fitted.scores.mean()) < 1e-9

    def test_symmetric_votes_give_zero_scores(self):
        counts = np.full((4, 4), 10.0)
        np.fill_diagonal(counts, 0.0)
        fitted = bt_fit(counts)
        assert np.abs(fitted.scores).max() < 1e-9

    def test_label_permutation_equivariance(self):
        rng = np.random.default_rng(0)
        counts = rng.integers(1, 30, (5, 5)).astype(float)
        np.fill_diagonal(counts, 0.0)
        base = bt_fit(counts)
        perm = rng.permutation(5)
        permuted = bt_fit(counts[np.ix_(perm, perm)])
        assert np.abs(permuted.scores - base.scores[perm]).max() < 1e-6

    def test_disconnected_graph_names_components(self):
        counts = np.zeros((4, 4))
        counts[0, 1] = counts[1, 0] = 5
        counts[2, 3] = counts[3, 2] = 5
        matrix = WinMatrix(group="g", methods=["a", "b", "c", "d"], counts=counts)
        with pytest.raises(FittingError, match="a/b"):
            bt_fit(matrix)

    def test_zero_win_method_triggers_smoothing(self):
        counts = np.array([[0.0, 10.0, 10.0], [0.0, 0.0, 10.0], [0.0, 0.0, 0.0]])
        fitted = bt_fit(counts)
        assert fitted.smoothed
        assert fitted.scores[0] > fitted.scores[1] > fitted.scores[2]

    def test_shifted_initialization_is_irrelevant(self):
        # the MM fixed point with zero-mean constraint is unique
        rng = np.random.default_rng(1)
        counts = rng.integers(5, 40, (6, 6)).astype(float)
        np.fill_diagonal(counts, 0.0)
        a = bt_fit(counts, tol=1e-12)
        for _ in range(3):
            shifted = bt_fit(counts, tol=1e-12, init_scores=rng.uniform(-2, 2, 6))
            assert np.abs(a.scores - shifted.scores).max() < 1e-6
        b = bt_fit(counts * 3.0, tol=1e-12)  # scaling all counts preserves the MLE
        assert np.abs(a.scores - b.scores).max() < 1e-6

    def test_planted_scores_recovered_from_simulated_votes(self):
        rng = np.random.default_rng(2)
        planted = np.linspace(1.2, -1.2, 8)
        n = 8
        counts = np.zeros((n, n))
        votes_per_pair = 10_000 // (n * (n - 1) // 2)
        for i in range(n):
            for j in range(i + 1, n):
                p = 1.0 / (1.0 + math.exp(planted[j] - planted[i]))
                wins = rng.binomial(votes_per_pair, p)
                counts[i, j] = wins
                counts[j, i] = votes_per_pair - wins
        fitted = bt_fit(counts)
        assert np.argsort(fitted.scores).tolist() == np.argsort(planted).tolist()

    def test_rejects_degenerate_matrices(self):
        with pytest.raises(InvalidInputError):
            bt_fit(np.zeros((1, 1)))
        with pytest.raises(InvalidInputError):
            WinMatrix(group="g", methods=["a", "b"], counts=np.array([[1.0, 2.0], [3.0, 0.0]]))
        with pytest.raises(InvalidInputError):
            WinMatrix(group="g", methods=["a", "b"], counts=-np.ones((2, 2)))


class TestRankCriteria:
    def test_perfect_and_reversed_order(self):
        assert srcc([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
        assert krcc([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
        assert srcc([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
        assert krcc([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_matches_brute_force_oracles(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            x = rng.standard_normal(8)
            y = rng.standard_normal(8)
            if rng.random() < 0.3:  # exercise tie handling
                x[rng.integers(0, 8)] = x[rng.integers(0, 8)]
            assert abs(srcc(x, y) - srcc_oracle(x, y)) < 1e-12
            assert abs(krcc(x, y) - krcc_oracle(x, y)) < 1e-12

    def test_constant_input_raises(self):
        with pytest.raises(UndefinedCorrelationError):
            srcc([1, 1, 1], [1, 2, 3])
        with pytest.raises(UndefinedCorrelationError):
            krcc([1, 2, 3], [5, 5, 5])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_invariance_under_increasing_transforms(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(7)
        y = rng.standard_normal(7)
        fx = np.exp(2.0 * x) + 1.0
        assert srcc(fx, y) == pytest.approx(srcc(x, y), abs=1e-12)
        assert krcc(fx, y) == pytest.approx(krcc(x, y), abs=1e-12)


class TestLogisticFit:
    def test_recovers_synthetic_mapping(self):
        x = np.linspace(-3, 3, 40)
        kappa = (1.0, 1.0, 0.0, 0.5, 0.0)
        y = kappa[0] * (0.5 - 1.0 / (1.0 + np.exp(kappa[1] * (x - kappa[2])))) + kappa[3] * x + kappa[4]
        plcc, fitted = plcc_fit(x, y)
        assert plcc >= 0.999
        assert fitted.shape == (5,)

    def test_identity_relation(self):
        x = np.linspace(0, 1, 20)
        plcc, _ = plcc_fit(x, x.copy())
        assert plcc >= 0.9999

    def test_anti_monotone_relation(self):
        x = np.linspace(0, 1, 20)
        plcc, _ = plcc_fit(x, -x)
        assert abs(plcc) >= 0.9999

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            plcc_fit([1, 2, 3], [1, 2, 3])
        with pytest.raises(UndefinedCorrelationError):
            plcc_fit([1, 1, 1, 1, 1], [1, 2, 3, 4, 5])


class TestHitr:
    def test_perfect_agreement(self):
        objective = np.arange(8.0)
        assert hitr(objective, objective * 2.0) == 1.0

    def test_partial_agreement_arithmetic(self):
        reference = np.arange(8.0)
        objective = np.array([7, 0, 1, 2, 3, 4, 5, 6], dtype=float)
        # moving the worst method to the top breaks exactly 7 of 28 pairs
        assert hitr(objective, reference) == pytest.approx(21.0 / 28.0)

    def test_constant_objective_counts_as_misses(self):
        assert hitr(np.ones(6), np.arange(6.0)) == 0.0

    def test_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(4)
        objective = rng.standard_normal(8)
        reference = rng.standard_normal(8)
        transformed = np.exp(objective * 1.3 + 2.0)
        assert hitr(objective, reference) == hitr(transformed, reference)

    def test_accepts_btscores(self):
        fitted = BTScores(group="g", methods=list("abc"), scores=np.array([0.5, 0.0, -0.5]))
        assert hitr(np.array([3.0, 2.0, 1.0]), fitted) == 1.0


class TestGroupEval:
    def _bt(self, group, methods, scores):
        return BTScores(group=group, methods=methods, scores=np.asarray(scores, float))

    def test_single_perfect_group(self):
        methods = list("abcdefgh")
        ref = np.linspace(1.0, -1.0, 8)
        scores = {"g1": {m: 8.0 - i for i, m in enumerate(methods)}}
        report = group_eval(scores, {"g1": self._bt("g1", methods, ref)})
        entry = report.per_group["g1"]
        assert entry["srcc"] == pytest.approx(1.0)
        assert entry["krcc"] == pytest.approx(1.0)
        assert entry["hitr"] == 1.0
        assert entry["plcc"] >= 0.999
        assert report.rank_accuracy[0] == 1.0

    def test_macro_average_is_mean_of_groups(self):
        methods = list("abcde")
        ref = np.array([2.0, 1.0, 0.0, -1.0, -2.0])
        good = {m: 5.0 - i for i, m in enumerate(methods)}
        mixed = {m: v for m, v in zip(methods, [3.0, 5.0, 1.0, 4.0, 2.0])}
        scores = {"g1": good, "g2": mixed}
        bts = {g: self._bt(g, methods, ref) for g in scores}
        report = group_eval(scores, bts)
        for criterion in ("srcc", "krcc", "hitr"):
            values = [report.per_group[g][criterion] for g in ("g1", "g2")]
            assert report.averages[criterion] == pytest.approx(np.mean(values))

    def test_identical_groups_average_to_group_value(self):
        methods = list("abcd")
        ref = np.array([1.0, 0.5, -0.5, -1.0])
        entry = {m: 4.0 - i for i, m in enumerate(methods)}
        scores = {f"g{i}": dict(entry) for i in range(3)}
        bts = {g: self._bt(g, methods, ref) for g in scores}
        report = group_eval(scores, bts)
        assert report.averages["srcc"] == pytest.approx(report.per_group["g0"]["srcc"])

    def test_constant_objective_surfaced_per_group(self):
        methods = list("abcd")
        ref = np.array([1.0, 0.5, -0.5, -1.0])
        scores = {"g1": {m: 1.0 for m in methods}}
        report = group_eval(scores, {"g1": self._bt("g1", methods, ref)})
        entry = report.per_group["g1"]
        assert entry["hitr"] == 0.0
        assert entry["srcc"] is None
        assert any("srcc" in e for e in entry["errors"])
        assert report.averages["srcc"] is None

    def test_missing_groups_warned_and_skipped(self):
        methods = list("ab")
        scores = {"g1": {"a": 1.0, "b": 0.0}, "orphan": {"a": 1.0, "b": 0.0}}
        bts = {"g1": self._bt("g1", methods, [0.5, -0.5])}
        report = group_eval(scores, bts)
        assert "g1" in report.per_group
        assert any("orphan" in w for w in report.warnings)
        with pytest.raises(InvalidInputError):
            group_eval({"x": {}}, {"y": self._bt("y", methods, [0.1, -0.1])})


class TestCsvIo:
    def test_votes_round_trip(self, tmp_path):
        path = tmp_path / "votes.csv"
        path.write_text(
            "group,method_i,method_j,wins_i,wins_j\n"
            "g1,alpha,beta,7,3\n"
            "g1,beta,gamma,6,4\n"
            "g1,alpha,gamma,5,5\n"
        )
        groups = read_votes_csv(path)
        matrix = groups["g1"]
        assert matrix.methods == ["alpha", "beta", "gamma"]
        i, j = matrix.methods.index("alpha"), matrix.methods.index("beta")
        assert matrix.counts[i, j] == 7 and matrix.counts[j, i] == 3

    def test_votes_row_order_independent(self, tmp_path):
        rows = ["g1,a,b,7,3", "g1,b,c,6,4", "g1,a,c,5,5"]
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text("group,method_i,method_j,wins_i,wins_j\n" + "\n".join(rows) + "\n")
        b.write_text("group,method_i,method_j,wins_i,wins_j\n" + "\n".join(rows[::-1]) + "\n")
        fitted_a = bt_fit(read_votes_csv(a)["g1"])
        fitted_b = bt_fit(read_votes_csv(b)["g1"])
        assert np.allclose(fitted_a.scores, fitted_b.scores)

    def test_malformed_rows_report_line_numbers(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("group,method_i,method_j,wins_i,wins_j\ng1,a,b,seven,3\n")
        with pytest.raises(InvalidInputError, match="line 2"):
            read_votes_csv(path)
        path.write_text("not,a,header\n")
        with pytest.raises(InvalidInputError, match="line 1"):
            read_votes_csv(path)

    def test_scores_csv(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text(
            "group,method,q_content,q_style,q_overall\n"
            "g1,a,1.5,0.3,0.9\n"
            "g1,b,1.1,0.5,0.8\n"
        )
        scores = read_scores_csv(path)
        assert scores["g1"]["a"]["q_style"] == 0.3
        path.write_text("group,method,q_content,q_style,q_overall\ng1,a,x,0.5,0.8\n")
        with pytest.raises(InvalidInputError, match="line 2"):
            read_scores_csv(path)
