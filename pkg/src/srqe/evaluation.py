"""Pairwise-vote score fitting and rank-based performance criteria.

Ground truth inside a group is the zero-mean latent score vector fitted to
the group's win counts with minorization-maximization updates; predicted
scores are then judged per group by Spearman and Kendall correlation,
Pearson correlation after a five-parameter logistic remap, and the fraction
of pairwise orderings reproduced, with macro averages across groups.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .errors import FittingError, InvalidInputError, UndefinedCorrelationError


@dataclass
class WinMatrix:
    """Square nonnegative counts; entry (i, j) is how often i beat j."""

    group: str
    methods: list[str]
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.float64)
        n = len(self.methods)
        if self.counts.shape != (n, n):
            raise InvalidInputError(
                f"group {self.group}: counts shape {self.counts.shape} does not "
                f"match {n} methods"
            )
        if np.any(self.counts < 0):
            raise InvalidInputError(f"group {self.group}: negative vote counts")
        if np.any(np.diag(self.counts) != 0):
            raise InvalidInputError(f"group {self.group}: nonzero diagonal votes")


@dataclass
class BTScores:
    """Zero-mean fitted scores, one per method of a group."""

    group: str
    methods: list[str]
    scores: np.ndarray
    smoothed: bool = False
    iterations: int = 0
    converged: bool = True


def _connected_components(n: int, edges: np.ndarray) -> list[list[int]]:
    seen = [False] * n
    components = []
    for start in range(n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            node = stack.pop()
            comp.append(node)
            for other in np.flatnonzero(edges[node]):
                if not seen[other]:
                    seen[other] = True
                    stack.append(int(other))
        components.append(sorted(comp))
    return components


def bt_fit(w, max_iter: int = 500, tol: float = 1e-9, init_scores=None) -> BTScores:
    """Fit zero-mean latent scores to a win matrix by MM updates.

    Accepts a WinMatrix or a plain square array. Zero-win (or zero-loss)
    methods get 0.5 added to every off-diagonal count first, flagged on the
    result, since the unsmoothed likelihood has no finite maximizer there.
    init_scores only changes the starting point; the zero-mean fixed point
    is unique, so any initialization converges to the same scores.
    """
    if isinstance(w, WinMatrix):
        matrix, methods, group = w.counts, w.methods, w.group
    else:
        matrix = np.asarray(w, dtype=np.float64)
        methods = [str(i) for i in range(matrix.shape[0])]
        group = ""
    n = matrix.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two methods to fit scores")

    pair_totals = matrix + matrix.T
    components = _connected_components(n, pair_totals > 0)
    if len(components) > 1:
        names = ["/".join(methods[i] for i in comp) for comp in components]
        raise FittingError(
            f"comparison graph is disconnected; components: {', '.join(names)}"
        )

    smoothed = False
    if np.any(matrix.sum(axis=1) == 0) or np.any(matrix.sum(axis=0) == 0):
        matrix = matrix + 0.5 * (1 - np.eye(n))
        pair_totals = matrix + matrix.T
        smoothed = True

    wins = matrix.sum(axis=1)
    p = np.ones(n) if init_scores is None else np.exp(np.asarray(init_scores, float))
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        denom = pair_totals / (p[:, None] + p[None, :])
        np.fill_diagonal(denom, 0.0)
        p_new = wins / denom.sum(axis=1)
        p_new /= np.exp(np.mean(np.log(p_new)))
        if np.max(np.abs(np.log(p_new) - np.log(p))) < tol:
            p = p_new
            converged = True
            break
        p = p_new
    if not converged:
        warnings.warn(f"B-T fit for group {group!r} stopped at {max_iter} iterations")

    u = np.log(p)
    u -= u.mean()
    return BTScores(
        group=group,
        methods=methods,
        scores=u,
        smoothed=smoothed,
        iterations=iterations,
        converged=converged,
    )


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise InvalidInputError("inputs must be equal-length 1-D arrays of size >= 2")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("correlation is undefined for constant input")
    return x, y


def srcc(x, y) -> float:
    """Spearman rank correlation with average ranks for ties."""
    x, y = _check_pair(x, y)
    return float(stats.spearmanr(x, y).statistic)


def krcc(x, y) -> float:
    """Kendall rank correlation, tau-b tie handling."""
    x, y = _check_pair(x, y)
    return float(stats.kendalltau(x, y, variant="b").statistic)


def _logistic(kappa: np.ndarray, x: np.ndarray) -> np.ndarray:
    arg = np.clip(kappa[1] * (x - kappa[2]), -500.0, 500.0)
    return kappa[0] * (0.5 - 1.0 / (1.0 + np.exp(arg))) + kappa[3] * x + kappa[4]


def plcc_fit(objective, subjective, max_evals: int = 4000) -> tuple[float, np.ndarray]:
    """Pearson correlation after a five-parameter logistic remap.

    The remap parameters are fitted by simplex minimization of the squared
    error, keeping the best of four seeded restarts. Returns the correlation
    and the fitted parameter vector; warns instead of failing when the
    simplex exhausts its budget.
    """
    x = np.asarray(objective, dtype=np.float64)
    y = np.asarray(subjective, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("objective and subjective must be equal-length vectors")
    if x.size < 5:
        raise InvalidInputError("need at least five points to fit five parameters")
    if np.ptp(y) == 0 or np.ptp(x) == 0:
        raise UndefinedCorrelationError("logistic fit is undefined for constant input")

    slope, intercept = np.polyfit(x, y, 1)
    x_spread = np.std(x) or 1.0
    base = np.array(
        [np.ptp(y) or 1.0, np.sign(slope or 1.0) / x_spread, np.mean(x), slope, intercept]
    )

    def loss(kappa):
        return float(np.sum((_logistic(kappa, x) - y) ** 2))

    rng = np.random.default_rng(0)
    best_kappa, best_loss = base, loss(base)
    any_converged = False
    for restart in range(4):
        start = base if restart == 0 else base * rng.normal(1.0, 0.25, 5) + rng.normal(
            0.0, 0.05, 5
        )
        result = optimize.minimize(
            loss,
            start,
            method="Nelder-Mead",
            options={"maxfev": max_evals, "xatol": 1e-8, "fatol": 1e-10},
        )
        any_converged |= bool(result.success)
        if result.fun < best_loss:
            best_loss, best_kappa = float(result.fun), np.asarray(result.x)
    # budget exhaustion is routine when five parameters chase a handful of
    # points along a flat valley; only flag fits that left real residual
    # (more than 0.1% of the target variance unexplained)
    centered = y - y.mean()
    if not any_converged and best_loss > 1e-3 * float(centered @ centered):
        warnings.warn("logistic fit did not converge; returning best point found")

    mapped = _logistic(best_kappa, x)
    if np.ptp(mapped) == 0:
        raise UndefinedCorrelationError("fitted remap collapsed to a constant")
    plcc = float(stats.pearsonr(mapped, y).statistic)
    return plcc, best_kappa


def hitr(objective, bt) -> float:
    """Fraction of method pairs whose predicted order matches the fitted order.

    Ties on either side count as misses.
    """
    obj = np.asarray(objective, dtype=np.float64)
    ref = bt.scores if isinstance(bt, BTScores) else np.asarray(bt, dtype=np.float64)
    if obj.shape != ref.shape or obj.ndim != 1:
        raise InvalidInputError("objective and reference scores must align")
    n = obj.size
    if n < 2:
        raise InvalidInputError("need at least two methods")
    diff_obj = obj[:, None] - obj[None, :]
    diff_ref = ref[:, None] - ref[None, :]
    upper = np.triu_indices(n, k=1)
    hits = (np.sign(diff_obj[upper]) == np.sign(diff_ref[upper])) & (
        diff_obj[upper] != 0
    ) & (diff_ref[upper] != 0)
    return float(np.count_nonzero(hits)) / float(n * (n - 1) // 2)


CRITERIA = ("srcc", "krcc", "plcc", "hitr")


@dataclass
class EvalReport:
    """Per-group criteria, their macro averages, and bookkeeping."""

    per_group: dict = field(default_factory=dict)
    averages: dict = field(default_factory=dict)
    rank_accuracy: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "groups": self.per_group,
            "averages": self.averages,
            "rank_accuracy": self.rank_accuracy,
            "warnings": self.warnings,
            "config": self.config,
        }


def group_eval(scores: dict, bt: dict) -> EvalReport:
    """Per-group criteria against fitted scores, macro-averaged.

    scores maps group -> {method: objective value}; bt maps group ->
    BTScores. Groups present on only one side are reported as warnings and
    excluded; per-group correlation failures are surfaced and excluded from
    that criterion's average only.
    """
    report = EvalReport()
    shared = sorted(set(scores) & set(bt))
    for missing in sorted(set(scores) ^ set(bt)):
        side = "votes" if missing in scores else "scores"
        report.warnings.append(f"group {missing!r} missing from {side}; skipped")
    if not shared:
        raise InvalidInputError("no group appears in both scores and votes")

    sums = {c: 0.0 for c in CRITERIA}
    counts = {c: 0 for c in CRITERIA}
    positions: list[int] = []
    n_methods_max = 0

    for group in shared:
        fitted = bt[group]
        method_scores = scores[group]
        missing_methods = [m for m in fitted.methods if m not in method_scores]
        if missing_methods:
            report.warnings.append(
                f"group {group!r} lacks scores for {missing_methods}; skipped"
            )
            continue
        obj = np.array([method_scores[m] for m in fitted.methods])
        ref = fitted.scores
        entry: dict = {"n_methods": len(fitted.methods), "smoothed": fitted.smoothed}

        for name, fn in (("srcc", srcc), ("krcc", krcc)):
            try:
                entry[name] = fn(obj, ref)
                sums[name] += entry[name]
                counts[name] += 1
            except UndefinedCorrelationError as exc:
                entry[name] = None
                entry.setdefault("errors", []).append(f"{name}: {exc}")
        try:
            plcc, kappa = plcc_fit(obj, ref)
            entry["plcc"] = plcc
            entry["kappa"] = [float(v) for v in kappa]
            sums["plcc"] += plcc
            counts["plcc"] += 1
        except (UndefinedCorrelationError, InvalidInputError) as exc:
            entry["plcc"] = None
            entry.setdefault("errors", []).append(f"plcc: {exc}")
        entry["hitr"] = hitr(obj, fitted)
        sums["hitr"] += entry["hitr"]
        counts["hitr"] += 1

        best = int(np.argmax(ref))
        positions.append(int(np.sum(obj >= obj[best])))
        n_methods_max = max(n_methods_max, len(fitted.methods))
        report.per_group[group] = entry

    report.averages = {
        c: (sums[c] / counts[c] if counts[c] else None) for c in CRITERIA
    }
    if positions:
        pos = np.asarray(positions)
        report.rank_accuracy = [
            float(np.mean(pos <= n)) for n in range(1, n_methods_max + 1)
        ]
    return report


def read_votes_csv(path) -> dict[str, WinMatrix]:
    """Parse `group,method_i,method_j,wins_i,wins_j` rows into win matrices."""
    tallies: dict[str, dict[tuple[str, str], float]] = {}
    methods: dict[str, set] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:5]] != [
            "group",
            "method_i",
            "method_j",
            "wins_i",
            "wins_j",
        ]:
            raise InvalidInputError(f"{path}: line 1: bad or missing votes header")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 5:
                raise InvalidInputError(f"{path}: line {line_no}: expected 5 columns")
            group, mi, mj = row[0].strip(), row[1].strip(), row[2].strip()
            try:
                wi, wj = float(row[3]), float(row[4])
            except ValueError:
                raise InvalidInputError(
                    f"{path}: line {line_no}: wins must be numeric"
                ) from None
            if mi == mj:
                raise InvalidInputError(
                    f"{path}: line {line_no}: self-comparison {mi!r}"
                )
            tallies.setdefault(group, {})
            methods.setdefault(group, set()).update((mi, mj))
            tallies[group][(mi, mj)] = tallies[group].get((mi, mj), 0.0) + wi
            tallies[group][(mj, mi)] = tallies[group].get((mj, mi), 0.0) + wj
    out = {}
    for group, pair_wins in tallies.items():
        names = sorted(methods[group])
        index = {m: i for i, m in enumerate(names)}
        counts = np.zeros((len(names), len(names)))
        for (mi, mj), wins in pair_wins.items():
            counts[index[mi], index[mj]] = wins
        out[group] = WinMatrix(group=group, methods=names, counts=counts)
    return out


def read_scores_csv(path) -> dict[str, dict[str, dict[str, float]]]:
    """Parse `group,method,q_content,q_style,q_overall` rows."""
    out: dict[str, dict[str, dict[str, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:5]] != [
            "group",
            "method",
            "q_content",
            "q_style",
            "q_overall",
        ]:
            raise InvalidInputError(f"{path}: line 1: bad or missing scores header")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 5:
                raise InvalidInputError(f"{path}: line {line_no}: expected 5 columns")
            group, method = row[0].strip(), row[1].strip()
            try:
                values = {
                    "q_content": float(row[2]),
                    "q_style": float(row[3]),
                    "q_overall": float(row[4]),
                }
            except ValueError:
                raise InvalidInputError(
                    f"{path}: line {line_no}: scores must be numeric"
                ) from None
            out.setdefault(group, {})[method] = values
    return out
