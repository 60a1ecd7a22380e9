"""Tree induction over mixed symbolic/numeric data.

Generative mode scores candidate splits on all variables with a combined
relative impurity (normalized entropy for symbolic, relative MSE reduction
for numeric); discriminative mode restricts scoring to a target subset and
candidates to the remaining features, which reduces to ordinary CART.
Each leaf stores a prior weight and independent univariate distributions
over every variable, so the whole tree forms a mixture model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Assignment, DataError, Dataset, Interval, Variable
from .multinomial import Multinomial
from .plcdf import Dirac, PiecewiseLinearCDF, build_quantile_dataset, cdf_learn

_PURE = 1e-12  # impurity at or below this counts as zero

THRESHOLD = "threshold"
EQUALS = "equals"


@dataclass(frozen=True)
class SplitCriterion:
    """Decision-node test: numeric ``x <= threshold`` or symbolic ``x == value``."""

    variable: Variable
    kind: str
    threshold: float = math.nan  # numeric splits
    value_index: int = -1        # symbolic splits

    def matches(self, cell: float) -> bool:
        if self.kind == THRESHOLD:
            return cell <= self.threshold
        return int(cell) == self.value_index

    def label(self) -> str:
        if self.kind == THRESHOLD:
            return f"{self.variable.name} <= {self.threshold:g}"
        return f"{self.variable.name} = {self.variable.domain[self.value_index]}"


@dataclass
class DecisionNode:
    criterion: SplitCriterion
    left: "DecisionNode | Leaf"   # criterion satisfied
    right: "DecisionNode | Leaf"  # otherwise


@dataclass
class Leaf:
    """Terminal node: mixture component with per-variable distributions."""

    index: int
    prior: float
    distributions: dict
    path: Assignment
    sample_count: float

    def accepts_row(self, schema, row) -> bool:
        for name, constraint in self.path.items():
            j = next(i for i, v in enumerate(schema) if v.name == name)
            if isinstance(constraint, Interval):
                if not constraint.contains(float(row[j])):
                    return False
            elif int(row[j]) not in constraint:
                return False
        return True


@dataclass
class TreeModel:
    """Learnt tree with its leaves; immutable after construction."""

    schema: tuple[Variable, ...]
    root: "DecisionNode | Leaf"
    leaves: list[Leaf]
    config: "LearnerConfig"

    def descend(self, row) -> Leaf:
        node = self.root
        while isinstance(node, DecisionNode):
            j = self._index[node.criterion.variable.name]
            node = node.left if node.criterion.matches(float(row[j])) else node.right
        return node

    def __post_init__(self):
        self._index = {v.name: j for j, v in enumerate(self.schema)}

    def variable(self, name: str) -> Variable:
        for v in self.schema:
            if v.name == name:
                return v
        raise DataError(f"unknown variable {name!r}")

    def parameter_count(self) -> int:
        return sum(d.parameter_count() for leaf in self.leaves
                   for d in leaf.distributions.values())


@dataclass(frozen=True)
class LearnerConfig:
    """Hyperparameters for tree induction.

    ``min_samples_leaf``: float in (0, 1] is a fraction of total training
    weight (ceiling-rounded); an int >= 1 is an absolute weight.
    ``epsilon`` is the CDF fitting tolerance. ``targets`` switches to
    discriminative mode.
    """

    min_samples_leaf: float | int = 0.1
    min_impurity_improvement: float = 0.0
    epsilon: float = 0.05
    targets: tuple[str, ...] | None = None
    max_depth: int | None = None

    def __post_init__(self):
        m = self.min_samples_leaf
        if isinstance(m, bool) or not isinstance(m, (int, float)):
            raise DataError("min_samples_leaf must be a number")
        if isinstance(m, float) and not m.is_integer():
            if not 0.0 < m < 1.0:
                raise DataError("fractional min_samples_leaf must lie in (0, 1)")
        elif isinstance(m, float):
            if not (0.0 < m <= 1.0 or m >= 1.0):
                raise DataError("min_samples_leaf must be positive")
        elif m < 1:
            raise DataError("absolute min_samples_leaf must be >= 1")
        if self.min_impurity_improvement < 0:
            raise DataError("min_impurity_improvement must be >= 0")
        if self.epsilon < 0:
            raise DataError("epsilon must be >= 0")
        if self.max_depth is not None and self.max_depth < 0:
            raise DataError("max_depth must be >= 0")

    def resolve_min_weight(self, total_weight: float) -> float:
        m = self.min_samples_leaf
        if isinstance(m, float) and 0.0 < m <= 1.0:
            return float(math.ceil(m * total_weight))
        return float(m)

    def to_json(self) -> dict:
        return {
            "min_samples_leaf": self.min_samples_leaf,
            "min_impurity_improvement": self.min_impurity_improvement,
            "epsilon": self.epsilon,
            "targets": list(self.targets) if self.targets else None,
            "max_depth": self.max_depth,
        }

    @staticmethod
    def from_json(obj: dict) -> "LearnerConfig":
        return LearnerConfig(
            min_samples_leaf=obj.get("min_samples_leaf", 0.1),
            min_impurity_improvement=obj.get("min_impurity_improvement", 0.0),
            epsilon=obj.get("epsilon", 0.05),
            targets=tuple(obj["targets"]) if obj.get("targets") else None,
            max_depth=obj.get("max_depth"),
        )


# -- impurity ----------------------------------------------------------------


def _entropy_rel(weighted_counts: np.ndarray) -> float:
    k = len(weighted_counts)
    if k <= 1:
        return 0.0
    total = weighted_counts.sum()
    nz = weighted_counts[weighted_counts > 0] / total
    return float(-(nz * np.log(nz)).sum()) / math.log(k)


def _weighted_mse(values: np.ndarray, weights: np.ndarray) -> float:
    total = weights.sum()
    mean = float((weights * values).sum() / total)
    return float((weights * (values - mean) ** 2).sum() / total)


class _Scope:
    """Per-node sufficient statistics over the impurity scope."""

    def __init__(self, schema, scope_indices, values, weights):
        self.schema = schema
        self.values = values
        self.weights = weights
        self.total = float(weights.sum())
        self.sym = [j for j in scope_indices if schema[j].symbolic]
        self.num = [j for j in scope_indices if schema[j].numeric]
        self.parent_h = {j: _entropy_rel(self._counts(j)) for j in self.sym}
        self.parent_mse = {j: _weighted_mse(values[:, j], weights) for j in self.num}

    def _counts(self, j: int) -> np.ndarray:
        k = len(self.schema[j].domain)
        return np.bincount(self.values[:, j].astype(int), weights=self.weights,
                           minlength=k)

    def all_pure(self) -> bool:
        return (all(h <= _PURE for h in self.parent_h.values())
                and all(m <= _PURE for m in self.parent_mse.values()))

    def improvement(self, left_mask: np.ndarray) -> float:
        """Combined relative impurity improvement of a binary split.

        Per symbolic variable: parent relative entropy minus the
        weight-averaged children's. Per numeric variable: the fraction by
        which the within-population MSE shrinks. Each class of variables
        is averaged with weight 1/|class|^2; an already-pure variable
        contributes 0.
        """
        wl = float(self.weights[left_mask].sum())
        wr = self.total - wl
        total_i = 0.0
        if self.sym:
            s = 0.0
            for j in self.sym:
                hp = self.parent_h[j]
                if hp <= _PURE:
                    continue
                k = len(self.schema[j].domain)
                cl = np.bincount(self.values[left_mask, j].astype(int),
                                 weights=self.weights[left_mask], minlength=k)
                cr = np.bincount(self.values[~left_mask, j].astype(int),
                                 weights=self.weights[~left_mask], minlength=k)
                child = (wl * _entropy_rel(cl) + wr * _entropy_rel(cr)) / self.total
                s += hp - child
            total_i += s / len(self.sym) ** 2
        if self.num:
            s = 0.0
            for j in self.num:
                mp = self.parent_mse[j]
                if mp <= _PURE:
                    continue
                ml = _weighted_mse(self.values[left_mask, j], self.weights[left_mask])
                mr = _weighted_mse(self.values[~left_mask, j], self.weights[~left_mask])
                child = (wl * ml + wr * mr) / self.total
                s += (mp - child) / mp
            total_i += s / len(self.num) ** 2
        return total_i


def impurity_improvement(data: Dataset, candidate: SplitCriterion,
                         scope=None) -> float:
    """Improvement of one candidate split over ``data``, scored on ``scope``
    (variable names; defaults to all variables)."""
    names = [v.name for v in data.schema]
    scope_idx = ([names.index(n) for n in scope] if scope is not None
                 else list(range(len(names))))
    j = names.index(candidate.variable.name)
    left = np.array([candidate.matches(float(c)) for c in data.values[:, j]])
    if not left.any() or left.all():
        raise DataError("candidate split leaves one side empty")
    sc = _Scope(data.schema, scope_idx, data.values, data.weights)
    return sc.improvement(left)


# -- candidate search --------------------------------------------------------


def _best_numeric_split(scope: _Scope, j: int, min_weight: float):
    """Best threshold for numeric variable ``j``: midpoints of consecutive
    distinct sorted values, both sides at least ``min_weight``."""
    col = scope.values[:, j]
    order = np.argsort(col, kind="stable")
    vs = col[order]
    ws = scope.weights[order]
    cw = np.cumsum(ws)
    total = cw[-1]
    boundary = np.nonzero(vs[:-1] < vs[1:])[0]
    boundary = boundary[(cw[boundary] >= min_weight)
                        & (total - cw[boundary] >= min_weight)]
    if boundary.size == 0:
        return None, -math.inf
    # sufficient statistics per position, for all scope variables at once
    best_i, best_k = -math.inf, -1
    sym_cum = {}
    for sj in scope.sym:
        k = len(scope.schema[sj].domain)
        cats = scope.values[order, sj].astype(int)
        onehot = np.zeros((len(order), k))
        onehot[np.arange(len(order)), cats] = 1.0
        sym_cum[sj] = np.cumsum(onehot * ws[:, None], axis=0)
    num_cum = {}
    for nj in scope.num:
        x = scope.values[order, nj]
        num_cum[nj] = (np.cumsum(ws * x), np.cumsum(ws * x * x))

    wl = cw[boundary]
    wr = total - wl
    total_i = np.zeros(len(boundary))
    if scope.sym:
        s = np.zeros(len(boundary))
        logk_cache = {}
        for sj in scope.sym:
            hp = scope.parent_h[sj]
            if hp <= _PURE:
                continue
            k = len(scope.schema[sj].domain)
            cl = sym_cum[sj][boundary]            # (B, k)
            cr = sym_cum[sj][-1] - cl
            hl = _entropy_rel_rows(cl, k)
            hr = _entropy_rel_rows(cr, k)
            s += hp - (wl * hl + wr * hr) / total
        total_i += s / len(scope.sym) ** 2
    if scope.num:
        s = np.zeros(len(boundary))
        for nj in scope.num:
            mp = scope.parent_mse[nj]
            if mp <= _PURE:
                continue
            c1, c2 = num_cum[nj]
            s1l, s2l = c1[boundary], c2[boundary]
            s1r, s2r = c1[-1] - s1l, c2[-1] - s2l
            ml = np.maximum(s2l / wl - (s1l / wl) ** 2, 0.0)
            mr = np.maximum(s2r / wr - (s1r / wr) ** 2, 0.0)
            s += (mp - (wl * ml + wr * mr) / total) / mp
        total_i += s / len(scope.num) ** 2

    k = int(np.argmax(total_i))  # ties keep the lowest position index
    i = float(total_i[k])
    pos = boundary[k]
    threshold = (vs[pos] + vs[pos + 1]) / 2.0
    return threshold, i


def _entropy_rel_rows(counts: np.ndarray, k: int) -> np.ndarray:
    if k <= 1:
        return np.zeros(counts.shape[0])
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
        logp = np.where(p > 0, np.log(p), 0.0)
    return -(p * logp).sum(axis=1) / math.log(k)


def _best_symbolic_split(scope: _Scope, j: int, admissible, min_weight: float):
    """Best one-vs-rest value for symbolic variable ``j`` among the values
    still admissible on the path."""
    col = scope.values[:, j].astype(int)
    best_v, best_i = -1, -math.inf
    for v in sorted(admissible):
        mask = col == v
        wl = float(scope.weights[mask].sum())
        if wl < min_weight or scope.total - wl < min_weight:
            continue
        i = scope.improvement(mask)
        if i > best_i:
            best_v, best_i = v, i
    return best_v, best_i


# -- tree construction -------------------------------------------------------


def learn(data: Dataset, config: LearnerConfig | None = None) -> TreeModel:
    """Induce a tree mixture model by recursive best-first splitting."""
    config = config or LearnerConfig()
    if len(data) == 0:
        raise DataError("cannot learn from an empty dataset")
    schema = data.schema
    names = [v.name for v in schema]
    if config.targets:
        unknown = set(config.targets) - set(names)
        if unknown:
            raise DataError(f"unknown target variables: {sorted(unknown)}")
        scope_idx = [names.index(n) for n in config.targets]
        candidate_idx = [j for j in range(len(names)) if j not in scope_idx]
        if not candidate_idx:
            raise DataError("discriminative mode needs at least one feature variable")
    else:
        scope_idx = list(range(len(names)))
        candidate_idx = list(range(len(names)))

    total_weight = data.total_weight
    min_weight = config.resolve_min_weight(total_weight)
    if total_weight < min_weight:
        raise DataError("dataset is smaller than one minimum-size leaf")

    leaves: list[Leaf] = []

    def make_leaf(rows: np.ndarray, path: Assignment) -> Leaf:
        values = data.values[rows]
        weights = data.weights[rows]
        dists = {}
        for j, var in enumerate(schema):
            col = values[:, j]
            if var.symbolic:
                counts = np.bincount(col.astype(int), weights=weights,
                                     minlength=len(var.domain))
                dists[var.name] = Multinomial.fit(var, counts)
            elif np.all(col == col[0]):
                dists[var.name] = Dirac(float(col[0]))
            else:
                points = build_quantile_dataset(col, weights)
                dists[var.name] = cdf_learn(points, config.epsilon)
        leaf = Leaf(index=len(leaves), prior=float(weights.sum()) / total_weight,
                    distributions=dists, path=dict(path),
                    sample_count=float(weights.sum()))
        leaves.append(leaf)
        return leaf

    def build(rows: np.ndarray, path: Assignment,
              admissible: dict, depth: int):
        values = data.values[rows]
        weights = data.weights[rows]
        w = float(weights.sum())
        if (w < 2 * min_weight
                or (config.max_depth is not None and depth >= config.max_depth)):
            return make_leaf(rows, path)
        scope = _Scope(schema, scope_idx, values, weights)
        if scope.all_pure():
            return make_leaf(rows, path)

        best = None  # (improvement, criterion, left_mask)
        for j in candidate_idx:
            var = schema[j]
            if var.numeric:
                threshold, imp = _best_numeric_split(scope, j, min_weight)
                if threshold is not None and (best is None or imp > best[0]):
                    crit = SplitCriterion(var, THRESHOLD, threshold=threshold)
                    best = (imp, crit, values[:, j] <= threshold)
            else:
                v, imp = _best_symbolic_split(scope, j, admissible[j], min_weight)
                if v >= 0 and (best is None or imp > best[0]):
                    crit = SplitCriterion(var, EQUALS, value_index=v)
                    best = (imp, crit, values[:, j].astype(int) == v)

        if best is None or best[0] <= config.min_impurity_improvement:
            return make_leaf(rows, path)

        _, crit, left_mask = best
        name = crit.variable.name
        if crit.kind == THRESHOLD:
            prev = path.get(name, Interval(-math.inf, math.inf, True, True))
            left_path = {**path, name: prev.intersect(
                Interval(-math.inf, crit.threshold, lower_open=True))}
            right_path = {**path, name: prev.intersect(
                Interval(crit.threshold, math.inf, lower_open=True, upper_open=True))}
            left_adm, right_adm = admissible, admissible
        else:
            j = names.index(name)
            left_set = frozenset([crit.value_index])
            right_set = frozenset(admissible[j]) - left_set
            left_path = {**path, name: left_set}
            right_path = {**path, name: right_set}
            left_adm = {**admissible, j: left_set}
            right_adm = {**admissible, j: right_set}

        left = build(rows[left_mask], left_path, left_adm, depth + 1)
        right = build(rows[~left_mask], right_path, right_adm, depth + 1)
        return DecisionNode(crit, left, right)

    admissible0 = {j: frozenset(range(len(schema[j].domain)))
                   for j in range(len(schema)) if schema[j].symbolic}
    root = build(np.arange(len(data)), {}, admissible0, 0)
    return TreeModel(schema=schema, root=root, leaves=leaves, config=config)
