"""Model persistence (versioned JSON) and DOT structure export."""

from __future__ import annotations

import json
import math

from .data import Interval, Variable
from .learner import (EQUALS, THRESHOLD, DecisionNode, Leaf, LearnerConfig,
                      SplitCriterion, TreeModel)
from .multinomial import Multinomial
from .plcdf import DistributionError, numeric_from_json

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a model file is malformed or violates model invariants."""


def dumps(model: TreeModel) -> str:
    nodes = []

    def encode(node) -> int:
        idx = len(nodes)
        if isinstance(node, Leaf):
            nodes.append({"type": "leaf", "leaf": node.index})
            return idx
        entry = {"type": "split",
                 "var": node.criterion.variable.name,
                 "op": "le" if node.criterion.kind == THRESHOLD else "eq",
                 "value": (node.criterion.threshold
                           if node.criterion.kind == THRESHOLD
                           else node.criterion.variable.domain[node.criterion.value_index])}
        nodes.append(entry)
        entry["left"] = encode(node.left)
        entry["right"] = encode(node.right)
        return idx

    encode(model.root)
    doc = {
        "version": FORMAT_VERSION,
        "schema": [v.to_json() for v in model.schema],
        "config": model.config.to_json(),
        "nodes": nodes,
        "leaves": [{
            "prior": leaf.prior,
            "sample_count": leaf.sample_count,
            "distributions": {name: d.to_json()
                              for name, d in leaf.distributions.items()},
        } for leaf in model.leaves],
    }
    return json.dumps(doc, separators=(",", ":"))


def save(model: TreeModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))


def loads(text: str) -> TreeModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"document: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"version: expected {FORMAT_VERSION}, got {doc.get('version')!r}"
            if isinstance(doc, dict) else "document: not a JSON object")

    try:
        schema = tuple(Variable.from_json(v) for v in doc["schema"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"schema: {exc}") from None
    by_name = {v.name: v for v in schema}

    try:
        config = LearnerConfig.from_json(doc.get("config", {}))
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"config: {exc}") from None

    leaves = []
    try:
        for k, entry in enumerate(doc["leaves"]):
            dists = {}
            for name, dj in entry["distributions"].items():
                if name not in by_name:
                    raise ModelFormatError(f"leaves[{k}]: unknown variable {name!r}")
                var = by_name[name]
                dists[name] = (Multinomial.from_json(var, dj) if var.symbolic
                               else numeric_from_json(dj))
            missing = set(by_name) - set(dists)
            if missing:
                raise ModelFormatError(f"leaves[{k}]: missing distributions for {sorted(missing)}")
            leaves.append(Leaf(index=k, prior=float(entry["prior"]),
                               distributions=dists, path={},
                               sample_count=float(entry["sample_count"])))
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, DistributionError) as exc:
        raise ModelFormatError(f"leaves: {exc}") from None

    total_prior = sum(leaf.prior for leaf in leaves)
    if not leaves or abs(total_prior - 1.0) > 1e-9 or any(l.prior <= 0 for l in leaves):
        raise ModelFormatError(f"leaves: priors must be positive and sum to 1, got {total_prior}")

    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise ModelFormatError("nodes: missing or empty")

    seen_leaves = set()

    def decode(idx: int, path: dict, admissible: dict):
        try:
            entry = nodes[idx]
        except (IndexError, TypeError):
            raise ModelFormatError(f"nodes[{idx}]: out of range") from None
        try:
            if entry["type"] == "leaf":
                leaf = leaves[entry["leaf"]]
                if entry["leaf"] in seen_leaves:
                    raise ModelFormatError(f"nodes[{idx}]: leaf {entry['leaf']} referenced twice")
                seen_leaves.add(entry["leaf"])
                leaf.path = dict(path)
                return leaf
            var = by_name[entry["var"]]
            if entry["op"] == "le":
                t = float(entry["value"])
                crit = SplitCriterion(var, THRESHOLD, threshold=t)
                prev = path.get(var.name, Interval(-math.inf, math.inf, True, True))
                lp = {**path, var.name: prev.intersect(Interval(-math.inf, t, lower_open=True))}
                rp = {**path, var.name: prev.intersect(
                    Interval(t, math.inf, lower_open=True, upper_open=True))}
                la, ra = admissible, admissible
            else:
                vi = var.index_of(entry["value"])
                crit = SplitCriterion(var, EQUALS, value_index=vi)
                cur = admissible.get(var.name, frozenset(range(len(var.domain))))
                ls, rs = frozenset([vi]), cur - frozenset([vi])
                if not rs:
                    raise ModelFormatError(f"nodes[{idx}]: split exhausts the domain of {var.name!r}")
                lp, rp = {**path, var.name: ls}, {**path, var.name: rs}
                la, ra = {**admissible, var.name: ls}, {**admissible, var.name: rs}
            left = decode(entry["left"], lp, la)
            right = decode(entry["right"], rp, ra)
            return DecisionNode(crit, left, right)
        except ModelFormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"nodes[{idx}]: {exc}") from None

    root = decode(0, {}, {})
    if len(seen_leaves) != len(leaves):
        raise ModelFormatError("nodes: tree does not reference every leaf exactly once")
    return TreeModel(schema=schema, root=root, leaves=leaves, config=config)


def load(path) -> TreeModel:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ModelFormatError(f"file: cannot read {path} ({exc})") from None


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(model: TreeModel) -> str:
    """Render the tree as a Graphviz digraph.

    Decision nodes carry their criterion, edges true/false, leaves their
    prior, sample count and a per-variable expectation/argmax summary.
    """
    lines = ["digraph tree {", "  node [shape=box];"]
    counter = [0]

    def emit(node) -> str:
        nid = f"n{counter[0]}"
        counter[0] += 1
        if isinstance(node, Leaf):
            summary = []
            for var in model.schema:
                d = node.distributions[var.name]
                if var.symbolic:
                    summary.append(f"{var.name}: {var.domain[d.argmax()]}")
                else:
                    summary.append(f"{var.name}: {d.expectation():.4g}")
            label = (f"leaf {node.index}\\nprior {node.prior:.4g}"
                     f"\\nsamples {node.sample_count:g}\\n" + "\\n".join(summary))
            lines.append(f'  {nid} [label="{_dot_escape(label)}"];')
            return nid
        label = _dot_escape(node.criterion.label())
        lines.append(f'  {nid} [label="{label}"];')
        left = emit(node.left)
        right = emit(node.right)
        lines.append(f'  {nid} -> {left} [label="true"];')
        lines.append(f'  {nid} -> {right} [label="false"];')
        return nid

    emit(model.root)
    lines.append("}")
    return "\n".join(lines) + "\n"
