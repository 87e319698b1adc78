"""Remove bias components from embeddings.

Hard-debiasing has two steps. *Neutralize* strips a word's component inside
the bias subspace and renormalizes:

    w' = (w - w_B) / ||w - w_B||,   w_B = sum_k <w, b_k> b_k.

*Equalize* re-positions every word of an equality set E so all members share
one out-of-subspace part and symmetric in-subspace parts:

    w' = (mu - mu_B) + sqrt(1 - ||mu - mu_B||^2) * (w_B - mu_B)/||w_B - mu_B||

with mu the mean of E's vectors. The square root requires unit-norm inputs,
which is why the pipeline insists on normalized embedding sets.

Strategies: debias one category; debias several sequentially (each step's
subspace is recomputed on the partially debiased vectors unless the plan
freezes them); or debias once against a composed subspace (SUM / MEAN /
intersection direction).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .compose import compose
from .embeddings import EmbeddingSet
from .errors import (
    EqualizeDegenerateError,
    FullyContainedError,
    RadicandNegativeError,
    ShapeMismatchError,
    WordSkippedWarning,
)
from .subspace import BiasSubspace, bias_subspace
from .wordsets import CategorySpec, resolve_words

RESIDUAL_TOL = 1e-10


class Strategy(str, Enum):
    SINGLE = "single"
    SEQUENTIAL = "sequential"
    SUM = "sum"
    MEAN = "mean"
    JOSEC = "josec"


@dataclass(frozen=True)
class DebiasPlan:
    """What to debias and how.

    ``neutral_words=None`` selects the default rule: every vocabulary word
    that appears in no defining set and no equality set of the categories in
    play. ``equality_sets`` may override the specs' own equality sets per
    category name. ``category_order`` is required for SEQUENTIAL and must be
    a permutation of the category names.
    """

    strategy: Strategy
    k: int
    category_order: tuple[str, ...] = ()
    neutral_words: tuple[str, ...] | None = None
    equality_sets: Mapping[str, Sequence[Sequence[str]]] | None = None
    frozen_subspaces: bool = False
    lowercase_fallback: bool = False
    double_center: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        object.__setattr__(self, "category_order", tuple(self.category_order))
        if self.neutral_words is not None:
            object.__setattr__(self, "neutral_words", tuple(self.neutral_words))

    def validate(self, specs: Sequence[CategorySpec]) -> None:
        """Check plan-vs-specs invariants; raises ValueError on violation."""
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise ValueError("category names must be unique")
        if self.strategy is Strategy.SEQUENTIAL:
            if sorted(self.category_order) != sorted(names):
                raise ValueError(
                    f"category_order {self.category_order!r} is not a "
                    f"permutation of {tuple(names)!r}")
        if self.strategy is Strategy.SINGLE and len(specs) != 1:
            raise ValueError("SINGLE strategy requires exactly one category")
        if self.neutral_words is not None:
            neutral = set(self.neutral_words)
            for spec in specs:
                eq_words = {w for ws in self.equality_sets_for(spec) for w in ws}
                overlap = neutral & eq_words
                if overlap:
                    raise ValueError(
                        f"words {sorted(overlap)!r} appear in both the neutral "
                        f"list and an equality set of {spec.name!r}")

    def equality_sets_for(self, spec: CategorySpec) -> tuple[tuple[str, ...], ...]:
        if self.equality_sets is not None and spec.name in self.equality_sets:
            return tuple(tuple(ws) for ws in self.equality_sets[spec.name])
        return spec.equality_sets


def bias_component(w: np.ndarray, subspace: BiasSubspace) -> np.ndarray:
    """Projection of ``w`` onto the subspace rows: sum_k <w, b_k> b_k."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (subspace.dim,):
        raise ShapeMismatchError(
            f"vector has shape {w.shape}, subspace dimension is {subspace.dim}")
    return (subspace.components @ w) @ subspace.components


def neutralize(w: np.ndarray, subspace: BiasSubspace) -> np.ndarray:
    """Remove the bias component and renormalize to unit length.

    Raises FullyContainedError when ``w`` lies numerically inside the
    subspace, leaving no direction to keep.
    """
    residual = np.asarray(w, dtype=np.float64) - bias_component(w, subspace)
    norm = np.linalg.norm(residual)
    if norm <= RESIDUAL_TOL:
        raise FullyContainedError("vector lies inside the bias subspace")
    return residual / norm


def equalize(words: Sequence[str], subspace: BiasSubspace, emb: EmbeddingSet,
             lowercase_fallback: bool = False) -> dict[str, np.ndarray]:
    """Equalize the resolved words of one equality set; returns the new
    vectors keyed by vocabulary word.

    All outputs are unit-norm and share the identical out-of-subspace part.
    Raises EqualizeDegenerateError when a word's bias component coincides
    with the set mean's, and RadicandNegativeError when the inputs cannot
    have been unit vectors.
    """
    if not emb.normalized:
        raise ValueError("equalize requires a normalized embedding set")
    res = resolve_words(words, emb, lowercase_fallback, dedupe=False)
    if len(res.resolved) < 2:
        raise ValueError(
            f"equality set {tuple(words)!r} resolves to fewer than 2 words")
    vectors = emb.take(res.resolved)
    mu = vectors.mean(axis=0)
    mu_b = bias_component(mu, subspace)
    nu = mu - mu_b
    radicand = 1.0 - float(nu @ nu)
    if radicand < -1e-9:
        raise RadicandNegativeError(
            f"||mu - mu_B|| = {np.sqrt(nu @ nu):.6f} > 1; input vectors "
            "are not unit-norm")
    scale = np.sqrt(max(radicand, 0.0))
    out: dict[str, np.ndarray] = {}
    for word, w in zip(res.resolved, vectors):
        dev = bias_component(w, subspace) - mu_b
        dev_norm = np.linalg.norm(dev)
        if dev_norm <= RESIDUAL_TOL:
            raise EqualizeDegenerateError(word)
        out[word] = nu + scale * dev / dev_norm
    return out


def _neutralize_block(matrix: np.ndarray, subspace: BiasSubspace):
    """Vectorized neutralize over rows; returns (new_rows, contained_mask)."""
    residual = matrix - (matrix @ subspace.components.T) @ subspace.components
    norms = np.linalg.norm(residual, axis=1)
    contained = norms <= RESIDUAL_TOL
    safe = np.where(contained, 1.0, norms)
    return residual / safe[:, None], contained


def default_neutral_words(emb: EmbeddingSet, specs: Sequence[CategorySpec],
                          plan: DebiasPlan) -> tuple[str, ...]:
    """All vocabulary words outside every defining and equality set in play."""
    excluded: set[str] = set()
    for spec in specs:
        excluded.update(spec.all_defining_words())
        for ws in plan.equality_sets_for(spec):
            excluded.update(ws)
    if plan.lowercase_fallback:
        excluded.update({w.lower() for w in excluded})
    return tuple(w for w in emb.vocab if w not in excluded)


def hard_debias(emb: EmbeddingSet, subspace: BiasSubspace, plan: DebiasPlan,
                specs: Sequence[CategorySpec]) -> EmbeddingSet:
    """Neutralize neutral words and equalize equality-set words against one
    subspace; every other word is left unchanged.

    Per-word degeneracies (fully contained neutral words, degenerate
    equality members) and equality sets that cannot be equalized are skipped
    with a WordSkippedWarning rather than aborting the run. Vocabulary order
    is preserved.
    """
    if not emb.normalized:
        raise ValueError("hard_debias requires a normalized embedding set "
                         "(call normalize())")
    plan.validate(specs)
    neutral = plan.neutral_words
    if neutral is None:
        neutral = default_neutral_words(emb, specs, plan)

    matrix = np.array(emb.matrix, copy=True)

    res = resolve_words(neutral, emb, plan.lowercase_fallback)
    if res.missing and plan.neutral_words is not None:
        warnings.warn(f"{len(res.missing)} neutral word(s) not in vocabulary",
                      WordSkippedWarning, stacklevel=2)
    idx = np.asarray([emb.index(w) for w in res.resolved], dtype=np.intp)
    if idx.size:
        rows, contained = _neutralize_block(matrix[idx], subspace)
        if contained.any():
            kept = [res.resolved[i] for i in np.nonzero(contained)[0][:5]]
            warnings.warn(
                f"{int(contained.sum())} neutral word(s) lie inside the bias "
                f"subspace and were left unchanged (e.g. {kept})",
                WordSkippedWarning, stacklevel=2)
            rows[contained] = matrix[idx[contained]]
        matrix[idx] = rows

    # equality words are disjoint from the neutral list, so their vectors in
    # the input set are still current here
    for spec in specs:
        for ws in plan.equality_sets_for(spec):
            try:
                updated = equalize(ws, subspace, emb, plan.lowercase_fallback)
            except (ValueError, EqualizeDegenerateError, RadicandNegativeError) as exc:
                warnings.warn(f"equality set {tuple(ws)!r} skipped: {exc}",
                              WordSkippedWarning, stacklevel=2)
                continue
            for word, vec in updated.items():
                matrix[emb.index(word)] = vec

    # an oblique (non-orthonormal) subspace gives equalize no unit-norm
    # guarantee, so the flag follows the subspace
    return emb.with_matrix(matrix, normalized=subspace.orthonormal)


def sequential_debias(emb: EmbeddingSet, specs: Sequence[CategorySpec],
                      plan: DebiasPlan) -> EmbeddingSet:
    """Apply hard_debias per category in ``plan.category_order``.

    By default each step recomputes its category's subspace on the current
    (already partially debiased) vectors; ``frozen_subspaces=True`` computes
    all subspaces upfront on the input instead.
    """
    if plan.strategy is not Strategy.SEQUENTIAL:
        raise ValueError("sequential_debias requires a SEQUENTIAL plan")
    plan.validate(specs)
    by_name = {s.name: s for s in specs}
    frozen = {}
    if plan.frozen_subspaces:
        frozen = {name: bias_subspace(by_name[name], emb, plan.k,
                                      double_center=plan.double_center,
                                      lowercase_fallback=plan.lowercase_fallback)
                  for name in plan.category_order}
    # neutral default excludes every category's words, not just the current
    # step's, so later steps see their defining sets intact
    neutral = plan.neutral_words
    if neutral is None:
        neutral = default_neutral_words(emb, specs, plan)
    current = emb
    for name in plan.category_order:
        spec = by_name[name]
        if plan.frozen_subspaces:
            subspace = frozen[name]
        else:
            subspace = bias_subspace(spec, current, plan.k,
                                     double_center=plan.double_center,
                                     lowercase_fallback=plan.lowercase_fallback)
        step_plan = DebiasPlan(
            strategy=Strategy.SINGLE, k=plan.k,
            neutral_words=neutral,
            equality_sets={name: plan.equality_sets_for(spec)},
            lowercase_fallback=plan.lowercase_fallback,
            double_center=plan.double_center)
        current = hard_debias(current, subspace, step_plan, [spec])
    return current


def run_plan(emb: EmbeddingSet, specs: Sequence[CategorySpec],
             plan: DebiasPlan) -> EmbeddingSet:
    """Execute a full debiasing plan and return the new embedding set."""
    plan.validate(specs)
    if plan.strategy is Strategy.SINGLE:
        subspace = bias_subspace(specs[0], emb, plan.k,
                                 double_center=plan.double_center,
                                 lowercase_fallback=plan.lowercase_fallback)
        return hard_debias(emb, subspace, plan, specs)
    if plan.strategy is Strategy.SEQUENTIAL:
        return sequential_debias(emb, specs, plan)
    subspaces = [bias_subspace(s, emb, plan.k, double_center=plan.double_center,
                               lowercase_fallback=plan.lowercase_fallback)
                 for s in specs]
    composed = compose(plan.strategy.value, subspaces)
    return hard_debias(emb, composed.subspace, plan, specs)
