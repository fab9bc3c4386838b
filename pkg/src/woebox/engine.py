"""Weight-of-evidence calculus over fitted models.

The weight of evidence of hypothesis ``y in U`` against alternative
``y in V`` carried by evidence ``x_A`` is the log-likelihood ratio

    woe(U/V : x_A) = log P(x_A | y in U) - log P(x_A | y in V),

reported in nats throughout. Three identities drive everything here:

* Bayes:        posterior log odds = prior log odds + total woe.
* Chain rule:   woe over a feature partition splits into per-atom
                conditional terms whose sum is the total, for any atom
                order (individual terms may depend on the order).
* Antisymmetry: swapping U and V negates every value exactly.

Values are computed from one per-(subset, class) log-likelihood
primitive, so the identities hold to float round-off by construction.
All functions are pure over immutable models and safe to call
concurrently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import LikelihoodUnavailableError
from .models import (
    ClampDiagnostics,
    GaussianFullModel,
    GaussianNBModel,
    LogisticModel,
    ModelHandle,
    _logsumexp,
    _normalize_class_set,
    is_native,
    log_prior_mass,
)

__all__ = [
    "FeaturePartition",
    "WoEQuery",
    "LikelihoodContext",
    "woe_from_log_likelihoods",
    "total_woe",
    "conditional_atom_woe",
    "decompose_woe",
    "prior_log_odds",
    "logistic_total_woe",
    "logistic_atom_woe",
    "gnb_atom_woe_sign",
    "explanation_vector",
]


@dataclass(frozen=True)
class FeaturePartition:
    """Ordered disjoint feature-index groups covering all features."""

    atoms: tuple[tuple[int, ...], ...]
    atom_names: tuple[str, ...]

    def __post_init__(self):
        atoms = tuple(tuple(int(i) for i in atom) for atom in self.atoms)
        names = tuple(self.atom_names)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "atom_names", names)
        if not atoms:
            raise ValueError("partition needs at least one atom")
        if len(names) != len(atoms):
            raise ValueError("one name per atom required")
        if len(set(names)) != len(names):
            raise ValueError("atom names must be unique")
        seen: set[int] = set()
        for atom in atoms:
            if not atom:
                raise ValueError("atoms must be nonempty")
            if len(set(atom)) != len(atom) or seen & set(atom):
                raise ValueError("atoms must be disjoint with no repeated index")
            seen |= set(atom)
        if seen != set(range(len(seen))):
            raise ValueError("atoms must cover feature indices 0..d-1 without gaps")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_features(self) -> int:
        return sum(len(a) for a in self.atoms)

    @staticmethod
    def singletons(feature_names) -> "FeaturePartition":
        names = tuple(feature_names)
        return FeaturePartition(tuple((i,) for i in range(len(names))), names)

    @staticmethod
    def from_groups(
        groups: dict, feature_names, other_name: str = "other", fill_missing: bool = True
    ) -> "FeaturePartition":
        """Build from ``{atom_name: [feature names]}``; features missing
        from every group are collected into an ``other`` atom (warned),
        or rejected when ``fill_missing`` is off."""
        names = list(feature_names)
        index = {n: i for i, n in enumerate(names)}
        atoms: list[tuple[int, ...]] = []
        atom_names: list[str] = []
        used: set[int] = set()
        for atom_name, members in groups.items():
            idx = []
            for m in members:
                if m not in index:
                    raise ValueError(f"unknown feature {m!r} in atom {atom_name!r}")
                if index[m] in used:
                    raise ValueError(f"feature {m!r} appears in more than one atom")
                idx.append(index[m])
                used.add(index[m])
            if not idx:
                raise ValueError(f"atom {atom_name!r} is empty")
            atoms.append(tuple(idx))
            atom_names.append(atom_name)
        leftover = tuple(i for i in range(len(names)) if i not in used)
        if leftover and not fill_missing:
            missing = [names[i] for i in leftover]
            raise ValueError(f"partition misses feature(s): {missing}")
        if leftover:
            warnings.warn(
                f"{len(leftover)} feature(s) not covered by any group; "
                f"collected into atom {other_name!r}"
            )
            if other_name in atom_names:
                raise ValueError(f"atom name {other_name!r} already taken")
            atoms.append(leftover)
            atom_names.append(other_name)
        return FeaturePartition(tuple(atoms), tuple(atom_names))


@dataclass(frozen=True)
class WoEQuery:
    """One evidence query: instance, hypothesis sets, partition, atom order.

    ``atom_order`` is a permutation of atom positions; ``None`` means the
    partition's own order. Class sets are canonicalized to sorted tuples,
    making every operation here invariant to how callers order them.
    """

    x: np.ndarray
    class_set: tuple[int, ...]
    alt_set: tuple[int, ...]
    partition: FeaturePartition
    atom_order: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError("instance must be a vector")
        if not np.all(np.isfinite(x)):
            raise ValueError("instance must be finite")
        if x.shape[0] != self.partition.n_features:
            raise ValueError(
                f"instance has {x.shape[0]} features, partition covers {self.partition.n_features}"
            )
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        u = tuple(sorted(int(c) for c in self.class_set))
        v = tuple(sorted(int(c) for c in self.alt_set))
        if not u or not v:
            raise ValueError("class sets must be nonempty")
        if set(u) & set(v):
            raise ValueError("class sets must be disjoint")
        object.__setattr__(self, "class_set", u)
        object.__setattr__(self, "alt_set", v)
        m = self.partition.n_atoms
        order = tuple(range(m)) if self.atom_order is None else tuple(int(i) for i in self.atom_order)
        if sorted(order) != list(range(m)):
            raise ValueError("atom_order must be a permutation of the atom positions")
        object.__setattr__(self, "atom_order", order)


class LikelihoodContext:
    """Caches per-(feature subset) class log-likelihood vectors for one
    (model, instance) pair, so chained and repeated queries stay cheap."""

    def __init__(self, model: ModelHandle, x, diag: Optional[ClampDiagnostics] = None):
        if not is_native(model) or isinstance(model, LogisticModel):
            raise LikelihoodUnavailableError(
                "likelihood unavailable: model does not expose class-conditional densities"
            )
        self.model = model
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.diag = diag
        self._subset_ll: dict[tuple[int, ...], np.ndarray] = {}
        self._table: Optional[np.ndarray] = None

    def class_ll(self, indices) -> np.ndarray:
        """(k,) log P(x[indices] | c) for every class c."""
        key = tuple(sorted(int(i) for i in indices))
        hit = self._subset_ll.get(key)
        if hit is not None:
            return hit
        if isinstance(self.model, GaussianNBModel):
            if self._table is None:
                self._table = self.model.log_density_table(self.x, self.diag)
            val = self._table[:, list(key)].sum(axis=1) if key else np.zeros(self.model.n_classes)
        else:
            val = self.model.subset_class_log_likelihood(self.x, list(key), self.diag)
        self._subset_ll[key] = val
        return val

    def set_ll(self, indices, class_set) -> float:
        """log P(x[indices] | y in class_set), prior-weighted mixture."""
        cs = list(class_set)
        ll = self.class_ll(indices)
        lp = self.model.log_priors
        return _logsumexp(ll[cs] + lp[cs]) - _logsumexp(lp[cs])

    def woe(self, indices, class_set, alt_set) -> float:
        return self.set_ll(indices, class_set) - self.set_ll(indices, alt_set)

    def conditional_atom_woe(self, prefix_indices, atom_indices, class_set, alt_set) -> float:
        """woe of the atom given the prefix features, via likelihood ratios
        of the prefix and prefix+atom subsets."""
        prefix = tuple(prefix_indices)
        joint = prefix + tuple(atom_indices)
        up = self.set_ll(prefix, class_set) if prefix else 0.0
        vp = self.set_ll(prefix, alt_set) if prefix else 0.0
        return (self.set_ll(joint, class_set) - up) - (self.set_ll(joint, alt_set) - vp)


def woe_from_log_likelihoods(log_pe_h: float, log_pe_h_bar: float) -> float:
    """Weight of evidence from the two hypothesis-conditional log-likelihoods."""
    if not (np.isfinite(log_pe_h) and np.isfinite(log_pe_h_bar)):
        raise ValueError("log-likelihoods must be finite")
    return float(log_pe_h) - float(log_pe_h_bar)


def _ordered_atoms(query: WoEQuery) -> list[tuple[int, ...]]:
    return [query.partition.atoms[p] for p in query.atom_order]


def total_woe(model: ModelHandle, query: WoEQuery, diag: Optional[ClampDiagnostics] = None) -> float:
    """woe(y in U / y in V : x) over all features."""
    if isinstance(model, LogisticModel):
        return _logistic_signed(model, query, logistic_total_woe(model, query.x))
    ctx = LikelihoodContext(model, query.x, diag)
    return ctx.woe(range(model.n_features), query.class_set, query.alt_set)


def conditional_atom_woe(
    model: ModelHandle, query: WoEQuery, position: int, diag: Optional[ClampDiagnostics] = None
) -> float:
    """woe carried by the atom at ``position`` (0-based) in the query's
    atom order, conditioned on all atoms before it."""
    atoms = _ordered_atoms(query)
    if not 0 <= position < len(atoms):
        raise ValueError("atom position out of range")
    if isinstance(model, LogisticModel):
        return _logistic_signed(model, query, logistic_atom_woe(model, query.x, atoms[position]))
    ctx = LikelihoodContext(model, query.x, diag)
    prefix = tuple(i for atom in atoms[:position] for i in atom)
    return ctx.conditional_atom_woe(prefix, atoms[position], query.class_set, query.alt_set)


def decompose_woe(
    model: ModelHandle, query: WoEQuery, diag: Optional[ClampDiagnostics] = None
) -> np.ndarray:
    """All per-atom conditional woe values for the query's atom order.

    Their sum telescopes to ``total_woe`` (same subset likelihoods on both
    paths), which is the additivity property tests pin at 1e-9.
    """
    atoms = _ordered_atoms(query)
    if isinstance(model, LogisticModel):
        return np.array(
            [_logistic_signed(model, query, logistic_atom_woe(model, query.x, a)) for a in atoms]
        )
    ctx = LikelihoodContext(model, query.x, diag)
    out = np.empty(len(atoms))
    prefix: tuple[int, ...] = ()
    for t, atom in enumerate(atoms):
        out[t] = ctx.conditional_atom_woe(prefix, atom, query.class_set, query.alt_set)
        prefix = prefix + atom
    return out


def prior_log_odds(model: ModelHandle, class_set, alt_set) -> float:
    """log prior-probability ratio of the two disjoint class sets."""
    u = _normalize_class_set(class_set, model.n_classes)
    v = _normalize_class_set(alt_set, model.n_classes)
    if set(u) & set(v):
        raise ValueError("class sets must be disjoint")
    return log_prior_mass(model, u) - log_prior_mass(model, v)


def _logistic_signed(model: LogisticModel, query: WoEQuery, value_for_one: float) -> float:
    if query.class_set == (1,) and query.alt_set == (0,):
        return value_for_one
    if query.class_set == (0,) and query.alt_set == (1,):
        return -value_for_one
    raise ValueError("binary model: class sets must be {0} and {1}")


def logistic_total_woe(model: LogisticModel, x) -> float:
    """Closed-form total woe of class 1 vs class 0: the decision value with
    the prior log odds removed."""
    return model.decision(x) - float(model.log_priors[1] - model.log_priors[0])


def logistic_atom_woe(model: LogisticModel, x, indices) -> float:
    """Per-atom woe under the coefficients-as-evidence identification
    (``sum_i w_i x_i`` over the atom); exact when the bias equals the
    prior log odds, which that identification presumes."""
    x = np.asarray(x, dtype=np.float64)
    idx = list(indices)
    return float(model.weights[idx] @ x[idx])


def gnb_atom_woe_sign(model: GaussianNBModel, x, feature_index: int, zero_tol: float = 1e-12) -> int:
    """Sign of the per-feature woe of class 1 vs class 0 via the
    variance-normalized distance criterion.

    Positive exactly when ``(x-mu_1)^2/v_1 + log v_1`` is smaller than the
    class-0 expression; equality (within ``zero_tol``) yields 0.
    """
    if model.n_classes != 2:
        raise ValueError("sign criterion is defined for binary models")
    x = np.asarray(x, dtype=np.float64)
    i = int(feature_index)
    g1 = (x[i] - model.means[1, i]) ** 2 / model.variances[1, i] + np.log(model.variances[1, i])
    g0 = (x[i] - model.means[0, i]) ** 2 / model.variances[0, i] + np.log(model.variances[0, i])
    diff = g1 - g0
    if abs(diff) < zero_tol:
        return 0
    return 1 if diff < 0 else -1


def explanation_vector(
    model: ModelHandle, x, class_set, alt_set, diag: Optional[ClampDiagnostics] = None
) -> np.ndarray:
    """Marginal per-feature woe vector of U against V (singleton atoms,
    no conditioning); the explanation map used by the robustness and
    estimation benchmarks. Uses the compiled kernel for diagonal models."""
    u = _normalize_class_set(class_set, model.n_classes)
    v = _normalize_class_set(alt_set, model.n_classes)
    if set(u) & set(v):
        raise ValueError("class sets must be disjoint")
    if isinstance(model, GaussianNBModel):
        table = model.log_density_table(x, diag)
        return _kernels.per_feature_woe(
            table, model.log_priors, np.asarray(u, dtype=np.intp), np.asarray(v, dtype=np.intp)
        )
    if isinstance(model, LogisticModel):
        q = WoEQuery(
            x=np.asarray(x, dtype=np.float64),
            class_set=u,
            alt_set=v,
            partition=FeaturePartition.singletons(model.feature_names),
        )
        return decompose_woe(model, q)
    ctx = LikelihoodContext(model, x, diag)
    return np.array([ctx.woe((j,), u, v) for j in range(model.n_features)])
