"""Fast exact engine for diagonal (classical) channels.

A diagonal cq channel is just a likelihood table P[x, y].  The polarization
transforms then reduce to classical probability-table operations, and output
classes with proportional likelihood columns can be merged without changing
any information or fidelity functional.  This lossless merging is what makes
deep scans of classical channels feasible; alphabets that still explode hit
the column cap and raise a capacity error.
"""

from __future__ import annotations

import numpy as np

from .config import ResourceCaps, default_caps
from .errors import StructuralError
from .groups import (
    Coset,
    FiniteAbelianGroup,
    GroupOps,
    PlainAlphabet,
    QuotientGroup,
    Subgroup,
    refine,
)
from .linalg import entropy_of_probs

_MERGE_DECIMALS = 12


class DiagonalChannel:
    """A classical channel P[x, y] over a group-indexed input alphabet."""

    def __init__(self, alphabet: GroupOps, table: np.ndarray, caps: ResourceCaps = None):
        table = np.asarray(table, dtype=float)
        if table.ndim != 2 or table.shape[0] != alphabet.order:
            raise StructuralError("likelihood table must have one row per input")
        if np.any(table < -1e-12):
            raise StructuralError("likelihoods must be nonnegative")
        rows = table.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > 1e-8:
            raise StructuralError("likelihood rows must sum to 1")
        self.alphabet = alphabet
        self.table = np.clip(table, 0.0, None)
        self.caps = caps or default_caps()

    # -- conveniences ---------------------------------------------------------
    @property
    def group(self) -> GroupOps:
        return self.alphabet

    @property
    def q(self) -> int:
        return self.alphabet.order

    @property
    def alphabet_size(self) -> int:
        return self.table.shape[1]

    def _index(self, x) -> int:
        idx = getattr(x, "index", None)
        return int(idx if idx is not None else x)

    def merged(self) -> "DiagonalChannel":
        return DiagonalChannel(self.alphabet, merge_columns(self.table), self.caps)

    # -- functionals -----------------------------------------------------------
    def holevo_information(self) -> float:
        """Mutual information with uniform input, in nats."""
        avg = self.table.mean(axis=0)
        return max(
            0.0,
            entropy_of_probs(avg)
            - float(np.mean([entropy_of_probs(row) for row in self.table])),
        )

    def pairwise_fidelity(self, x, y) -> float:
        a, b = self.table[self._index(x)], self.table[self._index(y)]
        return float(min(1.0, np.sqrt(a * b).sum()))

    def fd(self, d) -> float:
        di = self._index(d)
        g = self.alphabet
        shifted = self.table[[g.add_index(x, di) for x in range(self.q)]]
        return float(min(1.0, np.mean(np.sqrt(self.table * shifted).sum(axis=1))))

    def fd_table(self) -> dict:
        return {d: self.fd(d) for d in range(self.q)}

    def avg_fidelity(self) -> float:
        q = self.q
        if q == 1:
            return 0.0
        total = sum(
            self.pairwise_fidelity(x, y) for x in range(q) for y in range(q) if x != y
        )
        return float(total / (q * (q - 1)))

    def f_max(self) -> float:
        if self.q == 1:
            return 0.0
        return max(self.fd(d) for d in range(1, self.q))

    # -- transforms --------------------------------------------------------------
    def minus_transform(self) -> "DiagonalChannel":
        """P-(u1; y1 y2) = (1/q) sum_u2 P(u1+u2; y1) P(u2; y2), merged."""
        q, m = self.q, self.alphabet_size
        self.caps.check_columns(m * m, "minus transform joint alphabet")
        tab = self.alphabet.add_table
        # A[u1, u2, y1] = P[u1+u2, y1]
        A = self.table[tab]
        joint = np.einsum("uvy,vz->uyz", A, self.table) / q
        return DiagonalChannel(
            self.alphabet, merge_columns(joint.reshape(q, m * m)), self.caps
        )

    def plus_transform(self) -> "DiagonalChannel":
        """P+(u2; y1 y2 u1) = (1/q) P(u1+u2; y1) P(u2; y2), merged."""
        q, m = self.q, self.alphabet_size
        self.caps.check_columns(q * m * m, "plus transform joint alphabet")
        tab = self.alphabet.add_table
        out = np.empty((q, q, m, m))
        for u1 in range(q):
            # rows tab[u1, u2] give P[u1+u2, y1]
            out[:, u1, :, :] = np.einsum(
                "uy,uz->uyz", self.table[tab[u1]], self.table
            )
        return DiagonalChannel(
            self.alphabet, merge_columns(out.reshape(q, q * m * m) / q), self.caps
        )

    # -- quotients ------------------------------------------------------------------
    def quotient(self, H: Subgroup) -> "DiagonalChannel":
        g = self.alphabet
        if not isinstance(g, FiniteAbelianGroup):
            raise StructuralError("quotient requires a product-group alphabet")
        quot = QuotientGroup(g, H)
        rows = np.stack(
            [self.table[c.member_indices()].mean(axis=0) for c in quot.cosets]
        )
        return DiagonalChannel(quot, merge_columns(rows), self.caps)

    def restricted_quotient(self, M: Subgroup, D: Coset) -> "DiagonalChannel":
        if not M.is_subset_of(D.subgroup):
            raise StructuralError("M must be contained in the subgroup defining D")
        cells = refine(D, M)
        rows = np.stack([self.table[c.member_indices()].mean(axis=0) for c in cells])
        return DiagonalChannel(PlainAlphabet(cells), merge_columns(rows), self.caps)

    def nested_fmax(self, M: Subgroup, H: Subgroup) -> float:
        ds = [i for i in H.indices if not M.contains_index(i)]
        return max((self.fd(d) for d in ds), default=0.0)


def merge_columns(table: np.ndarray) -> np.ndarray:
    """Merge output classes with proportional likelihood columns.

    Proportional columns carry identical posteriors, so pooling them leaves
    every mutual-information and fidelity functional unchanged.  Keys are
    posteriors rounded to 12 decimals, which only ever merges columns whose
    functional contributions agree to well below the suite's tolerances.
    """
    table = np.asarray(table, dtype=float)
    sums = table.sum(axis=0)
    keep = sums > 0.0
    table, sums = table[:, keep], sums[keep]
    if table.shape[1] == 0:
        raise StructuralError("channel has no outputs with positive probability")
    posteriors = np.round(table / sums, _MERGE_DECIMALS)
    _, inverse = np.unique(posteriors, axis=1, return_inverse=True)
    merged = np.zeros((table.shape[0], int(inverse.max()) + 1))
    np.add.at(merged.T, inverse, table.T)
    return merged


def from_cq_channel(W, caps: ResourceCaps = None) -> DiagonalChannel:
    """Flatten a diagonal hybrid channel into a likelihood table."""
    from .channel import CqChannel, _label_key
    from .states import to_dense

    if not isinstance(W, CqChannel) or not W.is_diagonal():
        raise StructuralError("channel is not diagonal")
    labels = W.label_union()
    cols = []
    for lab in labels:
        key = _label_key(lab)
        block = np.zeros((W.q, W.k))
        for x in range(W.q):
            hit = W.outputs[x].as_dict().get(key)
            if hit is not None:
                w, st = hit
                block[x] = w * np.real(np.diag(to_dense(st)))
        cols.append(block)
    table = np.concatenate(cols, axis=1)
    return DiagonalChannel(W.alphabet, merge_columns(table), caps)
