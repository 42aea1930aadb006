"""Arıkan-style +/- transforms, synthetic channels and polarization scans.

Branch labels are tuples over {"-", "+"}; the first coordinate is the first
transform applied.  The decode order sorts labels with the *last* coordinate
most significant, so the decode position of a label is the integer whose
bit i is the sign at coordinate i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import CqChannel, HybridState
from .config import ResourceCaps, default_caps
from .diagonal import DiagonalChannel, from_cq_channel
from .errors import StructuralError
from .groups import FiniteAbelianGroup, Subgroup, enumerate_subgroups
from .states import tensor_states, mix_states

MINUS, PLUS = "-", "+"

BranchLabel = tuple


def label_from_index(i: int, n: int) -> BranchLabel:
    """Label of the i-th branch in decode order (bit j of i = coordinate j)."""
    return tuple(PLUS if (i >> j) & 1 else MINUS for j in range(n))


def decode_index(label: BranchLabel) -> int:
    """Position in the decode order: last coordinate most significant."""
    return sum(1 << j for j, s in enumerate(label) if s == PLUS)


def branch_order(n: int) -> list:
    """All 2^n labels sorted ascending in the decode order."""
    if n < 0:
        raise StructuralError("depth must be nonnegative")
    return [label_from_index(i, n) for i in range(1 << n)]


def reverse_label(label: BranchLabel) -> BranchLabel:
    return tuple(reversed(label))


def format_label(label: BranchLabel) -> str:
    return "".join(label) if label else "~"


def parse_label(text: str) -> BranchLabel:
    if text == "~":
        return ()
    if any(c not in (MINUS, PLUS) for c in text):
        raise StructuralError(f"bad branch label {text!r}")
    return tuple(text)


# -- transforms -------------------------------------------------------------------


def minus_transform(W, caps: ResourceCaps = None):
    """The worse channel of the pair: u1 -> average over u2 of
    rho_{u1+u2} ⊗ rho_{u2}."""
    if isinstance(W, DiagonalChannel):
        return W.minus_transform()
    caps = caps or default_caps()
    q, g = W.q, W.alphabet
    caps.check_dim(W.k * W.k, "minus transform")
    # labels recompressed to positions in the parent's label union, keeping
    # label size constant under repeated transforms
    pos = W.label_positions()
    outputs = []
    for u1 in range(q):
        acc: dict = {}
        for u2 in range(q):
            left = W.outputs[g.add_index(u1, u2)]
            right = W.outputs[u2]
            for w1, l1, s1 in left.branches:
                i1 = pos[repr(l1)]
                for w2, l2, s2 in right.branches:
                    w = w1 * w2 / q
                    if w <= 0.0:
                        continue
                    key = (i1, pos[repr(l2)])
                    ent = acc.get(key)
                    if ent is None:
                        ent = acc[key] = [0.0, []]
                    ent[0] += w
                    ent[1].append((w, tensor_states(s1, s2)))
        caps.check_branches(len(acc), "minus transform")
        branches = [
            (wtot, lab, mix_states([(w / wtot, st) for w, st in parts]))
            for lab, (wtot, parts) in acc.items()
        ]
        outputs.append(HybridState(branches, tol=W.tol))
    return CqChannel(g, outputs, W.tol)


def plus_transform(W, caps: ResourceCaps = None):
    """The better channel: u2 -> rho_{u1+u2} ⊗ rho_{u2} with u1 revealed as a
    classical register (a new label coordinate of weight 1/q)."""
    if isinstance(W, DiagonalChannel):
        return W.plus_transform()
    caps = caps or default_caps()
    q, g = W.q, W.alphabet
    caps.check_dim(W.k * W.k, "plus transform")
    pos = W.label_positions()
    outputs = []
    for u2 in range(q):
        branches = []
        for u1 in range(q):
            left = W.outputs[g.add_index(u1, u2)]
            right = W.outputs[u2]
            for w1, l1, s1 in left.branches:
                i1 = pos[repr(l1)]
                for w2, l2, s2 in right.branches:
                    w = w1 * w2 / q
                    if w <= 0.0:
                        continue
                    branches.append((w, (i1, pos[repr(l2)], u1), tensor_states(s1, s2)))
        caps.check_branches(len(branches), "plus transform")
        outputs.append(HybridState(branches, tol=W.tol))
    return CqChannel(g, outputs, W.tol)


def synthesize(W, signs: BranchLabel, caps: ResourceCaps = None):
    """W^s: apply the sign transforms left to right; empty signs returns W."""
    caps = caps or default_caps()
    out = W
    for s in signs:
        out = minus_transform(out, caps) if s == MINUS else plus_transform(out, caps)
    return out


# -- scan records -----------------------------------------------------------------


@dataclass
class PolarizationRecord:
    """Evidence record for one synthetic channel W^s."""

    branch: BranchLabel
    I: float
    fd: dict  # element index -> F_d
    f: float
    fmax: float
    quot_I: dict = field(default_factory=dict)  # Subgroup -> I(W^s[H])
    quot_F: dict = field(default_factory=dict)  # Subgroup -> F(W^s[H])
    best_H: Subgroup = None

    def objective(self, H: Subgroup, log_quot: float) -> float:
        return abs(self.I - log_quot) + abs(self.quot_I[H] - log_quot)


def _classify_best_subgroup(rec: PolarizationRecord, q: int) -> Subgroup:
    ranked = sorted(
        rec.quot_I,
        key=lambda H: (rec.objective(H, np.log(q / H.order)), -H.order, H.indices),
    )
    return ranked[0]


def make_record(channel, branch: BranchLabel, subgroups) -> PolarizationRecord:
    rec = PolarizationRecord(
        branch=branch,
        I=channel.holevo_information(),
        fd=channel.fd_table(),
        f=channel.avg_fidelity(),
        fmax=channel.f_max(),
    )
    for H in subgroups:
        quot = channel.quotient(H)
        rec.quot_I[H] = quot.holevo_information()
        rec.quot_F[H] = quot.avg_fidelity()
    if subgroups:
        rec.best_H = _classify_best_subgroup(rec, channel.q)
    return rec


def iter_synthetic_channels(W, n: int, caps: ResourceCaps = None, engine: str = "auto"):
    """Depth-first generator of (signs, W^signs) over all depth-n branches."""
    caps = caps or default_caps()
    base = _routed(W, engine, caps)

    def rec(channel, signs):
        if len(signs) == n:
            yield signs, channel
            return
        yield from rec(minus_transform(channel, caps), signs + (MINUS,))
        yield from rec(plus_transform(channel, caps), signs + (PLUS,))

    yield from rec(base, ())


def polarization_scan(
    W, n: int, caps: ResourceCaps = None, subgroups=None, engine: str = "auto"
):
    """Records for all 2^n synthetic channels, in decode order.

    engine='auto' routes diagonal channels through the classical table
    engine, everything else through the hybrid machinery.
    """
    caps = caps or default_caps()
    base = _routed(W, engine, caps)
    if subgroups is None:
        if isinstance(base.alphabet, FiniteAbelianGroup):
            subgroups = enumerate_subgroups(base.alphabet)
        else:
            raise StructuralError("scan requires a product-group channel")
    records = {}
    for signs, channel in iter_synthetic_channels(base, n, caps, engine="hybrid"):
        records[signs] = make_record(channel, signs, subgroups)
    return [records[s] for s in branch_order(n)]


def _routed(W, engine: str, caps: ResourceCaps):
    if engine == "hybrid":
        return W
    if isinstance(W, DiagonalChannel):
        return W
    if isinstance(W, CqChannel) and W.is_diagonal() and engine in ("auto", "diagonal"):
        return from_cq_channel(W, caps)
    if engine == "diagonal":
        raise StructuralError("diagonal engine requested for a non-diagonal channel")
    return W


def scan_conservation_defect(records, base_I: float, n: int) -> float:
    """|sum_s I(W^s) - 2^n I(W)|; the total information is conserved."""
    return abs(sum(r.I for r in records) - (1 << n) * base_I)


def intermediate_fraction(records, log_q: float, delta: float) -> float:
    """Fraction of branches with I in (delta, log q - delta)."""
    inside = [r for r in records if delta < r.I < log_q - delta]
    return len(inside) / len(records)


# -- random polarization process ----------------------------------------------------


@dataclass
class PathRecord:
    """One uniformly random sign path with both children recorded per step."""

    signs: BranchLabel
    I: list  # I at depth 0..n
    fmax: list
    child_I: list  # per step: (I minus child, I plus child)
    child_fmax: list
    quot_child_I: list  # per step: {Subgroup: (parent, minus, plus)}


def process_sample(
    W, n: int, trials: int, seed: int, caps: ResourceCaps = None, subgroups=()
):
    """Sample uniformly random polarization paths.

    Each step synthesizes both children, so the per-step martingale and
    sub-martingale quantities are exact; only the path is random.
    """
    caps = caps or default_caps()
    base = _routed(W, "auto", caps)
    paths = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        channel = base
        record = PathRecord(
            signs=(),
            I=[channel.holevo_information()],
            fmax=[channel.f_max()],
            child_I=[],
            child_fmax=[],
            quot_child_I=[],
        )
        for _ in range(n):
            minus = minus_transform(channel, caps)
            plus = plus_transform(channel, caps)
            record.child_I.append((minus.holevo_information(), plus.holevo_information()))
            record.child_fmax.append((minus.f_max(), plus.f_max()))
            if subgroups:
                record.quot_child_I.append(
                    {
                        H: (
                            channel.quotient(H).holevo_information(),
                            minus.quotient(H).holevo_information(),
                            plus.quotient(H).holevo_information(),
                        )
                        for H in subgroups
                    }
                )
            sign = PLUS if rng.integers(2) else MINUS
            channel = plus if sign == PLUS else minus
            record.signs = record.signs + (sign,)
            record.I.append(record.child_I[-1][1 if sign == PLUS else 0])
            record.fmax.append(record.child_fmax[-1][1 if sign == PLUS else 0])
        paths.append(record)
    return paths
