"""Quantum successive-cancellation decoding of polar plans, by Monte Carlo.

The decoder walks branches in decode order; at each step it builds the
pretty-good measurement of the conditional synthetic-channel states given
the already-decoded prefix (later symbols modeled uniform, as the averaged
section analysis prescribes), samples an outcome with the exact Born
probabilities, and applies the sqrt(E) . sqrt(E) state update.

Three execution paths share one orchestration:

- pure: every channel output is a pure state; states stay weighted pure
  mixtures and POVMs live in the small subspace spanned by the component
  vectors (this is what makes N = 8 with 2000 trials cheap),
- diagonal: classical channels; outputs are sampled and the walk reduces to
  classical successive cancellation with posterior sampling (exactly the
  pretty-good measurement restricted to commuting states),
- dense: anything else, with explicit density matrices, for small N.

Conditional states are computed by the standard polar block recursion and
memoized; step POVMs are cached by (step, decoded prefix) across trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import CqChannel
from .config import ResourceCaps, default_caps
from .errors import StructuralError
from .groups import quotient_cosets
from .linalg import DEFAULT_TOL, Povm, hermitize, psd_sqrt
from .codes import CodePlan, MessageVector, encode, plan_channel, random_message
from .groups import random_section_map
from .polarize import decode_index, format_label
from .states import PureMixture, mix_states, tensor_states, to_dense

_SURVIVAL_FLOOR = 1e-300
_RCOND = 1e-12


@dataclass
class JointOutputState:
    """The receiver's system for one transmission, plus provenance."""

    kind: str  # "pure" | "diagonal" | "dense"
    data: object  # state vector | sampled column indices | density matrix
    codeword: np.ndarray
    message: MessageVector = None


@dataclass
class StepRecord:
    branch: tuple
    decoded_rep: int  # canonical representative index of the decoded coset
    p_step: float
    survival: float


@dataclass
class DecodeTrace:
    steps: list = field(default_factory=list)
    success: bool = False
    failed: bool = False  # numerical collapse


def _wilson(p_hat: float, n: int, z: float):
    if n == 0:
        return 0.0, 1.0
    denom = 1.0 + z * z / n
    center = (p_hat + z * z / (2 * n)) / denom
    half = z * np.sqrt(p_hat * (1 - p_hat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# -- conditional-state recursion -----------------------------------------------------


class _BlockStates:
    """Memoized conditional block states of the polar butterfly.

    A node (level, pos) covers codeword slots [pos*2^level, (pos+1)*2^level).
    ``fixed`` is the tuple of that block's first inputs (in its local decode
    order); ``head`` is the next input or None for uniform.  Pair (2j, 2j+1)
    of a block feeds sum/pass lanes of its first/second half.
    """

    def __init__(self, group, leaf_states, leaf_avg, n, memo_root=False):
        self.group = group
        self.leaf = leaf_states
        self.leaf_avg = leaf_avg
        self.n = n
        self.memo_root = memo_root
        self._memo = {}

    def state(self, level, pos, fixed, head):
        if level == 0:
            if fixed:  # the block's single slot is already determined
                return self.leaf[fixed[0]]
            return self.leaf[head] if head is not None else self.leaf_avg
        key = (level, pos, fixed, head)
        if level < self.n or self.memo_root:
            hit = self._memo.get(key)
            if hit is not None:
                return hit
        out = self._compute(level, pos, fixed, head)
        if level < self.n or self.memo_root:
            self._memo[key] = out
        return out

    def _combine(self, a, b):
        return tensor_states(a, b)

    def _mix(self, parts):
        return mix_states(parts)

    def _compute(self, level, pos, fixed, head):
        g, q = self.group, self.group.order
        m = len(fixed)
        t = m // 2
        a_fixed = tuple(g.add_index(fixed[2 * j], fixed[2 * j + 1]) for j in range(t))
        b_fixed = tuple(fixed[2 * j + 1] for j in range(t))
        A = (level - 1, 2 * pos)
        B = (level - 1, 2 * pos + 1)
        if m % 2 == 0:
            if head is None:
                return self._combine(
                    self.state(*A, a_fixed, None), self.state(*B, b_fixed, None)
                )
            parts = []
            for xi in range(q):
                parts.append(
                    (
                        1.0 / q,
                        self._combine(
                            self.state(*A, a_fixed, g.add_index(head, xi)),
                            self.state(*B, b_fixed, xi),
                        ),
                    )
                )
            return self._mix(parts)
        kappa = fixed[-1]
        if head is not None:
            return self._combine(
                self.state(*A, a_fixed + (g.add_index(kappa, head),), None),
                self.state(*B, b_fixed, head),
            )
        parts = []
        for xi in range(q):
            parts.append(
                (
                    1.0 / q,
                    self._combine(
                        self.state(*A, a_fixed + (g.add_index(kappa, xi),), None),
                        self.state(*B, b_fixed, xi),
                    ),
                )
            )
        return self._mix(parts)


class _BlockLikelihoods(_BlockStates):
    """Scalar specialization for diagonal channels given realized outputs."""

    def __init__(self, group, table, y, n):
        self.table = table
        self.y = y
        q = group.order
        leaf_avg = None  # per-leaf averages differ; handled in state()
        super().__init__(group, None, leaf_avg, n)

    def state(self, level, pos, fixed, head):
        if level == 0:
            col = self.y[pos]
            if fixed:
                return float(self.table[fixed[0], col])
            if head is None:
                return float(self.table[:, col].mean())
            return float(self.table[head, col])
        return super().state(level, pos, fixed, head)

    def _combine(self, a, b):
        return a * b

    def _mix(self, parts):
        return float(sum(w * v for w, v in parts))


# -- step POVMs ---------------------------------------------------------------------


class _SubspacePovm:
    """A POVM stored in the span of its conditional-state components.

    E_u = Q M_u Q† + kernel_share (I - Q Q†), with Q an orthonormal basis of
    the joint support.  Initial states always lie in the support, so the
    kernel part never fires during decoding; it exists so densified effects
    sum to the identity exactly.
    """

    def __init__(self, basis, effect_eigs, kernel_share):
        self.basis = basis  # d x r, orthonormal columns
        self.effect_eigs = effect_eigs  # list of (U r x r, vals r)
        self.kernel_share = kernel_share

    def probabilities_pure(self, psi):
        coords = self.basis.conj().T @ psi
        norm2 = float(np.real(np.vdot(psi, psi)))
        in2 = float(np.real(np.vdot(coords, coords)))
        leak = max(0.0, norm2 - in2)
        out = []
        for u, vals in self.effect_eigs:
            w = u.conj().T @ coords
            out.append(float(np.real(np.sum(vals * np.abs(w) ** 2))) + self.kernel_share * leak)
        return np.clip(np.array(out), 0.0, None)

    def apply_sqrt_pure(self, psi, idx):
        u, vals = self.effect_eigs[idx]
        coords = self.basis.conj().T @ psi
        inside = self.basis @ (u @ (np.sqrt(np.clip(vals, 0, None)) * (u.conj().T @ coords)))
        if self.kernel_share > 0.0:
            inside = inside + np.sqrt(self.kernel_share) * (psi - self.basis @ coords)
        return inside

    def to_povm(self) -> Povm:
        d = self.basis.shape[0]
        proj = self.basis @ self.basis.conj().T
        kern = (np.eye(d) - proj) * self.kernel_share
        effects = []
        for u, vals in self.effect_eigs:
            core = (u * vals) @ u.conj().T
            effects.append(hermitize(self.basis @ core @ self.basis.conj().T + kern))
        return Povm(effects)


def _subspace_pgm(sigmas) -> _SubspacePovm:
    """PGM of equal-prior pure mixtures, built inside their joint span."""
    comps = [s.scaled_components() for s in sigmas]
    stack = np.vstack(comps)
    # basis of span{components}: SVD of the stacked component matrix
    ub, svals, _ = np.linalg.svd(stack.T, full_matrices=False)
    keep = svals > _RCOND * (svals[0] if svals.size else 1.0)
    basis = ub[:, keep]  # d x r
    m = len(sigmas)
    projected = []
    for c in comps:
        b = c @ basis.conj()  # rows: components in basis coords
        projected.append((b.T @ b.conj()) / m)  # prior 1/m folded in
    s_mat = hermitize(sum(projected))
    vals, vecs = np.linalg.eigh(s_mat)
    vals = np.clip(vals, 0.0, None)
    inv = np.zeros_like(vals)
    pos = vals > _RCOND * (vals[-1] if vals.size else 1.0)
    inv[pos] = 1.0 / np.sqrt(vals[pos])
    s_isqrt = (vecs * inv) @ vecs.conj().T
    supp = (vecs * pos.astype(float)) @ vecs.conj().T
    rank_gap = basis.shape[1] - int(pos.sum())
    # remainder inside the subspace (rank-deficient S') plus the full kernel
    inner_rem = (np.eye(basis.shape[1]) - supp) / m
    effect_eigs = []
    for p in projected:
        e = hermitize(s_isqrt @ p @ s_isqrt + inner_rem)
        ev, evec = np.linalg.eigh(e)
        effect_eigs.append((evec, np.clip(ev, 0.0, None)))
    return _SubspacePovm(basis, effect_eigs, kernel_share=1.0 / m)


def _dense_pgm(sigmas, tol):
    from .linalg import pretty_good_measurement

    dense = [to_dense(s) for s in sigmas]
    povm = pretty_good_measurement(dense, tol=tol)
    return povm, [psd_sqrt(e, tol) for e in povm.effects]


# -- decoder engine -------------------------------------------------------------------


class SCDecoder:
    """Reusable decoder for one plan/channel pair; caches POVMs across trials."""

    def __init__(self, plan: CodePlan, channel: CqChannel = None, caps: ResourceCaps = None):
        self.plan = plan
        self.caps = caps or default_caps()
        self.channel = channel if channel is not None else plan_channel(plan)
        if self.channel.alphabet.order != plan.group.order:
            raise StructuralError("channel and plan disagree on the input group")
        self.group = plan.group
        self.n = plan.params.n
        self.N = plan.block_length
        self.tol = self.channel.tol
        self.kind = self._classify()
        self._cells = [quotient_cosets(self.group, d.subgroup) for d in plan.decisions]
        self._members = [
            [c.member_indices() for c in cells] for cells in self._cells
        ]
        self._povm_cache = {}
        self._prepare_states()

    # -- setup -------------------------------------------------------------------
    def _classify(self) -> str:
        ch = self.channel
        if ch.is_diagonal():
            return "diagonal"
        plain = all(len(h.branches) == 1 and h.branches[0][1] == () for h in ch.outputs)
        if not plain:
            flat_dim = len(ch.label_union()) * ch.k
            self.caps.check_dim(flat_dim, "hybrid flatten")
            self.channel = ch.flatten_dense()
            return "dense"
        pure = all(
            isinstance(h.branches[0][2], PureMixture) and h.branches[0][2].rank_bound == 1
            for h in ch.outputs
        )
        return "pure" if pure else "dense"

    def _prepare_states(self):
        joint_dim = self.channel.k**self.N
        if self.kind == "diagonal":
            from .diagonal import from_cq_channel

            diag = from_cq_channel(self.channel, self.caps)
            self.table = diag.table
            return
        self.caps.check_dim(joint_dim, "joint output state")
        if self.kind == "pure":
            self.leaf = [h.branches[0][2] for h in self.channel.outputs]
            self.leaf_avg = mix_states([(1.0 / self.group.order, s) for s in self.leaf])
        else:
            self.leaf = [to_dense(h.branches[0][2]) for h in self.channel.outputs]
            self.leaf_avg = mix_states(
                [(1.0 / self.group.order, s) for s in self.leaf]
            )
        self.blocks = _BlockStates(self.group, self.leaf, self.leaf_avg, self.n)

    # -- transmission ---------------------------------------------------------------
    def transmit(self, message: MessageVector, rng, sections=None) -> JointOutputState:
        codeword = encode(self.plan, message, sections)
        if self.kind == "diagonal":
            y = []
            for x in codeword:
                row = self.table[int(x)]
                y.append(int(rng.choice(row.size, p=row / row.sum())))
            return JointOutputState("diagonal", tuple(y), codeword, message)
        if self.kind == "pure":
            psi = np.array([1.0 + 0j])
            for x in codeword:
                psi = np.kron(psi, self.leaf[int(x)].vecs[0])
            return JointOutputState("pure", psi, codeword, message)
        rho = np.array([[1.0 + 0j]])
        for x in codeword:
            rho = np.kron(rho, self.leaf[int(x)])
        return JointOutputState("dense", rho, codeword, message)

    # -- conditional states and POVMs ---------------------------------------------------
    def conditional_states(self, i: int, prefix: tuple):
        """The candidate states rho-bar_{coset, prefix} at step i, per coset."""
        H = self.plan.decisions[i].subgroup
        out = []
        for members in self._members[i]:
            out.append(
                mix_states(
                    [
                        (1.0 / H.order, self.blocks.state(self.n, 0, prefix, v))
                        for v in members
                    ]
                )
            )
        return out

    def step_povm_rep(self, i: int, prefix: tuple):
        key = (i, prefix)
        hit = self._povm_cache.get(key)
        if hit is not None:
            return hit
        sigmas = self.conditional_states(i, prefix)
        if self.kind == "pure":
            rep = _subspace_pgm(
                [s if isinstance(s, PureMixture) else _as_mixture(s) for s in sigmas]
            )
        else:
            rep = _dense_pgm(sigmas, self.tol)
        self._povm_cache[key] = rep
        return rep

    # -- decoding ------------------------------------------------------------------------
    def decode(self, received: JointOutputState, seed) -> tuple:
        rng = np.random.default_rng(seed) if not hasattr(seed, "integers") else seed
        if self.kind == "diagonal":
            return self._decode_diagonal(received, rng)
        return self._decode_quantum(received, rng)

    def _record_and_lift(self, i, cell_idx, prefix):
        d = self.plan.decisions[i]
        coset = self._cells[i][cell_idx]
        lifted = d.section(coset).index
        return coset, prefix + (int(lifted),)

    def _decode_quantum(self, received, rng):
        pure = self.kind == "pure"
        state = received.data.astype(complex)
        trace = DecodeTrace()
        survival = 1.0
        prefix = ()
        decoded = []
        for i, d in enumerate(self.plan.decisions):
            cells = self._cells[i]
            if len(cells) == 1:
                p_step = 1.0
                pick = 0
            else:
                rep = self.step_povm_rep(i, prefix)
                if pure:
                    probs = rep.probabilities_pure(state)
                else:
                    povm, _ = rep
                    probs = povm.outcome_probabilities(state)
                total = probs.sum()
                if not total > _SURVIVAL_FLOOR:
                    trace.failed = True
                    break
                probs = probs / total
                pick = int(rng.choice(len(cells), p=probs))
                p_step = float(probs[pick])
                if pure:
                    state = rep.apply_sqrt_pure(state, pick)
                    nrm = float(np.real(np.vdot(state, state)))
                    if not nrm > _SURVIVAL_FLOOR:
                        trace.failed = True
                        break
                    state = state / np.sqrt(nrm)
                else:
                    _, sqrts = rep
                    state = sqrts[pick] @ state @ sqrts[pick]
                    tr = float(np.real(np.trace(state)))
                    if not tr > _SURVIVAL_FLOOR:
                        trace.failed = True
                        break
                    state = state / tr
            survival *= p_step
            coset, prefix = self._record_and_lift(i, pick, prefix)
            decoded.append(coset)
            trace.steps.append(StepRecord(d.branch, coset.rep_index, p_step, survival))
        message = MessageVector(decoded)
        if received.message is not None and not trace.failed:
            trace.success = all(
                a.rep_index == b.rep_index
                for a, b in zip(message.cosets, received.message.cosets)
            )
        return message, trace

    def _decode_diagonal(self, received, rng):
        lik = _BlockLikelihoods(self.group, self.table, received.data, self.n)
        trace = DecodeTrace()
        survival = 1.0
        prefix = ()
        decoded = []
        for i, d in enumerate(self.plan.decisions):
            cells = self._cells[i]
            if len(cells) == 1:
                p_step, pick = 1.0, 0
            else:
                weights = np.array(
                    [
                        sum(lik.state(self.n, 0, prefix, v) for v in members)
                        for members in self._members[i]
                    ]
                )
                total = weights.sum()
                if not total > _SURVIVAL_FLOOR:
                    trace.failed = True
                    break
                probs = weights / total
                pick = int(rng.choice(len(cells), p=probs))
                p_step = float(probs[pick])
            survival *= p_step
            coset, prefix = self._record_and_lift(i, pick, prefix)
            decoded.append(coset)
            trace.steps.append(StepRecord(d.branch, coset.rep_index, p_step, survival))
        message = MessageVector(decoded)
        if received.message is not None and not trace.failed:
            trace.success = all(
                a.rep_index == b.rep_index
                for a, b in zip(message.cosets, received.message.cosets)
            )
        return message, trace


def _as_mixture(state) -> PureMixture:
    vals, vecs = np.linalg.eigh(hermitize(to_dense(state)))
    keep = vals > 1e-15
    return PureMixture(vals[keep], vecs[:, keep].T)


# -- public operations ------------------------------------------------------------------


def step_povm(plan: CodePlan, i, decoded_prefix, channel: CqChannel = None) -> Povm:
    """The step-i POVM over G/H_s given a decoded prefix of lifted symbols.

    ``i`` may be a decode position or a branch label; the returned dense POVM
    is block-complete (effects sum to the identity).
    """
    if isinstance(i, tuple):
        i = decode_index(i)
    engine = SCDecoder(plan, channel)
    prefix = tuple(int(getattr(x, "index", x)) for x in decoded_prefix)
    if len(prefix) != i:
        raise StructuralError("decoded prefix length must equal the step position")
    if len(engine._cells[i]) == 1:
        dim = engine.channel.k**engine.N
        return Povm([np.eye(dim, dtype=complex)])
    rep = engine.step_povm_rep(i, prefix)
    if engine.kind == "pure":
        return rep.to_povm()
    povm, _ = rep
    return povm


def decode(plan: CodePlan, received: JointOutputState, seed, channel: CqChannel = None):
    """One-shot decode; prefer SCDecoder for repeated use."""
    return SCDecoder(plan, channel).decode(received, seed)


def error_experiment(
    W: CqChannel,
    plan: CodePlan,
    trials: int,
    seed: int,
    caps: ResourceCaps = None,
    randomize_sections: bool = True,
) -> dict:
    """Monte-Carlo block-error estimation against the plan's bound.

    Messages are uniform; section mappings are redrawn per trial (matching
    the averaged analysis) unless randomize_sections is False.
    """
    engine = SCDecoder(plan, W, caps)
    n_err = 0
    n_fail = 0
    first_error = np.zeros(plan.block_length)
    mismatch = np.zeros(plan.block_length)
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        message = random_message(plan, rng)
        sections = None
        if randomize_sections:
            sections = [random_section_map(d.subgroup, rng) for d in plan.decisions]
        received = engine.transmit(message, rng, sections)
        est, trace = engine.decode(received, rng)
        if trace.failed:
            n_fail += 1
            n_err += 1
            continue
        bad = [
            j
            for j, (a, b) in enumerate(zip(est.cosets, message.cosets))
            if a.rep_index != b.rep_index
        ]
        if bad:
            n_err += 1
            first_error[bad[0]] += 1
            for j in bad:
                mismatch[j] += 1
    p_hat = n_err / trials
    lo1, hi1 = (float(v) for v in _wilson(p_hat, trials, 1.0))
    lo3, hi3 = (float(v) for v in _wilson(p_hat, trials, 3.0))
    sigma = (hi1 - lo1) / 2.0
    return {
        "trials": trials,
        "errors": n_err,
        "decode_failures": n_fail,
        "block_error": p_hat,
        "wilson_1sigma": [lo1, hi1],
        "wilson_3sigma": [lo3, hi3],
        "wilson_sigma": sigma,
        "bound": float(plan.bound),
        "bound_holds_within_3sigma": bool(p_hat <= plan.bound + 3.0 * sigma),
        "rate_nats": float(plan.rate),
        "first_error_profile": (first_error / trials).tolist(),
        "step_mismatch_profile": (mismatch / trials).tolist(),
        "step_branches": [format_label(d.branch) for d in plan.decisions],
    }
