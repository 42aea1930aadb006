"""Classical-quantum channels with hybrid (classical-register) outputs.

A channel maps each group element to a :class:`HybridState`: a list of
``(weight, label, quantum state)`` branches representing a block-diagonal
output ``sum_l w_l |l><l| ⊗ rho_l``.  Labels stay symbolic instead of being
expanded into tensor factors, which is what keeps repeated plus-transforms
affordable.  All information/fidelity functionals respect the block
structure exactly.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass

import numpy as np

from .errors import LoadError, StructuralError
from .groups import (
    Coset,
    FiniteAbelianGroup,
    GroupElement,
    GroupOps,
    PlainAlphabet,
    QuotientGroup,
    Subgroup,
    quotient_cosets,
    refine,
)
from .linalg import DEFAULT_TOL, Tolerances, entropy_of_probs, validate_density_matrix
from .states import (
    PureMixture,
    batched_mixture_entropies,
    dim_of,
    mix_states,
    pure_state,
    state_entropy,
    state_fidelity,
    state_is_diagonal,
    to_dense,
)


def _label_key(label):
    return repr(label)


class HybridState:
    """A block-diagonal output state: branches of (weight, label, state)."""

    __slots__ = ("branches", "_dict")

    def __init__(self, branches, validate: bool = True, tol: Tolerances = DEFAULT_TOL):
        cleaned = [(float(w), lab, st) for w, lab, st in branches if w > 0.0]
        cleaned.sort(key=lambda b: _label_key(b[1]))
        self.branches = cleaned
        self._dict = None
        if validate:
            labels = [lab for _, lab, _ in cleaned]
            if len(set(map(_label_key, labels))) != len(labels):
                raise StructuralError("duplicate branch labels")
            total = sum(w for w, _, _ in cleaned)
            if abs(total - 1.0) > max(tol.tol_trace, 1e-7):
                raise StructuralError(f"branch weights sum to {total!r}, not 1")
            dims = {dim_of(st) for _, _, st in cleaned}
            if len(dims) > 1:
                raise StructuralError("branch states have inconsistent dimensions")

    @property
    def dim(self) -> int:
        return dim_of(self.branches[0][2])

    def as_dict(self) -> dict:
        if self._dict is None:
            self._dict = {_label_key(lab): (w, st) for w, lab, st in self.branches}
        return self._dict

    def labels(self) -> list:
        return [lab for _, lab, _ in self.branches]

    def entropy(self, tol: Tolerances = DEFAULT_TOL) -> float:
        """H(weights) + sum of weighted branch entropies, batched by shape.

        Mixture branches sharing a component-array shape go through one
        stacked eigvalsh call; channels with many thousands of classical
        labels are otherwise dominated by per-branch dispatch overhead.
        """
        weights = np.array([w for w, _, _ in self.branches])
        total = entropy_of_probs(weights)
        groups: dict = {}
        for w, _, st in self.branches:
            if isinstance(st, PureMixture) and st.rank_bound > 1:
                groups.setdefault(st.vecs.shape, []).append((w, st.scaled_components()))
            elif not isinstance(st, PureMixture):
                total += w * state_entropy(st, tol)
        for items in groups.values():
            ent = batched_mixture_entropies([c for _, c in items])
            total += float(np.array([w for w, _ in items]) @ ent)
        return total

    def total_components(self) -> int:
        return sum(
            st.rank_bound if isinstance(st, PureMixture) else st.shape[0]
            for _, _, st in self.branches
        )

    def to_dense_block(self, label_order) -> np.ndarray:
        """Flatten into one dense block-diagonal density matrix."""
        d = self.dim
        lut = self.as_dict()
        out = np.zeros((len(label_order) * d, len(label_order) * d), dtype=complex)
        for j, lab in enumerate(label_order):
            hit = lut.get(_label_key(lab))
            if hit is not None:
                w, st = hit
                out[j * d : (j + 1) * d, j * d : (j + 1) * d] = w * to_dense(st)
        return out


def hybrid_fidelity(a: HybridState, b: HybridState, tol: Tolerances = DEFAULT_TOL) -> float:
    """Fidelity of two block-diagonal states: sum over shared labels of
    sqrt(w w') F(rho, rho').  Rank-1 branch pairs are batched into one
    vectorized overlap computation."""
    da, db = a.as_dict(), b.as_dict()
    total = 0.0
    left, right = [], []
    for key, (wa, sa) in da.items():
        hit = db.get(key)
        if hit is None:
            continue
        wb, sb = hit
        if (
            isinstance(sa, PureMixture)
            and isinstance(sb, PureMixture)
            and sa.rank_bound == 1
            and sb.rank_bound == 1
        ):
            left.append(np.sqrt(wa) * sa.scaled_components()[0])
            right.append(np.sqrt(wb) * sb.scaled_components()[0])
        else:
            total += np.sqrt(wa * wb) * state_fidelity(sa, sb, tol)
    if left:
        overlaps = np.abs((np.stack(left) * np.stack(right).conj()).sum(axis=1))
        total += float(overlaps.sum())
    return float(min(1.0, total))


class CqChannel:
    """A cq channel over a finite Abelian group (or a plain input alphabet).

    Parameters
    ----------
    alphabet : GroupOps
        Input structure.  Group operations are required only by the
        polarization transforms and the d-indexed fidelities.
    outputs : list of HybridState
        One output per input index.
    """

    def __init__(self, alphabet: GroupOps, outputs, tol: Tolerances = DEFAULT_TOL):
        if len(outputs) != alphabet.order:
            raise StructuralError("channel must define an output for every input")
        dims = {h.dim for h in outputs}
        if len(dims) != 1:
            raise StructuralError("outputs have inconsistent quantum dimensions")
        self.alphabet = alphabet
        self.outputs = list(outputs)
        self.k = dims.pop()
        self.tol = tol

    # -- conveniences ---------------------------------------------------------
    @property
    def group(self) -> GroupOps:
        return self.alphabet

    @property
    def q(self) -> int:
        return self.alphabet.order

    def output_of(self, x) -> HybridState:
        return self.outputs[self._index(x)]

    def _index(self, x) -> int:
        if isinstance(x, GroupElement):
            return x.index
        if isinstance(x, Coset):
            for i in range(self.alphabet.order):
                if self.alphabet.label_of(i) == x:
                    return i
            raise StructuralError("coset is not an input of this channel")
        return int(x)

    def label_union(self) -> list:
        cached = getattr(self, "_label_union", None)
        if cached is not None:
            return cached
        seen, out = set(), []
        for h in self.outputs:
            for lab in h.labels():
                key = _label_key(lab)
                if key not in seen:
                    seen.add(key)
                    out.append(lab)
        out.sort(key=_label_key)
        self._label_union = out
        return out

    def label_positions(self) -> dict:
        """Map label key -> position in the sorted label union."""
        return {_label_key(lab): i for i, lab in enumerate(self.label_union())}

    def total_components(self) -> int:
        return sum(h.total_components() for h in self.outputs)

    def is_diagonal(self) -> bool:
        flag = getattr(self, "_diag_flag", None)
        if flag is None:
            flag = all(
                state_is_diagonal(st) for h in self.outputs for _, _, st in h.branches
            )
            self._diag_flag = flag
        return flag

    # -- information functionals ----------------------------------------------
    def average_output(self) -> HybridState:
        q = self.q
        per_label: dict = {}
        for h in self.outputs:
            for w, lab, st in h.branches:
                per_label.setdefault(_label_key(lab), [lab, 0.0, []])
                ent = per_label[_label_key(lab)]
                ent[1] += w / q
                ent[2].append((w / q, st))
        branches = []
        for lab, wtot, parts in per_label.values():
            state = mix_states([(w / wtot, st) for w, st in parts])
            branches.append((wtot, lab, state))
        return HybridState(branches, tol=self.tol)

    def holevo_information(self) -> float:
        """Symmetric Holevo information in nats: H(avg output) - avg H(output)."""
        if all(
            isinstance(st, PureMixture) for h in self.outputs for _, _, st in h.branches
        ):
            avg = self._average_entropy_fast()
        else:
            avg = self.average_output().entropy(self.tol)
        per_input = sum(h.entropy(self.tol) for h in self.outputs) / self.q
        return max(0.0, avg - per_input)

    def _average_entropy_fast(self) -> float:
        # entropy of a block-diagonal state = -sum of lambda log lambda over
        # the eigenvalues of the unnormalized blocks; blocks assembled as
        # stacked component Grams without intermediate mixture objects
        q = self.q
        acc: dict = {}
        for h in self.outputs:
            for w, lab, st in h.branches:
                acc.setdefault(_label_key(lab), []).append(
                    np.sqrt(w / q) * st.scaled_components()
                )
        groups: dict = {}
        for parts in acc.values():
            comps = parts[0] if len(parts) == 1 else np.vstack(parts)
            groups.setdefault(comps.shape, []).append(comps)
        total = 0.0
        for mats in groups.values():
            total += float(batched_mixture_entropies(mats).sum())
        return total

    def pairwise_fidelity(self, x, y) -> float:
        return hybrid_fidelity(self.output_of(x), self.output_of(y), self.tol)

    def fd(self, d) -> float:
        """F_d = (1/q) sum_x F(rho_x, rho_{x+d})."""
        di = self._index(d)
        g = self.alphabet
        return float(
            np.mean([self.pairwise_fidelity(x, g.add_index(x, di)) for x in range(self.q)])
        )

    def fd_table(self) -> dict:
        return {d: self.fd(d) for d in range(self.q)}

    def avg_fidelity(self) -> float:
        """Average pairwise fidelity; 0 by convention for a single-input channel."""
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

    # -- quotient constructions --------------------------------------------------
    def quotient(self, H: Subgroup) -> "CqChannel":
        """W[H]: inputs are cosets of H, outputs the coset-averaged states."""
        quot = QuotientGroup(self._require_product_group(), H)
        outputs = []
        for coset in quot.cosets:
            members = coset.member_indices()
            outputs.append(_average_hybrid([self.outputs[i] for i in members], self.tol))
        return CqChannel(quot, outputs, self.tol)

    def restricted_quotient(self, M: Subgroup, D: Coset) -> "CqChannel":
        """W[M|D]: inputs are the cosets of M inside D."""
        if not M.is_subset_of(D.subgroup):
            raise StructuralError("M must be contained in the subgroup defining D")
        cells = refine(D, M)
        outputs = [
            _average_hybrid([self.outputs[i] for i in c.member_indices()], self.tol)
            for c in cells
        ]
        return CqChannel(PlainAlphabet(cells), outputs, self.tol)

    def _require_product_group(self) -> FiniteAbelianGroup:
        if isinstance(self.alphabet, FiniteAbelianGroup):
            return self.alphabet
        raise StructuralError("operation requires a product-group input alphabet")

    def nested_fmax(self, M: Subgroup, H: Subgroup) -> float:
        """max of F_d over d in H but not in M."""
        if not M.is_subset_of(H):
            raise StructuralError("M must be a subgroup of H")
        ds = [i for i in H.indices if not M.contains_index(i)]
        if not ds:
            return 0.0
        return max(self.fd(d) for d in ds)

    def nested_information(self, M: Subgroup, H: Subgroup):
        """I(W[M]) - I(W[H]) and its coset decomposition average.

        Returns (value, average of I(W[M|D]) over cosets D of H); the two
        agree by the conditional-information decomposition.
        """
        if not M.is_subset_of(H):
            raise StructuralError("M must be a subgroup of H")
        value = self.quotient(M).holevo_information() - self.quotient(H).holevo_information()
        g = self._require_product_group()
        cells = quotient_cosets(g, H)
        decomp = float(
            np.mean([self.restricted_quotient(M, D).holevo_information() for D in cells])
        )
        return value, decomp

    # -- representation changes ---------------------------------------------------
    def flatten_dense(self) -> "CqChannel":
        """Expand classical labels into one dense block-diagonal output."""
        order = self.label_union()
        outputs = [
            HybridState([(1.0, (), h.to_dense_block(order))], validate=False)
            for h in self.outputs
        ]
        return CqChannel(self.alphabet, outputs, self.tol)


def _average_hybrid(hybrids, tol: Tolerances) -> HybridState:
    n = len(hybrids)
    per_label: dict = {}
    for h in hybrids:
        for w, lab, st in h.branches:
            per_label.setdefault(_label_key(lab), [lab, 0.0, []])
            ent = per_label[_label_key(lab)]
            ent[1] += w / n
            ent[2].append((w / n, st))
    branches = []
    for lab, wtot, parts in per_label.values():
        if all(isinstance(st, PureMixture) for _, st in parts):
            vecs = np.vstack([st.vecs for _, st in parts])
            wts = np.concatenate([w / wtot * st.weights for w, st in parts])
            state = PureMixture(wts, vecs)
            if state.rank_bound > state.dim:
                state = to_dense(state)
        else:
            state = mix_states([(w / wtot, st) for w, st in parts])
        branches.append((wtot, lab, state))
    return HybridState(branches, tol=tol)


# -- module-level operation names matching the lab's public surface ------------


def holevo_information(W) -> float:
    return W.holevo_information()


def fd(W, d) -> float:
    return W.fd(d)


def fd_table(W) -> dict:
    return W.fd_table()


def avg_fidelity(W) -> float:
    return W.avg_fidelity()


def f_max(W) -> float:
    return W.f_max()


def quotient_channel(W, H: Subgroup):
    return W.quotient(H)


def restricted_quotient_channel(W, M: Subgroup, D: Coset):
    return W.restricted_quotient(M, D)


def nested_information(W, M: Subgroup, H: Subgroup):
    return W.nested_information(M, H)


def nested_fmax(W, M: Subgroup, H: Subgroup) -> float:
    return W.nested_fmax(M, H)


# -- presets --------------------------------------------------------------------


def preset_channel(name: str, seed=None, **params) -> CqChannel:
    """Construct one of the named channel families.

    classical-symmetric(q, p): uniform-error classical channel, diagonal states.
    pure-states(angles): qubit pure states [cos a, sin a] over Z_q, q = len(angles).
    depolarized-orthogonal(q, lam): (1-lam)|x><x| + lam I/q.
    random(q, k, seed, mixed=False): Haar-like random pure (or Wishart mixed) outputs.
    """
    if name == "classical-symmetric":
        q, p = int(params["q"]), float(params["p"])
        if not 0.0 <= p <= 1.0:
            raise LoadError("flip probability must be in [0, 1]")
        g = FiniteAbelianGroup([q])
        outputs = []
        for x in range(q):
            probs = np.full(q, p / (q - 1) if q > 1 else 0.0)
            probs[x] = 1.0 - p
            outputs.append(HybridState([(1.0, (), np.diag(probs.astype(complex)))]))
        return CqChannel(g, outputs)
    if name == "pure-states":
        angles = [float(a) for a in params["angles"]]
        g = FiniteAbelianGroup([len(angles)])
        outputs = [
            HybridState([(1.0, (), pure_state([np.cos(a), np.sin(a)]))]) for a in angles
        ]
        return CqChannel(g, outputs)
    if name == "depolarized-orthogonal":
        q, lam = int(params["q"]), float(params["lam"])
        if not 0.0 <= lam <= 1.0:
            raise LoadError("depolarization weight must be in [0, 1]")
        g = FiniteAbelianGroup([q])
        outputs = []
        for x in range(q):
            m = np.full(q, lam / q, dtype=complex)
            m[x] += 1.0 - lam
            outputs.append(HybridState([(1.0, (), np.diag(m))]))
        return CqChannel(g, outputs)
    if name == "random":
        q, k = int(params["q"]), int(params["k"])
        mixed = bool(params.get("mixed", False))
        group_spec = params.get("group", [q])
        g = FiniteAbelianGroup(group_spec)
        if g.order != q:
            raise LoadError("group order does not match q")
        rng = np.random.default_rng(seed)
        outputs = []
        for _ in range(q):
            if mixed:
                a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
                m = a @ a.conj().T
                m /= np.real(np.trace(m))
                outputs.append(HybridState([(1.0, (), m)]))
            else:
                v = rng.normal(size=k) + 1j * rng.normal(size=k)
                outputs.append(HybridState([(1.0, (), pure_state(v))]))
        return CqChannel(g, outputs)
    raise LoadError(f"unknown preset {name!r}")


# -- JSON channel files -----------------------------------------------------------


def _parse_input_key(key: str, g: FiniteAbelianGroup) -> int:
    try:
        parsed = ast.literal_eval(key)
    except (SyntaxError, ValueError) as exc:
        raise LoadError(f"bad input key {key!r}") from exc
    if isinstance(parsed, int):
        parsed = (parsed,)
    return g.element(tuple(parsed)).index


def _matrix_from_json(obj, what: str) -> np.ndarray:
    re = np.asarray(obj.get("re"), dtype=float)
    im_raw = obj.get("im")
    im = np.zeros_like(re) if im_raw is None else np.asarray(im_raw, dtype=float)
    if re.shape != im.shape or re.ndim != 2:
        raise LoadError(f"{what}: re/im must be equal-shape square matrices")
    return re + 1j * im


def load_channel(source, tol: Tolerances = DEFAULT_TOL) -> CqChannel:
    """Load and validate a channel from a JSON file path, string, or dict."""
    if isinstance(source, dict):
        obj = source
    else:
        text = source
        try:
            if "\n" not in str(source) and str(source).endswith(".json"):
                with open(source) as fh:
                    text = fh.read()
            obj = json.loads(text)
        except (OSError, json.JSONDecodeError) as exc:
            raise LoadError(f"cannot read channel JSON: {exc}") from exc
    try:
        g = FiniteAbelianGroup([int(n) for n in obj["group"]])
        k = int(obj["k"])
        raw_states = obj["states"]
    except (KeyError, TypeError) as exc:
        raise LoadError(f"channel JSON missing required field: {exc}") from exc
    outputs: list = [None] * g.order
    for key, spec in raw_states.items():
        idx = _parse_input_key(key, g)
        if "branches" in spec:
            branches = []
            for j, br in enumerate(spec["branches"]):
                mat = _matrix_from_json(br, f"input {key} branch {j}")
                if mat.shape != (k, k):
                    raise LoadError(f"input {key}: branch matrix is not {k}x{k}")
                try:
                    mat = validate_density_matrix(mat, tol)
                except StructuralError as exc:
                    raise LoadError(f"input {key} branch {j}: {exc}") from exc
                branches.append((float(br["w"]), str(br.get("label", j)), mat))
        else:
            mat = _matrix_from_json(spec, f"input {key}")
            if mat.shape != (k, k):
                raise LoadError(f"input {key}: matrix is not {k}x{k}")
            try:
                mat = validate_density_matrix(mat, tol)
            except StructuralError as exc:
                raise LoadError(f"input {key}: {exc}") from exc
            branches = [(1.0, (), mat)]
        try:
            outputs[idx] = HybridState(branches, tol=tol)
        except StructuralError as exc:
            raise LoadError(f"input {key}: {exc}") from exc
    missing = [repr(g.element_by_index(i)) for i, h in enumerate(outputs) if h is None]
    if missing:
        raise LoadError(f"channel does not define inputs: {', '.join(missing)}")
    return CqChannel(g, outputs, tol)


def channel_to_json(W: CqChannel) -> dict:
    """Serialize a channel (labels flattened to strings) for files and plans."""
    g = W._require_product_group()
    states = {}
    for i in range(W.q):
        branches = []
        for w, lab, st in W.outputs[i].branches:
            m = to_dense(st)
            branches.append(
                {
                    "w": w,
                    "label": _label_key(lab),
                    "re": np.real(m).tolist(),
                    "im": np.imag(m).tolist(),
                }
            )
        states[repr(g.element_by_index(i))] = {"branches": branches}
    return {"group": list(g.cyclic_orders), "k": W.k, "states": states}
