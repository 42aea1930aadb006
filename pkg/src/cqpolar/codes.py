"""Polar code construction: branch classification, frozen structure, encoder.

A plan assigns every branch s a subgroup H_s (the information carried is the
coset of H_s) and a section mapping that lifts cosets to group elements (the
frozen content).  The conditional channel actually faced while decoding
branch s is the synthetic channel of the REVERSED label, a bit-reversal
artifact of the decode order; plans therefore classify each decode slot by
the statistics of its reversed-label record.  All whole-code quantities
(rate, error bound, conservation) are unaffected by the reversal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import CqChannel, channel_to_json, load_channel
from .config import ResourceCaps, default_caps
from .errors import StructuralError
from .groups import (
    Coset,
    FiniteAbelianGroup,
    GroupOps,
    SectionMap,
    Subgroup,
    quotient_cosets,
    random_section_map,
    zero_section_map,
)
from .polarize import (
    PolarizationRecord,
    branch_order,
    decode_index,
    format_label,
    parse_label,
    polarization_scan,
    reverse_label,
)


@dataclass(frozen=True)
class CodeParams:
    """Construction parameters; N = 2^n."""

    n: int
    delta: float = 0.25
    beta: float = 0.2
    beta_prime: float = 0.4
    seed: int = 0
    mode: str = "best-effort"  # or "paper-strict"
    tau: float = 1e-3  # best-effort fidelity budget
    sections: str = "random"  # or "zero"

    def __post_init__(self):
        if self.n < 1:
            raise StructuralError("n must be >= 1")
        if not self.delta > 0:
            raise StructuralError("delta must be positive")
        if not 0 < self.beta < self.beta_prime < 0.5:
            raise StructuralError("need 0 < beta < beta' < 1/2")
        if self.mode not in ("best-effort", "paper-strict"):
            raise StructuralError(f"unknown mode {self.mode!r}")
        if self.sections not in ("random", "zero"):
            raise StructuralError(f"unknown section policy {self.sections!r}")

    @property
    def block_length(self) -> int:
        return 1 << self.n


@dataclass
class BranchDecision:
    """Choices and evidence for one decode slot."""

    branch: tuple  # decode-order label s
    faced: tuple  # reversed label: the synthetic channel this slot sees
    subgroup: Subgroup
    section: SectionMap
    in_selected_set: bool  # passed the mode's selection test
    info_nats: float  # log |G/H_s|
    I: float
    fmax: float
    quot_I: float  # I(W^faced[H_s])
    quot_F: float  # F(W^faced[H_s])

    @property
    def frozen(self) -> bool:
        return self.info_nats == 0.0


@dataclass
class CodePlan:
    """A constructed polar code: per-branch frozen structure plus accounting."""

    params: CodeParams
    group: FiniteAbelianGroup
    decisions: list  # BranchDecision in decode order
    rate: float
    bound: float
    base_I: float
    channel_json: dict = field(default=None, repr=False)

    @property
    def block_length(self) -> int:
        return self.params.block_length

    def decision_at(self, i: int) -> BranchDecision:
        return self.decisions[i]

    def message_space_sizes(self) -> list:
        return [self.group.order // d.subgroup.order for d in self.decisions]


def _eligible_subgroups(
    rec: PolarizationRecord, params: CodeParams, q: int
) -> list:
    if params.mode == "paper-strict":
        thresh = 2.0 ** (-(2.0 ** (params.beta_prime * params.n)))
        out = []
        for H in rec.quot_I:
            log_quot = np.log(q / H.order)
            if (
                rec.quot_F[H] < thresh
                and abs(rec.I - log_quot) < params.delta / 2
                and abs(rec.quot_I[H] - log_quot) < params.delta / 2
            ):
                out.append(H)
        return out
    return [H for H in rec.quot_I if rec.quot_F[H] <= params.tau]


def _choose_subgroup(rec: PolarizationRecord, params: CodeParams, q: int):
    eligible = _eligible_subgroups(rec, params, q)
    if not eligible:
        return None
    ranked = sorted(
        eligible,
        key=lambda H: (rec.objective(H, np.log(q / H.order)), -H.order, H.indices),
    )
    return ranked[0]


def build_plan(W: CqChannel, params: CodeParams, caps: ResourceCaps = None) -> CodePlan:
    """Scan the synthetic channels and assign (H_s, f_s) to every decode slot.

    Each slot minimizes |I - log|G/H|| + |I[H] - log|G/H|| among subgroups
    meeting the mode's fidelity threshold, ties broken toward larger |H|
    then lexicographic element sets; slots with no eligible subgroup are
    fully frozen (H_s = G).
    """
    caps = caps or default_caps()
    g = W.alphabet
    if not isinstance(g, FiniteAbelianGroup):
        raise StructuralError("plans require a product-group channel")
    records = {r.branch: r for r in polarization_scan(W, params.n, caps)}
    full = Subgroup(g, tuple(range(g.order)))
    decisions = []
    for s in branch_order(params.n):
        rec = records[reverse_label(s)]
        chosen = _choose_subgroup(rec, params, g.order)
        selected = chosen is not None
        H = chosen if selected else full
        rng = np.random.default_rng([params.seed, decode_index(s)])
        section = (
            zero_section_map(H) if params.sections == "zero" else random_section_map(H, rng)
        )
        decisions.append(
            BranchDecision(
                branch=s,
                faced=rec.branch,
                subgroup=H,
                section=section,
                in_selected_set=selected,
                info_nats=float(np.log(g.order / H.order)),
                I=rec.I,
                fmax=rec.fmax,
                quot_I=rec.quot_I[H],
                quot_F=rec.quot_F[H],
            )
        )
    N = params.block_length
    rate = sum(d.info_nats for d in decisions) / N
    bound = 2.0 * np.sqrt(N) * np.sqrt(sum((g.order - 1) * d.quot_F for d in decisions))
    return CodePlan(
        params=params,
        group=g,
        decisions=decisions,
        rate=float(rate),
        bound=float(bound),
        base_I=W.holevo_information(),
        channel_json=channel_to_json(W),
    )


def rate_gap(plan: CodePlan, W=None) -> float:
    """I(W) - R; the construction guarantees < delta only asymptotically."""
    base = plan.base_I if W is None else W.holevo_information()
    return float(base - plan.rate)


# -- messages -------------------------------------------------------------------


@dataclass
class MessageVector:
    """Per-branch coset symbols in decode order."""

    cosets: list  # Coset of each decision's subgroup

    def __len__(self) -> int:
        return len(self.cosets)


def random_message(plan: CodePlan, rng) -> MessageVector:
    cosets = []
    for d in plan.decisions:
        cells = quotient_cosets(plan.group, d.subgroup)
        cosets.append(cells[int(rng.integers(len(cells)))])
    return MessageVector(cosets)


def message_from_positions(plan: CodePlan, positions) -> MessageVector:
    cosets = []
    for d, p in zip(plan.decisions, positions):
        cosets.append(quotient_cosets(plan.group, d.subgroup)[int(p)])
    return MessageVector(cosets)


def lift_message(plan: CodePlan, message: MessageVector, sections=None) -> np.ndarray:
    """Apply the section mappings: u^s = f_s(coset), as element indices."""
    if len(message) != len(plan.decisions):
        raise StructuralError("message length does not match the plan")
    out = np.empty(len(message), dtype=np.int64)
    for i, (d, coset) in enumerate(zip(plan.decisions, message.cosets)):
        if coset.subgroup != d.subgroup:
            raise StructuralError(f"symbol {i} is not a coset of the plan's subgroup")
        section = d.section if sections is None else sections[i]
        out[i] = section(coset).index
    return out


# -- encoder ----------------------------------------------------------------------


def polar_encode_indices(group: GroupOps, u: np.ndarray):
    """Butterfly encoder on element indices in decode order.

    Returns (codeword indices, group-addition count).  Pair (2j, 2j+1) maps
    to a sum lane feeding the first half and a pass-through lane feeding the
    second half; the pass-through adds the identity so every level performs
    exactly N element additions and the whole encode exactly N log2 N.
    """
    u = np.asarray(u, dtype=np.int64)
    n_total = u.size
    if n_total & (n_total - 1):
        raise StructuralError("message length must be a power of two")
    tab = group.add_table
    adds = 0

    def rec(vec):
        nonlocal adds
        if vec.size == 1:
            return vec
        sums = tab[vec[0::2], vec[1::2]]
        passthrough = tab[vec[1::2], 0]
        adds += vec.size
        return np.concatenate([rec(sums), rec(passthrough)])

    return rec(u), adds


def encode(plan: CodePlan, message: MessageVector, sections=None) -> np.ndarray:
    """Lift a message through the sections and run the butterfly.

    Returns the codeword as element indices, one per channel use, in decode
    order of the use labels.
    """
    u = lift_message(plan, message, sections)
    codeword, _ = polar_encode_indices(plan.group, u)
    return codeword


def codeword_elements(plan: CodePlan, codeword: np.ndarray) -> list:
    return [plan.group.element_by_index(int(i)) for i in codeword]


# -- serialization ------------------------------------------------------------------


def plan_to_json(plan: CodePlan) -> dict:
    g = plan.group
    decisions = []
    for d in plan.decisions:
        decisions.append(
            {
                "branch": format_label(d.branch),
                "faced": format_label(d.faced),
                "subgroup": list(d.subgroup.indices),
                "section": {
                    str(c.rep_index): int(el.index) for c, el in d.section.table.items()
                },
                "in_selected_set": d.in_selected_set,
                "info_nats": d.info_nats,
                "I": d.I,
                "fmax": d.fmax,
                "quot_I": d.quot_I,
                "quot_F": d.quot_F,
            }
        )
    return {
        "params": {
            "n": plan.params.n,
            "delta": plan.params.delta,
            "beta": plan.params.beta,
            "beta_prime": plan.params.beta_prime,
            "seed": plan.params.seed,
            "mode": plan.params.mode,
            "tau": plan.params.tau,
            "sections": plan.params.sections,
        },
        "group": list(g.cyclic_orders),
        "rate": plan.rate,
        "bound": plan.bound,
        "base_I": plan.base_I,
        "decisions": decisions,
        "channel": plan.channel_json,
    }


def plan_from_json(obj) -> CodePlan:
    if isinstance(obj, str):
        with open(obj) as fh:
            obj = json.load(fh)
    params = CodeParams(**obj["params"])
    g = FiniteAbelianGroup(obj["group"])
    decisions = []
    for dd in obj["decisions"]:
        H = Subgroup(g, tuple(dd["subgroup"]))
        table = {}
        for rep, el in dd["section"].items():
            coset = Coset(H, int(rep))
            table[coset] = g.element_by_index(int(el))
        decisions.append(
            BranchDecision(
                branch=parse_label(dd["branch"]),
                faced=parse_label(dd["faced"]),
                subgroup=H,
                section=SectionMap(H, table),
                in_selected_set=bool(dd["in_selected_set"]),
                info_nats=float(dd["info_nats"]),
                I=float(dd["I"]),
                fmax=float(dd["fmax"]),
                quot_I=float(dd["quot_I"]),
                quot_F=float(dd["quot_F"]),
            )
        )
    return CodePlan(
        params=params,
        group=g,
        decisions=decisions,
        rate=float(obj["rate"]),
        bound=float(obj["bound"]),
        base_I=float(obj["base_I"]),
        channel_json=obj.get("channel"),
    )


def plan_channel(plan: CodePlan) -> CqChannel:
    if plan.channel_json is None:
        raise StructuralError("plan does not embed its channel")
    return load_channel(plan.channel_json)
