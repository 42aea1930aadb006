import json

import numpy as np
import pytest

from conftest import pure_overlap_channel, random_mixed_channel, random_pure_channel
from oracles import (
    bhattacharyya,
    mutual_information_table,
    qary_symmetric_information,
    qary_symmetric_pair_fidelity,
)

from cqpolar.channel import (
    CqChannel,
    HybridState,
    channel_to_json,
    load_channel,
    preset_channel,
)
from cqpolar.errors import LoadError, StructuralError
from cqpolar.groups import FiniteAbelianGroup, Subgroup, quotient_cosets
from cqpolar.states import pure_state, to_dense

Z2 = FiniteAbelianGroup([2])
Z4 = FiniteAbelianGroup([4])


def perfect_binary():
    return preset_channel("pure-states", angles=[0.0, np.pi / 2])


def useless_binary():
    half = np.eye(2, dtype=complex) / 2
    return CqChannel(Z2, [HybridState([(1.0, (), half)])] * 2)


def test_holevo_examples():
    assert perfect_binary().holevo_information() == pytest.approx(np.log(2), abs=1e-10)
    assert useless_binary().holevo_information() == pytest.approx(0.0, abs=1e-10)
    w = pure_overlap_channel(0.5)
    lam = np.array([0.75, 0.25])
    assert w.holevo_information() == pytest.approx(float(-(lam * np.log(lam)).sum()), abs=1e-9)


def test_fd_examples(z4_homomorphism_channel):
    assert perfect_binary().fd(1) == pytest.approx(0.0, abs=1e-9)
    assert useless_binary().fd(1) == pytest.approx(1.0, abs=1e-12)
    w = z4_homomorphism_channel
    assert w.fd(0) == pytest.approx(1.0, abs=1e-12)
    assert w.fd(2) == pytest.approx(1.0, abs=1e-12)
    assert w.fd(1) == pytest.approx(0.0, abs=1e-12)
    assert w.fd(3) == pytest.approx(0.0, abs=1e-12)


def test_avg_fidelity_and_fmax(z4_homomorphism_channel):
    w = perfect_binary()
    assert w.avg_fidelity() == pytest.approx(0.0, abs=1e-9)
    assert w.f_max() == pytest.approx(0.0, abs=1e-9)
    fx = z4_homomorphism_channel
    assert fx.avg_fidelity() == pytest.approx(1 / 3, abs=1e-12)
    assert fx.f_max() == pytest.approx(1.0, abs=1e-12)


def test_single_input_convention(z4_homomorphism_channel):
    full = Subgroup(Z4, (0, 1, 2, 3))
    quot = z4_homomorphism_channel.quotient(full)
    assert quot.q == 1
    assert quot.avg_fidelity() == 0.0
    assert quot.f_max() == 0.0
    assert quot.holevo_information() == pytest.approx(0.0, abs=1e-10)


def test_quotient_examples(z4_homomorphism_channel):
    w = z4_homomorphism_channel
    trivial = Subgroup(Z4, (0,))
    same = w.quotient(trivial)
    assert same.holevo_information() == pytest.approx(w.holevo_information(), abs=1e-10)
    assert same.fd(1) == pytest.approx(w.fd(1), abs=1e-12)
    h = Subgroup(Z4, (0, 2))
    quot = w.quotient(h)
    assert quot.q == 2
    assert quot.holevo_information() == pytest.approx(np.log(2), abs=1e-10)
    assert quot.fd(1) == pytest.approx(0.0, abs=1e-12)


def test_restricted_quotient_examples(z4_homomorphism_channel):
    w = z4_homomorphism_channel
    g = Z4
    full = Subgroup(g, (0, 1, 2, 3))
    trivial = Subgroup(g, (0,))
    d_full = quotient_cosets(g, full)[0]
    same = w.restricted_quotient(trivial, d_full)
    assert same.q == 4
    assert same.holevo_information() == pytest.approx(w.holevo_information(), abs=1e-10)
    h = Subgroup(g, (0, 2))
    d0 = quotient_cosets(g, h)[0]
    single = w.restricted_quotient(h, d0)
    assert single.q == 1
    assert single.avg_fidelity() == 0.0
    mid = w.restricted_quotient(Subgroup(g, (0, 2)), d_full)
    assert mid.q == 2
    assert mid.holevo_information() == pytest.approx(np.log(2), abs=1e-10)


def test_restricted_quotient_requires_nesting(z4_homomorphism_channel):
    h = Subgroup(Z4, (0, 2))
    d = quotient_cosets(Z4, h)[0]
    with pytest.raises(StructuralError):
        z4_homomorphism_channel.restricted_quotient(Subgroup(Z4, (0, 1, 2, 3)), d)


def test_nested_information(z4_homomorphism_channel):
    w = z4_homomorphism_channel
    h = Subgroup(Z4, (0, 2))
    value, decomp = w.nested_information(h, h)
    assert value == pytest.approx(0.0, abs=1e-10)
    assert decomp == pytest.approx(0.0, abs=1e-10)
    full = Subgroup(Z4, (0, 1, 2, 3))
    value, decomp = w.nested_information(h, full)
    assert value == pytest.approx(np.log(2), abs=1e-10)
    assert decomp == pytest.approx(value, abs=1e-9)


def test_nested_information_decomposition_random():
    for seed in range(8):
        rng = np.random.default_rng(seed)
        w = random_mixed_channel(rng, 4, 2)
        subs = [Subgroup(Z4, (0,)), Subgroup(Z4, (0, 2)), Subgroup(Z4, (0, 1, 2, 3))]
        for i, m in enumerate(subs):
            for h in subs[i:]:
                value, decomp = w.nested_information(m, h)
                assert value == pytest.approx(decomp, abs=1e-9)


def test_nested_fmax(z4_homomorphism_channel):
    w = z4_homomorphism_channel
    h = Subgroup(Z4, (0, 2))
    full = Subgroup(Z4, (0, 1, 2, 3))
    assert w.nested_fmax(Subgroup(Z4, (0,)), h) == pytest.approx(1.0, abs=1e-12)
    assert w.nested_fmax(h, full) == pytest.approx(0.0, abs=1e-12)


def test_hybrid_vs_dense_equivalence():
    rng = np.random.default_rng(11)
    g = Z2
    for _ in range(6):
        # two labeled branches with input-dependent weights
        outputs = []
        w0 = float(rng.uniform(0.2, 0.8))
        for x in range(2):
            wx = w0 if x == 0 else 1 - w0
            outputs.append(
                HybridState(
                    [
                        (wx, "a", np.diag(rng.dirichlet([1, 1])).astype(complex)),
                        (1 - wx, "b", _rand_rho(rng, 2)),
                    ]
                )
            )
        w = CqChannel(g, outputs)
        dense = w.flatten_dense()
        assert dense.holevo_information() == pytest.approx(
            w.holevo_information(), abs=1e-9
        )
        for d in range(2):
            assert dense.fd(d) == pytest.approx(w.fd(d), abs=1e-9)
        assert dense.avg_fidelity() == pytest.approx(w.avg_fidelity(), abs=1e-9)


def _rand_rho(rng, k):
    a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    m = a @ a.conj().T
    return m / np.real(np.trace(m))


def test_classical_oracle_equivalence():
    for q, p in [(2, 0.11), (3, 0.2), (4, 0.35)]:
        w = preset_channel("classical-symmetric", q=q, p=p)
        table = np.stack(
            [np.real(np.diag(to_dense(w.outputs[x].branches[0][2]))) for x in range(q)]
        )
        assert w.holevo_information() == pytest.approx(
            mutual_information_table(table), abs=1e-10
        )
        assert w.holevo_information() == pytest.approx(
            qary_symmetric_information(q, p), abs=1e-10
        )
        assert w.pairwise_fidelity(0, 1) == pytest.approx(
            bhattacharyya(table[0], table[1]), abs=1e-10
        )
        assert w.avg_fidelity() == pytest.approx(
            qary_symmetric_pair_fidelity(q, p), abs=1e-10
        )


def test_classical_symmetric_spec_values():
    w = preset_channel("classical-symmetric", q=2, p=0.11)
    h = -0.11 * np.log(0.11) - 0.89 * np.log(0.89)
    assert w.holevo_information() == pytest.approx(np.log(2) - h, abs=1e-12)
    assert w.avg_fidelity() == pytest.approx(2 * np.sqrt(0.11 * 0.89), abs=1e-12)


def test_presets():
    assert perfect_binary().holevo_information() == pytest.approx(np.log(2), abs=1e-10)
    w = preset_channel("depolarized-orthogonal", q=3, lam=1.0)
    assert w.holevo_information() == pytest.approx(0.0, abs=1e-10)
    w = preset_channel("random", q=2, k=2, seed=7)
    assert 0.0 <= w.holevo_information() <= np.log(2) + 1e-12
    w = preset_channel("random", q=3, k=2, seed=7, mixed=True)
    assert w.is_diagonal() is False
    with pytest.raises(LoadError):
        preset_channel("no-such-family", q=2)
    with pytest.raises(LoadError):
        preset_channel("classical-symmetric", q=2, p=1.5)


def test_channel_json_roundtrip():
    rng = np.random.default_rng(12)
    w = random_mixed_channel(rng, 3, 2)
    blob = json.dumps(channel_to_json(w))
    back = load_channel(blob)
    assert back.q == w.q and back.k == w.k
    assert back.holevo_information() == pytest.approx(w.holevo_information(), abs=1e-9)
    for d in range(3):
        assert back.fd(d) == pytest.approx(w.fd(d), abs=1e-9)


def test_load_channel_shorthand_and_labels():
    obj = {
        "group": [2],
        "k": 2,
        "states": {
            "(0)": {"re": [[1, 0], [0, 0]]},
            "(1)": {
                "branches": [
                    {"w": 0.5, "label": "u", "re": [[1, 0], [0, 0]]},
                    {"w": 0.5, "label": "v", "re": [[0, 0], [0, 1]]},
                ]
            },
        },
    }
    w = load_channel(obj)
    assert w.q == 2
    assert len(w.outputs[1].branches) == 2


def test_load_channel_errors():
    base = {"group": [2], "k": 2, "states": {"(0)": {"re": [[1, 0], [0, 0]]}}}
    with pytest.raises(LoadError, match=r"\(1\)"):
        load_channel(base)  # missing input
    bad_psd = {
        "group": [2],
        "k": 2,
        "states": {
            "(0)": {"re": [[1.5, 0], [0, -0.5]]},
            "(1)": {"re": [[1, 0], [0, 0]]},
        },
    }
    with pytest.raises(LoadError, match=r"\(0\)"):
        load_channel(bad_psd)
    bad_trace = {
        "group": [2],
        "k": 2,
        "states": {
            "(0)": {"re": [[0.7, 0], [0, 0.7]]},
            "(1)": {"re": [[1, 0], [0, 0]]},
        },
    }
    with pytest.raises(LoadError):
        load_channel(bad_trace)
    with pytest.raises(LoadError):
        load_channel({"group": [2], "k": 2})
    with pytest.raises(LoadError):
        load_channel('{"not json')


def test_channel_requires_all_outputs_same_dim():
    with pytest.raises(StructuralError):
        CqChannel(
            Z2,
            [
                HybridState([(1.0, (), np.eye(2, dtype=complex) / 2)]),
                HybridState([(1.0, (), np.eye(3, dtype=complex) / 3)]),
            ],
        )


def test_hybrid_state_validation():
    with pytest.raises(StructuralError):
        HybridState([(0.5, "a", np.eye(2, dtype=complex) / 2)])
    with pytest.raises(StructuralError):
        HybridState(
            [
                (0.5, "a", np.eye(2, dtype=complex) / 2),
                (0.5, "a", np.eye(2, dtype=complex) / 2),
            ]
        )


def test_average_output_is_valid(z4_homomorphism_channel):
    avg = z4_homomorphism_channel.average_output()
    assert sum(w for w, _, _ in avg.branches) == pytest.approx(1.0, abs=1e-12)
    assert avg.entropy() == pytest.approx(np.log(2), abs=1e-10)


def test_is_diagonal_flag():
    assert preset_channel("classical-symmetric", q=2, p=0.3).is_diagonal()
    rng = np.random.default_rng(0)
    assert not random_pure_channel(rng, 2, 2).is_diagonal()
