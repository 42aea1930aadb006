import numpy as np
import pytest

from conftest import pure_overlap_channel, random_mixed_channel, random_pure_channel
from oracles import classical_fd, classical_minus, classical_plus, mutual_information_table

from cqpolar.channel import CqChannel, HybridState, preset_channel
from cqpolar.config import ResourceCaps
from cqpolar.diagonal import from_cq_channel
from cqpolar.errors import CapacityError
from cqpolar.groups import FiniteAbelianGroup, Subgroup, enumerate_subgroups
from cqpolar.polarize import (
    branch_order,
    decode_index,
    format_label,
    intermediate_fraction,
    label_from_index,
    minus_transform,
    parse_label,
    plus_transform,
    polarization_scan,
    process_sample,
    reverse_label,
    scan_conservation_defect,
    synthesize,
)
from cqpolar.states import to_dense


def test_branch_order_examples():
    assert branch_order(1) == [("-",), ("+",)]
    assert branch_order(2) == [
        ("-", "-"),
        ("+", "-"),
        ("-", "+"),
        ("+", "+"),
    ]
    assert branch_order(3)[-1] == ("+", "+", "+")


def test_label_round_trips():
    for n in (1, 2, 3):
        for i, s in enumerate(branch_order(n)):
            assert decode_index(s) == i
            assert label_from_index(i, n) == s
            assert parse_label(format_label(s)) == s
    assert reverse_label(("+", "-")) == ("-", "+")


def test_conservation_and_ordering():
    rng = np.random.default_rng(20)
    for seed in range(6):
        q, k = [2, 3, 4][seed % 3], [2, 3][seed % 2]
        w = (random_mixed_channel if seed % 2 else random_pure_channel)(rng, q, k)
        minus, plus = minus_transform(w), plus_transform(w)
        Im, I, Ip = (
            minus.holevo_information(),
            w.holevo_information(),
            plus.holevo_information(),
        )
        assert Im + Ip == pytest.approx(2 * I, abs=1e-8)
        assert Im <= I + 1e-9 <= Ip + 2e-9


def test_useless_and_perfect_transforms():
    half = np.eye(2, dtype=complex) / 2
    useless = CqChannel(FiniteAbelianGroup([2]), [HybridState([(1.0, (), half)])] * 2)
    assert minus_transform(useless).holevo_information() == pytest.approx(0.0, abs=1e-10)
    assert plus_transform(useless).holevo_information() == pytest.approx(0.0, abs=1e-10)
    perfect = preset_channel("classical-symmetric", q=2, p=0.0)
    assert minus_transform(perfect).holevo_information() == pytest.approx(
        np.log(2), abs=1e-10
    )
    assert plus_transform(perfect).holevo_information() == pytest.approx(
        np.log(2), abs=1e-10
    )


def test_fd_plus_square_identity():
    rng = np.random.default_rng(21)
    for seed in range(5):
        q, k = [2, 3, 4][seed % 3], [2, 3][seed % 2]
        w = random_mixed_channel(rng, q, k)
        plus = plus_transform(w)
        for d in range(q):
            assert plus.fd(d) == pytest.approx(w.fd(d) ** 2, abs=1e-9)


def test_classical_transform_equivalence_through_hybrid_path():
    # the hybrid machinery on a diagonal channel must match the classical
    # polar transform of the probability tables exactly
    for q, p in [(2, 0.11), (3, 0.3)]:
        w = preset_channel("classical-symmetric", q=q, p=p)
        table = from_cq_channel(w).table
        add = lambda a, b: (a + b) % q
        minus = minus_transform(w)
        plus = plus_transform(w)
        minus_ref, plus_ref = (
            classical_minus(table, add, q),
            classical_plus(table, add, q),
        )
        assert minus.holevo_information() == pytest.approx(
            mutual_information_table(minus_ref), abs=1e-10
        )
        assert plus.holevo_information() == pytest.approx(
            mutual_information_table(plus_ref), abs=1e-10
        )
        for d in range(q):
            assert minus.fd(d) == pytest.approx(classical_fd(minus_ref, add, q, d), abs=1e-10)
            assert plus.fd(d) == pytest.approx(classical_fd(plus_ref, add, q, d), abs=1e-10)


def test_synthesize_examples():
    w = pure_overlap_channel(0.5)
    assert synthesize(w, ()).holevo_information() == pytest.approx(
        w.holevo_information(), abs=1e-12
    )
    wpp = synthesize(w, parse_label("++"))
    assert wpp.fd(1) == pytest.approx(w.fd(1) ** 4, abs=1e-9)
    minus, plus = minus_transform(w), plus_transform(w)
    assert minus.holevo_information() + plus.holevo_information() == pytest.approx(
        2 * w.holevo_information(), abs=1e-9
    )


def test_synthesize_capacity_error():
    w = pure_overlap_channel(0.5)
    with pytest.raises(CapacityError):
        synthesize(w, parse_label("-----"), ResourceCaps(dim_cap=8))


def test_scan_fixture_is_homomorphism_endpoint(z4_homomorphism_channel):
    records = polarization_scan(z4_homomorphism_channel, 2)
    target = Subgroup(FiniteAbelianGroup([4]), (0, 2))
    for r in records:
        assert abs(r.I - np.log(2)) <= 1e-9
        assert abs(r.fd[2] - 1.0) <= 1e-12
        assert abs(r.fd[1]) <= 1e-12
        assert abs(r.fd[3]) <= 1e-12
        assert r.best_H.indices == target.indices


def test_scan_useless_channel():
    half = np.eye(2, dtype=complex) / 2
    useless = CqChannel(FiniteAbelianGroup([2]), [HybridState([(1.0, (), half)])] * 2)
    for r in polarization_scan(useless, 3):
        assert abs(r.I) <= 1e-10


def test_scan_conservation():
    rng = np.random.default_rng(22)
    w = random_pure_channel(rng, 2, 2)
    records = polarization_scan(w, 3)
    assert scan_conservation_defect(records, w.holevo_information(), 3) <= 3e-8


def test_scan_trend_bsc():
    w = preset_channel("classical-symmetric", q=2, p=0.11)
    r3 = polarization_scan(w, 3)
    r6 = polarization_scan(w, 6)
    f3 = intermediate_fraction(r3, np.log(2), 0.05)
    f6 = intermediate_fraction(r6, np.log(2), 0.05)
    assert f6 < f3


def test_process_sample_martingale_and_submartingale():
    rng_seed = 31
    g = FiniteAbelianGroup([4])
    w = random_mixed_channel(np.random.default_rng(3), 4, 2)
    subs = enumerate_subgroups(g)
    paths = process_sample(w, 2, trials=3, seed=rng_seed, subgroups=subs)
    for path in paths:
        for step in range(2):
            im, ip = path.child_I[step]
            assert (im + ip) / 2 == pytest.approx(path.I[step], abs=1e-8)
            for H, (parent, minus, plus) in path.quot_child_I[step].items():
                assert (minus + plus) / 2 >= parent - 1e-8
    # determinism
    again = process_sample(w, 2, trials=3, seed=rng_seed, subgroups=subs)
    for a, b in zip(paths, again):
        assert a.signs == b.signs
        np.testing.assert_allclose(a.I, b.I, atol=0)


def test_all_plus_path_squares_fmax():
    w = pure_overlap_channel(0.7)
    t = w.f_max()
    ch = w
    for _ in range(3):
        ch = plus_transform(ch)
        t = t * t
        assert ch.f_max() == pytest.approx(t, abs=1e-9)


def test_fd_limit_set_closed_under_addition(z4_homomorphism_channel):
    # finite-n surrogate of the limit statement: where every F_d sits next to
    # {0,1}, the near-1 set must be a subgroup
    for w, n in [(z4_homomorphism_channel, 2)]:
        for r in polarization_scan(w, n):
            vals = r.fd
            if all(min(v, abs(1 - v)) < 0.05 for v in vals.values()):
                near_one = {d for d, v in vals.items() if v > 0.95}
                g = w.alphabet
                for a in near_one:
                    for b in near_one:
                        assert g.add_index(a, b) in near_one


def test_diagonal_auto_routing_matches_hybrid():
    w = preset_channel("classical-symmetric", q=2, p=0.11)
    auto = polarization_scan(w, 2)  # routed through the table engine
    hybrid = polarization_scan(w, 2, engine="hybrid")
    for a, b in zip(auto, hybrid):
        assert a.I == pytest.approx(b.I, abs=1e-10)
        assert a.fmax == pytest.approx(b.fmax, abs=1e-10)
        for H in a.quot_I:
            assert a.quot_I[H] == pytest.approx(b.quot_I[H], abs=1e-10)


def test_transform_with_input_dependent_weights():
    g = FiniteAbelianGroup([2])
    outs = [
        HybridState(
            [
                (0.7, "a", np.diag([1.0, 0.0]).astype(complex)),
                (0.3, "b", np.diag([0.5, 0.5]).astype(complex)),
            ]
        ),
        HybridState(
            [
                (0.2, "a", np.diag([0.0, 1.0]).astype(complex)),
                (0.8, "b", np.diag([0.5, 0.5]).astype(complex)),
            ]
        ),
    ]
    w = CqChannel(g, outs)
    minus, plus = minus_transform(w), plus_transform(w)
    assert minus.holevo_information() + plus.holevo_information() == pytest.approx(
        2 * w.holevo_information(), abs=1e-8
    )
    # dense flattening agrees too
    dense = w.flatten_dense()
    dm, dp = minus_transform(dense), plus_transform(dense)
    assert dm.holevo_information() == pytest.approx(minus.holevo_information(), abs=1e-8)
    assert dp.holevo_information() == pytest.approx(plus.holevo_information(), abs=1e-8)
