import csv
import io

import numpy as np
import pytest

from e91rate.errors import DomainError
from e91rate.keyrate import joint_distribution, key_rate, optimal_rate_werner
from e91rate.quantum import bell_phi_plus, bloch_basis, werner_from_fidelity
from e91rate.strategy import (
    ASYMMETRIC,
    BASIS_A1,
    BASIS_A2,
    BASIS_B1,
    BASIS_B2,
    CHSH_BASES,
    S_CHSH,
    S_PROC,
    SYMMETRIC,
    BasisSchedule,
    Region,
    StrategyKind,
    StrategyTag,
    asymmetric_optimal_rate,
    asymmetric_schedule,
    basis_marginals,
    best_symmetric_rate,
    boundary_fidelity,
    classify,
    probability_table,
    processing_rate,
    region_map,
    suboptimal_pair_rate,
    symmetric_rate,
    symmetric_rate_closed_form,
    symmetric_schedule,
    wasted_pair_rate,
)


class TestProbabilityTable:
    def test_example_gamma_01(self):
        t = probability_table(0.01, 0.1)
        pa, pb = basis_marginals(0.01, 0.1)
        for i, j in S_CHSH:
            assert t[i - 1, j - 1] == pytest.approx(0.01, abs=1e-15)
        assert pa[2] == pytest.approx(0.8) and pb[2] == pytest.approx(0.8)
        assert t[2, 2] == pytest.approx(0.64, abs=1e-12)

    def test_gamma_at_lower_edge(self):
        eta = 0.03
        t = probability_table(eta, 2 * eta)
        np.testing.assert_allclose(t[2, :2], 0, atol=1e-15)
        np.testing.assert_allclose(t[:2, 2], 0.5 - 2 * eta, atol=1e-15)
        assert t[2, 2] == pytest.approx(0, abs=1e-15)

    def test_gamma_sqrt_eta(self):
        t = probability_table(0.04, 0.2)
        pa, pb = basis_marginals(0.04, 0.2)
        np.testing.assert_allclose(pa[:2], 0.2)
        np.testing.assert_allclose(pb[:2], 0.2)
        assert t[2, 2] == pytest.approx(0.36, abs=1e-12)

    def test_product_and_sums(self, rng):
        for _ in range(500):
            eta = rng.uniform(1e-4, 0.2499)
            gamma = rng.uniform(2 * eta, 0.5)
            t = probability_table(eta, gamma)
            pa, pb = basis_marginals(eta, gamma)
            np.testing.assert_allclose(t, np.outer(pa, pb), atol=1e-12)
            np.testing.assert_allclose(t.sum(axis=1), pa, atol=1e-10)
            np.testing.assert_allclose(t.sum(axis=0), pb, atol=1e-10)
            assert t.sum() == pytest.approx(1, abs=1e-10)
            assert t.min() >= -1e-12

    @pytest.mark.parametrize("eta, gamma", [(0, 0.1), (0.25, 0.5), (0.05, 0.09), (0.05, 0.51)])
    def test_domain(self, eta, gamma):
        with pytest.raises(DomainError):
            probability_table(eta, gamma)

    def test_index_sets(self):
        assert len(S_PROC) == 5 and len(S_CHSH) == 4
        assert all(3 in c for c in S_PROC)


class TestProcessingRate:
    def test_phi_plus_shared_a1(self):
        eta = 0.04
        br = processing_rate(bell_phi_plus(), symmetric_schedule(eta, BASIS_A1))
        expected = sum(
            br.cells[c].probability * max(0.0, key_rate(bell_phi_plus(), a, b))
            for c, a, b in [
                ((1, 3), BASIS_A1, BASIS_A1),
                ((2, 3), BASIS_A2, BASIS_A1),
                ((3, 1), BASIS_A1, BASIS_B1),
                ((3, 2), BASIS_A1, BASIS_B2),
                ((3, 3), BASIS_A1, BASIS_A1),
            ]
        )
        assert br.total == pytest.approx(expected, abs=1e-12)
        assert br.total == pytest.approx(symmetric_rate_closed_form(1.0, eta), abs=1e-12)
        assert br.total == pytest.approx(0.5757897511937145, abs=1e-12)

    def test_reconstruction(self, rng):
        for _ in range(20):
            F = rng.uniform(0.25, 1)
            eta = rng.uniform(0.001, 0.2)
            sched = asymmetric_schedule(eta, rng.uniform(2 * eta, 0.5))
            br = processing_rate(werner_from_fidelity(F), sched, F)
            assert set(br.cells) == set(S_PROC)
            assert br.total == sum(c.contribution for c in br.cells.values())
            for c in br.cells.values():
                assert c.rate >= 0
                assert c.contribution == c.probability * c.rate

    def test_below_threshold_is_zero(self, rng):
        for F in np.linspace(0.25, 0.81, 15):
            for sched in (asymmetric_schedule(0.03), symmetric_schedule(0.03, BASIS_B2)):
                assert processing_rate(werner_from_fidelity(F), sched).total == 0

    def test_small_eta_limit(self):
        F = 0.93
        totals = [processing_rate(werner_from_fidelity(F), asymmetric_schedule(e)).total for e in (1e-3, 1e-5, 1e-7)]
        assert totals[-1] == pytest.approx(optimal_rate_werner(F) / 2, abs=1e-6)
        assert totals[0] < totals[1] < totals[2]

    def test_gamma_optimum_on_boundary(self):
        for F in (0.85, 0.93, 1.0):
            rho = werner_from_fidelity(F)
            for eta in (0.01, 0.05, 0.1):
                gammas = np.linspace(2 * eta, 0.5, 200)
                totals = np.array([processing_rate(rho, asymmetric_schedule(eta, g)).total for g in gammas])
                best = int(np.argmax(totals))
                assert best in (0, len(gammas) - 1)
                assert totals.max() == pytest.approx((0.5 - 2 * eta) * optimal_rate_werner(F), abs=1e-9)


class TestAsymmetric:
    def test_pure(self):
        assert asymmetric_optimal_rate(1.0, 0.05) == pytest.approx(0.4, abs=1e-12)

    def test_threshold(self):
        for eta in (0.01, 0.1, 0.2):
            assert asymmetric_optimal_rate(0.8107, eta) == pytest.approx(0, abs=1e-3)

    def test_matches_schedule(self):
        expected = 0.48 * optimal_rate_werner(0.95)
        assert asymmetric_optimal_rate(0.95, 0.01) == pytest.approx(expected, abs=1e-12)
        assert asymmetric_optimal_rate(0.95, 0.01) == pytest.approx(0.3044903605670333, abs=1e-12)
        br = processing_rate(werner_from_fidelity(0.95), asymmetric_schedule(0.01))
        assert br.total == pytest.approx(expected, abs=1e-12)

    def test_eta_domain(self):
        with pytest.raises(DomainError):
            asymmetric_optimal_rate(0.9, 0.25)


class TestSymmetric:
    def test_pure_eta_004(self):
        # optimal cells weigh 1 - 3 sqrt(eta) + 2 eta; cross-party CHSH cells add (2 sqrt(eta) - 4 eta) r_sub
        r_sub = suboptimal_pair_rate(1.0, 1, 1)
        assert symmetric_rate(1.0, 0.04, BASIS_A1) == pytest.approx(0.48 + 0.24 * r_sub, abs=1e-12)
        assert symmetric_rate(1.0, 0.04, BASIS_A1) == pytest.approx(0.5757897511937145, abs=1e-12)

    def test_all_shared_bases_agree_on_werner(self, rng):
        for _ in range(10):
            F, eta = rng.uniform(0.82, 1), rng.uniform(0.005, 0.2)
            vals = [symmetric_rate(F, eta, b) for b in CHSH_BASES.values()]
            np.testing.assert_allclose(vals, vals[0], atol=1e-12)
            assert best_symmetric_rate(F, eta)[0] == pytest.approx(symmetric_rate_closed_form(F, eta), abs=1e-12)

    def test_below_threshold(self):
        for F in (0.5, 0.8, 0.81):
            assert best_symmetric_rate(F, 0.03)[0] == 0

    def test_boundary_agreement(self):
        F_bnd = boundary_fidelity()
        for F in np.linspace(0.25, F_bnd, 60):
            assert best_symmetric_rate(F, 0.0625)[0] == pytest.approx(asymmetric_optimal_rate(F, 0.0625), abs=1e-10)
        for F in np.linspace(F_bnd + 1e-3, 1, 20):
            assert best_symmetric_rate(F, 0.0625)[0] > asymmetric_optimal_rate(F, 0.0625)

    def test_rejects_foreign_basis(self):
        with pytest.raises(DomainError):
            symmetric_rate(0.9, 0.04, bloch_basis(0.3, 1.1))


class TestSuboptimalAndWasted:
    def test_suboptimal_pure(self):
        r = suboptimal_pair_rate(1.0, 1, 1)
        assert r < 0.5
        assert r == pytest.approx(0.3991239633071439, abs=1e-12)

    def test_suboptimal_all_pairs_equal(self):
        for F in (0.6, 0.9, 1.0):
            vals = [suboptimal_pair_rate(F, i, j) for i in (1, 2) for j in (1, 2)]
            np.testing.assert_allclose(vals, vals[0], atol=1e-12)

    def test_boundary_root(self):
        assert boundary_fidelity() == pytest.approx(0.895, abs=5e-3)
        assert boundary_fidelity() == pytest.approx(0.8946463377644, abs=1e-10)

    def test_suboptimal_negative_far_below(self):
        assert suboptimal_pair_rate(0.5, 2, 1) < 0

    def test_half_bound(self):
        for F in np.linspace(0.25, 1, 1000):
            assert 0.5 * max(0.0, optimal_rate_werner(F)) >= max(0.0, suboptimal_pair_rate(F, 1, 2))

    @pytest.mark.parametrize("side", ["A", "B"])
    def test_wasted_never_positive(self, side):
        for F in np.linspace(0.25, 1, 40):
            assert wasted_pair_rate(F, 1, 2, side) <= 1e-10
            assert wasted_pair_rate(F, 2, 1, side) <= 1e-10

    def test_wasted_pure_a(self):
        assert wasted_pair_rate(1.0, 1, 2, "A") <= 0

    def test_wasted_b_side_uniform(self):
        for F in np.linspace(0.25, 1, 25):
            p = joint_distribution(werner_from_fidelity(F), BASIS_B1, BASIS_B2).p
            np.testing.assert_allclose(p, 0.25, atol=1e-12)

    def test_wasted_needs_distinct(self):
        with pytest.raises(DomainError):
            wasted_pair_rate(0.9, 1, 1, "A")


class TestStrategyKind:
    def test_parse(self):
        assert StrategyKind.parse("asym") is ASYMMETRIC
        assert StrategyKind.parse("symmetric") is SYMMETRIC
        with pytest.raises(DomainError):
            StrategyKind.parse("greedy")

    def test_custom_requires_schedule(self):
        with pytest.raises(DomainError):
            StrategyKind(StrategyTag.CUSTOM)
        with pytest.raises(DomainError):
            StrategyKind(StrategyTag.SYMMETRIC, asymmetric_schedule(0.01))

    def test_custom_matches_builtin(self):
        custom = StrategyKind(StrategyTag.CUSTOM, asymmetric_schedule(0.01))
        for F in (0.85, 0.95):
            assert custom.rate(F, 0.01) == pytest.approx(ASYMMETRIC.rate(F, 0.01), abs=1e-12)
            # gamma stays at the schedule's value when eta changes
            direct = processing_rate(werner_from_fidelity(F), BasisSchedule(0.005, 0.02, BASIS_B1, BASIS_A1))
            assert custom.rate(F, 0.005) == pytest.approx(direct.total, abs=1e-15)
        with pytest.raises(DomainError):
            custom.rate(0.9, 0.02)

    def test_symmetric_kind(self):
        assert SYMMETRIC.rate(0.95, 0.02) == pytest.approx(best_symmetric_rate(0.95, 0.02)[0], abs=1e-12)


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestRegionMap:
    def test_classify(self):
        assert classify(0, 0) is Region.NOKEY
        assert classify(0.1, 0.1 + 1e-13) is Region.TIE
        assert classify(0.2, 0.1) is Region.ASYM
        assert classify(0.1, 0.2) is Region.SYM

    def test_examples(self):
        m = region_map((0.05, 0.07), (0.85, 0.85), (2, 1))
        assert m.labels[0, 0] is Region.SYM
        assert m.labels[1, 0] is Region.ASYM
        m = region_map((0.01, 0.2), (0.8, 0.8), (9, 1))
        assert all(lab is Region.NOKEY for lab in m.labels.ravel())

    def test_eta_007_sift_weights(self):
        eta = 0.07
        s = np.sqrt(eta)
        assert 1 - 3 * s + 2 * eta < 0.5 - 2 * eta
        m = region_map((eta, eta), (0.85, 0.85), 1)
        assert m.sym[0, 0] == pytest.approx((1 - 3 * s + 2 * eta) * optimal_rate_werner(0.85), abs=1e-12)

    def test_csv_format(self):
        text = region_map((0.01, 0.1), (0.8, 1.0), 3).to_csv()
        lines = text.splitlines()
        assert lines[0] == "eta,F,asym_rate,sym_rate,label"
        rows = parse_csv(text)
        assert len(rows) == 9
        # eta-major order
        assert [r["eta"] for r in rows[:3]] == ["0.01"] * 3
        assert [r["F"] for r in rows[:3]] == ["0.8", "0.9", "1"]
        assert {r["label"] for r in rows} <= {"asym", "sym", "tie", "nokey"}

    def test_single_step(self):
        rows = parse_csv(region_map((0.03, 0.1), (0.9, 1.0), 1).to_csv())
        assert len(rows) == 1 and rows[0]["eta"] == "0.03"

    def test_matches_pointwise(self):
        m = region_map((0.005, 0.12), (0.75, 1.0), 7)
        for a, eta in enumerate(m.etas):
            for b, F in enumerate(m.fidelities):
                assert m.asym[a, b] == pytest.approx(asymmetric_optimal_rate(F, eta), abs=1e-12)
                assert m.sym[a, b] == pytest.approx(best_symmetric_rate(F, eta)[0], abs=1e-12)

    def test_boundary_bends_above_f_bnd(self):
        etas = np.linspace(0.05, 0.2, 301)
        Fs = np.linspace(boundary_fidelity() + 1e-3, 1.0, 30)
        m = region_map((etas[0], etas[-1]), (Fs[0], Fs[-1]), (301, 30))
        edges = []
        for b in range(len(Fs)):
            col = [lab for lab in m.labels[:, b]]
            edges.append(next(a for a, lab in enumerate(col) if lab is Region.ASYM))
        assert all(y >= x for x, y in zip(edges, edges[1:]))
        assert etas[edges[0]] > 0.0625 and edges[-1] > edges[0]

    def test_domain(self):
        with pytest.raises(DomainError):
            region_map((0.0, 0.1), (0.8, 1.0), 3)
        with pytest.raises(DomainError):
            region_map((0.01, 0.1), (0.8, 1.0), 0)
