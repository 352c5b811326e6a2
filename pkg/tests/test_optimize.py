import math

import numpy as np
import pytest

from rbn import measures, optimize, states
from rbn.errors import InvalidArgumentError, NotPureError
from rbn.optimize import Bipartition, Grid, RandomSampling, e3, monogamy_witness, n2, n3, n_bipartition
from rbn.states import Setting, pauli_observable

LN2 = math.log(2)
COARSE = Grid(math.pi / 4)
Z = pauli_observable("z")


def H(*p):
    return -sum(x * math.log(x) for x in p if x > 0)


def bell_state():
    return states.DensityMatrix.from_vector([1, 0, 0, 1], (2, 2))


def test_pauli_tensor_roundtrip(rng):
    rho = states.random_density_matrix([2, 2, 2], rng)
    t = optimize.pauli_tensor(rho)
    rebuilt = np.einsum("mnl,mab,ncd,lef->acebdf", t, *(np.stack(states.PAULIS),) * 3).reshape(8, 8) / 8
    np.testing.assert_allclose(rebuilt, rho.matrix, atol=1e-14)


def test_pauli_tensor_rejects_qutrits():
    with pytest.raises(InvalidArgumentError):
        optimize.pauli_tensor(states.schmidt_pure_state([0.5, 0.3, 0.2]))


@pytest.mark.parametrize("target", [0, 1, 2])
def test_fast_kernel_matches_dense(rng, target):
    for _ in range(5):
        rho = states.random_density_matrix([2, 2, 2], rng, rank=int(rng.integers(1, 9)))
        th = np.arccos(rng.uniform(-1, 1, (15, 3)))
        ph = rng.uniform(0, 2 * math.pi, (15, 3))
        fast = optimize.eta_batch(rho, th, ph, target)
        for k in range(15):
            s = Setting.from_directions([states.BlochDirection(float(a), float(b)) for a, b in zip(th[k], ph[k])])
            assert fast[k] == pytest.approx(measures.entropy_terms(rho, s, target).eta, abs=1e-12)


def test_grid_sweep_matches_brute_force_enumeration(rng):
    # every setting of the pi/2 grid through the dense path
    rho = states.random_density_matrix([2, 2, 2], rng)
    grid = states.setting_grid(math.pi / 2, 3)
    s0 = rho.entropy()
    for cut in Bipartition:
        values = [measures.entropy_terms(rho, s, cut.value, s0).eta for s in grid]
        res = n_bipartition(rho, cut, Grid(math.pi / 2), workers=1)
        assert res.value == pytest.approx(max(values), abs=1e-12)
        assert res.evaluations == len(grid) == 1728
        first = next(i for i, v in enumerate(values) if v >= res.value - 1e-11)
        assert res.argmax_index == first


def test_two_site_grid_matches_brute_force(rng):
    rho = states.random_density_matrix([2, 2], rng)
    grid = states.setting_grid(math.pi / 4, 2)
    best = max(measures.contextual_nl(rho, s) for s in grid)
    assert n2(rho, COARSE).value == pytest.approx(best, abs=1e-12)


def test_argmax_reproduces_value(rng):
    for _ in range(5):
        rho = states.random_density_matrix([2, 2, 2], rng)
        for strategy in (COARSE, RandomSampling(2000, seed=5)):
            res = n3(rho, strategy)
            for cut, r in res.cuts.items():
                again = measures.contextual_nl_3(rho, cut.value, r.argmax_setting)
                assert again == pytest.approx(r.value, abs=1e-12)


def test_n2_examples():
    cc = states.cc_state([0.5, 0.5], Z, Z)
    assert n2(cc).value == pytest.approx(LN2, abs=1e-12)
    assert n2(bell_state()).value == pytest.approx(LN2, abs=1e-12)
    prod = states.random_density_matrix([2], np.random.default_rng(1)).tensor(
        states.random_density_matrix([2], np.random.default_rng(2)))
    assert n2(prod).value == pytest.approx(0, abs=1e-10)


def test_n2_requires_two_sites():
    with pytest.raises(InvalidArgumentError):
        n2(states.ghz_state())


def test_n_bipartition_ghz():
    res = n_bipartition(states.ghz_state(), Bipartition.A_BC)
    assert res.value == pytest.approx(LN2, abs=1e-12)
    assert res.argmax_setting[0].same_measurement(Z)


def test_n_bipartition_uncorrelated_cut(rng):
    rho = states.random_density_matrix([2], rng).tensor(states.random_density_matrix([2, 2], rng))
    assert n_bipartition(rho, Bipartition.A_BC, COARSE).value == pytest.approx(0, abs=1e-10)


def test_n_bipartition_reduces_to_n2(rng):
    ab = states.random_density_matrix([2, 2], rng)
    rho = ab.tensor(states.random_density_matrix([2], rng))
    assert n_bipartition(rho, Bipartition.A_BC, COARSE).value == pytest.approx(n2(ab, COARSE).value, abs=1e-10)


def test_n3_examples():
    assert n3(states.ghz_state()).value == pytest.approx(LN2, abs=1e-9)
    assert n3(states.schmidt_pure_state([0.7, 0.3])).value == pytest.approx(H(0.7, 0.3), abs=1e-9)
    assert n3(states.maximally_mixed([2, 2, 2])).value == pytest.approx(0, abs=1e-12)


def test_n3_is_min_over_cuts(rng):
    rho = states.random_density_matrix([2, 2], rng).tensor(states.random_density_matrix([2], rng))
    res = n3(rho, COARSE)
    assert res.value == min(r.value for r in res.cuts.values())
    assert res.minimizing_cut == Bipartition.C_AB
    assert res.value == pytest.approx(0, abs=1e-10)


def test_symmetric_shortcut_agrees():
    rho = states.noisy_state("w", 0.2)
    full = n3(rho, COARSE)
    short = n3(rho, COARSE, symmetric=True)
    assert short.value == pytest.approx(full.value, abs=1e-12)
    for cut in Bipartition:
        again = measures.contextual_nl_3(rho, cut.value, short.cuts[cut].argmax_setting)
        assert again == pytest.approx(short.value, abs=1e-12)


def test_symmetric_shortcut_rejects_asymmetric_state(rng):
    with pytest.raises(InvalidArgumentError):
        n3(states.random_density_matrix([2, 2, 2], rng), COARSE, symmetric=True)


def test_e3_examples():
    assert e3(states.ghz_state()) == pytest.approx(LN2, abs=1e-12)
    # oracle: Tr_BC |W><W| = diag(2/3, 1/3)
    assert e3(states.w_state()) == pytest.approx(H(1 / 3, 2 / 3), abs=1e-12)
    assert e3(states.schmidt_pure_state([1, 0])) == pytest.approx(0, abs=1e-12)


def test_e3_rejects_mixed():
    with pytest.raises(NotPureError):
        e3(states.noisy_state("ghz", 0.1))


@pytest.mark.parametrize("p", [[0.5, 0.5], [0.8, 0.2]])
def test_ccc_conjugate_context(p):
    x = pauli_observable("x")
    ccc = states.ccc_state(p, (Z, Z, Z))
    assert measures.contextual_nl_3(ccc, 0, Setting((x, x, x))) == pytest.approx(H(*p), abs=1e-12)
    assert n3(ccc, COARSE).value >= H(*p) - 1e-12


def test_determinism_across_worker_counts():
    rho = states.noisy_state("w", 0.3)
    runs = [n3(rho, Grid(math.pi / 8), workers=w) for w in (1, 3, 8)]
    for r in runs[1:]:
        for cut in Bipartition:
            assert r.cuts[cut].value == runs[0].cuts[cut].value
            assert r.cuts[cut].argmax_index == runs[0].cuts[cut].argmax_index
    rand = [n3(rho, RandomSampling(40_000, seed=9), workers=w).value for w in (1, 4)]
    assert rand[0] == rand[1]


def test_monotone_power_commutation(rng):
    grid = states.setting_grid(math.pi / 2, 3)
    th = np.array([[grid.thetas[k] for k in np.unravel_index(i, (12,) * 3)] for i in range(len(grid))])
    ph = np.array([[grid.phis[k] for k in np.unravel_index(i, (12,) * 3)] for i in range(len(grid))])
    for _ in range(20):
        rho = states.random_density_matrix([2, 2, 2], rng)
        eta = np.clip(optimize.eta_batch(rho, th, ph), 0, None)
        for alpha in (0.5, 2.1641, 3.8372):
            assert np.max(eta ** alpha) == pytest.approx(np.max(eta) ** alpha, abs=1e-12)


def test_grid_refinement_monotone(rng):
    for _ in range(5):
        rho = states.random_density_matrix([2, 2, 2], rng)
        coarse = n3(rho, Grid(math.pi / 4)).value
        fine = n3(rho, Grid(math.pi / 8)).value
        assert coarse <= fine + optimize.TIE_TOL


def test_dedupe_grid_gives_same_maximum(rng):
    rho = states.random_density_matrix([2, 2, 2], rng)
    faithful = n3(rho, Grid(math.pi / 4)).value
    deduped = n3(rho, Grid(math.pi / 4, paper_faithful=False)).value
    assert deduped == pytest.approx(faithful, abs=1e-12)


def test_random_strategy_evaluation_count():
    res = n_bipartition(states.w_state(), Bipartition.B_AC, RandomSampling(5000, seed=1))
    assert res.evaluations == 5000
    assert 0 < res.value <= H(1 / 3, 2 / 3) + 1e-12


def test_monogamy_witness_ghz():
    for alpha in (0.5, 1.0, 2.0):
        assert monogamy_witness(states.ghz_state(), alpha) == pytest.approx(-LN2 ** alpha, abs=1e-9)


def test_monogamy_witness_rejects_nonpositive_alpha():
    with pytest.raises(InvalidArgumentError):
        monogamy_witness(states.ghz_state(), 0.0)


def test_monogamy_terms_vectorize():
    terms = optimize.monogamy_terms(states.w_state(), symmetric=True)
    alphas = np.array([1.0, 2.1641, 3.8372])
    vec = terms.witness(alphas)
    assert vec.shape == (3,)
    assert vec[0] < 0
    assert vec[1] == pytest.approx(0, abs=1e-3)
    assert vec[2] > 0.07
    scalar = terms.witness(2.0)
    assert isinstance(scalar, float)
    assert scalar == pytest.approx(terms.n3 ** 2 - terms.n2_ab ** 2 - terms.n2_ac ** 2, abs=1e-15)


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("RBN_WORKERS", "3")
    assert optimize.default_workers() == 3
