import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ne_uncertainty import bounds, entanglement, fock, gaussian, measures, states
from ne_uncertainty.errors import DomainError, EntropyUndefined

from conftest import random_density
from corpus import loss_channel, random_gaussian_unitary, single_mode_corpus


@pytest.fixture(scope="module")
def corpus():
    return single_mode_corpus()


@pytest.fixture(scope="module")
def measured(corpus):
    return [(e, measures.measure_set(e.state)) for e in corpus]


def rand_state(seed, d, rank=None):
    return fock.DensityMatrix(random_density(np.random.default_rng(seed), d, rank))


class TestPurity:
    def test_pure(self):
        assert measures.purity(states.odd_cat(1.0, 30)) == pytest.approx(1, abs=1e-10)
        assert measures.purity(states.odd_cat(1.0, 30).density()) == pytest.approx(1, abs=1e-10)

    def test_thermal(self):
        assert measures.purity(fock.thermal_state(1, 60, 1e-15)) == pytest.approx(1 / 3, abs=1e-10)

    def test_transposed_two_mode_can_exceed_one(self):
        # a transposed covariance state of the coupled family, pushed through
        # the normal-form transformation, can have purity above one
        rho = states.cat_thermal_tms(1.0, 0.0, 0.5, 16, trunc_tol=1e-4)
        m = entanglement.pt_covariance(gaussian.moments_of(rho, 1e-4))
        assert gaussian.symplectic_eigenvalues(m)[1] < 0.5
        sigma, _ = entanglement.transformed_mode_b(rho, m)
        assert measures.purity(sigma) > 1


class TestEntropy:
    def test_pure(self):
        assert measures.von_neumann_entropy(states.pacs(0.4, 30).density()) == pytest.approx(0, abs=1e-9)

    def test_thermal(self):
        s = measures.von_neumann_entropy(fock.thermal_state(1, 60, 1e-15))
        assert s == pytest.approx(1.386294, abs=1e-6)

    def test_squeezed_thermal(self):
        rho = states.squeezed_thermal(0.5, 0.5, 60)
        assert measures.von_neumann_entropy(rho) == pytest.approx(bounds.h(1.0), abs=1e-6)
        assert bounds.h(1.0) == pytest.approx(0.954771, abs=1e-6)

    def test_refuses_transposed(self):
        rho = fock.partial_transpose_B(fock.tensor(fock.thermal_state(0.1, 4, 1e-3), fock.vacuum(4).density()))
        with pytest.raises(EntropyUndefined):
            measures.von_neumann_entropy(rho)


class TestFidelity:
    def test_self(self):
        rho = rand_state(1, 6)
        assert measures.uhlmann_fidelity(rho, rho) == pytest.approx(1, abs=1e-10)

    def test_vacuum_coherent(self):
        f = measures.uhlmann_fidelity(fock.vacuum(40).density(), fock.coherent_state(1, 40).density())
        assert f == pytest.approx(math.exp(-0.5), abs=1e-8)

    def test_pure_shortcut_agrees(self):
        a, b = fock.vacuum(40), fock.coherent_state(1, 40)
        assert measures.uhlmann_fidelity(a, b) == pytest.approx(math.exp(-0.5), abs=1e-8)

    @given(st.integers(0, 10_000))
    def test_multiplicative(self, seed):
        rng = np.random.default_rng(seed)
        r1, s1, r2, s2 = (fock.DensityMatrix(random_density(rng, 3)) for _ in range(4))
        lhs = measures.uhlmann_fidelity(fock.tensor(r1, r2), fock.tensor(s1, s2))
        rhs = measures.uhlmann_fidelity(r1, s1) * measures.uhlmann_fidelity(r2, s2)
        assert lhs == pytest.approx(rhs, abs=1e-7)

    def test_reference_matrix_sqrt_route(self):
        rho, sigma = rand_state(2, 5), rand_state(3, 5, rank=2)
        sr = fock.matrix_sqrt_psd(rho.mat)
        direct = np.trace(fock.matrix_sqrt_psd(sr @ sigma.mat @ sr)).real
        assert measures.uhlmann_fidelity(rho, sigma) == pytest.approx(direct, abs=1e-8)


class TestSuperfidelity:
    def test_self(self):
        rho = rand_state(4, 6)
        assert measures.superfidelity(rho, rho) == pytest.approx(1, abs=1e-12)

    def test_upper_bounds_fidelity(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            r = fock.DensityMatrix(random_density(rng, 12, rank=int(rng.integers(1, 13))))
            s = fock.DensityMatrix(random_density(rng, 12, rank=int(rng.integers(1, 13))))
            assert measures.superfidelity(r, s) >= measures.uhlmann_fidelity(r, s) - 1e-9

    def test_pure_pair(self):
        a, b = states.odd_cat(0.7, 30), fock.coherent_state(0.4, 30)
        g = measures.superfidelity(a.density(), b.density())
        assert g**2 == pytest.approx(abs(np.vdot(a.amps, b.amps)) ** 2, abs=1e-12)

    def test_negative_argument_tagged(self):
        m = np.diag([1.5, -0.5]).astype(complex)
        bad = fock.DensityMatrix(m, maybe_nonpositive=True)
        with pytest.raises(measures.GSquaredNegative):
            measures.superfidelity(bad, fock.vacuum(2).density())


class TestRenyi:
    def test_self_zero(self):
        rho = rand_state(5, 5)
        for a in (0.5, 0.7, 1.0, 1.5, 2.0):
            assert measures.renyi_relative_entropy(rho, rho, a) == pytest.approx(0, abs=1e-9)

    @given(st.integers(0, 10_000))
    def test_half_is_fidelity(self, seed):
        rng = np.random.default_rng(seed)
        r, s = (fock.DensityMatrix(random_density(rng, 6)) for _ in range(2))
        want = -2 * math.log(measures.uhlmann_fidelity(r, s))
        assert measures.renyi_relative_entropy(r, s, 0.5) == pytest.approx(want, abs=1e-8)

    @given(st.integers(0, 10_000))
    def test_monotone_in_order(self, seed):
        rng = np.random.default_rng(seed)
        r, s = (fock.DensityMatrix(random_density(rng, 10)) for _ in range(2))
        vals = [measures.renyi_relative_entropy(r, s, a) for a in (0.5, 0.7, 1.0, 1.5)]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_support_violation_infinite(self):
        r = fock.DensityMatrix(np.diag([0.5, 0.5]).astype(complex))
        s = fock.vacuum(2).density()
        assert measures.renyi_relative_entropy(r, s, 1.0) == math.inf
        assert measures.renyi_relative_entropy(r, s, 1.5) == math.inf
        # below order one the trace formula stays finite
        assert math.isfinite(measures.renyi_relative_entropy(r, s, 0.5))

    def test_rejects_low_order(self):
        rho = rand_state(6, 3)
        with pytest.raises(DomainError):
            measures.renyi_relative_entropy(rho, rho, 0.4)


class TestNonGaussianity:
    @pytest.mark.parametrize("build", [
        lambda: fock.vacuum(30),
        lambda: fock.coherent_state(0.8j, 40),
        lambda: states.squeezed_thermal(0.4, 0.3, 60, alpha=0.5),
    ])
    def test_gaussian_zero(self, build):
        ms = measures.measure_set(build())
        assert ms.ng_fidelity < 1e-6 and abs(ms.ng_super) < 1e-6
        assert ms.gaussianity == pytest.approx(1, abs=1e-6)

    @pytest.mark.parametrize("n", range(6))
    def test_number_states(self, n):
        assert measures.non_gaussianity(fock.number_state(n, 60)) == pytest.approx(bounds.h(n + 0.5), abs=1e-6)

    def test_number_state_independent_route(self):
        # fidelity of |n> with the thermal state of mean n is sqrt(p_n)
        n = 3
        p = n**n / (n + 1) ** (n + 1)
        assert measures.non_gaussianity(fock.number_state(n, 60)) == pytest.approx(-math.log(p), abs=1e-6)

    def test_even_cat_unit_gaussianity_not_gaussian(self):
        psi = states.even_cat(1.57, 40)
        ms = measures.measure_set(psi)
        assert ms.gaussianity == pytest.approx(1, abs=0.02)
        assert ms.ng_fidelity > 0.1

    def test_hierarchy_on_corpus(self, measured):
        for e, ms in measured:
            assert ms.ng_fidelity >= ms.ng_super - 1e-9, e.label
            assert ms.entropy >= -math.log(ms.purity) - 1e-9, e.label


# properties N1 to N5


def test_n1_faithful_on_corpus(measured):
    for e, ms in measured:
        n = ms.ng_fidelity
        assert n >= 0
        assert (n <= 1e-6) == e.gaussian, (e.label, n)


def test_n2_gaussian_unitary_invariance(corpus):
    rng = np.random.default_rng(2)
    picked = [corpus[i] for i in rng.choice(len(corpus), 20, replace=False)]
    for e in picked:
        d = e.state.cutoff + 40
        rho = fock.embed(fock.as_density(e.state), d)
        u = random_gaussian_unitary(rng, d)
        moved = fock.apply(u, rho)
        assert fock.check_truncation(moved).passes(1e-9), e.label
        diff = measures.non_gaussianity(moved) - measures.non_gaussianity(e.state)
        assert abs(diff) <= 1e-6, (e.label, diff)


LOW = [
    lambda d: states.even_cat(0.5, d),
    lambda d: states.odd_cat(0.4, d),
    lambda d: states.pacs(0.2, d),
    lambda d: fock.DensityMatrix(np.diag([0.9, 0.1] + [0.0] * (d - 2)).astype(complex)),
    lambda d: fock.coherent_state(0.2 + 0.1j, d),
]


@pytest.mark.parametrize("i,j", [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
def test_n3_additive(i, j):
    d = 12
    a, b = fock.as_density(LOW[i](d)), fock.as_density(LOW[j](d))
    ab = fock.tensor(a, b)
    ref = measures.reference_of(ab, max_cutoff=24)
    total = measures.non_gaussianity(ab, ref)
    assert total == pytest.approx(measures.non_gaussianity(a) + measures.non_gaussianity(b), abs=1e-6)


@pytest.mark.parametrize("seed", range(6))
def test_n4_partial_trace(seed):
    d = 10
    rng = np.random.default_rng(seed)
    levels = 3
    g = rng.normal(size=(levels**2, 4)) + 1j * rng.normal(size=(levels**2, 4))
    small = g @ g.conj().T
    big = np.zeros((d, d, d, d), dtype=complex)
    big[:levels, :levels, :levels, :levels] = small.reshape(levels, levels, levels, levels)
    rho = fock.DensityMatrix(big.reshape(d * d, d * d) / np.trace(small).real, modes=2)
    ref = measures.reference_of(rho, max_cutoff=24)
    n_ab = measures.non_gaussianity(rho, ref)
    n_a = measures.non_gaussianity(fock.partial_trace(rho, "A"))
    assert n_ab >= n_a - 1e-7 - ref.leakage


@pytest.mark.parametrize("eta", [0.3, 0.6, 0.9])
def test_n5_loss_channel(corpus, eta):
    rng = np.random.default_rng(5)
    # the channel acts on d*d dimensions, so keep to the smaller states
    small = [e for e in corpus if e.state.cutoff <= 24]
    for idx in rng.choice(len(small), 8, replace=False):
        e = small[idx]
        rho = fock.as_density(e.state)
        out = loss_channel(rho, eta)
        assert measures.non_gaussianity(rho) >= measures.non_gaussianity(out) - 1e-7, e.label
