import numpy as np
import pytest

from cascadesim.errors import UnsupportedSourceError
from cascadesim.hilbert import (
    GROUND,
    SOURCE,
    DensityOperator,
    FockSpec,
    annihilation,
    coherent_state,
    embed,
    fock_state,
    number_operator,
    partial_trace,
    product_state,
    qubit_state,
)
from cascadesim.liouvillian import (
    CouplingConfig,
    Superoperator,
    SuperoperatorTerm,
    apply,
    build_L_ST,
    build_L_T,
    regroup,
)
from cascadesim.sources import (
    BirthDeathLaser,
    CoherentDrive,
    FreeDecayMixture,
    build_L_S,
    classical_paths,
    ring_paths,
    source_jump_channels,
    steady_amplitude,
)
from cascadesim.evolve import TimeGrid, evolve_master, expectation

SPEC = FockSpec(6)
CFG = CouplingConfig(1.0, 0.5, 0.5)


class TestModels:
    def test_mixture_weights_validated(self):
        with pytest.raises(ValueError):
            FreeDecayMixture(((1.0, 0.5), (2.0, 0.6)))
        with pytest.raises(ValueError):
            FreeDecayMixture(((1.0, -0.1), (2.0, 1.1)))

    def test_birth_death_validated(self):
        with pytest.raises(ValueError):
            BirthDeathLaser(-1.0, 1.0, 0.5, N0=1, n0=0)
        with pytest.raises(ValueError):
            BirthDeathLaser(1.0, 1.0, 0.5, N0=-1, n0=0)


class TestSourceGenerator:
    def test_free_decay_is_empty(self):
        assert build_L_S(FreeDecayMixture(((1.0, 1.0),)), SPEC).terms == []

    def test_birth_death_has_no_superoperator(self):
        with pytest.raises(UnsupportedSourceError):
            build_L_S(BirthDeathLaser(1.0, 1.0, 0.5, N0=1, n0=0), SPEC)

    def test_drive_ehrenfest_from_vacuum(self):
        # d<a>/dt = eps - (gamma_S/2)<a>; from vacuum the damping term vanishes
        eps = 0.4
        Lp_S, _, _ = regroup(build_L_S(CoherentDrive(eps), SPEC), CFG)
        rho0 = product_state(fock_state(0, SPEC), qubit_state(GROUND)).projector()
        a = embed(annihilation(SPEC), SOURCE, SPEC).mat
        d_a = expectation(apply(Lp_S, rho0), a)
        assert abs(d_a - eps) < 1e-12

    def test_steady_amplitude_is_ehrenfest_fixed_point(self):
        eps = 0.3 + 0.1j
        model = CoherentDrive(eps)
        a_ss = steady_amplitude(model, CFG)
        assert abs(eps - 0.5 * CFG.gamma_S * a_ss) < 1e-14
        assert abs(a_ss - 2 * eps / CFG.gamma_S) < 1e-14


class TestJumpChannels:
    BD = BirthDeathLaser(2.0, 1.0, 0.5, N0=3, n0=1)

    def test_only_birth_death_supported(self):
        with pytest.raises(UnsupportedSourceError):
            source_jump_channels(CoherentDrive(0.1), CFG, SPEC)

    def test_gain_jump_adds_photon(self):
        channels = {c.label: c for c in source_jump_channels(self.BD, CFG, SPEC)}
        gain = channels["gain"]
        assert gain.carrier_delta == -1
        psi = product_state(fock_state(2, SPEC), qubit_state(GROUND)).vec
        out = gain.operator @ psi
        expected = product_state(fock_state(3, SPEC), qubit_state(GROUND)).vec
        assert np.allclose(out / np.linalg.norm(out), expected)

    def test_gain_rate_from_fock(self):
        channels = {c.label: c for c in source_jump_channels(self.BD, CFG, SPEC)}
        g_op = channels["gain"].operator
        for n in range(SPEC.n_max):
            psi = product_state(fock_state(n, SPEC), qubit_state(GROUND)).vec
            v = g_op @ psi
            rate = self.BD.N0 * np.vdot(v, v).real
            assert abs(rate - self.BD.gain_per_carrier * self.BD.N0 * (n + 1)) < 1e-12

    def test_classical_channels(self):
        channels = {c.label: c for c in source_jump_channels(self.BD, CFG, SPEC)}
        assert channels["pump"].operator is None
        assert channels["pump"].rate == 2.0
        assert channels["pump"].carrier_delta == 1
        assert channels["nonlasing"].scales_with_carrier


class TestClassicalPaths:
    def test_free_decay_halving(self):
        model = FreeDecayMixture(((2.0, 1.0),))
        t = np.array([0.0, 2 * np.log(2.0)])
        (path,) = classical_paths(model, CouplingConfig(1.0, 0.5, 0.5), t)
        assert abs(path.alphas[-1] - 1.0) < 1e-12

    def test_drive_fixed_point(self):
        model = CoherentDrive(0.75)
        t = np.linspace(0, 5, 11)
        (path,) = classical_paths(model, CFG, t)
        assert np.max(np.abs(path.alphas - steady_amplitude(model, CFG))) < 1e-12

    def test_mixture_count_and_weights(self):
        amps = tuple((0.5 * np.exp(2j * np.pi * k / 5), 0.2) for k in range(5))
        paths = classical_paths(FreeDecayMixture(amps), CFG, np.linspace(0, 1, 5))
        assert len(paths) == 5
        assert all(abs(p.weight - 0.2) < 1e-14 for p in paths)

    def test_birth_death_unsupported(self):
        with pytest.raises(UnsupportedSourceError):
            classical_paths(BirthDeathLaser(1, 1, 1, 1, 1), CFG, np.linspace(0, 1, 3))


class TestRingPaths:
    def test_deterministic_given_seed(self):
        t = np.linspace(0, 2, 41)
        p1 = ring_paths(1.0, 0.3, 1.0, t, count=3, seed=9)
        p2 = ring_paths(1.0, 0.3, 1.0, t, count=3, seed=9)
        for a, b in zip(p1, p2):
            assert np.array_equal(a.alphas, b.alphas)

    def test_amplitude_is_deterministic_decay(self):
        t = np.linspace(0, 3, 61)
        for path in ring_paths(1.4, 0.5, 0.8, t, count=4, seed=2):
            assert np.max(np.abs(np.abs(path.alphas) - 1.4 * np.exp(-0.8 * t / 2))) < 1e-12

    def test_no_diffusion_keeps_phase(self):
        t = np.linspace(0, 1, 11)
        (path,) = ring_paths(1.0, 0.0, 1.0, t, count=1, seed=5)
        phases = np.angle(path.alphas)
        assert np.max(np.abs(phases - phases[0])) < 1e-12

    def test_phase_decoherence_rate(self):
        # ensemble mean of exp(i phi_t) has magnitude exp(-D t)
        D, t1 = 0.4, 2.0
        t = np.linspace(0, t1, 81)
        paths = ring_paths(1.0, D, 0.0, t, count=4000, seed=11)
        mean = np.mean([p.alphas[-1] / abs(p.alphas[-1]) * np.exp(-1j * np.angle(p.alphas[0]))
                        for p in paths])
        assert abs(abs(mean) - np.exp(-D * t1)) < 3.0 / np.sqrt(4000)


class TestCoherenceUnderMaster:
    def test_driven_source_stays_coherent(self):
        # decoupled from the target (gamma_Tf = 0), the source remains pure
        # coherent and <a> tracks the classical path
        cfg = CouplingConfig(1.0, 0.0, 0.5)
        spec = FockSpec(20)
        model = CoherentDrive(0.5)
        grid = TimeGrid(0.0, 4.0, 0.01)
        rho0 = DensityOperator(
            product_state(fock_state(0, spec), qubit_state(GROUND)).projector()
        )
        L = build_L_S(model, spec) + build_L_T(cfg, spec) + build_L_ST(cfg, spec)
        states = evolve_master(rho0, L, grid, store_every=50)
        (path,) = classical_paths(model, cfg, grid.times()[::50], alpha0=0.0)
        a = annihilation(spec).mat
        for rho, alpha in zip(states, path.alphas):
            rho_S = partial_trace(rho, SOURCE)
            purity = np.trace(rho_S.mat @ rho_S.mat).real
            assert purity > 1 - 1e-8
            assert abs(expectation(rho_S.mat, a) - alpha) < 1e-8


class TestPhaseDampingCrossCheck:
    def test_ring_ensemble_matches_dephasing_master(self):
        # Gaussian phase averaging of coherent projectors = number-basis
        # dephasing exp(-D t (m-n)^2) on top of amplitude decay
        r0, D, gamma_S, t1 = 1.0, 0.3, 1.0, 1.5
        spec = FockSpec(19)
        count = 2000
        t = np.linspace(0.0, t1, 31)
        paths = ring_paths(r0, D, gamma_S, t, count=count, seed=21)
        ensemble = np.zeros((spec.fock_dim, spec.fock_dim), dtype=complex)
        for p in paths:
            ensemble += p.weight * coherent_state(p.alphas[-1], spec).projector()

        a = annihilation(spec).mat
        n_op = number_operator(spec).mat
        eye = np.eye(spec.fock_dim, dtype=complex)
        terms = (
            [SuperoperatorTerm(a, a.conj().T, gamma_S),
             SuperoperatorTerm(a.conj().T @ a, eye, -gamma_S / 2),
             SuperoperatorTerm(eye, a.conj().T @ a, -gamma_S / 2)]
            + [SuperoperatorTerm(n_op, n_op, 2 * D),
               SuperoperatorTerm(n_op @ n_op, eye, -D),
               SuperoperatorTerm(eye, n_op @ n_op, -D)]
        )
        L = Superoperator(terms, spec.fock_dim)
        rho0 = np.zeros_like(ensemble)
        K = 64
        for k in range(K):
            rho0 += coherent_state(r0 * np.exp(2j * np.pi * k / K), spec).projector() / K
        states = evolve_master(DensityOperator(rho0, layout=SOURCE), L,
                               TimeGrid(0.0, t1, t1 / 300), store_every=300)
        from cascadesim.analysis import trace_distance

        td = trace_distance(DensityOperator(ensemble, layout=SOURCE), states[-1])
        assert td < 3.0 / np.sqrt(count)
