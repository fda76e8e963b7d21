"""Time stepping, eigenproblems, variational solves, refinement, scale splits."""

import numpy as np
import pytest

from wigner.assembly import (
    AssembledOperator,
    OperatorTerm,
    PhaseSpaceBasis,
    assemble_evolution,
    assemble_stationary_cnumber,
    assemble_stationary_pair,
)
from wigner.basis import WaveletBasis, daubechies_filter
from wigner.errors import (
    AbortedEvolutionError,
    ConfigurationError,
    ContractError,
)
from wigner.model import ModelParams, parse_potential
from wigner.solve import (
    CoefficientField,
    EvolutionConfig,
    estimated_spectral_radius,
    evolve,
    moyal_eigen,
    reconstruct_by_scale,
    refine_until,
    stationary_eigen,
    variational_solve,
)

PARAMS = ModelParams()


def _field(ps, f):
    return CoefficientField(ps=ps, coeffs=ps.project(f))


# ---------------------------------------------------------------------------
# coefficient fields and configs
# ---------------------------------------------------------------------------

def test_field_validation(ps6):
    with pytest.raises(ContractError):
        CoefficientField(ps=ps6, coeffs=np.zeros(3))
    bad = np.zeros(ps6.dim)
    bad[0] = np.nan
    with pytest.raises(ContractError):
        CoefficientField(ps=ps6, coeffs=bad)


def test_evolution_config_validation():
    with pytest.raises(ConfigurationError):
        EvolutionConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ConfigurationError):
        EvolutionConfig(dt=0.1, t_end=-1.0)
    with pytest.raises(ConfigurationError):
        EvolutionConfig(dt=0.1, t_end=1.0, scheme="euler")
    with pytest.raises(ConfigurationError):
        EvolutionConfig(dt=0.1, t_end=1.0, store_every=0)


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

def test_evolve_zero_generator_is_identity(ps6, gaussian_field6):
    Z = AssembledOperator(ps=ps6, terms=[])
    traj = evolve(gaussian_field6, Z, EvolutionConfig(dt=0.1, t_end=0.5))
    assert traj[-1].time == pytest.approx(0.5)
    np.testing.assert_allclose(traj[-1].coeffs, gaussian_field6.coeffs,
                               atol=1e-13)


def test_evolve_linearity(ps6, gaussian_field6):
    L = assemble_evolution(ps6, parse_potential("0.5*q^2"), PARAMS)
    cfg = EvolutionConfig(dt=0.05, t_end=0.3)
    a = evolve(gaussian_field6, L, cfg)[-1].coeffs
    double = CoefficientField(ps=ps6, coeffs=2.0 * gaussian_field6.coeffs)
    b = evolve(double, L, cfg)[-1].coeffs
    np.testing.assert_allclose(b, 2.0 * a, atol=1e-12)


def test_midpoint_preserves_l2_for_antisymmetric_generator(ps6, gaussian_field6):
    """The midpoint rule is exactly norm-preserving for skew generators."""
    L = assemble_evolution(ps6, parse_potential("0"), PARAMS)  # pure transport
    traj = evolve(gaussian_field6, L, EvolutionConfig(dt=0.05, t_end=1.0))
    n0 = gaussian_field6.l2_norm()
    assert abs(traj[-1].l2_norm() - n0) < 1e-16 + 1e-10 * n0


def test_remainder_step(ps6, gaussian_field6):
    L = assemble_evolution(ps6, parse_potential("0"), PARAMS)
    traj = evolve(gaussian_field6, L, EvolutionConfig(dt=0.4, t_end=1.0))
    assert traj[-1].time == pytest.approx(1.0)


def test_store_every(ps6, gaussian_field6):
    L = assemble_evolution(ps6, parse_potential("0"), PARAMS)
    traj = evolve(gaussian_field6, L, EvolutionConfig(dt=0.1, t_end=1.0,
                                                     store_every=5))
    assert [round(W.time, 10) for W in traj] == [0.0, 0.5, 1.0]


def test_rk4_matches_midpoint(ps6, gaussian_field6):
    L = assemble_evolution(ps6, parse_potential("0.5*q^2"), PARAMS)
    dt = 2e-3
    a = evolve(gaussian_field6, L,
               EvolutionConfig(dt=dt, t_end=0.1, scheme="explicit_rk4"))[-1]
    b = evolve(gaussian_field6, L,
               EvolutionConfig(dt=dt, t_end=0.1))[-1]
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-8


def test_rk4_stability_gate(ps6, gaussian_field6):
    L = assemble_evolution(ps6, parse_potential("0.5*q^2"), PARAMS)
    rho = estimated_spectral_radius(L)
    with pytest.raises(ConfigurationError):
        evolve(gaussian_field6, L,
               EvolutionConfig(dt=10.0 / rho, t_end=1.0, scheme="explicit_rk4"))


def test_unstable_run_aborts(ps6, gaussian_field6):
    # growth generator: identity * large rate
    grow = AssembledOperator(ps=ps6, terms=[
        OperatorTerm("growth", 40.0, np.eye(ps6.basis_q.dim),
                     np.eye(ps6.basis_p.dim))])
    with pytest.raises(AbortedEvolutionError) as exc:
        evolve(gaussian_field6, grow, EvolutionConfig(dt=0.1, t_end=10.0))
    assert exc.value.last_state is not None
    assert exc.value.diagnostic["norm_ratio"] > 1e6


def test_renormalize_keeps_integral(ps6, gaussian_field6):
    L = assemble_evolution(ps6, parse_potential("0.5*q^2"), PARAMS)
    cfg = EvolutionConfig(dt=0.05, t_end=0.5, renormalize=True)
    traj = evolve(gaussian_field6, L, cfg)
    target = gaussian_field6.total_integral()
    for W in traj:
        assert abs(W.total_integral() - target) < 1e-12


# ---------------------------------------------------------------------------
# eigenproblems
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def harmonic_small():
    filt = daubechies_filter(10)
    mk = lambda: WaveletBasis(filter=filt, j_coarse=3, j_fine=5,
                              domain=(-4.0, 4.0))
    ps = PhaseSpaceBasis(mk(), mk())
    U = parse_potential("0.5*q^2")
    return ps, U


def test_stationary_eigen_harmonic(harmonic_small):
    ps, U = harmonic_small
    A = assemble_stationary_cnumber(ps, U, PARAMS)
    states = stationary_eigen(A, 3)
    for n, (eps, W) in enumerate(states):
        assert abs(eps - (n + 0.5)) < 5e-3
        assert abs(W.total_integral() - 1.0) < 1e-8


def test_stationary_eigen_unphysical_states_filtered(harmonic_small):
    ps, U = harmonic_small
    A = assemble_stationary_cnumber(ps, U, PARAMS)
    phys = stationary_eigen(A, 4)
    every = stationary_eigen(A, 4, physical_only=False)
    # off-diagonal eigenfields interleave once the filter is off
    eps_phys = [e for e, _ in phys]
    eps_all = [e for e, _ in every]
    assert eps_phys == sorted(eps_phys)
    assert len(set(np.round(eps_all, 6))) <= len(eps_all)


def test_moyal_eigen_harmonic_pairs(harmonic_small):
    ps, U = harmonic_small
    A_sym, A_anti = assemble_stationary_pair(ps, U, PARAMS)
    pairs = moyal_eigen(A_sym, A_anti, 6, hbar=1.0)
    got = sorted((round(lo, 3), round(hi, 3)) for lo, hi, _ in pairs)
    expected = sorted([(0.5, 0.5), (1.5, 0.5), (0.5, 1.5),
                       (2.5, 0.5), (1.5, 1.5), (0.5, 2.5)])
    for (glo, ghi), (elo, ehi) in zip(got, expected):
        assert abs(glo - elo) < 1e-3
        assert abs(ghi - ehi) < 1e-3


def test_eigen_contract_errors(harmonic_small):
    ps, U = harmonic_small
    A = assemble_stationary_cnumber(ps, U, PARAMS)
    with pytest.raises(ContractError):
        stationary_eigen(A, 0)
    A_sym, A_anti = assemble_stationary_pair(ps, U, PARAMS)
    with pytest.raises(ContractError):
        moyal_eigen(A_sym, A_anti, 0)


# ---------------------------------------------------------------------------
# variational solves
# ---------------------------------------------------------------------------

def test_variational_identity_problem(ps6, gaussian_field6):
    from wigner.assembly import OperatorTerm

    I = AssembledOperator(ps=ps6, terms=[
        OperatorTerm("identity", 1.0, np.eye(ps6.basis_q.dim),
                     np.eye(ps6.basis_p.dim))])
    sol = variational_solve(I, gaussian_field6.coeffs)
    np.testing.assert_allclose(sol.coeffs, gaussian_field6.coeffs, atol=1e-12)


def test_variational_residual_orthogonality(harmonic_small):
    ps, U = harmonic_small
    A = assemble_stationary_cnumber(ps, U, PARAMS)
    rhs = ps.project(lambda q, p: np.exp(-q ** 2 - p ** 2))
    sol = variational_solve(A, rhs)
    resid = A.apply(sol.coeffs) - rhs
    assert np.max(np.abs(resid)) < 1e-10 * max(1.0, np.linalg.norm(rhs))


def test_variational_level_truncation(harmonic_small):
    ps, U = harmonic_small
    A = assemble_stationary_cnumber(ps, U, PARAMS)
    rhs = ps.project(lambda q, p: np.exp(-q ** 2 - p ** 2))
    sol = variational_solve(A, rhs, level=4)
    # solution lives in the truncated subspace
    from wigner.solve import _multiscale_masks, _to_ms_2d

    mask = _multiscale_masks(ps, 4)
    ms = _to_ms_2d(ps, np.real(sol.coeffs))
    assert np.max(np.abs(ms[~mask])) < 1e-10
    # retained-test-function residuals vanish even though the full ones do not
    resid_ms = _to_ms_2d(ps, np.real(A.apply(sol.coeffs) - rhs))
    assert np.max(np.abs(resid_ms[mask])) < 1e-10
    assert np.max(np.abs(resid_ms[~mask])) > 1e-8


def test_variational_bad_rhs(ps6):
    Z = AssembledOperator(ps=ps6, terms=[])
    with pytest.raises(ContractError):
        variational_solve(Z, np.zeros(3))


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

def test_refine_until_trivial_convergence():
    filt = daubechies_filter(6)

    def solve_at_level(N):
        mk = lambda: WaveletBasis(filter=filt, j_coarse=3, j_fine=N,
                                  domain=(-4.0, 4.0))
        ps = PhaseSpaceBasis(mk(), mk())
        return _field(ps, lambda q, p: np.exp(-q ** 2 - p ** 2) / np.pi)

    W, report = refine_until(solve_at_level, epsilon=1e-3, n_max=7, n_min=4)
    assert report.converged
    assert report.monotone
    assert report.accepted_level <= 7
    assert len(report.levels_tried) >= 1


def test_refine_until_not_converged():
    filt = daubechies_filter(6)
    rng = np.random.default_rng(0)

    def solve_at_level(N):
        mk = lambda: WaveletBasis(filter=filt, j_coarse=3, j_fine=N,
                                  domain=(-4.0, 4.0))
        ps = PhaseSpaceBasis(mk(), mk())
        return CoefficientField(ps=ps, coeffs=rng.normal(size=ps.dim))

    W, report = refine_until(solve_at_level, epsilon=1e-12, n_max=5, n_min=3)
    assert not report.converged
    assert report.accepted_level == 5


def test_refine_epsilon_positive():
    with pytest.raises(ContractError):
        refine_until(lambda N: None, epsilon=0.0, n_max=5)


# ---------------------------------------------------------------------------
# scale decomposition
# ---------------------------------------------------------------------------

def test_reconstruct_by_scale_partitions(ps6, gaussian_field6):
    slow, fast = reconstruct_by_scale(gaussian_field6, cut=3)
    total = slow.coeffs + sum(part.coeffs for part in fast)
    np.testing.assert_allclose(total, gaussian_field6.coeffs, atol=1e-12)
    # parts are L2-orthogonal (orthogonal multiscale masks)
    e_parts = slow.l2_norm() ** 2 + sum(p.l2_norm() ** 2 for p in fast)
    assert abs(e_parts - gaussian_field6.l2_norm() ** 2) < 1e-12


def test_reconstruct_by_scale_bad_cut(ps6, gaussian_field6):
    with pytest.raises(ContractError):
        reconstruct_by_scale(gaussian_field6, cut=99)
