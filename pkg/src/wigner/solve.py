"""Time evolution, stationary/two-sided eigenproblems, variational solves,
level refinement, and scale decomposition of coefficient fields."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import AssembledOperator, PhaseSpaceBasis
from .errors import (
    AbortedEvolutionError,
    ConfigurationError,
    ContractError,
    NumericalError,
)

logger = logging.getLogger(__name__)


@dataclass
class CoefficientField:
    """A Wigner field as a flat coefficient vector on a phase-space basis.

    Coefficients are real for physical fields; complex entries are permitted
    for off-diagonal two-sided eigenfields.
    """

    ps: PhaseSpaceBasis
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs)
        if self.coeffs.shape != (self.ps.dim,):
            raise ContractError(
                f"coefficient length {self.coeffs.shape} does not match basis "
                f"dimension {self.ps.dim}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ContractError("coefficient vector contains non-finite entries")

    def copy(self) -> "CoefficientField":
        return CoefficientField(ps=self.ps, coeffs=self.coeffs.copy(), time=self.time)

    @property
    def grid(self) -> np.ndarray:
        return self.ps.as_grid(self.coeffs)

    def total_integral(self) -> float:
        out = self.ps.integration_functional() @ self.coeffs
        return complex(out).real if np.iscomplexobj(self.coeffs) else float(out)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_end: float
    scheme: str = "implicit_midpoint"
    renormalize: bool = False
    store_every: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        if self.t_end < 0:
            raise ConfigurationError("t_end must be non-negative")
        if self.scheme not in ("implicit_midpoint", "explicit_rk4"):
            raise ConfigurationError(
                f"unknown scheme {self.scheme!r}; "
                "choose implicit_midpoint or explicit_rk4"
            )
        if self.store_every < 1:
            raise ConfigurationError("store_every must be >= 1")


@dataclass
class RefinementReport:
    levels_tried: list            # (level, ||W^{N+1} - W^N||) pairs
    accepted_level: int
    epsilon: float
    converged: bool
    monotone: bool


def estimated_spectral_radius(L: AssembledOperator, iterations: int = 80,
                              seed: int = 0) -> float:
    """Power-iteration estimate of the largest eigenvalue magnitude of L."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=L.ps.dim) + 1j * rng.normal(size=L.ps.dim)
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(iterations):
        w = L.apply(v)
        n = np.linalg.norm(w)
        if n == 0.0:
            return 0.0
        rho = n
        v = w / n
    return float(rho)


def _step_count(cfg: EvolutionConfig):
    n_full = int(np.floor(cfg.t_end / cfg.dt + 1e-12))
    remainder = cfg.t_end - n_full * cfg.dt
    if remainder < 1e-12 * max(1.0, cfg.t_end):
        remainder = 0.0
    return n_full, remainder


def _rk4_step(apply_op, c, dt):
    k1 = apply_op(c)
    k2 = apply_op(c + 0.5 * dt * k1)
    k3 = apply_op(c + 0.5 * dt * k2)
    k4 = apply_op(c + dt * k3)
    return c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _MidpointStepper:
    """Prefactored solver for (I - dt/2 L) c' = (I + dt/2 L) c."""

    def __init__(self, L: AssembledOperator, dt: float):
        n = L.ps.dim
        M = L.matrix()
        eye = sp.identity(n, format="csc", dtype=M.dtype)
        self.rhs = (eye + (dt / 2.0) * M).tocsr()
        self.lu = spla.splu((eye - (dt / 2.0) * M).tocsc())

    def step(self, c):
        return self.lu.solve(self.rhs @ c)


def evolve(W0: CoefficientField, L: AssembledOperator,
           cfg: EvolutionConfig) -> list:
    """Integrate dW/dt = L W; returns checkpoints including t=0 and t=t_end."""
    if L.ps is not W0.ps and L.ps != W0.ps:
        raise ContractError("operator and initial field live on different bases")

    n_full, remainder = _step_count(cfg)
    if cfg.scheme == "explicit_rk4":
        rho = estimated_spectral_radius(L)
        dt_max = 2.8 / rho if rho > 0 else np.inf
        if cfg.dt > dt_max:
            raise ConfigurationError(
                f"dt={cfg.dt} exceeds the explicit stability bound "
                f"{dt_max:.3e} (estimated spectral radius {rho:.3e})"
            )
        steppers = {}
    else:
        steppers = {cfg.dt: _MidpointStepper(L, cfg.dt)}
        if remainder > 0.0:
            steppers[remainder] = _MidpointStepper(L, remainder)

    s = W0.ps.integration_functional()
    target = float(s @ W0.coeffs.real)
    norm0 = max(np.linalg.norm(W0.coeffs), 1e-300)
    max_drift = 0.0

    trajectory = [W0.copy()]
    c = W0.coeffs.astype(float).copy()
    t = W0.time
    dts = [cfg.dt] * n_full + ([remainder] if remainder > 0.0 else [])
    for i, dt in enumerate(dts):
        if cfg.scheme == "explicit_rk4":
            c = _rk4_step(L.apply, c, dt)
        else:
            c = steppers[dt].step(c)
        t += dt
        norm = np.linalg.norm(c)
        if not np.isfinite(norm) or norm > 1e6 * norm0:
            raise AbortedEvolutionError(
                f"evolution unstable at t={t:.6g} (norm ratio {norm / norm0:.3e})",
                last_state=trajectory[-1],
                diagnostic={"t": t, "norm_ratio": float(norm / norm0)},
            )
        if cfg.renormalize:
            current = float(s @ c)
            if abs(current) > 1e-14:
                drift = abs(current - target) / max(abs(target), 1e-14)
                max_drift = max(max_drift, drift)
                c *= target / current
        is_last = i == len(dts) - 1
        if is_last or (i + 1) % cfg.store_every == 0:
            trajectory.append(CoefficientField(ps=W0.ps, coeffs=c.copy(), time=t))
    if cfg.renormalize and max_drift > 0.0:
        level = logging.WARNING if max_drift > 1e-6 else logging.INFO
        logger.log(level, "renormalization drift up to %.3e over the run", max_drift)
    if not dts:
        # t_end == 0: trajectory is the initial state only, duplicated endpoint
        # is not added.
        pass
    return trajectory


# ---------------------------------------------------------------------------
# eigenproblems
# ---------------------------------------------------------------------------

_DENSE_LIMIT = 1024


def _eig_dense_hermitian(M: np.ndarray):
    H = 0.5 * (M + M.conj().T)
    herm_defect = np.max(np.abs(M - H)) / max(np.max(np.abs(M)), 1e-300)
    if herm_defect > 1e-8:
        raise NumericalError(
            "operator is not Hermitian to working tolerance",
            diagnostic={"hermitian_defect": float(herm_defect)},
        )
    return np.linalg.eigh(H)


def _eigs_shift_invert(A: AssembledOperator, k: int, sigma: float = 0.0):
    M = A.matrix()
    H = 0.5 * (M + M.conj().T).tocsc()
    try:
        vals, vecs = spla.eigsh(H, k=min(k, A.ps.dim - 2), sigma=sigma, which="LM")
    except spla.ArpackNoConvergence as exc:
        raise NumericalError(
            "shift-invert eigensolver did not converge",
            diagnostic={"converged_eigenvalues": getattr(exc, "eigenvalues", None)},
        ) from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _select_eigenpairs(A, vals, vecs, n_states, which, physical_only,
                       integral_weight_floor):
    s = A.ps.integration_functional()
    weights = np.abs(s @ vecs)
    if which == "smallest_abs":
        order = np.argsort(np.abs(vals))
    elif which == "smallest_real":
        order = np.argsort(vals.real)
    else:
        raise ConfigurationError(f"unknown selection {which!r}")

    out = []
    for i in order:
        if physical_only and weights[i] < integral_weight_floor:
            continue
        v = vecs[:, i]
        integral = s @ v
        if abs(integral) > 1e-8:
            v = v / integral
        if np.max(np.abs(v.imag)) < 1e-8 * max(np.max(np.abs(v.real)), 1e-300):
            v = v.real.copy()
        resid = np.linalg.norm(A.apply(v) - vals[i] * v) / np.linalg.norm(v)
        if resid > 1e-8:
            raise NumericalError(
                "stationary eigenpair residual too large",
                diagnostic={"eigenvalue": complex(vals[i]), "residual": float(resid)},
            )
        out.append((float(vals[i].real), CoefficientField(ps=A.ps, coeffs=v)))
        if len(out) == n_states:
            break
    return out


def stationary_eigen(A: AssembledOperator, n_states: int,
                     which: str = "smallest_real",
                     physical_only: bool = True,
                     integral_weight_floor: float = 0.5) -> list:
    """Lowest eigenpairs (eps, field) of the stationary operator.

    With ``physical_only`` (default) only eigenfields carrying a significant
    total integral are returned: off-diagonal two-sided eigenfields integrate
    to zero, so this filter isolates the standard (diagonal) states.
    Eigenfields are normalized to unit total integral when possible, else
    unit L2 norm.  Dense direct diagonalization at small dimension,
    shift-invert iteration above.
    """
    if n_states < 1:
        raise ContractError("n_states must be >= 1")
    n = A.ps.dim
    if n <= _DENSE_LIMIT:
        vals, vecs = _eig_dense_hermitian(A.dense())
        return _select_eigenpairs(A, vals, vecs, n_states, which,
                                  physical_only, integral_weight_floor)
    k = max(16 * n_states, 64)
    while True:
        vals, vecs = _eigs_shift_invert(A, k)
        out = _select_eigenpairs(A, vals, vecs, n_states, which,
                                 physical_only, integral_weight_floor)
        if len(out) >= n_states or k >= n - 2:
            return out
        k = min(2 * k, n - 2)


def moyal_eigen(A_sym: AssembledOperator, A_anti: AssembledOperator,
                pairs: int, hbar: float = 1.0,
                cluster_tol: float = 1e-5,
                commutator_tol: float = 1e-6) -> list:
    """Joint eigenfields (E', E'', field) of the two-sided stationary system.

    A_sym eigenvalues give (E' + E'')/2; within each (near-)degenerate
    cluster the restriction of A_anti is a small real antisymmetric matrix
    whose imaginary eigenvalues i*y give E'' - E' = hbar*y.
    """
    if pairs < 1:
        raise ContractError("pairs must be >= 1")
    Ms = A_sym.dense()
    Ma = A_anti.dense()
    lam, V = np.linalg.eigh(0.5 * (Ms + Ms.T))

    # cluster near-degenerate symmetric eigenvalues
    clusters = []
    start = 0
    scale = max(1.0, float(np.max(np.abs(lam))))
    for i in range(1, lam.size + 1):
        if i == lam.size or lam[i] - lam[i - 1] > cluster_tol * scale:
            clusters.append(slice(start, i))
            start = i
    clusters.sort(key=lambda sl: lam[sl.start])

    out = []
    comm_norm = 0.0
    for sl in clusters:
        W = V[:, sl]
        lam_bar = float(np.mean(lam[sl]))
        K = W.T @ (Ma @ W)
        # commutator of the pair restricted to this resolved cluster
        comm_norm = max(comm_norm, float(np.linalg.norm(K + K.T)))
        K = 0.5 * (K - K.T)
        mu, u = np.linalg.eig(K)
        order = np.argsort(mu.imag)
        for j in order:
            y = float(mu[j].imag)
            vec = W @ u[:, j]
            e_lo = lam_bar - 0.5 * hbar * y
            e_hi = lam_bar + 0.5 * hbar * y
            if abs(y) < 1e-10 and np.max(np.abs(vec.imag)) < 1e-8:
                vec = vec.real.copy()
            out.append((e_lo, e_hi, CoefficientField(ps=A_sym.ps, coeffs=vec)))
            if len(out) == pairs:
                if comm_norm > commutator_tol:
                    logger.warning(
                        "pair operators do not commute on resolved clusters "
                        "(restricted commutator norm %.3e); eigenpairs are the "
                        "cluster-restricted joint diagonalization", comm_norm)
                return out
    if comm_norm > commutator_tol:
        logger.warning(
            "pair operators do not commute on resolved clusters "
            "(restricted commutator norm %.3e)", comm_norm)
    return out


# ---------------------------------------------------------------------------
# variational solves and refinement
# ---------------------------------------------------------------------------

def _multiscale_masks(ps: PhaseSpaceBasis, level: int) -> np.ndarray:
    """Boolean mask of 2D multiscale indices with max(axis level) < level."""
    lq = ps.basis_q.multiscale_levels()
    lp = ps.basis_p.multiscale_levels()
    return (np.maximum.outer(lq, lp) < level).reshape(-1)


def _to_ms_2d(ps: PhaseSpaceBasis, coeffs: np.ndarray) -> np.ndarray:
    Tq = ps.basis_q.dwt_matrix
    Tp = ps.basis_p.dwt_matrix
    return (Tq @ ps.as_grid(coeffs) @ Tp.T).reshape(-1)


def _from_ms_2d(ps: PhaseSpaceBasis, ms: np.ndarray) -> np.ndarray:
    Tq = ps.basis_q.dwt_matrix
    Tp = ps.basis_p.dwt_matrix
    return (Tq.T @ ms.reshape(ps.shape) @ Tp).reshape(-1)


def variational_solve(L: AssembledOperator, rhs: np.ndarray,
                      level: int = None) -> CoefficientField:
    """Direct Galerkin solve of L W = rhs truncated to the level subspace.

    The residual of the returned field is orthogonal to every retained test
    function within 1e-10 (checked; failure raises).
    """
    ps = L.ps
    rhs = np.asarray(rhs)
    if rhs.shape != (ps.dim,):
        raise ContractError("right-hand side length does not match basis")
    M = L.matrix()
    if level is None:
        mask = np.ones(ps.dim, dtype=bool)
    else:
        mask = _multiscale_masks(ps, level)
        if not np.any(mask):
            raise ContractError(f"level-{level} truncated index set is empty")
    Tq = sp.csr_matrix(ps.basis_q.dwt_matrix)
    Tp = sp.csr_matrix(ps.basis_p.dwt_matrix)
    T = sp.kron(Tq, Tp, format="csr")
    M_ms = (T @ M @ T.T).toarray()
    b_ms = T @ rhs
    sub = M_ms[np.ix_(mask, mask)]
    try:
        sol_sub = np.linalg.solve(sub, b_ms[mask])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "reduced Galerkin system is singular",
            diagnostic={"rank": int(np.linalg.matrix_rank(sub)),
                        "size": int(sub.shape[0])},
        ) from exc
    sol_ms = np.zeros(ps.dim, dtype=sol_sub.dtype)
    sol_ms[mask] = sol_sub
    residual = np.abs(M_ms @ sol_ms - b_ms)[mask]
    if residual.size and np.max(residual) > 1e-10 * max(1.0, np.linalg.norm(b_ms)):
        raise NumericalError(
            "Galerkin residual against retained test functions too large",
            diagnostic={"max_residual": float(np.max(residual))},
        )
    coeffs = _from_ms_2d(ps, sol_ms)
    if np.iscomplexobj(coeffs) and np.max(np.abs(coeffs.imag)) < \
            1e-12 * max(1.0, np.max(np.abs(coeffs.real))):
        # roundoff-only imaginary part (real operator, real data)
        coeffs = coeffs.real
    return CoefficientField(ps=ps, coeffs=coeffs)


def refine_until(solve_at_level, epsilon: float, n_max: int,
                 n_min: int = None) -> tuple:
    """Refine until ||W^{N+1} - W^N|| <= epsilon in the coefficient L2 norm.

    ``solve_at_level(N)`` must return a CoefficientField on a basis with
    j_fine = N; successive fields are compared after zero-pad embedding of
    the coarser multiscale coefficients into the finer basis.
    """
    if epsilon <= 0:
        raise ContractError("epsilon must be positive")
    prev = None
    prev_level = None
    tried = []
    diffs = []
    start = n_min if n_min is not None else max(2, n_max - 4)
    for N in range(start, n_max + 1):
        cur = solve_at_level(N)
        if prev is not None:
            diff = _embedding_difference(prev, cur)
            tried.append((N, diff))
            diffs.append(diff)
            if diff <= epsilon:
                report = RefinementReport(
                    levels_tried=tried, accepted_level=N, epsilon=epsilon,
                    converged=True, monotone=_nonincreasing(diffs))
                return cur, report
        prev, prev_level = cur, N
    if not _nonincreasing(diffs):
        logger.warning("refinement differences were not monotone: %s", diffs)
    report = RefinementReport(
        levels_tried=tried, accepted_level=prev_level, epsilon=epsilon,
        converged=False, monotone=_nonincreasing(diffs))
    return prev, report


def _nonincreasing(seq) -> bool:
    return all(b <= a * (1 + 1e-12) for a, b in zip(seq, seq[1:]))


def _embedding_difference(coarse: CoefficientField, fine: CoefficientField) -> float:
    """L2 distance after zero-pad embedding of the coarse multiscale vector."""
    ps_c, ps_f = coarse.ps, fine.ps
    ms_c = _to_ms_2d(ps_c, coarse.coeffs).reshape(ps_c.shape)
    ms_f = _to_ms_2d(ps_f, fine.coeffs).reshape(ps_f.shape)
    pad = np.zeros_like(ms_f)
    pad[: ms_c.shape[0], : ms_c.shape[1]] = ms_c
    return float(np.linalg.norm(ms_f - pad))


def reconstruct_by_scale(W: CoefficientField, cut: int, top: int = None):
    """Split a field into a slow part (levels < cut) and per-level fast parts.

    Returns (slow, [fast_cut, ..., fast_top]); parts sum to the full field
    exactly by linearity of the orthogonal multiscale transform.
    """
    ps = W.ps
    lq = ps.basis_q.multiscale_levels()
    lp = ps.basis_p.multiscale_levels()
    finest = max(ps.basis_q.j_fine, ps.basis_p.j_fine) - 1
    coarsest = min(lq.min(), lp.min())
    if top is None:
        top = finest
    if not (coarsest <= cut <= finest + 1) or top > finest:
        raise ContractError(
            f"scale cut {cut}/{top} outside basis level range "
            f"[{coarsest}, {finest + 1}]"
        )
    labels = np.maximum.outer(lq, lp)
    ms = _to_ms_2d(ps, W.coeffs).reshape(ps.shape)

    def synth(mask):
        return CoefficientField(
            ps=ps, coeffs=_from_ms_2d(ps, (ms * mask).reshape(-1)), time=W.time)

    slow = synth(labels < cut)
    fast = []
    for lev in range(cut, top + 1):
        if lev == top:
            fast.append(synth(labels >= lev))
        else:
            fast.append(synth(labels == lev))
    return slow, fast
