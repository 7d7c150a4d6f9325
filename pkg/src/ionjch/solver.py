"""Lowest eigenpair and gap of a sector Hamiltonian."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg as spla

from .errors import DomainError, SolverError

DENSE_LIMIT = 2000
RESIDUAL_TOL = 1e-9
DEGENERACY_TOL = 1e-8
REFINE_TRIGGER = 1e-12
START_SEED = 20090401
MAX_RESTARTS = 5000


@dataclass(frozen=True)
class GroundStateResult:
    """Ground state of a :class:`~ionjch.hamiltonian.SymmetricOperator`.

    ``gap`` is ``E_1 - E_0`` (``inf`` for a one-dimensional sector).
    ``vector`` carries the sign convention that its largest-magnitude entry
    is positive.
    """

    energy: float
    vector: np.ndarray
    gap: float
    degenerate: bool
    method: str
    iterations: int
    residual: float
    fingerprint: str = ""


def start_vector(dim):
    """Deterministic Lanczos start vector.

    A fixed-seed positive vector rather than the uniform one: the uniform
    vector is reflection-even and misses odd-parity ground states.
    """
    rng = np.random.default_rng(START_SEED)
    v = 1.0 + 0.5 * rng.random(dim)
    return v / np.linalg.norm(v)


def _canonical_sign(v):
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def ground_state(op, method="auto"):
    """Lowest eigenpair of ``op`` by dense or Lanczos (ARPACK) diagonalization.

    ``method="auto"`` uses the dense path below ``DENSE_LIMIT`` states.
    """
    dim = op.dimension
    if dim < 1:
        raise DomainError("operator has dimension 0")
    if method not in ("auto", "dense", "iterative"):
        raise DomainError(f"unknown solver method {method!r}")
    if method == "auto":
        method = "dense" if dim < DENSE_LIMIT else "iterative"
    # ARPACK needs k < dim; tiny sectors are solved densely regardless
    if method == "iterative" and dim < 3:
        method = "dense"

    iterations = 0
    if method == "dense":
        h = op.to_dense()
        top = min(1, dim - 1)
        evals, evecs = scipy.linalg.eigh(h, subset_by_index=[0, top])
        mat = h
    else:
        mat = op.to_sparse()
        counter = _Counter(mat)
        try:
            evals, evecs = spla.eigsh(
                counter, k=2, which="SA", v0=start_vector(dim), tol=0, maxiter=max(10 * dim, MAX_RESTARTS)
            )
        except spla.ArpackNoConvergence as exc:
            raise SolverError("Lanczos did not converge", residual=float("nan")) from exc
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
        iterations = counter.count

    e0 = float(evals[0])
    v = evecs[:, 0] / np.linalg.norm(evecs[:, 0])
    residual = float(np.linalg.norm(mat @ v - e0 * v))
    if residual > REFINE_TRIGGER * max(1.0, abs(e0)):
        e0, v, residual = _refine(mat, e0, v, residual)
    v = _canonical_sign(v)
    if residual > RESIDUAL_TOL * max(1.0, abs(e0)):
        raise SolverError(f"ground-state residual {residual:.3e} above tolerance", residual=residual)

    gap = float(evals[1] - evals[0]) if evals.size > 1 else float("inf")
    gap = max(gap, 0.0)
    return GroundStateResult(
        energy=e0,
        vector=v,
        gap=gap,
        degenerate=bool(gap < DEGENERACY_TOL * max(1.0, abs(e0))),
        method=method,
        iterations=iterations,
        residual=residual,
        fingerprint=op.fingerprint,
    )


def _refine(mat, e0, v, residual, steps=3):
    # inverse iteration with a shift just below e0; large-norm operators
    # leave eigh/eigsh residuals at eps*||H||, far above what we need
    shift = e0 - 1e-6 * max(1.0, abs(e0))
    if isinstance(mat, np.ndarray):
        shifted = mat - shift * np.eye(mat.shape[0])
        lu = scipy.linalg.lu_factor(shifted)
        solve = lambda b: scipy.linalg.lu_solve(lu, b)  # noqa: E731
    else:
        lu = spla.splu((mat - shift * scipy.sparse.identity(mat.shape[0])).tocsc())
        solve = lu.solve
    for _ in range(steps):
        w = solve(v)
        w = w / np.linalg.norm(w)
        e = float(w @ (mat @ w))
        r = float(np.linalg.norm(mat @ w - e * w))
        if r >= residual:
            break
        e0, v, residual = e, w, r
        if residual <= REFINE_TRIGGER * max(1.0, abs(e0)):
            break
    return e0, v, residual


class _Counter(spla.LinearOperator):
    # counts matrix-vector products
    def __init__(self, mat):
        super().__init__(dtype=mat.dtype, shape=mat.shape)
        self.mat = mat
        self.count = 0

    def _matvec(self, x):
        self.count += 1
        return self.mat @ x
