"""Core state/operator types and linear algebra for 2- and 4-level systems.

Conventions used throughout the package:

* Single qubit basis: ``|0> = |down> = (1, 0)``, ``|1> = |up> = (0, 1)``.
* Register basis (dimension 4), fixed order:
  ``{|dd>, |ud>, |du>, |uu>}`` -- i.e. index = 2*(bit of qubit 1) + (bit of
  qubit 2) with qubit 1 on the slow (left) Kronecker factor.
* Single-qubit Hamiltonian in an external field eps(t):
  ``H = -1/2 (Delta sigma_z + eps sigma_x)``.
* Two-qubit Hamiltonian: Kronecker sum of the single-qubit terms plus a
  ``-1/2 J sigma_x (x) sigma_x`` coupling.

States and operators are plain complex numpy arrays; the ``check_*``
helpers enforce the type invariants (normalization, Hermiticity, unitarity,
density-matrix positivity) and are called at module boundaries.
"""

from __future__ import annotations

import numpy as np

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

#: |1><0| in the {|0>, |1>} basis (raising operator)
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.conj().T

BASIS_LABELS_2 = ("|down>", "|up>")
BASIS_LABELS_4 = ("|dd>", "|ud>", "|du>", "|uu>")

KET_DOWN = np.array([1.0, 0.0], dtype=complex)
KET_UP = np.array([0.0, 1.0], dtype=complex)
KET_DD = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
KET_UU = np.array([0.0, 0.0, 0.0, 1.0], dtype=complex)


def _as_complex_array(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_state(psi, tol: float = 1e-12) -> np.ndarray:
    """Validate a state vector (dimension 2 or 4, unit norm)."""
    psi = _as_complex_array(psi, "state")
    if psi.ndim != 1 or psi.shape[0] not in (2, 4):
        raise ValueError(f"state must have dimension 2 or 4, got shape {psi.shape}")
    nrm2 = float(np.vdot(psi, psi).real)
    if abs(nrm2 - 1.0) > tol:
        raise ValueError(f"state norm^2 = {nrm2!r} deviates from 1 beyond {tol}")
    return psi


def normalized(psi) -> np.ndarray:
    psi = _as_complex_array(psi, "state")
    return psi / np.linalg.norm(psi)


def check_hermitian(h, tol: float = 1e-12) -> np.ndarray:
    h = _as_complex_array(h, "operator")
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] not in (2, 4):
        raise ValueError(f"operator must be square with dimension 2 or 4, got {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > tol:
        raise ValueError("operator is not Hermitian within tolerance")
    return h


def check_unitary(u, tol: float = 1e-10) -> np.ndarray:
    u = _as_complex_array(u, "operator")
    d = u.shape[0]
    defect = np.max(np.abs(u.conj().T @ u - np.eye(d)))
    if defect > tol:
        raise ValueError(f"operator is not unitary: max |U^dag U - I| = {defect:.3e}")
    return u


def check_density_matrix(rho, tol: float = 1e-10, eig_tol: float = 1e-8) -> np.ndarray:
    rho = _as_complex_array(rho, "density matrix")
    check_hermitian(rho, tol)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace = {tr!r} deviates from 1 beyond {tol}")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def _require_finite(**scalars):
    for name, v in scalars.items():
        if not np.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


def make_single_qubit_hamiltonian(delta: float, epsilon: float) -> np.ndarray:
    """``H = -1/2 (Delta sigma_z + eps sigma_x)``; entry [0,0] is -Delta/2."""
    _require_finite(delta=delta, epsilon=epsilon)
    return -0.5 * (delta * SZ + epsilon * SX)


def make_two_qubit_hamiltonian(d1: float, d2: float, e1: float, e2: float,
                               j: float) -> np.ndarray:
    """4x4 register Hamiltonian in the fixed {|dd>,|ud>,|du>,|uu>} ordering.

    Equals ``H1 (x) I + I (x) H2 - 1/2 J sigma_x (x) sigma_x`` with qubit 1
    on the left Kronecker factor; the overall -1/2 prefactor is kept.
    """
    _require_finite(d1=d1, d2=d2, e1=e1, e2=e2, j=j)
    h1 = make_single_qubit_hamiltonian(d1, e1)
    h2 = make_single_qubit_hamiltonian(d2, e2)
    return (np.kron(h1, ID2) + np.kron(ID2, h2)
            - 0.5 * j * np.kron(SX, SX))


def state_fidelity(a, b) -> float:
    """Overlap fidelity |<a|b>|^2 for normalized states of equal dimension."""
    a = check_state(a)
    b = check_state(b)
    if a.shape != b.shape:
        raise ValueError(f"state dimensions differ: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(a, b)) ** 2)


def gate_fidelity(u, v) -> float:
    """Global-phase-invariant gate fidelity |Tr(U^dag V)|^2 / d^2."""
    u = _as_complex_array(u, "u")
    v = _as_complex_array(v, "v")
    if u.shape != v.shape or u.ndim != 2:
        raise ValueError(f"operator dimensions differ: {u.shape} vs {v.shape}")
    d = u.shape[0]
    return float(abs(np.trace(u.conj().T @ v)) ** 2 / d**2)


def bloch_vector(psi) -> tuple[float, float, float]:
    """Bloch components (<sx>, <sy>, <sz>) of a normalized single-qubit state."""
    psi = check_state(psi)
    if psi.shape[0] != 2:
        raise ValueError("bloch_vector requires a dimension-2 state")
    x = float(np.vdot(psi, SX @ psi).real)
    y = float(np.vdot(psi, SY @ psi).real)
    z = float(np.vdot(psi, SZ @ psi).real)
    return (x, y, z)


def hermitian_eigendecomposition(h, tol: float = 1e-10):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix.

    Degenerate eigenvalues keep the solver ordering; the returned columns are
    orthonormal in any case.
    """
    h = check_hermitian(h, tol=max(tol, 1e-12))
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs
