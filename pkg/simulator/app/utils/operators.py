"""Two-qubit operator algebra for the (qubit, ETLS) product space.

Basis order is kron(qubit, etls) with single-system order (up, down), i.e.
(|up_q up_a>, |up_q dn_a>, |dn_q up_a>, |dn_q dn_a>).
"""

import numpy as np

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)

# |0_a> is the sigma_z^a = -1 state
ETLS_GROUND = DOWN
ETLS_EXCITED = UP


def on_qubit(op: np.ndarray) -> np.ndarray:
    return np.kron(op, IDENTITY)


def on_etls(op: np.ndarray) -> np.ndarray:
    return np.kron(IDENTITY, op)


SZ_Q = on_qubit(SIGMA_Z)
SX_Q = on_qubit(SIGMA_X)
SZ_A = on_etls(SIGMA_Z)
SX_A = on_etls(SIGMA_X)
SZ_SZ = np.kron(SIGMA_Z, SIGMA_Z)


def product_state(qubit: np.ndarray, etls: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(qubit, dtype=complex), np.asarray(etls, dtype=complex))


def as_density_matrix(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def _reshape4(rho: np.ndarray) -> np.ndarray:
    return as_density_matrix(rho).reshape(2, 2, 2, 2)


def trace_out_etls(rho: np.ndarray) -> np.ndarray:
    """Reduced qubit density matrix."""
    return np.einsum("iaja->ij", _reshape4(rho))


def trace_out_qubit(rho: np.ndarray) -> np.ndarray:
    """Reduced ETLS density matrix."""
    return np.einsum("aiaj->ij", _reshape4(rho))


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for pure states; global phases drop out."""
    return float(np.abs(np.vdot(a, b)) ** 2)


def pure_state_fidelity(target: np.ndarray, rho: np.ndarray) -> float:
    """<target| rho |target> for a pure target and a density matrix."""
    target = np.asarray(target, dtype=complex)
    return float(np.real(np.conj(target) @ as_density_matrix(rho) @ target))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of rho - sigma."""
    diff = as_density_matrix(rho) - as_density_matrix(sigma)
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def purity(rho: np.ndarray) -> float:
    rho = as_density_matrix(rho)
    return float(np.real(np.trace(rho @ rho)))


def remove_global_phase(state: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude amplitude is real and positive."""
    state = np.asarray(state, dtype=complex)
    k = int(np.argmax(np.abs(state)))
    if np.abs(state[k]) == 0:
        return state
    return state * np.exp(-1j * np.angle(state[k]))


def hermitian_propagators(hamiltonians: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for a stack of Hermitian matrices (angular units).

    Uses the spectral decomposition, so each factor is unitary to rounding.
    """
    w, v = np.linalg.eigh(hamiltonians)
    phases = np.exp(-1j * w * dt)
    return np.einsum("...ik,...k,...jk->...ij", v, phases, v.conj())
