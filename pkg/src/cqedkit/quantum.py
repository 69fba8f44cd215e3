"""Operator algebra and open-system evolution on truncated multimode Fock spaces.

Everything here is dense: the target systems are a transmon plus one or two
cavities at modest truncation (total dimension of order a few hundred), where
sparse bookkeeping costs more than it saves.

Conventions
-----------
* Mode 0 is the slowest-varying tensor index, i.e. the full-space matrix of an
  operator acting on mode k is ``I ⊗ ... ⊗ op_k ⊗ ... ⊗ I`` with mode 0
  leftmost in the Kronecker chain.
* Hamiltonians are in angular-frequency units (rad/s); collapse rates in 1/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

__all__ = [
    "TruncationError",
    "IntegrationError",
    "ModeSpace",
    "Operator",
    "State",
    "identity",
    "ladder",
    "number_op",
    "fock_state",
    "coherent_state",
    "displace",
    "evolve_lindblad",
    "evolve_unitary",
    "liouvillian_matrix",
    "partial_trace",
]

HERMITICITY_ATOL = 1e-12


class TruncationError(ValueError):
    """Requested amplitude does not fit the truncated Fock space."""


class IntegrationError(RuntimeError):
    """The master-equation integrator failed or violated its contract."""


@dataclass(frozen=True)
class ModeSpace:
    """Tensor product of truncated bosonic/qubit modes.

    dims holds the per-mode truncation dimension (>= 2 each) and labels the
    unique mode names. Total Hilbert-space dimension is the product of dims.
    """

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if len(self.dims) == 0:
            raise ValueError("a ModeSpace needs at least one mode")
        if any(d < 2 for d in self.dims):
            raise ValueError(f"every mode dimension must be >= 2, got {self.dims}")
        if len(self.labels) != len(self.dims):
            raise ValueError("labels and dims must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"mode labels must be unique, got {self.labels}")

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no mode labeled {label!r} in {self.labels}") from None

    def _check_mode(self, mode_index: int) -> int:
        if not 0 <= mode_index < self.n_modes:
            raise IndexError(
                f"mode index {mode_index} out of range for {self.n_modes} modes"
            )
        return mode_index


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _embed(space: ModeSpace, mode_index: int, block: np.ndarray) -> np.ndarray:
    """I ⊗ ... ⊗ block ⊗ ... ⊗ I with mode 0 as the slowest index."""
    out = np.array([[1.0 + 0j]])
    for k, d in enumerate(space.dims):
        out = np.kron(out, block if k == mode_index else np.eye(d))
    return out


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator on a ModeSpace, optionally asserted Hermitian."""

    space: ModeSpace
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.space.size
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match space size {n}")
        if self.hermitian:
            asym = np.max(np.abs(m - m.conj().T))
            if asym >= HERMITICITY_ATOL:
                raise ValueError(
                    f"operator asserted Hermitian but max|A - A†| = {asym:.3e}"
                )
        object.__setattr__(self, "matrix", _frozen(m))

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T, hermitian=self.hermitian)

    def expect(self, state: "State") -> complex:
        return complex(np.trace(state.density @ self.matrix))

    def _same_space(self, other: "Operator"):
        if self.space != other.space:
            raise ValueError("operators act on different ModeSpaces")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._same_space(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        self._same_space(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._same_space(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__


def identity(space: ModeSpace) -> Operator:
    return Operator(space, np.eye(space.size), hermitian=True)


def ladder(space: ModeSpace, mode_index: int) -> Operator:
    """Annihilation operator of one mode embedded in the full space.

    Single-mode action a|n> = sqrt(n)|n-1>, identity on all other modes.
    """
    space._check_mode(mode_index)
    d = space.dims[mode_index]
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    return Operator(space, _embed(space, mode_index, a))


def number_op(space: ModeSpace, mode_index: int) -> Operator:
    """Photon-number operator a†a of one mode embedded in the full space."""
    space._check_mode(mode_index)
    d = space.dims[mode_index]
    n = np.diag(np.arange(d, dtype=float))
    return Operator(space, _embed(space, mode_index, n), hermitian=True)


@dataclass(frozen=True, eq=False)
class State:
    """Density matrix on a ModeSpace.

    Construction validates unit trace, Hermiticity, and positive
    semidefiniteness to within `tol` (1e-9 for hand-built states; integrator
    output uses a looser tolerance consistent with its own error contract).
    """

    space: ModeSpace
    density: np.ndarray
    tol: float = field(default=1e-9, repr=False, compare=False)

    def __post_init__(self):
        rho = np.asarray(self.density, dtype=complex)
        n = self.space.size
        if rho.shape != (n, n):
            raise ValueError(f"density shape {rho.shape} does not match space size {n}")
        tr = np.trace(rho)
        if abs(tr - 1.0) > self.tol:
            raise ValueError(f"density trace {tr} deviates from 1 by more than {self.tol}")
        if np.max(np.abs(rho - rho.conj().T)) > self.tol:
            raise ValueError("density matrix is not Hermitian within tolerance")
        low = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0]
        if low < -self.tol:
            raise ValueError(f"density has negative eigenvalue {low:.3e}")
        object.__setattr__(self, "density", _frozen(rho))

    def purity(self) -> float:
        return float(np.real(np.trace(self.density @ self.density)))

    def populations(self, mode_index: int) -> np.ndarray:
        """Diagonal of the reduced density matrix of one mode."""
        self.space._check_mode(mode_index)
        return np.real(np.diag(partial_trace(self, mode_index)))


def partial_trace(state: State, keep: int) -> np.ndarray:
    """Reduced density matrix of mode `keep`, tracing out all others."""
    dims = state.space.dims
    state.space._check_mode(keep)
    rho = state.density.reshape(dims + dims)
    n = len(dims)
    out = rho
    # contract pairs (axis j, axis j+n) for every traced mode, back to front
    for j in reversed([k for k in range(n) if k != keep]):
        out = np.trace(out, axis1=j, axis2=j + out.ndim // 2)
    return out


def fock_state(space: ModeSpace, occupations: tuple[int, ...] | list[int]) -> State:
    """Product Fock state |n_0, n_1, ...> as a density matrix."""
    occ = tuple(int(n) for n in occupations)
    if len(occ) != space.n_modes:
        raise ValueError("one occupation number per mode required")
    for n, d in zip(occ, space.dims):
        if not 0 <= n < d:
            raise ValueError(f"occupation {n} outside truncation {d}")
    idx = 0
    for n, d in zip(occ, space.dims):
        idx = idx * d + n
    rho = np.zeros((space.size, space.size), dtype=complex)
    rho[idx, idx] = 1.0
    return State(space, rho)


def _coherent_vector(dim: int, alpha: complex) -> np.ndarray:
    """Truncated, renormalized coherent-state amplitudes."""
    c = np.empty(dim, dtype=complex)
    c[0] = 1.0
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    c *= math.exp(-0.5 * abs(alpha) ** 2)
    return c / np.linalg.norm(c)


def _check_truncation(dim: int, alpha: complex):
    if abs(alpha) ** 2 > dim / 4.0:
        raise TruncationError(
            f"|alpha|^2 = {abs(alpha)**2:.3f} exceeds dim/4 = {dim / 4.0:.3f}; "
            "enlarge the mode truncation"
        )


def coherent_state(space: ModeSpace, mode_index: int, alpha: complex) -> State:
    """Coherent state |alpha> in one mode, vacuum in all others.

    The truncated amplitude vector is renormalized, so populations follow the
    Poisson law up to truncation error. Guarded by |alpha|^2 <= dim/4.
    """
    space._check_mode(mode_index)
    _check_truncation(space.dims[mode_index], alpha)
    vec = np.array([1.0 + 0j])
    for k, d in enumerate(space.dims):
        if k == mode_index:
            local = _coherent_vector(d, alpha)
        else:
            local = np.zeros(d, dtype=complex)
            local[0] = 1.0
        vec = np.kron(vec, local)
    return State(space, np.outer(vec, vec.conj()))


def displace(state: State, mode_index: int, alpha: complex) -> State:
    """Apply the displacement exp(alpha a† - alpha* a) to one mode."""
    space = state.space
    space._check_mode(mode_index)
    _check_truncation(space.dims[mode_index], alpha)
    d = space.dims[mode_index]
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    disp = _embed(space, mode_index, expm(gen))
    rho = disp @ state.density @ disp.conj().T
    return State(space, (rho + rho.conj().T) / 2.0, tol=max(state.tol, 1e-9))


def _validate_hamiltonian(hamiltonian: Operator) -> np.ndarray:
    h = hamiltonian.matrix
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > 1e-9 * scale:
        raise ValueError("Hamiltonian must be Hermitian")
    return h


def _validate_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t_grid must contain at least two times")
    if abs(t[0]) > 1e-30:
        raise ValueError("t_grid must start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    return t


def evolve_lindblad(
    state: State,
    hamiltonian: Operator,
    collapse_ops: list[tuple[Operator, float]],
    t_grid,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> list[State]:
    """Integrate the Lindblad master equation on a time grid.

    dρ/dt = -i[H,ρ] + Σ_k γ_k (L_k ρ L_k† - ½{L_k†L_k, ρ})

    `hamiltonian` is in rad/s and `collapse_ops` pairs each operator with a
    rate in 1/s. Uses an adaptive explicit Runge-Kutta scheme (DOP853); the
    dispersive problems this package targets are non-stiff once written in the
    rotating frame. The default tolerances keep trace and positivity drift
    orders of magnitude inside the 1e-6 contract (looser settings measurably
    break positivity on long pure-decay runs); drift beyond 1e-6 raises
    IntegrationError.
    """
    h = _validate_hamiltonian(hamiltonian)
    t = _validate_grid(t_grid)
    n = state.space.size

    ls = []
    for op, rate in collapse_ops:
        if op.space != state.space:
            raise ValueError("collapse operator acts on a different ModeSpace")
        rate = float(rate)
        if rate < 0:
            raise ValueError(f"collapse rate must be >= 0, got {rate}")
        if rate > 0:
            ls.append(math.sqrt(rate) * op.matrix)

    # effective non-Hermitian drift: A = -iH - 1/2 sum L†L
    drift = -1j * h
    for L in ls:
        drift = drift - 0.5 * (L.conj().T @ L)
    drift_dag = drift.conj().T
    jumps = [(L, L.conj().T) for L in ls]

    def rhs(_t, y):
        rho = y.reshape(n, n)
        out = drift @ rho + rho @ drift_dag
        for L, Ld in jumps:
            out += L @ rho @ Ld
        return out.ravel()

    sol = solve_ivp(
        rhs,
        (t[0], t[-1]),
        state.density.astype(complex).ravel(),
        t_eval=t,
        method="DOP853",
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        steps = np.diff(sol.t)
        max_step = float(np.max(steps)) if steps.size else float("nan")
        raise IntegrationError(
            f"master-equation integration failed: {sol.message} "
            f"(reached t = {sol.t[-1]:.3e} s; max stable step {max_step:.3e} s)"
        )

    states = []
    for k in range(t.size):
        rho = sol.y[:, k].reshape(n, n)
        rho = (rho + rho.conj().T) / 2.0
        tr_err = abs(np.trace(rho) - 1.0)
        if tr_err > 1e-6:
            raise IntegrationError(
                f"trace drift {tr_err:.3e} at t = {t[k]:.3e} s exceeds 1e-6; "
                "tighten rtol/atol"
            )
        low = np.linalg.eigvalsh(rho)[0]
        if low < -1e-6:
            raise IntegrationError(
                f"positivity violated ({low:.3e}) at t = {t[k]:.3e} s"
            )
        states.append(State(state.space, rho, tol=1e-5))
    return states


def evolve_unitary(state: State, hamiltonian: Operator, t_grid) -> list[State]:
    """Exact closed-system propagation of a time-independent Hamiltonian.

    Works in the eigenbasis of H, so no step-size error enters; this is the
    fast path for purely dispersive (Fock-diagonal) dynamics.
    """
    h = _validate_hamiltonian(hamiltonian)
    t = _validate_grid(t_grid)
    if np.max(np.abs(h - np.diag(np.diag(h)))) == 0.0:
        energies = np.real(np.diag(h))
        basis = None
    else:
        energies, basis = np.linalg.eigh(h)
    rho0 = state.density
    if basis is not None:
        rho0 = basis.conj().T @ rho0 @ basis
    phase_diff = energies[:, None] - energies[None, :]
    states = []
    for tk in t:
        rho = rho0 * np.exp(-1j * phase_diff * tk)
        if basis is not None:
            rho = basis @ rho @ basis.conj().T
        rho = (rho + rho.conj().T) / 2.0
        states.append(State(state.space, rho, tol=1e-8))
    return states


def liouvillian_matrix(
    hamiltonian: Operator, collapse_ops: list[tuple[Operator, float]]
) -> np.ndarray:
    """Dense superoperator matrix of the Lindblad generator.

    Acts on row-major-raveled density matrices (numpy's default `ravel`).
    Diagnostic helper: its null space is the steady state, used to cross-check
    analytic spectroscopy responses.
    """
    h = _validate_hamiltonian(hamiltonian)
    n = h.shape[0]
    eye = np.eye(n)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op, rate in collapse_ops:
        rate = float(rate)
        if rate < 0:
            raise ValueError("collapse rate must be >= 0")
        L = math.sqrt(rate) * op.matrix
        LdL = L.conj().T @ L
        sup += np.kron(L, L.conj()) - 0.5 * (
            np.kron(LdL, eye) + np.kron(eye, LdL.T)
        )
    return sup
