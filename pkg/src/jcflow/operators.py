"""Truncated Fock-space operators for one field mode coupled to a two-level atom.

Basis convention: photon number j runs 0..cutoff ascending and the atom index
s is 0 for the upper level, 1 for the lower one, so the product state (j, s)
sits at row/column 2*j + s.  The photon ladder stops at j = cutoff.  Anything
that raises out of the window is simply dropped, which is why operator
identities are only claimed on the guarded subspace j <= cutoff - 2.

All evolution operators are built in the interaction picture: the common
rotation at the mode frequency is removed and only the detuning survives in
the free part.  Operator functions of the photon number (cos, sin of
sqrt-number arguments) are evaluated eigenvalue-wise on the number basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "BasisLabel",
    "OperatorMatrix",
    "build_operators",
    "evolution_resonant",
    "evolution_detuned",
    "matrix_exponential_oracle",
    "amplitude",
    "subsystem_block",
    "guarded_indices",
    "unitarity_defect",
]

UP, DOWN = 0, 1


@dataclass(frozen=True)
class ModelParams:
    """Coupling g, detuning (atom minus mode frequency) and photon cutoff.

    mode_frequency is the removed common rotation; it only enters the free
    Hamiltonian and defaults to 0, i.e. the interaction picture.
    """

    coupling: float
    detuning: float = 0.0
    cutoff: int = 16
    mode_frequency: float = 0.0

    def __post_init__(self):
        if self.coupling < 0.0:
            raise ValueError("coupling must be >= 0")
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ValueError("cutoff must be an integer >= 2")

    @property
    def dim(self) -> int:
        return 2 * (self.cutoff + 1)


@dataclass(frozen=True)
class BasisLabel:
    """Product state (photon number, atom level)."""

    photon: int
    atom: int  # UP or DOWN

    def __post_init__(self):
        if self.photon < 0:
            raise ValueError("photon number must be >= 0")
        if self.atom not in (UP, DOWN):
            raise ValueError("atom must be UP (0) or DOWN (1)")

    @property
    def index(self) -> int:
        return 2 * self.photon + self.atom

    @classmethod
    def from_index(cls, i: int) -> "BasisLabel":
        return cls(i // 2, i % 2)


@dataclass
class OperatorMatrix:
    """Dense matrix on the truncated space plus its truncation status.

    truncation_tainted marks operators whose action on the top photon
    sector differs from the untruncated one (anything containing a
    raising operator, and every evolution operator).
    """

    matrix: np.ndarray
    cutoff: int
    truncation_tainted: bool = False

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.dim, self.dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match cutoff {self.cutoff}"
            )

    @property
    def dim(self) -> int:
        return 2 * (self.cutoff + 1)

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.matrix.astype(dtype)
        return self.matrix

    def dagger(self) -> np.ndarray:
        return self.matrix.conj().T

    def to_json_dict(self) -> dict:
        """Serialisable dump: row-major entries as [re, im] pairs."""
        entries = [
            [float(z.real), float(z.imag)] for z in self.matrix.reshape(-1)
        ]
        return {
            "dim": self.dim,
            "lambda_cutoff": self.cutoff,
            "basis_order": "index = 2*j + s; j photon number ascending, s=0 up, s=1 down",
            "entries": entries,
        }


def guarded_indices(cutoff: int) -> np.ndarray:
    """Basis indices with photon number <= cutoff - 2 (both atom levels)."""
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    return np.arange(2 * (cutoff - 1))


def unitarity_defect(op: OperatorMatrix) -> float:
    """Max-entry deviation of U^dag U from 1 on the guarded subspace."""
    u = op.matrix
    d = u.conj().T @ u - np.eye(op.dim)
    gi = guarded_indices(op.cutoff)
    return float(np.max(np.abs(d[np.ix_(gi, gi)])))


def build_operators(params: ModelParams) -> dict:
    """Ladder, spin and Hamiltonian pieces on the truncated product space.

    Returns a dict with keys a, a_dagger, number, tau_plus, tau_minus,
    tau_3, V and H0.  The commutator [a, a_dagger] = 1 holds on photon
    numbers <= cutoff - 1; the corner element is lost to the cut.
    """
    lam = params.cutoff
    nph = lam + 1
    ident_ph = np.eye(nph)
    ladder = np.diag(np.sqrt(np.arange(1.0, nph)), 1)  # photon-space annihilation

    up = np.array([1.0, 0.0])
    dn = np.array([0.0, 1.0])
    tau_p_spin = np.outer(up, dn)
    tau_m_spin = np.outer(dn, up)
    tau_3_spin = 0.5 * (tau_p_spin @ tau_m_spin - tau_m_spin @ tau_p_spin)

    a = np.kron(ladder, np.eye(2))
    a_dag = a.T.copy()
    number = np.kron(np.diag(np.arange(float(nph))), np.eye(2))
    tau_p = np.kron(ident_ph, tau_p_spin)
    tau_m = np.kron(ident_ph, tau_m_spin)
    tau_3 = np.kron(ident_ph, tau_3_spin)
    v = a_dag @ tau_m + a @ tau_p

    omega = params.mode_frequency
    h0 = omega * number + (omega + params.detuning) * tau_3

    def wrap(m, tainted):
        return OperatorMatrix(m, lam, truncation_tainted=tainted)

    return {
        "a": wrap(a, False),
        "a_dagger": wrap(a_dag, True),
        "number": wrap(number, False),
        "tau_plus": wrap(tau_p, False),
        "tau_minus": wrap(tau_m, False),
        "tau_3": wrap(tau_3, False),
        "V": wrap(v, True),
        "H0": wrap(h0, False),
    }


def subsystem_block(n: int, coupling: float, scale: float = 0.0) -> np.ndarray:
    """Closed-form 2x2 evolution block on span{|n,up>, |n+1,down>}.

    Arguments are the dimensionless combinations coupling = g*t and
    scale = t*detuning/2.  The block is exp(-i(scale*sigma_z +
    coupling*sqrt(n+1)*sigma_x)); the removable sin(x)/x singularity at
    zero argument is taken through its limit.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    root = np.sqrt(n + 1.0)
    omega = np.hypot(coupling * root, scale)
    # sin(omega)/omega via sinc, finite at omega = 0
    s = np.sinc(omega / np.pi)
    c = np.cos(omega)
    off = -1j * coupling * root * s
    return np.array(
        [[c - 1j * scale * s, off], [off, c + 1j * scale * s]], dtype=complex
    )


def _interaction_evolution(coupling, detuning, cutoff, t):
    """Closed-form interaction-picture evolution as a dense matrix.

    Diagonals are functions of the photon number; each off-diagonal pair
    couples |j,up> with |j+1,down>.  The |cutoff,up> column keeps its
    exact diagonal entry but loses its partner to the cut.
    """
    nph = cutoff + 1
    n = np.arange(float(nph))
    half = 0.5 * detuning
    psi = np.sqrt(coupling**2 * (n + 1.0) + half**2)  # on aa^dag eigenvalues
    phi = np.sqrt(coupling**2 * n + half**2)  # on a^dag a eigenvalues
    # t*sinc(t*psi/pi) = sin(t*psi)/psi with the limit at psi = 0
    s_psi = t * np.sinc(t * psi / np.pi)
    s_phi = t * np.sinc(t * phi / np.pi)

    u = np.zeros((2 * nph, 2 * nph), dtype=complex)
    u[2 * n.astype(int), 2 * n.astype(int)] = np.cos(t * psi) - 1j * half * s_psi
    u[2 * n.astype(int) + 1, 2 * n.astype(int) + 1] = (
        np.cos(t * phi) + 1j * half * s_phi
    )
    j = np.arange(cutoff)
    off = -1j * coupling * np.sqrt(j + 1.0) * s_psi[:-1]
    u[2 * (j + 1) + 1, 2 * j] = off
    u[2 * j, 2 * (j + 1) + 1] = off
    return u


def evolution_resonant(params: ModelParams, t: float) -> OperatorMatrix:
    """Evolution operator at zero detuning.

    Rabi phases grow with the square root of the photon number, so each
    two-state block rotates at its own speed.  Requires params.detuning == 0.
    """
    if params.detuning != 0.0:
        raise ValueError("evolution_resonant requires detuning == 0")
    m = _interaction_evolution(params.coupling, 0.0, params.cutoff, float(t))
    return OperatorMatrix(m, params.cutoff, truncation_tainted=True)


def evolution_detuned(params: ModelParams, t: float) -> OperatorMatrix:
    """Evolution operator at general detuning (interaction picture)."""
    m = _interaction_evolution(
        params.coupling, params.detuning, params.cutoff, float(t)
    )
    return OperatorMatrix(m, params.cutoff, truncation_tainted=True)


def matrix_exponential_oracle(generator, t: float = 1.0,
                              hermiticity_tol: float = 1e-12) -> OperatorMatrix:
    """exp(-i*t*G) for Hermitian G, via eigendecomposition.

    Independent cross-check for the closed-form evolutions; it
    exponentiates the truncated generator, so agreement with the closed
    forms is only expected on the guarded subspace.  Rejects
    non-Hermitian input.
    """
    if isinstance(generator, OperatorMatrix):
        g = generator.matrix
        cutoff = generator.cutoff
    else:
        g = np.asarray(generator, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
            raise ValueError("generator must be a square matrix of even dimension")
        cutoff = g.shape[0] // 2 - 1
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.max(np.abs(g - g.conj().T)) > hermiticity_tol * scale:
        raise ValueError("generator is not Hermitian")
    w, q = np.linalg.eigh(g)
    u = (q * np.exp(-1j * float(t) * w)) @ q.conj().T
    return OperatorMatrix(u, cutoff, truncation_tainted=True)


def amplitude(j: int, bare_coupling: float) -> float:
    """Transition amplitude |j,up> -> |j+1,down> at unit evolution time.

    Equal to i times the corresponding matrix element of the resonant
    evolution operator, which makes it real: sin(g0*sqrt(j+1)).
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    return float(np.sin(bare_coupling * np.sqrt(j + 1.0)))
