"""Exact-diagonalization backend: ground states, gaps, Heisenberg evolution,
spectral function calculus, Moore-Penrose resolvents, and block overlaps.

All operations work on a cached :class:`EigenDecomposition`, so repeated
queries against the same Hamiltonian cost one dense eigh.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .chain import ChainHamiltonian, reduced_density, spectral_norm

GAP_TOL = 1e-8


class DegenerateGroundStateError(Exception):
    """Ground space is (numerically) degenerate; downstream gluing must refuse."""


class EigensolverError(Exception):
    """Dense eigensolver failed to converge."""


def _dense(h) -> np.ndarray:
    if isinstance(h, ChainHamiltonian):
        return h.dense
    return np.asarray(h, dtype=np.complex128)


@dataclass(frozen=True)
class EigenDecomposition:
    """Full sorted eigensystem of a Hermitian operator.

    energies ascend; vectors[:, j] is the eigenvector of energies[j].
    """

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.vectors[:, 0].copy()

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])

    @property
    def dim(self) -> int:
        return self.energies.size

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.energies) @ self.vectors.conj().T


def eigendecompose(h) -> EigenDecomposition:
    """Diagonalize a Hermitian chain Hamiltonian (or raw dense matrix)."""
    dense = _dense(h)
    herm_defect = spectral_norm(dense - dense.conj().T)
    if herm_defect > 1e-10 * max(1.0, spectral_norm(dense)):
        raise ValueError(f"matrix is not Hermitian (defect {herm_defect:.3e})")
    try:
        energies, vectors = np.linalg.eigh(dense)
    except np.linalg.LinAlgError as exc:
        resid = spectral_norm(dense - dense.conj().T)
        raise EigensolverError(f"eigh failed: {exc} (hermiticity residual {resid:.3e})") from exc
    return EigenDecomposition(energies=np.real(energies), vectors=vectors)


def ground_and_gap(h) -> tuple[float, np.ndarray, float]:
    """Ground energy, ground vector and spectral gap E_1 - E_0.

    Warns when the gap is below GAP_TOL; the noncriticality assumption all
    constructions rest on is then violated.
    """
    dec = eigendecompose(h)
    if dec.gap < GAP_TOL:
        warnings.warn(f"spectral gap {dec.gap:.3e} below tolerance {GAP_TOL}; "
                      "ground state treated as degenerate", stacklevel=2)
    return dec.ground_energy, dec.ground_state, dec.gap


def require_unique_ground(h, context: str = "") -> EigenDecomposition:
    """Eigendecomposition that raises instead of warning on a closed gap."""
    dec = eigendecompose(h)
    if dec.gap < GAP_TOL:
        where = f" in {context}" if context else ""
        raise DegenerateGroundStateError(
            f"gap {dec.gap:.3e} below {GAP_TOL}{where}; refusing to pick a ground vector")
    return dec


def heisenberg_evolve(decomp: EigenDecomposition, a: np.ndarray, t: float) -> np.ndarray:
    """tau_t(A) = e^{itH} A e^{-itH} evaluated in the eigenbasis."""
    a = np.asarray(a, dtype=np.complex128)
    if t == 0.0:
        return a.copy()
    v = decomp.vectors
    a_eig = v.conj().T @ a @ v
    phases = np.exp(1j * t * decomp.energies)
    evolved = (phases[:, None] * a_eig) * phases.conj()[None, :]
    return v @ evolved @ v.conj().T


def mp_resolvent(decomp: EigenDecomposition, omega: float,
                 zero_tol: float = 1e-9) -> np.ndarray:
    """Moore-Penrose inverse of (omega*I - H) for omega at the ground energy.

    Annihilates the ground eigenspace and acts as 1/(omega - E_j) on every
    other eigenvector.
    """
    if abs(omega - decomp.ground_energy) > 1e-9 * max(1.0, abs(decomp.ground_energy)) + 1e-9:
        raise ValueError(f"omega={omega} does not match ground energy "
                         f"{decomp.ground_energy}")
    diffs = omega - decomp.energies
    inv = np.where(np.abs(diffs) < zero_tol, 0.0, 1.0 / np.where(diffs == 0, 1.0, diffs))
    return (decomp.vectors * inv) @ decomp.vectors.conj().T


def spectral_function(decomp: EigenDecomposition, f) -> np.ndarray:
    """Apply a scalar function to H through its eigenbasis: sum_j f(E_j)|j><j|."""
    vals = np.asarray([f(e) for e in decomp.energies], dtype=np.complex128)
    return (decomp.vectors * vals) @ decomp.vectors.conj().T


def ground_projector(decomp: EigenDecomposition) -> np.ndarray:
    g = decomp.vectors[:, 0]
    return np.outer(g, g.conj())


@dataclass(frozen=True)
class OverlapReport:
    """Overlap of a small-block ground state with the reduced big-chain state."""

    x_prime: float
    m: int
    n: int
    boundary_width: int = 0
    optimized_x: float | None = None
    rounds: int = 0


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def overlap_x(omega_m: np.ndarray, omega_n: np.ndarray, placement: int = 0,
              optimize: bool = False, l: int = 1, max_rounds: int = 200,
              rel_tol: float = 1e-8) -> OverlapReport:
    """Overlap of an m-site ground state with the n-chain reduced state.

    x' = <omega_m| rho |omega_m> with rho the reduced density operator of
    omega_n on sites [placement, placement+m-1]. With ``optimize`` the
    overlap is additionally maximized over unitaries U, V acting on the
    leftmost / rightmost ``l`` sites of the block, by alternating polar
    updates of the linearized environment; the objective never decreases.
    """
    omega_m = np.asarray(omega_m, dtype=np.complex128).ravel()
    omega_n = np.asarray(omega_n, dtype=np.complex128).ravel()
    m = int(round(np.log2(omega_m.size)))
    n = int(round(np.log2(omega_n.size)))
    if m > n:
        raise ValueError("block must not exceed the chain")
    if placement < 0 or placement + m > n:
        raise ValueError(f"placement {placement} of {m} sites does not fit n={n}")

    rho = reduced_density(omega_n, (placement, placement + m - 1), n)
    x_prime = float(np.real(omega_m.conj() @ rho @ omega_m))

    if not optimize:
        return OverlapReport(x_prime=x_prime, m=m, n=n, boundary_width=l)

    if l >= m / 2:
        raise ValueError(f"boundary width l={l} would overlap on an {m}-site block")

    du = 2 ** l
    dmid = 2 ** (m - 2 * l)
    dv = 2 ** l
    psi = omega_m.reshape(du, dmid, dv)
    u = np.eye(du, dtype=np.complex128)
    v = np.eye(dv, dtype=np.complex128)

    def dressed_vec(u_, v_):
        t = np.einsum("ai,imb,cb->amc", u_, psi, v_)
        return t.reshape(-1)

    value = x_prime
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        phi = dressed_vec(u, v)
        w = (rho @ phi).reshape(du * dmid, dv)
        # update V: maximize Re tr(V^dag M) with M the right environment
        b = np.einsum("ai,imb->amb", u, psi).reshape(du * dmid, dv)
        m_env = w.T @ b.conj()
        v = _polar_unitary(m_env)
        # update U against the refreshed right edge
        phi = dressed_vec(u, v)
        w = (rho @ phi).reshape(du, dmid * dv)
        a = np.einsum("imb,cb->imc", psi, v).reshape(du, dmid * dv)
        m_env = w @ a.conj().T
        u = _polar_unitary(m_env)

        phi = dressed_vec(u, v)
        new_value = float(np.real(phi.conj() @ rho @ phi))
        if new_value < value - 1e-12:
            raise RuntimeError("overlap ascent decreased; environment update is wrong")
        if abs(new_value - value) <= rel_tol * max(abs(value), 1e-30):
            value = new_value
            break
        value = new_value

    return OverlapReport(x_prime=x_prime, m=m, n=n, boundary_width=l,
                         optimized_x=value, rounds=rounds)


# --- flat binary cache -------------------------------------------------
#
# Layout (all little-endian):
#   8 bytes   magic b"SGEDC\x00\x00\x01"
#   uint64    dimension D
#   float64 * D          energies, ascending
#   float64 * 2*D*D      eigenvectors, column by column, each entry re, im

_MAGIC = b"SGEDC\x00\x00\x01"


def save_decomposition(decomp: EigenDecomposition, path) -> None:
    d = decomp.dim
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", d))
        fh.write(decomp.energies.astype("<f8").tobytes())
        cols = decomp.vectors.T  # column j contiguous
        inter = np.empty((d, d, 2), dtype="<f8")
        inter[:, :, 0] = cols.real
        inter[:, :, 1] = cols.imag
        fh.write(inter.tobytes())


def load_decomposition(path) -> EigenDecomposition:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError("not a spinglue decomposition cache")
        (d,) = struct.unpack("<Q", fh.read(8))
        energies = np.frombuffer(fh.read(8 * d), dtype="<f8").copy()
        raw = np.frombuffer(fh.read(16 * d * d), dtype="<f8").reshape(d, d, 2)
        vectors = (raw[:, :, 0] + 1j * raw[:, :, 1]).T.copy()
    return EigenDecomposition(energies=energies, vectors=vectors)
