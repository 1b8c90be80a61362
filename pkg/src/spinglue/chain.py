"""Dense spin-1/2 chain Hamiltonians built from two-site terms.

Everything here is dense and deliberately small (default cap of 16 spins):
the package is a verification instrument, not a production solver. All
returned arrays are copies owned by the caller; constructed objects are
immutable and safe to share between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)
ID2 = np.eye(2, dtype=np.complex128)

DEFAULT_SITE_CAP = 16
HERMITICITY_TOL = 1e-12

TERM_KINDS = ("ising_zz", "field_x", "field_z", "heisenberg", "custom")


class SiteCapError(Exception):
    """Chain would exceed the configured dense-representation cap."""


def spectral_norm(m: np.ndarray) -> float:
    """Operator 2-norm via the largest eigenvalue of m† m."""
    evals = np.linalg.eigvalsh(m.conj().T @ m)
    return float(np.sqrt(max(evals[-1], 0.0)))


def kron_all(ops: list[np.ndarray]) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


@dataclass(frozen=True)
class SupportInterval:
    """Inclusive, contiguous range of chain sites [lo, hi]."""

    lo: int
    hi: int

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ValueError(f"invalid support interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def intersects(self, other: "SupportInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "SupportInterval") -> "SupportInterval":
        return SupportInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def shifted(self, offset: int) -> "SupportInterval":
        return SupportInterval(self.lo + offset, self.hi + offset)


def as_interval(support) -> SupportInterval:
    if isinstance(support, SupportInterval):
        return support
    lo, hi = support
    return SupportInterval(int(lo), int(hi))


@dataclass(frozen=True)
class LocalTerm:
    """One two-site term acting on spins (site, site+1)."""

    site: int
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.site < 0:
            raise ValueError("site index must be nonnegative")
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (4, 4):
            raise ValueError(f"term matrix must be 4x4, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("term matrix has non-finite entries")
        if spectral_norm(m - m.conj().T) > HERMITICITY_TOL:
            raise ValueError(f"term '{self.label}' is not Hermitian")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def build_local_term(kind: str, params, site: int, n: int | None = None,
                     matrix: np.ndarray | None = None, label: str = "") -> LocalTerm:
    """Construct a two-site term of the given kind on bond (site, site+1).

    Single-site field kinds are symmetrized onto the bond with weight 1/2
    per side; when the chain length ``n`` is supplied, the outermost sites
    get weight 1 instead, so that summing all bonds reproduces the full
    field on every site exactly.

    kinds and params:
      ising_zz    [j]            j * sz(x)sz
      field_x     [h]            h * (w_l sx(x)id + w_r id(x)sx)
      field_z     [h]            h * (w_l sz(x)id + w_r id(x)sz)
      heisenberg  [jx, jy, jz]   jx sx(x)sx + jy sy(x)sy + jz sz(x)sz
      custom      []             `matrix` used verbatim (must be Hermitian)
    """
    params = [float(p) for p in (params or [])]
    if kind not in TERM_KINDS:
        raise ValueError(f"unknown term kind '{kind}'")

    if kind == "custom":
        if matrix is None:
            raise ValueError("custom term requires a matrix")
        return LocalTerm(site, np.asarray(matrix), label or "custom")

    if kind == "ising_zz":
        (j,) = params
        return LocalTerm(site, j * np.kron(SZ, SZ), label or f"zz[{site}]")

    if kind == "heisenberg":
        jx, jy, jz = params
        m = jx * np.kron(SX, SX) + jy * np.kron(SY, SY) + jz * np.kron(SZ, SZ)
        return LocalTerm(site, m, label or f"heis[{site}]")

    # field terms, spread over the bond
    (h,) = params
    op = SX if kind == "field_x" else SZ
    w_left, w_right = 0.5, 0.5
    if n is not None:
        if site > n - 2:
            raise ValueError(f"bond site {site} out of range for n={n}")
        if site == 0:
            w_left = 1.0
        if site + 1 == n - 1:
            w_right = 1.0
    m = h * (w_left * np.kron(op, ID2) + w_right * np.kron(ID2, op))
    return LocalTerm(site, m, label or f"{kind}[{site}]")


@dataclass(frozen=True)
class ChainHamiltonian:
    """Open chain of n spin-1/2 sites with a cached dense matrix.

    ``dense`` equals the identity-padded sum of ``terms`` minus
    ``energy_shift`` times the identity.
    """

    n: int
    terms: tuple[LocalTerm, ...]
    dense: np.ndarray
    energy_shift: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.dense, dtype=np.complex128).copy()
        d.setflags(write=False)
        object.__setattr__(self, "dense", d)
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def dim(self) -> int:
        return 2 ** self.n


def assemble_chain(terms, n: int, shift_ground_to_zero: bool = False,
                   cap: int = DEFAULT_SITE_CAP) -> ChainHamiltonian:
    """Sum identity-padded two-site terms into a dense chain Hamiltonian.

    With ``shift_ground_to_zero`` the ground energy of the raw sum is
    computed and subtracted, so the stored matrix has E_0 = 0; the
    subtracted constant is recorded in ``energy_shift``.
    """
    if n < 2:
        raise ValueError("chain needs at least 2 sites")
    if n > cap:
        raise SiteCapError(f"n={n} exceeds dense cap {cap}")
    terms = tuple(terms)
    dim = 2 ** n
    dense = np.zeros((dim, dim), dtype=np.complex128)
    for t in terms:
        if t.site > n - 2:
            raise ValueError(f"term on bond {t.site} does not fit n={n}")
        dense += embed_operator(t.matrix, SupportInterval(t.site, t.site + 1), n)
    shift = 0.0
    if shift_ground_to_zero:
        shift = float(np.linalg.eigvalsh(dense)[0])
        dense = dense - shift * np.eye(dim)
    return ChainHamiltonian(n=n, terms=terms, dense=dense, energy_shift=shift)


def embed_operator(op: np.ndarray, support, n: int) -> np.ndarray:
    """Pad an operator on a contiguous site interval with identities."""
    iv = as_interval(support)
    if iv.hi >= n:
        raise ValueError(f"support {iv} outside chain of {n} sites")
    op = np.asarray(op, dtype=np.complex128)
    d = 2 ** iv.width
    if op.shape != (d, d):
        raise ValueError(f"operator is {op.shape}, support {iv} needs {d}x{d}")
    left = np.eye(2 ** iv.lo, dtype=np.complex128)
    right = np.eye(2 ** (n - 1 - iv.hi), dtype=np.complex128)
    return np.kron(np.kron(left, op), right)


def _split_dims(iv: SupportInterval, n: int) -> tuple[int, int, int]:
    return 2 ** iv.lo, 2 ** iv.width, 2 ** (n - 1 - iv.hi)


def partial_trace(rho: np.ndarray, keep, n: int | None = None) -> np.ndarray:
    """Trace a density operator down to a contiguous interval of sites."""
    rho = np.asarray(rho, dtype=np.complex128)
    if n is None:
        n = int(round(np.log2(rho.shape[0])))
    if rho.shape != (2 ** n, 2 ** n):
        raise ValueError("density operator dimension is not 2^n")
    iv = as_interval(keep)
    dl, dm, dr = _split_dims(iv, n)
    r = rho.reshape(dl, dm, dr, dl, dm, dr)
    return np.einsum("lmrlnr->mn", r)


def reduced_density(psi: np.ndarray, keep, n: int | None = None) -> np.ndarray:
    """Reduced density operator of a pure state on a contiguous interval."""
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if n is None:
        n = int(round(np.log2(psi.size)))
    if psi.size != 2 ** n:
        raise ValueError("state dimension is not 2^n")
    iv = as_interval(keep)
    dl, dm, dr = _split_dims(iv, n)
    t = psi.reshape(dl, dm, dr)
    return np.tensordot(t, t.conj(), axes=([0, 2], [0, 2]))


def apply_on_interval(psi: np.ndarray, u: np.ndarray, support, n: int) -> np.ndarray:
    """Apply a unitary supported on a contiguous interval to a chain state."""
    iv = as_interval(support)
    dl, dm, dr = _split_dims(iv, n)
    if u.shape != (dm, dm):
        raise ValueError(f"unitary is {u.shape}, support {iv} needs {dm}x{dm}")
    t = np.asarray(psi).reshape(dl, dm, dr)
    return np.einsum("ab,lbr->lar", u, t).reshape(-1)


def transverse_field_ising(n: int, coupling: float = 1.0, field: float = 1.5,
                           shift_ground_to_zero: bool = True,
                           boundary: str = "full",
                           cap: int = DEFAULT_SITE_CAP) -> ChainHamiltonian:
    """H = -coupling * sum_j sz_j sz_{j+1} - field * sum_j sx_j, open ends.

    The default field 1.5 sits well inside the polarized gapped phase, so
    small blocks already look locally like long chains.

    boundary="full" gives the textbook chain (every site feels the full
    field). boundary="uniform" keeps the half-weight field on the edge
    sites too; then dropping any bond splits the chain into two smaller
    members of the *same* family, which is what the doubling recursion
    needs to stay self-consistent across levels.
    """
    if boundary not in ("full", "uniform"):
        raise ValueError(f"unknown boundary mode '{boundary}'")
    terms = []
    for j in range(n - 1):
        terms.append(build_local_term("ising_zz", [-coupling], j))
        terms.append(build_local_term("field_x", [-field], j,
                                      n=n if boundary == "full" else None))
    return assemble_chain(terms, n, shift_ground_to_zero=shift_ground_to_zero, cap=cap)


def tfim_family(coupling: float = 1.0, field: float = 1.5,
                cap: int = DEFAULT_SITE_CAP):
    """Size -> Hamiltonian builder for the gluing recursion.

    Uses uniform bond weights so every block sub-Hamiltonian is itself the
    family member of its size, with ground energy shifted to zero.
    """
    def builder(n: int) -> ChainHamiltonian:
        return transverse_field_ising(n, coupling=coupling, field=field,
                                      boundary="uniform", cap=cap)

    return builder


def heisenberg_chain(n: int, jx: float = 1.0, jy: float = 1.0, jz: float = 1.0,
                     field_z: float = 0.0, shift_ground_to_zero: bool = True,
                     cap: int = DEFAULT_SITE_CAP) -> ChainHamiltonian:
    """Nearest-neighbour Heisenberg chain with optional longitudinal field."""
    terms = []
    for j in range(n - 1):
        terms.append(build_local_term("heisenberg", [jx, jy, jz], j))
        if field_z != 0.0:
            terms.append(build_local_term("field_z", [field_z], j, n=n))
    return assemble_chain(terms, n, shift_ground_to_zero=shift_ground_to_zero, cap=cap)


MODEL_BUILDERS = {
    "tfim": transverse_field_ising,
    "heisenberg": heisenberg_chain,
}


def build_model(kind: str, n: int, cap: int = DEFAULT_SITE_CAP, **couplings) -> ChainHamiltonian:
    """Build a named Hamiltonian family member, ground energy shifted to zero."""
    try:
        builder = MODEL_BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown model kind '{kind}'") from None
    return builder(n, cap=cap, **couplings)
