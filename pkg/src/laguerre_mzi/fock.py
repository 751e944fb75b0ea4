"""Brute-force two-mode Fock-space simulator.

Ground truth for the analytic parity signals, moments and Fisher
information. Basis states are |k, l> with k photons in mode a and l in mode b;
amplitude tables are indexed ``[k, l]``.

Number-conserving unitaries (beam splitters, phase shifters) act block by
block on the sectors of fixed total photon number N = k + l, so they are exact
as long as every occupied sector fits inside the per-mode cutoff. The
functions below grow the cutoff automatically to keep that true.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, pi
from typing import Callable, Literal, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.sparse import diags, identity, kron
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from .errors import DimensionError, DomainError, InvalidDensityError, TruncationError

Generator = Literal["J1", "J2", "J3"]
Mode = Literal["a", "b"]

DEFAULT_TAIL_TOL = 1e-12
SMALL_R = 1e-8


@dataclass(frozen=True)
class TwoModeState:
    """Pure state on the truncated space 0 <= k, l <= cutoff."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.ndim != 2 or amp.shape[0] != amp.shape[1]:
            raise DimensionError(f"amplitude table must be square, got {amp.shape}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def fock(cls, k: int, l: int, cutoff: int | None = None) -> "TwoModeState":
        cutoff = max(k, l) if cutoff is None else cutoff
        amp = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        amp[k, l] = 1.0
        return cls(amp)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "TwoModeState":
        return TwoModeState(self.amplitudes / self.norm())

    def max_total(self) -> int:
        """Largest k + l carrying nonzero amplitude (-1 for the zero vector)."""
        return _max_total(self.amplitudes[None])

    def embed(self, cutoff: int) -> "TwoModeState":
        return TwoModeState(_embed(self.amplitudes[None], cutoff)[0])

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def overlap(self, other: "TwoModeState") -> complex:
        c = max(self.cutoff, other.cutoff)
        return complex(np.vdot(self.embed(c).amplitudes, other.embed(c).amplitudes))

    def fidelity(self, other: "TwoModeState") -> float:
        return abs(self.overlap(other)) ** 2

    def to_json(self, atol: float = 0.0) -> dict:
        """Debug dump: nonzero amplitudes as ``[k, l, re, im]`` rows."""
        rows = [
            [int(k), int(l), float(self.amplitudes[k, l].real), float(self.amplitudes[k, l].imag)]
            for k, l in zip(*np.nonzero(np.abs(self.amplitudes) > atol))
        ]
        return {"cutoff": self.cutoff, "amplitudes": rows}


@dataclass(frozen=True)
class TwoModeDensity:
    """Mixed state stored as unnormalized pure branches: rho = sum_j |v_j><v_j|.

    Kraus channels produce exactly this form. The dense ``matrix`` is built
    on demand and is only practical for small cutoffs.
    """

    branches: np.ndarray

    def __post_init__(self):
        br = np.array(self.branches, dtype=complex)
        if br.ndim != 3 or br.shape[1] != br.shape[2]:
            raise DimensionError(f"branches must have shape (K, c+1, c+1), got {br.shape}")
        br.setflags(write=False)
        object.__setattr__(self, "branches", br)

    @classmethod
    def from_state(cls, state: TwoModeState) -> "TwoModeDensity":
        return cls(state.amplitudes[None])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, cutoff: int) -> "TwoModeDensity":
        dim = (cutoff + 1) ** 2
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (dim, dim):
            raise DimensionError(f"matrix must be {dim}x{dim}")
        if not np.allclose(m, m.conj().T, atol=1e-12, rtol=0):
            raise InvalidDensityError("matrix is not Hermitian")
        w, v = np.linalg.eigh(m)
        if w.min() < -1e-10:
            raise InvalidDensityError(f"negative eigenvalue {w.min():.3e}")
        keep = w > 0
        br = (v[:, keep] * np.sqrt(w[keep])).T.reshape(-1, cutoff + 1, cutoff + 1)
        return cls(br)

    @property
    def cutoff(self) -> int:
        return self.branches.shape[1] - 1

    @property
    def matrix(self) -> np.ndarray:
        vecs = self.branches.reshape(self.branches.shape[0], -1)
        return vecs.T @ vecs.conj()

    def trace(self) -> float:
        return float(np.sum(np.abs(self.branches) ** 2))

    def diagonal(self) -> np.ndarray:
        """Populations p[k, l]."""
        return np.sum(np.abs(self.branches) ** 2, axis=0)

    def max_total(self) -> int:
        return _max_total(self.branches)

    def embed(self, cutoff: int) -> "TwoModeDensity":
        return TwoModeDensity(_embed(self.branches, cutoff))

    def validate(self, tail_tol: float = DEFAULT_TAIL_TOL) -> None:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=1e-12, rtol=0):
            raise InvalidDensityError("density is not Hermitian")
        tr = np.trace(m).real
        if not (1 - tail_tol - 1e-12 <= tr <= 1 + 1e-12):
            raise InvalidDensityError(f"trace {tr!r} outside [1 - tail_tol, 1]")
        w = np.linalg.eigvalsh(m)
        if w.min() < -1e-10:
            raise InvalidDensityError(f"negative eigenvalue {w.min():.3e}")


StateLike = Union[TwoModeState, TwoModeDensity]


def _branches(x: StateLike) -> np.ndarray:
    if isinstance(x, TwoModeState):
        return x.amplitudes[None]
    return x.branches


def _max_total(br: np.ndarray) -> int:
    k, l = np.nonzero(np.any(br != 0, axis=0))
    return int((k + l).max()) if k.size else -1


def _embed(br: np.ndarray, cutoff: int) -> np.ndarray:
    c = br.shape[1] - 1
    if cutoff == c:
        return br
    if cutoff < c:
        if np.any(br[:, cutoff + 1 :, :]) or np.any(br[:, :, cutoff + 1 :]):
            raise DimensionError("cannot shrink cutoff below occupied levels")
        return br[:, : cutoff + 1, : cutoff + 1].copy()
    out = np.zeros((br.shape[0], cutoff + 1, cutoff + 1), dtype=complex)
    out[:, : c + 1, : c + 1] = br
    return out


# --------------------------------------------------------------------------
# Laguerre-excited squeezed state S(r)|n, n>
# --------------------------------------------------------------------------


def ladder_amplitudes(n: int, r: float, count: int) -> np.ndarray:
    """Amplitudes c_m of S(r)|n,n> = sum_m c_m |m,m>, for m < count.

    Uses the Laguerre expansion L_n(u a^dag b^dag) = sum_k C(n,k) (-u)^k/k! (a^dag b^dag)^k
    acting on the two-mode squeezed vacuum, with u = 2 / sinh(2r).
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if r < 0:
        raise DomainError("squeezing parameter must be >= 0")
    m = np.arange(count, dtype=float)
    if r < SMALL_R:
        # u diverges at r = 0 while S(0)|n,n> = |n,n> is regular
        return (m == n).astype(float)
    th = np.tanh(r)
    u = 2.0 / np.sinh(2 * r)
    total = np.zeros(count)
    falling = np.ones(count)  # m (m-1) ... (m-k+1)
    for k in range(n + 1):
        if k > 0:
            falling = falling * (m - (k - 1))
        with np.errstate(under="ignore"):
            powers = np.where(m >= k, th ** np.maximum(m - k, 0), 0.0)
        total += comb(n, k) * (-u) ** k / factorial(k) * powers * falling
    return (-th) ** n / np.cosh(r) * total


def ladder_tail(n: int, r: float, cutoff: int) -> float:
    """Exact squared norm of S(r)|n,n> carried by |m,m> with m > cutoff."""
    if r < SMALL_R:
        return 0.0 if cutoff >= n else 1.0
    count = max(2 * cutoff + 64, 128)
    while True:
        c2 = ladder_amplitudes(n, r, count) ** 2
        if c2[-32:].sum() < 1e-40 * max(c2.sum(), 1e-300) or count > 200_000:
            return float(c2[cutoff + 1 :].sum())
        count *= 2


def select_cutoff(n: int, r: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest ladder cutoff M >= n whose neglected norm is below tail_tol."""
    if r < SMALL_R:
        return n
    count = 128
    while True:
        c2 = ladder_amplitudes(n, r, count) ** 2
        if c2[-32:].sum() < 1e-40 or count > 200_000:
            break
        count *= 2
    tails = np.cumsum(c2[::-1])[::-1]  # tails[m] = sum_{j >= m}
    for cutoff in range(n, count - 1):
        if tails[cutoff + 1] < tail_tol:
            return cutoff
    raise TruncationError(f"no cutoff below {count} meets tail_tol={tail_tol}")


def build_laguerre_state(
    n: int, r: float, cutoff: int | None = None, tail_tol: float = DEFAULT_TAIL_TOL
) -> TwoModeState:
    """S(r)|n,n> on the diagonal ladder |m,m>, m <= cutoff, renormalized.

    ``cutoff=None`` picks the smallest cutoff meeting ``tail_tol``; an explicit
    cutoff that leaves more than ``tail_tol`` of the norm behind raises
    TruncationError.
    """
    if r < 0:
        raise DomainError("squeezing parameter must be >= 0")
    if cutoff is None:
        cutoff = select_cutoff(n, r, tail_tol)
    elif cutoff < n:
        raise TruncationError(f"cutoff {cutoff} < n = {n}")
    else:
        tail = ladder_tail(n, r, cutoff)
        if tail > tail_tol:
            raise TruncationError(f"cutoff {cutoff} leaves tail {tail:.3e} > {tail_tol:.1e}")
    c = ladder_amplitudes(n, r, cutoff + 1)
    amp = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    idx = np.arange(cutoff + 1)
    amp[idx, idx] = c / np.linalg.norm(c)
    return TwoModeState(amp)


def squeeze_by_expm(state: TwoModeState, r: float) -> TwoModeState:
    """exp{r(a^dag b^dag - ab)} applied on the full truncated two-mode space.

    Independent of the Laguerre expansion; used to cross-check it.
    """
    c = state.cutoff
    a = diags(np.sqrt(np.arange(1, c + 1)), 1, format="csr")
    eye = identity(c + 1, format="csr")
    A = kron(a, eye, format="csr")
    B = kron(eye, a, format="csr")
    gen = r * (A.T @ B.T - A @ B)
    out = expm_multiply(gen, state.vector())
    return TwoModeState(out.reshape(c + 1, c + 1))


# --------------------------------------------------------------------------
# Number-conserving unitaries
# --------------------------------------------------------------------------


def _offdiag(N: int) -> np.ndarray:
    k = np.arange(N)
    return 0.5 * np.sqrt((k + 1.0) * (N - k))


@lru_cache(maxsize=4096)
def _block_eig(generator: str, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a generator on the sector basis (k, N-k), k = 0..N."""
    if generator == "J3":
        k = np.arange(N + 1)
        return 0.5 * (2 * k - N), np.eye(N + 1, dtype=complex)
    if N == 0:
        return np.zeros(1), np.ones((1, 1), dtype=complex)
    w, v = eigh_tridiagonal(np.zeros(N + 1), _offdiag(N))
    v = v.astype(complex)
    if generator == "J2":
        # J2 = P J1 P^dag with P = diag((-i)^k)
        v = ((-1j) ** np.arange(N + 1))[:, None] * v
    elif generator != "J1":
        raise ValueError(f"unknown generator {generator!r}")
    return w, v


def generator_block(generator: Generator, N: int) -> np.ndarray:
    """Dense matrix of J1, J2 or J3 on sector N (rows/cols indexed by k)."""
    if generator == "J3":
        return np.diag(0.5 * (2 * np.arange(N + 1) - N)).astype(complex)
    off = _offdiag(N)
    m = np.diag(off, -1).astype(complex)  # <k+1| a^dag b |k> / 2
    if generator == "J1":
        m = m + m.T
    elif generator == "J2":
        m = -1j * m
        m = m + m.conj().T
    else:
        raise ValueError(f"unknown generator {generator!r}")
    return m


def _block_unitary(generator: str, N: int, angle: float) -> np.ndarray:
    w, v = _block_eig(generator, N)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


@lru_cache(maxsize=1024)
def _sector_index(cutoff: int, N: int) -> np.ndarray:
    return np.arange(max(0, N - cutoff), min(N, cutoff) + 1)


@dataclass(frozen=True)
class ModeOperatorBlocks:
    """Two-mode operator conserving k + l, one dense block per sector N."""

    blocks: tuple

    @property
    def max_total(self) -> int:
        return len(self.blocks) - 1

    def __matmul__(self, other: "ModeOperatorBlocks") -> "ModeOperatorBlocks":
        n = min(len(self.blocks), len(other.blocks))
        return ModeOperatorBlocks(tuple(self.blocks[i] @ other.blocks[i] for i in range(n)))

    def dagger(self) -> "ModeOperatorBlocks":
        return ModeOperatorBlocks(tuple(b.conj().T for b in self.blocks))

    def distance(self, other: "ModeOperatorBlocks") -> float:
        """Operator 2-norm of the difference (max over sectors)."""
        n = min(len(self.blocks), len(other.blocks))
        return max(float(np.linalg.norm(self.blocks[i] - other.blocks[i], 2)) for i in range(n))

    def unitarity_error(self) -> float:
        return max(
            float(np.abs(b @ b.conj().T - np.eye(b.shape[0])).max()) for b in self.blocks
        )

    def dense(self, cutoff: int | None = None) -> np.ndarray:
        """Matrix on the per-mode space with the given cutoff (sectors <= max_total)."""
        cutoff = self.max_total if cutoff is None else cutoff
        dim = (cutoff + 1) ** 2
        out = np.zeros((dim, dim), dtype=complex)
        for N, blk in enumerate(self.blocks):
            ks = np.arange(N + 1)
            if N > cutoff:
                break
            flat = ks * (cutoff + 1) + (N - ks)
            out[np.ix_(flat, flat)] = blk
        return out

    def apply(self, x: StateLike) -> StateLike:
        br = _branches(x)
        need = _max_total(br)
        if need > self.max_total:
            raise DimensionError(f"state occupies sector {need} > {self.max_total}")
        out = _apply_blocks(br, self.blocks, need)
        return TwoModeState(out[0]) if isinstance(x, TwoModeState) else TwoModeDensity(out)


def number_conserving_unitary(generator: Generator, angle: float, max_total: int) -> ModeOperatorBlocks:
    """exp(-i * angle * generator) on sectors N = 0..max_total."""
    return ModeOperatorBlocks(tuple(_block_unitary(generator, N, angle) for N in range(max_total + 1)))


def _apply_blocks(br: np.ndarray, block_fn, need: int) -> np.ndarray:
    c = br.shape[1] - 1
    if need > c:
        br = _embed(br, need)
        c = need
    out = np.zeros_like(br)
    for N in range(need + 1):
        ks = _sector_index(c, N)
        vec = br[:, ks, N - ks]
        if not vec.any():
            continue
        u = block_fn[N] if not callable(block_fn) else block_fn(N)
        out[:, ks, N - ks] = vec @ u.T
    return out


def apply_number_conserving_unitary(x: StateLike, generator: Generator, angle: float) -> StateLike:
    """Apply exp(-i * angle * generator), generator in {J1, J2, J3}.

    The result's cutoff is raised to the largest occupied total photon number
    when needed, so every occupied sector is treated exactly.
    """
    if not np.isfinite(angle):
        raise DomainError("angle must be finite")
    br = _branches(x)
    need = _max_total(br)
    if generator == "J3":
        c = max(br.shape[1] - 1, 0)
        k = np.arange(c + 1)
        phase = np.exp(-1j * angle * 0.5 * (k[:, None] - k[None, :]))
        out = br * phase[None]
    else:
        if generator not in ("J1", "J2"):
            raise ValueError(f"unknown generator {generator!r}")
        out = _apply_blocks(br, lambda N: _block_unitary(generator, N, angle), need)
    return TwoModeState(out[0]) if isinstance(x, TwoModeState) else TwoModeDensity(out)


def beam_splitter_1(x: StateLike) -> StateLike:
    """BS1 = exp(-i pi J1 / 2)."""
    return apply_number_conserving_unitary(x, "J1", pi / 2)


def beam_splitter_2(x: StateLike) -> StateLike:
    """BS2 = exp(+i pi J1 / 2)."""
    return apply_number_conserving_unitary(x, "J1", -pi / 2)


def phase_shift(x: StateLike, phi: float) -> StateLike:
    """U(phi) = exp(-i phi J3)."""
    return apply_number_conserving_unitary(x, "J3", phi)


def mzi_identity_error(phi: float, max_total: int = 8) -> float:
    """|| e^{i pi J1/2} e^{-i phi J3} e^{-i pi J1/2} - e^{-i phi J2} || on sectors <= max_total."""
    b1 = number_conserving_unitary("J1", pi / 2, max_total)
    b2 = number_conserving_unitary("J1", -pi / 2, max_total)
    ps = number_conserving_unitary("J3", phi, max_total)
    lhs = b2 @ ps @ b1
    rhs = number_conserving_unitary("J2", phi, max_total)
    return lhs.distance(rhs)


# --------------------------------------------------------------------------
# Loss, parity, moments
# --------------------------------------------------------------------------


def _loss_factors(levels: np.ndarray, j: int, T: float) -> np.ndarray:
    """sqrt(C(l, j) (1-T)^j T^(l-j)) for each l in levels (zero where l < j)."""
    out = np.zeros(levels.shape)
    ok = levels >= j
    l = levels[ok].astype(float)
    logp = gammaln(l + 1) - gammaln(j + 1) - gammaln(l - j + 1) + j * np.log1p(-T) + (l - j) * np.log(T)
    out[ok] = np.exp(0.5 * logp)
    return out


def apply_loss_channel(x: StateLike, mode: Mode, transmissivity: float) -> TwoModeDensity:
    """Beam-splitter photon loss on one mode as a Kraus sum.

    K_j = sqrt((1-T)^j / j!) T^{n/2} c^j with c the chosen mode's annihilator.
    Each input branch yields one output branch per j; all-zero branches are
    dropped. T = 1 returns the input unchanged.
    """
    T = float(transmissivity)
    if not (0 < T <= 1):
        raise DomainError(f"transmissivity must lie in (0, 1], got {T}")
    if mode not in ("a", "b"):
        raise ValueError(f"mode must be 'a' or 'b', got {mode!r}")
    br = _branches(x)
    if T == 1.0:
        return TwoModeDensity(br.copy())
    if mode == "a":
        br = br.transpose(0, 2, 1)
    c = br.shape[1] - 1
    levels = np.arange(c + 1)
    occupied = np.nonzero(np.any(br != 0, axis=(0, 1)))[0]
    lmax = int(occupied.max()) if occupied.size else 0
    out = []
    for j in range(lmax + 1):
        fac = _loss_factors(levels, j, T)
        shifted = np.zeros_like(br)
        shifted[:, :, : c + 1 - j] = br[:, :, j:] * fac[None, None, j:]
        out.append(shifted)
    result = np.concatenate(out, axis=0)
    keep = np.any(result != 0, axis=(1, 2))
    result = result[keep]
    if mode == "a":
        result = result.transpose(0, 2, 1)
    return TwoModeDensity(result)


def parity_expectation(x: StateLike, mode: Mode = "b") -> float:
    """<(-1)^{n_mode}>."""
    p = np.sum(np.abs(_branches(x)) ** 2, axis=0)
    sign = (-1.0) ** np.arange(p.shape[0])
    if mode == "b":
        return float(np.sum(p * sign[None, :]))
    if mode == "a":
        return float(np.sum(p * sign[:, None]))
    raise ValueError(f"mode must be 'a' or 'b', got {mode!r}")


def photon_moments(x: StateLike):
    """(<n_a>, <n_b>, <n_a^2>, <n_b^2>, <n_a n_b>) as a MomentSet."""
    from .qfi import MomentSet

    p = np.sum(np.abs(_branches(x)) ** 2, axis=0)
    k = np.arange(p.shape[0], dtype=float)
    ka, kb = k[:, None], k[None, :]
    return MomentSet(
        mean_a=float(np.sum(p * ka)),
        mean_b=float(np.sum(p * kb)),
        mean_a2=float(np.sum(p * ka**2)),
        mean_b2=float(np.sum(p * kb**2)),
        cross=float(np.sum(p * ka * kb)),
    )


def probe_state(n: int, r: float, tail_tol: float = DEFAULT_TAIL_TOL, bs_sign: int = 1) -> TwoModeState:
    """exp(-i sign pi J1 / 2) S(r)|n,n>: the state inside the interferometer."""
    lagu = build_laguerre_state(n, r, tail_tol=tail_tol)
    return apply_number_conserving_unitary(lagu, "J1", bs_sign * pi / 2)


def pure_state_qfi(x: TwoModeState) -> float:
    """4 Var(J3) after BS1, the Fisher information of the phase imprinted by exp(-i phi J3)."""
    psi = beam_splitter_1(x)
    p = np.abs(psi.amplitudes) ** 2
    k = np.arange(psi.cutoff + 1)
    j3 = 0.5 * (k[:, None] - k[None, :])
    mean = np.sum(p * j3)
    return float(4 * (np.sum(p * j3**2) - mean**2))


def mixed_state_qfi(
    rho_of_phi: Callable[[float], TwoModeDensity], phi: float, fd_step: float = 1e-4, eig_floor: float = 1e-12
) -> float:
    """Exact QFI  2 sum_{ij} |<i|d rho|j>|^2 / (l_i + l_j)  over pairs with l_i + l_j > eig_floor.

    d rho / d phi is a Richardson-extrapolated central difference. The
    eigenproblem is restricted to basis states occupied by any evaluation.
    """
    h = fd_step
    rhos = {s: rho_of_phi(phi + s) for s in (0.0, h, -h, h / 2, -h / 2)}
    c = max(d.cutoff for d in rhos.values())
    occupied = np.zeros((c + 1) ** 2, dtype=bool)
    for key, d in rhos.items():
        d = d.embed(c)
        rhos[key] = d
        occupied |= np.any(d.branches.reshape(d.branches.shape[0], -1) != 0, axis=0)
    idx = np.nonzero(occupied)[0]

    def dense(d: TwoModeDensity) -> np.ndarray:
        v = d.branches.reshape(d.branches.shape[0], -1)[:, idx]
        return v.T @ v.conj()

    rho = dense(rhos[0.0])
    d_h = (dense(rhos[h]) - dense(rhos[-h])) / (2 * h)
    d_h2 = (dense(rhos[h / 2]) - dense(rhos[-h / 2])) / h
    drho = (4 * d_h2 - d_h) / 3
    w, v = np.linalg.eigh(rho)
    if w.min() < -1e-10:
        raise InvalidDensityError(f"negative eigenvalue {w.min():.3e}")
    dm = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    mask = denom > eig_floor
    return float(2 * np.sum(np.abs(dm[mask]) ** 2 / denom[mask]))


def lossy_probe_family(
    n: int, r: float, eta: float, tail_tol: float = 1e-5, cutoff: int | None = None
) -> Callable[[float], TwoModeDensity]:
    """phi -> exp(-i phi J3) L_eta^(b)(BS1 S(r)|n,n>), the lossy phase-encoded probe.

    Loss on mode b commutes with the phase shifter up to a Kraus-dependent
    global phase, so its placement relative to the shifter does not matter.
    """
    lagu = build_laguerre_state(n, r, cutoff=cutoff, tail_tol=tail_tol)
    lossy = apply_loss_channel(beam_splitter_1(lagu), "b", eta)

    def rho(phi: float) -> TwoModeDensity:
        return phase_shift(lossy, phi)

    return rho


Scenario = Literal["ideal", "external", "internal"]


def mzi_parity(
    state: TwoModeState, physical_phi: float, scenario: Scenario = "ideal", transmissivity: float = 1.0
) -> float:
    """Parity of output mode b for BS2 U(phi) BS1 with optional loss on mode b.

    external: loss after BS2 (before the detector); internal: loss between the
    phase shifter and BS2.
    """
    inside = phase_shift(beam_splitter_1(state), physical_phi)
    if scenario == "internal":
        out = beam_splitter_2(apply_loss_channel(inside, "b", transmissivity))
        return parity_expectation(out)
    out = beam_splitter_2(inside)
    if scenario == "external":
        return parity_expectation(apply_loss_channel(out, "b", transmissivity))
    if scenario != "ideal":
        raise ValueError(f"unknown scenario {scenario!r}")
    return parity_expectation(out)
