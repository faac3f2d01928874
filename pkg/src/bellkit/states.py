"""Quantum state catalog and measurement statistics.

Bipartite states live on the |s_A,m_A> x |s_B,m_B> product basis.  Pure
states are stored as d_A x d_B coefficient matrices (so correlators cost
O(d^3)); density matrices are only materialized for genuinely mixed
states (Werner, separable mixtures).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DegenerateConditionError, ValidationError
from .spin import (
    HermitianObservable,
    SpinQuantum,
    SpinRep,
    UnitVector,
    build_spin_rep,
    clebsch_gordan,
    sign_projectors,
    spin_component,
)

PURE_DIM_CAP = 4097
MIXED_DIM_CAP = 4096


@dataclass(frozen=True)
class MeasurementSetting:
    """One subsystem measurement: side, spin direction, zero-bin policy."""

    side: str  # "A" or "B"
    direction: UnitVector
    zero_policy: str = "plus"

    def __post_init__(self):
        if self.side not in ("A", "B"):
            raise ValidationError(f"side must be 'A' or 'B', got {self.side!r}")


def _fix_global_phase(array: np.ndarray) -> np.ndarray:
    """Make the first nonzero amplitude (row-major) real and positive."""
    flat = array.ravel()
    idx = np.flatnonzero(np.abs(flat) > 1e-14)
    if len(idx) == 0:
        return array
    ph = flat[idx[0]] / abs(flat[idx[0]])
    return array / ph


@dataclass(frozen=True)
class BipartiteState:
    """Pure (coefficient matrix) or mixed (density matrix) bipartite state."""

    kind: str  # "pure" | "mixed"
    s_a: SpinQuantum
    s_b: SpinQuantum
    psi: np.ndarray | None = None
    rho: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d_a, d_b = self.s_a.dim, self.s_b.dim
        if self.kind == "pure":
            if d_a > PURE_DIM_CAP or d_b > PURE_DIM_CAP:
                raise CapacityError("pure-state dimension cap exceeded")
            if self.psi is None or self.psi.shape != (d_a, d_b):
                raise ValidationError("pure state needs a d_A x d_B coefficient matrix")
            norm2 = float(np.sum(np.abs(self.psi) ** 2))
            if abs(norm2 - 1.0) > 1e-10:
                raise ValidationError(f"pure state not normalized: |psi|^2 = {norm2}")
        elif self.kind == "mixed":
            if d_a * d_b > MIXED_DIM_CAP:
                raise CapacityError("mixed-state dimension cap exceeded")
            if self.rho is None or self.rho.shape != (d_a * d_b, d_a * d_b):
                raise ValidationError("mixed state needs a (d_A d_B)^2 density matrix")
            if np.max(np.abs(self.rho - self.rho.conj().T)) > 1e-10:
                raise ValidationError("density matrix not Hermitian")
            tr = float(np.real(np.trace(self.rho)))
            if abs(tr - 1.0) > 1e-10:
                raise ValidationError(f"density matrix trace {tr} != 1")
            if float(np.min(np.linalg.eigvalsh(self.rho))) < -1e-10:
                raise ValidationError("density matrix not positive semidefinite")
        else:
            raise ValidationError(f"unknown state kind {self.kind!r}")

    @property
    def dims(self):
        return self.s_a.dim, self.s_b.dim

    def density(self) -> np.ndarray:
        """Full density matrix (materializes |psi><psi| for pure states)."""
        if self.kind == "mixed":
            return self.rho
        vec = self.psi.ravel()
        return np.outer(vec, vec.conj())

    def reduced(self, side: str) -> np.ndarray:
        """Reduced density matrix of one subsystem."""
        d_a, d_b = self.dims
        if self.kind == "pure":
            if side == "A":
                return self.psi @ self.psi.conj().T
            return self.psi.T @ self.psi.conj()
        r = self.rho.reshape(d_a, d_b, d_a, d_b)
        if side == "A":
            return np.einsum("ajbj->ab", r)
        return np.einsum("iaib->ab", r)


def expect_product(state: BipartiteState, mat_a: np.ndarray, mat_b: np.ndarray) -> float:
    """<A (x) B> for Hermitian A, B (real part; imaginary part is noise)."""
    d_a, d_b = state.dims
    if mat_a.shape != (d_a, d_a) or mat_b.shape != (d_b, d_b):
        raise ValidationError("observable dimensions do not match the state")
    if state.kind == "pure":
        val = np.trace(state.psi.conj().T @ mat_a @ state.psi @ mat_b.T)
    else:
        r = state.rho.reshape(d_a, d_b, d_a, d_b)
        val = np.einsum("ac,bd,cdab->", mat_a, mat_b, r)
    return float(np.real(val))


def expect_product_complex(state: BipartiteState, mat_a, mat_b) -> complex:
    """Like expect_product but keeps the imaginary part (non-Hermitian A, B)."""
    d_a, d_b = state.dims
    if state.kind == "pure":
        return complex(np.trace(state.psi.conj().T @ mat_a @ state.psi @ mat_b.T))
    r = state.rho.reshape(d_a, d_b, d_a, d_b)
    return complex(np.einsum("ac,bd,cdab->", mat_a, mat_b, r))


def expect_side(state: BipartiteState, mat: np.ndarray, side: str) -> float:
    """Expectation of a single-subsystem observable."""
    red = state.reduced(side)
    if mat.shape != red.shape:
        raise ValidationError("observable dimension does not match the subsystem")
    return float(np.real(np.trace(red @ mat)))


def _as_matrix(obs) -> np.ndarray:
    return obs.matrix if isinstance(obs, HermitianObservable) else np.asarray(obs)


# ---------------------------------------------------------------------------
# constructors


def maximally_entangled(n: int) -> BipartiteState:
    """sum_m |s,m>_A |s,m>_B / sqrt(n+1) with s = n/2."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    d = n + 1
    psi = np.eye(d, dtype=complex) / np.sqrt(d)
    sq = SpinQuantum(n)
    return BipartiteState("pure", sq, sq, psi=psi,
                          meta={"family": "maximally_entangled", "n": n, "N_A": n, "N_B": n})


def relative_phase(n: int, theta: float) -> BipartiteState:
    """sum_k exp(i k theta) |n/2,k>_A |n/2,-k>_B / sqrt(n+1)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    d = n + 1
    s = n / 2.0
    psi = np.zeros((d, d), dtype=complex)
    for i in range(d):
        k = s - i          # m_A, basis order m = s ... -s
        j = d - 1 - i      # index of m_B = -k
        psi[i, j] = np.exp(1j * k * theta)
    psi /= np.sqrt(d)
    psi = _fix_global_phase(psi)
    sq = SpinQuantum(n)
    return BipartiteState("pure", sq, sq, psi=psi,
                          meta={"family": "relative_phase", "n": n, "theta": theta,
                                "N_A": n, "N_B": n})


def flip_operator(d: int) -> np.ndarray:
    """V |k>|l> = |l>|k> on the d x d product space."""
    v = np.zeros((d * d, d * d))
    for k in range(d):
        for l in range(d):
            v[l * d + k, k * d + l] = 1.0
    return v


def werner(n: int, phi: float) -> BipartiteState:
    """Werner state (d^3-d)^{-1} ((d-phi) 1 + (d phi - 1) V), d = n+1."""
    if not -1.0 <= phi <= 1.0:
        raise ValidationError("phi must lie in [-1, 1]")
    if n < 1:
        raise ValidationError("n must be >= 1")
    d = n + 1
    v = flip_operator(d)
    rho = ((d - phi) * np.eye(d * d) + (d * phi - 1) * v) / (d ** 3 - d)
    sq = SpinQuantum(n)
    return BipartiteState("mixed", sq, sq, rho=rho.astype(complex),
                          meta={"family": "werner", "n": n, "phi": phi,
                                "N_A": n, "N_B": n})


def angular_momentum_eigenstate(n_a: int, n_b: int, j_total, k_total) -> BipartiteState:
    """Two spins n_A/2, n_B/2 coupled to total (J, K) via Clebsch-Gordan
    coefficients; global phase fixed to first-nonzero-positive."""
    ja, jb = n_a / 2.0, n_b / 2.0
    if not (abs(ja - jb) - 1e-9 <= j_total <= ja + jb + 1e-9):
        raise ValidationError("triangle rule violated")
    if abs(k_total) > j_total + 1e-9:
        raise ValidationError("|K| exceeds J")
    d_a, d_b = n_a + 1, n_b + 1
    psi = np.zeros((d_a, d_b), dtype=complex)
    for i in range(d_a):
        ma = ja - i
        mb = k_total - ma
        if abs(mb) > jb + 1e-9:
            continue
        j_idx = round(jb - mb)
        psi[i, j_idx] = clebsch_gordan(ja, ma, jb, mb, j_total, k_total)
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise ValidationError("state vanishes for these quantum numbers")
    psi = _fix_global_phase(psi / norm)
    return BipartiteState("pure", SpinQuantum(n_a), SpinQuantum(n_b), psi=psi,
                          meta={"family": "angular_momentum_eigenstate",
                                "n_a": n_a, "n_b": n_b, "j": j_total, "k": k_total,
                                "N_A": n_a, "N_B": n_b})


def singlet(two_s: int) -> BipartiteState:
    """Total-spin-zero state of two spin-s subsystems."""
    return angular_momentum_eigenstate(two_s, two_s, 0, 0)


def rm_weighted(s: SpinQuantum, r) -> BipartiteState:
    """sum_m r_m |s,m>_A |s,m>_B, renormalized."""
    r = np.asarray(r, dtype=complex)
    if r.shape != (s.dim,):
        raise ValidationError(f"weight vector must have length {s.dim}")
    norm = np.linalg.norm(r)
    if norm < 1e-12:
        raise ValidationError("weight vector must not be zero")
    psi = _fix_global_phase(np.diag(r / norm))
    return BipartiteState("pure", s, s, psi=psi,
                          meta={"family": "rm_weighted", "two_s": s.two_s,
                                "N_A": s.two_s, "N_B": s.two_s})


def separable_mixture(components) -> BipartiteState:
    """sum_R P_R rho_R^A (x) rho_R^B from (weight, rho_a, rho_b) triples."""
    if not components:
        raise ValidationError("need at least one component")
    weights = np.array([w for w, _, _ in components], dtype=float)
    if np.any(weights < 0):
        raise ValidationError("weights must be non-negative")
    if abs(weights.sum() - 1.0) > 1e-10:
        raise ValidationError(f"weights sum to {weights.sum()}, expected 1")
    d_a = np.asarray(components[0][1]).shape[0]
    d_b = np.asarray(components[0][2]).shape[0]
    rho = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for w, ra, rb in components:
        ra = np.asarray(ra, dtype=complex)
        rb = np.asarray(rb, dtype=complex)
        for name, m in (("A", ra), ("B", rb)):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValidationError(f"factor {name} is not square")
            if np.max(np.abs(m - m.conj().T)) > 1e-10:
                raise ValidationError(f"factor {name} not Hermitian")
            if abs(np.real(np.trace(m)) - 1.0) > 1e-10:
                raise ValidationError(f"factor {name} trace != 1")
            if float(np.min(np.linalg.eigvalsh(m))) < -1e-10:
                raise ValidationError(f"factor {name} not positive semidefinite")
        if ra.shape[0] != d_a or rb.shape[0] != d_b:
            raise ValidationError("inconsistent factor dimensions across components")
        rho += w * np.kron(ra, rb)
    return BipartiteState("mixed", SpinQuantum(d_a - 1), SpinQuantum(d_b - 1), rho=rho,
                          meta={"family": "separable_mixture",
                                "components": len(components),
                                "N_A": d_a - 1, "N_B": d_b - 1})


@dataclass(frozen=True)
class MultiQubitState:
    """n-party qubit state; amplitude index bits read qubit 0 first,
    bit 0 = spin up."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n > 14:
            raise CapacityError("n > 14 qubits not supported")
        if self.amplitudes.shape != (2 ** self.n,):
            raise ValidationError("amplitude vector has wrong length")
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-10:
            raise ValidationError("state not normalized")


def ghz(n: int) -> MultiQubitState:
    """(|up...up> + i |down...down>) / sqrt(2)."""
    if not 2 <= n <= 14:
        raise CapacityError("ghz requires 2 <= n <= 14")
    amp = np.zeros(2 ** n, dtype=complex)
    amp[0] = 1 / np.sqrt(2)
    amp[-1] = 1j / np.sqrt(2)
    return MultiQubitState(n, amp)


@dataclass(frozen=True)
class SymmetricState:
    """Permutation-symmetric N-atom state in the collective |N/2, M>
    basis, ordered M = N/2 ... -N/2 (length N+1)."""

    n_atoms: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (self.n_atoms + 1,):
            raise ValidationError("amplitude vector has wrong length")
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-10:
            raise ValidationError("state not normalized")


def dicke(n_atoms: int, k: int) -> SymmetricState:
    """Dicke state with k excitations: |J=N/2, M=k-N/2>."""
    if not 0 <= k <= n_atoms:
        raise ValidationError(f"k must be in 0..{n_atoms}")
    amp = np.zeros(n_atoms + 1, dtype=complex)
    amp[n_atoms - k] = 1.0  # index of M = k - N/2 in the M = N/2..-N/2 order
    return SymmetricState(n_atoms, amp)


def random_pure_state(s_a: SpinQuantum, s_b: SpinQuantum, rng) -> BipartiteState:
    """Haar-ish random pure state (Gaussian amplitudes, normalized)."""
    psi = rng.normal(size=(s_a.dim, s_b.dim)) + 1j * rng.normal(size=(s_a.dim, s_b.dim))
    psi = _fix_global_phase(psi / np.linalg.norm(psi))
    return BipartiteState("pure", s_a, s_b, psi=psi,
                          meta={"family": "random_pure", "N_A": s_a.two_s, "N_B": s_b.two_s})


# ---------------------------------------------------------------------------
# measurement statistics


def correlator(state: BipartiteState, obs_a, obs_b) -> float:
    """<Omega_A (x) Omega_B> = Tr((A (x) B) rho)."""
    return expect_product(state, _as_matrix(obs_a), _as_matrix(obs_b))


def joint_probability(state: BipartiteState, obs_a: HermitianObservable,
                      obs_b: HermitianObservable, alpha: float, beta: float) -> float:
    """P(alpha, beta) = Tr((Pi_alpha (x) Pi_beta) rho)."""
    pa = obs_a.projector_for(alpha)
    pb = obs_b.projector_for(beta)
    p = expect_product(state, pa, pb)
    return float(min(max(p, 0.0), 1.0))


def joint_distribution(state: BipartiteState, obs_a: HermitianObservable,
                       obs_b: HermitianObservable):
    """(alphas, betas, table) with table[i, j] = P(alphas[i], betas[j])."""
    alphas = obs_a.outcome_spectrum
    betas = obs_b.outcome_spectrum
    table = np.empty((len(alphas), len(betas)))
    for i, (_, pa) in enumerate(obs_a.eigenprojectors):
        for j, (_, pb) in enumerate(obs_b.eigenprojectors):
            table[i, j] = expect_product(state, pa, pb)
    return alphas, betas, np.clip(table, 0.0, 1.0)


def marginal_probability(state: BipartiteState, obs: HermitianObservable,
                         outcome: float, side: str) -> float:
    proj = obs.projector_for(outcome)
    return float(min(max(expect_side(state, proj, side), 0.0), 1.0))


def conditioned_state(state: BipartiteState, obs_a: HermitianObservable,
                      alpha: float) -> BipartiteState:
    """State after measuring obs_a on subsystem A with outcome alpha."""
    proj = obs_a.projector_for(alpha)
    d_a, d_b = state.dims
    if state.kind == "pure":
        psi = proj @ state.psi
        p = float(np.sum(np.abs(psi) ** 2))
        if p <= 1e-14:
            raise DegenerateConditionError(f"outcome {alpha} has probability {p}")
        return BipartiteState("pure", state.s_a, state.s_b, psi=psi / np.sqrt(p),
                              meta=dict(state.meta, conditioned_on=alpha))
    big = np.kron(proj, np.eye(d_b))
    rho = big @ state.rho @ big
    p = float(np.real(np.trace(rho)))
    if p <= 1e-14:
        raise DegenerateConditionError(f"outcome {alpha} has probability {p}")
    rho = rho / p
    rho = (rho + rho.conj().T) / 2
    return BipartiteState("mixed", state.s_a, state.s_b, rho=rho,
                          meta=dict(state.meta, conditioned_on=alpha))


def _setting_observable(state: BipartiteState, setting: MeasurementSetting):
    sq = state.s_a if setting.side == "A" else state.s_b
    rep = build_spin_rep(sq)
    return spin_component(rep, setting.direction)


def binned_joint_probability(state: BipartiteState, setting_a: MeasurementSetting,
                             setting_b: MeasurementSetting) -> np.ndarray:
    """2x2 table [[P(+,+), P(+,-)], [P(-,+), P(-,-)]] for sign-binned
    spin measurements along the two settings' directions."""
    if setting_a.side == setting_b.side:
        raise ValidationError("settings must address different subsystems")
    if setting_a.side == "B":
        setting_a, setting_b = setting_b, setting_a
    obs_a = _setting_observable(state, setting_a)
    obs_b = _setting_observable(state, setting_b)
    pa_p, pa_m = sign_projectors(obs_a, setting_a.zero_policy)
    pb_p, pb_m = sign_projectors(obs_b, setting_b.zero_policy)
    table = np.array([
        [expect_product(state, pa_p, pb_p), expect_product(state, pa_p, pb_m)],
        [expect_product(state, pa_m, pb_p), expect_product(state, pa_m, pb_m)],
    ])
    return np.clip(table, 0.0, 1.0)


def uncertainty_margin(state: BipartiteState, obs_1, obs_2, side: str = "A") -> float:
    """Delta(O1) Delta(O2) - |<M>|/2 with M = -i [O1, O2], both
    observables on the same subsystem.  Non-negative for every quantum
    state; an LHV model violating this breaks the uncertainty principle."""
    m1 = _as_matrix(obs_1)
    m2 = _as_matrix(obs_2)
    red = state.reduced(side)
    e1 = float(np.real(np.trace(red @ m1)))
    e2 = float(np.real(np.trace(red @ m2)))
    v1 = float(np.real(np.trace(red @ (m1 @ m1)))) - e1 ** 2
    v2 = float(np.real(np.trace(red @ (m2 @ m2)))) - e2 ** 2
    comm = -1j * (m1 @ m2 - m2 @ m1)
    em = float(np.real(np.trace(red @ comm)))
    return float(np.sqrt(max(v1, 0.0)) * np.sqrt(max(v2, 0.0)) - abs(em) / 2.0)


def spin_correlation_matrix(state: BipartiteState) -> np.ndarray:
    """3x3 matrix T[i, j] = <S_i^A (x) S_j^B>; any spin-component
    correlator is then u^T T v."""
    rep_a = build_spin_rep(state.s_a)
    rep_b = build_spin_rep(state.s_b)
    ops_a = (rep_a.sx, rep_a.sy, rep_a.sz)
    ops_b = (rep_b.sx, rep_b.sy, rep_b.sz)
    t = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            t[i, j] = expect_product(state, ops_a[i], ops_b[j])
    return t
