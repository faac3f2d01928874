"""Bell functionals: quantum-side evaluation and declarative descriptions.

Each evaluator returns a ViolationReport whose `violation` flag is
oriented consistently (True means the classical inequality is broken);
the signed `margin` follows each functional's own convention, noted in
the docstrings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DegenerateConditionError, ValidationError
from .spin import (
    HermitianObservable,
    SpinQuantum,
    UnitVector,
    build_spin_rep,
    sign_projectors,
    spin_component,
)
from .states import (
    BipartiteState,
    MeasurementSetting,
    MultiQubitState,
    SymmetricState,
    binned_joint_probability,
    correlator,
    expect_product,
    expect_side,
    joint_distribution,
    marginal_probability,
)

VIOLATION_TOL = 1e-9


# ---------------------------------------------------------------------------
# declarative functionals (shared with the LHV enumerator)


@dataclass(frozen=True)
class CorrelatorTerm:
    """coef * <outcome(A setting i) * outcome(B setting j)>."""
    coef: float
    setting_a: int
    setting_b: int


@dataclass(frozen=True)
class PairEventTerm:
    """coef * P((alpha, beta) in pairs) for settings (i, j)."""
    coef: float
    setting_a: int
    setting_b: int
    pairs: tuple  # ((alpha, beta), ...)


@dataclass(frozen=True)
class SingleMeanTerm:
    """coef * <outcome(setting i)> on one side."""
    coef: float
    side: str
    setting: int


@dataclass(frozen=True)
class BellFunctional:
    """Linear combination of correlators / event probabilities / single
    means, with its classical bound rule."""

    name: str
    settings_a: int
    settings_b: int
    terms: tuple
    bound_rule: str = "constant"  # "constant" | "half_product_of_numbers"
    bound_value: float | None = None

    def __post_init__(self):
        for t in self.terms:
            if isinstance(t, (CorrelatorTerm, PairEventTerm)):
                if not (0 <= t.setting_a < self.settings_a and 0 <= t.setting_b < self.settings_b):
                    raise ValidationError(f"term {t} references an unknown setting")
            elif isinstance(t, SingleMeanTerm):
                count = self.settings_a if t.side == "A" else self.settings_b
                if not 0 <= t.setting < count:
                    raise ValidationError(f"term {t} references an unknown setting")
            else:
                raise ValidationError(f"unknown term type {t!r}")

    def classical_bound(self, n_a: float | None = None, n_b: float | None = None) -> float:
        if self.bound_rule == "half_product_of_numbers":
            if n_a is None or n_b is None:
                raise ValidationError("bound needs <N_A>, <N_B>")
            return 0.5 * n_a * n_b
        if self.bound_value is None:
            raise ValidationError(f"functional {self.name} has no constant bound")
        return self.bound_value


def chsh_functional() -> BellFunctional:
    """Classic CHSH combination with +-1/2 outcomes (bound 1/2)."""
    return generalized_chsh_functional(1, 1)


def generalized_chsh_functional(two_s_a: int, two_s_b: int) -> BellFunctional:
    """S = <11> + <12> + <21> - <22> for spin-component outcomes
    -s..+s on each side; bound 1/2 <N_A><N_B> = 2 s_A s_B."""
    terms = (
        CorrelatorTerm(1.0, 0, 0),
        CorrelatorTerm(1.0, 0, 1),
        CorrelatorTerm(1.0, 1, 0),
        CorrelatorTerm(-1.0, 1, 1),
    )
    return BellFunctional(
        name="generalized_chsh" if (two_s_a, two_s_b) != (1, 1) else "chsh",
        settings_a=2, settings_b=2, terms=terms,
        bound_rule="half_product_of_numbers",
    )


def cglmp_functional(d: int) -> BellFunctional:
    """I = P(A1=B1) + P(B1=A2+1) + P(A2=B1) + P(B2=A1), outcomes mod d."""
    if d < 2:
        raise ValidationError("d must be >= 2")
    eq = tuple((j, j) for j in range(d))
    shifted = tuple((k, (k + 1) % d) for k in range(d))
    terms = (
        PairEventTerm(1.0, 0, 0, eq),        # P(A1 = B1)
        PairEventTerm(1.0, 1, 0, shifted),   # P(B1 = A2 + 1)
        PairEventTerm(1.0, 1, 0, eq),        # P(A2 = B1)
        PairEventTerm(1.0, 0, 1, eq),        # P(B2 = A1)
    )
    return BellFunctional(name=f"cglmp_d{d}", settings_a=2, settings_b=2,
                          terms=terms, bound_rule="constant", bound_value=3.0)


# ---------------------------------------------------------------------------
# reports


@dataclass
class ViolationReport:
    """Evaluated functional value, applicable classical bound, and
    provenance needed to reproduce the number."""

    functional: str
    value: float
    bound: float
    margin: float
    violation: bool
    settings: list = field(default_factory=list)
    state_meta: dict = field(default_factory=dict)
    seed: int | None = None
    wall_time_s: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.margin):
            raise ValidationError("margin must be finite")

    def to_dict(self) -> dict:
        d = {
            "functional": self.functional,
            "value": self.value,
            "bound": self.bound,
            "margin": self.margin,
            "violation": self.violation,
            "settings": self.settings,
            "state": self.state_meta,
        }
        if self.seed is not None:
            d["seed"] = self.seed
        if self.wall_time_s is not None:
            d["wall_time_s"] = self.wall_time_s
        if self.extra:
            d["extra"] = self.extra
        return d


def _vec(u: UnitVector) -> list:
    return [u.ux, u.uy, u.uz]


# ---------------------------------------------------------------------------
# evaluators


def chsh_value(state: BipartiteState, u1: UnitVector, u2: UnitVector,
               v1: UnitVector, v2: UnitVector) -> ViolationReport:
    """Generalized CHSH: S from four spin-component correlators,
    classical bound 1/2 <N_A><N_B>.  margin = |S| - bound, > 0 means
    violation.  At N_A = N_B = 1 the bound is 1/2 (plain CHSH)."""
    rep_a = build_spin_rep(state.s_a)
    rep_b = build_spin_rep(state.s_b)
    a1, a2 = rep_a.component(u1), rep_a.component(u2)
    b1, b2 = rep_b.component(v1), rep_b.component(v2)
    s = (correlator(state, a1, b1) + correlator(state, a1, b2)
         + correlator(state, a2, b1) - correlator(state, a2, b2))
    n_a, n_b = state.s_a.two_s, state.s_b.two_s
    bound = 0.5 * n_a * n_b
    margin = abs(s) - bound
    return ViolationReport(
        functional="chsh" if (n_a, n_b) == (1, 1) else "generalized_chsh",
        value=s, bound=bound, margin=margin,
        violation=margin > VIOLATION_TOL,
        settings=[_vec(u1), _vec(u2), _vec(v1), _vec(v2)],
        state_meta=dict(state.meta))


def mermin_check(state: BipartiteState, a: UnitVector, b: UnitVector, c: UnitVector,
                 reading: str = "squared_difference") -> ViolationReport:
    """Two-spin-s inequality  LHS >= <S_Aa S_Bc> + <S_Ab S_Bc>.

    Readings for the left side (Delta = outcome(S_Aa) - outcome(S_Bb),
    an integer for any pair of equal spins):

    - "squared_difference" (default): LHS = s <Delta^2>.  Because
      |Delta| <= Delta^2 on integers this is a valid (weaker) Bell
      inequality, and on the two-spin-s singlet its violation boundary
      sits exactly at sin(theta) = 1/(2s) for the standard coplanar
      geometry.
    - "absolute_of_difference": LHS = s <|Delta|> from the joint outcome
      distribution (the sharp inequality; its singlet violation window
      is strictly larger than the 1/(2s) one).
    - "literal": LHS = s |<S_Aa> - <S_Bb>|, which vanishes identically
      on the singlet.

    margin = LHS - RHS; margin < 0 means violation.
    """
    if state.s_a != state.s_b:
        raise ValidationError("mermin_check needs equal subsystem spins")
    sval = state.s_a.s
    rep = build_spin_rep(state.s_a)
    obs_a = spin_component(rep, a)
    obs_b = spin_component(rep, b)
    mat_c = rep.component(c)
    rhs = correlator(state, obs_a.matrix, mat_c) + correlator(state, obs_b.matrix, mat_c)
    if reading == "squared_difference":
        ma, mb = obs_a.matrix, obs_b.matrix
        eye_a = np.eye(state.s_a.dim)
        lhs = sval * (expect_product(state, ma @ ma, np.eye(state.s_b.dim))
                      + expect_product(state, eye_a, mb @ mb)
                      - 2.0 * expect_product(state, ma, mb))
    elif reading == "absolute_of_difference":
        alphas, betas, table = joint_distribution(state, obs_a, obs_b)
        diff = np.abs(alphas[:, None] - betas[None, :])
        lhs = sval * float(np.sum(diff * table))
    elif reading == "literal":
        lhs = sval * abs(expect_side(state, obs_a.matrix, "A")
                         - expect_side(state, obs_b.matrix, "B"))
    else:
        raise ValidationError(f"unknown reading {reading!r}")
    margin = lhs - rhs
    return ViolationReport(
        functional="mermin", value=lhs, bound=rhs, margin=margin,
        violation=margin < -VIOLATION_TOL,
        settings=[_vec(a), _vec(b), _vec(c)],
        state_meta=dict(state.meta),
        extra={"reading": reading, "lhs": lhs, "rhs": rhs})


def drummond_margin(j_bosons: int, theta: float) -> float:
    """Large-J two-mode condition 3 g(theta) - g(3 theta) - 2 with
    g(theta) = exp(-J theta^2 / 2); positive means violation."""
    if j_bosons < 1:
        raise ValidationError("J must be >= 1")
    g = lambda t: math.exp(-j_bosons * t * t / 2.0)
    return 3.0 * g(theta) - g(3.0 * theta) - 2.0


def _apply_site_raising(amplitudes: np.ndarray, n: int, lowering: bool = False) -> complex:
    """<psi| tensor_i (sigma_x +- i sigma_y) |psi> without materializing
    the 2^n x 2^n operator.  sigma_x + i sigma_y maps |down> -> 2 |up>."""
    vec = amplitudes.copy()
    for site in range(n):
        t = vec.reshape((2 ** site, 2, -1))
        out = np.zeros_like(t)
        if lowering:
            out[:, 1, :] = 2.0 * t[:, 0, :]   # |up> -> 2 |down>
        else:
            out[:, 0, :] = 2.0 * t[:, 1, :]   # |down> -> 2 |up>
        vec = out.reshape(-1)
    return complex(np.vdot(amplitudes, vec))


def mabk_value(n: int) -> ViolationReport:
    """MABK combination on the n-party GHZ state.

    F is the expectation of the Hermitian operator
    (tensor(sigma_x + i sigma_y) - tensor(sigma_x - i sigma_y)) / 2i,
    with +-1 outcomes per site; classical bound 2^(n/2) for even n.
    """
    if not 2 <= n <= 14:
        raise CapacityError("mabk_value requires 2 <= n <= 14")
    if n % 2:
        raise ValidationError("the printed bound 2^(n/2) applies to even n")
    from .states import ghz
    state = ghz(n)
    t = _apply_site_raising(state.amplitudes, n)
    value = float(t.imag)  # (t - conj(t)) / 2i
    bound = 2.0 ** (n / 2)
    margin = value - bound
    return ViolationReport(functional="mabk", value=value, bound=bound, margin=margin,
                           violation=margin > VIOLATION_TOL,
                           state_meta={"family": "ghz", "n": n})


def _reid_direction(angle: float) -> UnitVector:
    """S_z cos(2 angle) + S_x sin(2 angle) as a unit direction."""
    return UnitVector(math.sin(2 * angle), 0.0, math.cos(2 * angle))


def reid_ratio(state: BipartiteState, theta: float, theta_star: float,
               phi: float, phi_star: float, zero_policy: str = "plus") -> ViolationReport:
    """Sign-binned ratio inequality

      {P(+,+|t,p) - P(+,+|t,p*) + P(+,+|t*,p) + P(+,+|t*,p*)}
          / {P(+|t*) + P(+|p)}  <=  1.

    ratio > 1 means violation; margin = ratio - 1.
    """
    def table(th, ph):
        sa = MeasurementSetting("A", _reid_direction(th), zero_policy)
        sb = MeasurementSetting("B", _reid_direction(ph), zero_policy)
        return binned_joint_probability(state, sa, sb)

    num = (table(theta, phi)[0, 0] - table(theta, phi_star)[0, 0]
           + table(theta_star, phi)[0, 0] + table(theta_star, phi_star)[0, 0])
    rep_a = build_spin_rep(state.s_a)
    rep_b = build_spin_rep(state.s_b)
    pa_plus, _ = sign_projectors(spin_component(rep_a, _reid_direction(theta_star)), zero_policy)
    pb_plus, _ = sign_projectors(spin_component(rep_b, _reid_direction(phi)), zero_policy)
    den = expect_side(state, pa_plus, "A") + expect_side(state, pb_plus, "B")
    if den <= 1e-12:
        raise DegenerateConditionError("denominator of the Reid ratio vanishes")
    ratio = num / den
    return ViolationReport(
        functional="reid", value=ratio, bound=1.0, margin=ratio - 1.0,
        violation=ratio - 1.0 > VIOLATION_TOL,
        settings=[theta, theta_star, phi, phi_star],
        state_meta=dict(state.meta),
        extra={"numerator": num, "denominator": den, "zero_policy": zero_policy})


def cfrd_margin(state: BipartiteState, obs_a1, obs_a2, obs_b1, obs_b2) -> ViolationReport:
    """Moment inequality

      <(A1^2 + A2^2)(B1^2 + B2^2)>
          >= |<A1 B1 + A2 B2> + i <A2 B1 - A1 B2>|^2.

    value = LHS - RHS; margin = value, < 0 means violation.
    """
    a1 = obs_a1.matrix if isinstance(obs_a1, HermitianObservable) else np.asarray(obs_a1)
    a2 = obs_a2.matrix if isinstance(obs_a2, HermitianObservable) else np.asarray(obs_a2)
    b1 = obs_b1.matrix if isinstance(obs_b1, HermitianObservable) else np.asarray(obs_b1)
    b2 = obs_b2.matrix if isinstance(obs_b2, HermitianObservable) else np.asarray(obs_b2)
    lhs = expect_product(state, a1 @ a1 + a2 @ a2, b1 @ b1 + b2 @ b2)
    re_part = expect_product(state, a1, b1) + expect_product(state, a2, b2)
    im_part = expect_product(state, a2, b1) - expect_product(state, a1, b2)
    rhs = re_part ** 2 + im_part ** 2
    margin = lhs - rhs
    return ViolationReport(functional="cfrd", value=margin, bound=0.0, margin=margin,
                           violation=margin < -VIOLATION_TOL,
                           state_meta=dict(state.meta),
                           extra={"lhs": lhs, "rhs": rhs})


def cfrd_quadrature_margin(state: BipartiteState) -> float:
    """<Delta S_x^2> + <Delta S_y^2> + 1/4 for the total spin
    S = S^A + S^B; a violation of the quadrature-variable inequality
    would need this to be negative, which no quantum state achieves."""
    rep_a = build_spin_rep(state.s_a)
    rep_b = build_spin_rep(state.s_b)
    eye_a = np.eye(state.s_a.dim)
    eye_b = np.eye(state.s_b.dim)
    total = 0.25
    for op_a, op_b in ((rep_a.sx, rep_b.sx), (rep_a.sy, rep_b.sy)):
        mean = expect_product(state, op_a, eye_b) + expect_product(state, eye_a, op_b)
        sq = (expect_product(state, op_a @ op_a, eye_b)
              + 2.0 * expect_product(state, op_a, op_b)
              + expect_product(state, eye_a, op_b @ op_b))
        total += sq - mean ** 2
    return float(total)


def tura_value(state: SymmetricState, n0: UnitVector, n1: UnitVector) -> ViolationReport:
    """Permutation-symmetric two-setting inequality

      W = 2 S_0 + S_01 + 2N + (S_00 + S_11)/2  >=  0

    evaluated via collective spin operators on the (N+1)-dimensional
    symmetric basis; W < 0 means violation.
    """
    n = state.n_atoms
    rep = build_spin_rep(SpinQuantum(n))  # collective J = N/2
    j0 = rep.component(n0)
    j1 = rep.component(n1)
    amp = state.amplitudes

    def expect(mat):
        return float(np.real(np.vdot(amp, mat @ amp)))

    s0 = 2.0 * expect(j0)
    s00 = 4.0 * expect(j0 @ j0) - n
    s11 = 4.0 * expect(j1 @ j1) - n
    # sum_{i != j} <m_i0 m_j1> = 2 <{J.n0, J.n1}> - N (n0.n1); the
    # antisymmetric part 2i J.(n0 x n1) cancels exactly against the
    # single-site contraction and is discarded after a sanity check
    anti = j0 @ j1 + j1 @ j0
    s01 = 2.0 * expect(anti) - n * n0.dot(n1)
    cross = complex(np.vdot(amp, (j0 @ j1 - j1 @ j0) @ amp))
    w = 2.0 * s0 + s01 + 2.0 * n + 0.5 * (s00 + s11)
    return ViolationReport(
        functional="tura", value=w, bound=0.0, margin=w,
        violation=w < -VIOLATION_TOL,
        settings=[_vec(n0), _vec(n1)],
        state_meta={"family": "symmetric", "n_atoms": n},
        extra={"S0": s0, "S00": s00, "S11": s11, "S01": s01,
               "commutator_norm": abs(cross)})


def cglmp_I(tables, d: int) -> float:
    """Assemble I = P(A1=B1) + P(B1=A2+1) + P(A2=B1) + P(B2=A1) from
    four d x d joint probability tables keyed (A setting, B setting):
    tables = (P11, P12, P21, P22), each P[j, l] = P(A=j, B=l)."""
    if len(tables) != 4:
        raise ValidationError("need four joint probability tables")
    mats = []
    for t in tables:
        t = np.asarray(t, dtype=float)
        if t.shape != (d, d):
            raise ValidationError(f"table shape {t.shape} != ({d}, {d})")
        if np.any(t < -1e-12):
            raise ValidationError("negative probabilities in table")
        if abs(t.sum() - 1.0) > 1e-9:
            raise ValidationError(f"table sums to {t.sum()}, expected 1")
        mats.append(t)
    p11, p12, p21, _p22 = mats
    same = float(np.trace(p11))                       # P(A1 = B1)
    shift = float(sum(p21[k, (k + 1) % d] for k in range(d)))  # P(B1 = A2+1)
    same21 = float(np.trace(p21))                     # P(A2 = B1)
    same12 = float(np.trace(p12))                     # P(B2 = A1)
    return same + shift + same21 + same12
