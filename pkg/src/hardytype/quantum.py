"""Quantum strategies, Born-rule behaviors, and closed-form two-qubit results.

A strategy is a shared pure state plus, per party and input, a projective
measurement given as an orthonormal basis together with an assignment of
basis columns to outcomes (rank-1 when the local dimension equals the
outcome count; direct sums of strategies produce higher-rank projectors).

The closed-form material covers the two-qubit family satisfying the
transitivity-argument zero constraints, its degree-of-success and
concurrence formulas, and the best-found DS-versus-concurrence curves for
the three four-event arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import Behavior, Scenario, behavior

STATE_NORM_TOL = 1e-10
BASIS_ORTHO_TOL = 1e-9


class CurveDomainError(ValueError):
    """A DS-versus-concurrence formula was evaluated outside its real branch."""


@dataclass(frozen=True)
class TwoQubitFamilyParams:
    """Angles (radians, in [0, pi]) parametrizing the two-qubit families."""

    theta: float
    alpha: float
    beta: float
    phi: float | None = None

    def __post_init__(self) -> None:
        for label, v in (("theta", self.theta), ("alpha", self.alpha), ("beta", self.beta)):
            if not (0.0 <= v <= math.pi):
                raise ValueError(f"{label}={v} outside [0, pi]")
        if self.phi is not None and not (0.0 <= self.phi <= math.pi):
            raise ValueError(f"phi={self.phi} outside [0, pi]")


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    """Pure joint state with per-input orthonormal measurement bases.

    ``bases_A[x]`` (and ``bases_B[y]``) hold basis vectors as columns;
    ``column_outcome[c]`` is the outcome reported when column c clicks, so the
    outcome-``a`` projector is the sum of |u_c><u_c| over assigned columns.
    """

    scenario: Scenario
    local_dim: int
    state: np.ndarray
    bases_A: np.ndarray
    bases_B: np.ndarray
    column_outcome: np.ndarray

    def validate(self) -> None:
        D, k, d = self.local_dim, self.scenario.k, self.scenario.d
        if self.state.shape != (D * D,):
            raise ValueError(f"state has shape {self.state.shape}, expected ({D * D},)")
        if abs(np.linalg.norm(self.state) - 1.0) > STATE_NORM_TOL:
            raise ValueError("state is not normalized")
        for name, bases in (("A", self.bases_A), ("B", self.bases_B)):
            if bases.shape != (k, D, D):
                raise ValueError(f"bases_{name} shape {bases.shape}, expected {(k, D, D)}")
            for x in range(k):
                U = bases[x]
                gram = U.conj().T @ U
                if np.linalg.norm(gram - np.eye(D), 2) > BASIS_ORTHO_TOL:
                    raise ValueError(f"basis {name}[{x}] is not orthonormal")
        if self.column_outcome.shape != (D,):
            raise ValueError("column_outcome must assign every basis column")
        if self.column_outcome.min() < 0 or self.column_outcome.max() >= d:
            raise ValueError(f"column outcomes must lie in 0..{d - 1}")

    def projectors(self, party: str, x: int) -> np.ndarray:
        """Stack of d projectors (d, D, D) for one party and input."""
        U = self.bases_A[x] if party == "A" else self.bases_B[x]
        d = self.scenario.d
        out = np.zeros((d, self.local_dim, self.local_dim), dtype=U.dtype)
        for c in range(self.local_dim):
            v = U[:, c]
            out[self.column_outcome[c]] += np.outer(v, v.conj())
        return out


def _outcome_onehot(column_outcome: np.ndarray, d: int) -> np.ndarray:
    D = column_outcome.shape[0]
    M = np.zeros((D, d))
    M[np.arange(D), column_outcome] = 1.0
    return M


def born_behavior(qs: QuantumStrategy) -> Behavior:
    """Behavior p(a,b|x,y) = <psi| Pi^A_{a|x} x Pi^B_{b|y} |psi>."""
    qs.validate()
    D, d = qs.local_dim, qs.scenario.d
    psi = qs.state.reshape(D, D)
    # column-pair amplitudes: amp[x,y,i,j] = <u_i(x) x v_j(y) | psi>
    amp = np.einsum("xmi,mn,ynj->xyij", qs.bases_A.conj(), psi, qs.bases_B.conj())
    col_probs = np.abs(amp) ** 2
    onehot = _outcome_onehot(qs.column_outcome, d)
    p = np.einsum("xyij,ia,jb->abxy", col_probs, onehot, onehot)
    return behavior(qs.scenario, p)


def strategy(
    sc: Scenario,
    local_dim: int,
    state: np.ndarray,
    bases_A: np.ndarray,
    bases_B: np.ndarray,
    column_outcome: np.ndarray | None = None,
) -> QuantumStrategy:
    """Assemble and validate a strategy; outcomes default to columns mod d."""
    if column_outcome is None:
        column_outcome = np.arange(local_dim) % sc.d
    qs = QuantumStrategy(
        scenario=sc,
        local_dim=local_dim,
        state=np.asarray(state),
        bases_A=np.asarray(bases_A),
        bases_B=np.asarray(bases_B),
        column_outcome=np.asarray(column_outcome, dtype=np.int64),
    )
    qs.validate()
    return qs


# -- the constrained two-qubit family ------------------------------------------

def _rotated_qubit_basis(angle: float) -> np.ndarray:
    """Columns (cos a, -sin a) and (sin a, cos a): outcome-0/1 vectors."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [-s, c]])


def fti_family(params: TwoQubitFamilyParams) -> QuantumStrategy:
    """Two-qubit family satisfying the transitivity argument's zero constraints.

    State amplitudes (a00, a01, a10, a11) =
    (0, sin(theta)cos(alpha), cos(theta), -sin(theta)sin(alpha)); the first
    measurement of each party is the computational basis and the second is
    rotated by alpha (Alice) or beta (Bob).
    """
    th, al, be = params.theta, params.alpha, params.beta
    state = np.array(
        [0.0, math.sin(th) * math.cos(al), math.cos(th), -math.sin(th) * math.sin(al)]
    )
    bases_A = np.stack([np.eye(2), _rotated_qubit_basis(al)])
    bases_B = np.stack([np.eye(2), _rotated_qubit_basis(be)])
    return strategy(Scenario(2, 2), 2, state, bases_A, bases_B)


def fti_success_formula(params: TwoQubitFamilyParams) -> float:
    """Closed-form DS of the family: q - r as a function of the three angles."""
    th, al, be = params.theta, params.alpha, params.beta
    return 0.5 * math.sin(al) * (
        (math.cos(2 * be) * math.cos(2 * th) - 1.0) * math.sin(al)
        + math.sin(2 * be) * math.sin(2 * th)
    )


def fti_family_concurrence(params: TwoQubitFamilyParams) -> float:
    """Concurrence of the family state: |sin(2 theta) cos(alpha)|."""
    return abs(math.sin(2 * params.theta) * math.cos(params.alpha))


def hardy_family(theta: float, alpha: float) -> QuantumStrategy:
    """Family member whose Bob angle also kills the fourth (penalty) event.

    Choosing tan(beta) = tan(theta) sin(alpha) makes all three
    zero-probability events of the original four-event argument vanish.
    """
    beta = math.atan2(math.sin(theta) * math.sin(alpha), math.cos(theta)) % math.pi
    return fti_family(TwoQubitFamilyParams(theta=theta, alpha=alpha, beta=beta))


def concurrence_two_qubit(state: np.ndarray) -> float:
    """Concurrence C = 2|a00*a11 - a01*a10| of a pure two-qubit state."""
    s = np.asarray(state).reshape(-1)
    if s.shape != (4,):
        raise ValueError(f"expected a length-4 state vector, got shape {np.asarray(state).shape}")
    return float(2.0 * abs(s[0] * s[3] - s[1] * s[2]))


# -- best-found DS at fixed concurrence ----------------------------------------

def fti_max_ds_at_concurrence(C: float) -> float:
    """Largest DS found for the transitivity argument at concurrence C."""
    if not (0.0 <= C <= 1.0):
        raise ValueError(f"concurrence must lie in [0, 1], got {C}")
    s = math.sqrt(1.0 - C * C)
    return 0.5 * s * (1.0 - s)


def hardy_max_ds_at_concurrence(C: float) -> float:
    """Largest success probability of the original argument at concurrence C."""
    if not (0.0 <= C <= 1.0):
        raise ValueError(f"concurrence must lie in [0, 1], got {C}")
    return C * C * (1.0 - C) / (2.0 - C) ** 2


def cll_ds_at_concurrence(C: float, beta: float) -> float:
    """DS of the penalty-relaxed four-event argument at concurrence C, angle beta.

    Evaluates the closed-form branch as printed; combinations where the
    inner square root or arcsine leave their real domain raise
    CurveDomainError rather than being clamped.
    """
    if not (0.0 <= C <= 1.0):
        raise ValueError(f"concurrence must lie in [0, 1], got {C}")
    cb, sb = math.cos(beta), math.sin(beta)
    if cb == 0.0:
        raise CurveDomainError(f"beta={beta} sits on the sec/tan singularity")
    sec2 = 1.0 / (cb * cb)
    tan2 = (sb * sb) * sec2
    inner = (1.0 - C) * cb * cb * (1.0 + C + (C - 1.0) * math.cos(2.0 * beta))
    denom = C + tan2
    if denom == 0.0:
        raise CurveDomainError(f"(C, beta)=({C}, {beta}) makes the arcsine argument 0/0")
    asin_arg = C * sec2 / denom
    if inner < 0.0 or not -1.0 <= asin_arg <= 1.0 or not math.isfinite(asin_arg):
        raise CurveDomainError(f"(C, beta)=({C}, {beta}) leaves the real branch")
    return (
        (C - 1.0) * cb**4
        + math.sqrt(2.0) * cb * sb * math.sqrt(inner) * math.sin(0.5 * math.asin(asin_arg))
    )


def _cll_ds_grid(C: float, betas: np.ndarray) -> np.ndarray:
    """Vectorized branch evaluation; out-of-domain points map to -inf."""
    cb, sb = np.cos(betas), np.sin(betas)
    with np.errstate(divide="ignore", invalid="ignore"):
        sec2 = 1.0 / (cb * cb)
        tan2 = sb * sb * sec2
        inner = (1.0 - C) * cb * cb * (1.0 + C + (C - 1.0) * np.cos(2.0 * betas))
        asin_arg = C * sec2 / (C + tan2)
        vals = (
            (C - 1.0) * cb**4
            + np.sqrt(2.0) * cb * sb * np.sqrt(np.maximum(inner, 0.0))
            * np.sin(0.5 * np.arcsin(np.clip(asin_arg, -1.0, 1.0)))
        )
    bad = (inner < 0.0) | (np.abs(asin_arg) > 1.0) | ~np.isfinite(asin_arg) | ~np.isfinite(vals)
    vals[bad] = -np.inf
    return vals


def cll_max_ds_at_concurrence(C: float, beta_samples: int = 2001) -> float:
    """Numerically maximize the CLL branch formula over beta at fixed C."""
    if C == 0.0:
        return 0.0
    betas = np.linspace(1e-9, math.pi / 2 - 1e-9, beta_samples)
    vals = _cll_ds_grid(C, betas)
    i = int(np.argmax(vals))
    if not np.isfinite(vals[i]):
        raise CurveDomainError(f"no real-branch beta found at C={C}")
    from scipy.optimize import minimize_scalar

    lo = betas[max(i - 1, 0)]
    hi = betas[min(i + 1, beta_samples - 1)]
    res = minimize_scalar(
        lambda b: -_cll_ds_grid(C, np.array([b]))[0], bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return max(float(vals[i]), float(-res.fun))


# -- composition ----------------------------------------------------------------

def direct_sum(qa: QuantumStrategy, qb: QuantumStrategy, weight: float) -> QuantumStrategy:
    """Block-diagonal combination whose behavior is the weighted mixture.

    The state is sqrt(weight) psi_a on the first block pair plus
    sqrt(1-weight) psi_b on the second; measurements act blockwise.
    """
    if qa.scenario != qb.scenario:
        raise ValueError("direct sum needs strategies over one scenario")
    if not (0.0 <= weight <= 1.0):
        raise ValueError(f"weight must lie in [0, 1], got {weight}")
    Da, Db = qa.local_dim, qb.local_dim
    D = Da + Db
    dtype = np.result_type(qa.state.dtype, qb.state.dtype, float)
    psi = np.zeros((D, D), dtype=dtype)
    psi[:Da, :Da] = math.sqrt(weight) * qa.state.reshape(Da, Da)
    psi[Da:, Da:] = math.sqrt(1.0 - weight) * qb.state.reshape(Db, Db)
    k = qa.scenario.k

    def block(bases_a, bases_b):
        out = np.zeros((k, D, D), dtype=dtype)
        out[:, :Da, :Da] = bases_a
        out[:, Da:, Da:] = bases_b
        return out

    return strategy(
        qa.scenario,
        D,
        psi.reshape(-1),
        block(qa.bases_A, qb.bases_A),
        block(qa.bases_B, qb.bases_B),
        np.concatenate([qa.column_outcome, qb.column_outcome]),
    )


def random_strategy(
    sc: Scenario, local_dim: int, rng: np.random.Generator
) -> QuantumStrategy:
    """Haar-ish random real strategy: QR bases and a random unit state."""
    D = local_dim
    psi = rng.standard_normal(D * D)
    psi /= np.linalg.norm(psi)

    def random_bases():
        out = np.empty((sc.k, D, D))
        for x in range(sc.k):
            q, r = np.linalg.qr(rng.standard_normal((D, D)))
            out[x] = q * np.sign(np.diag(r))
        return out

    return strategy(sc, D, psi, random_bases(), random_bases())


# -- JSON interchange -----------------------------------------------------------

def _array_to_json(a: np.ndarray):
    if np.iscomplexobj(a):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return a.tolist()


def _array_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=np.float64) + 1j * np.asarray(obj["im"])
    return np.asarray(obj, dtype=np.float64)


def strategy_to_json(qs: QuantumStrategy) -> dict:
    return {
        "k": qs.scenario.k,
        "d": qs.scenario.d,
        "local_dim": qs.local_dim,
        "state": _array_to_json(qs.state),
        "bases_A": _array_to_json(qs.bases_A),
        "bases_B": _array_to_json(qs.bases_B),
        "column_outcome": qs.column_outcome.tolist(),
    }


def strategy_from_json(obj: dict) -> QuantumStrategy:
    sc = Scenario(k=int(obj["k"]), d=int(obj["d"]))
    return strategy(
        sc,
        int(obj["local_dim"]),
        _array_from_json(obj["state"]),
        _array_from_json(obj["bases_A"]),
        _array_from_json(obj["bases_B"]),
        np.asarray(obj["column_outcome"], dtype=np.int64),
    )
