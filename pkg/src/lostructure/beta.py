"""Residual-mass functional over convex progressions, and the two
right-hand-side bound evaluators that consume it.

beta(W, tau, r, m) searches for a convex progression of rank r and lattice
size at most m whose closed tau-neighborhood misses as little W-mass as
possible.  For r <= 1 the search is exact over a provably sufficient finite
candidate set; for r = 2 a beam over candidate pairs yields a certified
upper bound (the witness is explicit and its objective is recomputed
exactly, only optimality is unproven).
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .concentration import (
    MODE_EXACT,
    MODE_MC,
    ConcentrationResult,
    empirical_window_max,
)
from .config import RunConfig
from .distributions import (
    AtomicMeasure,
    CompoundPoissonSpec,
    h_point_mass_zero,
    sample_H_lambda,
)
from .errors import FLAG_DEGENERATE_BETA, UnsupportedRank
from .gap import Cgap, SymmetricPolytope, box_body, cgap_image, interval_body, zero_cgap
from .rational import format_fraction, to_fraction

EXACT = "exact"
UPPER_BOUND = "upper_bound"


@dataclasses.dataclass(frozen=True)
class BetaResult:
    value: Fraction
    witness: Cgap
    exactness: str  # "exact" only when the candidate family is exhaustive
    candidates_searched: int

    def to_json_dict(self) -> dict:
        return {
            "value": format_fraction(self.value),
            "witness": self.witness.to_json_dict(),
            "exactness": self.exactness,
            "candidates_searched": self.candidates_searched,
        }


def _scalar_atoms(W) -> list[tuple[Fraction, Fraction]]:
    if getattr(W, "dim", 1) != 1:
        raise ValueError("beta is defined for measures on the line")
    out = []
    for v, mass in W.atoms:
        out.append((v[0] if isinstance(v, tuple) else to_fraction(v), to_fraction(mass)))
    return out


def mass_outside(W, Kimg: Iterable[Fraction], tau) -> Fraction:
    """W-mass strictly farther than tau from the finite set Kimg."""
    t = to_fraction(tau)
    pts = sorted(Kimg)
    total = Fraction(0)
    for w, mass in _scalar_atoms(W):
        if not pts or min(abs(w - y) for y in pts) > t:
            total += mass
    return total


def _interval_dim(M: int) -> Fraction:
    return Fraction(M) if M >= 1 else Fraction(1, 2)


def _covered_mass(atoms, h: Fraction, M: int, tau: Fraction) -> tuple[Fraction, list]:
    """(missed mass, missed atoms) against the multiples {nu*h : |nu| <= M}."""
    miss = Fraction(0)
    missed = []
    for w, mass in atoms:
        if h == 0:
            ok = abs(w) <= tau
        else:
            nu = round(w / h)
            ok = False
            for cand in (nu - 1, nu, nu + 1):
                c = max(-M, min(M, cand))
                if abs(w - c * h) <= tau:
                    ok = True
                    break
        if not ok:
            miss += mass
            missed.append((w, mass))
    return miss, missed


def _rank1_candidates(atoms, tau: Fraction, M: int) -> list[Fraction]:
    # coverage of w by nu*h is |w - nu*h| <= tau: an interval in h whose
    # endpoints are (w +- tau)/nu; the objective is constant in between,
    # so scanning endpoints (plus h=0) is exhaustive
    cand = {Fraction(0)}
    for w, _ in atoms:
        for nu in range(1, M + 1):
            cand.add(abs((w + tau) / nu))
            cand.add(abs((w - tau) / nu))
            cand.add(abs(w / nu))
    return sorted(cand)


def _rank1_scan(atoms, tau: Fraction, M: int):
    """Best (miss, h, missed-atoms, searched) over the exhaustive candidates."""
    best = None
    cands = _rank1_candidates(atoms, tau, M)
    for h in cands:
        miss, missed = _covered_mass(atoms, h, M, tau)
        if best is None or miss < best[0]:
            best = (miss, h, missed)
    return best[0], best[1], best[2], len(cands)


def beta(W, tau, r: int, m: int, mode: str = "auto") -> BetaResult:
    """Least W-mass left outside the closed tau-neighborhood of a symmetric
    convex progression with rank r and at most m lattice points.

    r=0 fixes the progression to {0}.  r=1 is exact; the witness body is
    the interval [-L, L] with L maximal for the size budget.  r=2 runs a
    beam over pairs of rank-1 candidates and is labeled upper_bound.
    """
    if r < 0 or r >= 3:
        raise UnsupportedRank(f"beta implemented for ranks 0..2, got {r}")
    if m < 1:
        raise ValueError("m must be >= 1")
    if mode not in ("auto", EXACT, UPPER_BOUND):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == EXACT and r == 2:
        raise UnsupportedRank("exact search is not available at rank 2")
    t = to_fraction(tau)
    if t < 0:
        raise ValueError("tau must be nonnegative")
    atoms = _scalar_atoms(W)

    if r == 0:
        witness = zero_cgap()
        val = mass_outside(W, {Fraction(0)}, t)
        res = BetaResult(val, witness, EXACT, 1)
    elif r == 1:
        M = (m - 1) // 2
        miss, h, _, searched = _rank1_scan(atoms, t, M)
        witness = Cgap(1, (h,), interval_body(_interval_dim(M)))
        res = BetaResult(miss, witness, EXACT, searched)
    else:
        res = _beta_rank2(W, atoms, t, m)

    check = mass_outside(W, cgap_image(res.witness), t)
    if check != res.value:
        raise AssertionError("witness objective does not reproduce the reported value")
    return res


def _beta_rank2(W, atoms, tau: Fraction, m: int) -> BetaResult:
    searched = 0
    best = None  # (value, sortkey, witness)
    M_max = (m - 1) // 2
    for M1 in range(0, M_max + 1):
        size1 = 2 * M1 + 1
        M2_cap = (m // size1 - 1) // 2
        miss1, h1, missed, s1 = _rank1_scan(atoms, tau, M1)
        searched += s1
        for M2 in range(0, M2_cap + 1):
            # beam: pair the stage-one pick with a residual re-scan
            h2_pool = {Fraction(0)}
            if missed:
                _, h2_best, _, s2 = _rank1_scan(missed, tau, M2)
                searched += s2
                h2_pool.add(h2_best)
            for h2 in sorted(h2_pool):
                witness = Cgap(2, (h1, h2), box_body([_interval_dim(M1), _interval_dim(M2)]))
                val = mass_outside(W, cgap_image(witness), tau)
                key = (val, abs(h1) + abs(h2), (h1, h2))
                if best is None or key < best[0]:
                    best = (key, witness)
    key, witness = best
    return BetaResult(key[0], witness, UPPER_BOUND, searched)


# ---------------------------------------------------------------------------
# Bound right-hand sides.
# ---------------------------------------------------------------------------


def cp_bound_rhs(alpha: float, beta_val: float, r: int, m: int, c: float = 1.0) -> float:
    """Concentration bound for a compound law with rate alpha and jump
    residual beta_val; +inf when beta_val = 0 (vacuous, caller flags it)."""
    if alpha <= 0 or beta_val < 0:
        raise ValueError("need alpha > 0 and beta_val >= 0")
    if beta_val == 0:
        return math.inf
    ab = alpha * beta_val
    return c ** (r + 1) * (1.0 / (m * math.sqrt(ab)) + (r + 1) ** (2.5 * r) / ab ** ((r + 1) / 2))


def weighted_sum_bound_rhs(
    *,
    kappa=None,
    delta=None,
    tau,
    p_val: float,
    r: int,
    m: int,
    beta_val: float,
    c: float = 1.0,
) -> float:
    """Bound for the weighted-sum reduction: the compound form evaluated at
    p_val * beta_val, times the window-refinement factor when tau > 0."""
    t = to_fraction(tau)
    if p_val < 0:
        raise ValueError("p_val must be nonnegative")
    if p_val == 0 or beta_val == 0:
        return math.inf
    pb = p_val * beta_val
    core = c ** (r + 1) * (1.0 / (m * math.sqrt(pb)) + (r + 1) ** (2.5 * r) / pb ** ((r + 1) / 2))
    if t == 0:
        return core
    if kappa is None or delta is None:
        raise ValueError("tau > 0 requires kappa and delta")
    k = to_fraction(kappa)
    d = to_fraction(delta)
    if k <= 0 or d <= 0:
        raise ValueError("kappa and delta must be positive")
    return (1 + math.floor(k / d)) * core


# ---------------------------------------------------------------------------
# End-to-end check on a compound family instance.
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class BoundReport:
    lhs: ConcentrationResult
    rhs: float
    constants_used: dict
    slack: float  # rhs / lhs, recorded even when < 1
    flags: tuple[str, ...] = ()
    params: dict = dataclasses.field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "lhs": self.lhs.to_json_dict(),
            "rhs": self.rhs,
            "constants_used": dict(self.constants_used),
            "slack": self.slack,
            "flags": list(self.flags),
            "params": dict(self.params),
        }


def check_cp_bound(cp: CompoundPoissonSpec, tau, r: int, m: int, config: Optional[RunConfig] = None) -> BoundReport:
    """Estimate the window concentration of the compound law and compare it
    with the evaluated bound; beta runs on the normalized jump law."""
    cfg = config or RunConfig()
    if cp.weight.dim != 1:
        raise ValueError("bound check implemented on the line")
    t = to_fraction(tau)
    c = cfg.constants.c_cp
    jump = cp.normalized_jump_law()
    b = beta(AtomicMeasure(1, jump.atoms), t, r, m)
    rhs = cp_bound_rhs(float(cp.alpha), float(b.value), r, m, c)
    flags = (FLAG_DEGENERATE_BETA,) if b.value == 0 else ()
    if t == 0:
        mass = h_point_mass_zero(cp.weight, float(cp.lam))
        lhs = ConcentrationResult(max(mass, 1e-300), MODE_EXACT, witness=(0.0,), ci_halfwidth=1e-12)
    else:
        draws = sample_H_lambda(cp, cfg.mc_samples, cfg.seed)
        frac, center = empirical_window_max(draws, float(t))
        lhs = ConcentrationResult(frac, MODE_MC, witness=(center,))
    slack = rhs / lhs.value if lhs.value > 0 else math.inf
    return BoundReport(
        lhs,
        rhs,
        {"c_cp": c},
        slack,
        flags,
        {
            "alpha": float(cp.alpha),
            "beta": format_fraction(b.value),
            "r": r,
            "m": m,
            "tau": format_fraction(t),
            "n": cp.weight.n,
            "exactness": b.exactness,
        },
    )


BOUND_LEDGER_HEADER = "instance-id,n,r,m,tau,lhs,rhs,slack,constants"


def append_bound_ledger(path, instance_id: str, report: BoundReport) -> None:
    """Append one report row, writing the header on first touch."""
    import os

    new = not os.path.exists(path) or os.path.getsize(path) == 0
    consts = ";".join(f"{k}={v}" for k, v in sorted(report.constants_used.items()))
    p = report.params
    row = ",".join(
        [
            instance_id,
            str(p.get("n", "")),
            str(p.get("r", "")),
            str(p.get("m", "")),
            str(p.get("tau", "")),
            repr(report.lhs.value),
            repr(report.rhs),
            repr(report.slack),
            consts,
        ]
    )
    with open(path, "a", encoding="utf-8") as fh:
        if new:
            fh.write(BOUND_LEDGER_HEADER + "\n")
        fh.write(row + "\n")


def char_increment_slack(char_fn, ts, hs) -> float:
    """Max violation of |U(t+h) - U(t)|^2 <= 2(1 - Re U(h)) over the grid;
    nonpositive up to roundoff for genuine characteristic functions."""
    worst = -math.inf
    for t in ts:
        for h in hs:
            lhs = abs(char_fn(t + h) - char_fn(t)) ** 2
            rhs = 2.0 * (1.0 - complex(char_fn(h)).real)
            worst = max(worst, lhs - rhs)
    return worst
