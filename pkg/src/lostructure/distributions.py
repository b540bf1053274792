"""Finitely supported laws in exact rational arithmetic.

Houses the discrete law of a single summand, its symmetrization and tail
functional, weight vectors with exact norm bookkeeping, the exact law of the
weighted sum, and the symmetric compound-Poisson family built from a weight
vector (characteristic function, Levy-type atom measure, and a
Poisson-difference sampler).

Values are tuples of Fractions of length ``dim``; masses are Fractions.
Everything downstream (window sweeps, properness, witness searches) relies
on the exactness of equality and ordering here.
"""

from __future__ import annotations

import dataclasses
import warnings
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .errors import AtomCapExceeded
from .rational import Vec, dot, format_fraction, max_norm, to_fraction, to_vec

DEFAULT_ATOM_CAP = 10**6


def _canonical_atoms(pairs: Iterable, dim: int) -> tuple[tuple[Vec, Fraction], ...]:
    seen: dict[Vec, Fraction] = {}
    for value, mass in pairs:
        v = to_vec(value, dim)
        m = to_fraction(mass)
        if v in seen:
            raise ValueError(f"duplicate atom value {v}")
        if m <= 0:
            raise ValueError(f"atom mass must be positive, got {m}")
        seen[v] = m
    return tuple(sorted(seen.items()))


@dataclasses.dataclass(frozen=True)
class DiscreteDistribution:
    """A probability law with finitely many rational atoms in R^dim."""

    dim: int
    atoms: tuple[tuple[Vec, Fraction], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        object.__setattr__(self, "atoms", _canonical_atoms(self.atoms, self.dim))
        total = sum((m for _, m in self.atoms), Fraction(0))
        if total != 1:
            raise ValueError(f"masses must sum to exactly 1, got {total}")

    @property
    def support_size(self) -> int:
        return len(self.atoms)

    def mass_at(self, value) -> Fraction:
        v = to_vec(value, self.dim)
        for val, m in self.atoms:
            if val == v:
                return m
        return Fraction(0)

    def scalar_atoms(self) -> list[tuple[Fraction, Fraction]]:
        """(value, mass) pairs with scalar values; dim must be 1."""
        if self.dim != 1:
            raise ValueError("scalar_atoms requires dim=1")
        return [(v[0], m) for v, m in self.atoms]

    def marginal(self, j: int) -> "DiscreteDistribution":
        """Law of coordinate j (0-based)."""
        acc: dict[Vec, Fraction] = {}
        for v, m in self.atoms:
            key = (v[j],)
            acc[key] = acc.get(key, Fraction(0)) + m
        return DiscreteDistribution(1, tuple(acc.items()))

    def is_symmetric(self) -> bool:
        table = dict(self.atoms)
        return all(table.get(tuple(-c for c in v)) == m for v, m in self.atoms)

    def char_fn(self) -> Callable[[np.ndarray], complex]:
        """Characteristic function as a float-valued callable (dim=1)."""
        if self.dim != 1:
            raise ValueError("char_fn helper provided for dim=1 only")
        vals = np.array([float(v[0]) for v, _ in self.atoms])
        masses = np.array([float(m) for _, m in self.atoms])
        return lambda t: np.sum(masses * np.exp(1j * np.asarray(t)[..., None] * vals), axis=-1)

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "atoms": [[[format_fraction(c) for c in v], format_fraction(m)] for v, m in self.atoms],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "DiscreteDistribution":
        return DiscreteDistribution(int(d["dim"]), tuple((tuple(v), m) for v, m in d["atoms"]))


def from_scalar_atoms(pairs: Iterable) -> DiscreteDistribution:
    return DiscreteDistribution(1, tuple((to_vec(v, 1), m) for v, m in pairs))


def rademacher() -> DiscreteDistribution:
    return from_scalar_atoms([(1, Fraction(1, 2)), (-1, Fraction(1, 2))])


def point_mass(value, dim: int = 1) -> DiscreteDistribution:
    return DiscreteDistribution(dim, ((to_vec(value, dim), Fraction(1)),))


def uniform_on(values) -> DiscreteDistribution:
    vals = [to_vec(v, None) for v in values]
    m = Fraction(1, len(vals))
    return DiscreteDistribution(len(vals[0]), tuple((v, m) for v in vals))


@dataclasses.dataclass(frozen=True)
class WeightVector:
    """The coefficient vector a = (a_1, ..., a_n), a_k in R^dim, a != 0."""

    dim: int
    entries: tuple[Vec, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        object.__setattr__(self, "entries", tuple(to_vec(e, self.dim) for e in self.entries))
        if len(self.entries) < 1:
            raise ValueError("need n >= 1 entries")
        if all(all(c == 0 for c in e) for e in self.entries):
            raise ValueError("weight vector must not be identically zero")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def norm_sq(self) -> Fraction:
        return sum((sum((c * c for c in e), Fraction(0)) for e in self.entries), Fraction(0))

    def coordinate(self, j: int) -> "WeightVector":
        """Projection a^(j) as a one-dimensional weight vector (0-based j)."""
        return WeightVector(1, tuple((e[j],) for e in self.entries))

    def coordinate_is_zero(self, j: int) -> bool:
        return all(e[j] == 0 for e in self.entries)

    def scale(self, factor) -> "WeightVector":
        f = to_fraction(factor)
        if f == 0:
            raise ValueError("scale factor must be nonzero")
        return WeightVector(self.dim, tuple(tuple(f * c for c in e) for e in self.entries))

    def scalar_entries(self) -> list[Fraction]:
        if self.dim != 1:
            raise ValueError("scalar_entries requires dim=1")
        return [e[0] for e in self.entries]

    def sorted_abs_desc(self) -> list[Fraction]:
        """Entry magnitudes (max-norm) sorted descending, ties by index."""
        mags = [max_norm(e) for e in self.entries]
        order = sorted(range(self.n), key=lambda k: (-mags[k], k))
        return [mags[k] for k in order]

    def as_float_array(self) -> np.ndarray:
        return np.array([[float(c) for c in e] for e in self.entries])

    def to_json_dict(self) -> dict:
        return {"dim": self.dim, "entries": [[format_fraction(c) for c in e] for e in self.entries]}

    @staticmethod
    def from_json_dict(d: dict) -> "WeightVector":
        return WeightVector(int(d["dim"]), tuple(tuple(e) for e in d["entries"]))


def weights_1d(values) -> WeightVector:
    return WeightVector(1, tuple((v,) for v in values))


@dataclasses.dataclass(frozen=True)
class AtomicMeasure:
    """A finite nonnegative atomic measure; total mass need not be 1."""

    dim: int
    atoms: tuple[tuple[Vec, Fraction], ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", _canonical_atoms(self.atoms, self.dim))

    @property
    def total(self) -> Fraction:
        return sum((m for _, m in self.atoms), Fraction(0))

    def scalar_atoms(self) -> list[tuple[Fraction, Fraction]]:
        if self.dim != 1:
            raise ValueError("scalar_atoms requires dim=1")
        return [(v[0], m) for v, m in self.atoms]

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "atoms": [[[format_fraction(c) for c in v], format_fraction(m)] for v, m in self.atoms],
            "total": format_fraction(self.total),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "AtomicMeasure":
        return AtomicMeasure(int(d["dim"]), tuple((tuple(v), m) for v, m in d["atoms"]))


@dataclasses.dataclass(frozen=True)
class CompoundPoissonSpec:
    """The symmetric compound-Poisson family built on a weight vector.

    The characteristic function is exp(-lam/2 * sum_k (1 - cos<t, a_k>)),
    equivalently a compound Poisson law whose jump measure puts mass lam/4
    at each of +-a_k.  lam = 0 degenerates to the point mass at zero.
    """

    weight: WeightVector
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")

    @property
    def alpha(self) -> float:
        """Exponent scale when written as exp(alpha*(What - 1)) with What the
        characteristic function of the normalized atom measure."""
        return self.lam * self.weight.n / 2.0

    def normalized_jump_law(self) -> DiscreteDistribution:
        """The probability measure W with What as above: star measure / 2n."""
        star = levy_measure_star(self.weight)
        n2 = Fraction(2 * self.weight.n)
        return DiscreteDistribution(star.dim, tuple((v, m / n2) for v, m in star.atoms))

    def char_fn(self, t) -> float:
        return char_fn_H(self.weight, t, self.lam)

    def sample(self, count: int, seed: int) -> np.ndarray:
        return sample_H_lambda(self, count, seed)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def symmetrize(F: DiscreteDistribution) -> DiscreteDistribution:
    """Law of X1 - X2 for X1, X2 i.i.d. with law F."""
    acc: dict[Vec, Fraction] = {}
    for v1, m1 in F.atoms:
        for v2, m2 in F.atoms:
            key = tuple(c1 - c2 for c1, c2 in zip(v1, v2))
            acc[key] = acc.get(key, Fraction(0)) + m1 * m2
    return DiscreteDistribution(F.dim, tuple(acc.items()))


def tail_mass(G: DiscreteDistribution, delta) -> Fraction:
    """Mass of {z : |z| > delta} in max-norm, strict inequality."""
    d = to_fraction(delta)
    if d < 0:
        raise ValueError("delta must be >= 0")
    if not G.is_symmetric():
        warnings.warn("tail_mass called on an asymmetric law; the tail functional is defined for symmetrized laws")
    return sum((m for v, m in G.atoms if max_norm(v) > d), Fraction(0))


def weighted_sum_law(F: DiscreteDistribution, a: WeightVector, atom_cap: int = DEFAULT_ATOM_CAP) -> DiscreteDistribution:
    """Exact law of sum_k X_k a_k, with X_k i.i.d. scalar with law F.

    Iterated convolution; atoms merge at exactly equal values, and the
    merged support is capped to keep blow-up loud instead of slow.
    """
    if F.dim != 1:
        raise ValueError("summand law must be one-dimensional")
    scalars = F.scalar_atoms()
    acc: dict[Vec, Fraction] = {(Fraction(0),) * a.dim: Fraction(1)}
    for e in a.entries:
        nxt: dict[Vec, Fraction] = {}
        for v, m in acc.items():
            for x, mx in scalars:
                key = tuple(c + x * ec for c, ec in zip(v, e))
                prev = nxt.get(key)
                nxt[key] = m * mx if prev is None else prev + m * mx
        if len(nxt) > atom_cap:
            raise AtomCapExceeded(f"support grew to {len(nxt)} atoms (cap {atom_cap})")
        acc = nxt
    return DiscreteDistribution(a.dim, tuple(acc.items()))


def levy_measure_star(a: WeightVector) -> AtomicMeasure:
    """Atom measure with unit mass at each of +-a_k; total 2n."""
    acc: dict[Vec, Fraction] = {}
    for e in a.entries:
        for v in (e, tuple(-c for c in e)):
            acc[v] = acc.get(v, Fraction(0)) + 1
    return AtomicMeasure(a.dim, tuple(acc.items()))


def levy_measure_plain(a: WeightVector) -> AtomicMeasure:
    """Atom measure with unit mass at each a_k (no reflection); total n."""
    acc: dict[Vec, Fraction] = {}
    for e in a.entries:
        acc[e] = acc.get(e, Fraction(0)) + 1
    return AtomicMeasure(a.dim, tuple(acc.items()))


def char_fn_H(a: WeightVector, t, lam: float) -> float:
    """exp(-lam/2 * sum_k (1 - cos<t, a_k>)); always in (0, 1]."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    tv = np.atleast_1d(np.asarray(t, dtype=float))
    if tv.shape != (a.dim,):
        raise ValueError(f"t must have shape ({a.dim},)")
    ent = a.as_float_array()
    return float(np.exp(-lam / 2.0 * np.sum(1.0 - np.cos(ent @ tv))))


def sample_H_lambda(spec: CompoundPoissonSpec, count: int, seed: int) -> np.ndarray:
    """i.i.d. samples of sum_k (N_k+ - N_k-) a_k, N_k+- ~ Poisson(lam/4).

    Entries equal as vectors share a pooled Poisson rate (sums of
    independent symmetric Poisson differences merge exactly).  Returns an
    array of shape (count,) for dim=1, else (count, dim).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    a = spec.weight
    out = np.zeros((count, a.dim))
    if spec.lam > 0:
        groups: dict[Vec, int] = {}
        for e in a.entries:
            groups[e] = groups.get(e, 0) + 1
        for e, mult in groups.items():  # first-occurrence order: deterministic
            ev = np.array([float(c) for c in e])
            if not ev.any():
                continue
            rate = mult * spec.lam / 4.0
            diff = rng.poisson(rate, count).astype(float) - rng.poisson(rate, count).astype(float)
            out += diff[:, None] * ev[None, :]
    return out[:, 0] if a.dim == 1 else out


def h_point_mass_zero(a: WeightVector, lam: float, tol: float = 1e-12, support_cap: int = 10**6) -> float:
    """P(H^lam = {0 vector}) via truncated symmetric Poisson-difference pmfs.

    Entries of equal magnitude pool their rates; each pooled difference
    count is truncated once its two-sided pmf captures all but tol of the
    mass, so the returned value underestimates by at most tol in total.
    """
    from scipy.stats import skellam

    if lam == 0:
        return 1.0
    groups: dict[Vec, int] = {}
    for e in a.entries:
        if all(c == 0 for c in e):
            continue
        key = min(e, tuple(-c for c in e))  # +-v generate the same jump law
        groups[key] = groups.get(key, 0) + 1
    if not groups:
        return 1.0
    per_group_tol = tol / len(groups)
    acc: dict[Vec, float] = {(Fraction(0),) * a.dim: 1.0}
    for e, mult in sorted(groups.items()):
        mu = mult * lam / 4.0
        pmf = [(0, float(skellam.pmf(0, mu, mu)))]
        covered = pmf[0][1]
        j = 1
        while covered < 1.0 - per_group_tol:
            pj = float(skellam.pmf(j, mu, mu))
            pmf.append((j, pj))
            pmf.append((-j, pj))
            covered += 2.0 * pj
            j += 1
        nxt: dict[Vec, float] = {}
        for v, p in acc.items():
            for k, pk in pmf:
                key = tuple(c + k * ec for c, ec in zip(v, e))
                nxt[key] = nxt.get(key, 0.0) + p * pk
        if len(nxt) > support_cap:
            raise AtomCapExceeded(f"truncated support grew to {len(nxt)} (cap {support_cap})")
        acc = nxt
    return acc.get((Fraction(0),) * a.dim, 0.0)
