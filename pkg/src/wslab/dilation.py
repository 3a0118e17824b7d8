"""Good / bad indices, scalable pairs and the scaling iteration into X_0.

Given bounds m_1..m_d with |w_{I,j}| <= m_j, an index I is good when
beta_I equals the box product m_1^{i_1} ... m_d^{i_d}, i.e. every weight
inside the box [0, I] sits at its bound.  A pair (I, j) is scalable when
I is good and I + e_j is bad.  Multiplying exactly the scalable weights
by t keeps the commutation relations, and t = r (the scaling radius)
pushes at least one new index into the good set.  Repeating until no
pair is scalable leaves a constant table; one final rescale of the
weakest direction brings sum m_j^2 up to 1.
"""

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from . import multiindex as mi
from .config import GOOD_RTOL, default_tol
from .errors import ConvergenceError, NoScalablePairs, ValidationError
from .shift import WeightTable, moments, spherical_sums


@dataclass(frozen=True)
class IndexClassification:
    good: frozenset
    bad: frozenset
    scalable: frozenset
    good_mask: np.ndarray = field(repr=False, compare=False)  # over H_{N+1}
    scalable_mask: np.ndarray = field(repr=False, compare=False)  # (n_w, d)

    def to_json(self):
        key = mi.rank
        return {
            "good": [mi.to_json(i) for i in sorted(self.good, key=key)],
            "bad": [mi.to_json(i) for i in sorted(self.bad, key=key)],
            "scalable": [
                {"I": mi.to_json(i), "j": j} for i, j in sorted(self.scalable, key=lambda p: (key(p[0]), p[1]))
            ],
        }


def _bounds(table, m):
    if m is None:
        m = table.bounds
    if m is None:
        raise ValidationError("bounds m_1..m_d are required (none given and the table carries none)")
    m = np.asarray(m, dtype=float)
    if m.shape != (table.d,):
        raise ValidationError(f"bounds must have {table.d} entries, got {m.tolist()}")
    if np.any(m <= 0):
        raise ValidationError(f"bounds must be positive, got {m.tolist()}")
    return m


def _check_weights(table, m):
    wabs = np.abs(table.weights)
    if np.any(wabs == 0):
        raise ValidationError("all weights must be nonzero")
    over = wabs - m[None, :] * (1 + 1e-12)
    if np.any(over > 0):
        p, j = np.unravel_index(np.argmax(over), over.shape)
        idx = mi.basis(table.d, table.N)[p]
        raise ValidationError(f"|w_{{{list(idx)},{j + 1}}}| = {wabs[p, j]!r} exceeds m_{j + 1} = {m[j]!r}")
    return wabs


def box_products(d, n, m):
    """prod_j m_j^{i_j} for every |I| <= n."""
    idx = np.array(mi.basis(d, n), dtype=float)
    return np.prod(np.asarray(m, dtype=float)[None, :] ** idx, axis=1)


def classify_indices(table, m=None, tol=GOOD_RTOL):
    m = _bounds(table, m)
    _check_weights(table, m)
    d, N = table.d, table.N
    beta = moments(table).values
    box = box_products(d, N + 1, m)
    good_mask = np.abs(beta - box) <= tol * box
    succ, _ = mi.neighbors(d, N + 1)
    n_w = table.weights.shape[0]
    scal = good_mask[:n_w, None] & ~good_mask[succ[:n_w]]
    idxs = mi.basis(d, N + 1)
    good = frozenset(i for i, g in zip(idxs, good_mask) if g)
    bad = frozenset(i for i, g in zip(idxs, good_mask) if not g)
    scalable = frozenset((idxs[p], int(j) + 1) for p, j in np.argwhere(scal))
    good_mask.setflags(write=False)
    scal.setflags(write=False)
    return IndexClassification(good, bad, scalable, good_mask, scal)


def _radius(table, m, cls):
    if not cls.scalable:
        raise NoScalablePairs("no scalable pairs: the table is already constant in every direction")
    ratio = np.abs(table.weights) / m[None, :]
    worst = ratio[cls.scalable_mask].max()
    argmax = cls.scalable_mask & (ratio >= worst * (1 - 1e-12))
    return 1.0 / worst, argmax


def scaling_radius(table, m=None, tol=GOOD_RTOL):
    """r = 1 / max{|w_{I,j}| / m_j : (I, j) scalable} and the pairs attaining it."""
    m = _bounds(table, m)
    cls = classify_indices(table, m, tol)
    r, argmax = _radius(table, m, cls)
    idxs = mi.basis(table.d, table.N)
    return float(r), [(idxs[p], int(j) + 1) for p, j in np.argwhere(argmax)]


def _apply_scale(table, m, cls, t, r, argmax):
    w = np.array(table.weights)
    w[cls.scalable_mask] *= t
    if t == r:
        # argmax pairs land on the bound; pin them there exactly
        phase = w[argmax] / np.abs(w[argmax])
        w[argmax] = phase * np.broadcast_to(m[None, :], w.shape)[argmax]
    return WeightTable(table.d, table.N, w, tuple(m))


def scale_step(table, m=None, t=None, tol=GOOD_RTOL):
    """Multiply every scalable weight by ``t`` (|t| <= r); default t = r."""
    m = _bounds(table, m)
    cls = classify_indices(table, m, tol)
    if not cls.scalable:
        if t is None:
            raise NoScalablePairs("no scalable pairs: the table is already constant in every direction")
        return WeightTable(table.d, table.N, table.weights, tuple(m))
    r, argmax = _radius(table, m, cls)
    if t is None:
        t = r
    if abs(t) > r * (1 + 1e-12):
        raise ValidationError(f"|t| = {abs(t)!r} exceeds the scaling radius r = {r!r}")
    return _apply_scale(table, m, cls, t, r, argmax)


@dataclass(frozen=True)
class ScaleStep:
    table: WeightTable
    classification: IndexClassification
    r: float
    t: float

    def to_json(self):
        return {
            "table": self.table.to_json(),
            "classification": self.classification.to_json(),
            "r": self.r,
            "t": self.t,
        }


@dataclass(frozen=True)
class Rescale:
    direction: int
    old: float
    new: float

    @property
    def r(self):
        return self.new / self.old

    def to_json(self):
        return {"direction": self.direction, "from": self.old, "to": self.new, "r": self.r}


@dataclass(frozen=True)
class NormalizationTrace:
    steps: tuple
    rescale: Rescale
    final: WeightTable
    reached_x0: bool

    def to_json(self):
        return {
            "steps": [s.to_json() for s in self.steps],
            "rescale": None if self.rescale is None else self.rescale.to_json(),
            "final": self.final.to_json(),
            "reached_x0": self.reached_x0,
        }


def in_x0(table, m, tol=1e-10):
    m = np.asarray(m, dtype=float)
    return bool(
        abs(np.sum(m**2) - 1) <= tol and np.all(np.abs(np.abs(table.weights) - m[None, :]) <= tol)
    )


def normalize_to_x0(table, m=None, tol=GOOD_RTOL):
    """Scale a positive-weight table into X_0, recording every step."""
    m = _bounds(table, m)
    if np.sum(m**2) > 1 + 1e-12:
        raise ValidationError(f"need sum m_j^2 <= 1, got {float(np.sum(m ** 2))!r}")
    _check_weights(table, m)
    current = WeightTable(table.d, table.N, table.weights, tuple(m))
    limit = mi.count_upto(table.d, table.N + 1)
    steps = []
    while True:
        cls = classify_indices(current, m, tol)
        if not cls.scalable:
            break
        if len(steps) >= limit:
            raise ConvergenceError(f"normalization exceeded {limit} steps", best=current)
        r, argmax = _radius(current, m, cls)
        steps.append(ScaleStep(current, cls, float(r), float(r)))
        current = _apply_scale(current, m, cls, r, r, argmax)

    rescale = None
    total = float(np.sum(m**2))
    if total < 1 - 1e-15:
        k = int(np.argmin(m))  # first minimum wins ties
        new_mk = sqrt(max(0.0, 1 - (total - m[k] ** 2)))
        w = np.array(current.weights)
        w[:, k] *= new_mk / m[k]
        rescale = Rescale(k + 1, float(m[k]), new_mk)
        m = m.copy()
        m[k] = new_mk
        current = WeightTable(current.d, current.N, w, tuple(m))
    return NormalizationTrace(tuple(steps), rescale, current, in_x0(current, m))


@dataclass(frozen=True)
class IsometryCheck:
    holds: bool
    worst_index: tuple
    worst_defect: float


def spherical_isometry_check(table, tol=None):
    """sum_j |w_{I,j}|^2 == 1 for every |I| <= N."""
    tol = default_tol() if tol is None else tol
    dev = np.abs(spherical_sums(table) - 1)
    p = int(np.argmax(dev))
    return IsometryCheck(bool(dev[p] <= tol), mi.basis(table.d, table.N)[p], float(dev[p]))


@dataclass(frozen=True)
class BalancedProfile:
    levels: dict  # k -> (min, max) of spherical sums over |I| = k
    is_level_constant: bool


def balanced_profile(table, tol=None):
    """Per-level spread of spherical sums.

    Level-constant sums are only a proxy for a spherically balanced
    shift; nothing here decides the slice representation itself.
    """
    tol = default_tol() if tol is None else tol
    sums = spherical_sums(table)
    degs = mi.degrees(table.d, table.N)
    levels = {}
    for k in range(table.N + 1):
        s = sums[degs == k]
        levels[k] = (float(s.min()), float(s.max()))
    constant = all(hi - lo <= tol for lo, hi in levels.values())
    return BalancedProfile(levels, constant)


# ------------------------------------------------------ random tables

TARGETS = ("doubly", "spherical", "row")


def random_table(seed, d, N, target="doubly", bounds=None, snap=0.35, phases=False, spread=(0.25, 1.4)):
    """Random commuting table built from moments.

    Moments are drawn level by level (log-uniform ratios), weights are
    their quotients, so commutation holds up to rounding.  After each
    level the new moments are scaled down uniformly until the target
    condition holds.  With ``bounds`` the ratios are capped so that
    |w_{I,j}| <= m_j, and with probability ``snap`` a moment sits exactly
    at its cap, which produces good indices for the scaling iteration.
    """
    if target not in TARGETS:
        raise ValidationError(f"target must be one of {TARGETS}, got {target!r}")
    mi.check_limits(d, N)
    rng = np.random.default_rng(seed)
    m = None
    if bounds is not None:
        m = np.asarray(bounds, dtype=float)
        if m.shape != (d,) or np.any(m <= 0):
            raise ValidationError(f"bounds must be {d} positive numbers, got {bounds!r}")
    _, pred = mi.neighbors(d, N + 1)
    degs = mi.degrees(d, N + 1)
    dim = pred.shape[0]
    beta = np.zeros(dim)
    beta[0] = 1.0
    lo, hi = np.log(spread[0]), np.log(spread[1])
    for k in range(N + 1):
        cur = np.nonzero(degs == k)[0]
        nxt = np.nonzero(degs == k + 1)[0]
        for s in nxt:
            js = np.nonzero(pred[s] >= 0)[0]
            if m is not None:
                cap = np.min(beta[pred[s, js]] * m[js])
                u = 1.0 if rng.random() < snap else np.exp(rng.uniform(np.log(0.5), 0.0))
                beta[s] = cap * u
            else:
                beta[s] = beta[pred[s, js[0]]] * np.exp(rng.uniform(lo, hi))
        worst = 0.0
        if target in ("doubly", "spherical"):
            for s in cur:
                worst = max(worst, sum((beta[t] / beta[s]) ** 2 for t in _succ_row(d, N, s)))
        if target in ("doubly", "row"):
            for s in nxt:
                worst = max(worst, sum((beta[s] / beta[q]) ** 2 for q in pred[s] if q >= 0))
        if worst > 1:
            beta[nxt] /= sqrt(worst)
    z = beta.astype(np.complex128)
    if phases:
        z = z * np.exp(1j * rng.uniform(0, 2 * np.pi, dim))
        z[0] = 1.0
    succ, _ = mi.neighbors(d, N + 1)
    n_w = mi.count_upto(d, N)
    w = z[succ[:n_w]] / z[:n_w, None]
    if m is not None:
        # quotients can overshoot a cap by an ulp
        mod = np.abs(w)
        over = mod > m[None, :]
        w[over] *= (m[None, :] / mod)[over]
    return WeightTable(d, N, w, None if m is None else tuple(m))


def _succ_row(d, N, s):
    succ, _ = mi.neighbors(d, N + 1)
    return [t for t in succ[s] if t >= 0]
