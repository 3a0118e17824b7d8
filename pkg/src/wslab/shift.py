"""Weight tables and truncated d-variable weighted shifts.

A :class:`WeightTable` stores w_{I,j} for every |I| <= N as a dense
complex array whose rows follow the graded basis layout.  The shift it
defines acts on H_{N+1} = span{e_I : |I| <= N+1}; the top level is sent
to zero.
"""

from dataclasses import dataclass, field
from math import isclose, sqrt

import numpy as np
import scipy.sparse as sp

from . import _kernels as K
from . import multiindex as mi
from .config import COMMUTATION_TOL, default_tol
from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class WeightTable:
    d: int
    N: int
    weights: np.ndarray
    bounds: tuple = None

    def __post_init__(self):
        mi.check_limits(self.d, self.N)
        w = np.array(self.weights, dtype=np.complex128)
        expected = (mi.count_upto(self.d, self.N), self.d)
        if w.shape != expected:
            raise ValidationError(f"weights must have shape {expected}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.bounds is not None:
            m = tuple(float(x) for x in self.bounds)
            if len(m) != self.d:
                raise ValidationError(f"bounds must have {self.d} entries, got {len(m)}")
            if any(not x > 0 for x in m):
                raise ValidationError(f"bounds must be positive, got {m}")
            excess = np.abs(w) - np.asarray(m)
            if excess.size and excess.max() > 1e-12 * max(1.0, max(m)):
                p, j = np.unravel_index(np.argmax(excess), excess.shape)
                idx = mi.basis(self.d, self.N)[p]
                raise ValidationError(
                    f"|w_{{{list(idx)},{j + 1}}}| = {abs(w[p, j])!r} exceeds bound m_{j + 1} = {m[j]!r}"
                )
            object.__setattr__(self, "bounds", m)

    @classmethod
    def from_mapping(cls, d, N, mapping, bounds=None):
        """Build from ``{(I, j): w}``; every (I, j) with |I| <= N is required."""
        mi.check_limits(d, N)
        pos = mi.positions(d, N)
        w = np.zeros((len(pos), d), dtype=np.complex128)
        seen = np.zeros(w.shape, dtype=bool)
        for (idx, j), value in mapping.items():
            idx = mi.as_index(idx, d)
            if idx not in pos:
                raise ValidationError(f"index {list(idx)} has degree above N={N}")
            if not 1 <= j <= d:
                raise ValidationError(f"direction {j} out of range 1..{d}")
            if seen[pos[idx], j - 1]:
                raise ValidationError(f"duplicate weight for I={list(idx)}, j={j}")
            seen[pos[idx], j - 1] = True
            w[pos[idx], j - 1] = value
        if not seen.all():
            p, j = np.argwhere(~seen)[0]
            raise ValidationError(f"missing weight for I={list(mi.basis(d, N)[p])}, j={j + 1}")
        return cls(d, N, w, bounds)

    @classmethod
    def from_function(cls, d, N, fn, bounds=None):
        """Build from ``fn(I, j)`` evaluated on every entry."""
        mi.check_limits(d, N)
        idxs = mi.basis(d, N)
        w = np.array([[fn(idx, j) for j in range(1, d + 1)] for idx in idxs], dtype=np.complex128)
        return cls(d, N, w.reshape(len(idxs), d), bounds)

    def weight(self, idx, j):
        idx = mi.as_index(idx, self.d)
        pos = mi.positions(self.d, self.N)
        if idx not in pos:
            raise ValidationError(f"index {list(idx)} has degree above N={self.N}")
        if not 1 <= j <= self.d:
            raise ValidationError(f"direction {j} out of range 1..{self.d}")
        return complex(self.weights[pos[idx], j - 1])

    def items(self):
        """Yield ``(I, j, w)`` in basis order."""
        for idx, row in zip(mi.basis(self.d, self.N), self.weights):
            for j in range(self.d):
                yield idx, j + 1, complex(row[j])

    def with_weights(self, weights, bounds=...):
        return WeightTable(self.d, self.N, weights, self.bounds if bounds is ... else bounds)

    def moduli(self):
        """Same table with every weight replaced by its modulus."""
        return self.with_weights(np.abs(self.weights))

    def truncate(self, N):
        """Restrict to |I| <= N (compression of the shift to H_{N+1})."""
        if N > self.N:
            raise ValidationError(f"cannot extend a table defined up to N={self.N} to N={N}")
        if N < 0:
            raise ValidationError(f"N must be >= 0, got {N}")
        return WeightTable(self.d, N, self.weights[: mi.count_upto(self.d, N)], self.bounds)

    def __eq__(self, other):
        if not isinstance(other, WeightTable):
            return NotImplemented
        return (
            self.d == other.d
            and self.N == other.N
            and self.bounds == other.bounds
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    # JSON ------------------------------------------------------------

    def to_json(self):
        entries = []
        for idx, j, w in self.items():
            entries.append({"I": mi.to_json(idx), "j": j, "re": w.real, "im": w.imag})
        return {
            "d": self.d,
            "N": self.N,
            "bounds": None if self.bounds is None else list(self.bounds),
            "weights": entries,
        }

    @classmethod
    def from_json(cls, doc):
        from .schemas import validate_weight_table

        validate_weight_table(doc)
        d, N = doc["d"], doc["N"]
        mapping = {}
        for n, entry in enumerate(doc["weights"]):
            idx = tuple(entry["I"])
            if len(idx) != d:
                raise ValidationError(f"weights[{n}].I has length {len(idx)}, expected d={d}")
            if sum(idx) > N:
                raise ValidationError(f"weights[{n}].I = {list(idx)} has degree above N={N}")
            if not 1 <= entry["j"] <= d:
                raise ValidationError(f"weights[{n}].j = {entry['j']} out of range 1..{d}")
            key = (idx, entry["j"])
            if key in mapping:
                raise ValidationError(f"weights[{n}] duplicates I={list(idx)}, j={entry['j']}")
            if "w" in entry:
                value = complex(entry["w"])
            else:
                value = complex(entry["re"], entry.get("im", 0.0))
            mapping[key] = value
        return cls.from_mapping(d, N, mapping, doc.get("bounds"))


@dataclass(frozen=True, eq=False)
class TruncatedShift:
    table: WeightTable
    dim: int
    matrices: tuple = field(repr=False)

    @property
    def d(self):
        return self.table.d

    def dense(self, j):
        return self.matrices[j - 1].toarray()


@dataclass(frozen=True)
class Violation:
    index: tuple
    j: int
    k: int
    residual: float


@dataclass(frozen=True)
class ContractivityReport:
    spherical_contractive: bool
    row_contractive: bool
    doubly_contractive: bool
    spherical_isometry: bool
    worst_spherical: tuple  # (index, sum - 1)
    worst_row: tuple
    spherical_sums: np.ndarray = field(repr=False, compare=False)
    row_sums: np.ndarray = field(repr=False, compare=False)

    def to_json(self):
        return {
            "spherical_contractive": self.spherical_contractive,
            "row_contractive": self.row_contractive,
            "doubly_contractive": self.doubly_contractive,
            "spherical_isometry": self.spherical_isometry,
            "worst_spherical": {"I": mi.to_json(self.worst_spherical[0]), "defect": self.worst_spherical[1]},
            "worst_row": {"I": mi.to_json(self.worst_row[0]), "defect": self.worst_row[1]},
        }


@dataclass(frozen=True)
class Moments:
    d: int
    N: int
    values: np.ndarray = field(repr=False)  # on H_{N+1}
    residual: float
    degenerate: bool

    def __getitem__(self, idx):
        return float(self.values[mi.positions(self.d, self.N + 1)[tuple(idx)]])

    @property
    def beta(self):
        return dict(zip(mi.basis(self.d, self.N + 1), self.values.tolist()))


# ------------------------------------------------------------------ ops


def check_commutation(table, tol=COMMUTATION_TOL):
    """All (I, j, k) with |I| <= N-1, j < k whose relation fails by more than tol."""
    if tol < 0:
        raise ValidationError(f"tol must be >= 0, got {tol}")
    d, N = table.d, table.N
    n_inner = mi.count_upto(d, N - 1)
    if n_inner == 0 or d == 1:
        return []
    succ, _ = mi.neighbors(d, N + 1)
    res = K.commutation_residuals(table.weights, succ, n_inner)
    idxs = mi.basis(d, N)
    return [
        Violation(idxs[p], int(j) + 1, int(k) + 1, float(res[p, j, k]))
        for p, j, k in np.argwhere(res > tol)
    ]


def max_commutation_residual(table):
    d, N = table.d, table.N
    n_inner = mi.count_upto(d, N - 1)
    if n_inner == 0 or d == 1:
        return 0.0
    succ, _ = mi.neighbors(d, N + 1)
    return float(K.commutation_residuals(table.weights, succ, n_inner).max())


def build_shift(table, tol=COMMUTATION_TOL):
    """Sparse T_1..T_d on H_{N+1}; rejects tables violating commutation."""
    bad = check_commutation(table, tol)
    if bad:
        v = bad[0]
        raise ValidationError(
            f"{len(bad)} commutation violation(s); first at I={list(v.index)}, "
            f"j={v.j}, k={v.k}, residual {v.residual:.3e}"
        )
    d, N = table.d, table.N
    dim = mi.count_upto(d, N + 1)
    n_w = table.weights.shape[0]
    succ, _ = mi.neighbors(d, N + 1)
    cols = np.arange(n_w)
    mats = []
    for j in range(d):
        mats.append(
            sp.csr_matrix((table.weights[:, j], (succ[:n_w, j], cols)), shape=(dim, dim))
        )
    return TruncatedShift(table, dim, tuple(mats))


def adjoint_apply(shift, j, v):
    """T_j^* v."""
    if not 1 <= j <= shift.d:
        raise ValidationError(f"direction {j} out of range 1..{shift.d}")
    v = np.asarray(v)
    if v.shape != (shift.dim,):
        raise ValidationError(f"vector must have length {shift.dim}, got shape {v.shape}")
    return shift.matrices[j - 1].conj().T @ v


def spherical_sums(table):
    return np.sum(np.abs(table.weights) ** 2, axis=1)


def row_sums(table):
    _, pred = mi.neighbors(table.d, table.N + 1)
    return K.row_sums(table.weights, pred)


def classify(table, tol=None):
    """Spherical / row / double contractivity and spherical isometry."""
    tol = default_tol() if tol is None else tol
    sph = spherical_sums(table)
    row = row_sums(table)
    ps, pr = int(np.argmax(sph)), int(np.argmax(row))
    idx_w = mi.basis(table.d, table.N)
    idx_h = mi.basis(table.d, table.N + 1)
    spherical = bool(sph[ps] <= 1 + tol)
    rowc = bool(row[pr] <= 1 + tol)
    return ContractivityReport(
        spherical_contractive=spherical,
        row_contractive=rowc,
        doubly_contractive=spherical and rowc,
        spherical_isometry=bool(np.all(np.abs(sph - 1) <= tol)),
        worst_spherical=(idx_w[ps], float(sph[ps] - 1)),
        worst_row=(idx_h[pr], float(row[pr] - 1)),
        spherical_sums=sph,
        row_sums=row,
    )


def moments(table):
    """beta_I = ||T^I e_0|| on H_{N+1}, with the path-independence residual."""
    _, pred = mi.neighbors(table.d, table.N + 1)
    wabs = np.abs(table.weights)
    beta, residual = K.path_moments(wabs, pred)
    return Moments(table.d, table.N, beta, float(residual), bool(np.any(wabs == 0)))


# ------------------------------------------------------------- families


def constant(m, N):
    m = tuple(float(x) for x in m)
    d = len(m)
    if any(not x > 0 for x in m):
        raise ValidationError(f"constant weights must be positive, got {m}")
    w = np.tile(np.asarray(m, dtype=np.complex128), (mi.count_upto(d, N), 1))
    return WeightTable(d, N, w, m)


def drury_arveson(d, N):
    def fn(idx, j):
        return sqrt((idx[j - 1] + 1) / (sum(idx) + 1))

    return WeightTable.from_function(d, N, fn)


def column_example(alpha=0.8, eps=0.6, N=4):
    if not (alpha > 0 and eps > 0):
        raise ValidationError("alpha and eps must be positive")
    if not isclose(alpha**2 + eps**2, 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValidationError(f"need alpha^2 + eps^2 = 1, got {alpha**2 + eps**2!r}")
    if not eps < 1 / sqrt(2):
        raise ValidationError(f"need eps < 1/sqrt(2), got {eps!r}")

    def fn(idx, j):
        if idx == (0, 0):
            return 1 / sqrt(2)
        other = idx[2 - j]  # the coordinate not moved by T_j
        mine = idx[j - 1]
        if mine == 0 and other > 0:
            return alpha
        return eps

    return WeightTable.from_function(2, N, fn)


def row_example(N=4):
    def fn(idx, j):
        if idx == (0, 0):
            return 0.75 if j == 1 else 1.0
        return 0.6 if j == 1 else 0.8

    return WeightTable.from_function(2, N, fn)


# Doubly contractive pair whose spherical sums are not level-constant, indexed by (i1, i2).
_DOUBLY = {
    1: {
        (0, 0): 0.3, (1, 0): 0.6, (2, 0): 0.8, (3, 0): 0.6,
        (0, 1): 0.4, (1, 1): 0.3, (2, 1): 0.6,
        (0, 2): 0.3, (1, 2): 0.4,
        (0, 3): 0.6,
    },
    2: {
        (0, 0): 0.6, (1, 0): 0.8, (2, 0): 0.4, (3, 0): 0.3,
        (0, 1): 0.8, (1, 1): 0.6, (2, 1): 0.8,
        (0, 2): 0.4, (1, 2): 0.8,
        (0, 3): 0.3,
    },
}


def doubly_example(N=3):
    """Doubly contractive pair bounded by m = (0.8, 0.8); fully labelled up to |I| = 3."""
    if N > 3:
        raise ValidationError("the example's weights are only fully given for |I| <= 3")
    return WeightTable.from_function(2, N, lambda idx, j: _DOUBLY[j][idx], bounds=(0.8, 0.8))


FAMILIES = {
    "constant": constant,
    "drury_arveson": drury_arveson,
    "column_example": column_example,
    "row_example": row_example,
    "doubly_example": doubly_example,
}


def family(name, **params):
    try:
        fn = FAMILIES[name]
    except KeyError:
        raise ValidationError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    try:
        table = fn(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {name}: {exc}") from None
    return table
