"""Polynomial functional calculus for truncated shifts.

Norms of p(T) come from block power iteration; sup-norms of p over the
closed unit ball come from the Takagi factorization (homogeneous
quadratics), from multi-start ascent on the sphere, or from a dense
grid used as an oracle.  The ascent and the grid only ever see points
of the sphere, so both return lower bounds on the true sup.
"""

import warnings
from dataclasses import dataclass, field
from math import pi

import numpy as np
import scipy.linalg

from . import _kernels as K
from . import multiindex as mi
from .errors import ConvergenceError, ValidationError
from .shift import build_shift, classify

SYMMETRY_TOL = 1e-12


# ----------------------------------------------------------- polynomial


@dataclass(frozen=True, eq=False)
class Polynomial:
    d: int
    terms: dict

    def __post_init__(self):
        mi.check_limits(self.d)
        clean = {}
        for idx, c in self.terms.items():
            idx = mi.as_index(idx, self.d)
            c = complex(c)
            if not np.isfinite(c):
                raise ValidationError(f"coefficient of {list(idx)} is not finite")
            if c != 0:
                clean[idx] = clean.get(idx, 0) + c
        clean = {k: v for k, v in sorted(clean.items(), key=lambda kv: (sum(kv[0]), mi.rank(kv[0]))) if v != 0}
        object.__setattr__(self, "terms", clean)

    @classmethod
    def monomial(cls, idx, coef=1.0):
        return cls(len(idx), {tuple(idx): coef})

    @classmethod
    def from_quadratic_matrix(cls, A):
        """p(z) = sum_{i,j} a_ij z_i z_j."""
        A = np.asarray(A, dtype=np.complex128)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {A.shape}")
        d = A.shape[0]
        terms = {}
        for i in range(d):
            for j in range(d):
                idx = mi.add(mi.unit(d, i + 1), mi.unit(d, j + 1))
                terms[idx] = terms.get(idx, 0) + A[i, j]
        return cls(d, terms)

    @property
    def degree(self):
        return max((sum(i) for i in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def is_homogeneous(self, k=None):
        degs = {sum(i) for i in self.terms}
        if len(degs) != 1:
            return False
        return k is None or degs == {k}

    def quadratic_matrix(self):
        """Symmetric A with p(z) = z^T A z (p must be homogeneous of degree 2)."""
        if not self.is_homogeneous(2):
            raise ValidationError("quadratic_matrix needs a homogeneous polynomial of degree 2")
        A = np.zeros((self.d, self.d), dtype=np.complex128)
        for idx, c in self.terms.items():
            nz = [k for k, e in enumerate(idx) for _ in range(e)]
            i, j = nz
            if i == j:
                A[i, i] += c
            else:
                A[i, j] += c / 2
                A[j, i] += c / 2
        return A

    def arrays(self):
        """(exponents, coefficients) as int64 / complex128 arrays."""
        if not self.terms:
            return np.zeros((0, self.d), dtype=np.int64), np.zeros(0, dtype=np.complex128)
        exps = np.array(list(self.terms), dtype=np.int64)
        coefs = np.array(list(self.terms.values()), dtype=np.complex128)
        return exps, coefs

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        single = z.ndim == 1
        Z = np.atleast_2d(z)
        if Z.shape[1] != self.d:
            raise ValidationError(f"points must have {self.d} coordinates")
        exps, coefs = self.arrays()
        vals = np.prod(Z[:, None, :] ** exps[None, :, :], axis=2) @ coefs
        return complex(vals[0]) if single else vals

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        if other.d != self.d:
            raise ValidationError("dimension mismatch")
        out = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = mi.add(a, b)
                out[key] = out.get(key, 0) + ca * cb
        return Polynomial(self.d, out)

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        if other.d != self.d:
            raise ValidationError("dimension mismatch")
        out = dict(self.terms)
        for b, cb in other.terms.items():
            out[b] = out.get(b, 0) + cb
        return Polynomial(self.d, out)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.d == other.d and self.terms == other.terms

    __hash__ = None

    def to_json(self):
        return {
            "d": self.d,
            "terms": [{"I": mi.to_json(i), "re": c.real, "im": c.imag} for i, c in self.terms.items()],
        }

    @classmethod
    def from_json(cls, doc):
        from .schemas import validate_polynomial

        validate_polynomial(doc)
        d = doc["d"]
        terms = {}
        for n, t in enumerate(doc["terms"]):
            idx = tuple(t["I"])
            if len(idx) != d:
                raise ValidationError(f"terms[{n}].I has length {len(idx)}, expected d={d}")
            if idx in terms:
                raise ValidationError(f"terms[{n}] duplicates I={list(idx)}")
            terms[idx] = complex(t["re"], t.get("im", 0.0))
        return cls(d, terms)


def slice_coefficients(p, z):
    """Coefficients c_k = sum_{|I|=k} p_I z^I of t -> p(t z)."""
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != (p.d,):
        raise ValidationError(f"point must have {p.d} coordinates")
    out = [0j] * (p.degree + 1)
    for idx, c in p.terms.items():
        out[sum(idx)] += c * np.prod(z ** np.array(idx))
    return [complex(c) for c in out]


# ---------------------------------------------------------- evaluation


def _path(idx):
    return np.array([j for j, e in enumerate(idx) for _ in range(e)], dtype=np.int64)


def eval_poly(p, shift):
    """Dense matrix of p(T_1, ..., T_d) on H_{N+1}."""
    table = shift.table
    if p.d != table.d:
        raise ValidationError(f"polynomial has d={p.d} but the shift has d={table.d}")
    if table.N < p.degree:
        warnings.warn(
            f"N={table.N} is below deg p = {p.degree}; truncation may understate norms",
            RuntimeWarning,
            stacklevel=2,
        )
    succ, _ = mi.neighbors(table.d, table.N + 1)
    dim = shift.dim
    out = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim)
    for idx, c in p.terms.items():
        vals, dst = K.monomial_action(table.weights, succ, _path(idx))
        live = dst >= 0
        out[dst[live], cols[live]] += c * vals[live]
    return out


# ------------------------------------------------------------ op norm


@dataclass(frozen=True)
class NormEstimate:
    value: float
    vector: np.ndarray = field(repr=False)
    iterations: int


def op_norm(M, tol=1e-10, max_iter=5000, seed=0, block=8):
    """Largest singular value of ``M`` by block power iteration on M^* M.

    Rayleigh-Ritz on the block accelerates convergence when the top
    singular values cluster; stagnation triggers a reseeded restart that
    keeps the current best vector.  Stops once the residual of the top
    Ritz pair bounds the singular value error by ``tol``.
    """
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValidationError("op_norm expects a matrix")
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    n = M.shape[1]
    if n == 0 or M.shape[0] == 0 or not np.any(M):
        v = np.zeros(n, dtype=np.complex128)
        if n:
            v[0] = 1.0
        return NormEstimate(0.0, v, 0)
    rng = np.random.default_rng(seed)
    p = min(n, block)

    def fresh(k):
        return rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))

    V, _ = np.linalg.qr(fresh(p))
    best, best_v = -1.0, V[:, 0]
    last_gain_at = 0
    history_best = -1.0
    for it in range(1, max_iter + 1):
        W = M @ V
        X = M.conj().T @ W  # (M^* M) V
        H = V.conj().T @ X
        H = (H + H.conj().T) / 2
        theta, Y = np.linalg.eigh(H)
        theta, Y = theta[::-1], Y[:, ::-1]
        lam = max(theta[0], 0.0)
        v = V @ Y[:, 0]
        v /= np.linalg.norm(v)
        resid = np.linalg.norm(X @ Y[:, 0] - theta[0] * (V @ Y[:, 0]))
        sigma = np.sqrt(lam)
        if sigma > best:
            best, best_v = sigma, v
        if sigma == 0.0:
            # block happens to lie in the kernel
            V, _ = np.linalg.qr(fresh(p))
            continue
        if resid / (2 * sigma) <= tol * max(1.0, sigma):
            return NormEstimate(float(np.linalg.norm(M @ v)), v, it)
        if best > history_best * (1 + 1e-15):
            history_best = best
            last_gain_at = it
        elif it - last_gain_at >= 50:
            V = np.column_stack([best_v, fresh(p - 1)]) if p > 1 else best_v[:, None] + 0.1 * fresh(1)
            V, _ = np.linalg.qr(V)
            last_gain_at = it
            continue
        V, _ = np.linalg.qr(X @ Y)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (best {best!r})",
        best=NormEstimate(float(best), best_v, max_iter),
    )


# ------------------------------------------------------------- takagi


@dataclass(frozen=True)
class TakagiResult:
    U: np.ndarray = field(repr=False)
    sigma: np.ndarray

    def reconstruct(self):
        return self.U @ np.diag(self.sigma) @ self.U.T

    def to_json(self):
        return {
            "sigma": [float(s) for s in self.sigma],
            "sigma_1": float(self.sigma[0]) if self.sigma.size else 0.0,
            "U": [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in self.U],
        }


def symmetrize(A, tol=SYMMETRY_TOL):
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {A.shape}")
    asym = np.linalg.norm(A - A.T)
    if asym > tol * max(1.0, np.linalg.norm(A)):
        raise ValidationError(f"matrix is not symmetric: ||A - A^T|| = {asym:.3e}")
    return (A + A.T) / 2


def takagi(A, tol=SYMMETRY_TOL):
    """Takagi factorization A = U diag(sigma) U^T of a complex symmetric matrix.

    Uses the real symmetric 2d x 2d matrix [[Re A, Im A], [Im A, -Re A]],
    which represents z -> A conj(z).  Its eigenvalues are +/- sigma_i and
    an eigenvector (x, y) for +sigma gives the Takagi vector x + i y; real
    orthogonality there implies complex orthogonality here, including
    inside repeated singular values.  Directions with sigma ~ 0 are
    filled from the orthogonal complement.
    """
    A = symmetrize(A, tol)
    d = A.shape[0]
    Ar, Ai = A.real, A.imag
    B = np.block([[Ar, Ai], [Ai, -Ar]])
    lam, V = np.linalg.eigh(B)
    order = np.argsort(-lam, kind="stable")[:d]
    sigma = np.clip(lam[order], 0.0, None)
    vecs = V[:d, order] + 1j * V[d:, order]
    floor = 64 * np.finfo(float).eps * max(float(sigma[0]) if d else 0.0, np.finfo(float).tiny)
    keep = sigma > floor
    U = np.zeros((d, d), dtype=np.complex128)
    U[:, keep] = vecs[:, keep]
    n_keep = int(keep.sum())
    if n_keep < d:
        comp = scipy.linalg.null_space(vecs[:, keep].conj().T) if n_keep else np.eye(d, dtype=np.complex128)
        U[:, ~keep] = comp[:, : d - n_keep]
    return TakagiResult(U, sigma)


def takagi_from_json(doc):
    from .schemas import validate_matrix

    validate_matrix(doc)
    rows = doc["rows"]
    n = len(rows)
    A = np.zeros((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ValidationError(f"matrix.rows[{i}] has {len(row)} entries, expected {n}")
        for j, v in enumerate(row):
            A[i, j] = complex(v) if isinstance(v, (int, float)) else complex(v["re"], v.get("im", 0.0))
    return A


# ----------------------------------------------------------- sup norm


@dataclass(frozen=True)
class SupEstimate:
    value: float
    point: np.ndarray = field(repr=False)
    method: str


GRID_DEFAULTS = {1: (4096,), 2: (400, 64, 64), 3: (48, 48, 32, 32, 32)}


def _moduli_grid(d, n_theta):
    """Nonnegative unit vectors (|z_1|, ..., |z_d|) on a polar grid."""
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        th = np.linspace(0, pi / 2, n_theta[0])
        return np.column_stack([np.cos(th), np.sin(th)])
    t1 = np.linspace(0, pi / 2, n_theta[0])
    t2 = np.linspace(0, pi / 2, n_theta[1])
    a, b = np.meshgrid(t1, t2, indexing="ij")
    a, b = a.ravel(), b.ravel()
    return np.column_stack([np.cos(a), np.sin(a) * np.cos(b), np.sin(a) * np.sin(b)])


def grid_sup(p, shape=None, chunk=None):
    """Max of |p| over a tensor grid of the unit sphere (d <= 3).

    The sphere is parametrized by moduli on the positive orthant of the
    real sphere (polar angles, endpoints included) times independent
    phases e^{i phi_k} on a uniform grid of [0, 2 pi).  For a fixed
    moduli point the polynomial separates in the phases, so each slab is
    a small tensor contraction.  Only a lower bound on the sup.
    """
    d = p.d
    if d > 3:
        raise ValidationError("grid oracle supports d <= 3")
    shape = tuple(shape) if shape is not None else GRID_DEFAULTS[d]
    n_mod = shape[: d - 1] if d > 1 else ()
    n_phi = shape[d - 1 :] if d > 1 else shape
    if len(n_phi) != d:
        raise ValidationError(f"grid shape for d={d} needs {2 * d - 1} entries, got {shape}")
    R = _moduli_grid(d, n_mod)
    exps, coefs = p.arrays()
    D = int(exps.max()) if exps.size else 0
    phis = [np.arange(n) * (2 * pi / n) for n in n_phi]
    E = [np.exp(1j * np.outer(ph, np.arange(D + 1))) for ph in phis]  # (n_phi_k, D+1)
    # C[r, a_1..a_d] = sum_I c_I prod_k R[r,k]^{a_k} [I == a]
    rpow = np.prod(R[:, None, :] ** exps[None, :, :], axis=2) * coefs[None, :]
    C = np.zeros((R.shape[0],) + (D + 1,) * d, dtype=np.complex128)
    for t, idx in enumerate(exps):
        C[(slice(None),) + tuple(idx)] += rpow[:, t]
    n_pts = int(np.prod(n_phi))
    if chunk is None:
        chunk = max(1, 4_000_000 // max(n_pts, 1))
    best, best_at = -1.0, None
    letters = "abc"[:d]
    outs = "xyz"[:d]
    spec = "r" + letters + "," + ",".join(f"{o}{a}" for o, a in zip(outs, letters)) + "->r" + outs
    for start in range(0, R.shape[0], chunk):
        P = np.abs(np.einsum(spec, C[start : start + chunk], *E, optimize=True))
        flat = P.reshape(P.shape[0], -1)
        k = int(np.argmax(flat))
        r, q = divmod(k, flat.shape[1])
        if flat[r, q] > best:
            best = float(flat[r, q])
            best_at = (start + r, np.unravel_index(q, tuple(n_phi)))
    r, qs = best_at
    point = R[r] * np.exp(1j * np.array([phis[k][qs[k]] for k in range(d)]))
    return SupEstimate(best, point, "grid")


def _riemann_grad(p_exps, p_coefs, Z):
    vals, dp = K.poly_value_grad(Z, p_exps, p_coefs)
    f = np.abs(vals) ** 2
    G = 2 * vals[:, None] * np.conj(dp)
    radial = np.real(np.sum(np.conj(Z) * G, axis=1))
    g = G - radial[:, None] * Z
    return f, g


def _normalize_rows(Z):
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def ascend(p, Z0, max_iter=3000, gtol=1e-10, stall=30):
    """Projected gradient ascent of |p|^2 on the unit sphere from each row of Z0.

    Armijo backtracking per start; accepted steps double the step size.
    A start retires when its Riemannian gradient is below ``gtol`` (relative
    to |p|^2) or after ``stall`` consecutive iterations without a gain
    visible in double precision.  Returns final points and |p| values.
    """
    exps, coefs = p.arrays()
    Z = _normalize_rows(np.array(Z0, dtype=np.complex128))
    f, g = _riemann_grad(exps, coefs, Z)
    scale = max(float(np.sum(np.abs(coefs))), 1e-300)
    eta = np.full(Z.shape[0], 0.1 / (scale**2 * max(p.degree, 1) ** 2))
    stalled = np.zeros(Z.shape[0], dtype=np.int64)
    for _ in range(max_iter):
        gn2 = np.sum(np.abs(g) ** 2, axis=1)
        active = (np.sqrt(gn2) > gtol * np.maximum(f, 1e-300)) & (eta > 1e-300) & (stalled < stall)
        if not active.any():
            break
        a = np.nonzero(active)[0]
        Zc = _normalize_rows(Z[a] + eta[a, None] * g[a])
        fc, gc = _riemann_grad(exps, coefs, Zc)
        ok = fc >= f[a] + 1e-4 * eta[a] * gn2[a]
        tiny = fc - f[a] <= 4 * np.finfo(float).eps * f[a]
        stalled[a] = np.where(tiny, stalled[a] + 1, 0)
        acc, rej = a[ok], a[~ok]
        Z[acc], f[acc], g[acc] = Zc[ok], fc[ok], gc[ok]
        eta[acc] *= 2.0
        eta[rej] *= 0.5
    return Z, np.sqrt(f)


def optimize_sup(p, starts=64, seed=0, max_iter=3000, gtol=1e-10):
    rng = np.random.default_rng(seed)
    Z0 = rng.standard_normal((starts, p.d)) + 1j * rng.standard_normal((starts, p.d))
    Z, vals = ascend(p, Z0, max_iter=max_iter, gtol=gtol)
    k = int(np.argmax(vals))  # first index wins ties
    return SupEstimate(float(vals[k]), Z[k], "optimize")


def takagi_sup(p):
    res = takagi(p.quadratic_matrix())
    point = np.conj(res.U[:, 0])
    return SupEstimate(float(res.sigma[0]), point, "takagi")


def sup_norm(p, method="auto", seed=0, starts=64, grid_shape=None, max_iter=3000):
    """sup |p| over the closed unit ball.

    ``takagi`` is exact for homogeneous quadratics; ``optimize`` and
    ``grid`` search the sphere (enough by the maximum principle) and
    return lower bounds.  ``auto`` picks takagi when it applies.
    """
    if p.is_zero():
        raise ValidationError("sup_norm needs a nonzero polynomial")
    if method == "auto":
        method = "takagi" if p.is_homogeneous(2) else "optimize"
    if method == "takagi":
        if not p.is_homogeneous(2):
            raise ValidationError("takagi sup-norm needs a homogeneous polynomial of degree 2")
        return takagi_sup(p)
    if method == "optimize":
        return optimize_sup(p, starts=starts, seed=seed, max_iter=max_iter)
    if method == "grid":
        return grid_sup(p, grid_shape)
    raise ValidationError(f"unknown sup method {method!r}")


# ------------------------------------------------------------ reports


def _cjson(v):
    return [{"re": float(z.real), "im": float(z.imag)} for z in np.asarray(v, dtype=np.complex128)]


@dataclass(frozen=True)
class VnGapReport:
    op_norm: float
    sup_norm: float
    gap: float
    witness_vector: np.ndarray = field(repr=False)
    witness_point: np.ndarray = field(repr=False)
    sup_method: str
    N: int

    def to_json(self):
        return {
            "op_norm": self.op_norm,
            "sup_norm": self.sup_norm,
            "gap": self.gap,
            "witness_vector": _cjson(self.witness_vector),
            "witness_point": _cjson(self.witness_point),
            "sup_method": self.sup_method,
            "N": self.N,
        }


def default_levels(p, table):
    return min(p.degree + 4, table.N)


def vn_gap(p, table, N=None, sup="auto", seed=0, norm_tol=1e-10, starts=64, grid_shape=None):
    """Compare ||p(T)|| on H_{N+1} with sup |p| over the ball.

    A gap above tolerance certifies a violation of von Neumann's
    inequality: truncation only compresses p(T), so the norm can only
    grow with N.
    """
    if p.d != table.d:
        raise ValidationError(f"polynomial has d={p.d} but the table has d={table.d}")
    if N is None:
        N = default_levels(p, table)
    elif N > table.N:
        raise ValidationError(f"table defines weights only up to N={table.N}, requested N={N}")
    shift = build_shift(table.truncate(N))
    M = eval_poly(p, shift)
    norm = op_norm(M, tol=norm_tol, seed=seed)
    s = sup_norm(p, method=sup, seed=seed, starts=starts, grid_shape=grid_shape)
    return VnGapReport(
        op_norm=norm.value,
        sup_norm=s.value,
        gap=norm.value - s.value,
        witness_vector=norm.vector,
        witness_point=s.point,
        sup_method=s.method,
        N=N,
    )


@dataclass(frozen=True)
class QuadCheck:
    lhs: float
    rhs: float
    holds: bool


def quad_vn_check(A, table, N=None, tol=1e-8, contractivity_tol=None):
    """||p_A(T)|| <= ||A||_2 for a doubly contractive table and p_A(z) = z^T A z."""
    report = classify(table, contractivity_tol)
    if not report.doubly_contractive:
        which = "row" if not report.row_contractive else "spherical"
        raise ValidationError(f"table is not doubly contractive ({which} condition fails)")
    res = takagi(A)
    if res.U.shape[0] != table.d:
        raise ValidationError(f"matrix is {res.U.shape[0]}x{res.U.shape[0]} but the table has d={table.d}")
    N = table.N if N is None else N
    if N < 2:
        raise ValidationError(f"need N >= 2, got {N}")
    p = Polynomial.from_quadratic_matrix(symmetrize(A))
    M = eval_poly(p, build_shift(table.truncate(N)))
    lhs = op_norm(M).value
    rhs = float(res.sigma[0])
    return QuadCheck(lhs, rhs, lhs <= rhs + tol)


def random_polynomial(rng, d, max_degree, homogeneous=None, density=1.0):
    """Random complex polynomial with coefficients scaled to l1-norm 1."""
    idxs = []
    degs = [homogeneous] if homogeneous is not None else range(max_degree + 1)
    for k in degs:
        idxs.extend(mi.level(d, k))
    while True:
        keep = [i for i in idxs if rng.random() < density] or [idxs[rng.integers(len(idxs))]]
        c = rng.standard_normal(len(keep)) + 1j * rng.standard_normal(len(keep))
        if np.any(c):
            break
    c = c / np.sum(np.abs(c))
    return Polynomial(d, dict(zip(keep, c)))
