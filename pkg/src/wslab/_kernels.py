"""Inner loops over the graded basis, in numba and plain numpy.

Every kernel exists twice with identical signatures.  ``NUMPY`` and
``NUMBA`` hold the two implementations; the module-level names are bound
to numba unless ``WSLAB_NO_JIT`` is set or numba cannot be imported.

Arrays follow the layout of :func:`wslab.multiindex.neighbors`:
``w`` has one row per index of degree <= N (complex, shape (n_w, d)),
``succ`` / ``pred`` are position tables on H_{N+1}.
"""

import numpy as np

from .config import jit_disabled

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


# ---------------------------------------------------------------- numpy


def commutation_residuals_np(w, succ, n_inner):
    """|w_{I,j} w_{I+e_j,k} - w_{I,k} w_{I+e_k,j}| for the first n_inner rows.

    Entry [p, j, k] is filled for j < k, zero elsewhere.
    """
    d = w.shape[1]
    out = np.zeros((n_inner, d, d))
    rows = np.arange(n_inner)
    for j in range(d):
        for k in range(j + 1, d):
            lhs = w[rows, j] * w[succ[rows, j], k]
            rhs = w[rows, k] * w[succ[rows, k], j]
            out[:, j, k] = np.abs(lhs - rhs)
    return out


def row_sums_np(w, pred):
    """sum_j |w_{I-e_j, j}|^2 for every row of ``pred``."""
    d = w.shape[1]
    out = np.zeros(pred.shape[0])
    for j in range(d):
        p = pred[:, j]
        mask = p >= 0
        out[mask] += np.abs(w[p[mask], j]) ** 2
    return out


def path_moments_np(wabs, pred):
    """Moments along the first available predecessor, plus the worst
    disagreement between that path and every other incoming edge."""
    dim, d = pred.shape
    beta = np.zeros(dim)
    beta[0] = 1.0
    residual = 0.0
    # positions are graded, so one forward sweep sees predecessors first
    for s in range(1, dim):
        js = np.nonzero(pred[s] >= 0)[0]
        p = pred[s, js]
        cand = beta[p] * wabs[p, js]
        beta[s] = cand[0]
        residual = max(residual, float(np.max(np.abs(cand - cand[0]))))
    return beta, residual


def monomial_action_np(w, succ, path):
    """Action of T^I on every basis vector, I given as a direction path.

    Returns ``(vals, dst)``: T^I e_s = vals[s] e_{dst[s]}, ``dst = -1``
    where the image is zero.
    """
    n_w = w.shape[0]
    dim = succ.shape[0]
    cur = np.arange(dim)
    vals = np.ones(dim, dtype=np.complex128)
    alive = np.ones(dim, dtype=bool)
    for j in path:
        alive &= cur < n_w
        c = np.where(alive, cur, 0)
        vals = np.where(alive, vals * w[c, j], 0.0)
        cur = np.where(alive, succ[c, j], -1)
    dst = np.where(alive, cur, -1)
    vals = np.where(alive, vals, 0.0)
    return vals, dst


def poly_value_grad_np(z, exps, coefs):
    """Values p(z) and holomorphic gradients dp/dz_k for a batch of points."""
    m, d = z.shape
    deg = int(exps.max()) if exps.size else 0
    powers = np.ones((deg + 1, m, d), dtype=np.complex128)
    for e in range(1, deg + 1):
        powers[e] = powers[e - 1] * z
    cols = np.arange(d)
    # mono[t, m] = prod_k z_k^{exps[t, k]}
    per_var = powers[exps, :, cols]  # (t, d, m)
    mono = np.prod(per_var, axis=1)
    vals = coefs @ mono
    grad = np.zeros((m, d), dtype=np.complex128)
    for k in range(d):
        ek = exps[:, k]
        has = ek > 0
        if not np.any(has):
            continue
        lowered = per_var[has].copy()
        lowered[:, k, :] = powers[ek[has] - 1, :, k]
        grad[:, k] = (coefs[has] * ek[has]) @ np.prod(lowered, axis=1)
    return vals, grad


NUMPY = {
    "commutation_residuals": commutation_residuals_np,
    "row_sums": row_sums_np,
    "path_moments": path_moments_np,
    "monomial_action": monomial_action_np,
    "poly_value_grad": poly_value_grad_np,
}


# ---------------------------------------------------------------- numba

NUMBA = {}

if numba is not None:

    @numba.njit(cache=True)
    def commutation_residuals_nb(w, succ, n_inner):
        d = w.shape[1]
        out = np.zeros((n_inner, d, d))
        for p in range(n_inner):
            for j in range(d):
                for k in range(j + 1, d):
                    lhs = w[p, j] * w[succ[p, j], k]
                    rhs = w[p, k] * w[succ[p, k], j]
                    out[p, j, k] = abs(lhs - rhs)
        return out

    @numba.njit(cache=True)
    def row_sums_nb(w, pred):
        dim, d = pred.shape
        out = np.zeros(dim)
        for s in range(dim):
            acc = 0.0
            for j in range(d):
                p = pred[s, j]
                if p >= 0:
                    acc += w[p, j].real ** 2 + w[p, j].imag ** 2
            out[s] = acc
        return out

    @numba.njit(cache=True)
    def path_moments_nb(wabs, pred):
        dim, d = pred.shape
        beta = np.zeros(dim)
        beta[0] = 1.0
        residual = 0.0
        for s in range(1, dim):
            first = -1.0
            for j in range(d):
                p = pred[s, j]
                if p < 0:
                    continue
                cand = beta[p] * wabs[p, j]
                if first < 0.0:
                    first = cand
                    beta[s] = cand
                else:
                    diff = abs(cand - first)
                    if diff > residual:
                        residual = diff
        return beta, residual

    @numba.njit(cache=True)
    def monomial_action_nb(w, succ, path):
        n_w = w.shape[0]
        dim = succ.shape[0]
        vals = np.zeros(dim, dtype=np.complex128)
        dst = np.full(dim, -1, dtype=np.int64)
        for s in range(dim):
            cur = s
            v = 1.0 + 0.0j
            ok = True
            for step in range(path.shape[0]):
                if cur < 0 or cur >= n_w:
                    ok = False
                    break
                j = path[step]
                v *= w[cur, j]
                cur = succ[cur, j]
            if ok and cur >= 0:
                vals[s] = v
                dst[s] = cur
        return vals, dst

    @numba.njit(cache=True)
    def poly_value_grad_nb(z, exps, coefs):
        m, d = z.shape
        nt = exps.shape[0]
        deg = 0
        for t in range(nt):
            for k in range(d):
                if exps[t, k] > deg:
                    deg = exps[t, k]
        vals = np.zeros(m, dtype=np.complex128)
        grad = np.zeros((m, d), dtype=np.complex128)
        pw = np.empty((d, deg + 1), dtype=np.complex128)
        for i in range(m):
            for k in range(d):
                pw[k, 0] = 1.0
                for e in range(1, deg + 1):
                    pw[k, e] = pw[k, e - 1] * z[i, k]
            for t in range(nt):
                c = coefs[t]
                mono = 1.0 + 0.0j
                for k in range(d):
                    mono *= pw[k, exps[t, k]]
                vals[i] += c * mono
                for k in range(d):
                    e = exps[t, k]
                    if e == 0:
                        continue
                    g = c * e * pw[k, e - 1]
                    for q in range(d):
                        if q != k:
                            g *= pw[q, exps[t, q]]
                    grad[i, k] += g
        return vals, grad

    NUMBA = {
        "commutation_residuals": commutation_residuals_nb,
        "row_sums": row_sums_nb,
        "path_moments": path_moments_nb,
        "monomial_action": monomial_action_nb,
        "poly_value_grad": poly_value_grad_nb,
    }


USING_NUMBA = bool(NUMBA) and not jit_disabled()
_ACTIVE = NUMBA if USING_NUMBA else NUMPY

commutation_residuals = _ACTIVE["commutation_residuals"]
row_sums = _ACTIVE["row_sums"]
path_moments = _ACTIVE["path_moments"]
monomial_action = _ACTIVE["monomial_action"]
poly_value_grad = _ACTIVE["poly_value_grad"]
