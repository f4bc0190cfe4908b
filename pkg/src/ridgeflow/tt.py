"""Functional tensor trains on product grids.

A tensor is stored as d cores of raw node samples, core i of shape
(r_{i-1}, n_i, r_i) with r_0 = r_d = 1.  All factorizations act on
weight-scaled unfoldings (rows multiplied by sqrt of the quadrature
weights), so orthonormality and singular values are those of the
discrete weighted L2 inner product.

``truncate`` implements the modified truncation sweep: a left-to-right
QR orthogonalization followed by a right-to-left LQ+SVD compression
that collects the per-bond singular values, their sum, and (optionally)
the traceless matrix driving the rank-reducing coordinate descent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .grid import ProductGrid

__all__ = [
    "FttTensor",
    "TruncationResult",
    "ftt_from_full",
    "contract_full",
    "linear_combine",
    "hadamard",
    "inner_product",
    "norm",
    "left_orthogonalize",
    "truncate",
    "singular_values",
    "rank_counts_above",
    "spatial_gradient",
    "linear_form_tensor",
    "advect_linear_rhs",
    "boundary_ratio",
]

_FULL_SIZE_LIMIT = 2**27


class FttTensor:
    """Grid-sampled tensor train.

    Parameters
    ----------
    grid : ProductGrid
        Product grid the cores are sampled on.
    cores : list of ndarray
        Core i has shape (r_{i-1}, n_i, r_i); r_0 = r_d = 1.
    """

    def __init__(self, grid, cores, validate=True):
        self.grid = grid
        self.cores = [np.asarray(c, dtype=float) for c in cores]
        if validate:
            self._validate()

    def _validate(self):
        d = self.grid.d
        if len(self.cores) != d:
            raise ValueError(
                f"core-count-mismatch: grid has d={d}, got {len(self.cores)} cores"
            )
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[2] != 1:
            raise ValueError("rank-mismatch: boundary ranks must be 1")
        for i, c in enumerate(self.cores):
            if c.ndim != 3:
                raise ValueError(f"core {i} must be 3-dimensional, got shape {c.shape}")
            if c.shape[1] != self.grid.axes[i].n:
                raise ValueError(
                    f"grid-mismatch: core {i} has {c.shape[1]} nodes, "
                    f"axis has {self.grid.axes[i].n}"
                )
            if i > 0 and c.shape[0] != self.cores[i - 1].shape[2]:
                raise ValueError(f"rank-mismatch between cores {i - 1} and {i}")
            if not np.all(np.isfinite(c)):
                raise NumericalError(f"nonfinite-input: core {i} has non-finite entries")

    @property
    def d(self):
        return len(self.cores)

    @property
    def ranks(self):
        return tuple([1] + [c.shape[2] for c in self.cores])

    @property
    def rank_l1(self):
        return int(sum(self.ranks))

    @property
    def max_interior_rank(self):
        return int(max(self.ranks[1:-1]))

    def copy(self):
        return FttTensor(self.grid, [c.copy() for c in self.cores], validate=False)

    def norm(self):
        return norm(self)

    def scale(self, c):
        """Return c * self (coefficient folded into the first core)."""
        cores = [core.copy() for core in self.cores]
        cores[0] = cores[0] * float(c)
        return FttTensor(self.grid, cores, validate=False)

    def shift_nodes(self, offsets):
        """Circularly shift every axis by an integer number of nodes."""
        cores = []
        for c, k in zip(self.cores, offsets):
            cores.append(np.roll(c, -int(k), axis=1))
        return FttTensor(self.grid, cores, validate=False)

    @classmethod
    def from_univariate(cls, grid, factors):
        """Rank-one tensor from d vectors of node samples."""
        cores = [np.asarray(f, dtype=float).reshape(1, -1, 1) for f in factors]
        return cls(grid, cores)

    @classmethod
    def zeros(cls, grid):
        cores = [np.zeros((1, g.n, 1)) for g in grid.axes]
        return cls(grid, cores, validate=False)

    @classmethod
    def random(cls, grid, interior_ranks, rng):
        """Random tensor with prescribed interior ranks (gaussian cores)."""
        d = grid.d
        ranks = [1] + list(interior_ranks) + [1]
        if len(ranks) != d + 1:
            raise ValueError("interior_ranks must have length d-1")
        cores = [
            rng.standard_normal((ranks[i], grid.axes[i].n, ranks[i + 1]))
            for i in range(d)
        ]
        return cls(grid, cores, validate=False)

    def __repr__(self):
        return f"FttTensor(d={self.d}, ranks={self.ranks})"


@dataclass
class TruncationResult:
    """Output of the modified truncation sweep.

    ``bond_sigmas[i]`` holds the singular values of bond i+1 (between
    cores i and i+1), sorted descending.  ``cost`` is their total sum.
    ``gradient_factor`` is the traceless d x d matrix D evaluated at the
    identity map, present only when requested.
    """

    tensor: FttTensor
    bond_sigmas: list
    cost: float
    gradient_factor: np.ndarray | None = None

    def counts_above(self, threshold):
        """Per-bond number of singular values larger than ``threshold``."""
        return [int(np.sum(s > threshold)) for s in self.bond_sigmas]

    def count_above_l1(self, threshold):
        """1-norm style rank: boundary ones plus per-bond counts."""
        return 2 + int(sum(self.counts_above(threshold)))


def _check_same_grid(*tensors):
    g0 = tensors[0].grid
    for t in tensors[1:]:
        if t.grid != g0:
            raise ValueError("grid-mismatch: tensors live on different grids")


def contract_full(v):
    """Contract to a dense array; guarded to 2**27 entries."""
    if v.grid.size > _FULL_SIZE_LIMIT:
        raise ValueError(
            f"too-large: full grid has {v.grid.size} entries (limit {_FULL_SIZE_LIMIT})"
        )
    out = v.cores[0][0]  # (n0, r1)
    for c in v.cores[1:]:
        out = np.tensordot(out, c, axes=(-1, 0))
    return np.ascontiguousarray(out[..., 0])


def _scaled(core, axis_grid):
    return core * axis_grid.sqrt_weights[None, :, None]


def _unscaled(core, axis_grid):
    return core / axis_grid.sqrt_weights[None, :, None]


def _qr_pos(mat):
    """Economy QR with positive diagonal of R (deterministic gauge)."""
    q, r = scipy.linalg.qr(mat, mode="economic", check_finite=False)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs[None, :]
    r = r * signs[:, None]
    return q, r


# Gram-based factorizations square the condition number, so they are only
# safe when the truncation tolerance sits well above sqrt(machine eps).
_GRAM_MIN_DELTA = 3e-7


def _tri_inv(r):
    """Inverse of a small upper-triangular matrix."""
    return scipy.linalg.solve_triangular(
        r, np.eye(r.shape[0]), lower=False, check_finite=False
    )


def _orth_columns(mat, fast):
    """Column orthonormalization, gauge-matched to ``_qr_pos``.

    The fast path is CholeskyQR2 (two GEMM-dominated passes restore
    orthogonality to machine precision); it falls back to Householder QR
    whenever the Gram matrix is not numerically positive definite.
    """
    m, q = mat.shape
    if not fast or m <= 2 * q:
        return _qr_pos(mat)
    try:
        g = mat.T @ mat
        r1 = scipy.linalg.cholesky(g, lower=False, check_finite=False)
        q1 = mat @ _tri_inv(r1)
        g2 = q1.T @ q1
        r2 = scipy.linalg.cholesky(g2, lower=False, check_finite=False)
        qmat = q1 @ _tri_inv(r2)
        r = r2 @ r1
    except scipy.linalg.LinAlgError:
        return _qr_pos(mat)
    if not (np.all(np.isfinite(qmat)) and np.all(np.isfinite(r))):
        return _qr_pos(mat)
    return qmat, r


def _compress_bond(mat, threshold, fast):
    """Truncated SVD of a bond unfolding mat (q, p), q <= p typically.

    Returns (u_k, s_all, vt_k) with the cut chosen by the tail rule.  The
    fast path diagonalizes the small Gram matrix mat mat^T and builds the
    row basis only for the kept singular values; it is valid when the
    kept values stay well above sqrt(machine eps) times the largest.
    """
    if not fast:
        u, s, vt = scipy.linalg.svd(mat, full_matrices=False, check_finite=False)
        u, vt = _svd_sign_fix(u, vt)
        k = _rank_cut(s, threshold)
        return u[:, :k], s, vt[:k]
    g = mat @ mat.T
    lam, w = scipy.linalg.eigh(g, check_finite=False)
    order = np.argsort(lam)[::-1]
    lam = np.maximum(lam[order], 0.0)
    w = w[:, order]
    s = np.sqrt(lam)
    w, _ = _svd_sign_fix(w, w.T)
    k = _rank_cut(s, threshold)
    u = w[:, :k]
    sk = np.maximum(s[:k], 1e-300)
    vt = (u.T @ mat) / sk[:, None]
    return u, s, vt


def _svd_sign_fix(u, vt):
    """Make the largest-magnitude entry of each left singular vector positive."""
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs[None, :], vt * signs[:, None]


def _rank_cut(s, threshold):
    """Smallest k >= 1 with 2-norm of discarded tail strictly below threshold."""
    if s.size == 0:
        return 1
    tails = np.sqrt(np.maximum(np.cumsum(s[::-1] ** 2)[::-1], 0.0))
    # tails[k] = ||s[k:]||; keep the smallest k with tails[k] < threshold
    ok = np.nonzero(tails < threshold)[0]
    k = int(ok[0]) if ok.size else s.size
    return max(k, 1)


def ftt_from_full(values, grid, delta):
    """Decompose a dense array by recursive weighted SVDs.

    The result reproduces ``values`` within ``delta`` relative error in
    the discrete weighted L2 norm.
    """
    values = np.asarray(values, dtype=float)
    d = grid.d
    if d > 4:
        raise ValueError(f"dimension-too-large: full decomposition limited to d<=4, got {d}")
    if values.shape != grid.shape:
        raise ValueError(f"grid-mismatch: values shape {values.shape} != grid {grid.shape}")
    if not np.all(np.isfinite(values)):
        raise NumericalError("nonfinite-input: values contain non-finite entries")
    if delta <= 0:
        raise ValueError("invalid-tolerance: delta must be positive")

    work = values.copy()
    for ax in range(d):
        shape = [1] * d
        shape[ax] = grid.axes[ax].n
        work *= grid.axes[ax].sqrt_weights.reshape(shape)

    nrm = np.linalg.norm(work)
    if nrm == 0.0:
        return FttTensor.zeros(grid)
    threshold = delta * nrm / np.sqrt(d - 1)

    cores = []
    rank = 1
    mat = work.reshape(rank * grid.axes[0].n, -1)
    for ax in range(d - 1):
        u, s, vt = scipy.linalg.svd(mat, full_matrices=False, check_finite=False)
        u, vt = _svd_sign_fix(u, vt)
        k = _rank_cut(s, threshold)
        cores.append(u[:, :k].reshape(rank, grid.axes[ax].n, k))
        mat = (s[:k, None] * vt[:k]).reshape(k * grid.axes[ax + 1].n, -1)
        rank = k
    cores.append(mat.reshape(rank, grid.axes[d - 1].n, 1))

    cores = [_unscaled(c, g) for c, g in zip(cores, grid.axes)]
    return FttTensor(grid, cores, validate=False)


def linear_combine(terms):
    """Exact linear combination of tensors on one grid.

    ``terms`` is a list of (coefficient, FttTensor).  Interior ranks add
    (block concatenation); coefficients are folded into the first core.
    """
    if not terms:
        raise ValueError("empty-combination: need at least one term")
    tensors = [t for _, t in terms]
    _check_same_grid(*tensors)
    if len(terms) == 1:
        c, t = terms[0]
        return t.scale(c)

    grid = tensors[0].grid
    d = grid.d
    firsts = [t.cores[0] * float(c) for c, t in terms]
    cores = [np.concatenate(firsts, axis=2)]
    for i in range(1, d - 1):
        blocks = [t.cores[i] for t in tensors]
        rl = sum(b.shape[0] for b in blocks)
        rr = sum(b.shape[2] for b in blocks)
        n = blocks[0].shape[1]
        core = np.zeros((rl, n, rr))
        ro = co = 0
        for b in blocks:
            core[ro : ro + b.shape[0], :, co : co + b.shape[2]] = b
            ro += b.shape[0]
            co += b.shape[2]
        cores.append(core)
    cores.append(np.concatenate([t.cores[d - 1] for t in tensors], axis=0))
    return FttTensor(grid, cores, validate=False)


def hadamard(u, v):
    """Pointwise product; interior ranks multiply."""
    _check_same_grid(u, v)
    cores = []
    for a, b in zip(u.cores, v.cores):
        ra, n, rb = a.shape
        rc, _, rd = b.shape
        core = np.einsum("aib,cid->acibd", a, b).reshape(ra * rc, n, rb * rd)
        cores.append(core)
    return FttTensor(u.grid, cores, validate=False)


def inner_product(u, v):
    """Discrete weighted L2 pairing by core-by-core contraction."""
    _check_same_grid(u, v)
    env = np.ones((1, 1))
    for a, b, g in zip(u.cores, v.cores, u.grid.axes):
        aw = a * g.weights[None, :, None]
        env = np.einsum("ab,aic,bid->cd", env, aw, b, optimize=True)
    return float(env[0, 0])


def norm(u):
    return float(np.sqrt(max(inner_product(u, u), 0.0)))


def left_orthogonalize(v):
    """Left-to-right QR sweep; the represented function is unchanged."""
    cores = [c.copy() for c in v.cores]
    d = len(cores)
    for m in range(d - 1):
        g = v.grid.axes[m]
        rl, n, rr = cores[m].shape
        q, r = _qr_pos(_scaled(cores[m], g).reshape(rl * n, rr))
        k = q.shape[1]
        cores[m] = _unscaled(q.reshape(rl, n, k), g)
        cores[m + 1] = np.tensordot(r, cores[m + 1], axes=(1, 0))
    return FttTensor(v.grid, cores, validate=False)


def spatial_gradient(v):
    """All d partial derivatives; each touches a single core."""
    out = []
    for k in range(v.d):
        cores = [c.copy() if i != k else v.grid.axes[k].diff_apply(c, order=1, axis=1)
                 for i, c in enumerate(v.cores)]
        out.append(FttTensor(v.grid, cores, validate=False))
    return out


def _core_derivative(core, axis_grid):
    return axis_grid.diff_apply(core, order=1, axis=1)


def _transfer(env, bcore, acore):
    """env (rb, ra) -> env' (rb', ra'), contracted through one site."""
    rb, n, rbr = bcore.shape
    ra, _, rar = acore.shape
    tmp = env.T @ bcore.reshape(rb, n * rbr)  # (ra, n*rb')
    tmp = tmp.reshape(ra * n, rbr)
    return tmp.T @ acore.reshape(ra * n, rar)  # (rb', ra')


def _gradient_bond_contribution(dhat, bcores, acores, grid, bond_site, sigma, scale):
    """Accumulate one bond's terms of the descent generator.

    ``bcores``: cores of the unit-spectrum function (shared orthonormal
    cores, U at the bond site); ``acores``: the same with sigma absorbed
    at ``bond_site``.  Contractions are Euclidean; ``scale`` carries the
    quadrature measure.  The plain transfer chain is the identity left of
    ``bond_site`` and right of it, diag(sigma) at it; only the remaining
    pieces are contracted explicitly.
    """
    d = len(acores)

    # prefix[s] = plain chain through sites 0..s (None means identity)
    prefix = [None] * d
    env = None
    for s in range(bond_site, d):
        if s == bond_site:
            env = np.diag(sigma)
        else:
            env = _transfer(env, bcores[s], acores[s])
        prefix[s] = env

    # suffix[s] = plain chain through sites s..d-1 (None means identity);
    # sites right of the bond share right-orthonormal cores, so only
    # sites 0..bond_site need explicit contraction.
    suffix = [None] * (d + 1)
    for s in range(bond_site, -1, -1):
        bc = bcores[s]
        ac = acores[s]
        right = suffix[s + 1]
        rb, n, rbr = bc.shape
        ra = ac.shape[0]
        if right is None:
            env = bc.reshape(rb, n * rbr) @ ac.reshape(ra, n * rbr).T
        else:
            tmp = ac.reshape(ra * n, ac.shape[2]) @ right.T  # (ra*n, rb_s)
            env = bc.reshape(rb, n * rbr) @ tmp.reshape(ra, n * rbr).T
        suffix[s] = env  # shape (rb_{s-1}, ra_{s-1})

    deriv_cache = {}
    x_nodes = [g.nodes for g in grid.axes]

    def modified(s, want_deriv, want_x):
        core = acores[s]
        if want_deriv:
            if s not in deriv_cache:
                deriv_cache[s] = _core_derivative(core, grid.axes[s])
            core = deriv_cache[s]
        if want_x:
            core = core * x_nodes[s][None, :, None]
        return core

    for p in range(d):
        for q in range(d):
            a, e = (p, q) if p <= q else (q, p)
            env = prefix[a - 1] if a > 0 else None
            if env is None:
                env = np.eye(acores[a].shape[0])
            for s in range(a, e + 1):
                ac = modified(s, want_deriv=(s == p), want_x=(s == q))
                env = _transfer(env, bcores[s], ac)
            tail = suffix[e + 1] if e + 1 < d else None
            if tail is None:
                val = np.trace(env)
            else:
                val = float(np.sum(env * tail))
            dhat[p, q] += scale * val


def truncate(v, delta, want_gradient=False):
    """Modified truncation sweep.

    Returns a tensor within ``delta`` relative weighted-L2 error of the
    input, every bond's singular values, their sum, and optionally the
    traceless descent generator computed from the orthogonalized sweeps.
    """
    if delta <= 0:
        raise ValueError("invalid-tolerance: delta must be positive")
    grid = v.grid
    d = v.d
    fast = delta >= _GRAM_MIN_DELTA
    cores = [c.copy() for c in v.cores]
    # uniform weights make every weighted unfolding a scalar multiple of
    # the raw one: sweep in plain Euclidean arithmetic and carry the
    # measure factor on the singular values only
    measure = float(np.prod([g.sqrt_weights[0] for g in grid.axes]))

    # left-to-right orthogonalization
    for m in range(d - 1):
        rl, n, rr = cores[m].shape
        q, r = _orth_columns(cores[m].reshape(rl * n, rr), fast)
        k = q.shape[1]
        cores[m] = q.reshape(rl, n, k)
        nxt = cores[m + 1]
        cores[m + 1] = (r @ nxt.reshape(rr, -1)).reshape(k, nxt.shape[1], nxt.shape[2])

    nrm = float(np.linalg.norm(cores[d - 1]))
    if not np.isfinite(nrm):
        raise NumericalError("nonfinite-input: tensor norm is not finite")
    if nrm == 0.0:
        if want_gradient:
            raise NumericalError("zero-tensor-gradient: gradient of the zero tensor")
        zero = FttTensor.zeros(grid)
        return TruncationResult(zero, [np.zeros(1) for _ in range(d - 1)], 0.0)

    threshold = delta * nrm / np.sqrt(d - 1)
    bond_sigmas = [None] * (d - 1)
    dhat = np.zeros((grid.d, grid.d)) if want_gradient else None

    for m in range(d - 1, 0, -1):
        rl, n, rr = cores[m].shape
        mat = cores[m].reshape(rl, n * rr)
        u, s, vt = _compress_bond(mat, threshold, fast)
        k = u.shape[1]
        s = s[:k]
        new_core = vt.reshape(k, n, rr)
        bond_sigmas[m - 1] = measure * s

        if want_gradient:
            left = cores[m - 1]
            a0, n0, _ = left.shape
            b_site = (left.reshape(a0 * n0, rl) @ u).reshape(a0, n0, k)
            a_site = b_site * s[None, None, :]
            bcores = cores[:m - 1] + [b_site, new_core] + cores[m + 1:]
            acores = cores[:m - 1] + [a_site, new_core] + cores[m + 1:]
            _gradient_bond_contribution(
                dhat, bcores, acores, grid, m - 1, s, measure
            )
            cores[m - 1] = a_site
        else:
            left = cores[m - 1]
            a0, n0, _ = left.shape
            cores[m - 1] = (left.reshape(a0 * n0, rl) @ (u * s[None, :])).reshape(
                a0, n0, k
            )
        cores[m] = new_core

    cost = float(sum(sv.sum() for sv in bond_sigmas))
    gradient = None
    if want_gradient:
        gradient = dhat - (np.trace(dhat) / d) * np.eye(d)
    out = FttTensor(grid, cores, validate=False)
    return TruncationResult(out, bond_sigmas, cost, gradient)


def singular_values(v, bond):
    """Singular values of one bond (1-based index in 1..d-1).

    Computed independently from ``truncate``: a full left QR sweep
    followed by right LQ factorizations down to the requested bond; the
    values are the singular values of the accumulated carry matrix.
    """
    d = v.d
    if not (1 <= bond <= d - 1):
        raise ValueError(f"bad-bond-index: bond must be in 1..{d - 1}, got {bond}")
    measure = float(np.prod([g.sqrt_weights[0] for g in v.grid.axes]))
    cores = [c.copy() for c in v.cores]
    for m in range(d - 1):
        rl, n, rr = cores[m].shape
        q, r = _qr_pos(cores[m].reshape(rl * n, rr))
        cores[m] = q.reshape(rl, n, q.shape[1])
        nxt = cores[m + 1]
        cores[m + 1] = (r @ nxt.reshape(rr, -1)).reshape(
            r.shape[0], nxt.shape[1], nxt.shape[2]
        )
    carry = None
    for m in range(d - 1, bond - 1, -1):
        rl, n, rr = cores[m].shape
        qt, rt = _qr_pos(cores[m].reshape(rl, n * rr).T)
        lmat = rt.T
        if m == bond:
            carry = lmat
        else:
            cores[m] = qt.T.reshape(qt.shape[1], n, rr)
            left = cores[m - 1]
            a0, n0, _ = left.shape
            cores[m - 1] = (left.reshape(a0 * n0, rl) @ lmat).reshape(
                a0, n0, lmat.shape[1]
            )
    s = scipy.linalg.svd(carry, compute_uv=False, check_finite=False)
    return measure * s


def rank_counts_above(v, threshold):
    """Per-bond count of singular values above an absolute threshold."""
    return [int(np.sum(singular_values(v, b) > threshold)) for b in range(1, v.d)]


def linear_form_tensor(grid, coeffs):
    """Exact tensor train of the linear form sum_l coeffs[l] * x_l.

    Interior ranks are 2 regardless of dimension.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    d = grid.d
    if coeffs.shape != (d,):
        raise ValueError(f"length-mismatch: need {d} coefficients")
    cores = []
    for m in range(d):
        x = grid.axes[m].nodes
        n = x.size
        if m == 0:
            core = np.zeros((1, n, 2))
            core[0, :, 0] = coeffs[0] * x
            core[0, :, 1] = 1.0
        elif m == d - 1:
            core = np.zeros((2, n, 1))
            core[0, :, 0] = 1.0
            core[1, :, 0] = coeffs[m] * x
        else:
            core = np.zeros((2, n, 2))
            core[0, :, 0] = 1.0
            core[1, :, 0] = coeffs[m] * x
            core[1, :, 1] = 1.0
        cores.append(core)
    return FttTensor(grid, cores, validate=False)


def advect_linear_rhs(v, gen, delta):
    """Right-hand side of a linear coordinate flow.

    Assembles T_delta( sum_k (gen @ x)_k d v / d x_k ) by pairwise
    addition with intermediate truncation; each term is the pointwise
    product of an exact rank-2 linear form with a one-core derivative.
    """
    gen = np.asarray(gen, dtype=float)
    d = v.d
    out = None
    for k in range(d):
        row = gen[k]
        if not np.any(row):
            continue
        dcores = [c if i != k else v.grid.axes[k].diff_apply(c, order=1, axis=1)
                  for i, c in enumerate(v.cores)]
        dv = FttTensor(v.grid, dcores, validate=False)
        term = hadamard(linear_form_tensor(v.grid, row), dv)
        if out is None:
            out = truncate(term, delta).tensor
        else:
            out = truncate(linear_combine([(1.0, out), (1.0, term)]), delta).tensor
    if out is None:
        out = FttTensor.zeros(v.grid)
    return out


def boundary_ratio(v):
    """Largest boundary-node magnitude relative to the overall scale.

    Exact (max over boundary slices vs max over the grid) for d <= 3;
    for larger d a per-axis RMS proxy is used.  Functions with unbounded
    support must keep this ratio tiny for periodic spectral accuracy.
    """
    if v.grid.size <= _FULL_SIZE_LIMIT and v.d <= 3:
        full = contract_full(v)
        peak = np.max(np.abs(full))
        if peak == 0.0:
            return 0.0
        edge = 0.0
        for ax in range(v.d):
            edge = max(edge, np.max(np.abs(np.take(full, 0, axis=ax))))
        return float(edge / peak)
    volume = float(np.prod([g.length for g in v.grid.axes]))
    rms_total = norm(v) / np.sqrt(volume)
    if rms_total == 0.0:
        return 0.0
    worst = 0.0
    for ax in range(v.d):
        g0 = v.grid.axes[ax]
        # boundary slice as a constant-profile tensor; dividing its norm
        # by sqrt(length) removes the padded axis measure again
        cores = [c if i != ax else np.repeat(c[:, :1, :], g0.n, axis=1)
                 for i, c in enumerate(v.cores)]
        sliced = FttTensor(v.grid, cores, validate=False)
        rms_slice = norm(sliced) / np.sqrt(volume)
        worst = max(worst, rms_slice)
    return float(worst / rms_total)
