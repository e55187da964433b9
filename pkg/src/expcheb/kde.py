"""Batch Gaussian kernel-density evaluation by low-rank factorization.

Given points x^(1)..x^(n), y^(1)..y^(n) and weights w, approximates
v = K w with K[i,j] = exp(-||x_i - y_j||^2), to additive accuracy
delta * ||w||_1 per entry, in O(n * m * M) arithmetic instead of n^2:

1. build a certified polynomial p with |p(z) - exp(-z)| <= delta/2 on
   [0, B], B an upper bound on the squared diameter;
2. expand p(||x - y||^2) into the M = C(2m+2d, 2d) monomials in the 2m
   coordinates, giving a feature map with K ~ Xmat @ Ymat.T;
3. compute Xmat @ (Ymat.T @ w) as two matrix-vector passes, never
   forming the n x n kernel.

Floating-point error is charged against the remaining delta/2 budget
using a worst-case bound driven by an absolute-value pass; when plain
double precision cannot meet the budget the matvec escalates to a
compensated double-double path (~106-bit accumulation) that builds
feature rows on the fly and never materializes the matrices.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .approx import (
    ExportedPolynomial,
    export_polynomial,
    find_degree,
    problem,
)
from .coeffs import Target
from .errors import CapacityError, DomainError, SoundnessError
from .hp import hpf
from .special import critical_constant_neg

MAX_COLUMNS = 2_000_000
MAX_MATRIX_BYTES = 2_000_000_000
_CHUNK_FLOATS = 1_500_000

_EPS = 2.0 ** -53
_EPS_DD = 2.0 ** -104


@dataclass(frozen=True)
class KdeInstance:
    n: int
    m: int
    X: np.ndarray  # n x m source points
    Y: np.ndarray  # n x m query points
    w: np.ndarray  # length n weights
    delta: Fraction
    B: Fraction    # upper bound on squared diameter, >= 1
    B_estimated: bool


@dataclass(frozen=True)
class FeatureMap:
    m: int
    d: int
    indices: tuple[tuple[int, ...], ...]   # graded-lex, length C(2m+2d, 2d)
    b: dict[tuple[int, ...], Fraction]     # nonzero expansion coefficients
    parents: np.ndarray                    # column index of each parent
    variables: np.ndarray                  # variable dropped from the parent
    level_starts: tuple[int, ...]          # first column of each degree level
    poly: ExportedPolynomial


@dataclass
class KdeResult:
    v: np.ndarray
    M: int
    elapsed_build: float
    elapsed_matvec: float
    degree: int
    B_used: Fraction
    float_error_bound: float       # certified per-entry bound / ||w||_1
    used_high_precision: bool
    diameter_violation: float | None = None


def feature_count(m: int, d: int) -> int:
    return math.comb(2 * m + 2 * d, 2 * d)


def _check_capacity(m: int, d: int, max_columns: int = MAX_COLUMNS) -> int:
    M = feature_count(m, d)
    if M > max_columns:
        raise CapacityError(
            f"feature expansion needs M = C({2*m+2*d}, {2*d}) = {M} columns, "
            f"above the configured ceiling of {max_columns}")
    return M


def estimate_diameter_sq(X: np.ndarray, Y: np.ndarray) -> float:
    """Sum of squared per-coordinate ranges over the pooled points.

    An O(nm) upper bound on the true squared diameter, so a polynomial
    certified on [0, B-hat] covers every pairwise distance.
    """
    pooled = np.vstack([X, Y])
    ranges = pooled.max(axis=0) - pooled.min(axis=0)
    return float(np.dot(ranges, ranges))


def measured_diameter_sq(X: np.ndarray, Y: np.ndarray) -> float:
    """Exact maximal squared distance between any x and y point (O(n^2 m))."""
    worst = 0.0
    for i in range(X.shape[0]):
        d2 = ((X[i] - Y) ** 2).sum(axis=1).max()
        if d2 > worst:
            worst = float(d2)
    return worst


def make_instance(X, Y, w, delta, B=None) -> KdeInstance:
    """Validate and package a KDE instance; estimates B when not given."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or w.ndim != 1:
        raise DomainError("X and Y must be 2-d arrays and w a vector")
    n, m = X.shape
    if Y.shape != (n, m) or w.shape != (n,):
        raise DomainError("X, Y, and w must agree on n (and m)")
    if n < 1 or m < 1:
        raise DomainError("instance must have n >= 1 points of m >= 1 coords")
    if not (np.isfinite(X).all() and np.isfinite(Y).all()
            and np.isfinite(w).all()):
        raise DomainError("non-finite input coordinate or weight")
    delta = delta if isinstance(delta, Fraction) else Fraction(delta)
    if not (0 < delta < 1):
        raise DomainError("delta must lie strictly between 0 and 1")
    estimated = B is None
    if estimated:
        B_frac = Fraction(estimate_diameter_sq(X, Y))
    else:
        B_frac = Fraction(B)
    if B_frac < 1:
        B_frac = Fraction(1)
    return KdeInstance(n, m, X, Y, w, delta, B_frac, estimated)


# ---------------------------------------------------------------------------
# multi-index enumeration and kernel expansion


def enumerate_multi_indices(m: int, d: int,
                            max_columns: int = MAX_COLUMNS
                            ) -> list[tuple[int, ...]]:
    """All exponent tuples over 2m variables with total degree <= 2d.

    Graded lexicographic: ascending total degree, then ascending tuple
    order.  Length is exactly C(2m+2d, 2d).
    """
    if m < 1 or d < 1:
        raise DomainError("m and d must be positive")
    _check_capacity(m, d, max_columns)
    nvars = 2 * m
    out: list[tuple[int, ...]] = []

    def compositions(total: int, slots: int, prefix: tuple[int, ...]):
        if slots == 1:
            out.append(prefix + (total,))
            return
        for first in range(total + 1):
            compositions(total - first, slots - 1, prefix + (first,))

    for t in range(2 * d + 1):
        compositions(t, nvars, ())
    return out


def expand_kernel_poly(poly: ExportedPolynomial, m: int,
                       max_columns: int = MAX_COLUMNS) -> FeatureMap:
    """Expand p(sum_l (x_l - y_l)^2) into separated monomial coefficients.

    The squared-distance polynomial q (3m terms) is expanded once, then
    the monomial coefficients of p are folded in Horner fashion inside
    the 2m-variable polynomial ring, combining like terms at each step.
    Exact integer arithmetic over the common power-of-two denominator of
    p's dyadic coefficients.
    """
    if m < 1:
        raise DomainError("m must be positive")
    d = max(poly.degree, 1)
    M = _check_capacity(m, d, max_columns)

    # common-denominator lift: c_j = int_j / 2^shift
    shift = max(c.denominator.bit_length() - 1 for c in poly.monomial_form)
    ints = []
    for c in poly.monomial_form:
        scaled = c * (1 << shift)
        if scaled.denominator != 1:
            raise SoundnessError("polynomial coefficients are not dyadic")
        ints.append(scaled.numerator)
    while len(ints) <= d:
        ints.append(0)

    # q = sum_l (x_l - y_l)^2 over the variables (x_1..x_m, y_1..y_m)
    nvars = 2 * m
    q: list[tuple[tuple[int, ...], int]] = []
    for l in range(m):
        for (ex, ey, c) in ((2, 0, 1), (1, 1, -2), (0, 2, 1)):
            vec = [0] * nvars
            vec[l] += ex
            vec[m + l] += ey
            q.append((tuple(vec), c))

    deg = poly.degree
    acc: dict[tuple[int, ...], int] = {(0,) * nvars: ints[deg]}
    for j in range(deg - 1, -1, -1):
        nxt: dict[tuple[int, ...], int] = {}
        for vec, coef in acc.items():
            if coef == 0:
                continue
            for qvec, qc in q:
                key = tuple(a + b for a, b in zip(vec, qvec))
                nxt[key] = nxt.get(key, 0) + coef * qc
        const = (0,) * nvars
        nxt[const] = nxt.get(const, 0) + ints[j]
        acc = nxt

    den = 1 << shift
    b = {vec: Fraction(coef, den) for vec, coef in acc.items() if coef != 0}
    indices = enumerate_multi_indices(m, d, max_columns)
    if len(indices) != M:
        raise SoundnessError("index enumeration does not match C(2m+2d, 2d)")

    # parent pointers for incremental monomial evaluation: drop one unit
    # from the last nonzero variable; in graded-lex order the parent
    # always precedes its child
    position = {vec: i for i, vec in enumerate(indices)}
    parents = np.zeros(M, dtype=np.int64)
    variables = np.zeros(M, dtype=np.int64)
    level_starts = [0]
    prev_deg = 0
    for i, vec in enumerate(indices):
        vdeg = sum(vec)
        if vdeg != prev_deg:
            level_starts.append(i)
            prev_deg = vdeg
        if vdeg == 0:
            continue
        var = max(k for k, e in enumerate(vec) if e > 0)
        pvec = vec[:var] + (vec[var] - 1,) + vec[var + 1:]
        parents[i] = position[pvec]
        variables[i] = var
    level_starts.append(M)

    return FeatureMap(m, d, tuple(indices), b, parents, variables,
                      tuple(level_starts), poly)


def reconstruct_feature_value(fm: FeatureMap, x, y) -> Fraction:
    """Exact evaluation of sum_a b_a prod v^a at one (x, y) pair."""
    coords = [Fraction(c) for c in list(x) + list(y)]
    total = Fraction(0)
    for vec, coef in fm.b.items():
        term = coef
        for c, e in zip(coords, vec):
            if e:
                term *= c ** e
        total += term
    return total


# ---------------------------------------------------------------------------
# feature matrices (plain double precision)


def _monomial_matrix(points: np.ndarray, ones_side: str,
                     fm: FeatureMap) -> np.ndarray:
    """n x M monomial values with one side's variables pinned to 1."""
    if ones_side == "y":
        coords = np.hstack([points, np.ones_like(points)])
    else:
        coords = np.hstack([np.ones_like(points), points])
    n = points.shape[0]
    M = len(fm.indices)
    out = np.empty((n, M), dtype=np.float64)
    out[:, 0] = 1.0
    for lv in range(1, len(fm.level_starts) - 1):
        s, e = fm.level_starts[lv], fm.level_starts[lv + 1]
        out[:, s:e] = out[:, fm.parents[s:e]] * coords[:, fm.variables[s:e]]
    return out


def _b_vector(fm: FeatureMap) -> np.ndarray:
    bv = np.zeros(len(fm.indices), dtype=np.float64)
    pos = {vec: i for i, vec in enumerate(fm.indices)}
    for vec, coef in fm.b.items():
        bv[pos[vec]] = float(coef)
    return bv


def build_feature_matrices(inst: KdeInstance, fm: FeatureMap,
                           center: np.ndarray | None = None
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Materialize Xmat (carrying the b_a factors) and Ymat in float64.

    Column a of Xmat holds b_a * prod_l x_l^(a_x); column a of Ymat holds
    prod_l y_l^(a_y), so K ~ Xmat @ Ymat.T.
    """
    M = len(fm.indices)
    bytes_needed = 2 * inst.n * M * 8
    if bytes_needed > MAX_MATRIX_BYTES:
        raise CapacityError(
            f"feature matrices need {bytes_needed} bytes "
            f"(limit {MAX_MATRIX_BYTES})")
    Xp = inst.X if center is None else inst.X - center
    Yp = inst.Y if center is None else inst.Y - center
    if not (np.isfinite(Xp).all() and np.isfinite(Yp).all()):
        raise DomainError("non-finite input coordinate")
    Xmat = _monomial_matrix(Xp, "y", fm)
    Ymat = _monomial_matrix(Yp, "x", fm)
    Xmat *= _b_vector(fm)[None, :]
    return Xmat, Ymat


def _midrange(inst: KdeInstance) -> np.ndarray:
    pooled = np.vstack([inst.X, inst.Y])
    return 0.5 * (pooled.max(axis=0) + pooled.min(axis=0))


def _partition(n: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, n))
    size = -(-n // workers)
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def _run_blocks(fn, blocks, workers: int) -> list:
    """Apply fn to each block; results always merged in block order."""
    if len(blocks) > 1 and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, blocks))
    return [fn(b) for b in blocks]


# ---------------------------------------------------------------------------
# double-double helpers (error-free transformations, vectorized)

_SPLIT = 2.0 ** 27 + 1.0


def _two_sum(a, b):
    s = a + b
    t = s - a
    e = (a - (s - t)) + (b - t)
    return s, e


def _two_prod(a, b):
    p = a * b
    ah = _SPLIT * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLIT * b
    bh = bh - (bh - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _dd_add(hi1, lo1, hi2, lo2):
    s, e = _two_sum(hi1, hi2)
    e = e + (lo1 + lo2)
    hi = s + e
    lo = e - (hi - s)
    return hi, lo


def _dd_mul(hi1, lo1, hi2, lo2):
    p, e = _two_prod(hi1, hi2)
    e = e + (hi1 * lo2 + lo1 * hi2)
    hi = p + e
    lo = e - (hi - p)
    return hi, lo


def _dd_sum_tree(hi: np.ndarray, lo: np.ndarray) -> tuple[float, float]:
    while hi.shape[0] > 1:
        k = hi.shape[0]
        half = (k + 1) // 2
        pairs = k - half
        h2 = np.empty(half)
        l2 = np.empty(half)
        h2[:pairs], l2[:pairs] = _dd_add(hi[:pairs], lo[:pairs],
                                         hi[half:], lo[half:])
        h2[pairs:] = hi[pairs:half]
        l2[pairs:] = lo[pairs:half]
        hi, lo = h2, l2
    return float(hi[0]), float(lo[0])


def _dd_monomial_rows(points: np.ndarray, ones_side: str, fm: FeatureMap
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Feature rows in double-double, built level by level."""
    if ones_side == "y":
        coords = np.hstack([points, np.ones_like(points)])
    else:
        coords = np.hstack([np.ones_like(points), points])
    n = points.shape[0]
    M = len(fm.indices)
    hi = np.empty((n, M))
    lo = np.zeros((n, M))
    hi[:, 0] = 1.0
    for lv in range(1, len(fm.level_starts) - 1):
        s, e = fm.level_starts[lv], fm.level_starts[lv + 1]
        hi[:, s:e], lo[:, s:e] = _dd_mul(
            hi[:, fm.parents[s:e]], lo[:, fm.parents[s:e]],
            coords[:, fm.variables[s:e]], 0.0)
    return hi, lo


def _b_vector_dd(fm: FeatureMap) -> tuple[np.ndarray, np.ndarray]:
    M = len(fm.indices)
    bh = np.zeros(M)
    bl = np.zeros(M)
    pos = {vec: i for i, vec in enumerate(fm.indices)}
    for vec, coef in fm.b.items():
        h = float(coef)
        bh[pos[vec]] = h
        bl[pos[vec]] = float(coef - Fraction(h))
    return bh, bl


def _row_chunks(start: int, end: int, M: int):
    step = max(1, _CHUNK_FLOATS // max(M, 1))
    for s in range(start, end, step):
        yield s, min(s + step, end)


# ---------------------------------------------------------------------------
# the matvec


def kde_matvec(inst: KdeInstance, fm: FeatureMap, workers: int = 1,
               force: str | None = None,
               validate_diameter: bool = False) -> KdeResult:
    """v = Xmat @ (Ymat.T @ w) with a certified floating-point budget.

    Deterministic for a fixed `workers` count: rows are split into
    contiguous blocks and per-block partials are merged in block order,
    bitwise identically to the sequential computation.  The reduction
    pass (Ymat.T @ w) always accumulates in double-double, so changing
    `workers` only moves block boundaries inside a ~106-bit accumulation;
    on well-scaled instances entries then agree within a few units in
    the last place (8 ULP documented tolerance).  The output pass is
    row-local and does not depend on the partition at all.

    `force` is None (auto), "plain" (stay in double precision; raises
    SoundnessError if the budget check fails), or "high" (always use the
    double-double path end to end).
    """
    if force not in (None, "plain", "high"):
        raise DomainError("force must be None, 'plain', or 'high'")
    M = len(fm.indices)
    d = fm.d
    n, m = inst.n, inst.m
    w = inst.w
    w_norm = float(np.abs(w).sum())

    violation = None
    if validate_diameter:
        measured = measured_diameter_sq(inst.X, inst.Y)
        if measured > float(inst.B):
            violation = measured
            warnings.warn(
                f"squared diameter {measured:g} exceeds the bound "
                f"{float(inst.B):g}; the accuracy contract does not apply",
                stacklevel=2)

    center = _midrange(inst)
    # the polynomial consumed delta/2; floats get the other half, minus
    # a small analytic allowance for the centering translation
    budget = float(inst.delta) / 2 * w_norm
    shift_slack = 8.0 * m * float(inst.B) * _EPS * w_norm
    gamma_ops = n + M + 2 * d + 8

    t0 = time.perf_counter()
    use_high = force == "high"
    Xmat = Ymat = None
    abs_max = 0.0
    if not use_high:
        Xmat, Ymat = build_feature_matrices(inst, fm, center)
        abs_max = float((np.abs(Xmat) @ (np.abs(Ymat).T @ np.abs(w))).max())
        plain_bound = gamma_ops * _EPS * abs_max + shift_slack
        if plain_bound > budget:
            if force == "plain":
                raise SoundnessError(
                    f"double-precision error bound {plain_bound:g} exceeds "
                    f"the budget {budget:g}; drop force='plain'")
            use_high = True
            Xmat = Ymat = None
    build_elapsed = time.perf_counter() - t0

    t1 = time.perf_counter()
    if not use_high:
        v = _matvec_plain(Xmat, Ymat, w, workers)
        bound = gamma_ops * _EPS * abs_max + shift_slack
        high = False
    else:
        v, abs_max = _matvec_dd(inst, fm, center, workers)
        bound = gamma_ops * _EPS_DD * abs_max + shift_slack
        high = True
        if bound > budget:
            raise SoundnessError(
                f"even the high-precision error bound {bound:g} exceeds "
                f"the budget {budget:g}")
    matvec_elapsed = time.perf_counter() - t1

    rel_bound = bound / w_norm if w_norm > 0 else 0.0
    return KdeResult(v=v, M=M, elapsed_build=build_elapsed,
                     elapsed_matvec=matvec_elapsed, degree=d,
                     B_used=inst.B, float_error_bound=rel_bound,
                     used_high_precision=high,
                     diameter_violation=violation)


def _matvec_plain(Xmat: np.ndarray, Ymat: np.ndarray, w: np.ndarray,
                  workers: int) -> np.ndarray:
    n, M = Xmat.shape
    blocks = _partition(n, workers)

    def pass1(block):
        s, e = block
        ph = np.zeros(M)
        pl = np.zeros(M)
        for j in range(s, e):
            th, tl = _two_prod(Ymat[j], w[j])
            ph, pl = _dd_add(ph, pl, th, tl)
        return ph, pl

    partials = _run_blocks(pass1, blocks, workers)
    sh = np.zeros(M)
    sl = np.zeros(M)
    for ph, pl in partials:
        sh, sl = _dd_add(sh, sl, ph, pl)
    svec = sh + sl

    def pass2(block):
        out = np.empty(block[1] - block[0])
        for s, e in _row_chunks(block[0], block[1], M):
            out[s - block[0]:e - block[0]] = \
                (Xmat[s:e] * svec[None, :]).sum(axis=1)
        return out

    return np.concatenate(_run_blocks(pass2, blocks, workers))


def _matvec_dd(inst: KdeInstance, fm: FeatureMap, center: np.ndarray,
               workers: int) -> tuple[np.ndarray, float]:
    """Double-double end to end; feature rows are built on the fly."""
    M = len(fm.indices)
    n = inst.n
    w = inst.w
    bh, bl = _b_vector_dd(fm)
    Xp = inst.X - center
    Yp = inst.Y - center
    if not (np.isfinite(Xp).all() and np.isfinite(Yp).all()):
        raise DomainError("non-finite input coordinate")
    blocks = _partition(n, workers)

    def pass1(block):
        ph = np.zeros(M)
        pl = np.zeros(M)
        ah = np.zeros(M)
        for s, e in _row_chunks(block[0], block[1], M):
            rh, rl = _dd_monomial_rows(Yp[s:e], "x", fm)
            for j in range(e - s):
                th, tl = _dd_mul(rh[j], rl[j], w[s + j], 0.0)
                ph, pl = _dd_add(ph, pl, th, tl)
                ah += np.abs(rh[j]) * abs(w[s + j])
        return ph, pl, ah

    partials = _run_blocks(pass1, blocks, workers)
    sh = np.zeros(M)
    sl = np.zeros(M)
    s_abs = np.zeros(M)
    for ph, pl, ah in partials:
        sh, sl = _dd_add(sh, sl, ph, pl)
        s_abs += ah

    def pass2(block):
        out = np.empty(block[1] - block[0])
        out_abs = np.empty(block[1] - block[0])
        for s, e in _row_chunks(block[0], block[1], M):
            rh, rl = _dd_monomial_rows(Xp[s:e], "y", fm)
            for j in range(e - s):
                fh, fl = _dd_mul(rh[j], rl[j], bh, bl)
                th, tl = _dd_mul(fh, fl, sh, sl)
                h, low = _dd_sum_tree(th, tl)
                out[s - block[0] + j] = h + low
                out_abs[s - block[0] + j] = float((np.abs(fh) * s_abs).sum())
        return out, out_abs

    results = _run_blocks(pass2, blocks, workers)
    v = np.concatenate([r[0] for r in results])
    abs_max = max(float(r[1].max()) for r in results)
    return v, abs_max


def kde_bruteforce(inst: KdeInstance, chunk: int = 256) -> np.ndarray:
    """Exact O(n^2 m) reference: v_i = sum_j w_j exp(-||x_i - y_j||^2)."""
    n = inst.n
    v = np.empty(n)
    for s in range(0, n, chunk):
        e = min(s + chunk, n)
        d2 = ((inst.X[s:e, None, :] - inst.Y[None, :, :]) ** 2).sum(axis=2)
        v[s:e] = np.exp(-d2) @ inst.w
    return v


def solve(inst: KdeInstance, workers: int = 1, force: str | None = None,
          validate_diameter: bool = False,
          max_columns: int = MAX_COLUMNS) -> KdeResult:
    """End-to-end driver: certify a polynomial at delta/2, expand, matvec."""
    spec = problem(Target.EXP_NEG, inst.B, inst.delta / 2)
    cert = find_degree(spec)
    _check_capacity(inst.m, cert.D_upper, max_columns)
    poly = export_polynomial(spec, cert)
    fm = expand_kernel_poly(poly, inst.m, max_columns)
    return kde_matvec(inst, fm, workers=workers, force=force,
                      validate_diameter=validate_diameter)


# ---------------------------------------------------------------------------
# cost model


@dataclass(frozen=True)
class CostModel:
    n: int
    alpha: float
    beta: float
    kappa: float
    m: int
    degree: int
    M: int
    exponent_bound: float
    x: float            # kappa * nu(kappa / (2 beta))
    envelope: float     # x * |ln x|, the analytic exponent envelope
    degree_source: str  # "certificate" or "prediction"


def cost_model(n: int, alpha: float, beta: float, kappa: float) -> CostModel:
    """Feature count and runtime exponent in the scaling regime.

    With m = alpha ln n, delta = n^-beta, and B = kappa ln n, the window
    ratio is r = kappa / (2 beta) and the certified degree grows like
    nu(r) * r * beta * ln n, so the feature count M = C(2m+2d, 2d) keeps
    ln M / ln n bounded by roughly x |ln x| + O(x) with x = kappa nu(r).
    Uses the certified degree when B >= 1 makes a certificate feasible,
    the closed-form prediction otherwise.  M is reported exactly and may
    exceed the materialization ceiling; no capacity check applies here.
    """
    if not 0 < kappa < 0.5:
        raise DomainError("kappa must lie in (0, 1/2)")
    if alpha <= 0 or beta <= 0 or n < 3:
        raise DomainError("need alpha > 0, beta > 0, n >= 3")
    ln_n = math.log(n)
    m = max(1, int(alpha * ln_n))
    r = kappa / (2 * beta)
    nu = critical_constant_neg(hpf(r, 96), 96).to_float()
    B = kappa * ln_n
    source = "prediction"
    d = max(1, math.ceil(nu * r * beta * ln_n))
    if B >= 1:
        try:
            spec = problem(Target.EXP_NEG, repr(B), repr(n ** -beta))
            d = find_degree(spec).D_upper
            source = "certificate"
        except Exception:
            pass
    M = feature_count(m, d)
    x = kappa * nu
    envelope = x * abs(math.log(x)) if x > 0 else 0.0
    return CostModel(n, alpha, beta, kappa, m, d, M,
                     math.log(M) / ln_n, x, envelope, source)
