"""Independent minimax oracle via the Remez exchange algorithm.

Used by tests and certificates as a second opinion on the best possible
sup-norm error of degree-d approximation, computed without any use of
the coefficient-tail machinery.  Desk-scale only: degrees up to 40 in
fixed 256-bit arithmetic.
"""

from __future__ import annotations

from .approx import ProblemSpec
from .coeffs import Target
from .errors import DomainError, RemezError
from .hp import HPReal, hpf
from .special import cheb_extrema_and_roots

MAX_DEGREE = 40
_BITS = 256
_MAX_ITER = 200


def _g(spec: ProblemSpec, x: HPReal, bits: int) -> HPReal:
    """Target rescaled to [-1, 1]: exp(lam*(x-1)) or exp(lam*(x+1))."""
    lam = spec.lam.with_bits(bits)
    if spec.target is Target.EXP_NEG:
        return (lam * (x - 1)).exp()
    return (lam * (x + 1)).exp()


def _cheb_row(d: int, x: HPReal) -> list[HPReal]:
    row = [hpf(1, x.bits), x]
    for _ in range(2, d + 1):
        row.append(x.shifted(1) * row[-1] - row[-2])
    return row[:d + 1]


def _solve(matrix: list[list[HPReal]], rhs: list[HPReal]) -> list[HPReal]:
    n = len(matrix)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col].is_zero():
            raise RemezError("singular exchange system")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f.is_zero():
                continue
            for c in range(col, n + 1):
                a[r][c] = a[r][c] - f * a[col][c]
    out = [hpf(0, _BITS)] * n
    for r in range(n - 1, -1, -1):
        acc = a[r][n]
        for c in range(r + 1, n):
            acc = acc - a[r][c] * out[c]
        out[r] = acc / a[r][r]
    return out


def minimax_error(spec: ProblemSpec, d: int) -> HPReal:
    """Best sup-norm error of degree-<=d polynomials, to ~1e-8 relative.

    Classic exchange iteration: solve for the polynomial equioscillating
    on the current d+2 reference points, move the reference to the
    refined extrema of the residual, stop when the equioscillation level
    agrees with the observed maximum deviation to 1e-8 relative.
    """
    if not isinstance(d, int) or d < 0:
        raise DomainError("degree must be a nonnegative integer")
    if d > MAX_DEGREE:
        raise DomainError(f"minimax oracle is limited to degree {MAX_DEGREE}")
    bits = _BITS
    ref, _ = cheb_extrema_and_roots(d + 1, bits)  # d+2 points, decreasing
    grid, _ = cheb_extrema_and_roots(32 * (d + 2), bits)
    gvals = {}

    def g(x: HPReal) -> HPReal:
        v = gvals.get(x.raw)
        if v is None:
            v = _g(spec, x, bits)
            gvals[x.raw] = v
        return v

    tol = hpf("1e-8", bits)
    # golden-section ratios at full working precision: the refined points
    # feed the next exchange system, so they must not lose bits
    gr1 = hpf("0.3819660112501051517954131656343619", bits)
    gr2 = hpf("0.6180339887498948482045868343656381", bits)
    level = None
    coeffs: list[HPReal] = []
    for _ in range(_MAX_ITER):
        rows = []
        rhs = []
        sign = 1
        for x in ref:
            rows.append(_cheb_row(d, x) + [hpf(sign, bits)])
            rhs.append(g(x))
            sign = -sign
        sol = _solve(rows, rhs)
        coeffs, level = sol[:d + 1], abs(sol[d + 1])

        def resid(x: HPReal) -> HPReal:
            row = _cheb_row(d, x)
            acc = hpf(0, bits)
            for c, t in zip(coeffs, row):
                acc = acc + c * t
            return g(x) - acc

        rv = [resid(x) for x in grid]
        # group grid points into runs of constant residual sign; keep the
        # strongest point of each run plus the run's grid boundaries
        runs: list[list[int]] = []  # [start, best, end]
        run_sign = 0
        for i, r in enumerate(rv):
            s = r.sign()
            if s == 0:
                continue
            if s != run_sign:
                runs.append([i, i, i])
                run_sign = s
            else:
                runs[-1][2] = i
                if abs(r) > abs(rv[runs[-1][1]]):
                    runs[-1][1] = i
        if len(runs) < d + 2:
            raise RemezError("residual lost equioscillation structure")
        while len(runs) > d + 2:
            if abs(rv[runs[0][1]]) < abs(rv[runs[-1][1]]):
                runs.pop(0)
            else:
                runs.pop()

        new_ref = []
        dev = hpf(0, bits)
        for start, i, end in runs:
            if end - start < 2:
                new_ref.append(grid[i])
                if abs(rv[i]) > dev:
                    dev = abs(rv[i])
                continue
            # golden-section refinement of |resid| within the run (so the
            # sign cannot flip); grid x values decrease with index
            a, b = grid[end], grid[start]
            for _ in range(24):
                span = b - a
                x1 = a + span * gr1
                x2 = a + span * gr2
                if abs(resid(x1)) < abs(resid(x2)):
                    a = x1
                else:
                    b = x2
            xm = (a + b).shifted(-1)
            rm = resid(xm)
            if rm.sign() != rv[i].sign() or abs(rm) < abs(rv[i]):
                xm, rm = grid[i], rv[i]
            new_ref.append(xm)
            if abs(rm) > dev:
                dev = abs(rm)
        new_ref.sort(reverse=True)
        ref = new_ref
        if level.sign() > 0 and (dev - level) <= tol * dev:
            return (dev + level).shifted(-1)
    raise RemezError(f"no convergence after {_MAX_ITER} exchange iterations")
