"""Pure-Python integrator core; reference twin of the compiled extension.

Every arithmetic operation here is written in the same order as in
``_fastcore.pyx`` so that both backends produce bit-identical trajectories.
Math-function edge cases mirror C semantics (log(0) = -inf, sqrt(-1) = nan,
x/0 = +-inf) because Python's ``math`` raises where libm does not.
"""

from __future__ import annotations

import math

import numpy as np

from .programs import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_COSH,
    OP_DIV,
    OP_DUP,
    OP_EXP,
    OP_LOG,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_RECIP,
    OP_SIN,
    OP_SINH,
    OP_SQRT,
    OP_SUB,
    OP_VAR,
    SYSTEM_CIRCLE,
    SYSTEM_DK4,
    SYSTEM_LOXODROME,
    state_dim,
    tri_index,
)

BACKEND_NAME = "python"

NAN = float("nan")
INF = float("inf")

REASON_COMPLETED = 0
REASON_DRIFT = 1
REASON_DEGENERATE_JERK = 2
REASON_CHART_ESCAPE = 3
REASON_NONFINITE = 4
REASON_STEP_UNDERFLOW = 5
REASON_SAMPLE_LIMIT = 6

REASON_TEXT = {
    REASON_COMPLETED: "completed",
    REASON_DRIFT: "constraint-drift",
    REASON_DEGENERATE_JERK: "degenerate-jerk",
    REASON_CHART_ESCAPE: "chart-escape",
    REASON_NONFINITE: "non-finite",
    REASON_STEP_UNDERFLOW: "step-underflow",
    REASON_SAMPLE_LIMIT: "sample-limit",
}

SCHEME_RK4 = 0
SCHEME_RK45 = 1

# Dormand-Prince 5(4) tableau
_A21 = 1.0 / 5.0
_A31 = 3.0 / 40.0
_A32 = 9.0 / 40.0
_A41 = 44.0 / 45.0
_A42 = -56.0 / 15.0
_A43 = 32.0 / 9.0
_A51 = 19372.0 / 6561.0
_A52 = -25360.0 / 2187.0
_A53 = 64448.0 / 6561.0
_A54 = -212.0 / 729.0
_A61 = 9017.0 / 3168.0
_A62 = -355.0 / 33.0
_A63 = 46732.0 / 5247.0
_A64 = 49.0 / 176.0
_A65 = -5103.0 / 18656.0
_B1 = 35.0 / 384.0
_B3 = 500.0 / 1113.0
_B4 = 125.0 / 192.0
_B5 = -2187.0 / 6784.0
_B6 = 11.0 / 84.0
_C1 = 5179.0 / 57600.0
_C3 = 7571.0 / 16695.0
_C4 = 393.0 / 640.0
_C5 = -92097.0 / 339200.0
_C6 = 187.0 / 2100.0
_C7 = 1.0 / 40.0


def _c_log(a: float) -> float:
    if a > 0.0:
        return math.log(a)
    if a == 0.0:
        return -INF
    return NAN


def _c_sqrt(a: float) -> float:
    if a >= 0.0:
        return math.sqrt(a)
    return NAN


def _c_div(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0.0 or a != a:
            return NAN
        return math.copysign(INF, a) * math.copysign(1.0, b)


def _c_exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        return INF


def _c_pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except ValueError:
        if a == 0.0 and b < 0.0:
            return INF
        return NAN
    except OverflowError:
        negative = a < 0.0 and b == math.floor(b) and (int(b) & 1) == 1
        return -INF if negative else INF


def _c_sinh(a: float) -> float:
    try:
        return math.sinh(a)
    except OverflowError:
        return math.copysign(INF, a)


def _c_cosh(a: float) -> float:
    try:
        return math.cosh(a)
    except OverflowError:
        return INF


def _c_sincos(fn, a: float) -> float:
    try:
        return fn(a)
    except ValueError:
        return NAN


class _Ctx:
    """Unpacked program table plus scratch storage for one run."""

    def __init__(self, ps):
        self.n = ps.n
        self.codes = [int(v) for v in ps.codes]
        self.starts = [int(v) for v in ps.starts]
        self.consts = [float(v) for v in ps.consts]
        self.metric_is_flat = bool(ps.metric_is_flat)
        self.rho_is_zero = bool(ps.rho_is_zero)
        self.with_drho = bool(ps.with_drho)
        n = ps.n
        self.w = 1.0
        self.ups = [0.0] * n
        self.P = [[0.0] * n for _ in range(n)]
        self.DP = [[[0.0] * n for _ in range(n)] for _ in range(n)]


def _eval_program(ctx: _Ctx, k: int, x0: float, x1: float, x2: float) -> float:
    codes = ctx.codes
    consts = ctx.consts
    i = ctx.starts[k] * 2
    end = ctx.starts[k + 1] * 2
    stack = [0.0] * 64
    sp = 0
    while i < end:
        op = codes[i]
        arg = codes[i + 1]
        i += 2
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = x0 if arg == 0 else (x1 if arg == 1 else x2)
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            stack[sp - 1] = _c_div(stack[sp - 1], stack[sp])
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_POW:
            stack[sp - 1] = _c_pow(stack[sp - 1], consts[arg])
        elif op == OP_EXP:
            stack[sp - 1] = _c_exp(stack[sp - 1])
        elif op == OP_LOG:
            stack[sp - 1] = _c_log(stack[sp - 1])
        elif op == OP_SIN:
            stack[sp - 1] = _c_sincos(math.sin, stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = _c_sincos(math.cos, stack[sp - 1])
        elif op == OP_SINH:
            stack[sp - 1] = _c_sinh(stack[sp - 1])
        elif op == OP_COSH:
            stack[sp - 1] = _c_cosh(stack[sp - 1])
        elif op == OP_SQRT:
            stack[sp - 1] = _c_sqrt(stack[sp - 1])
        elif op == OP_DUP:
            stack[sp] = stack[sp - 1]
            sp += 1
        elif op == OP_RECIP:
            stack[sp - 1] = _c_div(1.0, stack[sp - 1])
    return stack[0]


def _load_fields(ctx: _Ctx, x0: float, x1: float, x2: float, want_drho: bool) -> None:
    n = ctx.n
    if ctx.metric_is_flat:
        ctx.w = 1.0
        for a in range(n):
            ctx.ups[a] = 0.0
    else:
        ctx.w = _eval_program(ctx, 0, x0, x1, x2)
        for a in range(n):
            ctx.ups[a] = _eval_program(ctx, 1 + a, x0, x1, x2)
    base = 1 + n
    ntri = n * (n + 1) // 2
    if ctx.rho_is_zero:
        for a in range(n):
            for b in range(n):
                ctx.P[a][b] = 0.0
    else:
        for a in range(n):
            for b in range(a, n):
                v = _eval_program(ctx, base + tri_index(a, b, n), x0, x1, x2)
                ctx.P[a][b] = v
                ctx.P[b][a] = v
    if want_drho and ctx.with_drho:
        dbase = base + ntri
        if ctx.rho_is_zero:
            for d in range(n):
                for a in range(n):
                    for b in range(n):
                        ctx.DP[d][a][b] = 0.0
        else:
            for d in range(n):
                for a in range(n):
                    for b in range(a, n):
                        v = _eval_program(ctx, dbase + d * ntri + tri_index(a, b, n), x0, x1, x2)
                        ctx.DP[d][a][b] = v
                        ctx.DP[d][b][a] = v


def _rhs(system: int, n: int, y, ctx: _Ctx, out) -> None:
    x0 = y[0]
    x1 = y[1]
    x2 = y[2] if n == 3 else 0.0
    _load_fields(ctx, x0, x1, x2, system == SYSTEM_DK4)
    w = ctx.w
    ups = ctx.ups
    P = ctx.P
    w2 = w * w
    iw2 = 1.0 / w2

    U = y[n : 2 * n]
    A = y[2 * n : 3 * n]

    uU = 0.0
    Ud2 = 0.0
    AA = 0.0
    for a in range(n):
        uU += ups[a] * U[a]
        Ud2 += U[a] * U[a]
        AA += A[a] * A[a]
    AA *= iw2

    PUU = 0.0
    PU = [0.0] * 3
    for a in range(n):
        acc = 0.0
        for b in range(n):
            acc += P[a][b] * U[b]
        PU[a] = acc
        PUU += acc * U[a]

    for a in range(n):
        out[a] = U[a]
        out[n + a] = iw2 * A[a] - (2.0 * uU * U[a] - Ud2 * ups[a])

    UA = 0.0
    upsA = 0.0
    for a in range(n):
        UA += U[a] * A[a]
        upsA += ups[a] * A[a]

    if system == SYSTEM_CIRCLE:
        for a in range(n):
            corr = uU * A[a] + UA * ups[a] - upsA * U[a]
            out[2 * n + a] = PU[a] - (AA + PUU) * (w2 * U[a]) + corr
        return

    J = y[3 * n : 4 * n]
    UJ = 0.0
    upsJ = 0.0
    AJ = 0.0
    for a in range(n):
        UJ += U[a] * J[a]
        upsJ += ups[a] * J[a]
        AJ += A[a] * J[a]
    AJ *= iw2

    for a in range(n):
        corrA = uU * A[a] + UA * ups[a] - upsA * U[a]
        out[2 * n + a] = J[a] - (AA + PUU) * (w2 * U[a]) + PU[a] + corrA

    if system == SYSTEM_LOXODROME:
        kap = y[4 * n]
        for a in range(n):
            corrJ = uU * J[a] + UJ * ups[a] - upsJ * U[a]
            out[3 * n + a] = -AJ * (w2 * U[a]) - 2.0 * kap * J[a] + corrJ
        out[4 * n] = -0.5 * (AA + kap * kap) - PUU
        return

    # dk4: the jerk evolves by the snap equation with K contracted into U
    DP = ctx.DP
    q = [0.0] * 3
    for c in range(n):
        acc = 0.0
        for d in range(n):
            acc += ups[d] * P[d][c]
        q[c] = acc

    SK = [0.0] * 3
    for a in range(n):
        acc = 0.0
        for b in range(n):
            Kab = 0.0
            for c in range(n):
                covP_abc = DP[a][b][c] - ups[b] * P[a][c] - ups[c] * P[a][b] - 2.0 * ups[a] * P[b][c]
                if a == b:
                    covP_abc += q[c]
                if a == c:
                    covP_abc += q[b]
                covP_bac = DP[b][a][c] - ups[a] * P[b][c] - ups[c] * P[a][b] - 2.0 * ups[b] * P[a][c]
                if a == b:
                    covP_bac += q[c]
                if b == c:
                    covP_bac += q[a]
                Kab += -(covP_abc - covP_bac) * U[c]
            acc += Kab * U[b]
        SK[a] = acc

    for a in range(n):
        corrJ = uU * J[a] + UJ * ups[a] - upsJ * U[a]
        out[3 * n + a] = -AJ * (w2 * U[a]) + SK[a] + corrJ


def _residuals(system: int, n: int, y, ctx: _Ctx, res) -> None:
    """res <- (unit, orthoA, orthoJ, null); NaN marks non-applicable slots."""
    x0 = y[0]
    x1 = y[1]
    x2 = y[2] if n == 3 else 0.0
    _load_fields(ctx, x0, x1, x2, False)
    w = ctx.w
    w2 = w * w
    iw2 = 1.0 / w2
    U = y[n : 2 * n]
    A = y[2 * n : 3 * n]

    Ud2 = 0.0
    UA = 0.0
    for a in range(n):
        Ud2 += U[a] * U[a]
        UA += U[a] * A[a]
    res[0] = abs(w2 * Ud2 - 1.0)
    res[1] = abs(UA)
    res[2] = NAN
    res[3] = NAN
    if system == SYSTEM_CIRCLE:
        return

    J = y[3 * n : 4 * n]
    UJ = 0.0
    for a in range(n):
        UJ += U[a] * J[a]
    res[2] = abs(UJ)
    if system != SYSTEM_LOXODROME:
        return

    kap = y[4 * n]
    AA = 0.0
    for a in range(n):
        AA += A[a] * A[a]
    AA *= iw2
    srho = 0.0
    for a in range(n):
        rho_a = J[a] + 0.5 * (AA - kap * kap) * (w2 * U[a]) + kap * A[a]
        srho += U[a] * rho_a
    mumu = 0.0
    for a in range(n):
        for b in range(n):
            mu_ab = (w2 * U[a]) * A[b] - (w2 * U[b]) * A[a]
            mumu += mu_ab * mu_ab
    mumu = mumu * (iw2 * iw2)
    res[3] = abs(4.0 * srho - mumu + 2.0 * kap * kap)


def _jerk_norm(n: int, y, ctx: _Ctx) -> float:
    x0 = y[0]
    x1 = y[1]
    x2 = y[2] if n == 3 else 0.0
    _load_fields(ctx, x0, x1, x2, False)
    w2 = ctx.w * ctx.w
    J = y[3 * n : 4 * n]
    s = 0.0
    for a in range(n):
        s += J[a] * J[a]
    return math.sqrt(s / w2)


def _renormalize(system: int, n: int, y, ctx: _Ctx) -> None:
    x0 = y[0]
    x1 = y[1]
    x2 = y[2] if n == 3 else 0.0
    _load_fields(ctx, x0, x1, x2, False)
    w2 = ctx.w * ctx.w
    Ud2 = 0.0
    for a in range(n):
        Ud2 += y[n + a] * y[n + a]
    r = math.sqrt(w2 * Ud2)
    for a in range(n):
        y[n + a] = y[n + a] / r
    UA = 0.0
    for a in range(n):
        UA += y[n + a] * y[2 * n + a]
    for a in range(n):
        y[2 * n + a] = y[2 * n + a] - UA * (w2 * y[n + a])
    if system != SYSTEM_CIRCLE:
        UJ = 0.0
        for a in range(n):
            UJ += y[n + a] * y[3 * n + a]
        for a in range(n):
            y[3 * n + a] = y[3 * n + a] - UJ * (w2 * y[n + a])


def _rk4_step(system, n, ydim, y, h, ctx, k1, k2, k3, k4, yt, ynew):
    _rhs(system, n, y, ctx, k1)
    for i in range(ydim):
        yt[i] = y[i] + 0.5 * h * k1[i]
    _rhs(system, n, yt, ctx, k2)
    for i in range(ydim):
        yt[i] = y[i] + 0.5 * h * k2[i]
    _rhs(system, n, yt, ctx, k3)
    for i in range(ydim):
        yt[i] = y[i] + h * k3[i]
    _rhs(system, n, yt, ctx, k4)
    for i in range(ydim):
        ynew[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def _dp45_attempt(system, n, ydim, y, h, tol, ctx, ks, yt, ynew):
    k1, k2, k3, k4, k5, k6, k7 = ks
    _rhs(system, n, y, ctx, k1)
    for i in range(ydim):
        yt[i] = y[i] + h * (_A21 * k1[i])
    _rhs(system, n, yt, ctx, k2)
    for i in range(ydim):
        yt[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
    _rhs(system, n, yt, ctx, k3)
    for i in range(ydim):
        yt[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
    _rhs(system, n, yt, ctx, k4)
    for i in range(ydim):
        yt[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
    _rhs(system, n, yt, ctx, k5)
    for i in range(ydim):
        yt[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
    _rhs(system, n, yt, ctx, k6)
    for i in range(ydim):
        ynew[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
    _rhs(system, n, ynew, ctx, k7)
    errnorm = 0.0
    for i in range(ydim):
        y4 = y[i] + h * (
            _C1 * k1[i] + _C3 * k3[i] + _C4 * k4[i] + _C5 * k5[i] + _C6 * k6[i] + _C7 * k7[i]
        )
        e = ynew[i] - y4
        ay = abs(y[i])
        an = abs(ynew[i])
        sc = tol + tol * (ay if ay > an else an)
        e = e / sc
        errnorm += e * e
    return math.sqrt(errnorm / ydim)


def run(
    ps,
    system: int,
    y0,
    s0: float,
    length: float,
    scheme: int,
    h0: float,
    tol: float,
    drift_tol: float,
    jerk_tol: float,
    chart_bound: float,
    renorm: bool,
    record_every: int = 1,
    max_samples: int = 2_000_000,
):
    """Integrate one curve; returns (rows, reason_code).

    Row layout: s, y[0..ydim-1], res_unit, res_orthoA, res_orthoJ, res_null.
    """
    n = ps.n
    ydim = state_dim(system, n)
    ctx = _Ctx(ps)
    y = [float(v) for v in y0]
    if len(y) != ydim:
        raise ValueError(f"state must have {ydim} components")
    s = float(s0)
    s_end = s + float(length)
    tiny = 1e-12 * max(1.0, abs(s_end))

    k1 = [0.0] * ydim
    k2 = [0.0] * ydim
    k3 = [0.0] * ydim
    k4 = [0.0] * ydim
    k5 = [0.0] * ydim
    k6 = [0.0] * ydim
    k7 = [0.0] * ydim
    ks = (k1, k2, k3, k4, k5, k6, k7)
    yt = [0.0] * ydim
    ynew = [0.0] * ydim
    res = [0.0] * 4

    rows = []

    def record(scur, ycur):
        _residuals(system, n, ycur, ctx, res)
        rows.append([scur] + list(ycur) + [res[0], res[1], res[2], res[3]])

    record(s, y)
    if length <= 0.0:
        return np.asarray(rows, dtype=np.float64), REASON_COMPLETED

    reason = REASON_COMPLETED
    h = h0 if h0 < length else length
    step_index = 0
    recorded_last = True

    while True:
        remaining = s_end - s
        if remaining <= tiny:
            reason = REASON_COMPLETED
            break
        if h > remaining:
            h = remaining

        if scheme == SCHEME_RK4:
            _rk4_step(system, n, ydim, y, h, ctx, k1, k2, k3, k4, yt, ynew)
            h_taken = h
        else:
            accepted = False
            h_taken = h
            while True:
                errnorm = _dp45_attempt(system, n, ydim, y, h_taken, tol, ctx, ks, yt, ynew)
                finite = errnorm == errnorm and errnorm != INF
                if finite and errnorm <= 1.0:
                    accepted = True
                    if errnorm == 0.0:
                        fac = 5.0
                    else:
                        fac = 0.9 * _c_pow(errnorm, -0.2)
                        if fac > 5.0:
                            fac = 5.0
                        elif fac < 0.2:
                            fac = 0.2
                    h_next = h_taken * fac
                    break
                if finite:
                    fac = 0.9 * _c_pow(errnorm, -0.2)
                    if fac < 0.2:
                        fac = 0.2
                    h_taken = h_taken * fac
                else:
                    h_taken = h_taken * 0.5
                if h_taken < 1e-14 * max(1.0, abs(s)):
                    break
            if not accepted:
                reason = REASON_STEP_UNDERFLOW
                break
            h = h_next

        ok = True
        for i in range(ydim):
            v = ynew[i]
            if not (v == v and -INF < v < INF):
                ok = False
                break
        if not ok:
            reason = REASON_NONFINITE
            break

        if renorm:
            _renormalize(system, n, ynew, ctx)

        _residuals(system, n, ynew, ctx, res)
        drift = res[0]
        if res[1] > drift:
            drift = res[1]
        if system != SYSTEM_CIRCLE and res[2] > drift:
            drift = res[2]
        if drift > drift_tol:
            reason = REASON_DRIFT
            break

        if system == SYSTEM_LOXODROME and _jerk_norm(n, ynew, ctx) < jerk_tol:
            reason = REASON_DEGENERATE_JERK
            break

        escaped = False
        for a in range(n):
            if abs(ynew[a]) > chart_bound:
                escaped = True
                break
        if escaped:
            reason = REASON_CHART_ESCAPE
            break

        s = s + h_taken
        for i in range(ydim):
            y[i] = ynew[i]
        step_index += 1
        if step_index % record_every == 0:
            rows.append([s] + list(y) + [res[0], res[1], res[2], res[3]])
            recorded_last = True
        else:
            recorded_last = False
        if len(rows) >= max_samples:
            reason = REASON_SAMPLE_LIMIT
            break

    if not recorded_last:
        record(s, y)
    return np.asarray(rows, dtype=np.float64), reason


def rhs_once(ps, system: int, y):
    """Right-hand side of the chosen first-order system at one state."""
    n = ps.n
    ydim = state_dim(system, n)
    ctx = _Ctx(ps)
    out = [0.0] * ydim
    _rhs(system, n, [float(v) for v in y], ctx, out)
    return np.asarray(out, dtype=np.float64)


def residuals_once(ps, system: int, y):
    n = ps.n
    ctx = _Ctx(ps)
    res = [0.0] * 4
    _residuals(system, n, [float(v) for v in y], ctx, res)
    return np.asarray(res, dtype=np.float64)


def eval_scalar(ps, k: int, x) -> float:
    """Evaluate program ``k`` of a packed structure at chart point ``x``."""
    ctx = _Ctx(ps)
    x0 = float(x[0])
    x1 = float(x[1])
    x2 = float(x[2]) if len(x) > 2 else 0.0
    return _eval_program(ctx, k, x0, x1, x2)
