# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integrator core.

Line-for-line twin of ``purepy.py``: the arithmetic is performed in the same
order with the same libm calls, so trajectories agree bit-for-bit with the
pure-Python backend.  Keep the two files in sync when touching either.
"""

from libc.math cimport (exp, log, sin, cos, sinh, cosh, sqrt, pow, fabs,
                        INFINITY, NAN, isfinite)

import numpy as np

from .programs import SYSTEM_CIRCLE as _PY_SYSTEM_CIRCLE
from .programs import SYSTEM_DK4 as _PY_SYSTEM_DK4
from .programs import SYSTEM_LOXODROME as _PY_SYSTEM_LOXODROME
from .programs import state_dim

BACKEND_NAME = "compiled"

REASON_COMPLETED = 0
REASON_DRIFT = 1
REASON_DEGENERATE_JERK = 2
REASON_CHART_ESCAPE = 3
REASON_NONFINITE = 4
REASON_STEP_UNDERFLOW = 5
REASON_SAMPLE_LIMIT = 6

SCHEME_RK4 = 0
SCHEME_RK45 = 1

cdef int C_SYSTEM_CIRCLE = _PY_SYSTEM_CIRCLE
cdef int C_SYSTEM_LOXODROME = _PY_SYSTEM_LOXODROME
cdef int C_SYSTEM_DK4 = _PY_SYSTEM_DK4

DEF MAXDIM = 13          # loxodrome in three dimensions: 4*3 + 1
DEF STACKDEPTH = 64

cdef int OP_CONST = 0
cdef int OP_VAR = 1
cdef int OP_ADD = 2
cdef int OP_SUB = 3
cdef int OP_MUL = 4
cdef int OP_DIV = 5
cdef int OP_NEG = 6
cdef int OP_POW = 7
cdef int OP_EXP = 8
cdef int OP_LOG = 9
cdef int OP_SIN = 10
cdef int OP_COS = 11
cdef int OP_SINH = 12
cdef int OP_COSH = 13
cdef int OP_SQRT = 14
cdef int OP_DUP = 15
cdef int OP_RECIP = 16

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0
cdef double B3 = 500.0 / 1113.0
cdef double B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0
cdef double B6 = 11.0 / 84.0
cdef double C1 = 5179.0 / 57600.0
cdef double C3 = 7571.0 / 16695.0
cdef double C4 = 393.0 / 640.0
cdef double C5 = -92097.0 / 339200.0
cdef double C6 = 187.0 / 2100.0
cdef double C7 = 1.0 / 40.0


cdef inline int tri_index(int a, int b, int n):
    cdef int t
    if a > b:
        t = a
        a = b
        b = t
    return a * n - a * (a - 1) // 2 + (b - a)


cdef class _Ctx:
    cdef int n
    cdef bint metric_is_flat
    cdef bint rho_is_zero
    cdef bint with_drho
    cdef int[::1] codes
    cdef int[::1] starts
    cdef double[::1] consts
    cdef double w
    cdef double ups[3]
    cdef double P[3][3]
    cdef double DP[3][3][3]

    def __init__(self, ps):
        self.n = ps.n
        self.metric_is_flat = ps.metric_is_flat
        self.rho_is_zero = ps.rho_is_zero
        self.with_drho = ps.with_drho
        self.codes = np.ascontiguousarray(ps.codes, dtype=np.int32)
        self.starts = np.ascontiguousarray(ps.starts, dtype=np.int32)
        self.consts = np.ascontiguousarray(ps.consts, dtype=np.float64)


cdef double _eval_program(_Ctx ctx, int k, double x0, double x1, double x2):
    cdef int i = ctx.starts[k] * 2
    cdef int end = ctx.starts[k + 1] * 2
    cdef double stack[STACKDEPTH]
    cdef int sp = 0
    cdef int op, arg
    while i < end:
        op = ctx.codes[i]
        arg = ctx.codes[i + 1]
        i += 2
        if op == OP_CONST:
            stack[sp] = ctx.consts[arg]
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
            stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_POW:
            stack[sp - 1] = pow(stack[sp - 1], ctx.consts[arg])
        elif op == OP_EXP:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == OP_LOG:
            stack[sp - 1] = log(stack[sp - 1])
        elif op == OP_SIN:
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == OP_SINH:
            stack[sp - 1] = sinh(stack[sp - 1])
        elif op == OP_COSH:
            stack[sp - 1] = cosh(stack[sp - 1])
        elif op == OP_SQRT:
            stack[sp - 1] = sqrt(stack[sp - 1])
        elif op == OP_DUP:
            stack[sp] = stack[sp - 1]
            sp += 1
        elif op == OP_RECIP:
            stack[sp - 1] = 1.0 / stack[sp - 1]
    return stack[0]


cdef void _load_fields(_Ctx ctx, double x0, double x1, double x2, bint want_drho):
    cdef int n = ctx.n
    cdef int a, b, d
    cdef int base, ntri, dbase
    cdef double v
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


cdef void _rhs(int system, int n, double *y, _Ctx ctx, double *out):
    cdef double x0 = y[0]
    cdef double x1 = y[1]
    cdef double x2 = y[2] if n == 3 else 0.0
    _load_fields(ctx, x0, x1, x2, system == C_SYSTEM_DK4)
    cdef double w = ctx.w
    cdef double w2 = w * w
    cdef double iw2 = 1.0 / w2
    cdef int a, b, c, d

    cdef double uU = 0.0
    cdef double Ud2 = 0.0
    cdef double AA = 0.0
    for a in range(n):
        uU += ctx.ups[a] * y[n + a]
        Ud2 += y[n + a] * y[n + a]
        AA += y[2 * n + a] * y[2 * n + a]
    AA *= iw2

    cdef double PUU = 0.0
    cdef double PU[3]
    cdef double acc
    for a in range(n):
        acc = 0.0
        for b in range(n):
            acc += ctx.P[a][b] * y[n + b]
        PU[a] = acc
        PUU += acc * y[n + a]

    for a in range(n):
        out[a] = y[n + a]
        out[n + a] = iw2 * y[2 * n + a] - (2.0 * uU * y[n + a] - Ud2 * ctx.ups[a])

    cdef double UA = 0.0
    cdef double upsA = 0.0
    for a in range(n):
        UA += y[n + a] * y[2 * n + a]
        upsA += ctx.ups[a] * y[2 * n + a]

    cdef double corr
    if system == C_SYSTEM_CIRCLE:
        for a in range(n):
            corr = uU * y[2 * n + a] + UA * ctx.ups[a] - upsA * y[n + a]
            out[2 * n + a] = PU[a] - (AA + PUU) * (w2 * y[n + a]) + corr
        return

    cdef double UJ = 0.0
    cdef double upsJ = 0.0
    cdef double AJ = 0.0
    for a in range(n):
        UJ += y[n + a] * y[3 * n + a]
        upsJ += ctx.ups[a] * y[3 * n + a]
        AJ += y[2 * n + a] * y[3 * n + a]
    AJ *= iw2

    for a in range(n):
        corr = uU * y[2 * n + a] + UA * ctx.ups[a] - upsA * y[n + a]
        out[2 * n + a] = y[3 * n + a] - (AA + PUU) * (w2 * y[n + a]) + PU[a] + corr

    cdef double kap
    if system == C_SYSTEM_LOXODROME:
        kap = y[4 * n]
        for a in range(n):
            corr = uU * y[3 * n + a] + UJ * ctx.ups[a] - upsJ * y[n + a]
            out[3 * n + a] = -AJ * (w2 * y[n + a]) - 2.0 * kap * y[3 * n + a] + corr
        out[4 * n] = -0.5 * (AA + kap * kap) - PUU
        return

    cdef double q[3]
    for c in range(n):
        acc = 0.0
        for d in range(n):
            acc += ctx.ups[d] * ctx.P[d][c]
        q[c] = acc

    cdef double SK[3]
    cdef double Kab, covP_abc, covP_bac
    for a in range(n):
        acc = 0.0
        for b in range(n):
            Kab = 0.0
            for c in range(n):
                covP_abc = (ctx.DP[a][b][c] - ctx.ups[b] * ctx.P[a][c]
                            - ctx.ups[c] * ctx.P[a][b] - 2.0 * ctx.ups[a] * ctx.P[b][c])
                if a == b:
                    covP_abc += q[c]
                if a == c:
                    covP_abc += q[b]
                covP_bac = (ctx.DP[b][a][c] - ctx.ups[a] * ctx.P[b][c]
                            - ctx.ups[c] * ctx.P[a][b] - 2.0 * ctx.ups[b] * ctx.P[a][c])
                if a == b:
                    covP_bac += q[c]
                if b == c:
                    covP_bac += q[a]
                Kab += -(covP_abc - covP_bac) * y[n + c]
            acc += Kab * y[n + b]
        SK[a] = acc

    for a in range(n):
        corr = uU * y[3 * n + a] + UJ * ctx.ups[a] - upsJ * y[n + a]
        out[3 * n + a] = -AJ * (w2 * y[n + a]) + SK[a] + corr


cdef void _residuals(int system, int n, double *y, _Ctx ctx, double *res):
    cdef double x0 = y[0]
    cdef double x1 = y[1]
    cdef double x2 = y[2] if n == 3 else 0.0
    _load_fields(ctx, x0, x1, x2, False)
    cdef double w = ctx.w
    cdef double w2 = w * w
    cdef double iw2 = 1.0 / w2
    cdef int a, b

    cdef double Ud2 = 0.0
    cdef double UA = 0.0
    for a in range(n):
        Ud2 += y[n + a] * y[n + a]
        UA += y[n + a] * y[2 * n + a]
    res[0] = fabs(w2 * Ud2 - 1.0)
    res[1] = fabs(UA)
    res[2] = NAN
    res[3] = NAN
    if system == C_SYSTEM_CIRCLE:
        return

    cdef double UJ = 0.0
    for a in range(n):
        UJ += y[n + a] * y[3 * n + a]
    res[2] = fabs(UJ)
    if system != C_SYSTEM_LOXODROME:
        return

    cdef double kap = y[4 * n]
    cdef double AA = 0.0
    for a in range(n):
        AA += y[2 * n + a] * y[2 * n + a]
    AA *= iw2
    cdef double srho = 0.0
    cdef double rho_a
    for a in range(n):
        rho_a = y[3 * n + a] + 0.5 * (AA - kap * kap) * (w2 * y[n + a]) + kap * y[2 * n + a]
        srho += y[n + a] * rho_a
    cdef double mumu = 0.0
    cdef double mu_ab
    for a in range(n):
        for b in range(n):
            mu_ab = (w2 * y[n + a]) * y[2 * n + b] - (w2 * y[n + b]) * y[2 * n + a]
            mumu += mu_ab * mu_ab
    mumu = mumu * (iw2 * iw2)
    res[3] = fabs(4.0 * srho - mumu + 2.0 * kap * kap)


cdef double _jerk_norm(int n, double *y, _Ctx ctx):
    cdef double x0 = y[0]
    cdef double x1 = y[1]
    cdef double x2 = y[2] if n == 3 else 0.0
    _load_fields(ctx, x0, x1, x2, False)
    cdef double w2 = ctx.w * ctx.w
    cdef double s = 0.0
    cdef int a
    for a in range(n):
        s += y[3 * n + a] * y[3 * n + a]
    return sqrt(s / w2)


cdef void _renormalize(int system, int n, double *y, _Ctx ctx):
    cdef double x0 = y[0]
    cdef double x1 = y[1]
    cdef double x2 = y[2] if n == 3 else 0.0
    _load_fields(ctx, x0, x1, x2, False)
    cdef double w2 = ctx.w * ctx.w
    cdef int a
    cdef double Ud2 = 0.0
    for a in range(n):
        Ud2 += y[n + a] * y[n + a]
    cdef double r = sqrt(w2 * Ud2)
    for a in range(n):
        y[n + a] = y[n + a] / r
    cdef double UA = 0.0
    for a in range(n):
        UA += y[n + a] * y[2 * n + a]
    for a in range(n):
        y[2 * n + a] = y[2 * n + a] - UA * (w2 * y[n + a])
    cdef double UJ
    if system != C_SYSTEM_CIRCLE:
        UJ = 0.0
        for a in range(n):
            UJ += y[n + a] * y[3 * n + a]
        for a in range(n):
            y[3 * n + a] = y[3 * n + a] - UJ * (w2 * y[n + a])


cdef void _rk4_step(int system, int n, int ydim, double *y, double h, _Ctx ctx,
                    double *k1, double *k2, double *k3, double *k4,
                    double *yt, double *ynew):
    cdef int i
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


cdef double _dp45_attempt(int system, int n, int ydim, double *y, double h, double tol,
                          _Ctx ctx, double *k1, double *k2, double *k3, double *k4,
                          double *k5, double *k6, double *k7, double *yt, double *ynew):
    cdef int i
    cdef double y4, e, ay, an, sc
    cdef double errnorm = 0.0
    _rhs(system, n, y, ctx, k1)
    for i in range(ydim):
        yt[i] = y[i] + h * (A21 * k1[i])
    _rhs(system, n, yt, ctx, k2)
    for i in range(ydim):
        yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    _rhs(system, n, yt, ctx, k3)
    for i in range(ydim):
        yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    _rhs(system, n, yt, ctx, k4)
    for i in range(ydim):
        yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    _rhs(system, n, yt, ctx, k5)
    for i in range(ydim):
        yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
    _rhs(system, n, yt, ctx, k6)
    for i in range(ydim):
        ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
    _rhs(system, n, ynew, ctx, k7)
    for i in range(ydim):
        y4 = y[i] + h * (C1 * k1[i] + C3 * k3[i] + C4 * k4[i] + C5 * k5[i] + C6 * k6[i] + C7 * k7[i])
        e = ynew[i] - y4
        ay = fabs(y[i])
        an = fabs(ynew[i])
        sc = tol + tol * (ay if ay > an else an)
        e = e / sc
        errnorm += e * e
    return sqrt(errnorm / ydim)


def run(ps, int system, y0, double s0, double length, int scheme, double h0,
        double tol, double drift_tol, double jerk_tol, double chart_bound,
        bint renorm, int record_every=1, long max_samples=2_000_000):
    """Integrate one curve; returns (rows, reason_code).

    Row layout: s, y[0..ydim-1], res_unit, res_orthoA, res_orthoJ, res_null.
    """
    cdef int n = ps.n
    cdef int ydim = state_dim(system, n)
    cdef _Ctx ctx = _Ctx(ps)
    if len(y0) != ydim:
        raise ValueError(f"state must have {ydim} components")

    cdef double y[MAXDIM]
    cdef double k1[MAXDIM]
    cdef double k2[MAXDIM]
    cdef double k3[MAXDIM]
    cdef double k4[MAXDIM]
    cdef double k5[MAXDIM]
    cdef double k6[MAXDIM]
    cdef double k7[MAXDIM]
    cdef double yt[MAXDIM]
    cdef double ynew[MAXDIM]
    cdef double res[4]
    cdef int i, a
    for i in range(ydim):
        y[i] = float(y0[i])

    cdef double s = s0
    cdef double s_end = s + length
    cdef double tiny = 1e-12 * max(1.0, fabs(s_end))
    cdef int width = 1 + ydim + 4

    cdef long cap = 4096
    if cap > max_samples:
        cap = max_samples
    rows_arr = np.empty((cap, width), dtype=np.float64)
    cdef double[:, ::1] rows = rows_arr
    cdef long nrows = 0

    # initial sample
    _residuals(system, n, y, ctx, res)
    rows[nrows, 0] = s
    for i in range(ydim):
        rows[nrows, 1 + i] = y[i]
    for i in range(4):
        rows[nrows, 1 + ydim + i] = res[i]
    nrows += 1

    if length <= 0.0:
        return rows_arr[:nrows].copy(), REASON_COMPLETED

    cdef int reason = REASON_COMPLETED
    cdef double h = h0 if h0 < length else length
    cdef long step_index = 0
    cdef bint recorded_last = True
    cdef double remaining, h_taken, h_next, errnorm, fac, drift, v
    cdef bint accepted, ok, finite, escaped

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
            h_next = h
            while True:
                errnorm = _dp45_attempt(system, n, ydim, y, h_taken, tol, ctx,
                                        k1, k2, k3, k4, k5, k6, k7, yt, ynew)
                finite = isfinite(errnorm)
                if finite and errnorm <= 1.0:
                    accepted = True
                    if errnorm == 0.0:
                        fac = 5.0
                    else:
                        fac = 0.9 * pow(errnorm, -0.2)
                        if fac > 5.0:
                            fac = 5.0
                        elif fac < 0.2:
                            fac = 0.2
                    h_next = h_taken * fac
                    break
                if finite:
                    fac = 0.9 * pow(errnorm, -0.2)
                    if fac < 0.2:
                        fac = 0.2
                    h_taken = h_taken * fac
                else:
                    h_taken = h_taken * 0.5
                if h_taken < 1e-14 * max(1.0, fabs(s)):
                    break
            if not accepted:
                reason = REASON_STEP_UNDERFLOW
                break
            h = h_next

        ok = True
        for i in range(ydim):
            v = ynew[i]
            if not isfinite(v):
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
        if system != C_SYSTEM_CIRCLE and res[2] > drift:
            drift = res[2]
        if drift > drift_tol:
            reason = REASON_DRIFT
            break

        if system == C_SYSTEM_LOXODROME and _jerk_norm(n, ynew, ctx) < jerk_tol:
            reason = REASON_DEGENERATE_JERK
            break

        escaped = False
        for a in range(n):
            if fabs(ynew[a]) > chart_bound:
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
            if nrows == cap:
                cap = cap * 2
                if cap > max_samples:
                    cap = max_samples
                new_arr = np.empty((cap, width), dtype=np.float64)
                new_arr[:nrows] = rows_arr[:nrows]
                rows_arr = new_arr
                rows = rows_arr
            rows[nrows, 0] = s
            for i in range(ydim):
                rows[nrows, 1 + i] = y[i]
            for i in range(4):
                rows[nrows, 1 + ydim + i] = res[i]
            nrows += 1
            recorded_last = True
        else:
            recorded_last = False
        if nrows >= max_samples:
            reason = REASON_SAMPLE_LIMIT
            break

    if not recorded_last:
        if nrows == cap:
            cap = cap + 1
            new_arr = np.empty((cap, width), dtype=np.float64)
            new_arr[:nrows] = rows_arr[:nrows]
            rows_arr = new_arr
            rows = rows_arr
        _residuals(system, n, y, ctx, res)
        rows[nrows, 0] = s
        for i in range(ydim):
            rows[nrows, 1 + i] = y[i]
        for i in range(4):
            rows[nrows, 1 + ydim + i] = res[i]
        nrows += 1

    return rows_arr[:nrows].copy(), reason


def rhs_once(ps, int system, y0):
    """Right-hand side of the chosen first-order system at one state."""
    cdef int n = ps.n
    cdef int ydim = state_dim(system, n)
    cdef _Ctx ctx = _Ctx(ps)
    cdef double y[MAXDIM]
    cdef double out[MAXDIM]
    cdef int i
    for i in range(ydim):
        y[i] = float(y0[i])
    _rhs(system, n, y, ctx, out)
    result = np.empty(ydim, dtype=np.float64)
    for i in range(ydim):
        result[i] = out[i]
    return result


def residuals_once(ps, int system, y0):
    cdef int n = ps.n
    cdef int ydim = state_dim(system, n)
    cdef _Ctx ctx = _Ctx(ps)
    cdef double y[MAXDIM]
    cdef double res[4]
    cdef int i
    for i in range(ydim):
        y[i] = float(y0[i])
    _residuals(system, n, y, ctx, res)
    result = np.empty(4, dtype=np.float64)
    for i in range(4):
        result[i] = res[i]
    return result


def eval_scalar(ps, int k, x):
    """Evaluate program ``k`` of a packed structure at chart point ``x``."""
    cdef _Ctx ctx = _Ctx(ps)
    cdef double x0 = float(x[0])
    cdef double x1 = float(x[1])
    cdef double x2 = float(x[2]) if len(x) > 2 else 0.0
    return _eval_program(ctx, k, x0, x1, x2)
