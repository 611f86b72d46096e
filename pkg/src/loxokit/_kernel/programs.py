"""Compile scalar expressions to flat stack programs for the integrator core.

Both integrator backends (compiled and pure Python) interpret the same
instruction stream with the same operation order, so a given run produces
identical doubles on either backend.  A program is a flat ``int32`` array of
``(opcode, argument)`` pairs plus a shared constant pool.

A packed structure bundles the programs needed to evaluate a Moebius
structure at a chart point: the conformal factor of the metric against the
flat chart metric, the components of ``grad log(omega)``, the Rho tensor and
(optionally) its coordinate derivatives.
"""

from __future__ import annotations

import numpy as np

from .. import expr as ex

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POW = 7
OP_EXP = 8
OP_LOG = 9
OP_SIN = 10
OP_COS = 11
OP_SINH = 12
OP_COSH = 13
OP_SQRT = 14
OP_DUP = 15
OP_RECIP = 16

_CALL_OPS = {
    "exp": OP_EXP,
    "log": OP_LOG,
    "sin": OP_SIN,
    "cos": OP_COS,
    "sinh": OP_SINH,
    "cosh": OP_COSH,
    "sqrt": OP_SQRT,
}

_VAR_SLOTS = {"x": 0, "y": 1, "z": 2}


class ProgramBuilder:
    def __init__(self):
        self.code: list[int] = []
        self.consts: list[float] = []

    def const_index(self, v: float) -> int:
        # exact bit-match lookup keeps the pool small without changing values
        for i, c in enumerate(self.consts):
            if c == v and (v != 0.0 or str(c) == str(v)):
                return i
        self.consts.append(v)
        return len(self.consts) - 1

    def emit(self, op: int, arg: int = 0):
        self.code.append(op)
        self.code.append(arg)

    def compile(self, e: ex.Expr) -> None:
        if isinstance(e, ex.Num):
            self.emit(OP_CONST, self.const_index(e.value))
            return
        if isinstance(e, ex.Var):
            try:
                self.emit(OP_VAR, _VAR_SLOTS[e.name])
            except KeyError:
                raise ValueError(f"variable {e.name!r} is not a chart coordinate")
            return
        if isinstance(e, ex.Neg):
            self.compile(e.arg)
            self.emit(OP_NEG)
            return
        if isinstance(e, ex.Call):
            self.compile(e.arg)
            self.emit(_CALL_OPS[e.fn])
            return
        if isinstance(e, ex.Bin):
            if e.op == "^":
                self.compile_pow(e)
                return
            self.compile(e.left)
            self.compile(e.right)
            self.emit({"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}[e.op])
            return
        raise TypeError(f"not an Expr: {e!r}")

    def compile_pow(self, e: ex.Bin) -> None:
        c = e.right.value if isinstance(e.right, ex.Num) else None
        if c is None:
            raise ValueError("exponent of ^ must be a constant")
        k = int(c)
        if c == k and 2 <= abs(k) <= 8:
            # u^k as a left product chain of |k| copies; reciprocal if k < 0
            self.compile(e.left)
            for _ in range(abs(k) - 1):
                self.emit(OP_DUP)
            for _ in range(abs(k) - 1):
                self.emit(OP_MUL)
            if k < 0:
                self.emit(OP_RECIP)
            return
        self.compile(e.left)
        self.emit(OP_POW, self.const_index(c))


def program_stack_depth(code: list[int]) -> int:
    depth = 0
    peak = 0
    for i in range(0, len(code), 2):
        op = code[i]
        if op in (OP_CONST, OP_VAR, OP_DUP):
            depth += 1
        elif op in (OP_ADD, OP_SUB, OP_MUL, OP_DIV):
            depth -= 1
        peak = max(peak, depth)
    return peak


def tri_index(a: int, b: int, n: int) -> int:
    """Index of the (a, b) entry, a <= b, in upper-triangular row order."""
    if a > b:
        a, b = b, a
    return a * n - a * (a - 1) // 2 + (b - a)


SYSTEM_CIRCLE = 1
SYSTEM_LOXODROME = 2
SYSTEM_DK4 = 3

SYSTEM_NAMES = {SYSTEM_CIRCLE: "circle", SYSTEM_LOXODROME: "loxodrome", SYSTEM_DK4: "dk4"}


def state_dim(system: int, n: int) -> int:
    if system == SYSTEM_CIRCLE:
        return 3 * n
    if system == SYSTEM_LOXODROME:
        return 4 * n + 1
    if system == SYSTEM_DK4:
        return 4 * n
    raise ValueError(f"unknown system id {system}")


class PackedStructure:
    """Program table for one Moebius structure on a single chart.

    Layout (program indices):
      0                 : omega (metric = omega^2 * delta)
      1 .. n            : d_a log(omega)
      next n(n+1)/2     : P_ab, upper-triangular row order
      next n*n(n+1)/2   : d_c P_ab (only when with_drho), c-major
    """

    def __init__(self, n: int, omega: ex.Expr | None, rho, with_drho: bool):
        if n not in (2, 3):
            raise ValueError("chart dimension must be 2 or 3")
        self.n = n
        self.with_drho = bool(with_drho)
        self.metric_is_flat = omega is None or omega == ex.Num(1.0)

        omega_e = ex.Num(1.0) if omega is None else omega
        names = ("x", "y", "z")[:n]
        log_omega_grad = []
        for a in range(n):
            if self.metric_is_flat:
                log_omega_grad.append(ex.Num(0.0))
            else:
                log_omega_grad.append(ex.div(ex.differentiate(omega_e, names[a]), omega_e))

        if rho is None:
            rho = [[ex.Num(0.0)] * n for _ in range(n)]
        self.rho_is_zero = all(
            isinstance(rho[a][b], ex.Num) and rho[a][b].value == 0.0
            for a in range(n)
            for b in range(n)
        )

        builder = ProgramBuilder()
        starts = [0]

        def push(e: ex.Expr):
            builder.compile(e)
            starts.append(len(builder.code) // 2)

        push(omega_e)
        for a in range(n):
            push(log_omega_grad[a])
        for a in range(n):
            for b in range(a, n):
                push(rho[a][b])
        if with_drho:
            for c in range(n):
                dname = names[c]
                for a in range(n):
                    for b in range(a, n):
                        push(ex.differentiate(rho[a][b], dname))

        self.codes = np.asarray(builder.code, dtype=np.int32)
        self.starts = np.asarray(starts, dtype=np.int32)
        self.consts = np.asarray(builder.consts if builder.consts else [0.0], dtype=np.float64)
        self.maxstack = program_stack_depth(list(self.codes))
        if self.maxstack > 60:
            raise ValueError("expression too deep for the fixed evaluation stack")
