"""Dense state-space evaluation traces: the brute-force differentiation oracle.

A function in n variables built from mu elementary steps is modelled on the
state space R^(n+mu): inputs are embedded into the first n slots, step i
fills slot n+i from earlier slots, and a final projection selects the m
output slots.  Differentiation is then literal linear algebra: the Jacobian
of step i is the identity with row n+i replaced by the step's gradient
(spread over its argument slots, zero elsewhere, including the diagonal),
and directional derivatives / adjoints are right-to-left products of those
materialised matrices against embedded seed vectors.

Everything here favours transparency over speed; matrices are dense and the
state-space dimension is capped.  Row sums use exact (correctly rounded)
accumulation so results do not depend on summation order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .catalog import DomainError, ElementaryFn, const_fn
from .expr import FunctionDef, Variable, linearize

#: Dense matrices only exist for validation; refuse absurd state spaces.
MAX_STATE_DIM = 512

FORWARD = "forward"
REVERSE = "reverse"


@dataclass(frozen=True)
class Step:
    """One elementary transition: fn applied to earlier slots, writing
    slot `out_slot` (all indices 0-based)."""

    fn: ElementaryFn
    arg_slots: tuple[int, ...]
    out_slot: int


@dataclass(frozen=True)
class StateProgram:
    """A straight-line program over the state space R^(n+mu)."""

    n: int
    m: int
    steps: tuple[Step, ...]
    output_slots: tuple[int, ...]

    @property
    def mu(self) -> int:
        return len(self.steps)

    @property
    def dim(self) -> int:
        return self.n + self.mu


@dataclass
class TraceRecord:
    """The mu+1 state vectors of a run, optionally paired with forward
    derivative states or reverse adjoint states.

    `derivative_states[i]` is the derivative state after i steps (forward)
    or the adjoint state with mu-i reverse steps applied (reverse), so both
    sequences align index-for-index with `states`.
    """

    states: list[list[float]]
    derivative_states: Optional[list[list[float]]] = None
    kind: Optional[str] = None

    def to_csv(self) -> str:
        """One row per state vector; exact shortest round-trip decimals."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        dim = len(self.states[0])
        writer.writerow(["vector"] + [f"slot{i}" for i in range(dim)])
        for i, state in enumerate(self.states):
            writer.writerow([f"v{i}"] + [repr(x) for x in state])
        if self.derivative_states is not None:
            label = "vdot" if self.kind == FORWARD else "vbar"
            for i, state in enumerate(self.derivative_states):
                writer.writerow([f"{label}{i}"] + [repr(x) for x in state])
        return buf.getvalue()


def compile_program(fdef: FunctionDef) -> StateProgram:
    """Lay the definition out on the state space.

    Constants become zero-argument steps ahead of the scheduled operations;
    output roots that are not themselves trailing steps are realised by
    explicit copy steps, keeping the output projection a pure slot selection.
    """
    consts, steps = linearize(fdef)
    n = fdef.n
    slot_of: dict[int, int] = {}
    program_steps: list[Step] = []
    next_slot = n
    for node in consts:
        slot_of[id(node)] = next_slot
        program_steps.append(Step(const_fn(node.value), (), next_slot))
        next_slot += 1

    def slot(node) -> int:
        if isinstance(node, Variable):
            return node.index - 1
        return slot_of[id(node)]

    for step in steps:
        arg_slots = tuple(slot(child) for child in step.args)
        slot_of[id(step)] = next_slot
        program_steps.append(Step(step.fn, arg_slots, next_slot))
        next_slot += 1

    if next_slot > MAX_STATE_DIM:
        raise ValueError(f"state dimension {next_slot} exceeds {MAX_STATE_DIM}")

    # The last m steps produce the outputs in order (copies were inserted
    # for any output that needed one), so the projection reads their slots.
    tails = program_steps[len(program_steps) - fdef.m :]
    output_slots = tuple(t.out_slot for t in tails)
    return StateProgram(n, fdef.m, tuple(program_steps), output_slots)


def forward_trace(p: StateProgram, c: Sequence[float]) -> TraceRecord:
    """Run the value sweep, recording every state vector."""
    if len(c) != p.n:
        raise ValueError(f"expected {p.n} inputs, got {len(c)}")
    state = [float(x) for x in c] + [0.0] * p.mu
    states = [list(state)]
    for i, step in enumerate(p.steps):
        args = [state[s] for s in step.arg_slots]
        try:
            step.fn.check_domain(args)
        except DomainError as err:
            raise err.at(f"step {i + 1} ({step.fn.name})") from None
        state[step.out_slot] = step.fn.value(args)
        states.append(list(state))
    return TraceRecord(states)


def step_jacobian(p: StateProgram, i: int, state: Sequence[float]) -> np.ndarray:
    """The dense Jacobian of transition i at the given pre-state: identity
    with row n+i replaced by the step's gradient (zero diagonal included)."""
    step = p.steps[i]
    mat = np.eye(p.dim)
    row = np.zeros(p.dim)
    args = [state[s] for s in step.arg_slots]
    for s, d in zip(step.arg_slots, step.fn.partials(args)):
        row[s] += d
    mat[step.out_slot, :] = row
    return mat

def _matvec(mat: np.ndarray, vec: Sequence[float]) -> list[float]:
    # Exactly rounded row sums: immune to accumulation-order effects.
    prods = mat * np.asarray(vec)
    return [math.fsum(row) for row in prods]


def _embed_matrix(p: StateProgram) -> np.ndarray:
    px = np.zeros((p.dim, p.n))
    for i in range(p.n):
        px[i, i] = 1.0
    return px


def _project_matrix(p: StateProgram) -> np.ndarray:
    py = np.zeros((p.m, p.dim))
    for j, s in enumerate(p.output_slots):
        py[j, s] = 1.0
    return py


def forward_derivative_trace(
    p: StateProgram, c: Sequence[float], xdot: Sequence[float]
) -> TraceRecord:
    """Forward sweep carrying both the states and the derivative states."""
    if len(xdot) != p.n:
        raise ValueError(f"expected a direction of length {p.n}")
    record = forward_trace(p, c)
    vdot = _matvec(_embed_matrix(p), xdot)
    derivative_states = [list(vdot)]
    for i in range(p.mu):
        mat = step_jacobian(p, i, record.states[i])
        vdot = _matvec(mat, vdot)
        derivative_states.append(list(vdot))
    record.derivative_states = derivative_states
    record.kind = FORWARD
    return record


def forward_derivative(
    p: StateProgram, c: Sequence[float], xdot: Sequence[float]
) -> list[float]:
    """J_f(c) . xdot via the right-to-left dense matrix product."""
    record = forward_derivative_trace(p, c, xdot)
    return _matvec(_project_matrix(p), record.derivative_states[-1])


def reverse_derivative_trace(
    p: StateProgram, c: Sequence[float], ybar: Sequence[float]
) -> TraceRecord:
    """Value sweep, then the transposed Jacobians applied last step first."""
    if len(ybar) != p.m:
        raise ValueError(f"expected a covector of length {p.m}")
    record = forward_trace(p, c)
    vbar = _matvec(_project_matrix(p).T, ybar)
    adjoints = [list(vbar)]
    for i in range(p.mu - 1, -1, -1):
        mat = step_jacobian(p, i, record.states[i])
        vbar = _matvec(mat.T, vbar)
        adjoints.append(list(vbar))
    adjoints.reverse()  # align index i with "i steps of the value sweep done"
    record.derivative_states = adjoints
    record.kind = REVERSE
    return record


def reverse_derivative(
    p: StateProgram, c: Sequence[float], ybar: Sequence[float]
) -> list[float]:
    """ybar . J_f(c), computed through the transposed product."""
    record = reverse_derivative_trace(p, c, ybar)
    return _matvec(_embed_matrix(p).T, record.derivative_states[0])
