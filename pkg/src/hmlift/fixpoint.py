"""Greatest fixed points by descending Kleene iteration from the top of the fibre."""

from dataclasses import dataclass

from .fibres import BOOL, RELATION, fibre_leq


class FixpointDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class FixpointResult:
    value: object
    trace: tuple        # top, step(top), ..., value; empty when not retained
    steps: int          # least i with trace[i] == trace[i + 1]


def iteration_bound(top):
    """Iterations after which a monotone step on this fibre must have stabilized."""
    n = top.size
    entries = n * n if top.kind == RELATION else n
    if top.lattice is BOOL:
        return entries + 2
    # Level entries only move down; the cap is a safety net, not a tight bound.
    return (n * n + 2) * (n * n + 2)


def gfp(step, top, keep_trace=True, bound=None):
    bound = iteration_bound(top) if bound is None else bound
    trace = [top]
    current = top
    for i in range(bound + 1):
        nxt = step(current)
        if nxt == current:
            return FixpointResult(current, tuple(trace) if keep_trace else (), i)
        current = nxt
        if keep_trace:
            trace.append(current)
    raise FixpointDivergence(f"no fixed point after {bound} iterations on a fibre over {top.size} states")


def is_postfixed(step, R):
    return fibre_leq(R, step(R))


def approximant(step, top, i, result=None):
    """The i-th Kleene approximant step^i(top); constant once the chain stabilizes."""
    if result is not None and result.trace:
        return result.trace[min(i, result.steps)]
    current = top
    for _ in range(i):
        nxt = step(current)
        if nxt == current:
            break
        current = nxt
    return current
