"""Expression trees mapping one source feature X to a new feature.

A tree is stored as an immutable prefix-order tuple of primitive names,
e.g. ``("pow", "neg", "X", "X")`` for ``(pow (neg X) X)``.  Trees are
hashable and compare structurally, which lets callers cache per-tree
outputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

import numpy as np

__all__ = [
    "TERMINAL",
    "UNARY",
    "BINARY",
    "TERNARY",
    "FUNCTIONS",
    "ARITY",
    "SexprError",
    "GpTree",
    "Individual",
    "evaluate_tree",
    "to_sexpr",
    "parse_sexpr",
    "random_tree",
]

TERMINAL = "X"
UNARY = ("sin", "tan", "tanh", "log", "exp", "sqrt", "square", "cube", "neg")
BINARY = ("+", "mul", "max", "min", "pow")
TERNARY = ("if",)
FUNCTIONS = UNARY + BINARY + TERNARY

ARITY = {TERMINAL: 0}
ARITY.update({f: 1 for f in UNARY})
ARITY.update({f: 2 for f in BINARY})
ARITY.update({f: 3 for f in TERNARY})
_ARITY_GET = ARITY.__getitem__


def _if(cond, then, other):
    return np.where(cond >= 0, then, other)


_OPS = {
    "sin": np.sin,
    "tan": np.tan,
    "tanh": np.tanh,
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "square": np.square,
    "cube": lambda a: a * a * a,
    "neg": np.negative,
    "+": np.add,
    "mul": np.multiply,
    "max": np.maximum,
    "min": np.minimum,
    "pow": np.power,
    "if": _if,
}


class SexprError(ValueError):
    """Malformed s-expression; ``position`` is the offending character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class GpTree:
    """Immutable expression tree in prefix notation."""

    __slots__ = ("program", "depth", "_hash")

    def __init__(self, program):
        program = tuple(program)
        # Walk the prefix sequence once: checks arity and computes depth.
        pending = []
        depth = 0
        for pos, tok in enumerate(program):
            if tok not in ARITY:
                raise ValueError(f"unknown primitive {tok!r}")
            if not pending and pos > 0:
                raise ValueError("trailing nodes after a complete tree")
            depth = max(depth, len(pending) + 1)
            if pending:
                pending[-1] -= 1
            if ARITY[tok]:
                pending.append(ARITY[tok])
            while pending and pending[-1] == 0:
                pending.pop()
        if not program or pending:
            raise ValueError("incomplete tree: missing arguments")
        self.program = program
        self.depth = depth
        self._hash = hash(program)

    @classmethod
    def _unchecked(cls, program: tuple) -> "GpTree":
        """Build from a program known to be well formed (e.g. a splice)."""
        tree = object.__new__(cls)
        pending = []
        depth = 0
        for tok in program:
            if len(pending) >= depth:
                depth = len(pending) + 1
            if pending:
                pending[-1] -= 1
            a = _ARITY_GET(tok)
            if a:
                pending.append(a)
            while pending and not pending[-1]:
                pending.pop()
        tree.program = program
        tree.depth = depth
        tree._hash = hash(program)
        return tree

    @property
    def size(self) -> int:
        return len(self.program)

    def __len__(self):
        return len(self.program)

    def __eq__(self, other):
        return isinstance(other, GpTree) and self.program == other.program

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"GpTree({to_sexpr(self)!r})"

    def subtree_end(self, start: int) -> int:
        """Index one past the subtree rooted at ``start``."""
        need = 1
        end = start
        prog = self.program
        while need:
            need += ARITY[prog[end]] - 1
            end += 1
        return end

    def subtree(self, start: int) -> tuple:
        return self.program[start:self.subtree_end(start)]

    def replace(self, start: int, sub) -> "GpTree":
        """New tree with the subtree at ``start`` replaced by ``sub``."""
        if isinstance(sub, GpTree):
            return GpTree._unchecked(
                self.program[:start] + sub.program + self.program[self.subtree_end(start):]
            )
        return GpTree(self.program[:start] + tuple(sub) + self.program[self.subtree_end(start):])


@dataclass(eq=False)
class Individual:
    """A fixed-length ordered set of trees sharing one source feature.

    ``fitness`` is None both before evaluation and for an invalid
    individual; ``evaluated`` tells the two apart.
    """

    trees: tuple
    fitness: Any = None
    evaluated: bool = False

    def __post_init__(self):
        self.trees = tuple(self.trees)

    @property
    def size(self) -> int:
        return sum(t.size for t in self.trees)

    @property
    def depth(self) -> int:
        return max(t.depth for t in self.trees)

    def with_tree(self, index: int, tree: GpTree) -> "Individual":
        trees = list(self.trees)
        trees[index] = tree
        return Individual(tuple(trees))

    def same_structure(self, other: "Individual") -> bool:
        return self.trees == other.trees


def evaluate_tree(tree: GpTree, inputs) -> np.ndarray | None:
    """Apply ``tree`` elementwise to ``inputs``.

    Returns None (an invalid output) if any output element is NaN or
    infinite.  No operator is protected.
    """
    x = np.asarray(inputs, dtype=float)
    stack = []
    with np.errstate(all="ignore"):
        for tok in reversed(tree.program):
            if tok == TERMINAL:
                stack.append(x)
                continue
            arity = ARITY[tok]
            if arity == 1:
                stack.append(_OPS[tok](stack.pop()))
            elif arity == 2:
                a = stack.pop()
                stack.append(_OPS[tok](a, stack.pop()))
            else:
                a = stack.pop()
                b = stack.pop()
                stack.append(_if(a, b, stack.pop()))
    out = stack.pop()
    if out is x:
        out = x.copy()
    if not np.all(np.isfinite(out)):
        return None
    return out


def to_sexpr(tree: GpTree) -> str:
    parts = []
    pending = []
    for tok in tree.program:
        arity = ARITY[tok]
        if arity:
            parts.append(f"({tok}")
            pending.append(arity)
            continue
        parts.append(tok)
        while pending:
            pending[-1] -= 1
            if pending[-1]:
                break
            pending.pop()
            parts[-1] += ")"
    return " ".join(parts)


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def parse_sexpr(text: str) -> GpTree:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.lastindex:
            tokens.append((m.group(m.lastindex), start))
        pos = m.end()
    if not tokens:
        raise SexprError("empty expression", 0)

    program = []
    idx = 0

    def expr():
        nonlocal idx
        if idx >= len(tokens):
            raise SexprError("unexpected end of input", len(text))
        tok, at = tokens[idx]
        if tok == TERMINAL:
            idx += 1
            program.append(TERMINAL)
            return
        if tok != "(":
            raise SexprError(f"unexpected token {tok!r}", at)
        idx += 1
        if idx >= len(tokens):
            raise SexprError("unexpected end of input", len(text))
        op, op_at = tokens[idx]
        if op not in ARITY or op == TERMINAL:
            raise SexprError(f"unknown operator {op!r}", op_at)
        idx += 1
        program.append(op)
        n_args = 0
        while idx < len(tokens) and tokens[idx][0] != ")":
            if n_args == ARITY[op]:
                raise SexprError(f"{op} takes {ARITY[op]} argument(s), got more", tokens[idx][1])
            expr()
            n_args += 1
        if idx >= len(tokens):
            raise SexprError("missing ')'", len(text))
        if n_args != ARITY[op]:
            raise SexprError(f"{op} takes {ARITY[op]} argument(s), got {n_args}", tokens[idx][1])
        idx += 1

    expr()
    if idx != len(tokens):
        raise SexprError("trailing input", tokens[idx][1])
    return GpTree(program)


def random_tree(max_depth: int, method: str, rng: np.random.Generator) -> GpTree:
    """Random tree of depth <= max_depth.

    ``full`` places functions at every level above max_depth; ``grow``
    picks uniformly among all functions and the terminal at each node.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if method not in ("full", "grow"):
        raise ValueError(f"unknown method {method!r}")
    n_func = len(FUNCTIONS)
    program = []
    # Stack of depths at which the remaining open argument slots sit.
    open_slots = [1]
    while open_slots:
        depth = open_slots.pop()
        if depth >= max_depth:
            program.append(TERMINAL)
            continue
        if method == "full":
            choice = int(rng.integers(n_func))
        else:
            choice = int(rng.integers(n_func + 1))
        if choice == n_func:
            program.append(TERMINAL)
            continue
        func = FUNCTIONS[choice]
        program.append(func)
        open_slots.extend([depth + 1] * ARITY[func])
    return GpTree._unchecked(tuple(program))
