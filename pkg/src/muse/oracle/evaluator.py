"""Evaluation of formulas over a finite domain.

``holds`` decides a formula whose free variables are all bound. ``gen``
enumerates assignments that make a formula true, binding variables from
equalities and relation contents where possible instead of enumerating the
whole domain.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Protocol

from ..core import (
    INT,
    And,
    BoolConst,
    Cmp,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    IntConst,
    IntOp,
    Not,
    Or,
    RelApp,
    Var,
    free_vars,
)
from ..core.formula import eval_cmp
from .domain import FiniteDomain, OracleError, Policy

Env = dict
INF = 1 << 30


class RelationSource(Protocol):
    def contains(self, app: RelApp, values: tuple) -> bool: ...

    def matching(self, app: RelApp, pattern: tuple) -> Iterator[tuple]:
        """Tuples agreeing with ``pattern`` at every non-None position."""
        ...


class Evaluator:
    def __init__(self, domain: FiniteDomain, source: RelationSource, bounded: bool = True) -> None:
        self.domain = domain
        self.source = source
        self.bounded = bounded  # restrict variables bound by equalities to the domain
        self.clamp = domain.policy == Policy.CLAMP
        self._fv: dict[int, tuple[Formula, tuple[Var, ...]]] = {}
        self._memo: dict[tuple, bool] = {}
        self._gen_memo: dict[tuple, list[dict]] = {}

    def reset(self) -> None:
        """Forget cached quantifier results (call after relations change)."""
        self._memo.clear()
        self._gen_memo.clear()

    def fv(self, f: Formula) -> tuple[Var, ...]:
        hit = self._fv.get(id(f))
        if hit is None or hit[0] is not f:
            hit = (f, tuple(sorted(free_vars(f), key=lambda v: v.name)))
            self._fv[id(f)] = hit
        return hit[1]

    def unbound(self, f: Formula, env: Env) -> list[Var]:
        return [v for v in self.fv(f) if v.name not in env]

    # -- values -------------------------------------------------------------

    def num(self, e: Formula, env: Env) -> int:
        match e:
            case IntConst(v):
                return self.domain.clamp(v) if self.clamp else v
            case Var(name, _):
                return env[name]
            case IntOp(op, args):
                vals = [self.num(a, env) for a in args]
                if op == "+":
                    r = sum(vals)
                elif op == "-":
                    r = -vals[0] if len(vals) == 1 else vals[0] - vals[1]
                else:
                    r = vals[0] * vals[1]
                return self.domain.clamp(r) if self.clamp else r
        raise OracleError(f"not an integer expression: {e!r}")

    def value(self, e: Formula, env: Env):
        if isinstance(e, (IntConst, IntOp)) or (isinstance(e, Var) and e.sort == INT):
            return self.num(e, env)
        return self.holds(e, env)

    # -- checking -----------------------------------------------------------

    def holds(self, f: Formula, env: Env) -> bool:
        match f:
            case BoolConst(v):
                return v
            case Var(name, _):
                return env[name]
            case Cmp(op, l, r):
                return eval_cmp(op, self.num(l, env), self.num(r, env))
            case Not(a):
                return not self.holds(a, env)
            case And(args):
                return all(self.holds(a, env) for a in args)
            case Or(args):
                return any(self.holds(a, env) for a in args)
            case Implies(l, r):
                return not self.holds(l, env) or self.holds(r, env)
            case Iff(l, r):
                return self.holds(l, env) == self.holds(r, env)
            case RelApp():
                return self.source.contains(f, tuple(self.value(a, env) for a in f.args))
            case Forall(v, body):
                key = (id(f), *(env[u.name] for u in self.fv(f)))
                hit = self._memo.get(key)
                if hit is None:
                    hit = all(self.holds(body, {**env, v.name: d}) for d in self.domain.values(v.sort))
                    self._memo[key] = hit
                return hit
            case Exists(v, body):
                key = (id(f), *(env[u.name] for u in self.fv(f)))
                hit = self._memo.get(key)
                if hit is None:
                    hit = next(self._exists(v, body, env, []), None) is not None
                    self._memo[key] = hit
                return hit
        raise OracleError(f"not a formula: {f!r}")

    # -- generation ---------------------------------------------------------

    def gen(self, f: Formula, env: Env) -> Iterator[Env]:
        """Extensions of ``env`` under which ``f`` holds. Variables of ``f``
        left unbound in a yielded environment may take any value."""
        free = self.unbound(f, env)
        if not free:
            if self.holds(f, env):
                yield env
            return
        match f:
            case Var(name, _):
                yield {**env, name: True}
            case Not(Var(name, _)):
                yield {**env, name: False}
            case And(args):
                yield from self._conj(list(args), env)
            case Or(args):
                yield from self._distinct(f.args, env, free)
            case Exists(v, body):
                key = (id(f), *(env.get(u.name, _UNSET) for u in self.fv(f)))
                deltas = self._gen_memo.get(key)
                if deltas is None:
                    deltas = [
                        {k: x for k, x in e.items() if k not in env}
                        for e in self._exists(v, body, env, free)
                    ]
                    self._gen_memo[key] = deltas
                for d in deltas:
                    yield {**env, **d}
            case Cmp("=", _, _) | Iff() if self._binding(f, env) is not None:
                yield from self._binding(f, env)  # type: ignore[misc]
            case RelApp() if self._rel_shape(f, env):
                yield from self._rel(f, env)
            case _:
                yield from self._enumerate(f, env, free)

    def _enumerate(self, f: Formula, env: Env, free: list[Var]) -> Iterator[Env]:
        for vals in itertools.product(*(self.domain.values(v.sort) for v in free)):
            e = {**env, **{v.name: x for v, x in zip(free, vals)}}
            if self.holds(f, e):
                yield e

    def _distinct(self, parts, env: Env, free: list[Var]) -> Iterator[Env]:
        seen = set()
        for p in parts:
            for e in self.gen(p, env):
                proj = tuple(e.get(v.name, _UNSET) for v in free)
                if all(x is _UNSET for x in proj):
                    yield env
                    return
                if proj not in seen:
                    seen.add(proj)
                    yield e

    def _exists(self, v: Var, body: Formula, env: Env, free: list[Var]) -> Iterator[Env]:
        inner = {k: x for k, x in env.items() if k != v.name}
        seen = set()
        for e in self.gen(body, inner):
            proj = tuple(e.get(u.name, _UNSET) for u in free)
            if proj in seen:
                continue
            seen.add(proj)
            out = {k: x for k, x in e.items() if k != v.name}
            if v.name in env:
                out[v.name] = env[v.name]
            yield out
            if all(x is _UNSET for x in proj):
                return

    def _conj(self, parts: list[Formula], env: Env) -> Iterator[Env]:
        if not parts:
            yield env
            return
        best, best_score = 0, INF
        for i, p in enumerate(parts):
            s = self._score(p, env)
            if s < best_score:
                best, best_score = i, s
                if s == 0:
                    break
        if best_score == INF:
            v = self.unbound(parts[0], env)[0]
            for x in self.domain.values(v.sort):
                yield from self._conj(parts, {**env, v.name: x})
            return
        rest = parts[:best] + parts[best + 1 :]
        for e in self.gen(parts[best], env):
            yield from self._conj(rest, e)

    def _score(self, f: Formula, env: Env) -> int:
        if not self.unbound(f, env):
            return 0
        match f:
            case Var() | Not(Var()):
                return 1
            case Cmp("=", _, _) | Iff():
                return 1 if self._binding(f, env) is not None else INF
            case RelApp():
                if not self._rel_shape(f, env):
                    return INF
                # a lookup with some argument fixed beats a full scan
                anchored = any(not self.unbound(a, env) for a in f.args)
                return 3 if anchored else 6
            case And():
                return 4
            case Or() | Exists():
                return 5
        return INF

    # equalities --------------------------------------------------------------

    def _binding(self, f: Formula, env: Env) -> list[Env] | None:
        """Environments forced by an equality, or None if it cannot bind."""
        if isinstance(f, Iff):
            for a, b in ((f.left, f.right), (f.right, f.left)):
                if isinstance(a, Var) and a.name not in env and not self.unbound(b, env):
                    return [{**env, a.name: self.holds(b, env)}]
            return None
        assert isinstance(f, Cmp)
        for a, b in ((f.left, f.right), (f.right, f.left)):
            if isinstance(a, Var) and a.name not in env and not self.unbound(b, env):
                val = self.num(b, env)
                if self.bounded and not self.domain.contains(val):
                    return []
                return [{**env, a.name: val}]
        if self.clamp:
            return None
        free = self.unbound(f, env)
        if len(free) != 1:
            return None
        v = free[0]
        left, right = _linear(f.left, v, env, self), _linear(f.right, v, env, self)
        if left is None or right is None:
            return None
        coef = left[0] - right[0]
        rhs = right[1] - left[1]
        if coef == 0:
            return None
        if rhs % coef:
            return []
        val = rhs // coef
        if self.bounded and not self.domain.contains(val):
            return []
        return [{**env, v.name: val}]

    # relations ---------------------------------------------------------------

    def _rel_shape(self, app: RelApp, env: Env) -> bool:
        return all(
            (isinstance(a, Var) and a.name not in env) or not self.unbound(a, env) for a in app.args
        )

    def _rel(self, app: RelApp, env: Env) -> Iterator[Env]:
        pattern = []
        slots: list[tuple[int, str]] = []
        for i, a in enumerate(app.args):
            if isinstance(a, Var) and a.name not in env:
                pattern.append(None)
                slots.append((i, a.name))
            else:
                pattern.append(self.value(a, env))
        for tup in self.source.matching(app, tuple(pattern)):
            e = dict(env)
            for i, name in slots:
                if name in e and e[name] != tup[i]:
                    break
                e[name] = tup[i]
            else:
                yield e


class _Unset:
    def __repr__(self) -> str:
        return "_UNSET"


_UNSET = _Unset()


def _linear(e: Formula, v: Var, env: Env, ev: Evaluator) -> tuple[int, int] | None:
    """``e`` as ``a*v + c``, or None when not linear in ``v``."""
    match e:
        case IntConst(c):
            return (0, c)
        case Var(name, _):
            return (1, 0) if name == v.name else (0, env[name])
        case IntOp("+", args):
            acc = (0, 0)
            for a in args:
                t = _linear(a, v, env, ev)
                if t is None:
                    return None
                acc = (acc[0] + t[0], acc[1] + t[1])
            return acc
        case IntOp("-", (a,)):
            t = _linear(a, v, env, ev)
            return None if t is None else (-t[0], -t[1])
        case IntOp("-", (a, b)):
            s, t = _linear(a, v, env, ev), _linear(b, v, env, ev)
            return None if s is None or t is None else (s[0] - t[0], s[1] - t[1])
        case IntOp("*", (a, b)):
            s, t = _linear(a, v, env, ev), _linear(b, v, env, ev)
            if s is None or t is None:
                return None
            if s[0] == 0:
                return (s[1] * t[0], s[1] * t[1])
            if t[0] == 0:
                return (t[1] * s[0], t[1] * s[1])
    return None


__all__ = ["Evaluator", "RelationSource"]
