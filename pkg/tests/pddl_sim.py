"""Tiny ground-level PDDL2.1 executor used as a test oracle.

Only what the emitted domains use: ``and``/``not`` literals, ``at start`` and
``at end`` timing, fixed durations and instantaneous actions. At equal times,
action ends happen first, then instantaneous actions, then starts.
"""

from __future__ import annotations

from fractions import Fraction


def sexpr(text: str) -> list:
    stack: list[list] = [[]]
    for line in text.splitlines():
        for tok in line.split(";", 1)[0].replace("(", " ( ").replace(")", " ) ").split():
            if tok == "(":
                stack.append([])
            elif tok == ")":
                top = stack.pop()
                stack[-1].append(top)
            else:
                stack[-1].append(tok.lower())
    assert len(stack) == 1
    return stack[0]


def _conj(form) -> list:
    if form and form[0] == "and":
        return [x for f in form[1:] for x in _conj(f)]
    return [form] if form else []


def _literal(form):
    if form[0] == "not":
        return False, tuple(form[1])
    return True, tuple(form)


class Domain:
    def __init__(self, text: str):
        (define,) = sexpr(text)
        self.actions = {}
        for f in define:
            if not (isinstance(f, list) and f and f[0] in (":durative-action", ":action")):
                continue
            name, kv = f[1], dict(zip(f[2::2], f[3::2]))
            params = [t for t in kv[":parameters"] if t.startswith("?")]
            if f[0] == ":durative-action":
                duration = Fraction(kv[":duration"][2])
                conds = [(c[1], _literal(c[2])) for c in _conj(kv[":condition"])]
                effects = [(e[1], _literal(e[2])) for e in _conj(kv[":effect"])]
            else:
                duration = Fraction(0)
                conds = [("start", _literal(c)) for c in _conj(kv[":precondition"])]
                effects = [("start", _literal(e)) for e in _conj(kv[":effect"])]
            self.actions[name] = (params, duration, conds, effects)


class Problem:
    def __init__(self, text: str):
        (define,) = sexpr(text)
        blocks = {f[0]: f[1:] for f in define if isinstance(f, list) and f}
        self.init = {tuple(a) for a in blocks[":init"] if a[0] != "="}
        self.goal = [_literal(g) for g in _conj(blocks[":goal"][0])]


def _ground(atom, binding):
    return tuple(binding.get(t, t) for t in atom)


def simulate(domain: Domain, problem: Problem, steps) -> tuple[list[str], set]:
    """Run ``steps`` (start, action, args) and return (errors, final state)."""
    state = set(problem.init)
    events = []
    for i, (t, name, args) in enumerate(steps):
        if name not in domain.actions:
            return [f"unknown action {name}"], state
        params, dur, conds, effects = domain.actions[name]
        if len(args) != len(params):
            return [f"{name}: arity"], state
        binding = dict(zip(params, args))
        if dur == 0:
            events.append((Fraction(t), 1, i, "start", binding))
        else:
            events.append((Fraction(t), 2, i, "start", binding))
            events.append((Fraction(t) + dur, 0, i, "end", binding))
    errors = []
    for t, _, i, when, binding in sorted(events, key=lambda e: e[:3]):
        _, _, conds, effects = domain.actions[steps[i][1]]
        for w, (positive, atom) in conds:
            if w == when and ((_ground(atom, binding) in state) != positive):
                errors.append(f"t={t} step {i} {steps[i][1]}: {'' if positive else 'not '}{atom} fails")
        eff = [(p, _ground(a, binding)) for w, (p, a) in effects if w == when]
        state -= {a for p, a in eff if not p}
        state |= {a for p, a in eff if p}
    for positive, atom in problem.goal:
        if (atom in state) != positive:
            errors.append(f"goal {atom} unmet")
    return errors, state
