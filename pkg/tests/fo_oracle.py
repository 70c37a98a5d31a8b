"""Pointwise first-order oracle, independent of the sheaf machinery.

Structures are plain dicts:

  o["base_worlds"]  list of worlds
  o["base_rel"]     {agent: set of world pairs}
  o["individuals"]  list of individuals
  o["pi"]           {individual: world}
  o["dom_rel"]      {agent: set of individual pairs}
  o["fun"]          {fname: {arg-tuple: value}}
  o["rel_interp"]   {Fname: set of worlds (arity 0) or set of tuples}
  o["arity"]        {symbol: int}

Satisfaction is evaluated at a world plus an environment mapping variables
to individuals in that world's fiber.  Updates rebuild the structure with
tuple worlds and tuple individuals, mirroring nothing of the package's
fibered-power code.
"""

import itertools

from delmc.formulas import (
    And,
    Bot,
    Box,
    DelBox,
    DelDia,
    Dia,
    Exists,
    Forall,
    Fun,
    Imp,
    Not,
    Or,
    Pred,
    Top,
    Var,
)


def fiber(o, w):
    return [a for a in o["individuals"] if o["pi"][a] == w]


def term_val(o, w, env, t):
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Fun):
        if not t.args:
            # a constant is a section: one individual per world
            return o["fun"][t.name][w]
        args = tuple(term_val(o, w, env, a) for a in t.args)
        return o["fun"][t.name][args]
    raise AssertionError(f"oracle: unsupported term {type(t).__name__}")


def update(o, ev, registry):
    """Pullback update of the whole structure by an event model."""
    survivors = {
        e: {w for w in o["base_worlds"] if sat(o, w, {}, ev["pre"][e], registry)}
        for e in ev["events"]
    }
    worlds = [(w, e) for w in o["base_worlds"] for e in ev["events"] if w in survivors[e]]
    individuals = [
        (a, e) for a in o["individuals"] for e in ev["events"] if o["pi"][a] in survivors[e]
    ]
    base_rel = {
        ag: {
            ((w1, e1), (w2, e2))
            for (w1, e1) in worlds
            for (w2, e2) in worlds
            if (w1, w2) in o["base_rel"][ag] and (e1, e2) in ev["rel"][ag]
        }
        for ag in o["base_rel"]
    }
    dom_rel = {
        ag: {
            ((a, e1), (b, e2))
            for (a, e1) in individuals
            for (b, e2) in individuals
            if (a, b) in o["dom_rel"][ag] and (e1, e2) in ev["rel"][ag]
        }
        for ag in o["dom_rel"]
    }
    ind_set = set(individuals)
    fun = {}
    for fname, table in o["fun"].items():
        new_table = {}
        if o["arity"][fname] == 0:
            for w, value in table.items():
                for e in ev["events"]:
                    if w in survivors[e]:
                        new_table[(w, e)] = (value, e)
        else:
            for args, value in table.items():
                for e in ev["events"]:
                    new_args = tuple((a, e) for a in args)
                    if all(na in ind_set for na in new_args):
                        new_table[new_args] = (value, e)
        fun[fname] = new_table
    rel_interp = {}
    for fname, members in o["rel_interp"].items():
        if o["arity"][fname] == 0:
            rel_interp[fname] = {(w, e) for (w, e) in worlds if w in members}
        else:
            ind_set = set(individuals)
            rel_interp[fname] = {
                tuple((a, e) for a in tup)
                for tup in members
                for e in ev["events"]
                if all((a, e) in ind_set for a in tup)
            }
    return {
        "base_worlds": worlds,
        "base_rel": base_rel,
        "individuals": individuals,
        "pi": {(a, e): (o["pi"][a], e) for (a, e) in individuals},
        "dom_rel": dom_rel,
        "fun": fun,
        "rel_interp": rel_interp,
        "arity": dict(o["arity"]),
    }


def sat(o, w, env, phi, registry=None):
    registry = registry or {}
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bot):
        return False
    if isinstance(phi, Pred):
        if not phi.args:
            return w in o["rel_interp"][phi.name]
        vals = tuple(term_val(o, w, env, t) for t in phi.args)
        return vals in o["rel_interp"][phi.name]
    if isinstance(phi, Not):
        return not sat(o, w, env, phi.body, registry)
    if isinstance(phi, And):
        return sat(o, w, env, phi.left, registry) and sat(o, w, env, phi.right, registry)
    if isinstance(phi, Or):
        return sat(o, w, env, phi.left, registry) or sat(o, w, env, phi.right, registry)
    if isinstance(phi, Imp):
        return (not sat(o, w, env, phi.left, registry)) or sat(o, w, env, phi.right, registry)
    if isinstance(phi, Forall):
        return all(
            sat(o, w, dict(env, **{phi.var: b}), phi.body, registry) for b in fiber(o, w)
        )
    if isinstance(phi, Exists):
        return any(
            sat(o, w, dict(env, **{phi.var: b}), phi.body, registry) for b in fiber(o, w)
        )
    if isinstance(phi, (Box, Dia)):
        names = sorted(env)
        steps = []
        if not names:
            steps = [
                (w2, {}) for (w1, w2) in o["base_rel"][phi.agent] if w1 == w
            ]
        else:
            choices = [
                [b for (a, b) in o["dom_rel"][phi.agent] if a == env[x]] for x in names
            ]
            for combo in itertools.product(*choices):
                targets = {o["pi"][b] for b in combo}
                if len(targets) == 1:
                    steps.append((next(iter(targets)), dict(zip(names, combo))))
        if isinstance(phi, Box):
            return all(sat(o, w2, env2, phi.body, registry) for (w2, env2) in steps)
        return any(sat(o, w2, env2, phi.body, registry) for (w2, env2) in steps)
    if isinstance(phi, (DelBox, DelDia)):
        ev = registry[phi.model]
        pre_true = sat(o, w, {}, ev["pre"][phi.event], registry)
        if isinstance(phi, DelBox) and not pre_true:
            return True
        if isinstance(phi, DelDia) and not pre_true:
            return False
        o2 = update(o, ev, registry)
        env2 = {x: (a, phi.event) for x, a in env.items()}
        return sat(o2, (w, phi.event), env2, phi.body, registry)
    raise AssertionError(f"oracle: unsupported node {type(phi).__name__}")


def tuple_extension(o, context, phi, registry=None):
    """All (world, assignment-tuple) pairs satisfying the formula."""
    out = set()
    for w in o["base_worlds"]:
        fib = fiber(o, w)
        for combo in itertools.product(fib, repeat=len(context)):
            env = dict(zip(context, combo))
            if sat(o, w, env, phi, registry):
                out.add((w, combo))
    return out


def from_sheaf_model(model):
    """Flatten a package SheafModel into oracle form (data only)."""
    sheaf = model.sheaf
    base = sheaf.base
    total = sheaf.total
    pi = {a: sheaf.proj(a) for a in total.carrier}
    fun = {}
    arity = {}
    for fname, n in model.signature.function_symbols:
        arity[fname] = n
        table = {}
        fm = model.fn_interp_map[fname]
        power = model.power(n)
        for lbl in power.carrier:
            key = lbl if n == 0 else power.tuple_of(lbl)
            table[key] = fm(lbl)
        fun[fname] = table
    rel_interp = {}
    for rname, n in model.signature.relation_symbols:
        arity[rname] = n
        sub = model.rel_interp_map[rname]
        if n == 0:
            rel_interp[rname] = set(sub.members)
        else:
            power = model.power(n)
            rel_interp[rname] = {power.tuple_of(lbl) for lbl in sub.members}
    return {
        "base_worlds": list(base.carrier.elements),
        "base_rel": {a: set(base.rel(a).pairs) for a in base.agents},
        "individuals": list(total.carrier.elements),
        "pi": pi,
        "dom_rel": {a: set(total.rel(a).pairs) for a in total.agents},
        "fun": fun,
        "rel_interp": rel_interp,
        "arity": arity,
    }


def from_event_model(ev):
    frame = ev.frame
    return {
        "events": list(frame.carrier.elements),
        "rel": {a: set(frame.rel(a).pairs) for a in frame.agents},
        "pre": {e: ev.pre(e) for e in frame.carrier.elements},
    }
