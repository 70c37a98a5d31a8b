"""JSON documents for models: loading with validation, and dumping back.

Every document carries ``"format_version": 1`` and a ``"kind"`` of
``"kripke-model"``, ``"event-model"`` or ``"sheaf-model"``, plus an
optional ``"name"``.  Malformed shapes and references to undeclared
names raise SchemaError with the offending path; well-formed documents
that violate a semantic invariant (a projection that is not a sheaf, a
function table that is not monotone) raise the library's usual typed
errors.

Kripke models list worlds, agents, per-agent relations and a valuation:

    {"format_version": 1, "kind": "kripke-model",
     "worlds": ["w1", "w2"], "agents": ["a"],
     "relations": {"a": [["w1", "w2"]]},
     "valuation": {"p": ["w1"]}}

Event models replace worlds/valuation by events/preconditions, the
latter written in formula syntax.  Sheaf models add the domain side:
``"fibers"`` maps each world to the individuals over it (their
concatenation, in world order, is the domain), ``"domain_relation"``
gives the per-agent relations on individuals, ``"functions"`` the
function-symbol tables (arity 0 uses a world-indexed ``"section"``,
positive arity a ``"map"`` of argument-tuple/value entries covering
every tuple over a common world), and ``"predicates"`` the
relation-symbol extensions (worlds for arity 0, argument tuples
otherwise).
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from .errors import SchemaError
from .formulas import Formula, FormulaInContext
from .frames import AgentSet, KripkeFrame, FrameMap, frame_map
from .models import EventModel, KripkeModel
from .parser import parse_formula, print_formula
from .powerset import Subset
from .rel import FiniteSet, Rel, function_from_mapping, rel
from .sheaves import FiberedPower, KripkeSheaf, SheafModel, Signature, fibered_power

FORMAT_VERSION = 1

LoadedModel = Union[KripkeModel, EventModel, SheafModel]


def _require(doc: Mapping[str, Any], key: str, kind: type, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing key {key!r}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"{where}: {key!r} must be a number")
        return value
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SchemaError(f"{where}: {key!r} must be a {kind.__name__}")
    return value


def _string_list(value: Any, where: str) -> List[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise SchemaError(f"{where}: expected a list of strings")
    return value


def _pair_list(value: Any, elements: frozenset, where: str) -> frozenset:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected a list of pairs")
    out = set()
    for entry in value:
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(x, str) for x in entry)
        ):
            raise SchemaError(f"{where}: each entry must be a two-element list of strings")
        src, dst = entry
        for x in (src, dst):
            if x not in elements:
                raise SchemaError(f"{where}: undeclared name {x!r}")
        out.add((src, dst))
    return frozenset(out)


def _carrier(doc: Mapping[str, Any], key: str, name: str, where: str) -> FiniteSet:
    elems = _string_list(_require(doc, key, list, where), f"{where}.{key}")
    if len(set(elems)) != len(elems):
        dup = next(x for x in elems if elems.count(x) > 1)
        raise SchemaError(f"{where}.{key}: duplicate name {dup!r}")
    if not elems:
        raise SchemaError(f"{where}.{key}: must not be empty")
    return FiniteSet(name, tuple(elems))


def _frame(
    doc: Mapping[str, Any],
    carrier: FiniteSet,
    agents: AgentSet,
    rel_key: str,
    where: str,
) -> KripkeFrame:
    table = _require(doc, rel_key, dict, where)
    missing = [a for a in agents if a not in table]
    if missing:
        raise SchemaError(f"{where}.{rel_key}: no relation for agent {missing[0]!r}")
    extra = [a for a in table if a not in agents.agents]
    if extra:
        raise SchemaError(f"{where}.{rel_key}: unknown agent {extra[0]!r}")
    rels = {
        a: rel(carrier, carrier, _pair_list(table[a], carrier.as_set, f"{where}.{rel_key}.{a}"))
        for a in agents
    }
    return KripkeFrame.make(carrier, agents, rels)


def _agents(doc: Mapping[str, Any], where: str) -> AgentSet:
    names = _string_list(_require(doc, "agents", list, where), f"{where}.agents")
    if len(set(names)) != len(names):
        raise SchemaError(f"{where}.agents: duplicate agent")
    if not names:
        raise SchemaError(f"{where}.agents: must not be empty")
    return AgentSet(tuple(names))


def _load_kripke(doc: Mapping[str, Any]) -> KripkeModel:
    where = "kripke-model"
    carrier = _carrier(doc, "worlds", "W", where)
    agents = _agents(doc, where)
    frame = _frame(doc, carrier, agents, "relations", where)
    val_doc = _require(doc, "valuation", dict, where)
    val = {}
    for atom, worlds in val_doc.items():
        members = _string_list(worlds, f"{where}.valuation.{atom}")
        for w in members:
            if w not in carrier.as_set:
                raise SchemaError(f"{where}.valuation.{atom}: undeclared world {w!r}")
        val[atom] = Subset(carrier, frozenset(members))
    return KripkeModel.make(frame, val)


def _parse_precondition(text: Any, where: str) -> Formula:
    if not isinstance(text, str):
        raise SchemaError(f"{where}: precondition must be a formula string")
    parsed = parse_formula(text)
    if isinstance(parsed, FormulaInContext):
        if parsed.context:
            raise SchemaError(f"{where}: precondition must be a sentence, not open in {parsed.context}")
        return parsed.body
    return parsed


def _load_event(doc: Mapping[str, Any]) -> EventModel:
    where = "event-model"
    carrier = _carrier(doc, "events", "E", where)
    agents = _agents(doc, where)
    frame = _frame(doc, carrier, agents, "relations", where)
    pre_doc = _require(doc, "preconditions", dict, where)
    missing = [e for e in carrier if e not in pre_doc]
    if missing:
        raise SchemaError(f"{where}.preconditions: no precondition for event {missing[0]!r}")
    extra = [e for e in pre_doc if e not in carrier.as_set]
    if extra:
        raise SchemaError(f"{where}.preconditions: unknown event {extra[0]!r}")
    pre = {
        e: _parse_precondition(pre_doc[e], f"{where}.preconditions.{e}")
        for e in carrier
    }
    return EventModel.make(frame, pre)


def _tuple_entry(value: Any, arity: int, domain: frozenset, where: str) -> Tuple[str, ...]:
    if (
        not isinstance(value, list)
        or len(value) != arity
        or not all(isinstance(x, str) for x in value)
    ):
        raise SchemaError(f"{where}: expected a list of {arity} individuals")
    for x in value:
        if x not in domain:
            raise SchemaError(f"{where}: undeclared individual {x!r}")
    return tuple(value)


def _power_label(
    power: FiberedPower,
    sheaf: KripkeSheaf,
    tup: Tuple[str, ...],
    where: str,
) -> str:
    worlds = {sheaf.proj(a) for a in tup}
    if len(worlds) != 1:
        raise SchemaError(f"{where}: arguments {list(tup)} do not share a world")
    label = power.label_for(next(iter(worlds)), tup)
    if label not in power.carrier.as_set:
        raise SchemaError(f"{where}: arguments {list(tup)} do not name a point")
    return label


def load_sheaf_frames(doc: Mapping[str, Any]) -> Tuple[KripkeFrame, KripkeFrame, FrameMap]:
    """The raw (total, base, projection) triple of a sheaf-model document.

    Unlike the full loader this does not require the triple to satisfy the
    sheaf conditions, so diagnostics can be run on documents that fail
    them.  Schema problems still raise.
    """
    where = "sheaf-model"
    if doc.get("kind") != "sheaf-model":
        raise SchemaError(f"document: expected kind 'sheaf-model', got {doc.get('kind')!r}")
    base_carrier = _carrier(doc, "worlds", "W", where)
    agents = _agents(doc, where)
    base = _frame(doc, base_carrier, agents, "relations", where)

    fibers_doc = _require(doc, "fibers", dict, where)
    missing = [w for w in base_carrier if w not in fibers_doc]
    if missing:
        raise SchemaError(f"{where}.fibers: no fiber for world {missing[0]!r}")
    extra = [w for w in fibers_doc if w not in base_carrier.as_set]
    if extra:
        raise SchemaError(f"{where}.fibers: unknown world {extra[0]!r}")
    individuals: List[str] = []
    projection: Dict[str, str] = {}
    for w in base_carrier:
        fib = _string_list(fibers_doc[w], f"{where}.fibers.{w}")
        for a in fib:
            if a in projection:
                raise SchemaError(f"{where}.fibers: individual {a!r} listed twice")
            projection[a] = w
            individuals.append(a)
    if not individuals:
        raise SchemaError(f"{where}.fibers: domain must not be empty")
    total_carrier = FiniteSet("D", tuple(individuals))
    total = _frame(doc, total_carrier, agents, "domain_relation", where)
    proj = frame_map(total, base, projection)
    return total, base, proj


def _load_sheaf(doc: Mapping[str, Any]) -> SheafModel:
    where = "sheaf-model"
    total, base, proj = load_sheaf_frames(doc)
    base_carrier = base.carrier
    total_carrier = total.carrier
    sheaf = KripkeSheaf(total, base, proj)

    fn_doc = _require(doc, "functions", dict, where)
    rel_doc = _require(doc, "predicates", dict, where)
    functions: Dict[str, int] = {}
    relations: Dict[str, int] = {}
    for name, entry in fn_doc.items():
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}.functions.{name}: expected an object")
        functions[name] = _require(entry, "arity", int, f"{where}.functions.{name}")
    for name, entry in rel_doc.items():
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}.predicates.{name}: expected an object")
        relations[name] = _require(entry, "arity", int, f"{where}.predicates.{name}")
    signature = Signature.make(functions, relations)

    powers: Dict[int, FiberedPower] = {}

    def power(n: int) -> FiberedPower:
        if n not in powers:
            powers[n] = fibered_power(sheaf, n)
        return powers[n]

    fn_interp: Dict[str, FrameMap] = {}
    for name in sorted(fn_doc):
        entry = fn_doc[name]
        arity = functions[name]
        pw = power(arity)
        here = f"{where}.functions.{name}"
        mapping: Dict[str, str] = {}
        if arity == 0:
            section = _require(entry, "section", dict, here)
            for w, a in section.items():
                if w not in base_carrier.as_set:
                    raise SchemaError(f"{here}.section: unknown world {w!r}")
                if not isinstance(a, str) or a not in total_carrier.as_set:
                    raise SchemaError(f"{here}.section: undeclared individual {a!r}")
                mapping[w] = a
        else:
            table = _require(entry, "map", list, here)
            for i, row in enumerate(table):
                if not isinstance(row, list) or len(row) != 2:
                    raise SchemaError(f"{here}.map[{i}]: expected [arguments, value]")
                args, value = row
                tup = _tuple_entry(args, arity, total_carrier.as_set, f"{here}.map[{i}]")
                label = _power_label(pw, sheaf, tup, f"{here}.map[{i}]")
                if not isinstance(value, str) or value not in total_carrier.as_set:
                    raise SchemaError(f"{here}.map[{i}]: undeclared individual {value!r}")
                if label in mapping:
                    raise SchemaError(f"{here}.map[{i}]: duplicate entry for {args}")
                mapping[label] = value
        uncovered = [lbl for lbl in pw.carrier if lbl not in mapping]
        if uncovered:
            raise SchemaError(f"{here}: no value for {uncovered[0]!r}")
        fn_interp[name] = FrameMap(
            pw.frame,
            total,
            function_from_mapping(pw.carrier, total_carrier, mapping),
        )

    rel_interp: Dict[str, Subset] = {}
    for name in sorted(rel_doc):
        entry = rel_doc[name]
        arity = relations[name]
        pw = power(arity)
        here = f"{where}.predicates.{name}"
        ext = _require(entry, "extension", list, here)
        members = set()
        for i, row in enumerate(ext):
            if arity == 0:
                if not isinstance(row, str) or row not in base_carrier.as_set:
                    raise SchemaError(f"{here}.extension[{i}]: undeclared world {row!r}")
                members.add(row)
            else:
                tup = _tuple_entry(row, arity, total_carrier.as_set, f"{here}.extension[{i}]")
                members.add(_power_label(pw, sheaf, tup, f"{here}.extension[{i}]"))
        rel_interp[name] = Subset(pw.carrier, frozenset(members))

    model = SheafModel(sheaf, signature, fn_interp, rel_interp)
    model._powers.update(powers)
    return model


_LOADERS = {
    "kripke-model": _load_kripke,
    "event-model": _load_event,
    "sheaf-model": _load_sheaf,
}


def load_model(doc: Mapping[str, Any]) -> LoadedModel:
    """Build a model from a parsed JSON document, validating as it goes."""
    if not isinstance(doc, Mapping):
        raise SchemaError("document: expected a JSON object")
    version = _require(doc, "format_version", int, "document")
    if version != FORMAT_VERSION:
        raise SchemaError(f"document: unsupported format_version {version!r}")
    kind = _require(doc, "kind", str, "document")
    loader = _LOADERS.get(kind)
    if loader is None:
        raise SchemaError(
            f"document: unknown kind {kind!r}; expected one of {sorted(_LOADERS)}"
        )
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise SchemaError("document: 'name' must be a string")
    return loader(doc)


def load_file(path: str) -> Tuple[Optional[str], LoadedModel]:
    """Read one JSON file; returns its declared name (if any) and the model."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    model = load_model(doc)
    return doc.get("name"), model


def _dump_frame(frame: KripkeFrame) -> Dict[str, Any]:
    return {
        a: sorted([s, d] for s, d in frame.rel(a).pairs) for a in frame.agents
    }


def dump_model(model: LoadedModel, name: Optional[str] = None) -> Dict[str, Any]:
    """Render a model as a JSON-ready document; inverse of load_model."""
    doc: Dict[str, Any] = {"format_version": FORMAT_VERSION}
    if name is not None:
        doc["name"] = name
    if isinstance(model, KripkeModel):
        doc["kind"] = "kripke-model"
        doc["worlds"] = list(model.frame.carrier.elements)
        doc["agents"] = list(model.frame.agents.agents)
        doc["relations"] = _dump_frame(model.frame)
        doc["valuation"] = {a: model.val(a).sorted_members() for a in model.atoms}
        return doc
    if isinstance(model, EventModel):
        doc["kind"] = "event-model"
        doc["events"] = list(model.frame.carrier.elements)
        doc["agents"] = list(model.frame.agents.agents)
        doc["relations"] = _dump_frame(model.frame)
        doc["preconditions"] = {
            e: print_formula(model.pre(e)) for e in model.events
        }
        return doc
    if isinstance(model, SheafModel):
        sheaf = model.sheaf
        doc["kind"] = "sheaf-model"
        doc["worlds"] = list(sheaf.base.carrier.elements)
        doc["agents"] = list(sheaf.base.agents.agents)
        doc["relations"] = _dump_frame(sheaf.base)
        doc["fibers"] = {w: list(sheaf.fiber(w)) for w in sheaf.base.carrier}
        doc["domain_relation"] = _dump_frame(sheaf.total)
        functions: Dict[str, Any] = {}
        for fname, arity in model.signature.function_symbols:
            fm = model.fn_interp_map[fname]
            pw = model.power(arity)
            if arity == 0:
                functions[fname] = {
                    "arity": 0,
                    "section": {w: fm(w) for w in pw.carrier},
                }
            else:
                functions[fname] = {
                    "arity": arity,
                    "map": [[list(pw.tuple_of(lbl)), fm(lbl)] for lbl in pw.carrier],
                }
        doc["functions"] = functions
        predicates: Dict[str, Any] = {}
        for rname, arity in model.signature.relation_symbols:
            sub = model.rel_interp_map[rname]
            pw = model.power(arity)
            if arity == 0:
                ext: List[Any] = sub.sorted_members()
            else:
                ext = [list(pw.tuple_of(lbl)) for lbl in pw.carrier if lbl in sub.members]
            predicates[rname] = {"arity": arity, "extension": ext}
        doc["predicates"] = predicates
        return doc
    raise SchemaError(f"cannot dump a {type(model).__name__}")


def dump_file(model: LoadedModel, path: str, name: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(dump_model(model, name), handle, indent=2, sort_keys=False)
        handle.write("\n")
