"""HDDL-subset text printer and parser.

print_hddl emits one document holding a ``(define (domain ...))`` form and a
``(define (problem ...))`` form; parse_hddl reads such a document back. The
round trip is identity up to whitespace and declaration order.

Supported keywords: ``:types :predicates :task :method :ordered-subtasks
:action :parameters :precondition :effect :htn :init :objects :domain``.
Anything else in method/action bodies (``:subtasks`` partial order, method
preconditions, quantifiers, conditional effects) raises
UnsupportedFeatureError.
"""
from __future__ import annotations

import re
from typing import Dict, List, Optional, Tuple

from ..errors import ParseError, UnsupportedFeatureError
from ..symbolic import GroundAtom, Predicate
from .model import (
    CLOSURE_PREFIX,
    AbstractTask,
    HtnDomain,
    HtnProblem,
    Method,
    PrimitiveTask,
    TaskNetwork,
)

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _atom_sexp(atom: GroundAtom) -> str:
    return "(" + " ".join((atom.predicate,) + atom.args) + ")"


def _condition_sexp(pos, neg) -> str:
    parts = [_atom_sexp(a) for a in sorted(pos)]
    parts += ["(not " + _atom_sexp(a) + ")" for a in sorted(neg)]
    if not parts:
        return "()"
    if len(parts) == 1:
        return parts[0]
    return "(and " + " ".join(parts) + ")"


def _params_sexp(params) -> str:
    return "(" + " ".join(f"{n} - {t}" for n, t in params) + ")"


def print_hddl(problem: HtnProblem) -> str:
    dom = problem.domain
    out: List[str] = []
    out.append(f"(define (domain {dom.name})")
    if dom.types:
        out.append("  (:types " + " ".join(dom.types) + " - object)")
    preds = []
    for name in sorted(dom.predicates):
        p = dom.predicates[name]
        args = " ".join(f"?x{i} - {t}" for i, t in enumerate(p.argument_types))
        preds.append(f"({p.name}{' ' + args if args else ''})")
    out.append("  (:predicates " + " ".join(preds) + ")")
    for name in sorted(dom.abstracts):
        t = dom.abstracts[name]
        params = " ".join(f"?p{i} - {typ}" for i, typ in enumerate(t.parameter_types))
        out.append(f"  (:task {t.name} :parameters ({params}))")
    for mid in sorted(dom.methods):
        m = dom.methods[mid]
        subs = " ".join(f"({n})" for n in m.subnetwork.task_names())
        if len(m.subnetwork.task_names()) > 1:
            subs = "(and " + subs + ")"
        out.append(
            f"  (:method {m.id} :parameters () :task ({m.abstract_task})"
            f" :ordered-subtasks {subs})"
        )
    for task in sorted(dom.closures):
        for pid in dom.closures[task]:
            out.append(
                f"  (:method {CLOSURE_PREFIX}{pid} :parameters () :task ({task})"
                f" :ordered-subtasks ({pid}))"
            )
    for name in sorted(dom.primitives):
        a = dom.primitives[name]
        out.append(f"  (:action {a.name}")
        out.append(f"    :parameters {_params_sexp(a.parameters)}")
        out.append(f"    :precondition {_condition_sexp(a.pre_pos, a.pre_neg)}")
        out.append(f"    :effect {_condition_sexp(a.eff_pos, a.eff_neg)})")
    out.append(")")
    out.append("")
    out.append(f"(define (problem {problem.name}-problem)")
    out.append(f"  (:domain {dom.name})")
    if problem.objects:
        decls = " ".join(f"{n} - {t}" for n, t in sorted(problem.objects.items()))
        out.append(f"  (:objects {decls})")
    tn = " ".join(f"({n})" for n in problem.tn_init.task_names())
    out.append(f"  (:htn :parameters () :ordered-subtasks {tn})")
    out.append("  (:init " + " ".join(_atom_sexp(a) for a in sorted(problem.init)) + ")")
    out.append(")")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class _Tok:
    __slots__ = ("text", "line", "col")

    def __init__(self, text, line, col):
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str) -> List[_Tok]:
    toks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0]
        for m in _TOKEN_RE.finditer(line):
            toks.append(_Tok(m.group(0), lineno, m.start() + 1))
    return toks


def _read_sexps(toks: List[_Tok]):
    """Nested lists of _Tok; raises ParseError on unbalanced parens."""
    stack: List[list] = []
    top: List = []
    for tok in toks:
        if tok.text == "(":
            stack.append(top)
            top = []
        elif tok.text == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line=tok.line, column=tok.col)
            done = top
            top = stack.pop()
            top.append(done)
        else:
            top.append(tok)
    if stack:
        raise ParseError("missing ')' at end of input")
    return top


def _txt(item) -> str:
    if isinstance(item, _Tok):
        return item.text
    raise ParseError("expected a symbol, found a list")


def _where(form) -> Tuple[Optional[int], Optional[int]]:
    for item in form:
        if isinstance(item, _Tok):
            return item.line, item.col
    return None, None


def _parse_typed_list(items) -> List[Tuple[str, str]]:
    """'a b - t c - u' style typed lists; untyped entries default to object."""
    out = []
    pending: List[str] = []
    it = iter(items)
    for item in it:
        word = _txt(item)
        if word == "-":
            try:
                typ = _txt(next(it))
            except StopIteration:
                raise ParseError("dangling '-' in typed list")
            for name in pending:
                out.append((name, typ))
            pending = []
        else:
            pending.append(word)
    for name in pending:
        out.append((name, "object"))
    return out


def _parse_atom(form) -> GroundAtom:
    if not form or not isinstance(form, list):
        raise ParseError("expected an atom")
    return GroundAtom(_txt(form[0]), tuple(_txt(x) for x in form[1:]))


def _parse_condition(form) -> Tuple[frozenset, frozenset]:
    pos, neg = set(), set()
    if form == []:
        return frozenset(), frozenset()
    head = form[0]
    if isinstance(head, _Tok) and head.text == "and":
        parts = form[1:]
    else:
        parts = [form]
    for part in parts:
        if not isinstance(part, list) or not part:
            raise ParseError("bad condition element")
        h = _txt(part[0])
        if h in ("forall", "exists", "when", "or", "imply"):
            raise UnsupportedFeatureError(f"{h!r} conditions are outside the subset")
        if h == "not":
            neg.add(_parse_atom(part[1]))
        else:
            pos.add(_parse_atom(part))
    return frozenset(pos), frozenset(neg)


def _kv_pairs(body):
    """Split a declaration body on :keyword markers."""
    pairs = []
    i = 0
    while i < len(body):
        item = body[i]
        if not (isinstance(item, _Tok) and item.text.startswith(":")):
            raise ParseError("expected a :keyword", line=getattr(item, "line", None))
        key = item.text
        i += 1
        val = []
        while i < len(body) and not (
            isinstance(body[i], _Tok) and body[i].text.startswith(":")
        ):
            val.append(body[i])
            i += 1
        pairs.append((key, val))
    return pairs


def parse_hddl(text: str) -> HtnProblem:
    """Parse a combined domain+problem document."""
    forms = _read_sexps(_tokenize(text))
    domain = None
    problem_form = None
    for form in forms:
        if not form or _txt(form[0]) != "define":
            raise ParseError("top-level form is not (define ...)", *_where(form))
        head = form[1]
        kind = _txt(head[0])
        if kind == "domain":
            domain = _parse_domain(form)
        elif kind == "problem":
            problem_form = form
        else:
            raise ParseError(f"unknown define kind {kind!r}")
    if domain is None:
        raise ParseError("document has no domain definition")
    if problem_form is None:
        raise ParseError("document has no problem definition")
    problem = _parse_problem(problem_form, domain)
    problem.validate()
    return problem


def _parse_domain(form) -> HtnDomain:
    name = _txt(form[1][1])
    types: Tuple[str, ...] = ()
    predicates: Dict[str, Predicate] = {}
    primitives: Dict[str, PrimitiveTask] = {}
    abstracts: Dict[str, AbstractTask] = {}
    methods: Dict[str, Method] = {}
    closures: Dict[str, Tuple[str, ...]] = {}
    for section in form[2:]:
        if not isinstance(section, list) or not section:
            raise ParseError("bad domain section")
        key = _txt(section[0])
        body = section[1:]
        if key == ":requirements":
            continue
        if key == ":types":
            types = tuple(n for n, t in _parse_typed_list(body))
        elif key == ":predicates":
            for p in body:
                entries = _parse_typed_list(p[1:])
                pname = _txt(p[0])
                predicates[pname] = Predicate(
                    pname, len(entries), tuple(t for _, t in entries)
                )
        elif key == ":task":
            tname = _txt(body[0])
            params = []
            for k, v in _kv_pairs(body[1:]):
                if k != ":parameters":
                    raise UnsupportedFeatureError(f"task keyword {k!r} unsupported")
                params = _parse_typed_list(v[0]) if v else []
            abstracts[tname] = AbstractTask(tname, tuple(t for _, t in params))
        elif key == ":method":
            mid = _txt(body[0])
            task = None
            subtasks: Tuple[str, ...] = ()
            for k, v in _kv_pairs(body[1:]):
                if k == ":parameters":
                    if v and v[0]:
                        raise UnsupportedFeatureError("lifted method parameters unsupported")
                elif k == ":task":
                    task = _txt(v[0][0])
                elif k == ":ordered-subtasks":
                    subtasks = _parse_subtasks(v)
                elif k == ":subtasks":
                    raise UnsupportedFeatureError(
                        ":subtasks (partially ordered) is outside the subset;"
                        " use :ordered-subtasks"
                    )
                elif k == ":precondition":
                    raise UnsupportedFeatureError("method preconditions are outside the subset")
                else:
                    raise UnsupportedFeatureError(f"method keyword {k!r} unsupported")
            if task is None:
                raise ParseError(f"method {mid!r} lacks :task")
            if mid.startswith(CLOSURE_PREFIX):
                if len(subtasks) != 1:
                    raise ParseError(f"closure method {mid!r} must have one subtask")
                closures[task] = closures.get(task, ()) + (subtasks[0],)
            else:
                methods[mid] = Method(
                    id=mid, abstract_task=task, subnetwork=TaskNetwork.ordered(subtasks)
                )
        elif key == ":action":
            aname = _txt(body[0])
            params: List[Tuple[str, str]] = []
            pre = (frozenset(), frozenset())
            eff = (frozenset(), frozenset())
            for k, v in _kv_pairs(body[1:]):
                if k == ":parameters":
                    params = _parse_typed_list(v[0]) if v else []
                elif k == ":precondition":
                    pre = _parse_condition(v[0] if v else [])
                elif k == ":effect":
                    eff = _parse_condition(v[0] if v else [])
                else:
                    raise UnsupportedFeatureError(f"action keyword {k!r} unsupported")
            primitives[aname] = PrimitiveTask(
                name=aname,
                parameters=tuple(params),
                pre_pos=pre[0],
                pre_neg=pre[1],
                eff_pos=eff[0],
                eff_neg=eff[1],
            )
        else:
            raise UnsupportedFeatureError(f"domain section {key!r} unsupported")
    return HtnDomain(
        name=name,
        types=types,
        predicates=predicates,
        primitives=primitives,
        abstracts=abstracts,
        methods=methods,
        closures={t: tuple(sorted(v)) for t, v in closures.items()},
    )


def _parse_subtasks(v) -> Tuple[str, ...]:
    if not v:
        return ()
    form = v[0]
    if form and isinstance(form[0], _Tok) and form[0].text == "and":
        return tuple(_txt(s[0]) for s in form[1:])
    return tuple(_txt(s[0]) for s in v)


def _parse_problem(form, domain: HtnDomain) -> HtnProblem:
    name = _txt(form[1][1])
    objects: Dict[str, str] = {}
    init = set()
    tn: Optional[TaskNetwork] = None
    for section in form[2:]:
        key = _txt(section[0])
        body = section[1:]
        if key == ":domain":
            continue
        if key == ":objects":
            for n, t in _parse_typed_list(body):
                objects[n] = t
        elif key == ":htn":
            for k, v in _kv_pairs(body):
                if k == ":parameters":
                    continue
                if k == ":ordered-subtasks":
                    names = _parse_subtasks(v)
                    if len(names) != 1:
                        raise UnsupportedFeatureError(
                            "initial network must be a single task in the subset"
                        )
                    tn = TaskNetwork.ordered(names)
                elif k == ":subtasks":
                    raise UnsupportedFeatureError(":subtasks is outside the subset")
                else:
                    raise UnsupportedFeatureError(f":htn keyword {k!r} unsupported")
        elif key == ":init":
            for a in body:
                init.add(_parse_atom(a))
        else:
            raise UnsupportedFeatureError(f"problem section {key!r} unsupported")
    if tn is None:
        raise ParseError("problem lacks an :htn block")
    if name.endswith("-problem"):
        name = name[: -len("-problem")]
    return HtnProblem(name=name, domain=domain, objects=objects, init=frozenset(init), tn_init=tn)


def problems_equal(a: HtnProblem, b: HtnProblem) -> bool:
    """Structural equality up to declaration order."""
    da, db = a.domain, b.domain
    return (
        da.name == db.name
        and set(da.types) == set(db.types)
        and da.predicates == db.predicates
        and da.primitives == db.primitives
        and da.abstracts == db.abstracts
        and da.methods == db.methods
        and {t: frozenset(v) for t, v in da.closures.items()}
        == {t: frozenset(v) for t, v in db.closures.items()}
        and a.objects == b.objects
        and a.init == b.init
        and a.tn_init.task_names() == b.tn_init.task_names()
    )
