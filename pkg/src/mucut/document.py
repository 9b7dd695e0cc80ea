"""The proof text format.

A document is a header followed by one line per node::

    system MuLK
    name double
    let Nat = mu X. T \\/ X
    root n0
    n0: Nat |- Nat by mu_l L0 -> n1
    n5: |- Nat by mu_r R0 -> back n0
    n6: |- Nat by cut split=1 formula={Nat} -> n7 ; n8
    n9: Nat |- Nat by ex perm=0/0 -> back n0 align=0/0

Leaves have no arrow.  Tree prefixes may also contain ``open`` leaves and
``mcut`` nodes whose multicut is written as ``mcut={iota ... ppr ...}``.
Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .calculus import Pos, RuleApp, Sequent, instantiate, pos_text
from .errors import MucutError, ParseError, SemanticError
from .formula import Formula, SystemId, to_text
from .multicut import Mcut, mcut_app
from .proof import BackEdge, ProofGraph, RuleNode, Suspension, TreeNode, TreePrefix, child_target
from .syntax import parse_formula, parse_sequent

_POS = re.compile(r"^([LR])(\d+)$")
_NODE = re.compile(r"^(?P<id>[A-Za-z0-9_.]+)\s*:\s*(?P<rest>.*)$")


@dataclass
class ProofDocument:
    system: SystemId | None
    name: str
    abbrevs: dict[str, Formula] = field(default_factory=dict)
    graph: ProofGraph | None = None
    prefix: TreePrefix | None = None

    @classmethod
    def of(cls, p: ProofGraph) -> "ProofDocument":
        return cls(p.system, p.name, dict(p.abbrevs), p)

    def to_graph(self) -> ProofGraph:
        if self.graph is None:
            raise SemanticError("the document has open leaves and is not a proof")
        return self.graph


# -- printing ---------------------------------------------------------------------------

def _align_text(al) -> str:
    return ",".join(map(str, al[0])) + "/" + ",".join(map(str, al[1]))


def _params_text(app: RuleApp, names: dict[Formula, str]) -> str:
    pr = app.params
    out = []
    if app.rule == "mcut":
        out.append("mcut={" + pr.mcut.to_text() + "}")
        return " " + " ".join(out)
    if pr.principal is not None:
        out.append(pos_text(pr.principal))
    if pr.split is not None:
        out.append("split=" + ",".join(map(str, pr.split)))
    if pr.perm is not None:
        out.append("perm=" + _align_text(pr.perm))
    if pr.index is not None:
        out.append(f"index={pr.index}")
    if pr.formula is not None:
        out.append("formula={" + to_text(pr.formula, names) + "}")
    return (" " + " ".join(out)) if out else ""


def _child_text(c) -> str:
    if isinstance(c, BackEdge):
        return f"back {c.target}" + (f" align={_align_text(c.align)}" if c.align is not None else "")
    return c


def _header(system: SystemId | None, name: str, abbrevs: dict[str, Formula]) -> list[str]:
    lines = []
    if system is not None:
        lines.append(f"system {system.value}")
    lines.append(f"name {name}")
    for k, v in abbrevs.items():
        lines.append(f"let {k} = {to_text(v)}")
    return lines


def _names(abbrevs: dict[str, Formula]) -> dict[Formula, str]:
    return {v: k for k, v in abbrevs.items()}


def print_graph(p: ProofGraph) -> str:
    names = _names(p.abbrevs)
    lines = _header(p.system, p.name, p.abbrevs)
    lines.append(f"root {p.root}")
    for nid in sorted(p.nodes, key=_id_key):
        node = p.nodes[nid]
        app = node.app
        line = f"{nid}: {app.conclusion.to_text(names)} by {app.rule}{_params_text(app, names)}"
        if node.children:
            line += " -> " + " ; ".join(_child_text(c) for c in node.children)
        lines.append(line)
    return "\n".join(lines) + "\n"


def print_prefix(t: TreePrefix, system: SystemId | None, name: str, abbrevs: dict[str, Formula]) -> str:
    names = _names(abbrevs)
    lines = _header(system, name, abbrevs)
    lines.append("root n0")
    body: list[str] = []
    counter = [0]

    def go(x: TreePrefix) -> str:
        nid = f"n{counter[0]}"
        counter[0] += 1
        slot = len(body)
        body.append("")
        if isinstance(x, Suspension):
            body[slot] = f"{nid}: {x.sequent.to_text(names)} open"
            return nid
        kids = [go(c) for c in x.children]
        line = f"{nid}: {x.app.conclusion.to_text(names)} by {x.app.rule}{_params_text(x.app, names)}"
        if kids:
            line += " -> " + " ; ".join(kids)
        body[slot] = line
        return nid

    go(t)
    return "\n".join(lines + body) + "\n"


def print_document(doc: ProofDocument) -> str:
    if doc.graph is not None:
        return print_graph(doc.graph)
    return print_prefix(doc.prefix, doc.system, doc.name, doc.abbrevs)


def _id_key(nid: str):
    m = re.match(r"^n(\d+)$", nid)
    return (0, int(m.group(1)), "") if m else (1, 0, nid)


# -- parsing ------------------------------------------------------------------------------

def _pos(text: str, line: int, col: int) -> Pos:
    m = _POS.match(text)
    if not m:
        raise ParseError(f"bad position {text!r}", line, col)
    return (m.group(1), int(m.group(2)))


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x != "")


def _pair(text: str, line: int, col: int):
    if "/" not in text:
        raise ParseError(f"expected 'ante/succ' in {text!r}", line, col)
    a, s = text.split("/", 1)
    try:
        return _ints(a), _ints(s)
    except ValueError:
        raise ParseError(f"bad index list {text!r}", line, col) from None


def _ppos(text: str, line: int, col: int):
    m = re.match(r"^(\d+):([LR])(\d+)$", text)
    if not m:
        raise ParseError(f"bad premise position {text!r}", line, col)
    return (int(m.group(1)), m.group(2), int(m.group(3)))


def _parse_mcut(text: str, line: int, col: int):
    toks = text.split()
    if not toks or toks[0] != "iota":
        raise ParseError("multicut data must start with 'iota'", line, col)
    iota, ppr = [], []
    mode = "iota"
    for t in toks[1:]:
        if t == "ppr":
            mode = "ppr"
            continue
        if mode == "iota":
            c, _, q = t.partition("=")
            iota.append((_pos(c, line, col), _ppos(q, line, col)))
        else:
            a, _, b = t.partition("~")
            ppr.append(frozenset({_ppos(a, line, col), _ppos(b, line, col)}))
    return iota, ppr


def _split_params(text: str, line: int, col: int) -> list[str]:
    """Whitespace-separated items; braces group."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced '}'", line, col)
        if ch.isspace() and depth == 0:
            if cur:
                out.append(cur)
            cur = ""
        else:
            cur += ch
    if depth:
        raise ParseError("unbalanced '{'", line, col)
    if cur:
        out.append(cur)
    return out


@dataclass
class _Line:
    nid: str
    seq: Sequent
    rule: str | None
    kw: dict
    children: list
    line: int


def parse_document(text: str) -> ProofDocument:
    system: SystemId | None = None
    name = "proof"
    abbrevs: dict[str, Formula] = {}
    root: str | None = None
    rows: dict[str, _Line] = {}
    order: list[str] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].rstrip()
        if not s.strip():
            continue
        head = s.split(None, 1)
        word = head[0]
        rest = head[1] if len(head) > 1 else ""
        if word == "system" and not s.startswith("system:"):
            try:
                system = SystemId(rest.strip())
            except ValueError:
                raise ParseError(f"unknown system {rest.strip()!r}", ln, len(word) + 2) from None
            continue
        if word == "name":
            name = rest.strip()
            continue
        if word == "let":
            if "=" not in rest:
                raise ParseError("expected 'let NAME = FORMULA'", ln, 5)
            k, _, v = rest.partition("=")
            off = s.index("=") + 1
            abbrevs[k.strip()] = parse_formula(v, abbrevs, ln, off)
            continue
        if word == "root":
            root = rest.strip()
            continue
        m = _NODE.match(s)
        if not m:
            raise ParseError(f"cannot read line {s.strip()!r}", ln, 1)
        row = _parse_node(m.group("id"), m.group("rest"), s.index(m.group("rest")) if m.group("rest") else 0,
                          abbrevs, ln)
        if row.nid in rows:
            raise SemanticError(f"node {row.nid} defined twice", row.nid)
        rows[row.nid] = row
        order.append(row.nid)
    if not rows:
        raise ParseError("empty node table", 0, 0)
    if root is None:
        root = order[0]
    if root not in rows:
        raise SemanticError(f"root {root} is not defined", root)
    for row in rows.values():
        for c in row.children:
            t = child_target(c)
            if t not in rows:
                raise SemanticError(f"node {row.nid} refers to undefined node {t}", row.nid)
    apps = {nid: _build_app(r, rows) for nid, r in rows.items()}
    if any(r.rule is None for r in rows.values()):
        return ProofDocument(system, name, abbrevs, None, _to_prefix(root, rows, apps))
    nodes = {nid: RuleNode(apps[nid], tuple(rows[nid].children)) for nid in order}
    return ProofDocument(system, name, abbrevs, ProofGraph(nodes, root, system, name, abbrevs))


def _arrow_split(tail: str) -> tuple[str, str | None]:
    depth = 0
    for i, ch in enumerate(tail):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif depth == 0 and tail.startswith(" -> ", i):
            return tail[:i], tail[i + 4:]
    return tail, None


def _parse_node(nid: str, rest: str, off: int, abbrevs, ln: int) -> _Line:
    if " by " not in rest:
        if rest.rstrip().endswith(" open") or rest.strip() == "open":
            seq = parse_sequent(rest.rstrip()[:-4], abbrevs, ln, off)
            return _Line(nid, seq, None, {}, [], ln)
        raise ParseError("expected '<sequent> by <rule>'", ln, off + len(rest))
    seq_text, _, tail = rest.partition(" by ")
    rule_text, kids_text = _arrow_split(tail)
    seq = parse_sequent(seq_text, abbrevs, ln, off)
    items = _split_params(rule_text, ln, off + len(seq_text) + 4)
    if not items:
        raise ParseError("missing rule name", ln, off + len(seq_text) + 4)
    col = off + len(seq_text) + 5
    rule, kw = items[0], {}
    for it in items[1:]:
        if "=" not in it:
            kw["principal"] = _pos(it, ln, col)
            continue
        k, _, v = it.partition("=")
        if k == "split":
            kw["split"] = _ints(v)
        elif k == "perm":
            kw["perm"] = _pair(v, ln, col)
        elif k == "index":
            kw["index"] = int(v)
        elif k == "formula":
            kw["formula"] = parse_formula(v.strip("{}"), abbrevs, ln, col)
        elif k == "mcut":
            kw["mcut"] = _parse_mcut(v.strip("{}"), ln, col)
        else:
            raise ParseError(f"unknown parameter {k!r}", ln, col)
    children = []
    if kids_text is not None:
        for part in kids_text.split(";"):
            toks = part.split()
            if not toks:
                raise ParseError("empty child", ln, off)
            if toks[0] == "back":
                if len(toks) < 2:
                    raise ParseError("'back' needs a node id", ln, off)
                al = None
                for t in toks[2:]:
                    if t.startswith("align="):
                        al = _pair(t[6:], ln, off)
                    else:
                        raise ParseError(f"unexpected {t!r}", ln, off)
                children.append(BackEdge(toks[1], al))
            elif len(toks) == 1:
                children.append(toks[0])
            else:
                raise ParseError(f"unexpected {' '.join(toks[1:])!r}", ln, off)
    return _Line(nid, seq, rule, kw, children, ln)


def _build_app(row: _Line, rows: dict[str, _Line]) -> RuleApp | None:
    if row.rule is None:
        return None
    if row.rule == "mcut":
        if "mcut" not in row.kw:
            raise SemanticError(f"mcut node {row.nid} lacks its multicut data", row.nid)
        iota, ppr = row.kw["mcut"]
        prems = []
        for c in row.children:
            prem = rows[child_target(c)].seq
            if isinstance(c, BackEdge) and c.align is not None:
                prem = _unalign(prem, c.align)
            prems.append(prem)
        return mcut_app(Mcut(tuple(prems), row.seq, tuple(iota), frozenset(ppr)))
    kw = {k: v for k, v in row.kw.items() if k != "mcut"}
    principal = kw.pop("principal", None)
    try:
        return instantiate(row.rule, row.seq, principal, **kw)
    except MucutError as e:
        raise SemanticError(f"node {row.nid}: {e}", row.nid) from None


def _unalign(target: Sequent, al) -> Sequent:
    ante = tuple(target.ante[j] for j in al[0])
    succ = tuple(target.succ[j] for j in al[1])
    return Sequent(ante, succ)


def _to_prefix(root: str, rows: dict[str, _Line], apps: dict) -> TreePrefix:
    def go(nid: str, depth: int) -> TreePrefix:
        if depth > 100000:
            raise SemanticError("tree prefixes cannot contain cycles", nid)
        row = rows[nid]
        if row.rule is None:
            return Suspension(row.seq, None)
        for c in row.children:
            if isinstance(c, BackEdge):
                raise SemanticError("tree prefixes cannot contain back-edges", nid)
        return TreeNode(apps[nid], tuple(go(c, depth + 1) for c in row.children))
    return go(root, 0)


def read_document(path: str) -> ProofDocument:
    import sys
    if path == "-":
        return parse_document(sys.stdin.read())
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())
