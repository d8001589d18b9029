"""Parser for the textual design language (`.use` files).

Grammar sketch (UTF-8 source, `//` comments to end of line):

    spec     := item*
    item     := "diagram" ID "{" dstmt* "}"
              | "data" ID "{" (entity | relation)* "}"
              | "chart" ID "{" module* "}"
              | "action" ID "{" assign* "}"
    dstmt    := "entry" ID ";" | "exit" ID ";"
              | "node" ID "output" STRING ";"
              | "arc" ID "->" target "on" pattern guard? ("do" ID)? ";"
    target   := ID | "call" ID "return" ID
    pattern  := STRING | "otherwise"
    guard    := "when" ID ("==" | "!=") STRING
    assign   := ID "=" term ("+" term)* ";"
    term     := STRING | ID | "$input"
    entity   := "entity" ID "{" (ID ":" type "key"? ";")* "}"
    type     := "int" | "string" | "bool" | "date"
    relation := "relation" ID "(" ID ("1"|"N") "," ID ("1"|"N") ")" ";"
    module   := "module" ID "root"? "{" ("invokes" ID ("with" ID ("," ID)*)? ";")* "}"

Strings are double quoted with escapes \\" \\\\ \\n; `${name}` inside a string
is an interpolation marker kept verbatim in the decoded text (a lone `$` is
literal). Errors carry positions and stable codes; after a syntax error the
parser resynchronizes at the next top-level keyword so several problems can be
reported in one run. `parse` raises ParseFailure with the full error list.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ActionDef,
    Assignment,
    AttrType,
    CallTarget,
    Card,
    DesignModel,
    Entity,
    EntityAttr,
    ErSchema,
    Guard,
    GuardOp,
    Invocation,
    OTHERWISE,
    Otherwise,
    PlainTarget,
    Relation,
    RelationEnd,
    ScChart,
    ScModule,
    SourceSpan,
    StdArc,
    StdDiagram,
    StdNode,
    Term,
)

ITEM_KEYWORDS = ("diagram", "data", "chart", "action")

KEYWORDS = frozenset(
    ITEM_KEYWORDS
    + (
        "entry",
        "exit",
        "node",
        "output",
        "arc",
        "on",
        "otherwise",
        "when",
        "do",
        "call",
        "return",
        "entity",
        "relation",
        "module",
        "root",
        "invokes",
        "with",
        "key",
        "int",
        "string",
        "bool",
        "date",
    )
)


@dataclass(frozen=True)
class ParseError:
    code: str  # LEX001 LEX002 LEX003 SYN001 SYN002 DUP_NAME
    span: SourceSpan
    message: str

    def __str__(self) -> str:
        return f"{self.span}: {self.code}: {self.message}"


class ParseFailure(Exception):
    """Raised by `parse` when the source has at least one error."""

    def __init__(self, errors: list[ParseError]):
        super().__init__(f"{len(errors)} parse error(s): {errors[0]}")
        self.errors = errors


@dataclass(frozen=True)
class Token:
    kind: str  # KW ID STRING NUMBER PUNCT INPUT EOF
    value: str
    line: int
    col: int


_PUNCT_TWO = ("->", "==", "!=")
_PUNCT_ONE = "{}();:,+="


def _is_ident_start(c: str) -> bool:
    return ("a" <= c <= "z") or ("A" <= c <= "Z") or c == "_"


def _is_ident_char(c: str) -> bool:
    return _is_ident_start(c) or ("0" <= c <= "9")


def _is_digit(c: str) -> bool:
    return "0" <= c <= "9"


class _Lexer:
    def __init__(self, source: str, file: str):
        self.src = source
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1
        self.errors: list[ParseError] = []

    def span(self, line: int | None = None, col: int | None = None) -> SourceSpan:
        return SourceSpan(self.file, line if line is not None else self.line, col if col is not None else self.col)

    def error(self, code: str, message: str, line: int | None = None, col: int | None = None) -> None:
        self.errors.append(ParseError(code, self.span(line, col), message))

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.src):
                if self.src[self.pos] == "\n":
                    self.line += 1
                    self.col = 1
                else:
                    self.col += 1
                self.pos += 1

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        while True:
            tok = self._next()
            out.append(tok)
            if tok.kind == "EOF":
                return out

    def _next(self) -> Token:
        while True:
            c = self._peek()
            if c and c in " \t\r\n":
                self._advance()
                continue
            if c == "/" and self._peek(1) == "/":
                while self._peek() not in ("", "\n"):
                    self._advance()
                continue

            line, col = self.line, self.col
            if c == "":
                return Token("EOF", "", line, col)
            if _is_ident_start(c):
                start = self.pos
                while _is_ident_char(self._peek()):
                    self._advance()
                word = self.src[start : self.pos]
                return Token("KW" if word in KEYWORDS else "ID", word, line, col)
            if _is_digit(c):
                start = self.pos
                while _is_digit(self._peek()):
                    self._advance()
                return Token("NUMBER", self.src[start : self.pos], line, col)
            if c == '"':
                return self._string(line, col)
            if c == "$":
                if self.src.startswith("$input", self.pos):
                    self._advance(6)
                    return Token("INPUT", "$input", line, col)
                self.error("LEX001", "bad character '$' (only $input is valid here)", line, col)
                self._advance()
                continue
            two = self.src[self.pos : self.pos + 2]
            if two in _PUNCT_TWO:
                self._advance(2)
                return Token("PUNCT", two, line, col)
            if c in _PUNCT_ONE:
                self._advance()
                return Token("PUNCT", c, line, col)
            self.error("LEX001", f"bad character {c!r}", line, col)
            self._advance()

    def _string(self, line: int, col: int) -> Token:
        self._advance()  # opening quote
        parts: list[str] = []
        while True:
            c = self._peek()
            if c == "" or c in "\n\r":
                self.error("LEX002", "unterminated string", line, col)
                break
            if c == '"':
                self._advance()
                break
            if c == "\\":
                esc_line, esc_col = self.line, self.col
                self._advance()
                e = self._peek()
                if e == '"':
                    parts.append('"')
                elif e == "\\":
                    parts.append("\\")
                elif e == "n":
                    parts.append("\n")
                else:
                    self.error("LEX003", f"bad escape '\\{e}'", esc_line, esc_col)
                if e != "":
                    self._advance()
                continue
            if c == "$" and self._peek(1) == "{":
                self._advance(2)
                name_start = self.pos
                while _is_ident_char(self._peek()):
                    self._advance()
                name = self.src[name_start : self.pos]
                if not name or not _is_ident_start(name[0]):
                    self.error("LEX001", "bad character in interpolation marker")
                    continue
                if self._peek() != "}":
                    self.error("LEX001", "bad character in interpolation marker (expected '}')")
                    continue
                self._advance()
                parts.append("${" + name + "}")
                continue
            parts.append(c)
            self._advance()
        return Token("STRING", "".join(parts), line, col)


class _Parser:
    def __init__(self, tokens: list[Token], file: str, errors: list[ParseError]):
        self.toks = tokens
        self.file = file
        self.i = 0
        self.errors = errors

    # -- token plumbing

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at_kw(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "KW" and t.value == word

    def at_punct(self, value: str) -> bool:
        t = self.peek()
        return t.kind == "PUNCT" and t.value == value

    def span_of(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.file, tok.line, tok.col)

    def error_at(self, tok: Token, message: str, code: str | None = None) -> None:
        if code is None:
            code = "SYN002" if tok.kind == "EOF" else "SYN001"
        self.errors.append(ParseError(code, self.span_of(tok), message))

    def expect_kw(self, word: str) -> Token | None:
        if self.at_kw(word):
            return self.next()
        self.error_at(self.peek(), f"expected '{word}'")
        return None

    def expect_punct(self, value: str) -> Token | None:
        if self.at_punct(value):
            return self.next()
        self.error_at(self.peek(), f"expected '{value}'")
        return None

    def expect_id(self, what: str) -> Token | None:
        t = self.peek()
        if t.kind == "ID":
            return self.next()
        self.error_at(t, f"expected {what} name")
        return None

    def expect_string(self, what: str) -> Token | None:
        t = self.peek()
        if t.kind == "STRING":
            return self.next()
        self.error_at(t, f"expected {what} string")
        return None

    class _Abort(Exception):
        """Internal: unwinds to the item loop for resynchronization."""

    def bail(self, tok: Token, message: str) -> None:
        self.error_at(tok, message)
        raise self._Abort()

    def sync_to_item(self) -> None:
        while True:
            t = self.peek()
            if t.kind == "EOF" or (t.kind == "KW" and t.value in ITEM_KEYWORDS):
                return
            self.next()

    # -- items

    def parse_spec(self) -> tuple[list, list, list, list]:
        diagrams: list[StdDiagram] = []
        schemas: list[ErSchema] = []
        charts: list[ScChart] = []
        actions: list[ActionDef] = []
        while True:
            t = self.peek()
            if t.kind == "EOF":
                return diagrams, schemas, charts, actions
            try:
                if self.at_kw("diagram"):
                    diagrams.append(self.parse_diagram())
                elif self.at_kw("data"):
                    schemas.append(self.parse_data())
                elif self.at_kw("chart"):
                    charts.append(self.parse_chart())
                elif self.at_kw("action"):
                    actions.append(self.parse_action())
                else:
                    self.error_at(t, "expected a top-level item (diagram, data, chart, or action)")
                    self.next()
                    self.sync_to_item()
            except self._Abort:
                self.sync_to_item()

    def check_unique(self, kind: str, name_tok: Token, seen: dict[str, Token]) -> None:
        prev = seen.get(name_tok.value)
        if prev is not None:
            self.errors.append(
                ParseError(
                    "DUP_NAME",
                    self.span_of(name_tok),
                    f"duplicate {kind} name '{name_tok.value}' (first declared at line {prev.line})",
                )
            )
        else:
            seen[name_tok.value] = name_tok

    def parse_diagram(self) -> StdDiagram:
        kw = self.next()  # diagram
        name = self.expect_id("diagram")
        if name is None or self.expect_punct("{") is None:
            raise self._Abort()
        entry: str | None = None
        entry_tok: Token | None = None
        exits: list[str] = []
        nodes: list[StdNode] = []
        node_seen: dict[str, Token] = {}
        arcs: list[StdArc] = []
        while not self.at_punct("}"):
            t = self.peek()
            if t.kind == "EOF":
                self.bail(t, "unexpected end of input inside diagram body")
            if self.at_kw("entry"):
                self.next()
                n = self.expect_id("entry node")
                if n is None:
                    raise self._Abort()
                if entry_tok is not None:
                    self.error_at(n, f"duplicate entry declaration (first at line {entry_tok.line})")
                else:
                    entry, entry_tok = n.value, n
                self.semi()
            elif self.at_kw("exit"):
                self.next()
                n = self.expect_id("exit node")
                if n is None:
                    raise self._Abort()
                exits.append(n.value)
                self.semi()
            elif self.at_kw("node"):
                self.next()
                n = self.expect_id("node")
                if n is None or self.expect_kw("output") is None:
                    raise self._Abort()
                s = self.expect_string("output")
                if s is None:
                    raise self._Abort()
                self.check_unique("node", n, node_seen)
                nodes.append(StdNode(n.value, s.value, self.span_of(n)))
                self.semi()
            elif self.at_kw("arc"):
                arcs.append(self.parse_arc(len(arcs)))
            else:
                self.bail(t, "expected a diagram statement (entry, exit, node, or arc)")
        self.next()  # }
        return StdDiagram(
            name=name.value,
            entry=entry,
            exits=frozenset(exits),
            nodes=tuple(nodes),
            arcs=tuple(arcs),
            span=self.span_of(kw),
        )

    def parse_arc(self, decl_index: int) -> StdArc:
        kw = self.next()  # arc
        frm = self.expect_id("source node")
        if frm is None or self.expect_punct("->") is None:
            raise self._Abort()
        target: PlainTarget | CallTarget
        if self.at_kw("call"):
            self.next()
            callee = self.expect_id("called diagram")
            if callee is None or self.expect_kw("return") is None:
                raise self._Abort()
            ret = self.expect_id("return node")
            if ret is None:
                raise self._Abort()
            target = CallTarget(callee.value, ret.value)
        else:
            tgt = self.expect_id("target node")
            if tgt is None:
                raise self._Abort()
            target = PlainTarget(tgt.value)
        if self.expect_kw("on") is None:
            raise self._Abort()
        pattern: str | Otherwise
        if self.at_kw("otherwise"):
            self.next()
            pattern = OTHERWISE
        else:
            p = self.expect_string("pattern")
            if p is None:
                raise self._Abort()
            pattern = p.value
        guard: Guard | None = None
        if self.at_kw("when"):
            self.next()
            var = self.expect_id("guard variable")
            if var is None:
                raise self._Abort()
            t = self.peek()
            if t.kind == "PUNCT" and t.value in ("==", "!="):
                self.next()
                op = GuardOp.EQ if t.value == "==" else GuardOp.NEQ
            else:
                self.bail(t, "expected '==' or '!=' in guard")
            val = self.expect_string("guard value")
            if val is None:
                raise self._Abort()
            guard = Guard(var.value, op, val.value)
        action: str | None = None
        if self.at_kw("do"):
            self.next()
            act = self.expect_id("action")
            if act is None:
                raise self._Abort()
            action = act.value
        self.semi()
        return StdArc(
            from_node=frm.value,
            target=target,
            pattern=pattern,
            guard=guard,
            action=action,
            decl_index=decl_index,
            span=self.span_of(kw),
        )

    def parse_data(self) -> ErSchema:
        kw = self.next()  # data
        name = self.expect_id("schema")
        if name is None or self.expect_punct("{") is None:
            raise self._Abort()
        entities: list[Entity] = []
        entity_seen: dict[str, Token] = {}
        relations: list[Relation] = []
        relation_seen: dict[str, Token] = {}
        while not self.at_punct("}"):
            t = self.peek()
            if t.kind == "EOF":
                self.bail(t, "unexpected end of input inside data body")
            if self.at_kw("entity"):
                entities.append(self.parse_entity(entity_seen))
            elif self.at_kw("relation"):
                relations.append(self.parse_relation(relation_seen))
            else:
                self.bail(t, "expected 'entity' or 'relation'")
        self.next()
        return ErSchema(name.value, tuple(entities), tuple(relations), self.span_of(kw))

    def parse_entity(self, entity_seen: dict[str, Token]) -> Entity:
        kw = self.next()  # entity
        name = self.expect_id("entity")
        if name is None or self.expect_punct("{") is None:
            raise self._Abort()
        self.check_unique("entity", name, entity_seen)
        attrs: list[EntityAttr] = []
        attr_seen: dict[str, Token] = {}
        while not self.at_punct("}"):
            t = self.peek()
            if t.kind == "EOF":
                self.bail(t, "unexpected end of input inside entity body")
            a = self.expect_id("attribute")
            if a is None or self.expect_punct(":") is None:
                raise self._Abort()
            ty = self.peek()
            if ty.kind == "KW" and ty.value in ("int", "string", "bool", "date"):
                self.next()
            else:
                self.bail(ty, "expected attribute type (int, string, bool, or date)")
            is_key = False
            if self.at_kw("key"):
                self.next()
                is_key = True
            self.check_unique("attribute", a, attr_seen)
            attrs.append(EntityAttr(a.value, AttrType(ty.value), is_key))
            self.semi()
        self.next()
        return Entity(name.value, tuple(attrs), self.span_of(kw))

    def parse_relation(self, relation_seen: dict[str, Token]) -> Relation:
        kw = self.next()  # relation
        name = self.expect_id("relation")
        if name is None or self.expect_punct("(") is None:
            raise self._Abort()
        self.check_unique("relation", name, relation_seen)
        left = self.parse_relation_end()
        if self.expect_punct(",") is None:
            raise self._Abort()
        right = self.parse_relation_end()
        if self.expect_punct(")") is None:
            raise self._Abort()
        self.semi()
        return Relation(name.value, left, right, self.span_of(kw))

    def parse_relation_end(self) -> RelationEnd:
        ent = self.expect_id("entity")
        if ent is None:
            raise self._Abort()
        t = self.peek()
        if t.kind == "NUMBER" and t.value == "1":
            self.next()
            return RelationEnd(ent.value, Card.ONE)
        if t.kind == "ID" and t.value == "N":
            self.next()
            return RelationEnd(ent.value, Card.MANY)
        self.bail(t, "expected cardinality '1' or 'N'")
        raise AssertionError("unreachable")

    def parse_chart(self) -> ScChart:
        kw = self.next()  # chart
        name = self.expect_id("chart")
        if name is None or self.expect_punct("{") is None:
            raise self._Abort()
        modules: list[ScModule] = []
        module_seen: dict[str, Token] = {}
        root_tok: Token | None = None
        while not self.at_punct("}"):
            t = self.peek()
            if t.kind == "EOF":
                self.bail(t, "unexpected end of input inside chart body")
            if not self.at_kw("module"):
                self.bail(t, "expected 'module'")
            self.next()
            mname = self.expect_id("module")
            if mname is None:
                raise self._Abort()
            self.check_unique("module", mname, module_seen)
            is_root = False
            if self.at_kw("root"):
                r = self.next()
                is_root = True
                if root_tok is not None:
                    self.error_at(r, f"more than one root module in chart '{name.value}' (first at line {root_tok.line})")
                else:
                    root_tok = r
            if self.expect_punct("{") is None:
                raise self._Abort()
            invocations: list[Invocation] = []
            while not self.at_punct("}"):
                t = self.peek()
                if t.kind == "EOF":
                    self.bail(t, "unexpected end of input inside module body")
                if not self.at_kw("invokes"):
                    self.bail(t, "expected 'invokes'")
                self.next()
                callee = self.expect_id("callee module")
                if callee is None:
                    raise self._Abort()
                couples: list[str] = []
                if self.at_kw("with"):
                    self.next()
                    c = self.expect_id("couple")
                    if c is None:
                        raise self._Abort()
                    couples.append(c.value)
                    while self.at_punct(","):
                        self.next()
                        c = self.expect_id("couple")
                        if c is None:
                            raise self._Abort()
                        couples.append(c.value)
                invocations.append(Invocation(callee.value, tuple(couples)))
                self.semi()
            self.next()  # inner }
            modules.append(ScModule(mname.value, is_root, tuple(invocations), self.span_of(mname)))
        self.next()  # }
        return ScChart(name.value, tuple(modules), self.span_of(kw))

    def parse_action(self) -> ActionDef:
        kw = self.next()  # action
        name = self.expect_id("action")
        if name is None or self.expect_punct("{") is None:
            raise self._Abort()
        assignments: list[Assignment] = []
        while not self.at_punct("}"):
            t = self.peek()
            if t.kind == "EOF":
                self.bail(t, "unexpected end of input inside action body")
            var = self.expect_id("variable")
            if var is None or self.expect_punct("=") is None:
                raise self._Abort()
            terms = [self.parse_term()]
            while self.at_punct("+"):
                self.next()
                terms.append(self.parse_term())
            assignments.append(Assignment(var.value, tuple(terms)))
            self.semi()
        self.next()
        return ActionDef(name.value, tuple(assignments), self.span_of(kw))

    def parse_term(self) -> Term:
        t = self.peek()
        if t.kind == "STRING":
            self.next()
            return Term("literal", t.value)
        if t.kind == "ID":
            self.next()
            return Term("variable", t.value)
        if t.kind == "INPUT":
            self.next()
            return Term("input", "")
        self.bail(t, "expected a term (string, variable, or $input)")
        raise AssertionError("unreachable")

    def semi(self) -> None:
        if self.expect_punct(";") is None:
            raise self._Abort()


def _check_toplevel_unique(items, kind: str, errors: list[ParseError]) -> None:
    seen: dict[str, object] = {}
    for elem in items:
        if elem.name in seen:
            first = seen[elem.name]
            at = f" (first declared at line {first.span.line})" if getattr(first, "span", None) else ""
            span = elem.span or SourceSpan("<unknown>", 1, 1)
            errors.append(ParseError("DUP_NAME", span, f"duplicate {kind} name '{elem.name}'{at}"))
        else:
            seen[elem.name] = elem


def parse(source: str, source_name: str = "<string>") -> DesignModel:
    """Parse source text into a DesignModel; raise ParseFailure on any error."""
    lexer = _Lexer(source, source_name)
    tokens = lexer.tokens()
    errors = list(lexer.errors)
    parser = _Parser(tokens, source_name, errors)
    diagrams, schemas, charts, actions = parser.parse_spec()
    _check_toplevel_unique(diagrams, "diagram", errors)
    _check_toplevel_unique(schemas, "schema", errors)
    _check_toplevel_unique(charts, "chart", errors)
    _check_toplevel_unique(actions, "action", errors)
    errors.sort(key=lambda e: (e.span.line, e.span.col))
    if errors:
        raise ParseFailure(errors)
    return DesignModel(
        diagrams=tuple(diagrams),
        schemas=tuple(schemas),
        charts=tuple(charts),
        actions=tuple(actions),
        source_name=source_name,
    )


def parse_file(path, source_name: str | None = None) -> DesignModel:
    """Read a `.use` file and parse it; the file name becomes the source name."""
    import pathlib

    p = pathlib.Path(path)
    return parse(p.read_text(encoding="utf-8"), source_name or p.name)
