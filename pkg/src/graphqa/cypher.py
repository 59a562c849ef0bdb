"""Restricted Cypher subset: AST, parser, canonical serializer, and the rule
that pulls a query out of free-form LLM output.

Grammar (keywords case-insensitive, identifiers case-sensitive):

    query     := match_clause+ RETURN return_item ("," return_item)* ";"?
    match     := MATCH path ("," path)* (WHERE name_eq (AND name_eq)*)?
    path      := node (rel node)*
    node      := "(" var? (":" name)? ("{" "name" ":" string "}")? ")"
    rel       := "-[" var? ":" name "]->" | "<-[" var? ":" name "]-" | "-[" var? ":" name "]-"
    name_eq   := var "." "name" "=" string
    name      := identifier | "`" ... "`"

``WHERE v.name = "X"`` conjunctions are folded into inline name filters; an
undirected relationship is normalized to left-to-right (the schema-aware
direction check reorients it later). Anything else outside the subset --
variable-length ``*`` markers, write clauses, WITH, aggregates, DISTINCT,
LIMIT -- is a ParseError with a position, never undefined behavior.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

LEFT_TO_RIGHT = "left_to_right"
RIGHT_TO_LEFT = "right_to_left"

_IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"[0-9]+(\.[0-9]+)?")

_UNSUPPORTED_CLAUSES = {
    "create", "merge", "delete", "detach", "set", "remove", "with", "unwind",
    "optional", "call", "union", "order", "skip", "limit", "distinct",
    "foreach", "case",
}


class ParseError(Exception):
    """Query text falls outside the supported subset. Carries an offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        line = text.count("\n", 0, position) + 1
        column = position - (text.rfind("\n", 0, position) + 1) + 1
        super().__init__(f"{message} (line {line}, column {column})")


class ExtractionError(Exception):
    """LLM output does not contain an extractable query."""


class NoMatchFound(ExtractionError):
    pass


class NoReturnFound(ExtractionError):
    pass


@dataclass
class NodePattern:
    """``(variable:label {name:"..."})`` -- each part optional, never all absent."""

    variable: str | None = None
    label: str | None = None
    name_filter: str | None = None


@dataclass
class RelPattern:
    """A typed relationship with a concrete direction; no variable-length markers."""

    relation: str
    direction: str = LEFT_TO_RIGHT


@dataclass
class PathPattern:
    """Alternating nodes and relationships: n nodes, n-1 relationships."""

    nodes: list[NodePattern] = field(default_factory=list)
    relationships: list[RelPattern] = field(default_factory=list)

    def hops(self) -> int:
        return len(self.relationships)


@dataclass
class ReturnItem:
    variable: str
    property: str | None = None


@dataclass
class CypherQuery:
    """All path patterns (multiple MATCH clauses flattened) plus return items."""

    patterns: list[PathPattern] = field(default_factory=list)
    return_items: list[ReturnItem] = field(default_factory=list)

    def bound_variables(self) -> set[str]:
        return {
            node.variable
            for pattern in self.patterns
            for node in pattern.nodes
            if node.variable
        }


# ---------------------------------------------------------------------------
# LLM-output extraction
# ---------------------------------------------------------------------------

_MATCH_LINE_RE = re.compile(r"^match\b", re.IGNORECASE)
_RETURN_RE = re.compile(r"\breturn\b", re.IGNORECASE)


def extract_cypher_block(llm_output: str) -> str:
    """Cut the query out of free-form model output.

    Takes everything from the first line whose trimmed content starts with
    MATCH through the first line (that one included) containing RETURN;
    surrounding prose and code fences fall away. Idempotent on its own output.
    """
    lines = llm_output.splitlines()
    start = None
    for i, line in enumerate(lines):
        if _MATCH_LINE_RE.match(line.strip()):
            start = i
            break
    if start is None:
        raise NoMatchFound("no MATCH statement found in the model output")
    for j in range(start, len(lines)):
        if _RETURN_RE.search(lines[j]):
            return "\n".join(lines[start : j + 1])
    raise NoReturnFound("found MATCH but no RETURN statement after it")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass
class _Token:
    kind: str  # "ident", "quoted_ident", "string", "punct", "end"
    value: str
    pos: int


_PUNCT = set("(){}[]:,.<>-;=*")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "\"'":
            quote, start = ch, i
            i += 1
            out: list[str] = []
            while i < n and text[i] != quote:
                if text[i] == "\\":
                    if i + 1 >= n:
                        raise ParseError("unterminated string literal", start, text)
                    out.append(text[i + 1])
                    i += 2
                else:
                    out.append(text[i])
                    i += 1
            if i >= n:
                raise ParseError("unterminated string literal", start, text)
            tokens.append(_Token("string", "".join(out), start))
            i += 1
            continue
        if ch == "`":
            start = i
            end = text.find("`", i + 1)
            if end == -1:
                raise ParseError("unterminated backtick-quoted name", start, text)
            tokens.append(_Token("quoted_ident", text[i + 1 : end], start))
            i = end + 1
            continue
        m = _IDENTIFIER_RE.match(text, i)
        if m:
            tokens.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            # numbers never appear in the subset's grammar; tokenize them so
            # the error points at the clause that used them
            tokens.append(_Token("number", m.group(), i))
            i = m.end()
            continue
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i, text)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.pos, self.text)

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.value.lower() == word

    def expect_punct(self, ch: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.value != ch:
            raise self.error(f"expected {ch!r} {what}")
        return self.advance()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> CypherQuery:
        query = self.query = CypherQuery()
        first = self.peek()
        if first.kind == "ident" and first.value.lower() in _UNSUPPORTED_CLAUSES:
            raise self.error(f"unsupported clause {first.value.upper()!r}", first)
        if not self.at_keyword("match"):
            raise self.error("expected MATCH", first)
        while self.at_keyword("match"):
            self.advance()
            query.patterns.append(self.parse_path())
            while self.peek().kind == "punct" and self.peek().value == ",":
                self.advance()
                query.patterns.append(self.parse_path())
            if self.at_keyword("where"):
                self.advance()
                self.parse_where(query)
        if not self.at_keyword("return"):
            tok = self.peek()
            if tok.kind == "ident" and tok.value.lower() in _UNSUPPORTED_CLAUSES:
                raise self.error(f"unsupported clause {tok.value.upper()!r}", tok)
            raise self.error("expected RETURN")
        self.advance()
        query.return_items.append(self.parse_return_item())
        while self.peek().kind == "punct" and self.peek().value == ",":
            self.advance()
            query.return_items.append(self.parse_return_item())
        if self.peek().kind == "punct" and self.peek().value == ";":
            self.advance()
        tail = self.peek()
        if tail.kind != "end":
            if tail.kind == "ident" and tail.value.lower() in _UNSUPPORTED_CLAUSES:
                raise self.error(f"unsupported clause {tail.value.upper()!r}", tail)
            raise self.error(f"unexpected trailing input {tail.value!r}", tail)
        return query

    def parse_path(self) -> PathPattern:
        path = PathPattern()
        path.nodes.append(self.parse_node())
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value in "-<":
                rel = self.parse_rel()
                path.relationships.append(rel)
                path.nodes.append(self.parse_node())
            else:
                return path

    def parse_node(self) -> NodePattern:
        open_tok = self.expect_punct("(", "to start a node pattern")
        node = NodePattern()
        tok = self.peek()
        if tok.kind == "ident":
            node.variable = self.advance().value
        tok = self.peek()
        if tok.kind == "punct" and tok.value == ":":
            self.advance()
            name_tok = self.peek()
            if name_tok.kind not in ("ident", "quoted_ident"):
                raise self.error("expected a label after ':'")
            node.label = self.advance().value
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "{":
            self.advance()
            node.name_filter = self.parse_name_map()
        self.expect_punct(")", "to close the node pattern")
        if node.variable is None and node.label is None and node.name_filter is None:
            raise self.error(
                "empty node pattern (needs a variable, label, or name filter)", open_tok
            )
        return node

    def parse_name_map(self) -> str:
        key = self.peek()
        if key.kind != "ident":
            raise self.error("expected a property key inside '{...}'")
        if key.value != "name":
            raise self.error(f"unsupported node property {key.value!r} (only 'name')", key)
        self.advance()
        self.expect_punct(":", "after the property key")
        value = self.peek()
        if value.kind != "string":
            raise self.error("expected a quoted string as the name value")
        self.advance()
        tok = self.peek()
        if tok.kind == "punct" and tok.value == ",":
            raise self.error("only the 'name' property is supported in node patterns", tok)
        self.expect_punct("}", "to close the property map")
        return value.value

    def parse_rel(self) -> RelPattern:
        tok = self.advance()  # "-" or "<"
        direction = LEFT_TO_RIGHT
        if tok.value == "<":
            direction = RIGHT_TO_LEFT
            self.expect_punct("-", "after '<'")
        bracket = self.peek()
        if bracket.kind != "punct" or bracket.value != "[":
            raise self.error("relationship type required (write -[:relation]->)", bracket)
        self.advance()
        if self.peek().kind == "ident":
            self.advance()  # relationship variable: accepted and discarded
        colon = self.peek()
        if colon.kind != "punct" or colon.value != ":":
            raise self.error("relationship type required (write -[:relation]->)", colon)
        self.advance()
        name_tok = self.peek()
        if name_tok.kind not in ("ident", "quoted_ident"):
            raise self.error("expected a relationship type after ':'")
        relation = self.advance().value
        star = self.peek()
        if star.kind == "punct" and star.value == "*":
            raise self.error(
                "variable-length relationship operator '*' (asterisk) is not supported",
                star,
            )
        self.expect_punct("]", "to close the relationship")
        self.expect_punct("-", "after ']'")
        arrow = self.peek()
        if arrow.kind == "punct" and arrow.value == ">":
            if direction == RIGHT_TO_LEFT:
                raise self.error("relationship cannot point both ways", arrow)
            self.advance()
        return RelPattern(relation=relation, direction=direction)

    def parse_return_item(self) -> ReturnItem:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error("expected a variable in RETURN")
        if tok.value.lower() in _UNSUPPORTED_CLAUSES:
            raise self.error(f"unsupported clause {tok.value.upper()!r}", tok)
        self.advance()
        nxt = self.peek()
        if nxt.kind == "punct" and nxt.value == "(":
            raise self.error(
                f"aggregate or function calls such as {tok.value}(...) are not supported", tok
            )
        item = ReturnItem(variable=tok.value)
        if nxt.kind == "punct" and nxt.value == ".":
            self.advance()
            prop = self.peek()
            if prop.kind != "ident":
                raise self.error("expected a property name after '.'")
            item.property = self.advance().value
        return item

    def parse_where(self, query: CypherQuery) -> None:
        while True:
            var_tok = self.peek()
            if var_tok.kind != "ident":
                raise self.error("expected a variable in WHERE")
            self.advance()
            self.expect_punct(".", "after the WHERE variable")
            prop = self.peek()
            if prop.kind != "ident" or prop.value != "name":
                raise self.error("only name equality is supported in WHERE", prop)
            self.advance()
            op = self.peek()
            if op.kind != "punct" or op.value != "=":
                raise self.error("only equality comparisons are supported in WHERE", op)
            self.advance()
            value = self.peek()
            if value.kind != "string":
                raise self.error("expected a quoted string on the right of '='")
            self.advance()
            self.apply_name_equality(var_tok, value.value)
            if self.at_keyword("and"):
                self.advance()
                continue
            return

    def apply_name_equality(self, var_tok: _Token, value: str) -> None:
        # WHERE applies to variables bound by any MATCH clause parsed so far
        occurrences = [
            node
            for pattern in self.query.patterns
            for node in pattern.nodes
            if node.variable == var_tok.value
        ]
        if not occurrences:
            raise self.error(
                f"WHERE references unknown variable {var_tok.value!r}", var_tok
            )
        for node in occurrences:
            if node.name_filter is not None and node.name_filter != value:
                raise self.error(
                    f"conflicting name constraints for variable {var_tok.value!r}",
                    var_tok,
                )
        target = occurrences[0]
        if target.name_filter is None:
            target.name_filter = value


def parse_query(text: str) -> CypherQuery:
    """Parse query text into an AST, or raise ParseError with a position."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Serializer
# ---------------------------------------------------------------------------

def escape_identifier(name: str) -> str:
    """Backtick-quote a label/relation unless it is a plain identifier."""
    if _IDENTIFIER_RE.fullmatch(name):
        return name
    if "`" in name:
        raise ValueError(f"cannot serialize a name containing a backtick: {name!r}")
    return f"`{name}`"


def escape_string(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def serialize_node(node: NodePattern) -> str:
    parts = node.variable or ""
    if node.label is not None:
        parts += f":{escape_identifier(node.label)}"
    if node.name_filter is not None:
        prefix = " " if parts else ""
        parts += f'{prefix}{{name:"{escape_string(node.name_filter)}"}}'
    return f"({parts})"


def serialize_rel(rel: RelPattern) -> str:
    body = f"[:{escape_identifier(rel.relation)}]"
    if rel.direction == RIGHT_TO_LEFT:
        return f"<-{body}-"
    return f"-{body}->"


def serialize_return_item(item: ReturnItem) -> str:
    if item.property is None:
        return item.variable
    return f"{item.variable}.{item.property}"


def serialize_path(path: PathPattern) -> str:
    out = [serialize_node(path.nodes[0])]
    for rel, node in zip(path.relationships, path.nodes[1:]):
        out.append(serialize_rel(rel))
        out.append(serialize_node(node))
    return "".join(out)


def serialize_query(query: CypherQuery) -> str:
    """Canonical text: one MATCH clause, inline name filters, RETURN on its
    own line. Equal ASTs produce byte-identical text."""
    patterns = ", ".join(serialize_path(p) for p in query.patterns)
    items = ", ".join(serialize_return_item(i) for i in query.return_items)
    return f"MATCH {patterns}\nRETURN {items}"


# ---------------------------------------------------------------------------
# JSON projection (stable shape used by the pipeline trace and the HTTP API)
# ---------------------------------------------------------------------------

def query_to_json(query: CypherQuery) -> dict:
    return {
        "patterns": [
            _path_to_json(p) for p in query.patterns
        ],
        "return_items": [
            {"variable": i.variable, "property": i.property} for i in query.return_items
        ],
    }


def _path_to_json(path: PathPattern) -> list[dict]:
    elements: list[dict] = [_node_to_json(path.nodes[0])]
    for rel, node in zip(path.relationships, path.nodes[1:]):
        elements.append({"kind": "rel", "relation": rel.relation, "direction": rel.direction})
        elements.append(_node_to_json(node))
    return elements


def _node_to_json(node: NodePattern) -> dict:
    return {
        "kind": "node",
        "variable": node.variable,
        "label": node.label,
        "name": node.name_filter,
    }
