import re
from typing import Iterable, List, NamedTuple, Optional, Sequence

from .exceptions import EmptyExpressionError, ShapeSyntaxError

# Regex pattern for recognising the tokens shared by the shape-function and
# generator languages: numbers, identifiers and single-character operators
TOKEN_PATTERN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)

NUMBER = "number"
NAME = "name"
OP = "op"
END = "end"


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(text: str, error_class=ShapeSyntaxError) -> List[Token]:
    """
    Splits ``text`` into ``Token`` objects, each remembering the character
    position it started at so that syntax errors can point at the culprit.
    A closing ``END`` token is always appended.
    """
    if not text or not text.strip():
        raise EmptyExpressionError(text or "")

    tokens = []
    position = 0
    length = len(text)
    while position < length:
        if text[position:].strip() == "":
            break
        match = TOKEN_PATTERN.match(text, position)
        if not match or match.end() == position:
            offset = position + len(text[position:]) - len(text[position:].lstrip())
            raise error_class(f"unexpected character '{text[offset]}'", offset, text)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), start))
        position = match.end()

    tokens.append(Token(END, "", length))
    return tokens


class TokenStream:
    """
    A tiny cursor over a list of tokens, used by the recursive-descent
    parsers in ``shapefn`` and ``generators``.
    """

    __slots__ = ("tokens", "index", "text", "error_class")

    def __init__(self, tokens: Sequence[Token], text: str, error_class=ShapeSyntaxError):
        self.tokens = tokens
        self.index = 0
        self.text = text
        self.error_class = error_class

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def peek_is(self, kind: str, values: Optional[Iterable[str]] = None) -> bool:
        token = self.current
        if token.kind != kind:
            return False
        return values is None or token.text in values

    def advance(self) -> Token:
        token = self.tokens[self.index]
        if token.kind != END:
            self.index += 1
        return token

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        token = self.current
        if token.kind != kind or (value is not None and token.text != value):
            wanted = repr(value) if value is not None else kind
            self.error(f"expected {wanted}")
        return self.advance()

    def expect_end(self) -> None:
        if self.current.kind != END:
            self.error(f"unexpected '{self.current.text}'")

    def error(self, message: str, token: Optional[Token] = None):
        token = token or self.current
        if token.kind == END:
            message = f"{message}, found end of input"
        raise self.error_class(message, token.position, self.text)
