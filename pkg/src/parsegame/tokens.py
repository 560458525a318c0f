from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Tuple


class TokenKind(str, Enum):
    LITERAL = "literal"
    NUM = "NUM"
    IDENT = "IDENT"


class Token(NamedTuple):
    kind: TokenKind
    text: str
    start: int  # character offsets, end exclusive
    end: int


_NUMBER = re.compile(r"\d+")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_BLANK = re.compile(r"\s+")


@dataclass(frozen=True)
class TokenString:
    text: str
    tokens: Tuple[Token, ...]
    _prefix: Tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        sizes = (len(t.text) for t in self.tokens)
        object.__setattr__(self, "_prefix", (0,) + tuple(itertools.accumulate(sizes)))

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, i: int) -> Token:
        return self.tokens[i]

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def nonblank_size(self, i: int = 0, j: "int | None" = None) -> int:
        """Non-blank characters covered by tokens i..j-1."""
        j = len(self.tokens) if j is None else j
        if j <= i:
            return 0
        return self._prefix[j] - self._prefix[i]

    def char_range(self, i: int, j: int) -> Tuple[int, int]:
        """Character range of tokens i..j-1; for an empty span, the gap it sits in."""
        if i < j:
            return self.tokens[i].start, self.tokens[j - 1].end
        lo = self.tokens[i - 1].end if i > 0 else 0
        hi = self.tokens[i].start if i < len(self.tokens) else len(self.text)
        return lo, hi

    def excerpt(self, i: int, j: int) -> str:
        if j <= i:
            return ""
        lo, hi = self.char_range(i, j)
        return self.text[lo:hi]

    def kinds(self) -> Tuple[str, ...]:
        return tuple(t.text if t.kind is TokenKind.LITERAL else t.kind.value for t in self.tokens)


def tokenize(text: str, literals: Iterable[str] = ()) -> TokenString:
    """Maximal-munch tokenizer; never fails.

    Digit runs are NUM and words are IDENT unless their text is a grammar
    literal. Anything else is the longest matching operator literal, or a
    single-character literal.
    """
    literals = frozenset(literals)
    operators = sorted((lit for lit in literals if not _WORD.fullmatch(lit) and not _NUMBER.fullmatch(lit)), key=len, reverse=True)
    tokens = []
    pos = 0
    while pos < len(text):
        m = _BLANK.match(text, pos)
        if m:
            pos = m.end()
            continue
        m = _NUMBER.match(text, pos)
        if m:
            kind = TokenKind.LITERAL if m.group() in literals else TokenKind.NUM
            tokens.append(Token(kind, m.group(), pos, m.end()))
            pos = m.end()
            continue
        m = _WORD.match(text, pos)
        if m:
            kind = TokenKind.LITERAL if m.group() in literals else TokenKind.IDENT
            tokens.append(Token(kind, m.group(), pos, m.end()))
            pos = m.end()
            continue
        op = next((o for o in operators if text.startswith(o, pos)), text[pos])
        tokens.append(Token(TokenKind.LITERAL, op, pos, pos + len(op)))
        pos += len(op)
    return TokenString(text=text, tokens=tuple(tokens))
