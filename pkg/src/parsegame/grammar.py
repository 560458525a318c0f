"""
Grammar file loader and validator.

Line-oriented format:

    # comment
    E ::= NUM
    E ::= 'let' IDENT '=' E 'in' E

Quoted items are literals, bare UPPERCASE names are nonterminals, NUM and
IDENT are token classes. Lines for the same nonterminal accumulate in order.
Productions must carry at least one terminal and may not place two
nonterminals side by side, so every subproblem of a parse is strictly smaller.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from common.errors import GrammarError
from parsegame.tokens import Token, TokenKind

logger = logging.getLogger(__name__)

TOKEN_CLASSES = ("NUM", "IDENT")

_NT_NAME = re.compile(r"[A-Z][A-Z0-9_]*$")
_ITEM = re.compile(r"""\s*(?:'(?P<sq>[^']*)'|"(?P<dq>[^"]*)"|(?P<word>[A-Za-z_][A-Za-z0-9_]*)|(?P<hash>\#)|(?P<bad>\S))""")


@dataclass(frozen=True)
class Terminal:
    kind: TokenKind
    text: str = ""

    def matches(self, token: Token) -> bool:
        if self.kind is TokenKind.LITERAL:
            return token.kind is TokenKind.LITERAL and token.text == self.text
        return token.kind is self.kind

    def __str__(self) -> str:
        return self.kind.value if self.kind is not TokenKind.LITERAL else repr(self.text)


Symbol = Union[Terminal, str]


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: Tuple[Symbol, ...]
    index: int  # 1-based among the productions of lhs
    line: int = 0

    @property
    def label(self) -> str:
        return f"{self.lhs}#{self.index}"

    @property
    def nonterminals(self) -> Tuple[str, ...]:
        return tuple(s for s in self.rhs if isinstance(s, str))

    @property
    def runs(self) -> Tuple[Tuple[Terminal, ...], ...]:
        """Terminal runs around the nonterminals; one more run than nonterminals.

        The first and last run may be empty; interior runs never are.
        """
        runs: List[List[Terminal]] = [[]]
        for s in self.rhs:
            if isinstance(s, str):
                runs.append([])
            else:
                runs[-1].append(s)
        return tuple(tuple(r) for r in runs)

    def __str__(self) -> str:
        return f"{self.lhs} ::= " + " ".join(str(s) for s in self.rhs)


@dataclass(frozen=True)
class Grammar:
    nonterminals: Tuple[str, ...]
    productions: Dict[str, Tuple[Production, ...]] = field(hash=False)
    source: str = "<grammar>"

    @property
    def start(self) -> str:
        return self.nonterminals[0]

    @property
    def literals(self) -> frozenset:
        return frozenset(
            s.text
            for prods in self.productions.values()
            for p in prods
            for s in p.rhs
            if isinstance(s, Terminal) and s.kind is TokenKind.LITERAL
        )

    def productions_of(self, nt: str) -> Tuple[Production, ...]:
        try:
            return self.productions[nt]
        except KeyError:
            raise GrammarError(f"unknown nonterminal {nt!r}", source=self.source) from None

    def __len__(self) -> int:
        return sum(len(p) for p in self.productions.values())


def _parse_items(rhs: str, line: int, source: str) -> List[Symbol]:
    items: List[Symbol] = []
    pos = 0
    while pos < len(rhs):
        m = _ITEM.match(rhs, pos)
        if m is None:
            break  # trailing whitespace
        pos = m.end()
        if m.group("hash"):
            break
        if m.group("bad"):
            raise GrammarError(f"unexpected character {m.group('bad')!r}", line, source)
        literal = m.group("sq") if m.group("sq") is not None else m.group("dq")
        if literal is not None:
            if not literal:
                raise GrammarError("empty literal ''", line, source)
            items.append(Terminal(TokenKind.LITERAL, literal))
            continue
        word = m.group("word")
        if word in TOKEN_CLASSES:
            items.append(Terminal(TokenKind(word)))
        elif _NT_NAME.match(word):
            items.append(word)
        else:
            raise GrammarError(f"bare word {word!r}: quote literals, nonterminals are UPPERCASE", line, source)
    return items


def _validate(lhs: str, items: List[Symbol], line: int, source: str) -> None:
    if not items:
        raise GrammarError(f"epsilon production for {lhs}", line, source)
    if len(items) == 1 and isinstance(items[0], str):
        raise GrammarError(f"lone nonterminal right-hand side {lhs} ::= {items[0]}", line, source)
    for a, b in zip(items, items[1:]):
        if isinstance(a, str) and isinstance(b, str):
            raise GrammarError(f"consecutive nonterminals {a} {b}", line, source)
    if not any(isinstance(s, Terminal) for s in items):
        raise GrammarError(f"right-hand side of {lhs} has no terminal", line, source)


def load_grammar(text: str, source: str = "<grammar>") -> Grammar:
    order: List[str] = []
    prods: Dict[str, List[Production]] = {}
    refs: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "::=" not in stripped:
            raise GrammarError("expected 'NONTERMINAL ::= items'", lineno, source)
        lhs, rhs = stripped.split("::=", 1)
        lhs = lhs.strip()
        if lhs in TOKEN_CLASSES or not _NT_NAME.match(lhs):
            raise GrammarError(f"bad nonterminal name {lhs!r}", lineno, source)
        items = _parse_items(rhs, lineno, source)
        _validate(lhs, items, lineno, source)
        if lhs not in prods:
            order.append(lhs)
            prods[lhs] = []
        prods[lhs].append(Production(lhs=lhs, rhs=tuple(items), index=len(prods[lhs]) + 1, line=lineno))
        for s in items:
            if isinstance(s, str):
                refs.setdefault(s, lineno)
    if not order:
        raise GrammarError("grammar has no productions", None, source)
    for nt, lineno in refs.items():
        if nt not in prods:
            raise GrammarError(f"unknown nonterminal {nt}", lineno, source)
    grammar = Grammar(nonterminals=tuple(order), productions={k: tuple(v) for k, v in prods.items()}, source=source)
    logger.info("[grammar] %s: %d productions over %d nonterminals", source, len(grammar), len(order))
    return grammar


def load_grammar_file(path: str) -> Grammar:
    with open(path, "r", encoding="utf-8") as f:
        return load_grammar(f.read(), source=path)
