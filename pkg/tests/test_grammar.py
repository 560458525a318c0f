import pytest

from common.errors import GrammarError
from parsegame.grammar import Terminal, load_grammar, load_grammar_file
from parsegame.tokens import TokenKind


def test_expression_grammar(grammar):
    assert grammar.nonterminals == ("E",)
    assert grammar.start == "E"
    assert len(grammar) == 8
    assert grammar.literals == {"(", ")", "let", "=", "in", "if", "then", "else", "+", "*"}
    labels = [p.label for p in grammar.productions_of("E")]
    assert labels == [f"E#{k}" for k in range(1, 9)]


def test_runs_split_at_nonterminals(grammar):
    let = grammar.productions_of("E")[3]
    assert str(let) == "E ::= 'let' IDENT '=' E 'in' E"
    lead, middle, trail = let.runs
    assert [str(t) for t in lead] == ["'let'", "IDENT", "'='"]
    assert middle == (Terminal(TokenKind.LITERAL, "in"),)
    assert trail == ()
    plus = grammar.productions_of("E")[6]
    assert plus.nonterminals == ("E", "E")
    assert plus.runs == ((), (Terminal(TokenKind.LITERAL, "+"),), ())


def test_comments_and_quotes():
    g = load_grammar('# header\nS ::= "(" S ")"   # nested\nS ::= NUM\n\n')
    assert len(g) == 2
    assert g.productions_of("S")[0].line == 2
    assert g.literals == {"(", ")"}


def test_start_is_first_nonterminal():
    g = load_grammar("A ::= 'a' B\nB ::= 'b'\n")
    assert g.start == "A"
    assert g.nonterminals == ("A", "B")


@pytest.mark.parametrize(
    "text, line, reason",
    [
        ("E ::=\n", 1, "epsilon"),
        ("E ::= NUM\nE ::= F\nF ::= NUM\n", 2, "lone nonterminal"),
        ("E ::= E E '+'\n", 1, "consecutive nonterminals"),
        ("E ::= NUM\nE ::= '' E\n", 2, "empty literal"),
        ("E ::= foo\n", 1, "bare word"),
        ("E NUM\n", 1, "expected"),
        ("e ::= NUM\n", 1, "bad nonterminal name"),
        ("NUM ::= '1'\n", 1, "bad nonterminal name"),
        ("E ::= '+' $\n", 1, "unexpected character"),
        ("E ::= NUM\n\nE ::= '(' F ')'\n", 3, "unknown nonterminal F"),
    ],
)
def test_malformed_grammar(text, line, reason):
    with pytest.raises(GrammarError) as exc:
        load_grammar(text, source="g")
    assert exc.value.line == line
    assert reason in exc.value.reason
    assert str(exc.value).startswith(f"g:{line}: ")


def test_empty_grammar():
    with pytest.raises(GrammarError) as exc:
        load_grammar("# nothing here\n")
    assert exc.value.line is None


def test_unknown_nonterminal_lookup(grammar):
    with pytest.raises(GrammarError):
        grammar.productions_of("F")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_grammar_file(str(tmp_path / "missing.grammar"))
