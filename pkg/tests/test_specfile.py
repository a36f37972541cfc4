import pytest

from relcluster.specfile import (AmbientDecl, IdealDecl, SpecError, logical_lines, parse_field, parse_spec,
                                 split_top)

DOC = """\
field Q
# a comment line
ambient A = A(x, y)          # trailing comment
ideal I in A = y^2 - x^3, \\
    x*y
ideal J in A = x
blowup B = A at J as e0
query gb I lex
query saturate I : J
query blowup B
query hirzebruch 2 : 1 0, 0 1
"""


def test_parse_declarations_and_queries():
    doc = parse_spec(DOC)
    decls = doc.declarations()
    assert isinstance(decls["A"], AmbientDecl) and decls["A"].factors == [("A", ("x", "y"))]
    assert isinstance(decls["I"], IdealDecl) and decls["I"].generators == ["-x^3 + y^2", "x*y"]
    assert [q.kind for q in doc.queries] == ["gb", "saturate", "blowup", "hirzebruch"]
    assert doc.queries[0].args["order"] == "lex"


def test_serialization_is_a_fixpoint_and_drops_comments():
    doc = parse_spec(DOC)
    text = doc.serialize()
    assert "#" not in text and "\\" not in text
    again = parse_spec(text)
    assert again == doc and again.serialize() == text


@pytest.mark.parametrize("text, line, column, fragment", [
    ("ambient A = A(x)\nideal I in A = z\n", 2, 16, "z"),
    ("ambient A = A(x)\nambient A = A(y)\n", 2, 9, "already"),
    ("frobnicate X\n", 1, 1, "unknown statement"),
    ("ambient A = A(x)\nquery gb J\n", 2, 10, "undeclared"),
    ("ambient A = A(x)\nideal I in A = x\nquery blowup I\n", 3, 14, "is an ideal"),
    ("ambient A = A(x)\nfield Q\n", 2, 7, "field must come"),
])
def test_errors_carry_positions(text, line, column, fragment):
    with pytest.raises(SpecError) as err:
        parse_spec(text)
    assert (err.value.line, err.value.column) == (line, column), err.value
    assert fragment in err.value.message


def test_continuations_report_the_first_line():
    lines = logical_lines("a \\\n b\n\n# only a comment\nc\n")
    assert [(n, l.split()) for n, l in lines] == [(1, ["a", "b"]), (5, ["c"])]


def test_split_respects_brackets():
    assert split_top("f(x, y), [a, b], c") == ["f(x, y)", "[a, b]", "c"]


def test_fields():
    assert parse_field("Q").p is None
    assert parse_field("Fp:7").p == 7
    with pytest.raises(ValueError):
        parse_field("R")
    doc = parse_spec("field Fp:5\nambient A = A(x)\nideal I in A = 7*x + 3\n")
    assert doc.declarations()["I"].generators == ["2*x + 3"]
