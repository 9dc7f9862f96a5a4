import pytest
from hypothesis import given, strategies as st

from vauforge.reader import ParseError, parse, parse_one, print_term
from vauforge.terms import ATT, FRESH, Arr, Comb, Env, Prim, Sym, data_equal

names = st.from_regex(r"[a-z!?*<=>_-][a-z0-9!?*<=>_-]{0,6}", fullmatch=True).filter(
    lambda s: s not in ("-", "+") and not (s[0] in "+-" and s[1:2].isdigit()))
ints = st.integers(min_value=-(1 << 63), max_value=(1 << 63) - 1)
surface = st.recursive(
    ints | names.map(Sym),
    lambda kids: st.lists(kids, max_size=5).map(Arr),
    max_leaves=30)


@given(surface)
def test_print_parse_roundtrip(t):
    assert data_equal(parse_one(print_term(t)), t)


@given(st.lists(surface, min_size=1, max_size=4))
def test_top_level_is_a_sequence(ts):
    text = "\n".join(print_term(t) for t in ts)
    back = parse(text)
    assert len(back) == len(ts)
    assert all(data_equal(a, b) for a, b in zip(back, ts))


def test_comments_and_whitespace():
    forms = parse("; header\n(+ 1 ; inline\n   2)\n\n")
    assert print_term(forms[0]) == "(+ 1 2)"


def test_symbols_with_operator_characters():
    assert print_term(parse_one("(<= a-b c? & rest)")) == "(<= a-b c? & rest)"
    assert type(parse_one("-")) is Sym
    assert parse_one("-12") == -12


@pytest.mark.parametrize("src, where", [
    ("(+ 1 2", "1:1"),
    ("(a))", "1:4"),
    ("\n  12abc", "2:3"),
    ("99999999999999999999", "1:1"),
])
def test_parse_errors_carry_position(src, where):
    with pytest.raises(ParseError) as e:
        parse(src, "t.krk")
    assert str(e.value.span) == "t.krk:" + where


def test_empty_input_is_an_error():
    with pytest.raises(ParseError):
        parse("  ; nothing\n")


def test_spans_recorded():
    spans = {}
    (t,) = parse("(f\n  (g x))", "s.krk", spans)
    inner = t.items[1]
    assert str(spans[id(t)]) == "s.krk:1:1"
    assert str(spans[id(inner)]) == "s.krk:2:3"


def test_marked_printing():
    body = Arr((Prim("+", 0), 3, Sym("x", 7)), ATT)
    c = Comb(7, 0, None, Env(1, True, {}), ("x",), None, body)
    assert print_term(c) == "<combiner/0>"
    assert print_term(c, show_marks=True) == "(vau#7/0 (x) (+/0 3 x@7))"
    assert print_term(c, show_marks=True, canonical_ids=True) == "(vau#1/0 (x) (+/0 3 x@1))"
    fresh = Arr((Sym("f", True), Arr((1, 2))), FRESH)
    assert print_term(fresh, show_marks=True) == "(f@t (1 2)#val)#fresh"


def test_rest_and_de_printing():
    c = Comb(3, 1, "de", None, ("a",), "more", Sym("a", 3))
    assert print_term(c, show_marks=True) == "(vau#3/1 de (a & more) a@3)"
