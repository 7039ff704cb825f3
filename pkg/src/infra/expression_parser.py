import logging
from functools import cache
from typing import Callable

import numpy as np
from pyparsing import (
    Forward,
    Keyword,
    MatchFirst,
    OpAssoc,
    Opt,
    ParseBaseException,
    ParserElement,
    Regex,
    Suppress,
    infix_notation,
    one_of,
)

from core.errors import ConfigError
from core.mass_geometry.services import ExpressionCompiler

logger = logging.getLogger(__name__)

ParserElement.enable_packrat()

Node = Callable[[np.ndarray], np.ndarray]

FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sqrt": np.sqrt,
    "log": np.log,
    "abs": np.abs,
}

CONSTANTS = {"pi": np.pi}

BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


def _constant(value: float) -> Node:
    return lambda x: np.full_like(x, value, dtype=float)


def _number_action(tokens) -> Node:
    return _constant(float(tokens[0]))


def _constant_action(tokens) -> Node:
    return _constant(CONSTANTS[tokens[0]])


def _variable_action(_tokens) -> Node:
    return lambda x: np.asarray(x, dtype=float)


def _call_action(tokens) -> Node:
    fn = FUNCTIONS[tokens[0]]
    argument = tokens[1]
    return lambda x: fn(argument(x))


def _negate_action(tokens) -> Node:
    operand = tokens[0][1]
    return lambda x: -operand(x)


def _negated_exponent_action(tokens) -> Node:
    operand = tokens[0]
    return lambda x: -operand(x)


def _power_action(tokens) -> Node:
    # right associative through the exponent rule: a ^ b ^ c == a ^ (b ^ c)
    if len(tokens) == 1:
        return tokens[0]
    base, exponent = tokens[0], tokens[1]
    return lambda x: np.power(base(x), exponent(x))


def _left_fold_action(tokens) -> Node:
    items = list(tokens[0])
    node = items[0]
    for op, operand in zip(items[1::2], items[2::2]):
        fn = BINARY[op]
        node = lambda x, left=node, right=operand, fn=fn: fn(left(x), right(x))
    return node


@cache
def _grammar() -> ParserElement:
    """
    expr     :: term [ ('+' | '-') term ]*
    term     :: signed [ ('*' | '/') signed ]*
    signed   :: '-' signed | power
    power    :: atom [ '^' exponent ]
    exponent :: '-' exponent | power
    atom     :: number | 'x' | 'pi' | fn '(' expr ')' | '(' expr ')'
    """
    expr = Forward()
    power = Forward()
    exponent = Forward()

    number = Regex(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?").set_parse_action(
        _number_action
    )
    variable = Keyword("x").set_parse_action(_variable_action)
    constant = MatchFirst(Keyword(name) for name in CONSTANTS).set_parse_action(
        _constant_action
    )
    function_name = MatchFirst(Keyword(name) for name in FUNCTIONS)
    call = (function_name + Suppress("(") + expr + Suppress(")")).set_parse_action(
        _call_action
    )
    atom = call | number | constant | variable | Suppress("(") + expr + Suppress(")")

    exponent <<= (Suppress("-") + exponent).set_parse_action(_negated_exponent_action) | power
    power <<= (atom + Opt(Suppress("^") + exponent)).set_parse_action(_power_action)

    expr <<= infix_notation(
        power,
        [
            ("-", 1, OpAssoc.RIGHT, _negate_action),
            (one_of("* /"), 2, OpAssoc.LEFT, _left_fold_action),
            (one_of("+ -"), 2, OpAssoc.LEFT, _left_fold_action),
        ],
    )
    return expr


def parse_expression(source: str) -> Node:
    """Compile ``source`` into a vectorized function of x."""
    if not source or not source.strip():
        raise ConfigError("empty expression", position=0)
    try:
        result = _grammar().parse_string(source, parse_all=True)
    except ParseBaseException as exc:
        raise ConfigError(
            f"cannot parse expression {source!r}: {exc.msg}", position=exc.loc
        ) from exc
    return result[0]


class PyparsingExpressionCompiler(ExpressionCompiler):
    """Mini-grammar over x, numeric literals, + - * / ^, unary minus and elementary functions.

    Exponents may carry their own sign, as in ``(1+x^2)^-2``.
    """

    def compile(self, source: str) -> Callable[[np.ndarray], np.ndarray]:
        node = parse_expression(source)
        logger.debug("compiled expression %r", source)

        def evaluate(x):
            with np.errstate(all="ignore"):
                return node(np.asarray(x, dtype=float))

        return evaluate
