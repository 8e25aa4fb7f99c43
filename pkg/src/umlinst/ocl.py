"""OCL-subset constraint expressions: parsing, printing, type checking, evaluation.

Supported: literals, ``self``, iterator variables, attribute access and role
navigation with ``.``, the collection operations ``forAll exists select size
isEmpty notEmpty includes`` with ``->``, comparisons, ``and or not implies``,
arithmetic and unary minus.

Undefined handling is two-valued with explicit propagation: strict operators
yield Undefined when an operand is Undefined, except the short-circuits
``false and x``, ``true or x``, ``false implies x`` and equality, where
``x = y`` is true exactly when both sides are Undefined if either one is.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import EvalError, OclTypeError, UnknownMember, UseSyntaxError
from .lexer import Token, TokenStream, tokenize, unquote
from .model import (
    BOOLEAN, FALSE, INTEGER, REAL, STRING, TRUE, UNDEFINED, BoolV, ClassModel,
    EnumType, EnumV, EvalValue, InstanceModel, IntV, ObjectRef, PrimitiveType,
    RealV, SetV, StringV, UndefinedV,
)

# --------------------------------------------------------------------------
# AST

Pos = tuple[int, int]


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Lit(Expr):
    value: EvalValue
    pos: Pos = field(default=(0, 0), compare=False)
    type: object = field(default=None, compare=False)


@dataclass(frozen=True)
class SelfRef(Expr):
    pos: Pos = field(default=(0, 0), compare=False)
    type: object = field(default=None, compare=False)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: Pos = field(default=(0, 0), compare=False)
    type: object = field(default=None, compare=False)


@dataclass(frozen=True)
class Member(Expr):
    """``source.name``: attribute access or role navigation, decided by the checker."""
    source: Expr
    name: str
    pos: Pos = field(default=(0, 0), compare=False)
    type: object = field(default=None, compare=False)
    # filled by the type checker: None for attributes, else (assoc, end index)
    nav: tuple[str, int] | None = field(default=None, compare=False)


ITERATORS = ("forAll", "exists", "select")
NULLARY = ("size", "isEmpty", "notEmpty")
UNARY_OPS = ("includes",)


@dataclass(frozen=True)
class CollOp(Expr):
    source: Expr
    op: str
    var: str | None = None
    arg: Expr | None = None  # iterator body or includes() argument
    pos: Pos = field(default=(0, 0), compare=False)
    type: object = field(default=None, compare=False)


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    pos: Pos = field(default=(0, 0), compare=False)
    type: object = field(default=None, compare=False)


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # 'not' or '-'
    operand: Expr
    pos: Pos = field(default=(0, 0), compare=False)
    type: object = field(default=None, compare=False)


# binding power per binary operator, loosest first
PRECEDENCE = {
    "implies": 1, "or": 2, "and": 3,
    "=": 5, "<>": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6, "*": 7, "/": 7,
}
NOT_PREC = 4
UNARY_PREC = 8
POSTFIX_PREC = 9
COMPARISONS = ("=", "<>", "<", "<=", ">", ">=")


# --------------------------------------------------------------------------
# parsing


class _Parser:
    def __init__(self, stream: TokenStream):
        self.ts = stream

    def expression(self, min_prec: int = 1) -> Expr:
        left = self.prefix()
        while True:
            tok = self.ts.current
            op = tok.lexeme if tok.kind in ("keyword", "symbol") else None
            prec = PRECEDENCE.get(op)
            if prec is None or prec < min_prec:
                return left
            self.ts.advance()
            if op in COMPARISONS:
                right = self.expression(prec + 1)
                left = Binary(op, left, right, (tok.line, tok.column))
                nxt = self.ts.current
                if nxt.kind == "symbol" and nxt.lexeme in COMPARISONS:
                    raise UseSyntaxError(
                        "comparison operators cannot be chained; add parentheses.",
                        nxt.line, nxt.column)
            else:
                right = self.expression(prec + 1)
                left = Binary(op, left, right, (tok.line, tok.column))

    def prefix(self) -> Expr:
        tok = self.ts.current
        if self.ts.accept("not"):
            # 'not' binds looser than comparisons and tighter than 'and'
            return Unary("not", self.expression(PRECEDENCE["="]), (tok.line, tok.column))
        return self.unary()

    def unary(self) -> Expr:
        tok = self.ts.current
        if self.ts.accept("-"):
            nxt = self.ts.current
            if nxt.kind in ("integer", "real") and not self._postfix_follows(1):
                self.ts.advance()
                if nxt.kind == "integer":
                    return Lit(IntV(-int(nxt.lexeme)), (tok.line, tok.column))
                return Lit(RealV(-float(nxt.lexeme)), (tok.line, tok.column))
            return Unary("-", self.unary(), (tok.line, tok.column))
        if self.ts.at("not"):
            raise self.ts.error("an operand ('not' must be parenthesized here)")
        return self.postfix(self.primary())

    def _postfix_follows(self, offset: int) -> bool:
        nxt = self.ts.peek(offset)
        return nxt.kind == "symbol" and nxt.lexeme in (".", "->")

    def postfix(self, expr: Expr) -> Expr:
        while True:
            tok = self.ts.current
            if self.ts.accept("."):
                name = self.ts.expect_identifier("an attribute or role name after '.'")
                expr = Member(expr, name.lexeme, (name.line, name.column))
            elif self.ts.accept("->"):
                expr = self.collection_op(expr, tok)
            else:
                return expr

    def collection_op(self, source: Expr, arrow: Token) -> Expr:
        name = self.ts.expect_identifier("a collection operation after '->'")
        pos = (name.line, name.column)
        op = name.lexeme
        self.ts.expect("(")
        if op in ITERATORS:
            var = self.ts.expect_identifier(f"an iterator variable in {op}(v | ...)")
            self.ts.expect("|")
            body = self.expression()
            self.ts.expect(")")
            return CollOp(source, op, var.lexeme, body, pos)
        if op in NULLARY:
            self.ts.expect(")")
            return CollOp(source, op, None, None, pos)
        if op in UNARY_OPS:
            arg = self.expression()
            self.ts.expect(")")
            return CollOp(source, op, None, arg, pos)
        raise UseSyntaxError(
            f"collection operation '{op}' is not supported; use one of "
            + ", ".join(ITERATORS + NULLARY + UNARY_OPS) + ".", name.line, name.column)

    def primary(self) -> Expr:
        tok = self.ts.current
        pos = (tok.line, tok.column)
        if tok.kind == "integer":
            self.ts.advance()
            return Lit(IntV(int(tok.lexeme)), pos)
        if tok.kind == "real":
            self.ts.advance()
            return Lit(RealV(float(tok.lexeme)), pos)
        if tok.kind == "string":
            self.ts.advance()
            return Lit(StringV(unquote(tok.lexeme)), pos)
        if self.ts.accept("true"):
            return Lit(TRUE, pos)
        if self.ts.accept("false"):
            return Lit(FALSE, pos)
        if self.ts.accept("Undefined"):
            return Lit(UNDEFINED, pos)
        if self.ts.accept("self"):
            return SelfRef(pos)
        if self.ts.accept("("):
            inner = self.expression()
            self.ts.expect(")")
            return inner
        if tok.kind == "identifier":
            self.ts.advance()
            if self.ts.accept("::"):
                lit = self.ts.expect_identifier("an enumeration literal after '::'")
                return Lit(EnumV(tok.lexeme, lit.lexeme), pos)
            return Var(tok.lexeme, pos)
        raise self.ts.error("an expression")


def parse_expression_tokens(stream: TokenStream) -> Expr:
    """Parse one expression from ``stream``, leaving the cursor after it."""
    return _Parser(stream).expression()


def parse_expression(source: str, line: int = 1, column: int = 1) -> Expr:
    """Parse an untyped expression from text."""
    stream = TokenStream(tokenize(source, line, column))
    expr = parse_expression_tokens(stream)
    if stream.current.kind != "eof":
        raise stream.error("end of expression")
    return expr


def parse_constraint(source: str, model: ClassModel, context: str) -> Expr:
    """Parse and type-check a Boolean constraint with ``self`` of class ``context``."""
    return typecheck(parse_expression(source), model, context, expect_boolean=True)


# --------------------------------------------------------------------------
# printing


def _prec(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return NOT_PREC if expr.op == "not" else UNARY_PREC
    if isinstance(expr, Lit) and _format_literal(expr.value).startswith("-"):
        return UNARY_PREC
    return POSTFIX_PREC


def _wrap(expr: Expr, needed: bool) -> str:
    text = format_expr(expr)
    return f"({text})" if needed else text


def _format_literal(value) -> str:
    if isinstance(value, RealV):
        return repr(float(value.value))
    return str(value)


def format_expr(expr: Expr) -> str:
    """Print ``expr`` with the minimum parentheses needed to re-parse it identically."""
    if isinstance(expr, Lit):
        return _format_literal(expr.value)
    if isinstance(expr, SelfRef):
        return "self"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Member):
        return f"{_wrap(expr.source, _prec(expr.source) < POSTFIX_PREC)}.{expr.name}"
    if isinstance(expr, CollOp):
        src = _wrap(expr.source, _prec(expr.source) < POSTFIX_PREC)
        if expr.op in ITERATORS:
            return f"{src}->{expr.op}({expr.var} | {format_expr(expr.arg)})"
        if expr.op in NULLARY:
            return f"{src}->{expr.op}()"
        return f"{src}->{expr.op}({format_expr(expr.arg)})"
    if isinstance(expr, Unary):
        if expr.op == "not":
            # operand binds at comparison level or tighter, or is another 'not'
            inner = expr.operand
            needs = _prec(inner) < PRECEDENCE["="] and not (
                isinstance(inner, Unary) and inner.op == "not")
            return f"not {_wrap(inner, needs)}"
        text = _wrap(expr.operand, _prec(expr.operand) < UNARY_PREC)
        if text.startswith("-") or (isinstance(expr.operand, Lit)
                                    and isinstance(expr.operand.value, (IntV, RealV))):
            text = f"({text})"
        return f"-{text}"
    if isinstance(expr, Binary):
        p = PRECEDENCE[expr.op]
        if expr.op in COMPARISONS:
            left = _wrap(expr.left, _prec(expr.left) <= p)
            right = _wrap(expr.right, _prec(expr.right) <= p)
        else:
            left = _wrap(expr.left, _prec(expr.left) < p)
            right = _wrap(expr.right, _prec(expr.right) <= p)
        return f"{left} {expr.op} {right}"
    raise TypeError(f"not an expression: {expr!r}")


# --------------------------------------------------------------------------
# types used during checking


@dataclass(frozen=True)
class ObjectType:
    class_name: str

    def __str__(self):
        return self.class_name


@dataclass(frozen=True)
class SetType:
    class_name: str

    def __str__(self):
        return f"Set({self.class_name})"


@dataclass(frozen=True)
class VoidType:
    def __str__(self):
        return "OclVoid"


VOID = VoidType()
NUMERIC = (INTEGER, REAL)


class _Checker:
    def __init__(self, model: ClassModel, context: str):
        self.model = model
        self.context = context
        model.get_class(context)

    def fail(self, expr: Expr, message: str, expected=None, found=None):
        line, col = getattr(expr, "pos", (0, 0))
        raise OclTypeError(message, line, col,
                           None if expected is None else str(expected),
                           None if found is None else str(found))

    def related(self, a: str, b: str) -> bool:
        return self.model.is_subclass(a, b) or self.model.is_subclass(b, a)

    def require(self, expr: Expr, allowed: tuple, what: str):
        if expr.type == VOID or expr.type in allowed:
            return
        self.fail(expr, f"expected {what} but found {expr.type} in '{format_expr(expr)}'.",
                  what, expr.type)

    def check(self, expr: Expr, env: dict[str, object]) -> Expr:
        if isinstance(expr, Lit):
            return replace(expr, type=self.literal_type(expr))
        if isinstance(expr, SelfRef):
            return replace(expr, type=ObjectType(self.context))
        if isinstance(expr, Var):
            if expr.name not in env:
                line, _ = expr.pos
                raise UnknownMember(expr.name, line or None,
                                    f"Unknown variable '{expr.name}'")
            return replace(expr, type=env[expr.name])
        if isinstance(expr, Member):
            return self.check_member(expr, env)
        if isinstance(expr, CollOp):
            return self.check_collection(expr, env)
        if isinstance(expr, Unary):
            operand = self.check(expr.operand, env)
            if expr.op == "not":
                self.require(operand, (BOOLEAN,), "Boolean")
                return replace(expr, operand=operand, type=BOOLEAN)
            self.require(operand, NUMERIC, "Integer or Real")
            return replace(expr, operand=operand,
                           type=operand.type if operand.type in NUMERIC else INTEGER)
        if isinstance(expr, Binary):
            return self.check_binary(expr, env)
        raise TypeError(f"not an expression: {expr!r}")

    def literal_type(self, expr: Lit):
        v = expr.value
        if isinstance(v, IntV):
            return INTEGER
        if isinstance(v, RealV):
            return REAL
        if isinstance(v, StringV):
            return STRING
        if isinstance(v, BoolV):
            return BOOLEAN
        if isinstance(v, UndefinedV):
            return VOID
        if isinstance(v, EnumV):
            enum = self.model.get_enum(v.enum)
            if enum is None:
                line, _ = expr.pos
                raise UnknownMember(v.enum, line or None, f"Unknown enumeration '{v.enum}'")
            if v.literal not in enum.literals:
                line, _ = expr.pos
                raise UnknownMember(f"{v.enum}::{v.literal}", line or None,
                                    f"Enumeration '{v.enum}' has no literal '{v.literal}'")
            return EnumType(v.enum)
        raise TypeError(v)

    def check_member(self, expr: Member, env) -> Expr:
        source = self.check(expr.source, env)
        if not isinstance(source.type, ObjectType):
            self.fail(expr, f"'.{expr.name}' needs an object but "
                      f"'{format_expr(source)}' has type {source.type}.",
                      "an object", source.type)
        cls = source.type.class_name
        attr = self.model.attribute(cls, expr.name)
        if attr is not None:
            return replace(expr, source=source, type=attr.type, nav=None)
        role = self.model.roles(cls).get(expr.name)
        if role is None:
            line, _ = expr.pos
            raise UnknownMember(expr.name, line or None,
                                f"Class '{cls}' has no attribute or role '{expr.name}'")
        t = ObjectType(role.target_class) if role.multiplicity.is_single else SetType(role.target_class)
        return replace(expr, source=source, type=t, nav=(role.assoc, role.end))

    def check_collection(self, expr: CollOp, env) -> Expr:
        source = self.check(expr.source, env)
        if isinstance(source.type, (SetType, ObjectType)):
            elem = source.type.class_name
        else:
            self.fail(expr, f"'->{expr.op}' needs a collection but "
                      f"'{format_expr(source)}' has type {source.type}.",
                      "a collection", source.type)
        if expr.op in ITERATORS:
            inner_env = dict(env)
            inner_env[expr.var] = ObjectType(elem)
            body = self.check(expr.arg, inner_env)
            self.require(body, (BOOLEAN,), "Boolean")
            t = SetType(elem) if expr.op == "select" else BOOLEAN
            return replace(expr, source=source, arg=body, type=t)
        if expr.op == "size":
            return replace(expr, source=source, type=INTEGER)
        if expr.op in NULLARY:
            return replace(expr, source=source, type=BOOLEAN)
        arg = self.check(expr.arg, env)
        if not (arg.type == VOID or (isinstance(arg.type, ObjectType)
                                     and self.related(arg.type.class_name, elem))):
            self.fail(arg, f"includes() on Set({elem}) needs an object of a related class "
                      f"but found {arg.type}.", ObjectType(elem), arg.type)
        return replace(expr, source=source, arg=arg, type=BOOLEAN)

    def comparable(self, a, b) -> bool:
        if a == VOID or b == VOID:
            return True
        if a in NUMERIC and b in NUMERIC:
            return True
        if isinstance(a, ObjectType) and isinstance(b, ObjectType):
            return self.related(a.class_name, b.class_name)
        if isinstance(a, (SetType,)) or isinstance(b, SetType):
            return False
        return a == b

    def check_binary(self, expr: Binary, env) -> Expr:
        left = self.check(expr.left, env)
        right = self.check(expr.right, env)
        op = expr.op
        if op in ("and", "or", "implies"):
            self.require(left, (BOOLEAN,), "Boolean")
            self.require(right, (BOOLEAN,), "Boolean")
            t = BOOLEAN
        elif op in ("=", "<>"):
            if not self.comparable(left.type, right.type):
                self.fail(expr, f"cannot compare {left.type} with {right.type} in "
                          f"'{format_expr(expr)}'.", left.type, right.type)
            t = BOOLEAN
        elif op in COMPARISONS:
            self.require(left, NUMERIC, "Integer or Real")
            self.require(right, NUMERIC, "Integer or Real")
            t = BOOLEAN
        else:
            self.require(left, NUMERIC, "Integer or Real")
            self.require(right, NUMERIC, "Integer or Real")
            if op == "/" or REAL in (left.type, right.type):
                t = REAL
            else:
                t = INTEGER
        return replace(expr, left=left, right=right, type=t)


def typecheck(expr: Expr, model: ClassModel, context: str,
              expect_boolean: bool = False, env: dict | None = None) -> Expr:
    """Return a copy of ``expr`` annotated with types and navigation targets."""
    checked = _Checker(model, context).check(expr, dict(env or {}))
    if expect_boolean and checked.type not in (BOOLEAN, VOID):
        line, col = checked.pos
        raise OclTypeError(
            f"a constraint must be Boolean but '{format_expr(checked)}' has type {checked.type}.",
            line, col, "Boolean", str(checked.type))
    return checked


# --------------------------------------------------------------------------
# evaluation


def _is_undef(v) -> bool:
    return isinstance(v, UndefinedV)


def _num(v):
    return v.value


def _numeric_result(value, as_real: bool):
    return RealV(float(value)) if as_real else IntV(value)


def _values_equal(a, b) -> bool:
    if isinstance(a, (IntV, RealV)) and isinstance(b, (IntV, RealV)):
        return a.value == b.value
    return a == b


class _Evaluator:
    def __init__(self, instance: InstanceModel, model: ClassModel, self_object: str):
        self.instance = instance
        self.model = model
        self.self_ref = ObjectRef(self_object)

    def as_set(self, v) -> SetV:
        if isinstance(v, SetV):
            return v
        if _is_undef(v):
            return SetV()
        return SetV((v,))

    def eval(self, expr: Expr, env: dict):
        if isinstance(expr, Lit):
            return expr.value
        if isinstance(expr, SelfRef):
            return self.self_ref
        if isinstance(expr, Var):
            return env[expr.name]
        if isinstance(expr, Member):
            src = self.eval(expr.source, env)
            if _is_undef(src):
                return UNDEFINED
            if expr.nav is None:
                return self.instance.get(src.object_id).slots.get(expr.name, UNDEFINED)
            assoc, end = expr.nav
            partners = self.instance.partners(assoc, 1 - end, src.object_id)
            if isinstance(expr.type, ObjectType):
                return ObjectRef(partners[0]) if partners else UNDEFINED
            return SetV(tuple(ObjectRef(p) for p in partners))
        if isinstance(expr, CollOp):
            return self.eval_collection(expr, env)
        if isinstance(expr, Unary):
            v = self.eval(expr.operand, env)
            if _is_undef(v):
                return UNDEFINED
            if expr.op == "not":
                return BoolV(not v.value)
            return _numeric_result(-v.value, isinstance(v, RealV))
        return self.eval_binary(expr, env)

    def eval_collection(self, expr: CollOp, env):
        items = self.as_set(self.eval(expr.source, env))
        op = expr.op
        if op == "size":
            return IntV(len(items))
        if op == "isEmpty":
            return BoolV(len(items) == 0)
        if op == "notEmpty":
            return BoolV(len(items) > 0)
        if op == "includes":
            arg = self.eval(expr.arg, env)
            if _is_undef(arg):
                return UNDEFINED
            return BoolV(arg in items.items)
        results = []
        for item in items:
            inner = dict(env)
            inner[expr.var] = item
            results.append((item, self.eval(expr.arg, inner)))
        if op == "select":
            return SetV(tuple(i for i, r in results if r == TRUE))
        if op == "forAll":
            if any(r == FALSE for _, r in results):
                return FALSE
            return UNDEFINED if any(_is_undef(r) for _, r in results) else TRUE
        # exists
        if any(r == TRUE for _, r in results):
            return TRUE
        return UNDEFINED if any(_is_undef(r) for _, r in results) else FALSE

    def eval_binary(self, expr: Binary, env):
        op = expr.op
        left = self.eval(expr.left, env)
        if op == "and" and left == FALSE:
            return FALSE
        if op == "or" and left == TRUE:
            return TRUE
        if op == "implies" and left == FALSE:
            return TRUE
        right = self.eval(expr.right, env)
        if op in ("=", "<>"):
            if _is_undef(left) or _is_undef(right):
                same = _is_undef(left) and _is_undef(right)
            else:
                same = _values_equal(left, right)
            return BoolV(same if op == "=" else not same)
        if op == "and":
            if right == FALSE:
                return FALSE
            return UNDEFINED if _is_undef(left) or _is_undef(right) else TRUE
        if op == "or":
            if right == TRUE:
                return TRUE
            return UNDEFINED if _is_undef(left) or _is_undef(right) else FALSE
        if _is_undef(left) or _is_undef(right):
            return UNDEFINED
        if op == "implies":
            return right
        a, b = _num(left), _num(right)
        if op == "<":
            return BoolV(a < b)
        if op == "<=":
            return BoolV(a <= b)
        if op == ">":
            return BoolV(a > b)
        if op == ">=":
            return BoolV(a >= b)
        as_real = isinstance(left, RealV) or isinstance(right, RealV)
        if op == "+":
            return _numeric_result(a + b, as_real)
        if op == "-":
            return _numeric_result(a - b, as_real)
        if op == "*":
            return _numeric_result(a * b, as_real)
        if b == 0:
            line, col = expr.pos
            raise EvalError("division by zero", line, col)
        return RealV(a / b)


def evaluate(expr: Expr, instance: InstanceModel, model: ClassModel, self_object: str,
             env: dict | None = None) -> EvalValue:
    """Evaluate a type-checked expression with ``self`` bound to ``self_object``."""
    return _Evaluator(instance, model, self_object).eval(expr, dict(env or {}))
