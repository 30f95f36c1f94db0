"""Scalar nonlinearities f(theta, x, u, Du, D^2u) as sympy expressions.

Variable names (d spatial and b frequency dimensions):

- `x1 .. xd` (alias `x` for `x1`), `theta1 .. thetab` (alias `theta`)
- `u`, first derivatives `u_x1 ..` (alias `u_x`), second derivatives
  `u_x1x1`, `u_x1x2`, .. (alias `u_xx`; `u_x2x1` is read as `u_x1x2`)
"""

import functools
import re
import typing

import numpy as np
import pydantic
import sympy
from sympy.parsing import sympy_parser

from spectral_torus import errors

_ALLOWED_FUNCTIONS = (sympy.sin, sympy.cos, sympy.exp)
_DERIVATIVE_NAME = re.compile(r"^u_((?:x\d+)+)$")
_ALIASES = {"x": "x1", "theta": "theta1", "u_x": "u_x1", "u_xx": "u_x1x1"}
_TRANSFORMATIONS = sympy_parser.standard_transformations + (
    sympy_parser.convert_xor,
)


class StateVariable(typing.NamedTuple):
    """A state variable u, u_{x_i} or u_{x_i x_j} as derivative axes (1-based)."""

    name: str
    axes: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.axes)


def _state_variable(name: str) -> StateVariable | None:
    if name == "u":
        return StateVariable("u", ())
    match = _DERIVATIVE_NAME.match(name)
    if match is None:
        return None
    axes = tuple(sorted(int(part) for part in match.group(1).split("x")[1:]))
    if len(axes) > 2 or any(axis < 1 for axis in axes):
        return None
    return StateVariable("u_" + "".join(f"x{axis}" for axis in axes), axes)


def _canonical_name(name: str) -> str:
    name = _ALIASES.get(name, name)
    state = _state_variable(name)
    return state.name if state is not None else name


class ScalarFunctionSpec(pydantic.BaseModel):
    """A nonlinearity given as an expression string.

    Only +, *, non-negative integer powers of variables, powers of positive
    constants, sin, cos and exp are accepted, which keeps every f entire and
    gives exact derivatives through sympy.
    """

    model_config = pydantic.ConfigDict(frozen=True)

    expression: str
    domain_radius: float | None = pydantic.Field(default=None, gt=0.0)

    @pydantic.field_validator("expression")
    @classmethod
    def expression_must_parse(cls, value: str) -> str:
        _parse(value)
        return value

    @functools.cached_property
    def sympy_expr(self) -> sympy.Expr:
        return _parse(self.expression)

    @functools.cached_property
    def state_variables(self) -> list[StateVariable]:
        names = sorted(str(symbol) for symbol in self.sympy_expr.free_symbols)
        states = [_state_variable(name) for name in names]
        return sorted(
            (state for state in states if state is not None),
            key=lambda state: (state.order, state.axes),
        )

    @functools.cached_property
    def spatial_axes_used(self) -> int:
        """Highest spatial index referenced (x_i or derivative axes)."""
        highest = 0
        for symbol in self.sympy_expr.free_symbols:
            name = str(symbol)
            state = _state_variable(name)
            if state is not None:
                highest = max([highest, *state.axes])
            elif name.startswith("x"):
                highest = max(highest, int(name[1:]))
        return highest

    @functools.cached_property
    def theta_axes_used(self) -> int:
        return max(
            (
                int(str(symbol)[len("theta") :])
                for symbol in self.sympy_expr.free_symbols
                if str(symbol).startswith("theta")
            ),
            default=0,
        )

    @property
    def order(self) -> int:
        """Highest derivative order of u the expression depends on."""
        return max((state.order for state in self.state_variables), default=0)

    @functools.cached_property
    def degree(self) -> int | None:
        """Polynomial degree in the state variables, None if transcendental."""
        symbols = [sympy.Symbol(state.name) for state in self.state_variables]
        if not symbols:
            return 0
        if not self.sympy_expr.is_polynomial(*symbols):
            return None
        return int(sympy.Poly(self.sympy_expr, *symbols).total_degree())

    @functools.cached_property
    def depends_on_position(self) -> bool:
        return any(
            _state_variable(str(symbol)) is None
            for symbol in self.sympy_expr.free_symbols
        )

    @functools.cached_property
    def position_bandwidth(self) -> int | None:
        """Largest l1 frequency of the x and theta dependence.

        Finite when x and theta enter only through sin/cos of integer
        combinations of them and f is polynomial in those factors; None otherwise
        (e.g. exp(cos(x))).
        """
        positions = [
            symbol for symbol in self.sympy_expr.free_symbols if _state_variable(str(symbol)) is None
        ]
        if not positions:
            return 0
        atoms = sorted(self.sympy_expr.atoms(sympy.sin, sympy.cos), key=str)
        replacements, bands = {}, []
        for j, atom in enumerate(atoms):
            argument = atom.args[0]
            if not argument.free_symbols or not argument.free_symbols <= set(positions):
                continue
            if not argument.is_polynomial(*positions):
                return None
            linear = sympy.Poly(argument, *positions)
            if linear.total_degree() > 1:
                return None
            coefficients = [linear.coeff_monomial(symbol) for symbol in positions]
            if not all(c.is_Integer for c in coefficients):
                return None
            replacements[atom] = sympy.Symbol(f"_trig{j}")
            bands.append(sum(abs(int(c)) for c in coefficients))
        reduced = self.sympy_expr.xreplace(replacements)
        if reduced.free_symbols & set(positions):
            return None
        trig = list(replacements.values())
        states = [sympy.Symbol(state.name) for state in self.state_variables]
        if not trig:
            return 0
        if not reduced.is_polynomial(*trig, *states):
            return None
        terms = sympy.Poly(reduced, *trig, *states).monoms()
        return max(sum(e * b for e, b in zip(monomial, bands)) for monomial in terms)

    def derivative(self, variable: str) -> "ScalarFunctionSpec":
        """Partial derivative with respect to a state or position variable."""
        name = _canonical_name(variable)
        return ScalarFunctionSpec(
            expression=str(sympy.diff(self.sympy_expr, sympy.Symbol(name))),
            domain_radius=self.domain_radius,
        )

    def evaluate(self, values: dict[str, typing.Any]) -> np.ndarray:
        """Evaluates pointwise. `values` maps variable names to broadcastable arrays.

        Variables missing from `values` but present in the expression raise
        UnknownVariableError.
        """
        names = sorted(str(symbol) for symbol in self.sympy_expr.free_symbols)
        missing = [name for name in names if name not in values]
        if missing:
            raise errors.UnknownVariableError(missing[0], values.keys())
        arguments = [values[name] for name in names]
        result = _compiled(self.expression, tuple(names))(*arguments)
        shape = np.broadcast_shapes(*(np.shape(value) for value in values.values()))
        return np.broadcast_to(np.asarray(result, dtype=np.complex128), shape)


def constant(value: float) -> ScalarFunctionSpec:
    return ScalarFunctionSpec(expression=repr(float(value)))


@functools.lru_cache(maxsize=256)
def _compiled(expression: str, names: tuple[str, ...]) -> typing.Callable:
    expr = _parse(expression)
    return sympy.lambdify([sympy.Symbol(name) for name in names], expr, modules="numpy")


@functools.lru_cache(maxsize=256)
def _parse(text: str) -> sympy.Expr:
    names = set(re.findall(r"\b[A-Za-z_][A-Za-z_0-9]*", text))
    local_dict: dict[str, typing.Any] = {
        "sin": sympy.sin,
        "cos": sympy.cos,
        "exp": sympy.exp,
        "pi": sympy.pi,
        "E": sympy.E,
    }
    for name in set(re.findall(r"\b([A-Za-z_][A-Za-z_0-9]*)\s*\(", text)) - set(local_dict):
        raise errors.UnsupportedPrimitiveError(name, text)
    for name in names - set(local_dict):
        canonical = _canonical_name(name)
        if not _is_variable(canonical):
            raise errors.UnknownVariableError(
                name, ["x1..", "theta1..", "u", "u_x1..", "u_x1x1.."]
            )
        local_dict[name] = sympy.Symbol(canonical)
    try:
        expr = sympy_parser.parse_expr(
            text, local_dict=local_dict, transformations=_TRANSFORMATIONS
        )
    except (SyntaxError, TypeError, sympy.SympifyError) as exc:
        raise errors.UnsupportedPrimitiveError(str(exc), text) from exc
    _check_primitives(sympy.sympify(expr), text)
    return sympy.sympify(expr)


def _is_variable(name: str) -> bool:
    if _state_variable(name) is not None:
        return True
    return bool(re.fullmatch(r"x[1-9]\d*|theta[1-9]\d*", name))


def _check_primitives(expr: sympy.Expr, text: str) -> None:
    for node in sympy.preorder_traversal(expr):
        if isinstance(node, sympy.Function) and not isinstance(node, _ALLOWED_FUNCTIONS):
            raise errors.UnsupportedPrimitiveError(str(node.func), text)
        if isinstance(node, sympy.Pow):
            base, exponent = node.args
            # constant bases: e**x, 1/pi, sqrt(2)
            if base is sympy.E or (base.is_number and (exponent.is_number or base.is_positive)):
                continue
            if not (exponent.is_Integer and exponent >= 0):
                raise errors.UnsupportedPrimitiveError(f"power {exponent}", text)
