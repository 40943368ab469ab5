"""Product probability spaces, output spaces and tabulated functions.

Points of a product space are encoded as integers in mixed radix with the
first coordinate most significant, so for two binary coordinates the order
is (v0, v0), (v0, v1), (v1, v0), (v1, v1).  Coordinates are 0-based in the
Python API and 1-based in every text format.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .arith import Number, is_exact, parse_number, to_str

DEFAULT_CAP = 1 << 24
WEIGHT_TOL = 1e-12


class ModelError(ValueError):
    pass


class CapExceeded(ModelError):
    pass


class SpaceMismatch(ModelError):
    pass


class ParseError(ModelError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def parse_label(token: str):
    """Numeric tokens become exact numbers, anything else stays a string."""
    try:
        return parse_number(token, exact=True)
    except (ValueError, ZeroDivisionError):
        return token


def _sums_to_one(weights) -> bool:
    total = sum(weights)
    if all(is_exact(w) for w in weights):
        return total == 1
    return abs(total - 1) <= WEIGHT_TOL


@dataclass(frozen=True)
class CoordDomain:
    values: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.values) == 0:
            raise ModelError("coordinate with no values")
        if len(self.values) != len(self.weights):
            raise ModelError("value and weight counts differ")
        if len(set(self.values)) != len(self.values):
            raise ModelError(f"repeated value label in {self.values}")
        if any(w < 0 for w in self.weights):
            raise ModelError("negative weight")
        if not _sums_to_one(self.weights):
            raise ModelError(f"weights sum ≠ 1 (got {to_str(sum(self.weights))})")

    def __len__(self):
        return len(self.values)

    def index(self, value) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise ModelError(f"unknown value {value!r}") from None


@dataclass(frozen=True)
class ProductSpace:
    coords: tuple[CoordDomain, ...]
    cap: int = field(default=DEFAULT_CAP, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if self.size > self.cap:
            raise CapExceeded(f"{self.size} points exceed the enumeration cap {self.cap}")

    @classmethod
    def biased_cube(cls, n: int, p: Number = Fraction(1, 2), cap: int = DEFAULT_CAP):
        """{-1,+1}^n where each coordinate is +1 with probability p."""
        if not 0 <= p <= 1:
            raise ModelError(f"bias {p} outside [0, 1]")
        dom = CoordDomain((-1, 1), (1 - p, p))
        return cls((dom,) * n, cap=cap)

    @classmethod
    def concat(cls, spaces: Iterable[ProductSpace]) -> ProductSpace:
        spaces = list(spaces)
        cap = max((s.cap for s in spaces), default=DEFAULT_CAP)
        return cls(tuple(c for s in spaces for c in s.coords), cap=cap)

    @property
    def n(self) -> int:
        return len(self.coords)

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.coords)

    @cached_property
    def size(self) -> int:
        return math.prod(len(c) for c in self.coords)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out = [1] * self.n
        for i in range(self.n - 2, -1, -1):
            out[i] = out[i + 1] * self.sizes[i + 1]
        return tuple(out)

    @property
    def exact(self) -> bool:
        return all(is_exact(w) for c in self.coords for w in c.weights)

    @property
    def degenerate_coords(self) -> list[int]:
        return [i for i, c in enumerate(self.coords) if len(c) < 2]

    def is_binary_cube(self) -> bool:
        return all(set(c.values) == {-1, 1} for c in self.coords)

    def encode(self, value_indices: Sequence[int]) -> int:
        if len(value_indices) != self.n:
            raise ModelError("wrong number of coordinates")
        x = 0
        for a, k in zip(value_indices, self.sizes):
            if not 0 <= a < k:
                raise ModelError(f"value index {a} out of range")
            x = x * k + a
        return x

    def decode(self, x: int) -> tuple[int, ...]:
        self._check_point(x)
        return tuple((x // s) % k for s, k in zip(self.strides, self.sizes))

    def point(self, values: Sequence) -> int:
        """Point index from value labels, e.g. ``space.point((1, -1, 1))``."""
        return self.encode([c.index(v) for c, v in zip(self.coords, values)])

    def labels_of(self, x: int) -> tuple:
        return tuple(c.values[a] for c, a in zip(self.coords, self.decode(x)))

    def coord_value(self, x: int, i: int) -> int:
        return (x // self.strides[i]) % self.sizes[i]

    def with_coord(self, x: int, i: int, a: int) -> int:
        """Point x with coordinate i replaced by value index a."""
        return x + (a - self.coord_value(x, i)) * self.strides[i]

    def _check_point(self, x: int):
        if not 0 <= x < self.size:
            raise ModelError(f"point index {x} out of range [0, {self.size})")

    def point_probability(self, x: int) -> Number:
        self._check_point(x)
        prob: Number = 1
        for c, a in zip(self.coords, self.decode(x)):
            prob *= c.weights[a]
        return prob

    @cached_property
    def probabilities(self) -> tuple:
        """Probability of every point, in canonical order."""
        probs: list = [1]
        for c in self.coords:
            probs = [q * w for q in probs for w in c.weights]
        return tuple(probs)

    def points(self) -> range:
        return range(self.size)


@dataclass(frozen=True)
class OutputSpace:
    labels: tuple
    dist: tuple[tuple[Number, ...], ...]
    kind: str = "metric"
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dist", tuple(tuple(r) for r in self.dist))
        m = len(self.labels)
        if len(set(self.labels)) != m:
            raise ModelError("repeated output label")
        if self.kind not in ("metric", "semimetric"):
            raise ModelError(f"unknown kind {self.kind!r}")
        if len(self.dist) != m or any(len(r) != m for r in self.dist):
            raise ModelError(f"distance table must be {m}x{m}")
        d = self.dist
        for a in range(m):
            if d[a][a] != 0:
                raise ModelError(f"dist({self.labels[a]}, {self.labels[a]}) ≠ 0")
            for b in range(m):
                if d[a][b] < 0:
                    raise ModelError("negative distance")
                if d[a][b] != d[b][a]:
                    raise ModelError(f"asymmetric distance between {self.labels[a]} and {self.labels[b]}")
        if self.kind == "metric":
            bad = self.triangle_violation()
            if bad is not None:
                a, b, c = (self.labels[t] for t in bad)
                raise ModelError(f"triangle inequality fails for ({a}, {b}, {c}); use kind=semimetric")

    def triangle_violation(self):
        """First (a, b, c) with d(a,c) > d(a,b) + d(b,c), or None."""
        d = self.dist
        tol = 0 if self.exact else WEIGHT_TOL
        for a, b, c in itertools.product(range(len(self.labels)), repeat=3):
            if d[a][c] - d[a][b] - d[b][c] > tol:
                return a, b, c
        return None

    @classmethod
    def discrete(cls, labels: Sequence) -> OutputSpace:
        m = len(labels)
        return cls(labels, [[int(a != b) for b in range(m)] for a in range(m)], "metric", "discrete")

    @classmethod
    def boolean(cls, labels: Sequence = (-1, 1)) -> OutputSpace:
        if set(labels) != {-1, 1}:
            raise ModelError("boolean outputs must be exactly {-1, 1}")
        m = len(labels)
        return cls(labels, [[2 * int(a != b) for b in range(m)] for a in range(m)], "metric", "boolean")

    @classmethod
    def rho1(cls, labels: Sequence) -> OutputSpace:
        _require_real(labels)
        return cls(labels, [[abs(a - b) for b in labels] for a in labels], "metric", "rho1")

    @classmethod
    def rho2(cls, labels: Sequence) -> OutputSpace:
        """Half squared distance; a semimetric unless |labels| <= 2."""
        _require_real(labels)
        d = [[_half_square(a - b) for b in labels] for a in labels]
        probe = cls(labels, d, "semimetric", "rho2")
        kind = "metric" if probe.triangle_violation() is None else "semimetric"
        return cls(labels, d, kind, "rho2")

    @classmethod
    def builtin(cls, name: str, labels: Sequence) -> OutputSpace:
        try:
            ctor = {"discrete": cls.discrete, "boolean": cls.boolean, "rho1": cls.rho1, "rho2": cls.rho2}[name]
        except KeyError:
            raise ModelError(f"unknown built-in distance {name!r}") from None
        return ctor(labels)

    @cached_property
    def _index(self) -> dict:
        return {z: k for k, z in enumerate(self.labels)}

    def index(self, label) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise ModelError(f"unknown output label {label!r}") from None

    def __contains__(self, label) -> bool:
        try:
            return label in self._index
        except TypeError:
            return False

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for r in self.dist for v in r)

    @property
    def is_real(self) -> bool:
        return all(_is_real(z) for z in self.labels)

    @property
    def is_boolean(self) -> bool:
        return set(self.labels) == {-1, 1}

    def d(self, a: int, b: int) -> Number:
        return self.dist[a][b]


def _is_real(z) -> bool:
    return isinstance(z, (int, float, Fraction)) and not isinstance(z, bool)


def _require_real(labels):
    if not all(_is_real(z) for z in labels):
        raise ModelError("real-valued distance needs numeric labels")


def _half_square(t):
    return Fraction(t) ** 2 / 2 if is_exact(t) else t * t / 2


@dataclass(frozen=True)
class TabulatedFunction:
    space: ProductSpace
    outputs: OutputSpace
    table: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        if len(self.table) != self.space.size:
            raise ModelError(f"table has {len(self.table)} entries, space has {self.space.size} points")
        m = len(self.outputs.labels)
        if any(not 0 <= z < m for z in self.table):
            raise ModelError("table entry is not a valid output index")

    @classmethod
    def from_labels(cls, space: ProductSpace, outputs: OutputSpace, labels: Iterable) -> TabulatedFunction:
        return cls(space, outputs, tuple(outputs.index(z) for z in labels))

    @classmethod
    def from_callable(cls, space: ProductSpace, outputs: OutputSpace, fn: Callable) -> TabulatedFunction:
        """Tabulate ``fn`` applied to the tuple of coordinate value labels."""
        domains = [c.values for c in space.coords]
        return cls.from_labels(space, outputs, (fn(v) for v in itertools.product(*domains)))

    def __call__(self, x: int):
        return self.outputs.labels[self.table[x]]

    @property
    def n(self) -> int:
        return self.space.n

    def values(self) -> list:
        return [self.outputs.labels[z] for z in self.table]

    def is_constant(self) -> bool:
        return len(set(self.table)) <= 1

    @property
    def is_boolean(self) -> bool:
        return self.outputs.is_boolean

    def with_outputs(self, outputs: OutputSpace) -> TabulatedFunction:
        """Same function read through another distance on (a superset of) its labels."""
        labels = self.outputs.labels
        return TabulatedFunction(self.space, outputs, tuple(outputs.index(labels[z]) for z in self.table))

    def with_space(self, space: ProductSpace) -> TabulatedFunction:
        """Same table over a space with the same shape but other weights."""
        if space.sizes != self.space.sizes:
            raise SpaceMismatch("spaces have different shapes")
        return TabulatedFunction(space, self.outputs, self.table)

    def rebias(self, p: Number) -> TabulatedFunction:
        if not self.space.is_binary_cube():
            raise ModelError("rebias needs a {-1,1} cube")
        coords = tuple(CoordDomain(c.values, tuple(p if v == 1 else 1 - p for v in c.values))
                       for c in self.space.coords)
        return self.with_space(ProductSpace(coords, cap=self.space.cap))

    def depends_on(self, i: int) -> bool:
        sp = self.space
        for x in sp.points():
            if sp.coord_value(x, i) == 0:
                z = self.table[x]
                if any(self.table[x + a * sp.strides[i]] != z for a in range(1, sp.sizes[i])):
                    return True
        return False


def check_same_domain(f: TabulatedFunction, g: TabulatedFunction):
    if f.space != g.space:
        raise SpaceMismatch("functions live on different spaces")
    if f.outputs != g.outputs:
        raise SpaceMismatch("functions use different output spaces")


# ---------------------------------------------------------------------------
# function files

_BUILTINS = ("discrete", "boolean", "rho1", "rho2")
_KIND_WORDS = ("metric", "semimetric", "dist") + _BUILTINS


def _tokens(text: str):
    """(line number, tokens) for every non-comment, non-blank line."""
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_function(text: str | bytes, cap: int = DEFAULT_CAP, exact: bool = False) -> TabulatedFunction:
    """Parse a function file; decimals become floats unless ``exact`` is set."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = list(_tokens(text))
    if not lines:
        raise ParseError("empty function file", 1)
    lineno, toks = lines[0]
    if toks[0] != "space" or len(toks) != 2 or not re.fullmatch(r"\d+", toks[1]):
        raise ParseError("expected header 'space <n>'", lineno)
    n = int(toks[1])
    coords: dict[int, CoordDomain] = {}
    outputs: OutputSpace | None = None
    values: list[tuple[int, str]] | None = None

    for lineno, toks in lines[1:]:
        if values is not None:
            values.extend((lineno, t) for t in toks)
            continue
        head = toks[0]
        try:
            if head == "coord":
                i, dom = _parse_coord(toks, n, exact)
                if i in coords:
                    raise ModelError(f"coordinate {i} given twice")
                coords[i] = dom
            elif head == "outputs":
                outputs = _parse_outputs(toks[1:], exact)
            elif head == "values":
                values = [(lineno, t) for t in toks[1:]]
            else:
                raise ModelError(f"unknown directive {head!r}")
        except ParseError:
            raise
        except (ModelError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(str(exc), lineno) from None

    last = lines[-1][0]
    missing = [i for i in range(1, n + 1) if i not in coords]
    if missing:
        raise ParseError(f"missing coord line for coordinate {missing[0]}", last)
    if outputs is None:
        raise ParseError("missing outputs line", last)
    if values is None:
        raise ParseError("missing values line", last)
    try:
        space = ProductSpace(tuple(coords[i] for i in range(1, n + 1)), cap=cap)
    except ModelError as exc:
        raise ParseError(str(exc), last) from None
    if len(values) != space.size:
        where = values[-1][0] if values else last
        raise ParseError(f"expected {space.size} values, got {len(values)}", where)
    table = []
    for lineno, tok in values:
        label = parse_label(tok)
        if label not in outputs:
            raise ParseError(f"unknown output label {tok!r}", lineno)
        table.append(outputs.index(label))
    return TabulatedFunction(space, outputs, tuple(table))


def _parse_coord(toks: list[str], n: int, exact: bool) -> tuple[int, CoordDomain]:
    if len(toks) < 2 or not toks[1].isdigit():
        raise ModelError("expected 'coord <i> values ... weights ...'")
    i = int(toks[1])
    if not 1 <= i <= n:
        raise ModelError(f"coordinate {i} outside 1..{n}")
    rest = toks[2:]
    if "values" not in rest or "weights" not in rest:
        raise ModelError("coord line needs 'values' and 'weights'")
    vi, wi = rest.index("values"), rest.index("weights")
    if not vi < wi:
        raise ModelError("'values' must precede 'weights'")
    vals = [parse_label(t) for t in rest[vi + 1:wi]]
    weights = [parse_number(t, exact) for t in rest[wi + 1:]]
    if len(vals) != len(weights):
        raise ModelError(f"coordinate {i}: {len(vals)} values but {len(weights)} weights")
    return i, CoordDomain(tuple(vals), tuple(weights))


def _parse_outputs(toks: list[str], exact: bool) -> OutputSpace:
    k = next((j for j, t in enumerate(toks) if t in _KIND_WORDS), len(toks))
    labels = [parse_label(t) for t in toks[:k]]
    rest = toks[k:]
    if not labels:
        raise ModelError("no output labels")
    if not rest:
        return OutputSpace.boolean(labels) if set(labels) == {-1, 1} else OutputSpace.discrete(labels)
    if rest[0] in _BUILTINS:
        if len(rest) != 1:
            raise ModelError(f"unexpected tokens after {rest[0]!r}")
        return OutputSpace.builtin(rest[0], labels)
    kind = "metric"
    if rest[0] in ("metric", "semimetric"):
        kind, rest = rest[0], rest[1:]
    if not rest or rest[0] != "dist":
        raise ModelError("expected 'dist <table>' or a built-in distance name")
    entries = [parse_number(t, exact) for t in rest[1:]]
    m = len(labels)
    if len(entries) != m * m:
        raise ModelError(f"distance table needs {m * m} entries, got {len(entries)}")
    return OutputSpace(labels, [entries[r * m:(r + 1) * m] for r in range(m)], kind)


def format_function(f: TabulatedFunction) -> str:
    sp, out = f.space, f.outputs
    lines = [f"space {sp.n}"]
    for i, c in enumerate(sp.coords, 1):
        vals = " ".join(to_str(v) for v in c.values)
        ws = " ".join(to_str(w) for w in c.weights)
        lines.append(f"coord {i} values {vals} weights {ws}")
    labels = " ".join(to_str(z) for z in out.labels)
    if out.name in _BUILTINS:
        lines.append(f"outputs {labels} {out.name}")
    else:
        table = " ".join(to_str(v) for r in out.dist for v in r)
        lines.append(f"outputs {labels} {out.kind} dist {table}")
    lines.append("values " + " ".join(to_str(z) for z in f.values()))
    return "\n".join(lines) + "\n"
