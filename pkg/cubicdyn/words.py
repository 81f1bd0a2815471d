"""Word algebra for the free product of three involutions and its index-two
subgroup generated by g_x = s_z s_y, g_y = s_x s_z, g_z = s_y s_x.

Spellings are strings over ``x``, ``y``, ``z`` read as compositions: the
left-most letter is applied last, so the product u*v is concatenation
followed by cancellation at the junction. Even-length words form the
subgroup Gamma; the a/b/c alphabet (a = g_x, b = g_y, c = g_z, upper case
for inverses) is only a presentation layer on top of the same strings.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import NotAlgebraicallyStable, NotInImage, OddLengthWord

ALPHABET = "xyz"


class Letter(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def index(self) -> int:
        return ALPHABET.index(self.value)


class InfinityVertex(str, Enum):
    """Vertices (1:0:0:0), (0:1:0:0), (0:0:1:0) of the triangle at infinity."""

    V1 = "v1"
    V2 = "v2"
    V3 = "v3"

    @property
    def index(self) -> int:
        return int(self.value[1]) - 1

    @classmethod
    def of_letter(cls, letter: str) -> "InfinityVertex":
        return list(cls)[ALPHABET.index(letter)]


class ElementKind(str, Enum):
    IDENTITY = "Identity"
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"


class Parity(str, Enum):
    GAMMA = "gamma"
    GAMMA_STAR = "gamma_star"


def _join(left: str, right: str) -> str:
    # Both sides reduced: only the junction can cancel.
    i = 0
    n = min(len(left), len(right))
    while i < n and left[len(left) - 1 - i] == right[i]:
        i += 1
    return left[: len(left) - i] + right[i:]


@dataclass(frozen=True, slots=True)
class GeneratorWord:
    """Reduced word; ``spelling`` never has two equal adjacent letters."""

    spelling: str = ""

    def __post_init__(self) -> None:
        s = self.spelling
        if any(ch not in ALPHABET for ch in s):
            raise ValueError(f"letters must be among x,y,z: {s!r}")
        if any(s[i] == s[i + 1] for i in range(len(s) - 1)):
            raise ValueError(f"word is not reduced: {s!r}")

    @classmethod
    def parse(cls, text: str) -> "GeneratorWord":
        """Reduce an arbitrary x/y/z string (empty string or 'e' = identity)."""
        text = text.strip().lower()
        if text in ("", "e", "id", "1"):
            return cls("")
        return reduce(text)

    @property
    def letters(self) -> tuple[Letter, ...]:
        return tuple(Letter(ch) for ch in self.spelling)

    @property
    def is_identity(self) -> bool:
        return not self.spelling

    @property
    def in_gamma(self) -> bool:
        return len(self.spelling) % 2 == 0

    def inverse(self) -> "GeneratorWord":
        return GeneratorWord(self.spelling[::-1])

    def __mul__(self, other: "GeneratorWord") -> "GeneratorWord":
        return GeneratorWord(_join(self.spelling, other.spelling))

    def __pow__(self, n: int) -> "GeneratorWord":
        base = self if n >= 0 else self.inverse()
        out = GeneratorWord("")
        for _ in range(abs(n)):
            out = out * base
        return out

    def __len__(self) -> int:
        return len(self.spelling)

    def __str__(self) -> str:
        return self.spelling


IDENTITY = GeneratorWord("")


def reduce(raw: Iterable[Letter | str] | str) -> GeneratorWord:
    stack: list[str] = []
    for item in raw:
        ch = item.value if isinstance(item, Letter) else str(item).lower()
        if ch not in ALPHABET:
            raise ValueError(f"unknown letter {item!r}")
        if stack and stack[-1] == ch:
            stack.pop()
        else:
            stack.append(ch)
    return GeneratorWord("".join(stack))


def commutator(a: GeneratorWord, b: GeneratorWord) -> GeneratorWord:
    """[a, b] = a^-1 b^-1 a b."""
    return a.inverse() * b.inverse() * a * b


def commutes(a: GeneratorWord, b: GeneratorWord) -> bool:
    return (a * b * a.inverse() * b.inverse()).is_identity


def cyclic_reduce(w: GeneratorWord) -> tuple[GeneratorWord, GeneratorWord]:
    """Return (core, conjugator) with w = conjugator * core * conjugator^-1."""
    s = w.spelling
    i = 0
    while len(s) - 2 * i >= 2 and s[i] == s[len(s) - 1 - i]:
        i += 1
    return GeneratorWord(s[i : len(s) - i]), GeneratorWord(s[:i])


@dataclass(frozen=True, slots=True)
class ElementClass:
    kind: ElementKind
    witness: GeneratorWord = IDENTITY


def classify(w: GeneratorWord) -> ElementClass:
    core, conj = cyclic_reduce(w)
    if core.is_identity:
        kind = ElementKind.IDENTITY
    elif len(core) == 1:
        kind = ElementKind.ELLIPTIC
    elif len(set(core.spelling)) == 2:
        kind = ElementKind.PARABOLIC
    else:
        kind = ElementKind.HYPERBOLIC
    return ElementClass(kind=kind, witness=conj)


def ind_attr(w: GeneratorWord) -> tuple[InfinityVertex, InfinityVertex]:
    """(Ind, Attr): axes of the right-most and left-most letters."""
    core, conj = cyclic_reduce(w)
    if not conj.is_identity or len(w) < 2:
        raise NotAlgebraicallyStable(
            f"{w.spelling!r} is not cyclically reduced", word=w.spelling
        )
    if classify(w).kind != ElementKind.HYPERBOLIC:
        raise NotAlgebraicallyStable(
            f"{w.spelling!r} is not hyperbolic", word=w.spelling
        )
    s = w.spelling
    return InfinityVertex.of_letter(s[-1]), InfinityVertex.of_letter(s[0])


def enumerate_words(
    max_len: int, parity: Parity = Parity.GAMMA_STAR
) -> Iterator[GeneratorWord]:
    """Reduced words of length <= max_len in length-lexicographic order."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")

    def extend(prefix: str, remaining: int) -> Iterator[str]:
        if remaining == 0:
            yield prefix
            return
        for ch in ALPHABET:
            if prefix and prefix[-1] == ch:
                continue
            yield from extend(prefix + ch, remaining - 1)

    for length in range(max_len + 1):
        if parity == Parity.GAMMA and length % 2:
            continue
        for s in extend("", length):
            yield GeneratorWord(s)


def count_words(max_len: int, parity: Parity = Parity.GAMMA_STAR) -> int:
    lengths = range(max_len + 1)
    if parity == Parity.GAMMA:
        lengths = range(0, max_len + 1, 2)
    return sum(1 if n == 0 else 3 * 2 ** (n - 1) for n in lengths)


# ---------------------------------------------------------------------------
# g-alphabet presentation
# ---------------------------------------------------------------------------

G_TO_PAIR = {"a": "zy", "b": "xz", "c": "yx", "A": "yz", "B": "zx", "C": "xy"}
PAIR_TO_G = {v: k for k, v in G_TO_PAIR.items()}


def from_g(text: str) -> GeneratorWord:
    out = IDENTITY
    for ch in text.strip():
        if ch not in G_TO_PAIR:
            raise ValueError(f"unknown g-letter {ch!r}")
        out = out * GeneratorWord(G_TO_PAIR[ch])
    return out


def to_g(w: GeneratorWord) -> str:
    if not w.in_gamma:
        raise OddLengthWord(f"{w.spelling!r} has odd length", word=w.spelling)
    s = w.spelling
    return "".join(PAIR_TO_G[s[i : i + 2]] for i in range(0, len(s), 2))


def parse_word(text: str) -> GeneratorWord:
    """Accept either alphabet: x/y/z strings or a/b/c (A/B/C) strings."""
    stripped = text.strip()
    if stripped and all(ch in "abcABC" for ch in stripped):
        return from_g(stripped)
    return GeneratorWord.parse(stripped)


# ---------------------------------------------------------------------------
# Gamma(2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class IntegerMatrix2:
    """Element of Gamma(2): det 1, odd diagonal, even off-diagonal."""

    m11: int
    m12: int
    m21: int
    m22: int

    def __post_init__(self) -> None:
        if self.m11 * self.m22 - self.m12 * self.m21 != 1:
            raise ValueError(f"det != 1: {self.as_tuple()}")
        if self.m11 % 2 == 0 or self.m22 % 2 == 0 or self.m12 % 2 or self.m21 % 2:
            raise ValueError(f"not in Gamma(2): {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.m11, self.m12, self.m21, self.m22)

    def rows(self) -> list[list[int]]:
        return [[self.m11, self.m12], [self.m21, self.m22]]

    def __matmul__(self, o: "IntegerMatrix2") -> "IntegerMatrix2":
        return IntegerMatrix2(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )

    def inverse(self) -> "IntegerMatrix2":
        return IntegerMatrix2(self.m22, -self.m12, -self.m21, self.m11)

    @property
    def trace(self) -> int:
        return self.m11 + self.m22

    @property
    def max_entry(self) -> int:
        return max(abs(v) for v in self.as_tuple())

    def classify(self) -> ElementKind:
        t = abs(self.trace)
        if self.as_tuple() == (1, 0, 0, 1):
            return ElementKind.IDENTITY
        if t > 2:
            return ElementKind.HYPERBOLIC
        if t == 2:
            return ElementKind.PARABOLIC
        return ElementKind.ELLIPTIC


MATRIX_IDENTITY = IntegerMatrix2(1, 0, 0, 1)
G_X = IntegerMatrix2(1, 0, -2, 1)
G_Y = IntegerMatrix2(1, 2, 0, 1)
G_Z = IntegerMatrix2(1, -2, 2, -3)

PAIR_MATRIX = {
    "zy": G_X,
    "yz": G_X.inverse(),
    "xz": G_Y,
    "zx": G_Y.inverse(),
    "yx": G_Z,
    "xy": G_Z.inverse(),
}


def to_sl2(w: GeneratorWord) -> IntegerMatrix2:
    if not w.in_gamma:
        raise OddLengthWord(f"{w.spelling!r} is not in Gamma", word=w.spelling)
    m = MATRIX_IDENTITY
    s = w.spelling
    for i in range(0, len(s), 2):
        m = m @ PAIR_MATRIX[s[i : i + 2]]
    return m


def from_sl2(m: IntegerMatrix2) -> GeneratorWord:
    """Inverse of to_sl2 on its image, by Euclid on the first column.

    Left multiplication by U^k = [[1,2k],[0,1]] (word ``xz``) or
    L^k = [[1,0],[2k,1]] (word ``yz``) shrinks the first column until it
    is (+-1, 0). A final sign of -1 means the matrix is in the -I coset.
    """
    prefix = IDENTITY
    cur = m
    up = GeneratorWord("xz")
    low = GeneratorWord("yz")
    while cur.m21 != 0:
        p, q = cur.m11, cur.m21
        if abs(p) > abs(q):
            k = -round(Fraction(p, 2 * q))
            cur = IntegerMatrix2(1, 2 * k, 0, 1) @ cur
            prefix = prefix * (up ** (-k))
        else:
            k = -round(Fraction(q, 2 * p))
            cur = IntegerMatrix2(1, 0, 2 * k, 1) @ cur
            prefix = prefix * (low ** (-k))
    if cur.m11 != 1:
        raise NotInImage(
            "matrix lies in the -I coset of the image", matrix=list(m.as_tuple())
        )
    return prefix * (up ** (cur.m12 // 2))
