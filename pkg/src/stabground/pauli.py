"""Signed N-qubit Pauli strings in symplectic bit form.

A string is stored as two integer bitmasks ``x`` and ``z`` (bit ``q`` is
qubit ``q``) and an exponent of ``i`` modulo 4. The operator represented is

    i**phase_exp * prod_q X_q**x_q Z_q**z_q

so ``Y = i X Z`` carries ``phase_exp = 1``. Text form is ``[+|-]`` followed by
one character from ``IXYZ`` per qubit, qubit 0 leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DimensionError, ParseError, ValidationError

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTERS.items()}


def popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, slots=True)
class PauliString:
    n_qubits: int
    x: int
    z: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x & ~full or self.z & ~full or self.x < 0 or self.z < 0:
            raise ValidationError("bitmask wider than n_qubits")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, 0, 0, 0)

    @classmethod
    def from_letters(cls, n_qubits: int, letters: dict[int, str], sign: int = 1) -> PauliString:
        """Build a Hermitian string from ``{qubit: letter}``."""
        x = z = 0
        for q, ch in letters.items():
            if not 0 <= q < n_qubits:
                raise ValidationError(f"qubit {q} out of range")
            bx, bz = _BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls.hermitian(n_qubits, x, z, sign)

    @classmethod
    def hermitian(cls, n_qubits: int, x: int, z: int, sign: int = 1) -> PauliString:
        if sign not in (1, -1):
            raise ValidationError("sign must be +1 or -1")
        return cls(n_qubits, x, z, popcount(x & z) + (0 if sign == 1 else 2))

    @classmethod
    def from_vector(cls, n_qubits: int, vec: int, sign: int = 1) -> PauliString:
        """Inverse of :attr:`vector`; the result is Hermitian with ``sign``."""
        mask = (1 << n_qubits) - 1
        return cls.hermitian(n_qubits, vec >> n_qubits, vec & mask, sign)

    @property
    def vector(self) -> int:
        """Symplectic vector ``(x << n) | z`` as a single integer."""
        return (self.x << self.n_qubits) | self.z

    @property
    def _text_phase(self) -> int:
        # exponent of i in front of the letter product
        return (self.phase_exp - popcount(self.x & self.z)) % 4

    @property
    def is_hermitian(self) -> bool:
        return self._text_phase % 2 == 0

    @property
    def sign(self) -> int:
        tp = self._text_phase
        if tp % 2:
            raise ValidationError(f"{self!r} carries a factor of ±i")
        return 1 if tp == 0 else -1

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    def letter(self, q: int) -> str:
        return _LETTERS[(self.x >> q) & 1, (self.z >> q) & 1]

    def unsigned(self) -> PauliString:
        """Same letters, overall sign +1."""
        return PauliString.hermitian(self.n_qubits, self.x, self.z)

    def __neg__(self) -> PauliString:
        return PauliString(self.n_qubits, self.x, self.z, self.phase_exp + 2)

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def __str__(self) -> str:
        return format_pauli(self)

    def __repr__(self) -> str:
        prefix = ("+", "+i", "-", "-i")[self._text_phase]
        body = "".join(self.letter(q) for q in range(self.n_qubits))
        return f"PauliString('{prefix}{body}')"


def _check_same(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"{a.n_qubits}-qubit and {b.n_qubits}-qubit strings")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a * b`` including the phase."""
    _check_same(a, b)
    # moving Z^{z_a} past X^{x_b} costs (-1) per overlapping qubit
    phase = a.phase_exp + b.phase_exp + 2 * popcount(a.z & b.x)
    return PauliString(a.n_qubits, a.x ^ b.x, a.z ^ b.z, phase)


def symplectic_product(u: int, v: int, n_qubits: int) -> int:
    """Symplectic form of two ``(x << n) | z`` vectors, 0 or 1."""
    mask = (1 << n_qubits) - 1
    xu, zu = u >> n_qubits, u & mask
    xv, zv = v >> n_qubits, v & mask
    return popcount((xu & zv) ^ (zu & xv)) & 1


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_same(a, b)
    return popcount((a.x & b.z) ^ (a.z & b.x)) % 2 == 0


def parse_pauli(text: str) -> PauliString:
    s = text.strip()
    sign = 1
    if s[:1] in ("+", "-"):
        sign = -1 if s[0] == "-" else 1
        s = s[1:]
    if not s:
        raise ParseError(f"empty Pauli string {text!r}")
    x = z = 0
    for q, ch in enumerate(s):
        try:
            bx, bz = _BITS[ch]
        except KeyError:
            raise ParseError(f"illegal character {ch!r} in Pauli string {text!r}") from None
        x |= bx << q
        z |= bz << q
    return PauliString.hermitian(len(s), x, z, sign)


def format_pauli(p: PauliString) -> str:
    """Canonical text: explicit sign plus letters. Rejects ±i strings."""
    sign = "+" if p.sign == 1 else "-"
    return sign + "".join(p.letter(q) for q in range(p.n_qubits))
