"""Virtual morsification states: data model, validation, reflections and encodings."""

from __future__ import annotations

import enum
import json
import struct
from dataclasses import dataclass, replace
from fractions import Fraction

MU = 9
KEY_VERSION = 1


class PrincipalType(enum.Enum):
    X9_PLUS = "x9plus"
    X9_ONE = "x9one"
    X9_TWO = "x9two"

    @property
    def euler(self) -> int:
        return {"x9plus": 1, "x9one": -1, "x9two": -3}[self.value]

    @property
    def code(self) -> int:
        return ("x9plus", "x9one", "x9two").index(self.value)

    @classmethod
    def from_code(cls, code: int) -> "PrincipalType":
        return list(cls)[code]


class Kind(enum.IntEnum):
    MIN = 0
    SADDLE = 1
    MAX = 2
    PAIR_FIRST = 3
    PAIR_SECOND = 4

    @property
    def is_real(self) -> bool:
        return self <= Kind.MAX

    @property
    def morse_index(self) -> int:
        if not self.is_real:
            raise ValueError("complex point has no Morse index")
        return int(self)


class ParseError(ValueError):
    pass


class InvalidArgument(ValueError):
    pass


@dataclass(frozen=True)
class VirtualMorsification:
    ptype: PrincipalType
    matrix: tuple[tuple[int, ...], ...]
    r: tuple[int, ...]
    kinds: tuple[Kind, ...]
    q: int

    @property
    def mu(self) -> int:
        return len(self.kinds)

    @property
    def real_count(self) -> int:
        return sum(1 for k in self.kinds if k.is_real)

    @property
    def all_real(self) -> bool:
        return all(k.is_real for k in self.kinds)

    def with_q(self, q: int) -> "VirtualMorsification":
        return replace(self, q=q)


def make_state(ptype, matrix, r, kinds, q) -> VirtualMorsification:
    if isinstance(ptype, str):
        ptype = PrincipalType(ptype)
    return VirtualMorsification(
        ptype=ptype,
        matrix=tuple(tuple(int(x) for x in row) for row in matrix),
        r=tuple(int(x) for x in r),
        kinds=tuple(Kind(k) for k in kinds),
        q=int(q),
    )


def pair_blocks(kinds) -> list[tuple[int, int]] | None:
    """Split positions into blocks: (i, 1) for a real point, (i, 2) for a pair.

    Returns None when the pair markers are not properly adjacent.
    """
    blocks = []
    i = 0
    n = len(kinds)
    while i < n:
        k = kinds[i]
        if k <= Kind.MAX:
            blocks.append((i, 1))
            i += 1
        elif k == Kind.PAIR_FIRST and i + 1 < n and kinds[i + 1] == Kind.PAIR_SECOND:
            blocks.append((i, 2))
            i += 2
        else:
            return None
    return blocks


def validate(vm: VirtualMorsification) -> list[str]:
    out = []
    n = len(vm.kinds)
    if n != MU:
        out.append(f"mu is {n}, expected {MU}")
    if len(vm.matrix) != n or any(len(row) != n for row in vm.matrix):
        out.append("matrix size != mu")
        return out
    if len(vm.r) != n:
        out.append("real vector length != mu")
    A = vm.matrix
    if any(A[i][j] != A[j][i] for i in range(n) for j in range(i + 1, n)):
        out.append("asymmetric matrix")
    if any(A[i][i] != -2 for i in range(n)):
        out.append("diagonal entry != -2")
    M = vm.real_count
    if not 0 <= vm.q <= M:
        out.append("neg_count out of range")
    if M % 2 == 0:
        out.append("even number of real points")
    if pair_blocks(vm.kinds) is None:
        out.append("complex pair members not adjacent")
    counts = [sum(1 for k in vm.kinds if k == t) for t in (Kind.MIN, Kind.SADDLE, Kind.MAX)]
    if counts[0] - counts[1] + counts[2] != vm.ptype.euler:
        out.append("Euler number mismatch")
    return out


def reflect(vm: VirtualMorsification, moving: int, center: int) -> VirtualMorsification:
    """Replace cycle `moving` by its image under the reflection in cycle `center` (0-based)."""
    if moving == center:
        raise InvalidArgument("moving and center positions coincide")
    A = [list(row) for row in vm.matrix]
    r = list(vm.r)
    reflect_inplace(A, r, moving, center)
    return replace(vm, matrix=tuple(map(tuple, A)), r=tuple(r))


def reflect_inplace(A: list[list[int]], r: list[int], m: int, c: int) -> None:
    a = A[m][c]
    if a == 0:
        return
    row_c = A[c]
    row_m = A[m]
    for k in range(len(A)):
        if k != m:
            v = row_m[k] + a * row_c[k]
            row_m[k] = v
            A[k][m] = v
    r[m] += a * r[c]


def trivial_invariant(vm: VirtualMorsification) -> tuple[int, int, int, int]:
    mn = sum(1 for k in vm.kinds if k == Kind.MIN)
    sd = sum(1 for k in vm.kinds if k == Kind.SADDLE)
    mx = sum(1 for k in vm.kinds if k == Kind.MAX)
    return mn + sd + mx, mn, sd, mx


def exact_det(matrix) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    A = [[Fraction(x) for x in row] for row in matrix]
    n = len(A)
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if A[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det *= A[col][col]
        for i in range(col + 1, n):
            f = A[i][col] / A[col][col]
            if f:
                for j in range(col, n):
                    A[i][j] -= f * A[col][j]
    return det


def int_det(matrix) -> int:
    """Determinant by fraction-free (Bareiss) elimination."""
    A = [list(row) for row in matrix]
    n = len(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        piv = A[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * piv - A[i][k] * A[k][j]) // prev
        prev = piv
    return sign * A[n - 1][n - 1]


# Packed key layout: version, ptype, mu, q, width, kinds[mu],
# upper-triangle entries then r, little-endian signed ints of `width` bytes.

_WIDTH_FMT = {2: "h", 8: "q"}


def pack(ptype_code: int, A, r, kinds, q: int) -> bytes:
    n = len(kinds)
    vals = [A[i][j] for i in range(n) for j in range(i + 1, n)]
    vals.extend(r)
    width = 2 if all(-32768 <= v <= 32767 for v in vals) else 8
    head = bytes((KEY_VERSION, ptype_code, n, q, width)) + bytes(int(k) for k in kinds)
    return head + struct.pack("<%d%s" % (len(vals), _WIDTH_FMT[width]), *vals)


def unpack(key: bytes):
    """Inverse of `pack`: (ptype_code, A as lists, r, kinds as ints, q)."""
    if key[0] != KEY_VERSION:
        raise ParseError(f"unsupported key version {key[0]}")
    ptype_code, n, q, width = key[1], key[2], key[3], key[4]
    kinds = list(key[5:5 + n])
    m = n * (n - 1) // 2
    vals = struct.unpack_from("<%d%s" % (m + n, _WIDTH_FMT[width]), key, 5 + n)
    A = [[-2] * n for _ in range(n)]
    t = 0
    for i in range(n):
        for j in range(i + 1, n):
            A[i][j] = A[j][i] = vals[t]
            t += 1
    return ptype_code, A, list(vals[m:]), kinds, q


def canonical_key(vm: VirtualMorsification) -> bytes:
    return pack(vm.ptype.code, vm.matrix, vm.r, vm.kinds, vm.q)


def from_key(key: bytes) -> VirtualMorsification:
    ptype_code, A, r, kinds, q = unpack(key)
    return make_state(PrincipalType.from_code(ptype_code), A, r, kinds, q)


def _kind_labels(kinds) -> list[str]:
    labels = []
    pair = 0
    for k in kinds:
        if k == Kind.PAIR_FIRST:
            pair += 1
            labels.append(f"pairA:{pair}")
        elif k == Kind.PAIR_SECOND:
            labels.append(f"pairB:{pair}")
        else:
            labels.append(("min", "saddle", "max")[k])
    return labels


def to_json_obj(vm: VirtualMorsification) -> dict:
    return {
        "mu": vm.mu,
        "ptype": vm.ptype.value,
        "q": vm.q,
        "kinds": _kind_labels(vm.kinds),
        "matrix": [list(row) for row in vm.matrix],
        "r": list(vm.r),
    }


def serialize(vm: VirtualMorsification) -> str:
    obj = to_json_obj(vm)
    rows = ",\n    ".join(json.dumps(row) for row in obj["matrix"])
    return (
        "{\n"
        f'  "mu": {obj["mu"]},\n'
        f'  "ptype": {json.dumps(obj["ptype"])},\n'
        f'  "q": {obj["q"]},\n'
        f'  "kinds": {json.dumps(obj["kinds"])},\n'
        f'  "matrix": [\n    {rows}\n  ],\n'
        f'  "r": {json.dumps(obj["r"])}\n'
        "}\n"
    )


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected integer, got {value!r}")
    return value


def from_json_obj(obj) -> VirtualMorsification:
    if not isinstance(obj, dict):
        raise ParseError("state must be a JSON object")
    for field in ("mu", "ptype", "q", "kinds", "matrix", "r"):
        if field not in obj:
            raise ParseError(f"missing field {field!r}")
    mu = _int(obj["mu"], "mu")
    try:
        ptype = PrincipalType(obj["ptype"])
    except ValueError:
        raise ParseError(f"ptype: unknown value {obj['ptype']!r}") from None
    q = _int(obj["q"], "q")
    labels = obj["kinds"]
    if not isinstance(labels, list) or len(labels) != mu:
        raise ParseError("kinds: length != mu")
    kinds = []
    open_pair = None
    for i, lab in enumerate(labels):
        where = f"kinds[{i}]"
        if lab in ("min", "saddle", "max"):
            if open_pair is not None:
                raise ParseError(f"{where}: pair {open_pair} not closed")
            kinds.append(Kind(("min", "saddle", "max").index(lab)))
        elif isinstance(lab, str) and lab.startswith("pairA:"):
            if open_pair is not None:
                raise ParseError(f"{where}: pair {open_pair} not closed")
            open_pair = lab[6:]
            kinds.append(Kind.PAIR_FIRST)
        elif isinstance(lab, str) and lab.startswith("pairB:"):
            if open_pair != lab[6:]:
                raise ParseError(f"{where}: pairB without matching pairA")
            open_pair = None
            kinds.append(Kind.PAIR_SECOND)
        else:
            raise ParseError(f"{where}: unknown kind {lab!r}")
    if open_pair is not None:
        raise ParseError(f"pair {open_pair} not closed")
    matrix = obj["matrix"]
    if not isinstance(matrix, list) or len(matrix) != mu or any(
        not isinstance(row, list) or len(row) != mu for row in matrix
    ):
        raise ParseError("matrix size != mu")
    A = [[_int(x, f"matrix[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(matrix)]
    r = obj["r"]
    if not isinstance(r, list) or len(r) != mu:
        raise ParseError("r: length != mu")
    r = [_int(x, f"r[{i}]") for i, x in enumerate(r)]
    return make_state(ptype, A, r, kinds, q)


def parse(text: str) -> VirtualMorsification:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from None
    return from_json_obj(obj)
