"""Elementary flips of virtual morsifications and their configuration switches."""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields, replace

from .vmcore import Kind, VirtualMorsification, make_state, pack, pair_blocks, reflect_inplace, unpack


class FlipKind(enum.IntEnum):
    W1_REAL_SWAP = 0
    W2_ZERO_TRANSITION = 1
    W3_PAIR_PAST_REAL = 2
    W4_PAIR_PAST_PAIR = 3
    W5_PAIR_MEMBER_SWAP = 4
    T1_DEATH = 5
    T2_BIRTH = 6

    @property
    def within_subset(self) -> bool:
        return self <= FlipKind.W5_PAIR_MEMBER_SWAP


class FlipError(ValueError):
    pass


class CapExceeded(RuntimeError):
    def __init__(self, what: str, detail: str = ""):
        super().__init__(f"{what} cap exceeded{': ' + detail if detail else ''}")
        self.what = what


@dataclass(frozen=True)
class FlipInstance:
    kind: FlipKind
    site: int  # 0-based leftmost position touched (unused for W2)
    selector: str = ""

    def describe(self) -> str:
        if self.kind == FlipKind.W2_ZERO_TRANSITION:
            return f"{self.kind.name} {self.selector}"
        tail = f" {self.selector}" if self.selector else ""
        return f"{self.kind.name} at {self.site + 1}{tail}"


# Each variation point: (config field, allowed values, default first).
CHOICES = {
    "w1_straddle": ("blocked", "allowed"),
    "w2_effect": ("q_only", "reflect"),
    "w3_scope": ("both", "upper"),
    "w4_pairing": ("corresponding", "both_in_both"),
    "t1_rows": ("remark", "combine"),
    "t2_guard": ("unit", "unit_and_r2"),
}
VARIATION_KEYS = tuple(CHOICES)


@dataclass(frozen=True)
class FlipConfig:
    w1_straddle: str = "blocked"
    w2_effect: str = "q_only"
    w3_scope: str = "both"
    w4_pairing: str = "corresponding"
    t1_rows: str = "remark"
    t2_guard: str = "unit"
    max_abs_entry: int = 64
    max_states: int = 2_000_000
    # divide-to-seed sign switches
    divide_min_sign: int = 1
    divide_max_sign: int = 1
    divide_max_r: int = 2

    def __post_init__(self):
        for key, allowed in CHOICES.items():
            if getattr(self, key) not in allowed:
                raise ValueError(f"{key}: {getattr(self, key)!r} not in {allowed}")
        if not 2 <= self.max_abs_entry <= 32767:
            raise ValueError("max_abs_entry must lie in 2..32767")
        if self.max_states < 1:
            raise ValueError("max_states must be positive")
        if self.divide_min_sign not in (1, -1) or self.divide_max_sign not in (1, -1):
            raise ValueError("divide signs must be +1 or -1")

    def codes(self) -> tuple[int, ...]:
        """Compact integer form handed to the expansion kernels."""
        return tuple(CHOICES[k].index(getattr(self, k)) for k in VARIATION_KEYS) + (self.max_abs_entry,)

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))

    def one_line(self) -> str:
        return ";".join(f"{f.name}={getattr(self, f.name)}" for f in fields(self))

    @classmethod
    def from_text(cls, text: str) -> "FlipConfig":
        vals = {}
        types = {f.name: f.type for f in fields(cls)}
        items = []
        for n, line in enumerate(text.splitlines(), 1):
            items.extend((n, part.strip()) for part in line.split("#", 1)[0].split(";"))
        for n, line in items:
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {n}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ValueError(f"line {n}: unknown key {key!r}")
            vals[key] = int(val) if types[key] in ("int", int) else val
        return cls(**vals)

    def with_choices(self, **kw) -> "FlipConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = FlipConfig()


# Raw-form operations. A state is (A, r, kinds, q) with A a list of lists,
# kinds small ints (Kind values). Functions below never mutate their inputs.

def _sides(kinds, q):
    """Map each real position to True when its value is negative."""
    neg = {}
    c = 0
    for i, k in enumerate(kinds):
        if k <= 2:
            neg[i] = c < q
            c += 1
    return neg


def enumerate_raw(A, r, kinds, q, codes) -> list[FlipInstance]:
    w1_allowed, _, _, _, _, t2_r2 = codes[:6]
    n = len(kinds)
    blocks = pair_blocks(kinds)
    neg = _sides(kinds, q)
    M = len(neg)
    out = []
    for i in range(n - 1):
        if kinds[i] <= 2 and kinds[i + 1] <= 2 and A[i][i + 1] == 0:
            if w1_allowed or neg[i] == neg[i + 1]:
                out.append(FlipInstance(FlipKind.W1_REAL_SWAP, i))
    if q < M:
        out.append(FlipInstance(FlipKind.W2_ZERO_TRANSITION, 0, "up"))
    if q > 0:
        out.append(FlipInstance(FlipKind.W2_ZERO_TRANSITION, 0, "down"))
    for b in range(len(blocks) - 1):
        (i, li), (j, lj) = blocks[b], blocks[b + 1]
        if li == 1 and lj == 2:
            out.append(FlipInstance(FlipKind.W3_PAIR_PAST_REAL, j, "left"))
        elif li == 2 and lj == 1:
            out.append(FlipInstance(FlipKind.W3_PAIR_PAST_REAL, i, "right"))
    for b in range(len(blocks) - 1):
        (i, li), (j, lj) = blocks[b], blocks[b + 1]
        if li == 2 and lj == 2:
            out.append(FlipInstance(FlipKind.W4_PAIR_PAST_PAIR, i, "left"))
            out.append(FlipInstance(FlipKind.W4_PAIR_PAST_PAIR, i, "right"))
    for i, l in blocks:
        if l == 2 and A[i][i + 1] == 0:
            out.append(FlipInstance(FlipKind.W5_PAIR_MEMBER_SWAP, i))
    for i in range(n - 1):
        if (
            kinds[i] <= 2
            and kinds[i + 1] <= 2
            and abs(kinds[i] - kinds[i + 1]) == 1
            and abs(A[i][i + 1]) == 1
            and neg[i] == neg[i + 1]
        ):
            out.append(FlipInstance(FlipKind.T1_DEATH, i))
    reals_before = 0
    for i, l in blocks:
        if l == 1:
            reals_before += 1
            continue
        if abs(A[i][i + 1]) != 1 or reals_before < q:
            continue
        if t2_r2 and (abs(r[i]) != 2 or abs(r[i + 1]) != 2):
            continue
        out.append(FlipInstance(FlipKind.T2_BIRTH, i, "min_saddle"))
        out.append(FlipInstance(FlipKind.T2_BIRTH, i, "saddle_max"))
    return out


def _permute(A, r, kinds, p):
    """New position t receives old position p[t]."""
    n = len(p)
    return (
        [[A[p[i]][p[j]] for j in range(n)] for i in range(n)],
        [r[p[i]] for i in range(n)],
        [kinds[p[i]] for i in range(n)],
    )


def apply_raw(A, r, kinds, q, flip: FlipInstance, codes):
    """Apply one flip; returns a new (A, r, kinds, q). Preconditions are the caller's job."""
    _, w2_reflect, w3_upper, w4_both, t1_combine, _ = codes[:6]
    n = len(kinds)
    kind = flip.kind
    i = flip.site
    A = [row[:] for row in A]
    r = r[:]
    kinds = list(kinds)
    if kind == FlipKind.W1_REAL_SWAP or kind == FlipKind.W5_PAIR_MEMBER_SWAP:
        p = list(range(n))
        p[i], p[i + 1] = i + 1, i
        A, r, kk = _permute(A, r, kinds, p)
        if kind == FlipKind.W1_REAL_SWAP:
            kinds = kk
        return A, r, kinds, q
    if kind == FlipKind.W2_ZERO_TRANSITION:
        reals = [t for t, k in enumerate(kinds) if k <= 2]
        if flip.selector == "up":
            k, s, q2 = reals[q], -1, q + 1
        else:
            k, s, q2 = reals[q - 1], 1, q - 1
        if w2_reflect:
            col = [A[t][k] for t in range(n)]
            r = [r[t] + s * col[t] for t in range(n)]
        return A, r, kinds, q2
    if kind == FlipKind.W3_PAIR_PAST_REAL:
        if flip.selector == "left":
            c = i - 1
            members = (i,) if w3_upper else (i, i + 1)
            for m in members:
                reflect_inplace(A, r, m, c)
            p = list(range(n))
            p[i - 1], p[i], p[i + 1] = i, i + 1, i - 1
        else:
            c = i + 2
            members = (i,) if w3_upper else (i, i + 1)
            for m in members:
                reflect_inplace(A, r, m, c)
            p = list(range(n))
            p[i], p[i + 1], p[i + 2] = i + 2, i, i + 1
        A, r, kinds = _permute(A, r, kinds, p)
        return A, r, kinds, q
    if kind == FlipKind.W4_PAIR_PAST_PAIR:
        if flip.selector == "left":
            movers, others = (i + 2, i + 3), (i, i + 1)
            order = (others[0], others[1])
        else:
            movers, others = (i, i + 1), (i + 2, i + 3)
            order = (others[1], others[0])
        if w4_both:
            for m in movers:
                for c in order:
                    reflect_inplace(A, r, m, c)
        else:
            reflect_inplace(A, r, movers[0], others[0])
            reflect_inplace(A, r, movers[1], others[1])
        p = list(range(n))
        p[i], p[i + 1], p[i + 2], p[i + 3] = i + 2, i + 3, i, i + 1
        A, r, kinds = _permute(A, r, kinds, p)
        return A, r, kinds, q
    if kind == FlipKind.T1_DEATH:
        neg = _sides(kinds, q)[i]
        if t1_combine:
            e = A[i][i + 1]
            row = [A[i][k] + e * A[i + 1][k] for k in range(n)]
            rv = r[i] + e * r[i + 1]
            for m in (i, i + 1):
                for k in range(n):
                    if k not in (i, i + 1):
                        A[m][k] = A[k][m] = row[k]
                r[m] = rv
            A[i][i + 1] = A[i + 1][i] = -2
        kinds[i], kinds[i + 1] = Kind.PAIR_FIRST, Kind.PAIR_SECOND
        return A, r, kinds, q - 2 if neg else q
    if kind == FlipKind.T2_BIRTH:
        if flip.selector == "min_saddle":
            kinds[i], kinds[i + 1] = Kind.MIN, Kind.SADDLE
        else:
            kinds[i], kinds[i + 1] = Kind.SADDLE, Kind.MAX
        return A, r, kinds, q
    raise FlipError(f"unknown flip kind {kind}")


def _check_cap(A, cap):
    for row in A:
        for x in row:
            if x > cap or x < -cap:
                raise CapExceeded("entry", f"|{x}| > {cap}")


def expand_key(key: bytes, codes) -> list[tuple[int, bytes]]:
    """All (flip kind, neighbour key) pairs of a packed state, in enumeration order."""
    ptype_code, A, r, kinds, q = unpack(key)
    cap = codes[6]
    out = []
    for flip in enumerate_raw(A, r, kinds, q, codes):
        A2, r2, k2, q2 = apply_raw(A, r, kinds, q, flip, codes)
        _check_cap(A2, cap)
        out.append((int(flip.kind), pack(ptype_code, A2, r2, k2, q2)))
    return out


def _raw(vm: VirtualMorsification):
    return [list(row) for row in vm.matrix], list(vm.r), [int(k) for k in vm.kinds], vm.q


def enumerate_flips(vm: VirtualMorsification, config: FlipConfig = DEFAULT_CONFIG) -> list[FlipInstance]:
    return enumerate_raw(*_raw(vm), config.codes())


def _why_inapplicable(vm: VirtualMorsification, flip: FlipInstance) -> str:
    n = vm.mu
    if flip.kind != FlipKind.W2_ZERO_TRANSITION and not 0 <= flip.site < n - 1:
        return f"site {flip.site + 1} out of range"
    return f"{flip.describe()} preconditions not met"


def apply_flip(vm: VirtualMorsification, flip: FlipInstance, config: FlipConfig = DEFAULT_CONFIG) -> VirtualMorsification:
    codes = config.codes()
    raw = _raw(vm)
    if flip not in enumerate_raw(*raw, codes):
        raise FlipError(_why_inapplicable(vm, flip))
    A, r, kinds, q = apply_raw(*raw, flip, codes)
    _check_cap(A, config.max_abs_entry)
    return make_state(vm.ptype, A, r, kinds, q)
