"""Seed states from divide incidence data (double points, regions, corner counts)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .flips import DEFAULT_CONFIG, FlipConfig
from .vmcore import Kind, ParseError, PrincipalType, VirtualMorsification, make_state, parse


class InvalidDivide(ValueError):
    pass


@dataclass
class Extra:
    id: str
    kind: str = "saddle"  # "min" or "saddle"
    value: str = "with_kind"  # "lowest" puts it below every other value
    row: dict[str, int] = field(default_factory=dict)
    r: int | None = None


@dataclass
class Divide:
    double_points: list[str]
    regions: dict[str, str]  # region id -> "negative" | "positive"
    corners: dict[tuple[str, str], int]
    extras: list[Extra] = field(default_factory=list)
    ptype: PrincipalType | None = None

    @property
    def cycle_count(self) -> int:
        return len(self.double_points) + len(self.regions) + len(self.extras)


def validate_divide(d: Divide) -> list[str]:
    out = []
    ids = list(d.double_points) + list(d.regions) + [e.id for e in d.extras]
    if len(set(ids)) != len(ids):
        out.append("duplicate cycle id")
    for rid, pol in d.regions.items():
        if pol not in ("negative", "positive"):
            out.append(f"region {rid}: polarity {pol!r}")
    for (dp, reg), count in d.corners.items():
        if dp not in d.double_points:
            out.append(f"corner ({dp}, {reg}): unknown double point")
        if reg not in d.regions:
            out.append(f"corner ({dp}, {reg}): unknown region")
        if not isinstance(count, int) or count < 1:
            out.append(f"corner ({dp}, {reg}): count {count!r} is not a positive integer")
    known = set(ids)
    extra_by_id = {e.id: e for e in d.extras}
    for e in d.extras:
        if e.kind not in ("min", "saddle"):
            out.append(f"extra {e.id}: kind {e.kind!r}")
        if e.value not in ("with_kind", "lowest"):
            out.append(f"extra {e.id}: value {e.value!r}")
        for other, val in e.row.items():
            if other not in known:
                out.append(f"extra {e.id}: unknown cycle {other!r}")
            elif other == e.id and val != -2:
                out.append(f"extra {e.id}: self-intersection {val} != -2")
            elif other in extra_by_id and extra_by_id[other].row.get(e.id, 0) != val:
                out.append(f"extras {e.id}/{other}: asymmetric rows")
    if d.ptype is not None and d.cycle_count != 9:
        out.append(f"cycle count {d.cycle_count} != 9")
    return out


def build_seed(d: Divide, config: FlipConfig = DEFAULT_CONFIG) -> VirtualMorsification:
    """Intersection data of the divide's vanishing cycles in value order."""
    problems = validate_divide(d)
    if problems:
        raise InvalidDivide("; ".join(problems))
    lowest = [e for e in d.extras if e.value == "lowest"]
    minima = [rid for rid, pol in d.regions.items() if pol == "negative"]
    maxima = [rid for rid, pol in d.regions.items() if pol == "positive"]
    saddles = list(d.double_points)
    saddles += [e.id for e in d.extras if e.value != "lowest" and e.kind == "saddle"]
    minima = [e.id for e in d.extras if e.value != "lowest" and e.kind == "min"] + minima
    order = [e.id for e in lowest] + minima + saddles + maxima
    pos = {cid: i for i, cid in enumerate(order)}
    n = len(order)
    A = [[0] * n for _ in range(n)]
    for i in range(n):
        A[i][i] = -2
    for (dp, reg), count in d.corners.items():
        sign = config.divide_min_sign if d.regions[reg] == "negative" else config.divide_max_sign
        A[pos[dp]][pos[reg]] = A[pos[reg]][pos[dp]] = sign * count
    for e in d.extras:
        for other, val in e.row.items():
            if other != e.id:
                A[pos[e.id]][pos[other]] = A[pos[other]][pos[e.id]] = val
    kind_of = {}
    for cid in minima:
        kind_of[cid] = Kind.MIN
    for cid in saddles:
        kind_of[cid] = Kind.SADDLE
    for cid in maxima:
        kind_of[cid] = Kind.MAX
    r_of = {cid: {Kind.MIN: 2, Kind.SADDLE: -2, Kind.MAX: config.divide_max_r}[k] for cid, k in kind_of.items()}
    for e in d.extras:
        kind_of[e.id] = Kind.MIN if e.kind == "min" else Kind.SADDLE
        r_of[e.id] = e.r if e.r is not None else (2 if e.kind == "min" else -2)
    kinds = [kind_of[c] for c in order]
    r = [r_of[c] for c in order]
    q = len(lowest) + len(minima)
    return make_state(d.ptype or PrincipalType.X9_PLUS, A, r, kinds, q)


def divide_from_json_obj(obj) -> Divide:
    try:
        regions = {}
        for reg in obj["regions"]:
            regions[str(reg["id"])] = reg["polarity"]
        corners = {}
        for dp, reg, count in obj.get("corners", []):
            corners[(str(dp), str(reg))] = count
        extras = [
            Extra(
                id=str(e["id"]),
                kind=e.get("kind", "saddle"),
                value=e.get("value", "with_kind"),
                row={str(k): int(v) for k, v in e.get("row", {}).items()},
                r=e.get("r"),
            )
            for e in obj.get("extras", [])
        ]
        ptype = PrincipalType(obj["ptype"]) if obj.get("ptype") else None
        return Divide([str(x) for x in obj["double_points"]], regions, corners, extras, ptype)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed divide: {exc}") from None


def load_divide(text: str) -> Divide:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from None
    return divide_from_json_obj(obj)


def _path(*parts: str):
    p = resources.files("morsecensus").joinpath("data")
    for part in parts:
        p = p.joinpath(part)
    return p


def _data(*parts: str) -> str:
    return _path(*parts).read_text()


def fixture_names() -> list[str]:
    names = []
    for sub in ("fixtures", "divides"):
        for p in _path(sub).iterdir():
            if p.name.endswith(".json"):
                names.append(p.name[:-5])
    return sorted(names)


def load_fixture(name: str, config: FlipConfig = DEFAULT_CONFIG) -> VirtualMorsification:
    """State fixture by name; divide fixtures are built into states."""
    base = _path()
    if base.joinpath("fixtures").joinpath(name + ".json").is_file():
        return parse(_data("fixtures", name + ".json"))
    if base.joinpath("divides").joinpath(name + ".json").is_file():
        return build_seed(load_divide(_data("divides", name + ".json")), config)
    raise KeyError(f"unknown fixture {name!r}")


def seeds_for(ptype: PrincipalType, config: FlipConfig = DEFAULT_CONFIG) -> list[VirtualMorsification]:
    """The shipped seed states of a principal type."""
    names = {
        PrincipalType.X9_PLUS: ["x9plus-m7-a", "x9plus-m7-b"],
        PrincipalType.X9_ONE: ["x9one-e7a2"],
        PrincipalType.X9_TWO: ["x9two-star331"],
    }[ptype]
    return [load_fixture(n, config) for n in names]
