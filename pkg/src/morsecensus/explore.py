"""Closure of seed states under flips, partition into subsets, spectra and snapshots."""

from __future__ import annotations

import hashlib
import itertools
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import kernel
from .flips import CHOICES, CapExceeded, FlipConfig, FlipKind
from .vmcore import Kind, PrincipalType, VirtualMorsification, canonical_key, from_key

SNAPSHOT_VERSION = 1
_KIND_SHIFT = 3
_B_SHIFT = 32


@dataclass
class Universe:
    ptype: PrincipalType
    config: FlipConfig
    keys: list[bytes]
    index: dict[bytes, int]
    edges: set[int]  # packed (a << 35) | (b << 3) | kind with a < b
    seed_keys: list[bytes]
    expanded: int = 0  # states [0, expanded) have been fully expanded

    @property
    def complete(self) -> bool:
        return self.expanded == len(self.keys)

    def __len__(self) -> int:
        return len(self.keys)

    def state(self, i: int) -> VirtualMorsification:
        return from_key(self.keys[i])

    def edge_list(self) -> list[tuple[int, int, FlipKind]]:
        mask = (1 << _B_SHIFT) - 1
        return [
            (e >> (_B_SHIFT + _KIND_SHIFT), (e >> _KIND_SHIFT) & mask, FlipKind(e & 7))
            for e in sorted(self.edges)
        ]


class CapError(CapExceeded):
    """Cap exceeded during closure; carries the partial universe for resuming."""

    def __init__(self, what: str, detail: str, universe: Universe):
        super().__init__(what, detail)
        self.universe = universe


def _edge(a: int, b: int, kind: int) -> int:
    if a > b:
        a, b = b, a
    return (a << (_B_SHIFT + _KIND_SHIFT)) | (b << _KIND_SHIFT) | kind


def _expand_batch(args):
    keys, codes = args
    out = []
    for k in keys:
        try:
            out.append(kernel.expand_key(k, codes))
        except CapExceeded as exc:
            out.append(exc)
    return out


def new_universe(seeds: list[VirtualMorsification], config: FlipConfig) -> Universe:
    if not seeds:
        raise ValueError("at least one seed is required")
    ptypes = {s.ptype for s in seeds}
    if len(ptypes) != 1:
        raise ValueError("seeds must share one principal type")
    keys: list[bytes] = []
    index: dict[bytes, int] = {}
    for s in seeds:
        k = canonical_key(s)
        if k not in index:
            index[k] = len(keys)
            keys.append(k)
    return Universe(ptypes.pop(), config, keys, index, set(), list(keys))


def close_universe(
    seeds: list[VirtualMorsification] | None,
    config: FlipConfig,
    threads: int = 1,
    resume: Universe | None = None,
    batch: int = 2048,
) -> Universe:
    """Breadth-first closure. The result does not depend on `threads`."""
    u = resume if resume is not None else new_universe(seeds, config)
    codes = config.codes()
    cap = config.max_states
    keys, index, edges = u.keys, u.index, u.edges
    pool = ProcessPoolExecutor(threads) if threads > 1 else None
    try:
        while u.expanded < len(keys):
            lo = u.expanded
            chunk = keys[lo:lo + batch * max(threads, 1)]
            if pool is None:
                results = _expand_batch((chunk, codes))
            else:
                parts = [chunk[t::threads] for t in range(threads)]
                got = list(pool.map(_expand_batch, [(p, codes) for p in parts]))
                results = [got[t % threads][t // threads] for t in range(len(chunk))]
            for off, res in enumerate(results):
                src = lo + off
                if isinstance(res, CapExceeded):
                    raise CapError(res.what, str(res), u)
                fresh = {k for _, k in res if k not in index}
                if len(keys) + len(fresh) > cap:
                    raise CapError("states", f"more than {cap} states", u)
                for kind, k in res:
                    j = index.get(k)
                    if j is None:
                        j = index[k] = len(keys)
                        keys.append(k)
                    if j != src:
                        edges.add(_edge(src, j, kind))
                u.expanded = src + 1
    finally:
        if pool is not None:
            pool.shutdown()
    return u


def close_subset(state: VirtualMorsification, config: FlipConfig) -> Universe:
    """Closure of one state under the within-subset flips only.

    Gives the complete subset containing `state` without building the whole universe.
    """
    u = new_universe([state], config)
    codes = config.codes()
    keys, index = u.keys, u.index
    while u.expanded < len(keys):
        src = u.expanded
        try:
            res = kernel.expand_key(keys[src], codes)
        except CapExceeded as exc:
            raise CapError(exc.what, str(exc), u) from None
        for kind, k in res:
            if kind > FlipKind.W5_PAIR_MEMBER_SWAP:
                continue
            j = index.get(k)
            if j is None:
                if len(keys) >= config.max_states:
                    raise CapError("states", f"more than {config.max_states} states", u)
                j = index[k] = len(keys)
                keys.append(k)
            if j != src:
                u.edges.add(_edge(src, j, kind))
        u.expanded = src + 1
    return u


@dataclass(frozen=True)
class SubsetRecord:
    id: int
    card: int
    M: int
    m_minus: int
    m_cross: int
    m_plus: int
    representative: int  # state index of the first member

    @property
    def signature(self) -> tuple[int, int]:
        return self.M, self.m_plus


def _counts_from_key(key: bytes) -> tuple[int, int, int]:
    n = key[2]
    kinds = key[5:5 + n]
    return kinds.count(Kind.MIN), kinds.count(Kind.SADDLE), kinds.count(Kind.MAX)


def components(u: Universe) -> list[int]:
    """Component label per state over within-subset edges (label = smallest member index)."""
    n = len(u.keys)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    mask = (1 << _B_SHIFT) - 1
    for e in u.edges:
        if FlipKind(e & 7).within_subset:
            a = find(e >> (_B_SHIFT + _KIND_SHIFT))
            b = find((e >> _KIND_SHIFT) & mask)
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    return [find(i) for i in range(n)]


def partition_subsets(u: Universe) -> tuple[list[SubsetRecord], list[int]]:
    """Subsets ordered by first member; also returns the subset id of every state."""
    labels = components(u)
    order: dict[int, int] = {}
    sizes: Counter = Counter()
    member_of = []
    for i, lab in enumerate(labels):
        sid = order.setdefault(lab, len(order))
        sizes[sid] += 1
        member_of.append(sid)
    records = []
    for lab, sid in order.items():
        mn, sd, mx = _counts_from_key(u.keys[lab])
        records.append(SubsetRecord(sid, sizes[sid], mn + sd + mx, mn, sd, mx, lab))
    return records, member_of


def spectrum(records) -> dict[tuple[int, int], list[int]]:
    out: dict[tuple[int, int], list[int]] = {}
    for rec in records:
        out.setdefault(rec.signature, []).append(rec.card)
    return {k: sorted(v, reverse=True) for k, v in sorted(out.items())}


def totals_by_M(spec) -> dict[int, int]:
    tot: dict[int, int] = {}
    for (M, _), cards in spec.items():
        tot[M] = tot.get(M, 0) + sum(cards)
    return dict(sorted(tot.items()))


def mirror_spectrum(spec, offset: int = 0) -> dict[tuple[int, int], list[int]]:
    """Relabel m_plus as floor(M/2) - offset - m_plus in every cell."""
    out: dict[tuple[int, int], list[int]] = {}
    for (M, mp), cards in spec.items():
        out.setdefault((M, M // 2 - offset - mp), []).extend(cards)
    return {k: sorted(v, reverse=True) for k, v in sorted(out.items())}


def compare_spectrum(actual, expected) -> dict:
    """Cell-by-cell multiset diff."""
    cells = []
    ok = True
    for cell in sorted(set(actual) | set(expected)):
        a = Counter(actual.get(cell, []))
        e = Counter(expected.get(cell, []))
        missing = sorted((e - a).elements())
        extra = sorted((a - e).elements())
        if missing or extra:
            ok = False
            cells.append({
                "M": cell[0],
                "m_plus": cell[1],
                "expected": sorted(e.elements()),
                "actual": sorted(a.elements()),
                "missing": missing,
                "extra": extra,
            })
    return {"pass": ok, "diff": cells}


def spectrum_to_csv(records) -> str:
    lines = ["M,m_plus,card"]
    for rec in sorted(records, key=lambda r: (r.M, r.m_plus, -r.card)):
        lines.append(f"{rec.M},{rec.m_plus},{rec.card}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str) -> dict[tuple[int, int], list[int]]:
    out: dict[tuple[int, int], list[int]] = {}
    header_seen = False
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if not header_seen:
            if parts != ["M", "m_plus", "card"]:
                raise ValueError(f"line {n}: expected header M,m_plus,card")
            header_seen = True
            continue
        if len(parts) != 3:
            raise ValueError(f"line {n}: expected three fields")
        try:
            M, mp, card = map(int, parts)
        except ValueError:
            raise ValueError(f"line {n}: non-integer field") from None
        out.setdefault((M, mp), []).append(card)
    if not header_seen:
        raise ValueError("missing header M,m_plus,card")
    return {k: sorted(v, reverse=True) for k, v in sorted(out.items())}


def spectrum_to_markdown(spec) -> str:
    Ms = sorted({M for M, _ in spec})
    mps = sorted({mp for _, mp in spec})
    head = "| m+ \\ M | " + " | ".join(str(M) for M in Ms) + " |"
    rule = "|---|" + "---|" * len(Ms)
    rows = [head, rule]
    for mp in mps:
        cells = [" + ".join(str(c) for c in spec.get((M, mp), [])) for M in Ms]
        rows.append(f"| {mp} | " + " | ".join(cells) + " |")
    tot = totals_by_M(spec)
    rows.append("| Σ | " + " | ".join(str(tot[M]) for M in Ms) + " |")
    return "\n".join(rows) + "\n"


# Snapshots

class SnapshotError(ValueError):
    pass


def save_snapshot(u: Universe, member_of: list[int] | None, path: str) -> None:
    body = []
    for i, k in enumerate(u.keys):
        sid = member_of[i] if member_of is not None else -1
        body.append(f"S {k.hex()} {sid}")
    for a, b, kind in u.edge_list():
        body.append(f"E {a} {b} {int(kind)}")
    text = "\n".join(body) + "\n"
    digest = hashlib.sha256(text.encode()).hexdigest()
    header = [
        f"#morsecensus-snapshot {SNAPSHOT_VERSION}",
        f"#ptype {u.ptype.value}",
        f"#config {u.config.one_line()}",
        f"#seeds {','.join(k.hex() for k in u.seed_keys)}",
        f"#counts states={len(u.keys)} edges={len(u.edges)} expanded={u.expanded}",
        f"#status {'complete' if u.complete else 'partial'}",
        f"#checksum sha256:{digest}",
    ]
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(header) + "\n" + text)
    os.replace(tmp, path)


def load_snapshot(path: str) -> tuple[Universe, list[int] | None]:
    with open(path) as fh:
        lines = fh.read().split("\n")
    header = {}
    t = 0
    while t < len(lines) and lines[t].startswith("#"):
        key, _, val = lines[t][1:].partition(" ")
        header[key] = val
        t += 1
    if "morsecensus-snapshot" not in header:
        raise SnapshotError("not a snapshot file")
    if header["morsecensus-snapshot"] != str(SNAPSHOT_VERSION):
        raise SnapshotError(f"format version {header['morsecensus-snapshot']} != {SNAPSHOT_VERSION}")
    text = "\n".join(lines[t:])
    digest = hashlib.sha256(text.encode()).hexdigest()
    if header.get("checksum") != f"sha256:{digest}":
        raise SnapshotError("checksum mismatch (file truncated or edited)")
    counts = dict(item.split("=") for item in header["counts"].split())
    config = FlipConfig.from_text(header["config"])
    keys, sids, edges = [], [], set()
    for line in lines[t:]:
        if not line:
            continue
        tag, *rest = line.split()
        if tag == "S":
            keys.append(bytes.fromhex(rest[0]))
            sids.append(int(rest[1]))
        elif tag == "E":
            edges.add(_edge(int(rest[0]), int(rest[1]), int(rest[2])))
        else:
            raise SnapshotError(f"unknown record {tag!r}")
    if len(keys) != int(counts["states"]) or len(edges) != int(counts["edges"]):
        raise SnapshotError("record counts disagree with header")
    index = {k: i for i, k in enumerate(keys)}
    seeds = [bytes.fromhex(h) for h in header["seeds"].split(",") if h]
    u = Universe(PrincipalType(header["ptype"]), config, keys, index, edges, seeds, int(counts["expanded"]))
    member_of = sids if sids and min(sids) >= 0 else None
    return u, member_of


def records_from_membership(u: Universe, member_of: list[int]) -> list[SubsetRecord]:
    first: dict[int, int] = {}
    sizes: Counter = Counter(member_of)
    for i, sid in enumerate(member_of):
        first.setdefault(sid, i)
    out = []
    for sid in sorted(first):
        mn, sd, mx = _counts_from_key(u.keys[first[sid]])
        out.append(SubsetRecord(sid, sizes[sid], mn + sd + mx, mn, sd, mx, first[sid]))
    return out


# Calibration

def parse_space(text: str) -> dict[str, list[str]]:
    """Variation space file: lines `key=value1,value2`; unlisted keys keep the base value."""
    space = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, vals = line.partition("=")
        key = key.strip()
        if not sep or key not in CHOICES:
            raise ValueError(f"line {n}: expected <variation key>=v1,v2")
        values = [v.strip() for v in vals.split(",") if v.strip()]
        bad = [v for v in values if v not in CHOICES[key]]
        if bad:
            raise ValueError(f"line {n}: {key} has no value {bad[0]!r}")
        space[key] = values
    return space


def full_space() -> dict[str, list[str]]:
    return {k: list(v) for k, v in CHOICES.items()}


@dataclass
class CalibrationRun:
    config: FlipConfig
    outcome: str  # "match", "mismatch" or "cap:<what>"
    states: int
    report: dict = field(default_factory=dict)


def calibrate(seeds, expected, space: dict[str, list[str]], base: FlipConfig | None = None, threads: int = 1):
    """Try every configuration of the space; returns (matching configs, all runs)."""
    base = base or FlipConfig()
    names = [k for k in CHOICES if k in space]
    runs = []
    matches = []
    for combo in itertools.product(*(space[k] for k in names)):
        cfg = base.with_choices(**dict(zip(names, combo)))
        try:
            u = close_universe(seeds, cfg, threads=threads)
        except CapError as exc:
            runs.append(CalibrationRun(cfg, f"cap:{exc.what}", len(exc.universe.keys)))
            continue
        records, _ = partition_subsets(u)
        report = compare_spectrum(spectrum(records), expected)
        runs.append(CalibrationRun(cfg, "match" if report["pass"] else "mismatch", len(u.keys), report))
        if report["pass"]:
            matches.append(cfg)
    return matches, runs


# Invariant suite

def invariant_suite(u: Universe, records: list[SubsetRecord], member_of: list[int]) -> dict:
    """Per-universe structural checks; every entry has `ok` and details."""
    from . import dgraph
    from .vmcore import int_det, unpack

    out = {}
    euler = u.ptype.euler
    bad_euler = []
    for i, k in enumerate(u.keys):
        mn, sd, mx = _counts_from_key(k)
        if mn - sd + mx != euler:
            bad_euler.append(i)
    out["euler"] = {"ok": not bad_euler, "violations": bad_euler[:10]}

    bad_div = [r.id for r in records if r.card % (r.M + 1)]
    out["card_divisible"] = {"ok": not bad_div, "violations": bad_div}

    dets = Counter()
    seen_mats = set()
    for k in u.keys:
        _, A, _, _, _ = unpack(k)
        mat = tuple(map(tuple, A))
        if mat not in seen_mats:
            seen_mats.add(mat)
            dets[int_det(A)] += 1
    out["det_constant"] = {"ok": len(dets) <= 1, "values": sorted(dets)}

    # D-graph checks on all-real subsets: one canonical graph, Card = (M+1) x extensions
    graphs: dict[int, set] = {}
    first_graph: dict[int, dgraph.DGraph] = {}
    cache: dict[bytes, bytes] = {}
    for i, k in enumerate(u.keys):
        n = k[2]
        if any(b > 2 for b in k[5:5 + n]):
            continue
        sid = member_of[i]
        body = k[4:5 + n + k[4] * n * (n - 1) // 2]  # width, kinds and matrix only
        canon = cache.get(body)
        if canon is None:
            g = dgraph.extract_dgraph(from_key(k))
            canon = cache[body] = dgraph.canonical_dgraph(g)
        if sid not in first_graph:
            first_graph[sid] = dgraph.extract_dgraph(from_key(k))
        graphs.setdefault(sid, set()).add(canon)
    split = [sid for sid, gs in graphs.items() if len(gs) != 1]
    out["dgraph_unique"] = {"ok": not split, "violations": split}
    le_bad = []
    by_id = {r.id: r for r in records}
    for sid, g in first_graph.items():
        rec = by_id[sid]
        try:
            le = dgraph.linear_extensions(g)
        except dgraph.InvalidGraph:
            le = -1
        if rec.card != (rec.M + 1) * le:
            le_bad.append({"subset": sid, "card": rec.card, "extensions": le})
    out["card_equals_extensions"] = {"ok": not le_bad, "violations": le_bad}
    return out
