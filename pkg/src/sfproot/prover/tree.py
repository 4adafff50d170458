"""Prime-divisor tree search over the residual values of omega(p-1).

A node fixes primes X known to divide p-1 and primes Y known not to. It
either proves its interval empty, splits on the next prime, or enumerates
every p = k*prod(X) + 1 in its interval and certifies each one directly.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from multiprocessing import get_context
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .. import bounds, ntcore
from ..bounds import BoundConfig
from ..ntcore import FactorMap
from . import certify
from .candidates import CandidateSieve
from .rootfind import find_sign_change

log = logging.getLogger(__name__)


class CheckpointMismatch(ValueError):
    """The checkpoint file was written for a different run."""


class ConsistencyError(AssertionError):
    """A kept candidate contradicts the node's constraints."""


# ---------------------------------------------------------------------------
# sieving-prime selection
# ---------------------------------------------------------------------------

def optimal_s(n: int, L: Sequence[int], cfg: BoundConfig | None = None) -> int:
    """s in [1, n] minimising the sieved error coefficient 2^(n-s)*Delta + 1.

    The sieving primes for a given s are the largest s entries of L. E is a
    common positive factor across s, so only the coefficient is compared.
    s with delta <= 0 is skipped; ties go to the smaller s.
    """
    if len(L) != n or n < 1:
        raise ValueError("need |L| = n >= 1")
    desc = np.asarray(sorted(L, reverse=True), dtype=np.float64)
    recip_sums = np.cumsum(1.0 / desc)  # entry s-1: largest s primes
    s = np.arange(1, n + 1, dtype=np.float64)
    dlt = 1.0 - recip_sums
    valid = dlt > 0
    if not valid.any():
        raise bounds.NonPositiveDeltaError(f"every s gives delta <= 0 for n = {n}")
    with np.errstate(divide="ignore", invalid="ignore"):
        big = (s - 1) / np.where(valid, dlt, 1.0) + 2
        # log(2^(n-s) * big + 1), computed stably
        a = (n - s) * math.log(2) + np.log(big)
        logc = np.logaddexp(a, 0.0)
    logc = np.where(valid, logc, np.inf)
    return int(np.argmin(logc)) + 1


def sieve_shape(n: int, Y: Iterable[int], cfg: BoundConfig | None = None):
    """(L, s, delta) for a node: L = first n primes outside Y."""
    L = ntcore.first_primes(n, Y)
    s = optimal_s(n, L, cfg)
    return L, s, bounds.delta(L[n - s :])


# ---------------------------------------------------------------------------
# nodes and outcomes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeNode:
    n: int
    X: tuple[int, ...]
    Y: tuple[int, ...]
    parent_ub: int | None = None  # None stands for +infinity
    id: int | None = None

    def __post_init__(self) -> None:
        if list(self.X) != sorted(set(self.X)) or list(self.Y) != sorted(set(self.Y)):
            raise ValueError("X and Y must be strictly ascending")
        if 2 not in self.X:
            raise ValueError("2 always divides p-1")
        if set(self.X) & set(self.Y):
            raise ValueError("X and Y must be disjoint")
        if len(self.X) > self.n:
            raise ValueError("|X| cannot exceed n")

    @classmethod
    def root(cls, n: int) -> "TreeNode":
        return cls(n, (2,), (), None, 0)

    def with_id(self, node_id: int) -> "TreeNode":
        return TreeNode(self.n, self.X, self.Y, self.parent_ub, node_id)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "n": self.n,
            "X": list(self.X),
            "Y": list(self.Y),
            "parent_ub": None if self.parent_ub is None else str(self.parent_ub),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        ub = d.get("parent_ub")
        return cls(d["n"], tuple(d["X"]), tuple(d["Y"]), None if ub is None else int(ub), d.get("id"))


class OutcomeKind(str, Enum):
    EMPTY = "empty_interval"
    BRANCHED = "branched"
    EXPLORED = "explored"


@dataclass
class NodeOutcome:
    node: TreeNode
    kind: OutcomeKind
    lower: int
    upper: int
    s: int
    delta: float
    children: tuple[TreeNode, ...] = ()
    checked_primes: list[tuple[int, int]] = field(default_factory=list)
    counterexamples: list[int] = field(default_factory=list)
    pr_checks: int = 0
    checks_digest: str = ""

    def record(self) -> dict:
        """Everything about the node except the full list of checked primes."""
        return {
            "node": self.node.to_dict(),
            "kind": self.kind.value,
            "lower": str(self.lower),
            "upper": str(self.upper),
            "s": self.s,
            "delta": self.delta,
            "children": [c.to_dict() for c in self.children],
            "pr_checks": self.pr_checks,
            "counterexamples": [str(p) for p in self.counterexamples],
            "checks_digest": self.checks_digest,
        }

    @classmethod
    def from_record(cls, d: dict) -> "NodeOutcome":
        return cls(
            node=TreeNode.from_dict(d["node"]),
            kind=OutcomeKind(d["kind"]),
            lower=int(d["lower"]),
            upper=int(d["upper"]),
            s=d["s"],
            delta=d["delta"],
            children=tuple(TreeNode.from_dict(c) for c in d["children"]),
            pr_checks=d["pr_checks"],
            counterexamples=[int(p) for p in d["counterexamples"]],
            checks_digest=d["checks_digest"],
        )


def _digest(checked: list[tuple[int, int]]) -> str:
    h = hashlib.sha256()
    for p, g in checked:
        h.update(f"{p}:{g};".encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# one node
# ---------------------------------------------------------------------------

def _check_candidate(p: int, k: int, node: TreeNode, alpha: float) -> tuple[int, int] | None:
    """(p, root) when p is a genuine candidate, None when filtered out.

    root is 0 when no square-free primitive root below p^alpha exists.
    """
    if not ntcore.is_prime(p):
        return None
    fk = ntcore.factorize(k)
    fac = dict(fk.as_dict())
    for q in node.X:
        fac[q] = fac.get(q, 0) + 1
    if len(fac) != node.n:
        return None
    fm = FactorMap.from_dict(fac)
    if any(q in fac for q in node.Y) or fm.value != p - 1:
        raise ConsistencyError(f"p = {p} violates X={node.X}, Y={node.Y}")
    g0 = ntcore.least_primitive_root(p, fm)
    if ntcore.is_squarefree(g0) and certify.below_alpha_power(g0, p, alpha):
        return p, g0
    g = certify.sfpr(p, alpha, fm)
    if g is None:
        if not ntcore.lucas_certify(p, fm.primes):
            raise ConsistencyError(f"{p} failed the Lucas certificate")
        return p, 0
    return p, g


def explore_or_branch(
    node: TreeNode,
    cfg: BoundConfig,
    upper_cap: int | None = None,
    collect_primes: bool = True,
) -> NodeOutcome:
    """Process a node: prove it empty, branch on the next prime, or enumerate.

    upper_cap clamps the computed upper bound; it exists for scaled-down
    oracle runs and is never set in a real verification.
    """
    n, X, Y = node.n, node.X, node.Y
    L, s, dlt = sieve_shape(n, Y, cfg)
    lower = bounds.node_lower_bound(n, Y, cfg)
    raw_upper = find_sign_change(n, s, dlt, n - s, lower, node.parent_ub, cfg)
    upper = raw_upper if upper_cap is None else min(raw_upper, upper_cap)
    if upper <= 0:
        raise ArithmeticError("non-positive upper bound")
    prodX = math.prod(X)
    base = dict(node=node, lower=lower, upper=upper, s=s, delta=dlt)

    if upper <= lower:
        return NodeOutcome(kind=OutcomeKind.EMPTY, checks_digest=_digest([]), **base)

    if (
        upper - lower > cfg.range_limit * prodX
        and len(X) < min(n, math.ceil(0.8 * n) + cfg.x_gate_offset)
        and len(Y) < 2 * len(X)
    ):
        used = set(X) | set(Y)
        q = next(r for r in ntcore.primes_upto(max(used) * 2 + 10) if r not in used)
        kids = (
            TreeNode(n, tuple(sorted(X + (q,))), Y, raw_upper),
            TreeNode(n, X, tuple(sorted(Y + (q,))), raw_upper),
        )
        return NodeOutcome(kind=OutcomeKind.BRANCHED, children=kids, checks_digest=_digest([]), **base)

    k_lo = -(-(lower - 1) // prodX)
    k_hi = (upper - 1) // prodX
    sieve = CandidateSieve(n, X, Y, lower)
    checked: list[tuple[int, int]] = []
    bad: list[int] = []
    for k in sieve.survivors(k_lo, k_hi):
        hit = _check_candidate(k * prodX + 1, k, node, cfg.alpha)
        if hit is None:
            continue
        checked.append(hit)
        if hit[1] == 0:
            bad.append(hit[0])
    return NodeOutcome(
        kind=OutcomeKind.EXPLORED,
        checked_primes=checked if collect_primes else [],
        counterexamples=bad,
        pr_checks=len(checked),
        checks_digest=_digest(checked),
        **base,
    )


def _work(args) -> NodeOutcome:
    node, cfg, upper_cap, collect = args
    return explore_or_branch(node, cfg, upper_cap, collect)


# ---------------------------------------------------------------------------
# the queue
# ---------------------------------------------------------------------------

@dataclass
class RunStats:
    n: int
    nodes_created: int = 0
    nodes_explored: int = 0
    nodes_empty: int = 0
    nodes_branched: int = 0
    pr_checks: int = 0
    counterexamples: list[int] = field(default_factory=list)
    wall_seconds: float = 0.0
    digest: str = ""
    checked_primes: list[tuple[int, int]] = field(default_factory=list)
    outcomes: list[dict] = field(default_factory=list)

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "n": self.n,
            "nodes_created": self.nodes_created,
            "nodes_explored": self.nodes_explored,
            "nodes_empty": self.nodes_empty,
            "nodes_branched": self.nodes_branched,
            "pr_checks": self.pr_checks,
            "counterexamples": [str(p) for p in self.counterexamples],
            "digest": self.digest,
        }
        if timing:
            d["wall_seconds"] = round(self.wall_seconds, 3)
        return d


@dataclass
class SearchReport:
    alpha: float
    config: dict
    runs: list[RunStats]
    manifest: dict | None = None

    @property
    def counterexamples(self) -> list[int]:
        return [p for r in self.runs for p in r.counterexamples]

    @property
    def pr_checks(self) -> int:
        return sum(r.pr_checks for r in self.runs)

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "alpha": self.alpha,
            "config": self.config,
            "runs": [r.to_dict(timing) for r in self.runs],
        }
        if self.manifest is not None and timing:
            d["manifest"] = self.manifest
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def body(self) -> str:
        """Canonical JSON without wall times or manifest: equal across worker counts."""
        return self.to_json(timing=False)


class _Checkpoint:
    def __init__(self, path: Path | None, header: dict):
        self.path = path
        self.done: dict[tuple[int, int], NodeOutcome] = {}
        if path is None:
            self.fh = None
            return
        if path.exists() and path.stat().st_size:
            with path.open() as fh:
                first = json.loads(fh.readline())
                if first.get("header") != header:
                    raise CheckpointMismatch(f"{path} was written for a different run")
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        rec = json.loads(line)
                    except json.JSONDecodeError:
                        break  # torn final line from an interrupted run
                    out = NodeOutcome.from_record(rec)
                    self.done[(out.node.n, out.node.id)] = out
            self.fh = path.open("a")
        else:
            self.fh = path.open("w")
            self.fh.write(json.dumps({"header": header}, sort_keys=True) + "\n")
            self.fh.flush()

    def get(self, node: TreeNode) -> NodeOutcome | None:
        return self.done.get((node.n, node.id))

    def add(self, out: NodeOutcome) -> None:
        if self.fh is not None:
            self.fh.write(json.dumps(out.record(), sort_keys=True) + "\n")
            self.fh.flush()

    def close(self) -> None:
        if self.fh is not None:
            self.fh.close()


def run_tree(
    alpha: float,
    ns: Sequence[int],
    cfg: BoundConfig | None = None,
    workers: int = 1,
    upper_cap: int | None = None,
    checkpoint: str | Path | None = None,
    collect_primes: bool = False,
    keep_outcomes: bool = False,
) -> SearchReport:
    """Run the tree to exhaustion for each n; node ids follow FIFO order.

    Nodes are processed in breadth-first waves. Children receive ids in
    parent-id order, so the ids, the outcomes and the report content do not
    depend on the number of workers.
    """
    cfg = (cfg or BoundConfig()).replace(alpha=alpha)
    header = {"alpha": alpha, "config": cfg.to_dict(), "upper_cap": None if upper_cap is None else str(upper_cap)}
    ck = _Checkpoint(Path(checkpoint) if checkpoint else None, header)
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn"))
    runs = []
    try:
        for n in ns:
            runs.append(_run_one(n, cfg, pool, upper_cap, ck, collect_primes, keep_outcomes))
    finally:
        ck.close()
        if pool is not None:
            pool.shutdown()
    return SearchReport(alpha=alpha, config=cfg.to_dict(), runs=runs)


def _run_one(n, cfg, pool, upper_cap, ck, collect, keep) -> RunStats:
    t0 = time.perf_counter()
    stats = RunStats(n=n, nodes_created=1)
    h = hashlib.sha256()
    queue = [TreeNode.root(n)]
    next_id = 1
    wave = 0
    while queue:
        todo = [nd for nd in queue if ck.get(nd) is None]
        args = [(nd, cfg, upper_cap, collect) for nd in todo]
        fresh = list(pool.map(_work, args)) if pool is not None and len(args) > 1 else [_work(a) for a in args]
        fresh_by_id = {out.node.id: out for out in fresh}
        nxt = []
        for nd in queue:
            out = ck.get(nd)
            if out is None:
                out = fresh_by_id[nd.id]
                ck.add(out)
            if out.kind is OutcomeKind.BRANCHED:
                kids = tuple(c.with_id(next_id + i) for i, c in enumerate(out.children))
                next_id += len(kids)
                out.children = kids
                nxt.extend(kids)
                stats.nodes_branched += 1
            elif out.kind is OutcomeKind.EXPLORED:
                stats.nodes_explored += 1
            else:
                stats.nodes_empty += 1
            stats.nodes_created += len(out.children)
            stats.pr_checks += out.pr_checks
            stats.counterexamples.extend(out.counterexamples)
            if collect:
                stats.checked_primes.extend(out.checked_primes)
            if keep:
                stats.outcomes.append(out.record())
            h.update(json.dumps(_digest_view(out), sort_keys=True).encode())
        log.info(
            "n=%d wave %d: %d nodes, %d queued, %d checks so far",
            n, wave, len(queue), len(nxt), stats.pr_checks,
        )
        queue = nxt
        wave += 1
    stats.digest = h.hexdigest()
    stats.wall_seconds = time.perf_counter() - t0
    return stats


def _digest_view(out: NodeOutcome) -> dict:
    return {
        "id": out.node.id,
        "X": list(out.node.X),
        "Y": list(out.node.Y),
        "kind": out.kind.value,
        "lower": str(out.lower),
        "upper": str(out.upper),
        "children": [c.id for c in out.children],
        "checks": out.checks_digest,
    }
