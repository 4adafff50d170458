"""Search engine: root finding, certification, the divisor tree and the tables."""

from .candidates import CandidateSieve, sieve_interval
from .certify import below_alpha_power, is_certified_root, sfpr, verify_small
from .rootfind import (
    ParentBoundViolation,
    RootFinderDivergence,
    find_sign_change,
    zigzag_root,
)
from .tables import (
    sieved_cases,
    sieved_rows,
    sieved_threshold,
    unsieved_interval,
    unsieved_rows,
    unsieved_threshold,
)
from .tree import (
    NodeOutcome,
    OutcomeKind,
    SearchReport,
    TreeNode,
    explore_or_branch,
    optimal_s,
    run_tree,
)

__all__ = [
    "CandidateSieve",
    "sieve_interval",
    "below_alpha_power",
    "is_certified_root",
    "sfpr",
    "verify_small",
    "ParentBoundViolation",
    "RootFinderDivergence",
    "find_sign_change",
    "zigzag_root",
    "sieved_cases",
    "sieved_rows",
    "sieved_threshold",
    "unsieved_interval",
    "unsieved_rows",
    "unsieved_threshold",
    "NodeOutcome",
    "OutcomeKind",
    "SearchReport",
    "TreeNode",
    "explore_or_branch",
    "optimal_s",
    "run_tree",
]
