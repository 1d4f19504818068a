"""Rooted trees with h-set level structure and their balanced partitions."""

from entropylab.app.services.trees.generators import random_tree, random_weights
from entropylab.app.services.trees.hset import (
    generate_hset_tree,
    h_eval,
    level_targets,
    profile_preset,
    verify_hset_condition,
)
from entropylab.app.services.trees.io import (
    dump_operator,
    dump_partition,
    dump_tree,
    load_operator,
    load_partition,
    load_tree,
)
from entropylab.app.services.trees.models import (
    BalancedPartitionReport,
    GeneratedTree,
    HSetProfile,
    HSetReport,
    PartitionVerdict,
    RootedTree,
    TauKind,
    TreePartition,
    VertexWeighting,
)
from entropylab.app.services.trees.partition import (
    dyadic_chain,
    partition_balanced,
    verify_dyadic_chain,
    verify_partition_lemma,
)

__all__ = [
    "BalancedPartitionReport",
    "GeneratedTree",
    "HSetProfile",
    "HSetReport",
    "PartitionVerdict",
    "RootedTree",
    "TauKind",
    "TreePartition",
    "VertexWeighting",
    "dump_operator",
    "dump_partition",
    "dump_tree",
    "dyadic_chain",
    "generate_hset_tree",
    "h_eval",
    "level_targets",
    "load_operator",
    "load_partition",
    "load_tree",
    "partition_balanced",
    "profile_preset",
    "random_tree",
    "random_weights",
    "verify_dyadic_chain",
    "verify_hset_condition",
    "verify_partition_lemma",
]
