"""Exact Steiner tree queries over a tree-decomposition index.

Typical use::

    g, _ = load_graph("instance.stp")
    idx = build_index(g, to_nice(decompose(g)), l=5)
    result = query(idx, g, [0, 4, 7])
"""

from .decomposition import (NiceTreeDecomposition, NodeKind, TreeDecomposition, decompose,
                            induced_roots, is_separator, lca, read_td, to_nice,
                            validate_decomposition, validate_nice, write_td)
from .exceptions import (CapacityError, DecompositionError, GraphHashMismatch,
                         IndexFormatError, IndexInvariantError, InfeasibleError,
                         SteinerError, StpSyntaxError)
from .graph import (INF, Graph, SteinerTree, graph_union, load_graph, parse_edges,
                    parse_stp, prune_to_tree, shortest_path, write_stp)
from .index import BagTable, SteinerIndex, build_bag_table, build_index, dump_json, load_index, save_index
from .oracle import DWTable, brute_force_steiner, dreyfus_wagner
from .query import (QueryResult, WorkingSet, handle_forget, handle_introduce, handle_join,
                    query, stvs)

__version__ = "0.1.0"
