"""
Graphs Module

Relation graphs between stocks (return correlation, GICS sector, supply
chain, identity) and their symmetric normalization.
"""

from .universe import StockUniverse
from .graph_builder import (
    RelationGraph,
    GraphBuilder,
    normalize_adjacency,
    build_correlation_graph,
    build_sector_graph,
    build_supply_chain_graph,
    identity_graph,
    custom_graph,
    permute_graph,
)

__all__ = [
    'StockUniverse',
    'RelationGraph',
    'GraphBuilder',
    'normalize_adjacency',
    'build_correlation_graph',
    'build_sector_graph',
    'build_supply_chain_graph',
    'identity_graph',
    'custom_graph',
    'permute_graph',
]
