"""Exact matrix-resolvent computations for Drinfeld-Sokolov hierarchies."""
from .exactalg import DiffPoly, u
from .kmrealize import HierarchyModel, get_model, model_catalog
from .resolvent import LaxOperator, basic_resolvent
from .taustruct import TauTable, FlowSet, derive_flows, omega_table, two_point

__version__ = "0.1.0"

__all__ = [
    "DiffPoly", "u", "HierarchyModel", "get_model", "model_catalog", "LaxOperator",
    "basic_resolvent", "TauTable", "FlowSet", "derive_flows", "omega_table", "two_point",
]
