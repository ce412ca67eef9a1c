"""Algebraic computation trees, monotone compact approximations of
semialgebraic sets, and grid-based Betti numbers."""

from .act import Tree, TreeBuilder, evaluate, tree_metrics, validate_tree
from .errors import InputError, ResourceLimitError
from .extract import leaf_dnf, vertex_polynomial
from .poly import Polynomial
from .semialg import Dnf, eval_formula

__all__ = [
    "Tree", "TreeBuilder", "evaluate", "tree_metrics", "validate_tree",
    "InputError", "ResourceLimitError", "leaf_dnf", "vertex_polynomial",
    "Polynomial", "Dnf", "eval_formula",
]
