"""Exact tree-space norms, Schreier families, operator sections, and
the recursive selection engine with tower-scale arithmetic."""

from ._kernels import COMPILED
from .bignum import Value
from .construction import (AntichainFamily, ConstructionParams,
                           ConstructionReport, Selection, SelectionExhausted,
                           Witness, build_witness, choose_N, select,
                           synth_family, verify)
from .nodes import (FiniteTree, Node, Segment, chi_decode, chi_encode,
                    closure, comparable, derivative, is_prefix, load_tree,
                    node_token, order, parse_token, save_tree,
                    segments_incomparable)
from .operators import (BlockSequenceData, IsometryReport, MinRatioResult,
                        OperatorSection, SingTreeResult, apply,
                        branch_isometry_check, embed_section,
                        greedy_sparse_subsequence, hs_section, load_section,
                        min_ratio, save_section, sing_tree, sparsity_check)
from .schreier import (FiniteFamily, dilate, family_order, family_restrict,
                       family_spread_image, is_regular, load_family,
                       save_family, schreier_member, schreier_restrict,
                       symbolic_order)
from .validation import ValidationResult, validate_selection
from .zpq import (Exponents, SparseTreeVector, attaining_family,
                  chain_projection_norm, load_vector, lp_norm,
                  max_segment_projection, project, save_vector, znorm,
                  znorm_bruteforce)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
