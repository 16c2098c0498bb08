"""Bucket-brigade QRAM simulation and segment-tree amplitude encoding."""
from ._accel import USE_JIT, backend_name
from .errors import *  # noqa: F401,F403
from .layout import (FixedPointFormat, Float64Word, MemoryCell, fp_decode, fp_encode,
                     layout_cells, level_of, offset_of)
from .preprocessing import (DenseMatrix, SegTree, build_segment_tree, pad_matrix, row_major,
                            unflatten, update_entry)
from .qram import FieldSelector, QramTree, StepCounters, Switch
from .quantum_ops import (Exact, FixedPoint, RegisterLayout, SparseState, cascade_ry,
                          circular_shift_left, cz_sign, primitive_root, primitive_siblings,
                          primitive_signs, u2cr, u2cr_fixed_pipeline, uncompute_lr,
                          uncompute_signs)
from .state_prep import (PrepConfig, PrepResult, cost_report, expected_prep_units,
                         prepare_state, verify_state)

__version__ = "0.1.0"
