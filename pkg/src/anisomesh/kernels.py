"""Hot-kernel dispatch: compiled extension when available, pure Python
otherwise. Set ANISOMESH_PURE=1 to force the fallback."""

import os

if os.environ.get("ANISOMESH_PURE") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

IMPLEMENTATION = _impl.IMPLEMENTATION

signed_area = _impl.signed_area
metric_length_one = _impl.metric_length_one
sym2_exp_one = _impl.sym2_exp_one
sym2_log_one = _impl.sym2_log_one
quality_one = _impl.quality_one
incircle_metric = _impl.incircle_metric
edge_lengths = _impl.edge_lengths
sym2_exp_batch = _impl.sym2_exp_batch
sym2_log_batch = _impl.sym2_log_batch
tri_quality = _impl.tri_quality
