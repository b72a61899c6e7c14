"""palmforge: synthesize virtual palmprint identities from a small corpus.

Pipeline: keypoint normalization -> Canny texture extraction -> greedy
combinatorial identity planning -> ROI block reassembly -> rendering ->
augmentation, with a provenance manifest tying every output to its sources.
"""

from .assemble import AssemblySpec, EdgeLibrary, assemble_edge, sample_variants
from .augment import (AugmentConfig, CutoutConfig, CutoutSpec, basic_augs,
                      border_cutout, sample_cutout_spec)
from .edges import CannyConfig, canny, gaussian_smooth, hysteresis, non_max_suppress, sobel_gradients
from .config import PipelineConfig, config_hash, load_config
from .errors import (CapacityError, ConfigError, DegenerateGeometryError,
                     LibraryLookupError, PalmforgeError, RenderProtocolError, StageError)
from .geometry import (AffineTransform, HandKeyPoints, Rect, RoiGrid,
                       estimate_affine, roi_grid, warp)
from .planner import (Combination, IdentityPlan, IdentitySubset, PlannerConfig,
                      candidate_stream, duplicates, greedy_clique, greedy_clique_lex,
                      plan, rotations, verify_plan)
from .render import (ExternalRendererConfig, PseudoRendererConfig, RenderRequest,
                     render_external, render_pseudo, serve_echo_invert)

__version__ = "0.1.0"
