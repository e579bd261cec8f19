"""tetradforge: turn raw images into affordance-insertion training tetrads."""

from .corpus import (
    BBox,
    BinaryMask,
    MaskCandidate,
    RasterImage,
    RleMask,
    TetradRecord,
    load_image,
    mask_bbox,
    rle_decode,
    rle_encode,
    save_image,
)
from .maskops import connected_components, dilate, mask_iou, masked_color_std, nms
from .qc import FilterReport, FilterThresholds, FilterVerdict, run_cascade
from .inpaint_gate import gate_inpainting, ssim
from .prompts import (
    BoxPrompt,
    MaskPrompt,
    NullPrompt,
    PointPrompt,
    PositionMap,
    augment_prompt,
    derive_prompts,
    rasterize,
)
from .augment import ForegroundAugmentConfig, augment_foreground, background_crop
from .diffusion import (
    DualSample,
    NoiseSchedule,
    build_schedule,
    forward_noise,
    make_dual_sample,
    reverse_step,
    sample_with_denoiser,
)
from .gateway import HttpGateway, MockGateway, make_gateway
from .metrics import clip_score, frechet_distance, inception_score, mask_eval, mse
from .config import PipelineConfig, load_config
from .pipeline import build, resume

__version__ = "0.1.0"
