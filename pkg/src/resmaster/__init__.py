"""Patch-based diffusion upscaling with frequency-domain structural guidance
and decoupled text/image-prompt conditioning, driven by pluggable denoisers.

Grids are numpy arrays of shape (height, width, channels): real float64 for
images/latents/noise, complex128 for spectra.
"""

from .attention import AttentionWeights, attend, make_attention_weights, softmax_rows
from .conditioning import (
    CAPTION_INSTRUCTION,
    CaptionManifest,
    ConditionBundle,
    ImageEmbedding,
    ManifestError,
    TextEmbedding,
    embed_text_stub,
    encode_image_prompt_stub,
    load_caption_manifest,
)
from .config import ConfigError, parse_config, serialize_config
from .denoiser import (
    Denoiser,
    GaussianDataModel,
    analytic_gaussian_denoiser,
    toy_conditioned_denoiser,
)
from .netpbm import ImageFormatError, read_image, write_image
from .noise import standard_normal_field
from .pipeline import (
    Codec,
    IdentityCodec,
    PipelineConfig,
    build_patch_bundles,
    generate_low_res,
    resmaster_generate,
)
from .schedule import (
    NoiseSchedule,
    forward_diffuse,
    make_geometric_schedule,
    make_linear_schedule,
    posterior_step,
    predict_x0,
)
from .spectral import (
    ImaginaryResidueError,
    fft2d,
    gaussian_lowpass_mask,
    ifft2d,
    swap_low_frequency,
)
from .tiler import (
    GeometryError,
    PatchLayout,
    Rect,
    bicubic_upsample,
    extract_patch,
    fuse_patches,
    plan_patches,
)

__version__ = "0.1.0"
