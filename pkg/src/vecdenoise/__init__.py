"""Denoise raster images by repainting them as layered, soft-rasterized Bezier paths."""
from .config import PipelineConfig, load_config, parse_config_text
from .errors import ConfigError, InputError
from .metrics import MetricsReport, psnr, ssim
from .optim import OptimConfig, optimize_scale
from .pipeline import RunArtifacts, add_noise, denoise, make_phantom, run_benchmark
from .soft_raster import loss_and_gradients, render_scene, scene_gradients
from .svg import export_svg
from .vector_paths import ClosedBezierPath, CubicSegment, VectorScene

__all__ = [
    "ClosedBezierPath",
    "ConfigError",
    "CubicSegment",
    "InputError",
    "MetricsReport",
    "OptimConfig",
    "PipelineConfig",
    "RunArtifacts",
    "VectorScene",
    "add_noise",
    "denoise",
    "export_svg",
    "load_config",
    "loss_and_gradients",
    "make_phantom",
    "optimize_scale",
    "parse_config_text",
    "psnr",
    "render_scene",
    "run_benchmark",
    "scene_gradients",
    "ssim",
]
