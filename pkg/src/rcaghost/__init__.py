"""Synthetic-aperture 3-D imaging for row-column-addressed arrays.

Simulates edge-wave-contaminated channel data, beamforms the main frame
plus eight ghost frames along the nine per-element sub-paths, suppresses
the ghost artifacts with a sliding-window correlation weight map, and
measures the resulting point-spread function and contrast.

Submodules are imported lazily so the command line can configure the
compute runtime before it loads.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    # geometry
    "ALL_PATHS": "geometry",
    "GHOST_PATHS": "geometry",
    "MAIN_PATH": "geometry",
    "LineElement": "geometry",
    "Medium": "geometry",
    "RcaArray": "geometry",
    "path_point": "geometry",
    "tof": "geometry",
    # forward model
    "ChannelData": "forward",
    "EdgeModel": "forward",
    "Phantom": "forward",
    "Pulse": "forward",
    "make_cyst_phantom": "forward",
    "make_pulse": "forward",
    "simulate_channel_data": "forward",
    # beamformer
    "ComplexVolume": "beamform",
    "FrameSet": "beamform",
    "VolumeGrid": "beamform",
    "beamform_frames": "beamform",
    "das_beamform": "beamform",
    "hann_rx_apodization": "beamform",
    "to_baseband": "beamform",
    # postfilter
    "CorrelationKernel": "postfilter",
    "apply_weight": "postfilter",
    "combine_weights": "postfilter",
    "complex_correlation": "postfilter",
    "local_correlation_map": "postfilter",
    "suppress_ghosts": "postfilter",
    "weight_map": "postfilter",
    # metrics
    "DbVolume": "metrics",
    "Profile": "metrics",
    "cnr": "metrics",
    "cylinder_mask": "metrics",
    "envelope_db": "metrics",
    "ghost_suppression_db": "metrics",
    "off_lobe_peaks": "metrics",
    "project_max": "metrics",
    "width_at_level": "metrics",
    # config / pipeline
    "ConfigError": "config",
    "profile_config": "config",
    "resolve_config": "config",
    "validate_config": "config",
    "run_stage": "pipeline",
    "set_thread_count": "pipeline",
    "MissingArtifactError": "rawio",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    module = _EXPORTS.get(name)
    if module is None:
        raise AttributeError(f"module 'rcaghost' has no attribute {name!r}")
    return getattr(import_module(f".{module}", __name__), name)


def __dir__():
    return __all__
