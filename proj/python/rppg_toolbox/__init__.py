"""Remote photoplethysmography toolbox: signal methods, DSP, metrics and the
synth/preprocess/run/evaluate pipeline."""

from ._core import (
    METHODS,
    RppgError,
    SynthConfig,
    compute_metrics,
    design_bandpass,
    detrend,
    estimate_hr,
    evaluate,
    filtfilt,
    jade,
    load_recording,
    periodogram,
    preprocess,
    run,
    run_method,
    spatial_average,
    synth,
    synth_trace,
    synth_video,
    waveform_hr,
)

__all__ = [
    "METHODS",
    "RppgError",
    "SynthConfig",
    "compute_metrics",
    "design_bandpass",
    "detrend",
    "estimate_hr",
    "evaluate",
    "filtfilt",
    "jade",
    "load_recording",
    "periodogram",
    "preprocess",
    "run",
    "run_method",
    "spatial_average",
    "synth",
    "synth_trace",
    "synth_video",
    "waveform_hr",
]
