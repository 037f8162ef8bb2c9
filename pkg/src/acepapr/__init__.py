"""Constellation-extension PAPR reduction for plain, space-time and
space-frequency block coded OFDM, with a seeded Monte Carlo CCDF harness."""

from .ace import AceDiagnostics, AceParams, ace_iterate, ace_reduce, clip, clip_amplitude_from_db
from .constellation import (
    Constellation,
    demap_nearest,
    get_constellation,
    map_bits,
    project_to_region,
    qam16,
    qpsk,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    RunReport,
    compare_runs,
    frame_bits,
    run_experiment,
)
from .metrics import CcdfCurve, ccdf, default_threshold_grid, overall_papr_db, papr_at_probability, papr_db
from .sfbc import (
    SelectiveAceState,
    SfbcCode,
    get_sfbc_code,
    reconstruct_from_antenna,
    recompose,
    selective_ace,
    sfbc_code_2tx,
    sfbc_code_4tx,
    sfbc_encode,
    sfbc_time_synthesis,
    split_subblocks,
    sub_ace,
)
from .stbc import (
    AntennaTimeSet,
    StbcGrid,
    ace_stbc_pipeline,
    stbc2_encode,
    stbc4_encode,
    stbc_decode,
    stbc_time_frames,
)
from .transforms import (
    OversamplingConfig,
    analyze,
    circular_shift,
    conj_time_reverse,
    fft_call_count,
    reset_fft_call_count,
    synthesize,
)

__version__ = "0.1.0"
