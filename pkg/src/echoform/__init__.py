"""echoform: high frame-rate ultrasound beamforming and reflection characterization.

Synthetic-transmit-aperture and plane-wave transmit models, four receive
beamformers (DAS, F-DMAS, MVDR, specular), coherent compounding, a
synthetic RF scene simulator, and per-pixel reflection analyses (contour
isolines over the channel-transmission plane and directivity variance).
"""

from .acquisition import (
    AcquisitionSpec,
    ArrayGeometry,
    DelayTable,
    DomainError,
    MediumSpec,
    MemoryBudgetError,
    PixelGrid,
    PulseSpec,
    PwScheme,
    StaScheme,
    build_delay_table,
    default_acquisition,
    default_pw_angles,
    pw_angle_set,
    pw_tx_delay,
    rx_delay,
    sta_tx_delay,
    total_delay,
)
from .adaptive import (
    FdmasConfig,
    MvdrConfig,
    SbConfig,
    SingularCovarianceError,
    fdmas,
    fdmas_filter,
    matched_filter,
    mvdr,
    mvdr_weights,
    sb,
    upsample_rf,
)
from .analysis import (
    ContourSet,
    DvConfig,
    DvReport,
    dv_analyze,
    dv_overlay,
    dv_statistics,
    extract_contours,
    pixel_channel_tx_map,
    sa_receive_angle,
    subaperture_beams,
    vectorize_intensity,
)
from .beamform import (
    DegenerateApertureError,
    apodization_weights,
    das,
    delay_compensate,
)
from .compounding import (
    AllZeroImageError,
    BeamformedImage,
    LengthMismatchError,
    beamsum_profile,
    compound,
    envelope,
    log_compress,
)
from .fileio import FormatError, read_rf, write_pgm, write_rf
from .imaging import beamform_image, pixel_beamsum
from .scene import (
    Arc,
    DiffusePoint,
    FovError,
    Plate,
    RfDataset,
    Scene,
    preset_scenes,
    pulse_waveform,
    synth_rf,
)

__version__ = "0.1.0"
