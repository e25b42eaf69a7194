"""nvlockin: wide-field lock-in camera magnetometry simulator and analysis toolkit.

Pipeline: spin physics (four-axis Zeeman projections, resonance pairs) ->
Lorentzian ODMR lineshapes (single/triple-tone, double resonance) -> frame
based lock-in acquisition with photon shot noise -> double-resonance
demodulation to tesla -> sensitivity maps and sub-millisecond transient
field reconstruction.
"""

__version__ = "0.1.0"

from .acquisition import (
    AcquisitionProtocol,
    FrameStack,
    LockInFrame,
    calibrate_slope,
    collect_frames,
    frame_timing,
    instantaneous_fluorescence,
    photon_rate_map,
    simulate_frames,
)
from .coherence import CoherenceModel, fit_coherence, hahn_signal, ramsey_signal
from .demod import (
    DRSignal,
    PhaseConfig,
    alpha_map,
    calibrate_alpha,
    demodulate,
    dr_gain_estimate,
)
from .errors import (
    CalibrationError,
    ConvergenceError,
    OutOfModelError,
    RankDeficiencyError,
    ScenarioError,
    StepSizeError,
    UndefinedLagError,
)
from .io import Scenario, load_scenario, read_frames, resolve_config, write_frames
from .odmr import (
    DriveScheme,
    OdmrModel,
    contrast_enhancement,
    dip,
    dip_depth,
    dr_spectrum,
    linewidth_for_enhancement,
    lorentzian,
    minimum_enhancement,
    spectrum,
)
from .physics import (
    NVConfiguration,
    ResonancePair,
    alignment_spectrum_positions,
    nv_axes,
    project_field,
    resonance_pair,
)
from .scenario import run_scenario
from .sensitivity import (
    CircularROI,
    SensitivityMap,
    ShotNoiseInputs,
    default_roi,
    eta_cw,
    eta_from_series,
    photon_rate_for_eta,
    predicted_eta,
    roi_statistics,
    volume_normalize,
)
from .transient import (
    LRCircuit,
    PulseTrain,
    TransientTrace,
    delay_estimate,
    lr_current,
    run_transient_experiment,
)
