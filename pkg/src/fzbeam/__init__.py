"""Near-field wideband RIS beamforming over Fresnel-zone geometry."""

from .analysis import (GainSpectrum, IdealSpectrum, SplitMetrics, ideal_gain,
                       narrowband_spectrum, rate_upper_bound, split_metrics)
from .beamformers import (GsaParams, PhaseProfile, gsa_profile, narrowband_phases,
                          profile_to_weights, quantize_weights, spm_profile, vsa_phases)
from .channel import (LinkBudget, Weights, equivalent_gain_discrete,
                      equivalent_gain_exact_bs, path_gain_constant)
from .evaluation import (EvalContext, ExperimentSpec, achievable_rate, gain_spectrum,
                         run_sweep, subcarrier_frequencies)
from .fresnel import (EllipseParams, FresnelFrame, IntensityProfile, a_of_point,
                      build_frame, ellipse_params, fz_to_cartesian, intensity_profile,
                      jacobian, visible_arcs)
from .scenario import (SPEED_OF_LIGHT, BSArray, ElementGrid, Placement, SystemConfig,
                       build_ris_grid, delay_extent, sample_placement)

__version__ = "0.1.0"
