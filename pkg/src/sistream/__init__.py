"""Situation-aware surveillance streaming simulator.

Annotates frames with a binary scale of importance from detection logs,
requests per-GOP SNR proportional to GOP size, emulates a QPSK/AWGN uplink
with deterministic bit corruption, and reports transmit power savings and
receiver-side detection quality.
"""

from .channel import (ChannelConfig, FrameOutcome, GopLinkStats, LinkReport,
                      corrupt_payload, frame_stream_seed, qpsk_ber, snr_to_ebn0,
                      synthesize_payload, transmit)
from .detection_log import (DetectionRecord, TrackedObject, VehicleDescriptor,
                            parse_detection_log, target_probability_series,
                            track_unique_objects)
from .errors import CalibrationError, ContractError, ParseError, ValidationError
from .importance import (FrameVector, GopImportance, all_important, build_frame_vector,
                         frames_selected, lift_to_gops)
from .orchestrator import (PowerReport, ResourceSummaryVector, RsvEntry, SnrProfile,
                           build_rsv, calibrate_alpha, power_report)
from .pipeline import (ExperimentConfig, ExperimentReport, GoalReport,
                       ThresholdOutcome, ThresholdRecommendation, ThresholdResult,
                       emit_plot_data, load_config, run_experiment,
                       threshold_recommendation)
from .video_model import (FrameRecord, Slice, VideoManifest, gop_sizes, parse_manifest,
                          serialize_manifest, slice_frame)

__version__ = "0.1.0"
