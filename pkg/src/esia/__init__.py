"""Simulation of electromagnetic signal injection attacks on camera images.

Row-drop attacks with and without Bayer-parity color strips, the
median-interpolation mitigation, and a harness that splits the accuracy
drop into a pixel-loss part and a color-strip part.
"""

from .attack import (AttackMode, DropSchedule, PadPolicy, RowStatus, StripMap, attack,
                     color_strip_attack, derive_seed, drop_and_shift_rows, generate_schedule,
                     kept_rows, loss_fraction, n_from_fraction, pixel_loss_attack, strip_map)
from .core import IDENTICAL, PHASES, BayerMosaic, as_image, demosaic, mosaic, psnr
from .errors import (AdapterError, DimensionError, ESIAError, EvalError, ManifestError,
                     MitigationError, ScheduleError)
from .evaluation import (ClassifierAdapter, CorpusItem, DegradationReport, ExperimentConfig,
                         FunctionAdapter, HttpAdapter, SubprocessAdapter, accuracy, classify,
                         decompose, dominant_channel, run_experiment)
from .mitigation import HoleImage, median_interpolate, mitigate, realign

__version__ = "0.1.0"
