"""fracvar: fractional variation of piecewise-affine paths and constructive
twice-differentiable reparametrization."""

from .paths import (ConstancyInterval, DomainError, Path, constancy_intervals,
                    evaluate, make_scalar_path, path_from_json, remove_constancy)
from .closed_sets import (CantorSet, ClosedSet, FiniteSet, SequenceSet, UnionSet,
                          cantor_set, closed_set_from_json, contiguous_intervals)
from .variation import (Certificate, FracVariation, UncertifiedPathError,
                        VariationFunction, VariationValue, certify_vbg_half,
                        fractional_variation, fractional_variation_bruteforce,
                        growth_diagnostic, total_variation, variation_function)
from .kf import KfSet, detect_K_f, scalar_varying_monotonicity
from .maps import (AffineMap, ComposedMap, HalfVariationMap, InverseMap,
                   MonotoneMap, PiecewiseAffineMap, SpikeIntegralMap,
                   WeightedSumMap, map_from_json_dict)
from .reparam import (ConstancyError, EpsilonSchedule, ReparamPath, ReparamResult,
                      ZahorskiResult, arc_length_map, build_w,
                      compose_reparametrization, epsilon_schedule,
                      frac_accumulator, invert, zahorski)
from .verify import (DiffReport, check_vartimes, cover_image_lengths,
                     default_ladder, fd_first_derivative, fd_second_derivative,
                     image_measure_estimate, quadratic_chord_report)
from . import examples  # registers the built-in generators

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
