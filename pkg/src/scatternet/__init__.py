"""Random Bluetooth (irrigation) subgraphs of random geometric graphs."""

from .analysis import (ComponentSummary, CliqueWitness, HopDiameter, components, double_sweep_bounds,
                       exact_diameter, find_isolated_cliques, hop_diameter, spanning_ratio)
from .errors import (InvalidDimension, InvalidParameters, NotConnected, NTooSmall, RadiusOutOfRange,
                     ScatternetError)
from .experiment import (ExperimentConfig, ThresholdFormulas, TrialResult, diameter_c, estimate_c_star,
                         minimal_connecting_c, preset, run_trial, sweep, theoretical_thresholds)
from .irrigation import (IrrigationGraph, PreferenceTable, assign_preferences, read_edge_list, realize,
                         realize_staged, write_edge_list)
from .model import (CellGrid, ModelParams, PointSet, VisibilityGraph, build_visibility, critical_gamma,
                    derive_geometry, safe_gamma, sample_points)
from .percolation import (CellColoring, DensityReport, PropertyReport, color_cells, density_report,
                          moon_report, property_report, solve_alpha_beta)

__version__ = "0.1.0"
