"""Robust superstabilizing controller synthesis from quantized data.

The package turns interval-quantized state-transition records into a
polytope of consistent plants, then synthesizes a single state-feedback
gain whose logarithmically quantized closed loop is (extended)
superstable for every plant in that polytope.  Robustness is certified
through polytope containment (extended Farkas lemma), either exactly by
sign enumeration or tractably through an affine envelope restriction, and
every certificate can be audited by an independent support-function
oracle.
"""

from .quantizer import (QuantizerSpec, Partition, delta_from_rho,
                        log_quantize, log_quantize_vector, interval_quantize)
from .sysmodel import (LinearSystem, StabCertificate, SynthResult,
                       sign_vectors, recover_controller, scaled_infty_norm,
                       closed_loop_vertex_gain, simulate_quantized,
                       check_cert, decay_check)
from .lp_core import (Polytope, AffExpr, LPModel, LPSolution, LinprogBackend,
                      solve, add_farkas_block, enumerate_vertices,
                      check_containment_bruteforce, max_linear_over_polytope)
from .consistency import (DataSample, Dataset, ExcitationConfig,
                          generate_dataset, widen_noise, build_polytope,
                          plant_vec, contains_plant, prune_redundant)
from .nominal import (NominalProblem, synthesize_nominal_mform,
                      synthesize_nominal_sign)
from .synth_sign import (build_sign_polytope_rows, synthesize_sign,
                         count_constraints_sign)
from .synth_aarc import (AffineMParam, eval_affine_M, synthesize_aarc,
                         count_constraints_aarc)
from .verify import VerificationReport, robust_verify
from .cli import (ExperimentConfig, builtin_system, builtin_partition,
                  singleton_polytope, min_feasible_rho, main)

__version__ = "0.1.0"

__all__ = [
    "QuantizerSpec", "Partition", "delta_from_rho", "log_quantize",
    "log_quantize_vector", "interval_quantize",
    "LinearSystem", "StabCertificate", "SynthResult", "sign_vectors",
    "recover_controller", "scaled_infty_norm", "closed_loop_vertex_gain",
    "simulate_quantized", "check_cert", "decay_check",
    "Polytope", "AffExpr", "LPModel", "LPSolution", "LinprogBackend",
    "solve", "add_farkas_block", "enumerate_vertices",
    "check_containment_bruteforce", "max_linear_over_polytope",
    "DataSample", "Dataset", "ExcitationConfig", "generate_dataset",
    "widen_noise", "build_polytope", "plant_vec", "contains_plant",
    "prune_redundant",
    "NominalProblem", "synthesize_nominal_mform", "synthesize_nominal_sign",
    "build_sign_polytope_rows", "synthesize_sign", "count_constraints_sign",
    "AffineMParam", "eval_affine_M", "synthesize_aarc",
    "count_constraints_aarc",
    "VerificationReport", "robust_verify",
    "ExperimentConfig", "builtin_system", "builtin_partition",
    "singleton_polytope", "min_feasible_rho", "main",
    "__version__",
]
