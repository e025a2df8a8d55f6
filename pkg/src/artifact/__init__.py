"""Feasibility bounds, frontier searches and exact block simulation for
lossless transmission of correlated sources over discrete memoryless
multiple-access relay channels."""

from .discrete_prob import (ConditionalKernel, FiniteAlphabet, JointTable,
                            TableError, compose, condition, entropy,
                            marginalize, mutual_information)
from .marc_models import (MarcChannel, MarcScenario, Psomarc,
                          identity_encoders, induced_joint, point_mass,
                          psomarc_table1, psomarc_table7, psomarc_tables45,
                          somarc_factorization_gap, somarc_law, sources_named)
from .maxcorr_spectral import (ConvergenceError, CorrelationProfile,
                               NormalizedJointMatrix, SingularSpectrum,
                               correlation_profile, in_Bprime,
                               maximal_correlation, normalized_matrix,
                               singular_values, top_singular_vectors)
from .necessary_bounds import (BprimeError, NecessaryReport, cutset_psomarc,
                               eval_prop2_broadcast, eval_thm4, eval_thm5,
                               factorization_gap, i_new_psomarc,
                               maxcorr_constraint, pairing_objective,
                               pairing_table)
from .psomarc_simulator import (SchemeLayout, SimReport, run_scheme,
                                run_table1_scheme, run_table7_scheme,
                                sample_induced, theta)
from .simplex_search import (SearchError, SearchResult, SearchSpec,
                             enumerate_simplex, maximize)
from .sufficient_bounds import (ChainError, FeasibilityReport,
                                InequalityRecord, eval_prop1, eval_thm1,
                                eval_thm2, eval_thm3, i_suff_psomarc,
                                kernel_grid_objective, sum_rate_point)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
