"""Decimation and superposition identities of random-matrix singular values.

Seeded samplers for the orthogonal, unitary, chiral and circular ensembles,
exact gap-probability engines, and statistical verifiers for the identities
connecting them.  Submodules carry the full API; the names re-exported here
cover routine use.
"""

from . import errors
from .decimation import decimate, singular_values, superpose
from .errors import RmtdecError
from .gap import (
    GapEstimate,
    GapPolynomial,
    GaudinData,
    check_8_31p,
    check_B1_structure,
    check_identity_24,
    check_identity_24cp,
    check_thm_D4,
    check_thm_gap,
    gap_chue_exact,
    gap_cue_exact,
    gap_mc,
    gap_oe_bruteforce,
    gap_oe_odd_exact,
    gap_ue_exact,
    gaudin_data,
    pair_for_24,
    pair_for_24cp,
)
from .samplers import EnsembleSpec, SampleBatch, sample_ensemble
from .verify import (
    VerificationReport,
    verify_cor1,
    verify_dixon_anderson,
    verify_q_odd,
    verify_recurrence,
    verify_thm1,
    verify_thmCE,
)
from .weights import (
    AdmissibleWeight,
    cauchy_weight,
    from_table1,
    gauss_weight,
    jacobi_weight,
    make_weight,
)

__all__ = [
    "AdmissibleWeight",
    "EnsembleSpec",
    "GapEstimate",
    "GapPolynomial",
    "GaudinData",
    "RmtdecError",
    "SampleBatch",
    "VerificationReport",
    "cauchy_weight",
    "check_8_31p",
    "check_B1_structure",
    "check_identity_24",
    "check_identity_24cp",
    "check_thm_D4",
    "check_thm_gap",
    "decimate",
    "errors",
    "from_table1",
    "gap_chue_exact",
    "gap_cue_exact",
    "gap_mc",
    "gap_oe_bruteforce",
    "gap_oe_odd_exact",
    "gap_ue_exact",
    "gauss_weight",
    "gaudin_data",
    "jacobi_weight",
    "make_weight",
    "pair_for_24",
    "pair_for_24cp",
    "sample_ensemble",
    "singular_values",
    "superpose",
    "verify_cor1",
    "verify_dixon_anderson",
    "verify_q_odd",
    "verify_recurrence",
    "verify_thm1",
    "verify_thmCE",
    "__version__",
]

__version__ = "0.1.0"
