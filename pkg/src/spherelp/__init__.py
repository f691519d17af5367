"""Sphere packing density bounds via linear programming.

Subpackages cover exact lattice invariants (E8, Leech theta data), modular
and quasimodular form expansions, the dimension-8 magic function built from
them, and discretized linear-programming bounds with double-double simplex
certification, tied together by a command-line harness.
"""

from .errors import (SphereLPError, NotPositiveDefinite, SingularBasis,
                     BudgetExceeded, OracleDiverged, NumericalStall,
                     InvalidCertificate, ChecksNotRun, ConfigError)
from .lattice import (e8_gram, identity_gram, characteristic_polynomial,
                      basis_from_gram, covolume, dual_basis,
                      enumerate_vectors, ball_volume, packing_density,
                      poisson_verify)
from .forms import (eisenstein_qseries, verify_identities, named_series,
                    psi_eval, SeriesCache)
from .magic import MagicFunction, sphere_packing_certificate
from .lpbounds import (default_degree, laguerre_basis, RadialFunction,
                       LPInstance, BoundCertificate, build_instance,
                       simplex_solve, margin_lp, certify, optimize_r,
                       bound_from_certificate, validate_eigenbasis)
from .reference import (record_density, lp_bound_reference,
                        reference_checksum, compare_to_reference)

__version__ = "0.1.0"
