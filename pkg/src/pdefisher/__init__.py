"""Information geometry of heat- and Poisson-kernel mixture densities.

Mixing the heat kernel (Gaussian) or half-plane Poisson kernel (Cauchy) over
a source density f yields a two-parameter family of compound densities whose
Fisher information matrix and cubic structure tensor admit closed forms in
the log-derivatives of the mixture field u.  This package evaluates those
closed forms, independently computes the same quantities by direct adaptive
quadrature of the defining integrals, and ships a residual harness that
documents where closed forms and oracle disagree.
"""

from .field import DerivBundle, LogDerivBundle, ParamPoint, field_derivs, log_derivs, pde_residual
from .geometry import (
    ComparisonReport,
    FisherMatrix,
    FormulaMode,
    StructureTensor,
    compare,
    density_pdf,
    fisher_closed,
    fisher_direct,
    pd_check,
    score,
    structure_closed,
    structure_direct,
)
from .kernels import (
    Family,
    KernelPoint,
    MULTI_INDICES,
    DomainError,
    fundamental_solution,
    heat_kernel_partial,
    poisson_kernel_partial,
)
from .quadrature import QuadratureConfig, QuadResult, QuadratureError, Tangent, default_config, integrate
from .sources import (
    Cauchy,
    Gaussian,
    ImproperUniform,
    InvalidSourceError,
    Mixture,
    PointMass,
    SourceSpec,
    Uniform,
    effective_support,
    parse_source,
    source_pdf,
    validate,
)
from .verify import (
    GridSpec,
    IdentityId,
    Order,
    ResidualReport,
    identity_residual,
    run_consistency_suite,
    run_identity_suite,
)

__version__ = "0.1.0"
