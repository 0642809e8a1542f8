"""Direct and inverse spectral problems for finite-range perturbations of periodic Jacobi operators."""

from types import ModuleType as _ModuleType

from .direct import (canonical_weights, find_singularities, fitted_degree, m_function,
                     recover_a_polynomial, verify_m_conditions)
from .errors import (ClassificationAmbiguous, ClosedGap, DegreeMismatch, GuardViolated,
                     InterlacingViolation, InvalidConfiguration, InvalidInput, JacresError,
                     LostPrecision, NonReal, NoSuchMass, NotFreeTail, NoTailFound, OnSpectrum,
                     PoleHit, QuadratureUnderresolved)
from .inverse import (SpectralMeasure, ac_density, build_measure, density_table,
                      random_configuration, validate_configuration)
from .jacobi import EventuallyPeriodicOperator, magic_check, random_operator
from .periodic import (BandSet, PeriodicBlock, Sheet, SurfacePoint, band_set, bands_of,
                       discriminant, periodic_m, random_block)
from .perturb import (PerturbationDeterminant, StabilityExperimentConfig, StabilityReport,
                      add_point_mass, build_perturbation_determinant, canonical_mass,
                      check_damsim, christoffel_add, migration_experiment, remove_point_mass,
                      stability_experiment)
from .reconstruct import (MomentSequence, TailInfo, detect_tail, hankel_reconstruct, moments,
                          reconstruct_operator, stieltjes_reconstruct)
from .report import Check, Report
from .singularities import SingularityConfiguration

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, _ModuleType)]
