"""Euler numbers of circle actions of lattices in PSL(2,R), and the curvature
of the connection built from a harmonic family of measures."""

from .circle import (AmbiguousLift, CircleMapError, Composition, DisplacementInterval,
                     FunctionLift, IDENTITY, MobiusLift, NonMonotone, NotFiniteOrder, PLMap,
                     Rotation, TranslationNumber, compose, compose_all, conjugate,
                     displacement_bounds, evaluate, identity, inverse, power, random_pl_lift,
                     reflect, rotation, translate, translation_number,
                     translation_number_finite_order)
from .connection import (ConnectionEvaluator, CurvatureField, StepTooCoarse, curvature_field,
                         gauss_bonnet_report, holonomy_translation)
from .domain import MeshFailure, TruncatedDomain, truncated_domain
from .euler import (DegenerateSignature, EulerNumber, OrbitBlowup, RelatorNotIdentity,
                    RepresentationSpec, SeifertData, conjugate_rep, euler_number, fuchsian_rep,
                    reversed_rep, rotation_rep, seifert_data, semiconjugate_deform)
from .fuchsian import (LatticePresentation, OrbifoldSignature, PresentationError,
                       UnsupportedSignature, boundary_lift, catalog, chi_orb, hyperbolic_area,
                       poincare_distance, poisson_kernel)
from .harmonic import (CircleMeasure, ConstantFamily, HarmonicFamily, MixtureFamily,
                       PoissonFamily, RotatedPoissonMixture, check_harmonic, collapse_map,
                       harnack_norm, poisson_family,
                       rotated_mixture, stationary_measure_mc)
from .inequalities import (InconclusiveDisplacement, InequalityReport, ehn_bounds,
                           ehn_equality_diagnosis, milnor_wood_check)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
