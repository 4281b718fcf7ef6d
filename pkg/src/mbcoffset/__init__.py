"""Azimuth-offset multi-blade coordinate transformation for IPC analysis."""
from .errors import (DegenerateModelError, IllExcitationError, InstabilityError, MarginalStabilityError,
                     MBCError, PoleEvaluationError, SearchFailedError, SingularMatrixError)
from .lti import ComplexRational, StateSpaceModel
from .mbc import composite_rotation, forward_mbc, partial_matrices, reverse_mbc, rotation
from .plant import RotorModel, TransformedPlant, analytic_offset_coupled, analytic_offset_decoupled

__version__ = "0.1.0"
