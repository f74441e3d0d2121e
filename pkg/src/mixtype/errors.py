"""Exception hierarchy shared by all solver stages.

Each exception maps to a distinct process exit code in the batch front
end; see ``mixtype.cli``.
"""


class MixTypeError(Exception):
    """Base class for all solver errors."""


class ConfigError(MixTypeError):
    """Run configuration is malformed or inconsistent."""


class TransversalityViolation(MixTypeError):
    """The two degeneracy curves fail to cross transversally at the origin."""


class CoverageError(MixTypeError):
    """Grid does not cover the requested outer radius."""


class MaskTooThin(MixTypeError):
    """A region is narrower than the difference stencil it must support."""


class DivisionByDegeneracy(MixTypeError):
    """det D^2 u / K is unbounded near the degeneracy set."""


class SolverDivergence(MixTypeError):
    """Linear solver failed to reach the requested residual."""


class MaximumPrincipleViolation(MixTypeError):
    """Discrete comparison principle violated (diagnostic check)."""


class ContinuationStall(MixTypeError):
    """Regularization continuation gaps stopped decreasing."""


class CharacteristicCorner(MixTypeError):
    """1 - a*kappa_x^2 vanishes; the corner jet system is singular."""


class IncompatibleData(MixTypeError):
    """Cauchy data violate a compatibility condition at the corner."""


class CFLViolation(MixTypeError):
    """Requested marching step violates the CFL bound."""


class InstabilityDetected(MixTypeError):
    """Marching solution grew beyond the instability threshold."""


class TransformDegenerate(MixTypeError):
    """Coordinate transform folded (d y1 / d x1 too small)."""


class ResidualStagnation(MixTypeError):
    """Iteration residual failed to decrease for several levels."""


class SingularSystem(MixTypeError):
    """Polynomial-correction linear system is numerically singular."""


class GlueDefectExceeded(MixTypeError):
    """Solution jump across a degeneracy curve exceeds tolerance."""


class OrientationFailure(MixTypeError):
    """Marching direction does not enter a hyperbolic component."""


class SchemaMismatch(MixTypeError):
    """An input file does not match the documented schema."""
