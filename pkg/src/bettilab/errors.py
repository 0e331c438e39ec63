"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the CLI copies
into its JSON error record.
"""


class BettiLabError(Exception):
    code = "error"


class InvalidParam(BettiLabError, ValueError):
    code = "invalid_param"


class DegenerateDiscriminant(BettiLabError, ValueError):
    code = "degenerate_discriminant"


class RootFindingFailure(BettiLabError, ArithmeticError):
    code = "root_finding_failure"


class BasisDegeneracy(BettiLabError):
    code = "basis_degeneracy"


class QuadratureDivergence(BettiLabError, ArithmeticError):
    code = "quadrature_divergence"


class IllConditioned(BettiLabError, ArithmeticError):
    code = "ill_conditioned"


class MonodromyStep(BettiLabError):
    """A continuation step was too large to identify the lattice change."""

    code = "monodromy_step"


class PathThroughBranchPoint(BettiLabError):
    code = "path_through_branch_point"


class InvalidSection(BettiLabError, ValueError):
    code = "invalid_section"


class RankAmbiguous(BettiLabError):
    """No singular-value gap large enough to certify a rank.

    ``candidates`` holds the two plausible ranks.
    """

    code = "rank_ambiguous"

    def __init__(self, message, candidates=(), singular_values=()):
        super().__init__(message)
        self.candidates = tuple(candidates)
        self.singular_values = tuple(singular_values)


class NewtonDiverged(BettiLabError, ArithmeticError):
    code = "newton_diverged"


class JacobianSingular(BettiLabError, ArithmeticError):
    code = "jacobian_singular"


class OddDegree(BettiLabError, ValueError):
    code = "odd_degree"


class NotEvenDegree(OddDegree):
    code = "not_even_degree"


class NonSquarefree(BettiLabError, ValueError):
    code = "non_squarefree"


class ResidueDisagreement(BettiLabError, ArithmeticError):
    code = "residue_disagreement"


class Inconclusive(BettiLabError):
    code = "inconclusive"


class CensusViolation(BettiLabError, AssertionError):
    code = "census_violation"


class SchemaError(BettiLabError, ValueError):
    code = "schema_error"
