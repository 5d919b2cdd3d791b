"""Exception hierarchy shared across the package."""


class NlserialError(Exception):
    """Base class for all package errors."""


class DomainViolation(NlserialError):
    """An input value fell outside the domain of a transform."""

    def __init__(self, row, transform_label):
        self.row = row
        self.transform_label = transform_label
        super().__init__(
            f"input at row {row} outside the domain of transform {transform_label!r}"
        )


class RankDeficient(NlserialError):
    """Regression design matrix does not have full column rank."""


class DegenerateSeries(NlserialError):
    """A series has zero sample variance where positive variance is required."""


class DegenerateColumn(NlserialError):
    """A column of a multivariate series is constant."""

    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero sample variance")


class SingularGamma0(NlserialError):
    """Lag-0 autocovariance matrix is numerically singular."""


class InsufficientSample(NlserialError):
    """Sample too short for the requested operation."""


class InvalidTheta(NlserialError):
    """Parameter vector violates the model's admissible region."""


class BurnTooSmall(NlserialError):
    """Burn-in too short for the requested truncation accuracy."""


class NoConvergence(NlserialError):
    """An optimizer failed to converge."""


class AllStartsFailed(NlserialError):
    """Every optimization start failed to produce a finite objective."""


class DfNonPositive(NlserialError):
    """Test degrees of freedom are not positive."""


class NonConvergence(NlserialError):
    """Numerical quadrature failed to reach the requested tolerance."""


class RankDeficientJacobian(NlserialError):
    """Autocovariance Jacobian does not have full column rank."""


class RefitFailure(NlserialError):
    """A bootstrap replicate could not be re-estimated."""


class TooManyRefitFailures(NlserialError):
    """More than the allowed share of bootstrap replicates failed."""


class AllRejected(NlserialError):
    """Regularized orthonormalization rejected every generator."""


class SingularWeighting(NlserialError):
    """GMM weighting matrix could not be inverted."""
