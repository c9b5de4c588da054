from django_dominative_laplace.suites.suite import Suite, get_config
from django_dominative_laplace.suites.operators import (
    CylindricalEigenstructureSuite,
    DominationSuite,
    FundamentalAnnihilationSuite,
    MatrixSymbolSuite,
)
from django_dominative_laplace.suites.superposition import (
    CounterexampleSuite,
    CrandallZhangSuite,
    SuperharmonicFieldsSuite,
)
from django_dominative_laplace.suites.radial import RadialChordSuite, RadialSuperpositionSuite
from django_dominative_laplace.suites.oracles import OracleSuite

__all__ = (
    "Suite",
    "get_config",
    "FundamentalAnnihilationSuite",
    "CylindricalEigenstructureSuite",
    "MatrixSymbolSuite",
    "DominationSuite",
    "CrandallZhangSuite",
    "SuperharmonicFieldsSuite",
    "CounterexampleSuite",
    "RadialChordSuite",
    "RadialSuperpositionSuite",
    "OracleSuite",
)
