import numpy as np
import pytest

from eitats.lindblad import ThreeLevelRates

# angular rad/s per quoted "MHz" (omega/2pi convention)
M = 2.0 * np.pi * 1e6


@pytest.fixture(scope="session")
def paper_rates() -> ThreeLevelRates:
    """Relaxation-only rate set reproducing the measured coherence rates.

    gamma_10/2pi = 1.76 MHz and gamma_20/2pi = 6.90 MHz; the split of the
    level-2 decay between the two channels is not measured, so it is taken
    symmetric.
    """
    return ThreeLevelRates(relax_10=3.52 * M, relax_20=6.90 * M, relax_21=6.90 * M)


@pytest.fixture(scope="session")
def paper_gammas(paper_rates):
    return paper_rates.coherence_10, paper_rates.coherence_20
