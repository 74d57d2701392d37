import numpy as np
import pytest

from ennomp.datagen import gen_planted_dictionary, gen_random_dictionary
from ennomp.embedding import fit_pca, learn_delta
from ennomp.nnsearch import SearchContext

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[1:])):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {key}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_dict():
    return gen_random_dictionary(20, 100, seed=7)


@pytest.fixture(scope="session")
def planted_ctx():
    """Approximately rank-5 library in R^30 with a PCA embedding and learned delta."""
    d = gen_planted_dictionary(30, 300, 5, seed=3, noise=0.05)
    e = fit_pca(d.atoms, 5)
    learn_delta(e, d)
    return SearchContext.build(d, e)
