import numpy as np
import pytest
from hypothesis import settings

from rankfuse import GeneratorConfig, gen_complementary_pair

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def gram_singular_values(X):
    """Independent oracle: singular values from the symmetric eigensolver on X^T X."""
    evals = np.linalg.eigvalsh(X.T @ X)[::-1]
    return np.sqrt(np.clip(evals, 0.0, None))


def gram_erank(X, rtol=1e-5):
    # eigvalsh resolves sigma only down to about sqrt(eps) * sigma_1
    s = gram_singular_values(X)
    s = s[s > rtol * s[0]]
    p = s / s.sum()
    return float(np.exp(-np.sum(p * np.log(p))))


@pytest.fixture(scope="session")
def pair_seed5():
    return gen_complementary_pair(GeneratorConfig(rows=64, cols=16, gamma_target=0.2, beta=1.0, seed=5))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
