from pathlib import Path

import pytest

from ruralplan import kernels

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    """Each available kernel module (compiled and numpy fallback)."""
    return kernels.backends()[request.param]
