import pytest

from gaussian_igc.cli import main
from gaussian_igc.geodesics import GeodesicConstants


@pytest.fixture
def unit_constants():
    return GeodesicConstants(sigma0=1.0, a1=1.0, a2=1.0)


@pytest.fixture
def run_cli(capsys):
    def run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return run
