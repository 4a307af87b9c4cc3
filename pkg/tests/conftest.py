import textwrap

import pytest

from app.models.physics_models import CauchyPulse, InterfaceLaw, MaterialHalfSpaces, SourceSpec
from app.services.fdtd import build_grid


Z_HOMOGENEOUS = 1200.0 * 2800.0


@pytest.fixture
def material():
    return MaterialHalfSpaces(rho_minus=1200.0, rho_plus=1200.0, c_minus=2800.0, c_plus=2800.0, x0=200.0)


@pytest.fixture
def bimaterial():
    return MaterialHalfSpaces(rho_minus=1200.0, rho_plus=2000.0, c_minus=2800.0, c_plus=1500.0, x0=200.0)


@pytest.fixture
def cauchy_source():
    return SourceSpec(f_c=45.0, forcing=CauchyPulse(t0=0.0614))


@pytest.fixture
def grid(material):
    return build_grid(400.0, 400, material, 0.95)


@pytest.fixture
def modulated_law():
    return InterfaceLaw(C0=1.0 / 2.45e9, M0=2.0e4, eps_C=0.75, eps_M=0.75, f_m=100.0)


@pytest.fixture
def matched_law():
    return InterfaceLaw(C0=1.2e4 / Z_HOMOGENEOUS ** 2, M0=1.2e4, eps_C=0.75, eps_M=0.75, f_m=100.0)


@pytest.fixture
def config_text():
    """Valid experiment file; line numbers below are relied on by the parser tests."""
    return textwrap.dedent("""\
        material:
          rho_minus: 1200.0
          rho_plus: 1200.0
          c_minus: 2800.0
          c_plus: 2800.0
          x0: 200.0
        interface:
          K0: 2.45e9
          M0: 2.0e4
          eps_C: 0.75
          eps_M: 0.75
          f_m: 100.0
        source:
          kind: cauchy
          f_c: 45.0
          t0: 0.0614
        grid:
          length: 400.0
          nx: 400
          zeta: 0.95
          t_end: 0.005
        esim:
          k: 5
        run:
          receivers: [100.0, 300.0]
          record_energy: true
        """)
