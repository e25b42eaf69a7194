import numpy as np
import pytest

from nvlockin.acquisition import AcquisitionProtocol
from nvlockin.odmr import OdmrModel
from nvlockin.physics import NVConfiguration, resonance_pair


@pytest.fixture(scope="session")
def nv():
    """3 mT bias along <001>: the standard operating point of the fixtures."""
    return NVConfiguration(bias_field=np.array([0.0, 0.0, 3.0e-3]))


@pytest.fixture(scope="session")
def pair(nv):
    return resonance_pair(nv, 0)


@pytest.fixture
def make_models(pair):
    """Factory for the (f1,) or (f1, f2) lineshape tuple at the bias point."""

    def _make(linewidth=1.0e6, scheme="triple", contrast=0.015, both=True, hf=2.16e6):
        m1 = OdmrModel(
            omega0=pair.f1, linewidth=linewidth, contrast=contrast, hf=hf, scheme=scheme
        )
        if not both:
            return (m1,)
        m2 = OdmrModel(
            omega0=pair.f2, linewidth=linewidth, contrast=contrast, hf=hf, scheme=scheme
        )
        return (m1, m2)

    return _make


@pytest.fixture
def make_protocol():
    """Factory for the 2.5 kHz / 22-cycle antiphase protocol (overridable)."""

    def _make(**kw):
        base = dict(
            f_mod=2.5e3,
            mod_depth=3.0e5,
            n_cyc=22,
            phi1=0.0,
            phi2=np.pi,
            photon_rate=1.0e9,
            width=1,
            height=1,
            seed=0,
        )
        base.update(kw)
        return AcquisitionProtocol(**base)

    return _make
