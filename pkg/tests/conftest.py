import pytest

from curvecert import Context, DrivenLogisticParams
from curvecert.strips import (
    CurveGuess,
    ProofConfig,
    StripGeometry,
    build_initial_strips,
    run_chain,
    run_full_proof,
)


@pytest.fixture(scope="session")
def ctx():
    return Context(128)


@pytest.fixture(scope="session")
def params():
    return DrivenLogisticParams()


@pytest.fixture(scope="session")
def proof_setup(params):
    """Geometry, guess, and the 168 initial strips at default parameters."""
    cfg = ProofConfig()
    geo = StripGeometry.create(params, cfg)
    guess = CurveGuess(params, extra_bits=cfg.guess_extra_bits)
    strips = build_initial_strips(guess, geo)
    return geo, guess, strips


@pytest.fixture(scope="session")
def proof_certificate(params):
    """The full default certification run (the expensive fixture)."""
    return run_full_proof(params, ProofConfig())


@pytest.fixture(scope="session")
def chain_one(proof_setup):
    """The 128-step chain from the first strip, with all intermediate strips."""
    geo, guess, strips = proof_setup
    run = run_chain(geo, guess, strips[0], 128)
    assert run.failed_step is None, f"chain fixture failed: {run.error}"
    return run
