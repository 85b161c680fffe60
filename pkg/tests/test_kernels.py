import numpy as np
import pytest

from apsquare.kernels import BumpSpec, KernelError, box, get_kernel, haar, mexican_hat, validate_kernel


def test_haar_passes():
    rep = validate_kernel(haar())
    assert rep.eps_ok and not rep.reasons
    assert rep.mean == 0
    assert 0 < rep.decay_const < np.inf and 0 < rep.smooth_const < np.inf


def test_mexican_hat_passes():
    rep = validate_kernel(mexican_hat())
    assert rep.eps_ok
    assert abs(rep.mean) < 1e-9


def test_nonzero_mean_fails_without_raising():
    rep = validate_kernel(box())
    assert not rep.eps_ok
    assert rep.mean == 1.0
    assert any("mean" in r for r in rep.reasons)


def test_unknown_kernel():
    with pytest.raises(KernelError):
        get_kernel("gabor")


@pytest.mark.parametrize("name", ["haar", "mexican_hat"])
def test_cell_weights_integrate_kernel(name):
    k = get_kernel(name)
    h, t, D = 2.0**-6, 0.25, 200
    w = k.cell_weights(t, h, D)
    assert w.shape == (2 * D + 1,)
    # sum of exact cell integrals of psi_t equals its (zero) mean
    assert abs(w.sum()) < 1e-12
    # and agrees with a fine sub-cell Riemann sum of psi_t over each cell
    d = np.arange(-D, D + 1)[:, None]
    sub = (np.arange(256) + 0.5) / 256 - 0.5
    riemann = (k.psi((d + sub) * h / t) / t).sum(axis=1) * h / 256
    assert np.max(np.abs(w - riemann)) < 1e-3 * np.max(np.abs(w))


def test_antiderivative_matches_kernel():
    k = mexican_hat()
    x = np.linspace(-6, 6, 2001)
    num = np.gradient(k.Psi(x), x)
    assert np.max(np.abs(num - k.psi(x))) < 1e-3


def test_bump_properties():
    b = BumpSpec()
    assert b(np.array([0.0, 0.5, 0.99]))[0] == 1.0
    assert np.all(b(np.array([-1.0, 0.5, 0.99])) == 1.0)
    assert np.all(b(np.array([2.0, -2.5, 10.0])) == 0.0)
    vals = b(np.linspace(-3, 3, 601))
    assert np.all((vals >= 0) & (vals <= 1))
    assert b.antiderivative(2.0) == pytest.approx(1.5, abs=1e-9)
    assert b.antiderivative(-2.0) == pytest.approx(-1.5, abs=1e-9)
    assert b.lipschitz == pytest.approx(2.0, rel=0.05)
