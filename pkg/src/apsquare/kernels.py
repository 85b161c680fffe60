"""One-dimensional kernels psi, their validation against the decay and
integrated-smoothness bounds

    |psi(x)| <= c / (1 + |x|)^(1 + eps),    int |psi(x + h) - psi(x)| dx <= c |h|^eps,

and the smooth cut-off bump Phi used by the smoothed square function.

Every kernel carries its antiderivative ``Psi`` so that convolutions with
piecewise-constant signals are integrated exactly cell by cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """A kernel psi with its (cond) exponent and the constants it was validated with.

    ``breaks`` lists the jump points of a piecewise-constant kernel (used for
    exact smoothness integrals); ``reach`` is the radius beyond which psi
    and its antiderivative are treated as exactly zero.
    """

    name: str
    psi: Callable[[np.ndarray], np.ndarray]
    Psi: Callable[[np.ndarray], np.ndarray]
    eps: float = 1.0
    reach: float = 1.0
    breaks: tuple[float, ...] | None = None
    delta_default: float = 0.5
    c_decay: float = math.inf
    c_smooth: float = math.inf

    @property
    def delta(self) -> float:
        """Exponent used for the dilation weights: eps if eps < 1, else the configured value."""
        return self.eps if self.eps < 1 else self.delta_default

    def with_constants(self, c_decay: float, c_smooth: float) -> "KernelSpec":
        return KernelSpec(self.name, self.psi, self.Psi, self.eps, self.reach, self.breaks,
                          self.delta_default, c_decay, c_smooth)

    def cell_weights(self, t: float, h: float, dmax: int) -> np.ndarray:
        """Exact cell integrals of psi_t against cell d, for offsets d = -dmax..dmax.

        ``out[dmax + d] = Psi((d + 1/2) h / t) - Psi((d - 1/2) h / t)``: the value at
        a cell centre of psi_t convolved with the indicator of a cell ``d`` steps away.
        """
        d = np.arange(-dmax, dmax + 1, dtype=np.float64)
        return self.Psi((d + 0.5) * (h / t)) - self.Psi((d - 0.5) * (h / t))


def _haar(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where((x >= 0) & (x < 0.5), 1.0, 0.0) - np.where((x >= 0.5) & (x < 1), 1.0, 0.0)


def _haar_anti(u):
    u = np.asarray(u, dtype=np.float64)
    return np.where((u >= 0) & (u < 0.5), u, 0.0) + np.where((u >= 0.5) & (u < 1), 1.0 - u, 0.0)


def _mexhat(x):
    x = np.asarray(x, dtype=np.float64)
    return (1.0 - x * x) * np.exp(-0.5 * x * x)


def _mexhat_anti(u):
    u = np.asarray(u, dtype=np.float64)
    return u * np.exp(-0.5 * u * u)


def _box(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where((x >= 0) & (x < 1), 1.0, 0.0)


def _box_anti(u):
    return np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)


def haar() -> KernelSpec:
    return KernelSpec("haar", _haar, _haar_anti, eps=1.0, reach=1.0, breaks=(0.0, 0.5, 1.0))


def mexican_hat() -> KernelSpec:
    # exp(-u^2/2) underflows far below double resolution past |u| = 40
    return KernelSpec("mexican_hat", _mexhat, _mexhat_anti, eps=1.0, reach=40.0)


def box() -> KernelSpec:
    """chi_[0,1): a kernel with nonzero mean, kept to exercise rejection."""
    return KernelSpec("box", _box, _box_anti, eps=1.0, reach=1.0, breaks=(0.0, 1.0))


KERNELS = {"haar": haar, "mexican_hat": mexican_hat, "box": box}


def get_kernel(name: str) -> KernelSpec:
    try:
        return KERNELS[name]()
    except KeyError:
        raise KernelError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


@dataclass
class KernelReport:
    eps_ok: bool
    decay_const: float
    smooth_const: float
    mean: float
    reasons: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"eps_ok": self.eps_ok, "decay_const": self.decay_const,
                "smooth_const": self.smooth_const, "mean": self.mean, "reasons": list(self.reasons)}


def _shift_l1(k: KernelSpec, h: float, R: float, step: float) -> float:
    """int |psi(x + h) - psi(x)| dx over the probe range."""
    if k.breaks is not None:
        # piecewise constant: the difference is constant between merged jump points
        pts = np.unique(np.concatenate([np.array(k.breaks), np.array(k.breaks) - h]))
        mids = 0.5 * (pts[1:] + pts[:-1])
        return float(np.sum(np.abs(k.psi(mids + h) - k.psi(mids)) * np.diff(pts)))
    x = np.arange(-R - abs(h), R + abs(h), step) + 0.5 * step
    return float(np.sum(np.abs(k.psi(x + h) - k.psi(x))) * step)


def validate_kernel(k: KernelSpec, R: float = 64.0, step: float = 2.0**-10,
                    shifts=None, mean_tol: float = 1e-9) -> KernelReport:
    """Smallest constants fitting both (cond) bounds on the probe set, and the mean of psi.

    The probe set is the grid of step ``step`` on ``[-R, R]`` for the decay
    bound and the shifts ``h = +-2^j`` (j = -12..log2 R) for the smoothness
    bound. Failures are reported, never raised.
    """
    reasons = []
    if not 0 < k.eps <= 1:
        reasons.append(f"eps={k.eps} outside (0, 1]")
    x = np.arange(-R, R + step / 2, step)
    vals = np.abs(k.psi(x))
    if not np.all(np.isfinite(vals)):
        reasons.append("psi is not finite on the probes")
        return KernelReport(False, math.inf, math.inf, math.nan, reasons)
    env = vals * (1.0 + np.abs(x)) ** (1.0 + k.eps)
    decay = float(env.max())
    outer = np.abs(x) >= 0.9 * R
    if env[outer].max() > 0.5 * decay and env[outer].max() > 1e-12:
        reasons.append("decay envelope still growing at the edge of the probe range")
        decay = math.inf
    if shifts is None:
        top = int(math.floor(math.log2(R)))
        shifts = [s * 2.0**j for j in range(-12, top + 1) for s in (1.0, -1.0)]
    smooth = max(_shift_l1(k, h, R, step) / abs(h) ** k.eps for h in shifts)
    if not math.isfinite(smooth):
        reasons.append("no finite smoothness constant")
    mean = float(k.Psi(np.array(R)) - k.Psi(np.array(-R)))
    if abs(mean) > mean_tol:
        reasons.append(f"mean {mean:.3g} is not zero")
    ok = not reasons
    return KernelReport(ok, decay, float(smooth), mean, reasons)


# --- the bump Phi -------------------------------------------------------------


def _sigmoid(u):
    """C-infinity step: 0 at u <= 0, 1 at u >= 1."""
    u = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / u), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / (1.0 - u)), 0.0)
    return a / (a + b)


class BumpSpec:
    """Radial cut-off equal to 1 on |z| <= 1 and 0 on |z| >= 2, smooth in between.

    ``kind="indicator"`` gives chi_{|z| < 1} instead (the hard cone).
    """

    TABLE = 2**20

    def __init__(self, kind: str = "smooth"):
        if kind not in ("smooth", "indicator"):
            raise KernelError(f"unknown bump kind {kind!r}")
        self.kind = kind
        if kind == "smooth":
            z = np.linspace(1.0, 2.0, self.TABLE + 1)
            prof = _sigmoid(2.0 - z)
            self._z = z
            self._A = 1.0 + cumulative_simpson(prof, x=z, initial=0.0)
            self.lipschitz = float(np.max(np.abs(np.diff(prof))) / (z[1] - z[0]))
        else:
            self.lipschitz = math.inf

    def __call__(self, z):
        r = np.abs(np.asarray(z, dtype=np.float64))
        if self.kind == "indicator":
            return (r < 1).astype(np.float64)
        return np.where(r <= 1, 1.0, _sigmoid(2.0 - r))

    def antiderivative(self, z):
        """int_0^z Phi, odd in z."""
        z = np.asarray(z, dtype=np.float64)
        r = np.abs(z)
        if self.kind == "indicator":
            return np.sign(z) * np.minimum(r, 1.0)
        inner = np.interp(np.minimum(r, 2.0), self._z, self._A)
        return np.sign(z) * np.where(r <= 1, r, inner)
