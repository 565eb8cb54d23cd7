"""Gradient field Z(x) = [x, [tau x, H]], its metric, linearization and flow.

Z is minus the gradient of the real height h_H(x) = Re<H, x> with respect to
the orbit metric m_x(u, v) = b_tau(ad(x)^-1 u, ad(x)^-1 v).  Trajectories are
integrated with classical RK4 in the ambient matrix space followed by a
spectral retraction back onto the isospectral set.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NotCriticalError, TangencyError
from .liecore import (
    RootSystemAn,
    b_norm,
    b_tau,
    bracket,
    cartan_matrix,
    killing_form,
    omega,
    root_eval,
    tau,
)
from .orbit import OrbitPoint, critical_points, potential, retract

KERNEL_CUTOFF = 1e-9
TANGENCY_TOL = 1e-8
CONV_TOL = 1e-9


def _mat(x):
    return x.x if isinstance(x, OrbitPoint) else np.asarray(x, dtype=complex)


def z_field(x, h):
    """Z(x) = [x, [tau x, H]]; defined on the whole algebra, tangent to orbits."""
    xm = _mat(x)
    return bracket(xm, bracket(tau(xm), cartan_matrix(h)))


def _ad_operator(xm):
    """Matrix of ad(x) on column-flattened matrices."""
    d = xm.shape[0]
    eye = np.eye(d)
    return np.kron(eye, xm) - np.kron(xm.T, eye)


def ad_inverse(pt, v, tangency_tol=TANGENCY_TOL, kernel_cutoff=KERNEL_CUTOFF):
    """Solve ad(x) w = v with w orthogonal to the kernel of ad(x).

    This is the pseudo-inverse needed for the metric: the solution picked
    in the inner-product complement of the kernel is what makes the field
    Z the negative metric gradient of the real height.  Raises
    TangencyError when v is not in the image of ad(x) within tolerance.
    """
    xm = _mat(pt) if not isinstance(pt, OrbitPoint) else pt.x
    vm = _mat(v)
    op = _ad_operator(xm)
    w = np.linalg.pinv(op, rcond=kernel_cutoff) @ vm.ravel(order="F")
    residual = np.linalg.norm(op @ w - vm.ravel(order="F"))
    if residual > tangency_tol * max(1.0, np.linalg.norm(vm)):
        raise TangencyError(f"component outside im ad(x): {residual:.3e}")
    return w.reshape(xm.shape, order="F")


def tangency_residual(pt, v, kernel_cutoff=KERNEL_CUTOFF):
    """Relative size of the component of v outside im ad(x)."""
    xm = _mat(pt) if not isinstance(pt, OrbitPoint) else pt.x
    vm = _mat(v)
    op = _ad_operator(xm)
    w = np.linalg.pinv(op, rcond=kernel_cutoff) @ vm.ravel(order="F")
    return np.linalg.norm(op @ w - vm.ravel(order="F")) / max(np.linalg.norm(vm), 1e-300)


def metric_m(pt, u, v, tangency_tol=TANGENCY_TOL):
    """Riemannian metric m_x(u, v) = b_tau(ad(x)^-1 u, ad(x)^-1 v)."""
    return b_tau(ad_inverse(pt, u, tangency_tol), ad_inverse(pt, v, tangency_tol))


def height(h, x):
    """Real height h_H(x) = b_tau(x, H) = Re f_H(x)."""
    return b_tau(_mat(x), cartan_matrix(h))


@dataclass(frozen=True)
class RootRate:
    """Linearization data of one positive root at a critical point."""

    root: tuple
    rate: float              # alpha(x) alpha(H)
    degenerate: bool
    stable: tuple            # real 2-dim eigenspace for eigenvalue -|rate|
    unstable: tuple


@dataclass(frozen=True)
class LinearizationSpectrum:
    point: OrbitPoint
    rates: tuple

    def eigenvalues(self):
        """Real eigenvalue multiset of dZ on the realified root-space sum."""
        out = []
        for r in self.rates:
            out.extend([r.rate, r.rate, -r.rate, -r.rate])
        return sorted(out)

    def v_minus(self):
        return [v for r in self.rates if not r.degenerate for v in r.stable]

    def v_plus(self):
        return [v for r in self.rates if not r.degenerate for v in r.unstable]


def linearize(pt, h, crit_tol=1e-8):
    """Spectrum of dZ at a critical point.

    dZ_x(v) = -ad(x) ad(H) tau(v) has eigenvalues +/- alpha(x) alpha(H) on
    each realified root pair, the minus sign on the compact generators
    {A_a, Z_a} and the plus sign on the Hermitian ones {S_a, iA_a}.  Roots
    vanishing on x (the minimal orbit is non-regular for n >= 2) are
    reported with rate zero and flagged degenerate.
    """
    zn = b_norm(z_field(pt, h))
    if zn > crit_tol:
        raise NotCriticalError(f"|Z(x)| = {zn:.3e}; not a singularity")
    n = pt.n
    rs = RootSystemAn(n)
    xdiag = np.real(np.diag(pt.x))
    rates = []
    for alpha in rs.positive_roots:
        rate = float(np.real(root_eval(alpha, xdiag) * root_eval(alpha, h)))
        degenerate = abs(rate) < 1e-14
        compact = (rs.a_alpha(alpha), rs.z_alpha(alpha))
        hermit = (rs.s_alpha(alpha), 1j * rs.a_alpha(alpha))
        if rate >= 0:
            stable, unstable = compact, hermit
        else:
            stable, unstable = hermit, compact
        rates.append(
            RootRate(root=alpha, rate=rate, degenerate=degenerate,
                     stable=stable, unstable=unstable)
        )
    return LinearizationSpectrum(point=pt, rates=tuple(rates))


def default_step(n, h):
    """Step of 1e-2 scaled by the stiffest linearization rate."""
    rate = (n + 1.0) * max(abs(root_eval(a, h)) for a in RootSystemAn(n).positive_roots)
    return 1e-2 / rate


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    points: list = field(default_factory=list)
    h_values: list = field(default_factory=list)
    f2_values: list = field(default_factory=list)
    orbit_residuals: list = field(default_factory=list)
    z_norms: list = field(default_factory=list)
    limit_index: int | None = None

    def append(self, t, pt, h):
        f = potential(h, pt)
        self.times.append(t)
        self.points.append(pt)
        self.h_values.append(f.real)
        self.f2_values.append(f.imag)
        self.orbit_residuals.append(pt.residual())
        self.z_norms.append(b_norm(z_field(pt, h)))


def integrate(pt, h, direction="forward", step=None, max_steps=10000, conv_tol=CONV_TOL,
              stabilize="auto"):
    """Flow an orbit point along +/-Z with RK4 plus spectral retraction.

    Stops when |Z| < conv_tol or after max_steps; when converged, the
    trajectory records the 1-based index of the limiting critical point.

    Hermitian initial data stays Hermitian under the exact flow but its
    transverse roundoff grows along saddle passages, so by default such
    trajectories are re-projected onto the Hermitian locus every step
    (``stabilize`` in {"auto", True, False}).
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    sign = 1.0 if direction == "forward" else -1.0
    n = pt.n
    dt = step if step is not None else default_step(n, h)
    hm = cartan_matrix(h)
    if stabilize == "auto":
        stabilize = np.linalg.norm(pt.x - pt.x.conj().T) < 1e-12 * np.linalg.norm(pt.x)

    def rhs(xm):
        return sign * bracket(xm, bracket(tau(xm), hm))

    traj = Trajectory()
    traj.append(0.0, pt, h)
    x = pt
    t = 0.0
    for _ in range(max_steps):
        if traj.z_norms[-1] < conv_tol:
            break
        xm = x.x
        k1 = rhs(xm)
        k2 = rhs(xm + 0.5 * dt * k1)
        k3 = rhs(xm + 0.5 * dt * k2)
        k4 = rhs(xm + dt * k3)
        nxt = xm + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if stabilize:
            nxt = 0.5 * (nxt + nxt.conj().T)
        x = retract(nxt)
        t += dt
        traj.append(t, x, h)
    if traj.z_norms[-1] < conv_tol:
        crits = critical_points(n)
        dists = [np.linalg.norm(x.x - c.x) for c in crits]
        traj.limit_index = int(np.argmin(dists)) + 1
    return traj


def trajectory_csv(traj):
    """CSV dump: t, Re f_H, Im f_H, orbit residual, |Z|, flattened entries."""
    d = traj.points[0].x.shape[0]
    header = ["t", "re_f", "im_f", "orbit_residual", "z_norm"]
    header += [f"{p}_{i}{j}" for i in range(d) for j in range(d) for p in ("re", "im")]
    lines = [",".join(header)]
    for k, pt in enumerate(traj.points):
        row = [traj.times[k], traj.h_values[k], traj.f2_values[k],
               traj.orbit_residuals[k], traj.z_norms[k]]
        for z in pt.x.ravel():
            row.extend([z.real, z.imag])
        lines.append(",".join(format(v, ".17g") for v in row))
    return "\n".join(lines) + "\n"


def nongradient_witness(h, h1, v, w):
    """Closedness defect of the 1-form (., Z) on the ambient algebra.

    Evaluates the antisymmetrized closed form -2<ad(H) ad(H1) tau(w), v>
    at the Cartan basepoint x = H1 (H real diagonal, H1 = i * real
    diagonal); a positive value witnesses that Z is not a gradient for the
    ambient pairing.  Vanishes when v = w or H1 = 0.
    """
    hm = cartan_matrix(h)
    h1m = cartan_matrix(h1)

    def term(a, b):
        return killing_form(bracket(hm, bracket(h1m, tau(b))), a)

    return abs(-2.0 * term(v, w) + 2.0 * term(w, v))


def closedness_defect(x, h, v, w):
    """Exact four-term evaluation of d(., Z) at an arbitrary basepoint."""
    xm, hm = _mat(x), cartan_matrix(h)

    def dz(a):
        return bracket(a, bracket(tau(xm), hm)) + bracket(xm, bracket(tau(a), hm))

    return b_tau(w, dz(v)) - b_tau(v, dz(w))
