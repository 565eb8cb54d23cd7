"""Lagrangian graphs of twisted orthogonal-complement maps.

A diagonal torus element m twists the map [u] -> [u]^perp into
[u] -> m [u]^perp; the graph of the twisted map sits inside the orbit as
the set of chart points Phi([u], m [u]^perp).  For involutive m these
graphs are fixed sets of the anti-linear map x -> m x^dagger m, carry a
real height function, and support the definite restricted Hessians that
make the critical points attractors or repellers inside the graph.
"""

import io
from dataclasses import dataclass

import numpy as np

from .errors import ParityError, SamplingError
from .liecore import (
    RootSystemAn,
    bracket,
    cartan_matrix,
    killing_form,
    minimal_cartan,
    root_eval,
    weyl_action,
)
from .orbit import OrbitPoint, phi_pair, r_w0_basis
from .util import random_unit_vector

REJECT_TOL = 1e-6


@dataclass(frozen=True)
class GraphSpec:
    """Diagonal torus element with unit determinant.

    ``m_diag`` holds the unit-modulus diagonal entries; ``theta`` recovers a
    logarithm (the diagonal of a real Cartan vector H1 with m = exp(iH1)),
    retained for reporting only.  Sign data is always read from m_diag
    directly to avoid branch ambiguity of the logarithm.
    """

    m_diag: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.asarray(self.m_diag, dtype=complex)
        if abs(np.prod(m) - 1.0) > 1e-10:
            raise ValueError(f"det m = {np.prod(m)} is not 1")
        if np.abs(np.abs(m) - 1.0).max() > 1e-10:
            raise ValueError("entries of m must be unit modulus")
        object.__setattr__(self, "m_diag", m)
        m.setflags(write=False)

    @property
    def dim(self):
        return len(self.m_diag)

    @property
    def is_involution(self):
        return bool(np.abs(self.m_diag.imag).max() < 1e-12
                    and np.abs(np.abs(self.m_diag.real) - 1.0).max() < 1e-12)

    @property
    def theta(self):
        return np.angle(self.m_diag)

    def phase(self, alpha):
        """exp(-i alpha_kj(H1)) = conj(m_k) m_j for the root (k, j)."""
        k, j = alpha
        return np.conj(self.m_diag[k - 1]) * self.m_diag[j - 1]


def identity_graph(n):
    return GraphSpec(np.ones(n + 1, dtype=complex), name="id")


def m_j_pm(n, j, sign):
    """Torus involution m_j^+/- attached to the critical point [e_j].

    Entries are +1 before slot j, -1 after it, the slot itself carries the
    superscript sign, and a global prefactor -(+/-)(-1)^j fixes det = 1.
    An odd number of diagonal entries (even n) makes the determinant of
    every m_j^+/- equal to one; at odd n only the sign patterns with an
    even count of -1 entries admit a det-1 representative, which leaves
    m_1^- and m_{n+1}^+ (both scalar), so other combinations are rejected.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    d = n + 1
    if not 1 <= j <= d:
        raise ValueError(f"j must be in 1..{d}")
    if n % 2 == 1 and (j, sign) not in ((1, "-"), (d, "+")):
        raise ParityError(
            f"m_{j}^{sign} has determinant -1 at odd rank n={n}; only m_1^- and "
            f"m_{d}^+ exist in the unit-determinant torus"
        )
    diag = np.where(np.arange(1, d + 1) < j, 1.0, -1.0)
    diag[j - 1] = 1.0 if sign == "+" else -1.0
    pref = (-1.0 if sign == "+" else 1.0) * (-1.0) ** j
    return GraphSpec(pref * diag.astype(complex), name=f"m{j}{sign}")


def _orthonormal_completion(u):
    """Columns [u | basis of u^perp], Gram-Schmidt in the dtype of u.

    Works in extended precision when u is clongdouble, which the linalg
    factorizations do not; near-incident pairs need that headroom.
    """
    d = len(u)
    cols = [u / np.sqrt(np.vdot(u, u).real)]
    for k in range(d):
        v = np.zeros(d, dtype=u.dtype)
        v[k] = 1.0
        for b in cols:
            v = v - np.vdot(b, v) * b
        nrm = np.sqrt(np.vdot(v, v).real)
        if nrm > 1e-8:
            cols.append(v / nrm)
        if len(cols) == d:
            break
    return np.stack(cols, axis=1)


def _assemble_pair(u, normal, hyper):
    """Matrix of the chart point with eigenline u and hyperplane basis
    ``hyper`` whose unit normal is ``normal``.

    In the orthonormal basis {normal, hyper} the matrix is diagonal
    (n, -1, ..., -1) plus a first column nu (u, w_i) with
    nu = (n+1)/(u, normal); assembling through this unitary basis avoids
    the squared conditioning of a direct change-of-basis inversion.
    """
    d = len(u)
    n = d - 1
    t = np.vdot(normal, u)
    nu = (n + 1.0) / t
    m_beta = np.zeros((d, d), dtype=u.dtype)
    m_beta[np.arange(d), np.arange(d)] = -1.0
    m_beta[0, 0] = n
    m_beta[1:, 0] = nu * (hyper.conj().T @ u)
    q = np.concatenate([normal[:, None], hyper], axis=1)
    return q @ m_beta @ q.conj().T, t


def graph_point(u, g, tol=1e-8):
    """Chart point Phi([u], m [u]^perp) on the graph of the twisted map."""
    u = np.asarray(u, dtype=complex)
    u = u / np.linalg.norm(u)
    hyper = g.m_diag[:, None] * r_w0_basis(u)
    x, t = _assemble_pair(u, g.m_diag * u, hyper)
    if abs(t) < tol:
        from .errors import TransversalityError

        raise TransversalityError(f"line lies in the twisted hyperplane ({abs(t):.3e})")
    return OrbitPoint(x=x, line=u, hyper=hyper, transversality=float(abs(t)))


def graph_membership(pt, g):
    """Membership residual max_i |(w_i, m u)| of an orbit point in the graph.

    Zero exactly when the (-1)-eigenspace is the m-twist of the eigenline's
    orthogonal complement; for g = identity this is the Hermitian-ness test.
    """
    mu = g.m_diag * pt.line
    return float(np.abs(pt.hyper.conj().T @ mu).max())


def untwist(pt, g):
    """Pull the hyperplane back by m; graph membership of pt under g equals
    identity membership of the untwisted point."""
    w = np.conj(g.m_diag)[:, None] * pt.hyper
    return phi_pair(pt.line, w)


def graph_tangent_basis(g, j):
    """Tangent vectors of the graph at the critical point [e_j].

    For each root (k, j), k != j (exactly the roots negative on the critical
    diagonal), the generators X_a - e^{-i a(H1)} X_-a and
    i(X_a + e^{-i a(H1)} X_-a) induce the 2n tangent vectors via bracket
    with the critical point.
    """
    d = g.dim
    n = d - 1
    rs = RootSystemAn(n)
    xc = np.diag(np.full(d, -1.0 + 0j))
    xc[j - 1, j - 1] = n
    out = []
    for k in range(1, d + 1):
        if k == j:
            continue
        eps = g.phase((k, j))
        b1 = rs.x_alpha((k, j)) - eps * rs.x_alpha((j, k))
        b2 = 1j * (rs.x_alpha((k, j)) + eps * rs.x_alpha((j, k)))
        out.append(bracket(b1, xc))
        out.append(bracket(b2, xc))
    return out


def graph_generators(g, j):
    """Algebra elements that induce graph_tangent_basis, paired per root."""
    d = g.dim
    rs = RootSystemAn(d - 1)
    gens = []
    for k in range(1, d + 1):
        if k == j:
            continue
        eps = g.phase((k, j))
        gens.append(
            (
                (k, j),
                rs.x_alpha((k, j)) - eps * rs.x_alpha((j, k)),
                1j * (rs.x_alpha((k, j)) + eps * rs.x_alpha((j, k))),
            )
        )
    return gens


def hessian_full(a_elem, b_elem, w, h):
    """Second derivative -<[B, wH0], [A, H]> of the height at wH0."""
    a_elem = np.asarray(a_elem, dtype=complex)
    b_elem = np.asarray(b_elem, dtype=complex)
    n = a_elem.shape[0] - 1
    xc = cartan_matrix(weyl_action(w, minimal_cartan(n)))
    return -killing_form(bracket(b_elem, xc), bracket(a_elem, cartan_matrix(h)))


@dataclass(frozen=True)
class HessianRow:
    k: int
    root: tuple
    alpha_crit: float         # alpha_kj at the critical diagonal, = -(n+1)
    alpha_h: float
    phase: complex            # e^{-i alpha_kj(H1)}, = eps_k eps_j for involutions
    value: complex            # multiplicity 2


@dataclass(frozen=True)
class HessianReport:
    j: int
    graph: GraphSpec
    rows: tuple

    @property
    def definiteness(self):
        vals = np.array([r.value for r in self.rows])
        if np.abs(vals.imag).max() > 1e-10:
            return "complex"
        if np.all(vals.real > 0):
            return "positive"
        if np.all(vals.real < 0):
            return "negative"
        return "indefinite"

    def values(self):
        return [r.value for r in self.rows]


def hessian_restricted(h, j, g):
    """Diagonal restricted Hessian -2 a(wH0) a(H) e^{-i a(H1)} per root (k, j).

    Each value carries multiplicity two (the two generators of the root);
    mixed terms between them vanish.
    """
    d = g.dim
    n = d - 1
    crit = np.full(d, -1.0)
    crit[j - 1] = n
    rows = []
    for k in range(1, d + 1):
        if k == j:
            continue
        alpha = (k, j)
        a_crit = float(root_eval(alpha, crit))
        a_h = float(np.real(root_eval(alpha, h)))
        phase = g.phase(alpha)
        rows.append(
            HessianRow(k=k, root=alpha, alpha_crit=a_crit, alpha_h=a_h,
                       phase=phase, value=-2.0 * a_crit * a_h * phase)
        )
    return HessianReport(j=j, graph=g, rows=tuple(rows))


def hessian_report_csv(reports, h):
    """CSV table: j, sign, k, alpha(wH0), alpha(H), phase, value, definiteness."""
    buf = io.StringIO()
    buf.write("j,sign,k,alpha_crit,alpha_h,eps_k_eps_j,value_re,value_im,definiteness\n")
    for rep in reports:
        sign = rep.graph.name[-1] if rep.graph.name else "?"
        for row in rep.rows:
            buf.write(
                f"{rep.j},{sign},{row.k},{row.alpha_crit:.17g},{row.alpha_h:.17g},"
                f"{row.phase.real:.17g},{row.value.real:.17g},{row.value.imag:.17g},"
                f"{rep.definiteness}\n"
            )
    return buf.getvalue()


def _transversal_unit(rng, weights, reject=REJECT_TOL, budget=200):
    """Random unit vector u with |(u, Du)| above the rejection threshold."""
    d = len(weights)
    for _ in range(budget):
        u = random_unit_vector(rng, d)
        if abs(np.vdot(weights * u, u)) >= reject:
            return u
    raise SamplingError("no transversal sample within the retry budget")


def _measure_imag(u, twist_diag, h):
    """|Im f_H| and |Im diag| of the twisted chart point, in extended
    precision.

    The admission bound 1e-6 on the transversality proxy lets samples come
    within conditioning 1e12 of the incidence divisor, where double
    precision cannot distinguish a genuinely real height from roundoff;
    the measurement therefore runs in clongdouble end to end.
    """
    u = np.asarray(u, dtype=np.clongdouble)
    u = u / np.sqrt(np.vdot(u, u).real)
    d = len(u)
    twisted = np.asarray(twist_diag, dtype=np.clongdouble) * u
    normal = twisted / np.sqrt(np.vdot(twisted, twisted).real)
    hyper = _orthonormal_completion(normal)[:, 1:]
    x, _ = _assemble_pair(u, normal, hyper)
    f = 2.0 * d * np.einsum("i,ii->", np.asarray(h, dtype=np.clongdouble), x)
    return float(abs(f.imag)), float(np.abs(np.diag(x).imag).max())


def reality_check(g, h, samples, rng, reject=REJECT_TOL):
    """Maximal |Im f_H| and |Im diag| over random points of the graph of m.

    For involutive m both are zero in exact arithmetic; the return value
    measures the numerical defect.
    """
    max_im_f = 0.0
    max_im_diag = 0.0
    for _ in range(samples):
        u = _transversal_unit(rng, g.m_diag, reject)
        im_f, im_diag = _measure_imag(u, g.m_diag, h)
        max_im_f = max(max_im_f, im_f)
        max_im_diag = max(max_im_diag, im_diag)
    return {"max_im_f": max_im_f, "max_im_diag": max_im_diag}


def reality_check_diagonal(dvals, h, samples, rng, reject=REJECT_TOL):
    """Same reality measurement for a real-eigenvalue diagonal twist D.

    The twisted graph consists of the chart points Phi([u], (D u)^perp);
    D need not be unitary, only diagonal with real nonzero eigenvalues.
    """
    dvals = np.asarray(dvals, dtype=float)
    if np.abs(dvals).min() < 1e-12:
        raise ValueError("diagonal twist must be invertible")
    max_im_f = 0.0
    max_im_diag = 0.0
    for _ in range(samples):
        u = _transversal_unit(rng, dvals / np.linalg.norm(dvals), reject)
        im_f, im_diag = _measure_imag(u, dvals, h)
        max_im_f = max(max_im_f, im_f)
        max_im_diag = max(max_im_diag, im_diag)
    return {"max_im_f": max_im_f, "max_im_diag": max_im_diag}
