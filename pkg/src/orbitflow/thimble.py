"""Real Lagrangian thimbles traced inside graph Lagrangians.

The real part f1 of the superpotential restricts to a Morse function on the
graph of a twisted complement map; near a critical point with definite
restricted Hessian its sublevel (or superlevel) ball is a Lagrangian
thimble.  Tracing follows the ambient gradient of f1, which is tangent to
the graph because the imaginary part is constant there.
"""

import io
import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DensityWarning,
    GraphIntegrityError,
    MembershipError,
    NearCriticalError,
)
from .liecore import b_norm, b_tau, cartan_matrix, root_eval
from .orbit import (
    OrbitPoint,
    potential,
    r_w0_basis,
    retract,
    tangent_frame,
    tangent_project,
)
from .graphs import graph_membership, graph_point, graph_tangent_basis, m_j_pm
from .util import gram_schmidt_real, realify, subspace_intersection_real, unrealify

RESIDUAL_LIMIT = 1e-5
SEED_RESIDUAL = 1e-7


def kaehler_gradients(pt, h):
    """Ambient-metric gradients (F1, F2) of Re f_H and Im f_H on the orbit.

    Both are Hermitian-orthogonal projections of constant matrices (H and
    iH); holomorphy forces F2 = i F1, which callers may verify.
    """
    hm = cartan_matrix(h)
    return tangent_project(pt, hm), tangent_project(pt, 1j * hm)


def fixed_set_basis(g):
    """Real basis of the anti-linear fixed set {v : v = m v^dagger m}.

    For involutive m the graph of the twisted complement map lies inside
    this real-linear subspace, which is what makes its secants exactly
    isotropic.
    """
    eps = g.m_diag.real
    d = g.dim
    out = []
    for k in range(d - 1):
        m = np.zeros((d, d), dtype=complex)
        m[k, k], m[k + 1, k + 1] = 1.0, -1.0
        out.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            e = eps[i] * eps[j]
            m1 = np.zeros((d, d), dtype=complex)
            m1[i, j], m1[j, i] = 1.0, e
            m2 = np.zeros((d, d), dtype=complex)
            m2[i, j], m2[j, i] = 1j, -1j * e
            out.extend([m1, m2])
    return out


def graph_tangent_frame(pt, g, fd_step=1e-6):
    """b_tau-orthonormal real frame of the graph tangent space at a point.

    Involutive twists use the exact intersection of the orbit tangent space
    with the fixed set above; general torus twists fall back to central
    differences through the pair-chart parametrization.
    """
    n = pt.n
    if g.is_involution:
        real_tangent = [m for e in tangent_frame(pt) for m in (e, 1j * e)]
        rows = subspace_intersection_real(
            realify(np.array(real_tangent)), realify(np.array(fixed_set_basis(g))), 1e-8
        )
        mats = list(unrealify(rows, n + 1)) if rows.size else []
    else:
        u = pt.line
        compl = r_w0_basis(u)
        mats = []
        for k in range(n):
            for phase in (1.0, 1j):
                delta = phase * compl[:, k]
                plus = graph_point(u + fd_step * delta, g).x
                minus = graph_point(u - fd_step * delta, g).x
                mats.append((plus - minus) / (2.0 * fd_step))
    frame = gram_schmidt_real(mats, b_tau)
    if len(frame) != 2 * n:
        raise GraphIntegrityError(
            f"graph tangent frame has dimension {len(frame)}, expected {2 * n}"
        )
    return frame


@dataclass(frozen=True)
class FGReport:
    residual: float      # |F1 - (G1 - i G2)| / |F1|
    g2_ratio: float      # |G2| / |F1|
    f1_tangency: float   # |F1 - G1| / |F1|


def fg_decomposition_check(pt, g, h, membership_tol=1e-6, fd_step=1e-6):
    """Verify F1 = G1 - i G2 at a graph point.

    G1, G2 are the gradients of the restricted real and imaginary parts,
    obtained by projecting F1, F2 onto the graph tangent frame.
    """
    res = graph_membership(pt, g)
    if res > membership_tol:
        raise MembershipError(f"graph membership residual {res:.3e} exceeds tolerance")
    f1, f2 = kaehler_gradients(pt, h)
    frame = graph_tangent_frame(pt, g, fd_step)
    g1 = sum(b_tau(f1, e) * e for e in frame)
    g2 = sum(b_tau(f2, e) * e for e in frame)
    nf1 = b_norm(f1)
    return FGReport(
        residual=b_norm(f1 - (g1 - 1j * g2)) / nf1,
        g2_ratio=b_norm(g2) / nf1,
        f1_tangency=b_norm(f1 - g1) / nf1,
    )


def horizontal_lift_check(pt, h, min_grad=1e-8):
    """Solve df(W) = 1 for W = a F1 + b J F1; returns (a, b).

    F1 and J F1 span the symplectic orthogonal of the fibre, and reality of
    the lifted velocity forces b = 0 with a = 1/|F1|^2.
    """
    hm = cartan_matrix(h)
    f1, _ = kaehler_gradients(pt, h)
    if b_norm(f1) < min_grad:
        raise NearCriticalError("gradient too small to condition the lift")
    jf1 = 1j * f1
    mat = np.array(
        [
            [b_tau(f1, hm), b_tau(jf1, hm)],
            [b_tau(f1, 1j * hm), b_tau(jf1, 1j * hm)],
        ]
    )
    a, b = np.linalg.solve(mat, np.array([1.0, 0.0]))
    return float(a), float(b)


@dataclass(frozen=True)
class ThimbleSample:
    point: OrbitPoint
    f1: float
    f2: float
    graph_residual: float
    seed_index: int      # direction on the unit sphere of the tangent space
    flow_index: int      # one (direction, radius) flow line
    arc: float


# ---------------------------------------------------------------------------
# batched flow engine: many seeds stepped together in stacked matrix arrays


def _split_batch(xs):
    d = xs.shape[-1]
    n = d - 1
    vals, vecs = np.linalg.eig(xs)
    order = np.argsort(np.abs(vals - n), axis=1)
    u = np.take_along_axis(vecs, order[:, None, 0:1], axis=2)[:, :, 0]
    u = u / np.linalg.norm(u, axis=1, keepdims=True)
    rest = np.take_along_axis(vecs, order[:, None, 1:], axis=2)
    w, _ = np.linalg.qr(rest)
    return u, w


def _retract_batch(xs):
    d = xs.shape[-1]
    n = d - 1
    u, w = _split_batch(xs)
    basis = np.concatenate([u[:, :, None], w], axis=2)
    diag = np.full(d, -1.0 + 0j)
    diag[0] = n
    bd = basis * diag[None, None, :]
    return np.linalg.solve(basis.transpose(0, 2, 1), bd.transpose(0, 2, 1)).transpose(0, 2, 1)


def _grad_f1_batch(xs, h):
    """Batched ambient gradient of Re f_H via rank-one chart frames.

    The tangent space at each point is spanned by the rank-one maps between
    the eigenline and the hyperplane, so Gram matrices and pairings against
    the diagonal H reduce to inner products of vectors.
    """
    d = xs.shape[-1]
    c = 2.0 * d
    u, w = _split_batch(xs)
    basis = np.concatenate([u[:, :, None], w], axis=2)
    binv = np.linalg.inv(basis)
    a_vecs, b_vecs = [], []
    for k in range(1, d):
        a_vecs.append(basis[:, :, 0])
        b_vecs.append(binv[:, k, :])
        a_vecs.append(basis[:, :, k])
        b_vecs.append(binv[:, 0, :])
    av = np.stack(a_vecs, axis=1)
    bv = np.stack(b_vecs, axis=1)
    m1 = bv @ bv.conj().transpose(0, 2, 1)
    m2 = av @ av.conj().transpose(0, 2, 1)
    gram = c * (m1 * m2).conj()
    rhs = c * np.einsum("bpi,i,bpi->bp", av.conj(), np.asarray(h, complex), bv.conj())
    coef = np.linalg.solve(gram, rhs[..., None])[..., 0]
    return np.einsum("bp,bpi,bpj->bij", coef, av, bv)


def _symmetrize_batch(xs, g):
    m = g.m_diag
    return 0.5 * (xs + m[None, :, None] * xs.conj().transpose(0, 2, 1) * m[None, None, :])


def _rk4_batch(xs, h, dts, orient):
    def f(y):
        return orient * _grad_f1_batch(y, h)

    k1 = f(xs)
    k2 = f(xs + 0.5 * dts * k1)
    k3 = f(xs + 0.5 * dts * k2)
    k4 = f(xs + dts * k3)
    return xs + (dts / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _f1_batch(xs, h):
    d = xs.shape[-1]
    return 2.0 * d * np.einsum("i,bii->b", np.asarray(h, complex), xs).real


def _grad_speed_batch(xs, h):
    """b_tau norm squared of grad f1, the descent speed |df1/dt|."""
    d = xs.shape[-1]
    grad = _grad_f1_batch(xs, h)
    return 2.0 * d * np.einsum("bij,bij->b", grad, grad.conj()).real


def default_thimble_step(h, j):
    """Step resolving the stiffest Hessian rate per unit b_tau length."""
    h = np.asarray(h, dtype=float)
    d = len(h)
    rate = 2.0 * d * max(abs(root_eval((k, j), h)) for k in range(1, d + 1) if k != j)
    return 0.1 * (2.0 * d * d) / rate


def trace_thimble(
    j,
    sign,
    h,
    c_offset=0.5,
    directions=64,
    step=None,
    radii=8,
    rng=None,
    record_sep=0.03,
    max_steps=4000,
    residual_limit=RESIDUAL_LIMIT,
):
    """Trace the real Lagrangian thimble of [e_j] inside its definite graph.

    Seeds the unit sphere of the graph tangent space at the critical point,
    scales by a geometric radius ladder, and transports every seed along
    -grad f1 (negative definite case, sign '-') or +grad f1 (sign '+')
    until f1 reaches the level f1([e_j]) -/+ c_offset, collecting samples
    along the way.  Each step is retracted to the orbit and re-symmetrized
    into the graph's fixed set, so samples sit on the graph to machine
    precision; a residual above ``residual_limit`` raises
    GraphIntegrityError.
    """
    h = np.asarray(h, dtype=float)
    n = len(h) - 1
    d = n + 1
    g = m_j_pm(n, j, sign)
    rng = np.random.default_rng(0) if rng is None else rng

    xc = np.diag(np.full(d, -1.0 + 0j))
    xc[j - 1, j - 1] = n
    f1_c = float(_f1_batch(xc[None], h)[0])
    descending = sign == "-"
    c_level = f1_c - c_offset if descending else f1_c + c_offset
    orient = -1.0 if descending else 1.0

    frame = gram_schmidt_real(graph_tangent_basis(g, j), b_tau)
    dirs = rng.standard_normal((directions, len(frame)))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    # stiffest Hessian rate per unit b_tau length sets radius cap and step
    rate = 2.0 * d * max(abs(root_eval((k, j), h)) for k in range(1, d + 1) if k != j)
    unit_rate = rate / (2.0 * d * d)
    r_cap = min(0.5, np.sqrt(1.8 * c_offset / unit_rate))
    if step is None:
        step = default_thimble_step(h, j)

    def inside(x):
        f1 = _f1_batch(x[None], h)[0]
        return f1 > c_level if descending else f1 < c_level

    seeds, seed_dir = [], []
    for di, coeff in enumerate(dirs):
        v = sum(ck * e for ck, e in zip(coeff, frame))
        r_top = r_cap
        for _ in range(40):
            cand = retract(xc + r_top * v)
            if inside(cand.x) and graph_membership(cand, g) < SEED_RESIDUAL:
                break
            r_top *= 0.5
        for r in np.geomspace(min(1e-4, r_top / 10.0), r_top, radii):
            seeds.append(retract(xc + r * v).x)
            seed_dir.append(di)

    xs = _symmetrize_batch(np.array(seeds), g)
    seed_dir = np.array(seed_dir)
    nflow = xs.shape[0]

    samples = []

    def record(indices, mats, times):
        u, w = _split_batch(mats)
        basis = np.concatenate([u[:, :, None], w], axis=2)
        trans = np.abs(np.linalg.det(basis))
        for pos, i in enumerate(indices):
            pt = OrbitPoint(
                x=mats[pos].copy(),
                line=u[pos].copy(),
                hyper=w[pos].copy(),
                transversality=float(trans[pos]),
            )
            f = potential(h, pt)
            samples.append(
                ThimbleSample(
                    point=pt,
                    f1=float(f.real),
                    f2=float(f.imag),
                    graph_residual=graph_membership(pt, g),
                    seed_index=int(seed_dir[i]),
                    flow_index=int(i),
                    arc=float(times[pos]),
                )
            )

    arcs = np.zeros(nflow)
    last_rec = xs.copy()
    record(range(nflow), xs, arcs)

    active = np.ones(nflow, dtype=bool)
    for _ in range(max_steps):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        prev = xs[idx]
        stepped = _symmetrize_batch(_retract_batch(_rk4_batch(prev, h, step, orient)), g)
        f1_vals = _f1_batch(stepped, h)
        crossed = f1_vals < c_level if descending else f1_vals > c_level

        alive = idx[~crossed]
        if alive.size:
            xs[alive] = stepped[~crossed]
            arcs[alive] += step
            gap = np.linalg.norm((xs[alive] - last_rec[alive]).reshape(alive.size, -1), axis=1)
            due = alive[gap >= record_sep]
            if due.size:
                record(due, xs[due], arcs[due])
                last_rec[due] = xs[due]

        if crossed.any():
            sub = idx[crossed]
            base = prev[crossed]
            # Newton in the substep length: d f1/dtau = orient * |grad f1|^2
            tau = ((c_level - _f1_batch(base, h)) / (orient * _grad_speed_batch(base, h)))
            cur = base
            for _ in range(4):
                cur = _symmetrize_batch(
                    _retract_batch(_rk4_batch(base, h, tau[:, None, None], orient)), g
                )
                tau = tau + (c_level - _f1_batch(cur, h)) / (orient * _grad_speed_batch(cur, h))
                tau = np.maximum(tau, 0.0)
            xs[sub] = cur
            arcs[sub] += tau
            record(sub, cur, arcs[sub])
            active[sub] = False

    if active.any():
        raise GraphIntegrityError(
            f"{int(active.sum())} flows failed to reach the level in {max_steps} steps"
        )

    worst = max(s.graph_residual for s in samples)
    if worst > residual_limit:
        bad = max(samples, key=lambda s: s.graph_residual)
        raise GraphIntegrityError(
            f"flow left the graph: residual {worst:.3e} at seed {bad.seed_index}, f1={bad.f1:.6f}"
        )
    return samples


def boundary_samples(samples, c_level, tol=1e-6):
    return [s for s in samples if abs(s.f1 - c_level) <= tol]


def containment_probe(j, sign, h, offsets=(0.25, 0.5, 1.0, 2.0, 4.0), directions=6,
                      radii=3, rng=None, residual_limit=RESIDUAL_LIMIT, max_steps=4000):
    """Largest probed level offset at which the traced ball stays on-graph.

    How far the thimble-in-graph containment persists is not known a
    priori; this reports the measured range instead of assuming one.
    Returns (largest passing offset or None, {offset: worst residual or
    None when the trace failed}).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    results = {}
    best = None
    for off in offsets:
        try:
            samples = trace_thimble(j, sign, h, c_offset=off, directions=directions,
                                    radii=radii, rng=rng, residual_limit=residual_limit,
                                    max_steps=max_steps)
        except GraphIntegrityError:
            results[off] = None
            break
        results[off] = max(s.graph_residual for s in samples)
        best = off
    return best, results


def lagrangian_check(samples, k=4, step_hint=None, density_factor=10.0):
    """Max normalized |omega| over finite-difference tangent pairs.

    Tangents at each sample are secants to its k nearest neighbours; on an
    exactly Lagrangian sample cloud the symplectic pairing of any two
    secants vanishes.
    """
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    mats = np.array([s.point.x for s in samples])
    nsamp, d = mats.shape[0], mats.shape[-1]
    kk = min(k, nsamp - 1)
    cloud = realify(mats)
    tree = cKDTree(cloud)
    dist, idx = tree.query(cloud, k=kk + 1)
    if step_hint is not None and np.median(dist[:, 1]) > density_factor * step_hint:
        warnings.warn(
            f"nearest-neighbour spacing {np.median(dist[:, 1]):.3e} exceeds "
            f"{density_factor} x step",
            DensityWarning,
        )
    flat = mats.reshape(nsamp, -1)
    diffs = flat[idx[:, 1:]] - flat[:, None, :]
    gram = 2.0 * d * np.einsum("nad,nbd->nab", diffs, diffs.conj())
    norms = np.sqrt(np.abs(np.einsum("naa->na", gram).real))
    denom = norms[:, :, None] * norms[:, None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.abs(gram.imag) / np.where(denom > 0, denom, np.inf)
    return float(np.nanmax(ratio))


def thimble_json(samples, meta):
    payload = {
        "meta": meta,
        "samples": [
            {
                **s.point.to_json(),
                "f1": s.f1,
                "f2": s.f2,
                "graph_residual": s.graph_residual,
                "seed_index": s.seed_index,
                "arc": s.arc,
            }
            for s in samples
        ],
    }
    return json.dumps(payload, indent=1)


def thimble_csv(samples):
    buf = io.StringIO()
    buf.write("seed_index,arc,f1,f2,graph_residual\n")
    for s in samples:
        buf.write(
            f"{s.seed_index},{s.arc:.17g},{s.f1:.17g},{s.f2:.17g},{s.graph_residual:.17g}\n"
        )
    return buf.getvalue()
