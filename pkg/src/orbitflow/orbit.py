"""The minimal adjoint orbit of sl(n+1, C).

The orbit of H0 = diag(n, -1, ..., -1) is the isospectral set of traceless
matrices with a simple eigenvalue n and eigenvalue -1 of multiplicity n.
Points are represented in the transversal-pair chart: an eigenline in P^n
together with a transversal hyperplane, glued by the linear map that acts
as n on the line and as -1 on the hyperplane.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import MembershipError, ShapeError, StepSizeError, TransversalityError, UnsupportedOrbitError
from .liecore import cartan_matrix, hermitian_form, killing_form, minimal_cartan
from .util import gram_schmidt_hermitian

TRANSVERSALITY_TOL = 1e-8
MEMBERSHIP_TOL = 1e-8
DRIFT_LIMIT = 0.5


@dataclass(frozen=True)
class OrbitPoint:
    """Orbit point with its cached eigenline/hyperplane splitting.

    ``line`` is a unit vector spanning the eigenline for eigenvalue n,
    ``hyper`` holds an orthonormal basis of the (-1)-eigenspace in its
    columns, and ``transversality`` is |det [line | hyper]|, which is 1
    exactly when the line is Hermitian-orthogonal to the hyperplane.
    """

    x: np.ndarray
    line: np.ndarray
    hyper: np.ndarray
    transversality: float

    def __post_init__(self):
        for arr in (self.x, self.line, self.hyper):
            arr.setflags(write=False)

    @property
    def n(self):
        return self.x.shape[0] - 1

    def residual(self):
        return membership_residual(self.x)

    def to_json(self):
        entries = [[float(z.real), float(z.imag)] for z in self.x.ravel()]
        return {"n": self.n, "entries": entries}

    @staticmethod
    def from_json(obj):
        d = obj["n"] + 1
        flat = np.array([re + 1j * im for re, im in obj["entries"]])
        return retract(flat.reshape(d, d))


def membership_residual(x):
    """Frobenius residual of the minimal polynomial (x - n)(x + 1)."""
    x = np.asarray(x, dtype=complex)
    d = x.shape[0]
    n = d - 1
    return np.linalg.norm(x @ x - (n - 1) * x - n * np.eye(d))


def phi_pair(line, hyper, tol=TRANSVERSALITY_TOL):
    """Orbit point of a transversal (line, hyperplane) pair.

    Raises TransversalityError when the line lies in the hyperplane within
    tolerance; the stored transversality value is the conditioning proxy.
    """
    u = np.asarray(line, dtype=complex).reshape(-1)
    u = u / np.linalg.norm(u)
    w = np.asarray(hyper, dtype=complex)
    if w.ndim != 2 or w.shape[0] != u.shape[0] or w.shape[1] != u.shape[0] - 1:
        raise ShapeError(f"hyperplane basis has shape {w.shape}, expected ({len(u)}, {len(u)-1})")
    w, _ = np.linalg.qr(w)
    basis = np.hstack([u[:, None], w])
    trans = abs(np.linalg.det(basis))
    if trans < tol:
        raise TransversalityError(f"line lies in hyperplane within tolerance ({trans:.3e})")
    n = len(u) - 1
    diag = np.full(len(u), -1.0 + 0j)
    diag[0] = n
    x = basis @ np.diag(diag) @ np.linalg.inv(basis)
    return OrbitPoint(x=x, line=u, hyper=w, transversality=trans)


def split_eigen(x, tol=MEMBERSHIP_TOL):
    """Eigenline and hyperplane of an orbit matrix (inverse of phi_pair).

    Raises MembershipError unless the spectrum is {n (simple), -1} within
    tolerance.
    """
    x = np.asarray(x, dtype=complex)
    d = x.shape[0]
    n = d - 1
    vals, vecs = np.linalg.eig(x)
    order = np.argsort(np.abs(vals - n))
    drift = max(abs(vals[order[0]] - n), np.abs(vals[order[1:]] + 1.0).max())
    if drift > tol:
        raise MembershipError(f"spectrum {np.sort_complex(vals)} is not {{{n}, -1}} (drift {drift:.3e})")
    u = vecs[:, order[0]]
    u = u / np.linalg.norm(u)
    w, _ = np.linalg.qr(vecs[:, order[1:]])
    return u, w


def retract(x, drift_limit=DRIFT_LIMIT):
    """Snap the spectrum of a near-orbit matrix back to {n, -1}.

    The canonical projection onto the isospectral set: diagonalize, replace
    the eigenvalues by their targets, reassemble.  Raises StepSizeError when
    an eigenvalue drifted further than ``drift_limit`` from its target.
    """
    x = np.asarray(x, dtype=complex)
    d = x.shape[0]
    n = d - 1
    vals, vecs = np.linalg.eig(x)
    order = np.argsort(np.abs(vals - n))
    drift = max(abs(vals[order[0]] - n), np.abs(vals[order[1:]] + 1.0).max())
    if drift > drift_limit:
        raise StepSizeError(
            f"eigenvalue drift {drift:.3e} exceeds {drift_limit}; reduce the integration step"
        )
    u = vecs[:, order[0]]
    u = u / np.linalg.norm(u)
    w, _ = np.linalg.qr(vecs[:, order[1:]])
    return phi_pair(u, w)


def r_w0_basis(line):
    """Orthonormal basis of the Hermitian orthogonal complement of a line.

    This is the right translation by the longest Weyl element in the pair
    chart: P^n -> P^n*, [u] -> [u]^perp.
    """
    u = np.asarray(line, dtype=complex).reshape(-1, 1)
    u = u / np.linalg.norm(u)
    full, _, _ = np.linalg.svd(u, full_matrices=True)
    # first left-singular vector spans [u]; the rest span the complement
    return full[:, 1:]


def potential(h, x):
    """Height superpotential f_H(x) = <H, x>; complex valued."""
    xm = x.x if isinstance(x, OrbitPoint) else np.asarray(x, dtype=complex)
    return killing_form(cartan_matrix(h), xm)


def critical_points(generator):
    """Critical points of the superpotential on the minimal orbit.

    ``generator`` is either the rank n or the vector diag(n, -1, ..., -1);
    any other diagonal raises UnsupportedOrbitError.  Returns the n+1
    diagonal matrices carrying n in slot j, i.e. the Weyl orbit of H0.
    """
    if np.isscalar(generator):
        n = int(generator)
    else:
        h = np.asarray(generator, dtype=float)
        n = len(h) - 1
        if not np.allclose(np.sort(h), np.sort(minimal_cartan(n)), atol=1e-12) or h[0] != n:
            raise UnsupportedOrbitError(f"only the minimal orbit diag({n}, -1, ...) is supported")
    d = n + 1
    eye = np.eye(d, dtype=complex)
    points = []
    for j in range(d):
        cols = [k for k in range(d) if k != j]
        points.append(phi_pair(eye[:, j], eye[:, cols]))
    return points


def tangent_frame(pt):
    """Hermitian-orthonormal complex basis of the tangent space im ad(x).

    In the eigenbasis B = [line | hyper] the tangent space is spanned by the
    first-row and first-column elementary matrices, i.e. the rank-one maps
    between the eigenline and the hyperplane.
    """
    basis = np.hstack([pt.line[:, None], pt.hyper])
    binv = np.linalg.inv(basis)
    d = basis.shape[0]
    cands = []
    for k in range(1, d):
        cands.append(np.outer(basis[:, 0], binv[k, :]))
        cands.append(np.outer(basis[:, k], binv[0, :]))
    return gram_schmidt_hermitian(cands, hermitian_form)


def tangent_project(pt, v):
    """Hermitian-orthogonal projection of an ambient matrix onto im ad(x)."""
    out = np.zeros_like(pt.x)
    for e in tangent_frame(pt):
        out = out + hermitian_form(v, e) * e
    return out


def point_json_dump(points, path_or_file, extra=None):
    """Dump orbit points (plus optional parallel per-point fields) as JSON."""
    records = []
    for k, pt in enumerate(points):
        rec = pt.to_json()
        if extra:
            rec.update({key: vals[k] for key, vals in extra.items()})
        records.append(rec)
    payload = json.dumps(records, indent=1)
    if hasattr(path_or_file, "write"):
        path_or_file.write(payload)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(payload)
