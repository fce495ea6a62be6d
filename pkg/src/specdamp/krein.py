"""Indefinite (Krein) inner-product structure of the phase operator.

On phase space the quadratic form ``[u, v] = <x_u, x_v>_K - <y_u, y_v>``
(stiffness-weighted positions minus plain velocities) makes the phase
operator self-adjoint: ``[A u, v] = [u, A v]`` for all ``u, v``.  That
symmetry forces the familiar indefinite spectral rules checked here:

* eigenvectors for ``lam_i != conj(lam_j)`` are ``[.,.]``-orthogonal,
* eigenvectors of nonreal eigenvalues are neutral (``[v, v] = 0``),
* a real eigenvalue carries a sign type: the Gram matrix of ``[.,.]``
  restricted to its eigenspace is definite (positive/negative type),
  zero (neutral), or indefinite (mixed),
* degeneracy of that Gram is the fingerprint of a Jordan block.

``classify_eigenpairs`` computes these per eigenvalue cluster, and
``decompose`` splits the real spectrum into a fast, negative-type branch
and the rest, reporting the decay cut ``M_cut`` and the numerical
orthogonality between the two halves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, spectrum
from .model import PhaseVector, SystemModel
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__all__ = [
    "IllConditionedCluster",
    "MixedClusterObstruction",
    "ClusterClassification",
    "SignClassification",
    "NondegeneracyReport",
    "Decomposition",
    "indefinite_product",
    "classify_eigenpairs",
    "kernel_gram_nondegeneracy",
    "decompose",
    "phase_symmetry_defect",
]


class IllConditionedCluster(Exception):
    """Kernel-basis Gram of a cluster is numerically unusable."""

    def __init__(self, eigenvalue: complex, detail: str):
        self.eigenvalue = eigenvalue
        super().__init__(f"cluster at {eigenvalue}: {detail}")


class MixedClusterObstruction(Exception):
    """A real eigenvalue of mixed sign type blocks the two-branch split."""

    def __init__(self, eigenvalue: complex):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"real eigenvalue cluster at {eigenvalue} has mixed sign type; "
            "no definite-type spectral split exists"
        )


def indefinite_product(model: SystemModel, u: PhaseVector, v: PhaseVector) -> complex:
    """Krein product ``[u, v]``, linear in ``u`` and conjugate-linear in ``v``."""
    return complex(
        np.vdot(v.position, model.K @ u.position) - np.vdot(v.velocity, u.velocity)
    )


def _energy_sq(model: SystemModel, v: PhaseVector) -> float:
    x, y = v.position, v.velocity
    return float(np.real(np.vdot(x, model.K @ x)) + np.real(np.vdot(y, y)))


@dataclass(frozen=True)
class ClusterClassification:
    """Sign-type verdict for one eigenvalue cluster.

    ``gram`` is the Hermitian matrix of ``[v_i, v_j]`` over an orthonormal
    pencil-kernel basis lifted to phase vectors ``(x_i, lam x_i)``.
    ``margin`` is ``min |eig(gram)| - threshold``; a nonpositive margin
    means the Gram is numerically degenerate.  ``nonpositive_directions``
    counts Gram eigenvalues at or below the neutral threshold.
    """

    eigenvalue: complex
    member_indices: tuple[int, ...]
    is_real: bool
    kernel_dim: int
    jordan_defect: int
    sign_type: str
    neutral_threshold: float
    margin: float
    nonpositive_directions: int
    degenerate: bool
    gram: np.ndarray = field(repr=False)
    gram_eigenvalues: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.member_indices)


@dataclass(frozen=True)
class SignClassification:
    """Per-cluster sign types for a full spectrum."""

    clusters: tuple[ClusterClassification, ...]

    def real_clusters(self) -> tuple[ClusterClassification, ...]:
        return tuple(c for c in self.clusters if c.is_real)

    @property
    def counts(self) -> dict[str, int]:
        out = {"positive": 0, "negative": 0, "neutral": 0, "mixed": 0}
        for c in self.clusters:
            out[c.sign_type] += 1
        return out

    @property
    def total_jordan_defect(self) -> int:
        return sum(c.jordan_defect for c in self.clusters)


def _cluster_gram(
    model: SystemModel,
    lam: complex,
    basis: np.ndarray,
    neutral_tol: float,
):
    dim = basis.shape[1]
    vecs = [PhaseVector(basis[:, i], lam * basis[:, i]) for i in range(dim)]
    gram = np.empty((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            gram[i, j] = indefinite_product(model, vecs[i], vecs[j])
    gram = 0.5 * (gram + gram.conj().T)
    scale = max(_energy_sq(model, v) for v in vecs)
    if not (np.isfinite(scale) and scale > 0.0 and np.all(np.isfinite(gram))):
        raise IllConditionedCluster(lam, "non-finite Gram or zero energy scale")
    tau = neutral_tol * scale
    mu, coeff = np.linalg.eigh(gram)
    return gram, mu, coeff, tau


def _sign_type(mu: np.ndarray, tau: float) -> str:
    if np.all(mu > tau):
        return "positive"
    if np.all(mu < -tau):
        return "negative"
    if np.all(np.abs(mu) <= tau):
        return "neutral"
    return "mixed"


def classify_eigenpairs(
    model: SystemModel,
    pairs,
    tolerances: ToleranceProfile = DEFAULT_TOLERANCES,
) -> SignClassification:
    """Cluster the eigenvalues and sign-classify each cluster's eigenspace.

    ``pairs`` is a :class:`~specdamp.spectrum.SpectrumReport` or a sequence
    of :class:`~specdamp.spectrum.Eigenpair`.  The kernel basis is
    recomputed from the pencil at each cluster representative, so the
    classification does not depend on how the input eigenvectors were
    normalized or paired up inside clusters.
    """
    if isinstance(pairs, spectrum.SpectrumReport):
        pairs = pairs.eigenpairs
    values = np.array([p.value for p in pairs])
    out = []
    for members in spectrum.cluster_eigenvalues(values, tolerances.cluster_tol):
        mem_vals = values[members]
        mean = complex(np.mean(mem_vals))
        if abs(mean.imag) <= tolerances.snap_real_tol * (1.0 + abs(mean)):
            mean = complex(mean.real)
        diameter = float(np.max(np.abs(mem_vals - mean)))
        basis = spectrum.pencil_kernel_basis(
            model, mean, tolerances.rank_tol, max_dim=len(members), diameter=diameter
        )
        gram, mu, _, tau = _cluster_gram(model, mean, basis, tolerances.neutral_tol)
        dim = basis.shape[1]
        margin = float(np.min(np.abs(mu)) - tau)
        out.append(
            ClusterClassification(
                eigenvalue=mean,
                member_indices=tuple(members),
                is_real=(mean.imag == 0.0),
                kernel_dim=dim,
                jordan_defect=len(members) - dim,
                sign_type=_sign_type(mu, tau),
                neutral_threshold=tau,
                margin=margin,
                nonpositive_directions=int(np.count_nonzero(mu <= tau)),
                degenerate=bool(margin <= 0.0),
                gram=gram,
                gram_eigenvalues=mu,
            )
        )
    out.sort(key=lambda c: (c.eigenvalue.real, c.eigenvalue.imag))
    return SignClassification(clusters=tuple(out))


@dataclass(frozen=True)
class NondegeneracyReport:
    """Gram nondegeneracy verdict at one eigenvalue, with a witness if it fails.

    ``witness`` is the phase vector built from the Gram null combination;
    it satisfies ``[w, u] ~ 0`` for every ``u`` in the eigenspace, which is
    exactly the direction along which a Jordan chain continues.  The
    threshold is relative to the eigenvectors' energy scale, not to
    ``||gram||``: a cluster whose whole Gram is tiny is degenerate, and a
    Gram-relative cutoff would wrongly pass it.
    """

    eigenvalue: complex
    kernel_dim: int
    gram: np.ndarray
    min_abs_eigenvalue: float
    threshold: float
    nondegenerate: bool
    witness_coefficients: np.ndarray | None
    witness: PhaseVector | None


def kernel_gram_nondegeneracy(
    model: SystemModel,
    lam: complex,
    cluster=None,
    tolerances: ToleranceProfile = DEFAULT_TOLERANCES,
    max_dim: int | None = None,
    diameter: float = 0.0,
) -> NondegeneracyReport:
    """Test whether ``[.,.]`` restricted to ``ker Q(lam)`` is nondegenerate.

    ``cluster`` may supply the eigenvectors (phase vectors) to use as the
    eigenspace basis; by default an orthonormal kernel basis is recomputed
    from the pencil at ``lam``.
    """
    lam = complex(lam)
    if cluster is not None:
        vecs = list(cluster)
        if not vecs:
            raise ValueError("cluster must contain at least one phase vector")
        basis = np.column_stack([v.position for v in vecs])
    else:
        basis = spectrum.pencil_kernel_basis(
            model, lam, tolerances.rank_tol, max_dim=max_dim, diameter=diameter
        )
    gram, mu, coeff, tau = _cluster_gram(model, lam, basis, tolerances.neutral_tol)
    k = int(np.argmin(np.abs(mu)))
    min_abs = float(np.abs(mu[k]))
    ok = min_abs > tau
    wit_c = wit_v = None
    if not ok:
        wit_c = coeff[:, k]
        x = basis @ wit_c
        wit_v = PhaseVector(x, lam * x)
    return NondegeneracyReport(
        eigenvalue=lam,
        kernel_dim=basis.shape[1],
        gram=gram,
        min_abs_eigenvalue=min_abs,
        threshold=tau,
        nondegenerate=bool(ok),
        witness_coefficients=wit_c,
        witness=wit_v,
    )


@dataclass(frozen=True)
class Decomposition:
    """Two-branch split of the eigenpairs by Krein sign.

    ``h_prime`` collects the eigenpairs of the maximal most-negative run
    of negative-type real clusters (the fast branch); everything else,
    including all nonreal eigenvalues, lands in ``h_doubleprime``.
    ``m_cut`` is the decay cut: every fast eigenvalue satisfies
    ``Re lam <= -m_cut`` and the slowest of them attains it.
    ``cross_gram_norm`` is the largest energy-normalized ``|[v_i, v_j]|``
    across the split (zero in exact arithmetic), and
    ``hprime_definiteness`` is the largest Gram eigenvalue over the fast
    branch (negative exactly when ``[.,.]`` is negative definite there).
    """

    classification: SignClassification
    h_prime: tuple[int, ...]
    h_doubleprime: tuple[int, ...]
    m_cut: float | None
    cross_gram_norm: float
    orthogonal: bool
    hprime_definiteness: float | None
    neutral_real_eigenvalues: tuple[complex, ...]


def decompose(
    model: SystemModel,
    report,
    tolerances: ToleranceProfile = DEFAULT_TOLERANCES,
    classification: SignClassification | None = None,
) -> Decomposition:
    """Split the spectrum into the negative-type fast branch and the rest.

    Raises :class:`MixedClusterObstruction` when some real cluster has
    mixed sign type, because then no invariant-subspace split by sign
    exists.  Real neutral clusters (Jordan blocks at critical damping) do
    not raise; they are routed to the slow branch and reported.
    """
    if isinstance(report, spectrum.SpectrumReport):
        pairs = report.eigenpairs
    else:
        pairs = tuple(report)
    if classification is None:
        classification = classify_eigenpairs(model, pairs, tolerances)

    real = [c for c in classification.clusters if c.is_real]
    real.sort(key=lambda c: c.eigenvalue.real)
    for c in real:
        if c.sign_type == "mixed":
            raise MixedClusterObstruction(c.eigenvalue)

    prefix: list[ClusterClassification] = []
    for c in real:
        if c.sign_type == "negative":
            prefix.append(c)
        else:
            break
    hprime = tuple(sorted(i for c in prefix for i in c.member_indices))
    hsecond = tuple(i for i in range(len(pairs)) if i not in set(hprime))
    m_cut = -max(c.eigenvalue.real for c in prefix) if prefix else None
    hp_max = max(float(np.max(c.gram_eigenvalues)) for c in prefix) if prefix else None
    neutral = tuple(c.eigenvalue for c in real if c.sign_type == "neutral")

    cross = 0.0
    for i in hprime:
        vi = pairs[i].vector
        ei = _energy_sq(model, vi)
        for j in hsecond:
            vj = pairs[j].vector
            g = abs(indefinite_product(model, vi, vj))
            cross = max(cross, g / np.sqrt(ei * _energy_sq(model, vj)))

    return Decomposition(
        classification=classification,
        h_prime=hprime,
        h_doubleprime=hsecond,
        m_cut=m_cut,
        cross_gram_norm=float(cross),
        orthogonal=bool(cross <= tolerances.orth_tol),
        hprime_definiteness=hp_max,
        neutral_real_eigenvalues=neutral,
    )


def phase_symmetry_defect(model: SystemModel) -> float:
    """Asymmetry of ``J S`` for the energy-similarity transform of the phase operator.

    With ``S = diag(K^{1/2}, I) A diag(K^{-1/2}, I)`` and ``J = diag(I, -I)``,
    the product ``J S = [[0, K^{1/2}], [K^{1/2}, C]]`` is symmetric exactly
    when the phase operator is self-adjoint in the Krein product.  Returns
    ``||J S - (J S)^T||_F / ||J S||_F``.
    """
    root, _ = linalg.spd_sqrt_pair(model.K)
    n = model.n
    js = np.zeros((2 * n, 2 * n))
    js[:n, n:] = root
    js[n:, :n] = root
    js[n:, n:] = model.C
    return float(np.linalg.norm(js - js.T) / max(np.linalg.norm(js), 1e-300))
