"""
Quantum objects for classical-quantum channels.
States, c-q channels, Choi states, permutation actions, pinching maps and
type classes, plus the transformations between them.

Product alphabets and product output spaces are indexed lexicographically with the
last factor running fastest, matching numpy's C order.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from cqstein.core.config import settings
from cqstein.core.errors import (
    DimensionGuard,
    DimensionMismatch,
    EnumerationTooLarge,
    NotHermitian,
    NotPSD,
    ShapeMismatch,
    TraceMismatch,
)
from cqstein.core.linalg import eigh_hermitian, from_eig, hermitize, kron_all

logger = logging.getLogger(__name__)


# ============== Domain Types ==============

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semi-definite, unit-trace matrix."""
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def eigvalsh(self) -> np.ndarray:
        return eigh_hermitian(self.matrix)[0]

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class CqChannel:
    """
    Classical-quantum channel x -> omega_x.

    `outputs` has shape (|X|, d_A, d_A). For n-fold product channels the factor
    sizes are kept in `alphabet_dims` / `out_dims` so permutations can act on them.
    """
    outputs: np.ndarray
    alphabet_dims: Tuple[int, ...] = ()
    out_dims: Tuple[int, ...] = ()

    def __post_init__(self):
        outputs = np.asarray(self.outputs, dtype=complex)
        if outputs.ndim != 3 or outputs.shape[1] != outputs.shape[2]:
            raise ShapeMismatch(f"outputs must have shape (|X|, d, d), got {outputs.shape}")
        object.__setattr__(self, "outputs", outputs)
        if not self.alphabet_dims:
            object.__setattr__(self, "alphabet_dims", (outputs.shape[0],))
        if not self.out_dims:
            object.__setattr__(self, "out_dims", (outputs.shape[1],))
        if math.prod(self.alphabet_dims) != outputs.shape[0]:
            raise ShapeMismatch("alphabet_dims do not multiply to the alphabet size")
        if math.prod(self.out_dims) != outputs.shape[1]:
            raise ShapeMismatch("out_dims do not multiply to the output dimension")

    @property
    def alphabet_size(self) -> int:
        return int(self.outputs.shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.outputs.shape[1])

    @property
    def n_factors(self) -> int:
        return len(self.alphabet_dims)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.alphabet_size, self.out_dim

    def output(self, x: int) -> DensityMatrix:
        return DensityMatrix(self.outputs[x])

    def letter(self, string: Sequence[int]) -> int:
        """Index of a product-alphabet string."""
        return int(np.ravel_multi_index(tuple(string), self.alphabet_dims))

    def string(self, x: int) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(x, self.alphabet_dims))

    def tensor_power(self, n: int) -> "CqChannel":
        result = self
        for _ in range(n - 1):
            result = tensor_channel(result, self)
        return result


@dataclass(frozen=True, eq=False)
class ChoiState:
    """Normalized Choi state (1/|X|) sum_x |x><x| (x) omega_x."""
    in_dim: int
    out_dim: int
    matrix: np.ndarray

    def block(self, x: int, y: Optional[int] = None) -> np.ndarray:
        y = x if y is None else y
        d = self.out_dim
        return self.matrix[x * d:(x + 1) * d, y * d:(y + 1) * d]

    def blocks(self) -> np.ndarray:
        return np.stack([self.block(x) for x in range(self.in_dim)])

    @property
    def density(self) -> DensityMatrix:
        return DensityMatrix(self.matrix)


@dataclass(frozen=True, eq=False)
class PinchingMap:
    """Dephasing rho -> sum_j E_j rho E_j with respect to eigenprojectors of a state."""
    dim: int
    projectors: Tuple[np.ndarray, ...]
    eigenvalues: Tuple[float, ...] = ()

    @property
    def k(self) -> int:
        return len(self.projectors)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        return sum((p @ rho @ p for p in self.projectors), np.zeros_like(rho, dtype=complex))


@dataclass(frozen=True, eq=False)
class BlockPinchingMap:
    """
    Pinching of a block-diagonal state sum_x |x><x| (x) S_x.

    Eigenvalues are clustered across all blocks, so applying it blockwise equals the
    pinching of the full block-diagonal matrix without forming it.
    """
    block_vectors: Tuple[np.ndarray, ...]
    block_labels: Tuple[np.ndarray, ...]
    k: int

    def apply_blocks(self, blocks: np.ndarray) -> np.ndarray:
        out = np.zeros_like(blocks, dtype=complex)
        for x, (v, labels) in enumerate(zip(self.block_vectors, self.block_labels)):
            rotated = v.conj().T @ blocks[x] @ v
            same = labels[:, None] == labels[None, :]
            out[x] = v @ (rotated * same) @ v.conj().T
        return out


@dataclass(frozen=True)
class TypeClass:
    """Occupation vector of a classical string and the number of strings sharing it."""
    n: int
    counts: Tuple[int, ...]
    multiplicity: int

    def representative(self) -> Tuple[int, ...]:
        """The lexicographically smallest string of this type."""
        return tuple(itertools.chain.from_iterable([a] * c for a, c in enumerate(self.counts)))


@dataclass(frozen=True)
class PermutationAction:
    """
    Permutation of n tensor factors; factor j is moved to position perm[j].
    """
    n: int
    local_dim: int
    perm: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        perm = tuple(self.perm) if self.perm else tuple(range(self.n))
        if sorted(perm) != list(range(self.n)):
            raise DimensionMismatch(f"perm is not a bijection on {self.n} elements: {perm}")
        object.__setattr__(self, "perm", perm)

    def inverse(self) -> "PermutationAction":
        inv = [0] * self.n
        for j, pj in enumerate(self.perm):
            inv[pj] = j
        return PermutationAction(self.n, self.local_dim, tuple(inv))

    def permute_string(self, string: Sequence[int]) -> Tuple[int, ...]:
        out = [0] * self.n
        for j, pj in enumerate(self.perm):
            out[pj] = string[j]
        return tuple(out)

    def unitary(self, local_dim: Optional[int] = None) -> np.ndarray:
        """The permutation matrix P(pi) on (C^d)^{(x) n}."""
        d = self.local_dim if local_dim is None else local_dim
        total = d ** self.n
        axes = self.inverse().perm
        idx = np.arange(total).reshape((d,) * self.n)
        moved = np.transpose(idx, axes).reshape(-1)
        p = np.zeros((total, total))
        p[np.arange(total), moved] = 1.0
        return p


def compose_permutations(first: PermutationAction, second: PermutationAction) -> PermutationAction:
    """
    Permutation whose action on channels equals acting with `second` and then with
    `first`: permute_channel(compose(p1, p2), F) == permute_channel(p1, permute_channel(p2, F)).
    """
    if first.n != second.n:
        raise DimensionMismatch("permutations act on different numbers of copies")
    perm = tuple(second.perm[first.perm[j]] for j in range(first.n))
    return PermutationAction(first.n, first.local_dim, perm)


# ============== Validation ==============

def validate_density(
    raw: np.ndarray,
    *,
    hermitian_tol: Optional[float] = None,
    psd_tol: Optional[float] = None,
    trace_tol: Optional[float] = None,
) -> DensityMatrix:
    """
    Check and repair a candidate density matrix.

    The matrix is symmetrized and eigenvalues in [-psd_tol, 0] are clamped to zero;
    anything more negative is an error.
    """
    hermitian_tol = settings.HERMITIAN_TOL if hermitian_tol is None else hermitian_tol
    psd_tol = settings.PSD_TOL if psd_tol is None else psd_tol
    trace_tol = settings.TRACE_TOL if trace_tol is None else trace_tol

    a = np.asarray(raw, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got shape {a.shape}")

    deviation = float(np.max(np.abs(a - a.conj().T), initial=0.0))
    if deviation > hermitian_tol:
        raise NotHermitian(
            f"matrix deviates from its adjoint by {deviation:.3e}",
            {"deviation": deviation},
        )

    w, v = eigh_hermitian(a)
    if w.size and w[0] < -psd_tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is negative", {"min_eigenvalue": float(w[0])})
    if w.size and w[0] < 0:
        w = np.clip(w, 0.0, None)
        a = from_eig(w, v)
    else:
        a = hermitize(a)

    trace = float(np.real(np.trace(a)))
    if abs(trace - 1.0) > trace_tol:
        raise TraceMismatch(f"trace is {trace!r}, expected 1", {"trace": trace})
    return DensityMatrix(a)


def make_channel(
    outputs: Sequence[np.ndarray],
    alphabet_dims: Sequence[int] = (),
    out_dims: Sequence[int] = (),
) -> CqChannel:
    """Build a channel, validating every output as a density matrix."""
    checked = [validate_density(o).matrix for o in outputs]
    if len({m.shape for m in checked}) > 1:
        raise ShapeMismatch("channel outputs have different dimensions")
    return CqChannel(np.stack(checked), tuple(alphabet_dims), tuple(out_dims))


# ============== Channel operations ==============

def cq_apply(channel: CqChannel, rho: DensityMatrix, ref_dim: int = 1) -> DensityMatrix:
    """Apply a c-q channel to a state on R (x) X; the result lives on R (x) A."""
    k = channel.alphabet_size
    if rho.dim != ref_dim * k:
        raise DimensionMismatch(
            f"input dimension {rho.dim} does not factor as ref_dim {ref_dim} x |X| {k}"
        )
    t = rho.matrix.reshape(ref_dim, k, ref_dim, k)
    out = np.zeros((ref_dim * channel.out_dim,) * 2, dtype=complex)
    for x in range(k):
        block = t[:, x, :, x]
        if np.any(block):
            out += np.kron(block, channel.outputs[x])
    return validate_density(out)


def choi(channel: CqChannel) -> ChoiState:
    """Normalized Choi state of a c-q channel."""
    k, d = channel.shape
    mat = np.zeros((k * d, k * d), dtype=complex)
    for x in range(k):
        mat[x * d:(x + 1) * d, x * d:(x + 1) * d] = channel.outputs[x] / k
    return ChoiState(k, d, mat)


def channel_from_choi(state: ChoiState, block_tol: Optional[float] = None) -> CqChannel:
    """Recover omega_x = |X| * block_x; off-diagonal blocks must vanish."""
    block_tol = settings.BLOCK_TOL if block_tol is None else block_tol
    k, d = state.in_dim, state.out_dim
    mask = np.kron(np.eye(k), np.ones((d, d)))
    leak = float(np.max(np.abs(state.matrix * (1 - mask)), initial=0.0))
    if leak > block_tol:
        raise ShapeMismatch(f"Choi state is not classical on the input register (leak {leak:.3e})")
    return CqChannel(k * state.blocks())


def is_constant(channel: CqChannel) -> bool:
    """True when the outputs are a broadcast view of a single state."""
    return channel.outputs.strides[0] == 0


def tensor_channel(a: CqChannel, b: CqChannel) -> CqChannel:
    """Product channel with outputs omega_(x,y) = omega_x (x) omega_y."""
    ka, da = a.shape
    kb, db = b.shape
    if is_constant(a) and is_constant(b):
        single = np.kron(a.outputs[0], b.outputs[0])
        out = np.broadcast_to(single, (ka * kb,) + single.shape)
        return CqChannel(out, a.alphabet_dims + b.alphabet_dims, a.out_dims + b.out_dims)
    out = np.einsum("xij,ykl->xyikjl", a.outputs, b.outputs).reshape(ka * kb, da * db, da * db)
    return CqChannel(out, a.alphabet_dims + b.alphabet_dims, a.out_dims + b.out_dims)


def tensor_power(channel: CqChannel, n: int) -> CqChannel:
    return channel.tensor_power(n)


def mix_channels(weights: Sequence[float], channels: Sequence[CqChannel]) -> CqChannel:
    """Convex combination of channels of equal shape."""
    shapes = {c.shape for c in channels}
    if len(shapes) != 1:
        raise ShapeMismatch(f"cannot mix channels of shapes {sorted(shapes)}")
    w = np.asarray(weights, dtype=float)
    out = np.einsum("c,cxij->xij", w, np.stack([c.outputs for c in channels]))
    first = channels[0]
    return CqChannel(out, first.alphabet_dims, first.out_dims)


def compose_classical(channel: CqChannel, relabel: Sequence[int]) -> CqChannel:
    """Precompose with the deterministic classical map x -> relabel[x]."""
    if len(relabel) != channel.alphabet_size:
        raise ShapeMismatch("relabel map must cover the whole alphabet")
    if len(set(relabel)) == 1:
        single = channel.outputs[relabel[0]]
        outputs = np.broadcast_to(single, (channel.alphabet_size,) + single.shape)
        return CqChannel(outputs, channel.alphabet_dims, channel.out_dims)
    return CqChannel(channel.outputs[list(relabel)], channel.alphabet_dims, channel.out_dims)


def _check_product(channel: CqChannel, pi: PermutationAction) -> None:
    if channel.n_factors != pi.n:
        raise DimensionMismatch(
            f"channel has {channel.n_factors} factors, permutation acts on {pi.n}"
        )
    if len(set(channel.alphabet_dims)) != 1 or len(set(channel.out_dims)) != 1:
        raise DimensionMismatch("permutations need identical per-copy alphabets and outputs")
    if channel.out_dims[0] != pi.local_dim:
        raise DimensionMismatch(
            f"permutation local_dim {pi.local_dim} differs from per-copy output {channel.out_dims[0]}"
        )


def permute_channel(pi: PermutationAction, channel: CqChannel) -> CqChannel:
    """(pi . F)(|x><x|) = P_A(pi)^dagger F(|pi(x)><pi(x)|) P_A(pi)."""
    _check_product(channel, pi)
    p = pi.unitary()
    out = np.empty_like(channel.outputs)
    for x in range(channel.alphabet_size):
        moved = channel.letter(pi.permute_string(channel.string(x)))
        out[x] = p.T @ channel.outputs[moved] @ p
    return CqChannel(out, channel.alphabet_dims, channel.out_dims)


def all_permutations(n: int, local_dim: int) -> List[PermutationAction]:
    return [PermutationAction(n, local_dim, perm) for perm in itertools.permutations(range(n))]


def symmetrize_channel(channel: CqChannel, max_n: Optional[int] = None) -> CqChannel:
    """Average of pi . F over the symmetric group."""
    max_n = settings.SYMMETRIZE_MAX_N if max_n is None else max_n
    n = channel.n_factors
    if n > max_n:
        raise EnumerationTooLarge(f"symmetrizing over S_{n} exceeds the n <= {max_n} guard")
    perms = all_permutations(n, channel.out_dims[0])
    total = np.zeros_like(channel.outputs)
    for pi in perms:
        total += permute_channel(pi, channel).outputs
    return CqChannel(total / len(perms), channel.alphabet_dims, channel.out_dims)


def maximally_entangled_input(alphabet_size: int, basis: Optional[np.ndarray] = None) -> DensityMatrix:
    """Phi on R (x) X with |Phi> = k^{-1/2} sum_i (U|i>)_R (x) |i>_X."""
    k = alphabet_size
    u = np.eye(k, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    psi = np.zeros(k * k, dtype=complex)
    for i in range(k):
        psi += np.kron(u[:, i], np.eye(k)[i])
    psi /= math.sqrt(k)
    return DensityMatrix(np.outer(psi, psi.conj()))


# ============== Pinching ==============

def _cluster_labels(w: np.ndarray, cluster_tol: float) -> np.ndarray:
    """Label sorted eigenvalues; a new cluster starts at a gap above tol * max|w|."""
    order = np.argsort(w)
    scale = max(float(np.max(np.abs(w), initial=0.0)), np.finfo(float).tiny)
    labels = np.empty(w.size, dtype=int)
    current = 0
    for pos, idx in enumerate(order):
        if pos > 0 and w[idx] - w[order[pos - 1]] > cluster_tol * scale:
            current += 1
        labels[idx] = current
    return labels


def pinching_of(sigma: DensityMatrix, cluster_tol: Optional[float] = None) -> PinchingMap:
    """Pinching map with respect to the eigenprojectors of sigma."""
    cluster_tol = settings.PINCHING_CLUSTER_TOL if cluster_tol is None else cluster_tol
    w, v = eigh_hermitian(sigma.matrix)
    labels = _cluster_labels(w, cluster_tol)
    projectors = []
    values = []
    for label in range(int(labels.max()) + 1 if labels.size else 0):
        cols = v[:, labels == label]
        projectors.append(cols @ cols.conj().T)
        values.append(float(np.mean(w[labels == label])))
    return PinchingMap(sigma.dim, tuple(projectors), tuple(values))


def block_pinching_of(
    sigma_blocks: np.ndarray, cluster_tol: Optional[float] = None
) -> BlockPinchingMap:
    """Pinching with respect to a block-diagonal state given by its diagonal blocks."""
    cluster_tol = settings.PINCHING_CLUSTER_TOL if cluster_tol is None else cluster_tol
    decompositions = [eigh_hermitian(b) for b in sigma_blocks]
    all_w = np.concatenate([w for w, _ in decompositions])
    labels = _cluster_labels(all_w, cluster_tol)
    block_labels = []
    start = 0
    for w, _ in decompositions:
        block_labels.append(labels[start:start + w.size])
        start += w.size
    k = int(labels.max()) + 1 if labels.size else 0
    return BlockPinchingMap(tuple(v for _, v in decompositions), tuple(block_labels), k)


def spectrum_size(blocks: np.ndarray, cluster_tol: Optional[float] = None) -> int:
    """Number of distinct eigenvalues of a block-diagonal operator."""
    cluster_tol = settings.PINCHING_CLUSTER_TOL if cluster_tol is None else cluster_tol
    w = np.concatenate([eigh_hermitian(b)[0] for b in blocks])
    return int(_cluster_labels(w, cluster_tol).max()) + 1


# ============== Type classes ==============

def _compositions(n: int, k: int):
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def enumerate_types(n: int, k: int, max_types: Optional[int] = None) -> List[TypeClass]:
    """All occupation vectors of length-n strings over a k-letter alphabet."""
    max_types = settings.TYPES_MAX if max_types is None else max_types
    if n < 1 or k < 1:
        raise DimensionMismatch("enumerate_types needs n >= 1 and k >= 1")
    count = math.comb(n + k - 1, k - 1)
    if count > max_types:
        raise EnumerationTooLarge(f"{count} type classes exceed the guard of {max_types}")
    types = []
    for counts in _compositions(n, k):
        multiplicity = math.factorial(n)
        for c in counts:
            multiplicity //= math.factorial(c)
        types.append(TypeClass(n, counts, multiplicity))
    return types


def type_representatives(
    channel: CqChannel, n: int, max_types: Optional[int] = None
) -> Tuple[CqChannel, List[TypeClass]]:
    """
    E^n restricted to one representative string per type class.

    Letter i of the returned channel is types[i]; E^n itself is never formed, so only
    the output dimension d^n is allocated per letter.
    """
    types = enumerate_types(n, channel.alphabet_size, max_types)
    outputs = np.stack([kron_all(channel.outputs[a] for a in t.representative()) for t in types])
    return CqChannel(outputs, (), (channel.out_dim,) * n), types


# ============== Random instances ==============

def random_density(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    rho = g @ g.conj().T
    return DensityMatrix(hermitize(rho / np.trace(rho).real))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(unitary_group.rvs(d, random_state=rng), dtype=complex)


def random_pure(d: int, rng: np.random.Generator) -> DensityMatrix:
    return random_density(d, rng, rank=1)


def random_channel(
    alphabet_size: int, out_dim: int, rng: np.random.Generator, rank: Optional[int] = None
) -> CqChannel:
    return CqChannel(np.stack([random_density(out_dim, rng, rank).matrix for _ in range(alphabet_size)]))


def random_diagonal_channel(alphabet_size: int, out_dim: int, rng: np.random.Generator) -> CqChannel:
    """Channel whose outputs are all diagonal in the computational basis."""
    probs = rng.dirichlet(np.ones(out_dim), size=alphabet_size)
    return CqChannel(np.stack([np.diag(p).astype(complex) for p in probs]))


def random_cc_input(alphabet_size: int, rng: np.random.Generator) -> Tuple[np.ndarray, DensityMatrix]:
    """Classical-classical input sum_x p(x) |x><x|_R (x) |x><x|_X and its distribution."""
    p = rng.dirichlet(np.ones(alphabet_size))
    k = alphabet_size
    mat = np.zeros((k * k, k * k), dtype=complex)
    for x in range(k):
        i = x * k + x
        mat[i, i] = p[x]
    return p, DensityMatrix(mat)


def product_state(states: Sequence[DensityMatrix]) -> DensityMatrix:
    return DensityMatrix(kron_all(s.matrix for s in states))


def check_dimension(dim: int, limit: Optional[int] = None, what: str = "output") -> None:
    limit = settings.MAX_OUTPUT_DIM if limit is None else limit
    if dim > limit:
        raise DimensionGuard(f"{what} dimension {dim} exceeds the guard of {limit}")
