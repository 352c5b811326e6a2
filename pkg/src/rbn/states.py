"""State families, projective observables and measurement-setting streams."""
from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import InvalidArgumentError, InvalidDimsError, InvalidOperatorError, \
    NotPositiveSemidefiniteError

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)

STATE_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on ``prod(dims)``."""
    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidOperatorError(f"density matrix must be square, got {m.shape}")
        if int(np.prod(dims)) != m.shape[0]:
            raise InvalidDimsError(f"dims {dims} do not match matrix size {m.shape[0]}")
        if not linalg.is_hermitian(m, STATE_ATOL):
            raise InvalidOperatorError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > STATE_ATOL:
            raise InvalidOperatorError(f"trace {tr} != 1")
        if np.linalg.eigvalsh(m).min() < -linalg.EIG_CLAMP:
            raise NotPositiveSemidefiniteError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_vector(cls, psi, dims) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    def reduce(self, keep: Sequence[int]) -> "DensityMatrix":
        keep = sorted(keep)
        return DensityMatrix(linalg.partial_trace(self.matrix, self.dims, keep),
                             tuple(self.dims[k] for k in keep))

    def entropy(self) -> float:
        return linalg.von_neumann_entropy(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def permute(self, order: Sequence[int]) -> "DensityMatrix":
        """Reorder sites so that new site ``k`` is old site ``order[k]``."""
        n = self.n_sites
        order = list(order)
        t = self.matrix.reshape(self.dims + self.dims)
        t = t.transpose(order + [n + k for k in order])
        return DensityMatrix(t.reshape(self.dim, self.dim), tuple(self.dims[k] for k in order))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix), self.dims + other.dims)


def bloch_vector(theta, phi) -> np.ndarray:
    """Unit vectors for spherical angles; trailing axis holds ``(x, y, z)``.

    Components below ``1e-15`` in magnitude are snapped to zero so that grid
    points such as ``theta = pi`` or ``theta = pi/2`` land exactly on an axis.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    n = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
    n[np.abs(n) < 1e-15] = 0.0
    return n


@dataclass(frozen=True)
class BlochDirection:
    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise InvalidArgumentError(f"theta={self.theta} outside [0, pi]")
        if not (0.0 <= self.phi < 2 * math.pi):
            raise InvalidArgumentError(f"phi={self.phi} outside [0, 2pi)")

    @property
    def vector(self) -> np.ndarray:
        return bloch_vector(self.theta, self.phi)

    def antipode(self) -> "BlochDirection":
        return BlochDirection(math.pi - self.theta, (self.phi + math.pi) % (2 * math.pi))


@dataclass(frozen=True, eq=False)
class ProjectiveObservable:
    """Complete set of orthogonal projectors on one site.

    ``direction`` is set for qubit observables built from a Bloch vector.
    """
    projectors: tuple[np.ndarray, ...]
    direction: BlochDirection | None = field(default=None)

    def __post_init__(self):
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        if not projs:
            raise InvalidOperatorError("observable needs at least one projector")
        d = projs[0].shape[0]
        atol = STATE_ATOL
        for i, p in enumerate(projs):
            if p.shape != (d, d):
                raise InvalidOperatorError("projectors must share one square shape")
            if not linalg.is_hermitian(p, atol) or not np.allclose(p @ p, p, atol=atol, rtol=0):
                raise InvalidOperatorError(f"projector {i} is not a Hermitian idempotent")
            for q in projs[:i]:
                if not np.allclose(p @ q, 0, atol=atol, rtol=0):
                    raise InvalidOperatorError("projectors are not mutually orthogonal")
        if not np.allclose(sum(projs), np.eye(d), atol=atol, rtol=0):
            raise InvalidOperatorError("projectors do not resolve the identity")
        for p in projs:
            p.setflags(write=False)
        object.__setattr__(self, "projectors", projs)

    @property
    def site_dim(self) -> int:
        return self.projectors[0].shape[0]

    def same_measurement(self, other: "ProjectiveObservable", atol: float = 1e-10) -> bool:
        """True if both describe the same projector set, ignoring labels."""
        if len(self.projectors) != len(other.projectors) or self.site_dim != other.site_dim:
            return False
        remaining = list(other.projectors)
        for p in self.projectors:
            for j, q in enumerate(remaining):
                if np.allclose(p, q, atol=atol, rtol=0):
                    del remaining[j]
                    break
            else:
                return False
        return True


def bloch_observable(direction: BlochDirection) -> ProjectiveObservable:
    """Eigenprojectors ``(1 +- n.sigma)/2`` of the spin along ``direction``."""
    n = direction.vector
    ns = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return ProjectiveObservable(((SIGMA_I + ns) / 2, (SIGMA_I - ns) / 2), direction)


AXES = {
    "x": BlochDirection(math.pi / 2, 0.0),
    "y": BlochDirection(math.pi / 2, math.pi / 2),
    "z": BlochDirection(0.0, 0.0),
}


def pauli_observable(axis: str) -> ProjectiveObservable:
    """Spin observable along ``'x'``, ``'y'`` or ``'z'``."""
    try:
        return bloch_observable(AXES[axis.lower()])
    except KeyError:
        raise InvalidArgumentError(f"unknown axis {axis!r}") from None


def computational_basis(d: int) -> ProjectiveObservable:
    return ProjectiveObservable(tuple(np.diag(np.eye(d)[i]).astype(complex) for i in range(d)))


@dataclass(frozen=True, eq=False)
class Setting:
    """One observable per site; the measurement context ``{A, B, (C)}``."""
    observables: tuple[ProjectiveObservable, ...]

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))

    def __len__(self):
        return len(self.observables)

    def __getitem__(self, i) -> ProjectiveObservable:
        return self.observables[i]

    @classmethod
    def from_directions(cls, directions: Sequence[BlochDirection]) -> "Setting":
        return cls(tuple(bloch_observable(d) for d in directions))

    @classmethod
    def from_axes(cls, axes: str | Sequence[str]) -> "Setting":
        """``Setting.from_axes("zzx")`` or ``Setting.from_axes(["z", "z", "x"])``."""
        return cls(tuple(pauli_observable(a) for a in axes))

    @property
    def directions(self) -> tuple[BlochDirection, ...] | None:
        dirs = tuple(o.direction for o in self.observables)
        return None if any(d is None for d in dirs) else dirs

    def angles_in_pi(self) -> list[float]:
        """``[theta_0, phi_0, theta_1, phi_1, ...]`` in units of pi."""
        dirs = self.directions
        if dirs is None:
            raise InvalidArgumentError("setting has observables without a Bloch direction")
        out = []
        for d in dirs:
            out += [d.theta / math.pi, d.phi / math.pi]
        return out

    def same_measurements(self, other: "Setting") -> bool:
        return len(self) == len(other) and all(
            a.same_measurement(b) for a, b in zip(self.observables, other.observables))


# --------------------------------------------------------------------------
# state families

def ghz_state() -> DensityMatrix:
    psi = np.zeros(8)
    psi[0b000] = psi[0b111] = 1.0
    return DensityMatrix.from_vector(psi, (2, 2, 2))


def w_state() -> DensityMatrix:
    psi = np.zeros(8)
    psi[0b100] = psi[0b010] = psi[0b001] = 1.0
    return DensityMatrix.from_vector(psi, (2, 2, 2))


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    d = int(np.prod(dims))
    return DensityMatrix(np.eye(d) / d, tuple(dims))


def noisy_state(chi: str, noise: float) -> DensityMatrix:
    """``noise * 1/8 + (1 - noise) |chi><chi|`` for ``chi`` in ``{"ghz", "w"}``."""
    if not 0.0 <= noise <= 1.0:
        raise InvalidArgumentError(f"noise {noise} outside [0, 1]")
    pure = {"ghz": ghz_state, "w": w_state}.get(chi.lower())
    if pure is None:
        raise InvalidArgumentError(f"unknown state family {chi!r}")
    m = noise * np.eye(8) / 8 + (1.0 - noise) * pure().matrix
    return DensityMatrix(m, (2, 2, 2))


def _check_probabilities(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or p.min() < 0 or abs(p.sum() - 1) > 1e-12:
        raise InvalidArgumentError(f"not a probability vector: {p}")
    return p


def classical_state(p, bases: Sequence[ProjectiveObservable]) -> DensityMatrix:
    """``sum_i p_i P^0_i (x) P^1_i (x) ...`` with the i-th projector of each basis."""
    p = _check_probabilities(p)
    if any(len(b.projectors) < p.size for b in bases):
        raise InvalidArgumentError("more weights than projectors in a basis")
    m = sum(pi * linalg.kron_all(*(b.projectors[i] for b in bases)) for i, pi in enumerate(p))
    return DensityMatrix(m, tuple(b.site_dim for b in bases))


def cc_state(p, basis_a: ProjectiveObservable, basis_b: ProjectiveObservable) -> DensityMatrix:
    return classical_state(p, (basis_a, basis_b))


def ccc_state(p, bases: Sequence[ProjectiveObservable]) -> DensityMatrix:
    if len(bases) != 3:
        raise InvalidArgumentError("ccc_state needs exactly three bases")
    return classical_state(p, bases)


def schmidt_pure_state(xi) -> DensityMatrix:
    """``sum_i sqrt(xi_i) |iii>`` in the computational basis.

    Weights of length at most 2 give three qubits; longer ones give qudits of
    dimension ``len(xi)``.
    """
    xi = _check_probabilities(xi)
    d = max(2, xi.size)
    psi = np.zeros(d ** 3)
    for i, w in enumerate(xi):
        psi[i * (d * d + d + 1)] = math.sqrt(w)
    return DensityMatrix.from_vector(psi, (d, d, d))


def random_density_matrix(dims: Sequence[int], rng: np.random.Generator,
                          rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed mixed state."""
    d = int(np.prod(dims))
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix(m / np.trace(m).real, tuple(dims))


def random_pure_state(dims: Sequence[int], rng: np.random.Generator) -> DensityMatrix:
    d = int(np.prod(dims))
    return DensityMatrix.from_vector(rng.normal(size=d) + 1j * rng.normal(size=d), tuple(dims))


# --------------------------------------------------------------------------
# setting streams

def parse_increment(increment) -> float:
    """Accept radians or strings like ``"pi/8"``; must divide pi exactly."""
    if isinstance(increment, str):
        s = increment.replace(" ", "").lower()
        if s.startswith("pi/"):
            try:
                k = int(s[3:])
            except ValueError:
                raise InvalidArgumentError(f"bad increment {increment!r}") from None
            if k < 1:
                raise InvalidArgumentError(f"bad increment {increment!r}")
            return math.pi / k
        if s == "pi":
            return math.pi
        try:
            increment = float(s)
        except ValueError:
            raise InvalidArgumentError(f"bad increment {increment!r}") from None
    increment = float(increment)
    if increment <= 0:
        raise InvalidArgumentError("increment must be positive")
    k = math.pi / increment
    if abs(k - round(k)) > 1e-9:
        raise InvalidArgumentError(f"increment {increment} does not divide pi")
    return math.pi / round(k)


def grid_angles(increment, paper_faithful: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Polar and azimuthal angles of the grid directions, theta-major order.

    ``theta`` runs over ``0, inc, ..., pi`` inclusive and ``phi`` over
    ``0, inc, ..., 2pi - inc``. Without ``paper_faithful`` the list keeps
    exactly one representative per distinct projector pair: the north pole
    once, no south hemisphere, and half of the equator.
    """
    inc = parse_increment(increment)
    k = round(math.pi / inc)
    thetas, phis = [], []
    for i in range(k + 1):
        for j in range(2 * k):
            if not paper_faithful:
                if i == 0 and j > 0:
                    continue
                if 2 * i > k:
                    continue
                if 2 * i == k and j >= k:
                    continue
            thetas.append(i * inc)
            phis.append(j * inc)
    return np.array(thetas), np.array(phis)


class SettingGrid:
    """Deterministic lexicographic product of grid directions over all sites.

    Site 0 is the slowest index. Indexing and iteration build
    :class:`Setting` objects lazily; :attr:`vectors` exposes the raw Bloch
    vectors for vectorized evaluation.
    """

    def __init__(self, increment=math.pi / 8, sites: int = 3, paper_faithful: bool = True):
        if sites not in (2, 3):
            raise InvalidArgumentError("grid supports 2 or 3 sites")
        self.increment = parse_increment(increment)
        self.sites = sites
        self.paper_faithful = paper_faithful
        self.thetas, self.phis = grid_angles(self.increment, paper_faithful)
        self.vectors = bloch_vector(self.thetas, self.phis)

    @property
    def n_directions(self) -> int:
        return len(self.thetas)

    def __len__(self) -> int:
        return self.n_directions ** self.sites

    def direction(self, k: int) -> BlochDirection:
        return BlochDirection(float(self.thetas[k]), float(self.phis[k]))

    def __getitem__(self, index: int) -> Setting:
        if not 0 <= index < len(self):
            raise IndexError(index)
        idx = np.unravel_index(index, (self.n_directions,) * self.sites)
        return Setting.from_directions([self.direction(int(k)) for k in idx])

    def __iter__(self) -> Iterator[Setting]:
        for i in range(len(self)):
            yield self[i]

    def describe(self) -> str:
        k = round(math.pi / self.increment)
        return f"grid(pi/{k}, {'faithful' if self.paper_faithful else 'dedupe'})"


def setting_grid(increment=math.pi / 8, sites: int = 3, paper_faithful: bool = True) -> SettingGrid:
    return SettingGrid(increment, sites, paper_faithful)


class RandomSettings:
    """Seeded stream of settings with directions uniform on the sphere.

    Directions are generated in fixed blocks of ``BLOCK`` rows; block ``b``
    draws from ``PCG64(SeedSequence(seed, spawn_key=(b,)))``, so any index
    range can be regenerated independently and identically.
    """
    BLOCK = 1 << 16

    def __init__(self, count: int, seed: int, sites: int = 3):
        if count < 1:
            raise InvalidArgumentError("count must be positive")
        if sites not in (2, 3):
            raise InvalidArgumentError("random settings support 2 or 3 sites")
        self.count = int(count)
        self.seed = int(seed)
        self.sites = sites

    def __len__(self) -> int:
        return self.count

    def _block(self, b: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(b,))))
        cos_t = rng.uniform(-1.0, 1.0, size=(self.BLOCK, self.sites))
        phi = rng.uniform(0.0, 2 * math.pi, size=(self.BLOCK, self.sites))
        return np.arccos(cos_t), phi

    def angles(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        """``(theta, phi)`` arrays of shape ``(stop - start, sites)``."""
        stop = min(stop, self.count)
        th, ph = [], []
        for b in range(start // self.BLOCK, (stop - 1) // self.BLOCK + 1):
            t, p = self._block(b)
            lo = max(start - b * self.BLOCK, 0)
            hi = min(stop - b * self.BLOCK, self.BLOCK)
            th.append(t[lo:hi])
            ph.append(p[lo:hi])
        return np.concatenate(th), np.concatenate(ph)

    def __getitem__(self, index: int) -> Setting:
        if not 0 <= index < self.count:
            raise IndexError(index)
        t, p = self.angles(index, index + 1)
        return Setting.from_directions([BlochDirection(float(a), float(b)) for a, b in zip(t[0], p[0])])

    def __iter__(self) -> Iterator[Setting]:
        for start in range(0, self.count, self.BLOCK):
            t, p = self.angles(start, start + self.BLOCK)
            for row_t, row_p in zip(t, p):
                yield Setting.from_directions(
                    [BlochDirection(float(a), float(b)) for a, b in zip(row_t, row_p)])

    def describe(self) -> str:
        return f"random({self.count}, seed={self.seed})"


def random_settings(count: int, seed: int, sites: int = 3) -> RandomSettings:
    return RandomSettings(count, seed, sites)


def increment_label(increment: float) -> str:
    """``pi/8`` style label for a grid increment."""
    frac = Fraction(increment / math.pi).limit_denominator(64)
    return "pi" if frac == 1 else f"pi/{frac.denominator}"
