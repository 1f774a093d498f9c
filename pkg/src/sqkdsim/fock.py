"""Truncated multimode Fock spaces with dense, exact linear algebra.

Photons live in two-mode ("dual-rail") pairs, one pair per party that can
hold light.  Every photon additionally carries a tag: an internal label such
as a frequency bin that threshold detectors ignore but that distinguishes
photons perfectly in principle.  An optional finite-dimensional probe factor
models an eavesdropper's private memory.  Amplitudes are stored densely over
all occupation configurations with at most ``n_max`` photons in total, so
every operation reduces to ordinary complex matrix algebra and probabilities
come out exact to machine precision.

Conventions used throughout the package:

* ``slot(pair, mode, tag)`` flattens to ``(pair * 2 + mode) * tag_dim + tag``
  where ``mode`` is the photonic qubit value (0 or 1) the mode encodes.
* A pair's occupation is written ``|m1, m0>`` with the count of the mode-1
  slot first, matching the usual ket notation for dual-rail states.
* The dual-rail Hadamard transform stores the minus-mode count in the mode-1
  slot and the plus-mode count in the mode-0 slot.
* Truncation never fails silently: operations that can push weight past
  ``n_max`` report it through :attr:`FockVector.leaked`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, sqrt
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ContractViolation",
    "ModeSystem",
    "FockVector",
    "DensityOperator",
    "vacuum",
    "basis_vector",
    "single_photon",
    "plus_state",
    "creation_operator",
    "annihilation_operator",
    "apply_creation",
    "apply_matrix",
    "apply_truncating_unitary",
    "pair_mode_transform",
    "hadamard_matrix",
    "hadamard_change",
    "tensor",
    "outer",
    "partial_trace",
    "trace_distance",
]

ATOL_UNITARY = 1e-12


class ContractViolation(RuntimeError):
    """An internal simulator invariant failed; indicates a bug, not bad data."""


@dataclass(frozen=True)
class ModeSystem:
    """Shape of a truncated Fock space.

    ``num_pairs`` two-mode pairs share a global photon budget ``n_max``.
    Every mode is replicated ``tag_dim`` times, once per tag value.
    ``probe_dim == 0`` means the system carries no probe factor; any positive
    value adjoins a probe of that dimension.  ``num_pairs == 0`` is allowed
    and describes a bare probe space.
    """

    num_pairs: int
    tag_dim: int = 1
    n_max: int = 2
    probe_dim: int = 0

    def __post_init__(self) -> None:
        if self.num_pairs < 0 or self.tag_dim < 1 or self.n_max < 0 or self.probe_dim < 0:
            raise ValueError(f"invalid mode system {self}")

    # -- geometry ---------------------------------------------------------

    @property
    def n_slots(self) -> int:
        return self.num_pairs * 2 * self.tag_dim

    @property
    def probe_levels(self) -> int:
        """Dimension of the probe factor (1 when no probe is present)."""
        return self.probe_dim if self.probe_dim else 1

    @property
    def dim(self) -> int:
        return len(self.occupations()) * self.probe_levels

    def slot(self, pair: int, mode: int, tag: int = 0) -> int:
        if not (0 <= pair < self.num_pairs):
            raise ValueError(f"pair {pair} out of range for {self.num_pairs} pairs")
        if mode not in (0, 1):
            raise ValueError(f"mode must be 0 or 1, got {mode}")
        if not (0 <= tag < self.tag_dim):
            raise ValueError(f"tag {tag} out of range for tag_dim {self.tag_dim}")
        return (pair * 2 + mode) * self.tag_dim + tag

    def mode_slots(self, pair: int, mode: int) -> tuple[int, ...]:
        return tuple(self.slot(pair, mode, t) for t in range(self.tag_dim))

    def pair_slots(self, pair: int) -> tuple[int, ...]:
        return self.mode_slots(pair, 0) + self.mode_slots(pair, 1)

    # -- basis ------------------------------------------------------------

    def occupations(self) -> tuple[tuple[int, ...], ...]:
        """All occupation tuples with total count <= n_max, vacuum first."""
        return _occupations(self.n_slots, self.n_max)

    def occupation_index(self, occ: Sequence[int]) -> int:
        try:
            return _occupation_ranks(self.n_slots, self.n_max)[tuple(occ)]
        except KeyError:
            raise ValueError(f"occupation {tuple(occ)} not in truncated basis") from None

    def basis_index(self, occ: Sequence[int], probe: int = 0) -> int:
        if not (0 <= probe < self.probe_levels):
            raise ValueError(f"probe index {probe} out of range")
        return self.occupation_index(occ) * self.probe_levels + probe

    def basis_state(self, index: int) -> tuple[tuple[int, ...], int]:
        rank, probe = divmod(index, self.probe_levels)
        return self.occupations()[rank], probe

    # -- occupation helpers -------------------------------------------------

    def pair_occupation(self, occ: Sequence[int], pair: int) -> tuple[int, ...]:
        return tuple(occ[s] for s in self.pair_slots(pair))

    def cleared(self, occ: Sequence[int], pair: int) -> tuple[int, ...]:
        """Copy of ``occ`` with every slot of ``pair`` emptied."""
        out = list(occ)
        for s in self.pair_slots(pair):
            out[s] = 0
        return tuple(out)

    def mode_count(self, occ: Sequence[int], pair: int, mode: int) -> int:
        return sum(occ[s] for s in self.mode_slots(pair, mode))

    def require_same_layout(self, other: "ModeSystem") -> None:
        if self.tag_dim != other.tag_dim or self.n_max != other.n_max:
            raise ValueError(f"incompatible mode systems {self} vs {other}")


@lru_cache(maxsize=None)
def _occupations(n_slots: int, n_max: int) -> tuple[tuple[int, ...], ...]:
    def gen(k: int, budget: int):
        if k == 0:
            yield ()
            return
        for c in range(budget + 1):
            for rest in gen(k - 1, budget - c):
                yield (c,) + rest

    return tuple(sorted(gen(n_slots, n_max), key=lambda o: (sum(o), o)))


@lru_cache(maxsize=None)
def _occupation_ranks(n_slots: int, n_max: int) -> dict[tuple[int, ...], int]:
    return {occ: i for i, occ in enumerate(_occupations(n_slots, n_max))}


@dataclass(frozen=True, eq=False)
class FockVector:
    """State vector over a :class:`ModeSystem` basis.

    Vectors are immutable.  ``leaked`` accumulates the probability weight
    dropped by truncation in the operations that produced this vector; it is
    0.0 on any state built and evolved entirely within the photon budget.
    """

    system: ModeSystem
    amplitudes: np.ndarray
    leaked: float = 0.0

    def __post_init__(self) -> None:
        arr = np.array(self.amplitudes, dtype=np.complex128)
        if arr.shape != (self.system.dim,):
            raise ValueError(f"expected {self.system.dim} amplitudes, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def norm(self) -> float:
        return sqrt(self.norm2)

    def amplitude(self, occ: Sequence[int], probe: int = 0) -> complex:
        return complex(self.amplitudes[self.system.basis_index(occ, probe)])

    def normalized(self) -> "FockVector":
        n = self.norm
        if n < 1e-15:
            raise ValueError("cannot normalize a (numerically) zero vector")
        return FockVector(self.system, self.amplitudes / n, self.leaked)

    def __add__(self, other: "FockVector") -> "FockVector":
        if self.system != other.system:
            raise ValueError("cannot add vectors over different mode systems")
        return FockVector(self.system, self.amplitudes + other.amplitudes,
                          self.leaked + other.leaked)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "FockVector":
        return FockVector(self.system, self.amplitudes * scalar,
                          self.leaked * abs(scalar) ** 2)

    __rmul__ = __mul__


def vacuum(system: ModeSystem, probe: int = 0) -> FockVector:
    amps = np.zeros(system.dim, dtype=np.complex128)
    amps[system.basis_index((0,) * system.n_slots, probe)] = 1.0
    return FockVector(system, amps)


def basis_vector(system: ModeSystem, occ: Sequence[int], probe: int = 0) -> FockVector:
    amps = np.zeros(system.dim, dtype=np.complex128)
    amps[system.basis_index(occ, probe)] = 1.0
    return FockVector(system, amps)


def single_photon(system: ModeSystem, pair: int, mode: int, tag: int = 0,
                  probe: int = 0) -> FockVector:
    occ = [0] * system.n_slots
    occ[system.slot(pair, mode, tag)] = 1
    return basis_vector(system, occ, probe)


def plus_state(system: ModeSystem, pair: int, tag: int = 0, probe: int = 0) -> FockVector:
    """One photon in the plus mode of ``pair``: (|0,1> + |1,0>)/sqrt(2)."""
    v0 = single_photon(system, pair, 0, tag, probe)
    v1 = single_photon(system, pair, 1, tag, probe)
    return FockVector(system, (v0.amplitudes + v1.amplitudes) / sqrt(2.0))


# -- ladder operators -------------------------------------------------------


@lru_cache(maxsize=None)
def creation_operator(system: ModeSystem, slot: int) -> np.ndarray:
    """Dense matrix of a-dagger on ``slot``; weight above n_max is dropped."""
    if not (0 <= slot < system.n_slots):
        raise ValueError(f"slot {slot} out of range")
    mat = np.zeros((system.dim, system.dim), dtype=np.complex128)
    for i in range(system.dim):
        occ, probe = system.basis_state(i)
        if sum(occ) + 1 > system.n_max:
            continue
        raised = list(occ)
        raised[slot] += 1
        mat[system.basis_index(raised, probe), i] = sqrt(occ[slot] + 1)
    mat.setflags(write=False)
    return mat


def annihilation_operator(system: ModeSystem, slot: int) -> np.ndarray:
    return creation_operator(system, slot).conj().T


def apply_matrix(state: FockVector, matrix: np.ndarray) -> FockVector:
    """Apply a matrix with no truncation bookkeeping (caller's responsibility)."""
    return FockVector(state.system, matrix @ state.amplitudes, state.leaked)


def apply_truncating_unitary(state: FockVector, matrix: np.ndarray) -> FockVector:
    """Apply a matrix that is unitary up to truncation; lost norm is recorded."""
    out = matrix @ state.amplitudes
    lost = state.norm2 - float(np.vdot(out, out).real)
    return FockVector(state.system, out, state.leaked + max(lost, 0.0))


def apply_creation(state: FockVector, slot: int) -> FockVector:
    """Add one photon in ``slot``, recording the weight lost at the cap."""
    system = state.system
    out = creation_operator(system, slot) @ state.amplitudes
    lost = 0.0
    for i in np.flatnonzero(np.abs(state.amplitudes) > 0):
        occ, _ = system.basis_state(int(i))
        if sum(occ) + 1 > system.n_max:
            lost += (occ[slot] + 1) * abs(state.amplitudes[i]) ** 2
    return FockVector(system, out, state.leaked + lost)


# -- linear mode transforms -------------------------------------------------

_TRANSFORM_CACHE: dict[tuple, np.ndarray] = {}


def pair_mode_transform(system: ModeSystem, pair: int, u: np.ndarray) -> np.ndarray:
    """Second-quantized matrix of a 2x2 mode mixing applied to ``pair``.

    ``u[out_mode, in_mode]`` is the amplitude for a photon entering the
    pair's ``in_mode`` to be re-created in ``out_mode``.  The same mixing is
    applied within every tag sector, so tags are never superposed.  For any
    unitary ``u`` the result is unitary: mixing conserves photon number, so
    truncation never bites.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise ValueError("mode transform needs a 2x2 matrix")
    key = (system, pair, u.tobytes())
    cached = _TRANSFORM_CACHE.get(key)
    if cached is not None:
        return cached

    dim = system.dim
    # Transformed creation operators, one per (mode, tag) of the pair.
    dmat = {}
    for t in range(system.tag_dim):
        a0 = creation_operator(system, system.slot(pair, 0, t))
        a1 = creation_operator(system, system.slot(pair, 1, t))
        dmat[(0, t)] = u[0, 0] * a0 + u[1, 0] * a1
        dmat[(1, t)] = u[0, 1] * a0 + u[1, 1] * a1

    out = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(dim):
        occ, probe = system.basis_state(i)
        col = basis_vector(system, system.cleared(occ, pair), probe).amplitudes.copy()
        denom = 1.0
        for mode in (0, 1):
            for t in range(system.tag_dim):
                m = occ[system.slot(pair, mode, t)]
                for _ in range(m):
                    col = dmat[(mode, t)] @ col
                denom *= factorial(m)
        out[:, i] = col / sqrt(denom)
    out.setflags(write=False)
    _TRANSFORM_CACHE[key] = out
    return out


_HADAMARD_2X2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / sqrt(2.0)


def hadamard_matrix(system: ModeSystem, pair: int) -> np.ndarray:
    """Dual-rail Hadamard basis change on ``pair``.

    Re-expresses amplitudes in the plus/minus mode basis: after the
    transform the pair's mode-1 slot counts minus-mode photons and the
    mode-0 slot counts plus-mode photons.  The matrix is its own inverse.
    """
    return pair_mode_transform(system, pair, _HADAMARD_2X2)


def hadamard_change(state: FockVector, pair: int) -> FockVector:
    return apply_truncating_unitary(state, hadamard_matrix(state.system, pair))


# -- composite systems -------------------------------------------------------


def tensor(a: FockVector, b: FockVector) -> FockVector:
    """Tensor product; ``b``'s pairs are renumbered after ``a``'s.

    Both factors must share tag_dim and n_max, and at most one may carry a
    probe.  Joint occupations exceeding the shared n_max are dropped and
    accounted in ``leaked``.
    """
    ma, mb = a.system, b.system
    ma.require_same_layout(mb)
    if ma.probe_dim and mb.probe_dim:
        raise ValueError("cannot tensor two systems that both carry a probe")
    joint = ModeSystem(ma.num_pairs + mb.num_pairs, ma.tag_dim, ma.n_max,
                       ma.probe_dim or mb.probe_dim)
    amps = np.zeros(joint.dim, dtype=np.complex128)
    nz_a = np.flatnonzero(np.abs(a.amplitudes) > 0)
    nz_b = np.flatnonzero(np.abs(b.amplitudes) > 0)
    dropped = 0.0
    for ia in nz_a:
        occ_a, pa = ma.basis_state(int(ia))
        for ib in nz_b:
            occ_b, pb = mb.basis_state(int(ib))
            amp = a.amplitudes[ia] * b.amplitudes[ib]
            if sum(occ_a) + sum(occ_b) > joint.n_max:
                dropped += abs(amp) ** 2
                continue
            probe = pa if ma.probe_dim else pb
            amps[joint.basis_index(occ_a + occ_b, probe)] += amp
    return FockVector(joint, amps, a.leaked + b.leaked + dropped)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Dense density matrix over a :class:`ModeSystem` basis."""

    system: ModeSystem
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.shape != (self.system.dim, self.system.dim):
            raise ValueError(f"expected a {self.system.dim}-dim square matrix")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self, atol: float = 1e-10, unit_trace: bool = True) -> None:
        """Check Hermiticity, positivity, and (optionally) unit trace."""
        if not np.allclose(self.matrix, self.matrix.conj().T, atol=atol):
            raise ValueError("density matrix is not Hermitian")
        eigs = np.linalg.eigvalsh(self.matrix)
        if eigs.min() < -atol:
            raise ValueError(f"density matrix has negative eigenvalue {eigs.min():.3e}")
        if unit_trace and abs(self.trace - 1.0) > atol:
            raise ValueError(f"density matrix trace {self.trace} != 1")

    def normalized(self) -> "DensityOperator":
        tr = self.trace
        if tr < 1e-15:
            raise ValueError("cannot normalize a zero-trace operator")
        return DensityOperator(self.system, self.matrix / tr)


def outer(state: FockVector) -> DensityOperator:
    return DensityOperator(state.system, np.outer(state.amplitudes,
                                                  state.amplitudes.conj()))


def partial_trace(rho: DensityOperator, keep_pairs: Iterable[int],
                  keep_probe: bool = True) -> DensityOperator:
    """Trace out all pairs not listed in ``keep_pairs`` (and the probe unless kept).

    The kept pairs are renumbered 0..k-1 in the order given.
    """
    ms = rho.system
    keep = tuple(keep_pairs)
    if len(set(keep)) != len(keep) or any(not 0 <= p < ms.num_pairs for p in keep):
        raise ValueError(f"bad pair selection {keep}")
    if keep_probe and not ms.probe_dim and keep == tuple(range(ms.num_pairs)):
        return rho
    reduced = ModeSystem(len(keep), ms.tag_dim, ms.n_max,
                         ms.probe_dim if keep_probe else 0)
    drop = [p for p in range(ms.num_pairs) if p not in keep]

    kept_index = np.empty(ms.dim, dtype=np.intp)
    traced_key: list[tuple] = []
    for i in range(ms.dim):
        occ, probe = ms.basis_state(i)
        kept_occ = sum((ms.pair_occupation(occ, p) for p in keep), ())
        kept_index[i] = reduced.basis_index(kept_occ, probe if keep_probe else 0)
        dropped_occ = sum((ms.pair_occupation(occ, p) for p in drop), ())
        traced_key.append((dropped_occ, 0 if keep_probe else probe))

    groups: dict[tuple, list[int]] = {}
    for i, key in enumerate(traced_key):
        groups.setdefault(key, []).append(i)

    out = np.zeros((reduced.dim, reduced.dim), dtype=np.complex128)
    for idxs in groups.values():
        sel = np.asarray(idxs, dtype=np.intp)
        out[np.ix_(kept_index[sel], kept_index[sel])] += rho.matrix[np.ix_(sel, sel)]
    return DensityOperator(reduced, out)


def trace_distance(a: DensityOperator | np.ndarray, b: DensityOperator | np.ndarray) -> float:
    """Half the trace norm of (a - b); 0 = identical, 1 = perfectly distinguishable."""
    am = a.matrix if isinstance(a, DensityOperator) else np.asarray(a)
    bm = b.matrix if isinstance(b, DensityOperator) else np.asarray(b)
    if am.shape != bm.shape:
        raise ValueError("trace distance needs operators of equal dimension")
    eigs = np.linalg.eigvalsh(am - bm)
    return float(0.5 * np.abs(eigs).sum())
