"""Eavesdropper models: a forward unitary, a backward unitary, and a probe.

An attack acts on the transmitted pair (with its tags) joined to Eve's
private probe.  ``u_forward`` dresses the state on its way from Bob to
Alice, ``v_backward`` on the way back.  Both are arbitrary unitaries on the
truncated space, so Eve may inject or absorb photons unless she declares
herself photon-preserving.  Attacks are defined over a one-pair system and
lifted on demand onto the full simulation space, where the transmitted pair
is by convention the last one.

A small builder vocabulary (basis permutations, pair-mode mixers, probe
unitaries, photon-number sector phases) composes the named attacks and is
exported for constructing new ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .fock import FockVector, ModeSystem, hadamard_matrix, pair_mode_transform

__all__ = [
    "Attack",
    "attack_space",
    "basis_permutation",
    "probe_unitary",
    "tag_swap_unitary",
    "number_sector_phases",
    "mode_mixer",
    "identity_attack",
    "tagging_attack",
    "measure_resend_attack",
    "random_attack",
    "probe_rotation_attack",
    "apply_forward",
    "apply_backward",
    "save_attack",
    "load_attack",
    "attack_to_document",
    "attack_from_document",
]

UNITARY_ATOL = 1e-10

PROBE_IDLE = 0
# tagging_attack probe values
PROBE_SAW_SIFT = 1
PROBE_SAW_CTRL = 2


def attack_space(tag_dim: int = 1, n_max: int = 2, probe_dim: int = 1) -> ModeSystem:
    """The one-pair-plus-probe system an attack is defined over."""
    return ModeSystem(num_pairs=1, tag_dim=tag_dim, n_max=n_max, probe_dim=probe_dim)


@dataclass(eq=False)
class Attack:
    """Immutable once validated; do not mutate the matrices after creation."""

    name: str
    system: ModeSystem
    u_forward: np.ndarray
    v_backward: np.ndarray
    initial_probe: np.ndarray
    photon_preserving: bool = False
    _lifts: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.u_forward = np.array(self.u_forward, dtype=np.complex128)
        self.v_backward = np.array(self.v_backward, dtype=np.complex128)
        self.initial_probe = np.array(self.initial_probe, dtype=np.complex128)
        for arr in (self.u_forward, self.v_backward, self.initial_probe):
            arr.setflags(write=False)
        self.validate()

    def validate(self) -> None:
        if self.system.num_pairs != 1:
            raise ValueError("attacks are defined over a single transmitted pair")
        if self.system.probe_dim < 1:
            raise ValueError("attacks need a probe factor (probe_dim >= 1)")
        d = self.system.dim
        for label, mat in (("u_forward", self.u_forward), ("v_backward", self.v_backward)):
            if mat.shape != (d, d):
                raise ValueError(f"{label} must be {d}x{d} for {self.system}")
            defect = np.abs(mat.conj().T @ mat - np.eye(d)).max()
            if defect > UNITARY_ATOL:
                raise ValueError(f"{label} is not unitary (defect {defect:.3e})")
        if self.initial_probe.shape != (self.system.probe_dim,):
            raise ValueError("initial_probe has the wrong dimension")
        if abs(np.linalg.norm(self.initial_probe) - 1.0) > UNITARY_ATOL:
            raise ValueError("initial_probe must be a unit vector")
        if self.photon_preserving:
            number = np.array([sum(self.system.basis_state(i)[0]) for i in range(d)],
                              dtype=float)
            for label, mat in (("u_forward", self.u_forward),
                               ("v_backward", self.v_backward)):
                comm = np.abs(mat * (number[None, :] - number[:, None])).max()
                if comm > UNITARY_ATOL:
                    raise ValueError(f"{label} declared photon-preserving but is not")

    def lifted(self, joint: ModeSystem, backward: bool = False) -> np.ndarray:
        """Matrix of this attack on ``joint``, acting on the last pair + probe.

        Entries that would push the joint photon total past n_max are
        dropped; in protocol use the other pairs are in vacuum whenever an
        attack acts, so nothing is ever dropped there.
        """
        key = (joint, backward)
        cached = self._lifts.get(key)
        if cached is not None:
            return cached
        self.system.require_same_layout(joint)
        if joint.probe_dim != self.system.probe_dim:
            raise ValueError("joint system must carry the attack's probe")
        mat = self.v_backward if backward else self.u_forward
        if joint == self.system:
            self._lifts[key] = mat
            return mat

        pair = joint.num_pairs - 1
        pair_slots = joint.pair_slots(pair)
        lift = np.zeros((joint.dim, joint.dim), dtype=np.complex128)
        asys = self.system
        for j in range(joint.dim):
            occ, probe = joint.basis_state(j)
            spectator = list(joint.cleared(occ, pair))
            spectator_total = sum(spectator)
            col = asys.basis_index(joint.pair_occupation(occ, pair), probe)
            for row in np.flatnonzero(np.abs(mat[:, col]) > 0):
                occ_b, probe_b = asys.basis_state(int(row))
                if spectator_total + sum(occ_b) > joint.n_max:
                    continue  # dropped by truncation, visible as lost norm
                new_occ = list(spectator)
                for k, s in enumerate(pair_slots):
                    new_occ[s] = occ_b[k]
                lift[joint.basis_index(new_occ, probe_b), j] = mat[row, col]
        lift.setflags(write=False)
        self._lifts[key] = lift
        return lift


def apply_forward(attack: Attack, state: FockVector) -> FockVector:
    """Eve's Bob-to-Alice pass; truncation losses land in ``leaked``."""
    mat = attack.lifted(state.system, backward=False)
    out = mat @ state.amplitudes
    lost = state.norm2 - float(np.vdot(out, out).real)
    return FockVector(state.system, out, state.leaked + max(lost, 0.0))


def apply_backward(attack: Attack, state: FockVector) -> FockVector:
    """Eve's Alice-to-Bob pass."""
    mat = attack.lifted(state.system, backward=True)
    out = mat @ state.amplitudes
    lost = state.norm2 - float(np.vdot(out, out).real)
    return FockVector(state.system, out, state.leaked + max(lost, 0.0))


# -- builders -----------------------------------------------------------------


def basis_permutation(system: ModeSystem,
                      image: Callable[[tuple[int, ...], int], tuple[Sequence[int], int]]
                      ) -> np.ndarray:
    """Unitary permutation matrix from a bijection on (occupation, probe) labels."""
    seen = set()
    mat = np.zeros((system.dim, system.dim), dtype=np.complex128)
    for i in range(system.dim):
        occ, probe = system.basis_state(i)
        occ2, probe2 = image(occ, probe)
        j = system.basis_index(occ2, probe2)
        if j in seen:
            raise ValueError("image function is not a bijection on the basis")
        seen.add(j)
        mat[j, i] = 1.0
    return mat


def probe_unitary(system: ModeSystem, u_probe: np.ndarray) -> np.ndarray:
    """Act with ``u_probe`` on the probe factor alone."""
    u_probe = np.asarray(u_probe, dtype=np.complex128)
    if u_probe.shape != (system.probe_levels, system.probe_levels):
        raise ValueError("probe unitary has the wrong dimension")
    n_occ = len(system.occupations())
    return np.kron(np.eye(n_occ), u_probe)


def tag_swap_unitary(system: ModeSystem, tag_a: int = 0, tag_b: int = 1) -> np.ndarray:
    """Exchange two tag values on every photon (a relabeling, hence unitary)."""

    def image(occ: tuple[int, ...], probe: int):
        out = list(occ)
        for pair in range(system.num_pairs):
            for mode in (0, 1):
                sa, sb = system.slot(pair, mode, tag_a), system.slot(pair, mode, tag_b)
                out[sa], out[sb] = out[sb], out[sa]
        return out, probe

    return basis_permutation(system, image)


def number_sector_phases(system: ModeSystem, phases: Sequence[float]) -> np.ndarray:
    """Diagonal phase per total photon number; needs one phase per 0..n_max."""
    if len(phases) != system.n_max + 1:
        raise ValueError(f"need {system.n_max + 1} phases")
    diag = np.array([np.exp(1j * phases[sum(system.basis_state(i)[0])])
                     for i in range(system.dim)])
    return np.diag(diag)


def mode_mixer(system: ModeSystem, u2: np.ndarray, pair: int = 0) -> np.ndarray:
    """Passive two-mode mixing of a pair (beam splitter, phase plate, ...)."""
    return pair_mode_transform(system, pair, u2)


# -- named attacks ------------------------------------------------------------


def identity_attack(tag_dim: int = 1, n_max: int = 2, probe_dim: int = 1) -> Attack:
    """Eve does nothing; the reference point for every no-attack statistic."""
    system = attack_space(tag_dim, n_max, probe_dim)
    eye = np.eye(system.dim)
    probe = np.zeros(probe_dim)
    probe[0] = 1.0
    return Attack("identity", system, eye, eye, probe, photon_preserving=True)


def _pure_tag(system: ModeSystem, occ: Sequence[int], tag: int) -> bool:
    total = sum(occ)
    if total == 0:
        return False
    on_tag = sum(occ[system.slot(0, mode, tag)] for mode in (0, 1))
    return on_tag == total


def tagging_attack(n_max: int = 2) -> Attack:
    """Mark outgoing photons in a second tag bin and read the tag coming back.

    Forward, every photon is shifted from tag 0 to tag 1.  Backward, a
    returning photon still in tag 1 was reflected: Eve's probe records
    "saw CTRL" and the tag is shifted back.  A photon in tag 0 must have
    been freshly produced by a measure-and-resend party: the probe records
    "saw SIFT" and the light passes untouched.  Nothing returning leaves
    the probe idle.  Against the legacy protocol this reads Alice's choice
    perfectly; against the mirror protocol the tag never betrays which mode
    was swapped.
    """
    system = attack_space(tag_dim=2, n_max=n_max, probe_dim=3)
    u_forward = tag_swap_unitary(system)

    def v_image(occ: tuple[int, ...], probe: int):
        def swapped(o):
            out = list(o)
            for mode in (0, 1):
                s0, s1 = system.slot(0, mode, 0), system.slot(0, mode, 1)
                out[s0], out[s1] = out[s1], out[s0]
            return tuple(out)

        if _pure_tag(system, occ, 0):
            if probe == PROBE_IDLE:
                return occ, PROBE_SAW_SIFT
            if probe == PROBE_SAW_SIFT:
                return occ, PROBE_IDLE
            return swapped(occ), PROBE_IDLE
        if _pure_tag(system, occ, 1) and probe == PROBE_IDLE:
            return swapped(occ), PROBE_SAW_CTRL
        return occ, probe

    v_backward = basis_permutation(system, v_image)
    probe = np.zeros(3)
    probe[PROBE_IDLE] = 1.0
    return Attack("tagging", system, u_forward, v_backward, probe,
                  photon_preserving=True)


def measure_resend_attack(basis: str = "computational", tag_dim: int = 1,
                          n_max: int = 2) -> Attack:
    """Intercept on the way to Alice, record the click pattern, pass the
    collapsed light along.

    Modeled unitarily: the probe is a von Neumann pointer entangled with the
    pattern class ("01", "10", "11"), which reproduces the statistics of
    measuring with threshold detectors and resending the detected state.
    ``basis`` picks the measurement frame.  The return pass is untouched.
    """
    if basis not in ("computational", "hadamard"):
        raise ValueError(f"unknown basis {basis!r}")
    system = attack_space(tag_dim=tag_dim, n_max=n_max, probe_dim=4)

    def record_of(occ: tuple[int, ...]) -> int:
        mode0 = sum(occ[system.slot(0, 0, t)] for t in range(tag_dim))
        mode1 = sum(occ[system.slot(0, 1, t)] for t in range(tag_dim))
        if mode1 and mode0:
            return 3
        return 2 if mode1 else 1

    def image(occ: tuple[int, ...], probe: int):
        if sum(occ) == 0:
            return occ, probe
        rec = record_of(occ)
        if probe == PROBE_IDLE:
            return occ, rec
        if probe == rec:
            return occ, PROBE_IDLE
        return occ, probe

    u_forward = basis_permutation(system, image)
    if basis == "hadamard":
        had = hadamard_matrix(system, 0)
        u_forward = had @ u_forward @ had
    probe = np.zeros(4)
    probe[PROBE_IDLE] = 1.0
    return Attack(f"measure-resend-{basis}", system, u_forward,
                  np.eye(system.dim), probe, photon_preserving=True)


def random_attack(seed: int, probe_dim: int = 4, strength: float = 0.3,
                  n_max: int = 2) -> Attack:
    """Seeded random unitaries U = exp(i * strength * H) with H drawn GUE-like.

    strength 0 gives exactly the identity attack; strength about 1 scrambles
    the transmitted pair and the probe thoroughly.  Tagless by construction
    (a generic Hermitian generator would superpose tag sectors).
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError("strength must lie in [0, 1]")
    system = attack_space(tag_dim=1, n_max=n_max, probe_dim=probe_dim)
    rng = np.random.default_rng(seed)

    def random_unitary() -> np.ndarray:
        a = rng.standard_normal((system.dim, system.dim)) \
            + 1j * rng.standard_normal((system.dim, system.dim))
        h = (a + a.conj().T) / 2.0
        return np.eye(system.dim) if strength == 0.0 else expm(1j * strength * h)

    u_forward = random_unitary()
    v_backward = random_unitary()
    probe = np.zeros(probe_dim)
    probe[0] = 1.0
    return Attack(f"random-{seed}", system, u_forward, v_backward, probe)


def probe_rotation_attack(seed: int, probe_dim: int = 4, tag_dim: int = 1,
                          n_max: int = 2) -> Attack:
    """Eve only stirs her own probe (plus photon-number-sector phases).

    Such an attack commutes with everything the parties can observe, so it
    causes no errors and, by the protocol's robustness, gains no key
    information.  Useful as a non-trivial member of the zero-violation
    family in tests and sweeps.
    """
    system = attack_space(tag_dim=tag_dim, n_max=n_max, probe_dim=probe_dim)
    rng = np.random.default_rng(seed)

    def haar_probe() -> np.ndarray:
        a = rng.standard_normal((probe_dim, probe_dim)) \
            + 1j * rng.standard_normal((probe_dim, probe_dim))
        q, r = np.linalg.qr(a)
        return q * (np.diagonal(r) / np.abs(np.diagonal(r)))

    def dressed() -> np.ndarray:
        phases = rng.uniform(0.0, 2 * np.pi, size=n_max + 1)
        return number_sector_phases(system, phases) @ probe_unitary(system, haar_probe())

    u_forward, v_backward = dressed(), dressed()
    probe = np.zeros(probe_dim)
    probe[0] = 1.0
    return Attack(f"probe-rotation-{seed}", system, u_forward, v_backward, probe,
                  photon_preserving=True)


# -- fixture import/export ----------------------------------------------------

_DOC_KIND = "sqkdsim-attack"


def _matrix_to_pairs(mat: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def _pairs_to_matrix(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows],
                    dtype=np.complex128)


def attack_to_document(attack: Attack) -> dict:
    system = attack.system
    return {
        "kind": _DOC_KIND,
        "format_version": 1,
        "name": attack.name,
        "tag_dim": system.tag_dim,
        "n_max": system.n_max,
        "probe_dim": system.probe_dim,
        "photon_preserving": attack.photon_preserving,
        "basis_order": [
            {"occupation": list(system.basis_state(i)[0]),
             "probe": system.basis_state(i)[1]}
            for i in range(system.dim)
        ],
        "initial_probe": [[float(z.real), float(z.imag)] for z in attack.initial_probe],
        "u_forward": _matrix_to_pairs(attack.u_forward),
        "v_backward": _matrix_to_pairs(attack.v_backward),
    }


def attack_from_document(doc: dict) -> Attack:
    if doc.get("kind") != _DOC_KIND:
        raise ValueError("not an attack document")
    system = attack_space(int(doc["tag_dim"]), int(doc["n_max"]), int(doc["probe_dim"]))
    declared = doc.get("basis_order")
    if declared is not None:
        if len(declared) != system.dim:
            raise ValueError("declared basis does not match the reconstructed space")
        for i, entry in enumerate(declared):
            occ, probe = system.basis_state(i)
            if tuple(entry["occupation"]) != occ or int(entry["probe"]) != probe:
                raise ValueError(f"basis order mismatch at index {i}")
    probe = np.array([complex(re, im) for re, im in doc["initial_probe"]])
    return Attack(str(doc.get("name", "imported")), system,
                  _pairs_to_matrix(doc["u_forward"]),
                  _pairs_to_matrix(doc["v_backward"]),
                  probe, bool(doc.get("photon_preserving", False)))


def save_attack(attack: Attack, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(attack_to_document(attack), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_attack(path) -> Attack:
    with open(path, "r", encoding="utf-8") as fh:
        return attack_from_document(json.load(fh))
