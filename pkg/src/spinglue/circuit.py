"""Evaluate local-circuit states: dense reconstruction, light-cone
expectation values, and fidelity helpers.

A LocalCircuit is a tensor power of a block state with staged seam
unitaries applied on top. Local observables never need the full chain:
walking the stages in reverse, only those whose supports chain-intersect
the observable's growing cone survive conjugation, so the expectation
value is evaluated on the causally connected sub-chain alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .chain import (DEFAULT_SITE_CAP, SupportInterval, apply_on_interval,
                    as_interval, embed_operator, spectral_norm)
from .gluing import LocalCircuit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Observable:
    """Dense Hermitian operator on a contiguous group of sites."""

    matrix: np.ndarray
    support: SupportInterval

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        iv = as_interval(self.support)
        if m.shape != (2 ** iv.width, 2 ** iv.width):
            raise ValueError(f"observable shape {m.shape} does not match support {iv}")
        if spectral_norm(m - m.conj().T) > 1e-12 * max(1.0, spectral_norm(m)):
            raise ValueError("observable must be Hermitian")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "support", iv)


class CircuitTooLargeError(Exception):
    """Dense reconstruction refused; evaluate observables through the light cone."""


def apply_circuit_dense(circuit: LocalCircuit, cap: int = DEFAULT_SITE_CAP) -> np.ndarray:
    """Dense state vector of the full circuit, stages applied in order."""
    n = circuit.n
    if n > cap:
        raise CircuitTooLargeError(
            f"{n} sites exceed the dense cap {cap}; use local_expectation instead")
    psi = circuit.base_block_state
    for _ in range(circuit.copies - 1):
        psi = np.kron(psi, circuit.base_block_state)
    for stage in circuit.stages:
        psi = apply_on_interval(psi, stage.unitary, stage.support, n)
    return psi


def light_cone_stages(circuit: LocalCircuit, support) -> tuple[list[int], SupportInterval]:
    """Indices of stages inside the reverse light cone of a support interval.

    Walking stages last-applied-first, a stage joins the cone iff its
    support intersects the current cone, which then grows to the hull.
    Returned indices are in forward (application) order.
    """
    cone = as_interval(support)
    marked = []
    for idx in range(len(circuit.stages) - 1, -1, -1):
        sup = circuit.stages[idx].support
        if sup.intersects(cone):
            marked.append(idx)
            cone = cone.hull(sup)
    marked.reverse()
    return marked, cone


def local_expectation(circuit: LocalCircuit, obs: Observable) -> float:
    """<psi| O |psi> contracted over the causally connected sub-chain only."""
    n = circuit.n
    m = circuit.m
    iv = as_interval(obs.support)
    if iv.hi >= n:
        raise ValueError(f"observable support {iv} outside the {n}-site chain")

    marked, cone = light_cone_stages(circuit, iv)
    logger.debug("light cone touches %d of %d stages, hull [%d, %d]",
                 len(marked), len(circuit.stages), cone.lo, cone.hi)

    # expand the cone hull to whole base blocks
    lo_block = cone.lo // m
    hi_block = cone.hi // m
    region = SupportInterval(lo_block * m, (hi_block + 1) * m - 1)
    n_sub = region.width

    psi = circuit.base_block_state
    for _ in range(hi_block - lo_block):
        psi = np.kron(psi, circuit.base_block_state)
    for idx in marked:
        stage = circuit.stages[idx]
        local = stage.support.shifted(-region.lo)
        psi = apply_on_interval(psi, stage.unitary, local, n_sub)

    obs_local = embed_operator(obs.matrix, iv.shifted(-region.lo), n_sub)
    value = np.vdot(psi, obs_local @ psi)
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise RuntimeError(f"expectation came out complex: {value}")
    return float(value.real)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>| for normalized state vectors of equal dimension."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError(f"state dimensions differ: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(a, b)))


def min_phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """sqrt(2 - 2 |<a|b>|): the norm distance minimized over a global phase."""
    overlap = fidelity(a, b)
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * overlap)))
