"""The error-heralded quantum-dot block and its parity-gate variant.

Both wrap the same Hp - QD reflection - Hp arm on one path. Writing
s = (r_o - r_h)/2 and h = (r_o + r_h)/2, the arm acts on (polarization,
spin) at the bound path as  h * identity + s * (pol flip (x) spin X-flip),
so the two components separate exactly:

* heralded mode (definite L input): a trailing circular splitter sends
  the h component (still L) to a detector while the s component exits R
  with the spin X-flipped -- imperfect interaction is heralded.
* parity-gate mode (any input): a trailing polarization bit flip folds
  the arm into  h * pol-flip + s * spin-X-flip; the h leakage stays in
  the state and is tracked by the run machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cavity import ReflectionPair, reflection_operator
from .errors import ConfigurationError, PreconditionError
from .hilbert import (
    AMP_TOL,
    BranchOutcome,
    HybridState,
    L,
    _project_path,
    apply_spin_conditional_op,
)
from .optics import apply_hp, apply_z


@dataclass(frozen=True)
class BlockConfig:
    """Binding of a block to a QD spin and a reflection pair."""

    qd: int  # spin slot, 1 or 2
    pair: ReflectionPair
    mode: str = "heralded"  # "heralded" or "parity-gate"
    herald_label: str = "D"

    def __post_init__(self):
        if self.qd not in (1, 2):
            raise ConfigurationError("block qd must be spin 1 or 2")
        if self.mode not in ("heralded", "parity-gate"):
            raise ConfigurationError("block mode must be 'heralded' or 'parity-gate'")


def _arm(state: HybridState, photon: str, path: str, cfg: BlockConfig) -> HybridState:
    """Hp - spin-selective reflection - Hp on the bound path."""
    out = apply_hp(state, photon, path)
    out = apply_spin_conditional_op(out, photon, cfg.qd,
                                    reflection_operator(cfg.pair), path)
    return apply_hp(out, photon, path)


def heralded_block(state: HybridState, photon: str, path: str,
                   cfg: BlockConfig) -> list[BranchOutcome]:
    """Error-heralded block on one path; input there must be purely L.

    Returns the success branch (photon exits R, spin X-flipped, amplitude
    (r_o - r_h)/2 per passage) and the herald branch (detector click,
    amplitude (r_o + r_h)/2), both renormalized with their probabilities.
    """
    slot = state.layout.photon_slot(photon)
    idx = state.layout.path_index(photon, path)
    on_path = _project_path(state.amps, slot, idx)
    r_weight = float(np.sum(np.abs(np.take(on_path, 0, axis=2 * slot)) ** 2))
    if r_weight > AMP_TOL:
        raise PreconditionError(
            "heralded block requires pure L polarization on the bound path "
            f"(found R weight {r_weight:.3e})")
    after = _arm(state, photon, path, cfg)
    # the right splitter keeps R on the path and turns L into a detector click
    amps = after.amps
    l_part = np.zeros_like(amps)
    sel = [slice(None)] * 6
    sel[2 * slot] = L
    sel[2 * slot + 1] = idx
    l_part[tuple(sel)] = amps[tuple(sel)]
    success_amps = amps - l_part
    branches = []
    for outcome, arr in ((("click",), l_part), (("no_click",), success_amps)):
        prob = float(np.sum(np.abs(arr) ** 2))
        if prob <= 1e-20:
            continue
        branches.append(BranchOutcome(
            ((cfg.herald_label, outcome[0]),),
            HybridState(state.layout, arr / np.sqrt(prob)),
            prob,
        ))
    return branches


def parity_gate(state: HybridState, photon: str, path: str,
                cfg: BlockConfig) -> HybridState:
    """Arm followed by a polarization bit flip on the bound path.

    Success component: amplitude (r_o - r_h)/2, polarization restored,
    spin X-flipped. Leakage component: amplitude (r_o + r_h)/2 with the
    polarization flipped, retained in the state.
    """
    return apply_z(_arm(state, photon, path, cfg), photon, path)
