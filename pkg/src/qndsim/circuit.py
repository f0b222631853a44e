"""The sum-gate apparatus as an executable circuit of optical elements.

A gate circuit is a Mach-Zehnder interferometer with one measurement-induced
squeezing stage per arm: inject a squeezed ancilla, mix it with the arm beam,
homodyne one output port and feed the scaled outcome forward as a
displacement on the other.  The free parameter ``R`` fixes the four
beam-splitter reflectivities ``1/(1+R), R, R, R/(1+R)`` and the interaction
gain ``G = 1/sqrt(R) - sqrt(R)``.

The builder chooses beam-splitter signs and feedforward gains so that the
lossless compiled circuit reproduces ``quadexpr.finite_squeezing_map``
coefficient-by-coefficient; this equivalence is checked at build time and
construction fails loudly if it does not hold.

Circuits can be executed three ways:

* ``run_covariance`` - deterministic ensemble-average propagation of
  mean/covariance (homodyne feedforward becomes a linear map, no randomness);
* ``run_trajectory`` - one stochastic shot with sampled homodyne outcomes
  and conditional state updates;
* ``circuit_quadrature_map`` - propagate symbolic quadrature expressions to
  obtain the circuit's exact input-output coefficient map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import gaussian
from .gaussian import GaussianState, SymplecticMatrix
from .quadexpr import (
    LinearQuadExpr,
    QuadratureMap,
    finite_squeezing_map,
    max_coefficient_difference,
)

ORACLE_MATCH_TOL = 1e-9


def gain_from_reflectivity(R: float) -> float:
    """Interaction gain ``G = 1/sqrt(R) - sqrt(R)`` for ``R`` in (0, 1]."""
    if not 0.0 < R <= 1.0:
        raise ValueError(f"R = {R} outside (0, 1]")
    return 1.0 / math.sqrt(R) - math.sqrt(R)


def reflectivity_from_gain(gain: float) -> float:
    """Inverse of ``gain_from_reflectivity``.

    Solves ``u**2 + G*u - 1 = 0`` for ``u = sqrt(R)``, taking the positive
    root, which lies in (0, 1] for any ``G >= 0``.
    """
    if gain < 0.0:
        raise ValueError("gain must be non-negative")
    u = (-gain + math.sqrt(gain * gain + 4.0)) / 2.0
    return u * u


@dataclass(frozen=True)
class GateParams:
    """Gate working point: beam-splitter parameter and ancilla squeezing."""

    R: float
    squeezing_db_a: float = -5.0
    squeezing_db_b: float = -5.0
    # variance multiplier on the anti-squeezed ancilla quadratures;
    # 1.0 means pure squeezed vacuum
    ancilla_excess: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.R <= 1.0:
            raise ValueError(f"R = {self.R} outside (0, 1]")
        if self.ancilla_excess < 1.0:
            raise ValueError("ancilla_excess must be >= 1")

    @classmethod
    def from_gain(cls, gain: float, **kwargs) -> "GateParams":
        return cls(R=reflectivity_from_gain(gain), **kwargs)

    @property
    def gain(self) -> float:
        return gain_from_reflectivity(self.R)

    @property
    def r_a(self) -> float:
        return gaussian.squeeze_parameter_from_db(self.squeezing_db_a)

    @property
    def r_b(self) -> float:
        return gaussian.squeeze_parameter_from_db(self.squeezing_db_b)

    @property
    def reflectivities(self) -> tuple:
        """The four beam-splitter reflectivities (entry, arm, arm, exit)."""
        R = self.R
        return (1.0 / (1.0 + R), R, R, R / (1.0 + R))


@dataclass(frozen=True)
class ImperfectionModel:
    """Noise budget of the apparatus, in the units the lab quotes them.

    Field names match the scenario-file keys.  ``extra_in_loop_loss`` is the
    single calibration knob: additional loss on each interferometer arm just
    before the exit beam splitter, zero unless a fit sets it.
    """

    propagation_loss_per_main_mode: float = 0.07
    detector_quantum_efficiency: float = 0.99
    visibility: float = 0.98
    dark_noise_dB_below_shot: float = 17.0
    displacement_coupler_loss: float = 0.01
    feedforward_electronic_gain_error: float = 0.0
    extra_in_loop_loss: float = 0.0
    loss_placement: str = "post_exit"  # or "pre_entry", "in_arms"

    def __post_init__(self):
        for name in (
            "propagation_loss_per_main_mode",
            "displacement_coupler_loss",
            "extra_in_loop_loss",
        ):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} = {v} outside [0, 1)")
        for name in ("detector_quantum_efficiency", "visibility"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} = {v} outside (0, 1]")
        if self.dark_noise_dB_below_shot < 0.0:
            raise ValueError("dark noise must be at or below shot noise")
        if self.loss_placement not in ("post_exit", "pre_entry", "in_arms"):
            raise ValueError(f"unknown loss placement {self.loss_placement!r}")

    @classmethod
    def ideal(cls) -> "ImperfectionModel":
        return cls(
            propagation_loss_per_main_mode=0.0,
            detector_quantum_efficiency=1.0,
            visibility=1.0,
            dark_noise_dB_below_shot=math.inf,
            displacement_coupler_loss=0.0,
            feedforward_electronic_gain_error=0.0,
        )

    @property
    def homodyne_efficiency(self) -> float:
        """Detector efficiency with mode mismatch folded in as visibility**2."""
        return self.detector_quantum_efficiency * self.visibility**2

    @property
    def dark_variance(self) -> float:
        if math.isinf(self.dark_noise_dB_below_shot):
            return 0.0
        return 10.0 ** (-self.dark_noise_dB_below_shot / 10.0)


# --------------------------------------------------------------------------
# circuit elements


@dataclass(frozen=True)
class AncillaInjection:
    """Append a squeezed-vacuum mode; ``angle = 0`` squeezes x."""

    r: float
    angle: float
    label: str
    antisqueeze_excess: float = 1.0


@dataclass(frozen=True)
class BeamSplitter:
    i: int
    j: int
    reflectivity: float
    signs: tuple = (1, 1, -1, 1)


@dataclass(frozen=True)
class Loss:
    mode: int
    eta: float
    tag: str = ""


@dataclass(frozen=True)
class HomodyneFeedforward:
    """Homodyne one mode, displace a target quadrature by gain * readout.

    The measured mode is removed; ``target_mode`` is indexed before removal.
    ``efficiency`` acts as loss on the measured mode before projection and
    ``dark_variance`` is classical noise on the electronic readout.
    """

    measured_mode: int
    angle: float
    target_mode: int
    target_quadrature: str  # "x" or "p"
    gain: float
    efficiency: float = 1.0
    dark_variance: float = 0.0


@dataclass(frozen=True)
class Displacement:
    mode: int
    dx: float
    dp: float


@dataclass(frozen=True)
class Circuit:
    """Ordered element list acting on ``n_input_modes`` initial modes."""

    elements: tuple
    n_input_modes: int = 2

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        self.validate()

    def validate(self) -> None:
        """Check that mode indices are valid at each step."""
        n = self.n_input_modes
        for k, el in enumerate(self.elements):
            if isinstance(el, AncillaInjection):
                n += 1
            elif isinstance(el, BeamSplitter):
                _require(el.i != el.j and 0 <= el.i < n and 0 <= el.j < n, k, el)
                _require(0.0 <= el.reflectivity <= 1.0, k, el)
            elif isinstance(el, Loss):
                _require(0 <= el.mode < n and 0.0 < el.eta <= 1.0, k, el)
            elif isinstance(el, HomodyneFeedforward):
                _require(
                    0 <= el.measured_mode < n
                    and 0 <= el.target_mode < n
                    and el.target_mode != el.measured_mode
                    and el.target_quadrature in ("x", "p")
                    and math.isfinite(el.gain),
                    k,
                    el,
                )
                n -= 1
            elif isinstance(el, Displacement):
                _require(0 <= el.mode < n, k, el)
            else:
                raise TypeError(f"unknown circuit element {el!r}")

    @property
    def n_output_modes(self) -> int:
        n = self.n_input_modes
        for el in self.elements:
            if isinstance(el, AncillaInjection):
                n += 1
            elif isinstance(el, HomodyneFeedforward):
                n -= 1
        return n

    def homodyne_count(self) -> int:
        return sum(1 for el in self.elements if isinstance(el, HomodyneFeedforward))

    def to_text(self) -> str:
        """Stable one-line-per-element dump for reproducibility checks."""
        lines = [f"circuit modes={self.n_input_modes}"]
        for el in self.elements:
            if isinstance(el, AncillaInjection):
                lines.append(
                    f"ancilla label={el.label} r={el.r:.12g} angle={el.angle:.12g}"
                    f" excess={el.antisqueeze_excess:.12g}"
                )
            elif isinstance(el, BeamSplitter):
                signs = "".join("+" if s > 0 else "-" for s in el.signs)
                lines.append(
                    f"beam_splitter i={el.i} j={el.j} reflectivity={el.reflectivity:.12g}"
                    f" signs={signs}"
                )
            elif isinstance(el, Loss):
                lines.append(f"loss mode={el.mode} eta={el.eta:.12g} tag={el.tag}")
            elif isinstance(el, HomodyneFeedforward):
                lines.append(
                    f"homodyne_feedforward measured={el.measured_mode} angle={el.angle:.12g}"
                    f" target={el.target_mode} quadrature={el.target_quadrature}"
                    f" gain={el.gain:.12g} efficiency={el.efficiency:.12g}"
                    f" dark={el.dark_variance:.12g}"
                )
            elif isinstance(el, Displacement):
                lines.append(f"displacement mode={el.mode} dx={el.dx:.12g} dp={el.dp:.12g}")
        return "\n".join(lines)


def _require(ok: bool, position: int, element) -> None:
    if not ok:
        raise ValueError(f"invalid circuit element at position {position}: {element!r}")


class CircuitConstructionError(RuntimeError):
    """Raised when the compiled gate fails its oracle self-check."""


# --------------------------------------------------------------------------
# builder


def build_qnd_gate(
    params: GateParams,
    imperfections: ImperfectionModel | None = None,
) -> Circuit:
    """Compile the sum-gate apparatus for the given working point.

    Layout (modes 0 and 1 are the two gate modes):

    1. entry beam splitter, reflectivity ``1/(1+R)``;
    2. arm A: ancilla squeezed in x, beam splitter of reflectivity ``R``,
       homodyne of the p quadrature fed forward onto the arm's p;
    3. arm B: the mirror arrangement acting on the p sector (ancilla squeezed
       in p, x homodyne, x feedforward);
    4. exit beam splitter, reflectivity ``R/(1+R)``;
    5. loss and detector imperfections per ``imperfections``.

    A single beam-splitter stage can only cancel the ancilla's anti-squeezed
    quadrature by measuring the quadrature conjugate to the squeezed one, so
    the x-sector arm homodynes p and vice versa.  The lossless element list
    is checked against ``finite_squeezing_map`` at build time and a
    ``CircuitConstructionError`` is raised beyond 1e-9 coefficient error.
    """
    imp = imperfections or ImperfectionModel.ideal()
    elements = _gate_elements(params, imp)
    circuit = Circuit(elements)

    lossless = Circuit(_gate_elements(params, ImperfectionModel.ideal()))
    oracle = finite_squeezing_map(params.R, params.r_a, params.r_b)
    err = max_coefficient_difference(circuit_quadrature_map(lossless), oracle)
    if err > ORACLE_MATCH_TOL:
        # the reflectivity list fixes values but not positions; try the
        # swapped entry/exit assignment before giving up
        swapped = Circuit(_gate_elements(params, imp, swap_entry_exit=True))
        lossless = Circuit(
            _gate_elements(params, ImperfectionModel.ideal(), swap_entry_exit=True)
        )
        err_swapped = max_coefficient_difference(circuit_quadrature_map(lossless), oracle)
        if err_swapped > ORACLE_MATCH_TOL:
            raise CircuitConstructionError(
                f"compiled gate deviates from the input-output relations: "
                f"coefficient error {err:.3e} (swapped layout {err_swapped:.3e})"
            )
        circuit = swapped
    return circuit


def _gate_elements(
    params: GateParams,
    imp: ImperfectionModel,
    swap_entry_exit: bool = False,
) -> list:
    R = params.R
    if R == 1.0:
        # G = 0: the gate is the identity; only passive losses remain
        elements = []
        if imp.propagation_loss_per_main_mode > 0.0:
            eta = 1.0 - imp.propagation_loss_per_main_mode
            elements += [Loss(0, eta, "main1"), Loss(1, eta, "main2")]
        return elements

    entry_r = 1.0 / (1.0 + R)
    exit_r = R / (1.0 + R)
    if swap_entry_exit:
        entry_r, exit_r = exit_r, entry_r
    ff_gain = math.sqrt((1.0 - R) / R) * (1.0 + imp.feedforward_electronic_gain_error)
    eta_det = imp.homodyne_efficiency
    dark = imp.dark_variance
    eta_prop = 1.0 - imp.propagation_loss_per_main_mode
    eta_coupler = 1.0 - imp.displacement_coupler_loss
    eta_extra = 1.0 - imp.extra_in_loop_loss

    elements = []
    if imp.loss_placement == "pre_entry" and eta_prop < 1.0:
        elements += [Loss(0, eta_prop, "main1"), Loss(1, eta_prop, "main2")]

    elements.append(BeamSplitter(0, 1, entry_r, signs=(1, -1, 1, 1)))

    # arm A: measurement-induced x squeezer on the mode-0 path
    elements.append(AncillaInjection(params.r_a, 0.0, "A", params.ancilla_excess))
    elements.append(BeamSplitter(2, 0, R, signs=(1, -1, 1, 1)))
    if eta_coupler < 1.0:
        elements.append(Loss(2, eta_coupler, "couplerA"))
    elements.append(
        HomodyneFeedforward(0, math.pi / 2, 2, "p", -ff_gain, eta_det, dark)
    )

    # arm B: the p-sector mirror on the mode-1 path
    elements.append(AncillaInjection(params.r_b, math.pi / 2, "B", params.ancilla_excess))
    elements.append(BeamSplitter(2, 0, R, signs=(-1, -1, 1, -1)))
    if eta_coupler < 1.0:
        elements.append(Loss(2, eta_coupler, "couplerB"))
    elements.append(HomodyneFeedforward(0, 0.0, 2, "x", ff_gain, eta_det, dark))

    # after the two stages the arm outputs sit in slots (0, 1) again
    if eta_extra < 1.0:
        elements += [Loss(0, eta_extra, "armA"), Loss(1, eta_extra, "armB")]
    if imp.loss_placement == "in_arms" and eta_prop < 1.0:
        elements += [Loss(0, eta_prop, "main1"), Loss(1, eta_prop, "main2")]

    elements.append(BeamSplitter(0, 1, exit_r, signs=(-1, -1, 1, -1)))

    if imp.loss_placement == "post_exit" and eta_prop < 1.0:
        elements += [Loss(0, eta_prop, "main1"), Loss(1, eta_prop, "main2")]
    return elements


# --------------------------------------------------------------------------
# deterministic (ensemble-average) execution


def run_covariance(
    circuit: Circuit,
    state: GaussianState,
    validate: bool = False,
) -> GaussianState:
    """Execute a circuit on the ensemble level; consumes no randomness.

    Homodyne feedforward is applied as the outcome-average Gaussian map: the
    target quadrature gains ``gain`` times the measured quadrature (readout
    noise included) and the measured mode is traced out.  With ``validate``
    every intermediate state is checked for physicality.
    """
    if state.n_modes != circuit.n_input_modes:
        raise ValueError(
            f"circuit expects {circuit.n_input_modes} input modes, got {state.n_modes}"
        )
    state = state.copy()
    if validate:
        gaussian.assert_physical(state)
    for el in circuit.elements:
        if isinstance(el, AncillaInjection):
            state = _inject_ancilla(state, el)
        elif isinstance(el, BeamSplitter):
            state = gaussian.beam_splitter(state, el.i, el.j, el.reflectivity, el.signs)
        elif isinstance(el, Loss):
            state = gaussian.loss_channel(state, el.mode, el.eta)
        elif isinstance(el, Displacement):
            state = gaussian.displace(state, el.mode, el.dx, el.dp)
        elif isinstance(el, HomodyneFeedforward):
            state = _feedforward_average(state, el)
        if validate:
            gaussian.assert_physical(state)
    return state


def _inject_ancilla(state: GaussianState, el: AncillaInjection) -> GaussianState:
    n = state.n_modes + 1
    mean = np.concatenate([state.mean, [0.0, 0.0]])
    cov = np.eye(2 * n)
    cov[: 2 * n - 2, : 2 * n - 2] = state.cov
    out = GaussianState(n, mean, cov)
    out = gaussian.squeeze(out, n - 1, el.r, el.angle)
    if el.antisqueeze_excess > 1.0:
        # impurity: classical noise added along the anti-squeezed axis
        extra = (el.antisqueeze_excess - 1.0) * math.exp(2.0 * el.r)
        direction = np.array([-math.sin(el.angle), math.cos(el.angle)])
        block = extra * np.outer(direction, direction)
        out.cov[2 * n - 2 :, 2 * n - 2 :] += block
    return out


def _feedforward_average(state: GaussianState, el: HomodyneFeedforward) -> GaussianState:
    if el.efficiency < 1.0:
        state = gaussian.loss_channel(state, el.measured_mode, el.efficiency)
    dim = 2 * state.n_modes
    e = np.zeros(dim)
    e[2 * el.measured_mode] = math.cos(el.angle)
    e[2 * el.measured_mode + 1] = math.sin(el.angle)
    t = 2 * el.target_mode + (0 if el.target_quadrature == "x" else 1)

    amp = np.eye(dim)
    amp[t, :] += el.gain * e
    mean = amp @ state.mean
    cov = amp @ state.cov @ amp.T
    if el.dark_variance > 0.0:
        cov[t, t] += el.gain**2 * el.dark_variance
    out = GaussianState(state.n_modes, mean, cov)
    return gaussian.remove_mode(out, el.measured_mode)


# --------------------------------------------------------------------------
# single-shot and batched stochastic execution


@dataclass
class _HomodyneStep:
    e: np.ndarray          # measured quadrature row (current dimension)
    sigma_optical: float   # sqrt of the measured optical variance
    update: np.ndarray     # conditional-mean column V e / denom
    target: int            # flat index of the feedforward target
    gain: float
    sigma_dark: float
    keep: np.ndarray       # indices kept after removing the measured mode


@dataclass
class TrajectoryProgram:
    """Pre-compiled stochastic execution plan for one circuit and input.

    The conditional covariance sequence is outcome-independent, so it is
    computed once; only the means evolve stochastically.  ``draws_per_shot``
    standard-normal draws are consumed per trajectory, in element order
    (optical draw, then dark draw when dark noise is configured).
    """

    steps: list
    initial_mean: np.ndarray
    final_cov: np.ndarray
    n_output_modes: int
    draws_per_shot: int
    n_outcomes: int

    def run_means(self, draws: np.ndarray):
        """Propagate trajectory means for ``draws`` of shape (n, draws_per_shot).

        Returns ``(means, outcomes)`` where ``means`` is (n, 2*n_output_modes)
        and ``outcomes`` the electronic readouts, shape (n, n_outcomes).
        """
        draws = np.atleast_2d(np.asarray(draws, dtype=float))
        if draws.shape[1] != self.draws_per_shot:
            raise ValueError(
                f"need {self.draws_per_shot} draws per shot, got {draws.shape[1]}"
            )
        n = draws.shape[0]
        means = np.tile(self.initial_mean, (n, 1))
        outcomes = np.empty((n, self.n_outcomes))
        col = 0
        out_idx = 0
        for kind, payload in self.steps:
            if kind == "linear":
                means = means @ payload.T
            elif kind == "extend":
                means = np.hstack([means, np.zeros((n, 2))])
            elif kind == "scale":
                idx, factor = payload
                means[:, idx] *= factor
            elif kind == "shift":
                means = means + payload
            elif kind == "homodyne":
                step: _HomodyneStep = payload
                mq = means @ step.e
                optical = mq + step.sigma_optical * draws[:, col]
                col += 1
                readout = optical
                if step.sigma_dark > 0.0:
                    readout = optical + step.sigma_dark * draws[:, col]
                    col += 1
                means = means + np.outer(optical - mq, step.update)
                means[:, step.target] += step.gain * readout
                means = means[:, step.keep]
                outcomes[:, out_idx] = readout
                out_idx += 1
        return means, outcomes


def compile_trajectory(circuit: Circuit, state: GaussianState) -> TrajectoryProgram:
    """Build the stochastic execution plan for ``circuit`` on ``state``."""
    if state.n_modes != circuit.n_input_modes:
        raise ValueError(
            f"circuit expects {circuit.n_input_modes} input modes, got {state.n_modes}"
        )
    steps = []
    cov = state.cov.copy()
    draws = 0
    outcomes = 0

    def linear(matrix):
        nonlocal cov
        steps.append(("linear", matrix))
        cov = matrix @ cov @ matrix.T

    for el in circuit.elements:
        n = cov.shape[0] // 2
        if isinstance(el, AncillaInjection):
            anc = _inject_ancilla(GaussianState(1, np.zeros(2), np.eye(2)), el)
            grown = np.eye(2 * n + 2)
            grown[: 2 * n, : 2 * n] = cov
            grown[2 * n :, 2 * n :] = anc.cov[2:, 2:]
            cov = grown
            steps.append(("extend", None))
        elif isinstance(el, BeamSplitter):
            linear(
                SymplecticMatrix.beam_splitter(
                    n, el.i, el.j, el.reflectivity, el.signs
                ).matrix
            )
        elif isinstance(el, Loss):
            idx = np.array([2 * el.mode, 2 * el.mode + 1])
            root = math.sqrt(el.eta)
            steps.append(("scale", (idx, root)))
            cov[idx, :] *= root
            cov[:, idx] *= root
            cov[np.ix_(idx, idx)] += (1.0 - el.eta) * np.eye(2)
        elif isinstance(el, Displacement):
            shift = np.zeros(2 * n)
            shift[2 * el.mode] = el.dx
            shift[2 * el.mode + 1] = el.dp
            steps.append(("shift", shift))
        elif isinstance(el, HomodyneFeedforward):
            if el.efficiency < 1.0:
                idx = np.array([2 * el.measured_mode, 2 * el.measured_mode + 1])
                root = math.sqrt(el.efficiency)
                steps.append(("scale", (idx, root)))
                cov[idx, :] *= root
                cov[:, idx] *= root
                cov[np.ix_(idx, idx)] += (1.0 - el.efficiency) * np.eye(2)
            e = np.zeros(2 * n)
            e[2 * el.measured_mode] = math.cos(el.angle)
            e[2 * el.measured_mode + 1] = math.sin(el.angle)
            var_q = float(e @ cov @ e)
            denom = max(var_q, el.dark_variance, gaussian.VARIANCE_FLOOR)
            column = cov @ e
            target = 2 * el.target_mode + (0 if el.target_quadrature == "x" else 1)
            keep = np.array(
                [k for k in range(2 * n) if k // 2 != el.measured_mode]
            )
            sigma_dark = math.sqrt(el.dark_variance) if el.dark_variance > 0.0 else 0.0
            steps.append(
                (
                    "homodyne",
                    _HomodyneStep(
                        e=e,
                        sigma_optical=math.sqrt(max(var_q, 0.0)),
                        update=column / denom,
                        target=target,
                        gain=el.gain,
                        sigma_dark=sigma_dark,
                        keep=keep,
                    ),
                )
            )
            cov = cov - np.outer(column, column) / denom
            cov = cov[np.ix_(keep, keep)]
            draws += 1 + (1 if sigma_dark > 0.0 else 0)
            outcomes += 1

    return TrajectoryProgram(
        steps=steps,
        initial_mean=state.mean.copy(),
        final_cov=cov,
        n_output_modes=cov.shape[0] // 2,
        draws_per_shot=draws,
        n_outcomes=outcomes,
    )


def run_trajectory(
    circuit: Circuit,
    state: GaussianState,
    rng: np.random.Generator,
):
    """Execute one stochastic shot of the circuit.

    Returns ``(final_state, outcome_log)`` where ``final_state`` is the
    conditional Gaussian state for this shot and ``outcome_log`` holds the
    electronic readout of every homodyne detector in element order.

    All standard-normal draws for the shot are taken from ``rng`` in a single
    batch, so a trajectory is bit-reproducible from its generator state
    regardless of how it is scheduled.
    """
    program = compile_trajectory(circuit, state)
    draws = rng.standard_normal(program.draws_per_shot)
    means, outcomes = program.run_means(draws[np.newaxis, :])
    final = GaussianState(program.n_output_modes, means[0], program.final_cov.copy())
    return final, outcomes[0]


# --------------------------------------------------------------------------
# symbolic coefficient extraction


def circuit_quadrature_map(circuit: Circuit, include_means: bool = False) -> QuadratureMap:
    """Propagate quadrature expressions through the circuit.

    The two input modes carry labels ``x1_in, p1_in, x2_in, p2_in``; ancilla
    injections contribute pre-squeezing vacuum labels such as ``xA0``, loss
    channels add fresh vacuum labels and dark noise adds classical labels.
    The circuit must end with exactly two modes.
    """
    if circuit.n_input_modes != 2:
        raise ValueError("coefficient extraction is defined for two-mode circuits")
    modes = [
        (LinearQuadExpr({"x1_in": 1.0}), LinearQuadExpr({"p1_in": 1.0})),
        (LinearQuadExpr({"x2_in": 1.0}), LinearQuadExpr({"p2_in": 1.0})),
    ]
    counters = {"loss": 0, "dark": 0}

    def lossy(pair, eta, tag):
        counters["loss"] += 1
        suffix = tag or str(counters["loss"])
        root, add = math.sqrt(eta), math.sqrt(1.0 - eta)
        x = pair[0].scaled(root).plus(LinearQuadExpr({f"xv_{suffix}": add}))
        p = pair[1].scaled(root).plus(LinearQuadExpr({f"pv_{suffix}": add}))
        return (x, p)

    for el in circuit.elements:
        if isinstance(el, AncillaInjection):
            c, s = math.cos(el.angle), math.sin(el.angle)
            rot = np.array([[c, s], [-s, c]])
            block = rot.T @ np.diag([math.exp(-el.r), math.exp(el.r)]) @ rot
            base_x = LinearQuadExpr({f"x{el.label}0": 1.0})
            base_p = LinearQuadExpr({f"p{el.label}0": 1.0})
            x = base_x.scaled(block[0, 0]).plus(base_p, block[0, 1])
            p = base_x.scaled(block[1, 0]).plus(base_p, block[1, 1])
            if el.antisqueeze_excess > 1.0:
                extra = math.sqrt(el.antisqueeze_excess - 1.0) * math.exp(el.r)
                noise = LinearQuadExpr({f"excess{el.label}": extra})
                x = x.plus(noise, -s)
                p = p.plus(noise, c)
            modes.append((x, p))
        elif isinstance(el, BeamSplitter):
            s1, s2, s3, s4 = el.signs
            t = math.sqrt(1.0 - el.reflectivity)
            r = math.sqrt(el.reflectivity)
            xi, pi = modes[el.i]
            xj, pj = modes[el.j]
            modes[el.i] = (xi.scaled(s1 * t).plus(xj, s2 * r), pi.scaled(s1 * t).plus(pj, s2 * r))
            modes[el.j] = (xi.scaled(s3 * r).plus(xj, s4 * t), pi.scaled(s3 * r).plus(pj, s4 * t))
        elif isinstance(el, Loss):
            modes[el.mode] = lossy(modes[el.mode], el.eta, el.tag)
        elif isinstance(el, Displacement):
            if include_means:
                x, p = modes[el.mode]
                modes[el.mode] = (
                    x.plus(LinearQuadExpr({"unit": el.dx})),
                    p.plus(LinearQuadExpr({"unit": el.dp})),
                )
        elif isinstance(el, HomodyneFeedforward):
            if el.efficiency < 1.0:
                modes[el.measured_mode] = lossy(
                    modes[el.measured_mode], el.efficiency, f"det{counters['loss']}"
                )
            xm, pm = modes[el.measured_mode]
            readout = xm.scaled(math.cos(el.angle)).plus(pm, math.sin(el.angle))
            if el.dark_variance > 0.0:
                counters["dark"] += 1
                readout = readout.plus(
                    LinearQuadExpr({f"dark{counters['dark']}": math.sqrt(el.dark_variance)})
                )
            xt, pt = modes[el.target_mode]
            if el.target_quadrature == "x":
                modes[el.target_mode] = (xt.plus(readout, el.gain), pt)
            else:
                modes[el.target_mode] = (xt, pt.plus(readout, el.gain))
            del modes[el.measured_mode]

    if len(modes) != 2:
        raise ValueError("circuit does not end with two modes")
    return QuadratureMap(
        {
            "x1_out": modes[0][0],
            "p1_out": modes[0][1],
            "x2_out": modes[1][0],
            "p2_out": modes[1][1],
        }
    )


def with_imperfections(
    imperfections: ImperfectionModel, **overrides
) -> ImperfectionModel:
    """Copy an imperfection model with some fields replaced."""
    return replace(imperfections, **overrides)
