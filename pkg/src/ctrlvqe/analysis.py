"""Experiment-level studies: minimum-evolution-time scans, bang-bang
certification against the switching function, second-order (Dyson)
transition-channel decomposition, and population comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adjoint import backpropagate_costate, switching_function, terminal_costate
from .errors import ConfigError
from .model import basis_index, basis_label, embed_site_operator, lowering_op
from .objective import ObjectiveConfig
from .optimizer import OptimizerConfig, multistart
from .propagator import Workspace, control_hamiltonian_at, evolve_trajectory
from .pulsegrid import PulseSchedule

BOUND_TOL = 1e-9  # GHz; L-BFGS-B lands exactly on its box


@dataclass
class MetScanResult:
    durations: np.ndarray
    success_probabilities: np.ndarray
    met_estimate: float | None     # smallest scanned duration with >= 1 success
    n_starts: int
    solutions: dict = field(default_factory=dict, repr=False)  # duration -> [RunResult]

    def as_columns(self):
        header = ["duration_ns", "success_probability", "n_success", "n_starts"]
        n_succ = np.round(self.success_probabilities * self.n_starts).astype(int)
        data = np.column_stack([self.durations, self.success_probabilities,
                                n_succ, np.full_like(n_succ, self.n_starts)])
        return header, data


def met_scan(problem, durations, n_starts: int, seed0: int,
             cfg: OptimizerConfig = OptimizerConfig(), threads: int | None = None,
             keep_solutions: bool = True) -> MetScanResult:
    """Multistart success probability per duration; MET per the
    smallest-duration-with-a-success definition."""
    durations = np.asarray(sorted(durations), dtype=float)
    if durations.size == 0:
        raise ConfigError("empty duration grid")
    probs = np.zeros(durations.size)
    solutions: dict = {}
    for i, t_ns in enumerate(durations):
        prob_t = problem.with_duration(float(t_ns))
        results, p = multistart(prob_t, n_starts, seed0, cfg, threads=threads)
        probs[i] = p
        if keep_solutions:
            solutions[float(t_ns)] = [r for r in results if r.success]
    met = None
    for t_ns, p in zip(durations, probs):
        if p > 0:
            met = float(t_ns)
            break
    return MetScanResult(durations=durations, success_probabilities=probs,
                         met_estimate=met, n_starts=n_starts, solutions=solutions)


def saturation_fraction(schedule: PulseSchedule, tol: float = BOUND_TOL) -> float:
    """Fraction of segments sitting at +-amp_bound."""
    return float(np.mean(np.abs(np.abs(schedule.amplitudes) - schedule.amp_bound) < tol))


@dataclass
class CertificateReport:
    sign_agreement: float          # fraction of |phi|>eps samples with sign match
    coverage: float                # fraction of samples with |phi| > eps
    saturation: float              # fraction of segments at a bound
    max_flip_offset_segments: float  # pulse sign flips vs nearest phi zero crossing
    violating_intervals: list      # [(t_start, t_end, qubit), ...] sustained mismatches
    eps: float
    normalize_costate: bool

    def to_dict(self):
        return {
            "sign_agreement": self.sign_agreement,
            "coverage": self.coverage,
            "saturation": self.saturation,
            "max_flip_offset_segments": self.max_flip_offset_segments,
            "violating_intervals": [
                {"t_start_ns": a, "t_end_ns": b, "qubit": q}
                for a, b, q in self.violating_intervals
            ],
            "eps": self.eps,
            "normalize_costate": self.normalize_costate,
        }


def _zero_crossings(times, values):
    s = np.sign(values)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return 0.5 * (times[idx] + times[idx + 1])


def bang_bang_certificate(problem, schedule: PulseSchedule, normalize_costate: bool = False,
                          eps_rel: float = 1e-4):
    """Compare the optimized pulse against the switching function.

    Reports the sign-agreement fraction among samples with |phi| above the
    relative floor, the bound-saturation fraction, the worst offset between
    pulse sign flips and phi zero crossings (in segment widths), and the
    sustained sign-violation intervals. Reporting only; no pass/fail.
    """
    ws = problem.ws
    n_tr = problem.pulse.n_trotter
    traj = evolve_trajectory(ws, schedule, problem.psi0, n_tr)
    cfg = ObjectiveConfig(normalize=normalize_costate,
                          penalty_rate=problem.objective.penalty_rate,
                          leakage_threshold=problem.objective.leakage_threshold)
    lam_T = terminal_costate(traj[-1], problem.h_emb, ws.proj, cfg)
    lam = backpropagate_costate(problem.spec, schedule, lam_T, n_tr, ws)
    trace = switching_function(problem.spec, schedule, traj, lam, ws)

    eps = eps_rel * float(np.max(np.abs(trace.phi)))
    mask = np.abs(trace.phi) > eps
    signs_match = np.sign(trace.phi) == np.sign(trace.pulse_values)
    agree = float(np.mean(signs_match[mask])) if mask.any() else 1.0

    seg_len = schedule.segment_length
    worst_offset = 0.0
    violations = []
    for q in range(schedule.n_qubits):
        amps = schedule.amplitudes[q]
        flips = np.nonzero(np.sign(amps[:-1]) * np.sign(amps[1:]) < 0)[0]
        flip_times = (flips + 1) * seg_len
        roots = _zero_crossings(trace.times, trace.phi[:, q])
        for ft in flip_times:
            if roots.size == 0:
                worst_offset = np.inf
                break
            worst_offset = max(worst_offset, float(np.min(np.abs(roots - ft)) / seg_len))
        # sustained mismatch intervals among significant samples
        bad = mask[:, q] & ~signs_match[:, q]
        edges = np.diff(bad.astype(int))
        starts = list(np.nonzero(edges == 1)[0] + 1)
        ends = list(np.nonzero(edges == -1)[0] + 1)
        if bad[0]:
            starts.insert(0, 0)
        if bad[-1]:
            ends.append(bad.size)
        for s, e in zip(starts, ends):
            if trace.times[min(e, bad.size - 1)] - trace.times[s] > seg_len:
                violations.append((float(trace.times[s]),
                                   float(trace.times[min(e, bad.size - 1)]), q))

    report = CertificateReport(
        sign_agreement=agree, coverage=float(mask.mean()),
        saturation=saturation_fraction(schedule),
        max_flip_offset_segments=worst_offset,
        violating_intervals=violations, eps=eps,
        normalize_costate=normalize_costate)
    return report, trace


def control_matrix_grid(ws: Workspace, schedule: PulseSchedule, times: np.ndarray) -> np.ndarray:
    """H_IC(t) matrix elements between the workspace-frame basis labels,
    stacked over times: shape (len(times), dim, dim), rad/ns."""
    spec = ws.spec
    n = spec.n_transmons
    dim = spec.dim
    a = lowering_op(spec.levels)
    if ws.frame == "dressed":
        # label-ordered dressed vectors and their device energies
        cols = np.stack([ws.dressed.dressed_vector(b) for b in range(dim)], axis=1)
        energies = ws.E[ws.dressed.bare_to_dressed]
    else:
        cols = np.eye(dim, dtype=complex)
        # bare labels are not eigenstates once coupled; fall back to dense
        energies = None

    a_reps = []
    for q in range(n):
        a_reps.append(cols.conj().T @ embed_site_operator(a, q, spec) @ cols)

    amps = schedule.sample_grid(times)  # (n_t, n)
    out = np.empty((times.size, dim, dim), dtype=np.complex128)
    if energies is not None:
        for it, t in enumerate(times):
            hc = np.zeros((dim, dim), dtype=np.complex128)
            for q in range(n):
                theta = 2 * np.pi * schedule.drive_freq[q] * t
                hc += 2 * np.pi * amps[it, q] * (np.exp(1j * theta) * a_reps[q]
                                                 + np.exp(-1j * theta) * a_reps[q].conj().T)
            phase = np.exp(1j * energies * t)
            out[it] = phase[:, None] * hc * phase.conj()[None, :]
    else:
        for it, t in enumerate(times):
            out[it] = control_hamiltonian_at(spec, schedule, float(t), ws)
    return out


@dataclass
class DysonReport:
    initial: str
    final: str
    first_order: complex
    channel_amplitudes: dict           # label -> complex A_{i->m->f}
    second_order_total: complex
    n_quad: int

    @property
    def second_order_probability(self) -> float:
        return float(abs(self.second_order_total) ** 2)

    def channel_probability(self, labels) -> float:
        return float(abs(sum(self.channel_amplitudes[m] for m in labels)) ** 2)

    def dominant_channels(self, k: int = 2) -> list:
        return sorted(self.channel_amplitudes,
                      key=lambda m: -abs(self.channel_amplitudes[m]))[:k]

    def to_dict(self):
        return {
            "initial": self.initial,
            "final": self.final,
            "n_quad": self.n_quad,
            "first_order": [self.first_order.real, self.first_order.imag],
            "second_order_total": [self.second_order_total.real,
                                   self.second_order_total.imag],
            "second_order_probability": self.second_order_probability,
            "channels": {
                m: {"re": a.real, "im": a.imag, "probability": float(abs(a) ** 2)}
                for m, a in self.channel_amplitudes.items()
            },
        }


def _cumtrapz(y, dt):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * dt * (y[1:] + y[:-1]), axis=0)
    return out


# Default base grid for the transition amplitudes. H_IC(t) is known in
# closed form (no propagation is involved), so a fine grid costs only a
# vectorized evaluation; the Trotter grid is far too coarse for the
# oscillatory integrands once drives are detuned by up to 1 GHz.
DYSON_DEFAULT_QUAD = 40_000


def _control_rows(ws: Workspace, schedule: PulseSchedule, times: np.ndarray,
                  amps: np.ndarray, row: int | None = None, col: int | None = None):
    """One row (and/or column) of H_IC(t) over many times, vectorized,
    with explicitly supplied per-time amplitudes (len(times), n_qubits):
    the caller controls which side of a segment jump each time belongs to.

    Dressed frame only; returns arrays of shape (n_times, dim)."""
    spec = ws.spec
    dim = spec.dim
    a = lowering_op(spec.levels)
    cols = np.stack([ws.dressed.dressed_vector(b) for b in range(dim)], axis=1)
    energies = ws.E[ws.dressed.bare_to_dressed]
    out = []
    for which, fixed in (("row", row), ("col", col)):
        if fixed is None:
            out.append(None)
            continue
        acc = np.zeros((times.size, dim), dtype=np.complex128)
        for q in range(spec.n_transmons):
            a_rep = cols.conj().T @ embed_site_operator(a, q, spec) @ cols
            theta = 2 * np.pi * schedule.drive_freq[q] * times
            w = 2 * np.pi * amps[:, q]
            if which == "row":
                acc += (w * np.exp(1j * theta))[:, None] * a_rep[fixed, :][None, :]
                acc += (w * np.exp(-1j * theta))[:, None] * a_rep.conj().T[fixed, :][None, :]
            else:
                acc += (w * np.exp(1j * theta))[:, None] * a_rep[:, fixed][None, :]
                acc += (w * np.exp(-1j * theta))[:, None] * a_rep.conj().T[:, fixed][None, :]
        if which == "row":
            acc *= np.exp(1j * np.outer(times, energies[fixed] - energies))
        else:
            acc *= np.exp(1j * np.outer(times, energies - energies[fixed]))
        out.append(acc)
    return out


def _jump_cumtrapz(f_start, f_end, dt):
    """Cumulative trapezoid over intervals whose endpoint values are given
    separately (piecewise-smooth integrands with jumps on the grid)."""
    n = f_start.shape[0]
    shape = (n + 1,) + f_start.shape[1:]
    out = np.zeros(shape, dtype=f_start.dtype)
    out[1:] = np.cumsum(0.5 * dt * (f_start + f_end), axis=0)
    return out


def _dyson_traces_single(ws, spec, schedule, i_idx, f_idx, n_quad):
    times = np.linspace(0.0, schedule.duration_ns, n_quad + 1)
    dt = times[1] - times[0]
    # evaluate each interval's endpoints with that interval's amplitude so
    # the quadrature respects the piecewise-constant jumps exactly
    mids = 0.5 * (times[:-1] + times[1:])
    amps_mid = schedule.sample_grid(mids)
    if ws.frame == "dressed":
        fm_start, mi_start = _control_rows(ws, schedule, times[:-1], amps_mid,
                                           row=f_idx, col=i_idx)
        fm_end, mi_end = _control_rows(ws, schedule, times[1:], amps_mid,
                                       row=f_idx, col=i_idx)
    else:
        grid = control_matrix_grid(ws, schedule, times)
        fm_start, mi_start = grid[:-1, f_idx, :], grid[:-1, :, i_idx]
        fm_end, mi_end = grid[1:, f_idx, :], grid[1:, :, i_idx]
    a1 = -1j * _jump_cumtrapz(fm_start[:, i_idx], fm_end[:, i_idx], dt)
    inner = _jump_cumtrapz(mi_start, mi_end, dt)   # continuous in t
    prod_start = fm_start * inner[:-1]
    prod_end = fm_end * inner[1:]
    channels = -_jump_cumtrapz(prod_start, prod_end, dt)  # (-i)^2 = -1
    return times, a1, channels


def dyson_channel_traces(problem, schedule: PulseSchedule, initial: str, final: str,
                         n_quad: int | None = None):
    """Cumulative first- and second-order transition amplitudes A(t).

    Returns (times, a1_trace, {label m: A_{i->m->f}(t)}). The second-order
    channel decomposition inserts the resolution of identity over the full
    workspace-frame basis between the two drive insertions. Quadrature is
    nested composite trapezoid on a base grid of n_quad intervals with one
    Richardson (Romberg) level, so the effective error is fourth order.
    """
    ws = problem.ws
    spec = problem.spec
    n_quad = n_quad if n_quad is not None else DYSON_DEFAULT_QUAD
    i_idx = basis_index(initial, spec)
    f_idx = basis_index(final, spec)
    times, a1_c, ch_c = _dyson_traces_single(ws, spec, schedule, i_idx, f_idx, n_quad)
    _, a1_f, ch_f = _dyson_traces_single(ws, spec, schedule, i_idx, f_idx, 2 * n_quad)
    a1 = (4.0 * a1_f[::2] - a1_c) / 3.0
    channels = (4.0 * ch_f[::2] - ch_c) / 3.0
    traces = {basis_label(m, spec): channels[:, m] for m in range(spec.dim)}
    return times, a1, traces


def dyson_amplitudes(problem, schedule: PulseSchedule, initial: str, final: str,
                     n_quad: int | None = None) -> DysonReport:
    """Final-time Dyson amplitudes through every intermediate basis state."""
    times, a1, traces = dyson_channel_traces(problem, schedule, initial, final, n_quad)
    channel_amplitudes = {m: complex(tr[-1]) for m, tr in traces.items()}
    total = sum(channel_amplitudes.values())
    return DysonReport(initial=initial, final=final, first_order=complex(a1[-1]),
                       channel_amplitudes=channel_amplitudes,
                       second_order_total=complex(total),
                       n_quad=len(times) - 1)


def second_order_state(problem, schedule: PulseSchedule, psi0_label: str | None = None,
                       n_quad: int | None = None):
    """Apply the Dyson operator truncated at second order to the initial
    basis state and report fidelity against the exact propagation.

    Returns (psi2 unnormalized in label space, fidelity, infidelity)."""
    ws = problem.ws
    spec = problem.spec
    label = psi0_label if psi0_label is not None else problem.initial_label
    n_quad = n_quad if n_quad is not None else 8 * problem.pulse.n_trotter
    times = np.linspace(0.0, schedule.duration_ns, n_quad + 1)
    dt = times[1] - times[0]
    grid = control_matrix_grid(ws, schedule, times)
    i_idx = basis_index(label, spec)

    m1 = np.trapezoid(grid, dx=dt, axis=0)
    inner = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    outer = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    prev = grid[0]
    prod_prev = grid[0] @ inner
    for k in range(1, times.size):
        inner = inner + 0.5 * dt * (grid[k] + prev)
        prod = grid[k] @ inner
        outer = outer + 0.5 * dt * (prod + prod_prev)
        prev = grid[k]
        prod_prev = prod
    psi2 = np.zeros(spec.dim, dtype=np.complex128)
    psi2[i_idx] = 1.0
    psi2 = psi2 - 1j * m1[:, i_idx] - outer[:, i_idx]

    # exact propagation, expressed as workspace-frame label amplitudes
    psi_T = evolve_trajectory(ws, schedule, ws.basis_vector(label),
                              problem.pulse.n_trotter)[-1]
    if ws.frame == "dressed":
        cols = np.stack([ws.dressed.dressed_vector(b) for b in range(spec.dim)], axis=1)
        exact = cols.conj().T @ psi_T
    else:
        exact = psi_T
    fid = float(abs(np.vdot(exact, psi2 / np.linalg.norm(psi2))) ** 2)
    return psi2, fid, 1.0 - fid


@dataclass
class InterferenceVerdict:
    constructive: bool
    combined_probability: float
    sum_of_probabilities: float
    margin: float                  # combined - sum; > 0 means constructive
    cross_term: float

    def to_dict(self):
        return {
            "constructive": self.constructive,
            "combined_probability": self.combined_probability,
            "sum_of_probabilities": self.sum_of_probabilities,
            "margin": self.margin,
            "cross_term": self.cross_term,
        }


def interference_test(report: DysonReport, m1: str, m2: str,
                      tol: float = 1e-15) -> InterferenceVerdict:
    """Constructive iff |A_m1 + A_m2|^2 exceeds |A_m1|^2 + |A_m2|^2."""
    if m1 not in report.channel_amplitudes or m2 not in report.channel_amplitudes:
        raise ConfigError(f"channels {m1!r}/{m2!r} not present in the report")
    a1 = report.channel_amplitudes[m1]
    a2 = report.channel_amplitudes[m2]
    combined = abs(a1 + a2) ** 2
    separate = abs(a1) ** 2 + abs(a2) ** 2
    cross = 2.0 * (a1.conjugate() * a2).real
    scale = max(separate, 1e-300)
    constructive = (combined - separate) > tol * scale
    return InterferenceVerdict(constructive=bool(constructive),
                               combined_probability=float(combined),
                               sum_of_probabilities=float(separate),
                               margin=float(combined - separate),
                               cross_term=float(cross))


def population_comparison(trace_a, trace_b, label: str = "10",
                          comp_labels_a=None, comp_labels_b=None):
    """Raw and projection-renormalized populations of one label for two
    runs on their own time axes; returns (header, column matrix) rows
    aligned on the union grid by run (columns padded with NaN where a run
    is shorter)."""
    def renormalized(trace, comp_labels):
        p = trace.populations[label]
        comp = sum(trace.populations[c] for c in comp_labels)
        return p, p / comp

    comp_labels_a = comp_labels_a or [c for c in trace_a.populations
                                      if all(ch in "01" for ch in c)]
    comp_labels_b = comp_labels_b or [c for c in trace_b.populations
                                      if all(ch in "01" for ch in c)]
    raw_a, norm_a = renormalized(trace_a, comp_labels_a)
    raw_b, norm_b = renormalized(trace_b, comp_labels_b)
    n = max(trace_a.times.size, trace_b.times.size)

    def pad(x):
        out = np.full(n, np.nan)
        out[:x.size] = x
        return out

    header = ["time_a_ns", f"p{label}_a_raw", f"p{label}_a_normalized",
              "time_b_ns", f"p{label}_b_raw", f"p{label}_b_normalized"]
    data = np.column_stack([pad(trace_a.times), pad(raw_a), pad(norm_a),
                            pad(trace_b.times), pad(raw_b), pad(norm_b)])
    return header, data
