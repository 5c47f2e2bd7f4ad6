//! Localized virial functional and the escape experiment built on it.
//!
//! The functional
//!
//! ```text
//! I(t) = (4/(p−1)) Re∫ u v̄ dx + 2 Re∫ φ_R(x − y(t)) ∂ₓu v̄ dx
//! ```
//!
//! uses an odd, compactly supported cutoff φ_R that equals x on [−R, R].
//! At the critical frequency its time derivative along the flow has a
//! closed main term built from the conserved quantities and the kinetic
//! defect ‖v − iωu‖²_{L²}; everything else is controlled by the mass left
//! outside the cutoff window and the distance to the standing-wave orbit.
//! A perturbed wave that starts with the main term positive must keep
//! I(t) growing, so it cannot stay near the orbit: that is the escape
//! experiment at the bottom of this module.

use num_complex::Complex;

use crate::evolver::{evolve, step, EvolverConfig, TrajectoryStatus};
use crate::field::PhaseState;
use crate::functionals::ConservedTriple;
use crate::grid::Grid;
use crate::ground_state::{build_family, critical_frequency, SolitonParams};
use crate::modulation::{orbit_projection, track, TrackSeries};
use crate::scalar::{fabs, modsq, Real};
use crate::{Error, Result};

/// A run escapes when its orbit distance exceeds this multiple of the
/// initial distance.
const ESCAPE_FACTOR: f64 = 10.0;

/// Absolute floor under the escape threshold. An unperturbed run starts at
/// roundoff distance, and ten times roundoff would flag the slow secular
/// drift of the stepper as an escape.
const ESCAPE_FLOOR: f64 = 1e-3;

/// Odd cutoff profile sampled on a grid: φ_R(x) = x on [−R, R], zero for
/// |x| ≥ 2R, with a smooth bridge in between. The slope stays below 3 in
/// absolute value and the samples come from a closed form, never from
/// numerical differentiation.
#[derive(Clone, Debug)]
pub struct CutoffProfile<T: Real> {
    r: T,
    phi: Vec<T>,
    dphi: Vec<T>,
}

impl<T: Real> CutoffProfile<T> {
    pub fn r(&self) -> T {
        self.r
    }

    /// Samples of φ_R on the grid nodes.
    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    /// Samples of φ_R′ on the grid nodes, from the closed form.
    pub fn dphi(&self) -> &[T] {
        &self.dphi
    }
}

/// Quintic bridge q on [0, 1] with q(0) = 1, q′(0) = 1, q″(0) = 0 and all
/// of q, q′, q″ vanishing at 1. It carries the unit profile from the
/// identity region to the dead region twice differentiably.
fn bridge<T: Real>(t: T) -> T {
    let t2 = t * t;
    let t3 = t2 * t;
    T::one() + t - T::of(16.0) * t3 + T::of(23.0) * t3 * t - T::of(9.0) * t3 * t2
}

fn bridge_slope<T: Real>(t: T) -> T {
    let t2 = t * t;
    let t3 = t2 * t;
    T::one() - T::of(48.0) * t2 + T::of(92.0) * t3 - T::of(45.0) * t3 * t
}

/// Unit profile ψ with φ_R(x) = R·ψ(x/R): odd, ψ(s) = s on [0, 1], the
/// quintic bridge on (1, 2), zero beyond.
fn psi<T: Real>(s: T) -> T {
    let a = fabs(s);
    let sign = if s < T::zero() { -T::one() } else { T::one() };
    if a <= T::one() {
        s
    } else if a < T::of(2.0) {
        sign * bridge(a - T::one())
    } else {
        T::zero()
    }
}

/// ψ′, an even function: 1 on [−1, 1], the bridge slope on the shoulders.
fn dpsi<T: Real>(s: T) -> T {
    let a = fabs(s);
    if a <= T::one() {
        T::one()
    } else if a < T::of(2.0) {
        bridge_slope(a - T::one())
    } else {
        T::zero()
    }
}

/// Builds the cutoff profile for radius R. The support [−2R, 2R] must fit
/// in half the period so that the identity region and the dead region
/// never touch through the wrap-around.
pub fn build_cutoff<T: Real>(r: T, grid: &Grid<T>) -> Result<CutoffProfile<T>> {
    if !(r.is_finite() && r > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "cutoff radius must be positive and finite, got {r:?}"
        )));
    }
    if !(T::of(2.0) * r < T::of(0.5) * grid.length()) {
        return Err(Error::GridConfig(format!(
            "cutoff support [−2R, 2R] with R = {r:?} does not fit in half the period {:?}",
            grid.length()
        )));
    }
    let phi = grid.xs().iter().map(|&x| r * psi(x / r)).collect();
    let dphi = grid.xs().iter().map(|&x| dpsi(x / r)).collect();
    Ok(CutoffProfile { r, phi, dphi })
}

/// Samples of f(· − y) for a real sample vector: whole cells move by an
/// index rotation, the subgrid remainder by a spectral shift.
fn shifted_samples<T: Real>(grid: &Grid<T>, vals: &[T], y: T) -> Vec<T> {
    let n = grid.n() as i64;
    let m = (y / grid.dx()).round();
    let frac = y - m * grid.dx();
    let m = m.to_i64().unwrap_or(0).rem_euclid(n);
    let rolled: Vec<Complex<T>> = (0..n)
        .map(|j| Complex::new(vals[((j - m).rem_euclid(n)) as usize], T::zero()))
        .collect();
    if frac == T::zero() {
        return rolled.into_iter().map(|z| z.re).collect();
    }
    grid.shift(&rolled, frac).into_iter().map(|z| z.re).collect()
}

/// The localized virial functional
/// I = (4/(p−1)) Re∫ u v̄ + 2 Re∫ φ_R(· − y) ∂ₓu v̄.
pub fn i_of_t<T: Real>(
    grid: &Grid<T>,
    s: &PhaseState<T>,
    cutoff: &CutoffProfile<T>,
    y: T,
    p: T,
) -> T {
    assert!(p > T::one(), "virial weight 4/(p−1) needs p > 1");
    assert_eq!(s.len(), grid.n(), "state does not live on this grid");
    let du = grid.ddx(&s.u);
    let phi = shifted_samples(grid, &cutoff.phi, y);
    let mut dilation = T::zero();
    let mut transport = T::zero();
    for j in 0..grid.n() {
        let (u, v, g) = (s.u[j], s.v[j], du[j]);
        dilation = dilation + (u.re * v.re + u.im * v.im);
        transport = transport + phi[j] * (g.re * v.re + g.im * v.im);
    }
    grid.dx() * (T::of(4.0) / (p - T::one()) * dilation + T::of(2.0) * transport)
}

/// Kinetic defect ‖v − iωu‖²_{L²}; zero exactly on the standing wave.
pub fn kinetic_defect<T: Real>(grid: &Grid<T>, s: &PhaseState<T>, omega: T) -> T {
    let i_omega = Complex::new(T::zero(), omega);
    let mut acc = T::zero();
    for (u, v) in s.u.iter().zip(&s.v) {
        acc = acc + modsq(*v - i_omega * *u);
    }
    acc * grid.dx()
}

/// Mass outside the cutoff core: ∫_{|x−y| ≥ R} (|v|² + |uₓ|² + |u|² +
/// |u|^{p+1}) dx, with the distance measured around the circle.
pub fn exterior_mass<T: Real>(grid: &Grid<T>, s: &PhaseState<T>, p: T, r: T, y: T) -> T {
    let du = grid.ddx(&s.u);
    let half = T::of(0.5);
    let len = grid.length();
    let ex = (p + T::one()) * half;
    let mut acc = T::zero();
    for (j, &x) in grid.xs().iter().enumerate() {
        let d = x - y;
        let d = d - (d / len + half).floor() * len;
        if fabs(d) >= r {
            let usq = modsq(s.u[j]);
            acc = acc + modsq(s.v[j]) + modsq(du[j]) + usq + usq.powf(ex);
        }
    }
    acc * grid.dx()
}

/// Closed main term of dI/dt at the critical frequency, plus a bound on
/// the exterior remainder. With E, Q, P the conserved initial values,
///
/// ```text
/// main = −((p+3)/(p−1))·2E − (16ω/(p−1))·Q − 2ẏ·P + (8/(p−1))·‖v − iωu‖²
/// ```
///
/// and the remainder of the exact derivative is controlled by the mass
/// outside the window plus the squared orbit distance. The rearrangement
/// behind the formula cancels only when |ω| is the critical frequency, so
/// any other frequency is rejected.
#[allow(clippy::too_many_arguments)]
pub fn i_dot_analytic<T: Real>(
    grid: &Grid<T>,
    s: &PhaseState<T>,
    cutoff: &CutoffProfile<T>,
    y: T,
    ydot: T,
    p: T,
    omega: T,
    conserved: &ConservedTriple<T>,
) -> Result<(T, T)> {
    let params = SolitonParams::new(p, omega)?;
    if fabs(fabs(omega) - params.omega_c()) > T::imag_residue_tol() {
        return Err(Error::InvalidParameter(format!(
            "the closed derivative formula needs |omega| at the critical frequency {:?}, got {omega:?}",
            params.omega_c()
        )));
    }
    let one = T::one();
    let pm1 = p - one;
    let main = -(p + T::of(3.0)) / pm1 * T::of(2.0) * conserved.energy
        - T::of(16.0) * omega / pm1 * conserved.charge
        - T::of(2.0) * ydot * conserved.momentum
        + T::of(8.0) / pm1 * kinetic_defect(grid, s, omega);
    let tail = exterior_mass(grid, s, p, cutoff.r, y);
    Ok((main, tail))
}

/// Both sides of d/dt Re∫ u v̄ = ∫(|v|² − |uₓ|² − |u|² + |u|^{p+1}),
/// the derivative taken as a centered difference of one stepper step in
/// each direction. Returns (difference quotient, closed form).
pub fn first_virial_identity<T: Real>(
    grid: &Grid<T>,
    s: &PhaseState<T>,
    dt: T,
    p: T,
) -> (T, T) {
    let fwd = step(grid, s, dt, p);
    let bwd = step(grid, s, -dt, p);
    let g = |state: &PhaseState<T>| -> T {
        let mut acc = T::zero();
        for (u, v) in state.u.iter().zip(&state.v) {
            acc = acc + (u.re * v.re + u.im * v.im);
        }
        acc * grid.dx()
    };
    let fd = (g(&fwd) - g(&bwd)) / (T::of(2.0) * dt);
    let du = grid.ddx(&s.u);
    let ex = (p + T::one()) * T::of(0.5);
    let mut acc = T::zero();
    for j in 0..grid.n() {
        let usq = modsq(s.u[j]);
        acc = acc + modsq(s.v[j]) - modsq(du[j]) - usq + usq.powf(ex);
    }
    (fd, acc * grid.dx())
}

/// Both sides of the transport identity with the window frozen at y:
/// d/dt Re∫ φ_R(·−y) uₓ v̄ = −½∫ φ_R′(·−y)[|v|² + |uₓ|² − |u|² +
/// (2/(p+1))|u|^{p+1}]. Returns (difference quotient, closed form).
pub fn second_virial_identity<T: Real>(
    grid: &Grid<T>,
    cutoff: &CutoffProfile<T>,
    y: T,
    s: &PhaseState<T>,
    dt: T,
    p: T,
) -> (T, T) {
    let phi = shifted_samples(grid, &cutoff.phi, y);
    let dphi = shifted_samples(grid, &cutoff.dphi, y);
    let fwd = step(grid, s, dt, p);
    let bwd = step(grid, s, -dt, p);
    let g = |state: &PhaseState<T>| -> T {
        let du = grid.ddx(&state.u);
        let mut acc = T::zero();
        for j in 0..grid.n() {
            let (d, v) = (du[j], state.v[j]);
            acc = acc + phi[j] * (d.re * v.re + d.im * v.im);
        }
        acc * grid.dx()
    };
    let fd = (g(&fwd) - g(&bwd)) / (T::of(2.0) * dt);
    let du = grid.ddx(&s.u);
    let ex = (p + T::one()) * T::of(0.5);
    let two_over_p1 = T::of(2.0) / (p + T::one());
    let mut acc = T::zero();
    for j in 0..grid.n() {
        let usq = modsq(s.u[j]);
        acc = acc
            + dphi[j] * (modsq(s.v[j]) + modsq(du[j]) - usq + two_over_p1 * usq.powf(ex));
    }
    (fd, -T::of(0.5) * acc * grid.dx())
}

/// Verdict of one escape experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// The run left the orbit neighborhood (or blew up) in finite time.
    InstabilityObserved,
    /// The run stayed within the escape threshold for the whole window.
    StayedNearOrbit,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::InstabilityObserved => "INSTABILITY_OBSERVED",
            RunStatus::StayedNearOrbit => "STAYED_NEAR_ORBIT",
        }
    }
}

/// What ended the tracked window at the escape time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscapeCause {
    /// Orbit distance crossed the escape threshold at a recorded sample.
    DistanceThreshold,
    /// The modulation fit stopped converging or left the capture radius.
    TrackingLost,
    /// The sup norm crossed the stepper's blow-up threshold.
    BlowUp,
}

impl EscapeCause {
    pub fn as_str(&self) -> &'static str {
        match self {
            EscapeCause::DistanceThreshold => "distance_threshold",
            EscapeCause::TrackingLost => "tracking_lost",
            EscapeCause::BlowUp => "blow_up",
        }
    }
}

/// Virial diagnostics at one recorded sample. The analytic slope is the
/// closed main term, present only at the critical frequency where the
/// formula is a valid derivative; the numeric slope is a centered
/// difference of I over the recorded samples.
#[derive(Clone, Copy, Debug)]
pub struct VirialRecord<T: Real> {
    pub t: T,
    pub i: T,
    pub i_dot_numeric: T,
    pub i_dot_analytic: Option<T>,
    /// Mass outside the cutoff core around the fitted center.
    pub tail: T,
    /// ‖v − iωu‖²_{L²} at the base frequency.
    pub kinetic_term: T,
}

/// Full outcome of one escape experiment.
#[derive(Clone, Debug)]
pub struct InstabilityReport<T: Real> {
    pub p: T,
    pub omega: T,
    pub a: T,
    pub r: T,
    pub status: RunStatus,
    /// Escape time: first recorded crossing of the distance threshold, the
    /// tracking failure time, or the blow-up time, whichever comes first.
    pub t_star: Option<T>,
    pub cause: Option<EscapeCause>,
    /// Minimum of the numeric slope over the tracked window [0, t*].
    pub min_slope: Option<T>,
    pub initial_distance: T,
    pub max_distance: T,
    /// max(10 × initial distance, fixed floor).
    pub escape_threshold: T,
    pub records: Vec<VirialRecord<T>>,
    pub track: TrackSeries<T>,
    pub trajectory_status: TrajectoryStatus<T>,
    pub conserved_initial: ConservedTriple<T>,
}

/// Evolves the radially dilated wave (1+a)Φ_ω and watches it leave (or
/// keep) the orbit neighborhood. Records the virial functional, its two
/// slopes, the exterior mass and the kinetic defect at every tracked
/// sample; declares instability exactly when the escape time is finite
/// within the configured window. a = 0 runs the unperturbed control.
pub fn instability_experiment<T: Real>(
    grid: &Grid<T>,
    p: T,
    omega: T,
    a: T,
    cfg: &EvolverConfig<T>,
    r: T,
) -> Result<InstabilityReport<T>> {
    if !(a.is_finite() && a >= T::zero() && a <= T::of(0.05)) {
        return Err(Error::InvalidParameter(format!(
            "perturbation size must lie in [0, 0.05], got {a:?}"
        )));
    }
    let params = SolitonParams::new(p, omega)?;
    let cutoff = build_cutoff(r, grid)?;
    if !cfg.is_valid(T::zero()) {
        return Err(Error::InvalidParameter(
            "evolver configuration rejected".into(),
        ));
    }
    let wave = build_family(params, grid)?;
    let scaled = wave.state.pair().scaled(T::one() + a);
    let s0 = PhaseState::new(scaled.u, scaled.v, T::zero());

    let traj = evolve(grid, &s0, cfg, p);
    if traj.samples.is_empty() {
        return Err(Error::InvalidParameter(
            "evolver produced no samples".into(),
        ));
    }
    let conserved_initial = traj.samples[0].conserved;
    let series = track(grid, &traj, p, omega)?;

    let initial_distance = match series.points.first() {
        Some(pt) => pt.distance,
        None => orbit_projection(grid, &wave, &s0).distance,
    };
    let escape_threshold = if T::of(ESCAPE_FACTOR) * initial_distance > T::of(ESCAPE_FLOOR) {
        T::of(ESCAPE_FACTOR) * initial_distance
    } else {
        T::of(ESCAPE_FLOOR)
    };

    let at_critical = fabs(fabs(omega) - critical_frequency(p)?) <= T::imag_residue_tol();

    let m = series.points.len();
    let mut records: Vec<VirialRecord<T>> = Vec::with_capacity(m);
    for (pt, sample) in series.points.iter().zip(&traj.samples) {
        let s = &sample.state;
        let y = pt.fit.y;
        let i = i_of_t(grid, s, &cutoff, y, p);
        let (analytic, tail) = if at_critical {
            let (main, tail) =
                i_dot_analytic(grid, s, &cutoff, y, pt.y_dot, p, omega, &conserved_initial)?;
            (Some(main), tail)
        } else {
            (None, exterior_mass(grid, s, p, cutoff.r, y))
        };
        records.push(VirialRecord {
            t: pt.t,
            i,
            i_dot_numeric: T::zero(),
            i_dot_analytic: analytic,
            tail,
            kinetic_term: kinetic_defect(grid, s, omega),
        });
    }
    for k in 0..m {
        let (lo, hi) = match k {
            0 if m < 2 => continue,
            0 => (0, 1),
            k if k == m - 1 => (m - 2, m - 1),
            k => (k - 1, k + 1),
        };
        records[k].i_dot_numeric =
            (records[hi].i - records[lo].i) / (records[hi].t - records[lo].t);
    }

    let mut t_star: Option<T> = None;
    let mut cause: Option<EscapeCause> = None;
    if let Some(pt) = series.points.iter().find(|pt| pt.distance > escape_threshold) {
        t_star = Some(pt.t);
        cause = Some(EscapeCause::DistanceThreshold);
    }
    if let Some(t) = series.exit_time() {
        if t_star.map_or(true, |ts| t < ts) {
            t_star = Some(t);
            cause = Some(EscapeCause::TrackingLost);
        }
    }
    if let TrajectoryStatus::BlownUp(tb) = traj.status {
        if t_star.map_or(true, |ts| tb < ts) {
            t_star = Some(tb);
            cause = Some(EscapeCause::BlowUp);
        }
    }

    let in_window = |t: T| t_star.map_or(true, |ts| t <= ts);
    let min_slope = records
        .iter()
        .filter(|rec| in_window(rec.t))
        .map(|rec| rec.i_dot_numeric)
        .fold(None, |best: Option<T>, x| match best {
            Some(b) if b <= x => Some(b),
            _ => Some(x),
        });
    let max_distance = series
        .points
        .iter()
        .map(|pt| pt.distance)
        .fold(initial_distance, |b, x| if x > b { x } else { b });

    let status = if t_star.is_some() {
        RunStatus::InstabilityObserved
    } else {
        RunStatus::StayedNearOrbit
    };

    Ok(InstabilityReport {
        p,
        omega,
        a,
        r,
        status,
        t_star,
        cause,
        min_slope,
        initial_distance,
        max_distance,
        escape_threshold,
        records,
        track: series,
        trajectory_status: traj.status,
        conserved_initial,
    })
}
