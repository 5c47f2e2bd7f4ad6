//! Charge, momentum, energy, action: anchor values, exact quadratic
//! expansions, and the first-order identities behind the perturbed datum.

mod common;

use common::{assert_abs, assert_rel};
use num_complex::Complex;

use kgsim_core::field::PhaseState;
use kgsim_core::functionals::{action, charge, charge_gradient, conserved, energy, momentum};
use kgsim_core::ground_state::{build_family, critical_frequency};
use kgsim_core::{Grid64, SolitonParams64};

fn grid() -> Grid64 {
    Grid64::new(80.0, 1024).unwrap()
}

fn scaled_state(s: &PhaseState<f64>, factor: f64) -> PhaseState<f64> {
    PhaseState::new(
        s.u.iter().map(|z| z * factor).collect(),
        s.v.iter().map(|z| z * factor).collect(),
        s.t,
    )
}

#[test]
fn charge_of_standing_wave() {
    let g = grid();
    for p in [2.0, 2.5, 3.0, 4.0] {
        let params = SolitonParams64::critical(p).unwrap();
        let wave = build_family(params, &g).unwrap();
        let q = charge(&g, &wave.state);
        let want = -params.omega() * wave.phi_l2sq(&g);
        assert_rel(q, want, 1e-12, "Q(Phi) = -omega * mass");
    }
    // p = 3 at the critical frequency: Q = -(1/sqrt2) * 2 sqrt2 = -2.
    let wave = build_family(SolitonParams64::critical(3.0).unwrap(), &g).unwrap();
    assert_rel(charge(&g, &wave.state), -2.0, 1e-8, "Q anchor at p=3");
}

#[test]
fn charge_vanishes_without_velocity() {
    let g = grid();
    let wave = build_family(SolitonParams64::critical(3.0).unwrap(), &g).unwrap();
    let s = PhaseState::new(
        wave.phi.clone(),
        vec![Complex::new(0.0, 0.0); g.n()],
        0.0,
    );
    assert_eq!(charge(&g, &s), 0.0);
}

#[test]
fn momentum_of_even_states_vanishes() {
    let g = grid();
    let wave = build_family(SolitonParams64::critical(3.0).unwrap(), &g).unwrap();
    assert!(momentum(&g, &wave.state).abs() < 1e-12, "P(Phi) = 0");
    let dilated = scaled_state(&wave.state, 1.01);
    assert!(momentum(&g, &dilated).abs() < 1e-12, "P((1+a)Phi) = 0");
}

#[test]
fn momentum_against_riemann_sum_oracle() {
    // u = e^{ix} g(x), v = i u with real even g: the integrand of P is
    // evaluated analytically node by node and summed directly.
    let g = Grid64::new(32.0 * std::f64::consts::PI, 1024).unwrap();
    let gauss = |x: f64| x.cosh().recip();
    let dgauss = |x: f64| -x.cosh().recip() * x.tanh();
    let u: Vec<Complex<f64>> = g
        .xs()
        .iter()
        .map(|&x| Complex::new(0.0, x).exp() * gauss(x))
        .collect();
    let v: Vec<Complex<f64>> = u.iter().map(|z| z * Complex::new(0.0, 1.0)).collect();
    let s = PhaseState::new(u, v, 0.0);
    let got = momentum(&g, &s);
    let mut oracle = 0.0;
    for &x in g.xs() {
        let ux = Complex::new(0.0, x).exp() * Complex::new(dgauss(x), gauss(x));
        let vv = Complex::new(0.0, x).exp() * gauss(x) * Complex::new(0.0, 1.0);
        oracle += (ux * vv.conj()).re;
    }
    oracle *= g.dx();
    assert_rel(got, oracle, 1e-10, "momentum vs Riemann oracle");
}

#[test]
fn energy_of_standing_wave_family() {
    let g = grid();
    for p in [2.0, 2.5, 3.0, 4.0] {
        let wc = critical_frequency(p).unwrap();
        for omega in [0.0, wc / 2.0, wc] {
            let params = SolitonParams64::new(p, omega).unwrap();
            let wave = build_family(params, &g).unwrap();
            let e = energy(&g, &wave.state, p).unwrap();
            let want = (p - 1.0 + 4.0 * omega * omega) / (p + 3.0) * wave.phi_l2sq(&g);
            assert_rel(e, want, 1e-9, "E(Phi) closed form");
        }
    }
}

#[test]
fn energy_anchor_and_zero_state() {
    let g = grid();
    let wave = build_family(SolitonParams64::critical(3.0).unwrap(), &g).unwrap();
    let e = energy(&g, &wave.state, 3.0).unwrap();
    assert_rel(e, 4.0 * 2f64.sqrt() / 3.0, 1e-8, "E anchor at p=3");
    assert_abs(e, 1.8856181, 1e-6, "E anchor decimal");

    let zero = PhaseState::new(
        vec![Complex::new(0.0, 0.0); g.n()],
        vec![Complex::new(0.0, 0.0); g.n()],
        0.0,
    );
    assert_eq!(energy(&g, &zero, 3.0).unwrap(), 0.0);
}

#[test]
fn action_values_and_charge_energy_relation() {
    let g = grid();
    let wave = build_family(SolitonParams64::critical(3.0).unwrap(), &g).unwrap();
    let omega = wave.params.omega();
    let s = action(&g, &wave.state, 3.0, omega).unwrap();
    assert_rel(s, 2f64.sqrt() / 3.0, 1e-8, "S(Phi) anchor at p=3");
    // With zero effective frequency the action is the energy.
    let e = energy(&g, &wave.state, 3.0).unwrap();
    assert_eq!(action(&g, &wave.state, 3.0, 0.0).unwrap(), e);

    // (p+3) E + 8 omega_c Q = 0 at the critical frequency.
    for p in [2.0, 2.5, 3.0, 4.0] {
        let params = SolitonParams64::critical(p).unwrap();
        let wave = build_family(params, &g).unwrap();
        let trip = conserved(&g, &wave.state, p).unwrap();
        let resid = (p + 3.0) * trip.energy + 8.0 * params.omega() * trip.charge;
        assert!(
            resid.abs() < 1e-10 * trip.energy.abs(),
            "charge-energy relation at p={p}: {resid:.3e}"
        );
    }
}

#[test]
fn charge_derivative_in_omega_vanishes_at_critical() {
    let g = grid();
    for p in [2.0, 2.5, 3.0, 4.0] {
        let wc = critical_frequency(p).unwrap();
        let h = 1e-4;
        let q_at = |omega: f64| {
            let wave = build_family(SolitonParams64::new(p, omega).unwrap(), &g).unwrap();
            charge(&g, &wave.state)
        };
        let dq = (q_at(wc + h) - q_at(wc - h)) / (2.0 * h);
        assert!(dq.abs() < 1e-6, "dQ/domega at critical, p={p}: {dq:.3e}");

        // Analytic form changes sign across the critical frequency.
        let dq_analytic = |omega: f64| {
            let phi0 = kgsim_core::ground_state::build_phi0(p, &g).unwrap();
            let mass0: f64 = phi0.iter().map(|z| z.re * z.re).sum::<f64>() * g.dx();
            let m2 = 1.0 - omega * omega;
            -m2.powf(2.0 / (p - 1.0) - 1.5) * (1.0 - 4.0 / (p - 1.0) * omega * omega) * mass0
        };
        assert!(dq_analytic(wc - 0.05) < 0.0, "subcritical slope sign");
        assert!(dq_analytic(wc + 0.05) > 0.0, "supercritical slope sign");
        // And the analytic form matches finite differences away from the
        // critical point.
        let omega = wc * 0.8;
        let fd = (q_at(omega + h) - q_at(omega - h)) / (2.0 * h);
        assert_rel(fd, dq_analytic(omega), 1e-6, "dQ/domega closed form");
    }
}

#[test]
fn rescaled_action_is_flat_to_second_order() {
    // S_{lambda omega}(Phi_{lambda omega}) - S_{lambda omega}(Phi_omega)
    // vanishes faster than (lambda - 1)^2 at the critical frequency.
    let g = grid();
    let p = 3.0;
    let omega = critical_frequency(p).unwrap();
    let base = build_family(SolitonParams64::new(p, omega).unwrap(), &g).unwrap();
    let gap = |lambda: f64| {
        let scaled = build_family(
            SolitonParams64::new(p, lambda * omega).unwrap(),
            &g,
        )
        .unwrap();
        let s_scaled = action(&g, &scaled.state, p, lambda * omega).unwrap();
        let s_base = action(&g, &base.state, p, lambda * omega).unwrap();
        s_scaled - s_base
    };
    for sign in [1.0, -1.0] {
        let r1 = gap(1.0 + sign * 1e-2).abs() / 1e-4;
        let r2 = gap(1.0 + sign * 1e-3).abs() / 1e-6;
        assert!(
            r1 >= 5.0 * r2,
            "quadratic-normalized gap should shrink: {r1:.3e} vs {r2:.3e}"
        );
    }
}

#[test]
fn charge_expansion_is_exactly_quadratic() {
    let g = grid();
    let wave = build_family(SolitonParams64::critical(3.0).unwrap(), &g).unwrap();
    let omega = wave.params.omega();
    let mass = wave.phi_l2sq(&g);
    let q0 = charge(&g, &wave.state);
    for a in [1e-2, 1e-3, 0.3] {
        let q = charge(&g, &scaled_state(&wave.state, 1.0 + a));
        let predicted = q0 - 2.0 * a * omega * mass + a * a * (-omega * mass);
        assert!(
            (q - predicted).abs() < 1e-12,
            "quadratic charge expansion exact, a={a}: {:.3e}",
            q - predicted
        );
    }
}

#[test]
fn action_gap_of_perturbed_datum_is_linear_in_amplitude() {
    // S_{lambda omega}((1+a)Phi) - S_{lambda omega}(Phi)
    //   = -2 (lambda-1) a omega^2 mass + O(a^2), uniformly on |lambda-1|<=0.1.
    let g = grid();
    let p = 3.0;
    let omega = critical_frequency(p).unwrap();
    let wave = build_family(SolitonParams64::new(p, omega).unwrap(), &g).unwrap();
    let mass = wave.phi_l2sq(&g);
    for lambda in [0.9, 0.97, 1.03, 1.1] {
        let s_base = action(&g, &wave.state, p, lambda * omega).unwrap();
        let resid = |a: f64| {
            let s = action(&g, &scaled_state(&wave.state, 1.0 + a), p, lambda * omega).unwrap();
            s - s_base + 2.0 * (lambda - 1.0) * a * omega * omega * mass
        };
        // Quadratic remainder: resid(a)/a^2 stays within a fixed band while
        // a spans two decades.
        let c2 = resid(1e-2) / 1e-4;
        let c3 = resid(1e-3) / 1e-6;
        let c4 = resid(1e-4) / 1e-8;
        for (c, a) in [(c3, 1e-3), (c4, 1e-4)] {
            assert!(
                (c - c2).abs() <= 0.2 * c2.abs().max(1.0),
                "lambda={lambda}, a={a}: remainder/a^2 drifted from {c2:.6e} to {c:.6e}"
            );
        }
    }
}

#[test]
fn main_part_of_virial_slope_is_linear_in_amplitude() {
    // -((p+3)/(p-1)) 2E(u0) - (16 omega/(p-1)) Q(u0)
    //   = ((5-p)/(p-1)) 4 a omega^2 mass + O(a^2) at the critical frequency.
    let g = grid();
    for p in [2.0, 3.0, 4.0] {
        let params = SolitonParams64::critical(p).unwrap();
        let omega = params.omega();
        let wave = build_family(params, &g).unwrap();
        let mass = wave.phi_l2sq(&g);
        let main = |a: f64| {
            let u0 = scaled_state(&wave.state, 1.0 + a);
            let e = energy(&g, &u0, p).unwrap();
            let q = charge(&g, &u0);
            -(p + 3.0) / (p - 1.0) * 2.0 * e - 16.0 * omega / (p - 1.0) * q
        };
        assert!(main(0.0).abs() < 1e-10, "main part vanishes at a=0, p={p}");
        let linear = |a: f64| (5.0 - p) / (p - 1.0) * 4.0 * a * omega * omega * mass;
        let c2 = (main(1e-2) - linear(1e-2)) / 1e-4;
        let c3 = (main(1e-3) - linear(1e-3)) / 1e-6;
        let c4 = (main(1e-4) - linear(1e-4)) / 1e-8;
        for c in [c3, c4] {
            assert!(
                (c - c2).abs() <= 0.2 * c2.abs().max(1.0),
                "p={p}: remainder/a^2 drifted from {c2:.6e} to {c:.6e}"
            );
        }
    }
}

#[test]
fn charge_gradient_represents_the_first_variation() {
    let g = Grid64::new(40.0, 128).unwrap();
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut rand_field = |scale: f64| -> Vec<Complex<f64>> {
        (0..128)
            .map(|_| {
                Complex::new(
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                )
            })
            .collect()
    };
    let u = rand_field(1.0);
    let v = rand_field(1.0);
    let s = PhaseState::new(u.clone(), v.clone(), 0.0);
    let grad = charge_gradient(&g, &s);
    let f = rand_field(1.0);
    let h = rand_field(1.0);
    // Q is quadratic: Q(s + eps w) - Q(s) = eps <Q'(s), w> + eps^2 Q(w).
    let eps = 1e-3;
    let sp = PhaseState::new(
        u.iter().zip(&f).map(|(a, b)| a + b * eps).collect(),
        v.iter().zip(&h).map(|(a, b)| a + b * eps).collect(),
        0.0,
    );
    let w = PhaseState::new(f.clone(), h.clone(), 0.0);
    let lhs = charge(&g, &sp) - charge(&g, &s) - eps * eps * charge(&g, &w);
    let pairing = kgsim_core::field::pair_inner(
        &g,
        &grad,
        &kgsim_core::field::Pair::new(f, h),
    );
    assert_rel(lhs, eps * pairing, 1e-9, "first variation of Q");
}
