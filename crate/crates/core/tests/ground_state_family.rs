//! Standing-wave family contract: closed forms, residuals, scaling
//! identities, and the analytic ω-derivative.

mod common;

use common::{assert_abs, assert_rel};
use num_complex::Complex;

use kgsim_core::grid::norms;
use kgsim_core::ground_state::{build_family, build_phi0, critical_frequency};
use kgsim_core::scalar::cmod;
use kgsim_core::{Grid64, SolitonParams64};

fn grid() -> Grid64 {
    Grid64::new(80.0, 1024).unwrap()
}

#[test]
fn critical_frequency_values() {
    assert_abs(critical_frequency(3.0).unwrap(), std::f64::consts::FRAC_1_SQRT_2, 1e-12, "p=3");
    assert_abs(critical_frequency(2.0).unwrap(), 0.5, 1e-15, "p=2");
    // Monotone increasing in p, vanishing toward p = 1.
    assert!(critical_frequency(1.0001).unwrap() < 0.01);
    let mut last = 0.0;
    for i in 1..40 {
        let p = 1.0 + i as f64 * 0.095;
        let w = critical_frequency(p).unwrap();
        assert!(w > last && w < 1.0);
        last = w;
    }
    assert!(critical_frequency(1.0).is_err());
    assert!(critical_frequency(5.0).is_err());
    assert!(critical_frequency(6.0).is_err());
}

#[test]
fn params_validate_domain() {
    assert!(SolitonParams64::new(3.0, 0.2).is_ok());
    assert!(SolitonParams64::new(1.0, 0.2).is_err());
    assert!(SolitonParams64::new(5.0, 0.2).is_err());
    assert!(SolitonParams64::new(6.0, 0.2).is_err());
    assert!(SolitonParams64::new(3.0, 1.0).is_err());
    assert!(SolitonParams64::new(3.0, -1.2).is_err());
    assert!(SolitonParams64::new(f64::NAN, 0.0).is_err());
    let c = SolitonParams64::critical(3.0).unwrap();
    assert_abs(c.omega(), 1.0 / 2f64.sqrt(), 1e-15, "critical omega");
    assert_abs(c.m2(), 0.5, 1e-15, "m2 at critical");
}

#[test]
fn phi0_matches_closed_forms() {
    let g = grid();
    let phi = build_phi0(3.0, &g).unwrap();
    // p = 3: sqrt(2) sech(x).
    let mut worst = 0.0f64;
    for (j, &x) in g.xs().iter().enumerate() {
        let exact = 2f64.sqrt() * x.cosh().recip();
        worst = worst.max(cmod(phi[j] - Complex::new(exact, 0.0)));
    }
    assert!(worst < 1e-12, "p=3 profile error {worst:.3e}");
    assert_abs(phi[512].re, 2f64.sqrt(), 1e-12, "peak value at p=3");

    let phi2 = build_phi0(2.0, &g).unwrap();
    assert_abs(phi2[512].re, 1.5, 1e-12, "peak value at p=2");

    // Decay below 1e-12 at the boundary for several exponents.
    for p in [1.5, 2.0, 2.5, 3.0, 4.0, 4.5] {
        let f = build_phi0(p, &g).unwrap();
        assert!(f[0].re.abs() < 1e-12, "boundary decay at p={p}");
    }
}

#[test]
fn phi0_rejects_invalid_exponent_and_short_domain() {
    let g = grid();
    assert!(build_phi0(1.0, &g).is_err());
    assert!(build_phi0(5.0, &g).is_err());
    // A domain so short the soliton wraps onto itself: residual check fires
    // (p chosen so the tail is fat).
    let short = Grid64::new(10.0, 64).unwrap();
    assert!(build_phi0(1.5, &short).is_err());
}

#[test]
fn family_profile_shape() {
    let g = grid();
    let wave = build_family(SolitonParams64::critical(3.0).unwrap(), &g).unwrap();
    // phi real, positive, even, decreasing in |x|.
    let n = g.n();
    for j in 0..n {
        assert_eq!(wave.phi[j].im, 0.0, "profile stored as a real field");
        assert!(wave.phi[j].re > 0.0, "positivity");
    }
    // Mirror of node j is node n-j (node 0 sits on the wrap point).
    for j in 1..n / 2 {
        assert!(
            (wave.phi[j].re - wave.phi[n - j].re).abs() < 1e-13,
            "even profile"
        );
    }
    let center = n / 2;
    for j in center..n - 1 {
        assert!(
            wave.phi[j + 1].re <= wave.phi[j].re + 1e-15,
            "monotone decay right of the peak"
        );
    }
    // Phi.v = i omega phi pointwise.
    for j in 0..n {
        let want = Complex::new(0.0, wave.params.omega()) * wave.phi[j];
        assert!(cmod(wave.state.v[j] - want) < 1e-15);
    }
}

#[test]
fn family_critical_p3_is_scaled_sech() {
    let g = grid();
    let wave = build_family(SolitonParams64::critical(3.0).unwrap(), &g).unwrap();
    let s = 1.0 / 2f64.sqrt();
    let mut worst = 0.0f64;
    for (j, &x) in g.xs().iter().enumerate() {
        worst = worst.max((wave.phi[j].re - (s * x).cosh().recip()).abs());
    }
    // The stored profile is periodized, so it exceeds the single-bump
    // closed form by the neighbor-image tails (~1e-12 at this domain size).
    assert!(worst < 5e-12, "profile differs from sech(x/sqrt2): {worst:.3e}");
    assert_rel(wave.phi_l2sq(&g), 2.0 * 2f64.sqrt(), 1e-12, "L2 mass");
}

#[test]
fn family_at_zero_frequency_reduces_to_phi0() {
    let g = grid();
    let wave = build_family(SolitonParams64::new(2.5, 0.0).unwrap(), &g).unwrap();
    let phi0 = build_phi0(2.5, &g).unwrap();
    for j in 0..g.n() {
        assert!(cmod(wave.phi[j] - phi0[j]) < 1e-14);
        assert_eq!(wave.state.v[j], Complex::new(0.0, 0.0), "v vanishes at omega=0");
        assert!(cmod(wave.dphi_domega[j]) < 1e-14, "omega-derivative vanishes at 0");
    }
}

#[test]
fn elliptic_residual_on_the_acceptance_grid() {
    let g = grid();
    for p in [2.0, 2.5, 3.0, 4.0] {
        let wc = critical_frequency(p).unwrap();
        for omega in [0.0, wc / 2.0, wc] {
            let params = SolitonParams64::new(p, omega).unwrap();
            // build_family enforces the 1e-9 sup-norm residual internally.
            let wave = build_family(params, &g);
            assert!(
                wave.is_ok(),
                "family build failed at p={p}, omega={omega}: {:?}",
                wave.err()
            );
        }
    }
}

#[test]
fn family_rejects_undecayed_boundary() {
    // omega -> 1 flattens the profile; on a short domain the boundary value
    // is macroscopic and the build must refuse.
    let g = Grid64::new(20.0, 256).unwrap();
    let params = SolitonParams64::new(3.0, 0.995).unwrap();
    assert!(build_family(params, &g).is_err());
}

#[test]
fn pohozaev_identities() {
    let g = grid();
    for p in [2.0, 2.5, 3.0, 4.0] {
        let wc = critical_frequency(p).unwrap();
        for omega in [0.0, wc / 2.0, wc] {
            let params = SolitonParams64::new(p, omega).unwrap();
            let wave = build_family(params, &g).unwrap();
            let m2 = params.m2();
            let nn = norms(&g, &wave.phi, p).unwrap();
            let grad_sq = nn.h1sq - nn.l2sq;
            let a = grad_sq + m2 * nn.l2sq - nn.lp1;
            let b = grad_sq - m2 * nn.l2sq + 2.0 / (p + 1.0) * nn.lp1;
            let scale = nn.lp1.max(nn.l2sq);
            assert!(
                a.abs() / scale < 1e-9,
                "first profile identity at p={p}, omega={omega}: {a:.3e}"
            );
            assert!(
                b.abs() / scale < 1e-9,
                "second profile identity at p={p}, omega={omega}: {b:.3e}"
            );
        }
    }
}

#[test]
fn omega_derivative_matches_finite_differences_at_second_order() {
    let g = grid();
    let p = 3.0;
    let omega = critical_frequency(p).unwrap();
    let wave = build_family(SolitonParams64::new(p, omega).unwrap(), &g).unwrap();
    let err_at = |h: f64| -> f64 {
        let plus = build_family(SolitonParams64::new(p, omega + h).unwrap(), &g).unwrap();
        let minus = build_family(SolitonParams64::new(p, omega - h).unwrap(), &g).unwrap();
        let mut worst = 0.0f64;
        for j in 0..g.n() {
            let fd = (plus.phi[j].re - minus.phi[j].re) / (2.0 * h);
            worst = worst.max((fd - wave.dphi_domega[j].re).abs());
        }
        worst
    };
    let e1 = err_at(1e-4);
    let e2 = err_at(5e-5);
    let order = (e1 / e2).ln() / 2f64.ln();
    assert!(
        order >= 1.9,
        "finite-difference convergence order {order:.3} (errors {e1:.3e}, {e2:.3e})"
    );
}

#[test]
fn omega_derivative_solves_the_differentiated_profile_equation() {
    // (-dxx + (1 - omega^2) - p phi^{p-1}) d_omega phi = 2 omega phi.
    let g = grid();
    for p in [2.0, 3.0, 4.0] {
        let params = SolitonParams64::critical(p).unwrap();
        let wave = build_family(params, &g).unwrap();
        let omega = params.omega();
        let d2 = g.d2x(&wave.dphi_domega);
        let pot = wave.potential(&g);
        let mut worst = 0.0f64;
        for j in 0..g.n() {
            let lhs = -d2[j].re + (params.m2() - p * pot[j]) * wave.dphi_domega[j].re;
            let rhs = 2.0 * omega * wave.phi[j].re;
            worst = worst.max((lhs - rhs).abs());
        }
        assert!(worst < 1e-7, "identity residual {worst:.3e} at p={p}");
    }
}
