use otto_core::asymptotics::invariant_cycle_state;
use otto_core::core_states::{DensityMatrix, PointerSpec, Stage, StrokeHamiltonian, WorkStroke};
use otto_core::mat::superop_of;
use otto_core::pathsum_oracle::{analytic_moments_lindblad, joint_pdf_rc, joint_pdf_rm};
use otto_core::quad::{integrate, Tolerance};
use otto_core::thermal_maps::{generalized_gibbs, imaginary_time_correlator, BathSpec, ThermalMap};
use otto_core::{lattice_engine, Engine, Mat2, Observable, Scheme, C64};
use std::f64::consts::PI;

/// Drude correlator from its Matsubara series, with the `1/ν` and `1/ν²`
/// tails summed in closed form.
fn matsubara_correlator(beta: f64, gamma: f64, wd: f64, tau: f64) -> f64 {
    let x = tau / beta;
    let s1 = beta / (2.0 * PI) * -(2.0 * (PI * x).sin()).ln();
    let s2 = (beta / (2.0 * PI)).powi(2) * PI * PI * (x * x - x + 1.0 / 6.0);
    let mut rest = 0.0;
    for n in (1..=20_000).rev() {
        let nu = 2.0 * PI * n as f64 / beta;
        rest += (nu * tau).cos() / (nu * nu * (nu + wd));
    }
    gamma * wd * wd / beta * (1.0 / wd + 2.0 * (s1 - wd * s2 + wd * wd * rest))
}

#[test]
fn correlator_matches_matsubara_series() {
    for (beta, gamma, wd) in [(0.25, 0.5, 0.2), (1.0, 0.1, 1.0), (3.0, 0.7, 2.5)] {
        let bath = BathSpec::new(beta, gamma, wd).unwrap();
        for frac in [0.05, 0.3, 0.5, 0.81] {
            let tau = frac * beta;
            let a = imaginary_time_correlator(&bath, tau).unwrap();
            let b = matsubara_correlator(beta, gamma, wd, tau);
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "β={beta} τ={tau}: {a} vs {b}");
        }
    }
}

fn matsubara_at(bath: &BathSpec, tau: f64) -> f64 {
    matsubara_correlator(bath.beta(), bath.gamma(), bath.omega_d(), tau)
}

/// `e^{xH} S e^{-xH}` for `S = σ_z + σ_x`, `H = diag(-ε, ε)`.
fn coupling_at(x: f64, eps: f64, i: usize, j: usize) -> f64 {
    let s = [[-1.0, 1.0], [1.0, 1.0]];
    let h = [-eps, eps];
    (x * (h[i] - h[j])).exp() * s[i][j]
}

/// Second-order reduced state from the operator expansion of `e^{-β(H + H_B + V)}`.
#[allow(clippy::needless_range_loop)]
fn operator_expansion(bath: &BathSpec, eps: f64) -> [[f64; 2]; 2] {
    let beta = bath.beta();
    let tol = Tolerance { abs: 1e-13, rel: 1e-10, max_intervals: 400 };
    let h = [-eps, eps];
    let e = [(-beta * h[0]).exp(), (-beta * h[1]).exp()];
    let z = e[0] + e[1];
    let mut d = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let inner = |lambda: f64| {
                integrate(
                    |b| (0..2).map(|k| coupling_at(b, eps, i, k) * coupling_at(b - lambda, eps, k, j)).sum(),
                    lambda,
                    beta,
                    tol,
                )
                .unwrap()
                .value
            };
            let outer = integrate(|l| matsubara_at(bath, l) * inner(l), 0.0, beta, tol).unwrap().value;
            d[i][j] = e[i] * outer;
        }
    }
    let tr = d[0][0] + d[1][1];
    let mut rho = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let bare = if i == j { e[i] } else { 0.0 };
            rho[i][j] = bare / z + d[i][j] / z - bare * tr / (z * z);
        }
    }
    rho
}

#[test]
fn generalized_gibbs_matches_operator_expansion() {
    for (beta, eps, gamma, wd) in [(0.25, 1.0, 0.5, 0.2), (1.0, 1.0, 0.1, 1.0)] {
        let bath = BathSpec::new(beta, gamma, wd).unwrap();
        let h = StrokeHamiltonian::new(eps, Stage::Cold).unwrap();
        let got = generalized_gibbs(&bath, &h).unwrap();
        let want = operator_expansion(&bath, eps);
        assert!((got.d - want[1][1]).abs() < 1e-9, "d {} vs {}", got.d, want[1][1]);
        assert!((got.q.re - want[1][0]).abs() < 1e-9 * want[1][0].abs().max(1e-3), "q {} vs {}", got.q, want[1][0]);
        assert!(got.q.im.abs() < 1e-15);
    }
}

#[test]
fn generalized_gibbs_frozen_values() {
    let cases = [
        ((0.25, 1.0, 0.5, 0.2), 0.37852645397327767, -0.001010407281186495),
        ((0.025, 3.7, 0.5, 0.2), 0.4539197159309745, -3.838789660565899e-5),
        ((1.0, 1.0, 0.1, 1.0), 0.12691214461051595, -0.010729313327639909),
    ];
    for ((beta, eps, gamma, wd), d, q) in cases {
        let bath = BathSpec::new(beta, gamma, wd).unwrap();
        let h = StrokeHamiltonian::new(eps, Stage::Cold).unwrap();
        let got = generalized_gibbs(&bath, &h).unwrap();
        assert!((got.d - d).abs() < 1e-10, "{} vs {d}", got.d);
        assert!((got.q.re - q).abs() < 1e-8 * q.abs(), "{} vs {q}", got.q.re);
    }
}

fn reference_engine() -> Engine {
    let cold = StrokeHamiltonian::new(1.0, Stage::Cold).unwrap();
    let hot = StrokeHamiltonian::new(3.7, Stage::Hot).unwrap();
    Engine::new(
        1.0,
        3.7,
        WorkStroke::new(0.05, 0.0).unwrap(),
        ThermalMap::lindblad(BathSpec::new(0.025, 0.025, 0.2).unwrap(), hot, 8.0).unwrap(),
        ThermalMap::lindblad(BathSpec::new(0.25, 0.025, 0.2).unwrap(), cold, 8.0).unwrap(),
        PointerSpec::new(0.2).unwrap(),
    )
    .unwrap()
}

#[test]
fn steady_state_work_means() {
    let e = reference_engine();
    let rho = invariant_cycle_state(&e).unwrap();
    let mean = |n, scheme| {
        lattice_engine::marginal(&e, &rho, n, scheme, Observable::Work).unwrap().moments().mean
    };
    assert!((mean(1, Scheme::RepeatedMeasurements) - 0.0075193385814335476).abs() < 1e-12);
    assert!((mean(1, Scheme::OnePointerContacts) - 0.025565745939432664).abs() < 1e-12);
    assert!((mean(2, Scheme::RepeatedMeasurements) - 0.0009153533193327554).abs() < 1e-12);
    assert!((mean(2, Scheme::TwoPointerContacts) - 0.11119872582465809).abs() < 1e-12);
}

/// Lindblad map whose coherence rotates the other way round.
fn counter_rotating(bath: BathSpec, h: StrokeHamiltonian, theta: f64) -> ThermalMap {
    let proper = ThermalMap::lindblad(bath, h, theta).unwrap();
    ThermalMap::Channel(superop_of(|x| {
        let y = proper.apply(x);
        let damp = (-bath.gamma() * theta).exp();
        let phase = C64::from_polar(damp, 2.0 * theta);
        Mat2::new(y.get(0, 0), x.get(0, 1) * phase.conj(), x.get(1, 0) * phase, y.get(1, 1))
    }))
}

#[test]
fn coherence_rotation_sense_is_pinned_by_contact_work() {
    let hot = StrokeHamiltonian::new(3.7, Stage::Hot).unwrap();
    let bath = BathSpec::new(0.025, 0.3, 0.2).unwrap();
    let base = reference_engine().with_pointer(PointerSpec::new(0.3).unwrap());
    let d = 0.41;
    let rho = DensityMatrix::from_populations(d, C64::new(0.0, 0.0)).unwrap();
    let stroke = WorkStroke::new(0.3, 0.7).unwrap();
    let rebuild = |map| Engine::new(1.0, 3.7, stroke, map, *base.cold_map(), *base.pointer()).unwrap();
    let proper = rebuild(ThermalMap::lindblad(bath, hot, 1.3).unwrap());
    let flipped = rebuild(counter_rotating(bath, hot, 1.3));
    let want = analytic_moments_lindblad(&proper, d).unwrap();
    let rc = |e: &Engine| joint_pdf_rc(e, &rho, 1).unwrap().moments();
    assert!(rc(&proper).max_abs_diff(&want.contacts) < 1e-12);
    assert!((rc(&flipped).work - want.contacts.work).abs() > 1e-3);
    // measured statistics never see the rotation
    let rm = |e: &Engine| joint_pdf_rm(e, &rho, 1).unwrap().moments();
    assert!(rm(&proper).max_abs_diff(&rm(&flipped)) < 1e-12);
}
