//! Thermalization strokes and the second-order generalized Gibbs state.
//!
//! Every map is linear and accepts arbitrary (non-Hermitian, non-normalized)
//! branch operators. The Lindblad solution is written in the energy basis of
//! the stroke Hamiltonian with populations relaxing at `2γ` and the coherence
//! `⟨+|X|-⟩` decaying at `γ` while rotating as `e^{-2iθ}`.

use core::f64::consts::PI;

use crate::core_states::{projector, DensityMatrix, Level, StrokeHamiltonian};
use crate::error::{non_negative, positive, OttoError, Result};
use crate::mat::{apply_superop, superop_of, Mat2, Superop, C64};
use crate::quad::{integrate, integrate_to_infinity, Tolerance};

/// Bound on the decoupling defect for a channel to count as decoupled.
pub const DECOUPLING_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpec {
    beta: f64,
    gamma: f64,
    omega_d: f64,
}

impl BathSpec {
    pub fn new(beta: f64, gamma: f64, omega_d: f64) -> Result<Self> {
        Ok(BathSpec {
            beta: positive("inverse temperature", beta)?,
            gamma: non_negative("coupling rate", gamma)?,
            omega_d: positive("Drude cutoff", omega_d)?,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega_d(&self) -> f64 {
        self.omega_d
    }

    /// Ohmic density with Lorentz-Drude cutoff.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let r = omega / self.omega_d;
        self.gamma * omega / (1.0 + r * r)
    }
}

/// `d|+⟩⟨+| + (1-d)|-⟩⟨-| + [q|+⟩⟨-| + h.c.]`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalState {
    pub d: f64,
    pub q: C64,
}

impl ThermalState {
    pub fn new(d: f64, q: C64) -> Result<Self> {
        if !(0.0..=1.0).contains(&d) {
            return Err(OttoError::InvalidState("excited population outside [0, 1]"));
        }
        DensityMatrix::from_populations(d, q)?;
        Ok(ThermalState { d, q })
    }

    pub fn gibbs(beta: f64, h: &StrokeHamiltonian) -> Self {
        ThermalState { d: h.gibbs_excited_population(beta), q: C64::new(0.0, 0.0) }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new((1.0 - self.d).into(), self.q.conj(), self.q, self.d.into())
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_populations(self.d, self.q).expect("validated at construction")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ThermalMap {
    /// Projection onto a fixed target, `X ↦ ρ_target Tr X`.
    Perfect { target: ThermalState },
    /// Closed-form Lindblad evolution for dimensionless time `θ = ετ`.
    Lindblad { bath: BathSpec, h: StrokeHamiltonian, theta: f64 },
    /// Arbitrary linear channel given by its superoperator.
    Channel(Superop),
}

impl ThermalMap {
    pub fn lindblad(bath: BathSpec, h: StrokeHamiltonian, theta: f64) -> Result<Self> {
        Ok(ThermalMap::Lindblad { bath, h, theta: non_negative("thermalization time", theta)? })
    }

    /// Channel `X ↦ Σ K X K†`; completeness of the Kraus set is the caller's.
    pub fn from_kraus(kraus: &[Mat2]) -> Self {
        ThermalMap::Channel(superop_of(|x| kraus.iter().map(|k| Mat2::sandwich(k, x)).fold(Mat2::ZERO, |a, b| a + b)))
    }

    pub fn apply(&self, op: &Mat2) -> Mat2 {
        match self {
            ThermalMap::Perfect { target } => apply_perfect_unnormalized(target, op),
            ThermalMap::Lindblad { bath, h, theta } => lindblad_solution(bath, h, *theta, op),
            ThermalMap::Channel(s) => apply_superop(s, op),
        }
    }

    pub fn superoperator(&self) -> Superop {
        match self {
            ThermalMap::Channel(s) => *s,
            _ => superop_of(|x| self.apply(x)),
        }
    }

    /// Largest violation of population/coherence decoupling:
    /// `Tr[L Φ(P)]`, `Tr[P Φ(L)]` and `Tr[L Φ(L)]` for both swap operators `L`.
    pub fn decoupling_defect(&self) -> f64 {
        let swaps = [Mat2::unit(1, 0), Mat2::unit(0, 1)];
        let projs = [projector(Level::Ground), projector(Level::Excited)];
        let mut worst: f64 = 0.0;
        for l in &swaps {
            for p in &projs {
                worst = worst.max((*l * self.apply(p)).trace().norm());
                worst = worst.max((*p * self.apply(l)).trace().norm());
            }
            worst = worst.max((*l * self.apply(l)).trace().norm());
        }
        worst
    }

    pub fn is_decoupled(&self) -> bool {
        self.decoupling_defect() <= DECOUPLING_TOL
    }
}

pub fn apply_perfect(target: &ThermalState, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_noisy(apply_perfect_unnormalized(target, rho.matrix())).expect("target is a valid state")
}

pub fn apply_perfect_unnormalized(target: &ThermalState, op: &Mat2) -> Mat2 {
    target.matrix().scale(op.trace())
}

pub fn apply_lindblad(bath: &BathSpec, h: &StrokeHamiltonian, theta: f64, op: &Mat2) -> Result<Mat2> {
    non_negative("thermalization time", theta)?;
    Ok(lindblad_solution(bath, h, theta, op))
}

fn lindblad_solution(bath: &BathSpec, h: &StrokeHamiltonian, theta: f64, op: &Mat2) -> Mat2 {
    let p_eq = h.gibbs_excited_population(bath.beta);
    let relax = libm::exp(-2.0 * bath.gamma * theta);
    let tr = op.trace();
    let excited = tr * p_eq + (op.get(1, 1) - tr * p_eq) * relax;
    let rotate = C64::from_polar(libm::exp(-bath.gamma * theta), -2.0 * theta);
    Mat2::new(tr - excited, op.get(0, 1) * rotate.conj(), op.get(1, 0) * rotate, excited)
}

/// Bath force autocorrelation at imaginary time, `C(-iλ)` for `0 < λ < β`.
pub fn imaginary_time_correlator(bath: &BathSpec, lambda: f64) -> Result<f64> {
    let beta = bath.beta;
    let tol = Tolerance { abs: 0.0, rel: 1e-11, max_intervals: 4000 };
    let est = integrate_to_infinity(
        |w| {
            // ω / (1 - e^{-βω}) tends to 1/β at the origin
            let bose = if w > 0.0 { w / -libm::expm1(-beta * w) } else { 1.0 / beta };
            let r = w / bath.omega_d;
            bath.gamma / (1.0 + r * r) * bose * (libm::exp(-w * lambda) + libm::exp(-w * (beta - lambda))) / PI
        },
        0.0,
        tol,
    )?;
    Ok(est.value)
}

/// Reduced equilibrium state to second order in the coupling `S = σ_z + σ_x`.
pub fn generalized_gibbs(bath: &BathSpec, h: &StrokeHamiltonian) -> Result<ThermalState> {
    let beta = bath.beta;
    let eps = h.epsilon();
    let bare = h.gibbs_excited_population(beta);
    if bath.gamma == 0.0 {
        return ThermalState::new(bare, C64::new(0.0, 0.0));
    }
    let tol = Tolerance { abs: 0.0, rel: 1e-9, max_intervals: 2000 };
    let mut failure = None;
    let mut corr = |lambda: f64| match imaginary_time_correlator(bath, lambda) {
        Ok(c) => c,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let pop = integrate(
        |l| (beta - l) * libm::sinh(2.0 * eps * l) / (1.0 + libm::exp(-2.0 * beta * eps)) * corr(l),
        0.0,
        beta,
        tol,
    )?;
    let coh = integrate(
        |l| {
            let g = libm::exp(2.0 * beta * eps) * libm::expm1(-2.0 * eps * l) + libm::expm1(2.0 * eps * l);
            g / eps * corr(l)
        },
        0.0,
        beta,
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    ThermalState::new(bare * (1.0 + 2.0 * pop.value), C64::new(0.5 * bare * coh.value, 0.0))
}
