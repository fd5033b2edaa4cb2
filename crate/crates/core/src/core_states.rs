//! Qubit states, stroke Hamiltonians and work-stroke unitaries.
//!
//! Every matrix lives in the energy-label basis `(|-⟩, |+⟩)` of the stroke it
//! belongs to. The work-stroke unitaries carry cold labels to hot labels and
//! back, so no explicit frame objects exist.

use core::f64::consts::{FRAC_PI_4, PI};

use crate::error::{non_negative, positive, OttoError, Result};
use crate::gamma::ln_gamma;
use crate::mat::{Mat2, C64};

/// Tolerance for the density-matrix invariants.
pub const STATE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Ground,
    Excited,
}

impl Level {
    pub const BOTH: [Level; 2] = [Level::Ground, Level::Excited];

    pub fn index(self) -> usize {
        match self {
            Level::Ground => 0,
            Level::Excited => 1,
        }
    }

    /// -1 for ground, +1 for excited.
    pub fn sign(self) -> i32 {
        match self {
            Level::Ground => -1,
            Level::Excited => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Cold,
    Hot,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrokeHamiltonian {
    epsilon: f64,
    stage: Stage,
}

impl StrokeHamiltonian {
    pub fn new(epsilon: f64, stage: Stage) -> Result<Self> {
        Ok(StrokeHamiltonian { epsilon: positive("half-gap", epsilon)?, stage })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn energy(&self, level: Level) -> f64 {
        level.sign() as f64 * self.epsilon
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::real(-self.epsilon, 0.0, 0.0, self.epsilon)
    }

    pub fn projector(&self, level: Level) -> Mat2 {
        projector(level)
    }

    /// Excited population of `e^{-βH}/Z`.
    pub fn gibbs_excited_population(&self, beta: f64) -> f64 {
        // 1 / (1 + e^{2βε}) without overflow
        let x = 2.0 * beta * self.epsilon;
        if x > 0.0 {
            let e = libm::exp(-x);
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + libm::exp(x))
        }
    }
}

/// Rank-one projector onto a level; identical in the cold and hot label frames.
pub fn projector(level: Level) -> Mat2 {
    Mat2::unit(level.index(), level.index())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkStroke {
    alpha: f64,
    phi: f64,
}

impl WorkStroke {
    pub fn new(alpha: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(OttoError::TransitionProbability(alpha));
        }
        if !phi.is_finite() {
            return Err(OttoError::Negative { name: "phase (finite)", value: phi });
        }
        Ok(WorkStroke { alpha, phi })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Compression stroke, rows in hot labels and columns in cold labels.
    pub fn forward_unitary(&self) -> Mat2 {
        let keep = libm::sqrt(1.0 - self.alpha);
        let flip = libm::sqrt(self.alpha);
        let phase = C64::from_polar(keep, self.phi);
        Mat2::new(phase, flip.into(), (-flip).into(), phase.conj())
    }

    /// Expansion stroke `C U† C`, i.e. the transpose of the forward unitary.
    pub fn reverse_unitary(&self) -> Mat2 {
        self.forward_unitary().transpose()
    }

    /// Stroke parameters of a linear Landau-Zener sweep lasting `t1 / 2`.
    pub fn landau_zener(eps_c: f64, eps_h: f64, t1: f64) -> Result<Self> {
        let delta = landau_zener_delta(eps_c, eps_h, t1)?;
        let alpha = libm::exp(-2.0 * PI * delta);
        let phi = FRAC_PI_4 - delta * (libm::log(delta) - 1.0) - ln_gamma(C64::new(1.0, -delta)).im;
        WorkStroke::new(alpha, phi)
    }
}

/// Adiabaticity parameter δ of the sweep; α = e^{-2πδ}.
pub fn landau_zener_delta(eps_c: f64, eps_h: f64, t1: f64) -> Result<f64> {
    positive("cold half-gap", eps_c)?;
    positive("work-stroke duration", t1)?;
    if !(eps_h > eps_c) {
        return Err(OttoError::GapOrdering { eps_c, eps_h });
    }
    let ratio = eps_h / eps_c;
    Ok(eps_c * t1 / (4.0 * libm::sqrt(ratio * ratio - 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointerSpec {
    sigma: f64,
}

impl PointerSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        Ok(PointerSpec { sigma: non_negative("pointer width", sigma)? })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `exp(-gap² / (8Σ²))`, with the sharp-pointer limit taken exactly.
    pub fn suppression(&self, gap: f64) -> f64 {
        if gap == 0.0 {
            1.0
        } else if self.sigma == 0.0 {
            0.0
        } else {
            libm::exp(-gap * gap / (8.0 * self.sigma * self.sigma))
        }
    }

    /// Damping of a coherence between levels `±ε` read by one pointer.
    pub fn coherence_damping(&self, epsilon: f64) -> f64 {
        self.suppression(2.0 * epsilon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn new(m: Mat2) -> Result<Self> {
        if m.max_abs_diff(&m.adjoint()) > STATE_TOL {
            return Err(OttoError::InvalidState("not Hermitian"));
        }
        if (m.trace() - 1.0).norm() > STATE_TOL {
            return Err(OttoError::InvalidState("trace differs from one"));
        }
        if m.hermitian_eigenvalues()[0] < -STATE_TOL {
            return Err(OttoError::InvalidState("negative eigenvalue"));
        }
        Ok(DensityMatrix(m))
    }

    /// `d|+⟩⟨+| + (1-d)|-⟩⟨-| + q|+⟩⟨-| + h.c.`
    pub fn from_populations(d: f64, q: C64) -> Result<Self> {
        DensityMatrix::new(Mat2::new((1.0 - d).into(), q.conj(), q, d.into()))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::IDENTITY.scale_re(0.5))
    }

    /// Re-Hermitize and renormalize a numerically noisy state, then validate.
    pub fn from_noisy(m: Mat2) -> Result<Self> {
        let h = (m + m.adjoint()).scale_re(0.5);
        let tr = h.trace().re;
        if !(tr.abs() > 0.0) {
            return Err(OttoError::InvalidState("zero trace"));
        }
        DensityMatrix::new(h.scale_re(1.0 / tr))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn excited_population(&self) -> f64 {
        self.0.get(1, 1).re
    }

    /// `⟨+|ρ|-⟩`
    pub fn coherence(&self) -> C64 {
        self.0.get(1, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitary_defect(u: &Mat2) -> f64 {
        (u.adjoint() * *u).max_abs_diff(&Mat2::IDENTITY)
    }

    #[test]
    fn adiabatic_stroke_is_identity() {
        let s = WorkStroke::new(0.0, 0.0).unwrap();
        assert!(s.forward_unitary().max_abs_diff(&Mat2::IDENTITY) < 1e-15);
        assert!(s.reverse_unitary().max_abs_diff(&Mat2::IDENTITY) < 1e-15);
    }

    #[test]
    fn full_transition_swaps_levels() {
        let u = WorkStroke::new(1.0, 0.3).unwrap().forward_unitary();
        assert!(u.max_abs_diff(&Mat2::real(0.0, 1.0, -1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn transition_moduli() {
        let u = WorkStroke::new(0.1, 0.0).unwrap().forward_unitary();
        assert!((u.get(1, 1).norm_sqr() - 0.9).abs() < 1e-14);
        assert!((u.get(1, 0).norm_sqr() - 0.1).abs() < 1e-14);
        assert!((u.get(0, 1).norm_sqr() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn reverse_is_conjugated_adjoint() {
        let s = WorkStroke::new(0.1, 0.3).unwrap();
        let u = s.forward_unitary();
        let expected = u.adjoint().conj();
        assert!(s.reverse_unitary().max_abs_diff(&expected) < 1e-15);
        // entries written out from the antiunitary relation
        let keep = libm::sqrt(0.9);
        let flip = libm::sqrt(0.1);
        let ut = s.reverse_unitary();
        assert!((ut.get(1, 1) - C64::from_polar(keep, -0.3)).norm() < 1e-15);
        assert!((ut.get(0, 0) - C64::from_polar(keep, 0.3)).norm() < 1e-15);
        assert!((ut.get(1, 0) - C64::new(flip, 0.0)).norm() < 1e-15);
        assert!((ut.get(0, 1) - C64::new(-flip, 0.0)).norm() < 1e-15);
        assert!(unitary_defect(&ut) < 1e-14);
    }

    #[test]
    fn landau_zener_unit_delta() {
        let t1 = 4.0 * libm::sqrt(12.69);
        let delta = landau_zener_delta(1.0, 3.7, t1).unwrap();
        assert!((delta - 1.0).abs() < 1e-14);
        let s = WorkStroke::landau_zener(1.0, 3.7, t1).unwrap();
        assert!((s.alpha() - libm::exp(-2.0 * PI)).abs() < 1e-16);
        assert!((s.alpha() - 1.867_442_731_707_988_8e-3).abs() < 1e-15);
        // π/4 + 1 - arg Γ(1 - i), reference from arbitrary precision arithmetic
        assert!((s.phi() - 1.483_757_842_929_915_1).abs() < 1e-12);
    }

    #[test]
    fn landau_zener_rejects_inverted_gaps() {
        assert!(matches!(WorkStroke::landau_zener(3.7, 1.0, 1.0), Err(OttoError::GapOrdering { .. })));
        assert!(WorkStroke::landau_zener(1.0, 1.0, 1.0).is_err());
        assert!(WorkStroke::landau_zener(1.0, 3.7, 0.0).is_err());
    }

    #[test]
    fn slow_sweeps_are_adiabatic() {
        let s = WorkStroke::landau_zener(1.0, 3.7, 1e4).unwrap();
        assert!(s.alpha() < 1e-300);
    }

    #[test]
    fn projectors_resolve_identity() {
        let h = StrokeHamiltonian::new(3.7, Stage::Hot).unwrap();
        let (pm, pp) = (h.projector(Level::Ground), h.projector(Level::Excited));
        assert_eq!(pm + pp, Mat2::IDENTITY);
        assert!((pp * pm).is_zero());
        assert_eq!(pp * pp, pp);
        assert!(((pp * h.matrix()).trace() - 3.7).norm() < 1e-15);
        assert!(((pm * h.matrix()).trace() + 3.7).norm() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_populations(0.4, C64::new(0.1, -0.2)).is_ok());
        assert!(DensityMatrix::from_populations(0.4, C64::new(0.6, 0.0)).is_err());
        assert!(DensityMatrix::new(Mat2::real(0.5, 0.1, 0.0, 0.5)).is_err());
        assert!(DensityMatrix::new(Mat2::real(0.5, 0.0, 0.0, 0.6)).is_err());
    }

    #[test]
    fn pointer_suppression_limits() {
        let sharp = PointerSpec::new(0.0).unwrap();
        assert_eq!(sharp.suppression(0.0), 1.0);
        assert_eq!(sharp.suppression(1e-3), 0.0);
        let p = PointerSpec::new(0.2).unwrap();
        assert!((p.coherence_damping(1.0) - libm::exp(-12.5)).abs() < 1e-18);
        assert!(PointerSpec::new(-0.1).is_err());
    }
}
