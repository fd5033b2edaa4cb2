//! Single-cycle superoperators, their spectra and the periodic steady state.

use alloc::vec::Vec;

use nalgebra::{Schur, Vector4};

use crate::core_states::DensityMatrix;
use crate::engine::{Engine, Scheme, CYCLE};
use crate::error::{positive, OttoError, Result};
use crate::mat::{apply_superop, superop_of, Mat2, Superop, C64};
use crate::pathsum_oracle::for_each_branch;

/// Eigenvalues within this distance of one count as unit eigenvalues.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Monitoring {
    /// Energies read out after every stroke.
    Measurements,
    /// Energies imprinted on accumulating pointers; the cycle map is unmonitored.
    Contacts,
}

impl From<Scheme> for Monitoring {
    fn from(s: Scheme) -> Self {
        if s.is_contact() {
            Monitoring::Contacts
        } else {
            Monitoring::Measurements
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleSuperoperator {
    pub matrix: Superop,
    pub kind: Monitoring,
}

impl CycleSuperoperator {
    pub fn apply(&self, x: &Mat2) -> Mat2 {
        apply_superop(&self.matrix, x)
    }
}

pub fn build_cycle_superoperator(engine: &Engine, kind: Monitoring) -> CycleSuperoperator {
    let matrix = match kind {
        Monitoring::Contacts => superop_of(|x| engine.cycle_map(x)),
        Monitoring::Measurements => {
            let mut damping = [0.0; 4];
            for (d, c) in damping.iter_mut().zip(CYCLE.iter()) {
                *d = engine.pointer().coherence_damping(engine.half_gap(c.stage));
            }
            superop_of(|x| {
                (0..4).fold(*x, |acc, k| {
                    let dephased = acc.diagonal_part() + acc.off_diagonal_part().scale_re(damping[k]);
                    engine.stroke_after(k, &dephased)
                })
            })
        }
    };
    CycleSuperoperator { matrix, kind }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Sorted by decreasing modulus.
    pub eigenvalues: [C64; 4],
    /// Modulus of the second eigenvalue.
    pub lambda2: f64,
}

impl SpectrumReport {
    pub fn unit_multiplicity(&self) -> usize {
        self.eigenvalues.iter().filter(|z| (**z - 1.0).norm() < UNIT_EIGENVALUE_TOL).count()
    }
}

pub fn spectrum(sop: &CycleSuperoperator) -> SpectrumReport {
    let schur = Schur::new(sop.matrix);
    let values: Vector4<C64> = match schur.eigenvalues() {
        Some(v) => v,
        None => schur.unpack().1.diagonal(),
    };
    let mut eigenvalues = [values[0], values[1], values[2], values[3]];
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    SpectrumReport { eigenvalues, lambda2: eigenvalues[1].norm() }
}

/// Unit-trace fixed point of the cycle map.
pub fn invariant_state(sop: &CycleSuperoperator) -> Result<DensityMatrix> {
    if spectrum(sop).unit_multiplicity() > 1 {
        return Err(OttoError::DegenerateFixedPoint);
    }
    let mut a = sop.matrix - Superop::identity();
    // trace preservation makes rows 0 and 3 dependent; swap row 3 for the trace row
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    a.set_row(3, &nalgebra::RowVector4::new(one, zero, zero, one));
    let rhs = Vector4::new(zero, zero, zero, one);
    let v = a.lu().solve(&rhs).ok_or(OttoError::DegenerateFixedPoint)?;
    let x = Mat2::unstack([v[0], v[1], v[2], v[3]]);
    let rho = DensityMatrix::from_noisy(x)?;
    if sop.apply(rho.matrix()).max_abs_diff(rho.matrix()) > 1e-10 {
        return Err(OttoError::DegenerateFixedPoint);
    }
    Ok(rho)
}

/// Periodic state of the unmonitored engine.
pub fn invariant_cycle_state(engine: &Engine) -> Result<DensityMatrix> {
    invariant_state(&build_cycle_superoperator(engine, Monitoring::Contacts))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleAverages {
    pub work: f64,
    pub heat: f64,
}

/// Per-cycle work and heat once the engine has reached its periodic state.
pub fn asymptotic_averages(engine: &Engine, kind: Monitoring) -> Result<CycleAverages> {
    let sop = build_cycle_superoperator(engine, kind);
    let rho = invariant_state(&sop)?;
    let mut work = C64::new(0.0, 0.0);
    let mut heat = C64::new(0.0, 0.0);
    for_each_branch(engine, &rho, 1, |b| {
        let w = match kind {
            Monitoring::Measurements => b.value * b.suppression_rm(engine),
            Monitoring::Contacts => b.value,
        };
        work += w * b.work_center_energy(engine);
        heat += w * b.heat_center_energy(engine);
    })?;
    Ok(CycleAverages { work: work.re, heat: heat.re })
}

pub fn asymptotic_work_per_cycle(engine: &Engine, kind: Monitoring) -> Result<f64> {
    asymptotic_averages(engine, kind).map(|a| a.work)
}

/// Total heat-stroke duration `θ(1/ε_h + 1/ε_c)`.
pub fn thermalization_duration(theta: f64, eps_c: f64, eps_h: f64) -> f64 {
    theta * (1.0 / eps_h + 1.0 / eps_c)
}

/// Dimensionless thermalization time for a total heat-stroke duration.
pub fn theta_for_duration(t2: f64, eps_c: f64, eps_h: f64) -> f64 {
    t2 / (1.0 / eps_h + 1.0 / eps_c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerReport {
    pub work_per_cycle: f64,
    pub heat_per_cycle: f64,
    /// `-W/(T₁ + T₂)`; negative in the dud regime.
    pub power: f64,
    pub efficiency: Option<f64>,
    pub lambda2: f64,
}

impl PowerReport {
    pub fn is_dud(&self) -> bool {
        self.work_per_cycle > 0.0
    }
}

pub fn asymptotic_power(engine: &Engine, kind: Monitoring, t1: f64, t2: f64) -> Result<PowerReport> {
    positive("work-stroke duration", t1)?;
    positive("heat-stroke duration", t2)?;
    let avg = asymptotic_averages(engine, kind)?;
    Ok(PowerReport {
        work_per_cycle: avg.work,
        heat_per_cycle: avg.heat,
        power: -avg.work / (t1 + t2),
        efficiency: crate::mixture::efficiency(avg.work, avg.heat),
        lambda2: spectrum(&build_cycle_superoperator(engine, kind)).lambda2,
    })
}

/// States reached by repeatedly applying the cycle map.
pub fn iterate(sop: &CycleSuperoperator, start: &Mat2, cycles: usize) -> Vec<Mat2> {
    let mut out = Vec::with_capacity(cycles);
    let mut x = *start;
    for _ in 0..cycles {
        x = sop.apply(&x);
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_states::{PointerSpec, Stage, StrokeHamiltonian, WorkStroke};
    use crate::thermal_maps::{BathSpec, ThermalMap, ThermalState};

    fn reference_point(sigma: f64) -> Engine {
        let cold = StrokeHamiltonian::new(1.0, Stage::Cold).unwrap();
        let hot = StrokeHamiltonian::new(3.7, Stage::Hot).unwrap();
        Engine::new(
            1.0,
            3.7,
            WorkStroke::new(0.05, 0.0).unwrap(),
            ThermalMap::lindblad(BathSpec::new(0.025, 0.025, 0.2).unwrap(), hot, 8.0).unwrap(),
            ThermalMap::lindblad(BathSpec::new(0.25, 0.025, 0.2).unwrap(), cold, 8.0).unwrap(),
            PointerSpec::new(sigma).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn fixed_point_agrees_with_power_iteration() {
        let e = reference_point(0.2);
        for kind in [Monitoring::Contacts, Monitoring::Measurements] {
            let sop = build_cycle_superoperator(&e, kind);
            let rho = invariant_state(&sop).unwrap();
            let iterated = iterate(&sop, &Mat2::IDENTITY.scale_re(0.5), 10_000).pop().unwrap();
            assert!(iterated.max_abs_diff(rho.matrix()) < 1e-10);
        }
    }

    #[test]
    fn reference_steady_state_and_gaps() {
        let e = reference_point(0.2);
        let rho = invariant_cycle_state(&e).unwrap();
        assert!((rho.excited_population() - 0.43943).abs() < 1e-5);
        assert!((rho.coherence() - C64::new(-0.02159, 0.04770)).norm() < 1e-5);
        let rc = spectrum(&build_cycle_superoperator(&e, Monitoring::Contacts));
        let rm = spectrum(&build_cycle_superoperator(&e, Monitoring::Measurements));
        assert!((rc.eigenvalues[0] - 1.0).norm() < 1e-12);
        assert!((rc.lambda2 - 0.59579).abs() < 1e-5);
        assert!((rm.lambda2 - 0.363956).abs() < 1e-6);
        assert!(rm.lambda2 <= rc.lambda2);
    }

    #[test]
    fn perfect_thermalization_is_rank_one() {
        let target = ThermalState::new(0.3, C64::new(0.0, 0.0)).unwrap();
        let e = reference_point(0.2).with_cold_map(ThermalMap::Perfect { target });
        let sop = build_cycle_superoperator(&e, Monitoring::Contacts);
        assert!(spectrum(&sop).lambda2 < 1e-12);
        assert!(invariant_state(&sop).unwrap().matrix().max_abs_diff(&target.matrix()) < 1e-12);
    }

    #[test]
    fn wide_pointer_removes_dephasing() {
        let e = reference_point(1e6);
        let rm = build_cycle_superoperator(&e, Monitoring::Measurements);
        let rc = build_cycle_superoperator(&e, Monitoring::Contacts);
        assert!((rm.matrix - rc.matrix).iter().all(|z| z.norm() < 1e-11));
    }

    #[test]
    fn no_dissipation_is_degenerate() {
        let cold = StrokeHamiltonian::new(1.0, Stage::Cold).unwrap();
        let hot = StrokeHamiltonian::new(3.7, Stage::Hot).unwrap();
        let e = reference_point(0.2)
            .with_hot_map(ThermalMap::lindblad(BathSpec::new(0.025, 0.0, 0.2).unwrap(), hot, 8.0).unwrap())
            .with_cold_map(ThermalMap::lindblad(BathSpec::new(0.25, 0.0, 0.2).unwrap(), cold, 8.0).unwrap());
        let sop = build_cycle_superoperator(&e, Monitoring::Contacts);
        assert_eq!(invariant_state(&sop).unwrap_err(), OttoError::DegenerateFixedPoint);
    }

    #[test]
    fn asymptotic_work_reference() {
        let e = reference_point(0.2);
        assert!((asymptotic_work_per_cycle(&e, Monitoring::Contacts).unwrap() - 0.063358).abs() < 1e-6);
        assert!((asymptotic_work_per_cycle(&e, Monitoring::Measurements).unwrap() + 0.014686).abs() < 1e-6);
    }

    #[test]
    fn heat_duration() {
        assert!((thermalization_duration(8.0, 1.0, 3.7) - 10.162_162_162_162_161).abs() < 1e-12);
        assert!((theta_for_duration(thermalization_duration(8.0, 1.0, 3.7), 1.0, 3.7) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn power_scales_with_duration() {
        let e = reference_point(0.2);
        let a = asymptotic_power(&e, Monitoring::Measurements, 2.0, 10.0).unwrap();
        let b = asymptotic_power(&e, Monitoring::Measurements, 4.0, 20.0).unwrap();
        assert!((a.power - 2.0 * b.power).abs() < 1e-14);
        let rc = asymptotic_power(&e, Monitoring::Contacts, 2.0, 10.0).unwrap();
        assert!(rc.is_dud() && rc.power < 0.0);
        assert!(asymptotic_power(&e, Monitoring::Contacts, 0.0, 10.0).is_err());
    }
}
