//! Engine parameters and the fixed four-contact schedule of one cycle.
//!
//! A cycle is: contact (cold) → U → contact (hot) → Φ_h → contact (hot) → Ũ →
//! contact (cold) → Φ_c. Work collects `-e1 + e2 - e3 + e4`, heat `-e2 + e3`.

use core::fmt;

use crate::core_states::{PointerSpec, Stage, StrokeHamiltonian, WorkStroke};
use crate::error::{positive, OttoError, Result};
use crate::mat::Mat2;
use crate::thermal_maps::ThermalMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Contact {
    pub stage: Stage,
    /// Sign of this contact's energy in the work sum.
    pub work_sign: i32,
    /// Sign of this contact's energy in the heat sum.
    pub heat_sign: i32,
}

pub const CYCLE: [Contact; 4] = [
    Contact { stage: Stage::Cold, work_sign: -1, heat_sign: 0 },
    Contact { stage: Stage::Hot, work_sign: 1, heat_sign: -1 },
    Contact { stage: Stage::Hot, work_sign: -1, heat_sign: 1 },
    Contact { stage: Stage::Cold, work_sign: 1, heat_sign: 0 },
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Work,
    Heat,
}

impl Observable {
    pub fn sign(self, contact: &Contact) -> i32 {
        match self {
            Observable::Work => contact.work_sign,
            Observable::Heat => contact.heat_sign,
        }
    }
}

/// How the engine's energies are registered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// A fresh pointer is read out after every stroke.
    RepeatedMeasurements,
    /// One pointer accumulates the observed quantity and is read once.
    OnePointerContacts,
    /// Work and heat pointers accumulate together and are read once.
    TwoPointerContacts,
}

impl Scheme {
    pub const ALL: [Scheme; 3] =
        [Scheme::RepeatedMeasurements, Scheme::OnePointerContacts, Scheme::TwoPointerContacts];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::RepeatedMeasurements => "RM",
            Scheme::OnePointerContacts => "RC1",
            Scheme::TwoPointerContacts => "RC2",
        }
    }

    pub fn is_contact(self) -> bool {
        !matches!(self, Scheme::RepeatedMeasurements)
    }

    /// Per-component variance of the marginal after `cycles` cycles.
    pub fn marginal_variance(self, observable: Observable, cycles: usize, sigma: f64) -> f64 {
        let s2 = sigma * sigma;
        match (self, observable) {
            (Scheme::RepeatedMeasurements, Observable::Work) => 4.0 * cycles as f64 * s2,
            (Scheme::RepeatedMeasurements, Observable::Heat) => 2.0 * cycles as f64 * s2,
            _ => s2,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Engine {
    cold: StrokeHamiltonian,
    hot: StrokeHamiltonian,
    stroke: WorkStroke,
    hot_map: ThermalMap,
    cold_map: ThermalMap,
    pointer: PointerSpec,
    forward: Mat2,
    reverse: Mat2,
}

impl Engine {
    pub fn new(
        eps_c: f64,
        eps_h: f64,
        stroke: WorkStroke,
        hot_map: ThermalMap,
        cold_map: ThermalMap,
        pointer: PointerSpec,
    ) -> Result<Self> {
        positive("cold half-gap", eps_c)?;
        if !(eps_h > eps_c) || !eps_h.is_finite() {
            return Err(OttoError::GapOrdering { eps_c, eps_h });
        }
        Ok(Engine {
            cold: StrokeHamiltonian::new(eps_c, Stage::Cold)?,
            hot: StrokeHamiltonian::new(eps_h, Stage::Hot)?,
            stroke,
            hot_map,
            cold_map,
            pointer,
            forward: stroke.forward_unitary(),
            reverse: stroke.reverse_unitary(),
        })
    }

    pub fn eps_c(&self) -> f64 {
        self.cold.epsilon()
    }

    pub fn eps_h(&self) -> f64 {
        self.hot.epsilon()
    }

    pub fn hamiltonian(&self, stage: Stage) -> &StrokeHamiltonian {
        match stage {
            Stage::Cold => &self.cold,
            Stage::Hot => &self.hot,
        }
    }

    pub fn half_gap(&self, stage: Stage) -> f64 {
        self.hamiltonian(stage).epsilon()
    }

    pub fn stroke(&self) -> &WorkStroke {
        &self.stroke
    }

    pub fn hot_map(&self) -> &ThermalMap {
        &self.hot_map
    }

    pub fn cold_map(&self) -> &ThermalMap {
        &self.cold_map
    }

    pub fn pointer(&self) -> &PointerSpec {
        &self.pointer
    }

    pub fn sigma(&self) -> f64 {
        self.pointer.sigma()
    }

    pub fn with_pointer(mut self, pointer: PointerSpec) -> Self {
        self.pointer = pointer;
        self
    }

    pub fn with_hot_map(mut self, map: ThermalMap) -> Self {
        self.hot_map = map;
        self
    }

    pub fn with_cold_map(mut self, map: ThermalMap) -> Self {
        self.cold_map = map;
        self
    }

    /// Both thermal channels keep populations and coherences apart.
    pub fn is_decoupled(&self) -> bool {
        self.hot_map.is_decoupled() && self.cold_map.is_decoupled()
    }

    /// The stroke that follows contact `k` (0-based within the cycle).
    pub fn stroke_after(&self, k: usize, x: &Mat2) -> Mat2 {
        match k {
            0 => Mat2::sandwich(&self.forward, x),
            1 => self.hot_map.apply(x),
            2 => Mat2::sandwich(&self.reverse, x),
            _ => self.cold_map.apply(x),
        }
    }

    /// Unmonitored cycle map `Φ_c(Ũ Φ_h(U X U†) Ũ†)`.
    pub fn cycle_map(&self, x: &Mat2) -> Mat2 {
        (0..4).fold(*x, |acc, k| self.stroke_after(k, &acc))
    }

    /// Energy of contact `k` for a level sign ±1.
    pub fn contact_energy(&self, k: usize, level_sign: i32) -> f64 {
        level_sign as f64 * self.half_gap(CYCLE[k].stage)
    }
}

/// Point `cold·ε_c + hot·ε_h` of the integer energy lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub cold: i32,
    pub hot: i32,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { cold: 0, hot: 0 };

    pub fn new(cold: i32, hot: i32) -> Self {
        LatticePoint { cold, hot }
    }

    pub fn energy(&self, eps_c: f64, eps_h: f64) -> f64 {
        self.cold as f64 * eps_c + self.hot as f64 * eps_h
    }

    pub fn shifted(self, stage: Stage, by: i32) -> Self {
        match stage {
            Stage::Cold => LatticePoint { cold: self.cold + by, ..self },
            Stage::Hot => LatticePoint { hot: self.hot + by, ..self },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal_maps::{BathSpec, ThermalState};
    use crate::C64;

    fn engine() -> Engine {
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
    fn rejects_inverted_gaps() {
        let e = engine();
        let r = Engine::new(3.7, 1.0, *e.stroke(), *e.hot_map(), *e.cold_map(), *e.pointer());
        assert!(matches!(r, Err(OttoError::GapOrdering { .. })));
    }

    #[test]
    fn schedule_signs() {
        let work: i32 = CYCLE.iter().map(|c| c.work_sign).sum();
        assert_eq!(work, 0);
        assert_eq!(CYCLE.iter().map(|c| c.heat_sign).collect::<alloc::vec::Vec<_>>(), [0, -1, 1, 0]);
    }

    #[test]
    fn cycle_map_preserves_trace() {
        let e = engine();
        let x = ThermalState::new(0.3, C64::new(0.1, 0.2)).unwrap().matrix();
        assert!((e.cycle_map(&x).trace() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn marginal_widths() {
        let s = 0.2;
        let rm = Scheme::RepeatedMeasurements;
        assert!((rm.marginal_variance(Observable::Work, 5, s) - 0.8).abs() < 1e-15);
        assert!((rm.marginal_variance(Observable::Heat, 5, s) - 0.4).abs() < 1e-15);
        assert!((Scheme::TwoPointerContacts.marginal_variance(Observable::Work, 5, s) - 0.04).abs() < 1e-15);
    }
}
