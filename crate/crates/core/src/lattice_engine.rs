//! Polynomial-cost recursion for multi-cycle work and heat marginals.
//!
//! Branch operators sharing the same half-sum lattice point are summed into one
//! 2×2 matrix. A contact moves the ground population of a cell one step against
//! the observable's sign, the excited population one step along it, and keeps
//! coherences in place (damped by the measurement factor for RM).
//!
//! The contact schemes reduce this way only for decoupled channels: then the
//! work gap of every surviving pair is set by the first contact alone, and the
//! pointer suppression folds into the initial state.

use alloc::vec;
use alloc::vec::Vec;

use crate::core_states::{DensityMatrix, Stage};
use crate::engine::{Engine, LatticePoint, Observable, Scheme, CYCLE};
use crate::error::{OttoError, Result};
use crate::mat::{Mat2, C64};
use crate::mixture::{reliability, Component1, Mixture1, Moments1};

/// Cells whose trace norm falls below this are dropped.
pub const CELL_PRUNE: f64 = 1e-16;

/// Dense box of lattice cells; `W = cold·ε_c + hot·ε_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeAccumulator {
    low: LatticePoint,
    cold_len: usize,
    hot_len: usize,
    cells: Vec<Mat2>,
    cycles: usize,
}

impl LatticeAccumulator {
    pub fn delta(x: Mat2) -> Self {
        LatticeAccumulator { low: LatticePoint::ORIGIN, cold_len: 1, hot_len: 1, cells: vec![x], cycles: 0 }
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    fn slot(&self, p: LatticePoint) -> Option<usize> {
        let c = p.cold - self.low.cold;
        let h = p.hot - self.low.hot;
        (c >= 0 && h >= 0 && (c as usize) < self.cold_len && (h as usize) < self.hot_len)
            .then(|| c as usize * self.hot_len + h as usize)
    }

    pub fn get(&self, p: LatticePoint) -> Mat2 {
        self.slot(p).map(|i| self.cells[i]).unwrap_or(Mat2::ZERO)
    }

    fn point(&self, index: usize) -> LatticePoint {
        LatticePoint::new(
            self.low.cold + (index / self.hot_len) as i32,
            self.low.hot + (index % self.hot_len) as i32,
        )
    }

    /// Occupied cells in lattice order.
    pub fn entries(&self) -> impl Iterator<Item = (LatticePoint, Mat2)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, m)| (self.point(i), *m))
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|m| !m.is_zero()).count()
    }

    pub fn total_trace(&self) -> C64 {
        self.cells.iter().map(Mat2::trace).sum()
    }

    /// Largest `|cold|` and `|hot|` coordinate among occupied cells.
    pub fn reach(&self) -> (i32, i32) {
        self.entries()
            .fold((0, 0), |(c, h), (p, _)| (c.max(p.cold.abs()), h.max(p.hot.abs())))
    }

    fn from_fn(low: LatticePoint, cold_len: usize, hot_len: usize, cycles: usize, mut f: impl FnMut(LatticePoint) -> Mat2) -> Self {
        let mut acc = LatticeAccumulator { low, cold_len, hot_len, cells: Vec::with_capacity(cold_len * hot_len), cycles };
        for i in 0..cold_len * hot_len {
            let p = acc.point(i);
            acc.cells.push(f(p));
        }
        acc
    }

    fn prune_and_shrink(&mut self) {
        for m in &mut self.cells {
            if !m.is_zero() && m.trace_norm() < CELL_PRUNE {
                *m = Mat2::ZERO;
            }
        }
        let mut lo = (usize::MAX, usize::MAX);
        let mut hi = (0, 0);
        for (i, m) in self.cells.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let (c, h) = (i / self.hot_len, i % self.hot_len);
            lo = (lo.0.min(c), lo.1.min(h));
            hi = (hi.0.max(c), hi.1.max(h));
        }
        if lo.0 == usize::MAX {
            *self = LatticeAccumulator { cells: vec![Mat2::ZERO], cold_len: 1, hot_len: 1, ..*self };
            return;
        }
        if lo == (0, 0) && hi == (self.cold_len - 1, self.hot_len - 1) {
            return;
        }
        let low = LatticePoint::new(self.low.cold + lo.0 as i32, self.low.hot + lo.1 as i32);
        let old = core::mem::take(&mut self.cells);
        let (old_low, old_hot) = (self.low, self.hot_len);
        *self = LatticeAccumulator::from_fn(low, hi.0 - lo.0 + 1, hi.1 - lo.1 + 1, self.cycles, |p| {
            let c = (p.cold - old_low.cold) as usize;
            let h = (p.hot - old_low.hot) as usize;
            old[c * old_hot + h]
        });
    }
}

/// Damps the cold-basis coherences of `rho` by `e^{-ε_c²/2Σ²}`.
pub fn fold_initial_state_rc(rho: &Mat2, sigma: f64, eps_c: f64) -> Mat2 {
    let damping = crate::core_states::PointerSpec::new(sigma)
        .map(|p| p.coherence_damping(eps_c))
        .unwrap_or(0.0);
    rho.diagonal_part() + rho.off_diagonal_part().scale_re(damping)
}

#[derive(Clone, Copy, Debug)]
pub struct Lattice<'a> {
    engine: &'a Engine,
    scheme: Scheme,
    observable: Observable,
    /// Off-diagonal factor applied at each contact slot.
    damping: [f64; 4],
    fold: bool,
}

impl<'a> Lattice<'a> {
    pub fn new(engine: &'a Engine, scheme: Scheme, observable: Observable) -> Result<Self> {
        if scheme.is_contact() && !engine.is_decoupled() {
            return Err(OttoError::NotDecoupled);
        }
        let mut damping = [1.0; 4];
        if scheme == Scheme::RepeatedMeasurements {
            for (d, c) in damping.iter_mut().zip(CYCLE.iter()) {
                *d = engine.pointer().coherence_damping(engine.half_gap(c.stage));
            }
        }
        let fold = !matches!(
            (scheme, observable),
            (Scheme::RepeatedMeasurements, _) | (Scheme::OnePointerContacts, Observable::Heat)
        );
        Ok(Lattice { engine, scheme, observable, damping, fold })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn observable(&self) -> Observable {
        self.observable
    }

    /// Scales every per-contact damping factor; a factor other than one
    /// deliberately corrupts the recursion.
    #[doc(hidden)]
    pub fn with_corrupted_damping(mut self, scale: f64) -> Self {
        for d in &mut self.damping {
            *d *= scale;
        }
        self
    }

    pub fn start(&self, rho: &DensityMatrix) -> LatticeAccumulator {
        let x = if self.fold {
            fold_initial_state_rc(rho.matrix(), self.engine.sigma(), self.engine.eps_c())
        } else {
            *rho.matrix()
        };
        LatticeAccumulator::delta(x)
    }

    fn contact(&self, acc: &LatticeAccumulator, k: usize) -> LatticeAccumulator {
        let c = CYCLE[k];
        let shift = self.observable.sign(&c);
        let damping = self.damping[k];
        let cell = |ground: C64, excited: C64, source: &Mat2| {
            let off = source.scale_re(damping);
            let x = Mat2::new(ground, off.get(0, 1), off.get(1, 0), excited);
            self.engine.stroke_after(k, &x)
        };
        let mut next = if shift == 0 {
            LatticeAccumulator::from_fn(acc.low, acc.cold_len, acc.hot_len, acc.cycles, |p| {
                let m = acc.get(p);
                if m.is_zero() {
                    return Mat2::ZERO;
                }
                cell(m.get(0, 0), m.get(1, 1), &m)
            })
        } else {
            let (low, cold_len, hot_len) = match c.stage {
                Stage::Cold => (acc.low.shifted(Stage::Cold, -1), acc.cold_len + 2, acc.hot_len),
                Stage::Hot => (acc.low.shifted(Stage::Hot, -1), acc.cold_len, acc.hot_len + 2),
            };
            LatticeAccumulator::from_fn(low, cold_len, hot_len, acc.cycles, |p| {
                let ground = acc.get(p.shifted(c.stage, shift)).get(0, 0);
                let excited = acc.get(p.shifted(c.stage, -shift)).get(1, 1);
                let here = acc.get(p);
                if ground == C64::new(0.0, 0.0) && excited == C64::new(0.0, 0.0) && here.is_zero() {
                    return Mat2::ZERO;
                }
                cell(ground, excited, &here)
            })
        };
        next.prune_and_shrink();
        next
    }

    pub fn advance_cycle(&self, acc: &LatticeAccumulator) -> LatticeAccumulator {
        let mut next = (0..4).fold(acc.clone(), |a, k| self.contact(&a, k));
        next.cycles += 1;
        next
    }

    pub fn advance(&self, acc: &LatticeAccumulator, cycles: usize) -> LatticeAccumulator {
        (0..cycles).fold(acc.clone(), |a, _| self.advance_cycle(&a))
    }

    pub fn component_variance(&self, cycles: usize) -> f64 {
        self.scheme.marginal_variance(self.observable, cycles, self.engine.sigma())
    }

    pub fn assemble(&self, acc: &LatticeAccumulator) -> Mixture1 {
        let variance = self.component_variance(acc.cycles);
        let (ec, eh) = (self.engine.eps_c(), self.engine.eps_h());
        Mixture1::new(acc.entries().map(|(key, m)| Component1 {
            key,
            weight: m.trace().re,
            mean: key.energy(ec, eh),
            variance,
        }))
    }

    pub fn moments(&self, acc: &LatticeAccumulator) -> Moments1 {
        let variance = self.component_variance(acc.cycles);
        let (ec, eh) = (self.engine.eps_c(), self.engine.eps_h());
        acc.entries().fold(Moments1::default(), |m, (key, x)| {
            let w = x.trace().re;
            let e = key.energy(ec, eh);
            Moments1 { weight: m.weight + w, mean: m.mean + w * e, second: m.second + w * (e * e + variance) }
        })
    }
}

/// Marginal of `observable` after `cycles` cycles started from `rho`.
pub fn marginal(
    engine: &Engine,
    rho: &DensityMatrix,
    cycles: usize,
    scheme: Scheme,
    observable: Observable,
) -> Result<Mixture1> {
    if cycles == 0 {
        return Err(OttoError::NoCycles);
    }
    let lattice = Lattice::new(engine, scheme, observable)?;
    Ok(lattice.assemble(&lattice.advance(&lattice.start(rho), cycles)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesPoint {
    pub cycles: usize,
    pub work: f64,
    pub work_per_cycle: f64,
    pub variance: f64,
    pub reliability: Option<f64>,
}

/// Cumulative work statistics after each of the first `max_cycles` cycles.
pub fn work_per_cycle_series(
    engine: &Engine,
    scheme: Scheme,
    rho: &DensityMatrix,
    max_cycles: usize,
) -> Result<Vec<SeriesPoint>> {
    if max_cycles == 0 {
        return Err(OttoError::NoCycles);
    }
    let lattice = Lattice::new(engine, scheme, Observable::Work)?;
    let mut acc = lattice.start(rho);
    let mut out = Vec::with_capacity(max_cycles);
    for n in 1..=max_cycles {
        acc = lattice.advance_cycle(&acc);
        let m = lattice.moments(&acc);
        out.push(SeriesPoint {
            cycles: n,
            work: m.mean,
            work_per_cycle: m.mean / n as f64,
            variance: m.variance(),
            reliability: reliability(m.mean, m.variance()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_states::{PointerSpec, StrokeHamiltonian, WorkStroke};
    use crate::pathsum_oracle;
    use crate::thermal_maps::{BathSpec, ThermalMap, ThermalState};

    fn engine(alpha: f64, phi: f64, sigma: f64) -> Engine {
        let cold = StrokeHamiltonian::new(1.0, Stage::Cold).unwrap();
        let hot = StrokeHamiltonian::new(3.7, Stage::Hot).unwrap();
        Engine::new(
            1.0,
            3.7,
            WorkStroke::new(alpha, phi).unwrap(),
            ThermalMap::lindblad(BathSpec::new(0.025, 0.025, 0.2).unwrap(), hot, 8.0).unwrap(),
            ThermalMap::lindblad(BathSpec::new(0.25, 0.025, 0.2).unwrap(), cold, 8.0).unwrap(),
            PointerSpec::new(sigma).unwrap(),
        )
        .unwrap()
    }

    fn rho() -> DensityMatrix {
        DensityMatrix::from_populations(0.44, C64::new(-0.02, -0.05)).unwrap()
    }

    #[test]
    fn matches_oracle_for_one_and_two_cycles() {
        for (alpha, phi, sigma) in [(0.05, 0.0, 0.2), (0.4, 1.1, 0.6), (0.9, -0.3, 1.5)] {
            let e = engine(alpha, phi, sigma);
            for n in 1..=2 {
                for scheme in Scheme::ALL {
                    for obs in [Observable::Work, Observable::Heat] {
                        let lat = marginal(&e, &rho(), n, scheme, obs).unwrap();
                        let ora = pathsum_oracle::marginal(&e, &rho(), n, scheme, obs).unwrap();
                        let dev = lat.max_weight_difference(&ora);
                        assert!(dev < 1e-12, "{scheme} {obs:?} N={n}: {dev}");
                    }
                }
            }
        }
    }

    #[test]
    fn trace_is_conserved() {
        let e = engine(0.3, 0.2, 0.4);
        for scheme in Scheme::ALL {
            let lat = Lattice::new(&e, scheme, Observable::Work).unwrap();
            let mut acc = lat.start(&rho());
            for _ in 0..30 {
                acc = lat.advance_cycle(&acc);
                assert!((acc.total_trace() - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lattice_growth_is_polynomial() {
        let e = engine(0.3, 0.2, 0.4);
        let work = Lattice::new(&e, Scheme::RepeatedMeasurements, Observable::Work).unwrap();
        let heat = Lattice::new(&e, Scheme::RepeatedMeasurements, Observable::Heat).unwrap();
        let (mut w, mut h) = (work.start(&rho()), heat.start(&rho()));
        for n in 1..=40usize {
            w = work.advance_cycle(&w);
            h = heat.advance_cycle(&h);
            let (c, hh) = w.reach();
            assert!(c <= 2 * n as i32 && hh <= 2 * n as i32);
            assert!(w.occupied() <= (4 * n + 1) * (4 * n + 1));
            assert!(h.occupied() <= 4 * n + 1);
        }
    }

    #[test]
    fn contact_lattice_rejects_mixing_channel() {
        let e = engine(0.3, 0.2, 0.4)
            .with_hot_map(ThermalMap::Perfect { target: ThermalState::new(0.4, C64::new(0.05, 0.0)).unwrap() });
        assert_eq!(Lattice::new(&e, Scheme::OnePointerContacts, Observable::Work).unwrap_err(), OttoError::NotDecoupled);
        assert!(Lattice::new(&e, Scheme::RepeatedMeasurements, Observable::Work).is_ok());
    }

    #[test]
    fn fold_examples() {
        let x = *rho().matrix();
        let same = fold_initial_state_rc(&x.diagonal_part(), 0.3, 1.0);
        assert_eq!(same, x.diagonal_part());
        assert_eq!(fold_initial_state_rc(&x, 0.0, 1.0), x.diagonal_part());
        let half = fold_initial_state_rc(&x, 1.0, 1.0);
        assert!((half.get(1, 0) - x.get(1, 0) * libm::exp(-0.5)).norm() < 1e-16);
    }

    #[test]
    fn widths_follow_scheme() {
        let e = engine(0.3, 0.2, 0.4);
        let n = 3;
        let rm = marginal(&e, &rho(), n, Scheme::RepeatedMeasurements, Observable::Work).unwrap();
        let rmq = marginal(&e, &rho(), n, Scheme::RepeatedMeasurements, Observable::Heat).unwrap();
        let rc = marginal(&e, &rho(), n, Scheme::TwoPointerContacts, Observable::Work).unwrap();
        assert!((rm.components()[0].variance - 4.0 * 3.0 * 0.16).abs() < 1e-14);
        assert!((rmq.components()[0].variance - 2.0 * 3.0 * 0.16).abs() < 1e-14);
        assert!((rc.components()[0].variance - 0.16).abs() < 1e-14);
    }

    #[test]
    fn corrupted_damping_changes_measured_weights() {
        let e = engine(0.3, 0.2, 1.0);
        let good = Lattice::new(&e, Scheme::RepeatedMeasurements, Observable::Work).unwrap();
        let bad = good.with_corrupted_damping(1.5);
        let g = good.assemble(&good.advance(&good.start(&rho()), 2));
        let b = bad.assemble(&bad.advance(&bad.start(&rho()), 2));
        assert!(g.max_weight_difference(&b) > 1e-6);
    }
}
