//! Gaussian mixtures over the integer energy lattice.
//!
//! Weights are signed reals; components with zero variance are point masses
//! and only support moments and weights, not densities.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::engine::LatticePoint;
use crate::error::{OttoError, Result};
use crate::mat::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    min: f64,
    max: f64,
    points: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(OttoError::EmptyGrid);
        }
        Ok(Grid { min, max, points })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.value(i))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments1 {
    pub weight: f64,
    pub mean: f64,
    pub second: f64,
}

impl Moments1 {
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component1 {
    pub key: LatticePoint,
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mixture1 {
    components: Vec<Component1>,
}

fn gaussian(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    libm::exp(-d * d / (2.0 * variance)) / libm::sqrt(2.0 * PI * variance)
}

impl Mixture1 {
    /// Merges components sharing a lattice key; keys come out sorted.
    pub fn new(components: impl IntoIterator<Item = Component1>) -> Self {
        let mut merged: BTreeMap<LatticePoint, Component1> = BTreeMap::new();
        for c in components {
            merged
                .entry(c.key)
                .and_modify(|m| m.weight += c.weight)
                .or_insert(c);
        }
        Mixture1 { components: merged.into_values().collect() }
    }

    pub fn components(&self) -> &[Component1] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weight_at(&self, key: LatticePoint) -> f64 {
        self.components
            .binary_search_by(|c| c.key.cmp(&key))
            .map(|i| self.components[i].weight)
            .unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn moments(&self) -> Moments1 {
        self.components.iter().fold(Moments1::default(), |m, c| Moments1 {
            weight: m.weight + c.weight,
            mean: m.mean + c.weight * c.mean,
            second: m.second + c.weight * (c.mean * c.mean + c.variance),
        })
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        self.components.iter().try_fold(0.0, |acc, c| {
            if c.variance <= 0.0 {
                return Err(OttoError::PointMasses);
            }
            Ok(acc + c.weight * gaussian(x, c.mean, c.variance))
        })
    }

    pub fn density_on_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.values().map(|x| self.density(x)).collect()
    }

    /// Largest weight difference over the union of both key sets.
    pub fn max_weight_difference(&self, other: &Mixture1) -> f64 {
        let mine = self.components.iter().map(|c| (c.weight - other.weight_at(c.key)).abs());
        let theirs = other.components.iter().map(|c| (c.weight - self.weight_at(c.key)).abs());
        mine.chain(theirs).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointKey {
    pub work: LatticePoint,
    /// Heat in units of the hot half-gap.
    pub heat: i32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component2 {
    pub key: JointKey,
    pub weight: f64,
    /// (work, heat)
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JointMoments {
    pub work: f64,
    pub heat: f64,
    pub work_sq: f64,
    pub heat_sq: f64,
    pub work_heat: f64,
}

impl JointMoments {
    pub fn work_variance(&self) -> f64 {
        self.work_sq - self.work * self.work
    }

    pub fn heat_variance(&self) -> f64 {
        self.heat_sq - self.heat * self.heat
    }

    pub fn covariance(&self) -> f64 {
        self.work_heat - self.work * self.heat
    }

    pub fn efficiency(&self) -> Option<f64> {
        efficiency(self.work, self.heat)
    }

    pub fn reliability(&self) -> Option<f64> {
        reliability(self.work, self.work_variance())
    }

    pub fn max_abs_diff(&self, other: &JointMoments) -> f64 {
        [
            self.work - other.work,
            self.heat - other.heat,
            self.work_sq - other.work_sq,
            self.heat_sq - other.heat_sq,
            self.work_heat - other.work_heat,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// `-⟨W⟩/⟨Q⟩`, defined only when heat is absorbed.
pub fn efficiency(work: f64, heat: f64) -> Option<f64> {
    (heat > 0.0).then(|| -work / heat)
}

/// `-⟨W⟩/√Var W`, defined only for positive variance.
pub fn reliability(work: f64, variance: f64) -> Option<f64> {
    (variance > 0.0).then(|| -work / libm::sqrt(variance))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mixture2 {
    components: Vec<Component2>,
}

impl Mixture2 {
    pub fn new(components: impl IntoIterator<Item = Component2>) -> Self {
        let mut merged: BTreeMap<JointKey, Component2> = BTreeMap::new();
        for c in components {
            merged
                .entry(c.key)
                .and_modify(|m| m.weight += c.weight)
                .or_insert(c);
        }
        Mixture2 { components: merged.into_values().collect() }
    }

    pub fn components(&self) -> &[Component2] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn moments(&self) -> JointMoments {
        self.components.iter().fold(JointMoments::default(), |m, c| {
            let [w, q] = c.mean;
            let s = c.covariance;
            JointMoments {
                work: m.work + c.weight * w,
                heat: m.heat + c.weight * q,
                work_sq: m.work_sq + c.weight * (w * w + s[0][0]),
                heat_sq: m.heat_sq + c.weight * (q * q + s[1][1]),
                work_heat: m.work_heat + c.weight * (w * q + s[0][1]),
            }
        })
    }

    pub fn density(&self, work: f64, heat: f64) -> Result<f64> {
        self.components.iter().try_fold(0.0, |acc, c| {
            let s = c.covariance;
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            if det <= 0.0 {
                return Err(OttoError::PointMasses);
            }
            let dw = work - c.mean[0];
            let dq = heat - c.mean[1];
            let quad = (s[1][1] * dw * dw - (s[0][1] + s[1][0]) * dw * dq + s[0][0] * dq * dq) / det;
            Ok(acc + c.weight * libm::exp(-0.5 * quad) / (2.0 * PI * libm::sqrt(det)))
        })
    }

    pub fn work_marginal(&self) -> Mixture1 {
        Mixture1::new(self.components.iter().map(|c| Component1 {
            key: c.key.work,
            weight: c.weight,
            mean: c.mean[0],
            variance: c.covariance[0][0],
        }))
    }

    pub fn heat_marginal(&self) -> Mixture1 {
        Mixture1::new(self.components.iter().map(|c| Component1 {
            key: LatticePoint::new(0, c.key.heat),
            weight: c.weight,
            mean: c.mean[1],
            variance: c.covariance[1][1],
        }))
    }

    /// `E[e^{i(uW + vQ)}]`.
    pub fn characteristic(&self, u: f64, v: f64) -> C64 {
        self.components.iter().fold(C64::new(0.0, 0.0), |acc, c| {
            let s = c.covariance;
            let quad = u * u * s[0][0] + u * v * (s[0][1] + s[1][0]) + v * v * s[1][1];
            acc + C64::from_polar(c.weight * libm::exp(-0.5 * quad), u * c.mean[0] + v * c.mean[1])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};

    fn two_peaks() -> Mixture1 {
        Mixture1::new([
            Component1 { key: LatticePoint::new(1, 0), weight: 0.25, mean: 1.0, variance: 0.04 },
            Component1 { key: LatticePoint::new(-1, 1), weight: 0.75, mean: 2.7, variance: 0.04 },
        ])
    }

    #[test]
    fn density_integrates_to_weight_and_mean() {
        let m = two_peaks();
        let tol = Tolerance::default();
        let norm = integrate(|x| m.density(x).unwrap(), -5.0, 8.0, tol).unwrap().value;
        let mean = integrate(|x| x * m.density(x).unwrap(), -5.0, 8.0, tol).unwrap().value;
        let second = integrate(|x| x * x * m.density(x).unwrap(), -5.0, 8.0, tol).unwrap().value;
        let mo = m.moments();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!((mean - mo.mean).abs() < 1e-10);
        assert!((second - mo.second).abs() < 1e-10);
    }

    #[test]
    fn merging_and_lookup() {
        let m = Mixture1::new([
            Component1 { key: LatticePoint::new(0, 1), weight: 0.5, mean: 1.0, variance: 0.0 },
            Component1 { key: LatticePoint::new(0, 1), weight: 0.25, mean: 1.0, variance: 0.0 },
        ]);
        assert_eq!(m.len(), 1);
        assert_eq!(m.weight_at(LatticePoint::new(0, 1)), 0.75);
        assert_eq!(m.weight_at(LatticePoint::ORIGIN), 0.0);
        assert_eq!(m.density(0.0), Err(OttoError::PointMasses));
    }

    #[test]
    fn joint_density_and_marginals() {
        let j = Mixture2::new([Component2 {
            key: JointKey { work: LatticePoint::new(1, -1), heat: 1 },
            weight: 1.0,
            mean: [-2.0, 3.0],
            covariance: [[0.32, -0.08], [-0.08, 0.08]],
        }]);
        let tol = Tolerance { abs: 1e-13, rel: 1e-10, max_intervals: 2000 };
        let marginal_at = |w: f64| integrate(|q| j.density(w, q).unwrap(), -2.0, 8.0, tol).unwrap().value;
        let wm = j.work_marginal();
        for w in [-2.5, -2.0, -1.2] {
            assert!((marginal_at(w) - wm.density(w).unwrap()).abs() < 1e-9);
        }
        let mo = j.moments();
        assert!((mo.covariance() + 0.08).abs() < 1e-14);
        assert!((j.characteristic(0.0, 0.0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn characteristic_derivative_gives_mean() {
        let m = Mixture2::new([Component2 {
            key: JointKey { work: LatticePoint::ORIGIN, heat: 0 },
            weight: 1.0,
            mean: [0.7, -0.3],
            covariance: [[0.1, 0.0], [0.0, 0.1]],
        }]);
        let h = 1e-6;
        let dw = (m.characteristic(h, 0.0) - m.characteristic(-h, 0.0)) / (2.0 * h);
        assert!((dw.im - 0.7).abs() < 1e-8);
    }

    #[test]
    fn metric_domains() {
        assert_eq!(efficiency(-1.0, 0.0), None);
        assert_eq!(efficiency(-1.0, 4.0), Some(0.25));
        assert_eq!(reliability(1.0, 0.0), None);
        assert_eq!(reliability(-2.0, 4.0), Some(1.0));
    }

    #[test]
    fn grid_endpoints() {
        let g = Grid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.values().collect::<Vec<_>>(), [-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(Grid::new(1.0, 1.0, 5).is_err());
    }
}
