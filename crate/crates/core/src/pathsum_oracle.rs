//! Exhaustive sum over index-sequence pairs `(m, m')`.
//!
//! Each contact projects a branch operator `X ↦ P_i X P_j`; the following stroke
//! is applied unnormalized. A branch's value is the trace of the final operator.
//! Cost is `4^{4N}` leaves, so the oracle stops at three cycles.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::core_states::{DensityMatrix, Level};
use crate::engine::{Engine, LatticePoint, Observable, Scheme, CYCLE};
use crate::error::{OttoError, Result};
use crate::mat::{Mat2, C64};
use crate::mixture::{Component1, Component2, JointKey, JointMoments, Mixture1, Mixture2};
use crate::thermal_maps::{BathSpec, ThermalMap};

pub const MAX_ORACLE_CYCLES: usize = 3;
/// Branches with smaller modulus are dropped before assembly.
pub const PRUNE_BELOW: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchCoefficient {
    pub value: C64,
    /// Half-sum work `Σ s_k (e_k + e'_k)/2` in lattice units.
    pub work_center: LatticePoint,
    /// Half-sum heat in units of the hot half-gap.
    pub heat_center: i32,
    /// Work difference `Σ s_k (e_k - e'_k)` in lattice units.
    pub work_gap: LatticePoint,
    pub heat_gap: i32,
    /// Number of off-diagonal contacts in the cold and hot slots.
    pub off_diagonal: LatticePoint,
    /// Bit `g` set when the ket index at contact `g` is the excited level.
    pub ket_levels: u32,
    pub bra_levels: u32,
}

impl BranchCoefficient {
    pub fn ket_level(&self, contact: usize) -> Level {
        level_bit(self.ket_levels, contact)
    }

    pub fn bra_level(&self, contact: usize) -> Level {
        level_bit(self.bra_levels, contact)
    }
}

fn level_bit(bits: u32, contact: usize) -> Level {
    if bits >> contact & 1 == 1 {
        Level::Excited
    } else {
        Level::Ground
    }
}

impl BranchCoefficient {
    pub fn work_center_energy(&self, engine: &Engine) -> f64 {
        self.work_center.energy(engine.eps_c(), engine.eps_h())
    }

    pub fn heat_center_energy(&self, engine: &Engine) -> f64 {
        self.heat_center as f64 * engine.eps_h()
    }

    /// Product of per-contact factors `e^{-(e - e')²/8Σ²}`.
    pub fn suppression_rm(&self, engine: &Engine) -> f64 {
        let p = engine.pointer();
        powi(p.coherence_damping(engine.eps_c()), self.off_diagonal.cold)
            * powi(p.coherence_damping(engine.eps_h()), self.off_diagonal.hot)
    }

    pub fn suppression_rc_work(&self, engine: &Engine) -> f64 {
        if self.work_gap == LatticePoint::ORIGIN {
            return 1.0;
        }
        engine.pointer().suppression(self.work_gap.energy(engine.eps_c(), engine.eps_h()))
    }

    pub fn suppression_rc_heat(&self, engine: &Engine) -> f64 {
        if self.heat_gap == 0 {
            return 1.0;
        }
        engine.pointer().suppression(self.heat_gap as f64 * engine.eps_h())
    }

    pub fn suppression_rc(&self, engine: &Engine) -> f64 {
        self.suppression_rc_work(engine) * self.suppression_rc_heat(engine)
    }

    /// Factor entering the marginal of `observable` under `scheme`.
    pub fn suppression(&self, engine: &Engine, scheme: Scheme, observable: Observable) -> f64 {
        match (scheme, observable) {
            (Scheme::RepeatedMeasurements, _) => self.suppression_rm(engine),
            (Scheme::OnePointerContacts, Observable::Work) => self.suppression_rc_work(engine),
            (Scheme::OnePointerContacts, Observable::Heat) => self.suppression_rc_heat(engine),
            (Scheme::TwoPointerContacts, _) => self.suppression_rc(engine),
        }
    }
}

fn powi(x: f64, n: i32) -> f64 {
    (0..n).fold(1.0, |acc, _| acc * x)
}

fn check_cycles(cycles: usize) -> Result<()> {
    if cycles == 0 {
        return Err(OttoError::NoCycles);
    }
    if cycles > MAX_ORACLE_CYCLES {
        return Err(OttoError::TooManyCycles { cycles, limit: MAX_ORACLE_CYCLES });
    }
    Ok(())
}

struct Walker<'a> {
    /// `stroke_k(|i⟩⟨j|)` for each contact slot and index pair.
    images: [[[Mat2; 2]; 2]; 4],
    contacts: usize,
    visit: &'a mut dyn FnMut(&BranchCoefficient),
}

impl Walker<'_> {
    fn descend(&mut self, depth: usize, x: Mat2, acc: BranchCoefficient) {
        if depth == self.contacts {
            let value = x.trace();
            if value.norm() >= PRUNE_BELOW {
                (self.visit)(&BranchCoefficient { value, ..acc });
            }
            return;
        }
        let k = depth % 4;
        let contact = CYCLE[k];
        for a in Level::BOTH {
            for b in Level::BOTH {
                let (i, j) = (a.index(), b.index());
                let entry = x.get(i, j);
                if entry == C64::new(0.0, 0.0) {
                    continue;
                }
                let (si, sj) = (a.sign(), b.sign());
                let half = (si + sj) / 2;
                let gap = si - sj;
                let mut next = acc;
                next.work_center = next.work_center.shifted(contact.stage, contact.work_sign * half);
                next.work_gap = next.work_gap.shifted(contact.stage, contact.work_sign * gap);
                next.heat_center += contact.heat_sign * half;
                next.heat_gap += contact.heat_sign * gap;
                if i != j {
                    next.off_diagonal = next.off_diagonal.shifted(contact.stage, 1);
                }
                next.ket_levels |= (i as u32) << depth;
                next.bra_levels |= (j as u32) << depth;
                self.descend(depth + 1, self.images[k][i][j].scale(entry), next);
            }
        }
    }
}

/// Streams every surviving branch of `cycles` cycles started from `rho`.
pub fn for_each_branch(
    engine: &Engine,
    rho: &DensityMatrix,
    cycles: usize,
    mut visit: impl FnMut(&BranchCoefficient),
) -> Result<()> {
    check_cycles(cycles)?;
    let mut images = [[[Mat2::ZERO; 2]; 2]; 4];
    for (k, slot) in images.iter_mut().enumerate() {
        for (i, row) in slot.iter_mut().enumerate() {
            for (j, m) in row.iter_mut().enumerate() {
                *m = engine.stroke_after(k, &Mat2::unit(i, j));
            }
        }
    }
    let start = BranchCoefficient {
        value: C64::new(0.0, 0.0),
        work_center: LatticePoint::ORIGIN,
        heat_center: 0,
        work_gap: LatticePoint::ORIGIN,
        heat_gap: 0,
        off_diagonal: LatticePoint::ORIGIN,
        ket_levels: 0,
        bra_levels: 0,
    };
    let mut walker = Walker { images, contacts: 4 * cycles, visit: &mut visit };
    walker.descend(0, *rho.matrix(), start);
    Ok(())
}

pub fn enumerate_branches(engine: &Engine, rho: &DensityMatrix, cycles: usize) -> Result<Vec<BranchCoefficient>> {
    let mut out = Vec::new();
    for_each_branch(engine, rho, cycles, |b| out.push(*b))?;
    Ok(out)
}

fn assemble_joint(
    engine: &Engine,
    rho: &DensityMatrix,
    cycles: usize,
    suppression: impl Fn(&BranchCoefficient) -> f64,
    covariance: [[f64; 2]; 2],
) -> Result<Mixture2> {
    let mut weights: BTreeMap<JointKey, C64> = BTreeMap::new();
    for_each_branch(engine, rho, cycles, |b| {
        let key = JointKey { work: b.work_center, heat: b.heat_center };
        *weights.entry(key).or_insert(C64::new(0.0, 0.0)) += b.value * suppression(b);
    })?;
    Ok(Mixture2::new(weights.into_iter().map(|(key, w)| Component2 {
        key,
        weight: w.re,
        mean: [key.work.energy(engine.eps_c(), engine.eps_h()), key.heat as f64 * engine.eps_h()],
        covariance,
    })))
}

/// Joint work/heat mixture with a fresh pointer read after every stroke.
pub fn joint_pdf_rm(engine: &Engine, rho: &DensityMatrix, cycles: usize) -> Result<Mixture2> {
    let s = 2.0 * cycles as f64 * engine.sigma() * engine.sigma();
    assemble_joint(engine, rho, cycles, |b| b.suppression_rm(engine), [[2.0 * s, -s], [-s, s]])
}

/// Joint work/heat mixture for two accumulating pointers.
pub fn joint_pdf_rc(engine: &Engine, rho: &DensityMatrix, cycles: usize) -> Result<Mixture2> {
    let s = engine.sigma() * engine.sigma();
    assemble_joint(engine, rho, cycles, |b| b.suppression_rc(engine), [[s, 0.0], [0.0, s]])
}

/// Marginal of one observable under any scheme.
pub fn marginal(
    engine: &Engine,
    rho: &DensityMatrix,
    cycles: usize,
    scheme: Scheme,
    observable: Observable,
) -> Result<Mixture1> {
    let mut weights: BTreeMap<LatticePoint, C64> = BTreeMap::new();
    for_each_branch(engine, rho, cycles, |b| {
        let key = match observable {
            Observable::Work => b.work_center,
            Observable::Heat => LatticePoint::new(0, b.heat_center),
        };
        *weights.entry(key).or_insert(C64::new(0.0, 0.0)) += b.value * b.suppression(engine, scheme, observable);
    })?;
    let variance = scheme.marginal_variance(observable, cycles, engine.sigma());
    Ok(Mixture1::new(weights.into_iter().map(|(key, w)| Component1 {
        key,
        weight: w.re,
        mean: key.energy(engine.eps_c(), engine.eps_h()),
        variance,
    })))
}

/// Work marginal of the contact scheme with one or two pointers attached.
pub fn marginal_rc_work(engine: &Engine, rho: &DensityMatrix, cycles: usize, two_pointers: bool) -> Result<Mixture1> {
    let scheme = if two_pointers { Scheme::TwoPointerContacts } else { Scheme::OnePointerContacts };
    marginal(engine, rho, cycles, scheme, Observable::Work)
}

pub fn mixture_moments(mix: &Mixture2) -> JointMoments {
    mix.moments()
}

/// Single-cycle moments at `Σ = 0` for perfect thermalization at both baths,
/// starting from the cold target populations.
pub fn analytic_moments_perfect(engine: &Engine) -> Result<JointMoments> {
    let (dc, dh) = match (engine.cold_map(), engine.hot_map()) {
        (ThermalMap::Perfect { target: c }, ThermalMap::Perfect { target: h }) => (c.d, h.d),
        _ => return Err(OttoError::WrongThermalization("closed-form perfect moments", "perfect")),
    };
    let alpha = engine.stroke().alpha();
    let (ec, eh) = (engine.eps_c(), engine.eps_h());
    let a = |x: f64, y: f64| 2.0 * (alpha + x - y - 2.0 * alpha * x);
    let b = 1.0 - (1.0 - 2.0 * alpha) * (1.0 - 2.0 * dc) * (1.0 - 2.0 * dh);
    let cross = (1.0 - 2.0 * dc) * (1.0 - 2.0 * dh) - (1.0 - 2.0 * alpha) * (1.0 + b);
    Ok(JointMoments {
        work: a(dc, dh) * eh + a(dh, dc) * ec,
        heat: -a(dc, dh) * eh,
        work_sq: 2.0 * b * (ec * ec + eh * eh) + 2.0 * cross * ec * eh,
        heat_sq: 2.0 * b * eh * eh,
        work_heat: -2.0 * b * eh * eh - cross * ec * eh,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeMoments {
    pub measured: JointMoments,
    pub contacts: JointMoments,
}

/// Single-cycle moments for Lindblad thermalization at the hot bath, starting
/// from a state with excited population `initial_excited` and no coherence.
pub fn analytic_moments_lindblad(engine: &Engine, initial_excited: f64) -> Result<SchemeMoments> {
    let (bath, theta): (&BathSpec, f64) = match engine.hot_map() {
        ThermalMap::Lindblad { bath, theta, .. } => (bath, *theta),
        _ => return Err(OttoError::WrongThermalization("closed-form Lindblad moments", "Lindblad")),
    };
    let alpha = engine.stroke().alpha();
    let phi = engine.stroke().phi();
    let (ec, eh) = (engine.eps_c(), engine.eps_h());
    let s2 = engine.sigma() * engine.sigma();

    let m = 1.0 - 2.0 * initial_excited;
    let t = 1.0 - 2.0 * engine.hamiltonian(crate::core_states::Stage::Hot).gibbs_excited_population(bath.beta());
    let k = 1.0 - 2.0 * alpha;
    let g = bath.gamma() * theta;
    let u = -libm::expm1(-2.0 * g);
    let osc = libm::exp(-g) * libm::cos(2.0 * (theta + phi));
    let flip = alpha * (1.0 - alpha);

    let work = 4.0 * ec * flip * m + u * (k * m - t) * (k * ec - eh);
    let heat = eh * u * (k * m - t);
    let b2 = 2.0 * u * (1.0 - k * m * t);
    let a2 = 8.0 * flip + 2.0 * u * k * (k - m * t);
    let ab = u * (4.0 * alpha * alpha * m * t - 2.0 * k * (1.0 - m * t));
    let work_sq = ec * ec * a2 + eh * eh * b2 + 2.0 * ec * eh * ab;
    let work_heat = -ec * eh * ab - eh * eh * b2;
    let heat_sq = eh * eh * b2;

    let measured = JointMoments {
        work,
        heat,
        work_sq: work_sq + 4.0 * s2,
        heat_sq: heat_sq + 2.0 * s2,
        work_heat: work_heat - 2.0 * s2,
    };
    let contacts = JointMoments {
        work: work - 4.0 * ec * flip * m * osc,
        heat,
        work_sq: work_sq + s2 - 8.0 * ec * ec * flip * osc,
        heat_sq: heat_sq + s2,
        work_heat,
    };
    Ok(SchemeMoments { measured, contacts })
}
