//! Command bodies. Each returns an [`Output`]; nothing here touches stdout.

use otto_core::asymptotics::{
    asymptotic_averages, build_cycle_superoperator, invariant_state, spectrum, theta_for_duration, Monitoring,
};
use otto_core::core_states::{landau_zener_delta, DensityMatrix, WorkStroke};
use otto_core::lattice_engine::Lattice;
use otto_core::mixture::{efficiency, reliability, Grid, JointMoments, Mixture1, Mixture2};
use otto_core::pathsum_oracle::{
    analytic_moments_lindblad, analytic_moments_perfect, joint_pdf_rc, joint_pdf_rm, MAX_ORACLE_CYCLES,
};
use otto_core::thermal_maps::ThermalMap;
use otto_core::{lattice_engine, pathsum_oracle, Engine, Observable, OttoError, Scheme, C64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Built, Config, StrokeMode};
use crate::error::{CliError, CliResult};
use crate::output::{json_number, Cell, Output, Table};

/// Largest cycle count for which the joint distribution is enumerated.
pub const MAX_JOINT_CYCLES: usize = 2;

/// Contact scheme shown next to RM: the configured one, or RC2 when RM is configured.
pub fn contact_scheme(configured: Scheme) -> Scheme {
    if configured.is_contact() {
        configured
    } else {
        Scheme::TwoPointerContacts
    }
}

/// Lattice marginal, or the path sum when the maps are not decoupled and the
/// horizon is short enough to enumerate.
pub fn marginal(engine: &Engine, rho: &DensityMatrix, cycles: usize, scheme: Scheme, obs: Observable) -> CliResult<Mixture1> {
    match lattice_engine::marginal(engine, rho, cycles, scheme, obs) {
        Err(OttoError::NotDecoupled) if cycles <= MAX_ORACLE_CYCLES => {
            Ok(pathsum_oracle::marginal(engine, rho, cycles, scheme, obs)?)
        }
        other => Ok(other?),
    }
}

/// Symmetric range holding every component of an `cycles`-cycle marginal.
pub fn default_reach(engine: &Engine, cycles: usize) -> f64 {
    let widest = Scheme::RepeatedMeasurements.marginal_variance(Observable::Work, cycles, engine.sigma());
    2.0 * cycles as f64 * (engine.eps_c() + engine.eps_h()) + 6.0 * widest.sqrt()
}

fn grid_or_default(engine: &Engine, cycles: usize, min: Option<f64>, max: Option<f64>, points: usize) -> CliResult<Grid> {
    let reach = default_reach(engine, cycles);
    Ok(Grid::new(min.unwrap_or(-reach), max.unwrap_or(reach), points)?)
}

fn components_json(mix: &Mixture1) -> Value {
    mix.components()
        .iter()
        .map(|c| {
            json!({
                "cold": c.key.cold,
                "hot": c.key.hot,
                "weight": json_number(c.weight),
                "center": json_number(c.mean),
                "variance": json_number(c.variance),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdfArgs {
    pub observable: Observable,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: usize,
    /// Emit raw mixture components instead of a density grid.
    pub components: bool,
}

pub fn pdf(built: &Built, args: &PdfArgs) -> CliResult<Output> {
    let Built { engine, rho, cycles, .. } = built;
    let contact = contact_scheme(built.scheme);
    let rm = marginal(engine, rho, *cycles, Scheme::RepeatedMeasurements, args.observable)?;
    let rc = marginal(engine, rho, *cycles, contact, args.observable)?;
    let other = match contact {
        Scheme::TwoPointerContacts => Scheme::OnePointerContacts,
        _ => Scheme::TwoPointerContacts,
    };
    let alt = marginal(engine, rho, *cycles, other, args.observable)?;
    let alt = (alt.max_weight_difference(&rc) > 1e-12).then_some(alt);

    let mut columns = vec![("density_rm".to_string(), &rm), ("density_rc".to_string(), &rc)];
    if let Some(a) = &alt {
        columns.push((format!("density_{}", other.label().to_lowercase()), a));
    }
    if args.components {
        let schemes: serde_json::Map<String, Value> =
            columns.iter().map(|(name, mix)| (name.trim_start_matches("density_").to_string(), components_json(mix))).collect();
        return Ok(Output::Json(json!({
            "observable": observable_name(args.observable),
            "cycles": cycles,
            "contact_scheme": contact.label(),
            "schemes": schemes,
        })));
    }
    if engine.sigma() == 0.0 {
        return Err(CliError::Config("zero pointer width gives point masses; use --components".into()));
    }
    let grid = grid_or_default(engine, *cycles, args.min, args.max, args.points)?;
    let densities: Vec<Vec<f64>> = columns.iter().map(|(_, m)| m.density_on_grid(&grid)).collect::<Result<_, _>>()?;
    let mut table = Table::new(std::iter::once("value".to_string()).chain(columns.iter().map(|(n, _)| n.clone())));
    for (i, x) in grid.values().enumerate() {
        table.push(std::iter::once(Cell::Num(x)).chain(densities.iter().map(|d| Cell::Num(d[i]))).collect());
    }
    Ok(Output::Table(table))
}

pub fn observable_name(obs: Observable) -> &'static str {
    match obs {
        Observable::Work => "work",
        Observable::Heat => "heat",
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointArgs {
    pub work: (Option<f64>, Option<f64>),
    pub heat: (Option<f64>, Option<f64>),
    pub points: usize,
    pub components: bool,
}

pub fn joint(built: &Built, args: &JointArgs) -> CliResult<Output> {
    let Built { engine, rho, cycles, .. } = built;
    if *cycles > MAX_JOINT_CYCLES {
        return Err(OttoError::TooManyCycles { cycles: *cycles, limit: MAX_JOINT_CYCLES }.into());
    }
    let rm = joint_pdf_rm(engine, rho, *cycles)?;
    let rc = joint_pdf_rc(engine, rho, *cycles)?;
    if args.components {
        let dump = |mix: &Mixture2| -> Value {
            mix.components()
                .iter()
                .map(|c| {
                    json!({
                        "work_cold": c.key.work.cold,
                        "work_hot": c.key.work.hot,
                        "heat": c.key.heat,
                        "weight": json_number(c.weight),
                        "center": [json_number(c.mean[0]), json_number(c.mean[1])],
                        "covariance": c.covariance.iter()
                            .map(|r| vec![json_number(r[0]), json_number(r[1])])
                            .collect::<Vec<_>>(),
                    })
                })
                .collect()
        };
        return Ok(Output::Json(json!({ "cycles": cycles, "rm": dump(&rm), "rc": dump(&rc) })));
    }
    if engine.sigma() == 0.0 {
        return Err(CliError::Config("zero pointer width gives point masses; use --components".into()));
    }
    let w = grid_or_default(engine, *cycles, args.work.0, args.work.1, args.points)?;
    let q = grid_or_default(engine, *cycles, args.heat.0, args.heat.1, args.points)?;
    let mut table = Table::new(["work", "heat", "density_rm", "density_rc"]);
    for x in w.values() {
        for y in q.values() {
            table.push(vec![Cell::Num(x), Cell::Num(y), Cell::Num(rm.density(x, y)?), Cell::Num(rc.density(x, y)?)]);
        }
    }
    Ok(Output::Table(table))
}

/// One line of the moments report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentRow {
    pub scheme: Scheme,
    pub analytic: bool,
    pub work: f64,
    pub heat: f64,
    pub work_variance: f64,
    pub heat_variance: f64,
    pub covariance: Option<f64>,
    pub efficiency: Option<f64>,
    pub reliability: Option<f64>,
    pub power: Option<f64>,
}

impl MomentRow {
    fn new(
        scheme: Scheme,
        analytic: bool,
        (work, heat, work_variance, heat_variance): (f64, f64, f64, f64),
        covariance: Option<f64>,
        cycle_time: Option<f64>,
    ) -> Self {
        MomentRow {
            scheme,
            analytic,
            work,
            heat,
            work_variance,
            heat_variance,
            covariance,
            efficiency: efficiency(work, heat),
            reliability: reliability(work, work_variance),
            power: cycle_time.map(|t| -work / t),
        }
    }

    fn from_joint(scheme: Scheme, analytic: bool, m: &JointMoments, cycle_time: Option<f64>) -> Self {
        let stats = (m.work, m.heat, m.work_variance(), m.heat_variance());
        MomentRow::new(scheme, analytic, stats, Some(m.covariance()), cycle_time)
    }
}

fn is_diagonal(rho: &DensityMatrix) -> bool {
    rho.coherence().norm() == 0.0
}

/// Closed-form single-cycle moments when the configuration admits them.
pub fn analytic_moments(built: &Built) -> CliResult<Option<(JointMoments, Option<JointMoments>)>> {
    let Built { engine, rho, cycles, .. } = built;
    if *cycles != 1 || !is_diagonal(rho) {
        return Ok(None);
    }
    Ok(match (engine.cold_map(), engine.hot_map()) {
        (ThermalMap::Perfect { target: cold }, ThermalMap::Perfect { target: hot }) => {
            let starts_cold = (rho.excited_population() - cold.d).abs() < 1e-12;
            if engine.sigma() != 0.0 || !starts_cold {
                return Ok(None);
            }
            let m = analytic_moments_perfect(engine)?;
            Some((m, (hot.q.norm() == 0.0).then_some(m)))
        }
        (_, ThermalMap::Lindblad { .. }) => {
            let m = analytic_moments_lindblad(engine, rho.excited_population())?;
            Some((m.measured, Some(m.contacts)))
        }
        _ => None,
    })
}

pub fn moment_rows(built: &Built) -> CliResult<Vec<MomentRow>> {
    let Built { engine, rho, cycles, .. } = built;
    let n = *cycles;
    let cycle_time = built.durations.map(|(t1, t2)| n as f64 * (t1 + t2));
    let contact = contact_scheme(built.scheme);
    let mut rows = Vec::new();
    for scheme in [Scheme::RepeatedMeasurements, contact] {
        let w = marginal(engine, rho, n, scheme, Observable::Work)?.moments();
        let q = marginal(engine, rho, n, scheme, Observable::Heat)?.moments();
        let covariance = match scheme {
            _ if n > MAX_JOINT_CYCLES => None,
            Scheme::RepeatedMeasurements => Some(joint_pdf_rm(engine, rho, n)?.moments().covariance()),
            Scheme::TwoPointerContacts => Some(joint_pdf_rc(engine, rho, n)?.moments().covariance()),
            Scheme::OnePointerContacts => None,
        };
        rows.push(MomentRow::new(scheme, false, (w.mean, q.mean, w.variance(), q.variance()), covariance, cycle_time));
    }
    if let Some((measured, contacts)) = analytic_moments(built)? {
        rows.push(MomentRow::from_joint(Scheme::RepeatedMeasurements, true, &measured, cycle_time));
        if let Some(c) = contacts {
            rows.push(MomentRow::from_joint(contact, true, &c, cycle_time));
        }
    }
    Ok(rows)
}

pub fn moments(built: &Built) -> CliResult<Output> {
    let mut table = Table::new([
        "scheme",
        "source",
        "work",
        "heat",
        "work_variance",
        "heat_variance",
        "covariance",
        "efficiency",
        "reliability",
        "power",
    ]);
    for r in moment_rows(built)? {
        table.push(vec![
            Cell::text(r.scheme.label()),
            Cell::text(if r.analytic { "analytic" } else { "numeric" }),
            Cell::Num(r.work),
            Cell::Num(r.heat),
            Cell::Num(r.work_variance),
            Cell::Num(r.heat_variance),
            Cell::opt(r.covariance),
            Cell::opt(r.efficiency),
            Cell::opt(r.reliability),
            Cell::opt(r.power),
        ]);
    }
    Ok(Output::Table(table))
}

pub fn asymptotic(built: &Built) -> CliResult<Output> {
    let engine = &built.engine;
    let mut table = Table::new([
        "monitoring",
        "work_per_cycle",
        "heat_per_cycle",
        "efficiency",
        "power",
        "lambda2",
        "excited_population",
        "coherence_re",
        "coherence_im",
    ]);
    for (label, kind) in [("RM", Monitoring::Measurements), ("RC", Monitoring::Contacts)] {
        let sop = build_cycle_superoperator(engine, kind);
        let fixed = invariant_state(&sop)?;
        let avg = asymptotic_averages(engine, kind)?;
        let power = built.durations.map(|(t1, t2)| -avg.work / (t1 + t2));
        table.push(vec![
            Cell::text(label),
            Cell::Num(avg.work),
            Cell::Num(avg.heat),
            Cell::opt(efficiency(avg.work, avg.heat)),
            Cell::opt(power),
            Cell::Num(spectrum(&sop).lambda2),
            Cell::Num(fixed.excited_population()),
            Cell::Num(fixed.coherence().re),
            Cell::Num(fixed.coherence().im),
        ]);
    }
    Ok(Output::Table(table))
}

pub fn lz(config: &Config, t1: Option<f64>) -> CliResult<Output> {
    let t1 = t1
        .or(config.stroke.t1)
        .ok_or_else(|| CliError::Config("`lz` needs a work-stroke duration (--t1)".into()))?;
    let (ec, eh) = (config.engine.eps_c, config.engine.eps_h);
    let delta = landau_zener_delta(ec, eh, t1)?;
    let stroke = WorkStroke::landau_zener(ec, eh, t1)?;
    let mut table = Table::new(["t1", "delta", "alpha", "phi"]);
    table.push(vec![Cell::Num(t1), Cell::Num(delta), Cell::Num(stroke.alpha()), Cell::Num(stroke.phi())]);
    Ok(Output::Table(table))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Power,
    Efficiency,
    Lambda2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    Asymptotic,
    Cycles(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range {
    fn grid(&self, name: &str) -> CliResult<Grid> {
        if self.min <= 0.0 {
            return Err(CliError::Config(format!("{name} range must be positive")));
        }
        Ok(Grid::new(self.min, self.max, self.count)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub t1: Range,
    pub t2: Range,
    pub quantity: Quantity,
    pub horizon: Horizon,
}

/// `(value_rm, value_rc)` at one duration pair.
pub fn sweep_point(config: &Config, spec: &SweepSpec, t1: f64, t2: f64) -> CliResult<(Option<f64>, Option<f64>)> {
    let mut c = config.clone();
    c.stroke.t1 = Some(t1);
    c.thermo.theta = theta_for_duration(t2, c.engine.eps_c, c.engine.eps_h);
    if let Horizon::Cycles(n) = spec.horizon {
        c.engine.cycles = n;
    }
    let built = c.build()?;
    let engine = &built.engine;
    let contact = contact_scheme(built.scheme);
    let value = |scheme: Scheme| -> CliResult<Option<f64>> {
        let kind = Monitoring::from(scheme);
        Ok(match (spec.quantity, spec.horizon) {
            (Quantity::Lambda2, _) => Some(spectrum(&build_cycle_superoperator(engine, kind)).lambda2),
            (q, Horizon::Asymptotic) => {
                let avg = asymptotic_averages(engine, kind)?;
                match q {
                    Quantity::Power => Some(-avg.work / (t1 + t2)),
                    _ => efficiency(avg.work, avg.heat),
                }
            }
            (q, Horizon::Cycles(n)) => {
                let w = marginal(engine, &built.rho, n, scheme, Observable::Work)?.moments().mean;
                match q {
                    Quantity::Power => Some(-w / (n as f64 * (t1 + t2))),
                    _ => {
                        let heat = marginal(engine, &built.rho, n, scheme, Observable::Heat)?.moments().mean;
                        efficiency(w, heat)
                    }
                }
            }
        })
    };
    Ok((value(Scheme::RepeatedMeasurements)?, value(contact)?))
}

pub fn sweep(config: &Config, spec: &SweepSpec) -> CliResult<Output> {
    if config.stroke.stroke_mode != StrokeMode::LandauZener {
        return Err(CliError::Config("sweeps over T1 need stroke_mode = landau_zener".into()));
    }
    let t1s: Vec<f64> = spec.t1.grid("t1")?.values().collect();
    let t2s: Vec<f64> = spec.t2.grid("t2")?.values().collect();
    let points: Vec<(f64, f64)> = t1s.iter().flat_map(|&a| t2s.iter().map(move |&b| (a, b))).collect();
    let values: Vec<(Option<f64>, Option<f64>)> =
        points.par_iter().map(|&(a, b)| sweep_point(config, spec, a, b)).collect::<CliResult<_>>()?;

    let mut table = Table::new(["kind", "t1", "t2", "value_rm", "value_rc"]);
    for (&(a, b), &(rm, rc)) in points.iter().zip(&values) {
        table.push(vec![Cell::text("grid"), Cell::Num(a), Cell::Num(b), Cell::opt(rm), Cell::opt(rc)]);
    }
    for (label, pick) in [("argmax_rm", 0usize), ("argmax_rc", 1)] {
        let best = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| [v.0, v.1][pick].filter(|x| x.is_finite()).map(|x| (i, x)))
            .fold(None, |acc: Option<(usize, f64)>, (i, x)| match acc {
                Some((_, y)) if y >= x => acc,
                _ => Some((i, x)),
            });
        if let Some((i, _)) = best {
            let ((a, b), (rm, rc)) = (points[i], values[i]);
            table.push(vec![Cell::text(label), Cell::Num(a), Cell::Num(b), Cell::opt(rm), Cell::opt(rc)]);
        }
    }
    Ok(Output::Table(table))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn measured(name: impl Into<String>, deviation: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        let status = if deviation <= tolerance { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, deviation: Some(deviation), tolerance: Some(tolerance), detail: detail.into() }
    }

    fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Skip, deviation: None, tolerance: None, detail: why.into() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ValidateArgs {
    /// Scales the lattice's per-contact damping; a negative control.
    pub corrupt_suppression: Option<f64>,
}

pub const ORACLE_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-12;
pub const ANALYTIC_TOL: f64 = 1e-10;
pub const NORMALIZATION_TOL: f64 = 1e-6;

fn trapezoid(values: &[f64], step: f64) -> f64 {
    let inner: f64 = values.iter().sum();
    step * (inner - 0.5 * (values[0] + values[values.len() - 1]))
}

pub fn validation_checks(built: &Built, args: &ValidateArgs) -> CliResult<Vec<Check>> {
    let Built { engine, rho, cycles, .. } = built;
    let scale = args.corrupt_suppression.unwrap_or(1.0);
    let lattice = |scheme, obs| Lattice::new(engine, scheme, obs).map(|l| l.with_corrupted_damping(scale));
    let mut checks = Vec::new();

    for n in 1..=(*cycles).min(MAX_JOINT_CYCLES) {
        for scheme in Scheme::ALL {
            for obs in [Observable::Work, Observable::Heat] {
                let name = format!("oracle_{}_{}_n{n}", scheme.label().to_lowercase(), observable_name(obs));
                let lat = match lattice(scheme, obs) {
                    Err(OttoError::NotDecoupled) => {
                        checks.push(Check::skipped(name, "thermal maps are not decoupled"));
                        continue;
                    }
                    other => other?,
                };
                let mix = lat.assemble(&lat.advance(&lat.start(rho), n));
                let oracle = pathsum_oracle::marginal(engine, rho, n, scheme, obs)?;
                let same_keys = mix.components().iter().map(|c| c.key).eq(oracle.components().iter().map(|c| c.key));
                let dev = mix.max_weight_difference(&oracle);
                let detail = if same_keys { "" } else { "lattice keys differ" };
                checks.push(Check::measured(name, dev, ORACLE_TOL, detail));
            }
        }
    }

    for scheme in Scheme::ALL {
        let name = format!("trace_{}", scheme.label().to_lowercase());
        match lattice(scheme, Observable::Work) {
            Err(OttoError::NotDecoupled) => checks.push(Check::skipped(name, "thermal maps are not decoupled")),
            other => {
                let lat = other?;
                let tr = lat.advance(&lat.start(rho), *cycles).total_trace();
                checks.push(Check::measured(name, (tr - 1.0).norm(), TRACE_TOL, format!("{cycles} cycles")));
            }
        }
    }

    // closed forms cover diagonal initial states; keep the configured populations
    let diagonal = DensityMatrix::from_populations(rho.excited_population(), C64::new(0.0, 0.0))?;
    let single = Built { cycles: 1, rho: diagonal, ..built.clone() };
    match analytic_moments(&single)? {
        None => checks.push(Check::skipped("analytic_moments", "no closed form for this configuration")),
        Some((measured, contacts)) => {
            let scaled = |a: &JointMoments, b: &JointMoments| {
                let size = [b.work, b.heat, b.work_sq, b.heat_sq, b.work_heat].iter().fold(1.0f64, |m, x| m.max(x.abs()));
                a.max_abs_diff(b) / size
            };
            let rm = joint_pdf_rm(engine, &single.rho, 1)?.moments();
            checks.push(Check::measured("analytic_moments_rm", scaled(&rm, &measured), ANALYTIC_TOL, "one cycle"));
            match contacts {
                Some(c) => {
                    let rc = joint_pdf_rc(engine, &single.rho, 1)?.moments();
                    checks.push(Check::measured("analytic_moments_rc", scaled(&rc, &c), ANALYTIC_TOL, "one cycle"));
                }
                None => checks.push(Check::skipped("analytic_moments_rc", "coherent hot target")),
            }
        }
    }

    if engine.sigma() == 0.0 {
        checks.push(Check::skipped("normalization", "zero pointer width: point masses have no density"));
    } else {
        let reach = default_reach(engine, *cycles);
        let points = ((2.0 * reach / (0.5 * engine.sigma())).ceil() as usize).max(4096);
        let grid = Grid::new(-reach, reach, points)?;
        for scheme in Scheme::ALL {
            for obs in [Observable::Work, Observable::Heat] {
                let name = format!("normalization_{}_{}", scheme.label().to_lowercase(), observable_name(obs));
                let lat = match lattice(scheme, obs) {
                    Err(OttoError::NotDecoupled) => {
                        checks.push(Check::skipped(name, "thermal maps are not decoupled"));
                        continue;
                    }
                    other => other?,
                };
                let mix = lat.assemble(&lat.advance(&lat.start(rho), *cycles));
                let density = mix.density_on_grid(&grid)?;
                let lowest = density.iter().cloned().fold(f64::INFINITY, f64::min);
                let integral = trapezoid(&density, grid.step());
                let dev = (integral - 1.0).abs().max(-lowest);
                checks.push(Check::measured(name, dev, NORMALIZATION_TOL, format!("{points} points")));
            }
        }
    }
    Ok(checks)
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut table = Table::new(["check", "status", "deviation", "tolerance", "detail"]);
    for c in checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        };
        table.push(vec![
            Cell::text(c.name.clone()),
            Cell::text(status),
            Cell::opt(c.deviation),
            Cell::opt(c.tolerance),
            Cell::text(c.detail.clone()),
        ]);
    }
    table
}
