//! Idealized review cost for one-phase and two-phase workflows.
//!
//! A cost structure `(alpha_p, alpha_n, beta_p, beta_n)` prices one positive or
//! negative document reviewed in phase one (training) or phase two (ranked
//! review with the frozen model). Stopping phase one after iteration `t`
//! costs
//!
//! ```text
//! alpha_p Q_t + alpha_n (N_t - Q_t)
//!   + [Q_t < Q] (beta_p (Q - Q_t) + beta_n (rho_t - Q + Q_t))
//! ```
//!
//! where `Q = ceil(g R)` and `rho_t` is the depth into the ranking of the
//! unreviewed documents needed to collect the missing positives. `N_t` counts
//! every reviewed document, the seed included.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{self, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostStructure {
    pub alpha_p: f64,
    pub alpha_n: f64,
    pub beta_p: f64,
    pub beta_n: f64,
}

impl CostStructure {
    pub const UNIFORM: CostStructure = CostStructure {
        alpha_p: 1.0,
        alpha_n: 1.0,
        beta_p: 1.0,
        beta_n: 1.0,
    };

    pub fn new(alpha_p: f64, alpha_n: f64, beta_p: f64, beta_n: f64) -> Result<Self> {
        let s = CostStructure {
            alpha_p,
            alpha_n,
            beta_p,
            beta_n,
        };
        if s.as_array().iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(s)
        } else {
            Err(Error::domain(format!("cost structure entries must be positive and finite, got {s}")))
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha_p, self.alpha_n, self.beta_p, self.beta_n]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        CostStructure::new(c * self.alpha_p, c * self.alpha_n, c * self.beta_p, c * self.beta_n)
    }

    /// The six structures used for the headline workflow comparisons.
    pub fn reference_set() -> [CostStructure; 6] {
        let s = |a, b, c, d| CostStructure {
            alpha_p: a,
            alpha_n: b,
            beta_p: c,
            beta_n: d,
        };
        [
            s(1.0, 1.0, 1.0, 1.0),
            s(2.0, 2.0, 1.0, 1.0),
            s(10.0, 10.0, 1.0, 1.0),
            s(20.0, 10.0, 2.0, 1.0),
            s(25.0, 5.0, 5.0, 1.0),
            s(20.0, 20.0, 11.0, 1.0),
        ]
    }
}

impl fmt::Display for CostStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.alpha_p, self.alpha_n, self.beta_p, self.beta_n)
    }
}

/// Accepts `ap,an,bp,bn` (optionally parenthesised) or a family spec such as
/// `multiplicative_positives:10,1,2` (see [`Family`]).
impl FromStr for CostStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') || s.chars().next().is_some_and(char::is_alphabetic) {
            return make_family(&s.parse::<Family>()?);
        }
        let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(s);
        let vals = parse_reals(inner)?;
        match vals[..] {
            [a, b, c, d] => CostStructure::new(a, b, c, d),
            _ => Err(Error::domain(format!("expected four comma-separated costs, got `{s}`"))),
        }
    }
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("`{}` is not a number", v.trim())))
        })
        .collect()
}

/// One-parameter sweeps `x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// `(1+x, 1+x, 1, 1)`
    Training,
    /// `(1+x, 1, 1+x, 1)`
    Additive,
    /// `(1+x, 1, 1, 1)`
    PhaseOnePositives,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Training, Axis::Additive, Axis::PhaseOnePositives];

    pub fn at(self, x: f64) -> Result<CostStructure> {
        make_family(&Family::Axis { axis: self, x })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Training => "training",
            Axis::Additive => "additive",
            Axis::PhaseOnePositives => "phase_one_positives",
        }
    }

    pub fn pattern(self) -> &'static str {
        match self {
            Axis::Training => "(1+x,1+x,1,1)",
            Axis::Additive => "(1+x,1,1+x,1)",
            Axis::PhaseOnePositives => "(1+x,1,1,1)",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Axis::ALL
            .into_iter()
            .find(|a| {
                compact == a.as_str()
                    || compact == a.pattern()
                    || compact == a.pattern().trim_matches(|c| c == '(' || c == ')')
                    || compact.replace('-', "_") == a.as_str()
            })
            .ok_or_else(|| Error::domain(format!("unknown cost family axis `{s}`")))
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Uniform,
    ExpensiveTraining { alpha: f64, beta: f64 },
    AdditivePositives { alpha: f64, beta: f64, v: f64 },
    MultiplicativePositives { alpha: f64, beta: f64, u: f64 },
    ElitePhaseOne { alpha: f64, beta_p: f64, beta_n: f64 },
    Axis { axis: Axis, x: f64 },
}

/// `name` or `name:p1,p2,..`; axis families are `axis:<axis>,<x>`.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let name = name.trim().replace('-', "_");
        if name == "axis" {
            let (axis, x) = args
                .rsplit_once(',')
                .ok_or_else(|| Error::domain("axis family needs `axis:<axis>,<x>`"))?;
            let x = parse_reals(x)?.first().copied().unwrap_or(f64::NAN);
            return Ok(Family::Axis { axis: axis.parse()?, x });
        }
        let vals = parse_reals(args)?;
        let wrong = || Error::domain(format!("wrong number of parameters for family `{name}`"));
        let fam = match (name.as_str(), &vals[..]) {
            ("uniform", []) => Family::Uniform,
            ("expensive_training", &[alpha, beta]) => Family::ExpensiveTraining { alpha, beta },
            ("additive_positives", &[alpha, beta, v]) => Family::AdditivePositives { alpha, beta, v },
            ("multiplicative_positives", &[alpha, beta, u]) => {
                Family::MultiplicativePositives { alpha, beta, u }
            }
            ("elite_phase_one", &[alpha, beta_p, beta_n]) => Family::ElitePhaseOne { alpha, beta_p, beta_n },
            (
                "uniform" | "expensive_training" | "additive_positives" | "multiplicative_positives"
                | "elite_phase_one",
                _,
            ) => return Err(wrong()),
            _ => return Err(Error::domain(format!("unknown cost family `{name}`"))),
        };
        Ok(fam)
    }
}

pub fn make_family(params: &Family) -> Result<CostStructure> {
    match *params {
        Family::Uniform => Ok(CostStructure::UNIFORM),
        Family::ExpensiveTraining { alpha, beta } => CostStructure::new(alpha, alpha, beta, beta),
        Family::AdditivePositives { alpha, beta, v } => {
            if !(v >= 0.0) {
                return Err(Error::domain(format!("additive surcharge v must be >= 0, got {v}")));
            }
            CostStructure::new(alpha + v, alpha, beta + v, beta)
        }
        Family::MultiplicativePositives { alpha, beta, u } => {
            if !(u >= 1.0) {
                return Err(Error::domain(format!("multiplicative surcharge u must be >= 1, got {u}")));
            }
            CostStructure::new(u * alpha, alpha, u * beta, beta)
        }
        Family::ElitePhaseOne { alpha, beta_p, beta_n } => {
            if !(alpha >= beta_p && beta_p > beta_n) {
                return Err(Error::domain(format!(
                    "elite phase one needs alpha >= beta_p > beta_n, got ({alpha}, {beta_p}, {beta_n})"
                )));
            }
            CostStructure::new(alpha, alpha, beta_p, beta_n)
        }
        Family::Axis { axis, x } => {
            if !(x >= 0.0) {
                return Err(Error::domain(format!("x must be >= 0, got {x}")));
            }
            let y = 1.0 + x;
            match axis {
                Axis::Training => CostStructure::new(y, y, 1.0, 1.0),
                Axis::Additive => CostStructure::new(y, 1.0, y, 1.0),
                Axis::PhaseOnePositives => CostStructure::new(y, 1.0, 1.0, 1.0),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub phase1_pos: f64,
    pub phase1_neg: f64,
    pub phase2_pos: f64,
    pub phase2_neg: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn from_parts(phase1_pos: f64, phase1_neg: f64, phase2_pos: f64, phase2_neg: f64) -> Self {
        CostBreakdown {
            phase1_pos,
            phase1_neg,
            phase2_pos,
            phase2_neg,
            total: phase1_pos + phase1_neg + phase2_pos + phase2_neg,
        }
    }
}

fn check_counts(q_t: usize, n_t: usize, rho_t: usize, q: usize) -> Result<()> {
    if q_t > n_t {
        return Err(Error::domain(format!("Q_t = {q_t} exceeds N_t = {n_t}")));
    }
    if q_t >= q && rho_t != 0 {
        return Err(Error::domain(format!("rho_t must be 0 once the quota is met, got {rho_t}")));
    }
    if q_t < q && rho_t < q - q_t {
        return Err(Error::domain(format!(
            "rho_t = {rho_t} cannot yield the {} missing positives",
            q - q_t
        )));
    }
    Ok(())
}

pub fn total_cost(s: &CostStructure, q_t: usize, n_t: usize, rho_t: usize, q: usize) -> Result<CostBreakdown> {
    check_counts(q_t, n_t, rho_t, q)?;
    let (qt, nt, rho, qf) = (q_t as f64, n_t as f64, rho_t as f64, q as f64);
    let (p2p, p2n) = if q_t < q {
        (s.beta_p * (qf - qt), s.beta_n * (rho - qf + qt))
    } else {
        (0.0, 0.0)
    };
    Ok(CostBreakdown::from_parts(s.alpha_p * qt, s.alpha_n * (nt - qt), p2p, p2n))
}

/// The same cost with terms collected into the coefficient of `Q_t`, the
/// phase-one volume, the phase-two depth and the fixed quota term.
pub fn cost_variable_form(s: &CostStructure, q_t: usize, n_t: usize, rho_t: usize, q: usize) -> Result<f64> {
    check_counts(q_t, n_t, rho_t, q)?;
    let (qt, nt, rho, qf) = (q_t as f64, n_t as f64, rho_t as f64, q as f64);
    Ok(if q_t <= q {
        (s.alpha_p - s.alpha_n - s.beta_p + s.beta_n) * qt
            + s.alpha_n * nt
            + s.beta_n * rho
            + (s.beta_p - s.beta_n) * qf
    } else {
        (s.alpha_p - s.alpha_n) * qt + s.alpha_n * nt
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsPoint {
    pub t: usize,
    pub cum_pos: usize,
    pub cum_reviewed: usize,
    pub rho: usize,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostDynamics {
    pub quota: usize,
    pub structure: CostStructure,
    pub points: Vec<DynamicsPoint>,
}

impl CostDynamics {
    pub fn totals(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.cost.total).collect()
    }

    /// Writes `iteration,phase1_pos,phase1_neg,phase2_pos,phase2_neg,total`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,phase1_pos,phase1_neg,phase2_pos,phase2_neg,total")?;
        for p in &self.points {
            let c = &p.cost;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                p.t, c.phase1_pos, c.phase1_neg, c.phase2_pos, c.phase2_neg, c.total
            )?;
        }
        Ok(())
    }
}

/// Prices every iteration of `trace` under `structure` for recall target `g`.
pub fn dynamics(trace: &RunTrace, structure: &CostStructure, g: f64) -> Result<CostDynamics> {
    if trace.records.is_empty() {
        return Err(Error::Analysis("trace has no iterations".into()));
    }
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::domain(format!("recall target must lie in (0, 1], got {g}")));
    }
    let quota = trace.quota(g);
    let points = trace
        .records
        .iter()
        .map(|r| {
            let rho = simulator::rho(r, quota)?;
            let cost = total_cost(structure, r.cum_pos, r.cum_reviewed, rho, quota)?;
            Ok(DynamicsPoint {
                t: r.t,
                cum_pos: r.cum_pos,
                cum_reviewed: r.cum_reviewed,
                rho,
                cost,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CostDynamics {
        quota,
        structure: *structure,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingAnalysis {
    pub optimal_t: usize,
    pub min_cost: f64,
    pub tolerance: f64,
    pub acceptable_iterations: Vec<usize>,
    pub acceptable_count: usize,
    /// The last recorded iteration is still acceptable, so the range may
    /// extend past the end of the trace.
    pub truncated: bool,
}

/// Relative slack under which two totals count as equal, so that rounding
/// cannot reorder iterations when a structure is rescaled.
const TIE_RTOL: f64 = 1e-12;

fn strictly_below(a: f64, b: f64) -> bool {
    a < b - TIE_RTOL * b.abs()
}

fn argmin_by<'a>(points: impl Iterator<Item = &'a DynamicsPoint>) -> Option<(usize, f64)> {
    points.fold(None, |best, p| match best {
        Some((_, c)) if !strictly_below(p.cost.total, c) => best,
        _ => Some((p.t, p.cost.total)),
    })
}

/// Cheapest stopping iteration; ties go to the earliest.
pub fn optimal_stop(dyn_: &CostDynamics) -> Result<(usize, f64)> {
    argmin_by(dyn_.points.iter()).ok_or_else(|| Error::Analysis("empty cost dynamics".into()))
}

/// Cheapest stopping iteration among those with `Q_t <= Q`.
pub fn optimal_stop_within_quota(dyn_: &CostDynamics) -> Result<(usize, f64)> {
    argmin_by(dyn_.points.iter().filter(|p| p.cum_pos <= dyn_.quota))
        .ok_or_else(|| Error::Analysis("no iteration with Q_t <= Q".into()))
}

/// Iterations whose total is within `(1 + tolerance)` of the minimum. The set
/// need not be contiguous.
pub fn acceptable_range(dyn_: &CostDynamics, tolerance: f64) -> Result<StoppingAnalysis> {
    if !(tolerance >= 0.0) {
        return Err(Error::domain(format!("tolerance must be >= 0, got {tolerance}")));
    }
    let (optimal_t, min_cost) = optimal_stop(dyn_)?;
    let threshold = (1.0 + tolerance) * min_cost;
    let within = |p: &DynamicsPoint| !strictly_below(threshold, p.cost.total);
    let acceptable_iterations: Vec<usize> = dyn_.points.iter().filter(|p| within(p)).map(|p| p.t).collect();
    let truncated = dyn_.points.last().is_some_and(within);
    Ok(StoppingAnalysis {
        optimal_t,
        min_cost,
        tolerance,
        acceptable_count: acceptable_iterations.len(),
        acceptable_iterations,
        truncated,
    })
}

/// Cost of stopping at the first iteration that meets the quota.
pub fn one_phase_cost(trace: &RunTrace, structure: &CostStructure, g: f64) -> Result<f64> {
    let quota = trace.quota(g);
    let t = simulator::one_phase_stop(trace, quota)?;
    let r = &trace.records[t];
    Ok(total_cost(structure, r.cum_pos, r.cum_reviewed, 0, quota)?.total)
}

/// Cost of the best two-phase review: the minimum over all stopping iterations.
pub fn two_phase_cost(trace: &RunTrace, structure: &CostStructure, g: f64) -> Result<f64> {
    optimal_stop(&dynamics(trace, structure, g)?).map(|(_, c)| c)
}
