//! Grid verification of every inequality the ball-maximality argument for
//! `Λ₂` relies on.
//!
//! Each check evaluates a signed margin at every grid point (positive means
//! the inequality holds with room to spare), skips points outside its
//! hypotheses as "filtered", and reports the worst margin with the point
//! where it occurs. Points are evaluated in parallel and reduced in grid
//! order, so reports are deterministic.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{membrane_lambda2, second_eigenvalue, w1_small_a_limit, w_det, BallParams, RadialMode};
use crate::error::{Error, Result};
use crate::profile::TrialProfile;
use crate::specfun::{first_derivative_zero, p11, ultra_i, ultra_i_deriv, ultra_j, ultra_j_deriv, SeriesCoefficients, UltraIndex};

/// Every check the suite knows, in execution order.
pub const LEMMA_IDS: &[&str] = &[
    "lorch_szego_bracket",
    "bessel_properties",
    "determinant_sign_structure",
    "ball_lambda2_bounds",
    "spectral_parameter_bounds",
    "large_tension_margin",
    "small_tension_positivity",
    "small_tension_gamma_lower_bound",
    "small_tension_gamma_separation",
    "small_tension_parameter_range",
    "quartic_positivity",
    "quartic_expansion_residual",
    "quartic_alpha_derivative",
    "membrane_lower_bound",
    "trial_profile_shape",
    "partial_monotonicity",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

/// Parameter grids. Every field has a default, so a config file only needs
/// the fields it overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dims: Vec<u32>,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_count: usize,
    pub tau_spacing: Spacing,
    /// `α = −f τ` for each fraction `f ∈ (0, 1)`.
    pub alpha_fractions: Vec<f64>,
    /// Points per radial grid.
    pub r_count: usize,
    /// Points per one-dimensional sample inside a single check
    /// (Bessel sign tables, polynomial abscissae).
    pub sample_count: usize,
    /// Robin parameters on `[−1, 0]` for the membrane bound.
    pub membrane_alpha_count: usize,
    /// Largest dimension for the Lorch–Szegő bracket (from 2).
    pub lorch_szego_max_dim: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4, 5, 8],
            tau_min: 1e-2,
            tau_max: 1e2,
            tau_count: 13,
            tau_spacing: Spacing::Log,
            alpha_fractions: vec![0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99],
            r_count: 200,
            sample_count: 200,
            membrane_alpha_count: 50,
            lorch_szego_max_dim: 12,
        }
    }
}

impl GridSpec {
    /// Read a TOML (or, for `.json`, JSON) grid file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let grid: GridSpec = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)?,
            _ => toml::from_str(&text)?,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// A single `(d, τ, α = −fτ)` point.
    pub fn single(d: u32, tau: f64, fraction: f64) -> Self {
        Self { dims: vec![d], tau_min: tau, tau_max: tau, tau_count: 1, alpha_fractions: vec![fraction], ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.dims.is_empty() || self.alpha_fractions.is_empty() || self.tau_count == 0 {
            return bad("grid is empty");
        }
        if self.dims.iter().any(|&d| d < 2) {
            return bad("dimensions must be at least 2");
        }
        if !(self.tau_min > 0.0 && self.tau_max >= self.tau_min && self.tau_max.is_finite()) {
            return bad("tension range must satisfy 0 < tau_min ≤ tau_max");
        }
        if self.tau_count == 1 && self.tau_min != self.tau_max {
            return bad("a one-point tension range needs tau_min = tau_max");
        }
        if self.tau_count >= 2 && self.tau_min == self.tau_max {
            return bad("a degenerate tension range needs tau_count = 1");
        }
        if self.alpha_fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return bad("alpha fractions must lie in (0, 1)");
        }
        if self.r_count < 2 || self.sample_count < 2 || self.membrane_alpha_count < 2 {
            return bad("r_count, sample_count and membrane_alpha_count must be at least 2");
        }
        if self.lorch_szego_max_dim < 2 {
            return bad("lorch_szego_max_dim must be at least 2");
        }
        Ok(())
    }

    pub fn taus(&self) -> Vec<f64> {
        if self.tau_count == 1 {
            return vec![self.tau_min];
        }
        let n = self.tau_count - 1;
        (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                match self.tau_spacing {
                    Spacing::Log => (self.tau_min.ln() + t * (self.tau_max.ln() - self.tau_min.ln())).exp(),
                    Spacing::Linear => self.tau_min + t * (self.tau_max - self.tau_min),
                }
            })
            .collect()
    }

    /// The `(d, τ, α)` grid in lexicographic order.
    pub fn points(&self) -> Vec<GridPoint> {
        let taus = self.taus();
        let mut out = Vec::new();
        for &d in &self.dims {
            for &tau in &taus {
                for &f in &self.alpha_fractions {
                    out.push(GridPoint { d, tau: Some(tau), alpha: Some(-f * tau) });
                }
            }
        }
        out
    }
}

/// A grid location; checks that do not depend on `τ` or `α` leave them
/// unset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub d: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl GridPoint {
    fn key(&self) -> (u32, f64, f64) {
        (self.d, self.tau.unwrap_or(f64::NEG_INFINITY), self.alpha.unwrap_or(f64::NEG_INFINITY))
    }

    fn ball(&self) -> Result<BallParams> {
        BallParams::new(self.d, self.tau.unwrap_or(f64::NAN), self.alpha.unwrap_or(f64::NAN))
    }
}

/// The point where the minimum margin occurred, plus check-specific
/// coordinates (a radius, an abscissa, a sub-property index).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(flatten)]
    pub point: GridPoint,
    #[serde(flatten)]
    pub extra: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lemma: String,
    /// Points evaluated, excluding filtered ones.
    pub grid_points: usize,
    /// Points outside the check's hypotheses.
    pub filtered: usize,
    /// `None` when every point was filtered.
    pub min_margin: Option<f64>,
    pub witness: Option<Witness>,
    pub pass: bool,
    #[serde(skip)]
    pub tolerance: f64,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    /// One JSON object on one line.
    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Result of one check at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Filtered,
    Margin { value: f64, extra: Vec<(&'static str, f64)> },
}

fn margin(value: f64) -> Outcome {
    Outcome::Margin { value, extra: Vec::new() }
}

/// Running minimum with the witness coordinates attached.
#[derive(Default)]
struct MinTracker {
    best: Option<(f64, Vec<(&'static str, f64)>)>,
}

impl MinTracker {
    fn push(&mut self, value: f64, extra: Vec<(&'static str, f64)>) {
        // NaN is the worst possible margin
        let value = if value.is_nan() { f64::NEG_INFINITY } else { value };
        if self.best.as_ref().is_none_or(|(b, _)| value < *b) {
            self.best = Some((value, extra));
        }
    }

    fn outcome(self) -> Outcome {
        match self.best {
            Some((value, extra)) => Outcome::Margin { value, extra },
            None => Outcome::Filtered,
        }
    }
}

/// Evenly spaced points of `(lo, hi]`.
fn half_open(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}

/// Evenly spaced interior points of `(lo, hi)`.
fn open(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| lo + (hi - lo) * i as f64 / (n + 1) as f64)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

struct Check {
    id: &'static str,
    tolerance: f64,
    points: fn(&GridSpec) -> Vec<GridPoint>,
    eval: fn(&GridSpec, &GridPoint) -> Result<Outcome>,
}

fn main_points(g: &GridSpec) -> Vec<GridPoint> {
    g.points()
}

fn dim_points(g: &GridSpec) -> Vec<GridPoint> {
    g.dims.iter().map(|&d| GridPoint { d, tau: None, alpha: None }).collect()
}

fn checks() -> Vec<Check> {
    vec![
        Check { id: "lorch_szego_bracket", tolerance: 1e-10, points: lorch_points, eval: eval_lorch_szego },
        Check { id: "bessel_properties", tolerance: 1e-12, points: dim_points, eval: eval_bessel_properties },
        Check { id: "determinant_sign_structure", tolerance: 0.0, points: main_points, eval: eval_sign_structure },
        Check { id: "ball_lambda2_bounds", tolerance: 1e-9, points: main_points, eval: eval_lambda2_bounds },
        Check { id: "spectral_parameter_bounds", tolerance: 1e-9, points: main_points, eval: eval_atb_bounds },
        Check { id: "large_tension_margin", tolerance: 0.0, points: main_points, eval: eval_large_tension },
        Check { id: "small_tension_positivity", tolerance: 0.0, points: main_points, eval: eval_small_positivity },
        Check { id: "small_tension_gamma_lower_bound", tolerance: 1e-12, points: main_points, eval: eval_gamma_lb },
        Check { id: "small_tension_gamma_separation", tolerance: 0.0, points: main_points, eval: eval_gamma_sep },
        Check { id: "small_tension_parameter_range", tolerance: 0.0, points: main_points, eval: eval_small_range },
        Check { id: "quartic_positivity", tolerance: 0.0, points: main_points, eval: eval_quartic_positivity },
        Check { id: "quartic_expansion_residual", tolerance: 0.0, points: main_points, eval: eval_quartic_expansion },
        Check { id: "quartic_alpha_derivative", tolerance: 0.0, points: main_points, eval: eval_quartic_derivative },
        Check { id: "membrane_lower_bound", tolerance: 1e-12, points: membrane_points, eval: eval_membrane },
        Check { id: "trial_profile_shape", tolerance: 1e-12, points: main_points, eval: eval_trial_profile },
        Check { id: "partial_monotonicity", tolerance: 1e-10, points: main_points, eval: eval_partial_monotonicity },
    ]
}

fn find_check(id: &str) -> Result<Check> {
    checks().into_iter().find(|c| c.id == id).ok_or_else(|| Error::Domain(format!("unknown lemma id {id:?}; known: {}", LEMMA_IDS.join(", "))))
}

fn run_check(check: &Check, grid: &GridSpec) -> Result<VerificationReport> {
    let start = Instant::now();
    let points = (check.points)(grid);
    if points.is_empty() {
        return Err(Error::Config(format!("{}: grid has no points", check.id)));
    }
    let outcomes: Vec<Result<Outcome>> = points.par_iter().map(|p| (check.eval)(grid, p)).collect();
    let mut filtered = 0;
    let mut evaluated = 0;
    let mut best: Option<(f64, GridPoint, Vec<(&'static str, f64)>)> = None;
    for (p, o) in points.iter().zip(outcomes) {
        match o? {
            Outcome::Filtered => filtered += 1,
            Outcome::Margin { value, extra } => {
                evaluated += 1;
                let value = if value.is_nan() { f64::NEG_INFINITY } else { value };
                let better = match &best {
                    None => true,
                    Some((b, bp, _)) => value < *b || (value == *b && p.key().partial_cmp(&bp.key()) == Some(std::cmp::Ordering::Less)),
                };
                if better {
                    best = Some((value, *p, extra));
                }
            }
        }
    }
    let (min_margin, witness) = match best {
        Some((v, p, extra)) => (Some(v), Some(Witness { point: p, extra: extra.into_iter().map(|(k, v)| (k.to_string(), v)).collect() })),
        None => (None, None),
    };
    let pass = min_margin.is_none_or(|m| m >= -check.tolerance);
    Ok(VerificationReport {
        lemma: check.id.to_string(),
        grid_points: evaluated,
        filtered,
        min_margin,
        witness,
        pass,
        tolerance: check.tolerance,
        elapsed: start.elapsed(),
    })
}

/// Run one named check.
pub fn run_suite(id: &str, grid: &GridSpec) -> Result<VerificationReport> {
    grid.validate()?;
    run_check(&find_check(id)?, grid)
}

/// Run every check, in [`LEMMA_IDS`] order.
pub fn run_all(grid: &GridSpec) -> Result<Vec<VerificationReport>> {
    grid.validate()?;
    checks().iter().map(|c| run_check(c, grid)).collect()
}

/// Re-evaluate one check at a single point, e.g. a report's witness.
pub fn evaluate_point(id: &str, grid: &GridSpec, point: &GridPoint) -> Result<Option<f64>> {
    Ok(match (find_check(id)?.eval)(grid, point)? {
        Outcome::Filtered => None,
        Outcome::Margin { value, .. } => Some(value),
    })
}

pub fn all_pass(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

// ---------------------------------------------------------------------------
// Bessel-level facts

fn lorch_points(g: &GridSpec) -> Vec<GridPoint> {
    (2..=g.lorch_szego_max_dim).map(|d| GridPoint { d, tau: None, alpha: None }).collect()
}

/// `min(p₁,₁² − d, d + 2 − p₁,₁²)`
fn eval_lorch_szego(_: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let q = p11(p.d)?.powi(2);
    let d = p.d as f64;
    Ok(margin((q - d).min(d + 2.0 - q)))
}

/// The sign table and bounds for low-order Bessel functions of one
/// dimension; the witness records which property (1–6) is tightest.
fn eval_bessel_properties(g: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let d = p.d;
    let n = g.sample_count;
    let i1 = UltraIndex::new(d, 1)?;
    let pz = p11(d)?;
    let mut t = MinTracker::default();

    // 1–2: j₁″ < 0, j₁, j₂, j₃ > 0 and j₁⁗ > 0 on (0, p₁,₁]
    for z in half_open(0.0, pz, n) {
        t.push(-ultra_j_deriv(i1, z, 2)?, vec![("property", 1.0), ("z", z)]);
        for ell in 1..=3 {
            t.push(ultra_j(i1.with_ell(ell), z)?, vec![("property", 2.0), ("ell", ell as f64), ("z", z)]);
        }
        t.push(ultra_j_deriv(i1, z, 4)?, vec![("property", 2.0), ("ell", 4.0), ("z", z)]);
    }
    // 3: j₁′ > 0 on (0, p₁,₁)
    for z in open(0.0, pz, n) {
        t.push(ultra_j_deriv(i1, z, 1)?, vec![("property", 3.0), ("z", z)]);
    }
    // 4: z j_ℓ′/j_ℓ positive and strictly decreasing on (0, p_ℓ,₁)
    for ell in 1..=3 {
        let idx = i1.with_ell(ell);
        let pl = first_derivative_zero(idx)?;
        let f = |z: f64| -> Result<f64> { Ok(z * ultra_j_deriv(idx, z, 1)? / ultra_j(idx, z)?) };
        let zs: Vec<f64> = open(0.0, pl, n).collect();
        let vals: Vec<f64> = zs.iter().map(|&z| f(z)).collect::<Result<_>>()?;
        for (w, z) in vals.windows(2).zip(&zs) {
            t.push(w[0] - w[1], vec![("property", 4.0), ("ell", ell as f64), ("z", *z)]);
        }
        t.push(vals[n - 1], vec![("property", 4.0), ("ell", ell as f64), ("z", zs[n - 1])]);
    }
    // 5: cubic majorants of j₁″ and i₁″
    let d1 = SeriesCoefficients::i1_second_derivative_coefficient(d, 1);
    let d2 = SeriesCoefficients::i1_second_derivative_coefficient(d, 2);
    let df = d as f64;
    let zj = (3.0 * (df + 2.0) / (df + 5.0)).sqrt();
    for z in half_open(0.0, zj, n) {
        t.push(-d1 * z + d2 * z.powi(3) - ultra_j_deriv(i1, z, 2)?, vec![("property", 5.0), ("z", z)]);
    }
    for z in half_open(0.0, 3f64.sqrt(), n) {
        t.push(d1 * z + 1.2 * d2 * z.powi(3) - ultra_i_deriv(i1, z, 2)?, vec![("property", 5.0), ("ell", -1.0), ("z", z)]);
    }
    // 6: a/b > j₁(ar)/i₁(br), with equality only as r → 0⁺
    let m = 20;
    for a in half_open(0.0, pz, m) {
        for &b in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let ab = a / b;
            for r in half_open(0.0, 1.0, m) {
                let ratio = ultra_j(i1, a * r)? / ultra_i(i1, b * r)?;
                t.push((ab - ratio) / ab, vec![("property", 6.0), ("a", a), ("b", b), ("r", r)]);
            }
            let r = 1e-4;
            let rel = (ultra_j(i1, a * r)? / ultra_i(i1, b * r)? / ab - 1.0).abs();
            t.push(1e-6 - rel, vec![("property", 6.0), ("a", a), ("b", b), ("r", r)]);
        }
    }
    Ok(t.outcome())
}

// ---------------------------------------------------------------------------
// Ball determinant and eigenvalue bounds

fn mode_at(p: &GridPoint) -> Result<(BallParams, RadialMode)> {
    let bp = p.ball()?;
    Ok((bp, second_eigenvalue(&bp)?))
}

/// `W₁(10⁻³p₁,₁) < 0 < W₁(p₁,₁)`, `W₀ > 0` on `(0, p₁,₁]`, and the small-`a`
/// limit of `W₁/(ab)` within `10⁻³` relative. `W₁` signs are measured in
/// units of `ab·|limit|`, `W₀` in units of its largest sampled magnitude.
fn eval_sign_structure(g: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let bp = p.ball()?;
    let pz = p11(bp.d)?;
    let limit = w1_small_a_limit(&bp)?;
    let unit = |a: f64| a * (a * a + bp.tau).sqrt() * limit.abs();
    let mut t = MinTracker::default();
    let lo = 1e-3 * pz;
    t.push(-w_det(1, &bp, lo)? / unit(lo), vec![("ell", 1.0), ("a", lo)]);
    t.push(w_det(1, &bp, pz)? / unit(pz), vec![("ell", 1.0), ("a", pz)]);
    let w0: Vec<(f64, f64)> = half_open(0.0, pz, g.sample_count.min(100)).map(|a| Ok((a, w_det(0, &bp, a)?))).collect::<Result<_>>()?;
    let s0 = w0.iter().fold(0.0f64, |m, (_, w)| m.max(w.abs()));
    for (a, w) in w0 {
        t.push(w / s0, vec![("ell", 0.0), ("a", a)]);
    }
    let a = 1e-4;
    let rel = (w_det(1, &bp, a)? / (a * (a * a + bp.tau).sqrt()) / limit - 1.0).abs();
    t.push(1e-3 - rel, vec![("ell", 1.0), ("a", a), ("limit", 1.0)]);
    Ok(t.outcome())
}

/// `min(Λ₂ − d(τ+α), (d+2)(τ+α) − Λ₂)`
fn eval_lambda2_bounds(_: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let (bp, m) = mode_at(p)?;
    let ta = bp.tau_plus_alpha();
    let d = bp.d as f64;
    Ok(Outcome::Margin { value: (m.lambda - d * ta).min((d + 2.0) * ta - m.lambda), extra: vec![("lambda", m.lambda)] })
}

/// Lower bounds on `τ+α`, `τ`, `b²` in terms of `a`, always; the upper
/// bounds only where `a² < d`. Points with `a² ≥ d` count as filtered
/// (for the upper bounds) but still contribute their lower-bound margins.
fn atb_margins(bp: &BallParams, m: &RadialMode) -> (f64, Option<f64>) {
    let (tau, alpha) = (bp.tau, bp.alpha);
    let d = bp.d as f64;
    let a2 = m.a * m.a;
    let b2 = m.b * m.b;
    let lower = [
        (tau + alpha) - a2 * (a2 - alpha) / (d + 2.0 - a2),
        tau - (a2 * a2 - (d + 2.0) * alpha) / (d + 2.0 - a2),
        b2 - (d + 2.0) * (a2 - alpha) / (d + 2.0 - a2),
    ];
    let low = lower.iter().copied().fold(f64::INFINITY, f64::min);
    if a2 >= d {
        return (low, None);
    }
    let upper = [
        a2 * (a2 - alpha) / (d - a2) - (tau + alpha),
        (a2 * a2 - d * alpha) / (d - a2) - tau,
        d * (a2 - alpha) / (d - a2) - b2,
    ];
    (low, Some(upper.iter().copied().fold(f64::INFINITY, f64::min)))
}

fn eval_atb_bounds(_: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let (bp, m) = mode_at(p)?;
    let (low, up) = atb_margins(&bp, &m);
    // report the upper-bound skip through the witness, the low margin always
    let value = up.map_or(low, |u| low.min(u));
    Ok(Outcome::Margin { value, extra: vec![("a_squared", m.a * m.a), ("upper_checked", if up.is_some() { 1.0 } else { 0.0 })] })
}

/// Number of grid points where `a² ≥ d`, i.e. where the upper bounds of
/// the spectral-parameter check are skipped.
pub fn spectral_parameter_upper_skips(grid: &GridSpec) -> Result<usize> {
    let outcomes: Vec<Result<bool>> = grid
        .points()
        .par_iter()
        .map(|p| {
            let (bp, m) = mode_at(p)?;
            Ok(m.a * m.a >= bp.d as f64)
        })
        .collect();
    let mut n = 0;
    for o in outcomes {
        n += o? as usize;
    }
    Ok(n)
}

fn large_hypothesis(bp: &BallParams, m: &RadialMode) -> bool {
    let d = bp.d as f64;
    m.a * m.a > (3.0 + bp.alpha) * (d + 2.0) / (d + 5.0) || bp.tau_plus_alpha() > 3.0 * (3.0 + bp.alpha) / (d + 5.0)
}

/// `τ + α − 3a²/(d+2)` where the large-tension hypotheses hold.
fn eval_large_tension(_: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let (bp, m) = mode_at(p)?;
    if !large_hypothesis(&bp, &m) {
        return Ok(Outcome::Filtered);
    }
    Ok(margin(bp.tau_plus_alpha() - 3.0 * m.a * m.a / (bp.d as f64 + 2.0)))
}

// ---------------------------------------------------------------------------
// Small tension: the γ chain and the quartic

/// `c = d₂/d₁` from the `i₁″` series coefficients.
pub fn gamma_chain_constant(d: u32) -> f64 {
    SeriesCoefficients::i1_second_derivative_coefficient(d, 2) / SeriesCoefficients::i1_second_derivative_coefficient(d, 1)
}

/// `γ_LB = (a/b)³ (1 − c a²) / (1 + (6/5) c b̄²)` with `b̄²` the upper bound
/// `d(a² − α)/(d − a²)`; `c` is recomputed from the series coefficients.
pub fn gamma_lower_bound(d: u32, a: f64, b: f64, alpha: f64) -> f64 {
    let c = gamma_chain_constant(d);
    let df = d as f64;
    let a2 = a * a;
    let b2_up = df * (a2 - alpha) / (df - a2);
    (a / b).powi(3) * (1.0 - c * a2) / (1.0 + 1.2 * c * b2_up)
}

/// The closed form of [`gamma_lower_bound`] once `c = 5/(6(d+4))`.
pub fn gamma_lower_bound_closed_form(d: u32, a: f64, b: f64, alpha: f64) -> f64 {
    let df = d as f64;
    let a2 = a * a;
    (a / b).powi(3) * (6.0 * (df + 4.0) - 5.0 * a2) * (df - a2) / (6.0 * df * (df + 4.0 - alpha) - 24.0 * a2)
}

/// `γ*`, the threshold above which the sufficient condition holds.
pub fn gamma_star(d: u32, a: f64, b: f64, alpha: f64) -> f64 {
    let df = d as f64;
    let a2 = a * a;
    let num = 3.0 * (df + 2.0 - a2) - (df + 2.0) * (a2 - alpha);
    let den = a2 * (df - a2) * (df + 2.0) / df + 3.0 * (df + 2.0 - a2);
    (a / b).powi(3) * num / den
}

/// `p_α(x)` with its expanded coefficients.
pub fn quartic(d: u32, alpha: f64, x: f64) -> f64 {
    let d = d as f64;
    -5.0 * (d + 2.0) * x.powi(4) + (16.0 * d * d + 41.0 * d + 48.0) * x.powi(3) - d * (17.0 * d * d + 58.0 * d + 114.0) * x * x
        + 3.0 * d * (4.0 * d.powi(3) + (13.0 - 2.0 * alpha) * d * d + 2.0 * (5.0 - alpha) * d + 16.0 * alpha) * x
        - 6.0 * alpha * d * d * (d + 2.0) * (d + 1.0 - alpha)
}

/// `d·A` from its unexpanded product-minus-product definition.
pub fn quartic_product_form(d: u32, alpha: f64, x: f64) -> f64 {
    let d = d as f64;
    (6.0 * (d + 4.0) - 5.0 * x) * (d - x) * (x * (d - x) * (d + 2.0) + 3.0 * d * (d + 2.0 - x))
        - d * (3.0 * (d + 2.0 - x) - (d + 2.0) * (x - alpha)) * (6.0 * d * (d + 4.0 - alpha) - 24.0 * x)
}

/// `q_α(x) = ∂p_α/∂α`.
pub fn quartic_alpha_derivative(d: u32, alpha: f64, x: f64) -> f64 {
    let d = d as f64;
    3.0 * d * (16.0 - 2.0 * d * d - 2.0 * d) * x - 6.0 * d * d * (d + 2.0) * (d + 1.0 - 2.0 * alpha)
}

/// `P(x) = p₀(x)/x`.
pub fn cubic(d: u32, x: f64) -> f64 {
    let d = d as f64;
    -5.0 * (d + 2.0) * x.powi(3) + (16.0 * d * d + 41.0 * d + 48.0) * x * x - d * (17.0 * d * d + 58.0 * d + 114.0) * x
        + 3.0 * d * d * (d + 2.0) * (4.0 * d + 5.0)
}

fn small_hypothesis(bp: &BallParams, m: &RadialMode) -> bool {
    let d = bp.d as f64;
    m.a * m.a <= (3.0 + bp.alpha) * (d + 2.0) / (d + 5.0) && bp.tau_plus_alpha() <= 3.0 * (3.0 + bp.alpha) / (d + 5.0)
}

fn small_mode(p: &GridPoint) -> Result<Option<(BallParams, RadialMode)>> {
    let (bp, m) = mode_at(p)?;
    Ok(small_hypothesis(&bp, &m).then_some((bp, m)))
}

/// `min_r nice_lhs(r)/i₁(br)` on the radial grid.
fn eval_small_positivity(g: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let Some((bp, m)) = small_mode(p)? else { return Ok(Outcome::Filtered) };
    let t = TrialProfile::from_mode(&bp, m)?;
    let i1 = UltraIndex::new(bp.d, 1)?;
    let mut tr = MinTracker::default();
    for r in half_open(0.0, 1.0, g.r_count) {
        tr.push(t.nice_lhs(r)? / ultra_i(i1, m.b * r)?, vec![("r", r)]);
    }
    Ok(tr.outcome())
}

fn eval_gamma_lb(_: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let Some((bp, m)) = small_mode(p)? else { return Ok(Outcome::Filtered) };
    let lb = gamma_lower_bound(bp.d, m.a, m.b, bp.alpha);
    Ok(Outcome::Margin { value: m.gamma - lb, extra: vec![("gamma", m.gamma), ("gamma_lb", lb)] })
}

fn eval_gamma_sep(_: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let Some((bp, m)) = small_mode(p)? else { return Ok(Outcome::Filtered) };
    let lb = gamma_lower_bound(bp.d, m.a, m.b, bp.alpha);
    let star = gamma_star(bp.d, m.a, m.b, bp.alpha);
    Ok(Outcome::Margin { value: lb - star, extra: vec![("gamma_lb", lb), ("gamma_star", star)] })
}

/// `a² < d` and `b² ≤ 3` on the small-tension sub-grid.
fn eval_small_range(_: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let Some((bp, m)) = small_mode(p)? else { return Ok(Outcome::Filtered) };
    let value = (bp.d as f64 - m.a * m.a).min(3.0 - m.b * m.b);
    Ok(Outcome::Margin { value, extra: vec![("a_squared", m.a * m.a), ("b_squared", m.b * m.b)] })
}

/// `p_α(x)/x > 0` on `(0, d)` for this point's `α` and `P > 0` on
/// `[0, d]`, on the small-tension sub-grid.
fn eval_quartic_positivity(g: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let Some((bp, _)) = small_mode(p)? else { return Ok(Outcome::Filtered) };
    let d = bp.d as f64;
    let mut t = MinTracker::default();
    for x in open(0.0, d, g.sample_count) {
        t.push(quartic(bp.d, bp.alpha, x) / x, vec![("x", x)]);
    }
    for x in (0..=g.sample_count).map(|i| d * i as f64 / g.sample_count as f64) {
        t.push(cubic(bp.d, x), vec![("x", x), ("cubic", 1.0)]);
    }
    Ok(t.outcome())
}

/// Transcription guard: `1e−9` minus the worst relative disagreement
/// between the expanded quartic and its product form, and between the
/// printed values `P(d) = 6d²(d²+2d−6)`, `P′(d) = −6d² − 18d`,
/// `P″(d) = 2d² + 22d + 96` and the polynomial itself.
fn eval_quartic_expansion(g: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let bp = p.ball()?;
    let d = bp.d as f64;
    let mut t = MinTracker::default();
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1.0);
    for x in (0..=g.sample_count.min(50)).map(|i| 1.5 * d * i as f64 / g.sample_count.min(50) as f64) {
        let e = quartic(bp.d, bp.alpha, x);
        let f = quartic_product_form(bp.d, bp.alpha, x);
        t.push(1e-9 - rel(e, f), vec![("x", x)]);
    }
    t.push(1e-9 - rel(cubic(bp.d, d), 6.0 * d * d * (d * d + 2.0 * d - 6.0)), vec![("x", d), ("cubic", 1.0)]);
    // derivatives of P by exact coefficient differentiation
    let dp = -15.0 * (d + 2.0) * d * d + 2.0 * (16.0 * d * d + 41.0 * d + 48.0) * d - d * (17.0 * d * d + 58.0 * d + 114.0);
    let ddp = -30.0 * (d + 2.0) * d + 2.0 * (16.0 * d * d + 41.0 * d + 48.0);
    t.push(1e-9 - rel(dp, -6.0 * d * d - 18.0 * d), vec![("x", d), ("cubic", 2.0)]);
    t.push(1e-9 - rel(ddp, 2.0 * d * d + 22.0 * d + 96.0), vec![("x", d), ("cubic", 3.0)]);
    Ok(t.outcome())
}

/// `−q_α(x) > 0` on `[0, d]` and `q_α ≤ q₀ ≤ −6d²(d²+3d−6)`.
fn eval_quartic_derivative(g: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let bp = p.ball()?;
    let d = bp.d as f64;
    let mut t = MinTracker::default();
    for x in (0..=g.sample_count).map(|i| d * i as f64 / g.sample_count as f64) {
        let q = quartic_alpha_derivative(bp.d, bp.alpha, x);
        let q0 = quartic_alpha_derivative(bp.d, 0.0, x);
        t.push(-q, vec![("x", x)]);
        t.push(q0 - q, vec![("x", x), ("vs_zero", 1.0)]);
        t.push(-6.0 * d * d * (d * d + 3.0 * d - 6.0) - q0, vec![("x", x), ("vs_bound", 1.0)]);
    }
    Ok(t.outcome())
}

// ---------------------------------------------------------------------------
// Membrane bound

fn membrane_points(g: &GridSpec) -> Vec<GridPoint> {
    let n = g.membrane_alpha_count - 1;
    let mut out = Vec::new();
    for &d in &g.dims {
        for i in 0..=n {
            out.push(GridPoint { d, tau: None, alpha: Some(-1.0 + i as f64 / n as f64) });
        }
    }
    out
}

/// `λ₂(𝔹; α) − d(1 + α)` on `α ∈ [−1, 0]`.
fn eval_membrane(_: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let alpha = p.alpha.unwrap_or(0.0);
    let l = membrane_lambda2(p.d, alpha)?;
    Ok(Outcome::Margin { value: l - p.d as f64 * (1.0 + alpha), extra: vec![("lambda", l)] })
}

// ---------------------------------------------------------------------------
// Trial profile

/// Shape of `ρ` on `[0, 10]`: signs of `ρ, ρ′, −ρ″, ρ − rρ′, −rρ″`,
/// monotonicity of `ρ − rρ′` and `αρ + τρ′` by grid differences, positivity
/// of `αρ + τρ′` on `[0, 1]`, the boundary identity (`1e−10` relative) and
/// the closed-form derivative of the exterior part of `N[ρ]` (negative, and
/// matching central differences to `1e−6`). Sign margins are divided by
/// `1 + scale`, with scale the grid maximum of the quantity.
fn eval_trial_profile(g: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let bp = p.ball()?;
    let t = TrialProfile::new(&bp)?;
    let n = g.r_count;
    let rs: Vec<f64> = (0..=n).map(|i| 10.0 * i as f64 / n as f64).collect();
    let mut rows = Vec::with_capacity(rs.len());
    for &r in &rs {
        rows.push([t.rho(r, 0)?, t.rho(r, 1)?, t.rho(r, 2)?, t.rho_minus_r_rho_prime(r)?]);
    }
    let mut tr = MinTracker::default();
    let scale = |k: usize| rows.iter().fold(0.0f64, |m, row| m.max(row[k].abs()));
    let (s0, s1, s2, s3) = (scale(0), scale(1), scale(2), scale(3));
    let f: Vec<f64> = rows.iter().map(|row| bp.alpha * row[0] + bp.tau * row[1]).collect();
    let sf = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, (&r, row)) in rs.iter().zip(&rows).enumerate() {
        tr.push(row[0] / (1.0 + s0), vec![("r", r), ("quantity", 0.0)]);
        tr.push(row[1] / (1.0 + s1), vec![("r", r), ("quantity", 1.0)]);
        tr.push(-row[2] / (1.0 + s2), vec![("r", r), ("quantity", 2.0)]);
        tr.push(row[3] / (1.0 + s3), vec![("r", r), ("quantity", 3.0)]);
        tr.push(-r * row[2] / (1.0 + s2 * 10.0), vec![("r", r), ("quantity", 4.0)]);
        if i > 0 {
            tr.push((row[3] - rows[i - 1][3]) / (1.0 + s3), vec![("r", r), ("quantity", 5.0)]);
            tr.push((f[i - 1] - f[i]) / (1.0 + sf), vec![("r", r), ("quantity", 6.0)]);
        }
        if r <= 1.0 {
            tr.push(f[i] / (1.0 + sf), vec![("r", r), ("quantity", 7.0)]);
        }
    }
    let (lhs, rhs) = t.v_rad_identity_sides()?;
    tr.push(1e-10 - (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300), vec![("quantity", 8.0)]);
    let tail: Vec<f64> = half_open(1.0, 10.0, n).map(|r| t.exterior_tail_derivative(r)).collect();
    let st = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (r, v) in half_open(1.0, 10.0, n).zip(&tail) {
        tr.push(-v / (1.0 + st), vec![("r", r), ("quantity", 9.0)]);
        let h = 1e-5 * r;
        let fd = (t.exterior_tail(r + h) - t.exterior_tail(r - h)) / (2.0 * h);
        tr.push(1e-6 - (fd - v).abs() / v.abs().max(1e-300), vec![("r", r), ("quantity", 10.0)]);
    }
    Ok(tr.outcome())
}

/// `(min_{(10⁻³,1]} N[ρ] − max_{[1,10]} N[ρ]) / scale`, with log-uniform
/// interior radii and uniform exterior radii.
fn eval_partial_monotonicity(g: &GridSpec, p: &GridPoint) -> Result<Outcome> {
    let bp = p.ball()?;
    let t = TrialProfile::new(&bp)?;
    let inner = log_grid(1e-3, 1.0, g.r_count);
    let outer: Vec<f64> = (0..g.r_count).map(|i| 1.0 + 9.0 * i as f64 / (g.r_count - 1) as f64).collect();
    let mut scale = 0.0f64;
    let (mut min_in, mut r_in) = (f64::INFINITY, 0.0);
    for &r in &inner {
        let v = t.n_of_rho(r)?;
        scale = scale.max(v.abs());
        if v < min_in {
            min_in = v;
            r_in = r;
        }
    }
    let (mut max_out, mut r_out) = (f64::NEG_INFINITY, 0.0);
    for &r in &outer {
        let v = t.n_of_rho(r)?;
        scale = scale.max(v.abs());
        if v > max_out {
            max_out = v;
            r_out = r;
        }
    }
    Ok(Outcome::Margin { value: (min_in - max_out) / scale.max(f64::MIN_POSITIVE), extra: vec![("r_inner", r_in), ("r_outer", r_out)] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = GridSpec::default();
        g.validate().unwrap();
        assert_eq!(g.points().len(), 5 * 13 * 7);
        let t = g.taus();
        assert!((t[0] - 1e-2).abs() < 1e-15 && (t[12] - 1e2).abs() < 1e-10);
        assert_eq!(LEMMA_IDS.len(), checks().len());
        for (id, c) in LEMMA_IDS.iter().zip(checks()) {
            assert_eq!(*id, c.id);
        }
    }

    #[test]
    fn invalid_grids() {
        let mut g = GridSpec { dims: vec![], ..GridSpec::default() };
        assert!(g.validate().is_err());
        g = GridSpec { alpha_fractions: vec![1.0], ..GridSpec::default() };
        assert!(g.validate().is_err());
        g = GridSpec { tau_count: 1, ..GridSpec::default() };
        assert!(g.validate().is_err());
        assert!(run_all(&GridSpec { dims: vec![], ..GridSpec::default() }).is_err());
        assert!(run_suite("no_such_check", &GridSpec::default()).is_err());
    }

    #[test]
    fn single_point_grid_runs() {
        let g = GridSpec::single(2, 1.0, 0.5);
        let r = run_suite("ball_lambda2_bounds", &g).unwrap();
        assert_eq!(r.grid_points, 1);
        assert!(r.pass);
    }

    #[test]
    fn cubic_and_quartic_values() {
        assert_eq!(cubic(2, 2.0), 48.0);
        let r = (quartic(3, -0.7, 1.1) - quartic_product_form(3, -0.7, 1.1)).abs() / quartic(3, -0.7, 1.1).abs();
        assert!(r < 1e-12);
        for d in 2..=8 {
            for &x in &[0.3, 1.0, d as f64] {
                assert!((quartic(d, 0.0, x) / x - cubic(d, x)).abs() < 1e-9 * cubic(d, x).abs());
                // q_α against a difference quotient in α
                let h = 1e-4;
                let fd = (quartic(d, -0.3 + h, x) - quartic(d, -0.3 - h, x)) / (2.0 * h);
                assert!((fd - quartic_alpha_derivative(d, -0.3, x)).abs() < 1e-6 * fd.abs());
            }
        }
    }

    #[test]
    fn gamma_chain_forms_agree() {
        for d in 2..=9 {
            let c = gamma_chain_constant(d);
            assert!((c - 5.0 / (6.0 * (d as f64 + 4.0))).abs() < 1e-15);
            let (a, b, alpha) = (0.7, 1.1, -0.2);
            let x = gamma_lower_bound(d, a, b, alpha);
            let y = gamma_lower_bound_closed_form(d, a, b, alpha);
            assert!((x - y).abs() < 1e-13 * y.abs());
        }
    }

    #[test]
    fn example_points() {
        // large-tension hypothesis holds at (2, 5, −0.5)
        let p = GridPoint { d: 2, tau: Some(5.0), alpha: Some(-0.5) };
        let g = GridSpec::default();
        assert!(evaluate_point("large_tension_margin", &g, &p).unwrap().unwrap() > 0.0);
        // small-tension chain at (5, 0.8, −0.4)
        let p = GridPoint { d: 5, tau: Some(0.8), alpha: Some(-0.4) };
        for id in ["small_tension_positivity", "small_tension_gamma_lower_bound", "small_tension_gamma_separation"] {
            assert!(evaluate_point(id, &g, &p).unwrap().unwrap() > 0.0, "{id}");
        }
        let p = GridPoint { d: 2, tau: None, alpha: Some(-1.0) };
        assert_eq!(evaluate_point("membrane_lower_bound", &g, &p).unwrap().unwrap(), 0.0);
    }

    #[test]
    fn spectral_parameter_skips_counted() {
        // large τ pushes a² toward d + 2, beyond d
        let g = GridSpec::single(2, 100.0, 0.01);
        assert_eq!(spectral_parameter_upper_skips(&g).unwrap(), 1);
        let g = GridSpec::single(2, 0.5, 0.2);
        assert_eq!(spectral_parameter_upper_skips(&g).unwrap(), 0);
    }
}
