//! Domain-level comparisons built on the Ritz solver: the isoperimetric
//! comparison with the equal-area disk, the biharmonic Steklov eigenvalue,
//! the centre-of-mass translation and the summed trial-function identity.

use rayon::prelude::*;
use serde::Serialize;

use super::domain::Domain2D;
use super::system::{assemble, PolarRule, RitzOptions};
use crate::ball::{scaled_ball_lambda2, BallParams};
use crate::error::{Error, Result};
use crate::profile::TrialProfile;

const RANGE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsoperimetricRecord {
    pub tau: f64,
    pub alpha: f64,
    /// Radius of the disk with the same area.
    pub radius: f64,
    /// Ritz value, an upper bound for `Λ₂(Ω)`.
    pub lambda2_domain: f64,
    /// `Λ₂` of the equal-area disk, from the ball determinant.
    pub lambda2_ball: f64,
    /// `Λ₂(Ω*) − Λ₂(Ω)`; conservative because Ritz over-estimates `Λ₂(Ω)`.
    pub margin: f64,
}

/// Compare `Λ₂(Ω)` with `Λ₂` of the disk of equal area, for
/// `α ∈ [−τ/R, 0]`.
pub fn isoperimetric_check(dom: &Domain2D, tau: f64, alpha: f64, opts: &RitzOptions) -> Result<IsoperimetricRecord> {
    let radius = dom.equal_area_radius();
    let lo = -tau / radius;
    if !(alpha <= RANGE_SLACK * tau && alpha >= lo * (1.0 + RANGE_SLACK)) {
        return Err(Error::Domain(format!("α = {alpha} outside the comparison range [{lo}, 0]")));
    }
    let alpha_ball = alpha.clamp(lo, 0.0);
    let lambda2_ball = scaled_ball_lambda2(2, radius, tau, alpha_ball)?;
    let sys = assemble(dom, tau, alpha, opts)?;
    let lambda2_domain = sys.solve(2)?.eigenvalues[1];
    Ok(IsoperimetricRecord { tau, alpha, radius, lambda2_domain, lambda2_ball, margin: lambda2_ball - lambda2_domain })
}

/// `σ₂(Ω) = −α′`, where `α′` is the sign change of the Ritz `Λ₂(Ω; τ, α)`
/// on `[−1.5τ/R, 0]`, located by 40 bisection steps.
pub fn steklov_sigma2(dom: &Domain2D, tau: f64, opts: &RitzOptions) -> Result<f64> {
    let base = assemble(dom, tau, 0.0, opts)?;
    let lambda2 = |alpha: f64| -> Result<f64> { Ok(base.with_parameters(tau, alpha)?.solve(2)?.eigenvalues[1]) };
    let mut lo = -1.5 * tau / dom.equal_area_radius();
    let mut hi = 0.0;
    let (f_lo, f_hi) = (lambda2(lo)?, lambda2(hi)?);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoBracket { what: "Ritz Λ₂ as a function of α", lo, hi });
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if lambda2(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(-0.5 * (lo + hi))
}

/// One row of an α-sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Ritz `Λ₁, Λ₂` over a list of Robin parameters, sharing one assembly.
pub fn ritz_sweep(dom: &Domain2D, tau: f64, alphas: &[f64], opts: &RitzOptions) -> Result<Vec<SweepRow>> {
    let base = assemble(dom, tau, 0.0, opts)?;
    alphas
        .par_iter()
        .map(|&alpha| {
            let sol = base.with_parameters(tau, alpha)?.solve(2)?;
            Ok(SweepRow { alpha, lambda1: sol.eigenvalues[0], lambda2: sol.eigenvalues[1] })
        })
        .collect()
}

/// Profile of the equal-area disk, used at physical radius `R s`:
/// `ρ_Ω(r) = ρ(r/R)` with `ρ` built for `(R²τ, R³α)`.
pub fn equal_area_profile(dom: &Domain2D, tau: f64, alpha: f64) -> Result<TrialProfile> {
    let r = dom.equal_area_radius();
    TrialProfile::new(&BallParams::new(2, r * r * tau, r.powi(3) * alpha)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComResult {
    /// The translation point `y`.
    pub point: [f64; 2],
    /// `∫ ρ(|x−y|)(x_k−y_k)/|x−y| v dx`, `k = 1, 2`.
    pub orthogonality: [f64; 2],
    /// `∫ |ρ(|x−y|) v| dx`, the natural size of the integrals above.
    pub scale: f64,
    pub iterations: usize,
    /// `∫ v dx` for the `L²`-normalized ground state, sign fixed positive.
    pub ground_state_mean: f64,
}

struct ComObjective<'a> {
    nodes: Vec<([f64; 2], f64)>,
    profile: &'a TrialProfile,
    radius: f64,
}

impl ComObjective<'_> {
    /// `f(y) = ∫ R G(|y−x|/R) v dx`
    fn value(&self, y: [f64; 2]) -> Result<f64> {
        let parts: Result<Vec<f64>> = self
            .nodes
            .par_iter()
            .map(|(x, wv)| {
                let r = (y[0] - x[0]).hypot(y[1] - x[1]);
                Ok(wv * self.radius * self.profile.antiderivative(r / self.radius)?)
            })
            .collect();
        Ok(parts?.iter().sum())
    }

    /// Gradient, Hessian and the scale `∫|ρ v|`.
    fn derivatives(&self, y: [f64; 2]) -> Result<([f64; 2], [[f64; 2]; 2], f64)> {
        let parts: Result<Vec<[f64; 6]>> = self
            .nodes
            .par_iter()
            .map(|(x, wv)| {
                let d = [y[0] - x[0], y[1] - x[1]];
                let r = d[0].hypot(d[1]);
                let s = r / self.radius;
                let rho = self.profile.rho(s, 0)?;
                let drho = self.profile.rho(s, 1)? / self.radius;
                if r < 1e-14 {
                    return Ok([0.0, 0.0, wv * drho, 0.0, wv * drho, 0.0]);
                }
                let e = [d[0] / r, d[1] / r];
                let q = rho / r;
                Ok([
                    wv * rho * e[0],
                    wv * rho * e[1],
                    wv * (drho * e[0] * e[0] + q * (1.0 - e[0] * e[0])),
                    wv * (drho - q) * e[0] * e[1],
                    wv * (drho * e[1] * e[1] + q * (1.0 - e[1] * e[1])),
                    (wv * rho).abs(),
                ])
            })
            .collect();
        let mut acc = [0.0; 6];
        for p in parts? {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        Ok(([acc[0], acc[1]], [[acc[2], acc[3]], [acc[3], acc[4]]], acc[5]))
    }
}

/// Translation `y` making the trial functions `ρ(|x−y|)(x_k−y_k)/|x−y|`
/// orthogonal to the ground state: a critical point of
/// `f(y) = ∫ G(|y−x|) v dx`, found by damped Newton from the centroid.
pub fn com_translation(dom: &Domain2D, tau: f64, alpha: f64, opts: &RitzOptions) -> Result<ComResult> {
    let profile = equal_area_profile(dom, tau, alpha)?;
    let sys = assemble(dom, tau, alpha, opts)?;
    let sol = sys.solve(1)?;
    let coeffs = &sol.vectors[0];
    let rule = PolarRule::for_options(dom, opts)?;
    let values: Vec<f64> = rule.points.par_iter().map(|p| sys.eval(coeffs, *p)).collect();
    let mean: f64 = values.iter().zip(&rule.weights).map(|(v, w)| v * w).sum();
    let l1: f64 = values.iter().zip(&rule.weights).map(|(v, w)| v.abs() * w).sum();
    if mean.abs() <= 1e-8 * l1 {
        return Err(Error::ZeroMeanGroundState { mean });
    }
    let sign = mean.signum();
    let obj = ComObjective {
        nodes: rule.points.iter().zip(values.iter().zip(&rule.weights)).map(|(p, (v, w))| (*p, sign * v * w)).collect(),
        profile: &profile,
        radius: dom.equal_area_radius(),
    };

    let mut y = dom.centroid();
    let (mut g, mut h, scale0) = obj.derivatives(y)?;
    let tol = 1e-9 * scale0;
    let mut iterations = 0;
    let norm = |g: [f64; 2]| g[0].hypot(g[1]);
    while norm(g) > tol && iterations < 100 {
        iterations += 1;
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let newton_ok = det > 0.0 && h[0][0] > 0.0;
        let step = if newton_ok {
            [-(h[1][1] * g[0] - h[0][1] * g[1]) / det, -(h[0][0] * g[1] - h[1][0] * g[0]) / det]
        } else {
            let t = 1.0 / (h[0][0].abs() + h[1][1].abs()).max(f64::MIN_POSITIVE);
            [-t * g[0], -t * g[1]]
        };
        // near the minimum f stops resolving decreases; a Newton step that
        // shrinks the gradient is accepted outright
        let trial = [y[0] + step[0], y[1] + step[1]];
        let (gt, ht, _) = obj.derivatives(trial)?;
        if newton_ok && norm(gt) < norm(g) {
            y = trial;
            g = gt;
            h = ht;
            continue;
        }
        let f0 = obj.value(y)?;
        let slope = g[0] * step[0] + g[1] * step[1];
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = [y[0] + t * step[0], y[1] + t * step[1]];
            if obj.value(cand)? <= f0 + 1e-4 * t * slope {
                y = cand;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
        (g, h, _) = obj.derivatives(y)?;
    }
    let (g, _, scale) = obj.derivatives(y)?;
    Ok(ComResult { point: y, orthogonality: [-g[0], -g[1]], scale, iterations, ground_state_mean: sign * mean })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeinbergerRecord {
    /// `Σ_k (∫|D²u_k|² + τ|∇u_k|² + α∮u_k²)` from Cartesian derivatives.
    pub trial_sum: f64,
    /// `∫ N[ρ] dx`
    pub integral_n: f64,
    /// `α∮ρ²(1 − e_r·n) dS`: zero on a disk centred at `y` or when `α = 0`,
    /// nonpositive otherwise, so `trial_sum ≤ ∫N[ρ]`.
    pub boundary_gap: f64,
    /// `|trial_sum − (∫N + gap)| / max(|trial_sum|, |∫N|)`
    pub residual: f64,
}

/// Sum of the Rayleigh numerators of `u_k = ρ(r)(x_k−y_k)/r` against
/// `∫_Ω N[ρ]`, by independent quadratures. The profile is used at the
/// domain's scale, `ρ_Ω(r) = ρ(r/R)`, with `(τ, α) = (τ_ρ/R², α_ρ/R³)`.
pub fn weinberger_sum_identity(dom: &Domain2D, t: &TrialProfile, y: [f64; 2], opts: &RitzOptions) -> Result<WeinbergerRecord> {
    if t.params().d != 2 {
        return Err(Error::Domain("planar domains need a two-dimensional profile".into()));
    }
    let big_r = dom.equal_area_radius();
    let tau = t.params().tau / (big_r * big_r);
    let alpha = t.params().alpha / big_r.powi(3);
    let rule = PolarRule::for_options(dom, opts)?;

    let per_node: Result<Vec<[f64; 2]>> = rule
        .points
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(x, w)| {
            let d = [x[0] - y[0], x[1] - y[1]];
            let r = d[0].hypot(d[1]);
            let s = r / big_r;
            let n_val = t.n_of_rho(s.max(1e-300))? / big_r.powi(4);
            let rho = t.rho(s, 0)?;
            let rho1 = t.rho(s, 1)? / big_r;
            let rho2 = t.rho(s, 2)? / (big_r * big_r);
            if r < 1e-14 {
                return Ok([w * 2.0 * tau * rho1 * rho1, w * n_val]);
            }
            let e = [d[0] / r, d[1] / r];
            let c = -t.rho_minus_r_rho_prime(s)? / (r * r);
            let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
            let mut hess_sq = 0.0;
            let mut grad_sq = 0.0;
            for k in 0..2 {
                for i in 0..2 {
                    let g = rho1 * e[i] * e[k] + rho / r * (delta(i, k) - e[i] * e[k]);
                    grad_sq += g * g;
                    for j in 0..2 {
                        let sym = delta(i, j) * e[k] + delta(i, k) * e[j] + delta(j, k) * e[i];
                        let h = rho2 * e[i] * e[j] * e[k] + c * (sym - 3.0 * e[i] * e[j] * e[k]);
                        hess_sq += h * h;
                    }
                }
            }
            Ok([w * (hess_sq + tau * grad_sq), w * n_val])
        })
        .collect();
    let (mut volume, mut integral_n) = (0.0, 0.0);
    for [a, b] in per_node? {
        volume += a;
        integral_n += b;
    }

    let mut surface = 0.0;
    let mut gap = 0.0;
    for ((p, n), w) in rule.boundary_points.iter().zip(&rule.boundary_normals).zip(&rule.boundary_weights) {
        let d = [p[0] - y[0], p[1] - y[1]];
        let r = d[0].hypot(d[1]);
        let rho = t.rho(r / big_r, 0)?;
        let en = (d[0] * n[0] + d[1] * n[1]) / r;
        surface += w * rho * rho;
        gap += w * rho * rho * (1.0 - en);
    }
    let trial_sum = volume + alpha * surface;
    let boundary_gap = alpha * gap;
    let residual = (trial_sum - (integral_n + boundary_gap)).abs() / trial_sum.abs().max(integral_n.abs());
    Ok(WeinbergerRecord { trial_sum, integral_n, boundary_gap, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_isoperimetric_equality() {
        let dom = Domain2D::disk(1.0).unwrap();
        let rec = isoperimetric_check(&dom, 1.0, -0.5, &RitzOptions::with_degree(10)).unwrap();
        assert!(rec.margin.abs() < 1e-4 * rec.lambda2_ball);
        assert!(isoperimetric_check(&dom, 1.0, -1.5, &RitzOptions::with_degree(4)).is_err());
        assert!(isoperimetric_check(&dom, 1.0, 0.1, &RitzOptions::with_degree(4)).is_err());
    }

    #[test]
    fn disk_com_is_origin() {
        let dom = Domain2D::disk(1.0).unwrap();
        let c = com_translation(&dom, 1.0, -0.5, &RitzOptions::with_degree(8)).unwrap();
        assert!(c.point[0].hypot(c.point[1]) < 1e-8);
    }

    #[test]
    fn weinberger_on_disk_has_no_gap() {
        let dom = Domain2D::disk(1.0).unwrap();
        let t = TrialProfile::new(&BallParams::new(2, 1.0, -0.5).unwrap()).unwrap();
        let w = weinberger_sum_identity(&dom, &t, [0.0, 0.0], &RitzOptions::with_degree(10)).unwrap();
        assert!(w.residual < 1e-6, "{w:?}");
        assert!(w.boundary_gap.abs() < 1e-12);
    }
}
