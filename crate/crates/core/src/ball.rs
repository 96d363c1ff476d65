//! Robin plate eigenvalues on the unit ball.
//!
//! Separating `u = R(r) Y_ℓ(θ̂)` reduces the boundary conditions to the two
//! radial operators
//!
//! ```text
//! M R = R″                                                     at r = 1
//! V R = τR′ − (R″ + (d−1)/r R′ − F_ℓ/r² R)′ + F_ℓ (R′ − R) + αR  at r = 1
//! ```
//!
//! with `F_ℓ = ℓ(ℓ+d−2)`. Every eigenvalue `Λ` factors the interior operator
//! as `(Δ − μ₁)(Δ − μ₂)` with `μ₁ + μ₂ = τ` and `μ₁μ₂ = −Λ`; the regular
//! radial solutions for the two roots span a 2×2 boundary system whose
//! determinant vanishes exactly at eigenvalues.
//!
//! * positive branch: `μ = −a², b²`, `Λ = a²b²`, determinant [`w_det`];
//! * zero branch: `μ = 0, τ`, detected in closed form;
//! * negative branch: `μ = a², b²` real with `a² + b² = τ`, or a complex
//!   conjugate pair once `Λ < −τ²/4`; both handled by [`radial_determinant`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::{bisect, first_root_from_zero, scan_sign_changes, Bracket};
use crate::specfun::{self, p11, ultra_i_deriv, ultra_j_deriv, SeriesCoefficients, UltraIndex, Z_MAX};

/// Scan resolution for the positive-branch determinant on `(0, p₁,₁)`.
const W_SCAN_STEPS: usize = 2000;
/// Scan resolution for the negative-branch determinant in `Λ`.
const NEG_SCAN_STEPS: usize = 800;
/// Step in `a` when enumerating higher positive roots.
const POSITIVE_SCAN_STEP: f64 = 0.005;

/// Relative tolerance for treating `α` as sitting exactly on `0` or `−τ`.
const ENDPOINT_TOL: f64 = 1e-14;

/// Below `|α| = DIRECT_ALPHA_MIN·τ` the ground state is found from its
/// expansion in `α`, fitted at `α = −FIT_ALPHA·τ` and twice that.
const DIRECT_ALPHA_MIN: f64 = 1e-4;
const FIT_ALPHA: f64 = 1e-4;

/// A unit-ball problem instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallParams {
    pub d: u32,
    pub tau: f64,
    pub alpha: f64,
}

impl BallParams {
    pub fn new(d: u32, tau: f64, alpha: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Domain(format!("tension must be positive, got {tau}")));
        }
        if !alpha.is_finite() {
            return Err(Error::Domain(format!("Robin parameter must be finite, got {alpha}")));
        }
        Ok(Self { d, tau, alpha })
    }

    pub fn tau_plus_alpha(&self) -> f64 {
        self.tau + self.alpha
    }

    /// `α` within round-off of zero (free plate).
    pub fn is_free(&self) -> bool {
        self.alpha.abs() <= ENDPOINT_TOL * self.tau
    }

    /// `α` within round-off of `−τ` (the Steklov endpoint of the ball).
    pub fn is_steklov_endpoint(&self) -> bool {
        (self.alpha + self.tau).abs() <= ENDPOINT_TOL * self.tau
    }

    fn index(&self, ell: u32) -> UltraIndex {
        // d ≥ 2 is enforced by the constructor
        UltraIndex::new(self.d, ell).expect("validated dimension")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Positive,
    Zero,
    /// `Λ ∈ [−τ²/4, 0)`: real `a ≤ b` with `a² + b² = τ`.
    Negative,
    /// `Λ < −τ²/4`: `μ = (a + ib)²` and its conjugate; `Λ = −(a² + b²)²`.
    NegativeComplex,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Positive => "positive",
            Branch::Zero => "zero",
            Branch::Negative => "negative",
            Branch::NegativeComplex => "negative_complex",
        }
    }
}

/// One radial eigenmode of the ball.
///
/// For the positive branch the radial profile is `j_ℓ(ar) + γ i_ℓ(br)`,
/// for the real negative branch `i_ℓ(ar) + γ i_ℓ(br)`. For the zero branch
/// `a = 0`, `b = √τ` and `γ = 0` (profile `r^ℓ`). For the complex branch
/// `γ` mixes the two real symmetric solutions (see [`radial_determinant`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialMode {
    pub ell: u32,
    pub branch: Branch,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl RadialMode {
    /// Dimension of the degree-ℓ spherical harmonics in `ℝ^d`, i.e. the
    /// multiplicity this radial mode contributes to the full spectrum.
    pub fn multiplicity(&self, d: u32) -> u64 {
        harmonic_dimension(d, self.ell)
    }
}

pub fn harmonic_dimension(d: u32, ell: u32) -> u64 {
    fn binom(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        let k = k.min(n - k);
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }
    let (d, l) = (d as u64, ell as u64);
    if l == 0 {
        return 1;
    }
    binom(l + d - 1, d - 1) - binom(l + d - 3, d - 1)
}

/// Radial profiles the boundary operators are applied to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialProfile {
    /// `j_ℓ(ar)`
    BesselJ { a: f64 },
    /// `i_ℓ(br)`
    BesselI { b: f64 },
    /// `r^ℓ`
    Power,
    /// `r`
    Linear,
}

/// `[R, R′, R″, R‴]` at `r = radius`.
pub fn profile_jet_at(profile: RadialProfile, idx: UltraIndex, radius: f64) -> Result<[f64; 4]> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    match profile {
        RadialProfile::BesselJ { a } => {
            if !(a > 0.0) {
                return Err(Error::Domain(format!("spectral parameter a must be positive, got {a}")));
            }
            let z = a * radius;
            Ok([
                specfun::ultra_j(idx, z)?,
                a * ultra_j_deriv(idx, z, 1)?,
                a * a * ultra_j_deriv(idx, z, 2)?,
                a * a * a * ultra_j_deriv(idx, z, 3)?,
            ])
        }
        RadialProfile::BesselI { b } => {
            if !(b > 0.0) {
                return Err(Error::Domain(format!("spectral parameter b must be positive, got {b}")));
            }
            let z = b * radius;
            Ok([
                specfun::ultra_i(idx, z)?,
                b * ultra_i_deriv(idx, z, 1)?,
                b * b * ultra_i_deriv(idx, z, 2)?,
                b * b * b * ultra_i_deriv(idx, z, 3)?,
            ])
        }
        RadialProfile::Power => {
            let l = idx.ell() as f64;
            Ok([
                radius.powf(l),
                l * radius.powf(l - 1.0),
                l * (l - 1.0) * radius.powf(l - 2.0),
                l * (l - 1.0) * (l - 2.0) * radius.powf(l - 3.0),
            ])
        }
        RadialProfile::Linear => Ok([radius, 1.0, 0.0, 0.0]),
    }
}

pub fn profile_jet(profile: RadialProfile, idx: UltraIndex) -> Result<[f64; 4]> {
    profile_jet_at(profile, idx, 1.0)
}

/// `V` applied to a radial function given by its 3-jet at `r = radius`,
/// through the third-derivative form of the operator. At a general radius
/// the tangential term reads `F_ℓ/ρ² (R′ − R/ρ)`.
pub fn v_from_jet_at(jet: [f64; 4], idx: UltraIndex, tau: f64, alpha: f64, radius: f64) -> f64 {
    let [r0, r1, r2, r3] = jet;
    let dm1 = idx.d() as f64 - 1.0;
    let f = idx.angular_eigenvalue();
    let rho = radius;
    let bracket_prime = r3 + dm1 * (r2 / rho - r1 / (rho * rho)) - f * (r1 / (rho * rho) - 2.0 * r0 / rho.powi(3));
    tau * r1 - bracket_prime + f / (rho * rho) * (r1 - r0 / rho) + alpha * r0
}

pub fn v_from_jet(jet: [f64; 4], idx: UltraIndex, tau: f64, alpha: f64) -> f64 {
    v_from_jet_at(jet, idx, tau, alpha, 1.0)
}

/// `M_rad R = R″(1)`.
pub fn m_rad(profile: RadialProfile, idx: UltraIndex) -> Result<f64> {
    Ok(profile_jet(profile, idx)?[2])
}

/// `V_rad R` at `r = 1` from the generic third-derivative formula.
pub fn v_rad(profile: RadialProfile, idx: UltraIndex, tau: f64, alpha: f64) -> Result<f64> {
    Ok(v_from_jet(profile_jet(profile, idx)?, idx, tau, alpha))
}

/// `V_rad R` at `r = 1` after eliminating the third derivative with the
/// profile's own radial equation (`ΔR = −a²R` for `j`, `+b²R` for `i`,
/// `0` for harmonic powers).
pub fn v_rad_simplified(profile: RadialProfile, idx: UltraIndex, tau: f64, alpha: f64) -> Result<f64> {
    let f = idx.angular_eigenvalue();
    match profile {
        RadialProfile::BesselJ { a } => {
            let [j, aj1, _, _] = profile_jet(profile, idx)?;
            Ok((tau + a * a) * aj1 + f * (aj1 - j) + alpha * j)
        }
        RadialProfile::BesselI { b } => {
            let [i, bi1, _, _] = profile_jet(profile, idx)?;
            Ok((tau - b * b) * bi1 + f * (bi1 - i) + alpha * i)
        }
        RadialProfile::Power => {
            let l = idx.ell() as f64;
            Ok(l * tau + f * (l - 1.0) + alpha)
        }
        RadialProfile::Linear => Ok(tau + (idx.d() as f64 - 1.0 - f) + alpha),
    }
}

/// Positive-branch boundary determinant
/// `W_ℓ(a) = M j_ℓ(ar)·V i_ℓ(br) − M i_ℓ(br)·V j_ℓ(ar)` at `r = 1`,
/// with `b = √(a² + τ)`.
pub fn w_det(ell: u32, p: &BallParams, a: f64) -> Result<f64> {
    let idx = p.index(ell);
    let b = (a * a + p.tau).sqrt();
    let pj = RadialProfile::BesselJ { a };
    let pi = RadialProfile::BesselI { b };
    let mj = m_rad(pj, idx)?;
    let mi = m_rad(pi, idx)?;
    let vj = v_rad_simplified(pj, idx, p.tau, p.alpha)?;
    let vi = v_rad_simplified(pi, idx, p.tau, p.alpha)?;
    Ok(mj * vi - mi * vj)
}

/// Same determinant on the ball of radius `radius` (boundary at `r = radius`).
pub fn w_det_on_radius(ell: u32, p: &BallParams, a: f64, radius: f64) -> Result<f64> {
    let idx = p.index(ell);
    let b = (a * a + p.tau).sqrt();
    let jj = profile_jet_at(RadialProfile::BesselJ { a }, idx, radius)?;
    let ji = profile_jet_at(RadialProfile::BesselI { b }, idx, radius)?;
    let vj = v_from_jet_at(jj, idx, p.tau, p.alpha, radius);
    let vi = v_from_jet_at(ji, idx, p.tau, p.alpha, radius);
    Ok(jj[2] * vi - ji[2] * vj)
}

/// Limit of `W₁(a)/(ab)` as `a → 0⁺`:
/// `−c₀ (τ+α) Σ_{k≥1} c_k (2k+1)(2k) τ^k`.
pub fn w1_small_a_limit(p: &BallParams) -> Result<f64> {
    let idx = p.index(1);
    let coeffs = SeriesCoefficients::new(idx, 200);
    let mut sum = 0.0;
    let mut tk = 1.0;
    for k in 1..coeffs.len() {
        tk *= p.tau;
        let term = coeffs.c(k) * (2 * k + 1) as f64 * (2 * k) as f64 * tk;
        sum += term;
        if term < 1e-18 * sum {
            return Ok(-coeffs.c(0) * p.tau_plus_alpha() * sum);
        }
    }
    Err(Error::SeriesNonConvergence { z: p.tau.sqrt(), terms: coeffs.len() })
}

/// Jets at `r = 1` of the two real fundamental solutions for the spectral
/// pair `μ₁ + μ₂ = τ`, `μ₁μ₂ = −Λ`:
///
/// ```text
/// u_A = Σ c(k) (μ₁^k + μ₂^k)/2        r^{2k+ℓ}
/// u_B = Σ c(k) (μ₁^k − μ₂^k)/(μ₁−μ₂)  r^{2k+ℓ}
/// ```
///
/// Both weights obey `w_{k+1} = τ w_k + Λ w_{k−1}` and stay real for real
/// and complex-conjugate pairs alike; `u_B` degrades gracefully into
/// `∂_μ` of the solution at the double root `Λ = −τ²/4`.
fn symmetric_jets(idx: UltraIndex, tau: f64, lambda: f64) -> Result<([f64; 4], [f64; 4])> {
    let mut pk = (2.0, tau);
    let ja = specfun::weighted_jet(idx, |k| {
        let out = if k == 0 { pk.0 } else { pk.1 };
        if k >= 1 {
            let next = tau * pk.1 + lambda * pk.0;
            pk = (pk.1, next);
        }
        0.5 * out
    })?;
    let mut hk = (0.0, 1.0);
    let jb = specfun::weighted_jet(idx, |k| {
        let out = if k == 0 { hk.0 } else { hk.1 };
        if k >= 1 {
            let next = tau * hk.1 + lambda * hk.0;
            hk = (hk.1, next);
        }
        out
    })?;
    Ok((ja, jb))
}

/// Boundary determinant in the real symmetric basis, as a function of the
/// eigenvalue candidate `Λ`. Vanishes exactly when `Λ` is an eigenvalue of
/// angular order `ℓ`, on every branch.
pub fn radial_determinant(ell: u32, p: &BallParams, lambda: f64) -> Result<f64> {
    let idx = p.index(ell);
    let (ja, jb) = symmetric_jets(idx, p.tau, lambda)?;
    let va = v_from_jet(ja, idx, p.tau, p.alpha);
    let vb = v_from_jet(jb, idx, p.tau, p.alpha);
    Ok(ja[2] * vb - jb[2] * va)
}

/// Lower bound for any eigenvalue when `α < 0`, from the trace estimate
/// `∮u² ≤ d‖u‖² + 2‖u‖‖∇u‖` on the unit ball.
pub fn eigenvalue_floor(p: &BallParams) -> f64 {
    let m = p.alpha.abs();
    -m * (p.d as f64 + m / p.tau)
}

fn negative_mode(ell: u32, p: &BallParams, lambda: f64) -> Result<RadialMode> {
    let idx = p.index(ell);
    let disc = 0.25 * p.tau * p.tau + lambda;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let a = (0.5 * p.tau - root).max(0.0).sqrt();
        let b = (0.5 * p.tau + root).sqrt();
        let gamma = if a > 0.0 && b - a > 1e-8 * b {
            let ma = m_rad(RadialProfile::BesselI { b: a }, idx)?;
            let mb = m_rad(RadialProfile::BesselI { b }, idx)?;
            -ma / mb
        } else {
            let (ja, jb) = symmetric_jets(idx, p.tau, lambda)?;
            -ja[2] / jb[2]
        };
        Ok(RadialMode { ell, branch: Branch::Negative, a, b, gamma, lambda })
    } else {
        // μ = τ/2 + i ω, κ = √μ = a + ib
        let omega = (-disc).sqrt();
        let modulus = (0.25 * p.tau * p.tau + omega * omega).sqrt();
        let a = (0.5 * (modulus + 0.5 * p.tau)).sqrt();
        let b = (0.5 * (modulus - 0.5 * p.tau)).sqrt();
        let (ja, jb) = symmetric_jets(idx, p.tau, lambda)?;
        Ok(RadialMode { ell, branch: Branch::NegativeComplex, a, b, gamma: -ja[2] / jb[2], lambda })
    }
}

/// All negative eigenvalues of angular order `ℓ` (at most `limit`), ascending.
pub fn negative_eigenvalues(ell: u32, p: &BallParams, limit: usize) -> Result<Vec<RadialMode>> {
    if p.alpha >= 0.0 || p.is_free() {
        return Ok(Vec::new());
    }
    let lo = eigenvalue_floor(p) * (1.0 + 1e-9) - 1e-300;
    let hi = -1e-12 * lo.abs();
    let f = |lam: f64| radial_determinant(ell, p, lam);
    let brackets = scan_sign_changes(f, lo, hi, NEG_SCAN_STEPS, limit)?;
    brackets
        .into_iter()
        .map(|b| {
            let lam = bisect(f, b, 1e-13)?;
            negative_mode(ell, p, lam)
        })
        .collect()
}

fn zero_mode(ell: u32, p: &BallParams) -> RadialMode {
    RadialMode { ell, branch: Branch::Zero, a: 0.0, b: p.tau.sqrt(), gamma: 0.0, lambda: 0.0 }
}

fn positive_mode(ell: u32, p: &BallParams, a: f64) -> Result<RadialMode> {
    let idx = p.index(ell);
    let b = (a * a + p.tau).sqrt();
    let mj = m_rad(RadialProfile::BesselJ { a }, idx)?;
    let mi = m_rad(RadialProfile::BesselI { b }, idx)?;
    Ok(RadialMode { ell, branch: Branch::Positive, a, b, gamma: -mj / mi, lambda: a * a * b * b })
}

/// `Λ₂` of the unit ball for `α ∈ (−τ, 0]`: the `ℓ = 1` mode whose `a` is
/// the smallest root of `W₁` in `(0, p₁,₁)`.
pub fn second_eigenvalue(p: &BallParams) -> Result<RadialMode> {
    if !(p.alpha <= 0.0 && p.tau_plus_alpha() > 0.0) || p.is_steklov_endpoint() {
        return Err(Error::Precondition(format!(
            "second_eigenvalue needs α ∈ (−τ, 0]; got τ = {}, α = {}",
            p.tau, p.alpha
        )));
    }
    let p11 = p11(p.d)?;
    let a = first_root_from_zero(|a| w_det(1, p, a), p11, W_SCAN_STEPS, -1.0, 1e-12, "W₁(a)")?;
    positive_mode(1, p, a)
}

/// `Λ₂` of the ball of radius `radius`, with the boundary conditions
/// imposed at `r = radius`. Requires `α ∈ (−τ/radius, 0]`.
pub fn second_eigenvalue_on_radius(p: &BallParams, radius: f64) -> Result<RadialMode> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    if !(p.alpha <= 0.0 && p.tau + p.alpha * radius > 0.0) {
        return Err(Error::Precondition(format!(
            "need α ∈ (−τ/R, 0]; got τ = {}, α = {}, R = {radius}",
            p.tau, p.alpha
        )));
    }
    let p11 = p11(p.d)?;
    let a = first_root_from_zero(
        |a| w_det_on_radius(1, p, a, radius),
        p11 / radius,
        W_SCAN_STEPS,
        -1.0,
        1e-12,
        "W₁(a) on scaled ball",
    )?;
    let b = (a * a + p.tau).sqrt();
    let idx = p.index(1);
    let mj = profile_jet_at(RadialProfile::BesselJ { a }, idx, radius)?[2];
    let mi = profile_jet_at(RadialProfile::BesselI { b }, idx, radius)?[2];
    Ok(RadialMode { ell: 1, branch: Branch::Positive, a, b, gamma: -mj / mi, lambda: a * a * b * b })
}

/// `Λ₂(𝔹; τ, α)` as a number on the closed range `α ∈ [−τ, 0]`.
pub fn lambda2(p: &BallParams) -> Result<f64> {
    if p.is_steklov_endpoint() {
        return Ok(0.0);
    }
    Ok(second_eigenvalue(p)?.lambda)
}

/// `Λ₂` of the ball of radius `radius` and equal `(τ, α)`, through the
/// scaling law `Λ(R𝔹; τ, α) = R⁻⁴ Λ(𝔹; R²τ, R³α)`.
pub fn scaled_ball_lambda2(d: u32, radius: f64, tau: f64, alpha: f64) -> Result<f64> {
    let p = BallParams::new(d, radius * radius * tau, radius.powi(3) * alpha)?;
    Ok(lambda2(&p)? / radius.powi(4))
}

/// `Λ₁` of the unit ball for `α ∈ [−τ, 0]`; radial (`ℓ = 0`).
pub fn first_eigenvalue(p: &BallParams) -> Result<RadialMode> {
    if p.is_free() {
        return Ok(zero_mode(0, p));
    }
    if p.alpha > 0.0 || p.tau_plus_alpha() < -ENDPOINT_TOL * p.tau {
        return Err(Error::Precondition(format!(
            "first_eigenvalue needs α ∈ [−τ, 0]; got τ = {}, α = {}",
            p.tau, p.alpha
        )));
    }
    let d = p.d as f64;
    if p.alpha > -DIRECT_ALPHA_MIN * p.tau {
        // Λ₁ − αd = O(α²) sinks below the determinant's rounding here, so use
        // Λ₁ = dα + cα² + eα³ fitted through two well-conditioned roots
        let (r1, r2) = (-FIT_ALPHA * p.tau, -2.0 * FIT_ALPHA * p.tau);
        let l1 = first_eigenvalue(&BallParams::new(p.d, p.tau, r1)?)?.lambda;
        let l2 = first_eigenvalue(&BallParams::new(p.d, p.tau, r2)?)?.lambda;
        let (q1, q2) = ((l1 - d * r1) / (r1 * r1), (l2 - d * r2) / (r2 * r2));
        let e = (q2 - q1) / (r2 - r1);
        let c = q1 - e * r1;
        let a = p.alpha;
        return negative_mode(0, p, d * a + c * a * a + e * a * a * a);
    }
    // the constant trial function gives Λ₁ ≤ αd
    let lo = eigenvalue_floor(p) * (1.0 + 1e-9);
    let hi = p.alpha * d;
    let f = |lam: f64| radial_determinant(0, p, lam);
    let brackets = scan_sign_changes(f, lo, hi, NEG_SCAN_STEPS, 1)?;
    let b = brackets.first().copied().ok_or(Error::NoBracket { what: "ℓ = 0 determinant D₀(Λ)", lo, hi })?;
    let lam = bisect(f, b, 1e-13)?;
    negative_mode(0, p, lam)
}

/// Lowest `count` positive-branch modes of order `ℓ`, ascending.
pub fn positive_eigenvalues(ell: u32, p: &BallParams, count: usize) -> Result<Vec<RadialMode>> {
    let mut out = Vec::new();
    if count == 0 {
        return Ok(out);
    }
    let a_max = (Z_MAX * Z_MAX - p.tau).max(0.0).sqrt().min(Z_MAX) * 0.999;
    let mut start = POSITIVE_SCAN_STEP;
    if ell == 1 && p.alpha <= 0.0 && p.tau_plus_alpha() > 0.0 && !p.is_steklov_endpoint() {
        let m = second_eigenvalue(p)?;
        start = m.a * (1.0 + 1e-9) + 1e-12;
        out.push(m);
    }
    if out.len() < count && start < a_max {
        let steps = ((a_max - start) / POSITIVE_SCAN_STEP).ceil() as usize;
        let f = |a: f64| w_det(ell, p, a);
        let brackets: Vec<Bracket> = scan_sign_changes(f, start, a_max, steps, count - out.len())?;
        for b in brackets {
            let a = bisect(f, b, 1e-12)?;
            out.push(positive_mode(ell, p, a)?);
        }
    }
    Ok(out)
}

/// The lowest `count` radial modes over `ℓ = 0..=ℓ_max`, merged across the
/// negative, zero and positive branches and sorted by eigenvalue. Each entry
/// is one radial mode; its angular multiplicity is
/// [`RadialMode::multiplicity`].
pub fn spectrum(p: &BallParams, ell_max: u32, count: usize) -> Result<Vec<RadialMode>> {
    if ell_max < 1 || count < 1 {
        return Err(Error::Domain("spectrum needs ℓ_max ≥ 1 and count ≥ 1".into()));
    }
    let mut modes = Vec::new();
    if p.is_free() {
        modes.push(zero_mode(0, p));
    }
    if p.is_steklov_endpoint() {
        modes.push(zero_mode(1, p));
    }
    for ell in 0..=ell_max {
        modes.extend(negative_eigenvalues(ell, p, count)?);
        modes.extend(positive_eigenvalues(ell, p, count)?);
    }
    modes.sort_by(|x, y| x.lambda.total_cmp(&y.lambda).then(x.ell.cmp(&y.ell)));
    modes.truncate(count);
    Ok(modes)
}

/// Second Robin membrane eigenvalue `λ₂(𝔹; α)` of the unit ball for
/// `α ∈ [−1, 0]`: smallest `λ` with `√λ j₁′(√λ) + α j₁(√λ) = 0`.
pub fn membrane_lambda2(d: u32, alpha: f64) -> Result<f64> {
    if !(-1.0..=0.0).contains(&alpha) {
        return Err(Error::Domain(format!("membrane Robin parameter must lie in [−1, 0], got {alpha}")));
    }
    let idx = UltraIndex::new(d, 1)?;
    let p11 = p11(d)?;
    if alpha == -1.0 {
        return Ok(0.0);
    }
    if alpha == 0.0 {
        return Ok(p11 * p11);
    }
    // (z j₁′ + α j₁)/z stays positive near 0 and equals α j₁(p)/p < 0 at p₁,₁
    let h = |z: f64| Ok(ultra_j_deriv(idx, z, 1)? + alpha * specfun::ultra_j(idx, z)? / z);
    let z = first_root_from_zero(h, p11, W_SCAN_STEPS, 1.0, 1e-14, "Robin membrane condition")?;
    Ok(z * z)
}

/// `σ₂` of the biharmonic Steklov problem on the unit ball: `τ`.
pub fn steklov_sigma2_ball(d: u32, tau: f64) -> Result<f64> {
    BallParams::new(d, tau, 0.0)?;
    Ok(tau)
}

/// `σ₂` of the ball recomputed from the zero-eigenvalue determinants: for
/// each `ℓ = 1..=ℓ_max`, the `α` making `Λ = 0` an eigenvalue of order `ℓ`
/// (the determinant is affine in `α`); the smallest positive `−α` wins.
pub fn steklov_sigma2_ball_by_root(d: u32, tau: f64, ell_max: u32) -> Result<(f64, u32)> {
    let mut best: Option<(f64, u32)> = None;
    for ell in 1..=ell_max.max(1) {
        let d0 = radial_determinant(ell, &BallParams::new(d, tau, 0.0)?, 0.0)?;
        let d1 = radial_determinant(ell, &BallParams::new(d, tau, -1.0)?, 0.0)?;
        // D(α) = d0 + α (d0 − d1)·(−1) ⇒ D(α) = d0 + α (d0 − d1)
        let slope = d0 - d1;
        if slope == 0.0 {
            continue;
        }
        let alpha = -d0 / slope;
        let sigma = -alpha;
        if sigma > 0.0 && best.is_none_or(|(s, _)| sigma < s) {
            best = Some((sigma, ell));
        }
    }
    best.ok_or_else(|| Error::Internal("no Steklov root found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(d: u32, tau: f64, alpha: f64) -> BallParams {
        BallParams::new(d, tau, alpha).unwrap()
    }

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(harmonic_dimension(2, 0), 1);
        assert_eq!(harmonic_dimension(2, 3), 2);
        assert_eq!(harmonic_dimension(3, 1), 3);
        assert_eq!(harmonic_dimension(3, 2), 5);
        assert_eq!(harmonic_dimension(4, 2), 9);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(BallParams::new(1, 1.0, 0.0).is_err());
        assert!(BallParams::new(2, 0.0, 0.0).is_err());
        assert!(BallParams::new(2, 1.0, f64::NAN).is_err());
        assert!(second_eigenvalue(&params(2, 1.0, -1.5)).is_err());
        assert!(second_eigenvalue(&params(2, 1.0, 0.5)).is_err());
        assert!(membrane_lambda2(2, 0.1).is_err());
        assert!(m_rad(RadialProfile::BesselJ { a: 0.0 }, UltraIndex::new(2, 1).unwrap()).is_err());
    }

    #[test]
    fn closed_form_boundary_values() {
        let i1 = UltraIndex::new(3, 1).unwrap();
        assert_eq!(m_rad(RadialProfile::Linear, i1).unwrap(), 0.0);
        assert_eq!(v_rad(RadialProfile::Linear, i1, 2.0, -0.7).unwrap(), 2.0 - 0.7);
        assert_eq!(v_rad_simplified(RadialProfile::Linear, i1, 2.0, -0.7).unwrap(), 2.0 - 0.7);

        let i0 = UltraIndex::new(3, 0).unwrap();
        let a = 1.1;
        let mj0 = m_rad(RadialProfile::BesselJ { a }, i0).unwrap();
        assert_relative_eq!(mj0, -a * a * ultra_j_deriv(i1, a, 1).unwrap(), max_relative = 1e-13);
        let b = 2.3;
        let mi0 = m_rad(RadialProfile::BesselI { b }, i0).unwrap();
        assert_relative_eq!(mi0, b * b * ultra_i_deriv(i1, b, 1).unwrap(), max_relative = 1e-13);
        assert!(mi0 > 0.0);
    }

    #[test]
    fn expanded_forms_of_v_for_order_one() {
        for d in [2u32, 3, 5] {
            let idx = UltraIndex::new(d, 1).unwrap();
            let (tau, alpha, a) = (1.7, -0.4, 0.9);
            let b: f64 = (a * a + tau as f64).sqrt();
            let dm1 = d as f64 - 1.0;
            let j = specfun::ultra_j(idx, a).unwrap();
            let jp = ultra_j_deriv(idx, a, 1).unwrap();
            let i = specfun::ultra_i(idx, b).unwrap();
            let ip = ultra_i_deriv(idx, b, 1).unwrap();
            let vj = (b * b + dm1) * a * jp + (alpha - dm1) * j;
            let vi = (dm1 - a * a) * b * ip + (alpha - dm1) * i;
            assert_relative_eq!(v_rad(RadialProfile::BesselJ { a }, idx, tau, alpha).unwrap(), vj, max_relative = 1e-12);
            assert_relative_eq!(v_rad(RadialProfile::BesselI { b }, idx, tau, alpha).unwrap(), vi, max_relative = 1e-12);
        }
    }

    #[test]
    fn generic_and_simplified_v_agree() {
        for d in [2u32, 3, 4, 7] {
            for ell in 0..4 {
                let idx = UltraIndex::new(d, ell).unwrap();
                for &(tau, alpha) in &[(0.3, -0.1), (5.0, -2.5), (40.0, -39.0)] {
                    for &x in &[0.2, 1.0, 1.9, 3.5] {
                        for prof in [RadialProfile::BesselJ { a: x }, RadialProfile::BesselI { b: x }, RadialProfile::Power] {
                            let g = v_rad(prof, idx, tau, alpha).unwrap();
                            let s = v_rad_simplified(prof, idx, tau, alpha).unwrap();
                            let scale = profile_jet(prof, idx).unwrap().iter().fold(1.0f64, |m, v| m.max(v.abs())) * (1.0 + tau);
                            assert!((g - s).abs() <= 1e-11 * scale, "{prof:?} d={d} ℓ={ell}: {g} vs {s}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn w1_sign_structure_and_small_a_limit() {
        for &(d, tau, alpha) in &[(2u32, 1.0, -0.5), (3, 10.0, -5.0), (5, 0.3, -0.01), (8, 50.0, -49.0)] {
            let p = params(d, tau, alpha);
            let p11 = p11(d).unwrap();
            assert!(w_det(1, &p, 1e-3).unwrap() < 0.0);
            assert!(w_det(1, &p, p11).unwrap() > 0.0);
            let a = 1e-4;
            let b = (a * a + tau).sqrt();
            let ratio = w_det(1, &p, a).unwrap() / (a * b);
            assert_relative_eq!(ratio, w1_small_a_limit(&p).unwrap(), max_relative = 1e-3);
        }
    }

    #[test]
    fn w0_positive_on_lower_interval() {
        let p = params(3, 2.0, -1.2);
        let p11 = p11(3).unwrap();
        for k in 1..=100 {
            assert!(w_det(0, &p, p11 * k as f64 / 100.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn second_eigenvalue_matches_scipy_reference() {
        // reference roots computed with an independent scipy/brentq script
        let m = second_eigenvalue(&params(2, 1.0, -0.5)).unwrap();
        assert_relative_eq!(m.a, 0.998_034_003_625_792_4, max_relative = 1e-10);
        assert_relative_eq!(m.lambda, 1.988_231_047_366_479_5, max_relative = 1e-10);
        assert_relative_eq!(m.gamma, 0.234_796_252_723_996_7, max_relative = 1e-9);
        let m = second_eigenvalue(&params(3, 10.0, -5.0)).unwrap();
        assert_relative_eq!(m.lambda, 24.321_144_252_285_04, max_relative = 1e-10);
    }

    #[test]
    fn second_eigenvalue_bounds_and_gamma() {
        for d in [2u32, 3, 6] {
            for &tau in &[0.05, 1.0, 30.0] {
                for &f in &[0.01, 0.5, 0.99] {
                    let p = params(d, tau, -f * tau);
                    let m = second_eigenvalue(&p).unwrap();
                    let ta = p.tau_plus_alpha();
                    assert!(m.lambda >= d as f64 * ta - 1e-9 && m.lambda <= (d + 2) as f64 * ta + 1e-9);
                    assert!(m.gamma > 0.0 && m.gamma <= 1.0, "γ = {}", m.gamma);
                    assert!(m.a > 0.0 && m.a < p11(d).unwrap());
                }
            }
        }
    }

    #[test]
    fn second_eigenvalue_vanishes_at_steklov_endpoint() {
        let p = params(2, 1.0, -1.0 + 1e-6);
        let m = second_eigenvalue(&p).unwrap();
        assert!(m.lambda > 0.0 && m.lambda < 1e-4);
        let p = params(2, 10.0, -10.0 + 1e-6);
        let m = second_eigenvalue(&p).unwrap();
        assert!(m.lambda > 0.0 && m.lambda < 1e-4);
        assert_eq!(lambda2(&params(3, 2.0, -2.0)).unwrap(), 0.0);
    }

    #[test]
    fn radial_determinant_roots_agree_with_w() {
        // the symmetric-basis determinant vanishes at the W₁ root too
        let p = params(3, 2.0, -0.8);
        let m = second_eigenvalue(&p).unwrap();
        let h = 1e-6 * m.lambda;
        let lo = radial_determinant(1, &p, m.lambda - h).unwrap();
        let hi = radial_determinant(1, &p, m.lambda + h).unwrap();
        assert!(lo * hi < 0.0);
    }

    #[test]
    fn first_eigenvalue_properties() {
        // near the free plate
        let m = first_eigenvalue(&params(3, 1.0, -1e-6)).unwrap();
        assert_eq!(m.ell, 0);
        assert!(m.lambda < 0.0 && m.lambda.abs() < 1e-4);
        // strictly increasing in α, negative throughout [−τ, 0)
        for &tau in &[0.1, 1.0, 10.0] {
            let mut prev = f64::NEG_INFINITY;
            for k in 0..20 {
                let alpha = -tau + tau * k as f64 / 20.0;
                let m = first_eigenvalue(&params(2, tau, alpha)).unwrap();
                assert!(m.lambda < 0.0);
                assert!(m.lambda > prev, "τ={tau} α={alpha}");
                prev = m.lambda;
                assert!(m.lambda <= alpha * 2.0);
            }
        }
        assert_eq!(first_eigenvalue(&params(2, 1.0, 0.0)).unwrap().lambda, 0.0);
    }

    #[test]
    fn first_eigenvalue_branches() {
        // small τ: Λ₁ < −τ²/4, complex conjugate spectral pair
        let m = first_eigenvalue(&params(2, 1.0, -0.5)).unwrap();
        assert_eq!(m.branch, Branch::NegativeComplex);
        assert_relative_eq!(m.lambda, -(m.a * m.a + m.b * m.b).powi(2), max_relative = 1e-12);
        // large τ, small |α|: real pair
        let m = first_eigenvalue(&params(2, 50.0, -0.5)).unwrap();
        assert_eq!(m.branch, Branch::Negative);
        assert_relative_eq!(m.a * m.a + m.b * m.b, 50.0, max_relative = 1e-12);
        assert!(m.a < m.b);
        assert_relative_eq!(m.lambda, -m.a * m.a * m.b * m.b, max_relative = 1e-9);
        // real-branch root also satisfies the i₀/i₀ determinant
        let idx = UltraIndex::new(2, 0).unwrap();
        let (pa, pb) = (RadialProfile::BesselI { b: m.a }, RadialProfile::BesselI { b: m.b });
        let det = m_rad(pa, idx).unwrap() * v_rad(pb, idx, 50.0, -0.5).unwrap()
            - m_rad(pb, idx).unwrap() * v_rad(pa, idx, 50.0, -0.5).unwrap();
        let scale = m_rad(pb, idx).unwrap().abs() * v_rad(pa, idx, 50.0, -0.5).unwrap().abs();
        // V of the slow profile cancels to ~1e-4 from O(1) terms
        assert!(det.abs() < 1e-6 * scale);
    }

    #[test]
    fn spectrum_structure() {
        let s = spectrum(&params(2, 1.0, -0.5), 3, 3).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].ell, 0);
        assert!(s[0].lambda < 0.0);
        assert_eq!(s[1].ell, 1);
        assert!(s[1].lambda > 0.0);
        assert!(s.windows(2).all(|w| w[0].lambda <= w[1].lambda));

        let s = spectrum(&params(3, 2.0, 0.0), 2, 2).unwrap();
        assert_eq!(s[0].branch, Branch::Zero);
        assert_eq!(s[0].ell, 0);
        assert_eq!(s[1].ell, 1);

        let s = spectrum(&params(2, 1.0, -1.0), 3, 2).unwrap();
        assert_eq!(s[1].branch, Branch::Zero);
        assert_eq!(s[1].ell, 1);

        assert!(spectrum(&params(2, 1.0, -0.5), 0, 3).is_err());
    }

    #[test]
    fn order_one_beats_higher_orders() {
        for &(d, tau, alpha) in &[(2u32, 1.0, -0.5), (3, 10.0, -5.0), (4, 0.2, -0.1)] {
            let p = params(d, tau, alpha);
            let l2 = second_eigenvalue(&p).unwrap().lambda;
            for ell in 2..=4 {
                let first = positive_eigenvalues(ell, &p, 1).unwrap()[0].lambda;
                assert!(first > l2);
            }
            let first0 = positive_eigenvalues(0, &p, 1).unwrap()[0];
            assert!(first0.lambda > l2);
            assert!(first0.a > p11(d).unwrap());
        }
    }

    #[test]
    fn membrane_endpoints_and_bound() {
        let p = p11(3).unwrap();
        assert_relative_eq!(membrane_lambda2(3, 0.0).unwrap(), p * p, max_relative = 1e-15);
        assert_eq!(membrane_lambda2(3, -1.0).unwrap(), 0.0);
        for d in 2..=6 {
            for k in 0..=20 {
                let alpha = -(k as f64) / 20.0;
                let l = membrane_lambda2(d, alpha).unwrap();
                assert!(l >= d as f64 * (1.0 + alpha) - 1e-12);
            }
        }
    }

    #[test]
    fn steklov_ball() {
        assert_eq!(steklov_sigma2_ball(2, 5.0).unwrap(), 5.0);
        assert_eq!(steklov_sigma2_ball(3, 0.1).unwrap(), 0.1);
        for &(d, tau) in &[(2u32, 5.0), (3, 0.1), (4, 12.0)] {
            let (sigma, ell) = steklov_sigma2_ball_by_root(d, tau, 4).unwrap();
            assert_eq!(ell, 1);
            assert_relative_eq!(sigma, tau, max_relative = 1e-10);
            assert!(second_eigenvalue(&params(d, tau, -tau + 1e-4)).unwrap().lambda > 0.0);
        }
    }

    #[test]
    fn scaling_law_through_radius_determinant() {
        for &t in &[0.5, 2.0, 1.3] {
            let (d, tau, alpha) = (3u32, 2.0, -0.9);
            let direct = second_eigenvalue_on_radius(&params(d, tau, alpha), t).unwrap().lambda;
            let scaled = scaled_ball_lambda2(d, t, tau, alpha).unwrap();
            assert_relative_eq!(direct, scaled, max_relative = 1e-10);
        }
    }
}
