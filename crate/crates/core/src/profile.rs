//! The Weinberger-style trial profile built from the ball's `Λ₂` mode.
//!
//! `ρ(r) = j₁(ar) + γ i₁(br)` on `[0, 1]`, continued linearly with slope
//! `ρ′(1)` beyond. Since `ρ″(1) = 0` by the choice of `γ`, the extension is
//! `C²` in practice, and `C¹` by construction.

use serde::Serialize;

use crate::ball::{second_eigenvalue, BallParams, Branch, RadialMode};
use crate::error::{Error, Result};
use crate::specfun::{ultra_i, ultra_i_deriv, ultra_j, ultra_j_deriv, CompensatedSum, SeriesCoefficients, UltraIndex};

#[derive(Clone, Debug)]
pub struct TrialProfile {
    params: BallParams,
    mode: RadialMode,
    idx: UltraIndex,
    coeffs: SeriesCoefficients,
    value_at_one: f64,
    slope_at_one: f64,
}

/// `N[ρ]` at one radius together with its three groups,
/// `N = N₁ + (d−1)N₂ + N₃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NParts {
    pub n: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
}

/// One row of the profile dump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub rho: f64,
    #[serde(rename = "rho'")]
    pub rho1: f64,
    #[serde(rename = "rho''")]
    pub rho2: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "N1")]
    pub n1: f64,
    #[serde(rename = "N2")]
    pub n2: f64,
    #[serde(rename = "N3")]
    pub n3: f64,
}

impl TrialProfile {
    /// Profile from the `Λ₂` mode of `p`; needs `α ∈ (−τ, 0]`.
    pub fn new(p: &BallParams) -> Result<Self> {
        let mode = second_eigenvalue(p)?;
        Self::from_mode(p, mode)
    }

    pub fn from_mode(p: &BallParams, mode: RadialMode) -> Result<Self> {
        if mode.ell != 1 || mode.branch != Branch::Positive {
            return Err(Error::Precondition("trial profile needs the ℓ = 1 positive-branch mode".into()));
        }
        let idx = UltraIndex::new(p.d, 1)?;
        let (a, b, g) = (mode.a, mode.b, mode.gamma);
        let value_at_one = ultra_j(idx, a)? + g * ultra_i(idx, b)?;
        let slope_at_one = a * ultra_j_deriv(idx, a, 1)? + g * b * ultra_i_deriv(idx, b, 1)?;
        Ok(Self { params: *p, mode, idx, coeffs: SeriesCoefficients::new(idx, 200), value_at_one, slope_at_one })
    }

    pub fn params(&self) -> &BallParams {
        &self.params
    }

    pub fn mode(&self) -> &RadialMode {
        &self.mode
    }

    /// `R(1)`
    pub fn value_at_one(&self) -> f64 {
        self.value_at_one
    }

    /// `R′(1)`, the slope of the linear continuation.
    pub fn slope_at_one(&self) -> f64 {
        self.slope_at_one
    }

    /// `ρ^{(order)}(r)` for `order ∈ 0..=4`.
    pub fn rho(&self, r: f64, order: u32) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("radius must be finite and nonnegative, got {r}")));
        }
        if order > 4 {
            return Err(Error::Domain(format!("derivative order must be at most 4, got {order}")));
        }
        if r > 1.0 {
            return Ok(match order {
                0 => self.slope_at_one * (r - 1.0) + self.value_at_one,
                1 => self.slope_at_one,
                _ => 0.0,
            });
        }
        let RadialMode { a, b, gamma, .. } = self.mode;
        let k = order as i32;
        Ok(a.powi(k) * ultra_j_deriv(self.idx, a * r, order)? + gamma * b.powi(k) * ultra_i_deriv(self.idx, b * r, order)?)
    }

    /// Inner series `Σ c_k ((−1)^k a^{2k+1} + γ b^{2k+1}) f(k) r^{2k+1+shift}`.
    fn inner_series(&self, r: f64, shift: i32, f: impl Fn(usize) -> f64) -> Result<f64> {
        let RadialMode { a, b, gamma, .. } = self.mode;
        let mut sum = CompensatedSum::default();
        let (a2, b2, r2) = (a * a, b * b, r * r);
        let mut pa = a * r.powi(1 + shift);
        let mut pb = b * r.powi(1 + shift);
        let mut peak = 0.0f64;
        let mut quiet = 0;
        for k in 0..self.coeffs.len() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term = self.coeffs.c(k) * (sign * pa + gamma * pb) * f(k);
            sum.add(term);
            peak = peak.max(term.abs());
            if term.abs() <= 1e-18 * peak {
                quiet += 1;
                if quiet >= 3 && k > 4 {
                    return Ok(sum.value());
                }
            } else {
                quiet = 0;
            }
            pa *= a2 * r2;
            pb *= b2 * r2;
        }
        Err(Error::SeriesNonConvergence { z: b * r, terms: self.coeffs.len() })
    }

    /// `ρ − rρ′`, summed without cancellation: on `[0, 1]` it equals
    /// `−Σ 2k c_k(…) r^{2k+1}`, which is `O(r³)` at the origin.
    pub fn rho_minus_r_rho_prime(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
        }
        if r > 1.0 {
            return Ok(self.value_at_one - self.slope_at_one);
        }
        self.inner_series(r, 0, |k| -2.0 * k as f64)
    }

    /// `G(r) = ∫₀^r ρ`.
    pub fn antiderivative(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
        }
        let inner = self.inner_series(r.min(1.0), 1, |k| 1.0 / (2 * k + 2) as f64)?;
        if r <= 1.0 {
            return Ok(inner);
        }
        let s = r - 1.0;
        Ok(inner + self.value_at_one * s + 0.5 * self.slope_at_one * s * s)
    }

    /// The two sides of `αρ(1) + τρ′(1) = a³j₂(a) + γ b³ i₂(b)`.
    pub fn v_rad_identity_sides(&self) -> Result<(f64, f64)> {
        let RadialMode { a, b, gamma, .. } = self.mode;
        let idx2 = self.idx.with_ell(2);
        let lhs = self.params.alpha * self.value_at_one + self.params.tau * self.slope_at_one;
        let rhs = a.powi(3) * ultra_j(idx2, a)? + gamma * b.powi(3) * ultra_i(idx2, b)?;
        Ok((lhs, rhs))
    }

    /// `(αρ(1) + τρ′(1)) − (a³j₂(a) + γ b³ i₂(b))`.
    pub fn v_rad_identity_residual(&self) -> Result<f64> {
        let (lhs, rhs) = self.v_rad_identity_sides()?;
        Ok(lhs - rhs)
    }

    /// `N[ρ](r)` and its groups `N₁ = ρ″²`,
    /// `N₂ = 3(ρ−rρ′)²/r⁴ + τρ²/r² + αρ²/r`, `N₃ = τρ′² + 2αρρ′`.
    /// The total is evaluated from its own formula, not from the groups.
    pub fn n_parts(&self, r: f64) -> Result<NParts> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("N[ρ] needs r > 0, got {r}")));
        }
        let (tau, alpha) = (self.params.tau, self.params.alpha);
        let dm1 = self.params.d as f64 - 1.0;
        let rho = self.rho(r, 0)?;
        let rho1 = self.rho(r, 1)?;
        let rho2 = self.rho(r, 2)?;
        let m = self.rho_minus_r_rho_prime(r)?;
        let r2 = r * r;
        let n1 = rho2 * rho2;
        let n2 = 3.0 * m * m / (r2 * r2) + tau * rho * rho / r2 + alpha * rho * rho / r;
        let n3 = tau * rho1 * rho1 + 2.0 * alpha * rho * rho1;
        let n = rho2 * rho2
            + 3.0 * dm1 / (r2 * r2) * m * m
            + tau * (rho1 * rho1 + dm1 / r2 * rho * rho)
            + alpha * (2.0 * rho * rho1 + dm1 / r * rho * rho);
        Ok(NParts { n, n1, n2, n3 })
    }

    pub fn n_of_rho(&self, r: f64) -> Result<f64> {
        Ok(self.n_parts(r)?.n)
    }

    /// `(τ+α−3a²/(d+2)) j₁(ar) + γ(τ+α+3b²/(d+2)) i₁(br)` for `r ∈ (0, 1]`.
    pub fn nice_lhs(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!("expected r in (0, 1], got {r}")));
        }
        let RadialMode { a, b, gamma, .. } = self.mode;
        let ta = self.params.tau_plus_alpha();
        let dp2 = self.params.d as f64 + 2.0;
        Ok((ta - 3.0 * a * a / dp2) * ultra_j(self.idx, a * r)? + gamma * (ta + 3.0 * b * b / dp2) * ultra_i(self.idx, b * r)?)
    }

    /// `6(ρ−rρ′)/r² + 3ρ″ + (τ+α)ρ` on `(0, 1]`, from the profile itself.
    pub fn n2_lower(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!("expected r in (0, 1], got {r}")));
        }
        Ok(6.0 * self.rho_minus_r_rho_prime(r)? / (r * r) + 3.0 * self.rho(r, 2)? + self.params.tau_plus_alpha() * self.rho(r, 0)?)
    }

    /// The same quantity rewritten in order-1 and order-3 Bessel functions:
    /// `nice_lhs + 3(d+1)/(d+2)·(a² j₃(ar) + γ b² i₃(br))`.
    pub fn n2_lower_bessel_form(&self, r: f64) -> Result<f64> {
        let RadialMode { a, b, gamma, .. } = self.mode;
        let d = self.params.d as f64;
        let idx3 = self.idx.with_ell(3);
        let tail = a * a * ultra_j(idx3, a * r)? + gamma * b * b * ultra_i(idx3, b * r)?;
        Ok(self.nice_lhs(r)? + 3.0 * (d + 1.0) / (d + 2.0) * tail)
    }

    /// `(d−1)N₂ + N₃` for `r ≥ 1` in terms of `ρ = Ar + B`.
    pub fn exterior_tail(&self, r: f64) -> f64 {
        let (tau, alpha) = (self.params.tau, self.params.alpha);
        let d = self.params.d as f64;
        let (a, b) = (self.slope_at_one, self.value_at_one - self.slope_at_one);
        3.0 * (d - 1.0) * b * b / r.powi(4)
            + tau * (d - 1.0) * b * b / (r * r)
            + (d - 1.0) / r * (alpha * b * b + 2.0 * a * b * tau)
            + d * (tau * a * a + 2.0 * alpha * a * b)
            + (d + 1.0) * a * a * alpha * r
    }

    /// Closed-form `r`-derivative of [`exterior_tail`](Self::exterior_tail).
    pub fn exterior_tail_derivative(&self, r: f64) -> f64 {
        let (tau, alpha) = (self.params.tau, self.params.alpha);
        let d = self.params.d as f64;
        let (a, b) = (self.slope_at_one, self.value_at_one - self.slope_at_one);
        -12.0 * (d - 1.0) * b * b / r.powi(5) - 2.0 * tau * (d - 1.0) * b * b / r.powi(3)
            - (d - 1.0) / (r * r) * (alpha * b * b + 2.0 * a * b * tau)
            + (d + 1.0) * a * a * alpha
    }

    pub fn row(&self, r: f64) -> Result<ProfileRow> {
        let parts = self.n_parts(r)?;
        Ok(ProfileRow {
            r,
            rho: self.rho(r, 0)?,
            rho1: self.rho(r, 1)?,
            rho2: self.rho(r, 2)?,
            n: parts.n,
            n1: parts.n1,
            n2: parts.n2,
            n3: parts.n3,
        })
    }

    /// Rows on `points` equally spaced radii of `(0, r_max]`.
    pub fn table(&self, r_max: f64, points: usize) -> Result<Vec<ProfileRow>> {
        if points < 2 || !(r_max > 0.0) {
            return Err(Error::Domain("profile table needs r_max > 0 and at least 2 points".into()));
        }
        (1..=points).map(|i| self.row(r_max * i as f64 / points as f64)).collect()
    }
}
