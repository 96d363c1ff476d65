//! Ultraspherical Bessel functions of the first kind.
//!
//! In dimension `d` with `s = (d − 2)/2`,
//!
//! ```text
//! j_ℓ(z) = z^{−s} J_{s+ℓ}(z) = Σ_k (−1)^k c(k) z^{2k+ℓ}
//! i_ℓ(z) = z^{−s} I_{s+ℓ}(z) = Σ_k        c(k) z^{2k+ℓ}
//! c(k)   = 2^{1−d/2−2k−ℓ} / (k! Γ(k + d/2 + ℓ))
//! ```
//!
//! Everything here is evaluated from the power series with compensated
//! summation. Arguments are limited to `[0, Z_MAX]`; for the problems this
//! crate solves every argument stays well inside that window.

use crate::error::{Error, Result};
use crate::roots::{bisect, scan_sign_changes};

/// Largest supported argument. At `z = 30` the alternating series loses
/// roughly six digits to cancellation.
pub const Z_MAX: f64 = 30.0;

/// Highest derivative order available from [`ultra_j_deriv`] / [`ultra_i_deriv`].
pub const MAX_ORDER: u32 = 4;

const MAX_TERMS: usize = 200;
const TRUNCATION: f64 = 1e-17;

/// Dimension and angular order of an ultraspherical Bessel function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UltraIndex {
    d: u32,
    ell: u32,
    s: f64,
}

impl UltraIndex {
    pub fn new(d: u32, ell: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
        }
        Ok(Self { d, ell, s: (d as f64 - 2.0) / 2.0 })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// `s = (d − 2)/2`, the shift between ultraspherical and cylindrical order.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Eigenvalue `ℓ(ℓ + d − 2)` of the spherical Laplacian on degree-ℓ harmonics.
    pub fn angular_eigenvalue(&self) -> f64 {
        let l = self.ell as f64;
        l * (l + self.d as f64 - 2.0)
    }

    /// Same dimension, different angular order.
    pub fn with_ell(&self, ell: u32) -> Self {
        Self { ell, ..*self }
    }

    fn half_d_plus_ell(&self) -> f64 {
        self.d as f64 / 2.0 + self.ell as f64
    }
}

/// Power-series coefficients of `j_ℓ` / `i_ℓ`.
///
/// `c(0)` comes from a single Gamma evaluation; all later coefficients are
/// produced by the ratio `c(k+1)/c(k) = 1 / (4 (k+1)(k + d/2 + ℓ))`.
#[derive(Clone, Debug)]
pub struct SeriesCoefficients {
    idx: UltraIndex,
    c: Vec<f64>,
}

impl SeriesCoefficients {
    pub fn new(idx: UltraIndex, terms: usize) -> Self {
        let mut c = Vec::with_capacity(terms);
        let mut ck = Self::leading(idx);
        for k in 0..terms {
            c.push(ck);
            ck *= Self::ratio(idx, k);
        }
        Self { idx, c }
    }

    pub fn index(&self) -> UltraIndex {
        self.idx
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Unsigned coefficient of `z^{2k+ℓ}`.
    pub fn c(&self, k: usize) -> f64 {
        self.c[k]
    }

    pub fn leading(idx: UltraIndex) -> f64 {
        (1.0 - idx.half_d_plus_ell()).exp2() / gamma(idx.half_d_plus_ell())
    }

    pub fn ratio(idx: UltraIndex, k: usize) -> f64 {
        let k = k as f64;
        1.0 / (4.0 * (k + 1.0) * (k + idx.half_d_plus_ell()))
    }

    /// Coefficient of `z^{2k−1}` in `i₁″` (for `k ≥ 1`), in closed form:
    /// `(2k+1) 2^{1−2k−d/2} / ((k−1)! Γ(k+1+d/2))`.
    pub fn i1_second_derivative_coefficient(d: u32, k: usize) -> f64 {
        assert!(k >= 1, "i1'' has no z^-1 term");
        let kf = k as f64;
        let half_d = d as f64 / 2.0;
        (2.0 * kf + 1.0) * (1.0 - 2.0 * kf - half_d).exp2() / (gamma(kf) * gamma(kf + 1.0 + half_d))
    }
}

/// Lanczos approximation of Γ(x) (g = 7, nine coefficients), with the
/// reflection formula below 1/2.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = COEF[0];
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `n (n−1) ⋯ (n−m+1)`; zero when `n < m`.
pub(crate) fn falling(n: u32, m: u32) -> f64 {
    if n < m {
        return 0.0;
    }
    (0..m).map(|i| (n - i) as f64).product()
}

fn check_argument(z: f64) -> Result<()> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain(format!("argument must be nonnegative, got {z}")));
    }
    if z > Z_MAX {
        return Err(Error::OutOfRange { value: z, lo: 0.0, hi: Z_MAX });
    }
    Ok(())
}

fn eval_series(idx: UltraIndex, z: f64, order: u32, alternating: bool) -> Result<f64> {
    check_argument(z)?;
    if order > MAX_ORDER {
        return Err(Error::Domain(format!("derivative order must be in 0..={MAX_ORDER}, got {order}")));
    }
    let ell = idx.ell;
    let sign = |k: usize| if alternating && k % 2 == 1 { -1.0 } else { 1.0 };

    // first k whose power 2k+ℓ survives `order` differentiations
    let k0 = if order > ell { (order - ell).div_ceil(2) as usize } else { 0 };
    let mut ck = SeriesCoefficients::leading(idx);
    for k in 0..k0 {
        ck *= SeriesCoefficients::ratio(idx, k);
    }

    if z == 0.0 {
        // only the z^0 term of the differentiated series survives
        if order < ell || (order - ell) % 2 == 1 {
            return Ok(0.0);
        }
        let k = ((order - ell) / 2) as usize;
        return Ok(sign(k) * ck * falling(order, order));
    }

    let z2 = z * z;
    let mut u = ck * z.powi((2 * k0 as i32) + ell as i32 - order as i32);
    let mut sum = CompensatedSum::default();
    for k in k0..MAX_TERMS {
        let p = 2 * k as u32 + ell;
        let term = sign(k) * falling(p, order) * u;
        sum.add(term);
        let ratio = SeriesCoefficients::ratio(idx, k) * z2;
        let past_peak = ratio < 1.0;
        if k >= ell as usize + 5 && past_peak && (term == 0.0 || term.abs() < TRUNCATION * sum.value().abs()) {
            return Ok(sum.value());
        }
        u *= ratio;
    }
    Err(Error::SeriesNonConvergence { z, terms: MAX_TERMS })
}

pub fn ultra_j(idx: UltraIndex, z: f64) -> Result<f64> {
    eval_series(idx, z, 0, true)
}

/// `d^order/dz^order j_ℓ(z)` by term-wise differentiation.
pub fn ultra_j_deriv(idx: UltraIndex, z: f64, order: u32) -> Result<f64> {
    eval_series(idx, z, order, true)
}

pub fn ultra_i(idx: UltraIndex, z: f64) -> Result<f64> {
    eval_series(idx, z, 0, false)
}

pub fn ultra_i_deriv(idx: UltraIndex, z: f64, order: u32) -> Result<f64> {
    eval_series(idx, z, order, false)
}

/// Values and first three derivatives at `r = 1` of the radial series
/// `Σ_k c(k) w_k r^{2k+ℓ}` for a caller-supplied weight sequence `w_k`.
///
/// With `w_k = (−a²)^k a^ℓ` this reproduces `j_ℓ(ar)`; the ball module uses
/// symmetric-function weights to build real fundamental systems for
/// complex-conjugate spectral parameters.
pub(crate) fn weighted_jet<W>(idx: UltraIndex, mut weight: W) -> Result<[f64; 4]>
where
    W: FnMut(usize) -> f64,
{
    let ell = idx.ell;
    let mut sums = [CompensatedSum::default(); 4];
    let mut ck = SeriesCoefficients::leading(idx);
    let mut peak = 0.0f64;
    let mut quiet = 0;
    for k in 0..MAX_TERMS {
        let p = 2 * k as u32 + ell;
        let base = ck * weight(k);
        let mut biggest = 0.0f64;
        for (m, s) in sums.iter_mut().enumerate() {
            let t = falling(p, m as u32) * base;
            s.add(t);
            biggest = biggest.max(t.abs());
        }
        if !biggest.is_finite() {
            return Err(Error::SeriesNonConvergence { z: 1.0, terms: k });
        }
        peak = peak.max(biggest);
        if biggest <= 1e-20 * peak {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sums.map(|s| s.value()));
            }
        } else {
            quiet = 0;
        }
        ck *= SeriesCoefficients::ratio(idx, k);
    }
    Err(Error::SeriesNonConvergence { z: 1.0, terms: MAX_TERMS })
}

/// First positive zero `p_{ℓ,1}` of `j_ℓ′` for `ℓ ≥ 1`.
///
/// Bracket scan with step 0.05 on `(0, √(ℓ(d+2ℓ)) + 1)` followed by
/// bisection to `1e−13` relative.
pub fn first_derivative_zero(idx: UltraIndex) -> Result<f64> {
    if idx.ell == 0 {
        return Err(Error::Domain("first derivative zero is defined here for ℓ ≥ 1".into()));
    }
    let l = idx.ell as f64;
    let upper = (l * (idx.d as f64 + 2.0 * l)).sqrt() + 1.0;
    let step = 0.05;
    let steps = (upper / step).ceil() as usize;
    let lo = 1e-3;
    let f = |z: f64| ultra_j_deriv(idx, z, 1);
    let brackets = scan_sign_changes(f, lo, lo + step * steps as f64, steps, 1)?;
    let b = brackets
        .first()
        .ok_or_else(|| Error::Internal(format!("no sign change of j_{}' found for d = {}", idx.ell, idx.d)))?;
    bisect(f, *b, 1e-13)
}

/// `p_{1,1}(d)`: first positive zero of `j₁′`; `p_{1,1}²` is the second
/// Neumann eigenvalue of the unit ball.
pub fn p11(d: u32) -> Result<f64> {
    first_derivative_zero(UltraIndex::new(d, 1)?)
}
