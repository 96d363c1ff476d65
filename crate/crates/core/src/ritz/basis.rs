//! Products of normalized Legendre polynomials on the domain's bounding box,
//! restricted to total degree `≤ N`.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 20;

/// Values and the first two derivatives of `√((2n+1)/2) P_n(t)` for
/// `n = 0..=N`, by the three-term recurrences (stable up to `t = ±1`).
pub(crate) fn legendre_jet(t: f64, n_max: usize, out: &mut [[f64; 3]]) {
    let mut p = vec![[0.0f64; 3]; n_max + 1];
    p[0] = [1.0, 0.0, 0.0];
    if n_max >= 1 {
        p[1] = [t, 1.0, 0.0];
    }
    for n in 1..n_max {
        let nf = n as f64;
        let v = ((2.0 * nf + 1.0) * t * p[n][0] - nf * p[n - 1][0]) / (nf + 1.0);
        let d1 = p[n - 1][1] + (2.0 * nf + 1.0) * p[n][0];
        let d2 = p[n - 1][2] + (2.0 * nf + 1.0) * p[n][1];
        p[n + 1] = [v, d1, d2];
    }
    for (n, (o, q)) in out.iter_mut().zip(&p).enumerate() {
        let s = ((2 * n + 1) as f64 / 2.0).sqrt();
        *o = [s * q[0], s * q[1], s * q[2]];
    }
}

/// The polynomial trial space.
#[derive(Clone, Debug)]
pub struct LegendreBasis {
    degree: usize,
    /// `(i, j)` degree pairs with `i + j ≤ N`, graded by total degree.
    pairs: Vec<(usize, usize)>,
    center: [f64; 2],
    half_width: [f64; 2],
}

/// Basis functions and derivatives at one point, in physical coordinates.
/// Hessian entries are stored as `[xx, xy, yy]`.
#[derive(Clone, Debug, Default)]
pub struct BasisPoint {
    pub value: Vec<f64>,
    pub grad: [Vec<f64>; 2],
    pub hess: [Vec<f64>; 3],
}

impl LegendreBasis {
    pub fn new(degree: usize, bbox: [f64; 4]) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::Domain(format!("basis degree is capped at {MAX_DEGREE}, got {degree}")));
        }
        let mut pairs = Vec::new();
        for total in 0..=degree {
            for i in (0..=total).rev() {
                pairs.push((i, total - i));
            }
        }
        let center = [0.5 * (bbox[0] + bbox[1]), 0.5 * (bbox[2] + bbox[3])];
        let half_width = [0.5 * (bbox[1] - bbox[0]), 0.5 * (bbox[3] - bbox[2])];
        Ok(Self { degree, pairs, center, half_width })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(N+1)(N+2)/2`
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn eval(&self, x: f64, y: f64) -> BasisPoint {
        let n = self.degree;
        let (hx, hy) = (self.half_width[0], self.half_width[1]);
        let mut px = vec![[0.0; 3]; n + 1];
        let mut py = vec![[0.0; 3]; n + 1];
        legendre_jet((x - self.center[0]) / hx, n, &mut px);
        legendre_jet((y - self.center[1]) / hy, n, &mut py);
        let m = self.len();
        let mut bp = BasisPoint {
            value: Vec::with_capacity(m),
            grad: [Vec::with_capacity(m), Vec::with_capacity(m)],
            hess: [Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m)],
        };
        for &(i, j) in &self.pairs {
            let (a, b) = (px[i], py[j]);
            bp.value.push(a[0] * b[0]);
            bp.grad[0].push(a[1] * b[0] / hx);
            bp.grad[1].push(a[0] * b[1] / hy);
            bp.hess[0].push(a[2] * b[0] / (hx * hx));
            bp.hess[1].push(a[1] * b[1] / (hx * hy));
            bp.hess[2].push(a[0] * b[2] / (hy * hy));
        }
        bp
    }

    /// `Σ c_i φ_i` at a point.
    pub fn combine(&self, coeffs: &[f64], x: f64, y: f64) -> f64 {
        self.eval(x, y).value.iter().zip(coeffs).map(|(p, c)| p * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_values_and_derivatives() {
        let mut out = vec![[0.0; 3]; 5];
        for &t in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
            legendre_jet(t, 4, &mut out);
            let s = |n: usize| ((2 * n + 1) as f64 / 2.0).sqrt();
            let p3 = 0.5 * (5.0 * t * t * t - 3.0 * t);
            let dp3 = 0.5 * (15.0 * t * t - 3.0);
            let ddp3 = 15.0 * t;
            assert!((out[3][0] - s(3) * p3).abs() < 1e-14);
            assert!((out[3][1] - s(3) * dp3).abs() < 1e-13);
            assert!((out[3][2] - s(3) * ddp3).abs() < 1e-13);
            assert!((out[2][0] - s(2) * 0.5 * (3.0 * t * t - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn basis_size_and_derivatives() {
        let b = LegendreBasis::new(6, [-1.0, 2.0, -0.5, 0.5]).unwrap();
        assert_eq!(b.len(), 28);
        assert!(LegendreBasis::new(21, [-1.0, 1.0, -1.0, 1.0]).is_err());
        let (x, y, h) = (0.3, 0.1, 1e-5);
        let c = b.eval(x, y);
        let px = b.eval(x + h, y);
        let mx = b.eval(x - h, y);
        let py = b.eval(x, y + h);
        let my = b.eval(x, y - h);
        for k in 0..b.len() {
            let gx = (px.value[k] - mx.value[k]) / (2.0 * h);
            let gy = (py.value[k] - my.value[k]) / (2.0 * h);
            assert!((gx - c.grad[0][k]).abs() < 1e-6 * (1.0 + gx.abs()));
            assert!((gy - c.grad[1][k]).abs() < 1e-6 * (1.0 + gy.abs()));
            let hxy = (py.grad[0][k] - my.grad[0][k]) / (2.0 * h);
            assert!((hxy - c.hess[1][k]).abs() < 1e-5 * (1.0 + hxy.abs()));
        }
    }
}
