//! Assembly of the Robin plate quadratic forms and the generalized
//! symmetric eigensolve.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::basis::{BasisPoint, LegendreBasis};
use super::domain::Domain2D;
use super::quadrature::gauss_legendre_on;
use crate::error::{Error, Result};

/// Discretization controls. Unset quadrature orders follow the degree:
/// `2N + 4` radial Gauss points and at least `max(8N, 160)` angular points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RitzOptions {
    pub degree: usize,
    pub radial_points: Option<usize>,
    pub angular_points: Option<usize>,
    /// Mass-matrix eigenvalues below `drop_tolerance · trace` are discarded.
    pub drop_tolerance: f64,
}

impl Default for RitzOptions {
    fn default() -> Self {
        Self { degree: 12, radial_points: None, angular_points: None, drop_tolerance: 1e-12 }
    }
}

impl RitzOptions {
    pub fn with_degree(degree: usize) -> Self {
        Self { degree, ..Self::default() }
    }

    pub fn radial_order(&self) -> usize {
        self.radial_points.unwrap_or(2 * self.degree + 4)
    }

    pub fn angular_order(&self) -> usize {
        // multiples of 8 keep the rule invariant under the dihedral symmetries
        let n = self.angular_points.unwrap_or((8 * self.degree).max(160));
        n.div_ceil(8) * 8
    }
}

/// Polar-mapped rule `x = c + s ρ_b(θ)(cos θ, sin θ)`, `dx = s ρ_b² ds dθ`,
/// plus the boundary rule with arclength weights `√(ρ_b² + ρ_b′²) dθ`.
#[derive(Clone, Debug)]
pub struct PolarRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub boundary_points: Vec<[f64; 2]>,
    pub boundary_weights: Vec<f64>,
    /// Outward unit normals at the boundary points.
    pub boundary_normals: Vec<[f64; 2]>,
}

impl PolarRule {
    pub fn new(dom: &Domain2D, n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 1 || n_theta < 4 {
            return Err(Error::Config("quadrature needs n_r ≥ 1 and n_θ ≥ 4".into()));
        }
        let (s, ws) = gauss_legendre_on(n_r, 0.0, 1.0)?;
        let h = 2.0 * std::f64::consts::PI / n_theta as f64;
        let c = dom.center();
        let mut rule = Self {
            points: Vec::with_capacity(n_r * n_theta),
            weights: Vec::with_capacity(n_r * n_theta),
            boundary_points: Vec::with_capacity(n_theta),
            boundary_weights: Vec::with_capacity(n_theta),
            boundary_normals: Vec::with_capacity(n_theta),
        };
        for i in 0..n_theta {
            let th = h * i as f64;
            let (sn, cs) = th.sin_cos();
            let rb = dom.radius(th);
            let drb = dom.radius_derivative(th);
            for (sk, wk) in s.iter().zip(&ws) {
                rule.points.push([c[0] + sk * rb * cs, c[1] + sk * rb * sn]);
                rule.weights.push(wk * sk * rb * rb * h);
            }
            let speed = (rb * rb + drb * drb).sqrt();
            rule.boundary_points.push([c[0] + rb * cs, c[1] + rb * sn]);
            rule.boundary_weights.push(speed * h);
            rule.boundary_normals.push([(drb * sn + rb * cs) / speed, (rb * sn - drb * cs) / speed]);
        }
        Ok(rule)
    }

    pub fn for_options(dom: &Domain2D, opts: &RitzOptions) -> Result<Self> {
        Self::new(dom, opts.radial_order(), opts.angular_order())
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64 + Sync) -> f64 {
        self.points.par_iter().zip(self.weights.par_iter()).map(|(p, w)| w * f(*p)).collect::<Vec<_>>().iter().sum()
    }

    pub fn integrate_boundary(&self, f: impl Fn([f64; 2], [f64; 2]) -> f64) -> f64 {
        self.boundary_points
            .iter()
            .zip(&self.boundary_normals)
            .zip(&self.boundary_weights)
            .map(|((p, n), w)| w * f(*p, *n))
            .sum()
    }
}

/// The assembled quadratic forms. Kept separately so that the stiffness
/// `A = H + τG + αB` can be rebuilt for new `(τ, α)` without quadrature.
#[derive(Clone, Debug)]
pub struct RitzSystem {
    domain: Domain2D,
    basis: LegendreBasis,
    tau: f64,
    alpha: f64,
    /// `∫ D²φᵢ : D²φⱼ`
    hessian: DMatrix<f64>,
    /// `∫ ∇φᵢ · ∇φⱼ`
    gradient: DMatrix<f64>,
    /// `∮ φᵢ φⱼ dS`
    boundary: DMatrix<f64>,
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    radial_points: usize,
    angular_points: usize,
    drop_tolerance: f64,
}

/// Lowest Ritz pairs.
#[derive(Clone, Debug)]
pub struct RitzSolution {
    /// Ascending Ritz values: upper bounds for `Λ₁ … Λ_k`.
    pub eigenvalues: Vec<f64>,
    /// Basis coefficients, `M`-orthonormal, one per eigenvalue.
    pub vectors: Vec<DVector<f64>>,
    /// `‖Ax − ΛMx‖ / max(‖Ax‖, |Λ|‖Mx‖)` per pair.
    pub residuals: Vec<f64>,
    /// `max |XᵀMX − I|`.
    pub orthonormality_error: f64,
    /// Dimension retained after dropping near-null mass directions.
    pub rank: usize,
}

fn check_parameters(tau: f64, alpha: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tension must be positive, got {tau}")));
    }
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("Robin parameter must be finite, got {alpha}")));
    }
    Ok(())
}

/// Gram matrix `Σ_q w_q fᵢ(q) fⱼ(q)` of columns already scaled by `√w`.
fn gram(rows: &DMatrix<f64>) -> DMatrix<f64> {
    let g = rows.tr_mul(rows);
    (&g + g.transpose()) * 0.5
}

pub fn assemble(dom: &Domain2D, tau: f64, alpha: f64, opts: &RitzOptions) -> Result<RitzSystem> {
    check_parameters(tau, alpha)?;
    let basis = LegendreBasis::new(opts.degree, dom.bounding_box())?;
    let rule = PolarRule::for_options(dom, opts)?;

    let area: f64 = rule.weights.iter().sum();
    if (area - dom.area()).abs() > 1e-10 * dom.area() {
        return Err(Error::Config(format!("interior quadrature area {area} disagrees with domain area {}", dom.area())));
    }

    let m = basis.len();
    let n = rule.points.len();
    let evals: Vec<BasisPoint> = rule.points.par_iter().map(|p| basis.eval(p[0], p[1])).collect();
    let mut val = DMatrix::zeros(n, m);
    let mut gx = DMatrix::zeros(n, m);
    let mut gy = DMatrix::zeros(n, m);
    let mut hxx = DMatrix::zeros(n, m);
    let mut hxy = DMatrix::zeros(n, m);
    let mut hyy = DMatrix::zeros(n, m);
    for (q, (bp, w)) in evals.iter().zip(&rule.weights).enumerate() {
        let sw = w.sqrt();
        for j in 0..m {
            val[(q, j)] = sw * bp.value[j];
            gx[(q, j)] = sw * bp.grad[0][j];
            gy[(q, j)] = sw * bp.grad[1][j];
            hxx[(q, j)] = sw * bp.hess[0][j];
            // the mixed derivative appears twice in D²u : D²φ
            hxy[(q, j)] = sw * std::f64::consts::SQRT_2 * bp.hess[1][j];
            hyy[(q, j)] = sw * bp.hess[2][j];
        }
    }
    let mut bval = DMatrix::zeros(rule.boundary_points.len(), m);
    for (q, (p, w)) in rule.boundary_points.iter().zip(&rule.boundary_weights).enumerate() {
        let bp = basis.eval(p[0], p[1]);
        let sw = w.sqrt();
        for j in 0..m {
            bval[(q, j)] = sw * bp.value[j];
        }
    }

    let mass = gram(&val);
    let gradient = gram(&gx) + gram(&gy);
    let hessian = gram(&hxx) + gram(&hxy) + gram(&hyy);
    let boundary = gram(&bval);
    let stiffness = &hessian + &gradient * tau + &boundary * alpha;
    Ok(RitzSystem {
        domain: dom.clone(),
        basis,
        tau,
        alpha,
        hessian,
        gradient,
        boundary,
        mass,
        stiffness,
        radial_points: opts.radial_order(),
        angular_points: opts.angular_order(),
        drop_tolerance: opts.drop_tolerance,
    })
}

impl RitzSystem {
    /// Same discretization, new `(τ, α)`.
    pub fn with_parameters(&self, tau: f64, alpha: f64) -> Result<Self> {
        check_parameters(tau, alpha)?;
        let mut out = self.clone();
        out.tau = tau;
        out.alpha = alpha;
        out.stiffness = &self.hessian + &self.gradient * tau + &self.boundary * alpha;
        Ok(out)
    }

    pub fn domain(&self) -> &Domain2D {
        &self.domain
    }

    pub fn basis(&self) -> &LegendreBasis {
        &self.basis
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn boundary_form(&self) -> &DMatrix<f64> {
        &self.boundary
    }

    pub fn quadrature_orders(&self) -> (usize, usize) {
        (self.radial_points, self.angular_points)
    }

    /// Lowest `k` Ritz pairs of `A x = Λ M x`.
    ///
    /// Diagonal scaling, then `M = VDVᵀ`; directions with eigenvalue below
    /// the drop tolerance are discarded, and the reduced standard problem
    /// `(D^{-½}VᵀAVD^{-½}) y = Λ y` is solved densely.
    pub fn solve(&self, k: usize) -> Result<RitzSolution> {
        let m = self.size();
        if k == 0 || k > m {
            return Err(Error::Domain(format!("requested {k} eigenpairs from a basis of size {m}")));
        }
        let scale = DVector::from_iterator(m, (0..m).map(|i| 1.0 / self.mass[(i, i)].sqrt()));
        let scaled = |a: &DMatrix<f64>| DMatrix::from_fn(m, m, |i, j| a[(i, j)] * scale[i] * scale[j]);
        let ms = scaled(&self.mass);
        let as_ = scaled(&self.stiffness);

        let me = SymmetricEigen::new(ms.clone());
        let trace = ms.trace();
        let keep: Vec<usize> = (0..m).filter(|&i| me.eigenvalues[i] > self.drop_tolerance * trace).collect();
        let rank = keep.len();
        if rank < k {
            return Err(Error::BasisDegeneracy { rank, requested: k });
        }
        let t = DMatrix::from_fn(m, rank, |i, c| me.eigenvectors[(i, keep[c])] / me.eigenvalues[keep[c]].sqrt());
        let reduced = t.tr_mul(&(&as_ * &t));
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        let re = SymmetricEigen::new(reduced);
        let mut order: Vec<usize> = (0..rank).collect();
        order.sort_by(|&a, &b| re.eigenvalues[a].total_cmp(&re.eigenvalues[b]));

        let mut sol = RitzSolution {
            eigenvalues: Vec::with_capacity(k),
            vectors: Vec::with_capacity(k),
            residuals: Vec::with_capacity(k),
            orthonormality_error: 0.0,
            rank,
        };
        for &idx in order.iter().take(k) {
            let lam = re.eigenvalues[idx];
            let y = re.eigenvectors.column(idx);
            let x = (&t * y).component_mul(&scale);
            let ax = &self.stiffness * &x;
            let mx = &self.mass * &x;
            let denom = ax.norm().max(lam.abs() * mx.norm()).max(f64::MIN_POSITIVE);
            sol.residuals.push((&ax - &mx * lam).norm() / denom);
            sol.eigenvalues.push(lam);
            sol.vectors.push(x);
        }
        for i in 0..k {
            for j in 0..k {
                let g = sol.vectors[i].dot(&(&self.mass * &sol.vectors[j]));
                let target = if i == j { 1.0 } else { 0.0 };
                sol.orthonormality_error = sol.orthonormality_error.max((g - target).abs());
            }
        }
        Ok(sol)
    }

    /// `Σ cᵢ φᵢ(x)`
    pub fn eval(&self, coeffs: &DVector<f64>, p: [f64; 2]) -> f64 {
        self.basis.combine(coeffs.as_slice(), p[0], p[1])
    }
}

pub fn solve(sys: &RitzSystem, k: usize) -> Result<RitzSolution> {
    sys.solve(k)
}
