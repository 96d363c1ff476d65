//! Smooth star-shaped planar domains given by a boundary radius function.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points used for the trapezoid rules that compute area, centroid and
/// bounding box. Spectrally accurate for these smooth periodic integrands.
const GEOMETRY_POINTS: usize = 4096;

/// Serializable description of a preset domain, as read from a TOML or
/// JSON spec file, e.g. `kind = "ellipse"`, `semi_x = 1.5`, `semi_y = 0.8`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Ellipse {
        semi_x: f64,
        semi_y: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `ρ_b(θ) = R (1 + ε cos kθ)`
    Perturbed {
        radius: f64,
        epsilon: f64,
        k: u32,
        #[serde(default)]
        center: [f64; 2],
    },
}

/// A domain `{c + s ρ_b(θ)(cos θ, sin θ) : 0 ≤ s < 1}` with smooth positive
/// `ρ_b`, together with its area, centroid and bounding box.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain2D {
    spec: DomainSpec,
    area: f64,
    centroid: [f64; 2],
    bbox: [f64; 4],
}

impl Domain2D {
    pub fn disk(radius: f64) -> Result<Self> {
        Self::from_spec(DomainSpec::Disk { radius, center: [0.0, 0.0] })
    }

    pub fn ellipse(semi_x: f64, semi_y: f64) -> Result<Self> {
        Self::from_spec(DomainSpec::Ellipse { semi_x, semi_y, center: [0.0, 0.0] })
    }

    /// Ellipse of the given area and aspect ratio `semi_x / semi_y`.
    pub fn ellipse_with_area(area: f64, aspect: f64) -> Result<Self> {
        if !(area > 0.0 && aspect > 0.0) {
            return Err(Error::Domain("ellipse area and aspect must be positive".into()));
        }
        Self::ellipse((area * aspect / PI).sqrt(), (area / (PI * aspect)).sqrt())
    }

    pub fn perturbed(radius: f64, epsilon: f64, k: u32) -> Result<Self> {
        Self::from_spec(DomainSpec::Perturbed { radius, epsilon, k, center: [0.0, 0.0] })
    }

    pub fn from_spec(spec: DomainSpec) -> Result<Self> {
        let center_ok = |c: &[f64; 2]| c.iter().all(|v| v.is_finite());
        let valid = match &spec {
            DomainSpec::Disk { radius, center } => *radius > 0.0 && radius.is_finite() && center_ok(center),
            DomainSpec::Ellipse { semi_x, semi_y, center } => {
                *semi_x > 0.0 && *semi_y > 0.0 && semi_x.is_finite() && semi_y.is_finite() && center_ok(center)
            }
            DomainSpec::Perturbed { radius, epsilon, k, center } => {
                *radius > 0.0 && radius.is_finite() && epsilon.abs() < 1.0 && *k >= 1 && center_ok(center)
            }
        };
        if !valid {
            return Err(Error::Domain(format!("invalid domain parameters: {spec:?}")));
        }
        let mut dom = Self { spec, area: 0.0, centroid: [0.0; 2], bbox: [0.0; 4] };
        dom.compute_geometry();
        Ok(dom)
    }

    /// Read a spec file; `.json` is parsed as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: DomainSpec = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)?,
            _ => toml::from_str(&text)?,
        };
        Self::from_spec(spec)
    }

    fn compute_geometry(&mut self) {
        let n = GEOMETRY_POINTS;
        let h = 2.0 * PI / n as f64;
        let c = self.center();
        let (mut area, mut mx, mut my) = (0.0, 0.0, 0.0);
        let mut bbox = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for i in 0..n {
            let th = h * i as f64;
            let r = self.radius(th);
            let (s, co) = th.sin_cos();
            area += 0.5 * r * r * h;
            mx += r * r * r * co * h / 3.0;
            my += r * r * r * s * h / 3.0;
            let (x, y) = (c[0] + r * co, c[1] + r * s);
            bbox = [bbox[0].min(x), bbox[1].max(x), bbox[2].min(y), bbox[3].max(y)];
        }
        self.area = area;
        self.centroid = [c[0] + mx / area, c[1] + my / area];
        // sampled extremes can sit slightly inside the true box
        let pad = 1e-6 * (bbox[1] - bbox[0]).max(bbox[3] - bbox[2]);
        self.bbox = [bbox[0] - pad, bbox[1] + pad, bbox[2] - pad, bbox[3] + pad];
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Pole of the polar parametrization.
    pub fn center(&self) -> [f64; 2] {
        match &self.spec {
            DomainSpec::Disk { center, .. } | DomainSpec::Ellipse { center, .. } | DomainSpec::Perturbed { center, .. } => *center,
        }
    }

    /// `ρ_b(θ)`
    pub fn radius(&self, theta: f64) -> f64 {
        match self.spec {
            DomainSpec::Disk { radius, .. } => radius,
            DomainSpec::Ellipse { semi_x: p, semi_y: q, .. } => {
                let (s, c) = theta.sin_cos();
                p * q / (q * q * c * c + p * p * s * s).sqrt()
            }
            DomainSpec::Perturbed { radius, epsilon, k, .. } => radius * (1.0 + epsilon * (k as f64 * theta).cos()),
        }
    }

    /// `ρ_b′(θ)`
    pub fn radius_derivative(&self, theta: f64) -> f64 {
        match self.spec {
            DomainSpec::Disk { .. } => 0.0,
            DomainSpec::Ellipse { semi_x: p, semi_y: q, .. } => {
                let (s, c) = theta.sin_cos();
                let g = q * q * c * c + p * p * s * s;
                -p * q * (p * p - q * q) * s * c / g.powf(1.5)
            }
            DomainSpec::Perturbed { radius, epsilon, k, .. } => {
                let k = k as f64;
                -radius * epsilon * k * (k * theta).sin()
            }
        }
    }

    /// Area from the trapezoid rule on `½∫ρ_b²`.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Closed-form area of the preset.
    pub fn analytic_area(&self) -> f64 {
        match self.spec {
            DomainSpec::Disk { radius, .. } => PI * radius * radius,
            DomainSpec::Ellipse { semi_x, semi_y, .. } => PI * semi_x * semi_y,
            DomainSpec::Perturbed { radius, epsilon, .. } => PI * radius * radius * (1.0 + 0.5 * epsilon * epsilon),
        }
    }

    pub fn centroid(&self) -> [f64; 2] {
        self.centroid
    }

    /// `[x_min, x_max, y_min, y_max]`, slightly padded.
    pub fn bounding_box(&self) -> [f64; 4] {
        self.bbox
    }

    /// Radius `R` of the disk with the same area.
    pub fn equal_area_radius(&self) -> f64 {
        (self.area / PI).sqrt()
    }

    /// The dilation `tΩ` (about the origin).
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("scale factor must be positive, got {t}")));
        }
        let sc = |c: [f64; 2]| [t * c[0], t * c[1]];
        let spec = match self.spec.clone() {
            DomainSpec::Disk { radius, center } => DomainSpec::Disk { radius: t * radius, center: sc(center) },
            DomainSpec::Ellipse { semi_x, semi_y, center } => {
                DomainSpec::Ellipse { semi_x: t * semi_x, semi_y: t * semi_y, center: sc(center) }
            }
            DomainSpec::Perturbed { radius, epsilon, k, center } => {
                DomainSpec::Perturbed { radius: t * radius, epsilon, k, center: sc(center) }
            }
        };
        Self::from_spec(spec)
    }

    /// Whether the preset is invariant under `x ↦ 2c − x` about its pole.
    pub fn is_centrally_symmetric(&self) -> bool {
        match self.spec {
            DomainSpec::Disk { .. } | DomainSpec::Ellipse { .. } => true,
            DomainSpec::Perturbed { k, .. } => k % 2 == 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_areas() {
        for dom in [
            Domain2D::disk(1.3).unwrap(),
            Domain2D::ellipse(1.5, 0.7).unwrap(),
            Domain2D::perturbed(1.0, 0.1, 3).unwrap(),
            Domain2D::perturbed(0.8, 0.3, 1).unwrap(),
        ] {
            assert!((dom.area() - dom.analytic_area()).abs() <= 1e-10 * dom.analytic_area());
        }
        let e = Domain2D::ellipse_with_area(PI, 2.0).unwrap();
        assert!((e.area() - PI).abs() < 1e-12);
        assert!((e.equal_area_radius() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radius_derivative_matches_differences() {
        for dom in [Domain2D::ellipse(1.5, 0.7).unwrap(), Domain2D::perturbed(1.0, 0.2, 4).unwrap()] {
            for i in 0..20 {
                let th = 0.3 * i as f64;
                let h = 1e-6;
                let fd = (dom.radius(th + h) - dom.radius(th - h)) / (2.0 * h);
                assert!((fd - dom.radius_derivative(th)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn centroid_and_box() {
        let e = Domain2D::ellipse(2.0, 1.0).unwrap();
        assert!(e.centroid()[0].abs() < 1e-14 && e.centroid()[1].abs() < 1e-14);
        let b = e.bounding_box();
        assert!((b[1] - 2.0).abs() < 1e-5 && (b[3] - 1.0).abs() < 1e-5);
        // a k = 1 perturbation shifts the centroid along x
        let p = Domain2D::perturbed(1.0, 0.1, 1).unwrap();
        assert!(p.centroid()[0] > 0.05);
        let shifted = Domain2D::from_spec(DomainSpec::Disk { radius: 1.0, center: [0.5, -0.25] }).unwrap();
        assert!((shifted.centroid()[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain2D::disk(0.0).is_err());
        assert!(Domain2D::perturbed(1.0, 1.0, 2).is_err());
        assert!(Domain2D::perturbed(1.0, 0.1, 0).is_err());
        assert!(Domain2D::ellipse(-1.0, 1.0).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec: DomainSpec = toml::from_str("kind = \"ellipse\"\nsemi_x = 1.5\nsemi_y = 0.5\n").unwrap();
        assert_eq!(spec, DomainSpec::Ellipse { semi_x: 1.5, semi_y: 0.5, center: [0.0, 0.0] });
        let spec: DomainSpec = serde_json::from_str(r#"{"kind":"perturbed","radius":1,"epsilon":0.1,"k":3}"#).unwrap();
        assert!(matches!(spec, DomainSpec::Perturbed { k: 3, .. }));
        assert!(toml::from_str::<DomainSpec>("kind = \"square\"\nside = 1.0\n").is_err());
    }

    #[test]
    fn scaling() {
        let e = Domain2D::ellipse(1.5, 0.5).unwrap().scaled(2.0).unwrap();
        assert!((e.area() - 4.0 * PI * 0.75).abs() < 1e-10);
    }
}
