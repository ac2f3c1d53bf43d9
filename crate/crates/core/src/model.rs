//! Radial models: loading, validation, evaluation, and the reduction of a
//! general rotationally symmetric metric to conformally Euclidean form.
//!
//! A model is a sound speed c(r) on the annulus [R, 1] (ball when R = 0)
//! subject to the Herglotz condition d/dr (r / c(r)) > 0. The quantity
//! rho(r) = r / c(r) is the natural radial coordinate for everything built
//! on top: ray kinematics, quantization, and the Abel transform.

use crate::error::{Error, Result};
use crate::num::quad;
use crate::profile::{Profile, ProfileDoc};
use serde::{Deserialize, Serialize};

/// Default grid size for the Herglotz margin scan.
pub const HERGLOTZ_GRID: usize = 4096;
/// Minimum grid size accepted when loading a model.
pub const HERGLOTZ_GRID_MIN: usize = 1024;

/// Validated radial sound-speed model. Immutable after construction; all
/// evaluation is pure, so values can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct RadialModel {
    inner_radius: f64,
    dim: u32,
    speed: Profile,
    density: Option<Profile>,
    herglotz_margin: f64,
    herglotz_argmin: f64,
}

/// JSON document describing a model (see README for the schema).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    #[serde(rename = "R")]
    pub inner_radius: f64,
    pub dim: u32,
    pub speed: ProfileDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<ProfileDoc>,
}

impl RadialModel {
    /// Validate and construct a model from its parts, scanning the Herglotz
    /// margin on a grid of `grid` points (>= 1024).
    pub fn new(
        inner_radius: f64,
        dim: u32,
        speed: Profile,
        density: Option<Profile>,
        grid: usize,
    ) -> Result<RadialModel> {
        if !(0.0..1.0).contains(&inner_radius) {
            return Err(Error::Schema(format!(
                "inner radius must lie in [0, 1), got {inner_radius}"
            )));
        }
        if dim < 2 {
            return Err(Error::Schema(format!("dim must be >= 2, got {dim}")));
        }
        let grid = grid.max(HERGLOTZ_GRID_MIN);
        let mut margin = f64::INFINITY;
        let mut argmin = inner_radius;
        for i in 0..=grid {
            let r = inner_radius + (1.0 - inner_radius) * i as f64 / grid as f64;
            let (c, dc) = speed.eval(r);
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::NonPositiveSpeed { r, c });
            }
            let m = (c - r * dc) / (c * c); // d/dr (r/c)
            if m < margin {
                margin = m;
                argmin = r;
            }
        }
        if !(margin > 0.0) {
            return Err(Error::HerglotzViolation { r: argmin, margin });
        }
        if inner_radius == 0.0 {
            // One-sided finite-difference estimate of c'(0), Richardson
            // extrapolated to kill the O(delta) term.
            let c0 = speed.value(0.0);
            let delta = 1e-5;
            let d1 = (speed.value(delta) - c0) / delta;
            let d2 = (speed.value(delta / 2.0) - c0) / (delta / 2.0);
            let slope = 2.0 * d2 - d1;
            if slope.abs() > 1e-8 {
                return Err(Error::CenterSlope { slope });
            }
        }
        if let Some(d) = &density {
            for i in 0..=64 {
                let r = inner_radius + (1.0 - inner_radius) * i as f64 / 64.0;
                let v = d.value(r);
                if !(v > 0.0) {
                    return Err(Error::Schema(format!("density must be positive, got {v} at r = {r}")));
                }
            }
        }
        Ok(RadialModel {
            inner_radius,
            dim,
            speed,
            density,
            herglotz_margin: margin,
            herglotz_argmin: argmin,
        })
    }

    /// Load a model from its JSON document, per the External Interfaces schema.
    pub fn load(doc: &ModelDocument) -> Result<RadialModel> {
        let speed = doc.speed.build().map_err(Error::Schema)?;
        if let ProfileDoc::Table { r, .. } = &doc.speed {
            let lo = *r.first().unwrap_or(&f64::NAN);
            let hi = *r.last().unwrap_or(&f64::NAN);
            if lo > doc.inner_radius + 1e-12 || hi < 1.0 - 1e-12 {
                return Err(Error::Schema(format!(
                    "table must cover [R, 1] = [{}, 1], got [{lo}, {hi}]",
                    doc.inner_radius
                )));
            }
        }
        let density = match &doc.density {
            Some(d) => Some(d.build().map_err(Error::Schema)?),
            None => None,
        };
        RadialModel::new(doc.inner_radius, doc.dim, speed, density, HERGLOTZ_GRID)
    }

    pub fn load_json(text: &str) -> Result<RadialModel> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        RadialModel::load(&doc)
    }

    /// Document form (tables are emitted knot-for-knot).
    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            inner_radius: self.inner_radius,
            dim: self.dim,
            speed: ProfileDoc::from_profile(&self.speed, self.inner_radius, 1.0),
            density: self
                .density
                .as_ref()
                .map(|d| ProfileDoc::from_profile(d, self.inner_radius, 1.0)),
        }
    }

    /// Constant-speed model (mostly for tests and examples).
    pub fn constant(inner_radius: f64, dim: u32, c: f64) -> Result<RadialModel> {
        RadialModel::new(inner_radius, dim, Profile::Constant(c), None, HERGLOTZ_GRID)
    }

    pub fn polynomial(inner_radius: f64, dim: u32, coeffs: Vec<f64>) -> Result<RadialModel> {
        RadialModel::new(
            inner_radius,
            dim,
            Profile::Polynomial(coeffs),
            None,
            HERGLOTZ_GRID,
        )
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn speed_profile(&self) -> &Profile {
        &self.speed
    }

    pub fn density_profile(&self) -> Option<&Profile> {
        self.density.as_ref()
    }

    /// Cached minimum of d/dr (r/c) over the scan grid.
    pub fn herglotz_margin(&self) -> f64 {
        self.herglotz_margin
    }

    /// Radius at which the margin is attained.
    pub fn herglotz_argmin(&self) -> f64 {
        self.herglotz_argmin
    }

    /// Sound speed and its derivative at `r`.
    pub fn speed(&self, r: f64) -> Result<(f64, f64)> {
        if r < self.inner_radius - 1e-12 || r > 1.0 + 1e-12 {
            return Err(Error::OutOfDomain {
                r,
                lo: self.inner_radius,
                hi: 1.0,
            });
        }
        Ok(self.speed.eval(r.clamp(self.inner_radius, 1.0)))
    }

    /// Herglotz coordinate rho(r) = r / c(r); strictly increasing.
    pub fn rho(&self, r: f64) -> f64 {
        r / self.speed.value(r)
    }

    /// d rho / dr = (c - r c') / c^2; positive for a valid model.
    pub fn rho_prime(&self, r: f64) -> f64 {
        let (c, dc) = self.speed.eval(r);
        (c - r * dc) / (c * c)
    }

    /// Invert the Herglotz coordinate: the unique r with rho(r) = q.
    /// Newton with a bisection safeguard on [R, 1].
    pub fn rho_inverse(&self, q: f64) -> Result<f64> {
        let (mut lo, mut hi) = (self.inner_radius, 1.0);
        let qlo = self.rho(lo);
        let qhi = self.rho(hi);
        if q < qlo - 1e-12 || q > qhi + 1e-12 {
            return Err(Error::OutsideRegime {
                regime: "herglotz coordinate",
                p: q,
                lo: qlo,
                hi: qhi,
            });
        }
        let q = q.clamp(qlo, qhi);
        let mut r = lo + (hi - lo) * (q - qlo) / (qhi - qlo).max(1e-300);
        for _ in 0..200 {
            let f = self.rho(r) - q;
            if f == 0.0 {
                return Ok(r);
            }
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let step = f / self.rho_prime(r);
            if step.abs() <= 2.0 * f64::EPSILON * (r.abs() + 1e-300) {
                return Ok(r - step);
            }
            let mut next = r - step;
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            if next == r {
                return Ok(r);
            }
            r = next;
        }
        Ok(r)
    }
}

/// Sampled rotationally symmetric metric in the block form
/// [[a, b^T], [b, C I]] at radii `r` (outermost sample must be 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricTable {
    pub r: Vec<f64>,
    /// Radial-radial entry a(r) > 0.
    pub a: Vec<f64>,
    /// Radial-angular cross entry b(r).
    pub b: Vec<f64>,
    /// Angular block scalar C(r) > 0.
    #[serde(rename = "C")]
    pub c_ang: Vec<f64>,
}

impl MetricTable {
    pub fn validate(&self) -> Result<()> {
        let n = self.r.len();
        if n < 2 || self.a.len() != n || self.b.len() != n || self.c_ang.len() != n {
            return Err(Error::Schema("metric table columns must share length >= 2".into()));
        }
        if self.r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Schema("metric radii must be strictly increasing".into()));
        }
        if (self.r[n - 1] - 1.0).abs() > 1e-9 {
            return Err(Error::Schema("outermost metric sample must sit at r = 1".into()));
        }
        for i in 0..n {
            if !(self.a[i] > 0.0 && self.c_ang[i] > 0.0 && self.b[i] * self.b[i] < self.a[i] * self.c_ang[i])
            {
                return Err(Error::MetricNotPositive { r: self.r[i] });
            }
        }
        Ok(())
    }
}

/// Reduce a rotationally symmetric metric to a conformally Euclidean model.
///
/// In dimension 2 a cross term b is removed first by the angular shear
/// theta -> theta + phi(r) with r phi' = -b/C, which replaces a by
/// a - b^2/C. The radius map rho(s) = exp(int_1^s t^-1 sqrt(a/C) dt) then
/// makes the metric a conformal multiple of the Euclidean one; the model
/// speed at the new radius rho(s) is rho(s) / (s sqrt(C(s))).
pub fn normalize_metric(raw: &MetricTable, dim: u32) -> Result<RadialModel> {
    raw.validate()?;
    if dim < 2 {
        return Err(Error::Schema(format!("dim must be >= 2, got {dim}")));
    }
    let n = raw.r.len();
    let b_max = raw.b.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if dim >= 3 && b_max > 1e-12 {
        return Err(Error::CrossTermNotAllowed { dim, b_max });
    }
    let a_eff: Vec<f64> = (0..n)
        .map(|i| {
            if dim == 2 {
                raw.a[i] - raw.b[i] * raw.b[i] / raw.c_ang[i]
            } else {
                raw.a[i]
            }
        })
        .collect();
    let a_p = Profile::table(raw.r.clone(), a_eff);
    let c_p = Profile::table(raw.r.clone(), raw.c_ang.clone());
    let integrand = |t: f64| (a_p.value(t) / c_p.value(t)).sqrt() / t;

    // log rho at each knot, accumulated inward from rho(1) = 1.
    let mut log_rho = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let seg = quad::integrate(integrand, raw.r[i], raw.r[i + 1], 1e-12, 1e-14, 2000)?;
        log_rho[i] = log_rho[i + 1] - seg;
    }
    let new_r: Vec<f64> = log_rho.iter().map(|&l| l.exp()).collect();
    let new_c: Vec<f64> = (0..n)
        .map(|i| new_r[i] / (raw.r[i] * raw.c_ang[i].sqrt()))
        .collect();
    let speed = Profile::table(new_r.clone(), new_c);
    RadialModel::new(new_r[0], dim, speed, None, HERGLOTZ_GRID)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_model_has_unit_margin() {
        let m = RadialModel::constant(0.2, 3, 1.0).unwrap();
        assert_relative_eq!(m.herglotz_margin(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn speed_proportional_to_r_is_rejected_everywhere() {
        // c(r) = r has rho(r) = 1, so the margin vanishes identically.
        let r: Vec<f64> = (0..=20).map(|i| 0.5 + 0.5 * i as f64 / 20.0).collect();
        let c = r.clone();
        let err = RadialModel::new(0.5, 3, Profile::table(r, c), None, 2048).unwrap_err();
        match err {
            Error::HerglotzViolation { margin, .. } => assert!(margin.abs() < 1e-9),
            e => panic!("expected Herglotz violation, got {e}"),
        }
    }

    #[test]
    fn linear_speed_margin_matches_closed_form() {
        // c = 2 - r: d/dr (r/c) = 2/(2-r)^2, minimized at r = R = 0.2.
        let m = RadialModel::polynomial(0.2, 3, vec![2.0, -1.0]).unwrap();
        assert_relative_eq!(m.herglotz_margin(), 2.0 / (1.8f64 * 1.8), max_relative = 1e-9);
        assert_relative_eq!(m.herglotz_argmin(), 0.2, epsilon = 1e-3);
    }

    #[test]
    fn eval_examples() {
        let m = RadialModel::constant(0.2, 3, 1.0).unwrap();
        let (c, dc) = m.speed(0.7).unwrap();
        assert_relative_eq!(c, 1.0);
        assert_relative_eq!(dc, 0.0);

        let m = RadialModel::polynomial(0.2, 3, vec![2.0, -1.0]).unwrap();
        let (c, dc) = m.speed(0.5).unwrap();
        assert_relative_eq!(c, 1.5);
        assert_relative_eq!(dc, -1.0);

        let m = RadialModel::new(
            0.2,
            3,
            Profile::table(vec![0.2, 0.6, 1.0], vec![1.0, 1.2, 1.5]),
            None,
            2048,
        )
        .unwrap();
        let (c, _) = m.speed(0.6).unwrap();
        assert_relative_eq!(c, 1.2, max_relative = 1e-15);
        assert!(m.speed(0.1).is_err());
    }

    #[test]
    fn zero_center_slope_enforced_for_balls() {
        assert!(RadialModel::polynomial(0.0, 3, vec![1.0, 0.0, -0.2]).is_ok());
        let err = RadialModel::polynomial(0.0, 3, vec![1.0, 0.3]).unwrap_err();
        assert!(matches!(err, Error::CenterSlope { .. }));
    }

    #[test]
    fn rho_inverse_round_trip() {
        let m = RadialModel::polynomial(0.1, 3, vec![2.0, -1.0]).unwrap();
        for i in 0..=20 {
            let r = 0.1 + 0.9 * i as f64 / 20.0;
            let q = m.rho(r);
            assert_relative_eq!(m.rho_inverse(q).unwrap(), r, max_relative = 1e-12);
        }
    }

    #[test]
    fn normalize_identity_metric() {
        let r: Vec<f64> = (0..=40).map(|i| 0.3 + 0.7 * i as f64 / 40.0).collect();
        let ones = vec![1.0; r.len()];
        let zero = vec![0.0; r.len()];
        let t = MetricTable {
            r: r.clone(),
            a: ones.clone(),
            b: zero,
            c_ang: ones,
        };
        let m = normalize_metric(&t, 3).unwrap();
        assert_relative_eq!(m.inner_radius(), 0.3, max_relative = 1e-12);
        for i in 0..=20 {
            let x = 0.3 + 0.7 * i as f64 / 20.0;
            assert_relative_eq!(m.speed(x).unwrap().0, 1.0, max_relative = 1e-11);
        }
    }

    #[test]
    fn normalize_scaled_radial_metric() {
        // a = 4, C = 1 on [0.5, 1]: rho(s) = s^2, inner radius 0.25.
        let r: Vec<f64> = (0..=50).map(|i| 0.5 + 0.5 * i as f64 / 50.0).collect();
        let t = MetricTable {
            r: r.clone(),
            a: vec![4.0; r.len()],
            b: vec![0.0; r.len()],
            c_ang: vec![1.0; r.len()],
        };
        let m = normalize_metric(&t, 3).unwrap();
        assert_relative_eq!(m.inner_radius(), 0.25, max_relative = 1e-10);
        // Speed at the mapped knot s^2 is s^2 / s = s, i.e. c(x) = sqrt(x);
        // exact at the knots, shape-preserving interpolation in between.
        for &s in &r {
            let x = s * s;
            assert_relative_eq!(m.speed(x).unwrap().0, x.sqrt(), max_relative = 1e-10);
        }
        assert_relative_eq!(m.speed(0.513).unwrap().0, 0.513f64.sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn cross_term_removal_matches_reduced_metric() {
        // dim 2: (a, b, C) should normalize identically to (a - b^2/C, 0, C).
        let r: Vec<f64> = (0..=60).map(|i| 0.4 + 0.6 * i as f64 / 60.0).collect();
        let a: Vec<f64> = r.iter().map(|&x| 2.0 + 0.3 * x).collect();
        let b: Vec<f64> = r.iter().map(|&x| 0.4 * x * (1.0 - x)).collect();
        let c_ang: Vec<f64> = r.iter().map(|&x| 1.5 - 0.2 * x).collect();
        let with_cross = MetricTable {
            r: r.clone(),
            a: a.clone(),
            b: b.clone(),
            c_ang: c_ang.clone(),
        };
        let reduced = MetricTable {
            r: r.clone(),
            a: (0..r.len()).map(|i| a[i] - b[i] * b[i] / c_ang[i]).collect(),
            b: vec![0.0; r.len()],
            c_ang,
        };
        let m1 = normalize_metric(&with_cross, 2).unwrap();
        let m2 = normalize_metric(&reduced, 2).unwrap();
        assert_relative_eq!(m1.inner_radius(), m2.inner_radius(), max_relative = 1e-12);
        for i in 0..=10 {
            let x = m1.inner_radius() + (1.0 - m1.inner_radius()) * i as f64 / 10.0;
            assert_relative_eq!(m1.speed(x).unwrap().0, m2.speed(x).unwrap().0, max_relative = 1e-11);
        }
        // dim >= 3 must refuse the cross term instead.
        assert!(matches!(
            normalize_metric(&with_cross, 3),
            Err(Error::CrossTermNotAllowed { .. })
        ));
    }

    #[test]
    fn document_round_trip() {
        let text = r#"{"R":0.2,"dim":3,"speed":{"kind":"polynomial","coeffs":[2.0,-1.0]}}"#;
        let m = RadialModel::load_json(text).unwrap();
        let doc = m.to_document();
        let m2 = RadialModel::load(&doc).unwrap();
        assert_relative_eq!(m.herglotz_margin(), m2.herglotz_margin());
        assert!(RadialModel::load_json("{\"R\":1.5}").is_err());
    }
}
