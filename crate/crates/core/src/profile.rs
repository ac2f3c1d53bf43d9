//! Evaluable radial profiles: constant, polynomial, monotone-cubic table,
//! and multiplicatively deformed composites.

use crate::num::pchip::Pchip;
use serde::{Deserialize, Serialize};

/// A C1 radial profile on some interval of radii.
#[derive(Debug, Clone)]
pub enum Profile {
    Constant(f64),
    /// Coefficients in increasing order: a0 + a1 r + a2 r^2 + ...
    Polynomial(Vec<f64>),
    Table(Pchip),
    /// base(r) * (1 + tau * bump(r)); used by deformation families so the
    /// derivative stays exact along the family.
    Deformed {
        base: Box<Profile>,
        bump: Box<Profile>,
        tau: f64,
    },
}

impl Profile {
    /// Value and first derivative at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match self {
            Profile::Constant(v) => (*v, 0.0),
            Profile::Polynomial(c) => {
                let mut v = 0.0;
                let mut dv = 0.0;
                for &a in c.iter().rev() {
                    dv = dv * r + v;
                    v = v * r + a;
                }
                (v, dv)
            }
            Profile::Table(p) => p.eval(r),
            Profile::Deformed { base, bump, tau } => {
                let (b, db) = base.eval(r);
                let (h, dh) = bump.eval(r);
                (b * (1.0 + tau * h), db * (1.0 + tau * h) + b * tau * dh)
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn table(r: Vec<f64>, v: Vec<f64>) -> Profile {
        Profile::Table(Pchip::new(r, v))
    }
}

/// Serialized form of a profile, matching the model-document JSON schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileDoc {
    Constant { value: f64 },
    Polynomial { coeffs: Vec<f64> },
    Table { r: Vec<f64>, c: Vec<f64> },
}

impl ProfileDoc {
    pub fn build(&self) -> Result<Profile, String> {
        match self {
            ProfileDoc::Constant { value } => Ok(Profile::Constant(*value)),
            ProfileDoc::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err("polynomial needs at least one coefficient".into());
                }
                Ok(Profile::Polynomial(coeffs.clone()))
            }
            ProfileDoc::Table { r, c } => {
                if r.len() != c.len() {
                    return Err("table r/c lengths differ".into());
                }
                if r.len() < 2 {
                    return Err("table needs at least two knots".into());
                }
                if r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err("table radii must be strictly increasing".into());
                }
                Ok(Profile::table(r.clone(), c.clone()))
            }
        }
    }

    /// Document form of a profile; composites are sampled onto a table.
    pub fn from_profile(p: &Profile, lo: f64, hi: f64) -> ProfileDoc {
        match p {
            Profile::Constant(v) => ProfileDoc::Constant { value: *v },
            Profile::Polynomial(c) => ProfileDoc::Polynomial { coeffs: c.clone() },
            Profile::Table(t) => ProfileDoc::Table {
                r: t.knots().to_vec(),
                c: t.knots().iter().map(|&x| t.eval(x).0).collect(),
            },
            Profile::Deformed { .. } => {
                let n = 512;
                let r: Vec<f64> = (0..=n)
                    .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                    .collect();
                let c = r.iter().map(|&x| p.value(x)).collect();
                ProfileDoc::Table { r, c }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_horner_value_and_slope() {
        let p = Profile::Polynomial(vec![2.0, -1.0]);
        let (v, dv) = p.eval(0.5);
        assert_relative_eq!(v, 1.5);
        assert_relative_eq!(dv, -1.0);
        let p = Profile::Polynomial(vec![1.0, 0.5, -0.25]);
        let (v, dv) = p.eval(0.8);
        assert_relative_eq!(v, 1.0 + 0.4 - 0.25 * 0.64, max_relative = 1e-15);
        assert_relative_eq!(dv, 0.5 - 0.5 * 0.8, max_relative = 1e-15);
    }

    #[test]
    fn deformed_derivative_is_exact() {
        let base = Profile::Polynomial(vec![2.0, -1.0]);
        let bump = Profile::Polynomial(vec![0.0, 1.0, -1.0]); // r - r^2
        let d = Profile::Deformed {
            base: Box::new(base),
            bump: Box::new(bump),
            tau: 0.3,
        };
        let r = 0.6;
        let (v, dv) = d.eval(r);
        let h = r - r * r;
        assert_relative_eq!(v, (2.0 - r) * (1.0 + 0.3 * h), max_relative = 1e-15);
        let exact = -(1.0 + 0.3 * h) + (2.0 - r) * 0.3 * (1.0 - 2.0 * r);
        assert_relative_eq!(dv, exact, max_relative = 1e-14);
    }

    #[test]
    fn doc_round_trip() {
        let doc: ProfileDoc =
            serde_json::from_str(r#"{"kind":"table","r":[0.2,0.6,1.0],"c":[1.0,1.2,1.5]}"#)
                .unwrap();
        let p = doc.build().unwrap();
        assert_relative_eq!(p.value(0.6), 1.2);
        assert!(serde_json::from_str::<ProfileDoc>(r#"{"kind":"nope"}"#).is_err());
    }
}
