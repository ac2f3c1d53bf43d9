//! Periodic broken rays and their length spectrum.
//!
//! A diving ray with tip radius r closes up after n chords and m windings
//! exactly when alpha(r) = pi m / n; its primitive length is 2 n L(r).
//! A ray reflecting at the inner boundary closes when the per-bounce angle
//! B(z) equals pi m / n, with n inner reflections and primitive length
//! 2 n T_leg(z); B is strictly increasing so the root is unique.

use crate::error::{Error, Result};
use crate::model::RadialModel;
use crate::num::roots;
use crate::rays::{self, Regime, P_MARGIN};
use serde::{Deserialize, Serialize};

/// |alpha'| above this is a stable orbit.
pub const STABLE_THRESHOLD: f64 = 1e-6;
/// |alpha'| below this is treated as vanishing (conjugate-degenerate).
pub const DEGENERATE_THRESHOLD: f64 = 1e-9;
/// Default scan grid for root bracketing.
pub const SCAN_GRID: usize = 2048;

/// Stability class of a periodic orbit, from the angle derivative at its
/// radius. The band between the two thresholds is surfaced as indeterminate
/// rather than silently classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Indeterminate,
    Degenerate,
}

/// A primitive periodic broken ray.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub kind: Regime,
    /// Winding number (0 for the radial bouncing orbit).
    pub m: u32,
    /// Chord count (diving) or inner-reflection count (reflecting).
    pub n: u32,
    /// Tip radius (diving) or angular momentum z (reflecting).
    pub parameter: f64,
    /// Primitive period, time units.
    pub primitive_length: f64,
    pub stability: Stability,
    /// alpha'(r) for diving orbits, dB/dz for reflecting ones.
    pub angle_slope: f64,
}

impl PeriodicOrbit {
    /// Angular momentum of the orbit.
    pub fn momentum(&self, model: &RadialModel) -> f64 {
        match self.kind {
            Regime::Diving => model.rho(self.parameter),
            Regime::Reflecting => self.parameter,
        }
    }
}

fn classify(slope: f64) -> Stability {
    if slope.abs() > STABLE_THRESHOLD {
        Stability::Stable
    } else if slope.abs() > DEGENERATE_THRESHOLD {
        Stability::Indeterminate
    } else {
        Stability::Degenerate
    }
}

/// Valid open interval of tip radii (momentum margins applied).
fn tip_interval(model: &RadialModel) -> Result<(f64, f64)> {
    let r_in = model.inner_radius();
    let (p_lo, p_hi) = rays::diving_window(model);
    let lo = if r_in == 0.0 {
        1e-7
    } else {
        model.rho_inverse(p_lo + 2.0 * P_MARGIN)?
    };
    let hi = model.rho_inverse(p_hi - 2.0 * P_MARGIN)?;
    Ok((lo, hi))
}

/// alpha sampled on a uniform grid of tip radii, reused for bracketing.
#[derive(Debug, Clone)]
pub struct AlphaScan {
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub fn alpha_scan(model: &RadialModel, size: usize) -> Result<AlphaScan> {
    let size = size.max(64);
    let (lo, hi) = tip_interval(model)?;
    let mut r = Vec::with_capacity(size + 1);
    let mut a = Vec::with_capacity(size + 1);
    for i in 0..=size {
        let x = lo + (hi - lo) * i as f64 / size as f64;
        r.push(x);
        a.push(rays::alpha(model, x)?);
    }
    Ok(AlphaScan { r, alpha: a })
}

fn roots_from_scan(model: &RadialModel, scan: &AlphaScan, target: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..scan.r.len() - 1 {
        let fa = scan.alpha[i] - target;
        let fb = scan.alpha[i + 1] - target;
        if fa == 0.0 {
            out.push(scan.r[i]);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        let root = roots::brent(
            |r| rays::alpha(model, r).unwrap_or(f64::NAN) - target,
            scan.r[i],
            scan.r[i + 1],
            1e-15,
            200,
            "alpha(r) = target",
        )?;
        let resid = (rays::alpha(model, root)? - target).abs();
        if resid > 1e-10 {
            return Err(Error::NoConvergence {
                what: format!("alpha root residual {resid:.3e} at r = {root}"),
                iters: 200,
            });
        }
        out.push(root);
    }
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(out)
}

/// All radii in (R, 1) with alpha(r) = pi m / n, by sign-change bracketing
/// on a dense grid followed by Brent polish.
pub fn find_periodic_radii(model: &RadialModel, m: u32, n: u32) -> Result<Vec<f64>> {
    if n < 2 || gcd(m, n) != 1 {
        return Err(Error::Invalid(format!(
            "need coprime (m, n) with n >= 2, got ({m}, {n})"
        )));
    }
    let scan = alpha_scan(model, SCAN_GRID)?;
    roots_from_scan(model, &scan, std::f64::consts::PI * m as f64 / n as f64)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn diving_orbit(model: &RadialModel, m: u32, n: u32, r: f64) -> Result<PeriodicOrbit> {
    let length = 2.0 * n as f64 * rays::half_length(model, r)?;
    let slope = rays::alpha_prime(model, r)?;
    Ok(PeriodicOrbit {
        kind: Regime::Diving,
        m,
        n,
        parameter: r,
        primitive_length: length,
        stability: classify(slope),
        angle_slope: slope,
    })
}

/// Enumerate primitive diving orbits with chord count n <= n_max.
///
/// For a ball (R = 0) the diameter orbit appears as the r -> 0 limit of the
/// (1, 2) family with length 4 * int_0^1 dr / c; it is added explicitly.
pub fn enumerate_lsp(model: &RadialModel, n_max: u32) -> Result<Vec<PeriodicOrbit>> {
    if n_max < 2 {
        return Err(Error::Invalid(format!("n_max must be >= 2, got {n_max}")));
    }
    let scan = alpha_scan(model, SCAN_GRID)?;
    let a_hi = scan.alpha.iter().cloned().fold(f64::MIN, f64::max);
    let a_lo = scan.alpha.iter().cloned().fold(f64::MAX, f64::min);
    let mut orbits = Vec::new();
    for n in 2..=n_max {
        let m_hi = ((a_hi * n as f64) / std::f64::consts::PI).ceil() as u32 + 1;
        for m in 1..=m_hi {
            if gcd(m, n) != 1 {
                continue;
            }
            let target = std::f64::consts::PI * m as f64 / n as f64;
            if target < a_lo || target > a_hi {
                continue;
            }
            for r in roots_from_scan(model, &scan, target)? {
                orbits.push(diving_orbit(model, m, n, r)?);
            }
        }
    }
    if model.inner_radius() == 0.0 && n_max >= 2 {
        orbits.push(diameter_orbit(model)?);
    }
    orbits.sort_by(|a, b| {
        (a.n, a.m)
            .cmp(&(b.n, b.m))
            .then(a.parameter.partial_cmp(&b.parameter).unwrap())
    });
    Ok(orbits)
}

/// The bouncing-diameter orbit of a ball, i.e. the limit r_tip -> 0 where
/// alpha -> pi/2: two chords through the centre, length 4 int_0^1 dr/c.
fn diameter_orbit(model: &RadialModel) -> Result<PeriodicOrbit> {
    let inv_c = crate::num::quad::integrate_ray(
        |r: f64| 1.0 / model.speed(r).map(|s| s.0).unwrap_or(f64::NAN),
        0.0,
        1.0,
    )?;
    // Stability from the angle slope just off the limit.
    let slope = rays::alpha_prime(model, 1e-3)?;
    Ok(PeriodicOrbit {
        kind: Regime::Diving,
        m: 1,
        n: 2,
        parameter: 0.0,
        primitive_length: 4.0 * inv_c,
        stability: classify(slope),
        angle_slope: slope,
    })
}

/// Enumerate primitive reflecting orbits (R > 0 only). `include_radial`
/// appends the purely radial bouncing orbit, the z -> 0 closure of the
/// family with m = 0.
pub fn enumerate_lsp_reflecting(
    model: &RadialModel,
    n_max: u32,
    include_radial: bool,
) -> Result<Vec<PeriodicOrbit>> {
    if model.inner_radius() == 0.0 {
        return Err(Error::NoInnerBoundary);
    }
    let (_, z_hi_win) = rays::reflecting_window(model);
    let z_hi = z_hi_win - 2.0 * P_MARGIN;
    let z_lo = 1e-12_f64.min(z_hi / 2.0);
    let b_hi = rays::reflecting_angle_only(model, z_hi)?;
    let mut orbits = Vec::new();
    for n in 2..=n_max {
        let m_hi = ((b_hi * n as f64) / std::f64::consts::PI).floor() as u32;
        for m in 1..=m_hi {
            if gcd(m, n) != 1 {
                continue;
            }
            let target = std::f64::consts::PI * m as f64 / n as f64;
            if target >= b_hi {
                continue;
            }
            // B is a homeomorphism onto its range: exactly one root.
            let z = roots::brent(
                |z| {
                    rays::reflecting_angle_only(model, z)
                        .map(|b| b - target)
                        .unwrap_or(f64::NAN)
                },
                z_lo,
                z_hi,
                1e-15,
                200,
                "B(z) = target",
            )?;
            let (b, db) = rays::reflecting_angle(model, z)?;
            if (b - target).abs() > 1e-10 {
                return Err(Error::NoConvergence {
                    what: format!("B root residual {:.3e}", (b - target).abs()),
                    iters: 200,
                });
            }
            orbits.push(PeriodicOrbit {
                kind: Regime::Reflecting,
                m,
                n,
                parameter: z,
                primitive_length: 2.0 * n as f64 * rays::leg_time(model, z)?,
                stability: Stability::Stable,
                angle_slope: db,
            });
        }
    }
    if include_radial {
        orbits.push(radial_orbit(model)?);
    }
    orbits.sort_by(|a, b| {
        (a.n, a.m)
            .cmp(&(b.n, b.m))
            .then(a.parameter.partial_cmp(&b.parameter).unwrap())
    });
    Ok(orbits)
}

/// The radial bouncing orbit: straight down and back between the boundaries.
pub fn radial_orbit(model: &RadialModel) -> Result<PeriodicOrbit> {
    if model.inner_radius() == 0.0 {
        return Err(Error::NoInnerBoundary);
    }
    Ok(PeriodicOrbit {
        kind: Regime::Reflecting,
        m: 0,
        n: 1,
        parameter: 0.0,
        primitive_length: 2.0 * rays::leg_time(model, 0.0)?,
        stability: Stability::Stable,
        angle_slope: 0.0,
    })
}

/// Grid scan for zones where alpha' vanishes (conjugate radii). Returns
/// merged intervals where |alpha'| < 1e-6 or alpha' changes sign; an empty
/// list certifies the countable conjugacy condition at this resolution.
pub fn conjugacy_scan(model: &RadialModel, grid_size: usize) -> Result<Vec<(f64, f64)>> {
    let grid_size = grid_size.max(64);
    let scan = alpha_scan(model, grid_size)?;
    let n = scan.r.len();
    let h = scan.r[1] - scan.r[0];
    let deriv = |i: usize| -> f64 {
        if i >= 2 && i + 2 < n {
            (-scan.alpha[i + 2] + 8.0 * scan.alpha[i + 1] - 8.0 * scan.alpha[i - 1]
                + scan.alpha[i - 2])
                / (12.0 * h)
        } else if i == 0 {
            (scan.alpha[1] - scan.alpha[0]) / h
        } else if i + 1 >= n {
            (scan.alpha[n - 1] - scan.alpha[n - 2]) / h
        } else {
            (scan.alpha[i + 1] - scan.alpha[i - 1]) / (2.0 * h)
        }
    };
    let mut flagged = vec![false; n];
    let mut prev = deriv(0);
    flagged[0] = prev.abs() < STABLE_THRESHOLD;
    for i in 1..n {
        let d = deriv(i);
        if d.abs() < STABLE_THRESHOLD || d.signum() != prev.signum() {
            flagged[i] = true;
            if d.signum() != prev.signum() {
                flagged[i - 1] = true;
            }
        }
        prev = d;
    }
    let mut intervals = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..n {
        match (flagged[i], start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                intervals.push((scan.r[s], scan.r[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        intervals.push((scan.r[s], scan.r[n - 1]));
    }
    Ok(intervals)
}

/// A pair of distinct orbits whose primitive lengths collide within `tol`.
#[derive(Debug, Clone, Serialize)]
pub struct LengthCollision {
    pub first: usize,
    pub second: usize,
    pub gap: f64,
}

/// Report all pairs of orbits with |T1 - T2| < tol (duplicates included).
pub fn nondegeneracy_report(orbits: &[PeriodicOrbit], tol: f64) -> Vec<LengthCollision> {
    let mut idx: Vec<usize> = (0..orbits.len()).collect();
    idx.sort_by(|&a, &b| {
        orbits[a]
            .primitive_length
            .partial_cmp(&orbits[b].primitive_length)
            .unwrap()
    });
    let mut out = Vec::new();
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            let gap = orbits[idx[j]].primitive_length - orbits[idx[i]].primitive_length;
            if gap < tol {
                out.push(LengthCollision {
                    first: idx[i].min(idx[j]),
                    second: idx[i].max(idx[j]),
                    gap: gap.abs(),
                });
            } else {
                break;
            }
        }
    }
    out.sort_by(|a, b| (a.first, a.second).cmp(&(b.first, b.second)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ball() -> RadialModel {
        RadialModel::constant(0.0, 3, 1.0).unwrap()
    }

    #[test]
    fn periodic_radii_closed_forms() {
        let m = ball();
        let r = find_periodic_radii(&m, 1, 3).unwrap();
        assert_eq!(r.len(), 1);
        assert_relative_eq!(r[0], 0.5, max_relative = 1e-10);
        let r = find_periodic_radii(&m, 2, 5).unwrap();
        assert_relative_eq!(r[0], (2.0 * PI / 5.0).cos(), max_relative = 1e-10);
        // alpha = pi/2 only in the r -> 0 limit: no interior root.
        assert!(find_periodic_radii(&m, 1, 2).unwrap().is_empty());
        assert!(find_periodic_radii(&m, 2, 4).is_err()); // not coprime
    }

    #[test]
    fn star_polygon_lengths() {
        let m = ball();
        let orbits = enumerate_lsp(&m, 5).unwrap();
        let find = |mm: u32, nn: u32| {
            orbits
                .iter()
                .find(|o| o.m == mm && o.n == nn)
                .unwrap_or_else(|| panic!("({mm},{nn}) missing"))
        };
        assert_relative_eq!(
            find(1, 3).primitive_length,
            3.0 * 3f64.sqrt(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            find(2, 5).primitive_length,
            10.0 * (2.0 * PI / 5.0).sin(),
            max_relative = 1e-10
        );
        // diameter as the explicit limit orbit
        let d = find(1, 2);
        assert_relative_eq!(d.primitive_length, 4.0, max_relative = 1e-10);
        assert_eq!(d.stability, Stability::Stable);
        // definition re-check: n alpha(r) = pi m
        for o in orbits.iter().filter(|o| o.parameter > 0.0) {
            let a = rays::alpha(&m, o.parameter).unwrap();
            assert!((a * o.n as f64 - PI * o.m as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn reflecting_enumeration() {
        let m = RadialModel::constant(0.2, 3, 1.0).unwrap();
        let radial = radial_orbit(&m).unwrap();
        assert_relative_eq!(radial.primitive_length, 1.6, max_relative = 1e-12);

        let m5 = RadialModel::constant(0.5, 3, 1.0).unwrap();
        // request the angle B(0.3) = acos(0.3) - acos(0.6); root must be 0.3
        let target = 0.3f64.acos() - 0.6f64.acos();
        let z = roots::brent(
            |z| {
                rays::reflecting_angle(&m5, z)
                    .map(|(b, _)| b - target)
                    .unwrap_or(f64::NAN)
            },
            1e-9,
            0.5 - 1e-8,
            1e-15,
            200,
            "test",
        )
        .unwrap();
        assert_relative_eq!(z, 0.3, max_relative = 1e-10);

        // injectivity: one orbit per (m, n)
        let orbits = enumerate_lsp_reflecting(&m, 8, false).unwrap();
        let mut seen = std::collections::HashSet::new();
        for o in &orbits {
            assert!(seen.insert((o.m, o.n)), "duplicate ({}, {})", o.m, o.n);
            assert_eq!(o.kind, Regime::Reflecting);
        }
        assert!(enumerate_lsp_reflecting(&ball(), 5, false).is_err());
    }

    #[test]
    fn conjugacy_scan_clean_models() {
        let m = ball();
        assert!(conjugacy_scan(&m, 2048).unwrap().is_empty());
        let lin = RadialModel::polynomial(0.2, 3, vec![2.0, -1.0]).unwrap();
        assert!(conjugacy_scan(&lin, 1 << 14).unwrap().is_empty());
    }

    #[test]
    fn collision_report() {
        let m = ball();
        let mut orbits = enumerate_lsp(&m, 6).unwrap();
        assert!(nondegeneracy_report(&orbits, 1e-6).is_empty());
        let dup = orbits[0].clone();
        orbits.push(dup);
        assert!(!nondegeneracy_report(&orbits, 1e-6).is_empty());
        let all = nondegeneracy_report(&orbits, f64::INFINITY);
        let n = orbits.len();
        assert_eq!(all.len(), n * (n - 1) / 2);
    }
}

