//! Per-ray kinematics: the radial slowness beta, turning radii, epicentral
//! angles, travel times, multi-bounce phase delays, and sampled ray paths.
//!
//! All diving-ray integrals carry an inverse-square-root singularity at the
//! turning point. They are computed after the substitution
//! u^2 = rho(r)^2 - p^2 in the Herglotz coordinate rho = r/c, which removes
//! the singularity exactly:
//!
//!   L      = int w_time du,   w_time  = rho / (r rho')
//!   alpha  = int w_angle du,  w_angle = p / (r rho rho')
//!   int beta dr = int w_phase du, w_phase = u^2 / (r rho rho')
//!
//! with r = rho^{-1}( sqrt(u^2 + p^2) ). The same kernels evaluate the
//! reflecting-ray quantities with a strictly positive lower limit.

use crate::error::{Error, Result};
use crate::model::RadialModel;
use crate::num::{cheb, quad};
use serde::{Deserialize, Serialize};

/// Momentum margin excluding the regime boundaries.
pub const P_MARGIN: f64 = 1e-9;

/// Ray regime, split by angular momentum p: diving rays turn at an interior
/// radius; reflecting rays bounce off the inner boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Diving,
    Reflecting,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Diving => write!(f, "diving"),
            Regime::Reflecting => write!(f, "reflecting"),
        }
    }
}

/// Kinematic record of the maximal geodesic with tip radius `r_tip`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeodesicSummary {
    pub r_tip: f64,
    /// Angular momentum p = rho(r_tip).
    pub p: f64,
    /// Turning radius; equals `r_tip` for diving rays.
    pub turning_radius: f64,
    /// Half epicentral angle alpha(r_tip), radians.
    pub alpha: f64,
    /// Half travel time L(r_tip).
    pub half_length: f64,
    /// d alpha / d r_tip.
    pub alpha_prime: f64,
}

/// One branch of the multi-bounce phase-delay expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DebyeDelay {
    pub regime: Regime,
    /// Branch index i >= 1.
    pub index: u32,
    pub tau: f64,
    /// Caustic counter feeding the KMAH index (0 for reflecting branches).
    pub caustic_count: u32,
}

/// Point on a sampled ray path.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
}

/// Diving momentum window (rho(R), rho(1)); closed at 0 when R = 0.
pub fn diving_window(model: &RadialModel) -> (f64, f64) {
    (model.rho(model.inner_radius()), model.rho(1.0))
}

/// Reflecting momentum window (0, rho(R)); empty when R = 0.
pub fn reflecting_window(model: &RadialModel) -> (f64, f64) {
    (0.0, model.rho(model.inner_radius()))
}

/// Radial slowness beta(r; p) = sqrt(c^-2 - p^2 / r^2). Errors in the
/// evanescent region where the discriminant is negative.
pub fn beta(model: &RadialModel, r: f64, p: f64) -> Result<f64> {
    let (c, _) = model.speed(r)?;
    let disc = 1.0 / (c * c) - p * p / (r * r);
    if disc < -1e-14 / (c * c) {
        return Err(Error::Evanescent { r, p });
    }
    Ok(disc.max(0.0).sqrt())
}

/// Turning radius R*(p): the unique zero of beta(.; p), i.e. rho(R*) = p.
pub fn turning_radius(model: &RadialModel, p: f64) -> Result<f64> {
    let (lo, hi) = diving_window(model);
    let r0 = model.inner_radius();
    let p_lo = if r0 == 0.0 { 0.0 } else { lo + P_MARGIN };
    if p < p_lo || p > hi - P_MARGIN {
        return Err(Error::OutsideRegime {
            regime: "diving",
            p,
            lo,
            hi,
        });
    }
    model.rho_inverse(p)
}

enum Weight<'a> {
    Angle,
    Time,
    Phase,
    Abel(&'a dyn Fn(f64) -> f64),
}

/// Integrate the regularized kernel over u in [u(r_lo), u(r_hi)] at momentum p.
///
/// For p > 0 a second substitution u = p sinh(s) is applied: it absorbs the
/// width-p layer the kernels develop near the tip when the momentum is
/// small, leaving integrands that are smooth uniformly in p.
fn u_integral(model: &RadialModel, p: f64, r_lo: f64, r_hi: f64, w: Weight) -> Result<f64> {
    debug_assert!(r_lo <= r_hi);
    let u_at = |r: f64| {
        let rho = model.rho(r);
        (rho * rho - p * p).max(0.0).sqrt()
    };
    let (u_lo, u_hi) = (u_at(r_lo), u_at(r_hi));
    let eval = |u: f64, q: f64| {
        // q = sqrt(u^2 + p^2) = rho(r); the caller supplies it exactly.
        let r = model.rho_inverse(q).unwrap_or(r_hi);
        let rho_p = model.rho_prime(r);
        match &w {
            Weight::Angle => p / (r * q * rho_p),
            Weight::Time => q / (r * rho_p),
            Weight::Phase => u * u / (r * q * rho_p),
            Weight::Abel(g) => {
                let c = r / q; // c = r / rho
                g(r) / (c * rho_p)
            }
        }
    };
    if p > 1e-10 {
        let s_lo = (u_lo / p).asinh();
        let s_hi = (u_hi / p).asinh();
        quad::integrate_ray(
            |s: f64| {
                let u = p * s.sinh();
                let q = p * s.cosh();
                eval(u, q) * q
            },
            s_lo,
            s_hi,
        )
    } else {
        quad::integrate_ray(|u: f64| eval(u, (u * u + p * p).sqrt()), u_lo, u_hi)
    }
}

/// Phase integral int_a^b beta(r; p) dr (a <= b), regularized at a turning
/// point endpoint.
pub fn phase_segment(model: &RadialModel, p: f64, a: f64, b: f64) -> Result<f64> {
    u_integral(model, p, a, b, Weight::Phase)
}

/// Travel-time integral int_a^b dr / (c^2 beta) (a <= b), same
/// regularization.
pub fn time_segment(model: &RadialModel, p: f64, a: f64, b: f64) -> Result<f64> {
    u_integral(model, p, a, b, Weight::Time)
}

/// Evanescent phase integral int_a^b |beta| dr below the turning radius,
/// where beta^2 < 0. Regularized by v^2 = p^2 - rho(r)^2, the mirror of the
/// oscillatory-side substitution.
pub fn evanescent_segment(model: &RadialModel, p: f64, a: f64, b: f64) -> Result<f64> {
    debug_assert!(a <= b);
    // The decay integral diverges logarithmically towards the centre of a
    // ball; clamp just above it (the Airy factor has long underflowed).
    let a = a.max(model.inner_radius()).max(1e-9);
    let v_at = |r: f64| {
        let rho = model.rho(r);
        (p * p - rho * rho).max(0.0).sqrt()
    };
    let (v_hi, v_lo) = (v_at(a), v_at(b)); // v decreases with r
    quad::integrate(
        |v: f64| {
            let q = (p * p - v * v).max(0.0).sqrt();
            let r = model.rho_inverse(q).expect("in range");
            v * v / (r * q.max(1e-300) * model.rho_prime(r))
        },
        v_lo,
        v_hi,
        1e-9,
        1e-12,
        quad::RAY_MAX_PANELS,
    )
}

/// Half epicentral angle alpha(r_tip).
pub fn alpha(model: &RadialModel, r_tip: f64) -> Result<f64> {
    let p = check_tip(model, r_tip)?;
    u_integral(model, p, r_tip, 1.0, Weight::Angle)
}

/// Half travel time L(r_tip).
pub fn half_length(model: &RadialModel, r_tip: f64) -> Result<f64> {
    let p = check_tip(model, r_tip)?;
    u_integral(model, p, r_tip, 1.0, Weight::Time)
}

/// Weighted ray integral int f ds/c along the upgoing leg from r_tip to the
/// boundary (the Abel-transform kernel without its 2 n0 prefactor).
pub fn abel_leg(model: &RadialModel, r_tip: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let p = check_tip(model, r_tip)?;
    u_integral(model, p, r_tip, 1.0, Weight::Abel(f))
}

fn check_tip(model: &RadialModel, r_tip: f64) -> Result<f64> {
    let (lo, hi) = diving_window(model);
    let p = model.rho(r_tip);
    let p_lo = if model.inner_radius() == 0.0 {
        0.0
    } else {
        lo + P_MARGIN
    };
    if r_tip <= model.inner_radius() || p < p_lo || p > hi - P_MARGIN {
        return Err(Error::OutsideRegime {
            regime: "diving",
            p,
            lo,
            hi,
        });
    }
    Ok(p)
}

/// d alpha / d r_tip by spectral differentiation of alpha on a local
/// Chebyshev window, the window shrinking near the domain ends so the
/// boundary square-root behaviour stays outside it.
pub fn alpha_prime(model: &RadialModel, r_tip: f64) -> Result<f64> {
    let r_in = model.inner_radius();
    let span = 1.0 - r_in;
    let mut half = 0.02 * span;
    half = half.min(0.2 * (1.0 - r_tip));
    half = half.min(0.45 * (r_tip - r_in));
    if !(half > 1e-7 * span) {
        return Err(Error::OutOfDomain {
            r: r_tip,
            lo: r_in,
            hi: 1.0,
        });
    }
    // alpha() cannot fail strictly inside the window by the checks above.
    let f = |r: f64| alpha(model, r).unwrap_or(f64::NAN);
    let d = cheb::derivative_at(f, r_tip, half, 16);
    if !d.is_finite() {
        return Err(Error::Invalid(format!(
            "alpha' evaluation failed near r = {r_tip}"
        )));
    }
    Ok(d)
}

/// Full kinematic summary of the diving ray with the given tip radius.
pub fn geodesic_summary(model: &RadialModel, r_tip: f64) -> Result<GeodesicSummary> {
    let p = check_tip(model, r_tip)?;
    Ok(GeodesicSummary {
        r_tip,
        p,
        turning_radius: r_tip,
        alpha: alpha(model, r_tip)?,
        half_length: half_length(model, r_tip)?,
        alpha_prime: alpha_prime(model, r_tip)?,
    })
}

fn check_reflecting(model: &RadialModel, z: f64, allow_radial: bool) -> Result<()> {
    let (lo, hi) = reflecting_window(model);
    if hi <= 0.0 {
        return Err(Error::NoInnerBoundary);
    }
    let z_lo = if allow_radial { -0.0 } else { 0.0 };
    if z < z_lo || (!allow_radial && z == 0.0) || z > hi - P_MARGIN {
        return Err(Error::OutsideRegime {
            regime: "reflecting",
            p: z,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Angular advance B(z) of one boundary-to-boundary reflecting leg, and its
/// derivative dB/dz (> 0, so B is invertible).
pub fn reflecting_angle(model: &RadialModel, z: f64) -> Result<(f64, f64)> {
    let b = reflecting_angle_only(model, z)?;
    // dB/dz in the u coordinate: int 1/(c rho' u^2) du; the lower limit is
    // strictly positive inside the window (dB blows up only at its edge).
    let r_in = model.inner_radius();
    let u_at = |r: f64| {
        let rho = model.rho(r);
        (rho * rho - z * z).max(0.0).sqrt()
    };
    let db = quad::integrate_ray(
        |u: f64| {
            let q = (u * u + z * z).sqrt();
            let r = model.rho_inverse(q).expect("in range");
            let (c, _) = model.speed(r).expect("in domain");
            1.0 / (c * model.rho_prime(r) * u * u)
        },
        u_at(r_in),
        u_at(1.0),
    )?;
    Ok((b, db))
}

/// B(z) alone; used by the root solvers, which do not need the derivative.
pub fn reflecting_angle_only(model: &RadialModel, z: f64) -> Result<f64> {
    check_reflecting(model, z, false)?;
    u_integral(model, z, model.inner_radius(), 1.0, Weight::Angle)
}

/// Travel time of one reflecting leg from the inner to the outer boundary.
pub fn leg_time(model: &RadialModel, z: f64) -> Result<f64> {
    check_reflecting(model, z, true)?;
    u_integral(model, z, model.inner_radius(), 1.0, Weight::Time)
}

/// Phase delay of one full return: a complete dive (diving) or one descent
/// plus ascent between the boundaries (reflecting). This is tau(p) whose
/// p-derivatives carry the geometric spreading of the trace singularities.
pub fn round_trip_delay(model: &RadialModel, regime: Regime, p: f64) -> Result<f64> {
    let base = base_radius(model, regime, p)?;
    Ok(2.0 * phase_segment(model, p, base, 1.0)?)
}

fn base_radius(model: &RadialModel, regime: Regime, p: f64) -> Result<f64> {
    match regime {
        Regime::Diving => turning_radius(model, p),
        Regime::Reflecting => {
            check_reflecting(model, p, true)?;
            Ok(model.inner_radius())
        }
    }
}

/// Multi-bounce phase delay tau_i(r, r0; p) with its caustic counter N_i.
///
/// Branches cycle with period four: tau_{i+4} = tau_i + one full return,
/// and the diving caustic counters advance as 0,1,0,1 then +1 per cycle.
pub fn debye_delay(
    model: &RadialModel,
    regime: Regime,
    index: u32,
    r: f64,
    r0: f64,
    p: f64,
) -> Result<DebyeDelay> {
    if index < 1 {
        return Err(Error::Invalid("Debye branch index starts at 1".into()));
    }
    let base = base_radius(model, regime, p)?;
    for &x in &[r, r0] {
        if x < base - 1e-12 || x > 1.0 + 1e-12 {
            return Err(Error::OutOfDomain {
                r: x,
                lo: base,
                hi: 1.0,
            });
        }
    }
    let (ra, rb) = if r <= r0 { (r, r0) } else { (r0, r) };
    let tau1 = phase_segment(model, p, ra, rb)?;
    let cycle = (index - 1) / 4;
    let pos = (index - 1) % 4; // 0-based within the cycle
    let full = phase_segment(model, p, base, 1.0)?;
    let tau = match pos {
        0 => tau1,
        1 => phase_segment(model, p, base, r0)? + phase_segment(model, p, base, r)?,
        2 => phase_segment(model, p, r0, 1.0)? + phase_segment(model, p, r, 1.0)?,
        _ => full - tau1,
    } + 2.0 * cycle as f64 * full;
    let caustic_count = match regime {
        Regime::Reflecting => 0,
        Regime::Diving => [0u32, 1, 0, 1][pos as usize] + cycle,
    };
    Ok(DebyeDelay {
        regime,
        index,
        tau,
        caustic_count,
    })
}

/// Sample a ray path as (t, r, theta) triples at uniform times.
///
/// Diving rays (`parameter` = tip radius) run boundary-to-boundary through
/// the tip; the descending half is computed in the regularized u coordinate
/// and the ascent is its mirror image, so the turning point is crossed by
/// symmetry. Reflecting rays (`parameter` = angular momentum z, z = 0 being
/// the radial ray) run from the inner to the outer boundary.
pub fn ray_path(
    model: &RadialModel,
    kind: Regime,
    parameter: f64,
    samples: usize,
) -> Result<Vec<PathSample>> {
    let samples = samples.max(3);
    match kind {
        Regime::Diving => diving_path(model, parameter, samples),
        Regime::Reflecting => reflecting_path(model, parameter, samples),
    }
}

fn diving_path(model: &RadialModel, r_tip: f64, samples: usize) -> Result<Vec<PathSample>> {
    let p = check_tip(model, r_tip)?;
    let rho1 = model.rho(1.0);
    let u_max = (rho1 * rho1 - p * p).max(0.0).sqrt();
    let cells = (8 * samples).max(2048);
    // March outward from the tip accumulating time and angle.
    let mut ts = Vec::with_capacity(cells + 1);
    let mut ths = Vec::with_capacity(cells + 1);
    let mut rs = Vec::with_capacity(cells + 1);
    ts.push(0.0);
    ths.push(0.0);
    rs.push(r_tip);
    let mut t_acc = 0.0;
    let mut th_acc = 0.0;
    for j in 1..=cells {
        let ua = u_max * (j - 1) as f64 / cells as f64;
        let ub = u_max * j as f64 / cells as f64;
        t_acc += u_integral_raw(model, p, ua, ub, false)?;
        th_acc += u_integral_raw(model, p, ua, ub, true)?;
        let q = (ub * ub + p * p).sqrt();
        ts.push(t_acc);
        ths.push(th_acc);
        rs.push(model.rho_inverse(q)?);
    }
    let half_t = t_acc;
    let half_th = th_acc;
    // Assemble the full chord: down-leg is the mirror of the march.
    let n = ts.len();
    let mut t_full = Vec::with_capacity(2 * n - 1);
    let mut r_full = Vec::with_capacity(2 * n - 1);
    let mut th_full = Vec::with_capacity(2 * n - 1);
    for j in (1..n).rev() {
        t_full.push(half_t - ts[j]);
        r_full.push(rs[j]);
        th_full.push(half_th - ths[j]);
    }
    for j in 0..n {
        t_full.push(half_t + ts[j]);
        r_full.push(rs[j]);
        th_full.push(half_th + ths[j]);
    }
    Ok(resample(&t_full, &r_full, &th_full, samples))
}

fn reflecting_path(model: &RadialModel, z: f64, samples: usize) -> Result<Vec<PathSample>> {
    check_reflecting(model, z, true)?;
    let r_in = model.inner_radius();
    let cells = (4 * samples).max(1024);
    let mut t_full = vec![0.0];
    let mut r_full = vec![r_in];
    let mut th_full = vec![0.0];
    let mut t_acc = 0.0;
    let mut th_acc = 0.0;
    for j in 1..=cells {
        let ra = r_in + (1.0 - r_in) * (j - 1) as f64 / cells as f64;
        let rb = r_in + (1.0 - r_in) * j as f64 / cells as f64;
        let dt = quad::integrate_ray(
            |r: f64| {
                let (c, _) = model.speed(r).expect("in domain");
                1.0 / (c * c * beta_unchecked(model, r, z))
            },
            ra,
            rb,
        )?;
        let dth = if z == 0.0 {
            0.0
        } else {
            quad::integrate_ray(
                |r: f64| z / (r * r * beta_unchecked(model, r, z)),
                ra,
                rb,
            )?
        };
        t_acc += dt;
        th_acc += dth;
        t_full.push(t_acc);
        r_full.push(rb);
        th_full.push(th_acc);
    }
    Ok(resample(&t_full, &r_full, &th_full, samples))
}

fn beta_unchecked(model: &RadialModel, r: f64, p: f64) -> f64 {
    let (c, _) = model.speed(r).expect("in domain");
    (1.0 / (c * c) - p * p / (r * r)).max(0.0).sqrt()
}

fn u_integral_raw(model: &RadialModel, p: f64, ua: f64, ub: f64, angle: bool) -> Result<f64> {
    let eval = |_u: f64, q: f64| {
        let r = model.rho_inverse(q).expect("in range");
        let rho_p = model.rho_prime(r);
        if angle {
            p / (r * q * rho_p)
        } else {
            q / (r * rho_p)
        }
    };
    if p > 1e-10 {
        quad::integrate_ray(
            |s: f64| {
                let u = p * s.sinh();
                let q = p * s.cosh();
                eval(u, q) * q
            },
            (ua / p).asinh(),
            (ub / p).asinh(),
        )
    } else {
        quad::integrate_ray(|u: f64| eval(u, (u * u + p * p).sqrt()), ua, ub)
    }
}

fn resample(t: &[f64], r: &[f64], th: &[f64], samples: usize) -> Vec<PathSample> {
    use crate::num::pchip::Pchip;
    // Duplicate-free strictly increasing time base for interpolation.
    let mut tt = Vec::with_capacity(t.len());
    let mut rr = Vec::with_capacity(t.len());
    let mut hh = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        if i == 0 || t[i] > *tt.last().unwrap() + 1e-15 {
            tt.push(t[i]);
            rr.push(r[i]);
            hh.push(th[i]);
        }
    }
    let pr = Pchip::new(tt.clone(), rr);
    let pth = Pchip::new(tt.clone(), hh);
    let t_end = *tt.last().unwrap();
    (0..samples)
        .map(|i| {
            let ti = t_end * i as f64 / (samples - 1) as f64;
            PathSample {
                t: ti,
                r: pr.eval(ti).0,
                theta: pth.eval(ti).0,
            }
        })
        .collect()
}
