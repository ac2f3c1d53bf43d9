//! Quantized mode frequencies and leading-order eigenfunctions.
//!
//! With p = k / omega, the radial quantization conditions are
//!
//!   diving:     omega * int_{R*}^1 beta(r; p) dr = (n + 5/4) pi
//!   reflecting: omega * int_{R}^1  beta(r; p) dr = (n + 1)  pi
//!
//! G(omega) = omega * I(k/omega) is strictly increasing (dG/domega =
//! I + p * angle > 0), so each overtone has at most one frequency, found by
//! bracketing G against the target and refining with Brent.

use crate::error::{Error, Result};
use crate::model::RadialModel;
use crate::num::{airy, roots};
use crate::rays::{self, Regime, P_MARGIN};
use serde::{Deserialize, Serialize};

/// An eigenfrequency record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mode {
    pub regime: Regime,
    pub overtone: u32,
    pub wavenumber: f64,
    pub omega: f64,
    /// Ray parameter p = k / omega.
    pub p: f64,
    /// Amplitude normalization (B for diving, C for reflecting modes).
    pub norm_constant: f64,
}

fn quant_offset(regime: Regime) -> f64 {
    match regime {
        Regime::Diving => 1.25,
        Regime::Reflecting => 1.0,
    }
}

fn base_radius(model: &RadialModel, regime: Regime, p: f64) -> Result<f64> {
    match regime {
        Regime::Diving => {
            if p == 0.0 && model.inner_radius() == 0.0 {
                Ok(0.0)
            } else {
                rays::turning_radius(model, p)
            }
        }
        Regime::Reflecting => Ok(model.inner_radius()),
    }
}

/// Radial phase integral int_{base}^1 beta(r; p) dr for the regime.
pub fn phase_integral(model: &RadialModel, regime: Regime, p: f64) -> Result<f64> {
    let base = base_radius(model, regime, p)?;
    rays::phase_segment(model, p, base, 1.0)
}

/// Solve the quantization condition for omega at fixed overtone and
/// wavenumber; errors when no root exists inside the regime window.
pub fn quantized_omega(model: &RadialModel, regime: Regime, n: u32, k: f64) -> Result<f64> {
    if k < 0.0 {
        return Err(Error::Invalid("wavenumber must be >= 0".into()));
    }
    let target = (n as f64 + quant_offset(regime)) * std::f64::consts::PI;
    let r_in = model.inner_radius();
    let rho_in = model.rho(r_in);
    let rho_out = model.rho(1.0);
    let g = |w: f64| w * phase_integral(model, regime, k / w).unwrap_or(f64::NAN) - target;
    match regime {
        Regime::Reflecting => {
            if rho_in <= 0.0 {
                return Err(Error::NoInnerBoundary);
            }
            if k == 0.0 {
                return Ok(target / phase_integral(model, regime, 0.0)?);
            }
            // Nudge off the window edge so the round trip k -> omega -> p
            // cannot land outside by one ulp.
            let w_lo = k / (rho_in - P_MARGIN) * (1.0 + 1e-12);
            if g(w_lo) >= 0.0 {
                // Even the steepest admissible ray exceeds the target phase:
                // the root (if any) lies in the diving window instead.
                return Err(Error::NoRoot {
                    what: format!("reflecting omega(n={n}, k={k})"),
                    lo: w_lo,
                    hi: f64::INFINITY,
                });
            }
            let hint = target / phase_integral(model, regime, 0.0)?;
            roots::brent_expanding(g, w_lo, hint.max(2.0 * w_lo), 2.0, 60, 1e-13, "omega root")
        }
        Regime::Diving => {
            if k == 0.0 {
                if r_in > 0.0 {
                    return Err(Error::OutsideRegime {
                        regime: "diving",
                        p: 0.0,
                        lo: rho_in,
                        hi: rho_out,
                    });
                }
                return Ok(target / phase_integral(model, regime, 0.0)?);
            }
            let w_lo = k / (rho_out - P_MARGIN) * (1.0 + 1e-12);
            let g_lo = g(w_lo);
            if g_lo.is_nan() || g_lo >= 0.0 {
                return Err(Error::NoRoot {
                    what: format!("diving omega(n={n}, k={k}): grazing bracket"),
                    lo: w_lo,
                    hi: w_lo,
                });
            }
            if r_in > 0.0 {
                let w_hi = k / (rho_in + P_MARGIN) * (1.0 - 1e-12);
                if g(w_hi) <= 0.0 {
                    return Err(Error::NoRoot {
                        what: format!("diving omega(n={n}, k={k}): target beyond window"),
                        lo: w_lo,
                        hi: w_hi,
                    });
                }
                roots::brent(g, w_lo, w_hi, 1e-13, 200, "omega root")
            } else {
                let hint = target / phase_integral(model, regime, 0.0)?;
                roots::brent_expanding(g, w_lo, hint.max(2.0 * w_lo), 2.0, 60, 1e-13, "omega root")
            }
        }
    }
}

/// Full mode record, including the normalization constant.
pub fn solve_omega(model: &RadialModel, regime: Regime, n: u32, k: f64) -> Result<Mode> {
    let omega = quantized_omega(model, regime, n, k)?;
    let p = k / omega;
    Ok(Mode {
        regime,
        overtone: n,
        wavenumber: k,
        omega,
        p,
        norm_constant: normalization_constant(model, regime, p)?,
    })
}

/// One cell of a dispersion grid; `mode` is None when the overtone has no
/// root in the regime window at that wavenumber.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionCell {
    pub overtone: u32,
    pub wavenumber: f64,
    pub mode: Option<Mode>,
}

pub fn dispersion_table(
    model: &RadialModel,
    regime: Regime,
    overtones: &[u32],
    wavenumbers: &[f64],
) -> Vec<DispersionCell> {
    let mut out = Vec::with_capacity(overtones.len() * wavenumbers.len());
    for &n in overtones {
        for &k in wavenumbers {
            out.push(DispersionCell {
                overtone: n,
                wavenumber: k,
                mode: solve_omega(model, regime, n, k).ok(),
            });
        }
    }
    out
}

/// Sampled dispersion branch omega_n(k) at fixed overtone.
#[derive(Debug, Clone)]
pub struct ModeCurve {
    pub regime: Regime,
    pub overtone: u32,
    pub wavenumber: Vec<f64>,
    pub omega: Vec<f64>,
}

impl ModeCurve {
    pub fn from_cells(cells: &[DispersionCell], overtone: u32) -> ModeCurve {
        let mut k = Vec::new();
        let mut w = Vec::new();
        let mut regime = Regime::Diving;
        for c in cells.iter().filter(|c| c.overtone == overtone) {
            if let Some(m) = &c.mode {
                k.push(c.wavenumber);
                w.push(m.omega);
                regime = m.regime;
            }
        }
        ModeCurve {
            regime,
            overtone,
            wavenumber: k,
            omega: w,
        }
    }
}

/// Phase speed, group speed, and ray parameter from a sampled branch:
/// c_n = omega/k, C_n = d omega/dk by local parabolic differencing,
/// p = 1/c_n. Requires k strictly inside the sampled range and k > 0.
pub fn phase_group(curve: &ModeCurve, k: f64) -> Result<(f64, f64, f64)> {
    if k <= 0.0 {
        return Err(Error::Invalid("phase speed undefined at k = 0".into()));
    }
    let ks = &curve.wavenumber;
    if ks.len() < 3 || k < ks[1] || k > ks[ks.len() - 2] {
        return Err(Error::Invalid(
            "k must be interior to the sampled dispersion branch".into(),
        ));
    }
    let i = ks
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - k)
                .abs()
                .partial_cmp(&(b.1 - k).abs())
                .unwrap()
        })
        .map(|(i, _)| i)
        .unwrap()
        .clamp(1, ks.len() - 2);
    // Parabola through the three nearest samples.
    let (x0, x1, x2) = (ks[i - 1], ks[i], ks[i + 1]);
    let (y0, y1, y2) = (curve.omega[i - 1], curve.omega[i], curve.omega[i + 1]);
    let l0 = |x: f64| (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = |x: f64| (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = |x: f64| (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
    let omega = y0 * l0(k) + y1 * l1(k) + y2 * l2(k);
    let d0 = (2.0 * k - x1 - x2) / ((x0 - x1) * (x0 - x2));
    let d1 = (2.0 * k - x0 - x2) / ((x1 - x0) * (x1 - x2));
    let d2 = (2.0 * k - x0 - x1) / ((x2 - x0) * (x2 - x1));
    let group = y0 * d0 + y1 * d1 + y2 * d2;
    let phase = omega / k;
    Ok((phase, group, 1.0 / phase))
}

/// Normalization constant of the leading-order eigenfunction: with the
/// V-normalization int V^2 c^-2 dr = 1, both regimes give (2 * half return
/// time)^{-1/2}; any density factor cancels through the substitution
/// r U = mu^{-1/2} V, so B and C depend on c alone.
pub fn normalization_constant(model: &RadialModel, regime: Regime, p: f64) -> Result<f64> {
    let base = base_radius(model, regime, p)?;
    let half_time = rays::time_segment(model, p, base, 1.0)?;
    Ok(1.0 / (2.0 * half_time).sqrt())
}

/// Leading-order eigenfunction V(r) and its radial derivative.
///
/// Diving modes use the uniform turning-point (Langer/Airy) form, valid on
/// the whole interval and exponentially small below the turning radius;
/// reflecting modes use the oscillatory two-exponential form with the
/// Neumann condition folded in at the inner boundary.
pub fn wkb_eigenfunction(model: &RadialModel, mode: &Mode, r: f64) -> Result<(f64, f64)> {
    if r < model.inner_radius() - 1e-12 || r > 1.0 + 1e-12 {
        return Err(Error::OutOfDomain {
            r,
            lo: model.inner_radius(),
            hi: 1.0,
        });
    }
    let r = r.clamp(model.inner_radius(), 1.0);
    let p = mode.p;
    let omega = mode.omega;
    match mode.regime {
        Regime::Reflecting => {
            let tau = rays::phase_segment(model, p, model.inner_radius(), r)?;
            let b = beta_signed(model, r, p).max(1e-300).sqrt();
            let c = mode.norm_constant;
            let v = 2.0 * c / b * (omega * tau).cos();
            let dv = -2.0 * c * omega * b * (omega * tau).sin();
            Ok((v, dv))
        }
        Regime::Diving => {
            let r_star = base_radius(model, Regime::Diving, p)?;
            let beta2 = beta_signed(model, r, p);
            // Langer variable zeta: negative on the oscillatory side.
            let (zeta, zeta_prime, pref) = if (r - r_star).abs() < 1e-9 {
                // Turning-point limit: zeta/( -beta^2 ) -> (omega^2 a0)^{1/3} / a0.
                let h = 1e-6;
                let a0 = (beta_signed(model, (r_star + h).min(1.0), p)
                    - beta_signed(model, (r_star - h).max(model.inner_radius()), p))
                    / (2.0 * h);
                let q = (omega * omega * a0).powf(1.0 / 3.0) / a0;
                (0.0, -(omega * omega * a0).powf(1.0 / 3.0), q.powf(0.25))
            } else if r > r_star {
                let phi = rays::phase_segment(model, p, r_star, r)?;
                let zeta = -(1.5 * omega * phi).powf(2.0 / 3.0);
                let q = -zeta / beta2;
                (zeta, -omega * beta2.sqrt() / (-zeta).sqrt(), q.powf(0.25))
            } else {
                let phi = rays::evanescent_segment(model, p, r, r_star)?;
                let zeta = (1.5 * omega * phi).powf(2.0 / 3.0);
                let q = zeta / (-beta2);
                (zeta, omega * (-beta2).sqrt() / zeta.sqrt(), q.powf(0.25))
            };
            let (ai, aip) = airy::airy_ai(zeta);
            let scale = 2.0 * std::f64::consts::PI.sqrt() * mode.norm_constant;
            let v = scale * pref * ai;
            let dv = scale * pref * aip * zeta_prime;
            Ok((v, dv))
        }
    }
}

fn beta_signed(model: &RadialModel, r: f64, p: f64) -> f64 {
    let (c, _) = model.speed(r).expect("in domain");
    1.0 / (c * c) - p * p / (r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ball() -> RadialModel {
        RadialModel::constant(0.0, 3, 1.0).unwrap()
    }

    fn annulus() -> RadialModel {
        RadialModel::constant(0.2, 3, 1.0).unwrap()
    }

    #[test]
    fn zero_wavenumber_closed_forms() {
        let m = annulus();
        let mode = solve_omega(&m, Regime::Reflecting, 0, 0.0).unwrap();
        assert_relative_eq!(mode.omega, PI / 0.8, max_relative = 1e-12);
        let b = ball();
        let mode = solve_omega(&b, Regime::Diving, 0, 0.0).unwrap();
        assert_relative_eq!(mode.omega, 1.25 * PI, max_relative = 1e-12);
        // k = 0 sits in the reflecting window when R > 0
        assert!(solve_omega(&m, Regime::Diving, 0, 0.0).is_err());
    }

    #[test]
    fn diving_residual_against_closed_form_phase() {
        let b = ball();
        for &(n, k) in &[(0u32, 20.0), (3, 50.0), (10, 100.0)] {
            let mode = solve_omega(&b, Regime::Diving, n, k).unwrap();
            let p = mode.p;
            let phase = (1.0 - p * p).sqrt() - p * p.acos();
            let resid = (mode.omega * phase - (n as f64 + 1.25) * PI).abs();
            assert!(resid < 1e-10, "residual {resid:e} at n={n} k={k}");
        }
    }

    #[test]
    fn omega_monotone_in_overtone_and_wavenumber() {
        let m = annulus();
        // At k = 12 the first reflecting overtone is n = 13; lower ones sit
        // in the diving window and must be refused.
        assert!(quantized_omega(&m, Regime::Reflecting, 0, 12.0).is_err());
        let mut prev = 0.0;
        for n in 13..19 {
            let w = quantized_omega(&m, Regime::Reflecting, n, 12.0).unwrap();
            assert!(w > prev);
            prev = w;
        }
        let w1 = quantized_omega(&m, Regime::Reflecting, 13, 10.0).unwrap();
        let w2 = quantized_omega(&m, Regime::Reflecting, 13, 12.0).unwrap();
        assert!(w2 > w1);
        let w1 = quantized_omega(&m, Regime::Diving, 2, 25.0).unwrap();
        let w2 = quantized_omega(&m, Regime::Diving, 2, 30.0).unwrap();
        assert!(w2 > w1);
    }

    #[test]
    fn dispersion_table_sparsity_and_curves() {
        let m = annulus();
        let ks: Vec<f64> = (0..=20).map(|i| 2.0 + i as f64).collect();
        let cells = dispersion_table(&m, Regime::Diving, &[0, 1, 2], &ks);
        assert!(cells.iter().any(|c| c.mode.is_none())); // low k has no diving root
        assert!(cells.iter().any(|c| c.mode.is_some()));
        for c in cells.iter().filter_map(|c| c.mode.as_ref()) {
            let (lo, hi) = rays::diving_window(&m);
            assert!(c.p > lo && c.p < hi, "regime leakage p = {}", c.p);
        }
    }

    #[test]
    fn phase_group_identities() {
        let m = annulus();
        let ks: Vec<f64> = (0..=40).map(|i| 20.0 + 0.5 * i as f64).collect();
        let cells = dispersion_table(&m, Regime::Diving, &[2], &ks);
        let curve = ModeCurve::from_cells(&cells, 2);
        assert!(curve.wavenumber.len() > 10);
        let k = 30.0;
        let (c_n, group, p) = phase_group(&curve, k).unwrap();
        let mode = solve_omega(&m, Regime::Diving, 2, k).unwrap();
        assert_relative_eq!(p, mode.p, max_relative = 1e-9);
        assert_relative_eq!(c_n, mode.omega / k, max_relative = 1e-9);
        // group speed oracle: domega/dk = angle / travel time along the ray
        let r_star = rays::turning_radius(&m, mode.p).unwrap();
        let a = rays::alpha(&m, r_star).unwrap();
        let l = rays::half_length(&m, r_star).unwrap();
        assert_relative_eq!(group, a / l, max_relative = 1e-5);
        assert!(phase_group(&curve, 0.0).is_err());
        // quantization round trip through p = 1/c_n
        let resid = (mode.omega * phase_integral(&m, Regime::Diving, 1.0 / c_n).unwrap()
            - 3.25 * PI)
            .abs();
        assert!(resid < 1e-8);
    }

    #[test]
    fn normalization_closed_forms() {
        let b = ball();
        let nb = normalization_constant(&b, Regime::Diving, 0.0).unwrap();
        assert_relative_eq!(nb, 1.0 / 2f64.sqrt(), max_relative = 1e-11);
        let m = annulus();
        let nc = normalization_constant(&m, Regime::Reflecting, 0.0).unwrap();
        assert_relative_eq!(nc, 1.0 / 1.6f64.sqrt(), max_relative = 1e-11);
        // time dilation c -> c/2 doubles T and scales the constant by 2^{-1/2}
        let slow = RadialModel::constant(0.2, 3, 0.5).unwrap();
        let ns = normalization_constant(&slow, Regime::Reflecting, 0.0).unwrap();
        assert_relative_eq!(ns, nc / 2f64.sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn eigenfunction_boundary_and_shape() {
        let m = annulus();
        // reflecting mode with k = 0: V ~ cos(omega (r - R))
        let mode = solve_omega(&m, Regime::Reflecting, 40, 0.0).unwrap();
        let omega = mode.omega;
        assert!(omega > 100.0);
        let mut max_v = 0.0f64;
        for i in 0..=200 {
            let r = 0.2 + 0.8 * i as f64 / 200.0;
            let (v, _) = wkb_eigenfunction(&m, &mode, r).unwrap();
            max_v = max_v.max(v.abs());
            let expect = 2.0 * mode.norm_constant * (omega * (r - 0.2)).cos();
            assert_relative_eq!(v, expect, epsilon = 1e-8 * omega);
        }
        let (_, dv1) = wkb_eigenfunction(&m, &mode, 1.0).unwrap();
        assert!(dv1.abs() / (omega * max_v) < 0.05, "Neumann at outer boundary");

        // diving mode: exponentially small below the turning radius,
        // continuous across it, near-Neumann at the boundary.
        let b = ball();
        let mode = solve_omega(&b, Regime::Diving, 8, 60.0).unwrap();
        let r_star = rays::turning_radius(&b, mode.p).unwrap();
        let (v_lo, _) = wkb_eigenfunction(&b, &mode, 0.5 * r_star).unwrap();
        let mut max_v = 0.0f64;
        for i in 0..=300 {
            let r = 0.05 + 0.95 * i as f64 / 300.0;
            let (v, _) = wkb_eigenfunction(&b, &mode, r).unwrap();
            max_v = max_v.max(v.abs());
        }
        assert!(v_lo.abs() < 1e-8 * max_v, "evanescent tail");
        let (vm, _) = wkb_eigenfunction(&b, &mode, r_star - 1e-7).unwrap();
        let (vp, _) = wkb_eigenfunction(&b, &mode, r_star + 1e-7).unwrap();
        assert_relative_eq!(vm, vp, max_relative = 1e-3);
        let (_, dv1) = wkb_eigenfunction(&b, &mode, 1.0).unwrap();
        assert!(dv1.abs() / (mode.omega * max_v) < 0.05);
    }

    #[test]
    fn weyl_count_slope() {
        // Mode count in [0, omega_max] at fixed k grows with slope I(0)/pi.
        let m = annulus();
        let k = 30.0;
        let count = |omega_max: f64| -> usize {
            let mut c = 0;
            for regime in [Regime::Diving, Regime::Reflecting] {
                let mut found = false;
                for n in 0..2000u32 {
                    match quantized_omega(&m, regime, n, k) {
                        Ok(w) => {
                            found = true;
                            if w <= omega_max {
                                c += 1;
                            } else {
                                break;
                            }
                        }
                        // low overtones may sit in the other regime
                        Err(_) if !found => continue,
                        Err(_) => break,
                    }
                }
            }
            c
        };
        let diff = count(500.0) as f64 - count(250.0) as f64;
        let slope_pred = 0.8 / PI * 250.0;
        assert!(
            (diff - slope_pred).abs() / slope_pred < 0.05,
            "got {diff}, want ~{slope_pred}"
        );
    }
}
