//! Smoothed spectral trace: synthesize sum_{l,n} (2l+1) cos(t omega_nl)
//! with a Gaussian frequency window, detect its peaks, and compare them
//! against the geometric length spectrum.
//!
//! Angular order l enters through k = l + 1/2, so the degeneracy weight
//! 2l + 1 equals 2k. A mode contributes cos(t omega) exp(-(omega/W)^2);
//! the quadrature component sin(t omega) is accumulated alongside so peak
//! heights can be read off the phase-free envelope |sum (2l+1) e^{-i t w}|.

use crate::error::{Error, Result};
use crate::lsp::{PeriodicOrbit, Stability};
use crate::model::RadialModel;
use crate::modes::quantized_omega;
use crate::rays::{self, Regime, P_MARGIN};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One eigenfrequency entering the trace sum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceMode {
    pub regime: Regime,
    /// Angular order l; the wavenumber is k = l + 1/2.
    pub l: u32,
    pub overtone: u32,
    pub omega: f64,
}

/// Sampled smoothed trace with provenance of its mode set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSeries {
    pub t: Vec<f64>,
    /// sum (2l+1) cos(t omega) exp(-(omega/window)^2)
    pub values: Vec<f64>,
    /// magnitude of the analytic-signal sum (phase-free peak heights)
    pub envelope: Vec<f64>,
    pub window: f64,
    pub l_max: u32,
    pub omega_max: f64,
    pub n_modes: usize,
}

impl TraceSeries {
    /// Restrict to t in [t0, t1] (used to cut the t = 0 Weyl lobe before
    /// peak analysis).
    pub fn slice(&self, t0: f64, t1: f64) -> TraceSeries {
        let idx: Vec<usize> = (0..self.t.len())
            .filter(|&i| self.t[i] >= t0 && self.t[i] <= t1)
            .collect();
        TraceSeries {
            t: idx.iter().map(|&i| self.t[i]).collect(),
            values: idx.iter().map(|&i| self.values[i]).collect(),
            envelope: idx.iter().map(|&i| self.envelope[i]).collect(),
            window: self.window,
            l_max: self.l_max,
            omega_max: self.omega_max,
            n_modes: self.n_modes,
        }
    }
}

/// Solve every mode with l <= l_max (k = l + 1/2) and omega <= omega_max in
/// both regimes. Deterministic: modes are ordered by (l, regime, overtone).
pub fn build_trace_modes(
    model: &RadialModel,
    l_max: u32,
    omega_max: f64,
) -> Result<Vec<TraceMode>> {
    let per_l: Vec<Vec<TraceMode>> = (0..=l_max)
        .into_par_iter()
        .map(|l| {
            let k = l as f64 + 0.5;
            let mut out = Vec::new();
            for regime in [Regime::Diving, Regime::Reflecting] {
                if regime == Regime::Reflecting && model.inner_radius() == 0.0 {
                    continue;
                }
                let mut found = false;
                for n in 0..100_000u32 {
                    match quantized_omega(model, regime, n, k) {
                        Ok(w) => {
                            found = true;
                            if w <= omega_max {
                                out.push(TraceMode {
                                    regime,
                                    l,
                                    overtone: n,
                                    omega: w,
                                });
                            } else {
                                break;
                            }
                        }
                        // overtones below the regime window; keep looking
                        Err(_) if !found => continue,
                        Err(_) => break,
                    }
                }
            }
            out
        })
        .collect();
    Ok(per_l.into_iter().flatten().collect())
}

/// Exact windowed mode sum on the given time grid (no FFT approximation).
pub fn synth_trace(modes: &[TraceMode], t_grid: &[f64], window: f64) -> Result<TraceSeries> {
    if modes.is_empty() {
        return Err(Error::Invalid("trace needs a nonempty mode set".into()));
    }
    if !(window > 0.0) {
        return Err(Error::Invalid("smoothing width must be positive".into()));
    }
    // Precompute windowed degeneracy weights.
    let prepared: Vec<(f64, f64)> = modes
        .iter()
        .map(|m| {
            let weight = 2.0 * (m.l as f64 + 0.5);
            let g = if window.is_finite() {
                (-(m.omega / window).powi(2)).exp()
            } else {
                1.0
            };
            (weight * g, m.omega)
        })
        .collect();
    let sums: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let mut c = 0.0;
            let mut s = 0.0;
            for &(a, w) in &prepared {
                c += a * (t * w).cos();
                s += a * (t * w).sin();
            }
            (c, s)
        })
        .collect();
    let (l_max, omega_max) = modes.iter().fold((0u32, 0.0f64), |(l, w), m| {
        (l.max(m.l), w.max(m.omega))
    });
    Ok(TraceSeries {
        t: t_grid.to_vec(),
        values: sums.iter().map(|&(c, _)| c).collect(),
        envelope: sums.iter().map(|&(c, s)| (c * c + s * s).sqrt()).collect(),
        window,
        l_max,
        omega_max,
        n_modes: modes.len(),
    })
}

/// A detected trace peak.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Peak {
    pub t: f64,
    /// |values| height, parabolic refinement of the grid maximum.
    pub height: f64,
    /// Envelope height at the same location (phase-independent).
    pub envelope_height: f64,
}

/// Local maxima of |values| strictly above `threshold` * max |values|,
/// refined by a three-point parabolic fit.
pub fn detect_peaks(series: &TraceSeries, threshold: f64) -> Vec<Peak> {
    let v: Vec<f64> = series.values.iter().map(|x| x.abs()).collect();
    let max_abs = v.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        if v[i] >= v[i - 1] && v[i] >= v[i + 1] && v[i] > threshold * max_abs && v[i] > 0.0 {
            if v[i] == v[i - 1] && i >= 2 {
                continue; // plateau: keep the leftmost point only
            }
            let (t_ref, h_ref) = parabolic(&series.t, &v, i);
            let (_, e_ref) = parabolic(&series.t, &series.envelope, i);
            out.push(Peak {
                t: t_ref,
                height: h_ref,
                envelope_height: e_ref,
            });
        }
    }
    out
}

fn parabolic(t: &[f64], v: &[f64], i: usize) -> (f64, f64) {
    let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
    let den = a - 2.0 * b + c;
    if den == 0.0 {
        return (t[i], b);
    }
    let s = 0.5 * (a - c) / den;
    let h = t[i + 1] - t[i];
    (t[i] + s * h, b - 0.25 * (a - c) * s)
}

/// Predicted trace singularity from a periodic orbit and repetition count.
#[derive(Debug, Clone, Serialize)]
pub struct SingularityPrediction {
    pub kind: Regime,
    pub m: u32,
    pub n: u32,
    /// Repetition count q >= 1: the singularity sits at q * primitive length.
    pub q: u32,
    pub period: f64,
    /// Relative peak amplitude p (T#/2n) / sqrt(q n |tau''|); None for
    /// radial/degenerate orbits whose stationary point is not interior.
    pub amplitude: Option<f64>,
    /// Caustic counter of the underlying multi-bounce branch (q n for
    /// diving orbits, 0 for reflecting ones).
    pub caustic_count: u32,
    /// Second momentum derivative of the one-return delay at the orbit.
    pub tau_pp_unit: f64,
    pub tau_pp_sign: i8,
    /// Winding bookkeeping index of the contributing series term.
    pub s_index: u32,
    pub stability: Stability,
}

/// Centered second difference of the one-return delay in momentum.
fn delay_second_derivative(model: &RadialModel, regime: Regime, p: f64) -> Result<f64> {
    let (lo, hi) = match regime {
        Regime::Diving => rays::diving_window(model),
        Regime::Reflecting => rays::reflecting_window(model),
    };
    let lo = lo + 2.0 * P_MARGIN;
    let hi = hi - 2.0 * P_MARGIN;
    let h = (1e-3 * (hi - lo)).min((p - lo) / 4.0).min((hi - p) / 4.0);
    if !(h > 1e-9) {
        return Err(Error::DegenerateOrbit {
            r: p,
            alpha_prime: 0.0,
        });
    }
    let f = |x: f64| rays::round_trip_delay(model, regime, x);
    Ok((f(p + h)? - 2.0 * f(p)? + f(p - h)?) / (h * h))
}

/// Expand orbits into singularity predictions for all repetitions q with
/// q T# <= t_max. Amplitudes are leading-order and relative; the absolute
/// trace scale is a single calibration constant outside this toolkit.
pub fn predict_singularities(
    model: &RadialModel,
    orbits: &[PeriodicOrbit],
    t_max: f64,
) -> Result<Vec<SingularityPrediction>> {
    let mut out = Vec::new();
    for orbit in orbits {
        if orbit.primitive_length > t_max {
            continue;
        }
        let p = orbit.momentum(model);
        // The stationary-phase amplitude needs an interior saddle: radial
        // orbits (p = 0) and the ball diameter sit at the momentum boundary,
        // and degenerate orbits have no clean intersection.
        let interior = orbit.m >= 1 && p > 1e-6 && orbit.stability == Stability::Stable;
        let tau_pp = if interior {
            delay_second_derivative(model, orbit.kind, p).ok()
        } else {
            None
        };
        let mut q = 1u32;
        while q as f64 * orbit.primitive_length <= t_max {
            let amplitude = tau_pp.map(|tpp| {
                let nn = orbit.n as f64;
                p * (orbit.primitive_length / (2.0 * nn))
                    / (q as f64 * nn * tpp.abs()).sqrt()
            });
            out.push(SingularityPrediction {
                kind: orbit.kind,
                m: orbit.m,
                n: orbit.n,
                q,
                period: q as f64 * orbit.primitive_length,
                amplitude,
                caustic_count: match orbit.kind {
                    Regime::Diving => q * orbit.n,
                    Regime::Reflecting => 0,
                },
                tau_pp_unit: tau_pp.unwrap_or(f64::NAN),
                tau_pp_sign: match tau_pp {
                    Some(t) if t > 0.0 => 1,
                    Some(_) => -1,
                    None => 0,
                },
                s_index: 2 * q * orbit.m + 1,
                stability: orbit.stability,
            });
            q += 1;
        }
    }
    out.sort_by(|a, b| a.period.partial_cmp(&b.period).unwrap());
    Ok(out)
}

/// A prediction matched to a detected peak.
#[derive(Debug, Clone, Serialize)]
pub struct PeakMatch {
    pub prediction: usize,
    pub peak: Peak,
    pub dt: f64,
}

/// Measured-vs-predicted amplitude entry for a matched isolated peak.
#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeRow {
    pub prediction: usize,
    pub measured: f64,
    pub predicted: f64,
    /// measured / predicted; constant across rows when the leading-order
    /// amplitude model holds.
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub matched: Vec<PeakMatch>,
    /// Indices of predictions with no peak within tol_t.
    pub missing: Vec<usize>,
    /// Peaks not explained by any prediction.
    pub unexplained: Vec<Peak>,
    pub amplitude_rows: Vec<AmplitudeRow>,
    pub tol_t: f64,
}

/// Match predictions against detected peaks within `tol_t` (which should be
/// at least the smoothing resolution 2 pi / window).
pub fn match_report(
    predictions: &[SingularityPrediction],
    peaks: &[Peak],
    tol_t: f64,
) -> MatchReport {
    let mut matched = Vec::new();
    let mut missing = Vec::new();
    for (i, pred) in predictions.iter().enumerate() {
        let nearest = peaks
            .iter()
            .min_by(|a, b| {
                (a.t - pred.period)
                    .abs()
                    .partial_cmp(&(b.t - pred.period).abs())
                    .unwrap()
            })
            .copied();
        match nearest {
            Some(pk) if (pk.t - pred.period).abs() <= tol_t => matched.push(PeakMatch {
                prediction: i,
                peak: pk,
                dt: pk.t - pred.period,
            }),
            _ => missing.push(i),
        }
    }
    let unexplained: Vec<Peak> = peaks
        .iter()
        .filter(|pk| {
            !predictions
                .iter()
                .any(|pred| (pk.t - pred.period).abs() <= tol_t)
        })
        .copied()
        .collect();
    let isolated = |i: usize| -> bool {
        predictions
            .iter()
            .enumerate()
            .all(|(j, p)| j == i || (p.period - predictions[i].period).abs() > 2.0 * tol_t)
    };
    let amplitude_rows: Vec<AmplitudeRow> = matched
        .iter()
        .filter_map(|m| {
            let pred = &predictions[m.prediction];
            let a = pred.amplitude?;
            if !isolated(m.prediction) {
                return None;
            }
            Some(AmplitudeRow {
                prediction: m.prediction,
                measured: m.peak.envelope_height,
                predicted: a,
                scale: m.peak.envelope_height / a,
            })
        })
        .collect();
    MatchReport {
        matched,
        missing,
        unexplained,
        amplitude_rows,
        tol_t,
    }
}
