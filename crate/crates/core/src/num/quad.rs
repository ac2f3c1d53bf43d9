//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with a 16-point rule; the local error is
//! estimated against the embedded 8-point rule. The panel with the largest
//! error estimate is bisected until the requested tolerance is met. Nodes
//! and weights are generated once by Newton iteration on the Legendre
//! recurrence, so no tabulated constants are required.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rules {
    x16: Vec<f64>,
    w16: Vec<f64>,
    x8: Vec<f64>,
    w8: Vec<f64>,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let (x16, w16) = gauss_legendre(16);
        let (x8, w8) = gauss_legendre(8);
        Rules { x16, w16, x8, w8 }
    })
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

fn eval_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let r = rules();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s16 = 0.0;
    for (x, w) in r.x16.iter().zip(&r.w16) {
        s16 += w * f(c + h * x);
    }
    let mut s8 = 0.0;
    for (x, w) in r.x8.iter().zip(&r.w8) {
        s8 += w * f(c + h * x);
    }
    let value = s16 * h;
    let error = ((s16 - s8) * h).abs();
    Panel { a, b, value, error }
}

/// Integrate `f` over [a, b] adaptively. `rel_tol` and `abs_tol` are combined
/// as `abs_tol + rel_tol * |integral|`; `max_panels` caps the subdivision.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let first = eval_panel(&f, a, b);
    let mut total = first.value;
    let mut err = first.error;
    heap.push(first);
    let mut panels = 1usize;
    loop {
        let tol = abs_tol + rel_tol * total.abs();
        if err <= tol {
            return Ok(total);
        }
        if panels >= max_panels {
            return Err(Error::QuadratureFailure {
                achieved: err,
                requested: tol,
                panels,
            });
        }
        let worst = heap.pop().expect("heap not empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at machine resolution; accept what we have.
            heap.push(worst);
            let tol = abs_tol + rel_tol * total.abs();
            if err <= tol.max(1e-300) {
                return Ok(total);
            }
            return Err(Error::QuadratureFailure {
                achieved: err,
                requested: tol,
                panels,
            });
        }
        let left = eval_panel(&f, worst.a, mid);
        let right = eval_panel(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        err = err.max(0.0);
        heap.push(left);
        heap.push(right);
        panels += 1;
    }
}

/// Default tolerances for the phase/travel-time integrals used by the ray
/// and mode modules. These must sit well below the 1e-10 quantization
/// residual targets.
pub const RAY_REL_TOL: f64 = 1e-13;
pub const RAY_ABS_TOL: f64 = 1e-15;
pub const RAY_MAX_PANELS: usize = 4000;

pub fn integrate_ray<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    integrate(f, a, b, RAY_REL_TOL, RAY_ABS_TOL, RAY_MAX_PANELS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-14, 1e-16, 100).unwrap();
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert_relative_eq!(v, exact, max_relative = 1e-14);
    }

    #[test]
    fn exponential() {
        let v = integrate(|x| x.exp(), 0.0, 1.0, 1e-13, 1e-15, 200).unwrap();
        assert_relative_eq!(v, 1f64.exp() - 1.0, max_relative = 1e-13);
    }

    #[test]
    fn oscillatory_needs_subdivision() {
        let v = integrate(|x| (40.0 * x).sin(), 0.0, 2.0, 1e-12, 1e-14, 2000).unwrap();
        let exact = (1.0 - (80.0f64).cos()) / 40.0;
        assert_relative_eq!(v, exact, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_endpoint() {
        // Integrable endpoint singularity converges, just slowly.
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-10, 1e-12, 4000).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn reports_failure() {
        let e = integrate(|x| 1.0 / x.abs().max(1e-300), -1.0, 1.0, 1e-12, 1e-14, 50);
        assert!(matches!(e, Err(Error::QuadratureFailure { .. })));
    }
}


