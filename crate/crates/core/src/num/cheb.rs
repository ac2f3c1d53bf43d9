//! Chebyshev interpolation on a local window, used to differentiate functions
//! that are only available through quadrature (e.g. the epicentral angle).

/// Differentiate `f` at `x0` by sampling it on a degree-`n` Chebyshev grid
/// over `[x0 - half, x0 + half]` and applying the spectral differentiation
/// matrix row at the window centre. `n` must be even so the centre is a node.
pub fn derivative_at<F: Fn(f64) -> f64>(f: F, x0: f64, half: f64, n: usize) -> f64 {
    assert!(n >= 4 && n % 2 == 0);
    let m = n + 1;
    // Chebyshev-Gauss-Lobatto nodes x_j = cos(j pi / n) mapped to the window.
    let mut xs = Vec::with_capacity(m);
    let mut fs = Vec::with_capacity(m);
    for j in 0..m {
        let t = (std::f64::consts::PI * j as f64 / n as f64).cos();
        let x = x0 + half * t;
        xs.push(t);
        fs.push(f(x));
    }
    // Barycentric weights for CGL nodes: (-1)^j, halved at the ends.
    let w = |j: usize| -> f64 {
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            0.5 * s
        } else {
            s
        }
    };
    let k = n / 2; // centre node (t = 0)
    let mut acc = 0.0;
    let mut diag = 0.0;
    for j in 0..m {
        if j == k {
            continue;
        }
        let d = (w(j) / w(k)) / (xs[k] - xs[j]);
        acc += d * fs[j];
        diag -= d;
    }
    (acc + diag * fs[k]) / half
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn differentiates_smooth_functions() {
        let d = derivative_at(|x: f64| x.sin(), 0.7, 0.05, 16);
        assert_relative_eq!(d, 0.7f64.cos(), max_relative = 1e-12);
        let d = derivative_at(|x: f64| (-x).exp() * x.powi(3), 1.3, 0.1, 16);
        let exact = (-1.3f64).exp() * (3.0 * 1.3f64.powi(2) - 1.3f64.powi(3));
        assert_relative_eq!(d, exact, max_relative = 1e-11);
    }

    #[test]
    fn shrinking_window_handles_nearby_singularity() {
        // f(x) = sqrt(1 - x), derivative at 0.99 with the branch point at 1.
        let d = derivative_at(|x: f64| (1.0 - x).sqrt(), 0.99, 0.0025, 16);
        let exact = -0.5 / (1.0f64 - 0.99).sqrt();
        assert_relative_eq!(d, exact, max_relative = 1e-9);
    }
}
