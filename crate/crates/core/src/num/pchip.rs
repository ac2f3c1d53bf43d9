//! Shape-preserving monotone cubic interpolation (Fritsch–Carlson).
//!
//! The interpolant is C1 and does not overshoot the data, so strictly
//! positive samples yield a strictly positive interpolant and monotone
//! data yield a monotone interpolant.

/// Monotone cubic interpolant through `(x, y)` samples.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// Build the interpolant. `x` must be strictly increasing with at least
    /// two samples.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Pchip {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2, "need at least two knots");
        for w in x.windows(2) {
            assert!(w[1] > w[0], "knots must be strictly increasing");
        }
        let n = x.len();
        let mut d = vec![0.0; n];
        if n == 2 {
            let s = (y[1] - y[0]) / (x[1] - x[0]);
            d[0] = s;
            d[1] = s;
            return Pchip { x, y, d };
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = endpoint_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = endpoint_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Pchip { x, y, d }
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    /// Interpolant value and first derivative at `t` (clamped to the knot span).
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        let i = match self
            .x
            .binary_search_by(|v| v.partial_cmp(&t).unwrap())
        {
            Ok(j) => j.min(n - 2),
            Err(j) => j.saturating_sub(1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.d[i] * h, self.d[i + 1] * h);
        // Hermite basis
        let s2 = s * s;
        let s3 = s2 * s;
        let v = y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * (s3 - s2);
        let dv = y0 * (6.0 * s2 - 6.0 * s)
            + d0 * (3.0 * s2 - 4.0 * s + 1.0)
            + y1 * (-6.0 * s2 + 6.0 * s)
            + d1 * (3.0 * s2 - 2.0 * s);
        (v, dv / h)
    }
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    // Three-point one-sided estimate with the usual monotonicity clamps.
    let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        s = 0.0;
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        s = 3.0 * d0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interpolates_knots_exactly() {
        let p = Pchip::new(vec![0.2, 0.6, 1.0], vec![1.0, 1.2, 1.5]);
        assert_relative_eq!(p.eval(0.6).0, 1.2, max_relative = 1e-15);
        assert_relative_eq!(p.eval(0.2).0, 1.0, max_relative = 1e-15);
        assert_relative_eq!(p.eval(1.0).0, 1.5, max_relative = 1e-15);
    }

    #[test]
    fn linear_data_reproduced() {
        let x: Vec<f64> = (0..9).map(|i| 0.1 + 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 0.3).collect();
        let p = Pchip::new(x, y);
        let (v, dv) = p.eval(0.537);
        assert_relative_eq!(v, 2.0 * 0.537 + 0.3, max_relative = 1e-14);
        assert_relative_eq!(dv, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y = vec![0.0, 0.1, 0.11, 2.0, 2.01];
        let p = Pchip::new(x, y);
        let mut prev = p.eval(0.0).0;
        for i in 1..400 {
            let v = p.eval(i as f64 * 0.01).0;
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn derivative_is_continuous_at_knots() {
        let p = Pchip::new(vec![0.2, 0.6, 1.0], vec![1.0, 1.2, 1.5]);
        let eps = 1e-9;
        let (_, dl) = p.eval(0.6 - eps);
        let (_, dr) = p.eval(0.6 + eps);
        assert!((dl - dr).abs() < 1e-6);
    }
}
