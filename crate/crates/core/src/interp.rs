//! Piecewise cubic Hermite interpolation on strictly increasing nodes.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    /// Interpolant with prescribed node derivatives.
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && x.len() == d.len());
        debug_assert!(x.windows(2).all(|w| w[0] < w[1]), "nodes must increase");
        Self { x, y, d }
    }

    /// Shape-preserving interpolant (Fritsch-Carlson derivative limiter).
    pub fn pchip(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && n == y.len());
        let slopes: Vec<f64> = (0..n - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut d = vec![0.0; n];
        d[0] = slopes[0];
        d[n - 1] = slopes[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (slopes[i - 1], slopes[i]);
            if a * b <= 0.0 {
                d[i] = 0.0;
            } else {
                // weighted harmonic mean
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                d[i] = (w1 + w2) / (w1 / a + w2 / b);
            }
        }
        for i in 0..n - 1 {
            let s = slopes[i];
            if s == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let (a, b) = (d[i] / s, d[i + 1] / s);
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                d[i] = t * a * s;
                d[i + 1] = t * b * s;
            }
        }
        Self::new(x, y, d)
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.x.partition_point(|&v| v <= t);
        k.clamp(1, self.x.len() - 1) - 1
    }

    fn check(&self, t: f64) -> Result<()> {
        if t >= self.lo() && t <= self.hi() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what: "interpolation abscissa",
                value: t,
                lo: self.lo(),
                hi: self.hi(),
            })
        }
    }

    /// Value at t; errors outside the node range.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.eval_unchecked(t))
    }

    /// Value at t, extrapolating the end cubics outside the node range.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h * h10 * self.d[i] + h01 * self.y[i + 1] + h * h11 * self.d[i + 1]
    }

    pub fn deriv(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        Ok(d00 * self.y[i] + d10 * self.d[i] + d01 * self.y[i + 1] + d11 * self.d[i + 1])
    }
}
