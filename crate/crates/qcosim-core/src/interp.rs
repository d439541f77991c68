//! Cubic Hermite interpolation on non-uniform time series.
//!
//! The transient engine stores value and derivative at every accepted step, so
//! outputs can be resampled onto uniform grids with O(h⁴) accuracy — adaptive
//! steps stay coarse without degrading harmonic projections.

/// Cubic Hermite interpolation of (t0, y0, dy0) .. (t1, y1, dy1) at t.
#[inline]
pub fn hermite(t0: f64, y0: f64, dy0: f64, t1: f64, y1: f64, dy1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let u = (t - t0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * y0 + h10 * h * dy0 + h01 * y1 + h11 * h * dy1
}

/// A sampled column (values plus derivatives on a shared, strictly increasing
/// time grid) that can be evaluated anywhere inside the grid.
pub struct Sampled<'a> {
    pub times: &'a [f64],
    pub values: &'a [f64],
    pub derivs: &'a [f64],
}

impl<'a> Sampled<'a> {
    pub fn eval(&self, t: f64) -> f64 {
        let times = self.times;
        debug_assert!(times.len() >= 2);
        if t <= times[0] {
            return self.values[0];
        }
        if t >= times[times.len() - 1] {
            return self.values[times.len() - 1];
        }
        let i = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        hermite(
            times[i],
            self.values[i],
            self.derivs[i],
            times[i + 1],
            self.values[i + 1],
            self.derivs[i + 1],
            t,
        )
    }

    /// Resample onto n uniform points spanning [t0, t1] inclusive.
    pub fn resample(&self, t0: f64, t1: f64, n: usize) -> Vec<f64> {
        debug_assert!(n >= 2);
        let dt = (t1 - t0) / (n - 1) as f64;
        (0..n).map(|k| self.eval(t0 + k as f64 * dt)).collect()
    }
}

/// Centered finite-difference derivatives on a non-uniform grid.
pub fn numeric_derivs(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut out = vec![0.0; n];
    out[0] = (values[1] - values[0]) / (times[1] - times[0]);
    out[n - 1] = (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]);
    for i in 1..n - 1 {
        let h0 = times[i] - times[i - 1];
        let h1 = times[i + 1] - times[i];
        out[i] = (values[i + 1] * h0 * h0 - values[i - 1] * h1 * h1
            + values[i] * (h1 * h1 - h0 * h0))
            / (h0 * h1 * (h0 + h1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let f = |t: f64| 2.0 * t * t * t - t * t + 3.0 * t - 5.0;
        let df = |t: f64| 6.0 * t * t - 2.0 * t + 3.0;
        let y = hermite(1.0, f(1.0), df(1.0), 3.0, f(3.0), df(3.0), 1.7);
        assert!((y - f(1.7)).abs() < 1e-12);
    }

    #[test]
    fn sampled_eval_nonuniform() {
        let times = vec![0.0, 0.5, 2.0, 3.0];
        let f = |t: f64| (0.9 * t).sin();
        let df = |t: f64| 0.9 * (0.9 * t).cos();
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let derivs: Vec<f64> = times.iter().map(|&t| df(t)).collect();
        let s = Sampled { times: &times, values: &values, derivs: &derivs };
        for &t in &[0.1, 0.5, 1.3, 2.9] {
            assert!((s.eval(t) - f(t)).abs() < 1e-2, "t={t}");
        }
        let r = s.resample(0.0, 3.0, 31);
        assert_eq!(r.len(), 31);
        assert!((r[0] - f(0.0)).abs() < 1e-12);
        assert!((r[30] - f(3.0)).abs() < 1e-12);
    }
}
