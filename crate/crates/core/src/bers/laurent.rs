use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Whether the series carries the leading `z` of a normalized map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesForm {
    /// `f(z) = z + Σ_{k≥0} b_k z^-k`
    Map,
    /// `φ(z) = Σ_{k≥0} c_k z^-k`
    Plain,
}

/// Truncated expansion in powers of `1/z`; `coeffs[k]` multiplies `z^-k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentSeries {
    pub form: SeriesForm,
    pub coeffs: Vec<C64>,
}

impl LaurentSeries {
    pub fn map(coeffs: Vec<C64>) -> Self {
        Self {
            form: SeriesForm::Map,
            coeffs,
        }
    }

    pub fn plain(coeffs: Vec<C64>) -> Self {
        Self {
            form: SeriesForm::Plain,
            coeffs,
        }
    }

    pub fn identity() -> Self {
        Self::map(vec![C64::new(0.0, 0.0)])
    }

    /// Highest retained power.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Drops trailing coefficients below `tol`.
    pub fn trimmed(mut self, tol: f64) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() <= tol {
            self.coeffs.pop();
        }
        self
    }

    pub fn eval(&self, z: C64) -> C64 {
        let t = z.inv();
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        match self.form {
            SeriesForm::Map => z + acc,
            SeriesForm::Plain => acc,
        }
    }

    /// Value and first three derivatives.
    pub fn derivatives(&self, z: C64) -> [C64; 4] {
        let t = z.inv();
        // p_j = Σ k(k+1)..(k+j-1) c_k t^k
        let mut p = [C64::new(0.0, 0.0); 4];
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            let kf = k as f64;
            p[0] = p[0] * t + c;
            p[1] = p[1] * t + c * kf;
            p[2] = p[2] * t + c * (kf * (kf + 1.0));
            p[3] = p[3] * t + c * (kf * (kf + 1.0) * (kf + 2.0));
        }
        let t2 = t * t;
        let mut d = [p[0], -t * p[1], t2 * p[2], -t2 * t * p[3]];
        if self.form == SeriesForm::Map {
            d[0] += z;
            d[1] += 1.0;
        }
        d
    }

    /// Series of `f'` in powers of `t = 1/z`, as a plain coefficient vector of length `n`.
    pub(crate) fn derivative_in_t(&self, n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n];
        if self.form == SeriesForm::Map && n > 0 {
            out[0] = C64::new(1.0, 0.0);
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if k + 1 < n {
                out[k + 1] -= c * k as f64;
            }
        }
        out
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            form: self.form,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }
}

/// Truncated product of two power series.
pub(crate) fn series_mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.norm_sqr() == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Truncated reciprocal of a power series with nonzero constant term.
pub(crate) fn series_inv(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return out;
    }
    let a0 = a[0].inv();
    out[0] = a0;
    for k in 1..n {
        let mut s = C64::new(0.0, 0.0);
        for j in 1..=k.min(a.len() - 1) {
            s += a[j] * out[k - j];
        }
        out[k] = -s * a0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joukowski_derivatives() {
        let k = C64::new(0.2, 0.0);
        let s = LaurentSeries::map(vec![C64::new(0.0, 0.0), k]);
        let z = C64::new(1.3, -0.7);
        let d = s.derivatives(z);
        assert!((d[0] - (z + k / z)).norm() < 1e-15);
        assert!((d[1] - (1.0 - k / (z * z))).norm() < 1e-15);
        assert!((d[2] - 2.0 * k / (z * z * z)).norm() < 1e-15);
        assert!((d[3] + 6.0 * k / (z * z * z * z)).norm() < 1e-14);
    }

    #[test]
    fn reciprocal_series() {
        let a = vec![C64::new(1.0, 0.0), C64::new(-0.5, 0.0)];
        let inv = series_inv(&a, 6);
        for (k, c) in inv.iter().enumerate() {
            assert!((c.re - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
        let prod = series_mul(&a, &inv, 6);
        assert!((prod[0] - 1.0).norm() < 1e-15);
        assert!(prod[1..].iter().all(|c| c.norm() < 1e-15));
    }
}
