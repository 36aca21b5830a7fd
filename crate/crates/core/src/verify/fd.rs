//! Finite-difference weights on arbitrary stencils.

use crate::error::{Error, Result};

/// Fornberg's weights: `w[m][j]` approximates the `m`-th derivative at `x0`
/// by `sum_j w[m][j] f(xs[j])`, for `m = 0..=max_deriv`.
pub fn fornberg(x0: f64, xs: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut w = vec![vec![0.0; n]; max_deriv + 1];
    w[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

/// Centered stencil of `2 r + 1` points with spacing `h`.
#[derive(Debug, Clone)]
pub struct Centered {
    pub h: f64,
    pub radius: usize,
    // Unit-spacing weights, scaled by h^-m on use.
    weights: Vec<Vec<f64>>,
}

impl Centered {
    pub fn new(h: f64, radius: usize, max_deriv: usize) -> Result<Centered> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Numeric(format!("invalid step {h}")));
        }
        if h.powi(max_deriv as i32) == 0.0 || 2 * radius < max_deriv {
            return Err(Error::Numeric(format!(
                "step {h} underflows for derivative order {max_deriv}"
            )));
        }
        let xs: Vec<f64> = (0..=2 * radius).map(|j| j as f64 - radius as f64).collect();
        Ok(Centered {
            h,
            radius,
            weights: fornberg(0.0, &xs, max_deriv),
        })
    }

    /// Derivatives `0..=max_deriv` of `f` at `x`. Differences are taken
    /// relative to the centre value so constant data gives exact zeros.
    pub fn derivatives(&self, f: &dyn Fn(f64) -> f64, x: f64) -> Vec<f64> {
        let r = self.radius as f64;
        let vals: Vec<f64> = (0..=2 * self.radius).map(|j| f(x + (j as f64 - r) * self.h)).collect();
        let centre = vals[self.radius];
        self.weights
            .iter()
            .enumerate()
            .map(|(m, w)| {
                if m == 0 {
                    return centre;
                }
                let s: f64 = w.iter().zip(&vals).map(|(a, v)| a * (v - centre)).sum();
                s / self.h.powi(m as i32)
            })
            .collect()
    }
}
