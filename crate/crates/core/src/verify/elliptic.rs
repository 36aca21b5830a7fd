//! Jacobi elliptic functions for real modulus `0 <= k < 1`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const TOL: f64 = 1e-16;

fn check_modulus(k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("modulus {k} outside [0, 1)")));
    }
    Ok(())
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= TOL * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

/// Complete elliptic integral of the first kind, `K(k) = pi / (2 agm(1, k'))`.
pub fn complete_k(k: f64) -> Result<f64> {
    check_modulus(k)?;
    Ok(FRAC_PI_2 / agm(1.0, (1.0 - k * k).sqrt()))
}

/// `(sn, cn, dn)` at `z` by the descending Landen (AGM) scheme.
pub fn jacobi_sncndn(z: f64, k: f64) -> Result<(f64, f64, f64)> {
    check_modulus(k)?;
    let m = k * k;
    if m < 1e-8 {
        let (s, c) = z.sin_cos();
        let w = 0.25 * m * (z - s * c);
        return Ok((s - w * c, c + w * s, 1.0 - 0.5 * m * s * s));
    }
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = (1.0 - m).sqrt();
    while c[c.len() - 1].abs() > TOL && a.len() < 64 {
        let an = a[a.len() - 1];
        a.push(0.5 * (an + b));
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * z;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] * phi.sin() / a[j]).asin());
    }
    let (s, cn) = phi.sin_cos();
    Ok((s, cn, (1.0 - m * s * s).sqrt()))
}

pub fn jacobi_sn(z: f64, k: f64) -> Result<f64> {
    Ok(jacobi_sncndn(z, k)?.0)
}

pub fn jacobi_cn(z: f64, k: f64) -> Result<f64> {
    Ok(jacobi_sncndn(z, k)?.1)
}

pub fn jacobi_dn(z: f64, k: f64) -> Result<f64> {
    Ok(jacobi_sncndn(z, k)?.2)
}
