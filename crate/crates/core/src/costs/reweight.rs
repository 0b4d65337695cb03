use crate::error::{Error, Result};

/// Re-weighted ℓ1 update `λ_i = ν / (|a_i| + γ)`; every weight lies in `(0, ν/γ]`.
pub fn weight_update_l1(a: &[f64], gamma: f64, nu: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma and nu must be positive, got gamma = {gamma}, nu = {nu}"
        )));
    }
    Ok(a.iter().map(|v| nu / (v.abs() + gamma)).collect())
}

/// Re-weighted ℓ2 update `λ_i = ν (a_i² + γ)^(1 − p/2)`.
///
/// `γ = 0` is accepted as long as no base `a_i² + γ` is zero under a negative exponent.
pub fn weight_update_l2(a: &[f64], gamma: f64, p: f64, nu: f64) -> Result<Vec<f64>> {
    if !(gamma >= 0.0 && nu > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need gamma >= 0, nu > 0 and finite p; got gamma = {gamma}, nu = {nu}, p = {p}"
        )));
    }
    let exponent = 1.0 - 0.5 * p;
    a.iter()
        .map(|v| {
            let base = v * v + gamma;
            if base == 0.0 && exponent < 0.0 {
                Err(Error::Domain("zero base under a negative exponent".into()))
            } else {
                Ok(nu * base.powf(exponent))
            }
        })
        .collect()
}
