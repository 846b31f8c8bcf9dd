use crate::error::{Error, Result};

/// Largest entropy (bits) of a distribution over `kappa` outcomes whose
/// largest entry is `q`: the remaining mass spread evenly over the other
/// `kappa - 1` outcomes. Nonincreasing in `q` on `[1/kappa, 1]`.
pub fn entropy_upper_bound(q: f64, kappa: usize) -> Result<f64> {
    if kappa < 2 {
        return Err(Error::InvalidArgument(format!("kappa must be at least 2, got {kappa}")));
    }
    let floor = 1.0 / kappa as f64;
    if !(q.is_finite() && q >= floor - 1e-12 && q <= 1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("bound needs {floor} <= q <= 1, got {q}")));
    }
    let q = q.clamp(floor, 1.0);
    if q >= 1.0 {
        return Ok(0.0);
    }
    let rest = 1.0 - q;
    Ok(-q * q.log2() - rest * (rest / (kappa - 1) as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(entropy_upper_bound(1.0, 5).unwrap(), 0.0);
        assert!((entropy_upper_bound(0.5, 2).unwrap() - 1.0).abs() < 1e-12);
        let expected = -0.7 * 0.7f64.log2() - 0.3 * 0.1f64.log2();
        assert!((entropy_upper_bound(0.7, 4).unwrap() - expected).abs() < 1e-12);
        assert!((entropy_upper_bound(0.7, 4).unwrap() - 1.3568).abs() < 1e-3);
    }

    #[test]
    fn rejects_mass_below_uniform() {
        assert!(entropy_upper_bound(0.2, 4).is_err());
        assert!(entropy_upper_bound(0.25, 4).is_ok());
    }

    #[test]
    fn nonincreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let q = 0.25 + 0.75 * i as f64 / 100.0;
            let u = entropy_upper_bound(q, 4).unwrap();
            assert!(u <= prev + 1e-12);
            prev = u;
        }
    }
}
