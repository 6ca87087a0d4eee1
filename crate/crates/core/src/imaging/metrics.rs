use super::Plane;
use crate::error::{Error, Result};

/// Peak value used by [`psnr`]; depth maps are 8-bit.
pub const PSNR_PEAK: f64 = 255.0;

pub fn mse(reference: &Plane, test: &Plane) -> Result<f64> {
    if reference.dims() != test.dims() {
        return Err(Error::input(format!(
            "cannot compare planes of size {:?} and {:?}",
            reference.dims(),
            test.dims()
        )));
    }
    if reference.is_empty() {
        return Err(Error::input("cannot compare empty planes"));
    }
    let sum: f64 = reference
        .as_slice()
        .iter()
        .zip(test.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.len() as f64)
}

/// Peak signal-to-noise ratio in dB over all pixels. Identical planes give `f64::INFINITY`.
pub fn psnr(reference: &Plane, test: &Plane) -> Result<f64> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PSNR_PEAK * PSNR_PEAK / mse).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let zero = Plane::filled(4, 3, 0.0);
        let full = Plane::filled(4, 3, 255.0);
        assert!(psnr(&zero, &full).unwrap().abs() < 1e-12);

        let one = Plane::filled(4, 3, 1.0);
        let expected = 10.0 * (255.0f64 * 255.0).log10();
        assert!((psnr(&zero, &one).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 48.13).abs() < 0.005);
    }

    #[test]
    fn depends_only_on_error_magnitude_and_is_symmetric() {
        let base = Plane::from_fn(9, 6, |r, c| 100.0 + (r * 3 + c) as f64);
        for c in [1.0, 5.0, 255.0] {
            let up = base.map(|v| v + c);
            let down = base.map(|v| v - c);
            let expected = 10.0 * (255.0f64 * 255.0 / (c * c)).log10();
            let p = psnr(&base, &up).unwrap();
            assert!((p - expected).abs() < 1e-12);
            assert!((psnr(&base, &down).unwrap() - p).abs() < 1e-12);
            assert_eq!(psnr(&up, &base).unwrap(), p);
        }
    }

    #[test]
    fn identical_and_mismatched() {
        let p = Plane::filled(3, 3, 7.0);
        assert_eq!(psnr(&p, &p).unwrap(), f64::INFINITY);
        assert!(psnr(&p, &Plane::filled(3, 2, 7.0)).is_err());
    }
}
