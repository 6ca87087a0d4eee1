//! sRGB (8-bit, D65) to CIELAB.

/// CIE 1976 L*a*b* coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

// D65 reference white, equal to the row sums of the sRGB->XYZ matrix below.
const WHITE: [f64; 3] = [0.950_47, 1.0, 1.088_83];

const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

fn srgb_to_linear(v: u8) -> f64 {
    let c = f64::from(v) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

pub fn rgb_to_lab(r: u8, g: u8, b: u8) -> Lab {
    let (r, g, b) = (srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b));
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;

    let fx = lab_f(x / WHITE[0]);
    let fy = lab_f(y / WHITE[1]);
    let fz = lab_f(z / WHITE[2]);
    Lab {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(lab: Lab, expected: (f64, f64, f64), tol: f64) -> bool {
        (lab.l - expected.0).abs() <= tol
            && (lab.a - expected.1).abs() <= tol
            && (lab.b - expected.2).abs() <= tol
    }

    #[test]
    fn white_and_black() {
        assert!(close(rgb_to_lab(255, 255, 255), (100.0, 0.0, 0.0), 0.01));
        assert!(close(rgb_to_lab(0, 0, 0), (0.0, 0.0, 0.0), 0.01));
    }

    #[test]
    fn primaries_match_reference_values() {
        // reference values from the standard sRGB/D65 conversion
        assert!(close(rgb_to_lab(255, 0, 0), (53.24, 80.09, 67.20), 0.01));
        assert!(close(rgb_to_lab(0, 255, 0), (87.73, -86.18, 83.18), 0.01));
        assert!(close(rgb_to_lab(0, 0, 255), (32.30, 79.19, -107.86), 0.01));
    }

    #[test]
    fn grays_are_neutral() {
        for v in 0..=255u8 {
            let lab = rgb_to_lab(v, v, v);
            assert!(lab.a.abs() <= 0.01 && lab.b.abs() <= 0.01, "gray {v}: {lab:?}");
        }
    }
}
