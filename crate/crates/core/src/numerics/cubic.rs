use crate::{Error, Result};

/// Real roots of `-x^3 + a2 x^2 + a1 x + a0`, sorted descending.
///
/// Uses the trigonometric form for three real roots followed by a Newton polish.
/// A discriminant that places a complex pair clearly off the real axis is an error;
/// such inputs cannot come from a hermitian operator.
pub fn cubic_real_roots(a2: f64, a1: f64, a0: f64) -> Result<[f64; 3]> {
    // monic form x^3 + b x^2 + c x + d
    let (b, c, d) = (-a2, -a1, -a0);
    let shift = -b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let scale = 1.0 + a2.abs() + a1.abs() + a0.abs();

    let mut roots = if p.abs() <= 1e-12 * scale * scale {
        let t = (-q).cbrt();
        [t + shift; 3]
    } else if p > 0.0 {
        let disc = 4.0 * p * p * p + 27.0 * q * q;
        return Err(Error::ComplexRoots { discriminant: -disc });
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        if arg.abs() > 1.0 + 1e-8 {
            let disc = 4.0 * p * p * p + 27.0 * q * q;
            return Err(Error::ComplexRoots { discriminant: -disc });
        }
        let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [
            m * theta.cos() + shift,
            m * (theta - tau).cos() + shift,
            m * (theta - 2.0 * tau).cos() + shift,
        ]
    };

    let f = |x: f64| ((-x + a2) * x + a1) * x + a0;
    let df = |x: f64| (-3.0 * x + 2.0 * a2) * x + a1;
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let slope = df(*r);
            if slope == 0.0 {
                break;
            }
            let next = *r - f(*r) / slope;
            if f(next).abs() < f(*r).abs() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(a2: f64, a1: f64, a0: f64, x: f64) -> f64 {
        -x * x * x + a2 * x * x + a1 * x + a0
    }

    #[test]
    fn triple_root() {
        // -(x-1)^3 = -x^3 + 3x^2 - 3x + 1
        let r = cubic_real_roots(3.0, -3.0, 1.0).unwrap();
        for x in r {
            assert!((x - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn distinct_roots() {
        // -(x-3)(x-1)(x+2) = -x^3 + 2x^2 + 5x - 6
        let r = cubic_real_roots(2.0, 5.0, -6.0).unwrap();
        assert!((r[0] - 3.0).abs() < 1e-12);
        assert!((r[1] - 1.0).abs() < 1e-12);
        assert!((r[2] + 2.0).abs() < 1e-12);
        for x in r {
            assert!(poly(2.0, 5.0, -6.0, x).abs() <= 1e-9 * (1.0 + x.abs().powi(3)));
        }
    }

    #[test]
    fn double_root_at_zero() {
        let r = cubic_real_roots(3.0, 0.0, 0.0).unwrap();
        assert!((r[0] - 3.0).abs() < 1e-12);
        assert!(r[1].abs() < 1e-6 && r[2].abs() < 1e-6);
    }

    #[test]
    fn complex_pair_is_error() {
        // -(x^2 + 1)(x) = -x^3 - x
        assert!(cubic_real_roots(0.0, -1.0, 0.0).is_err());
    }
}
