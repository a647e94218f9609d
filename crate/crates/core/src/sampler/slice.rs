//! Univariate slice sampling with stepping out and shrinkage (Neal, 2003).

use crate::distributions::RngStream;
use crate::error::{Error, Result};

const MAX_SHRINK: usize = 1000;

/// One slice-sampling update of `current` for the unnormalized log density
/// `log_density`, restricted to the open interval `(lower, upper)`.
///
/// The initial interval of length `width` is placed uniformly around
/// `current` and stepped out at most `max_steps` times in total. Ends that
/// cross the domain boundary are clipped to it.
pub fn slice_sample_step<F>(
    log_density: F,
    current: f64,
    width: f64,
    max_steps: usize,
    (lower, upper): (f64, f64),
    rng: &mut RngStream,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(width > 0.0) {
        return Err(Error::Slice(format!("width must be positive, got {width}")));
    }
    if !(current > lower && current < upper) {
        return Err(Error::Slice(format!("current point {current} outside ({lower}, {upper})")));
    }
    let f0 = log_density(current);
    if !f0.is_finite() {
        return Err(Error::Slice(format!("log density at current point {current} is {f0}")));
    }
    // ln(U) for U uniform on (0, 1) is -Exp(1).
    let level = f0 + rng.open01().ln();

    let mut left = current - width * rng.open01();
    let mut right = left + width;
    let mut steps_left = (max_steps as f64 * rng.open01()).floor() as usize;
    let mut steps_right = (max_steps.saturating_sub(1)).saturating_sub(steps_left);
    if max_steps == 0 {
        steps_left = 0;
        steps_right = 0;
    }
    while steps_left > 0 && left > lower && log_density(left) > level {
        left -= width;
        steps_left -= 1;
    }
    while steps_right > 0 && right < upper && log_density(right) > level {
        right += width;
        steps_right -= 1;
    }
    left = left.max(lower);
    right = right.min(upper);

    for _ in 0..MAX_SHRINK {
        let proposal = left + rng.open01() * (right - left);
        if proposal > lower && proposal < upper && log_density(proposal) >= level {
            return Ok(proposal);
        }
        if proposal < current {
            left = proposal;
        } else {
            right = proposal;
        }
    }
    Err(Error::Slice(format!("no acceptable point after {MAX_SHRINK} shrinkage steps around {current}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stays_inside_domain() {
        let mut rng = RngStream::new(3, 0);
        let mut x = 0.5;
        for _ in 0..10_000 {
            x = slice_sample_step(
                |v| if v > 0.0 && v < 1.0 { 0.0 } else { f64::NEG_INFINITY },
                x,
                5.0,
                10,
                (0.0, 1.0),
                &mut rng,
            )
            .unwrap();
            assert!(x > 0.0 && x < 1.0);
        }
    }

    #[test]
    fn rejects_bad_start() {
        let mut rng = RngStream::new(3, 0);
        assert!(slice_sample_step(|_| f64::NEG_INFINITY, 0.5, 1.0, 10, (0.0, 1.0), &mut rng).is_err());
        assert!(slice_sample_step(|_| 0.0, 2.0, 1.0, 10, (0.0, 1.0), &mut rng).is_err());
    }

    #[test]
    fn normal_target_moments() {
        let mut rng = RngStream::new(9, 0);
        let mut x = 0.0;
        let (mut s1, mut s2) = (0.0, 0.0);
        let n = 50_000;
        for _ in 0..n {
            x = slice_sample_step(|v| -0.5 * v * v, x, 1.0, 50, (f64::NEG_INFINITY, f64::INFINITY), &mut rng).unwrap();
            s1 += x;
            s2 += x * x;
        }
        let m = s1 / n as f64;
        let v = s2 / n as f64 - m * m;
        assert!(m.abs() < 0.03, "{m}");
        assert!((v - 1.0).abs() < 0.05, "{v}");
    }
}
