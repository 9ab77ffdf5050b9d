//! Scalar abstraction for metric and scoring arithmetic.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Real-valued scalar used by metrics and BM25 scoring.
pub trait Real: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {}

/// Convert a count to the scalar type.
pub fn from_count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable as a real")
}

/// `num / den` as a real. `den` must be non-zero.
pub fn ratio<T: Real>(num: usize, den: usize) -> T {
    debug_assert!(den > 0);
    from_count::<T>(num) / from_count::<T>(den)
}

/// Arithmetic mean, `None` for an empty input.
pub fn mean<T: Real, I: IntoIterator<Item = T>>(values: I) -> Option<T> {
    let mut sum = T::zero();
    let mut n = 0usize;
    for v in values {
        sum = sum + v;
        n += 1;
    }
    (n > 0).then(|| sum / from_count(n))
}

/// Sample standard deviation (n - 1 denominator), `None` for fewer than two values.
pub fn sample_sd<T: Real>(values: &[T]) -> Option<T> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values.iter().copied())?;
    let ss = values
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - m) * (v - m));
    Some((ss / from_count(values.len() - 1)).sqrt())
}

/// Round half away from zero to `decimals` places.
///
/// Values within 1e-9 (in units of the last place) of a half are treated as
/// exact halves, so `0.125` and `0.1250000000001` both give `0.13`.
pub fn round_half_up<T: Real>(x: T, decimals: u32) -> T {
    let scale = T::from_u32(10u32.pow(decimals)).expect("scale");
    let scaled = x * scale;
    let nudge = T::from_f64(1e-9).expect("nudge") * scaled.signum();
    (scaled + nudge).round() / scale
}

/// Format a value at two decimals after half-up rounding.
pub fn fmt2<T: Real>(x: T) -> String {
    let r = round_half_up(x, 2).to_f64().expect("finite");
    // avoid "-0.00"
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.2}")
}

/// Format a value as signed two-decimal text, e.g. `+2.20` or `-0.29`.
pub fn fmt2_signed<T: Real>(x: T) -> String {
    let s = fmt2(x);
    if s.starts_with('-') || s == "0.00" {
        s
    } else {
        format!("+{s}")
    }
}
