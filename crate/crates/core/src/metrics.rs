//! Chirp design metrics: bandwidth, range resolution, chirp period and
//! maximum unambiguous speed.
//!
//! Generic over the number type so the tabulated quantities can be computed in
//! exact rational arithmetic as well as in floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

/// Metrics derived from a chirp definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpMetrics<T> {
    /// `slope * samples / sample_rate`, Hz.
    pub bandwidth: T,
    /// `c / (2 B)`, m.
    pub range_resolution: T,
    /// `samples / sample_rate + idle`, s.
    pub chirp_period: T,
    /// `c * sample_rate / (2 slope)` for complex sampling, m.
    pub max_range: T,
}

impl<T: Clone + Num> ChirpMetrics<T> {
    pub fn new(slope: T, sample_rate: T, samples: T, idle_time: T, light_speed: T) -> Self {
        let two = T::one() + T::one();
        let bandwidth = slope.clone() * samples.clone() / sample_rate.clone();
        let range_resolution = light_speed.clone() / (two.clone() * bandwidth.clone());
        let chirp_period = samples / sample_rate.clone() + idle_time;
        let max_range = light_speed * sample_rate / (two * slope);
        Self { bandwidth, range_resolution, chirp_period, max_range }
    }

    /// `lambda / (4 Tc)` for a given wavelength.
    pub fn max_speed(&self, wavelength: T) -> T {
        let four = T::one() + T::one() + T::one() + T::one();
        wavelength / (four * self.chirp_period.clone())
    }
}

impl ChirpMetrics<f64> {
    pub fn from_f64(slope: f64, sample_rate: f64, samples: usize, idle_time: f64) -> Self {
        Self::new(slope, sample_rate, samples as f64, idle_time, crate::SPEED_OF_LIGHT)
    }
}

/// Parses a finite decimal (`"12.5e12"`, `"0.00001"`, `"5120000"`) into an exact
/// rational.
pub fn exact_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / 10;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(ten.pow(scale as u32));
    } else {
        value /= BigRational::from_integer(ten.pow((-scale) as u32));
    }
    Some(if negative { -value } else { value })
}

/// Exact rational metrics from decimal-exact inputs.
pub fn exact_metrics(slope: f64, sample_rate: f64, samples: usize, idle_time: f64) -> ChirpMetrics<BigRational> {
    // `{}` on f64 prints the shortest string that round-trips, which is the
    // decimal the user wrote in the config.
    let q = |v: f64| exact_decimal(&format!("{v:e}")).expect("finite decimal");
    ChirpMetrics::new(
        q(slope),
        q(sample_rate),
        BigRational::from_integer(BigInt::from(samples)),
        q(idle_time),
        q(crate::SPEED_OF_LIGHT),
    )
}

/// Renders a rational as a decimal string when it terminates, else as `p/q`.
pub fn rational_to_string(value: &BigRational) -> String {
    let mut den = value.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let zero = BigInt::from(0);
    let mut digits = 0u32;
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&den % &two) == zero {
        den /= &two;
        twos += 1;
    }
    while (&den % &five) == zero {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::from(1) {
        return format!("{}/{}", value.numer(), value.denom());
    }
    digits += twos.max(fives);
    let scaled = value * BigRational::from_integer(BigInt::from(10).pow(digits));
    let int = scaled.to_integer();
    let negative = int < zero;
    let mut s = if negative { (-int).to_string() } else { int.to_string() };
    if digits > 0 {
        while s.len() <= digits as usize {
            s.insert(0, '0');
        }
        s.insert(s.len() - digits as usize, '.');
    }
    if negative {
        s.insert(0, '-');
    }
    s
}

pub fn rational_to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(exact_decimal("12.5e12").unwrap(), r(12_500_000_000_000, 1));
        assert_eq!(exact_decimal("1e-5").unwrap(), r(1, 100_000));
        assert_eq!(exact_decimal("-0.25").unwrap(), r(-1, 4));
        assert_eq!(exact_decimal("5.12e6").unwrap(), r(5_120_000, 1));
        assert!(exact_decimal("abc").is_none());
        assert!(exact_decimal(".").is_none());
    }

    #[test]
    fn exact_table_values() {
        for (m, b, dr) in [(256, "0.625", "0.24"), (384, "0.9375", "0.16"), (512, "1.25", "0.12")] {
            let x = exact_metrics(12.5e12, 5.12e6, m, 10e-6);
            let ghz = &x.bandwidth / BigRational::from_integer(BigInt::from(1_000_000_000));
            assert_eq!(rational_to_string(&ghz), b);
            assert_eq!(rational_to_string(&x.range_resolution), dr);
        }
    }

    #[test]
    fn float_and_exact_agree() {
        let f = ChirpMetrics::from_f64(12.5e12, 5.12e6, 384, 10e-6);
        let x = exact_metrics(12.5e12, 5.12e6, 384, 10e-6);
        assert!((f.chirp_period - rational_to_f64(&x.chirp_period)).abs() < 1e-18);
        assert!((f.max_range - 61.44).abs() < 1e-9);
    }

    #[test]
    fn non_terminating_rational() {
        assert_eq!(rational_to_string(&r(1, 3)), "1/3");
        assert_eq!(rational_to_string(&r(3, 1)), "3");
        assert_eq!(rational_to_string(&r(-3, 40)), "-0.075");
    }
}
