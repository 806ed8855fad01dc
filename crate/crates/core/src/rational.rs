//! Exact rational arithmetic used for utilization, energy and bandwidth.

use num_rational::Ratio;

pub type Rational = Ratio<i128>;

pub fn from_count(count: u64) -> Rational {
    Rational::from_integer(i128::from(count))
}

/// `num / den`, reduced. `den` must be non-zero.
pub fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(i128::from(num), i128::from(den))
}

/// The nearest `f64` (round half to even).
pub fn to_f64(value: &Rational) -> f64 {
    let n = value.numer().unsigned_abs();
    let d = value.denom().unsigned_abs();
    let mut q = n / d;
    let mut r = n % d;
    let mut exp = 0i32;
    // Binary long division until the quotient holds 67 significant bits,
    // far more than the 53 kept, so a sticky low bit makes one rounding exact.
    while q < (1 << 66) && r != 0 {
        r <<= 1;
        q <<= 1;
        if r >= d {
            r -= d;
            q |= 1;
        }
        exp -= 1;
    }
    if r != 0 {
        q |= 1;
    }
    // exp stays within [-193, 0], so the scale is a normal power of two.
    let scale = f64::from_bits(((1023 + exp) as u64) << 52);
    let magnitude = q as f64 * scale;
    if *value.numer() < 0 {
        -magnitude
    } else {
        magnitude
    }
}
