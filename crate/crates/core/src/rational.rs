//! Exact rationals used for polytope vertices and the invariants derived
//! from them.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"n/d"`, or `"n"` for integers.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_zero_or_one(r: &Rational) -> bool {
    r.is_zero() || *r == Rational::from_integer(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(format(&rat(10, 12)), "5/6");
        assert_eq!(format(&rat(4, 2)), "2");
        assert!(is_zero_or_one(&rat(3, 3)));
        assert!(!is_zero_or_one(&rat(1, 3)));
    }
}
