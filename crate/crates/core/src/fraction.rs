use std::cmp::Ordering;
use std::fmt;

/// An exact rational with a positive denominator.
///
/// Scores are kept exact so that rankings and ties do not depend on
/// floating-point rounding. Numerators and denominators stay far below
/// `2^63` for any realistic database (they are bounded by a record count
/// times a binomial coefficient), so cross-multiplication in `i128` cannot
/// overflow.
#[derive(Clone, Copy, Debug)]
pub struct Fraction {
    num: i128,
    den: i128,
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };

    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        if den < 0 {
            Fraction { num: -num, den: -den }
        } else {
            Fraction { num, den }
        }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    /// Decimal rendering with `digits` fractional digits, rounding the exact
    /// value half to even.
    pub fn to_fixed(&self, digits: u32) -> String {
        let scale = 10i128.pow(digits);
        let negative = self.num < 0;
        let abs = self.num.unsigned_abs();
        let den = self.den as u128;
        let scaled = abs * scale as u128;
        let mut q = scaled / den;
        let rem = scaled % den;
        match (2 * rem).cmp(&den) {
            Ordering::Greater => q += 1,
            Ordering::Equal if q % 2 == 1 => q += 1,
            _ => {}
        }
        let int = q / scale as u128;
        let frac = q % scale as u128;
        let sign = if negative && q != 0 { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac:0width$}", width = digits as usize)
        }
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fraction {}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl std::ops::Sub for Fraction {
    type Output = Fraction;

    fn sub(self, other: Fraction) -> Fraction {
        if self.den == other.den {
            return Fraction::new(self.num - other.num, self.den);
        }
        Fraction::new(self.num * other.den - other.num * self.den, self.den * other.den)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}
