//! Lower bound on the number of labelled connected combinatorial
//! triangulations, quotiented by relabellings.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use std::fmt;

/// `L(n) = (2n+1)! 6^(2n) / (2 n! 24^n)` as a reduced fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub n: u32,
    pub numer: BigUint,
    pub denom: BigUint,
}

fn factorial(k: u32) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

impl Bound {
    pub fn new(n: u32) -> Bound {
        assert!(n >= 1, "bound needs n >= 1");
        let numer = factorial(2 * n + 1) * Pow::pow(BigUint::from(6u32), 2 * n);
        let denom = BigUint::from(2u32) * factorial(n) * Pow::pow(BigUint::from(24u32), n);
        let g = numer.gcd(&denom);
        Bound { n, numer: numer / &g, denom: denom / g }
    }

    pub fn is_integer(&self) -> bool {
        self.denom.is_one()
    }

    /// Rounds to `digits` significant figures, returning the mantissa
    /// digits and the decimal exponent of the leading one.
    pub fn significant(&self, digits: u32) -> (BigUint, i64) {
        assert!(digits >= 1);
        if self.numer.is_zero() {
            return (BigUint::zero(), 0);
        }
        // first guess from digit counts, corrected below
        let mut e = self.numer.to_string().len() as i64 - self.denom.to_string().len() as i64;
        loop {
            let (p, q) = self.scaled(digits as i64 - 1 - e);
            let m = (&p * 2u32 + &q) / (&q * 2u32);
            let low = Pow::pow(BigUint::from(10u32), digits - 1);
            let high = &low * 10u32;
            if m < low {
                e -= 1;
            } else if m >= high {
                e += 1;
            } else {
                return (m, e);
            }
        }
    }

    /// `numer * 10^k / denom` as a fraction with integer parts.
    fn scaled(&self, k: i64) -> (BigUint, BigUint) {
        let ten = BigUint::from(10u32);
        if k >= 0 {
            (&self.numer * Pow::pow(ten, k as u32), self.denom.clone())
        } else {
            (self.numer.clone(), &self.denom * Pow::pow(ten, (-k) as u32))
        }
    }

    /// `d.ddddeX` with `digits` significant figures.
    pub fn scientific(&self, digits: u32) -> String {
        let (m, e) = self.significant(digits);
        let s = m.to_string();
        if s.len() == 1 {
            format!("{s}e{e}")
        } else {
            format!("{}.{}e{e}", &s[..1], &s[1..])
        }
    }

    pub fn exact(&self) -> String {
        if self.is_integer() {
            self.numer.to_string()
        } else {
            format!("{}/{}", self.numer, self.denom)
        }
    }

    /// `n=<n> exact=<p/q> approx=<d.dddde<x>>`
    pub fn render(&self, digits: u32) -> String {
        format!("n={} exact={} approx={}", self.n, self.exact(), self.scientific(digits))
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(5))
    }
}
