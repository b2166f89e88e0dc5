//! Exact scalar arithmetic shared by the probabilistic layer.
//!
//! Probabilities are `Ratio<T>` for an integer type `T`. The default
//! instantiation is arbitrary precision (`BigInt`); fixed-width integers work
//! as long as the caller knows the denominators stay small.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Integer types usable as the numerator/denominator of team weights.
pub trait Scalar:
    Integer + Signed + Clone + Hash + Debug + Display + FromStr + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Clone
        + Hash
        + Debug
        + Display
        + FromStr
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Parses `"p/q"` or `"p"` into a reduced ratio.
pub fn parse_ratio<T: Scalar>(text: &str) -> Result<Ratio<T>> {
    let bad = || Error::Format(format!("not a rational number: {text:?}"));
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: T = num.parse().map_err(|_| bad())?;
    let den: T = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Ratio::new(num, den))
}

/// Formats a ratio as `"p/q"` in lowest terms (always with a denominator).
pub fn format_ratio<T: Scalar>(r: &Ratio<T>) -> String {
    let r = r.reduced();
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio_from_usize<T: Scalar>(n: usize, d: usize) -> Ratio<T> {
    let n = T::from_usize(n).expect("scalar too narrow");
    let d = T::from_usize(d).expect("scalar too narrow");
    Ratio::new(n, d)
}

/// Least common multiple of the denominators of `items` (1 for an empty set).
pub fn denominator_lcm<'a, T: Scalar, I>(items: I) -> T
where
    I: IntoIterator<Item = &'a Ratio<T>>,
{
    items.into_iter().fold(T::one(), |acc, r| acc.lcm(r.denom()))
}

/// Converts an exact integer ratio that is known to be whole into `usize`.
pub fn whole_to_usize<T: Scalar>(r: &Ratio<T>) -> Result<usize> {
    if !r.is_integer() || r.is_negative() {
        return Err(Error::Argument(format!("{} is not a natural number", format_ratio(r))));
    }
    r.to_integer().to_usize().ok_or_else(|| Error::Budget(format!("{} does not fit in usize", format_ratio(r))))
}

pub fn is_one<T: Scalar>(r: &Ratio<T>) -> bool {
    r.is_one()
}
