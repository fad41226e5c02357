//! Exact and floating scalar helpers shared by every module.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Exact rational scalar used for LPs, homology and certificates.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // huge numerators: scale down through the integer parts
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Rounds to 12 significant digits, the precision used for all float output.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    let r = sig12(x);
    let s = format!("{r}");
    if s.len() <= 16 {
        s
    } else {
        format!("{r:.11e}")
    }
}

/// Parses "a", "-a", "a/b" or a decimal literal into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Q::from_integer(n));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let v = Q::new(digits, scale);
    Some(if neg { -v } else { v })
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    use num_integer::Integer;
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// A norm-like quantity that keeps exactness whenever possible.
///
/// L¹ and L^∞ values of rational chains are rational; L² values are square
/// roots of rationals; eigenvalue routes give floats.
#[derive(Clone, Debug, PartialEq)]
pub enum Magnitude {
    Rational(Q),
    SqrtOf(Q),
    Float(f64),
    Infinite,
}

impl Magnitude {
    pub fn zero() -> Self {
        Magnitude::Rational(Q::zero())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Magnitude::Rational(r) => q_to_f64(r),
            Magnitude::SqrtOf(r) => q_to_f64(r).sqrt(),
            Magnitude::Float(f) => *f,
            Magnitude::Infinite => f64::INFINITY,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Magnitude::Rational(r) | Magnitude::SqrtOf(r) => r.is_zero(),
            Magnitude::Float(f) => *f == 0.0,
            Magnitude::Infinite => false,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Magnitude::Infinite)
    }

    pub fn recip(&self) -> Magnitude {
        match self {
            Magnitude::Infinite => Magnitude::zero(),
            m if m.is_zero() => Magnitude::Infinite,
            Magnitude::Rational(r) => Magnitude::Rational(r.recip()),
            Magnitude::SqrtOf(r) => Magnitude::SqrtOf(r.recip()),
            Magnitude::Float(f) => Magnitude::Float(1.0 / f),
        }
    }

    /// The exact rational value, when there is one.
    pub fn as_rational(&self) -> Option<&Q> {
        match self {
            Magnitude::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Exact square, available for the rational and square-root forms.
    pub fn square_exact(&self) -> Option<Q> {
        match self {
            Magnitude::Rational(r) => Some(r * r),
            Magnitude::SqrtOf(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn exact_cmp(&self, other: &Magnitude) -> Option<Ordering> {
        use Magnitude::*;
        match (self, other) {
            (Infinite, Infinite) => Some(Ordering::Equal),
            (Infinite, _) => Some(Ordering::Greater),
            (_, Infinite) => Some(Ordering::Less),
            (Float(_), _) | (_, Float(_)) => None,
            (a, b) => Some(a.square_exact()?.cmp(&b.square_exact()?)),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Magnitude::Rational(r) => r.to_string(),
            Magnitude::SqrtOf(r) => format!("sqrt({r})"),
            Magnitude::Float(f) => fmt_f64(*f),
            Magnitude::Infinite => "inf".into(),
        }
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.exact_cmp(other).or_else(|| self.to_f64().partial_cmp(&other.to_f64()))
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Magnitude", 2)?;
        st.serialize_field("exact", &self.render())?;
        let f = self.to_f64();
        if f.is_finite() {
            st.serialize_field("approx", &sig12(f))?;
        } else {
            st.serialize_field("approx", "inf")?;
        }
        st.end()
    }
}

pub fn serialize_q<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(sig12(*x))
    } else {
        s.serialize_str(&fmt_f64(*x))
    }
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}
