//! Exact rationals, p-adic valuations of rationals, and extended values.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exponent of p in a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (quo, rem) = n.div_rem(&pb);
        if !rem.is_zero() {
            return k;
        }
        n = quo;
        k += 1;
    }
}

/// p-adic valuation of a rational; `None` for zero.
pub fn vp(x: &Q, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(vp_int(x.numer(), p) - vp_int(x.denom(), p))
    }
}

pub fn pow_p(p: u64, k: i64) -> Q {
    let b = BigInt::from(p).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Q::from_integer(b)
    } else {
        Q::new(BigInt::one(), b)
    }
}

pub fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut t, mut nt, mut r, mut nr) = (0i128, 1i128, p as i128, (a % p) as i128);
    while nr != 0 {
        let qq = r / nr;
        (t, nt) = (nt, t - qq * nt);
        (r, nr) = (nr, r - qq * nr);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i128) as u64
}

pub fn int_mod(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

/// Residue class of a p-integral rational in F_p.
pub fn residue_q(x: &Q, p: u64) -> Result<u64> {
    match vp(x, p) {
        None => Ok(0),
        Some(k) if k < 0 => Err(Error::NotIntegral(k.to_string())),
        Some(_) => {
            let n = int_mod(x.numer(), p);
            let d = int_mod(x.denom(), p);
            Ok(n * mod_inverse(d, p) % p)
        }
    }
}

/// Canonical representative of the class of `x` modulo p^m Z_(p).
pub fn reduce_mod_pm(x: &Q, p: u64, m: i64) -> Q {
    let k = match vp(x, p) {
        None => return Q::zero(),
        Some(k) => k,
    };
    if k >= m {
        return Q::zero();
    }
    let unit = x / pow_p(p, k);
    let modulus = BigInt::from(p).pow((m - k) as u32);
    let inv = unit
        .denom()
        .extended_gcd(&modulus)
        .x
        .mod_floor(&modulus);
    let rep = (unit.numer() * inv).mod_floor(&modulus);
    Q::from_integer(rep) * pow_p(p, k)
}

pub fn ceil_q(x: &Q) -> i64 {
    x.ceil().to_integer().to_i64().expect("ceil fits i64")
}

pub fn floor_q(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().expect("floor fits i64")
}

pub fn lcm_u32(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// Smallest multiple of `e` whose value group contains `t`.
pub fn ext_for(e: u32, t: &Q) -> u32 {
    let d = t.denom().to_u32().expect("denominator fits u32");
    lcm_u32(e, d)
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Q::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Q::from_integer(n))
    }
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max_q(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Rational or +∞; the valuation of zero is +∞.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtValue {
    Fin(Q),
    Inf,
}

impl ExtValue {
    pub fn fin(x: Q) -> Self {
        ExtValue::Fin(x)
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtValue::Inf)
    }

    pub fn as_fin(&self) -> Option<&Q> {
        match self {
            ExtValue::Fin(x) => Some(x),
            ExtValue::Inf => None,
        }
    }

    pub fn unwrap_fin(&self) -> Q {
        self.as_fin().cloned().expect("finite value expected")
    }

    pub fn add(&self, o: &ExtValue) -> ExtValue {
        match (self, o) {
            (ExtValue::Fin(a), ExtValue::Fin(b)) => ExtValue::Fin(a + b),
            _ => ExtValue::Inf,
        }
    }

    pub fn add_q(&self, o: &Q) -> ExtValue {
        match self {
            ExtValue::Fin(a) => ExtValue::Fin(a + o),
            ExtValue::Inf => ExtValue::Inf,
        }
    }

    pub fn min(self, o: ExtValue) -> ExtValue {
        std::cmp::min(self, o)
    }

    pub fn max(self, o: ExtValue) -> ExtValue {
        std::cmp::max(self, o)
    }

    pub fn min_q(&self, o: &Q) -> Q {
        match self {
            ExtValue::Fin(a) => min_q(a, o),
            ExtValue::Inf => o.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        match self {
            ExtValue::Fin(a) => fmt_q(a),
            ExtValue::Inf => "inf".to_string(),
        }
    }
}

impl From<Q> for ExtValue {
    fn from(x: Q) -> Self {
        ExtValue::Fin(x)
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations_of_rationals() {
        assert_eq!(vp(&qf(1, 2), 2), Some(-1));
        assert_eq!(vp(&q(50), 5), Some(2));
        assert_eq!(vp(&q(0), 5), None);
    }

    #[test]
    fn residues() {
        assert_eq!(residue_q(&qf(3, 5), 2).unwrap(), 1);
        assert_eq!(residue_q(&qf(2, 3), 5).unwrap(), 4);
        assert!(residue_q(&qf(1, 5), 5).is_err());
    }

    #[test]
    fn reduction_mod_power() {
        let r = reduce_mod_pm(&qf(1, 3), 5, 2);
        assert!(vp(&(r.clone() - qf(1, 3)), 5).map_or(true, |v| v >= 2));
        assert!(r >= q(0) && r < q(25));
        assert_eq!(reduce_mod_pm(&q(50), 5, 2), q(0));
        let s = reduce_mod_pm(&qf(7, 5), 5, 1);
        assert!(vp(&(s - qf(7, 5)), 5).map_or(true, |v| v >= 1));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-3/6").unwrap(), qf(-1, 2));
        assert_eq!(fmt_q(&qf(-1, 2)), "-1/2");
        assert_eq!(fmt_q(&q(4)), "4");
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn ext_order() {
        assert!(ExtValue::Fin(q(100)) < ExtValue::Inf);
        assert_eq!(ExtValue::Inf.add(&ExtValue::Fin(q(1))), ExtValue::Inf);
    }
}
