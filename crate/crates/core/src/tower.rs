//! The totally ramified tower Q(π), π^e = p, with exact valuations.

use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::rat::{ceil_q, ext_for, floor_q, fmt_q, lcm_u32, pow_p, q, qf, reduce_mod_pm, residue_q, vp, ExtValue, Q};

/// Prime and ramification index of a tower level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TowerContext {
    pub p: u64,
    pub e: u32,
}

impl TowerContext {
    pub fn new(p: u64, e: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        if e == 0 {
            return Err(Error::Invalid("ramification index must be positive".into()));
        }
        Ok(TowerContext { p, e })
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Σ c_i π^i with rational c_i, 0 ≤ i < e.
#[derive(Clone, Debug)]
pub struct TowerElem {
    p: u64,
    e: u32,
    c: Vec<Q>,
}

impl TowerElem {
    pub fn zero(p: u64, e: u32) -> Self {
        TowerElem { p, e, c: vec![Q::zero(); e as usize] }
    }

    pub fn one(p: u64, e: u32) -> Self {
        Self::from_q(p, e, Q::one())
    }

    pub fn from_q(p: u64, e: u32, x: Q) -> Self {
        let mut c = vec![Q::zero(); e as usize];
        c[0] = x;
        TowerElem { p, e, c }
    }

    pub fn from_int(p: u64, e: u32, n: i64) -> Self {
        Self::from_q(p, e, q(n))
    }

    /// The uniformizer π of level e.
    pub fn pi(p: u64, e: u32) -> Self {
        if e == 1 {
            return Self::from_int(p, 1, p as i64);
        }
        let mut c = vec![Q::zero(); e as usize];
        c[1] = Q::one();
        TowerElem { p, e, c }
    }

    pub fn from_coeffs(p: u64, e: u32, c: Vec<Q>) -> Result<Self> {
        if c.len() != e as usize {
            return Err(Error::Invalid(format!("expected {e} coefficients, got {}", c.len())));
        }
        Ok(TowerElem { p, e, c })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn context(&self) -> TowerContext {
        TowerContext { p: self.p, e: self.e }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn as_rational(&self) -> Option<&Q> {
        if self.c[1..].iter().all(|x| x.is_zero()) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    pub fn val(&self) -> ExtValue {
        let mut best = ExtValue::Inf;
        for (i, ci) in self.c.iter().enumerate() {
            if let Some(k) = vp(ci, self.p) {
                let v = ExtValue::Fin(q(k) + qf(i as i64, self.e as i64));
                best = best.min(v);
            }
        }
        best
    }

    /// Image under π_e ↦ π_{e'}^{e'/e}.
    pub fn embed(&self, e2: u32) -> Result<Self> {
        if e2 % self.e != 0 {
            return Err(Error::BadEmbedding(self.e, e2));
        }
        if e2 == self.e {
            return Ok(self.clone());
        }
        let k = (e2 / self.e) as usize;
        let mut c = vec![Q::zero(); e2 as usize];
        for (i, ci) in self.c.iter().enumerate() {
            c[i * k] = ci.clone();
        }
        Ok(TowerElem { p: self.p, e: e2, c })
    }

    pub fn embed_to(&self, e2: u32) -> Self {
        self.embed(lcm_u32(self.e, e2)).expect("lcm embedding")
    }

    fn align(&self, o: &TowerElem) -> (TowerElem, TowerElem) {
        assert_eq!(self.p, o.p, "mixed primes");
        if self.e == o.e {
            return (self.clone(), o.clone());
        }
        let e = lcm_u32(self.e, o.e);
        (self.embed(e).unwrap(), o.embed(e).unwrap())
    }

    pub fn residue(&self) -> Result<u64> {
        let v = self.val();
        if let ExtValue::Fin(x) = &v {
            if *x < Q::zero() {
                return Err(Error::NotIntegral(fmt_q(x)));
            }
        }
        residue_q(&self.c[0], self.p)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(x) = self.as_rational() {
            return Ok(Self::from_q(self.p, self.e, x.recip()));
        }
        let e = self.e as usize;
        let mut modulus = vec![Q::zero(); e + 1];
        modulus[0] = -Q::from_integer(self.p.into());
        modulus[e] = Q::one();
        let inv = qpoly_inverse_mod(&self.c, &modulus);
        let mut c = inv;
        c.resize(e, Q::zero());
        Ok(TowerElem { p: self.p, e: self.e, c })
    }

    pub fn div(&self, o: &TowerElem) -> Result<Self> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.p, self.e);
        let mut b = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            n >>= 1;
        }
        acc
    }

    pub fn scale_q(&self, x: &Q) -> Self {
        TowerElem { p: self.p, e: self.e, c: self.c.iter().map(|ci| ci * x).collect() }
    }

    /// Canonical representative of the class of self modulo {v ≥ prec}.
    pub fn truncate(&self, prec: &Q) -> Self {
        let e = self.e as i64;
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, ci)| {
                let m = ceil_q(&(prec - qf(i as i64, e)));
                reduce_mod_pm(ci, self.p, m)
            })
            .collect();
        TowerElem { p: self.p, e: self.e, c }
    }

    /// p^⌊t⌋ π^{(t−⌊t⌋)e}, an element of valuation exactly t.
    pub fn uniformizer_of_valuation(p: u64, e: u32, t: &Q) -> Result<Self> {
        let te = t * Q::from_integer((e as i64).into());
        if !te.is_integer() {
            return Err(Error::NotInValueGroup(fmt_q(t), e));
        }
        let fl = floor_q(t);
        let frac = t - q(fl);
        let k = floor_q(&(frac * Q::from_integer((e as i64).into()))) as u32;
        let base = Self::from_q(p, e, pow_p(p, fl));
        if k == 0 {
            return Ok(base);
        }
        Ok(&base * &Self::pi(p, e).pow(k))
    }

    /// Ramification index needed so that `t` lies in the value group.
    pub fn ext_needed(&self, t: &Q) -> u32 {
        ext_for(self.e, t)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "e": self.e,
            "coeffs": self.c.iter().map(fmt_q).collect::<Vec<_>>(),
        })
    }
}

impl PartialEq for TowerElem {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = self.align(o);
        a.c == b.c
    }
}

impl Eq for TowerElem {}

impl fmt::Display for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, ci) in self.c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            match i {
                0 => parts.push(fmt_q(ci)),
                1 => parts.push(format!("({})*pi", fmt_q(ci))),
                _ => parts.push(format!("({})*pi^{i}", fmt_q(ci))),
            }
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

impl<'a> Add<&'a TowerElem> for &'a TowerElem {
    type Output = TowerElem;
    fn add(self, o: &TowerElem) -> TowerElem {
        let (a, b) = self.align(o);
        let c = a.c.iter().zip(b.c.iter()).map(|(x, y)| x + y).collect();
        TowerElem { p: a.p, e: a.e, c }
    }
}

impl<'a> Sub<&'a TowerElem> for &'a TowerElem {
    type Output = TowerElem;
    fn sub(self, o: &TowerElem) -> TowerElem {
        let (a, b) = self.align(o);
        let c = a.c.iter().zip(b.c.iter()).map(|(x, y)| x - y).collect();
        TowerElem { p: a.p, e: a.e, c }
    }
}

impl<'a> Neg for &'a TowerElem {
    type Output = TowerElem;
    fn neg(self) -> TowerElem {
        TowerElem { p: self.p, e: self.e, c: self.c.iter().map(|x| -x).collect() }
    }
}

impl<'a> Mul<&'a TowerElem> for &'a TowerElem {
    type Output = TowerElem;
    fn mul(self, o: &TowerElem) -> TowerElem {
        if let Some(x) = o.as_rational() {
            if self.e >= o.e {
                return self.scale_q(x);
            }
        }
        if let Some(x) = self.as_rational() {
            if o.e >= self.e {
                return o.scale_q(x);
            }
        }
        let (a, b) = self.align(o);
        let e = a.e as usize;
        let pq = Q::from_integer(a.p.into());
        let mut c = vec![Q::zero(); e];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let prod = x * y;
                if i + j < e {
                    c[i + j] += prod;
                } else {
                    c[i + j - e] += prod * &pq;
                }
            }
        }
        TowerElem { p: a.p, e: a.e, c }
    }
}

fn qpoly_trim(a: &mut Vec<Q>) {
    while a.len() > 1 && a.last().unwrap().is_zero() {
        a.pop();
    }
}

fn qpoly_deg(a: &[Q]) -> Option<usize> {
    a.iter().rposition(|x| !x.is_zero())
}

fn qpoly_divmod(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let db = qpoly_deg(b).expect("nonzero divisor");
    let mut r = a.to_vec();
    let mut quo = vec![Q::zero(); a.len().max(1)];
    let lead = b[db].clone();
    while let Some(dr) = qpoly_deg(&r) {
        if dr < db {
            break;
        }
        let coef = &r[dr] / &lead;
        let shift = dr - db;
        for (i, bi) in b.iter().enumerate().take(db + 1) {
            r[i + shift] -= &coef * bi;
        }
        quo[shift] = coef;
    }
    qpoly_trim(&mut r);
    qpoly_trim(&mut quo);
    (quo, r)
}

fn qpoly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut c = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    qpoly_trim(&mut c);
    c
}

fn qpoly_sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().max(b.len());
    let mut c = vec![Q::zero(); n];
    for (i, x) in a.iter().enumerate() {
        c[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        c[i] -= y;
    }
    qpoly_trim(&mut c);
    c
}

/// Inverse of `a` modulo an irreducible `m` by the extended Euclidean algorithm.
fn qpoly_inverse_mod(a: &[Q], m: &[Q]) -> Vec<Q> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    qpoly_trim(&mut r1);
    let (mut t0, mut t1) = (vec![Q::zero()], vec![Q::one()]);
    while qpoly_deg(&r1).expect("irreducible modulus") > 0 {
        let (quo, rem) = qpoly_divmod(&r0, &r1);
        let t2 = qpoly_sub(&t0, &qpoly_mul(&quo, &t1));
        r0 = r1;
        r1 = rem;
        t0 = t1;
        t1 = t2;
    }
    let c = r1[0].clone();
    let (_, t) = qpoly_divmod(&t1, m);
    t.iter().map(|x| x / &c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn te(p: u64, e: u32, c: &[(i64, i64)]) -> TowerElem {
        TowerElem::from_coeffs(p, e, c.iter().map(|&(n, d)| qf(n, d)).collect()).unwrap()
    }

    #[test]
    fn val_of_p_is_one() {
        for e in 1..4 {
            assert_eq!(TowerElem::from_int(5, e, 5).val(), ExtValue::Fin(q(1)));
        }
    }

    #[test]
    fn val_of_pi() {
        assert_eq!(TowerElem::pi(3, 2).val(), ExtValue::Fin(qf(1, 2)));
    }

    #[test]
    fn val_of_half_at_two() {
        assert_eq!(TowerElem::from_q(2, 1, qf(1, 2)).val(), ExtValue::Fin(q(-1)));
        assert_eq!(TowerElem::zero(2, 1).val(), ExtValue::Inf);
    }

    #[test]
    fn pi_squared_is_p() {
        let pi = TowerElem::pi(7, 2);
        assert_eq!(&pi * &pi, TowerElem::from_int(7, 2, 7));
    }

    #[test]
    fn inverse_of_pi() {
        let pi = TowerElem::pi(7, 2);
        assert_eq!(pi.inv().unwrap(), pi.scale_q(&qf(1, 7)));
        let x = te(7, 3, &[(1, 2), (3, 1), (-2, 5)]);
        assert_eq!(&x * &x.inv().unwrap(), TowerElem::one(7, 3));
    }

    #[test]
    fn one_plus_pi_plus_one_minus_pi() {
        let pi = TowerElem::pi(3, 2);
        let one = TowerElem::one(3, 2);
        assert_eq!(&(&one + &pi) + &(&one - &pi), TowerElem::from_int(3, 2, 2));
    }

    #[test]
    fn residues() {
        assert_eq!(TowerElem::from_int(5, 1, 6).residue().unwrap(), 1);
        assert_eq!(TowerElem::pi(5, 2).residue().unwrap(), 0);
        assert_eq!(TowerElem::from_q(2, 1, qf(3, 5)).residue().unwrap(), 1);
        assert!(TowerElem::from_q(5, 1, qf(1, 5)).residue().is_err());
    }

    #[test]
    fn embedding() {
        let pi = TowerElem::pi(3, 2);
        let pi4 = TowerElem::pi(3, 4);
        assert_eq!(pi.embed(4).unwrap(), &pi4 * &pi4);
        assert!(pi.embed(3).is_err());
        let r = TowerElem::from_q(3, 1, qf(2, 9));
        assert_eq!(r.embed(6).unwrap().as_rational().unwrap(), &qf(2, 9));
    }

    #[test]
    fn uniformizers() {
        assert_eq!(TowerElem::uniformizer_of_valuation(5, 1, &q(1)).unwrap(), TowerElem::from_int(5, 1, 5));
        assert_eq!(TowerElem::uniformizer_of_valuation(5, 2, &qf(1, 2)).unwrap(), TowerElem::pi(5, 2));
        let u = TowerElem::uniformizer_of_valuation(5, 2, &qf(-3, 2)).unwrap();
        assert_eq!(u.val(), ExtValue::Fin(qf(-3, 2)));
        assert_eq!(u, TowerElem::pi(5, 2).scale_q(&qf(1, 25)));
        assert!(TowerElem::uniformizer_of_valuation(5, 2, &qf(1, 3)).is_err());
    }

    #[test]
    fn truncation_is_canonical() {
        let a = te(5, 2, &[(1, 3), (7, 1)]);
        let b = &a + &TowerElem::pi(5, 2).pow(5);
        let prec = qf(5, 2);
        assert_eq!(a.truncate(&prec), b.truncate(&prec));
        assert!((&a - &a.truncate(&prec)).val() >= ExtValue::Fin(prec));
    }
}
