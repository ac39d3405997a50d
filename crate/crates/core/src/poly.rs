//! Univariate polynomials over the tower, Newton polygons and Gauss norms.

use std::fmt;

use crate::error::{Error, Result};
use crate::rat::{fmt_q, lcm_u32, q, ExtValue, Q};
use crate::tower::TowerElem;

/// Polynomial Σ c_j z^j; all coefficients live at the same ramification level.
#[derive(Clone, Debug)]
pub struct Poly {
    p: u64,
    e: u32,
    c: Vec<TowerElem>,
}

impl Poly {
    pub fn zero(p: u64, e: u32) -> Self {
        Poly { p, e, c: vec![] }
    }

    pub fn constant(x: TowerElem) -> Self {
        Self::from_elems(x.p(), x.e(), vec![x])
    }

    pub fn from_elems(p: u64, e: u32, c: Vec<TowerElem>) -> Self {
        let e = c.iter().fold(e, |acc, x| lcm_u32(acc, x.e()));
        let c = c.into_iter().map(|x| x.embed(e).unwrap()).collect();
        let mut s = Poly { p, e, c };
        s.trim();
        s
    }

    pub fn from_rationals(p: u64, e: u32, c: &[Q]) -> Self {
        Self::from_elems(p, e, c.iter().map(|x| TowerElem::from_q(p, e, x.clone())).collect())
    }

    /// The monomial z.
    pub fn z(p: u64, e: u32) -> Self {
        Self::from_rationals(p, e, &[q(0), q(1)])
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn coeffs(&self) -> &[TowerElem] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> TowerElem {
        self.c.get(i).cloned().unwrap_or_else(|| TowerElem::zero(self.p, self.e))
    }

    pub fn lead(&self) -> TowerElem {
        self.c.last().cloned().unwrap_or_else(|| TowerElem::zero(self.p, self.e))
    }

    pub fn embed(&self, e2: u32) -> Self {
        let e = lcm_u32(self.e, e2);
        if e == self.e {
            return self.clone();
        }
        Poly { p: self.p, e, c: self.c.iter().map(|x| x.embed(e).unwrap()).collect() }
    }

    fn align(&self, o: &Poly) -> (Poly, Poly) {
        (self.embed(o.e), o.embed(self.e))
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (a, b) = self.align(o);
        let n = a.c.len().max(b.c.len());
        let c = (0..n).map(|i| &a.coeff(i) + &b.coeff(i)).collect();
        Poly::from_elems(a.p, a.e, c)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let (a, b) = self.align(o);
        let n = a.c.len().max(b.c.len());
        let c = (0..n).map(|i| &a.coeff(i) - &b.coeff(i)).collect();
        Poly::from_elems(a.p, a.e, c)
    }

    pub fn neg(&self) -> Poly {
        Poly { p: self.p, e: self.e, c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn scale(&self, x: &TowerElem) -> Poly {
        let e = lcm_u32(self.e, x.e());
        let c = self.c.iter().map(|y| y * x).collect();
        Poly::from_elems(self.p, e, c)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.p, lcm_u32(self.e, o.e));
        }
        let (a, b) = self.align(o);
        let mut c = vec![TowerElem::zero(a.p, a.e); a.c.len() + b.c.len() - 1];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                c[i + j] = &c[i + j] + &(x * y);
            }
        }
        Poly::from_elems(a.p, a.e, c)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::constant(TowerElem::one(self.p, self.e));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplication by z^k.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![TowerElem::zero(self.p, self.e); k];
        c.extend(self.c.iter().cloned());
        Poly { p: self.p, e: self.e, c }
    }

    pub fn eval(&self, x: &TowerElem) -> TowerElem {
        let mut acc = TowerElem::zero(self.p, lcm_u32(self.e, x.e()));
        for ci in self.c.iter().rev() {
            acc = &(&acc * x) + ci;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, x)| x.scale_q(&q(i as i64)))
            .collect();
        Poly::from_elems(self.p, self.e, c)
    }

    /// Coefficients of P(a + w) as a polynomial in w.
    pub fn taylor_shift(&self, a: &TowerElem) -> Poly {
        if a.is_zero() {
            return self.embed(a.e());
        }
        let s = self.embed(a.e());
        let a = a.embed_to(s.e);
        let n = s.c.len();
        let mut c = s.c.clone();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = &c[j + 1] * &a;
                c[j] = &c[j] + &t;
            }
        }
        Poly::from_elems(s.p, s.e, c)
    }

    /// P(a + b·w) as a polynomial in w.
    pub fn compose_linear(&self, a: &TowerElem, b: &TowerElem) -> Poly {
        let s = self.taylor_shift(a);
        let mut bp = TowerElem::one(self.p, b.e());
        let mut c = Vec::with_capacity(s.c.len());
        for x in s.c.iter() {
            c.push(x * &bp);
            bp = &bp * b;
        }
        Poly::from_elems(self.p, lcm_u32(s.e, b.e()), c)
    }

    pub fn divmod(&self, o: &Poly) -> Result<(Poly, Poly)> {
        let (a, b) = self.align(o);
        let db = b.deg().ok_or(Error::DivisionByZero)?;
        let inv = b.lead().inv()?;
        let mut r = a.c.clone();
        let mut quo = vec![TowerElem::zero(a.p, a.e); r.len().saturating_sub(db).max(1)];
        while r.len() > db {
            let dr = r.len() - 1;
            if r[dr].is_zero() {
                r.pop();
                continue;
            }
            let coef = &r[dr] * &inv;
            let shift = dr - db;
            for (i, bi) in b.c.iter().enumerate() {
                r[i + shift] = &r[i + shift] - &(&coef * bi);
            }
            r[dr] = TowerElem::zero(a.p, a.e);
            quo[shift] = coef;
            r.pop();
        }
        Ok((Poly::from_elems(a.p, a.e, quo), Poly::from_elems(a.p, a.e, r)))
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().inv().unwrap())
    }

    /// Monic gcd over the tower field.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = self.align(o);
        while !b.is_zero() {
            let (_, r) = a.divmod(&b).unwrap();
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Exact quotient; panics if the division leaves a remainder.
    pub fn div_exact(&self, o: &Poly) -> Poly {
        let (quo, r) = self.divmod(o).unwrap();
        assert!(r.is_zero(), "inexact polynomial division");
        quo
    }

    pub fn vals(&self) -> Vec<ExtValue> {
        self.c.iter().map(|x| x.val()).collect()
    }

    /// Lower convex hull of {(j, v(c_j))} as a list of vertex indices.
    pub fn newton_vertices(&self) -> Vec<(usize, Q)> {
        let pts: Vec<(usize, Q)> = self
            .c
            .iter()
            .enumerate()
            .filter_map(|(j, x)| x.val().as_fin().map(|v| (j, v.clone())))
            .collect();
        let mut hull: Vec<(usize, Q)> = Vec::new();
        for pt in pts {
            while hull.len() >= 2 {
                let (i1, v1) = &hull[hull.len() - 2];
                let (i2, v2) = &hull[hull.len() - 1];
                let lhs = (v2 - v1) * q((pt.0 - i2) as i64);
                let rhs = (&pt.1 - v2) * q((i2 - i1) as i64);
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        hull
    }

    /// Newton polygon segments as (root valuation, number of roots), ordered
    /// by decreasing root valuation; roots at 0 are reported as (∞, k).
    pub fn root_valuations(&self) -> Vec<(ExtValue, usize)> {
        let mut out = Vec::new();
        let low = self.c.iter().position(|x| !x.is_zero()).unwrap_or(0);
        if low > 0 {
            out.push((ExtValue::Inf, low));
        }
        let hull = self.newton_vertices();
        for w in hull.windows(2) {
            let (i1, v1) = &w[0];
            let (i2, v2) = &w[1];
            let slope = (v2 - v1) / q((i2 - i1) as i64);
            out.push((ExtValue::Fin(-slope), i2 - i1));
        }
        out
    }

    /// −log_p |P|_{ζ(a;t)} = min_j v(q_j) + j·t with P(a + w) = Σ q_j w^j.
    pub fn gauss_val(&self, a: &TowerElem, t: &Q) -> ExtValue {
        gauss_from_vals(&self.taylor_shift(a).vals(), t)
    }

    pub fn to_rationals(&self) -> Option<Vec<Q>> {
        self.c.iter().map(|x| x.as_rational().cloned()).collect()
    }
}

pub fn gauss_from_vals(vals: &[ExtValue], t: &Q) -> ExtValue {
    let mut best = ExtValue::Inf;
    for (j, v) in vals.iter().enumerate() {
        best = best.min(v.add_q(&(t * q(j as i64))));
    }
    best
}

impl PartialEq for Poly {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = self.align(o);
        a.c == b.c
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = match c.as_rational() {
                Some(x) => fmt_q(x),
                None => format!("({c})"),
            };
            parts.push(match i {
                0 => cs,
                1 => format!("{cs}*z"),
                _ => format!("{cs}*z^{i}"),
            });
        }
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::qf;

    fn pq(p: u64, c: &[i64]) -> Poly {
        Poly::from_rationals(p, 1, &c.iter().map(|&x| q(x)).collect::<Vec<_>>())
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let f = pq(5, &[3, -2, 0, 1]);
        let a = TowerElem::from_int(5, 1, 2);
        let g = f.taylor_shift(&a);
        for x in [-3i64, 0, 1, 7] {
            let x = TowerElem::from_int(5, 1, x);
            assert_eq!(g.eval(&x), f.eval(&(&a + &x)));
        }
    }

    #[test]
    fn newton_polygon_of_fixed_point_polynomial() {
        let f = Poly::from_rationals(5, 1, &[qf(1, 5), q(-1), q(1)]);
        assert_eq!(f.root_valuations(), vec![(ExtValue::Fin(qf(-1, 2)), 2)]);
    }

    #[test]
    fn gauss_values() {
        let p = 7;
        let z = pq(p, &[0, 1]);
        let zero = TowerElem::zero(p, 1);
        assert_eq!(z.gauss_val(&zero, &q(0)), ExtValue::Fin(q(0)));
        assert_eq!(z.mul(&z).gauss_val(&zero, &q(1)), ExtValue::Fin(q(2)));
        let f = pq(p, &[-1, 1]).mul(&pq(p, &[-7, 1]));
        assert_eq!(f.gauss_val(&zero, &q(1)), ExtValue::Fin(q(1)));
        assert_eq!(
            f.gauss_val(&zero, &q(1)),
            pq(p, &[-1, 1]).gauss_val(&zero, &q(1)).add(&pq(p, &[-7, 1]).gauss_val(&zero, &q(1)))
        );
    }

    #[test]
    fn gcd_and_division() {
        let f = pq(3, &[-1, 0, 1]);
        let g = pq(3, &[-1, 1]).mul(&pq(3, &[5, 1]));
        assert_eq!(f.gcd(&g), pq(3, &[-1, 1]));
        let (quo, r) = f.divmod(&pq(3, &[1, 1])).unwrap();
        assert!(r.is_zero());
        assert_eq!(quo, pq(3, &[-1, 1]));
    }
}
