//! Polynomials and rational maps over the residue field F_p.

use crate::rat::mod_inverse;

/// Dense polynomial over F_p, coefficients ascending, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    pub p: u64,
    pub c: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, c: Vec<u64>) -> Self {
        let mut s = FpPoly { p, c: c.into_iter().map(|x| x % p).collect() };
        s.trim();
        s
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, c: vec![] }
    }

    pub fn constant(p: u64, a: u64) -> Self {
        Self::new(p, vec![a])
    }

    /// z − α
    pub fn linear(p: u64, alpha: u64) -> Self {
        Self::new(p, vec![(p - alpha % p) % p, 1])
    }

    fn trim(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
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

    pub fn lead(&self) -> u64 {
        *self.c.last().unwrap_or(&0)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        *self.c.get(i).unwrap_or(&0)
    }

    pub fn add(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| (self.coeff(i) + o.coeff(i)) % self.p).collect();
        FpPoly::new(self.p, c)
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        let p = self.p;
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|i| (self.coeff(i) + p - o.coeff(i)) % p).collect();
        FpPoly::new(p, c)
    }

    pub fn scale(&self, a: u64) -> FpPoly {
        let p = self.p;
        FpPoly::new(p, self.c.iter().map(|x| x * (a % p) % p).collect())
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = self.p;
        let mut c = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, x) in self.c.iter().enumerate() {
            for (j, y) in o.c.iter().enumerate() {
                c[i + j] = (c[i + j] + x * y) % p;
            }
        }
        FpPoly::new(p, c)
    }

    pub fn divmod(&self, o: &FpPoly) -> (FpPoly, FpPoly) {
        let p = self.p;
        let db = o.deg().expect("division by zero polynomial");
        let inv = mod_inverse(o.lead(), p);
        let mut r = self.c.clone();
        let mut quo = vec![0u64; self.c.len().saturating_sub(db).max(1)];
        while r.len() > db && !r.is_empty() {
            let dr = r.len() - 1;
            let coef = r[dr] * inv % p;
            let shift = dr - db;
            for (i, bi) in o.c.iter().enumerate() {
                r[i + shift] = (r[i + shift] + p - coef * bi % p) % p;
            }
            quo[shift] = coef;
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        (FpPoly::new(p, quo), FpPoly::new(p, r))
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(mod_inverse(self.lead(), self.p))
    }

    /// Monic gcd; gcd(a, 0) = monic(a).
    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divmod(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        let mut acc = 0u64;
        for ci in self.c.iter().rev() {
            acc = (acc * (x % p) + ci) % p;
        }
        acc
    }

    pub fn derivative(&self) -> FpPoly {
        let p = self.p;
        let c = self.c.iter().enumerate().skip(1).map(|(i, x)| (i as u64 % p) * x % p).collect();
        FpPoly::new(p, c)
    }

    /// Order of vanishing at α; `None` for the zero polynomial.
    pub fn ord_at(&self, alpha: u64) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let lin = FpPoly::linear(self.p, alpha);
        let mut g = self.clone();
        let mut k = 0;
        loop {
            let (quo, r) = g.divmod(&lin);
            if !r.is_zero() {
                return Some(k);
            }
            g = quo;
            k += 1;
        }
    }

    /// Roots in F_p with multiplicities.
    pub fn roots(&self) -> Vec<(u64, usize)> {
        (0..self.p)
            .filter_map(|a| match self.ord_at(a) {
                Some(k) if k > 0 => Some((a, k)),
                _ => None,
            })
            .collect()
    }
}

/// A point of P¹(F_p): `Some(a)` is a ∈ F_p, `None` is ∞.
pub type FpPoint = Option<u64>;

pub fn fp_points(p: u64) -> Vec<FpPoint> {
    let mut v: Vec<FpPoint> = (0..p).map(Some).collect();
    v.push(None);
    v
}

/// Homogeneous pair (R0, R1) of degree `k` over F_p, stored through
/// R0(1, z) = a(z), R1(1, z) = b(z); the map is z ↦ b/a.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMap {
    pub p: u64,
    pub k: usize,
    pub a: FpPoly,
    pub b: FpPoly,
}

impl FpMap {
    pub fn degree(&self) -> usize {
        self.k
    }

    /// Value at a point of P¹(F_p).
    pub fn eval(&self, x: FpPoint) -> FpPoint {
        let (u0, u1) = match x {
            Some(a) => (self.a.eval(a), self.b.eval(a)),
            None => (self.a.coeff(self.k), self.b.coeff(self.k)),
        };
        if u0 == 0 {
            debug_assert!(u1 != 0);
            None
        } else {
            Some(u1 * mod_inverse(u0, self.p) % self.p)
        }
    }

    /// Local degree at x: vanishing order of β0·R1 − β1·R0 at x, (β0:β1) = R(x).
    pub fn local_degree(&self, x: FpPoint) -> usize {
        let (b0, b1) = match self.eval(x) {
            Some(y) => (1, y),
            None => (0, 1),
        };
        let qq = self.b.scale(b0).sub(&self.a.scale(b1));
        match x {
            Some(a) => qq.ord_at(a).unwrap_or(0),
            None => self.k - qq.deg().unwrap_or(0),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.k == 1 && self.a == FpPoly::constant(self.p, 1) && self.b == FpPoly::new(self.p, vec![0, 1])
            || self.k == 1
                && self.a.deg() == Some(0)
                && self.b == FpPoly::new(self.p, vec![0, self.a.coeff(0)])
    }

    /// Fixed-point form R1 − z·R0 of degree k+1 as (affine poly, order at ∞).
    pub fn fixed_form(&self) -> (FpPoly, usize) {
        let za = self.a.mul(&FpPoly::new(self.p, vec![0, 1]));
        let f = self.b.sub(&za);
        let ord_inf = match f.deg() {
            Some(d) => self.k + 1 - d,
            None => usize::MAX,
        };
        (f, ord_inf)
    }

    /// ord_x[R = Id]
    pub fn fixed_order(&self, x: FpPoint) -> usize {
        let (f, oinf) = self.fixed_form();
        match x {
            Some(a) => f.ord_at(a).unwrap_or(usize::MAX),
            None => oinf,
        }
    }

    pub fn to_string_affine(&self) -> String {
        format!("({}) / ({})", poly_str(&self.b), poly_str(&self.a))
    }
}

pub fn poly_str(f: &FpPoly) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (i, c) in f.c.iter().enumerate().rev() {
        if *c == 0 {
            continue;
        }
        parts.push(match i {
            0 => format!("{c}"),
            1 => format!("{c}*z"),
            _ => format!("{c}*z^{i}"),
        });
    }
    parts.join(" + ")
}

/// Reduced map from the residues of a lift: D̃ = a, Ñ = b of form degree d,
/// with the common homogeneous factor H returned as (affine gcd, order at ∞).
pub fn reduce_pair(p: u64, d: usize, a: FpPoly, b: FpPoly) -> (FpMap, FpPoly, usize) {
    let g = a.gcd(&b);
    let inf_a = a.deg().map(|x| d - x).unwrap_or(usize::MAX);
    let inf_b = b.deg().map(|x| d - x).unwrap_or(usize::MAX);
    let kinf = inf_a.min(inf_b);
    let (a2, _) = a.divmod(&g);
    let (b2, _) = b.divmod(&g);
    let k = d - g.deg().unwrap_or(0) - kinf;
    (FpMap { p, k, a: a2, b: b2 }, g, kinf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_and_division() {
        let p = 7;
        let f = FpPoly::linear(p, 2).mul(&FpPoly::linear(p, 3));
        let g = FpPoly::linear(p, 3).mul(&FpPoly::linear(p, 5));
        assert_eq!(f.gcd(&g), FpPoly::linear(p, 3));
        let (quo, r) = f.divmod(&FpPoly::linear(p, 2));
        assert!(r.is_zero());
        assert_eq!(quo, FpPoly::linear(p, 3));
        assert_eq!(f.gcd(&FpPoly::zero(p)), f.monic());
    }

    #[test]
    fn orders_and_roots() {
        let p = 5;
        let f = FpPoly::linear(p, 1).mul(&FpPoly::linear(p, 1)).mul(&FpPoly::linear(p, 4));
        assert_eq!(f.ord_at(1), Some(2));
        assert_eq!(f.roots(), vec![(1, 2), (4, 1)]);
        assert!(FpPoly::new(3, vec![1, 0, 1]).roots().is_empty());
    }

    #[test]
    fn squaring_map() {
        let p = 5;
        let m = FpMap { p, k: 2, a: FpPoly::constant(p, 1), b: FpPoly::new(p, vec![0, 0, 1]) };
        assert_eq!(m.eval(Some(2)), Some(4));
        assert_eq!(m.eval(None), None);
        assert_eq!(m.local_degree(Some(0)), 2);
        assert_eq!(m.local_degree(None), 2);
        assert_eq!(m.local_degree(Some(1)), 1);
        assert_eq!(m.fixed_order(Some(0)) + m.fixed_order(Some(1)) + m.fixed_order(None), 3);
    }

    #[test]
    fn constant_reduction() {
        let p = 5;
        let (m, g, kinf) = reduce_pair(p, 2, FpPoly::constant(p, 1), FpPoly::zero(p));
        assert_eq!(m.degree(), 0);
        assert_eq!(g, FpPoly::constant(p, 1));
        assert_eq!(kinf, 2);
        assert_eq!(m.eval(Some(3)), Some(0));
    }
}
