//! Homogeneous lifts, resultants, Möbius conjugation, reduction and iteration.

use std::cell::OnceCell;

use crate::error::{Error, Result};
use crate::fp::{reduce_pair, FpMap, FpPoly};
use crate::poly::Poly;
use crate::rat::{lcm_u32, ExtValue, Q};
use crate::tower::TowerElem;

/// A point of P¹ over the tower: `Some(x)` finite, `None` the point ∞.
pub type P1 = Option<TowerElem>;

fn form_mul(a: &[TowerElem], b: &[TowerElem]) -> Vec<TowerElem> {
    let p = a[0].p();
    let e = lcm_u32(a[0].e(), b[0].e());
    let mut c = vec![TowerElem::zero(p, e); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            c[i + j] = &c[i + j] + &(x * y);
        }
    }
    c
}

fn form_add(a: &[TowerElem], b: &[TowerElem]) -> Vec<TowerElem> {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

fn form_scale(a: &[TowerElem], s: &TowerElem) -> Vec<TowerElem> {
    a.iter().map(|x| x * s).collect()
}

/// Σ_j c_j G0^{d−j} G1^j for a form c of degree d and forms G0, G1 of equal degree.
fn form_substitute(c: &[TowerElem], g0: &[TowerElem], g1: &[TowerElem]) -> Vec<TowerElem> {
    let d = c.len() - 1;
    let p = c[0].p();
    let one = vec![TowerElem::one(p, 1)];
    let mut pow0 = vec![one.clone()];
    let mut pow1 = vec![one];
    for i in 0..d {
        pow0.push(form_mul(&pow0[i], g0));
        pow1.push(form_mul(&pow1[i], g1));
    }
    let k = g0.len() - 1;
    let e = c.iter().chain(g0).chain(g1).fold(1, |acc, x| lcm_u32(acc, x.e()));
    let mut out = vec![TowerElem::zero(p, e); d * k + 1];
    for (j, cj) in c.iter().enumerate() {
        if cj.is_zero() {
            continue;
        }
        let term = form_scale(&form_mul(&pow0[d - j], &pow1[j]), cj);
        out = form_add(&out, &term);
    }
    out
}

fn det(mut m: Vec<Vec<TowerElem>>) -> TowerElem {
    let n = m.len();
    let p = m[0][0].p();
    let e = m.iter().flatten().fold(1, |acc, x| lcm_u32(acc, x.e()));
    let mut acc = TowerElem::one(p, e);
    for col in 0..n {
        let mut piv = None;
        let mut best = ExtValue::Inf;
        for (r, row) in m.iter().enumerate().skip(col) {
            let v = row[col].val();
            if !row[col].is_zero() && (piv.is_none() || v < best) {
                piv = Some(r);
                best = v;
            }
        }
        let Some(r) = piv else {
            return TowerElem::zero(p, e);
        };
        if r != col {
            m.swap(r, col);
            acc = -&acc;
        }
        let inv = m[col][col].inv().unwrap();
        acc = &acc * &m[col][col];
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] = &m[r][c] - &t;
            }
        }
    }
    acc
}

/// Pair of forms (F0, F1) of degree d; coefficient j multiplies p0^{d−j} p1^j,
/// with F0(1, z) the denominator and F1(1, z) the numerator.
#[derive(Clone, Debug, PartialEq)]
pub struct BiForm {
    pub p: u64,
    pub d: usize,
    pub f0: Vec<TowerElem>,
    pub f1: Vec<TowerElem>,
}

impl BiForm {
    pub fn new(p: u64, d: usize, f0: Vec<TowerElem>, f1: Vec<TowerElem>) -> Self {
        assert_eq!(f0.len(), d + 1);
        assert_eq!(f1.len(), d + 1);
        let e = f0.iter().chain(f1.iter()).fold(1, |acc, x| lcm_u32(acc, x.e()));
        let f0 = f0.iter().map(|x| x.embed(e).unwrap()).collect();
        let f1 = f1.iter().map(|x| x.embed(e).unwrap()).collect();
        BiForm { p, d, f0, f1 }
    }

    pub fn from_polys(num: &Poly, den: &Poly) -> Self {
        let d = num.deg().unwrap_or(0).max(den.deg().unwrap_or(0));
        let f0 = (0..=d).map(|j| den.coeff(j)).collect();
        let f1 = (0..=d).map(|j| num.coeff(j)).collect();
        BiForm::new(num.p(), d, f0, f1)
    }

    pub fn e(&self) -> u32 {
        self.f0[0].e()
    }

    pub fn num(&self) -> Poly {
        Poly::from_elems(self.p, self.e(), self.f1.clone())
    }

    pub fn den(&self) -> Poly {
        Poly::from_elems(self.p, self.e(), self.f0.clone())
    }

    pub fn min_val(&self) -> ExtValue {
        self.f0.iter().chain(self.f1.iter()).map(|x| x.val()).min().unwrap()
    }

    pub fn scale(&self, s: &TowerElem) -> BiForm {
        BiForm::new(self.p, self.d, form_scale(&self.f0, s), form_scale(&self.f1, s))
    }

    /// Division by an element of valuation μ = min coefficient valuation.
    pub fn minimalize(&self) -> (BiForm, Q) {
        let mu = self.min_val().unwrap_fin();
        let e = lcm_u32(self.e(), mu.denom().try_into().unwrap());
        let u = TowerElem::uniformizer_of_valuation(self.p, e, &mu).unwrap();
        let inv = u.inv().unwrap();
        (self.scale(&inv), mu)
    }

    /// Sylvester determinant in the homogeneous convention; Res(p0, p1) = 1.
    pub fn resultant(&self) -> TowerElem {
        let d = self.d;
        let n = 2 * d;
        let z = TowerElem::zero(self.p, self.e());
        let mut m = vec![vec![z.clone(); n]; n];
        for r in 0..d {
            for j in 0..=d {
                m[r][r + j] = self.f0[j].clone();
                m[d + r][r + j] = self.f1[j].clone();
            }
        }
        det(m)
    }

    /// F(G0, G1): the lift of f∘g.
    pub fn compose(&self, g: &BiForm) -> BiForm {
        let f0 = form_substitute(&self.f0, &g.f0, &g.f1);
        let f1 = form_substitute(&self.f1, &g.f0, &g.f1);
        BiForm::new(self.p, self.d * g.d, f0, f1)
    }
}

/// 2×2 matrix acting on column vectors (p0, p1); z ↦ (m10 + m11 z)/(m00 + m01 z).
#[derive(Clone, Debug, PartialEq)]
pub struct Mobius {
    pub m: [[TowerElem; 2]; 2],
}

impl Mobius {
    pub fn new(m00: TowerElem, m01: TowerElem, m10: TowerElem, m11: TowerElem) -> Result<Self> {
        let mm = Mobius { m: [[m00, m01], [m10, m11]] };
        if mm.det().is_zero() {
            return Err(Error::Invalid("singular Möbius matrix".into()));
        }
        Ok(mm)
    }

    pub fn identity(p: u64) -> Self {
        let o = TowerElem::one(p, 1);
        let z = TowerElem::zero(p, 1);
        Mobius { m: [[o.clone(), z.clone()], [z, o]] }
    }

    /// H_{a,b}(p0, p1) = (p0, a·p0 + b·p1), realizing z ↦ a + b·z.
    pub fn affine(a: &TowerElem, b: &TowerElem) -> Self {
        let p = a.p();
        Mobius { m: [[TowerElem::one(p, 1), TowerElem::zero(p, 1)], [a.clone(), b.clone()]] }
    }

    /// z ↦ 1/z
    pub fn flip(p: u64) -> Self {
        let o = TowerElem::one(p, 1);
        let z = TowerElem::zero(p, 1);
        Mobius { m: [[z.clone(), o.clone()], [o, z]] }
    }

    pub fn det(&self) -> TowerElem {
        &(&self.m[0][0] * &self.m[1][1]) - &(&self.m[0][1] * &self.m[1][0])
    }

    pub fn adj(&self) -> Mobius {
        let [[a, b], [c, d]] = &self.m;
        Mobius { m: [[d.clone(), -b], [-c, a.clone()]] }
    }

    pub fn mul(&self, o: &Mobius) -> Mobius {
        let a = &self.m;
        let b = &o.m;
        let cell = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
        Mobius { m: [[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]] }
    }

    pub fn as_biform(&self) -> BiForm {
        let p = self.m[0][0].p();
        BiForm::new(p, 1, vec![self.m[0][0].clone(), self.m[0][1].clone()], vec![self.m[1][0].clone(), self.m[1][1].clone()])
    }

    pub fn apply(&self, z: &P1) -> P1 {
        let (u0, u1) = match z {
            Some(x) => (&self.m[0][0] + &(&self.m[0][1] * x), &self.m[1][0] + &(&self.m[1][1] * x)),
            None => (self.m[0][1].clone(), self.m[1][1].clone()),
        };
        if u0.is_zero() {
            None
        } else {
            Some(u1.div(&u0).unwrap())
        }
    }
}

/// Reduction over F_p of a minimal lift with its common factor H.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub map: FpMap,
    pub gcd: FpPoly,
    pub kinf: usize,
}

impl Reduction {
    pub fn degree(&self) -> usize {
        self.map.degree()
    }

    /// ord_x(H)
    pub fn common_order(&self, x: crate::fp::FpPoint) -> usize {
        match x {
            Some(a) => self.gcd.ord_at(a).unwrap_or(0),
            None => self.kinf,
        }
    }
}

/// Rational map with its minimal homogeneous lift.
#[derive(Clone, Debug)]
pub struct RationalMap {
    lift: BiForm,
    res_val: OnceCell<Q>,
}

impl std::fmt::Display for RationalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})/({})", self.num(), self.den())
    }
}

impl RationalMap {
    pub fn from_biform(f: &BiForm) -> Result<Self> {
        let m = Self::from_biform_unchecked(f);
        if m.degree() == 0 {
            return Err(Error::Invalid("constant map".into()));
        }
        if m.lift.resultant().is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(m)
    }

    /// Minimalizes without recomputing the resultant; for lifts known to be nondegenerate.
    pub fn from_biform_unchecked(f: &BiForm) -> Self {
        let (lift, _) = f.minimalize();
        RationalMap { lift, res_val: OnceCell::new() }
    }

    pub fn from_polys(num: &Poly, den: &Poly) -> Result<Self> {
        Self::from_biform(&BiForm::from_polys(num, den))
    }

    pub fn from_rationals(p: u64, num: &[Q], den: &[Q]) -> Result<Self> {
        Self::from_polys(&Poly::from_rationals(p, 1, num), &Poly::from_rationals(p, 1, den))
    }

    pub fn lift(&self) -> &BiForm {
        &self.lift
    }

    pub fn p(&self) -> u64 {
        self.lift.p
    }

    pub fn e(&self) -> u32 {
        self.lift.e()
    }

    pub fn degree(&self) -> usize {
        self.lift.d
    }

    pub fn num(&self) -> Poly {
        self.lift.num()
    }

    pub fn den(&self) -> Poly {
        self.lift.den()
    }

    /// v(Res) of the minimal lift.
    pub fn res_val(&self) -> Q {
        self.res_val.get_or_init(|| self.lift.resultant().val().unwrap_fin()).clone()
    }

    /// adj(M)∘F∘M, a lift of h^{-1}∘f∘h.
    pub fn conjugate(&self, m: &Mobius) -> RationalMap {
        let fm = self.lift.compose(&m.as_biform());
        let adj = m.adj();
        let g = adj.as_biform().compose(&fm);
        RationalMap::from_biform_unchecked(&g)
    }

    /// adj(M2)∘F∘M1, a lift of h2^{-1}∘f∘h1.
    pub fn transport(&self, m1: &Mobius, m2: &Mobius) -> RationalMap {
        let fm = self.lift.compose(&m1.as_biform());
        let g = m2.adj().as_biform().compose(&fm);
        RationalMap::from_biform_unchecked(&g)
    }

    /// f∘g
    pub fn compose(&self, g: &RationalMap) -> RationalMap {
        RationalMap::from_biform_unchecked(&self.lift.compose(&g.lift))
    }

    pub fn iterate(&self, n: u32, cap: u64) -> Result<RationalMap> {
        let d = self.degree() as u64;
        let dn = d.checked_pow(n).unwrap_or(u64::MAX);
        if dn > cap {
            return Err(Error::DegreeCap(dn, cap));
        }
        assert!(n >= 1);
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc);
        }
        Ok(acc)
    }

    pub fn eval(&self, z: &P1) -> P1 {
        let (u0, u1) = match z {
            Some(x) => (self.den().eval(x), self.num().eval(x)),
            None => (self.lift.f0[self.degree()].clone(), self.lift.f1[self.degree()].clone()),
        };
        if u0.is_zero() {
            None
        } else {
            Some(u1.div(&u0).unwrap())
        }
    }

    pub fn reduce(&self) -> Reduction {
        let p = self.p();
        let res = |v: &[TowerElem]| FpPoly::new(p, v.iter().map(|x| x.residue().unwrap()).collect());
        let (map, gcd, kinf) = reduce_pair(p, self.degree(), res(&self.lift.f0), res(&self.lift.f1));
        Reduction { map, gcd, kinf }
    }

    /// Numerator of f(z) − z and the multiplicity of ∞ in [f = Id].
    pub fn fixed_point_divisor(&self) -> (Poly, usize) {
        let z = Poly::z(self.p(), self.e());
        let poly = self.num().sub(&z.mul(&self.den()));
        let dg = poly.deg().expect("f is not the identity");
        (poly, self.degree() + 1 - dg)
    }

    /// f' at a finite non-pole a.
    pub fn derivative_at(&self, a: &TowerElem) -> TowerElem {
        let (n, d) = (self.num(), self.den());
        let da = d.eval(a);
        let top = &(&n.derivative().eval(a) * &da) - &(&n.eval(a) * &d.derivative().eval(a));
        top.div(&(&da * &da)).unwrap()
    }

    /// v(f^#(a)) for the chordal derivative; +∞ when f^#(a) = 0.
    pub fn chordal_derivative_val(&self, a: &P1) -> ExtValue {
        let p = self.p();
        match a {
            None => {
                let h = self.conjugate(&Mobius::flip(p));
                let h = RationalMap::from_biform_unchecked(&Mobius::flip(p).as_biform().compose(&h.lift));
                h.chordal_derivative_val(&Some(TowerElem::zero(p, 1)))
            }
            Some(x) => {
                let fx = self.eval(a);
                let neg = |v: ExtValue| match v {
                    ExtValue::Fin(q) if q < Q::from_integer(0.into()) => -q,
                    _ => Q::from_integer(0.into()),
                };
                let src = neg(x.val());
                match fx {
                    Some(y) => {
                        let dv = self.derivative_at(x).val();
                        dv.add_q(&(-src * Q::from_integer(2.into()) + neg(y.val()) * Q::from_integer(2.into())))
                    }
                    None => {
                        let g = RationalMap::from_biform_unchecked(&Mobius::flip(p).as_biform().compose(&self.lift));
                        g.chordal_derivative_val(a)
                    }
                }
            }
        }
    }
}
