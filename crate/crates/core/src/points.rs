//! Points of the Berkovich projective line, Hsia kernel, metric, joins and images.

use std::fmt;

use crate::error::{Error, Result};
use crate::fp::FpPoint;
use crate::maps::{Mobius, RationalMap, P1};
use crate::poly::Poly;
use crate::rat::{fmt_q, q, ExtValue, Q};
use crate::roots::unif;
use crate::tower::TowerElem;

/// Type I point (finite or ∞) or type II point ζ(center; t) of radius p^{−t}.
#[derive(Clone, Debug)]
pub enum BerkPoint {
    Finite(TowerElem),
    Infinity,
    Disk { center: TowerElem, t: Q },
}

use BerkPoint::{Disk, Finite, Infinity};

impl PartialEq for BerkPoint {
    fn eq(&self, o: &Self) -> bool {
        match (self, o) {
            (Finite(a), Finite(b)) => a == b,
            (Infinity, Infinity) => true,
            (Disk { center: a, t: s }, Disk { center: b, t }) => s == t && (a - b).val() >= ExtValue::Fin(t.clone()),
            _ => false,
        }
    }
}

impl Eq for BerkPoint {}

impl BerkPoint {
    /// ζ(c; t) with the center truncated to its canonical class.
    pub fn zeta(c: &TowerElem, t: &Q) -> Self {
        Disk { center: c.truncate(t), t: t.clone() }
    }

    pub fn zeta_q(p: u64, c: &Q, t: &Q) -> Self {
        Self::zeta(&TowerElem::from_q(p, 1, c.clone()), t)
    }

    pub fn s_can(p: u64) -> Self {
        Disk { center: TowerElem::zero(p, 1), t: q(0) }
    }

    pub fn from_p1(x: &P1) -> Self {
        match x {
            Some(a) => Finite(a.clone()),
            None => Infinity,
        }
    }

    pub fn is_type_ii(&self) -> bool {
        matches!(self, Disk { .. })
    }

    pub fn is_type_i(&self) -> bool {
        !self.is_type_ii()
    }

    pub fn center(&self) -> Option<&TowerElem> {
        match self {
            Finite(a) | Disk { center: a, .. } => Some(a),
            Infinity => None,
        }
    }

    /// Depth in the tree rooted at ∞: t for ζ(a; t), +∞ for finite type I points.
    pub fn depth(&self) -> Option<ExtValue> {
        match self {
            Finite(_) => Some(ExtValue::Inf),
            Disk { t, .. } => Some(ExtValue::Fin(t.clone())),
            Infinity => None,
        }
    }

    pub fn t(&self) -> Option<&Q> {
        match self {
            Disk { t, .. } => Some(t),
            _ => None,
        }
    }

    /// Meet of the two paths to ∞.
    pub fn meet_inf(&self, o: &BerkPoint) -> BerkPoint {
        let (a, da) = match (self.center(), self.depth()) {
            (Some(a), Some(d)) => (a, d),
            _ => return Infinity,
        };
        let (b, db) = match (o.center(), o.depth()) {
            (Some(b), Some(d)) => (b, d),
            _ => return Infinity,
        };
        let m = da.min(db).min((a - b).val());
        match m {
            ExtValue::Inf => self.clone(),
            ExtValue::Fin(t) => BerkPoint::zeta(a, &t),
        }
    }

    /// True when self lies on the path from `o` to ∞.
    pub fn is_ancestor_of(&self, o: &BerkPoint) -> bool {
        &self.meet_inf(o) == self
    }

    /// The unique point common to the three paths between a, b, c.
    pub fn median(a: &BerkPoint, b: &BerkPoint, c: &BerkPoint) -> BerkPoint {
        if *a == Infinity {
            return b.meet_inf(c);
        }
        if *b == Infinity {
            return a.meet_inf(c);
        }
        if *c == Infinity {
            return a.meet_inf(b);
        }
        let ms = [a.meet_inf(b), a.meet_inf(c), b.meet_inf(c)];
        ms.into_iter().max_by(|x, y| x.depth().cmp(&y.depth())).unwrap()
    }

    /// S ∧_{S0} S′
    pub fn join(s: &BerkPoint, s2: &BerkPoint, s0: &BerkPoint) -> BerkPoint {
        Self::median(s, s2, s0)
    }

    /// Hyperbolic distance in log-p units; +∞ when a type I point is involved and the points differ.
    pub fn rho(&self, o: &BerkPoint) -> ExtValue {
        if self == o {
            return ExtValue::Fin(q(0));
        }
        match (self, o) {
            (Disk { center: a, t: s }, Disk { center: b, t }) => {
                let u = ExtValue::Fin(s.clone()).min(ExtValue::Fin(t.clone())).min((a - b).val()).unwrap_fin();
                ExtValue::Fin(s + t - &u - &u)
            }
            _ => ExtValue::Inf,
        }
    }

    pub fn rho_fin(&self, o: &BerkPoint) -> Q {
        self.rho(o).unwrap_fin()
    }

    /// −log_p [S, S′]_can = ρ(S_can, S ∧_can S′).
    pub fn hsia_can(&self, o: &BerkPoint, p: u64) -> ExtValue {
        let sc = BerkPoint::s_can(p);
        sc.rho(&BerkPoint::join(self, o, &sc))
    }

    /// z ↦ 1/z
    pub fn flip(&self, p: u64) -> BerkPoint {
        match self {
            Infinity => Finite(TowerElem::zero(p, 1)),
            Finite(a) if a.is_zero() => Infinity,
            Finite(a) => Finite(a.inv().unwrap()),
            Disk { center, t } => {
                let v = center.val();
                if v >= ExtValue::Fin(t.clone()) {
                    BerkPoint::zeta(&TowerElem::zero(center.p(), 1), &-t)
                } else {
                    let vb = v.unwrap_fin();
                    BerkPoint::zeta(&center.inv().unwrap(), &(t - &vb - &vb))
                }
            }
        }
    }

    /// Image under z ↦ a + b z.
    pub fn affine_image(&self, a: &TowerElem, b: &TowerElem) -> BerkPoint {
        match self {
            Infinity => Infinity,
            Finite(x) => Finite(a + &(b * x)),
            Disk { center, t } => BerkPoint::zeta(&(a + &(b * center)), &(t + b.val().unwrap_fin())),
        }
    }

    /// Inverse of z ↦ a + b z.
    pub fn affine_preimage(&self, a: &TowerElem, b: &TowerElem) -> BerkPoint {
        let binv = b.inv().unwrap();
        let a2 = -&(a * &binv);
        self.affine_image(&a2, &binv)
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Infinity => serde_json::json!({"type": "I", "center": "inf"}),
            Finite(a) => serde_json::json!({"type": "I", "center": elem_json(a)}),
            Disk { center, t } => serde_json::json!({"type": "II", "center": elem_json(center), "t": fmt_q(t)}),
        }
    }
}

/// Rational elements serialize as "num/den"; others as the coefficient object.
pub fn elem_json(a: &TowerElem) -> serde_json::Value {
    match a.as_rational() {
        Some(r) => serde_json::Value::String(fmt_q(r)),
        None => a.to_json(),
    }
}

impl fmt::Display for BerkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infinity => write!(f, "inf"),
            Finite(a) => write!(f, "{a}"),
            Disk { center, t } => write!(f, "{center};{}", fmt_q(t)),
        }
    }
}

/// Parse "c;t" (type II), "c" (type I) or "inf".
pub fn parse_point(p: u64, s: &str) -> Result<BerkPoint> {
    let s = s.trim();
    if s == "inf" {
        return Ok(Infinity);
    }
    match s.split_once(';') {
        Some((c, t)) => {
            let c = crate::rat::parse_q(c)?;
            let t = crate::rat::parse_q(t)?;
            Ok(BerkPoint::zeta_q(p, &c, &t))
        }
        None => Ok(Finite(TowerElem::from_q(p, 1, crate::rat::parse_q(s)?))),
    }
}

/// −log_p |P|_S
pub fn gauss_val(poly: &Poly, s: &BerkPoint) -> Result<ExtValue> {
    match s {
        Disk { center, t } => Ok(poly.gauss_val(center, t)),
        _ => Err(Error::UnsupportedPointType(s.to_string())),
    }
}

/// −log_p |N/D|_S
pub fn seminorm_val(num: &Poly, den: &Poly, s: &BerkPoint) -> Result<ExtValue> {
    let gn = gauss_val(num, s)?;
    let gd = gauss_val(den, s)?.unwrap_fin();
    Ok(gn.add_q(&-gd))
}

/// Scaling element and conjugator data for ζ(c; t): z ↦ c + u z sends S_can to it.
pub fn chart(s: &BerkPoint) -> Result<(TowerElem, TowerElem)> {
    match s {
        Disk { center, t } => Ok((center.clone(), unif(center.p(), center.e(), t))),
        _ => Err(Error::UnsupportedPointType(s.to_string())),
    }
}

/// Residue class at S of the direction toward `x` (↑ = None).
pub fn direction_to(s: &BerkPoint, x: &BerkPoint) -> Result<FpPoint> {
    if s == x {
        return Err(Error::Invalid("direction toward the base point".into()));
    }
    let (c, u) = chart(s)?;
    if *x == Infinity || !s.is_ancestor_of(x) {
        return Ok(None);
    }
    let w = (x.center().unwrap() - &c).div(&u)?;
    Ok(Some(w.residue()?))
}

/// A point at distance ε from S in direction α.
pub fn step_in_direction(s: &BerkPoint, dir: FpPoint, eps: &Q) -> Result<BerkPoint> {
    let (c, u) = chart(s)?;
    let t = s.t().unwrap();
    Ok(match dir {
        Some(a) => BerkPoint::zeta(&(&c + &(&u * &TowerElem::from_int(c.p(), 1, a as i64))), &(t + eps)),
        None => BerkPoint::zeta(&c, &(t - eps)),
    })
}

/// Center on the path into direction α at S: the path is ζ(center; t′), t′ > t for α finite.
pub fn direction_center(s: &BerkPoint, dir: FpPoint) -> Result<TowerElem> {
    let (c, u) = chart(s)?;
    Ok(match dir {
        Some(a) => &c + &(&u * &TowerElem::from_int(c.p(), 1, a as i64)),
        None => c,
    })
}

/// Index minimizing v(d_j) + j t; the image center is n_k / d_k.
fn dominant_index(dvals: &[ExtValue], t: &Q) -> usize {
    let mut best = 0;
    let mut bv = ExtValue::Inf;
    for (j, v) in dvals.iter().enumerate() {
        let w = v.add_q(&(t * q(j as i64)));
        if w < bv {
            bv = w;
            best = j;
        }
    }
    best
}

/// f(S) for any S; type II images are ζ(n_k/d_k, g(t)) with k the dominant index of D at S.
pub fn map_image(f: &RationalMap, s: &BerkPoint) -> Result<BerkPoint> {
    match s {
        Infinity => Ok(BerkPoint::from_p1(&f.eval(&None))),
        Finite(a) => Ok(BerkPoint::from_p1(&f.eval(&Some(a.clone())))),
        Disk { center, t } => {
            let n = f.num().taylor_shift(center);
            let d = f.den().taylor_shift(center);
            let k = dominant_index(&d.vals(), t);
            let qk = n.coeff(k).div(&d.coeff(k))?;
            let diff = f.num().sub(&f.den().scale(&qk));
            let g = seminorm_val(&diff, &f.den(), s)?;
            let img = BerkPoint::zeta(&qk, &g.unwrap_fin());
            certify_image(f, s, &img)?;
            Ok(img)
        }
    }
}

/// Checks |g∘f|_S = |g|_{f(S)} for a few linear g and the chart at ∞.
pub fn certify_image(f: &RationalMap, s: &BerkPoint, img: &BerkPoint) -> Result<()> {
    let p = f.p();
    let b = img.center().unwrap().clone();
    let e = b.e();
    let tests = [TowerElem::zero(p, 1), TowerElem::one(p, 1), b.clone(), &b + &TowerElem::from_int(p, e, p as i64)];
    let z = Poly::z(p, e);
    for x in tests.iter() {
        let lin = z.sub(&Poly::constant(x.clone()));
        let lhs = gauss_val(&lin, img)?;
        let g = f.num().sub(&f.den().scale(x));
        let rhs = seminorm_val(&g, &f.den(), s)?;
        if lhs != rhs {
            return Err(Error::CertificationFailed(format!("image of {s} at test point {x}")));
        }
    }
    let inv_lhs = -gauss_val(&z, img)?.unwrap_fin();
    let inv_rhs = seminorm_val(&f.den(), &f.num(), s);
    if let Ok(v) = inv_rhs {
        if ExtValue::Fin(inv_lhs) != v {
            return Err(Error::CertificationFailed(format!("∞-chart image of {s}")));
        }
    }
    Ok(())
}

/// Image of a point under a Möbius transformation.
pub fn mobius_image(m: &Mobius, s: &BerkPoint) -> Result<BerkPoint> {
    let f = RationalMap::from_biform(&m.as_biform())?;
    map_image(&f, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::qf;

    fn pt(p: u64, c: i64, t: i64) -> BerkPoint {
        BerkPoint::zeta_q(p, &q(c), &q(t))
    }

    fn fin(p: u64, c: i64) -> BerkPoint {
        Finite(TowerElem::from_int(p, 1, c))
    }

    #[test]
    fn metric_and_joins() {
        let p = 5;
        let sc = BerkPoint::s_can(p);
        assert_eq!(sc.rho(&pt(p, 0, 1)), ExtValue::Fin(q(1)));
        assert_eq!(pt(p, 0, 1).rho(&pt(p, 5, 2)), ExtValue::Fin(q(1)));
        assert_eq!(sc.rho(&fin(p, 2)), ExtValue::Inf);
        assert_eq!(BerkPoint::join(&fin(p, 0), &fin(p, 1), &Infinity), sc);
        assert_eq!(BerkPoint::join(&fin(p, 0), &fin(p, 5), &Infinity), pt(p, 0, 1));
        assert_eq!(fin(p, 0).hsia_can(&fin(p, 1), p), ExtValue::Fin(q(0)));
        assert_eq!(pt(p, 0, 1).hsia_can(&pt(p, 0, 2), p), ExtValue::Fin(q(1)));
        assert_eq!(sc.hsia_can(&sc, p), ExtValue::Fin(q(0)));
    }

    #[test]
    fn canonical_centers() {
        assert_eq!(pt(5, 0, 1), pt(5, 5, 1));
        assert_ne!(pt(5, 0, 1), pt(5, 1, 1));
        assert_eq!(BerkPoint::zeta_q(5, &qf(1, 3), &q(0)), pt(5, 2, 0));
    }

    #[test]
    fn gauss_values() {
        let p = 5;
        let z = Poly::z(p, 1);
        assert_eq!(gauss_val(&z, &BerkPoint::s_can(p)).unwrap(), ExtValue::Fin(q(0)));
        assert_eq!(gauss_val(&z.mul(&z), &pt(p, 0, 1)).unwrap(), ExtValue::Fin(q(2)));
        let a = z.sub(&Poly::constant(TowerElem::one(p, 1)));
        let b = z.sub(&Poly::constant(TowerElem::from_int(p, 1, 5)));
        assert_eq!(gauss_val(&a.mul(&b), &pt(p, 0, 1)).unwrap(), ExtValue::Fin(q(1)));
        let one = Poly::constant(TowerElem::one(p, 1));
        assert_eq!(seminorm_val(&one, &z, &BerkPoint::s_can(p)).unwrap(), ExtValue::Fin(q(0)));
    }

    #[test]
    fn images() {
        let p = 5;
        let sq = RationalMap::from_rationals(p, &[q(0), q(0), q(1)], &[q(1)]).unwrap();
        assert_eq!(map_image(&sq, &BerkPoint::s_can(p)).unwrap(), BerkPoint::s_can(p));
        let psq = RationalMap::from_rationals(p, &[q(0), q(0), q(5)], &[q(1)]).unwrap();
        assert_eq!(map_image(&psq, &BerkPoint::s_can(p)).unwrap(), pt(p, 0, 1));
        let inv = RationalMap::from_rationals(p, &[q(1)], &[q(0), q(1)]).unwrap();
        assert_eq!(map_image(&inv, &pt(p, 5, 2)).unwrap(), BerkPoint::zeta_q(p, &qf(1, 5), &q(0)));
        assert_eq!(map_image(&inv, &pt(p, 0, 1)).unwrap(), pt(p, 0, -1));
    }

    #[test]
    fn flips_and_directions() {
        let p = 3;
        assert_eq!(pt(p, 0, 2).flip(p), pt(p, 0, -2));
        assert_eq!(pt(p, 3, 2).flip(p), BerkPoint::zeta_q(p, &qf(1, 3), &q(0)));
        let sc = BerkPoint::s_can(p);
        assert_eq!(direction_to(&sc, &fin(p, 4)).unwrap(), Some(1));
        assert_eq!(direction_to(&sc, &Infinity).unwrap(), None);
        assert_eq!(direction_to(&sc, &pt(p, 0, -1)).unwrap(), None);
        assert_eq!(step_in_direction(&sc, Some(2), &q(1)).unwrap(), pt(p, 2, 1));
    }
}
