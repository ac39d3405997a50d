//! Exact profiles along rays t ↦ ζ(c; t) of the wedge, potential and crucial functions.

use crate::error::Result;
use crate::maps::{Mobius, RationalMap};
use crate::plf::{Line, Plf};
use crate::points::{chart, BerkPoint};
use crate::poly::Poly;
use crate::rat::{q, ExtValue, Q};
use crate::tower::TowerElem;

/// t ↦ −log_p |P|_{ζ(c;t)}; `None` for the zero polynomial.
pub fn gauss_plf(poly: &Poly, c: &TowerElem) -> Option<Plf> {
    let lines: Vec<Line> = poly
        .taylor_shift(c)
        .vals()
        .iter()
        .enumerate()
        .filter_map(|(j, v)| v.as_fin().map(|v| Line::new(q(j as i64), v.clone())))
        .collect();
    Plf::min_of_lines(&lines)
}

/// t ↦ −log_p |f − x|_{ζ(c;t)} = min(v(b − x), s) where f(ζ(c;t)) = ζ(b; s).
pub fn g_x(f: &RationalMap, c: &TowerElem, x: &TowerElem) -> Plf {
    let gd = gauss_plf(&f.den(), c).expect("nonzero denominator");
    let diff = f.num().sub(&f.den().scale(x));
    let gn = gauss_plf(&diff, c).expect("f is not constant");
    gn.sub(&gd)
}

/// t ↦ ρ(ζ(c;t), S0)
pub fn rho_to(c: &TowerElem, s0: &BerkPoint) -> Plf {
    let (a0, s) = (s0.center().unwrap(), s0.t().unwrap());
    let m = Plf::ident().min_const(s).min_ext(&(c - a0).val());
    Plf::ident().add_const(s).sub(&m.scale(&q(2)))
}

/// t ↦ ρ(ζ(c;t), S_can)
pub fn rho_can(c: &TowerElem) -> Plf {
    rho_to(c, &BerkPoint::s_can(c.p()))
}

/// t ↦ ρ(S, f(S) ∧_{S0} S) at S = ζ(c;t).
pub fn wedge(f: &RationalMap, c: &TowerElem, s0: &BerkPoint) -> Plf {
    let (a0, s) = (s0.center().unwrap(), s0.t().unwrap());
    let gc = g_x(f, c, c);
    let ga = g_x(f, c, a0);
    Plf::ident()
        .sub(&Plf::ident().min(&gc))
        .sub(&Plf::ident().min_const(s).min_ext(&(c - a0).val()))
        .add(&ga.min_const(s))
}

/// t ↦ T_F(ζ(c;t)) = −min(gauss F0, gauss F1) + d·min(0, t, v(c)) for the minimal lift.
pub fn t_potential(f: &RationalMap, c: &TowerElem) -> Plf {
    let gd = gauss_plf(&f.den(), c).unwrap();
    let gn = gauss_plf(&f.num(), c).unwrap();
    let chart_term = Plf::ident().min_const(&q(0)).min_ext(&c.val());
    gd.min(&gn).scale(&q(-1)).add(&chart_term.scale(&q(f.degree() as i64)))
}

/// Conjugator h with h(S_can) = S0.
pub fn conjugator(s0: &BerkPoint) -> Result<Mobius> {
    let (a, b) = chart(s0)?;
    Ok(Mobius::affine(&a, &b))
}

/// t ↦ G_{S0}(ζ(c;t)) = ∫ ρ(S0, S ∧_{S0} ·) d(f*δ_{S0}).
pub fn potential(f: &RationalMap, c: &TowerElem, s0: &BerkPoint) -> Result<Plf> {
    let (a0, b0) = chart(s0)?;
    let g = f.conjugate(&Mobius::affine(&a0, &b0));
    potential_conj(&g, c, s0)
}

/// As `potential`, with the conjugate by the chart of S0 already computed.
pub fn potential_conj(g: &RationalMap, c: &TowerElem, s0: &BerkPoint) -> Result<Plf> {
    let (a0, b0) = chart(s0)?;
    let c2 = (c - &a0).div(&b0)?;
    Ok(t_potential(g, &c2).scale(&q(-1)).shift(s0.t().unwrap()))
}

/// t ↦ Crucial_f(ζ(c;t))
pub fn crucial(f: &RationalMap, c: &TowerElem) -> Plf {
    let d1 = q(f.degree() as i64 - 1);
    let w = wedge(f, c, &BerkPoint::s_can(f.p()));
    let tf = t_potential(f, c);
    rho_can(c).scale(&(q(1) / q(2))).add(&w.add(&tf).scale(&(q(1) / d1)))
}

/// Value of `plf` at the point ζ(c;t).
pub fn at(plf: &Plf, s: &BerkPoint) -> Q {
    plf.eval(s.t().unwrap())
}

/// Slope of the profile along the direction at ζ(c;t) toward `into` (deeper when `deeper`).
pub fn directional_slope(plf: &Plf, t: &Q, deeper: bool) -> Q {
    if deeper {
        plf.slope_right(t)
    } else {
        -plf.slope_left(t)
    }
}

/// v(c − a) or +∞.
pub fn dist_val(c: &TowerElem, a: &TowerElem) -> ExtValue {
    (c - a).val()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::map_image;
    use crate::rat::qf;

    fn map(p: u64, n: &[Q], d: &[Q]) -> RationalMap {
        RationalMap::from_rationals(p, n, d).unwrap()
    }

    #[test]
    fn crucial_of_square() {
        let f = map(5, &[q(0), q(0), q(1)], &[q(1)]);
        let zero = TowerElem::zero(5, 1);
        let cr = crucial(&f, &zero);
        assert_eq!(cr.eval(&q(0)), q(0));
        assert_eq!(cr.eval(&q(1)), qf(1, 2));
        assert_eq!(cr.eval(&q(-1)), qf(1, 2));
        let two = TowerElem::from_int(5, 1, 2);
        assert_eq!(crucial(&f, &two).eval(&q(1)), qf(3, 2));
    }

    #[test]
    fn wedge_matches_pointwise_geometry() {
        let f = map(3, &[q(1), q(0), q(3)], &[q(0), q(1), q(1)]);
        let s0 = BerkPoint::zeta_q(3, &q(1), &q(1));
        for c in [0i64, 1, 2, 4] {
            let ce = TowerElem::from_int(3, 1, c);
            let w = wedge(&f, &ce, &s0);
            for t in [-2i64, -1, 0, 1, 2, 3] {
                let s = BerkPoint::zeta(&ce, &q(t));
                let fs = map_image(&f, &s).unwrap();
                let j = BerkPoint::join(&fs, &s, &s0);
                assert_eq!(ExtValue::Fin(w.eval(&q(t))), s.rho(&j));
            }
        }
    }

    #[test]
    fn potential_vanishes_at_base() {
        let f = map(5, &[q(1), q(0), q(1)], &[q(0), q(5)]);
        let s0 = BerkPoint::zeta_q(5, &q(1), &q(-1));
        let g = potential(&f, s0.center().unwrap(), &s0).unwrap();
        assert_eq!(g.eval(&q(-1)), q(0));
    }
}
