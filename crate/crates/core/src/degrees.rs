//! Local, directional and surplus degrees at type II points via reductions of transported lifts.

use crate::error::{Error, Result};
use crate::fp::{fp_points, FpPoint};
use crate::maps::{Mobius, RationalMap, Reduction};
use crate::points::{chart, direction_center, direction_to, map_image, step_in_direction, BerkPoint};
use crate::profile::{self, directional_slope};
use crate::rat::{q, Q};
use crate::tower::TowerElem;

/// Reduction of ψ^{-1}∘f∘φ with φ(S_can) = S and ψ(S_can) = f(S); ψ = φ when S is fixed.
#[derive(Clone, Debug)]
pub struct DegreeData {
    pub at: BerkPoint,
    pub image: BerkPoint,
    pub fixed: bool,
    pub reduction: Reduction,
    pub degree: usize,
}

fn class_str(a: FpPoint) -> String {
    match a {
        Some(x) => x.to_string(),
        None => "inf".into(),
    }
}

impl DegreeData {
    pub fn compute(f: &RationalMap, s: &BerkPoint) -> Result<Self> {
        let image = map_image(f, s)?;
        let fixed = image == *s;
        let (c, u) = chart(s)?;
        let phi = Mobius::affine(&c, &u);
        let psi = if fixed {
            phi.clone()
        } else {
            let (b, w) = chart(&image)?;
            Mobius::affine(&b, &w)
        };
        let g = f.transport(&phi, &psi);
        let reduction = g.reduce();
        Ok(DegreeData { at: s.clone(), image, fixed, reduction, degree: f.degree() })
    }

    pub fn local_degree(&self) -> usize {
        self.reduction.degree()
    }

    /// f_* on directions, in the residue coordinates of S and f(S).
    pub fn tangent_image(&self, a: FpPoint) -> FpPoint {
        self.reduction.map.eval(a)
    }

    pub fn m_v(&self, a: FpPoint) -> usize {
        self.reduction.map.local_degree(a)
    }

    pub fn s_v(&self, a: FpPoint) -> usize {
        self.reduction.common_order(a)
    }

    pub fn is_identity(&self) -> bool {
        self.reduction.map.is_identity()
    }

    /// Class at S of the direction toward f(S); `None` when S is fixed.
    pub fn toward_image(&self) -> Result<Option<FpPoint>> {
        if self.fixed {
            return Ok(None);
        }
        direction_to(&self.at, &self.image).map(Some)
    }

    /// Class at f(S) of the direction back toward S; `None` when S is fixed.
    pub fn back_from_image(&self) -> Result<Option<FpPoint>> {
        if self.fixed {
            return Ok(None);
        }
        direction_to(&self.image, &self.at).map(Some)
    }

    /// Preimage classes of `w` in P¹(F_p), and whether they carry the full local degree.
    pub fn rational_fiber(&self, w: FpPoint) -> (Vec<FpPoint>, bool) {
        let pts: Vec<FpPoint> = fp_points(self.reduction.map.p).into_iter().filter(|&a| self.tangent_image(a) == w).collect();
        let total: usize = pts.iter().map(|&a| self.m_v(a)).sum();
        let split = total == self.local_degree();
        (pts, split)
    }

    /// Whether every surplus direction is F_p-rational.
    pub fn surplus_split(&self) -> bool {
        let total: usize = fp_points(self.reduction.map.p).into_iter().map(|a| self.s_v(a)).sum();
        total == self.degree - self.local_degree()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let dirs: Vec<_> = fp_points(self.reduction.map.p)
            .into_iter()
            .map(|a| {
                serde_json::json!({
                    "direction": class_str(a),
                    "image": class_str(self.tangent_image(a)),
                    "m_v": self.m_v(a),
                    "s_v": self.s_v(a),
                })
            })
            .collect();
        serde_json::json!({
            "schema": "degrees-v1",
            "at": self.at.to_json(),
            "image": self.image.to_json(),
            "fixed": self.fixed,
            "local_degree": self.local_degree(),
            "reduction": self.reduction.map.to_string_affine(),
            "directions": dirs,
        })
    }
}

/// Slope at S in direction `dir` of a ray-profile family.
pub fn slope_along(s: &BerkPoint, dir: FpPoint, ray: &dyn Fn(&TowerElem) -> Result<crate::plf::Plf>) -> Result<Q> {
    let c = direction_center(s, dir)?;
    let t = s.t().ok_or_else(|| Error::UnsupportedPointType(s.to_string()))?;
    Ok(directional_slope(&ray(&c)?, t, dir.is_some()))
}

/// (f*δ_{S0})(U_v) from the slope of the potential G_{S0} into U_v.
pub fn pullback_mass(f: &RationalMap, s: &BerkPoint, dir: FpPoint, s0: &BerkPoint) -> Result<Q> {
    let slope = slope_along(s, dir, &|c| profile::potential(f, c, s0))?;
    let inside = *s0 != *s && direction_to(s, s0)? == dir;
    Ok(slope + if inside { q(f.degree() as i64) } else { q(0) })
}

/// s_v from a pullback mass with S0 in a direction at f(S) other than f_*(v).
pub fn surplus_via_pullback(f: &RationalMap, dd: &DegreeData, dir: FpPoint) -> Result<Q> {
    let avoid = dd.tangent_image(dir);
    for b in fp_points(dd.reduction.map.p) {
        if avoid == b {
            continue;
        }
        let s0 = step_in_direction(&dd.image, b, &q(1))?;
        if s0 == dd.at {
            continue;
        }
        return pullback_mass(f, &dd.at, dir, &s0);
    }
    Err(Error::Invalid("no admissible base point".into()))
}

fn nearest_break(breaks: &[Q], t: &Q, deeper: bool) -> Option<Q> {
    if deeper {
        breaks.iter().filter(|b| *b > t).min().cloned()
    } else {
        breaks.iter().filter(|b| *b < t).max().cloned()
    }
}

/// m_v as the expansion rate ρ(f(S), f(S₂))/ρ(S, S₂) on a germ of the segment into U_v.
pub fn expansion_rate(f: &RationalMap, s: &BerkPoint, dir: FpPoint) -> Result<Q> {
    let c = direction_center(s, dir)?;
    let t = s.t().unwrap().clone();
    let deeper = dir.is_some();
    let sign = if deeper { q(1) } else { q(-1) };
    let gd = profile::gauss_plf(&f.den(), &c).unwrap();
    let mut eps = match nearest_break(gd.breaks(), &t, deeper) {
        Some(b) => crate::rat::abs_q(&(b - &t)) / q(2),
        None => q(1),
    };
    let probe = map_image(f, &BerkPoint::zeta(&c, &(&t + &sign * &eps)))?;
    let g = profile::g_x(f, &c, probe.center().unwrap());
    if let Some(b) = nearest_break(g.breaks(), &t, deeper) {
        let gap = crate::rat::abs_q(&(b - &t)) / q(2);
        if gap < eps {
            eps = gap;
        }
    }
    let s2 = BerkPoint::zeta(&c, &(&t + &sign * &eps));
    let fs = map_image(f, s)?;
    let fs2 = map_image(f, &s2)?;
    Ok(fs.rho_fin(&fs2) / eps)
}

/// Crucial slope from the fixed/non-fixed local formula in terms of degrees.
pub fn crucial_slope_local(dd: &DegreeData, dir: FpPoint) -> Result<Q> {
    let d1 = q(dd.degree as i64 - 1);
    let sv = q(dd.s_v(dir) as i64);
    let fv = dd.tangent_image(dir);
    let num = if dd.fixed {
        q(i64::from(fv != dir)) - sv
    } else {
        let to_img = dd.toward_image()?.unwrap();
        let back = dd.back_from_image()?.unwrap();
        let mv = if fv == back { q(dd.m_v(dir) as i64) } else { q(0) };
        q(i64::from(dir != to_img)) - sv - mv
    };
    Ok(q(1) / q(2) + num / d1)
}

/// Crucial slope read off the exact crucial profile.
pub fn crucial_slope_profile(f: &RationalMap, s: &BerkPoint, dir: FpPoint) -> Result<Q> {
    slope_along(s, dir, &|c| Ok(profile::crucial(f, c)))
}

/// {(d + 1 − 2m)/(2(d − 1)) : m = 0..d+1}
pub fn in_crucial_range(slope: &Q, d: usize) -> bool {
    (0..=d as i64 + 1).any(|m| q(d as i64 + 1 - 2 * m) / q(2 * (d as i64 - 1)) == *slope)
}
