//! Certified p-adic root clusters via Newton polygons, residual polynomials and Newton refinement.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rat::{ext_for, fmt_q, parse_q, q, ExtValue, Q};
use crate::tower::TowerElem;

/// Precision ceiling (log-p units) for refinement.
#[derive(Clone, Debug)]
pub struct PrecisionPolicy {
    pub max: Q,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        let max = std::env::var("BERKCRUCIAL_PRECISION_MAX")
            .ok()
            .and_then(|s| parse_q(&s).ok())
            .unwrap_or_else(|| q(400));
        PrecisionPolicy { max }
    }
}

/// A root (with multiplicity) known to lie within p^{−err} of `center`.
#[derive(Clone, Debug)]
pub struct RootCluster {
    pub center: TowerElem,
    pub err: ExtValue,
    pub mult: usize,
    factor: Poly,
}

/// Element of valuation t, extending the ramification index as needed.
pub fn unif(p: u64, e: u32, t: &Q) -> TowerElem {
    TowerElem::uniformizer_of_valuation(p, ext_for(e, t), t).unwrap()
}

fn int_elem(p: u64, a: u64) -> TowerElem {
    TowerElem::from_int(p, 1, a as i64)
}

/// Square-free decomposition: pairs (monic factor, multiplicity).
pub fn squarefree(poly: &Poly) -> Vec<(Poly, usize)> {
    let mut out = Vec::new();
    let d = poly.derivative();
    let g = poly.gcd(&d);
    if g.deg() == Some(0) {
        out.push((poly.monic(), 1));
        return out;
    }
    let mut w = poly.div_exact(&g);
    let mut y = d.div_exact(&g);
    let mut z = y.sub(&w.derivative());
    let mut i = 1;
    while w.deg().unwrap_or(0) > 0 {
        let h = w.gcd(&z);
        if h.deg().unwrap_or(0) > 0 {
            out.push((h.clone(), i));
        }
        w = w.div_exact(&h);
        y = z.div_exact(&h);
        z = y.sub(&w.derivative());
        i += 1;
    }
    out
}

/// Residual polynomial over F_p of the Newton segment between vertices (i0, v0), (i1, v1).
fn residual(qp: &Poly, i0: usize, i1: usize, lambda: &Q, mu: &Q) -> Result<(Vec<u64>, TowerElem)> {
    let p = qp.p();
    let u = unif(p, qp.e(), lambda);
    let norm = unif(p, u.e(), mu).inv()?;
    let mut up = u.pow(i0 as u32);
    let mut coeffs = Vec::new();
    for j in i0..=i1 {
        let c = &(&qp.coeff(j) * &up) * &norm;
        coeffs.push(c.residue()?);
        up = &up * &u;
    }
    Ok((coeffs, u))
}

/// Ramification allowed during isolation, relative to the polynomial's field.
pub const MAX_RAMIFICATION: u32 = 64;

fn isolate(poly: &Poly, c: &TowerElem, lo: Option<&Q>, out: &mut Vec<(TowerElem, ExtValue)>) -> Result<()> {
    let mut qp = poly.taylor_shift(c);
    if qp.is_zero() {
        return Err(Error::Invalid("zero polynomial".into()));
    }
    let stripped = qp.coeff(0).is_zero();
    if stripped {
        out.push((c.clone(), ExtValue::Inf));
        let k = qp.coeffs().iter().position(|x| !x.is_zero()).unwrap();
        qp = Poly::from_elems(qp.p(), qp.e(), qp.coeffs()[k..].to_vec());
    }
    let hull = qp.newton_vertices();
    for (idx, w) in hull.windows(2).enumerate() {
        let (i0, v0) = &w[0];
        let (i1, v1) = &w[1];
        let k = i1 - i0;
        let lambda = (v0 - v1) / q(k as i64);
        if let Some(lo) = lo {
            if &lambda <= lo {
                continue;
            }
        }
        if idx == 0 && k == 1 && lo.is_some() && !stripped {
            out.push((c.clone(), ExtValue::Fin(lambda)));
            continue;
        }
        if ext_for(qp.e(), &lambda) > MAX_RAMIFICATION * poly.e() {
            return Err(Error::UnsupportedResidueExtension(format!(
                "root field outside the tower: ramification beyond {} at root valuation {}",
                MAX_RAMIFICATION * poly.e(),
                fmt_q(&lambda)
            )));
        }
        let mu = v0 + &lambda * q(*i0 as i64);
        let (res, u) = residual(&qp, *i0, *i1, &lambda, &mu)?;
        let rp = crate::fp::FpPoly::new(qp.p(), res);
        let roots = rp.roots();
        let found: usize = roots.iter().filter(|(a, _)| *a != 0).map(|(_, m)| *m).sum();
        if found < k {
            return Err(Error::UnsupportedResidueExtension(format!(
                "residual polynomial {} at root valuation {}",
                crate::fp::poly_str(&rp),
                fmt_q(&lambda)
            )));
        }
        for (a, _) in roots.into_iter().filter(|(a, _)| *a != 0) {
            let child = c + &(&u * &int_elem(qp.p(), a));
            isolate(poly, &child, Some(&lambda), out)?;
        }
    }
    Ok(())
}

/// Exact valuation of the distance from `c` to the nearest root, when that root is unique.
fn nearest_root_val(poly: &Poly, c: &TowerElem) -> Option<ExtValue> {
    let qp = poly.taylor_shift(c);
    if qp.coeff(0).is_zero() {
        return Some(ExtValue::Inf);
    }
    let hull = qp.newton_vertices();
    let (i0, v0) = &hull[0];
    let (i1, v1) = &hull[1];
    if *i0 != 0 || *i1 != 1 {
        return None;
    }
    Some(ExtValue::Fin(v0 - v1))
}

impl RootCluster {
    pub fn factor(&self) -> &Poly {
        &self.factor
    }

    pub fn is_exact(&self) -> bool {
        self.err.is_inf()
    }

    /// An exact point treated as a cluster of infinite precision.
    pub fn exact(center: TowerElem) -> Self {
        let p = center.p();
        let e = center.e();
        let factor = Poly::from_elems(p, e, vec![-&center, TowerElem::one(p, e)]);
        RootCluster { center, err: ExtValue::Inf, mult: 1, factor }
    }

    /// One refinement step; strictly increases `err`.
    pub fn refine(&mut self) -> Result<()> {
        let lam = match &self.err {
            ExtValue::Inf => return Ok(()),
            ExtValue::Fin(l) => l.clone(),
        };
        let qp = self.factor.taylor_shift(&self.center);
        let step = (-&qp.coeff(0)).div(&qp.coeff(1))?;
        let cand = &self.center + &step;
        if let Some(ExtValue::Fin(l1)) = nearest_root_val(&self.factor, &cand) {
            if l1 > lam {
                let tr = cand.truncate(&l1);
                if let Some(v) = nearest_root_val(&self.factor, &tr) {
                    self.center = tr;
                    self.err = v;
                    return Ok(());
                }
            }
        }
        if let Some(ExtValue::Inf) = nearest_root_val(&self.factor, &cand) {
            self.center = cand;
            self.err = ExtValue::Inf;
            return Ok(());
        }
        let mu = qp.coeff(0).val().unwrap_fin();
        let (res, u) = residual(&qp, 0, 1, &lam, &mu)?;
        let a = (self.factor.p() - res[0] % self.factor.p()) * crate::rat::mod_inverse(res[1], self.factor.p())
            % self.factor.p();
        self.center = &self.center + &(&u * &int_elem(self.factor.p(), a));
        self.err = nearest_root_val(&self.factor, &self.center).ok_or(Error::NonSeparable("refinement lost the root".into()))?;
        Ok(())
    }

    /// Refine until err ≥ target.
    pub fn refine_to(&mut self, target: &Q, policy: &PrecisionPolicy) -> Result<()> {
        while self.err < ExtValue::Fin(target.clone()) {
            if self.err > ExtValue::Fin(policy.max.clone()) {
                return Err(Error::PrecisionExhausted(self.center.to_string()));
            }
            self.refine()?;
        }
        Ok(())
    }
}

/// Certified clusters of all roots of a nonzero polynomial.
pub fn padic_roots(poly: &Poly, policy: &PrecisionPolicy) -> Result<Vec<RootCluster>> {
    if poly.is_zero() {
        return Err(Error::Invalid("zero polynomial".into()));
    }
    let mut clusters = Vec::new();
    for (fac, mult) in squarefree(poly) {
        if fac.deg().unwrap_or(0) == 0 {
            continue;
        }
        let mut raw = Vec::new();
        let z = TowerElem::zero(fac.p(), fac.e());
        isolate(&fac, &z, None, &mut raw)?;
        for (center, err) in raw {
            clusters.push(RootCluster { center, err, mult, factor: fac.clone() });
        }
    }
    separate(&mut clusters, policy)?;
    Ok(clusters)
}

/// Refine until every pair of clusters is separated: v(c_i − c_j) < min(err_i, err_j).
pub fn separate(all: &mut [RootCluster], policy: &PrecisionPolicy) -> Result<()> {
    loop {
        let mut bad = None;
        'outer: for i in 0..all.len() {
            for j in i + 1..all.len() {
                let dv = (&all[i].center - &all[j].center).val();
                let m = all[i].err.clone().min(all[j].err.clone());
                if dv >= m {
                    bad = Some(if all[i].err <= all[j].err { i } else { j });
                    if m.is_inf() {
                        return Err(Error::Invalid("coincident roots in separation".into()));
                    }
                    break 'outer;
                }
            }
        }
        match bad {
            None => return Ok(()),
            Some(i) => {
                if all[i].err > ExtValue::Fin(policy.max.clone()) {
                    return Err(Error::PrecisionExhausted(all[i].center.to_string()));
                }
                all[i].refine()?;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::qf;

    fn poly(p: u64, c: &[Q]) -> Poly {
        Poly::from_rationals(p, 1, c)
    }

    #[test]
    fn ramified_pair() {
        let f = poly(5, &[qf(1, 5), q(-1), q(1)]);
        let r = padic_roots(&f, &PrecisionPolicy::default()).unwrap();
        assert_eq!(r.len(), 2);
        for c in &r {
            assert_eq!(c.center.val(), ExtValue::Fin(qf(-1, 2)));
            assert_eq!(c.center.e(), 2);
        }
    }

    #[test]
    fn unit_roots() {
        let f = poly(5, &[q(-1), q(0), q(1)]);
        let r = padic_roots(&f, &PrecisionPolicy::default()).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|c| c.is_exact() || c.err > ExtValue::Fin(q(0))));
        let mut c = r[0].clone();
        c.refine_to(&q(30), &PrecisionPolicy::default()).unwrap();
        let val = f.eval(&c.center).val();
        assert!(val >= ExtValue::Fin(q(30)));
    }

    #[test]
    fn irreducible_residual() {
        let f = poly(3, &[q(1), q(0), q(1)]);
        assert!(matches!(
            padic_roots(&f, &PrecisionPolicy::default()),
            Err(Error::UnsupportedResidueExtension(_))
        ));
    }

    #[test]
    fn multiplicities() {
        let a = poly(7, &[q(-2), q(1)]);
        let b = poly(7, &[q(-9), q(1)]);
        let f = a.mul(&a).mul(&b);
        let r = padic_roots(&f, &PrecisionPolicy::default()).unwrap();
        let total: usize = r.iter().map(|c| c.mult).sum();
        assert_eq!(total, 3);
        assert!(r.iter().any(|c| c.mult == 2));
    }

    #[test]
    fn close_roots_are_separated() {
        let a = poly(3, &[q(-1), q(1)]);
        let b = poly(3, &[q(-(1 + 3i64.pow(6))), q(1)]);
        let g = poly(3, &[q(-5), q(1)]);
        let f = a.mul(&b).mul(&g);
        let r = padic_roots(&f, &PrecisionPolicy::default()).unwrap();
        assert_eq!(r.len(), 3);
        for i in 0..3 {
            for j in i + 1..3 {
                let dv = (&r[i].center - &r[j].center).val();
                assert!(dv < r[i].err.clone().min(r[j].err.clone()));
            }
        }
    }
}
