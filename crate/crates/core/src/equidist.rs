//! Retracted pullbacks, certified brackets for integrals against μ_f, and the quantitative equidistribution check.

use crate::crucial::{crucial_measure, crucial_tree, ordres_direct, CrucialMeasure};
use crate::error::{Error, Result};
use crate::maps::RationalMap;
use crate::plf::Plf;
use crate::points::BerkPoint;
use crate::profile::rho_to;
use crate::rat::{abs_q, fmt_q, max_q, q, Q};
use crate::roots::PrecisionPolicy;
use crate::tree::{self, laplacian, FiniteTree, TreeMeasure, TreePlf};

pub const DEFAULT_CAP: u64 = 64;

/// (r_Γ)_*((f^n)*δ_{S0}), from potential slopes of the iterate along Γ.
pub fn retracted_pullback(f: &RationalMap, n: u32, s0: &BerkPoint, gamma: &FiniteTree, cap: u64) -> Result<TreeMeasure> {
    let g = f.iterate(n, cap)?;
    tree::retracted_pullback(&g, s0, gamma)
}

/// Upper bound for C_{S0,f}: v(Res) of the minimal lift conjugated to S0.
pub fn c_constant_bound(f: &RationalMap, s0: &BerkPoint) -> Result<Q> {
    ordres_direct(f, s0)
}

/// Experimental refinement of C_{S0,f}: sup of G_{S0} over the tree spanned by the preimage clusters of two points of B_{S0}.
pub fn c_constant_exact(f: &RationalMap, s0: &BerkPoint, policy: &PrecisionPolicy) -> Result<Q> {
    let (a0, b0) = crate::points::chart(s0)?;
    let p = f.p();
    let mut pts = vec![s0.clone()];
    for k in [0i64, 1] {
        let x = &a0 + &(&b0 * &crate::tower::TowerElem::from_int(p, 1, k));
        let poly = f.num().sub(&f.den().scale(&x));
        for c in crate::roots::padic_roots(&poly, policy)? {
            pts.push(BerkPoint::Finite(c.center));
        }
    }
    let span = FiniteTree::span(&pts)?.truncate(&(start_depth(&pts) + q(4)))?;
    let g = f.conjugate(&crate::maps::Mobius::affine(&a0, &b0));
    let sup = crate::crucial::tree_sup(&span, &|c| crate::profile::potential_conj(&g, c, s0).unwrap());
    Ok(sup)
}

fn start_depth(pts: &[BerkPoint]) -> Q {
    let mut m = q(0);
    for x in pts {
        if let Some(t) = x.t() {
            m = max_q(&m, &abs_q(t));
        }
    }
    m
}

/// |Δφ|(P¹) for φ = r_Γ^*φ.
pub fn laplacian_mass(phi: &TreePlf) -> Q {
    if phi.tree().is_trivial() {
        return q(0);
    }
    laplacian(phi).variation()
}

/// sup_Γ |φ| over vertices and interior breakpoints.
pub fn sup_abs(phi: &TreePlf) -> Q {
    let tr = phi.tree();
    let mut best = q(0);
    for i in 0..tr.len() {
        best = max_q(&best, &abs_q(&phi.profile(i).eval(tr.point(i).t().unwrap())));
    }
    for e in tr.edges() {
        let prof = phi.profile(e.child);
        for b in prof.breaks_in(e.lo.as_ref().unwrap(), e.hi.as_ref().unwrap()) {
            best = max_q(&best, &abs_q(&prof.eval(&b)));
        }
    }
    best
}

/// ∫ φ d ν for ν supported anywhere on P¹, using φ = φ∘r_Γ.
pub fn integrate_retracted(phi: &TreePlf, nu: &TreeMeasure) -> Result<Q> {
    let tr = phi.tree();
    nu.integrate(&|x| phi.eval(&tr.retract(x)))
}

/// max(0, R − ρ(r_Γ(·), S*)) on the tree.
pub fn tent(gamma: &FiniteTree, star: &BerkPoint, radius: &Q) -> Result<TreePlf> {
    TreePlf::from_rays(gamma, &|c| Ok(Plf::constant(q(0)).max(&rho_to(c, star).scale(&q(-1)).add_const(radius))))
}

/// Bracket [value − err, value + err] containing ∫φ dμ_f.
#[derive(Clone, Debug)]
pub struct MuBracket {
    pub level: u32,
    pub value: Q,
    pub err: Q,
}

pub fn mu_integral(f: &RationalMap, phi: &TreePlf, s0: &BerkPoint, n: u32, cap: u64) -> Result<MuBracket> {
    let d = f.degree() as i64;
    let dn = q(d).pow(n as i32);
    let meas = retracted_pullback(f, n, s0, phi.tree(), cap)?;
    let value = integrate_retracted(phi, &meas)? / &dn;
    let c = c_constant_bound(f, s0)?;
    let err = c * laplacian_mass(phi) / (dn * q(d - 1));
    Ok(MuBracket { level: n, value, err })
}

impl MuBracket {
    pub fn lo(&self) -> Q {
        &self.value - &self.err
    }

    pub fn hi(&self) -> Q {
        &self.value + &self.err
    }

    /// Intersection of two certified brackets; `None` when they are disjoint.
    pub fn meet(&self, o: &MuBracket) -> Option<MuBracket> {
        let lo = max_q(&self.lo(), &o.lo());
        let hi = crate::rat::min_q(&self.hi(), &o.hi());
        if lo > hi {
            return None;
        }
        Some(MuBracket { level: self.level.max(o.level), value: (&lo + &hi) / q(2), err: (hi - lo) / q(2) })
    }
}

/// ∫φ dμ_f = φ(r_Γ S0) − Σ_i m_i Σ_j G_{S0}(f^j X_i)/d^{j+1} with Δφ = Σ m_i δ_{X_i}; orbits followed for `depth` steps, cycles summed exactly.
pub fn mu_integral_orbit(f: &RationalMap, phi: &TreePlf, s0: &BerkPoint, depth: u32) -> Result<MuBracket> {
    let d = q(f.degree() as i64);
    let (a0, b0) = crate::points::chart(s0)?;
    let g = f.conjugate(&crate::maps::Mobius::affine(&a0, &b0));
    let pot = |s: &BerkPoint| -> Result<Q> {
        let c = s.center().ok_or_else(|| Error::UnsupportedPointType(s.to_string()))?;
        Ok(crate::profile::potential_conj(&g, c, s0)?.eval(s.t().unwrap()))
    };
    let mut value = phi.eval(&phi.tree().retract(s0))?;
    let mut err = q(0);
    let c = c_constant_bound(f, s0)?;
    let lap = if phi.tree().is_trivial() { TreeMeasure::zero() } else { laplacian(phi) };
    for (x, m) in lap.atoms() {
        let mut orbit: Vec<BerkPoint> = vec![x.clone()];
        let mut terms: Vec<Q> = vec![pot(x)? / &d];
        let mut closed = false;
        for j in 1..depth {
            let nxt = crate::points::map_image(f, &orbit[j as usize - 1])?;
            if let Some(k) = orbit.iter().position(|y| *y == nxt) {
                let period = orbit.len() - k;
                let cyc: Q = terms[k..].iter().cloned().sum();
                let ratio = q(1) - (q(1) / &d).pow(period as i32);
                let head: Q = terms[..k].iter().cloned().sum();
                value -= m * (head + cyc / ratio);
                closed = true;
                break;
            }
            let t = pot(&nxt)? / d.clone().pow(j as i32 + 1);
            orbit.push(nxt);
            terms.push(t);
        }
        if !closed {
            let s: Q = terms.iter().cloned().sum();
            value -= m * s;
            err += abs_q(m) * &c / (d.clone().pow(depth as i32) * (&d - q(1)));
        }
    }
    Ok(MuBracket { level: depth, value, err })
}

/// Largest N with d^N ≤ cap.
pub fn max_level(d: usize, cap: u64) -> u32 {
    let mut n = 0u32;
    let mut acc = 1u64;
    while acc.saturating_mul(d as u64) <= cap {
        acc *= d as u64;
        n += 1;
    }
    n
}

/// One cell of the equidistribution grid.
#[derive(Clone, Debug)]
pub struct EquidistRecord {
    pub n: u32,
    pub label: String,
    pub nu_integral: Q,
    pub mu: MuBracket,
    pub mu_routes: (MuBracket, MuBracket),
    pub lhs_lower: Q,
    pub lhs_upper: Q,
    pub rhs: Q,
    pub c_bound: Q,
    pub sup_rho: Q,
    pub laplacian_mass: Q,
    pub sup_phi: Q,
    pub loose_ends: usize,
}

impl EquidistRecord {
    pub fn margin(&self) -> Q {
        &self.rhs - &self.lhs_upper
    }

    pub fn holds(&self) -> bool {
        self.lhs_upper <= self.rhs
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "phi": self.label,
            "nu_integral": fmt_q(&self.nu_integral),
            "mu_value": fmt_q(&self.mu.value),
            "mu_err": fmt_q(&self.mu.err),
            "mu_pullback": [fmt_q(&self.mu_routes.0.lo()), fmt_q(&self.mu_routes.0.hi())],
            "mu_orbit": [fmt_q(&self.mu_routes.1.lo()), fmt_q(&self.mu_routes.1.hi())],
            "lhs": [fmt_q(&self.lhs_lower), fmt_q(&self.lhs_upper)],
            "rhs": fmt_q(&self.rhs),
            "margin": fmt_q(&self.margin()),
            "c_bound": fmt_q(&self.c_bound),
            "sup_rho": fmt_q(&self.sup_rho),
            "laplacian_mass": fmt_q(&self.laplacian_mass),
            "sup_phi": fmt_q(&self.sup_phi),
            "loose_ends": self.loose_ends,
            "holds": self.holds(),
        })
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.n, self.label, fmt_q(&self.lhs_upper), fmt_q(&self.rhs), fmt_q(&self.margin()))
    }
}

pub const CSV_HEADER: &str = "n,phi,lhs,rhs,margin";

/// ν_{f^n} on Γ_{f^n,FR}, with the endpoints of that tree.
pub struct IterateMeasure {
    pub measure: CrucialMeasure,
    pub ends: Vec<BerkPoint>,
}

pub fn iterate_measure(f: &RationalMap, n: u32, cap: u64, policy: &PrecisionPolicy) -> Result<IterateMeasure> {
    let g = f.iterate(n, cap)?;
    let mut ct = crucial_tree(&g, policy)?;
    let full = ct.gamma()?;
    let ends = full.endpoints();
    let measure = crucial_measure(&g, &mut ct, policy)?;
    Ok(IterateMeasure { measure, ends })
}

/// Endpoints of Γ outside r_Γ(Γ_{f^n,FR}).
pub fn loose_ends(gamma: &FiniteTree, fr_ends: &[BerkPoint]) -> usize {
    let hit: Vec<BerkPoint> = fr_ends.iter().map(|x| gamma.retract(x)).collect();
    gamma.endpoints().iter().filter(|e| !hit.contains(e)).count()
}

pub fn quantitative_check(
    f: &RationalMap,
    n: u32,
    it: &IterateMeasure,
    phi: &TreePlf,
    label: &str,
    s0: &BerkPoint,
    routes: &(MuBracket, MuBracket),
) -> Result<EquidistRecord> {
    let mu = routes
        .0
        .meet(&routes.1)
        .ok_or_else(|| Error::CertificationFailed(format!("disjoint brackets for ∫{label} dμ_f")))?;
    let d = f.degree() as i64;
    if it.measure.nu.total() != q(1) {
        return Err(Error::NotProbability(fmt_q(&it.measure.nu.total())));
    }
    let gamma = phi.tree();
    let nu_integral = integrate_retracted(phi, &it.measure.nu)?;
    let gap = abs_q(&(&nu_integral - &mu.value));
    let lhs_upper = &gap + &mu.err;
    let lhs_lower = max_q(&q(0), &(&gap - &mu.err));
    let c_bound = c_constant_bound(f, s0)?;
    let sup_rho = gamma.sup_rho(s0).unwrap_fin();
    let lap = laplacian_mass(phi);
    let sup_phi = sup_abs(phi);
    let ends = loose_ends(gamma, &it.ends);
    let dn1 = q(d).pow(n as i32) - q(1);
    let rhs = q(2) * (&c_bound / q(d - 1) + &sup_rho) / &dn1 * &lap + q(2 * ends as i64) / &dn1 * &sup_phi;
    Ok(EquidistRecord {
        n,
        label: label.to_string(),
        nu_integral,
        mu_routes: routes.clone(),
        mu,
        lhs_lower,
        lhs_upper,
        rhs,
        c_bound,
        sup_rho,
        laplacian_mass: lap,
        sup_phi,
        loose_ends: ends,
    })
}

/// Test tree: Γ_{f,FR} with ends cut one unit beyond its deepest type II vertex, the base point, and tents of radius r/2, r/4, r/8 at the base point's retraction, r its distance to the nearest other vertex.
pub struct TestSetup {
    pub gamma: FiniteTree,
    pub base: BerkPoint,
    pub phis: Vec<(String, TreePlf)>,
}

pub fn default_setup(f: &RationalMap, base: &BerkPoint, policy: &PrecisionPolicy) -> Result<TestSetup> {
    let ct = crucial_tree(f, policy)?;
    let full = ct.gamma()?;
    let mut big = q(1);
    for x in full.vertices().iter().filter(|x| x.is_type_ii()) {
        big = max_q(&big, &(abs_q(x.t().unwrap()) + q(1)));
    }
    let gamma = full.truncate(&big)?;
    let star = gamma.retract(base);
    let r = gamma.vertices().iter().filter(|v| **v != star).map(|v| v.rho_fin(&star)).min().unwrap();
    let mut phis = Vec::new();
    for k in [2i64, 4, 8] {
        let radius = &r / q(k);
        phis.push((format!("tent({star},{})", fmt_q(&radius)), tent(&gamma, &star, &radius)?));
    }
    Ok(TestSetup { gamma, base: base.clone(), phis })
}

pub const ORBIT_DEPTH: u32 = 48;

/// Both certified brackets for ∫φ dμ_f: pullback at the deepest level under `mu_cap`, and the orbit series.
pub fn mu_brackets(f: &RationalMap, phi: &TreePlf, s0: &BerkPoint, mu_cap: u64) -> Result<(MuBracket, MuBracket)> {
    let level = max_level(f.degree(), mu_cap);
    Ok((mu_integral(f, phi, s0, level, mu_cap)?, mu_integral_orbit(f, phi, s0, ORBIT_DEPTH)?))
}

/// Records for n = 1..=n_max against every default test function.
pub fn run_grid(f: &RationalMap, setup: &TestSetup, n_max: u32, cap: u64, policy: &PrecisionPolicy) -> Result<Vec<EquidistRecord>> {
    let mus: Vec<(MuBracket, MuBracket)> =
        setup.phis.iter().map(|(_, phi)| mu_brackets(f, phi, &setup.base, cap)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for n in 1..=n_max {
        let it = iterate_measure(f, n, cap, policy)?;
        for ((label, phi), mu) in setup.phis.iter().zip(&mus) {
            out.push(quantitative_check(f, n, &it, phi, label, &setup.base, mu)?);
        }
    }
    Ok(out)
}

/// lhs upper brackets shrink by at least a factor d from each n to n + 1, per test function.
pub fn decays_by_degree(records: &[EquidistRecord], d: usize) -> bool {
    records.iter().all(|r| {
        records
            .iter()
            .find(|s| s.label == r.label && s.n == r.n + 1)
            .map_or(true, |s| q(d as i64) * &s.lhs_upper <= r.lhs_upper)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(p: u64, n: &[Q], d: &[Q]) -> RationalMap {
        RationalMap::from_rationals(p, n, d).unwrap()
    }

    #[test]
    fn square_pullbacks() {
        let p = 43;
        let f = map(p, &[q(0), q(0), q(1)], &[q(1)]);
        let sc = BerkPoint::s_can(p);
        let gamma = FiniteTree::span(&[BerkPoint::zeta_q(p, &q(0), &q(2)), BerkPoint::zeta_q(p, &q(1), &q(2)), BerkPoint::zeta_q(p, &q(0), &q(-2))]).unwrap();
        let m = retracted_pullback(&f, 2, &sc, &gamma, 64).unwrap();
        assert_eq!(m, TreeMeasure::dirac(&sc).scale(&q(4)));
        assert_eq!(c_constant_bound(&f, &sc).unwrap(), q(0));
        assert_eq!(c_constant_bound(&f, &BerkPoint::zeta_q(p, &q(0), &q(-1))).unwrap(), q(2));
        let phi = tent(&gamma, &sc, &q(1)).unwrap();
        let mu = mu_integral(&f, &phi, &sc, 3, 64).unwrap();
        assert_eq!(mu.value, q(1));
        assert_eq!(mu.err, q(0));
    }

    #[test]
    fn scaled_square_pullback() {
        let p = 43;
        let f = map(p, &[q(0), q(0), q(p as i64)], &[q(1)]);
        let s = BerkPoint::zeta_q(p, &q(0), &q(-1));
        let gamma = FiniteTree::span(&[s.clone(), BerkPoint::zeta_q(p, &q(0), &q(1))]).unwrap();
        assert_eq!(retracted_pullback(&f, 1, &s, &gamma, 64).unwrap(), TreeMeasure::dirac(&s).scale(&q(2)));
    }

    #[test]
    fn levels() {
        assert_eq!(max_level(2, 64), 6);
        assert_eq!(max_level(3, 64), 3);
    }
}
