//! Crucial function, order of the resultant, crucial tree, crucial measure and the minimal resultant locus.

use crate::degrees::{crucial_slope_profile, DegreeData};
use crate::error::{Error, Result};
use crate::fp::{fp_points, FpPoint};
use crate::maps::{Mobius, RationalMap};
use crate::plf::Plf;
use crate::points::{chart, direction_center, direction_to, map_image, BerkPoint};
use crate::poly::Poly;
use crate::profile;
use crate::rat::{fmt_q, q, ExtValue, Q};
use crate::roots::{padic_roots, separate, PrecisionPolicy, RootCluster};
use crate::tower::TowerElem;
use crate::tree::{barycenter, extremes, nu_f_gamma, nu_f_gamma_dual, FiniteTree, TreeMeasure};

fn type_ii(s: &BerkPoint) -> Result<(&TowerElem, &Q)> {
    match s {
        BerkPoint::Disk { center, t } => Ok((center, t)),
        _ => Err(Error::UnsupportedPointType(s.to_string())),
    }
}

/// T_F(S) in log-p units.
pub fn t_potential(f: &RationalMap, s: &BerkPoint) -> Result<Q> {
    let (c, t) = type_ii(s)?;
    Ok(profile::t_potential(f, c).eval(t))
}

/// Crucial_f(S)
pub fn crucial_at(f: &RationalMap, s: &BerkPoint) -> Result<Q> {
    let (c, t) = type_ii(s)?;
    Ok(profile::crucial(f, c).eval(t))
}

/// v(Res) of a minimal lift of h^{-1}∘f∘h with h(S_can) = S.
pub fn ordres_direct(f: &RationalMap, s: &BerkPoint) -> Result<Q> {
    let (a, b) = chart(s)?;
    Ok(f.conjugate(&Mobius::affine(&a, &b)).res_val())
}

/// 2d(d−1)·Crucial_f(S) + v(Res F_min)
pub fn ordres_via_formula(f: &RationalMap, s: &BerkPoint) -> Result<Q> {
    let d = f.degree() as i64;
    Ok(q(2 * d * (d - 1)) * crucial_at(f, s)? + f.res_val())
}

/// Fixed points as certified clusters plus the multiplicity at ∞.
#[derive(Clone, Debug)]
pub struct FixedPoints {
    pub finite: Vec<RootCluster>,
    pub inf_mult: usize,
}

impl FixedPoints {
    pub fn points(&self) -> Vec<BerkPoint> {
        let mut v: Vec<BerkPoint> = self.finite.iter().map(|c| BerkPoint::Finite(c.center.clone())).collect();
        if self.inf_mult > 0 {
            v.push(BerkPoint::Infinity);
        }
        v
    }

    pub fn contains(&self, s: &BerkPoint) -> bool {
        self.points().contains(s)
    }
}

pub fn fixed_points(f: &RationalMap, policy: &PrecisionPolicy) -> Result<FixedPoints> {
    let (poly, inf_mult) = f.fixed_point_divisor();
    let finite = if poly.deg().unwrap_or(0) > 0 { padic_roots(&poly, policy)? } else { vec![] };
    Ok(FixedPoints { finite, inf_mult })
}

/// Γ_FR = Γ_{Fix(f) ∪ R} with R the repelling type II fixed points found on Γ_{Fix(f) ∪ f^{-1}(a0)}.
#[derive(Clone, Debug)]
pub struct CrucialTree {
    pub fixed: FixedPoints,
    pub preimages: Vec<RootCluster>,
    pub a0: i64,
    pub repelling: Vec<BerkPoint>,
}

impl CrucialTree {
    pub fn gamma_fix(&self) -> Result<FiniteTree> {
        FiniteTree::span(&self.fixed.points())
    }

    pub fn gamma(&self) -> Result<FiniteTree> {
        let mut pts = self.fixed.points();
        pts.extend(self.repelling.iter().cloned());
        FiniteTree::span(&pts)
    }

    fn refine_fixed(&mut self, target: &Q, policy: &PrecisionPolicy) -> Result<()> {
        for c in self.fixed.finite.iter_mut() {
            c.refine_to(target, policy)?;
        }
        Ok(())
    }
}

fn breakpoints_on(f: &RationalMap, c: &TowerElem, lo: Option<&Q>, hi: Option<&Q>) -> Vec<Q> {
    let mut out = Vec::new();
    let gd = profile::gauss_plf(&f.den(), c).unwrap();
    let diff = f.num().sub(&f.den().scale(c));
    let mut bs: Vec<Q> = gd.breaks().to_vec();
    if let Some(g) = profile::gauss_plf(&diff, c) {
        bs.extend(g.breaks().iter().cloned());
    }
    for b in bs {
        if lo.map_or(true, |l| &b >= l) && hi.map_or(true, |h| &b <= h) {
            out.push(b);
        }
    }
    if let Some(l) = lo {
        out.push(l.clone());
    }
    if let Some(h) = hi {
        out.push(h.clone());
    }
    out.sort();
    out.dedup();
    out
}

pub fn crucial_tree(f: &RationalMap, policy: &PrecisionPolicy) -> Result<CrucialTree> {
    if f.degree() < 2 {
        return Err(Error::Invalid("degree must be at least 2".into()));
    }
    let p = f.p();
    let fixed = fixed_points(f, policy)?;
    let f_inf = f.eval(&None);
    let mut last_err = None;
    for a0 in 0..40i64 {
        let a = TowerElem::from_int(p, 1, a0);
        if f.eval(&Some(a.clone())) == Some(a.clone()) || f_inf == Some(a.clone()) {
            continue;
        }
        let pre_poly = f.num().sub(&f.den().scale(&a));
        let pre = match padic_roots(&pre_poly, policy) {
            Ok(r) => r,
            Err(e @ Error::UnsupportedResidueExtension(_)) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let nf = fixed.finite.len();
        let mut all: Vec<RootCluster> = fixed.finite.iter().cloned().chain(pre).collect();
        separate(&mut all, policy)?;
        let pre: Vec<RootCluster> = all.split_off(nf);
        let fixed = FixedPoints { finite: all, inf_mult: fixed.inf_mult };
        let mut ct = CrucialTree { fixed, preimages: pre, a0, repelling: vec![] };
        ct.repelling = find_repelling(f, &mut ct, policy)?;
        return Ok(ct);
    }
    Err(last_err.unwrap_or_else(|| Error::Invalid("no auxiliary point found".into())))
}

fn find_repelling(f: &RationalMap, ct: &mut CrucialTree, policy: &PrecisionPolicy) -> Result<Vec<BerkPoint>> {
    let gfix = ct.gamma_fix()?;
    for _ in 0..64 {
        let mut pts = ct.fixed.points();
        pts.extend(ct.preimages.iter().map(|c| BerkPoint::Finite(c.center.clone())));
        let g2 = FiniteTree::span(&pts)?;
        let mut cands: Vec<BerkPoint> = Vec::new();
        let mut refine: Option<usize> = None;
        for e in g2.edges() {
            let leaf = g2.point(e.child);
            let pre_idx = ct.preimages.iter().position(|c| BerkPoint::Finite(c.center.clone()) == *leaf);
            let fix_err = ct.fixed.finite.iter().find(|c| BerkPoint::Finite(c.center.clone()) == *leaf).map(|c| c.err.clone());
            let bs = breakpoints_on(f, &e.center, e.lo.as_ref(), e.hi.as_ref());
            if let Some(i) = pre_idx {
                let err = ct.preimages[i].err.clone();
                if bs.iter().any(|b| ExtValue::Fin(b + q(1)) >= err) {
                    refine = Some(i);
                    break;
                }
            }
            for b in bs {
                if let Some(err) = &fix_err {
                    if ExtValue::Fin(b.clone() + q(1)) >= *err {
                        continue;
                    }
                }
                cands.push(BerkPoint::zeta(&e.center, &b));
            }
        }
        if let Some(i) = refine {
            let cur = ct.preimages[i].err.unwrap_fin();
            ct.preimages[i].refine_to(&(cur + q(2)), policy)?;
            continue;
        }
        let mut rep: Vec<BerkPoint> = Vec::new();
        for s in cands {
            if gfix.contains(&s) || rep.contains(&s) {
                continue;
            }
            if map_image(f, &s)? == s && DegreeData::compute(f, &s)?.local_degree() >= 2 {
                rep.push(s);
            }
        }
        return Ok(rep);
    }
    Err(Error::PrecisionExhausted("preimage legs of the auxiliary tree".into()))
}

/// One vertex or atom of ν_f with its measured weight and the local-degree formula value.
#[derive(Clone, Debug)]
pub struct WeightCheck {
    pub point: BerkPoint,
    pub measured: Q,
    pub formula: i64,
}

/// ν_f computed on Γ_FR truncated at depth E around its type I ends.
#[derive(Clone, Debug)]
pub struct CrucialMeasure {
    pub tree: FiniteTree,
    pub truncated_ends: Vec<(BerkPoint, BerkPoint)>,
    pub depth: Q,
    pub nu: TreeMeasure,
    pub checks: Vec<WeightCheck>,
}

impl CrucialMeasure {
    pub fn weights(&self) -> Vec<(BerkPoint, Q)> {
        self.nu.sorted().into_iter().map(|(x, m)| (x, m * q(1))).collect()
    }

    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.measured == q(c.formula))
    }
}

/// Γ_FR with type I ends replaced by ζ(a; E), paired with the type I point each truncation stands for.
pub fn truncated_gamma(ct: &CrucialTree, big: &Q) -> Result<(FiniteTree, Vec<(BerkPoint, BerkPoint)>)> {
    let g = ct.gamma()?;
    let mut ends = Vec::new();
    for n in g.nodes() {
        match &n.point {
            BerkPoint::Finite(a) => ends.push((BerkPoint::zeta(a, big), n.point.clone())),
            BerkPoint::Infinity => {
                let j = n.children[0];
                let c = g.point(j).center().unwrap().clone();
                ends.push((BerkPoint::zeta(&c, &-big), BerkPoint::Infinity));
            }
            _ => {}
        }
    }
    Ok((g.truncate(big)?, ends))
}

fn start_depth(ct: &CrucialTree) -> Result<Q> {
    let g = ct.gamma()?;
    let mut m = q(2);
    for n in g.nodes() {
        if let Some(t) = n.point.t() {
            m = crate::rat::max_q(&m, &(crate::rat::abs_q(t) + q(2)));
        }
    }
    Ok(m)
}

pub fn crucial_measure(f: &RationalMap, ct: &mut CrucialTree, policy: &PrecisionPolicy) -> Result<CrucialMeasure> {
    let mut big = start_depth(ct)?;
    let mut prev: Option<TreeMeasure> = None;
    for _ in 0..32 {
        ct.refine_fixed(&(&big + q(2)), policy)?;
        let (tree, ends) = truncated_gamma(ct, &big)?;
        let nu = nu_f_gamma_dual(f, &tree)?;
        let ends_clean = ends.iter().all(|(s, _)| nu.mass_at(s) == q(0));
        if ends_clean {
            if let Some(pv) = &prev {
                if *pv == nu {
                    let checks = weight_checks(f, &tree, &ends, &nu)?;
                    return Ok(CrucialMeasure { tree, truncated_ends: ends, depth: big, nu, checks });
                }
            }
            prev = Some(nu);
        } else {
            prev = None;
        }
        big += q(2);
    }
    Err(Error::PrecisionExhausted("truncation depth for the crucial tree".into()))
}

fn neighbor_classes(tree: &FiniteTree, i: usize) -> Result<Vec<FpPoint>> {
    let s = tree.point(i);
    let mut v = Vec::new();
    if tree.nodes()[i].parent.is_some() {
        v.push(None);
    }
    for &j in &tree.nodes()[i].children {
        v.push(direction_to(s, tree.point(j))?);
    }
    Ok(v)
}

/// deg − 1 + #{non-fixed tree directions} at fixed points, max(0, #directions − 2) otherwise.
pub fn weight_formula(f: &RationalMap, s: &BerkPoint, dirs: &[FpPoint]) -> Result<i64> {
    let dd = DegreeData::compute(f, s)?;
    if dd.fixed {
        let moved = dirs.iter().filter(|&&a| dd.tangent_image(a) != a).count() as i64;
        Ok(dd.local_degree() as i64 - 1 + moved)
    } else {
        Ok((dirs.len() as i64 - 2).max(0))
    }
}

fn weight_checks(f: &RationalMap, tree: &FiniteTree, ends: &[(BerkPoint, BerkPoint)], nu: &TreeMeasure) -> Result<Vec<WeightCheck>> {
    let d1 = q(f.degree() as i64 - 1);
    let mut out = Vec::new();
    for i in 0..tree.len() {
        let s = tree.point(i).clone();
        let mut dirs = neighbor_classes(tree, i)?;
        if let Some((_, a)) = ends.iter().find(|(x, _)| *x == s) {
            dirs.push(if *a == BerkPoint::Infinity { None } else { direction_to(&s, a)? });
        }
        let formula = weight_formula(f, &s, &dirs)?;
        out.push(WeightCheck { measured: nu.mass_at(&s) * &d1, point: s, formula });
    }
    for (x, m) in nu.atoms() {
        if tree.index_of(x).is_some() {
            continue;
        }
        let down = tree
            .edges()
            .into_iter()
            .find(|e| {
                let t = x.t().unwrap();
                let inside = e.lo.as_ref().map_or(true, |l| l < t) && e.hi.as_ref().map_or(true, |h| t < h);
                inside && (x.center().unwrap() - &e.center).val() >= ExtValue::Fin(t.clone())
            })
            .map(|e| e.center)
            .unwrap();
        let deeper = BerkPoint::zeta(&down, &(x.t().unwrap() + q(1)));
        let dirs = vec![None, direction_to(x, &deeper)?];
        out.push(WeightCheck { point: x.clone(), measured: m * &d1, formula: weight_formula(f, x, &dirs)? });
    }
    Ok(out)
}

/// Result of convex descent on Crucial_f from S_can.
#[derive(Clone, Debug)]
pub struct Descent {
    pub path: Vec<BerkPoint>,
    pub locus: Vec<BerkPoint>,
    pub min_crucial: Q,
    pub certified: bool,
}

fn ray_step(f: &RationalMap, s: &BerkPoint, dir: FpPoint) -> Result<BerkPoint> {
    let c = direction_center(s, dir)?;
    let t = s.t().unwrap();
    let plf = profile::crucial(f, &c);
    let next = if dir.is_some() {
        plf.breaks().iter().filter(|b| *b > t).min().cloned()
    } else {
        plf.breaks().iter().filter(|b| *b < t).max().cloned()
    };
    next.map(|b| BerkPoint::zeta(&c, &b)).ok_or_else(|| Error::Invalid(format!("unbounded descent from {s}")))
}

fn slopes_at(f: &RationalMap, s: &BerkPoint) -> Result<Vec<(FpPoint, Q)>> {
    fp_points(f.p()).into_iter().map(|a| Ok((a, crucial_slope_profile(f, s, a)?))).collect()
}

/// Mass bound showing no direction outside P¹(F_p) descends.
pub fn nonrational_certificate(f: &RationalMap, s: &BerkPoint) -> Result<bool> {
    let dd = DegreeData::compute(f, s)?;
    let d = f.degree() as i64;
    let pts = fp_points(f.p());
    let rational_surplus: i64 = pts.iter().map(|&a| dd.s_v(a) as i64).sum();
    let hidden_surplus = d - dd.local_degree() as i64 - rational_surplus;
    if dd.fixed {
        Ok(q(hidden_surplus) <= q(d - 1) / q(2))
    } else {
        let back = dd.back_from_image()?.unwrap();
        let rational_back: i64 = pts.iter().filter(|&&a| dd.tangent_image(a) == back).map(|&a| dd.m_v(a) as i64).sum();
        let hidden = hidden_surplus + dd.local_degree() as i64 - rational_back;
        Ok(q(hidden) <= q(d + 1) / q(2))
    }
}

fn walk_flat(f: &RationalMap, s: &BerkPoint, dir: FpPoint) -> Result<BerkPoint> {
    let mut cur = s.clone();
    let mut dir = dir;
    for _ in 0..1000 {
        let nxt = ray_step(f, &cur, dir)?;
        let back = direction_to(&nxt, &cur)?;
        let cont = slopes_at(f, &nxt)?.into_iter().find(|(a, sl)| *a != back && *sl == q(0));
        cur = nxt;
        match cont {
            Some((a, _)) => dir = a,
            None => return Ok(cur),
        }
    }
    Err(Error::Invalid("flat walk did not terminate".into()))
}

pub fn descent(f: &RationalMap) -> Result<Descent> {
    let mut cur = BerkPoint::s_can(f.p());
    let mut path = vec![cur.clone()];
    for _ in 0..10000 {
        let sl = slopes_at(f, &cur)?;
        let neg = sl.iter().filter(|(_, s)| *s < q(0)).min_by(|a, b| a.1.cmp(&b.1)).cloned();
        match neg {
            Some((a, _)) => {
                cur = ray_step(f, &cur, a)?;
                path.push(cur.clone());
            }
            None => {
                let certified = nonrational_certificate(f, &cur)?;
                let flats: Vec<FpPoint> = sl.iter().filter(|(_, s)| *s == q(0)).map(|(a, _)| *a).collect();
                let mut pts = vec![cur.clone()];
                for a in flats {
                    pts.push(walk_flat(f, &cur, a)?);
                }
                let locus = extremes(&pts);
                let min_crucial = crucial_at(f, &cur)?;
                return Ok(Descent { path, locus, min_crucial, certified });
            }
        }
    }
    Err(Error::Invalid("descent did not terminate".into()))
}

/// Both computations of the minimal resultant locus.
#[derive(Clone, Debug)]
pub struct MinResLoc {
    pub locus: Vec<BerkPoint>,
    pub barycenter: Vec<BerkPoint>,
    pub min_value: Q,
    pub certified: bool,
    pub potentially_good: bool,
}

impl MinResLoc {
    pub fn routes_agree(&self) -> bool {
        same_set(&self.locus, &self.barycenter)
    }
}

pub fn same_set(a: &[BerkPoint], b: &[BerkPoint]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

/// A type II base point away from S_can for the geometric route.
pub fn auxiliary_base(p: u64) -> BerkPoint {
    BerkPoint::zeta_q(p, &q(1), &q(1))
}

pub fn minresloc(f: &RationalMap, cm: &CrucialMeasure) -> Result<MinResLoc> {
    let d = f.degree() as i64;
    let ds = descent(f)?;
    let nu_geo = nu_f_gamma(f, &cm.tree, &auxiliary_base(f.p()))?;
    let bc = barycenter(&nu_geo, &cm.tree)?;
    let min_value = q(2 * d * (d - 1)) * &ds.min_crucial + f.res_val();
    let potentially_good = min_value == q(0) && DegreeData::compute(f, &ds.locus[0])?.local_degree() == f.degree();
    Ok(MinResLoc { locus: ds.locus, barycenter: bc, min_value, certified: ds.certified, potentially_good })
}

pub fn is_potentially_good(m: &MinResLoc) -> bool {
    m.potentially_good
}

/// Sup of a ray-profile family over a finite tree: vertices and interior breakpoints.
pub fn tree_sup(tree: &FiniteTree, ray: &dyn Fn(&TowerElem) -> Plf) -> Q {
    let mut best: Option<Q> = None;
    let mut push = |v: Q| {
        if best.as_ref().map_or(true, |b| v > *b) {
            best = Some(v);
        }
    };
    for n in tree.nodes() {
        push(ray(n.point.center().unwrap()).eval(n.point.t().unwrap()));
    }
    for e in tree.edges() {
        let plf = ray(&e.center);
        for b in plf.breaks_in(e.lo.as_ref().unwrap(), e.hi.as_ref().unwrap()) {
            push(plf.eval(&b));
        }
    }
    best.unwrap()
}

/// Slack of both diameter bounds; the second is `None` for quadratic maps.
#[derive(Clone, Debug)]
pub struct DiamReport {
    pub minresloc_lhs: Q,
    pub minresloc_rhs: Q,
    pub support_lhs: Option<Q>,
    pub support_rhs: Q,
}

impl DiamReport {
    pub fn holds(&self) -> bool {
        self.minresloc_lhs <= self.minresloc_rhs && self.support_lhs.as_ref().map_or(true, |l| *l <= self.support_rhs)
    }
}

pub fn check_diam_bounds(f: &RationalMap, loc: &MinResLoc, cm: &CrucialMeasure) -> Result<DiamReport> {
    let d = f.degree() as i64;
    let can = BerkPoint::s_can(f.p());
    let res = f.res_val();
    let seg = FiniteTree::span(&loc.locus)?;
    let lhs1 = tree_sup(&seg, &|c| {
        profile::rho_can(c).scale(&q(d - 1)).add(&profile::wedge(f, c, &can).scale(&q(2)))
    });
    let support_lhs = if d > 2 {
        let sp = FiniteTree::span(&cm.nu.support())?;
        Some(tree_sup(&sp, &|c| profile::rho_can(c).add(&profile::wedge(f, c, &can))))
    } else {
        None
    };
    Ok(DiamReport { minresloc_lhs: lhs1, minresloc_rhs: q(2) * &res, support_lhs, support_rhs: res })
}

/// Everything computed for one map.
#[derive(Clone, Debug)]
pub struct CrucialReport {
    pub tree: CrucialTree,
    pub measure: CrucialMeasure,
    pub minresloc: MinResLoc,
    pub diam: DiamReport,
}

pub fn report(f: &RationalMap, policy: &PrecisionPolicy) -> Result<CrucialReport> {
    let mut ct = crucial_tree(f, policy)?;
    let measure = crucial_measure(f, &mut ct, policy)?;
    let minresloc = minresloc(f, &measure)?;
    let diam = check_diam_bounds(f, &minresloc, &measure)?;
    Ok(CrucialReport { tree: ct, measure, minresloc, diam })
}

fn pts_json(v: &[BerkPoint]) -> serde_json::Value {
    serde_json::Value::Array(v.iter().map(|x| x.to_json()).collect())
}

impl CrucialReport {
    pub fn weights_json(&self, d: usize) -> serde_json::Value {
        let d1 = q(d as i64 - 1);
        let w: Vec<_> = self
            .measure
            .nu
            .sorted()
            .iter()
            .map(|(x, m)| serde_json::json!({"point": x.to_json(), "w": fmt_q(&(m * &d1))}))
            .collect();
        serde_json::Value::Array(w)
    }

    pub fn to_json(&self, f: &RationalMap) -> serde_json::Value {
        let fixed: Vec<_> = self.tree.fixed.points().iter().map(|x| x.to_json()).collect();
        serde_json::json!({
            "schema": "crucial-v1",
            "p": f.p(),
            "degree": f.degree(),
            "res_val": fmt_q(&f.res_val()),
            "fixed_points": fixed,
            "repelling": pts_json(&self.tree.repelling),
            "gamma_fr": self.measure.tree.to_json(),
            "truncation_depth": fmt_q(&self.measure.depth),
            "nu_f": self.measure.nu.to_json(),
            "weights": self.weights_json(f.degree()),
            "weights_match_formula": self.measure.checks_pass(),
            "minresloc": pts_json(&self.minresloc.locus),
            "barycenter": pts_json(&self.minresloc.barycenter),
            "routes_agree": self.minresloc.routes_agree(),
            "min": fmt_q(&self.minresloc.min_value),
            "certified": self.minresloc.certified,
            "potentially_good": self.minresloc.potentially_good,
            "diam": {
                "minresloc": [fmt_q(&self.diam.minresloc_lhs), fmt_q(&self.diam.minresloc_rhs)],
                "support": self.diam.support_lhs.as_ref().map(|l| vec![fmt_q(l), fmt_q(&self.diam.support_rhs)]),
                "holds": self.diam.holds(),
            },
        })
    }
}

/// Row labels of the hanging-branch table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchCase {
    A1,
    A2,
    B1,
    B2,
}

#[derive(Clone, Debug)]
pub struct CaseRow {
    pub point: BerkPoint,
    pub case: BranchCase,
    pub measured: Q,
    pub table: Q,
}

/// Table rows, out-of-tree slopes and the total-variation bound for one branch Γ hanging off Γ_FR at S_Γ.
#[derive(Clone, Debug)]
pub struct BranchCheck {
    pub rows: Vec<CaseRow>,
    pub slopes: Vec<(BerkPoint, Q, Q)>,
    pub variation: Q,
    pub variation_bound: Q,
}

impl BranchCheck {
    pub fn table_holds(&self) -> bool {
        self.rows.iter().all(|r| r.measured == r.table)
    }

    pub fn slopes_hold(&self) -> bool {
        self.slopes.iter().all(|(_, a, b)| a == b)
    }

    pub fn bound_holds(&self) -> bool {
        self.variation <= self.variation_bound
    }
}

/// (d − 1)(ν_{f,Γ} − r_*δ_{S_Γ})({S′}) predicted from the fixed/non-fixed case of S′.
pub fn branch_table(f: &RationalMap, branch: &FiniteTree, attach: &BerkPoint, s: &BerkPoint) -> Result<(BranchCase, Q)> {
    let val = crate::tree::valency_measure(branch)?.mass_at(s);
    let delta = if branch.retract(attach) == *s { q(1) } else { q(0) };
    let img = map_image(f, s)?;
    if img == *s {
        if DegreeData::compute(f, s)?.is_identity() {
            Ok((BranchCase::A1, q(0)))
        } else {
            Ok((BranchCase::A2, q(-2) * val + delta + q(1)))
        }
    } else if branch.retract(&img) == *s {
        Ok((BranchCase::B2, q(-2) * val + q(2) * delta))
    } else {
        Ok((BranchCase::B1, q(-2) * val + delta))
    }
}

/// The slope of Crucial_f at S′ toward Γ_FR predicted by whether S′ is fixed.
pub fn outside_slope(f: &RationalMap, s: &BerkPoint) -> Result<Q> {
    let d = f.degree() as i64;
    if map_image(f, s)? == *s {
        Ok(q(-1) / q(2))
    } else {
        Ok(-q(d + 1) / q(2 * (d - 1)))
    }
}

/// Checks a branch lying in one direction off `gamma_fr` at `attach`.
pub fn branch_check(f: &RationalMap, gamma_fr: &FiniteTree, attach: &BerkPoint, branch: &FiniteTree) -> Result<BranchCheck> {
    if branch.is_trivial() {
        return Err(Error::TrivialTree);
    }
    let mut dir: Option<FpPoint> = None;
    for x in branch.vertices() {
        if x == *attach {
            continue;
        }
        if gamma_fr.retract(&x) != *attach {
            return Err(Error::Invalid(format!("{x} does not hang at {attach}")));
        }
        let v = direction_to(attach, &x)?;
        if dir.map_or(false, |w| w != v) {
            return Err(Error::Invalid("branch meets two directions".into()));
        }
        dir = Some(v);
    }
    let d1 = q(f.degree() as i64 - 1);
    let nu = nu_f_gamma_dual(f, branch)?;
    let diff = nu.sub(&TreeMeasure::dirac(&branch.retract(attach)));
    let m = diff.scale(&d1);
    let mut pts = branch.vertices();
    for (x, _) in m.atoms() {
        if !pts.contains(x) {
            pts.push(x.clone());
        }
    }
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for x in pts {
        let (case, table) = branch_table(f, branch, attach, &x)?;
        rows.push(CaseRow { measured: m.mass_at(&x), point: x.clone(), case, table });
        if x != *attach {
            let toward = direction_to(&x, attach)?;
            slopes.push((x.clone(), crucial_slope_profile(f, &x, toward)?, outside_slope(f, &x)?));
        }
    }
    let r = branch.retract(attach);
    let loose = branch.endpoints().iter().filter(|e| **e != r).count() as i64;
    Ok(BranchCheck { rows, slopes, variation: diff.variation(), variation_bound: q(2 * loose) / d1 })
}

/// Poly helper for tests and callers: coefficients from integers.
pub fn int_poly(p: u64, c: &[i64]) -> Poly {
    let v: Vec<Q> = c.iter().map(|&x| q(x)).collect();
    Poly::from_rationals(p, 1, &v)
}
