//! Finite subtrees of the Berkovich line, atomic measures, PL functions and their Laplacians.

use crate::error::{Error, Result};
use crate::maps::RationalMap;
use crate::plf::Plf;
use crate::points::{elem_json, map_image, BerkPoint};
use crate::profile;
use crate::rat::{fmt_q, q, ExtValue, Q};
use crate::tower::TowerElem;

#[derive(Clone, Debug)]
pub struct Node {
    pub point: BerkPoint,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Hasse diagram of a meet-closed set of points, ordered by the path to ∞.
#[derive(Clone, Debug)]
pub struct FiniteTree {
    nodes: Vec<Node>,
    root: usize,
}

/// Parameter range [lo, hi] of the edge above a node on its center's ray; `None` is infinite.
#[derive(Clone, Debug)]
pub struct Edge {
    pub child: usize,
    pub center: TowerElem,
    pub lo: Option<Q>,
    pub hi: Option<Q>,
}

fn depth_key(s: &BerkPoint) -> Option<ExtValue> {
    s.depth()
}

fn rho_or_zero(a: &BerkPoint, b: &BerkPoint) -> Q {
    a.rho(b).as_fin().cloned().unwrap_or_else(|| q(0))
}

impl FiniteTree {
    /// Minimal subtree containing `points`.
    pub fn span(points: &[BerkPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TrivialTree);
        }
        let mut vs: Vec<BerkPoint> = Vec::new();
        let push = |x: BerkPoint, vs: &mut Vec<BerkPoint>| {
            if !vs.contains(&x) {
                vs.push(x);
            }
        };
        for x in points {
            push(x.clone(), &mut vs);
        }
        let base: Vec<BerkPoint> = vs.clone();
        for i in 0..base.len() {
            for j in i + 1..base.len() {
                push(base[i].meet_inf(&base[j]), &mut vs);
            }
        }
        vs.sort_by(|a, b| depth_key(a).cmp(&depth_key(b)));
        let mut nodes: Vec<Node> = vs.into_iter().map(|point| Node { point, parent: None, children: vec![] }).collect();
        for i in 0..nodes.len() {
            let mut best: Option<usize> = None;
            for j in 0..nodes.len() {
                if i != j && nodes[j].point.is_ancestor_of(&nodes[i].point) {
                    if best.map_or(true, |b| depth_key(&nodes[j].point) > depth_key(&nodes[b].point)) {
                        best = Some(j);
                    }
                }
            }
            nodes[i].parent = best;
        }
        for i in 0..nodes.len() {
            if let Some(pa) = nodes[i].parent {
                nodes[pa].children.push(i);
            }
        }
        let roots: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].parent.is_none()).collect();
        debug_assert_eq!(roots.len(), 1);
        Ok(FiniteTree { nodes, root: roots[0] })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn point(&self, i: usize) -> &BerkPoint {
        &self.nodes[i].point
    }

    pub fn vertices(&self) -> Vec<BerkPoint> {
        self.nodes.iter().map(|n| n.point.clone()).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn valence(&self, i: usize) -> usize {
        self.nodes[i].children.len() + usize::from(self.nodes[i].parent.is_some())
    }

    pub fn endpoints(&self) -> Vec<BerkPoint> {
        if self.is_trivial() {
            return self.vertices();
        }
        (0..self.len()).filter(|&i| self.valence(i) == 1).map(|i| self.point(i).clone()).collect()
    }

    /// Every vertex is type II.
    pub fn is_finite(&self) -> bool {
        self.nodes.iter().all(|n| n.point.is_type_ii())
    }

    pub fn index_of(&self, s: &BerkPoint) -> Option<usize> {
        self.nodes.iter().position(|n| n.point == *s)
    }

    /// Edge from the parent of `i` down to `i`.
    pub fn edge(&self, i: usize) -> Option<Edge> {
        let pa = self.nodes[i].parent?;
        let lo = self.nodes[pa].point.t().cloned();
        let (center, hi) = match &self.nodes[i].point {
            BerkPoint::Disk { center, t } => (center.clone(), Some(t.clone())),
            BerkPoint::Finite(a) => (a.clone(), None),
            BerkPoint::Infinity => unreachable!("∞ is always the root"),
        };
        Some(Edge { child: i, center, lo, hi })
    }

    pub fn edges(&self) -> Vec<Edge> {
        (0..self.len()).filter_map(|i| self.edge(i)).collect()
    }

    /// Nearest point of the tree on the path from `s` to the tree.
    pub fn retract(&self, s: &BerkPoint) -> BerkPoint {
        let (x, tx) = match (s.center(), s.depth()) {
            (Some(x), Some(t)) => (x, t),
            _ => return self.point(self.root).clone(),
        };
        let mut best: Option<(ExtValue, BerkPoint)> = None;
        for e in self.edges() {
            let hi = e.hi.clone().map_or(ExtValue::Inf, ExtValue::Fin);
            let m = tx.clone().min((x - &e.center).val()).min(hi.clone());
            if let Some(lo) = &e.lo {
                if m < ExtValue::Fin(lo.clone()) {
                    continue;
                }
            }
            if best.as_ref().map_or(false, |(b, _)| *b >= m) {
                continue;
            }
            let pt = if m == hi {
                self.point(e.child).clone()
            } else {
                BerkPoint::zeta(&e.center, &m.unwrap_fin())
            };
            best = Some((m, pt));
        }
        match best {
            Some((_, pt)) => pt,
            None => self.point(self.root).clone(),
        }
    }

    pub fn contains(&self, s: &BerkPoint) -> bool {
        self.retract(s) == *s
    }

    /// The tree with extra points of itself promoted to vertices.
    pub fn with_points(&self, extra: &[BerkPoint]) -> Result<FiniteTree> {
        let mut pts = self.vertices();
        pts.extend(extra.iter().cloned());
        FiniteTree::span(&pts)
    }

    /// Type I ends replaced by ζ(a; E) and an ∞ root by ζ(c; −E).
    pub fn truncate(&self, big: &Q) -> Result<FiniteTree> {
        let mut pts = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            match &n.point {
                BerkPoint::Finite(a) => pts.push(BerkPoint::zeta(a, big)),
                BerkPoint::Infinity => {
                    let c = self.nodes[i].children.first().map(|&j| self.point(j).center().unwrap().clone());
                    match c {
                        Some(c) => pts.push(BerkPoint::zeta(&c, &-big)),
                        None => return Err(Error::TrivialTree),
                    }
                }
                p => pts.push(p.clone()),
            }
        }
        FiniteTree::span(&pts)
    }

    /// max over the tree of ρ(·, S0) (attained at a vertex).
    pub fn sup_rho(&self, s0: &BerkPoint) -> ExtValue {
        self.nodes.iter().map(|n| n.point.rho(s0)).max().unwrap()
    }

    pub fn total_length(&self) -> ExtValue {
        let mut acc = ExtValue::Fin(q(0));
        for i in 0..self.len() {
            if let Some(pa) = self.nodes[i].parent {
                acc = acc.add(&self.point(i).rho(self.point(pa)));
            }
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vs: Vec<_> = self.nodes.iter().map(|n| n.point.to_json()).collect();
        let es: Vec<_> = (0..self.len())
            .filter_map(|i| {
                self.nodes[i].parent.map(|pa| {
                    serde_json::json!({"from": pa, "to": i, "length": self.point(i).rho(self.point(pa)).to_json_string()})
                })
            })
            .collect();
        serde_json::json!({"schema": "tree-v1", "root": self.root, "vertices": vs, "edges": es})
    }

    /// DOT graph; `labels` adds text per vertex index.
    pub fn to_dot(&self, labels: &dyn Fn(usize) -> String) -> String {
        let mut s = String::from("graph tree {\n");
        for i in 0..self.len() {
            let extra = labels(i);
            let lab = if extra.is_empty() { self.point(i).to_string() } else { format!("{}\\n{}", self.point(i), extra) };
            s.push_str(&format!("  v{i} [label=\"{lab}\"];\n"));
        }
        for i in 0..self.len() {
            if let Some(pa) = self.nodes[i].parent {
                let len = self.point(i).rho(self.point(pa)).to_json_string();
                s.push_str(&format!("  v{pa} -- v{i} [label=\"{len}\"];\n"));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Finitely supported signed measure with exact rational masses.
#[derive(Clone, Debug, Default)]
pub struct TreeMeasure {
    atoms: Vec<(BerkPoint, Q)>,
}

impl PartialEq for TreeMeasure {
    fn eq(&self, o: &Self) -> bool {
        let d = self.sub(o);
        d.atoms.is_empty()
    }
}

impl TreeMeasure {
    pub fn zero() -> Self {
        TreeMeasure { atoms: vec![] }
    }

    pub fn dirac(s: &BerkPoint) -> Self {
        let mut m = Self::zero();
        m.add_atom(s, &q(1));
        m
    }

    pub fn add_atom(&mut self, s: &BerkPoint, mass: &Q) {
        if *mass == q(0) {
            return;
        }
        if let Some(k) = self.atoms.iter().position(|(x, _)| x == s) {
            self.atoms[k].1 += mass;
            if self.atoms[k].1 == q(0) {
                self.atoms.remove(k);
            }
        } else {
            self.atoms.push((s.clone(), mass.clone()));
        }
    }

    pub fn atoms(&self) -> &[(BerkPoint, Q)] {
        &self.atoms
    }

    pub fn mass_at(&self, s: &BerkPoint) -> Q {
        self.atoms.iter().find(|(x, _)| x == s).map_or_else(|| q(0), |(_, m)| m.clone())
    }

    pub fn total(&self) -> Q {
        self.atoms.iter().map(|(_, m)| m.clone()).sum()
    }

    pub fn variation(&self) -> Q {
        self.atoms.iter().map(|(_, m)| crate::rat::abs_q(m)).sum()
    }

    pub fn support(&self) -> Vec<BerkPoint> {
        self.atoms.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn add(&self, o: &TreeMeasure) -> TreeMeasure {
        let mut m = self.clone();
        for (x, a) in &o.atoms {
            m.add_atom(x, a);
        }
        m
    }

    pub fn scale(&self, c: &Q) -> TreeMeasure {
        let mut m = Self::zero();
        for (x, a) in &self.atoms {
            m.add_atom(x, &(a * c));
        }
        m
    }

    pub fn sub(&self, o: &TreeMeasure) -> TreeMeasure {
        self.add(&o.scale(&q(-1)))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|(_, m)| *m >= q(0))
    }

    /// Pushforward under retraction onto `tree`.
    pub fn retract_to(&self, tree: &FiniteTree) -> TreeMeasure {
        let mut m = Self::zero();
        for (x, a) in &self.atoms {
            m.add_atom(&tree.retract(x), a);
        }
        m
    }

    /// ∫ φ dν for φ given pointwise.
    pub fn integrate(&self, phi: &dyn Fn(&BerkPoint) -> Result<Q>) -> Result<Q> {
        let mut acc = q(0);
        for (x, a) in &self.atoms {
            acc += phi(x)? * a;
        }
        Ok(acc)
    }

    pub fn sorted(&self) -> Vec<(BerkPoint, Q)> {
        let mut v = self.atoms.clone();
        v.sort_by_key(|(x, _)| x.to_string());
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        let a: Vec<_> = self.sorted().iter().map(|(x, m)| serde_json::json!({"point": x.to_json(), "mass": fmt_q(m)})).collect();
        serde_json::Value::Array(a)
    }
}

/// ν_Γ = −½ Σ (v_Γ(S) − 2) δ_S
pub fn valency_measure(tree: &FiniteTree) -> Result<TreeMeasure> {
    if tree.is_trivial() {
        return Err(Error::TrivialTree);
    }
    let mut m = TreeMeasure::zero();
    for i in 0..tree.len() {
        let v = tree.valence(i) as i64;
        m.add_atom(tree.point(i), &(q(2 - v) / q(2)));
    }
    Ok(m)
}

/// Continuous PL function on a finite tree: for each node, its profile along the node's center ray.
#[derive(Clone, Debug)]
pub struct TreePlf {
    tree: FiniteTree,
    profiles: Vec<Plf>,
}

impl TreePlf {
    /// Builds the function from ray profiles c ↦ (t ↦ φ(ζ(c;t))).
    pub fn from_rays(tree: &FiniteTree, ray: &dyn Fn(&TowerElem) -> Result<Plf>) -> Result<TreePlf> {
        if !tree.is_finite() {
            return Err(Error::UnsupportedPointType("type I vertex in a PL tree".into()));
        }
        let mut profiles = Vec::with_capacity(tree.len());
        for n in tree.nodes() {
            profiles.push(ray(n.point.center().unwrap())?);
        }
        Ok(TreePlf { tree: tree.clone(), profiles })
    }

    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn profile(&self, i: usize) -> &Plf {
        &self.profiles[i]
    }

    fn locate(&self, s: &BerkPoint) -> Option<usize> {
        if let Some(i) = self.tree.index_of(s) {
            return Some(i);
        }
        let (x, t) = (s.center()?, s.t()?);
        self.tree.edges().into_iter().find_map(|e| {
            let inside = e.lo.as_ref().map_or(true, |lo| lo <= t)
                && e.hi.as_ref().map_or(true, |hi| t <= hi)
                && (x - &e.center).val() >= ExtValue::Fin(t.clone());
            inside.then_some(e.child)
        })
    }

    pub fn eval(&self, s: &BerkPoint) -> Result<Q> {
        let i = self.locate(s).ok_or_else(|| Error::Invalid(format!("{s} is not on the tree")))?;
        Ok(self.profiles[i].eval(s.t().unwrap()))
    }

    /// Restriction to a subtree, rebuilt by interpolation through the breakpoints of this function.
    pub fn restrict(&self, sub: &FiniteTree) -> Result<TreePlf> {
        let mut profiles = Vec::with_capacity(sub.len());
        let edges = self.tree.edges();
        for i in 0..sub.len() {
            let s = sub.point(i);
            let c = s.center().unwrap();
            let hi = s.t().unwrap().clone();
            let lo = match sub.edge(i) {
                Some(e) => e.lo.unwrap(),
                None => hi.clone(),
            };
            let mut ts = vec![lo.clone(), hi.clone()];
            for e in &edges {
                let (elo, ehi) = (e.lo.clone().unwrap(), e.hi.clone().unwrap());
                let sep = (c - &e.center).val();
                let top = ExtValue::Fin(ehi.clone()).min(sep).min(ExtValue::Fin(hi.clone()));
                let a = crate::rat::max_q(&elo, &lo);
                if ExtValue::Fin(a.clone()) > top {
                    continue;
                }
                let b = top.unwrap_fin();
                ts.push(a.clone());
                ts.push(b.clone());
                ts.extend(self.profiles[e.child].breaks_in(&a, &b));
            }
            ts.sort();
            ts.dedup();
            let mut nodes = Vec::new();
            for t in ts {
                let v = self.eval(&BerkPoint::zeta(c, &t))?;
                nodes.push((t, v));
            }
            profiles.push(Plf::interpolate(&nodes));
        }
        Ok(TreePlf { tree: sub.clone(), profiles })
    }

    pub fn add(&self, o: &TreePlf) -> TreePlf {
        let profiles = self.profiles.iter().zip(&o.profiles).map(|(a, b)| a.add(b)).collect();
        TreePlf { tree: self.tree.clone(), profiles }
    }

    pub fn scale(&self, c: &Q) -> TreePlf {
        TreePlf { tree: self.tree.clone(), profiles: self.profiles.iter().map(|a| a.scale(c)).collect() }
    }

    /// Slope leaving `s` along the tree direction given by neighbor vertex `toward`.
    pub fn slope_toward(&self, i: usize, toward: usize) -> Q {
        let t = self.tree.point(i).t().unwrap();
        if self.tree.nodes()[toward].parent == Some(i) {
            self.profiles[toward].slope_right(t)
        } else {
            -self.profiles[i].slope_left(t)
        }
    }

    /// Minimum value and the extreme points of the minimum locus.
    pub fn min_locus(&self) -> (Q, Vec<BerkPoint>) {
        let mut cands: Vec<(Q, BerkPoint)> = Vec::new();
        for i in 0..self.tree.len() {
            let pt = self.tree.point(i);
            cands.push((self.profiles[i].eval(pt.t().unwrap()), pt.clone()));
        }
        for e in self.tree.edges() {
            let (lo, hi) = (e.lo.unwrap(), e.hi.unwrap());
            let (m, a, b) = self.profiles[e.child].min_on(&lo, &hi);
            cands.push((m.clone(), BerkPoint::zeta(&e.center, &a)));
            cands.push((m, BerkPoint::zeta(&e.center, &b)));
        }
        let m = cands.iter().map(|(v, _)| v.clone()).min().unwrap();
        let pts: Vec<BerkPoint> = cands.into_iter().filter(|(v, _)| *v == m).map(|(_, x)| x).collect();
        (m, extremes(&pts))
    }
}

/// The one or two mutually farthest points of a set lying on a segment.
pub fn extremes(pts: &[BerkPoint]) -> Vec<BerkPoint> {
    let mut best = (q(-1), 0, 0);
    for i in 0..pts.len() {
        for j in i..pts.len() {
            let r = rho_or_zero(&pts[i], &pts[j]);
            if r > best.0 {
                best = (r, i, j);
            }
        }
    }
    if best.1 == best.2 {
        vec![pts[best.1].clone()]
    } else {
        vec![pts[best.1].clone(), pts[best.2].clone()]
    }
}

/// Δ_Γ φ: outward slopes summed at vertices and jumps at interior breakpoints.
pub fn laplacian(phi: &TreePlf) -> TreeMeasure {
    let tree = phi.tree();
    let mut m = TreeMeasure::zero();
    for e in tree.edges() {
        let (lo, hi) = (e.lo.clone().unwrap(), e.hi.clone().unwrap());
        let prof = phi.profile(e.child);
        let pa = tree.nodes()[e.child].parent.unwrap();
        m.add_atom(tree.point(e.child), &-prof.slope_left(&hi));
        m.add_atom(tree.point(pa), &prof.slope_right(&lo));
        for b in prof.breaks_in(&lo, &hi) {
            m.add_atom(&BerkPoint::zeta(&e.center, &b), &(prof.slope_right(&b) - prof.slope_left(&b)));
        }
    }
    m
}

/// Edge segments with the child-side mass exactly ½, and vertices where every direction carries ≤ ½.
pub fn barycenter(nu: &TreeMeasure, tree: &FiniteTree) -> Result<Vec<BerkPoint>> {
    if nu.total() != q(1) {
        return Err(Error::NotProbability(fmt_q(&nu.total())));
    }
    let nu = nu.retract_to(tree);
    let t = tree.with_points(&nu.support())?;
    let n = t.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| depth_key(t.point(b)).cmp(&depth_key(t.point(a))));
    let mut sub = vec![q(0); n];
    for &i in &order {
        sub[i] += nu.mass_at(t.point(i));
        if let Some(pa) = t.nodes()[i].parent {
            let v = sub[i].clone();
            sub[pa] += v;
        }
    }
    let half = q(1) / q(2);
    let mut pts = Vec::new();
    for i in 0..n {
        let mut ok = t.nodes()[i].children.iter().all(|&j| sub[j] <= half);
        if t.nodes()[i].parent.is_some() {
            ok &= q(1) - &sub[i] <= half;
        }
        if ok {
            pts.push(t.point(i).clone());
        }
        if let Some(pa) = t.nodes()[i].parent {
            if sub[i] == half {
                pts.push(t.point(i).clone());
                pts.push(t.point(pa).clone());
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::Invalid("empty barycenter".into()));
    }
    Ok(extremes(&pts))
}

/// ν_{f,Γ} = ν_Γ + Δ_Γ Crucial_f.
pub fn nu_f_gamma_dual(f: &RationalMap, tree: &FiniteTree) -> Result<TreeMeasure> {
    let cr = TreePlf::from_rays(tree, &|c| Ok(profile::crucial(f, c)))?;
    Ok(valency_measure(tree)?.add(&laplacian(&cr)))
}

/// ν_{f,Γ} = Δ_Γ(W_{S0} − G_{S0})/(d−1) + r_*δ_{S0}.
pub fn nu_f_gamma(f: &RationalMap, tree: &FiniteTree, s0: &BerkPoint) -> Result<TreeMeasure> {
    if tree.is_trivial() {
        return Err(Error::TrivialTree);
    }
    let (a0, b0) = crate::points::chart(s0)?;
    let g = f.conjugate(&crate::maps::Mobius::affine(&a0, &b0));
    let phi = TreePlf::from_rays(tree, &|c| {
        let w = profile::wedge(f, c, s0);
        Ok(w.sub(&profile::potential_conj(&g, c, s0)?))
    })?;
    let d1 = q(f.degree() as i64 - 1);
    Ok(laplacian(&phi).scale(&(q(1) / d1)).add(&TreeMeasure::dirac(&tree.retract(s0))))
}

/// (r_Γ)_*(f*δ_{S0}) = d·(r_Γ)_*δ_{S0} − Δ_Γ G_{S0}.
pub fn retracted_pullback(f: &RationalMap, s0: &BerkPoint, tree: &FiniteTree) -> Result<TreeMeasure> {
    let (a0, b0) = crate::points::chart(s0)?;
    let g = f.conjugate(&crate::maps::Mobius::affine(&a0, &b0));
    let phi = TreePlf::from_rays(tree, &|c| profile::potential_conj(&g, c, s0))?;
    let d = q(f.degree() as i64);
    if tree.is_trivial() {
        return Ok(TreeMeasure::dirac(tree.point(0)).scale(&d));
    }
    Ok(TreeMeasure::dirac(&tree.retract(s0)).scale(&d).sub(&laplacian(&phi)))
}

/// Image of every vertex, for cross-checks.
pub fn vertex_images(f: &RationalMap, tree: &FiniteTree) -> Result<Vec<BerkPoint>> {
    tree.nodes().iter().map(|n| map_image(f, &n.point)).collect()
}

pub fn point_json_with(s: &BerkPoint, extra: (&str, serde_json::Value)) -> serde_json::Value {
    let mut v = s.to_json();
    v[extra.0] = extra.1;
    v
}

pub fn center_json(c: &TowerElem) -> serde_json::Value {
    elem_json(c)
}
