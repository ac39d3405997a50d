//! Seeded invariant suite: each check compares two independent routes on random instances.

use crate::crucial::{ordres_direct, ordres_via_formula};
use crate::degrees::{crucial_slope_local, crucial_slope_profile, expansion_rate, in_crucial_range, surplus_via_pullback, DegreeData};
use crate::error::Result;
use crate::fp::fp_points;
use crate::maps::RationalMap;
use crate::profile;
use crate::rat::{fmt_q, q};
use crate::sample;
use crate::tree::{laplacian, nu_f_gamma, nu_f_gamma_dual, FiniteTree, TreePlf};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SelfCheck {
    pub name: &'static str,
    pub trials: usize,
    pub failures: Vec<String>,
}

impl SelfCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "check": self.name,
            "trials": self.trials,
            "passed": self.passed(),
            "failures": self.failures,
        })
    }
}

fn run(name: &'static str, trials: usize, rng: &mut ChaCha8Rng, one: &dyn Fn(&mut ChaCha8Rng) -> Result<Option<String>>) -> SelfCheck {
    let mut failures = Vec::new();
    for _ in 0..trials {
        match one(rng) {
            Ok(None) => {}
            Ok(Some(msg)) => failures.push(msg),
            Err(e) => failures.push(e.to_string()),
        }
    }
    SelfCheck { name, trials, failures }
}

fn instance(rng: &mut ChaCha8Rng) -> (RationalMap, u64) {
    let p = *[2u64, 3, 5].choose(rng).unwrap();
    let d = rng.gen_range(2..=3);
    (sample::random_map(rng, p, d), p)
}

fn ordres_once(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (f, p) = instance(rng);
    let s = sample::grid_point(rng, p);
    let a = ordres_direct(&f, &s)?;
    let b = ordres_via_formula(&f, &s)?;
    Ok((a != b).then(|| format!("{f} at {s}: direct {} formula {}", fmt_q(&a), fmt_q(&b))))
}

fn degrees_once(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (f, p) = instance(rng);
    let s = sample::random_point(rng, p);
    let dd = DegreeData::compute(&f, &s)?;
    let deg = dd.local_degree();
    for w in fp_points(p) {
        let (fiber, split) = dd.rational_fiber(w);
        if !split {
            continue;
        }
        let mut tot = q(0);
        for &v in &fiber {
            tot += expansion_rate(&f, &s, v)?;
        }
        if tot != q(deg as i64) {
            return Ok(Some(format!("{f} at {s}: expansion over {w:?} gives {}", fmt_q(&tot))));
        }
    }
    if dd.surplus_split() {
        let mut tot = q(0);
        for v in fp_points(p) {
            tot += surplus_via_pullback(&f, &dd, v)?;
        }
        if tot != q((f.degree() - deg) as i64) {
            return Ok(Some(format!("{f} at {s}: surplus {}", fmt_q(&tot))));
        }
    }
    Ok(None)
}

fn slopes_once(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (f, p) = instance(rng);
    let s = sample::random_point(rng, p);
    let dd = DegreeData::compute(&f, &s)?;
    let mut ms = Vec::new();
    for v in fp_points(p) {
        let a = crucial_slope_profile(&f, &s, v)?;
        let b = crucial_slope_local(&dd, v)?;
        if a != b || !in_crucial_range(&a, f.degree()) {
            return Ok(Some(format!("{f} at {s} dir {v:?}: profile {} local {}", fmt_q(&a), fmt_q(&b))));
        }
        ms.push(a);
    }
    for i in 0..ms.len() {
        for j in i + 1..ms.len() {
            if &ms[i] + &ms[j] < q(0) {
                return Ok(Some(format!("{f} at {s}: negative pair sum")));
            }
        }
    }
    Ok(None)
}

fn measure_once(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (f, p) = instance(rng);
    let k = rng.gen_range(2..=4);
    let tree = sample::random_tree(rng, p, k);
    let dual = nu_f_gamma_dual(&f, &tree)?;
    let s0 = sample::random_point(rng, p);
    let geo = nu_f_gamma(&f, &tree, &s0)?;
    if dual != geo || dual.total() != q(1) {
        return Ok(Some(format!("{f} on {} vertices: routes differ or mass {}", tree.len(), fmt_q(&dual.total()))));
    }
    Ok(None)
}

fn restriction_once(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let (f, p) = instance(rng);
    let k = rng.gen_range(3..=5);
    let tree = sample::random_tree(rng, p, k);
    let phi = TreePlf::from_rays(&tree, &|c| Ok(profile::crucial(&f, c)))?;
    let mut vs = tree.vertices();
    vs.shuffle(rng);
    let keep = rng.gen_range(2..=vs.len());
    let sub = FiniteTree::span(&vs[..keep])?;
    if sub.is_trivial() {
        return Ok(None);
    }
    let lhs = laplacian(&phi.restrict(&sub)?);
    let rhs = laplacian(&phi).retract_to(&sub);
    Ok((lhs != rhs).then(|| format!("{f}: restriction of the Laplacian differs on {} vertices", sub.len())))
}

/// Runs every check with `trials` instances each.
pub fn run_all(seed: u64, trials: usize) -> Vec<SelfCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        run("ordres", trials, &mut rng, &ordres_once),
        run("degrees", trials, &mut rng, &degrees_once),
        run("slopes", trials, &mut rng, &slopes_once),
        run("nu_f_gamma", trials, &mut rng, &measure_once),
        run("laplacian_restriction", trials, &mut rng, &restriction_once),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        for c in run_all(7, 6) {
            assert!(c.passed(), "{}: {:?}", c.name, c.failures);
        }
    }
}
