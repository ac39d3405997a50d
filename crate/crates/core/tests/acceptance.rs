use berkcrucial::crucial::{
    branch_check, crucial_at, ordres_direct, ordres_via_formula, report, same_set, BranchCase, CrucialReport,
};
use berkcrucial::degrees::{crucial_slope_local, crucial_slope_profile, expansion_rate, in_crucial_range, surplus_via_pullback, DegreeData};
use berkcrucial::equidist::{decays_by_degree, default_setup, run_grid, DEFAULT_CAP};
use berkcrucial::fp::fp_points;
use berkcrucial::maps::RationalMap;
use berkcrucial::parse::parse_map;
use berkcrucial::points::{chart, direction_to, BerkPoint};
use berkcrucial::profile;
use berkcrucial::rat::{fmt_q, q, qf, Q};
use berkcrucial::roots::PrecisionPolicy;
use berkcrucial::sample;
use berkcrucial::tree::{barycenter, laplacian, nu_f_gamma, nu_f_gamma_dual, FiniteTree, TreePlf};
use berkcrucial::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const SEED: u64 = 20240611;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: String) -> Result<Outcome> {
    Ok(Outcome { ok: true, detail })
}

fn fail(detail: String) -> Result<Outcome> {
    Ok(Outcome { ok: false, detail })
}

fn rng(k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ (k << 32))
}

fn pick_instance(r: &mut ChaCha8Rng) -> (u64, usize) {
    (*[2u64, 3, 5].choose(r).unwrap(), r.gen_range(2..=3))
}

fn criterion_1() -> Result<Outcome> {
    let mut r = rng(1);
    let n = 240;
    for i in 0..n {
        let (p, d) = pick_instance(&mut r);
        let f = sample::random_map(&mut r, p, d);
        let s = sample::grid_point(&mut r, p);
        let a = ordres_direct(&f, &s)?;
        let b = ordres_via_formula(&f, &s)?;
        if a != b {
            return fail(format!("instance {i}: {f} at {s}: {} vs {}", fmt_q(&a), fmt_q(&b)));
        }
    }
    pass(format!("{n} instances"))
}

fn criterion_2() -> Result<Outcome> {
    for p in [2u64, 3, 5] {
        let f = parse_map(p, "z^2")?;
        let can = BerkPoint::s_can(p);
        if ordres_direct(&f, &can)? != q(0) || crucial_at(&f, &can)? != q(0) {
            return fail(format!("z^2 at S_can, p={p}"));
        }
        for t in [1, -1] {
            let s = BerkPoint::zeta_q(p, &q(0), &q(t));
            if ordres_direct(&f, &s)? != q(2) || crucial_at(&f, &s)? != qf(1, 2) {
                return fail(format!("z^2 at {s}, p={p}"));
            }
        }
        let rep = report(&f, &PrecisionPolicy::default())?;
        let nu = rep.measure.nu.sorted();
        if nu != vec![(can.clone(), q(1))] {
            return fail(format!("nu_f for z^2 at p={p}: {nu:?}"));
        }
        if rep.minresloc.locus != vec![can.clone()] || !rep.minresloc.potentially_good || rep.minresloc.min_value != q(0) {
            return fail(format!("MinResLoc for z^2 at p={p}"));
        }
        let g = parse_map(p, "p*z^2")?;
        let rg = report(&g, &PrecisionPolicy::default())?;
        let s = BerkPoint::zeta_q(p, &q(0), &q(-1));
        if rg.minresloc.locus != vec![s.clone()] || rg.minresloc.min_value != q(0) {
            return fail(format!("MinResLoc for pz^2 at p={p}: {:?}", rg.minresloc.locus));
        }
        if rg.measure.nu.mass_at(&s) * q(g.degree() as i64 - 1) != q(1) {
            return fail(format!("w(zeta(0;-1)) for pz^2 at p={p}"));
        }
    }
    pass("z^2 and pz^2 at p = 2, 3, 5".into())
}

fn criterion_3() -> Result<Outcome> {
    let mut r = rng(3);
    let (mut fibers, mut surplus, mut fixed) = (0, 0, 0);
    for i in 0..120 {
        let (p, d) = pick_instance(&mut r);
        let f = sample::random_map(&mut r, p, d);
        let s = sample::random_point(&mut r, p);
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
                return fail(format!("sample {i}: {f} at {s}, fiber over {w:?}: {} != {deg}", fmt_q(&tot)));
            }
            fibers += 1;
        }
        if dd.surplus_split() {
            let mut tot = q(0);
            for v in fp_points(p) {
                tot += surplus_via_pullback(&f, &dd, v)?;
            }
            if tot != q((d - deg) as i64) {
                return fail(format!("sample {i}: {f} at {s}: surplus {} != {}", fmt_q(&tot), d - deg));
            }
            surplus += 1;
        }
    }
    for i in 0..60 {
        let (p, d) = pick_instance(&mut r);
        let (f, s) = sample::fixed_at_point(&mut r, p, d);
        let dd = DegreeData::compute(&f, &s)?;
        if !dd.fixed || dd.is_identity() {
            return fail(format!("fixed sample {i}: {f} at {s} is not a non-identity fixed point"));
        }
        let tot: usize = fp_points(p).into_iter().map(|a| dd.reduction.map.fixed_order(a)).sum();
        if tot != dd.local_degree() + 1 {
            return fail(format!("fixed sample {i}: {f} at {s}: order {tot} != {}", dd.local_degree() + 1));
        }
        fixed += 1;
    }
    let samples = 120 + fixed;
    pass(format!("{samples} samples: {fibers} fibers, {surplus} surplus totals, {fixed} fixed-point totals"))
}

fn criterion_4() -> Result<Outcome> {
    let mut r = rng(4);
    let n = 150;
    let mut slopes = 0;
    for i in 0..n {
        let (p, d) = pick_instance(&mut r);
        let f = sample::random_map(&mut r, p, d);
        let s = sample::random_point(&mut r, p);
        let dd = DegreeData::compute(&f, &s)?;
        let mut ms = Vec::new();
        for v in fp_points(p) {
            let a = crucial_slope_profile(&f, &s, v)?;
            if !in_crucial_range(&a, d) {
                return fail(format!("point {i}: {f} at {s} dir {v:?}: slope {} out of range", fmt_q(&a)));
            }
            let b = crucial_slope_local(&dd, v)?;
            if a != b {
                return fail(format!("point {i}: {f} at {s} dir {v:?}: profile {} local {}", fmt_q(&a), fmt_q(&b)));
            }
            ms.push(a);
            slopes += 1;
        }
        for x in 0..ms.len() {
            for y in x + 1..ms.len() {
                if &ms[x] + &ms[y] < q(0) {
                    return fail(format!("point {i}: {f} at {s}: directions {x},{y} sum below 0"));
                }
            }
        }
    }
    pass(format!("{n} points, {slopes} slopes"))
}

fn atom_integrality(nu: &berkcrucial::tree::TreeMeasure, d: usize) -> bool {
    let d1 = q(d as i64 - 1);
    nu.atoms().iter().all(|(_, m)| {
        let w = m * &d1;
        w.is_integer() && w >= q(-1)
    })
}

fn criterion_5(reports: &[(String, RationalMap, CrucialReport)]) -> Result<Outcome> {
    let mut r = rng(5);
    let (mut trees, mut admissible) = (0, 0);
    for i in 0..400 {
        let (p, d) = pick_instance(&mut r);
        let f = sample::random_map(&mut r, p, d);
        let k = r.gen_range(2..=4);
        let tree = sample::random_tree(&mut r, p, k);
        let nu = nu_f_gamma_dual(&f, &tree)?;
        let s0 = sample::random_point(&mut r, p);
        let geo = nu_f_gamma(&f, &tree, &s0)?;
        if nu != geo {
            return fail(format!("tree {i}: {f}: dual and geometric measures differ"));
        }
        if nu.total() != q(1) || !atom_integrality(&nu, d) {
            return fail(format!("tree {i}: {f}: total {} or atoms {:?}", fmt_q(&nu.total()), nu.sorted()));
        }
        trees += 1;
        if !nu.is_nonnegative() {
            continue;
        }
        admissible += 1;
        let cr = TreePlf::from_rays(&tree, &|c| Ok(profile::crucial(&f, c)))?;
        let (_, locus) = cr.min_locus();
        let bc = barycenter(&nu, &tree)?;
        if !same_set(&locus, &bc) {
            return fail(format!("tree {i}: {f}: min locus {locus:?} vs barycenter {bc:?}"));
        }
        if locus.is_empty() || locus.len() > 2 || locus.iter().any(|x| !x.is_type_ii()) || (d % 2 == 0 && locus.len() != 1) {
            return fail(format!("tree {i}: {f}: locus extremes {locus:?}"));
        }
    }
    for (name, f, rep) in reports {
        let tree = rep.measure.tree.with_points(&[sample::random_point(&mut r, f.p()), sample::random_point(&mut r, f.p())])?;
        let nu = nu_f_gamma_dual(f, &tree)?;
        if nu.total() != q(1) || !atom_integrality(&nu, f.degree()) {
            return fail(format!("{name}: enlarged tree measure {:?}", nu.sorted()));
        }
        if nu.is_nonnegative() {
            let cr = TreePlf::from_rays(&tree, &|c| Ok(profile::crucial(f, c)))?;
            if !same_set(&cr.min_locus().1, &barycenter(&nu, &tree)?) {
                return fail(format!("{name}: enlarged tree min locus differs from barycenter"));
            }
            admissible += 1;
        }
        trees += 1;
    }
    for (name, f, rep) in reports {
        let d = f.degree();
        let nu = &rep.measure.nu;
        let atoms = nu.atoms();
        if atoms.len() > d - 1 || atoms.iter().any(|(x, m)| !x.is_type_ii() || *m <= q(0)) || nu.total() != q(1) {
            return fail(format!("{name}: nu_f = {:?}", nu.sorted()));
        }
        if !atom_integrality(nu, d) || !rep.measure.checks_pass() {
            return fail(format!("{name}: weights do not match the local formula"));
        }
        let loc = &rep.minresloc;
        if !loc.routes_agree() {
            return fail(format!("{name}: descent {:?} vs barycenter {:?}", loc.locus, loc.barycenter));
        }
        if loc.locus.len() > 2 || (d % 2 == 0 && loc.locus.len() != 1) || loc.locus.iter().any(|x| !x.is_type_ii()) {
            return fail(format!("{name}: MinResLoc extremes {:?}", loc.locus));
        }
    }
    pass(format!("{trees} random trees ({admissible} with nonnegative measure), {} crucial measures", reports.len()))
}

fn attach_candidates(gamma: &FiniteTree) -> Vec<BerkPoint> {
    let mut out: Vec<BerkPoint> = gamma.vertices().into_iter().filter(|x| x.is_type_ii()).collect();
    for e in gamma.edges() {
        let t = match (&e.lo, &e.hi) {
            (Some(a), Some(b)) => (a + b) / q(2),
            (Some(a), None) => a + q(1),
            (None, Some(b)) => b - q(1),
            (None, None) => q(0),
        };
        out.push(BerkPoint::zeta(&e.center, &t));
    }
    out
}

/// Up to three points off `gamma` in one direction at `attach`.
fn hanging_points(r: &mut ChaCha8Rng, gamma: &FiniteTree, attach: &BerkPoint, p: u64) -> Result<Vec<BerkPoint>> {
    let (c, u) = chart(attach)?;
    let mut by_dir: Vec<(Option<u64>, Vec<BerkPoint>)> = Vec::new();
    for _ in 0..24 {
        let a = sample::small_rational(r, p);
        let t = qf(r.gen_range(-4i64..=5), 2);
        let x = BerkPoint::zeta_q(p, &a, &t).affine_image(&c, &u);
        if x == *attach || gamma.retract(&x) != *attach {
            continue;
        }
        let v = direction_to(attach, &x)?;
        match by_dir.iter_mut().find(|(w, _)| *w == v) {
            Some((_, pts)) => {
                if !pts.contains(&x) {
                    pts.push(x)
                }
            }
            None => by_dir.push((v, vec![x])),
        }
    }
    if by_dir.is_empty() {
        return Ok(Vec::new());
    }
    let (_, mut pts) = by_dir.swap_remove(r.gen_range(0..by_dir.len()));
    pts.shuffle(r);
    pts.truncate(r.gen_range(1..=3));
    Ok(pts)
}

fn criterion_6(reports: &[(String, RationalMap, CrucialReport)]) -> Result<Outcome> {
    let mut r = rng(6);
    let mut branches = 0;
    let mut cases = [0usize; 4];
    let mut slopes = 0;
    for round in 0..6 {
        for (name, f, rep) in reports {
            let gamma = rep.tree.gamma()?;
            let cands = attach_candidates(&gamma);
            let attach = cands.choose(&mut r).unwrap().clone();
            let mut pts = hanging_points(&mut r, &gamma, &attach, f.p())?;
            if pts.is_empty() {
                continue;
            }
            if pts.len() == 1 || r.gen_bool(0.5) {
                pts.push(attach.clone());
            }
            let branch = FiniteTree::span(&pts)?;
            let bc = branch_check(f, &gamma, &attach, &branch)?;
            if !bc.table_holds() {
                let bad: Vec<_> = bc.rows.iter().filter(|x| x.measured != x.table).map(|x| format!("{} {:?} {} vs {}", x.point, x.case, fmt_q(&x.measured), fmt_q(&x.table))).collect();
                return fail(format!("{name} round {round} at {attach}: {bad:?}"));
            }
            if !bc.slopes_hold() {
                return fail(format!("{name} round {round} at {attach}: out-of-tree slopes {:?}", bc.slopes));
            }
            if !bc.bound_holds() {
                return fail(format!("{name} round {round}: variation {} > {}", fmt_q(&bc.variation), fmt_q(&bc.variation_bound)));
            }
            for row in &bc.rows {
                cases[match row.case {
                    BranchCase::A1 => 0,
                    BranchCase::A2 => 1,
                    BranchCase::B1 => 2,
                    BranchCase::B2 => 3,
                }] += 1;
            }
            slopes += bc.slopes.len();
            branches += 1;
        }
    }
    if branches < 50 {
        return fail(format!("only {branches} branches sampled"));
    }
    pass(format!("{branches} branches; rows A1 {} A2 {} B1 {} B2 {}; {slopes} slopes", cases[0], cases[1], cases[2], cases[3]))
}

fn criterion_7(reports: &[(String, RationalMap, CrucialReport)]) -> Result<Outcome> {
    let mut cubic = 0;
    for (name, f, rep) in reports {
        let dm = &rep.diam;
        if dm.minresloc_lhs > dm.minresloc_rhs {
            return fail(format!("{name}: {} > {}", fmt_q(&dm.minresloc_lhs), fmt_q(&dm.minresloc_rhs)));
        }
        if f.degree() == 3 {
            match &dm.support_lhs {
                Some(l) if *l <= dm.support_rhs => cubic += 1,
                _ => return fail(format!("{name}: support bound {:?} vs {}", dm.support_lhs, fmt_q(&dm.support_rhs))),
            }
        }
    }
    if cubic == 0 {
        return fail("no cubic map tested".into());
    }
    pass(format!("{} maps, {cubic} cubic", reports.len()))
}

fn criterion_8() -> Result<Outcome> {
    let start = Instant::now();
    let policy = PrecisionPolicy::default();
    let mut lines = Vec::new();
    for (p, s, nontrivial) in [(5u64, "z^2 + 1/5", true), (337, "p*z^2", false), (337, "z^2", false)] {
        let f = parse_map(p, s)?;
        let rep = report(&f, &policy)?;
        let setup = default_setup(&f, &rep.minresloc.locus[0], &policy)?;
        let recs = run_grid(&f, &setup, 3, DEFAULT_CAP, &policy)?;
        if recs.len() != 9 {
            return fail(format!("{s}: {} records", recs.len()));
        }
        if let Some(x) = recs.iter().find(|x| !x.holds()) {
            return fail(format!("{s} n={} {}: lhs {} > rhs {}", x.n, x.label, fmt_q(&x.lhs_upper), fmt_q(&x.rhs)));
        }
        if nontrivial && !decays_by_degree(&recs, f.degree()) {
            let ups: Vec<String> = recs.iter().map(|x| format!("n={} {}", x.n, fmt_q(&x.lhs_upper))).collect();
            return fail(format!("{s}: no decay by d: {ups:?}"));
        }
        let worst = recs.iter().map(|x| x.margin()).min().unwrap();
        lines.push(format!("{s} (p={p}) min margin {}", fmt_q(&worst)));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > 300.0 {
        return fail(format!("runtime {secs:.1}s"));
    }
    pass(format!("{}; {secs:.1}s", lines.join("; ")))
}

fn random_phi(r: &mut ChaCha8Rng, tree: &FiniteTree, p: u64) -> Result<TreePlf> {
    let (_, d) = pick_instance(r);
    let f = sample::random_map(r, p, d);
    let mut phi = TreePlf::from_rays(tree, &|c| Ok(profile::crucial(&f, c)))?;
    for _ in 0..r.gen_range(0..=2) {
        let x = sample::random_point(r, p);
        let coef = Q::new(r.gen_range(-3i64..=3).into(), r.gen_range(1i64..=3).into());
        let g = TreePlf::from_rays(tree, &|c| Ok(profile::rho_to(c, &x)))?;
        phi = phi.add(&g.scale(&coef));
    }
    Ok(phi)
}

fn criterion_9() -> Result<Outcome> {
    let mut r = rng(9);
    let mut done = 0;
    let mut tries = 0;
    while done < 50 {
        tries += 1;
        if tries > 500 {
            return fail(format!("only {done} instances"));
        }
        let p = *[2u64, 3, 5].choose(&mut r).unwrap();
        let k = r.gen_range(3..=5);
        let tree = sample::random_tree(&mut r, p, k);
        let phi = random_phi(&mut r, &tree, p)?;
        let mut keep = attach_candidates(&tree);
        keep.shuffle(&mut r);
        keep.truncate(r.gen_range(2..=3));
        let sub = FiniteTree::span(&keep)?;
        if sub.is_trivial() {
            continue;
        }
        let lhs = laplacian(&phi.restrict(&sub)?);
        let rhs = laplacian(&phi).retract_to(&sub);
        if lhs != rhs {
            return fail(format!("instance {done}: {:?} vs {:?}", lhs.sorted(), rhs.sorted()));
        }
        done += 1;
    }
    pass(format!("{done} instances"))
}

fn tested_maps() -> Vec<(String, RationalMap, CrucialReport)> {
    let policy = PrecisionPolicy::default();
    let mut out = Vec::new();
    let fixtures: [(u64, &str); 9] = [
        (5, "z^2"),
        (3, "z^2"),
        (5, "p*z^2"),
        (5, "z^2 + 1/5"),
        (3, "z^3 + z"),
        (3, "(z^3 - z)/3"),
        (2, "(z^2 - z)/2"),
        (5, "z^3/5 + z"),
        (3, "z^2 + 1/3"),
    ];
    for (p, s) in fixtures {
        let f = parse_map(p, s).unwrap();
        if let Ok(rep) = report(&f, &policy) {
            out.push((format!("{s} (p={p})"), f, rep));
        }
    }
    let mut r = rng(77);
    let mut tries = 0;
    while out.len() < 24 && tries < 200 {
        tries += 1;
        let (p, d) = pick_instance(&mut r);
        let f = sample::split_fixed_map(&mut r, p, d);
        match report(&f, &policy) {
            Ok(rep) => out.push((format!("{f} (p={p})"), f, rep)),
            Err(Error::UnsupportedResidueExtension(_)) => {}
            Err(e) => println!("skipped {f} (p={p}): {e}"),
        }
    }
    out
}

fn main() {
    let start = Instant::now();
    let maps = tested_maps();
    println!("crucial reports for {} maps in {:.1}s", maps.len(), start.elapsed().as_secs_f64());
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome> + '_>)> = vec![
        ("1 ordres identity", Box::new(criterion_1)),
        ("2 worked fixtures", Box::new(criterion_2)),
        ("3 degree identities", Box::new(criterion_3)),
        ("4 slope range and convexity", Box::new(criterion_4)),
        ("5 measure structure", Box::new(|| criterion_5(&maps))),
        ("6 hanging-branch table", Box::new(|| criterion_6(&maps))),
        ("7 diameter bounds", Box::new(|| criterion_7(&maps))),
        ("8 quantitative equidistribution", Box::new(criterion_8)),
        ("9 Laplacian retraction", Box::new(criterion_9)),
    ];
    let mut all = true;
    for (name, run) in &criteria {
        let t = Instant::now();
        let out = run().unwrap_or_else(|e| Outcome { ok: false, detail: format!("error: {e}") });
        all &= out.ok;
        println!("{} criterion {name}: {} ({:.1}s)", if out.ok { "PASS" } else { "FAIL" }, out.detail, t.elapsed().as_secs_f64());
    }
    if !all {
        std::process::exit(1);
    }
}
