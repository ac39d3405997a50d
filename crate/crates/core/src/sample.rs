//! Seeded random instances: maps, points, trees and maps with split fixed points.

use crate::maps::{Mobius, RationalMap};
use crate::points::BerkPoint;
use crate::poly::Poly;
use crate::rat::{pow_p, q, qf, Q};
use crate::tower::TowerElem;
use crate::tree::FiniteTree;
use rand::Rng;

pub fn small_rational<R: Rng>(rng: &mut R, p: u64) -> Q {
    let n = rng.gen_range(-6i64..=6);
    let den = match rng.gen_range(0..5) {
        0 => q(p as i64),
        1 => q(rng.gen_range(1i64..=4)),
        _ => q(1),
    };
    let num = match rng.gen_range(0..6) {
        0 => q(n * p as i64),
        _ => q(n),
    };
    num / den
}

fn nonzero_rational<R: Rng>(rng: &mut R, p: u64) -> Q {
    loop {
        let x = small_rational(rng, p);
        if x != q(0) {
            return x;
        }
    }
}

/// Random map of exact degree d with small rational coefficients.
pub fn random_map<R: Rng>(rng: &mut R, p: u64, d: usize) -> RationalMap {
    loop {
        let mut num: Vec<Q> = (0..=d).map(|_| small_rational(rng, p)).collect();
        let mut den: Vec<Q> = (0..=d).map(|_| small_rational(rng, p)).collect();
        if rng.gen_bool(0.5) {
            num[d] = nonzero_rational(rng, p);
        } else {
            den[d] = nonzero_rational(rng, p);
        }
        if rng.gen_bool(0.3) {
            for c in den.iter_mut().skip(1) {
                *c = q(0);
            }
            den[0] = nonzero_rational(rng, p);
            num[d] = nonzero_rational(rng, p);
        }
        if let Ok(f) = RationalMap::from_rationals(p, &num, &den) {
            if f.degree() == d {
                return f;
            }
        }
    }
}

/// z + c·∏(z − x_i)/B(z) with deg B = d − 1: every fixed point is rational.
pub fn split_fixed_map<R: Rng>(rng: &mut R, p: u64, d: usize) -> RationalMap {
    loop {
        let c = nonzero_rational(rng, p);
        let mut a = Poly::from_rationals(p, 1, &[c]);
        for _ in 0..d {
            let x = small_rational(rng, p);
            a = a.mul(&Poly::from_rationals(p, 1, &[-x, q(1)]));
        }
        let mut bc: Vec<Q> = (0..d).map(|_| small_rational(rng, p)).collect();
        bc[d - 1] = nonzero_rational(rng, p);
        let b = Poly::from_rationals(p, 1, &bc);
        let num = Poly::z(p, 1).mul(&b).add(&a);
        if let Ok(f) = RationalMap::from_polys(&num, &b) {
            if f.degree() == d {
                return f;
            }
        }
    }
}

/// ζ(a; t) with a ∈ {0,…,p} and t ∈ {−2,…,2} ∪ {±1/2}.
pub fn grid_point<R: Rng>(rng: &mut R, p: u64) -> BerkPoint {
    let a = q(rng.gen_range(0..=p as i64));
    let ts = [q(-2), q(-1), q(0), q(1), q(2), qf(1, 2), qf(-1, 2)];
    BerkPoint::zeta_q(p, &a, &ts[rng.gen_range(0..ts.len())])
}

/// Type II point with a small rational center and depth in [−2, 3] with step 1/2.
pub fn random_point<R: Rng>(rng: &mut R, p: u64) -> BerkPoint {
    let a = small_rational(rng, p);
    let t = qf(rng.gen_range(-4i64..=6), 2);
    BerkPoint::zeta_q(p, &a, &t)
}

/// Span of k random type II points; retried until non-trivial.
pub fn random_tree<R: Rng>(rng: &mut R, p: u64, k: usize) -> FiniteTree {
    loop {
        let pts: Vec<BerkPoint> = (0..k).map(|_| random_point(rng, p)).collect();
        if let Ok(t) = FiniteTree::span(&pts) {
            if !t.is_trivial() {
                return t;
            }
        }
    }
}

/// A map fixing S = ζ(a; t) conjugate to z + c∏(z − a_i)/B with non-constant reduction; every fixed direction is rational.
pub fn fixed_at_point<R: Rng>(rng: &mut R, p: u64, d: usize) -> (RationalMap, BerkPoint) {
    loop {
        let c = rng.gen_range(1..p as i64);
        let mut a = Poly::from_rationals(p, 1, &[q(c)]);
        for _ in 0..d {
            let x = rng.gen_range(0..p as i64);
            a = a.mul(&Poly::from_rationals(p, 1, &[q(-x), q(1)]));
        }
        let mut bc: Vec<Q> = (0..d).map(|_| q(rng.gen_range(0..p as i64))).collect();
        bc[d - 1] = q(rng.gen_range(1..p as i64));
        if rng.gen_bool(0.5) {
            for x in bc.iter_mut().take(d - 1) {
                *x = q(0);
            }
        }
        let b = Poly::from_rationals(p, 1, &bc);
        let num = Poly::z(p, 1).mul(&b).add(&a);
        let f = match RationalMap::from_polys(&num, &b) {
            Ok(f) if f.degree() == d && f.reduce().degree() > 0 => f,
            _ => continue,
        };
        let center = q(rng.gen_range(0..=p as i64));
        let t = rng.gen_range(-2i64..=2);
        let h = Mobius::affine(&TowerElem::from_q(p, 1, center.clone()), &TowerElem::from_q(p, 1, pow_p(p, t)));
        let g = f.conjugate(&h.adj());
        return (g, BerkPoint::zeta_q(p, &center, &q(t)));
    }
}
