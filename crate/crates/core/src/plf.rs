//! Continuous piecewise-linear functions of one rational variable with exact breakpoints.

use crate::rat::{q, ExtValue, Q};

/// t ↦ slope·t + icept
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub slope: Q,
    pub icept: Q,
}

impl Line {
    pub fn new(slope: Q, icept: Q) -> Self {
        Line { slope, icept }
    }

    pub fn at(&self, t: &Q) -> Q {
        &self.slope * t + &self.icept
    }

    fn crossing(&self, o: &Line) -> Option<Q> {
        if self.slope == o.slope {
            None
        } else {
            Some((&o.icept - &self.icept) / (&self.slope - &o.slope))
        }
    }
}

/// Continuous PL function on the whole line: `lines[i]` is active between
/// `breaks[i−1]` and `breaks[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plf {
    breaks: Vec<Q>,
    lines: Vec<Line>,
}

fn sample(lo: Option<&Q>, hi: Option<&Q>) -> Q {
    match (lo, hi) {
        (None, None) => q(0),
        (None, Some(h)) => h - q(1),
        (Some(l), None) => l + q(1),
        (Some(l), Some(h)) => (l + h) / q(2),
    }
}

impl Plf {
    pub fn affine(slope: Q, icept: Q) -> Self {
        Plf { breaks: vec![], lines: vec![Line::new(slope, icept)] }
    }

    pub fn constant(c: Q) -> Self {
        Self::affine(q(0), c)
    }

    /// t ↦ t
    pub fn ident() -> Self {
        Self::affine(q(1), q(0))
    }

    pub fn breaks(&self) -> &[Q] {
        &self.breaks
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    fn piece_index(&self, t: &Q) -> usize {
        self.breaks.iter().take_while(|b| *b <= t).count()
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.lines[self.piece_index(t)].at(t)
    }

    pub fn slope_right(&self, t: &Q) -> Q {
        self.lines[self.piece_index(t)].slope.clone()
    }

    pub fn slope_left(&self, t: &Q) -> Q {
        let i = self.breaks.iter().take_while(|b| *b < t).count();
        self.lines[i].slope.clone()
    }

    pub fn slope_at_neg_inf(&self) -> Q {
        self.lines[0].slope.clone()
    }

    pub fn slope_at_pos_inf(&self) -> Q {
        self.lines.last().unwrap().slope.clone()
    }

    fn normalize(mut self) -> Self {
        let mut breaks = Vec::new();
        let mut lines = vec![self.lines.remove(0)];
        for (b, l) in self.breaks.into_iter().zip(self.lines) {
            if *lines.last().unwrap() == l {
                continue;
            }
            breaks.push(b);
            lines.push(l);
        }
        Plf { breaks, lines }
    }

    fn merged_breaks(&self, o: &Plf) -> Vec<Q> {
        let mut b: Vec<Q> = self.breaks.iter().chain(o.breaks.iter()).cloned().collect();
        b.sort();
        b.dedup();
        b
    }

    fn pointwise(&self, o: &Plf, f: impl Fn(&Line, &Line) -> Line) -> Plf {
        let bs = self.merged_breaks(o);
        let mut lines = Vec::with_capacity(bs.len() + 1);
        for i in 0..=bs.len() {
            let s = sample(if i == 0 { None } else { Some(&bs[i - 1]) }, bs.get(i));
            let a = &self.lines[self.piece_index(&s)];
            let b = &o.lines[o.piece_index(&s)];
            lines.push(f(a, b));
        }
        Plf { breaks: bs, lines }.normalize()
    }

    fn envelope(&self, o: &Plf, take_min: bool) -> Plf {
        let bs = self.merged_breaks(o);
        let mut breaks = Vec::new();
        let mut lines = Vec::new();
        for i in 0..=bs.len() {
            let lo = if i == 0 { None } else { Some(&bs[i - 1]) };
            let hi = bs.get(i);
            let s = sample(lo, hi);
            let a = &self.lines[self.piece_index(&s)];
            let b = &o.lines[o.piece_index(&s)];
            let pick = |t: &Q| {
                let (va, vb) = (a.at(t), b.at(t));
                if (va <= vb) == take_min {
                    a.clone()
                } else {
                    b.clone()
                }
            };
            if i > 0 {
                breaks.push(bs[i - 1].clone());
            }
            match a.crossing(b) {
                Some(x) if lo.map_or(true, |l| &x > l) && hi.map_or(true, |h| &x < h) => {
                    let left = sample(lo, Some(&x));
                    let right = sample(Some(&x), hi);
                    lines.push(pick(&left));
                    breaks.push(x);
                    lines.push(pick(&right));
                }
                _ => lines.push(pick(&s)),
            }
        }
        Plf { breaks, lines }.normalize()
    }

    pub fn min(&self, o: &Plf) -> Plf {
        self.envelope(o, true)
    }

    pub fn max(&self, o: &Plf) -> Plf {
        self.envelope(o, false)
    }

    pub fn add(&self, o: &Plf) -> Plf {
        self.pointwise(o, |a, b| Line::new(&a.slope + &b.slope, &a.icept + &b.icept))
    }

    pub fn sub(&self, o: &Plf) -> Plf {
        self.pointwise(o, |a, b| Line::new(&a.slope - &b.slope, &a.icept - &b.icept))
    }

    pub fn scale(&self, c: &Q) -> Plf {
        if *c == q(0) {
            return Plf::constant(q(0));
        }
        let lines = self.lines.iter().map(|l| Line::new(&l.slope * c, &l.icept * c)).collect();
        Plf { breaks: self.breaks.clone(), lines }
    }

    pub fn add_const(&self, c: &Q) -> Plf {
        let lines = self.lines.iter().map(|l| Line::new(l.slope.clone(), &l.icept + c)).collect();
        Plf { breaks: self.breaks.clone(), lines }
    }

    pub fn min_const(&self, c: &Q) -> Plf {
        self.min(&Plf::constant(c.clone()))
    }

    /// min with a constant that may be +∞.
    pub fn min_ext(&self, c: &ExtValue) -> Plf {
        match c {
            ExtValue::Inf => self.clone(),
            ExtValue::Fin(x) => self.min_const(x),
        }
    }

    /// t ↦ self(t − s)
    pub fn shift(&self, s: &Q) -> Plf {
        let breaks = self.breaks.iter().map(|b| b + s).collect();
        let lines = self
            .lines
            .iter()
            .map(|l| Line::new(l.slope.clone(), &l.icept - &l.slope * s))
            .collect();
        Plf { breaks, lines }
    }

    /// Breakpoints strictly inside (lo, hi).
    pub fn breaks_in(&self, lo: &Q, hi: &Q) -> Vec<Q> {
        self.breaks.iter().filter(|b| *b > lo && *b < hi).cloned().collect()
    }

    /// Lower envelope of finitely many lines; `None` when the list is empty.
    pub fn min_of_lines(lines: &[Line]) -> Option<Plf> {
        let mut it = lines.iter();
        let first = it.next()?;
        let mut acc = Plf::affine(first.slope.clone(), first.icept.clone());
        for l in it {
            acc = acc.min(&Plf::affine(l.slope.clone(), l.icept.clone()));
        }
        Some(acc)
    }

    /// PL interpolation through sorted nodes, extended affinely past both ends.
    pub fn interpolate(nodes: &[(Q, Q)]) -> Plf {
        if nodes.len() == 1 {
            return Plf::constant(nodes[0].1.clone());
        }
        let mut breaks = Vec::new();
        let mut lines = Vec::new();
        for (i, w) in nodes.windows(2).enumerate() {
            let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
            let icept = &w[0].1 - &slope * &w[0].0;
            if i > 0 {
                breaks.push(w[0].0.clone());
            }
            lines.push(Line::new(slope, icept));
        }
        Plf { breaks, lines }.normalize()
    }

    /// Minimum over [lo, hi] and the points where it is attained, as a closed interval.
    pub fn min_on(&self, lo: &Q, hi: &Q) -> (Q, Q, Q) {
        let mut cand: Vec<Q> = vec![lo.clone(), hi.clone()];
        cand.extend(self.breaks_in(lo, hi));
        let m = cand.iter().map(|t| self.eval(t)).min().unwrap();
        let at: Vec<&Q> = cand.iter().filter(|t| self.eval(t) == m).collect();
        let a = (*at.iter().min().unwrap()).clone();
        let b = (*at.iter().max().unwrap()).clone();
        (m, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::qf;

    #[test]
    fn envelope_of_lines() {
        let f = Plf::ident().min_const(&q(2));
        assert_eq!(f.eval(&q(1)), q(1));
        assert_eq!(f.eval(&q(5)), q(2));
        assert_eq!(f.breaks(), &[q(2)]);
        let g = Plf::ident().scale(&q(-1)).max(&Plf::ident());
        assert_eq!(g.eval(&q(-3)), q(3));
        assert_eq!(g.slope_left(&q(0)), q(-1));
        assert_eq!(g.slope_right(&q(0)), q(1));
    }

    #[test]
    fn arithmetic() {
        let f = Plf::ident().min_const(&q(1));
        let g = Plf::ident().scale(&qf(1, 2));
        let h = f.add(&g);
        assert_eq!(h.eval(&q(3)), q(1) + qf(3, 2));
        assert_eq!(h.sub(&g), f);
        let s = f.shift(&q(2));
        assert_eq!(s.eval(&q(2)), q(0));
        assert_eq!(s.breaks(), &[q(3)]);
    }

    #[test]
    fn minimum_interval() {
        let f = Plf::ident().sub(&q_plf(2)).max(&Plf::constant(q(0))).add(&Plf::ident().scale(&q(-1)).max(&Plf::constant(q(0))));
        let (m, a, b) = f.min_on(&q(-5), &q(5));
        assert_eq!((m, a, b), (q(0), q(0), q(2)));
    }

    #[test]
    fn interpolation() {
        let f = Plf::interpolate(&[(q(0), q(0)), (q(1), q(2)), (q(3), q(2))]);
        assert_eq!(f.eval(&qf(1, 2)), q(1));
        assert_eq!(f.eval(&q(5)), q(2));
        assert_eq!(f.eval(&q(-1)), q(-2));
        assert_eq!(f.breaks(), &[q(1)]);
    }

    fn q_plf(c: i64) -> Plf {
        Plf::constant(q(c))
    }
}
