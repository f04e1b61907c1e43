//! Directed systems of complexes with comparison maps and correctors, and
//! their direct limits.
//!
//! A system has stages `A_0 -> A_1 -> ..` (split injections `i`), targets
//! `B_0 -> B_1 -> ..` (split injections `j`), maps `F_d: A_d -> B_d`, and
//! correctors `H_d: B_d -> B_d` such that `j H_d F_d = F_{d+1} i` holds
//! strictly. The colimit of a finite system is its last stage; the limit
//! map restricts on each stage to the accumulated corrected `F_d`.

use std::collections::BTreeMap;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::homology::{is_quasi_iso, smith_normal_form, ChainMap, FiniteComplex, Matrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedSystem {
    pub stages: Vec<FiniteComplex>,
    pub inclusions: Vec<ChainMap>,
    pub targets: Vec<FiniteComplex>,
    pub target_inclusions: Vec<ChainMap>,
    pub maps: Vec<ChainMap>,
    pub corrections: Vec<ChainMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareResidual {
    pub square: usize,
    pub degree: i64,
    pub residual: Matrix,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SystemReport {
    pub residuals: Vec<SquareResidual>,
    /// Structural failures: non-chain maps, non-split inclusions, singular correctors.
    pub problems: Vec<String>,
}

impl SystemReport {
    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty() && self.problems.is_empty()
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.problems.iter().map(|p| format!("PROBLEM {p}")).collect();
        for r in &self.residuals {
            out.push(format!(
                "SQUARE index={} degree={} nonzero={}",
                r.square,
                r.degree,
                (0..r.residual.rows())
                    .flat_map(|i| (0..r.residual.cols()).map(move |j| (i, j)))
                    .filter(|&(i, j)| !num_traits::Zero::is_zero(r.residual.get(i, j)))
                    .count()
            ));
        }
        out
    }

    pub fn squares(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.residuals.iter().map(|r| r.square).collect();
        v.dedup();
        v
    }
}

fn degrees_of(cs: &[&FiniteComplex]) -> Vec<i64> {
    let mut v: Vec<i64> = cs.iter().flat_map(|c| c.dims.keys().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn compose(g: &ChainMap, f: &ChainMap) -> Result<ChainMap> {
    let mut out = ChainMap::new(f.source.clone(), g.target.clone());
    for n in degrees_of(&[&f.source, &g.target]) {
        out.maps.insert(n, g.map(n).mul(&f.map(n))?);
    }
    Ok(out)
}

fn is_split_injective(m: &Matrix) -> bool {
    if m.cols() == 0 {
        return true;
    }
    let s = smith_normal_form(m);
    s.rank() == m.cols() && s.invariant_factors().iter().all(|x| x.is_one())
}

fn is_iso(f: &ChainMap) -> bool {
    degrees_of(&[&f.source, &f.target]).into_iter().all(|n| {
        let m = f.map(n);
        m.rows() == m.cols() && (m.rows() == 0 || m.det().map(|d| d.abs().is_one()).unwrap_or(false))
    })
}

impl DirectedSystem {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// One stage, no squares.
    pub fn single(source: FiniteComplex, target: FiniteComplex, map: ChainMap) -> Self {
        DirectedSystem {
            stages: vec![source],
            inclusions: vec![],
            targets: vec![target],
            target_inclusions: vec![],
            maps: vec![map],
            corrections: vec![],
        }
    }

    /// `n` copies of `c` with identity maps everywhere.
    pub fn constant(c: &FiniteComplex, n: usize) -> Self {
        let id = ChainMap::identity(c);
        DirectedSystem {
            stages: vec![c.clone(); n],
            inclusions: vec![id.clone(); n.saturating_sub(1)],
            targets: vec![c.clone(); n],
            target_inclusions: vec![id.clone(); n.saturating_sub(1)],
            maps: vec![id.clone(); n],
            corrections: vec![id; n.saturating_sub(1)],
        }
    }

    fn shape_problems(&self) -> Vec<String> {
        let n = self.stages.len();
        let mut p = Vec::new();
        if self.targets.len() != n || self.maps.len() != n {
            p.push("stages, targets and maps differ in length".to_string());
        }
        for (name, len) in [
            ("inclusions", self.inclusions.len()),
            ("target inclusions", self.target_inclusions.len()),
            ("corrections", self.corrections.len()),
        ] {
            if len + 1 != n {
                p.push(format!("{name}: expected {} found {len}", n.saturating_sub(1)));
            }
        }
        p
    }
}

pub fn verify_system(s: &DirectedSystem) -> SystemReport {
    let mut report = SystemReport {
        problems: s.shape_problems(),
        ..Default::default()
    };
    if !report.problems.is_empty() {
        return report;
    }
    let check = |f: &ChainMap, what: String, problems: &mut Vec<String>| {
        if let Err(e) = f.check() {
            problems.push(format!("{what}: {e}"));
        }
    };
    for (d, f) in s.maps.iter().enumerate() {
        check(f, format!("F_{d}"), &mut report.problems);
    }
    for d in 0..s.len().saturating_sub(1) {
        let (i, j, h) = (&s.inclusions[d], &s.target_inclusions[d], &s.corrections[d]);
        check(i, format!("i_{d}"), &mut report.problems);
        check(j, format!("j_{d}"), &mut report.problems);
        check(h, format!("H_{d}"), &mut report.problems);
        for n in degrees_of(&[&i.source]) {
            if !is_split_injective(&i.map(n)) {
                report
                    .problems
                    .push(format!("i_{d} is not a split injection in degree {n}"));
            }
        }
        for n in degrees_of(&[&j.source]) {
            if !is_split_injective(&j.map(n)) {
                report
                    .problems
                    .push(format!("j_{d} is not a split injection in degree {n}"));
            }
        }
        if !is_iso(h) {
            report.problems.push(format!("H_{d} is not invertible"));
        }
        let (fd, fe) = (&s.maps[d], &s.maps[d + 1]);
        for n in degrees_of(&[&s.stages[d], &s.targets[d + 1]]) {
            let lhs = j.map(n).mul(&h.map(n)).and_then(|m| m.mul(&fd.map(n)));
            let rhs = fe.map(n).mul(&i.map(n));
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => {
                    if l != r {
                        report.residuals.push(SquareResidual {
                            square: d,
                            degree: n,
                            residual: l.sub(&r).expect("same shape"),
                        });
                    }
                }
                _ => report
                    .problems
                    .push(format!("square {d} has mismatched shapes in degree {n}")),
            }
        }
    }
    report
}

#[derive(Clone, Debug)]
pub struct DirectLimit {
    pub complex: FiniteComplex,
    pub target: FiniteComplex,
    pub map: ChainMap,
    /// Composite inclusion of stage `d` into the limit.
    pub stage_inclusions: Vec<ChainMap>,
    /// `(j H) .. (j H) F_d`, stage `d` into the limit target.
    pub corrected: Vec<ChainMap>,
    /// First stage from which every further inclusion is an isomorphism.
    pub stabilized_from: Option<usize>,
}

impl DirectLimit {
    /// Stages where the limit map does not restrict to the corrected stage map.
    pub fn restriction_defects(&self) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (d, (inc, corr)) in self.stage_inclusions.iter().zip(&self.corrected).enumerate() {
            if compose(&self.map, inc)?.maps != corr.maps {
                out.push(d);
            }
        }
        Ok(out)
    }

    /// Is every corrected stage map a quasi-isomorphism onto the limit target?
    pub fn stagewise_quasi_iso(&self) -> Result<Vec<bool>> {
        self.corrected.iter().map(is_quasi_iso).collect()
    }

    pub fn report_lines(&self) -> Vec<String> {
        let mut out = vec![format!(
            "LIMIT stages={} stabilized_from={}",
            self.stage_inclusions.len(),
            self.stabilized_from.map_or("none".into(), |d| d.to_string())
        )];
        for (n, d) in &self.complex.dims {
            out.push(format!("DIM degree={n} rank={d}"));
        }
        out
    }
}

pub fn direct_limit(s: &DirectedSystem) -> Result<DirectLimit> {
    let report = verify_system(s);
    if !report.is_empty() {
        let first = report
            .problems
            .first()
            .cloned()
            .or_else(|| {
                report
                    .residuals
                    .first()
                    .map(|r| format!("square {} degree {}", r.square, r.degree))
            })
            .unwrap_or_default();
        return Err(Error::SystemNotCommuting(first));
    }
    let n = s.len();
    if n == 0 {
        return Err(Error::SystemNotCommuting("empty system".into()));
    }
    let last = n - 1;
    let mut stage_inclusions = vec![ChainMap::identity(&s.stages[last])];
    let mut target_push = vec![ChainMap::identity(&s.targets[last])];
    for d in (0..last).rev() {
        let inc = compose(&stage_inclusions[0], &s.inclusions[d])?;
        let push = compose(&target_push[0], &compose(&s.target_inclusions[d], &s.corrections[d])?)?;
        stage_inclusions.insert(0, inc);
        target_push.insert(0, push);
    }
    let corrected = (0..n)
        .map(|d| compose(&target_push[d], &s.maps[d]))
        .collect::<Result<Vec<_>>>()?;
    let mut stabilized_from = Some(last);
    for d in (0..last).rev() {
        if is_iso(&s.inclusions[d]) && is_iso(&s.target_inclusions[d]) {
            stabilized_from = Some(d);
        } else {
            break;
        }
    }
    if last == 0 {
        stabilized_from = Some(0);
    }
    Ok(DirectLimit {
        complex: s.stages[last].clone(),
        target: s.targets[last].clone(),
        map: s.maps[last].clone(),
        stage_inclusions,
        corrected,
        stabilized_from,
    })
}

/// Subcomplex of generators with filtration at least `level`, with its
/// inclusion matrices per degree. `d` must not lower filtration.
pub fn truncation(
    basis: &crate::graded::Basis,
    d: &crate::graded::MultilinearOp,
    level: &num_rational::BigRational,
) -> Result<(FiniteComplex, BTreeMap<i64, Vec<usize>>)> {
    let full = FiniteComplex::from_op(basis, d)?;
    let mut keep: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut dims = BTreeMap::new();
    for deg in basis.degrees() {
        let gens = basis.of_degree(deg);
        let pos: Vec<usize> = (0..gens.len())
            .filter(|&i| basis.filtration(gens[i]) >= level)
            .collect();
        dims.insert(deg, pos.len());
        keep.insert(deg, pos);
    }
    let mut c = FiniteComplex::new(dims);
    for deg in basis.degrees() {
        let rows = keep.get(&(deg + 1)).cloned().unwrap_or_default();
        let m = full.d(deg).select(&rows, &keep[&deg]);
        if c.dim(deg + 1) > 0 {
            c.set_diff(deg, m)?;
        }
    }
    c.check()?;
    Ok((c, keep))
}

/// Inclusion of the truncation kept at `small` into the one kept at `big`.
pub fn truncation_inclusion(
    small: (&FiniteComplex, &BTreeMap<i64, Vec<usize>>),
    big: (&FiniteComplex, &BTreeMap<i64, Vec<usize>>),
) -> ChainMap {
    let mut f = ChainMap::new(small.0.clone(), big.0.clone());
    for (deg, s) in small.1 {
        let b = &big.1[deg];
        let mut m = Matrix::zeros(b.len(), s.len());
        for (j, g) in s.iter().enumerate() {
            let i = b.iter().position(|x| x == g).expect("nested truncations");
            m.set(i, j, 1.into());
        }
        f.maps.insert(*deg, m);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{limit_fixture, seeded_broken_limit};

    #[test]
    fn constant_system() {
        let c = limit_fixture(1, false).stages[0].clone();
        let s = DirectedSystem::constant(&c, 3);
        assert!(verify_system(&s).is_empty());
        let l = direct_limit(&s).unwrap();
        assert_eq!(l.complex, c);
        assert_eq!(l.map, ChainMap::identity(&c));
        assert_eq!(l.stabilized_from, Some(0));
    }

    #[test]
    fn uncorrected_squares_are_reported() {
        let mut s = limit_fixture(2, true);
        for h in &mut s.corrections {
            *h = ChainMap::identity(&h.source);
        }
        let r = verify_system(&s);
        assert!(!r.residuals.is_empty());
        assert!(matches!(direct_limit(&s), Err(Error::SystemNotCommuting(_))));
    }

    #[test]
    fn truncations_build_the_full_complex() {
        for seed in 0..5 {
            let s = limit_fixture(seed, true);
            assert!(verify_system(&s).is_empty(), "seed {seed}");
            let l = direct_limit(&s).unwrap();
            assert!(l.restriction_defects().unwrap().is_empty());
            assert!(l.map.check().is_ok());
            let again = direct_limit(&DirectedSystem::single(
                l.complex.clone(),
                l.target.clone(),
                l.map.clone(),
            ))
            .unwrap();
            assert_eq!(again.complex, l.complex);
            assert!(l.stagewise_quasi_iso().unwrap().last() == Some(&true));
        }
    }

    #[test]
    fn every_seeded_break_is_flagged() {
        for seed in 0..10 {
            let (s, square) = seeded_broken_limit(seed);
            assert_eq!(verify_system(&s).squares(), vec![square], "seed {seed}");
        }
    }
}
