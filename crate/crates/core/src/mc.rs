//! Filtrations, cyclic elements and the bounding-cochain solver.
//!
//! For a cyclic element `u` of a left module `D` over a curved algebra `C`,
//! the equation `d^b(u) = sum_k n^k(b, .., b; u) = 0` is solved for `b` one
//! filtration level at a time. At level `l` the unknowns enter only through
//! `n^1(b_l; u)` (every longer insertion lands strictly higher), so each
//! step is a square system with the unimodular diagonal block of the
//! certificate.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ainfty::CurvedAInfAlgebra;
use crate::error::{Error, Result};
use crate::graded::{Basis, Element, MultilinearOp};
use crate::homology::{solve, Matrix};
use crate::modcat::{AInfModule, Side};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiltrationProfile {
    pub levels: Vec<BigRational>,
    pub bounded_above: bool,
    pub zero_included: bool,
}

impl FiltrationProfile {
    pub fn of(basis: &Basis) -> Self {
        let levels = basis.levels();
        let zero_included = levels.iter().any(|l| l.is_zero());
        FiltrationProfile {
            levels,
            bounded_above: true,
            zero_included,
        }
    }

    fn with_zero(&self) -> BTreeSet<BigRational> {
        let mut s: BTreeSet<BigRational> = self.levels.iter().cloned().collect();
        s.insert(BigRational::zero());
        s
    }

    pub fn strictly_compatible(&self, other: &FiltrationProfile) -> bool {
        self.with_zero() == other.with_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicElementCertificate {
    pub u: Element,
    /// Column `j` is `n^1(x_j; u)` over the module basis.
    pub iso_matrix: Matrix,
    /// `(generator, coefficient, level)` for each term of `n^0(u)`.
    pub strict_increase_witness: Vec<(usize, BigInt, BigRational)>,
}

pub fn verify_cyclic(c: &CurvedAInfAlgebra, d: &AInfModule, u: &Element) -> Result<CyclicElementCertificate> {
    if d.side != Side::Left {
        return Err(Error::Shape("cyclic elements live in left modules".into()));
    }
    let (pc, pd) = (FiltrationProfile::of(&c.basis), FiltrationProfile::of(&d.basis));
    if !pc.strictly_compatible(&pd) {
        return Err(Error::NotStrictlyCompatible(format!(
            "algebra levels {} vs module levels {}",
            fmt_levels(&pc.levels),
            fmt_levels(&pd.levels)
        )));
    }
    let (nc, nd) = (c.basis.len(), d.basis.len());
    let mut iso = Matrix::zeros(nd, nc);
    for x in 0..nc {
        let v = d.act(&Element::gen(x), u);
        for (i, coef) in v.iter() {
            iso.set(*i, x, coef.clone());
        }
    }
    if nc != nd {
        return Err(Error::NotIsomorphism { det: BigInt::zero() });
    }
    let det = iso.det()?;
    if !det.abs().is_one() {
        return Err(Error::NotIsomorphism { det });
    }
    for i in 0..nd {
        for j in 0..nc {
            if !iso.get(i, j).is_zero() && d.basis.filtration(i) < c.basis.filtration(j) {
                return Err(Error::NotFiltrationPreserving(format!(
                    "n1({}; u) has a term {} of lower filtration",
                    c.basis.get(j).name,
                    d.basis.get(i).name
                )));
            }
        }
    }
    for level in &pd.levels {
        let rows: Vec<usize> = (0..nd).filter(|&i| d.basis.filtration(i) == level).collect();
        let cols: Vec<usize> = (0..nc).filter(|&j| c.basis.filtration(j) == level).collect();
        let block = iso.select(&rows, &cols);
        if rows.len() != cols.len() || !block.det()?.abs().is_one() {
            return Err(Error::NotFiltrationPreserving(format!(
                "diagonal block at level {level} is not unimodular"
            )));
        }
    }
    for (g, _) in u.iter() {
        if d.basis.filtration(*g).is_negative() {
            return Err(Error::NotFiltrationPreserving(format!(
                "u has a term {} of negative filtration",
                d.basis.get(*g).name
            )));
        }
    }
    let n0u = d.op(0).map(|n| n.apply(&[u])).unwrap_or_default();
    let mut witness = Vec::new();
    for (g, coef) in n0u.iter() {
        let level = d.basis.filtration(*g).clone();
        if !level.is_positive() {
            return Err(Error::N0DoesNotIncrease(format!(
                "n0(u) has a term {} at level {level}",
                d.basis.get(*g).name
            )));
        }
        witness.push((*g, coef.clone(), level));
    }
    Ok(CyclicElementCertificate {
        u: u.clone(),
        iso_matrix: iso,
        strict_increase_witness: witness,
    })
}

fn fmt_levels(levels: &[BigRational]) -> String {
    let v: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
    format!("[{}]", v.join(","))
}

/// `y -> sum_k n^k(b, .., b; y)`; `b` must lie in strictly positive filtration.
pub fn deformed_module_differential(d: &AInfModule, b: &Element) -> Result<MultilinearOp> {
    if b.iter().any(|(g, _)| !d.algebra.basis.filtration(*g).is_positive()) {
        return Err(Error::NotNilpotent);
    }
    d.deformed_differential(b)
}

pub fn solve_bounding_cochain(
    c: &CurvedAInfAlgebra,
    d: &AInfModule,
    cert: &CyclicElementCertificate,
) -> Result<Element> {
    let u = &cert.u;
    let target_deg = u.degree(&d.basis).unwrap_or(0) + 1;
    let unknowns: Vec<usize> = c
        .basis
        .of_degree(1)
        .into_iter()
        .filter(|&g| c.basis.filtration(g).is_positive())
        .collect();
    if unknowns.is_empty() {
        if c.is_flat() && d.deformed_on(&Element::zero(), u).is_zero() {
            return Ok(Element::zero());
        }
        return Err(Error::NoSolution(
            "no positive-filtration generators of degree one".into(),
        ));
    }
    let rows_all: Vec<usize> = d.basis.of_degree(target_deg);
    let levels: BTreeSet<BigRational> = rows_all
        .iter()
        .map(|&g| d.basis.filtration(g).clone())
        .filter(|l| l.is_positive())
        .collect();
    let mut b = Element::zero();
    for level in &levels {
        let rows: Vec<usize> = rows_all
            .iter()
            .copied()
            .filter(|&g| d.basis.filtration(g) == level)
            .collect();
        let cols: Vec<usize> = unknowns
            .iter()
            .copied()
            .filter(|&g| c.basis.filtration(g) == level)
            .collect();
        let residual = d.deformed_on(&b, u);
        let r: Vec<BigInt> = residual.to_dense(&rows);
        if r.iter().all(|x| x.is_zero()) {
            continue;
        }
        let block = cert.iso_matrix.select(&rows, &cols);
        let neg: Vec<BigInt> = r.iter().map(|x| -x).collect();
        let Some(sol) = solve(&block, &neg) else {
            return Err(Error::NoSolution(format!("no integral solution at level {level}")));
        };
        b = &b + &Element::from_dense(&cols, &sol);
    }
    if !d.deformed_on(&b, u).is_zero() {
        return Err(Error::NoSolution("d^b(u) has a term outside the solved levels".into()));
    }
    if !c.mc_residual(&b)?.is_zero() {
        return Err(Error::NoSolution(
            "d^b(u) = 0 but b is not a Maurer-Cartan element".into(),
        ));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_mc_fixture, s1, s1_module, truncated_poly, twisted_regular};
    use crate::graded::{int, rat};
    use crate::homology::Matrix;
    use crate::modcat::yoneda_left;

    #[test]
    fn flat_unit_is_cyclic_with_identity() {
        let a = truncated_poly();
        let d = twisted_regular(&a, &Element::zero());
        let cert = verify_cyclic(&a, &d, &Element::gen(0)).unwrap();
        assert_eq!(cert.iso_matrix, Matrix::identity(2));
        assert!(cert.strict_increase_witness.is_empty());
        assert_eq!(solve_bounding_cochain(&a, &d, &cert).unwrap(), Element::zero());
    }

    #[test]
    fn twice_the_unit_is_not_cyclic() {
        let a = truncated_poly();
        let d = yoneda_left(&a, None);
        let err = verify_cyclic(&a, &d, &Element::term(0, 2)).unwrap_err();
        assert_eq!(err, Error::NotIsomorphism { det: int(4) });
    }

    #[test]
    fn n0_at_level_zero_is_rejected() {
        let a = s1();
        let mut d = s1_module();
        d.op_mut(0).set(vec![0], Element::gen(0));
        let err = verify_cyclic(&a, &d, &Element::gen(0)).unwrap_err();
        assert!(matches!(err, Error::N0DoesNotIncrease(_)));
    }

    #[test]
    fn incompatible_levels_are_rejected() {
        let a = s1();
        let mut d = s1_module();
        let mut gens = d.basis.generators().to_vec();
        gens[2].filtration = rat(5, 1);
        d.basis = Basis::from_generators(gens).unwrap();
        assert!(matches!(
            verify_cyclic(&a, &d, &Element::gen(0)),
            Err(Error::NotStrictlyCompatible(_))
        ));
    }

    #[test]
    fn s1_solution_is_x() {
        let a = s1();
        let d = s1_module();
        assert!(d.check_relations(3).is_empty());
        let cert = verify_cyclic(&a, &d, &Element::gen(0)).unwrap();
        let b = solve_bounding_cochain(&a, &d, &cert).unwrap();
        assert_eq!(b, Element::gen(1));
        // Exhaustive search over [-3, 3]^2 on the positive generators x, c.
        let mut found = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                let cand = Element::from_terms([(1, int(i)), (2, int(j))]);
                let Ok(r) = a.mc_residual(&cand) else { continue };
                if r.is_zero() && d.deformed_on(&cand, &Element::gen(0)).is_zero() {
                    found.push(cand);
                }
            }
        }
        assert_eq!(found, vec![Element::gen(1)]);
    }

    #[test]
    fn random_fixtures_solve_and_square_to_zero() {
        for seed in 0..8 {
            let fx = random_mc_fixture(seed);
            assert!(fx.module.check_relations(3).is_empty(), "seed {seed}");
            let cert = verify_cyclic(&fx.algebra, &fx.module, &fx.u).unwrap();
            let b = solve_bounding_cochain(&fx.algebra, &fx.module, &cert).unwrap();
            assert_eq!(b, fx.expected, "seed {seed}");
            let db = deformed_module_differential(&fx.module, &b).unwrap();
            let n = fx.module.basis.len();
            let gens: Vec<usize> = (0..n).collect();
            let m = crate::homology::op_matrix(&db, &gens, &gens);
            assert!(m.mul(&m).unwrap().is_zero());
            assert!(db.apply(&[&fx.u]).is_zero());
        }
    }

    #[test]
    fn deformed_differential_at_zero_is_n0() {
        let d = s1_module();
        let db = deformed_module_differential(&d, &Element::zero()).unwrap();
        for y in 0..3 {
            assert_eq!(db.on_gens(&[y]), d.op(0).unwrap().on_gens(&[y]));
        }
        assert_eq!(
            deformed_module_differential(&d, &Element::gen(0)),
            Err(Error::NotNilpotent)
        );
    }

    #[test]
    fn monotone_relabelling_of_levels_keeps_the_solution() {
        for seed in 0..4 {
            let fx = random_mc_fixture(seed);
            let cert = verify_cyclic(&fx.algebra, &fx.module, &fx.u).unwrap();
            let b = solve_bounding_cochain(&fx.algebra, &fx.module, &cert).unwrap();
            // l -> l^2 + l is strictly increasing on [0, inf) and fixes 0.
            let relabel = |basis: &Basis| {
                let gens = basis.generators().iter().map(|g| {
                    let l = g.filtration.clone();
                    let mut h = g.clone();
                    h.filtration = &l * &l + &l;
                    h
                });
                Basis::from_generators(gens).unwrap()
            };
            let mut alg = fx.algebra.clone();
            alg.basis = relabel(&alg.basis);
            let mut module = fx.module.clone();
            module.basis = relabel(&module.basis);
            module.algebra = alg.clone();
            let cert2 = verify_cyclic(&alg, &module, &fx.u).unwrap();
            assert_eq!(solve_bounding_cochain(&alg, &module, &cert2).unwrap(), b);
        }
    }
}
