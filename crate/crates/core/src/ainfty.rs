//! Curved A-infinity algebras: relations, strict units, and deformation by
//! degree-one elements.
//!
//! The relation engine works on any family of operations indexed by arity.
//! Modules and bimodules reuse it by packing algebra and module generators
//! into one basis (see `modcat`): entries whose keys do not fit a module
//! shape are simply absent from the tables, so they contribute nothing.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::graded::{koszul_sign, sign_of, Basis, Element, MultilinearOp, SignRule};

pub type OpFamily = BTreeMap<usize, MultilinearOp>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvedAInfAlgebra {
    pub name: String,
    pub basis: Basis,
    pub ops: OpFamily,
    pub kmax: usize,
    pub unit: Option<usize>,
}

/// Nonzero relation residuals, keyed by input tuple.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationReport {
    pub residuals: Vec<(Vec<usize>, Element)>,
    /// Alternative sign rules under which every checked relation holds.
    /// Only filled when the reduced-degree check fails.
    pub passing_variants: Vec<SignRule>,
}

impl RelationReport {
    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn lines(&self, basis: &Basis) -> Vec<String> {
        let mut out: Vec<String> = self
            .residuals
            .iter()
            .map(|(key, r)| {
                let args: Vec<&str> = key.iter().map(|&g| basis.get(g).name.as_str()).collect();
                format!(
                    "RESIDUAL arity={} inputs={} value={}",
                    key.len(),
                    if args.is_empty() {
                        "-".to_string()
                    } else {
                        args.join(",")
                    },
                    basis.fmt_element(r).replace(' ', "")
                )
            })
            .collect();
        for v in &self.passing_variants {
            out.push(format!("VARIANT rule={v:?} status=passes"));
        }
        out
    }
}

/// Candidate generators for each input slot of a tuple of length `d`.
pub(crate) type ShapeFn<'a> = dyn Fn(usize) -> Vec<Vec<Vec<usize>>> + 'a;

fn for_each_product(lists: &[Vec<usize>], f: &mut dyn FnMut(&[usize])) {
    fn go(lists: &[Vec<usize>], acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if acc.len() == lists.len() {
            f(acc);
            return;
        }
        for &g in &lists[acc.len()] {
            acc.push(g);
            go(lists, acc, f);
            acc.pop();
        }
    }
    go(lists, &mut Vec::with_capacity(lists.len()), f)
}

/// Sum over all insertions `± m(.., m(..), ..)` on one generator tuple.
pub(crate) fn relation_residual(basis: &Basis, ops: &OpFamily, tuple: &[usize], rule: SignRule) -> Element {
    let d = tuple.len();
    let gens: Vec<Element> = tuple.iter().map(|&g| Element::gen(g)).collect();
    let mut total = Element::zero();
    for m in 0..=d {
        let Some(inner) = ops.get(&m) else { continue };
        let Some(outer) = ops.get(&(d - m + 1)) else { continue };
        if inner.is_empty() || outer.is_empty() {
            continue;
        }
        for n in 0..=d - m {
            let lo = d - n - m;
            let val = inner.on_gens(&tuple[lo..d - n]);
            if val.is_zero() {
                continue;
            }
            let mut args: Vec<&Element> = Vec::with_capacity(d - m + 1);
            args.extend(gens[..lo].iter());
            args.push(&val);
            args.extend(gens[d - n..].iter());
            let out = outer.apply(&args);
            let right: Vec<i64> = tuple[d - n..].iter().map(|&g| basis.degree(g)).collect();
            total.add_signed(&out, koszul_sign(&right, rule));
        }
    }
    total
}

pub(crate) fn relation_report_shaped(
    basis: &Basis,
    ops: &OpFamily,
    max_arity: usize,
    shape: &ShapeFn<'_>,
) -> RelationReport {
    let run = |rule: SignRule| {
        let mut residuals = Vec::new();
        for d in 0..=max_arity {
            for lists in shape(d) {
                for_each_product(&lists, &mut |t| {
                    let r = relation_residual(basis, ops, t, rule);
                    if !r.is_zero() {
                        residuals.push((t.to_vec(), r));
                    }
                });
            }
        }
        residuals
    };
    let residuals = run(SignRule::Reduced);
    let mut passing_variants = Vec::new();
    if !residuals.is_empty() {
        for rule in [SignRule::Koszul, SignRule::Unsigned] {
            if run(rule).is_empty() {
                passing_variants.push(rule);
            }
        }
    }
    RelationReport {
        residuals,
        passing_variants,
    }
}

/// `m^{k;b}` on every generator tuple of each shape, for arities up to `kmax`.
///
/// `b` has reduced degree zero, so insertions carry no sign.
pub(crate) fn deform_family(ops: &OpFamily, kmax: usize, b: &Element, shape: &ShapeFn<'_>) -> OpFamily {
    let mut out = OpFamily::new();
    for k in 0..=kmax {
        let deg = ops.get(&k).map_or(2 - k as i64, |op| op.degree);
        let mut op = MultilinearOp::new(k, deg);
        for lists in shape(k) {
            for_each_product(&lists, &mut |t| {
                let v = deformed_value(ops, kmax, b, t);
                if !v.is_zero() {
                    op.add_to(t.to_vec(), &v, 1);
                }
            });
        }
        if !op.is_empty() || ops.contains_key(&k) {
            out.insert(k, op);
        }
    }
    out
}

/// `sum over i_0..i_k of m^{k+i}(b^{i_k}, c_k, ..., c_1, b^{i_0})` where
/// `args` are already-evaluated inputs.
pub(crate) fn deformed_value_args(ops: &OpFamily, kmax: usize, b: &Element, args: &[&Element]) -> Element {
    let k = args.len();
    let mut total = Element::zero();
    if b.is_zero() {
        if let Some(op) = ops.get(&k) {
            return op.apply(args);
        }
        return total;
    }
    // Gaps g_0 (before c_k) .. g_k (after c_1), summing to i.
    let mut gaps = vec![0usize; k + 1];
    for i in 0..=kmax.saturating_sub(k) {
        let Some(op) = ops.get(&(k + i)) else { continue };
        if op.is_empty() {
            continue;
        }
        compositions(i, k + 1, &mut gaps, 0, &mut |gaps| {
            let mut full: Vec<&Element> = Vec::with_capacity(k + i);
            for (slot, &g) in gaps.iter().enumerate() {
                full.extend(std::iter::repeat_n(b, g));
                if slot < k {
                    full.push(args[slot]);
                }
            }
            total.add_signed(&op.apply(&full), 1);
        });
    }
    total
}

fn deformed_value(ops: &OpFamily, kmax: usize, b: &Element, tuple: &[usize]) -> Element {
    let gens: Vec<Element> = tuple.iter().map(|&g| Element::gen(g)).collect();
    let args: Vec<&Element> = gens.iter().collect();
    deformed_value_args(ops, kmax, b, &args)
}

/// Every way of writing `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: usize, parts: usize, buf: &mut Vec<usize>, at: usize, f: &mut dyn FnMut(&[usize])) {
    if at + 1 == parts {
        buf[at] = total;
        f(buf);
        return;
    }
    for x in 0..=total {
        buf[at] = x;
        compositions(total - x, parts, buf, at + 1, f);
    }
}

impl CurvedAInfAlgebra {
    pub fn new(name: impl Into<String>, basis: Basis, kmax: usize) -> Self {
        CurvedAInfAlgebra {
            name: name.into(),
            basis,
            ops: OpFamily::new(),
            kmax,
            unit: None,
        }
    }

    pub fn op(&self, k: usize) -> Option<&MultilinearOp> {
        self.ops.get(&k)
    }

    /// Mutable access, creating an empty `m^k` of the right degree on demand.
    pub fn op_mut(&mut self, k: usize) -> &mut MultilinearOp {
        self.ops.entry(k).or_insert_with(|| MultilinearOp::new(k, 2 - k as i64))
    }

    pub fn curvature(&self) -> Element {
        self.op(0).map(|op| op.on_gens(&[])).unwrap_or_default()
    }

    pub fn is_flat(&self) -> bool {
        self.curvature().is_zero()
    }

    /// Intrinsic degrees, the degree invariant, filtration additivity and
    /// the support bound.
    pub fn validate(&self) -> Result<()> {
        for (&k, op) in &self.ops {
            let name = format!("m{k}");
            if op.arity != k {
                return Err(Error::ArityMismatch {
                    expected: k,
                    found: op.arity,
                });
            }
            if op.degree != 2 - k as i64 {
                return Err(Error::IntrinsicDegree {
                    op: name,
                    expected: 2 - k as i64,
                    found: op.degree,
                });
            }
            if k > self.kmax && !op.is_empty() {
                return Err(Error::BeyondSupport {
                    arity: k,
                    kmax: self.kmax,
                });
            }
            op.check_degrees(&self.basis, &name)?;
            op.check_filtration(&self.basis, &name)?;
        }
        Ok(())
    }

    pub fn default_max_arity(&self) -> usize {
        self.kmax + 2
    }

    pub fn check_relations(&self, max_arity: usize) -> RelationReport {
        let n = self.basis.len();
        let all: Vec<usize> = (0..n).collect();
        let shape = move |d: usize| vec![vec![all.clone(); d]];
        relation_report_shaped(&self.basis, &self.ops, max_arity, &shape)
    }

    /// Strict unitality: `m1(e) = 0`, `m2(a, e) = a`, `m2(e, a) = (-1)^|a| a`,
    /// and every `m^k` with `k >= 3` vanishes when any input is `e`.
    pub fn check_unit(&self) -> Result<bool> {
        let e = self.unit.ok_or(Error::MissingUnit)?;
        if self.op(1).is_some_and(|m1| !m1.on_gens(&[e]).is_zero()) {
            return Ok(false);
        }
        let m2 = self.op(2);
        for a in 0..self.basis.len() {
            let right = m2.map(|m| m.on_gens(&[a, e])).unwrap_or_default();
            let left = m2.map(|m| m.on_gens(&[e, a])).unwrap_or_default();
            let sign = BigInt::from(sign_of(self.basis.degree(a)));
            if right != Element::gen(a) || left != Element::term(a, sign) {
                return Ok(false);
            }
        }
        for (&k, op) in &self.ops {
            if k >= 3 && op.entries().any(|(key, _)| key.contains(&e)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn check_deg1(&self, b: &Element) -> Result<()> {
        self.basis.check_element(b)?;
        if b.is_zero() || b.degree(&self.basis) == Some(1) {
            Ok(())
        } else {
            Err(Error::WrongDegree { expected: 1 })
        }
    }

    /// `sum_k m^k(b, ..., b)`.
    ///
    /// With finitely supported operations the sum is finite for every `b`,
    /// so nilpotency cannot fail here.
    pub fn mc_residual(&self, b: &Element) -> Result<Element> {
        self.check_deg1(b)?;
        Ok(deformed_value_args(&self.ops, self.kmax, b, &[]))
    }

    pub fn deform(&self, b: &Element) -> Result<CurvedAInfAlgebra> {
        self.check_deg1(b)?;
        let n = self.basis.len();
        let all: Vec<usize> = (0..n).collect();
        let shape = move |d: usize| vec![vec![all.clone(); d]];
        let ops = deform_family(&self.ops, self.kmax, b, &shape);
        Ok(CurvedAInfAlgebra {
            name: self.name.clone(),
            basis: self.basis.clone(),
            ops,
            kmax: self.kmax,
            unit: self.unit,
        })
    }

    /// Build the A-infinity structure of a dga from its plain differential
    /// and product: `m1(a) = (-1)^|a| da`, `m2(a2, a1) = (-1)^|a1| a2 a1`.
    pub fn from_dga(
        name: impl Into<String>,
        basis: Basis,
        unit: Option<usize>,
        diff: &MultilinearOp,
        prod: &MultilinearOp,
    ) -> Result<Self> {
        let mut a = CurvedAInfAlgebra::new(name, basis, 2);
        a.unit = unit;
        let mut m1 = MultilinearOp::new(1, 1);
        for (key, v) in diff.entries() {
            m1.add_to(key.clone(), v, sign_of(a.basis.degree(key[0])));
        }
        let mut m2 = MultilinearOp::new(2, 0);
        for (key, v) in prod.entries() {
            m2.add_to(key.clone(), v, sign_of(a.basis.degree(key[1])));
        }
        if !m1.is_empty() {
            a.ops.insert(1, m1);
        }
        a.ops.insert(2, m2);
        a.validate()?;
        Ok(a)
    }

    /// Inverse of [`from_dga`](Self::from_dga); fails with `NotDg` on
    /// curvature or higher operations.
    pub fn to_dga(&self) -> Result<(MultilinearOp, MultilinearOp)> {
        if !self.is_flat() || self.ops.iter().any(|(&k, op)| k >= 3 && !op.is_empty()) {
            return Err(Error::NotDg);
        }
        let mut d = MultilinearOp::new(1, 1);
        if let Some(m1) = self.op(1) {
            for (key, v) in m1.entries() {
                d.add_to(key.clone(), v, sign_of(self.basis.degree(key[0])));
            }
        }
        let mut p = MultilinearOp::new(2, 0);
        if let Some(m2) = self.op(2) {
            for (key, v) in m2.entries() {
                p.add_to(key.clone(), v, sign_of(self.basis.degree(key[1])));
            }
        }
        Ok((d, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graded::{compose_insert, for_each_tuple, int};

    /// Residual at arity `d` as an operation, assembled from compose_insert.
    fn residual_via_compose(a: &CurvedAInfAlgebra, d: usize) -> MultilinearOp {
        let mut total = MultilinearOp::new(d, 3 - d as i64);
        for m in 0..=d {
            let (Some(inner), Some(outer)) = (a.op(m), a.op(d - m + 1)) else {
                continue;
            };
            for n in 0..=d - m {
                let c = compose_insert(&a.basis, outer, inner, n, SignRule::Reduced).unwrap();
                for (k, v) in c.entries() {
                    total.add_to(k.clone(), v, 1);
                }
            }
        }
        total
    }

    #[test]
    fn truncated_polynomial_is_unital_and_associative() {
        let a = fixtures::truncated_poly();
        assert!(a.check_relations(4).is_empty());
        assert!(a.check_unit().unwrap());
    }

    #[test]
    fn two_residual_routes_agree() {
        for a in [fixtures::s1(), fixtures::acyclic_dga(), fixtures::exterior(2)] {
            for d in 0..=4 {
                let op = residual_via_compose(&a, d);
                for_each_tuple(a.basis.len(), d, |t| {
                    let direct = relation_residual(&a.basis, &a.ops, t, SignRule::Reduced);
                    assert_eq!(direct, op.on_gens(t), "{} {t:?}", a.name);
                });
            }
        }
    }

    #[test]
    fn non_associative_product_shows_associator() {
        let mut a = fixtures::group_ring(3);
        // Break associativity: g1*g1 = g0 instead of g2.
        a.op_mut(2).set(vec![1, 1], Element::gen(0));
        let rep = a.check_relations(3);
        assert!(!rep.is_empty());
        assert!(rep.residuals.iter().all(|(k, _)| k.len() == 3));
        // Oracle: (g1 g1) g1 - g1 (g1 g1) = g1 - g1 ... via nested brute force.
        let m2 = a.op(2).unwrap();
        let mut found = false;
        for_each_tuple(3, 3, |t| {
            let l = m2.apply(&[&m2.on_gens(&t[..2]), &Element::gen(t[2])]);
            let r = m2.apply(&[&Element::gen(t[0]), &m2.on_gens(&t[1..])]);
            if l != r {
                found = true;
                assert!(rep.residuals.iter().any(|(k, _)| k == t));
            }
        });
        assert!(found);
    }

    #[test]
    fn s1_relations_unit_and_mc() {
        let s1 = fixtures::s1();
        assert!(s1.check_relations(4).is_empty());
        assert!(s1.check_unit().unwrap());
        let x = Element::gen(1);
        let c = Element::gen(2);
        assert!(s1.mc_residual(&x).unwrap().is_zero());
        assert_eq!(s1.mc_residual(&Element::term(1, 2)).unwrap(), -&c);
        let d = s1.deform(&x).unwrap();
        assert!(d.curvature().is_zero());
        assert!(d.check_relations(4).is_empty());
    }

    #[test]
    fn unit_failures() {
        let mut a = fixtures::truncated_poly();
        a.op_mut(2).set(vec![0, 0], Element::term(0, 2));
        assert!(!a.check_unit().unwrap());
        a.unit = None;
        assert_eq!(a.check_unit(), Err(Error::MissingUnit));
    }

    #[test]
    fn deform_by_zero_is_identity() {
        for a in [fixtures::s1(), fixtures::group_ring(4), fixtures::exterior(3)] {
            let d = a.deform(&Element::zero()).unwrap();
            for (k, op) in &a.ops {
                assert_eq!(d.op(*k).unwrap(), op);
            }
        }
    }

    #[test]
    fn deform_rejects_wrong_degree() {
        let s1 = fixtures::s1();
        assert_eq!(s1.deform(&Element::gen(2)), Err(Error::WrongDegree { expected: 1 }));
        assert_eq!(
            s1.mc_residual(&(&Element::gen(1) + &Element::gen(2))),
            Err(Error::WrongDegree { expected: 1 })
        );
    }

    #[test]
    fn dga_round_trip() {
        let a = fixtures::acyclic_dga();
        let (d, p) = a.to_dga().unwrap();
        let b = CurvedAInfAlgebra::from_dga("x", a.basis.clone(), a.unit, &d, &p).unwrap();
        assert_eq!(b.ops, a.ops);
        assert_eq!(fixtures::s1().to_dga(), Err(Error::NotDg));
    }

    #[test]
    fn sign_variant_is_flagged() {
        // m0 = w, m2(w, a) = a, m2(a, w) = -a: the arity-one relation on `a`
        // cancels only when the two insertions carry the same sign.
        let basis = Basis::from_generators([
            crate::graded::Generator::new("w", 2),
            crate::graded::Generator::new("a", 0),
        ])
        .unwrap();
        let mut a = CurvedAInfAlgebra::new("v", basis, 2);
        a.ops.insert(0, MultilinearOp::constant(Element::gen(0), 2));
        a.op_mut(2).set(vec![0, 1], Element::gen(1));
        a.op_mut(2).set(vec![1, 0], Element::term(1, -1));
        let rep = a.check_relations(1);
        assert_eq!(rep.residuals, vec![(vec![1], Element::term(1, int(-2)))]);
        assert_eq!(rep.passing_variants, vec![SignRule::Koszul, SignRule::Unsigned]);
        assert!(a.check_relations(3).passing_variants.is_empty());
    }
}
