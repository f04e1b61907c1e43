//! Graded sparse integer linear algebra shared by every structure in the crate.
//!
//! Inputs of a multilinear operation are written left to right as
//! `a_d, ..., a_1`, so index 0 of a key is the leftmost input `a_d` and the
//! last index is `a_1`. Signs follow the reduced-degree rule: inserting an
//! operation with `n` inputs to its right costs `(-1)^(|a_1|+...+|a_n| - n)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Object label for categories with several objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjTag {
    /// A morphism `source -> target`.
    Hom(String, String),
    /// A module element living over a single object.
    At(String),
}

impl fmt::Display for ObjTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjTag::Hom(s, t) => write!(f, "{s},{t}"),
            ObjTag::At(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
    pub filtration: BigRational,
    pub object: Option<ObjTag>,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: i64) -> Self {
        Generator {
            name: name.into(),
            degree,
            filtration: BigRational::zero(),
            object: None,
        }
    }

    pub fn with_filtration(mut self, filt: BigRational) -> Self {
        self.filtration = filt;
        self
    }

    pub fn with_object(mut self, tag: ObjTag) -> Self {
        self.object = Some(tag);
        self
    }
}

/// Ordered list of generators with unique names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Basis {
    gens: Vec<Generator>,
    index: HashMap<String, usize>,
}

impl Basis {
    pub fn new() -> Self {
        Basis::default()
    }

    pub fn from_generators(gens: impl IntoIterator<Item = Generator>) -> Result<Self> {
        let mut b = Basis::new();
        for g in gens {
            b.push(g)?;
        }
        Ok(b)
    }

    pub fn push(&mut self, g: Generator) -> Result<usize> {
        if self.index.contains_key(&g.name) {
            return Err(Error::DuplicateGenerator(g.name));
        }
        let i = self.gens.len();
        self.index.insert(g.name.clone(), i);
        self.gens.push(g);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn get(&self, i: usize) -> &Generator {
        &self.gens[i]
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.gens[i].degree
    }

    pub fn filtration(&self, i: usize) -> &BigRational {
        &self.gens[i].filtration
    }

    /// Sorted distinct filtration values.
    pub fn levels(&self) -> Vec<BigRational> {
        let mut v: Vec<BigRational> = self.gens.iter().map(|g| g.filtration.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Indices of generators of the given degree, in basis order.
    pub fn of_degree(&self, deg: i64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.degree(i) == deg).collect()
    }

    pub fn degrees(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.gens.iter().map(|g| g.degree).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Concatenation; names must stay distinct.
    pub fn concat(&self, other: &Basis) -> Result<Basis> {
        let mut b = self.clone();
        for g in &other.gens {
            b.push(g.clone())?;
        }
        Ok(b)
    }

    pub fn fmt_element(&self, e: &Element) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, (i, c)) in e.iter().enumerate() {
            let name = &self.gens[*i].name;
            if n == 0 {
                out.push_str(&format!("{c}*{name}"));
            } else if c.is_negative() {
                out.push_str(&format!(" - {}*{name}", -c));
            } else {
                out.push_str(&format!(" + {c}*{name}"));
            }
        }
        out
    }

    pub fn check_element(&self, e: &Element) -> Result<()> {
        match e.terms.keys().find(|&&i| i >= self.len()) {
            Some(i) => Err(Error::UnknownGenerator(format!("#{i}"))),
            None => Ok(()),
        }
    }
}

/// Sparse integer combination of basis generators, keyed by basis index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    terms: BTreeMap<usize, BigInt>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn gen(i: usize) -> Self {
        Element::term(i, BigInt::one())
    }

    pub fn term(i: usize, c: impl Into<BigInt>) -> Self {
        let mut e = Element::zero();
        e.add_term(i, c.into());
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, BigInt)>) -> Self {
        let mut e = Element::zero();
        for (i, c) in terms {
            e.add_term(i, c);
        }
        e
    }

    /// Dense coefficient vector over `indices`; generators outside are dropped.
    pub fn from_dense(indices: &[usize], coeffs: &[BigInt]) -> Self {
        Element::from_terms(indices.iter().copied().zip(coeffs.iter().cloned()))
    }

    pub fn to_dense(&self, indices: &[usize]) -> Vec<BigInt> {
        indices.iter().map(|&i| self.coeff(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.terms.get(&i).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &BigInt)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.keys().copied()
    }

    pub fn add_term(&mut self, i: usize, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(i).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&i);
        }
    }

    pub fn add_scaled(&mut self, other: &Element, s: &BigInt) {
        if s.is_zero() {
            return;
        }
        for (i, c) in &other.terms {
            self.add_term(*i, c * s);
        }
    }

    pub fn add_signed(&mut self, other: &Element, sign: i32) {
        for (i, c) in &other.terms {
            if sign >= 0 {
                self.add_term(*i, c.clone());
            } else {
                self.add_term(*i, -c);
            }
        }
    }

    pub fn scaled(&self, s: &BigInt) -> Element {
        let mut e = Element::zero();
        e.add_scaled(self, s);
        e
    }

    /// Keep only generators satisfying `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(usize) -> bool) -> Element {
        Element {
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| keep(**i))
                .map(|(i, c)| (*i, c.clone()))
                .collect(),
        }
    }

    /// Re-index every generator through `f`.
    pub fn reindexed(&self, mut f: impl FnMut(usize) -> usize) -> Element {
        Element::from_terms(self.terms.iter().map(|(i, c)| (f(*i), c.clone())))
    }

    /// Degree shared by all terms; `None` for zero or inhomogeneous elements.
    pub fn degree(&self, basis: &Basis) -> Option<i64> {
        let mut it = self.terms.keys().map(|&i| basis.degree(i));
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn is_homogeneous(&self, basis: &Basis) -> bool {
        self.is_zero() || self.degree(basis).is_some()
    }

    pub fn min_filtration(&self, basis: &Basis) -> Option<BigRational> {
        self.terms.keys().map(|&i| basis.filtration(i).clone()).min()
    }
}

impl std::ops::Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        let mut e = self.clone();
        e.add_signed(rhs, 1);
        e
    }
}

impl std::ops::Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        let mut e = self.clone();
        e.add_signed(rhs, -1);
        e
    }
}

impl std::ops::Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        let mut e = Element::zero();
        e.add_signed(self, -1);
        e
    }
}

/// Sign conventions. Only `Reduced` is used for actual checks; the others
/// exist so that failures can be compared against plausible alternatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignRule {
    /// `(-1)^(sum (|a_i| - 1))`.
    Reduced,
    /// `(-1)^(sum |a_i|)`.
    Koszul,
    /// Always `+1`.
    Unsigned,
}

pub fn sign_of(exponent: i64) -> i32 {
    if exponent.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn koszul_sign(prefix_degrees: &[i64], rule: SignRule) -> i32 {
    match rule {
        SignRule::Reduced => sign_of(prefix_degrees.iter().map(|d| d - 1).sum()),
        SignRule::Koszul => sign_of(prefix_degrees.iter().sum()),
        SignRule::Unsigned => 1,
    }
}

/// Sparse multilinear operation with a fixed arity and intrinsic degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearOp {
    pub arity: usize,
    pub degree: i64,
    table: BTreeMap<Vec<usize>, Element>,
}

impl MultilinearOp {
    pub fn new(arity: usize, degree: i64) -> Self {
        MultilinearOp {
            arity,
            degree,
            table: BTreeMap::new(),
        }
    }

    pub fn constant(value: Element, degree: i64) -> Self {
        let mut op = MultilinearOp::new(0, degree);
        op.set(vec![], value);
        op
    }

    /// Overwrite an entry; a zero value removes it.
    pub fn set(&mut self, key: Vec<usize>, value: Element) {
        assert_eq!(key.len(), self.arity, "key length must match arity");
        if value.is_zero() {
            self.table.remove(&key);
        } else {
            self.table.insert(key, value);
        }
    }

    pub fn add_to(&mut self, key: Vec<usize>, value: &Element, sign: i32) {
        assert_eq!(key.len(), self.arity, "key length must match arity");
        let slot = self.table.entry(key.clone()).or_default();
        slot.add_signed(value, sign);
        if slot.is_zero() {
            self.table.remove(&key);
        }
    }

    pub fn get(&self, key: &[usize]) -> Option<&Element> {
        self.table.get(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Element)> {
        self.table.iter()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Multilinear extension without bounds checks; panics on arity mismatch.
    pub fn apply(&self, args: &[&Element]) -> Element {
        assert_eq!(args.len(), self.arity);
        let mut out = Element::zero();
        if self.table.is_empty() || args.iter().any(|a| a.is_zero()) {
            return out;
        }
        let combos = args
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
            .unwrap_or(usize::MAX);
        if combos <= self.table.len() {
            let mut key = Vec::with_capacity(self.arity);
            self.expand(args, &mut key, BigInt::one(), &mut out);
        } else {
            'entries: for (key, val) in &self.table {
                let mut c = BigInt::one();
                for (a, &g) in args.iter().zip(key) {
                    match a.terms.get(&g) {
                        Some(x) => c *= x,
                        None => continue 'entries,
                    }
                }
                out.add_scaled(val, &c);
            }
        }
        out
    }

    fn expand(&self, args: &[&Element], key: &mut Vec<usize>, coeff: BigInt, out: &mut Element) {
        if key.len() == args.len() {
            if let Some(v) = self.table.get(key.as_slice()) {
                out.add_scaled(v, &coeff);
            }
            return;
        }
        for (g, c) in args[key.len()].iter() {
            key.push(*g);
            self.expand(args, key, &coeff * c, out);
            key.pop();
        }
    }

    pub fn evaluate(&self, basis: &Basis, args: &[&Element]) -> Result<Element> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: args.len(),
            });
        }
        for a in args {
            basis.check_element(a)?;
        }
        Ok(self.apply(args))
    }

    /// Value on a tuple of basis generators.
    pub fn on_gens(&self, key: &[usize]) -> Element {
        self.table.get(key).cloned().unwrap_or_default()
    }

    /// Every output generator has degree `sum(inputs) + intrinsic degree`.
    pub fn check_degrees(&self, basis: &Basis, name: &str) -> Result<()> {
        for (key, val) in &self.table {
            let expected: i64 = key.iter().map(|&g| basis.degree(g)).sum::<i64>() + self.degree;
            for g in val.support() {
                if basis.degree(g) != expected {
                    return Err(Error::DegreeMismatch {
                        entry: entry_label(basis, name, key),
                        expected,
                        found: basis.degree(g),
                    });
                }
            }
        }
        Ok(())
    }

    /// Every output generator's filtration is at least the sum of the inputs'.
    pub fn check_filtration(&self, basis: &Basis, name: &str) -> Result<()> {
        for (key, val) in &self.table {
            let lower: BigRational = key
                .iter()
                .map(|&g| basis.filtration(g).clone())
                .fold(BigRational::zero(), |a, b| a + b);
            if val.support().any(|g| basis.filtration(g) < &lower) {
                return Err(Error::FiltrationViolation(entry_label(basis, name, key)));
            }
        }
        Ok(())
    }

    pub fn reindexed(&self, f: impl Fn(usize) -> usize) -> MultilinearOp {
        let mut op = MultilinearOp::new(self.arity, self.degree);
        for (k, v) in &self.table {
            op.set(k.iter().map(|&g| f(g)).collect(), v.reindexed(&f));
        }
        op
    }

    /// Table restricted to keys accepted by `keep`.
    pub fn restricted(&self, keep: impl Fn(&[usize]) -> bool) -> MultilinearOp {
        let mut op = MultilinearOp::new(self.arity, self.degree);
        for (k, v) in &self.table {
            if keep(k) {
                op.set(k.clone(), v.clone());
            }
        }
        op
    }
}

pub(crate) fn entry_label(basis: &Basis, name: &str, key: &[usize]) -> String {
    let args: Vec<&str> = key.iter().map(|&g| basis.get(g).name.as_str()).collect();
    format!("{name}({})", args.join(","))
}

/// `(a_d..a_1) -> ± outer(.., inner(..), ..)` with `position` counting the
/// outer inputs to the right of the insertion slot.
pub fn compose_insert(
    basis: &Basis,
    outer: &MultilinearOp,
    inner: &MultilinearOp,
    position: usize,
    rule: SignRule,
) -> Result<MultilinearOp> {
    if outer.arity == 0 || position >= outer.arity {
        return Err(Error::PositionOutOfRange {
            position,
            arity: outer.arity,
        });
    }
    let slot = outer.arity - 1 - position;
    let mut out = MultilinearOp::new(outer.arity + inner.arity - 1, outer.degree + inner.degree);
    for (okey, oval) in outer.entries() {
        let right: Vec<i64> = okey[slot + 1..].iter().map(|&g| basis.degree(g)).collect();
        let sign = koszul_sign(&right, rule);
        for (ikey, ival) in inner.entries() {
            let c = ival.coeff(okey[slot]);
            if c.is_zero() {
                continue;
            }
            let mut key = okey[..slot].to_vec();
            key.extend_from_slice(ikey);
            key.extend_from_slice(&okey[slot + 1..]);
            let c = if sign < 0 { -c } else { c };
            let mut v = Element::zero();
            v.add_scaled(oval, &c);
            out.add_to(key, &v, 1);
        }
    }
    Ok(out)
}

/// Visit every tuple of length `len` over `0..n` in lexicographic order.
pub fn for_each_tuple(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![0usize; len];
    if len == 0 {
        f(&t);
        return;
    }
    if n == 0 {
        return;
    }
    loop {
        f(&t);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis3() -> Basis {
        Basis::from_generators([Generator::new("x", 1), Generator::new("y", 1), Generator::new("z", 2)]).unwrap()
    }

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&[], SignRule::Reduced), 1);
        assert_eq!(koszul_sign(&[1], SignRule::Reduced), 1);
        assert_eq!(koszul_sign(&[2, 2], SignRule::Reduced), 1);
        assert_eq!(koszul_sign(&[2], SignRule::Reduced), -1);
        assert_eq!(koszul_sign(&[0, 3], SignRule::Reduced), -1);
    }

    #[test]
    fn evaluate_is_linear_at_zero_and_scalars() {
        let b = basis3();
        let mut m2 = MultilinearOp::new(2, 0);
        m2.set(vec![0, 1], Element::gen(2));
        m2.set(vec![1, 1], Element::term(2, -3));
        let x = Element::gen(0);
        assert!(m2.evaluate(&b, &[&x, &Element::zero()]).unwrap().is_zero());
        let mut m1 = MultilinearOp::new(1, 1);
        m1.set(vec![0], Element::gen(2));
        let two_x = Element::term(0, 2);
        assert_eq!(m1.evaluate(&b, &[&two_x]).unwrap(), Element::term(2, 2));
    }

    #[test]
    fn evaluate_matches_termwise_expansion() {
        let b = basis3();
        let mut m2 = MultilinearOp::new(2, 0);
        m2.set(vec![0, 1], Element::gen(2));
        m2.set(vec![1, 1], Element::term(2, -3));
        m2.set(vec![1, 0], Element::term(2, 5));
        let xy = &Element::gen(0) + &Element::gen(1);
        let z = Element::gen(1);
        let lhs = m2.evaluate(&b, &[&xy, &z]).unwrap();
        // Oracle: sum over generator pairs of coefficient products.
        let mut rhs = Element::zero();
        for i in 0..3 {
            for j in 0..3 {
                let c = xy.coeff(i) * z.coeff(j);
                rhs.add_scaled(&m2.on_gens(&[i, j]), &c);
            }
        }
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, Element::term(2, -2));
    }

    #[test]
    fn evaluate_errors() {
        let b = basis3();
        let m2 = MultilinearOp::new(2, 0);
        assert!(matches!(
            m2.evaluate(&b, &[&Element::gen(0)]),
            Err(Error::ArityMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            m2.evaluate(&b, &[&Element::gen(0), &Element::gen(7)]),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn identity_insertion_and_arity() {
        let b = basis3();
        let mut m2 = MultilinearOp::new(2, 0);
        m2.set(vec![0, 1], Element::gen(2));
        let mut id = MultilinearOp::new(1, 0);
        for i in 0..3 {
            id.set(vec![i], Element::gen(i));
        }
        let c = compose_insert(&b, &m2, &id, 1, SignRule::Reduced).unwrap();
        assert_eq!(c, m2);
        let m0 = MultilinearOp::constant(Element::gen(0), 2);
        let c0 = compose_insert(&b, &m2, &m0, 1, SignRule::Reduced).unwrap();
        assert_eq!(c0.arity, 1);
        assert_eq!(c0.on_gens(&[1]), Element::gen(2));
        assert!(matches!(
            compose_insert(&b, &m2, &id, 2, SignRule::Reduced),
            Err(Error::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn element_format() {
        let b = basis3();
        let e = Element::from_terms([(2, int(-1)), (0, int(3))]);
        assert_eq!(b.fmt_element(&e), "3*x - 1*z");
        assert_eq!(b.fmt_element(&Element::zero()), "0");
    }

    #[test]
    fn tuples_enumerated_lexicographically() {
        let mut seen = vec![];
        for_each_tuple(2, 2, |t| seen.push(t.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let mut count = 0;
        for_each_tuple(3, 0, |_| count += 1);
        assert_eq!(count, 1);
    }
}
