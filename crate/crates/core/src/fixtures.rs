//! Small structures used by tests, the acceptance suite and the fixture
//! corpus. Every builder here is correct by construction; the tests check
//! that claim independently.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ainfty::CurvedAInfAlgebra;
use crate::graded::{for_each_tuple, int, rat, sign_of, Basis, Element, Generator, MultilinearOp};
use crate::homology::{solve, ChainMap, FiniteComplex, Matrix};
use crate::limits::{truncation, truncation_inclusion, DirectedSystem};
use crate::modcat::{AInfModule, Side};

/// Strict-unit entries `m2(a, e) = a`, `m2(e, a) = (-1)^|a| a` for every generator.
pub fn add_unit_products(a: &mut CurvedAInfAlgebra, e: usize) {
    a.unit = Some(e);
    let n = a.basis.len();
    let degs: Vec<i64> = (0..n).map(|i| a.basis.degree(i)).collect();
    let m2 = a.op_mut(2);
    for (i, d) in degs.into_iter().enumerate() {
        m2.set(vec![i, e], Element::gen(i));
        m2.set(vec![e, i], Element::term(i, sign_of(d)));
    }
}

/// `Z[t]/(t^2)` with `|t| = 1` and zero differential.
pub fn truncated_poly() -> CurvedAInfAlgebra {
    let basis = Basis::from_generators([Generator::new("e", 0), Generator::new("t", 1)]).unwrap();
    let mut prod = MultilinearOp::new(2, 0);
    prod.set(vec![0, 0], Element::gen(0));
    prod.set(vec![0, 1], Element::gen(1));
    prod.set(vec![1, 0], Element::gen(1));
    CurvedAInfAlgebra::from_dga("trunc", basis, Some(0), &MultilinearOp::new(1, 1), &prod).unwrap()
}

/// The group ring `Z[Z/n]` concentrated in degree zero.
pub fn group_ring(n: usize) -> CurvedAInfAlgebra {
    let basis = Basis::from_generators((0..n).map(|i| Generator::new(format!("g{i}"), 0))).unwrap();
    let mut prod = MultilinearOp::new(2, 0);
    for i in 0..n {
        for j in 0..n {
            prod.set(vec![i, j], Element::gen((i + j) % n));
        }
    }
    let name = format!("zz{n}");
    CurvedAInfAlgebra::from_dga(name, basis, Some(0), &MultilinearOp::new(1, 1), &prod).unwrap()
}

/// Exterior algebra on `k` generators of degree one.
pub fn exterior(k: usize) -> CurvedAInfAlgebra {
    let mut subsets: Vec<u32> = (0..1u32 << k).collect();
    subsets.sort_by_key(|&s| (s.count_ones(), (0..k).filter(|i| s >> i & 1 == 1).collect::<Vec<_>>()));
    let name = |s: u32| {
        if s == 0 {
            "e".to_string()
        } else {
            (0..k)
                .filter(|i| s >> i & 1 == 1)
                .map(|i| format!("x{}", i + 1))
                .collect()
        }
    };
    let basis =
        Basis::from_generators(subsets.iter().map(|&s| Generator::new(name(s), s.count_ones() as i64))).unwrap();
    let pos = |s: u32| subsets.iter().position(|&t| t == s).unwrap();
    let mut prod = MultilinearOp::new(2, 0);
    for &s in &subsets {
        for &t in &subsets {
            if s & t != 0 {
                continue;
            }
            // Sign of sorting the concatenation: count pairs (i in s, j in t) with i > j.
            let inversions: u32 = (0..k)
                .filter(|i| s >> i & 1 == 1)
                .map(|i| (t & ((1u32 << i) - 1)).count_ones())
                .sum();
            prod.set(
                vec![pos(s), pos(t)],
                Element::term(pos(s | t), sign_of(inversions as i64)),
            );
        }
    }
    let name = format!("ext{k}");
    CurvedAInfAlgebra::from_dga(name, basis, Some(0), &MultilinearOp::new(1, 1), &prod).unwrap()
}

/// Unital dga `<e, x, y>` with `dx = y`; its cohomology is `Z` in degree 0.
pub fn acyclic_dga() -> CurvedAInfAlgebra {
    let basis =
        Basis::from_generators([Generator::new("e", 0), Generator::new("x", 1), Generator::new("y", 2)]).unwrap();
    let mut d = MultilinearOp::new(1, 1);
    d.set(vec![1], Element::gen(2));
    let mut prod = MultilinearOp::new(2, 0);
    for i in 0..3 {
        prod.set(vec![0, i], Element::gen(i));
        prod.set(vec![i, 0], Element::gen(i));
    }
    CurvedAInfAlgebra::from_dga("cone", basis, Some(0), &d, &prod).unwrap()
}

/// Curved fixture: `m0 = c`, `m1(x) = -c`, strict unit `e`, no other products.
pub fn s1() -> CurvedAInfAlgebra {
    let basis = Basis::from_generators([
        Generator::new("e", 0),
        Generator::new("x", 1).with_filtration(rat(1, 1)),
        Generator::new("c", 2).with_filtration(rat(1, 1)),
    ])
    .unwrap();
    let mut a = CurvedAInfAlgebra::new("s1", basis, 2);
    a.ops.insert(0, MultilinearOp::constant(Element::gen(2), 2));
    a.op_mut(1).set(vec![1], Element::term(2, -1));
    add_unit_products(&mut a, 0);
    a
}

/// Flat filtered algebra `<e> + V1 + V2` with random `d: V1 -> V2` and
/// products `V1 x V1 -> V2`; every relation holds for degree reasons.
pub fn random_flat(seed: u64, n1: usize, n2: usize) -> CurvedAInfAlgebra {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = [rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1), rat(3, 1)];
    let mut gens = vec![Generator::new("e", 0)];
    let mut f1: Vec<BigRational> = (0..n1).map(|_| levels[rng.gen_range(0..3)].clone()).collect();
    let mut f2: Vec<BigRational> = (0..n2).map(|_| levels[rng.gen_range(1..5)].clone()).collect();
    f1.sort();
    f2.sort();
    for (i, f) in f1.iter().enumerate() {
        gens.push(Generator::new(format!("v{}", i + 1), 1).with_filtration(f.clone()));
    }
    for (i, f) in f2.iter().enumerate() {
        gens.push(Generator::new(format!("w{}", i + 1), 2).with_filtration(f.clone()));
    }
    let basis = Basis::from_generators(gens).unwrap();
    let v1: Vec<usize> = (1..=n1).collect();
    let v2: Vec<usize> = (n1 + 1..=n1 + n2).collect();
    let mut a = CurvedAInfAlgebra::new(format!("rand{seed}"), basis, 2);
    let mut m1 = MultilinearOp::new(1, 1);
    for &v in &v1 {
        let out = random_combo(&mut rng, &v2, |w| a.basis.filtration(w) >= a.basis.filtration(v));
        m1.set(vec![v], out);
    }
    a.ops.insert(1, m1);
    add_unit_products(&mut a, 0);
    for &v in &v1 {
        for &w in &v1 {
            let lower = a.basis.filtration(v) + a.basis.filtration(w);
            let out = random_combo(&mut rng, &v2, |t| a.basis.filtration(t) >= &lower);
            a.op_mut(2).set(vec![v, w], out);
        }
    }
    a
}

fn random_combo(rng: &mut ChaCha8Rng, support: &[usize], allowed: impl Fn(usize) -> bool) -> Element {
    Element::from_terms(
        support
            .iter()
            .filter(|&&g| allowed(g))
            .map(|&g| (g, BigInt::from(rng.gen_range(-2i64..=2)))),
    )
}

/// Random degree-one element with coefficients in `[-2, 2]`.
pub fn random_degree_one(rng: &mut ChaCha8Rng, a: &CurvedAInfAlgebra) -> Element {
    let v1 = a.basis.of_degree(1);
    let mut beta = random_combo(rng, &v1, |_| true);
    if beta.is_zero() {
        if let Some(&g) = v1.choose(rng) {
            beta = Element::term(g, int(1));
        }
    }
    beta
}

/// Curved algebra `deform(random_flat, beta)` together with `beta`; the
/// element `-beta` is a Maurer-Cartan element of the result.
pub fn random_curved(seed: u64) -> (CurvedAInfAlgebra, Element) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9) ^ 0x5eed);
    let n1 = rng.gen_range(1..=2);
    let n2 = rng.gen_range(1..=2);
    let flat = random_flat(seed, n1, n2);
    let beta = random_degree_one(&mut rng, &flat);
    let mut curved = flat.deform(&beta).expect("beta has degree one");
    curved.name = format!("curved{seed}");
    (curved, beta)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Regular module twisted on the right by `gamma`:
/// `n^k(a_k, .., a_1; y) = sum_i m^{k+1+i}(a_k, .., a_1, y, gamma, .., gamma)`.
/// It satisfies the module relations exactly when `gamma` is Maurer-Cartan.
pub fn twisted_regular(c: &CurvedAInfAlgebra, gamma: &Element) -> AInfModule {
    let n = c.basis.len();
    let kmax = c.kmax.saturating_sub(1);
    let mut d = AInfModule::new(format!("{}_tw", c.name), Side::Left, c.clone(), c.basis.clone(), kmax);
    for k in 0..=kmax {
        let mut op = MultilinearOp::new(k + 1, 1 - k as i64);
        for_each_tuple(n, k + 1, |key| {
            let gens: Vec<Element> = key.iter().map(|&g| Element::gen(g)).collect();
            let mut total = Element::zero();
            for i in 0..=c.kmax - (k + 1) {
                let Some(m) = c.op(k + 1 + i) else { continue };
                let mut args: Vec<&Element> = gens.iter().collect();
                args.extend(std::iter::repeat_n(gamma, i));
                total.add_signed(&m.apply(&args), 1);
            }
            op.set(key.to_vec(), total);
        });
        d.ops.insert(k, op);
    }
    d
}

/// `s1()` twisted by its Maurer-Cartan element `x`: `n0(e) = -x`, `n1(.; e) = id`.
pub fn s1_module() -> AInfModule {
    let c = s1();
    let mut d = twisted_regular(&c, &Element::gen(1));
    d.name = "s1_mod".into();
    d
}

/// Curved algebra, a module with cyclic element `u`, and the bounding
/// cochain the solver must find.
#[derive(Clone, Debug)]
pub struct McFixture {
    pub algebra: CurvedAInfAlgebra,
    pub module: AInfModule,
    pub u: Element,
    pub expected: Element,
}

/// `random_curved(seed)` with the regular module twisted by `-beta`, then
/// conjugated by a random degree- and filtration-preserving unimodular matrix.
pub fn random_mc_fixture(seed: u64) -> McFixture {
    let (c, beta) = random_curved(seed);
    let gamma = -&beta;
    let d = twisted_regular(&c, &gamma);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0c1);
    let n = c.basis.len();
    let basis = &c.basis;
    let order = |i: usize| (basis.filtration(i).clone(), i);
    let mut p = Matrix::identity(n);
    for i in 0..n {
        if rng.gen_bool(0.3) {
            p.set(i, i, int(-1));
        }
        for j in 0..n {
            if i != j && basis.degree(i) == basis.degree(j) && order(i) > order(j) {
                p.set(i, j, int(rng.gen_range(-1i64..=1)));
            }
        }
    }
    let cols: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            let mut e = vec![int(0); n];
            e[j] = int(1);
            solve(&p, &e).expect("triangular with unit diagonal")
        })
        .collect();
    let p_inv = Matrix::from_columns(n, &cols);
    let mut module = d.conjugate(&p, &p_inv).expect("inverse pair");
    module.name = format!("mod{seed}");
    let all: Vec<usize> = (0..n).collect();
    let u = Element::from_dense(&all, &p.column(c.unit.expect("unital")));
    McFixture {
        algebra: c,
        module,
        u,
        expected: gamma,
    }
}

/// Filtered complex `V0 -> V1 -> V2` whose truncations make up
/// `limit_fixture(seed, _)`.
pub fn limit_complex(seed: u64) -> (Basis, MultilinearOp) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1117);
    let mut gens = vec![Generator::new("e", 0)];
    for i in 0..3 {
        gens.push(Generator::new(format!("v{}", i + 1), 1).with_filtration(rat(i as i64 + 1, 1)));
        gens.push(Generator::new(format!("w{}", i + 1), 2).with_filtration(rat(2 * i as i64 + 3, 2)));
    }
    let basis = Basis::from_generators(gens).unwrap();
    let mut d = MultilinearOp::new(1, 1);
    for v in basis.of_degree(1) {
        let out = random_combo(&mut rng, &basis.of_degree(2), |w| {
            basis.filtration(w) >= basis.filtration(v)
        });
        d.set(vec![v], out);
    }
    (basis, d)
}

/// Truncations `F^{>= l}` of `limit_complex(seed)`
/// at decreasing levels, each mapped to itself by `id + dh + hd` for a
/// filtration-raising `h`. With `corrected`, `h` changes from stage to
/// stage and the correctors `F_{d+1} F_d^{-1}` restore commutation.
pub fn limit_fixture(seed: u64, corrected: bool) -> DirectedSystem {
    let (basis, d) = limit_complex(seed);
    let basis = &basis;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1118);
    let mut levels = basis.levels();
    levels.reverse();
    let truncs: Vec<_> = levels
        .iter()
        .map(|l| truncation(basis, &d, l).expect("d preserves filtration"))
        .collect();
    let full = FiniteComplex::from_op(basis, &d).expect("complex");
    let phi_for = |rng: &mut ChaCha8Rng| -> BTreeMap<i64, Matrix> {
        // h: degree -1, strictly raising filtration.
        let mut h = MultilinearOp::new(1, -1);
        for g in 0..basis.len() {
            let out = random_combo(rng, &basis.of_degree(basis.degree(g) - 1), |t| {
                basis.filtration(t) > basis.filtration(g)
            });
            h.set(vec![g], out);
        }
        let hc = |deg: i64| crate::homology::op_matrix(&h, &basis.of_degree(deg), &basis.of_degree(deg - 1));
        basis
            .degrees()
            .into_iter()
            .map(|deg| {
                let n = full.dim(deg);
                let dh = full.d(deg - 1).mul(&hc(deg)).unwrap_or_else(|_| Matrix::zeros(n, n));
                let hd = hc(deg + 1).mul(&full.d(deg)).unwrap_or_else(|_| Matrix::zeros(n, n));
                let m = Matrix::identity(n).add(&dh).unwrap().add(&hd).unwrap();
                (deg, m)
            })
            .collect()
    };
    let shared = phi_for(&mut rng);
    let phis: Vec<BTreeMap<i64, Matrix>> = (0..truncs.len())
        .map(|_| if corrected { phi_for(&mut rng) } else { shared.clone() })
        .collect();
    let restrict = |phi: &BTreeMap<i64, Matrix>, t: &(FiniteComplex, BTreeMap<i64, Vec<usize>>)| {
        let mut f = ChainMap::new(t.0.clone(), t.0.clone());
        for (deg, keep) in &t.1 {
            f.maps.insert(*deg, phi[deg].select(keep, keep));
        }
        f
    };
    let maps: Vec<ChainMap> = phis.iter().zip(&truncs).map(|(p, t)| restrict(p, t)).collect();
    let mut inclusions = Vec::new();
    let mut corrections = Vec::new();
    for k in 0..truncs.len() - 1 {
        inclusions.push(truncation_inclusion(
            (&truncs[k].0, &truncs[k].1),
            (&truncs[k + 1].0, &truncs[k + 1].1),
        ));
        let next_on_small = restrict(&phis[k + 1], &truncs[k]);
        let mut h = ChainMap::new(truncs[k].0.clone(), truncs[k].0.clone());
        for (deg, m) in &maps[k].maps {
            let n = m.rows();
            let inv_cols: Vec<Vec<BigInt>> = (0..n)
                .map(|j| {
                    let mut e = vec![int(0); n];
                    e[j] = int(1);
                    solve(m, &e).expect("unitriangular")
                })
                .collect();
            let inv = Matrix::from_columns(n, &inv_cols);
            h.maps.insert(*deg, next_on_small.map(*deg).mul(&inv).unwrap());
        }
        corrections.push(h);
    }
    DirectedSystem {
        stages: truncs.iter().map(|t| t.0.clone()).collect(),
        targets: truncs.iter().map(|t| t.0.clone()).collect(),
        target_inclusions: inclusions.clone(),
        inclusions,
        maps,
        corrections,
    }
}

/// A corrected system with one corrector negated; returns the broken square.
pub fn seeded_broken_limit(seed: u64) -> (DirectedSystem, usize) {
    let mut s = limit_fixture(seed, true);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb40c);
    let square = rng.gen_range(0..s.corrections.len());
    let h = &mut s.corrections[square];
    for m in h.maps.values_mut() {
        *m = m.neg();
    }
    (s, square)
}
