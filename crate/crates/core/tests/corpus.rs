//! The fixture corpus under `fixtures/`: byte-identical round trips and the
//! checks each file is expected to pass.
//!
//! `AINFTY_REGEN=1 cargo test --test corpus -- --ignored` rewrites the corpus
//! from the in-crate fixtures.

use std::path::PathBuf;

use ainfty::fixtures;
use ainfty::format::{parse, serialize, ComplexDoc, Document, ModuleDoc};
use ainfty::graded::{rat, Basis, Element, Generator, MultilinearOp};
use ainfty::modcat::{yoneda_left, AInfBimodule};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn renamed(mut m: ainfty::modcat::AInfModule, names: &[&str]) -> ainfty::modcat::AInfModule {
    let gens: Vec<Generator> = m
        .basis
        .generators()
        .iter()
        .zip(names)
        .map(|(g, n)| Generator {
            name: n.to_string(),
            ..g.clone()
        })
        .collect();
    m.basis = Basis::from_generators(gens).unwrap();
    m
}

fn filtered_complex() -> ComplexDoc {
    let mut gens = vec![Generator::new("e", 0)];
    for i in 1..=3 {
        gens.push(Generator::new(format!("v{i}"), 1).with_filtration(rat(i, 1)));
    }
    for i in 1..=3 {
        gens.push(Generator::new(format!("w{i}"), 2).with_filtration(rat(2 * i + 1, 2)));
    }
    let basis = Basis::from_generators(gens).unwrap();
    let mut d = MultilinearOp::new(1, 1);
    d.set(vec![1], Element::from_terms([(4, 1.into()), (5, (-2).into())]));
    d.set(vec![2], Element::gen(5));
    d.set(vec![3], Element::term(6, 2));
    let mut f = MultilinearOp::new(1, 0);
    for g in 0..basis.len() {
        f.set(vec![g], Element::gen(g));
    }
    // f = id + (dh + hd) with h(w1) = v3.
    f.set(vec![1], Element::from_terms([(1, 1.into()), (3, 1.into())]));
    f.set(vec![4], Element::from_terms([(4, 1.into()), (6, 2.into())]));
    ComplexDoc {
        name: "trunc3".into(),
        basis,
        d,
        f: Some(f),
    }
}

/// File name and contents of every corpus entry.
fn corpus() -> Vec<(String, Vec<Document>)> {
    let mut out = Vec::new();
    let alg = |a: ainfty::ainfty::CurvedAInfAlgebra| vec![Document::Algebra(a)];
    out.push(("s1.ainf".into(), alg(fixtures::s1())));
    let m = renamed(fixtures::s1_module(), &["u", "y", "z"]);
    out.push((
        "s1-mod.ainf".into(),
        vec![Document::Module(ModuleDoc {
            module: m,
            cyclic: Some(Element::gen(0)),
        })],
    ));
    for n in 2..=6 {
        out.push((format!("zz{n}.ainf"), alg(fixtures::group_ring(n))));
    }
    for k in 1..=3 {
        out.push((format!("ext{k}.ainf"), alg(fixtures::exterior(k))));
    }
    out.push(("trunc.ainf".into(), alg(fixtures::truncated_poly())));
    out.push(("acyclic.ainf".into(), alg(fixtures::acyclic_dga())));
    for seed in 0..5 {
        out.push((format!("curved{seed}.ainf"), alg(fixtures::random_curved(seed).0)));
    }
    let mc = fixtures::random_mc_fixture(3);
    out.push(("mc3.ainf".into(), alg(mc.algebra.clone())));
    out.push((
        "mc3-mod.ainf".into(),
        vec![Document::Module(ModuleDoc {
            module: mc.module.clone(),
            cyclic: Some(mc.u.clone()),
        })],
    ));
    let t = fixtures::truncated_poly();
    out.push((
        "trunc-yoneda.ainf".into(),
        vec![Document::Module(ModuleDoc {
            module: yoneda_left(&t, None),
            cyclic: None,
        })],
    ));
    out.push((
        "trunc-diagonal.ainf".into(),
        vec![
            Document::Algebra(t.clone()),
            Document::Bimodule(AInfBimodule::diagonal(&t)),
        ],
    ));
    out.push(("trunc3.ainf".into(), vec![Document::Complex(filtered_complex())]));
    out
}

/// Algebras a module file is parsed against.
fn context(name: &str) -> Vec<ainfty::ainfty::CurvedAInfAlgebra> {
    match name {
        "s1-mod.ainf" => vec![fixtures::s1()],
        "mc3-mod.ainf" => vec![fixtures::random_mc_fixture(3).algebra],
        "trunc-yoneda.ainf" => vec![fixtures::truncated_poly()],
        _ => vec![],
    }
}

#[test]
#[ignore]
fn regenerate() {
    if std::env::var("AINFTY_REGEN").is_err() {
        return;
    }
    std::fs::create_dir_all(dir()).unwrap();
    for (name, docs) in corpus() {
        std::fs::write(dir().join(name), serialize(&docs)).unwrap();
    }
}

#[test]
fn corpus_matches_fixtures_and_round_trips() {
    for (name, docs) in corpus() {
        let text = std::fs::read_to_string(dir().join(&name)).unwrap();
        let parsed = parse(&text, &context(&name)).unwrap();
        assert_eq!(serialize(&parsed), text, "{name}");
        assert_eq!(serialize(&docs), text, "{name} is stale");
    }
}

#[test]
fn corpus_is_listed() {
    let mut on_disk: Vec<String> = std::fs::read_dir(dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = corpus().into_iter().map(|(n, _)| n).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
}
