//! Line-oriented text format for algebras, modules, bimodules and complexes.
//!
//! ```text
//! algebra s1 kmax=2
//! gen e deg=0 filt=0/1
//! gen x deg=1 filt=1/1
//! unit e
//! op m0: -> 1*c
//! op m2: e x -> 1*x
//! ```
//!
//! A file may hold several documents; each header line starts a new one.
//! Module and bimodule headers name the algebras they act through, which must
//! appear earlier in the same file or be supplied by the caller. Keys of
//! operation lines are resolved positionally: algebra slots against the
//! algebra basis, the module slot against the module basis.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ainfty::CurvedAInfAlgebra;
use crate::error::{Error, Result};
use crate::graded::{Basis, Element, Generator, MultilinearOp, ObjTag};
use crate::modcat::{AInfBimodule, AInfModule, Side};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleDoc {
    pub module: AInfModule,
    pub cyclic: Option<Element>,
}

/// A filtered cochain complex `d`, with an optional filtered chain
/// endomorphism `f` used by the directed-system driver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexDoc {
    pub name: String,
    pub basis: Basis,
    pub d: MultilinearOp,
    pub f: Option<MultilinearOp>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    Algebra(CurvedAInfAlgebra),
    Module(ModuleDoc),
    Bimodule(AInfBimodule),
    Complex(ComplexDoc),
}

impl Document {
    pub fn name(&self) -> &str {
        match self {
            Document::Algebra(a) => &a.name,
            Document::Module(m) => &m.module.name,
            Document::Bimodule(b) => &b.name,
            Document::Complex(c) => &c.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Algebra(_) => "algebra",
            Document::Module(_) => "module",
            Document::Bimodule(_) => "bimodule",
            Document::Complex(_) => "complex",
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Document::Algebra(a) => write_algebra(&mut out, a),
            Document::Module(m) => write_module(&mut out, m),
            Document::Bimodule(b) => write_bimodule(&mut out, b),
            Document::Complex(c) => write_complex(&mut out, c),
        }
        out
    }
}

/// Documents separated by one blank line.
pub fn serialize(docs: &[Document]) -> String {
    docs.iter().map(Document::to_text).collect::<Vec<_>>().join("\n")
}

pub fn fmt_filtration(f: &BigRational) -> String {
    format!("{}/{}", f.numer(), f.denom())
}

fn write_gens(out: &mut String, basis: &Basis) {
    for g in basis.generators() {
        out.push_str(&format!(
            "gen {} deg={} filt={}",
            g.name,
            g.degree,
            fmt_filtration(&g.filtration)
        ));
        if let Some(tag) = &g.object {
            out.push_str(&format!(" obj={tag}"));
        }
        out.push('\n');
    }
}

/// Key `k` names the op (`m2`, `n1`, `n1,0`); `slots` gives the basis of each input.
fn write_op(out: &mut String, label: &str, op: &MultilinearOp, slots: &[&Basis], target: &Basis) {
    for (key, value) in op.entries() {
        if value.is_zero() {
            continue;
        }
        out.push_str(&format!("op {label}:"));
        for (i, g) in key.iter().enumerate() {
            out.push(' ');
            out.push_str(&slots[i].get(*g).name);
        }
        out.push_str(&format!(" -> {}\n", target.fmt_element(value)));
    }
}

fn write_algebra(out: &mut String, a: &CurvedAInfAlgebra) {
    out.push_str(&format!("algebra {} kmax={}\n", a.name, a.kmax));
    write_gens(out, &a.basis);
    if let Some(u) = a.unit {
        out.push_str(&format!("unit {}\n", a.basis.get(u).name));
    }
    for (k, op) in &a.ops {
        let slots = vec![&a.basis; *k];
        write_op(out, &format!("m{k}"), op, &slots, &a.basis);
    }
}

fn module_slots(m: &AInfModule, k: usize) -> Vec<&Basis> {
    let mut slots = vec![&m.algebra.basis; k];
    match m.side {
        Side::Left => slots.push(&m.basis),
        Side::Right => slots.insert(0, &m.basis),
    }
    slots
}

fn write_module(out: &mut String, doc: &ModuleDoc) {
    let m = &doc.module;
    let side = match m.side {
        Side::Left => "left",
        Side::Right => "right",
    };
    out.push_str(&format!(
        "module {} side={side} over={} kmax={}\n",
        m.name, m.algebra.name, m.kmax
    ));
    write_gens(out, &m.basis);
    for (k, op) in &m.ops {
        write_op(out, &format!("n{k}"), op, &module_slots(m, *k), &m.basis);
    }
    if let Some(u) = &doc.cyclic {
        out.push_str(&format!("cyclic {}\n", m.basis.fmt_element(u)));
    }
}

fn bimodule_slots(b: &AInfBimodule, k: usize, l: usize) -> Vec<&Basis> {
    let mut slots = vec![&b.left.basis; k];
    slots.push(&b.basis);
    slots.extend(std::iter::repeat_n(&b.right.basis, l));
    slots
}

fn write_bimodule(out: &mut String, b: &AInfBimodule) {
    out.push_str(&format!(
        "bimodule {} left={} right={} kmax={}\n",
        b.name, b.left.name, b.right.name, b.kmax
    ));
    write_gens(out, &b.basis);
    for ((k, l), op) in &b.ops {
        write_op(out, &format!("n{k},{l}"), op, &bimodule_slots(b, *k, *l), &b.basis);
    }
}

fn write_complex(out: &mut String, c: &ComplexDoc) {
    out.push_str(&format!("complex {}\n", c.name));
    write_gens(out, &c.basis);
    write_op(out, "d", &c.d, &[&c.basis], &c.basis);
    if let Some(f) = &c.f {
        write_op(out, "f", f, &[&c.basis], &c.basis);
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Copy, Debug)]
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Tok {
                    text: &line[b..byte],
                    col: c + 1,
                });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push(Tok {
            text: &line[b..],
            col: c + 1,
        });
    }
    out
}

struct Ctx {
    line: usize,
}

impl Ctx {
    fn syntax(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: col,
            message: msg.into(),
        }
    }

    fn semantic(&self, msg: impl Into<String>) -> Error {
        Error::Semantic {
            line: self.line,
            message: msg.into(),
        }
    }
}

fn parse_int<T: std::str::FromStr>(cx: &Ctx, tok: Tok, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| cx.syntax(tok.col, format!("expected {what}, found `{s}`")))
}

fn parse_filtration(cx: &Ctx, tok: Tok, s: &str) -> Result<BigRational> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = parse_int(cx, tok, p, "integer numerator")?;
    let q: BigInt = parse_int(cx, tok, q, "integer denominator")?;
    if q.is_zero() {
        return Err(cx.syntax(tok.col, "zero denominator"));
    }
    Ok(BigRational::new(p, q))
}

fn is_symbol(s: &str) -> bool {
    !s.is_empty()
        && !s.contains(['*', '=', ':'])
        && !s.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+')
}

/// `key=value` attributes after a header keyword.
fn attributes<'a>(cx: &Ctx, toks: &[Tok<'a>], allowed: &[&str]) -> Result<BTreeMap<&'a str, (Tok<'a>, &'a str)>> {
    let mut out = BTreeMap::new();
    for t in toks {
        let Some((k, v)) = t.text.split_once('=') else {
            return Err(cx.syntax(t.col, format!("expected key=value, found `{}`", t.text)));
        };
        if !allowed.contains(&k) {
            return Err(cx.syntax(t.col, format!("unknown attribute `{k}`")));
        }
        if out.insert(k, (*t, v)).is_some() {
            return Err(cx.syntax(t.col, format!("repeated attribute `{k}`")));
        }
    }
    Ok(out)
}

fn required<'a>(
    cx: &Ctx,
    attrs: &BTreeMap<&str, (Tok<'a>, &'a str)>,
    key: &str,
    at: usize,
) -> Result<(Tok<'a>, &'a str)> {
    attrs
        .get(key)
        .copied()
        .ok_or_else(|| cx.syntax(at, format!("missing `{key}=`")))
}

/// Parse `3*x - 1*c`, a bare symbol, or `0`.
pub fn parse_element(text: &str, basis: &Basis) -> Result<Element> {
    let cx = Ctx { line: 1 };
    parse_element_tokens(&cx, &tokenize(text), basis, 1)
}

fn parse_element_tokens(cx: &Ctx, toks: &[Tok], basis: &Basis, end_col: usize) -> Result<Element> {
    if toks.is_empty() {
        return Err(cx.syntax(end_col, "expected an element"));
    }
    if toks.len() == 1 && toks[0].text == "0" {
        return Ok(Element::zero());
    }
    let mut out = Element::zero();
    let mut i = 0;
    let mut sign = BigInt::one();
    while i < toks.len() {
        if i > 0 {
            sign = match toks[i].text {
                "+" => BigInt::one(),
                "-" => -BigInt::one(),
                other => return Err(cx.syntax(toks[i].col, format!("expected `+` or `-`, found `{other}`"))),
            };
            i += 1;
            if i == toks.len() {
                return Err(cx.syntax(toks[i - 1].col + 1, "dangling sign"));
            }
        }
        let t = toks[i];
        let (coeff, sym) = match t.text.split_once('*') {
            Some((c, s)) => (parse_int::<BigInt>(cx, t, c, "integer coefficient")?, s),
            None => match t.text.strip_prefix('-') {
                Some(s) => (-BigInt::one(), s),
                None => (BigInt::one(), t.text),
            },
        };
        if !is_symbol(sym) {
            return Err(cx.syntax(t.col, format!("expected a generator, found `{sym}`")));
        }
        let g = basis
            .index_of(sym)
            .map_err(|_| cx.semantic(format!("unknown generator `{sym}`")))?;
        out.add_term(g, coeff * &sign);
        i += 1;
    }
    Ok(out)
}

enum Pending {
    Algebra(CurvedAInfAlgebra),
    Module(AInfModule, Option<Element>),
    Bimodule(AInfBimodule),
    Complex(ComplexDoc),
}

impl Pending {
    fn basis_mut(&mut self) -> &mut Basis {
        match self {
            Pending::Algebra(a) => &mut a.basis,
            Pending::Module(m, _) => &mut m.basis,
            Pending::Bimodule(b) => &mut b.basis,
            Pending::Complex(c) => &mut c.basis,
        }
    }

    fn has_ops(&self) -> bool {
        match self {
            Pending::Algebra(a) => !a.ops.is_empty() || a.unit.is_some(),
            Pending::Module(m, u) => !m.ops.is_empty() || u.is_some(),
            Pending::Bimodule(b) => !b.ops.is_empty(),
            Pending::Complex(c) => !c.d.is_empty() || c.f.is_some(),
        }
    }

    fn finish(self) -> Document {
        match self {
            Pending::Algebra(a) => Document::Algebra(a),
            Pending::Module(module, cyclic) => Document::Module(ModuleDoc { module, cyclic }),
            Pending::Bimodule(b) => Document::Bimodule(b),
            Pending::Complex(c) => Document::Complex(c),
        }
    }
}

fn lookup<'c>(cx: &Ctx, tok: Tok, name: &str, known: &'c [CurvedAInfAlgebra]) -> Result<&'c CurvedAInfAlgebra> {
    known
        .iter()
        .rev()
        .find(|a| a.name == name)
        .ok_or_else(|| cx.semantic(format!("unknown algebra `{name}` (column {})", tok.col)))
}

/// Parse every document in `text`. `context` supplies algebras referenced by
/// module headers that are not defined in the same file.
pub fn parse(text: &str, context: &[CurvedAInfAlgebra]) -> Result<Vec<Document>> {
    let mut known: Vec<CurvedAInfAlgebra> = context.to_vec();
    let mut docs = Vec::new();
    let mut cur: Option<Pending> = None;
    for (n, raw) in text.split('\n').enumerate() {
        let cx = Ctx { line: n + 1 };
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokenize(line);
        let Some(&head) = toks.first() else { continue };
        let rest = &toks[1..];
        let header = matches!(head.text, "algebra" | "module" | "bimodule" | "complex");
        if header {
            if let Some(p) = cur.take() {
                let d = p.finish();
                if let Document::Algebra(a) = &d {
                    known.push(a.clone());
                }
                docs.push(d);
            }
            let Some(&name) = rest.first() else {
                return Err(cx.syntax(head.col + head.text.len(), "missing name"));
            };
            if !is_symbol(name.text) {
                return Err(cx.syntax(name.col, format!("bad name `{}`", name.text)));
            }
            let at = name.col + name.text.len();
            cur = Some(match head.text {
                "algebra" => {
                    let attrs = attributes(&cx, &rest[1..], &["kmax"])?;
                    let (t, v) = required(&cx, &attrs, "kmax", at)?;
                    let kmax = parse_int(&cx, t, v, "integer")?;
                    Pending::Algebra(CurvedAInfAlgebra::new(name.text, Basis::new(), kmax))
                }
                "module" => {
                    let attrs = attributes(&cx, &rest[1..], &["side", "over", "kmax"])?;
                    let (t, v) = required(&cx, &attrs, "kmax", at)?;
                    let kmax = parse_int(&cx, t, v, "integer")?;
                    let (t, side) = required(&cx, &attrs, "side", at)?;
                    let side = match side {
                        "left" => Side::Left,
                        "right" => Side::Right,
                        _ => return Err(cx.syntax(t.col, "side must be `left` or `right`")),
                    };
                    let (t, over) = required(&cx, &attrs, "over", at)?;
                    let alg = lookup(&cx, t, over, &known)?.clone();
                    Pending::Module(AInfModule::new(name.text, side, alg, Basis::new(), kmax), None)
                }
                "bimodule" => {
                    let attrs = attributes(&cx, &rest[1..], &["left", "right", "kmax"])?;
                    let (t, v) = required(&cx, &attrs, "kmax", at)?;
                    let kmax = parse_int(&cx, t, v, "integer")?;
                    let (t, l) = required(&cx, &attrs, "left", at)?;
                    let left = lookup(&cx, t, l, &known)?.clone();
                    let (t, r) = required(&cx, &attrs, "right", at)?;
                    let right = lookup(&cx, t, r, &known)?.clone();
                    Pending::Bimodule(AInfBimodule::new(name.text, left, right, Basis::new(), kmax))
                }
                _ => {
                    attributes(&cx, &rest[1..], &[])?;
                    Pending::Complex(ComplexDoc {
                        name: name.text.to_string(),
                        basis: Basis::new(),
                        d: MultilinearOp::new(1, 1),
                        f: None,
                    })
                }
            });
            continue;
        }
        let Some(p) = cur.as_mut() else {
            return Err(cx.syntax(head.col, "expected a header (algebra, module, bimodule or complex)"));
        };
        match head.text {
            "gen" => {
                if p.has_ops() {
                    return Err(cx.semantic("generators must precede unit, op and cyclic lines"));
                }
                parse_gen(&cx, head, rest, p.basis_mut())?;
            }
            "unit" => {
                let Pending::Algebra(a) = p else {
                    return Err(cx.semantic("`unit` is only valid in an algebra"));
                };
                let [t] = rest else {
                    return Err(cx.syntax(head.col, "expected `unit <symbol>`"));
                };
                if a.unit.is_some() {
                    return Err(cx.semantic("unit given twice"));
                }
                let u = a
                    .basis
                    .index_of(t.text)
                    .map_err(|_| cx.semantic(format!("unknown generator `{}`", t.text)))?;
                if a.basis.degree(u) != 0 {
                    return Err(cx.semantic(format!("unit `{}` must have degree 0", t.text)));
                }
                a.unit = Some(u);
            }
            "cyclic" => {
                let Pending::Module(m, u) = p else {
                    return Err(cx.semantic("`cyclic` is only valid in a module"));
                };
                if u.is_some() {
                    return Err(cx.semantic("cyclic element given twice"));
                }
                *u = Some(parse_element_tokens(&cx, rest, &m.basis, head.col + head.text.len())?);
            }
            "op" => parse_op(&cx, head, rest, p)?,
            other => return Err(cx.syntax(head.col, format!("unknown keyword `{other}`"))),
        }
    }
    if let Some(p) = cur.take() {
        docs.push(p.finish());
    }
    Ok(docs)
}

fn parse_gen(cx: &Ctx, head: Tok, rest: &[Tok], basis: &mut Basis) -> Result<()> {
    let Some(&sym) = rest.first() else {
        return Err(cx.syntax(head.col + 3, "missing generator symbol"));
    };
    if !is_symbol(sym.text) {
        return Err(cx.syntax(sym.col, format!("bad generator symbol `{}`", sym.text)));
    }
    let attrs = attributes(cx, &rest[1..], &["deg", "filt", "obj"])?;
    let (t, v) = required(cx, &attrs, "deg", sym.col + sym.text.len())?;
    let mut g = Generator::new(sym.text, parse_int(cx, t, v, "integer degree")?);
    if let Some(&(t, v)) = attrs.get("filt") {
        g = g.with_filtration(parse_filtration(cx, t, v)?);
    }
    if let Some(&(_, v)) = attrs.get("obj") {
        g = g.with_object(match v.split_once(',') {
            Some((s, t)) => ObjTag::Hom(s.into(), t.into()),
            None => ObjTag::At(v.into()),
        });
    }
    basis
        .push(g)
        .map_err(|_| cx.semantic(format!("duplicate generator `{}`", sym.text)))?;
    Ok(())
}

/// Which operation an `op` line names, with its arity split.
enum OpLabel {
    M(usize),
    N(usize),
    NN(usize, usize),
    D,
    F,
}

fn parse_label(cx: &Ctx, tok: Tok) -> Result<OpLabel> {
    let Some(body) = tok.text.strip_suffix(':') else {
        return Err(cx.syntax(tok.col, format!("expected `<op>:`, found `{}`", tok.text)));
    };
    let num = |s: &str| parse_int::<usize>(cx, tok, s, "operation index");
    if body == "d" {
        return Ok(OpLabel::D);
    }
    if body == "f" {
        return Ok(OpLabel::F);
    }
    if let Some(k) = body.strip_prefix('m') {
        return Ok(OpLabel::M(num(k)?));
    }
    if let Some(k) = body.strip_prefix('n') {
        return Ok(match k.split_once(',') {
            Some((k, l)) => OpLabel::NN(num(k)?, num(l)?),
            None => OpLabel::N(num(k)?),
        });
    }
    Err(cx.syntax(tok.col, format!("unknown operation `{body}`")))
}

fn parse_op(cx: &Ctx, head: Tok, rest: &[Tok], p: &mut Pending) -> Result<()> {
    let Some(&label_tok) = rest.first() else {
        return Err(cx.syntax(head.col + 2, "missing operation label"));
    };
    let label = parse_label(cx, label_tok)?;
    let arrow = rest
        .iter()
        .position(|t| t.text == "->")
        .ok_or_else(|| cx.syntax(label_tok.col, "missing `->`"))?;
    let inputs = &rest[1..arrow];
    let out_toks = &rest[arrow + 1..];
    let end_col = rest[arrow].col + 2;
    let entry = format!(
        "{} {}",
        label_tok.text,
        inputs.iter().map(|t| t.text).collect::<Vec<_>>().join(" ")
    );
    let entry = entry.trim_end().to_string();

    // (slot bases, output basis, op, intrinsic degree, kmax bound check)
    let resolve = |slots: &[&Basis]| -> Result<(Vec<usize>, i64)> {
        if slots.len() != inputs.len() {
            return Err(cx.semantic(format!(
                "{entry}: expected {} inputs, found {}",
                slots.len(),
                inputs.len()
            )));
        }
        let mut key = Vec::new();
        let mut deg = 0;
        for (b, t) in slots.iter().zip(inputs) {
            let g = b
                .index_of(t.text)
                .map_err(|_| cx.semantic(format!("{entry}: unknown generator `{}`", t.text)))?;
            deg += b.degree(g);
            key.push(g);
        }
        Ok((key, deg))
    };
    let insert = |op: &mut MultilinearOp, key: Vec<usize>, value: Element, target: &Basis, want: i64| -> Result<()> {
        if let Some(d) = value.degree(target) {
            if !value.is_homogeneous(target) || d != want {
                return Err(cx.semantic(format!(
                    "degree mismatch in entry `{entry}`: expected output degree {want}, found {d}"
                )));
            }
        }
        if op.get(&key).is_some() {
            return Err(cx.semantic(format!("duplicate entry `{entry}`")));
        }
        if !value.is_zero() {
            op.set(key, value);
        }
        Ok(())
    };
    let bound = |k: usize, kmax: usize| -> Result<()> {
        if k > kmax {
            Err(cx.semantic(format!("{entry}: arity {k} exceeds kmax={kmax}")))
        } else {
            Ok(())
        }
    };
    match (p, label) {
        (Pending::Algebra(a), OpLabel::M(k)) => {
            bound(k, a.kmax)?;
            let slots = vec![&a.basis; k];
            let (key, deg) = resolve(&slots)?;
            let value = parse_element_tokens(cx, out_toks, &a.basis, end_col)?;
            let want = deg + 2 - k as i64;
            let mut op = a.ops.remove(&k).unwrap_or_else(|| MultilinearOp::new(k, 2 - k as i64));
            let r = insert(&mut op, key, value, &a.basis, want);
            a.ops.insert(k, op);
            r
        }
        (Pending::Module(m, _), OpLabel::N(k)) => {
            bound(k, m.kmax)?;
            let (key, deg) = resolve(&module_slots(m, k))?;
            let value = parse_element_tokens(cx, out_toks, &m.basis, end_col)?;
            let want = deg + 1 - k as i64;
            let mut op = m
                .ops
                .remove(&k)
                .unwrap_or_else(|| MultilinearOp::new(k + 1, 1 - k as i64));
            let r = insert(&mut op, key, value, &m.basis, want);
            m.ops.insert(k, op);
            r
        }
        (Pending::Bimodule(b), OpLabel::NN(k, l)) => {
            bound(k + l, b.kmax)?;
            let (key, deg) = resolve(&bimodule_slots(b, k, l))?;
            let value = parse_element_tokens(cx, out_toks, &b.basis, end_col)?;
            let kl = (k + l) as i64;
            let mut op = b
                .ops
                .remove(&(k, l))
                .unwrap_or_else(|| MultilinearOp::new(k + l + 1, 1 - kl));
            let r = insert(&mut op, key, value, &b.basis, deg + 1 - kl);
            b.ops.insert((k, l), op);
            r
        }
        (Pending::Complex(c), OpLabel::D) => {
            let (key, deg) = resolve(&[&c.basis])?;
            let value = parse_element_tokens(cx, out_toks, &c.basis, end_col)?;
            insert(&mut c.d, key, value, &c.basis, deg + 1)
        }
        (Pending::Complex(c), OpLabel::F) => {
            let (key, deg) = resolve(&[&c.basis])?;
            let value = parse_element_tokens(cx, out_toks, &c.basis, end_col)?;
            let f = c.f.get_or_insert_with(|| MultilinearOp::new(1, 0));
            insert(f, key, value, &c.basis, deg)
        }
        _ => Err(cx.syntax(
            label_tok.col,
            format!("operation `{}` does not belong here", label_tok.text),
        )),
    }
}

/// Parse a file that must contain exactly one algebra.
pub fn parse_algebra(text: &str) -> Result<CurvedAInfAlgebra> {
    match parse(text, &[])?.as_slice() {
        [Document::Algebra(a)] => Ok(a.clone()),
        _ => Err(Error::Semantic {
            line: 1,
            message: "expected exactly one algebra document".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graded::int;

    const MINIMAL: &str = "algebra pt kmax=0\ngen e deg=0 filt=0/1\n";

    #[test]
    fn minimal_round_trip() {
        let docs = parse(MINIMAL, &[]).unwrap();
        assert_eq!(serialize(&docs), MINIMAL);
    }

    #[test]
    fn fixtures_round_trip() {
        let algebras = vec![
            fixtures::s1(),
            fixtures::truncated_poly(),
            fixtures::group_ring(3),
            fixtures::exterior(2),
            fixtures::random_curved(4).0,
        ];
        for a in algebras {
            let doc = Document::Algebra(a);
            let text = doc.to_text();
            let back = parse(&text, &[]).unwrap();
            assert_eq!(back, vec![doc.clone()], "{text}");
            assert_eq!(serialize(&back), text);
        }
        let m = fixtures::s1_module();
        let docs = vec![
            Document::Algebra(m.algebra.clone()),
            Document::Module(ModuleDoc {
                module: m,
                cyclic: Some(Element::gen(0)),
            }),
        ];
        let text = serialize(&docs);
        assert_eq!(parse(&text, &[]).unwrap(), docs);
        let b = crate::modcat::AInfBimodule::diagonal(&fixtures::truncated_poly());
        let docs = vec![Document::Algebra(b.left.clone()), Document::Bimodule(b)];
        let text = serialize(&docs);
        assert_eq!(parse(&text, &[]).unwrap(), docs);
    }

    #[test]
    fn s1_document_checks() {
        let a = parse_algebra(&Document::Algebra(fixtures::s1()).to_text()).unwrap();
        assert!(a.check_relations(a.default_max_arity()).is_empty());
    }

    #[test]
    fn elements() {
        let b = Basis::from_generators([Generator::new("x", 0), Generator::new("c", 0)]).unwrap();
        let e = parse_element("3*x - 1*c", &b).unwrap();
        assert_eq!(e, Element::from_terms([(0, int(3)), (1, int(-1))]));
        assert_eq!(b.fmt_element(&e), "3*x - 1*c");
        assert_eq!(
            parse_element("-2*c + x", &b).unwrap(),
            Element::from_terms([(0, int(1)), (1, int(-2))])
        );
        assert_eq!(parse_element("0", &b).unwrap(), Element::zero());
        assert!(matches!(parse_element("3*y", &b), Err(Error::Semantic { .. })));
        assert!(matches!(parse_element("3*x +", &b), Err(Error::Syntax { .. })));
    }

    #[test]
    fn degree_violation_names_entry() {
        let text = "algebra a kmax=2\ngen e deg=0 filt=0/1\ngen x deg=1 filt=1/1\nop m2: x x -> 1*x\n";
        match parse(text, &[]) {
            Err(Error::Semantic { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("m2: x x"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let e = parse("algebra a kmax=two\n", &[]).unwrap_err();
        assert_eq!(
            e,
            Error::Syntax {
                line: 1,
                column: 11,
                message: "expected integer, found `two`".into()
            }
        );
        let e = parse("gen x deg=0\n", &[]).unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 1, column: 1, .. }));
        let e = parse("algebra a kmax=1\ngen x deg=0 filt=1/0\n", &[]).unwrap_err();
        assert!(matches!(
            e,
            Error::Syntax {
                line: 2,
                column: 13,
                ..
            }
        ));
        let e = parse("module m side=left over=zz kmax=1\n", &[]).unwrap_err();
        assert!(matches!(e, Error::Semantic { line: 1, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a point\n\nalgebra pt kmax=0   # trailing\ngen e deg=0 filt=0/1\n";
        assert_eq!(serialize(&parse(text, &[]).unwrap()), MINIMAL);
    }

    #[test]
    fn integer_filtration_shorthand() {
        let docs = parse("algebra a kmax=0\ngen e deg=0 filt=2\n", &[]).unwrap();
        assert_eq!(serialize(&docs), "algebra a kmax=0\ngen e deg=0 filt=2/1\n");
    }
}
