//! Command-line driver. Every subcommand returns report lines of the form
//! `KIND key=value ...` and an exit status: 0 for a clean report, 1 when
//! the report contains findings, 2 for errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::ainfty::CurvedAInfAlgebra;
use crate::error::{Error, Result};
use crate::format::{self, ComplexDoc, Document, ModuleDoc};
use crate::graded::{Element, MultilinearOp};
use crate::homology::{cohomology, ChainMap, FiniteComplex};
use crate::limits::{direct_limit, truncation, truncation_inclusion, verify_system, DirectedSystem};
use crate::mc::{solve_bounding_cochain, verify_cyclic};
use crate::modcat::{is_representable_on_object, tensor_dg, yoneda_left};
use crate::trees::{all_strata, enumerate_strata, Moduli};

pub const MAX_ARITY_ENV: &str = "AINFTY_MAX_ARITY";

#[derive(Debug, Parser)]
#[command(name = "ainfty", version, about = "Exact A-infinity structure checks and solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModuliArg {
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "N", alias = "n")]
    N,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the relations of every document in a file.
    Check {
        file: PathBuf,
        /// Files defining algebras that modules in FILE act through.
        #[arg(long = "algebra")]
        algebras: Vec<PathBuf>,
        #[arg(long)]
        max_arity: Option<usize>,
    },
    /// Deform the last structure in a file by a Maurer-Cartan element.
    Deform {
        file: PathBuf,
        #[arg(long = "algebra")]
        algebras: Vec<PathBuf>,
        /// Element of the (left) algebra.
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        /// Element of the right algebra, for bimodules.
        #[arg(long, allow_hyphen_values = true)]
        right_element: Option<String>,
        #[arg(long)]
        max_arity: Option<usize>,
        /// Write the deformed structure here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve for the bounding cochain determined by a cyclic element.
    SolveBc {
        algebra: PathBuf,
        #[arg(long)]
        module: PathBuf,
        /// Module element; defaults to the module's `cyclic` line.
        #[arg(long, allow_hyphen_values = true)]
        cyclic: Option<String>,
    },
    /// Integer cohomology of a complex, a flat algebra or a flat module.
    Cohomology {
        file: PathBuf,
        #[arg(long = "algebra")]
        algebras: Vec<PathBuf>,
    },
    /// Print the left Yoneda module of an algebra.
    Yoneda {
        algebra: PathBuf,
        #[arg(long)]
        object: Option<String>,
    },
    /// Decide whether a module is representable.
    Representable {
        algebra: PathBuf,
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        object: Option<String>,
        #[arg(long, default_value_t = 3)]
        length: usize,
    },
    /// Print the tensor product of two dg algebras.
    Tensor { left: PathBuf, right: PathBuf },
    /// Enumerate strata of associahedra (M) or multiplihedra (N).
    Trees {
        #[arg(long, value_enum)]
        moduli: ModuliArg,
        #[arg(long)]
        leaves: usize,
        #[arg(long)]
        codim: Option<usize>,
        #[arg(long)]
        count_only: bool,
    },
    /// Direct limit of the filtration truncations of a complex.
    Limit { file: PathBuf },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub lines: Vec<String>,
}

impl Outcome {
    fn clean(lines: Vec<String>) -> Self {
        Outcome { status: 0, lines }
    }

    fn findings(lines: Vec<String>, found: bool) -> Self {
        Outcome {
            status: i32::from(found),
            lines,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> Error {
    match e {
        Error::Syntax { line, column, message } => Error::Syntax {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        Error::Semantic { line, message } => Error::Semantic {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

fn load(path: &Path, context: &[CurvedAInfAlgebra]) -> Result<Vec<Document>> {
    format::parse(&read(path)?, context).map_err(|e| located(path, e))
}

fn algebras_of(docs: &[Document]) -> Vec<CurvedAInfAlgebra> {
    docs.iter()
        .filter_map(|d| match d {
            Document::Algebra(a) => Some(a.clone()),
            _ => None,
        })
        .collect()
}

fn load_context(paths: &[PathBuf]) -> Result<Vec<CurvedAInfAlgebra>> {
    let mut out = Vec::new();
    for p in paths {
        let docs = load(p, &out)?;
        out.extend(algebras_of(&docs));
    }
    Ok(out)
}

fn load_algebra(path: &Path) -> Result<CurvedAInfAlgebra> {
    let docs = load(path, &[])?;
    algebras_of(&docs)
        .pop()
        .ok_or_else(|| Error::Usage(format!("{} defines no algebra", path.display())))
}

fn load_module(path: &Path, context: &[CurvedAInfAlgebra]) -> Result<ModuleDoc> {
    load(path, context)?
        .into_iter()
        .rev()
        .find_map(|d| match d {
            Document::Module(m) => Some(m),
            _ => None,
        })
        .ok_or_else(|| Error::Usage(format!("{} defines no module", path.display())))
}

/// Flag, then `AINFTY_MAX_ARITY`, then `K_max + 2`.
pub fn max_arity(flag: Option<usize>, kmax: usize) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(MAX_ARITY_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{MAX_ARITY_ENV} must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(kmax + 2),
    }
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Check {
            file,
            algebras,
            max_arity: flag,
        } => {
            let ctx = load_context(algebras)?;
            check(&load(file, &ctx)?, *flag)
        }
        Command::Deform {
            file,
            algebras,
            element,
            right_element,
            max_arity: flag,
            output,
        } => {
            let ctx = load_context(algebras)?;
            let docs = load(file, &ctx)?;
            deform(&docs, element, right_element.as_deref(), *flag, output.as_deref())
        }
        Command::SolveBc {
            algebra,
            module,
            cyclic,
        } => {
            let c = load_algebra(algebra)?;
            let doc = load_module(module, std::slice::from_ref(&c))?;
            solve_bc(&c, &doc, cyclic.as_deref())
        }
        Command::Cohomology { file, algebras } => {
            let ctx = load_context(algebras)?;
            let docs = load(file, &ctx)?;
            let doc = docs.last().ok_or_else(|| Error::Usage("empty file".into()))?;
            let c = complex_of(doc)?;
            Ok(Outcome::clean(cohomology(&c)?.report_lines()))
        }
        Command::Yoneda { algebra, object } => {
            let a = load_algebra(algebra)?;
            let m = yoneda_left(&a, object.as_deref());
            let text = Document::Module(ModuleDoc {
                module: m,
                cyclic: None,
            })
            .to_text();
            Ok(Outcome::clean(text.lines().map(String::from).collect()))
        }
        Command::Representable {
            algebra,
            module,
            object,
            length,
        } => {
            let a = load_algebra(algebra)?;
            let doc = load_module(module, std::slice::from_ref(&a))?;
            representable(&doc, object.as_deref(), *length)
        }
        Command::Tensor { left, right } => {
            let t = tensor_dg(&load_algebra(left)?, &load_algebra(right)?)?;
            Ok(Outcome::clean(
                Document::Algebra(t).to_text().lines().map(String::from).collect(),
            ))
        }
        Command::Trees {
            moduli,
            leaves,
            codim,
            count_only,
        } => Ok(trees(*moduli, *leaves, *codim, *count_only)),
        Command::Limit { file } => {
            let docs = load(file, &[])?;
            match docs.last() {
                Some(Document::Complex(c)) => limit(c),
                _ => Err(Error::Usage("limit expects a complex document".into())),
            }
        }
    }
}

fn check(docs: &[Document], flag: Option<usize>) -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut found = false;
    for doc in docs {
        let name = doc.name();
        let (report, basis, kmax, curved_ok) = match doc {
            Document::Algebra(a) => {
                a.validate()?;
                if a.unit.is_some() && !a.check_unit()? {
                    found = true;
                    lines.push(format!("UNIT doc={name} status=fails"));
                }
                let n = max_arity(flag, a.kmax)?;
                (a.check_relations(n), a.basis.clone(), n, false)
            }
            Document::Module(m) => {
                let m = &m.module;
                m.validate()?;
                let n = max_arity(flag, m.kmax.max(m.algebra.kmax))?;
                let r = m.check_relations(n);
                let ok = m.is_curved_consistent(&r);
                (r, m.pack().basis, n, ok)
            }
            Document::Bimodule(b) => {
                b.validate()?;
                let n = max_arity(flag, b.kmax.max(b.left.kmax).max(b.right.kmax))?;
                (b.check_relations(n), b.pack().basis, n, false)
            }
            Document::Complex(c) => {
                let fc = FiniteComplex::from_op(&c.basis, &c.d)?;
                let bad: Vec<i64> = fc
                    .dims
                    .keys()
                    .filter(|&&n| !fc.d(n + 1).mul(&fc.d(n)).map(|m| m.is_zero()).unwrap_or(true))
                    .copied()
                    .collect();
                for n in &bad {
                    lines.push(format!("DSQUARED doc={name} degree={n}"));
                }
                found |= !bad.is_empty();
                lines.push(format!("SUMMARY doc={name} kind=complex findings={}", bad.len()));
                continue;
            }
        };
        if curved_ok {
            lines.push(format!("CURVED doc={name} residual_arity=1"));
        }
        let residuals = report.lines(&basis);
        found |= !report.is_empty();
        lines.extend(residuals.into_iter().map(|l| format!("{l} doc={name}")));
        lines.push(format!(
            "SUMMARY doc={name} kind={} max_arity={kmax} findings={}",
            doc.kind(),
            report.residuals.len()
        ));
    }
    Ok(Outcome::findings(lines, found))
}

fn deform(
    docs: &[Document],
    element: &str,
    right: Option<&str>,
    flag: Option<usize>,
    output: Option<&Path>,
) -> Result<Outcome> {
    let doc = docs.last().ok_or_else(|| Error::Usage("empty file".into()))?;
    let mut lines = Vec::new();
    let (deformed, report, basis, n) = match doc {
        Document::Algebra(a) => {
            let b = format::parse_element(element, &a.basis)?;
            let res = a.mc_residual(&b)?;
            lines.push(format!(
                "CURVATURE value={}",
                a.basis.fmt_element(&res).replace(' ', "")
            ));
            let d = a.deform(&b)?;
            let n = max_arity(flag, d.kmax)?;
            let r = d.check_relations(n);
            (Document::Algebra(d.clone()), r, d.basis.clone(), n)
        }
        Document::Module(m) => {
            let b = format::parse_element(element, &m.module.algebra.basis)?;
            let d = m.module.deform(&b)?;
            let n = max_arity(flag, d.kmax.max(d.algebra.kmax))?;
            let r = d.check_relations(n);
            let basis = d.pack().basis;
            (
                Document::Module(ModuleDoc {
                    module: d,
                    cyclic: m.cyclic.clone(),
                }),
                r,
                basis,
                n,
            )
        }
        Document::Bimodule(p) => {
            let b0 = format::parse_element(element, &p.left.basis)?;
            let b1 = match right {
                Some(s) => format::parse_element(s, &p.right.basis)?,
                None => Element::zero(),
            };
            let d = p.deform(&b0, &b1)?;
            let n = max_arity(flag, d.kmax.max(d.left.kmax).max(d.right.kmax))?;
            let r = d.check_relations(n);
            let basis = d.pack().basis;
            (Document::Bimodule(d), r, basis, n)
        }
        Document::Complex(_) => return Err(Error::Usage("cannot deform a complex".into())),
    };
    lines.extend(report.lines(&basis));
    lines.push(format!(
        "DEFORMED doc={} kind={} max_arity={n} findings={}",
        deformed.name(),
        deformed.kind(),
        report.residuals.len()
    ));
    if let Some(path) = output {
        let mut text = String::new();
        if let Document::Module(m) = &deformed {
            text.push_str(&Document::Algebra(m.module.algebra.clone()).to_text());
            text.push('\n');
        }
        text.push_str(&deformed.to_text());
        std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(Outcome::findings(lines, !report.is_empty()))
}

fn solve_bc(c: &CurvedAInfAlgebra, doc: &ModuleDoc, cyclic: Option<&str>) -> Result<Outcome> {
    let u = match (cyclic, &doc.cyclic) {
        (Some(s), _) => format::parse_element(s, &doc.module.basis)?,
        (None, Some(u)) => u.clone(),
        (None, None) => return Err(Error::Usage("no cyclic element given".into())),
    };
    let rejected = |e: Error| Outcome::findings(vec![format!("REJECTED reason={e}")], true);
    let cert = match verify_cyclic(c, &doc.module, &u) {
        Ok(cert) => cert,
        Err(e @ (Error::Io(_) | Error::Usage(_))) => return Err(e),
        Err(e) => return Ok(rejected(e)),
    };
    match solve_bounding_cochain(c, &doc.module, &cert) {
        Ok(b) => Ok(Outcome::clean(vec![format!("b = {}", c.basis.fmt_element(&b))])),
        Err(e) => Ok(rejected(e)),
    }
}

fn complex_of(doc: &Document) -> Result<FiniteComplex> {
    let c = match doc {
        Document::Complex(c) => FiniteComplex::from_op(&c.basis, &c.d)?,
        Document::Algebra(a) => {
            if !a.is_flat() {
                return Err(Error::NotDg);
            }
            let d = a.op(1).cloned().unwrap_or_else(|| MultilinearOp::new(1, 1));
            FiniteComplex::from_op(&a.basis, &d)?
        }
        Document::Module(m) => FiniteComplex::from_op(&m.module.basis, &m.module.differential())?,
        Document::Bimodule(_) => return Err(Error::Usage("cohomology of a bimodule is not supported".into())),
    };
    Ok(c)
}

fn representable(doc: &ModuleDoc, object: Option<&str>, len: usize) -> Result<Outcome> {
    let r = is_representable_on_object(&doc.module, object, len)?;
    let mut lines = vec![format!(
        "REPRESENTABLE value={} reason={}",
        r.representable,
        r.reason.replace(' ', "_")
    )];
    if let Some(w) = &r.witness {
        let yon = yoneda_left(&doc.module.algebra, object);
        if let Some(op) = w.component(1) {
            for (key, v) in op.entries() {
                lines.push(format!(
                    "WITNESS input={} value={}",
                    yon.basis.get(key[0]).name,
                    doc.module.basis.fmt_element(v).replace(' ', "")
                ));
            }
        }
    }
    Ok(Outcome::findings(lines, !r.representable))
}

fn trees(moduli: ModuliArg, k: usize, codim: Option<usize>, count_only: bool) -> Outcome {
    let m = match moduli {
        ModuliArg::M => Moduli::M,
        ModuliArg::N => Moduli::N,
    };
    let lines = match (codim, count_only) {
        (Some(c), true) => vec![enumerate_strata(m, k, c).len().to_string()],
        (Some(c), false) => enumerate_strata(m, k, c).iter().map(|s| s.encode()).collect(),
        (None, true) => all_strata(m, k)
            .iter()
            .map(|(c, v)| format!("codim={c} count={}", v.len()))
            .collect(),
        (None, false) => all_strata(m, k)
            .values()
            .flat_map(|v| v.iter().map(|s| s.encode()))
            .collect(),
    };
    Outcome::clean(lines)
}

/// Truncations at every filtration level, each mapped to itself by `f`
/// (identity when absent), with identity correctors.
fn limit(c: &ComplexDoc) -> Result<Outcome> {
    let f = c.f.clone().unwrap_or_else(|| {
        let mut id = MultilinearOp::new(1, 0);
        for g in 0..c.basis.len() {
            id.set(vec![g], Element::gen(g));
        }
        id
    });
    f.check_filtration(&c.basis, "f")?;
    let mut levels = c.basis.levels();
    levels.reverse();
    let truncs = levels
        .iter()
        .map(|l| truncation(&c.basis, &c.d, l))
        .collect::<Result<Vec<_>>>()?;
    if truncs.is_empty() {
        return Err(Error::Usage("empty complex".into()));
    }
    let fm = |deg: i64| crate::homology::op_matrix(&f, &c.basis.of_degree(deg), &c.basis.of_degree(deg));
    let maps: Vec<ChainMap> = truncs
        .iter()
        .map(|(tc, keep)| {
            let mut m = ChainMap::new(tc.clone(), tc.clone());
            for (deg, k) in keep {
                m.maps.insert(*deg, fm(*deg).select(k, k));
            }
            m
        })
        .collect();
    let inclusions: Vec<ChainMap> = truncs
        .windows(2)
        .map(|w| truncation_inclusion((&w[0].0, &w[0].1), (&w[1].0, &w[1].1)))
        .collect();
    let system = DirectedSystem {
        stages: truncs.iter().map(|t| t.0.clone()).collect(),
        targets: truncs.iter().map(|t| t.0.clone()).collect(),
        target_inclusions: inclusions.clone(),
        corrections: truncs[..truncs.len() - 1]
            .iter()
            .map(|t| ChainMap::identity(&t.0))
            .collect(),
        inclusions,
        maps,
    };
    let report = verify_system(&system);
    if !report.is_empty() {
        return Ok(Outcome::findings(report.lines(), true));
    }
    let l = direct_limit(&system)?;
    let mut lines = l.report_lines();
    let defects = l.restriction_defects()?;
    lines.push(format!("RESTRICTION defects={}", defects.len()));
    Ok(Outcome::findings(lines, !defects.is_empty()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pentagon_facets() {
        let o = trees(ModuliArg::M, 4, Some(1), true);
        assert_eq!(o, Outcome::clean(vec!["5".into()]));
    }

    #[test]
    fn explicit_arity_flag_wins() {
        assert_eq!(max_arity(Some(7), 2).unwrap(), 7);
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
