//! One function per subcommand. Each fills in a [`Report`]; errors are
//! turned into error reports by [`run_on_document`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde_json::{json, Value};

use ssdb_core::fleet::SignedSpace;
use ssdb_core::linalg;
use ssdb_core::{
    decompose, DecomposeOptions, ExtReal, LinearRelation, MaximalityMethod, OracleVerdict, PointSet, SsdbSpace,
    Subspace, Tolerance,
};

use crate::docs::{digest_of, parse_point, DocKind, Document};
use crate::report::{self, CliError, Exit, Report};

#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub tol: Tolerance,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Theorem,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RelationAction {
    Adjoint,
    Monotone,
    Maximal,
}

/// Subcommands that `batch` can apply to every document of a directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BatchCommand {
    Validate,
    CheckPositive,
    Complement,
    CheckMaximal,
}

impl BatchCommand {
    fn name(self) -> &'static str {
        match self {
            BatchCommand::Validate => "validate",
            BatchCommand::CheckPositive => "check-positive",
            BatchCommand::Complement => "complement",
            BatchCommand::CheckMaximal => "check-maximal",
        }
    }
}

/// Reads `path`, runs `body` and converts any failure into an error report.
pub fn run_on_document<F>(command: &str, path: &Path, ctx: Context, body: F) -> Report
where
    F: FnOnce(&Document, &mut Report) -> Result<(), CliError>,
{
    let doc = match Document::read(path) {
        Ok(doc) => doc,
        Err(e) => return Report::failed(command, String::new(), ctx.seed, ctx.tol, &e),
    };
    let mut report = Report::new(command, doc.digest(), ctx.seed, ctx.tol);
    match body(&doc, &mut report) {
        Ok(()) => report,
        Err(e) => Report::failed(command, doc.digest(), ctx.seed, ctx.tol, &e),
    }
}

pub fn validate(doc: &Document, ctx: Context, r: &mut Report) -> Result<(), CliError> {
    let space = doc.space(ctx.tol)?;
    let p = space.pairing();
    let n = space.dim();
    let signed = SignedSpace::from_space(&space);
    r.put("dim", json!(n));
    r.put("positive_dim", json!(signed.positive_dim()));
    r.put("negative_dim", json!(signed.negative_dim()));
    r.residual("symmetry", linalg::max_abs(&(p - p.transpose())));
    r.residual("involution", linalg::max_abs(&(p * p - DMatrix::identity(n, n))));
    r.set_verdict(true);
    Ok(())
}

pub fn check_positive(
    doc: &Document,
    ctx: Context,
    negative: bool,
    extend: Option<&str>,
    r: &mut Report,
) -> Result<(), CliError> {
    let tol = ctx.tol;
    r.put("sense", json!(if negative { "q-negative" } else { "q-positive" }));
    match doc.kind() {
        DocKind::Subspace => {
            let sub = doc.subspace(tol)?;
            r.put("dim", json!(sub.dim()));
            // q-negativity is q-positivity for -q.
            let oriented = if negative { sub.negated() } else { sub.clone() };
            if let Some(text) = extend {
                let c = point_in(&parse_point(text)?, sub.space())?;
                let extends = oriented.extends_q_positively(&c, tol)?;
                r.put("infimum", report::ext(oriented.inf_q_over_translate(&c, tol)?));
                r.residual("distance", sub.distance(&c)?);
                r.set_verdict(extends);
                return Ok(());
            }
            let verdict = oriented.is_q_positive(tol);
            let min = oriented.min_form_eigenvalue();
            let key = if negative { "max_form_eigenvalue" } else { "min_form_eigenvalue" };
            r.residual(key, if negative { -min } else { min });
            if !verdict {
                let w = bottom_direction(&oriented);
                r.put("q_at_witness", report::number(sub.space().q(&w)?));
                r.witness(&w);
            }
            r.set_verdict(verdict);
        }
        DocKind::PointSet => {
            let set = doc.pointset(tol)?;
            let set = match extend {
                Some(text) => {
                    let mut points = set.points().to_vec();
                    points.push(point_in(&parse_point(text)?, set.space())?);
                    PointSet::new(set.space(), points)?
                }
                None => set,
            };
            r.put("points", json!(set.points().len()));
            let violation =
                if negative { set.q_negativity_violation(tol) } else { set.q_positivity_violation(tol) };
            match violation {
                Some(v) => {
                    r.put("pair", json!([v.first, v.second]));
                    r.put("q_difference", report::number(v.value));
                    r.witness(&set.points()[v.first]);
                    r.witness(&set.points()[v.second]);
                    r.set_verdict(false);
                }
                None => r.set_verdict(true),
            }
        }
        _ => return Err(CliError::Parse("expected a subspace or point set document".into())),
    }
    Ok(())
}

pub fn complement(doc: &Document, ctx: Context, r: &mut Report) -> Result<(), CliError> {
    let sub = doc.subspace(ctx.tol)?;
    let a0 = sub.q_complement();
    let p = sub.space().pairing();
    r.put("dim", json!(sub.dim()));
    r.put("complement_dim", json!(a0.dim()));
    r.put("basis", report::columns(a0.basis()));
    r.residual("orthogonality", linalg::max_abs(&(sub.basis().transpose() * p * a0.basis())));
    r.residual("double_complement", a0.q_complement().projection_distance(&sub));
    if sub.is_q_positive(ctx.tol) {
        r.put("complement_q_negative", json!(a0.is_q_negative(ctx.tol)));
    }
    r.set_verdict(true);
    Ok(())
}

pub fn check_maximal(
    doc: &Document,
    ctx: Context,
    method: Method,
    trials: usize,
    r: &mut Report,
) -> Result<(), CliError> {
    let tol = ctx.tol;
    let sub = doc.subspace(tol)?;
    r.put("dim", json!(sub.dim()));
    match method {
        Method::Theorem => {
            r.put("method", json!("theorem"));
            let m = sub.is_maximal_q_positive(tol)?;
            r.residual("complement_max_eigenvalue", m.complement_max_eigenvalue);
            if let Some(w) = &m.witness {
                r.put("infimum", report::ext(sub.inf_q_over_translate(w, tol)?));
                r.witness(w);
            }
            r.set_verdict(m.maximal);
        }
        Method::Oracle => {
            r.put("method", json!("oracle"));
            r.put("trials", json!(trials));
            let verdict = sub.maximality_oracle(trials, ctx.seed, tol)?;
            if let OracleVerdict::NonMaximal { witness, trial, infimum } = &verdict {
                r.put("trial", json!(trial));
                r.put("infimum", report::ext(*infimum));
                r.witness(witness);
            }
            r.set_label(verdict.label(), verdict.is_maximal_probable());
        }
    }
    Ok(())
}

pub fn decomposition(doc: &Document, ctx: Context, point: &str, force: bool, r: &mut Report) -> Result<(), CliError> {
    let tol = ctx.tol;
    let sub = doc.subspace(tol)?;
    let c = point_in(&parse_point(point)?, sub.space())?;
    let d = decompose(&sub, &c, DecomposeOptions { force }, tol)?;
    for (name, value) in &d.residuals {
        r.residual(name, *value);
    }
    r.residual("pairing_gap", d.pairing_gap);
    r.put("a", report::vector(&d.a));
    r.put("n", report::vector(&d.nvec));
    r.put("d", report::vector(&d.d));
    r.put("preconditions_met", json!(d.preconditions_met));
    r.witness(&d.a);
    r.witness(&d.nvec);
    r.witness(&d.d);
    let bound = tol.abs * (1.0 + c.norm_squared());
    r.set_verdict(d.preconditions_met && d.within(bound));
    Ok(())
}

pub fn conjugate(doc: &Document, ctx: Context, at: &str, r: &mut Report) -> Result<(), CliError> {
    let tol = ctx.tol;
    let f = doc.functional(tol)?;
    let d = point_in(&parse_point(at)?, f.space())?;
    let conj = f.conjugate(&d, tol)?;
    r.put("value", report::ext(conj.value));
    if let Some(x) = &conj.maximizer {
        r.put("maximizer", report::vector(x));
    }
    // Independent path: the classical conjugate evaluated at iota(d).
    let classical = f.classical_conjugate_eval(&f.space().iota(&d)?, tol)?;
    match (conj.value, classical) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => r.residual("classical_gap", (a - b).abs()),
        (a, b) if a == b => r.residual("classical_gap", 0.0),
        _ => return Err(CliError::Inconsistent(format!("conjugate paths disagree: {} vs {}", conj.value, classical))),
    }
    r.set_label(if conj.value.is_finite() { "finite" } else { "+inf" }, true);
    Ok(())
}

pub fn relation(
    doc: &Document,
    ctx: Context,
    action: RelationAction,
    method: Option<&str>,
    r: &mut Report,
) -> Result<(), CliError> {
    let tol = ctx.tol;
    let rel = doc.relation(tol)?;
    r.put("n", json!(rel.n()));
    r.put("dim", json!(rel.subspace().dim()));
    match action {
        RelationAction::Adjoint => {
            r.put("action", json!("adjoint"));
            let adj = rel.adjoint(tol);
            r.put("adjoint_dim", json!(adj.subspace().dim()));
            r.put("basis", report::columns(adj.subspace().basis()));
            r.residual(
                "complement_vs_rho1_adjoint",
                rel.subspace().q_complement().projection_distance(adj.rho1().subspace()),
            );
            r.set_verdict(true);
        }
        RelationAction::Monotone => {
            r.put("action", json!("monotone"));
            let monotone = rel.is_monotone(tol);
            r.residual("min_form_eigenvalue", rel.subspace().min_form_eigenvalue());
            if !monotone {
                let w = bottom_direction(rel.subspace());
                let (x, xstar) = ssdb_core::relation::split(&w)?;
                r.put("pairing_at_witness", report::number(x.dot(&xstar)));
                r.witness(&w);
            }
            r.set_verdict(monotone);
        }
        RelationAction::Maximal => {
            r.put("action", json!("maximal"));
            maximal_monotone(&rel, tol, method, r)?;
        }
    }
    Ok(())
}

fn maximal_monotone(rel: &LinearRelation, tol: Tolerance, method: Option<&str>, r: &mut Report) -> Result<(), CliError> {
    let methods: Vec<MaximalityMethod> = match method {
        None | Some("all") => MaximalityMethod::ALL.to_vec(),
        Some(name) => vec![MaximalityMethod::parse(name).ok_or_else(|| {
            CliError::Parse(format!(
                "unknown method {name:?} (expected all, via_complement, via_adjoint_monotone or via_adjoint_maximal)"
            ))
        })?],
    };
    if !rel.is_monotone(tol) {
        r.put("monotone", json!(false));
        r.set_verdict(false);
        return Ok(());
    }
    r.put("monotone", json!(true));
    let mut verdicts = serde_json::Map::new();
    let mut results = Vec::new();
    for m in methods {
        let v = rel.is_maximal_monotone(m, tol)?;
        verdicts.insert(m.name().to_string(), json!(v));
        results.push(v);
    }
    r.put("methods", Value::Object(verdicts));
    if results.windows(2).any(|w| w[0] != w[1]) {
        return Err(CliError::Inconsistent("maximality methods disagree".into()));
    }
    r.set_verdict(results[0]);
    Ok(())
}

/// Unit vector of `A` along the most negative direction of the form.
fn bottom_direction(sub: &Subspace) -> DVector<f64> {
    let (_, vectors) = linalg::sorted_eigen(&sub.reduced_form());
    let w = sub.basis() * vectors.column(0);
    &w / w.norm()
}

fn point_in(v: &DVector<f64>, space: &SsdbSpace) -> Result<DVector<f64>, CliError> {
    space.check_dim(v)?;
    Ok(v.clone())
}

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

/// The worked examples, each compared with its known answer.
pub fn demo(ctx: Context) -> Report {
    let tol = ctx.tol;
    let mut r = Report::new("demo", digest_of(&["demo"]), ctx.seed, tol);
    match demo_items(ctx) {
        Ok(items) => {
            let all = items.iter().all(|i| i["ok"] == json!(true));
            r.put("items", Value::Array(items));
            r.set_verdict(all);
            r
        }
        Err(e) => Report::failed("demo", r.inputs_digest.clone(), ctx.seed, tol, &e),
    }
}

fn demo_items(ctx: Context) -> Result<Vec<Value>, CliError> {
    let tol = ctx.tol;
    let r3 = SsdbSpace::paper_r3();
    let mut items = Vec::new();

    let helix: Vec<DVector<f64>> = (0..=12)
        .map(|i| {
            let t = 0.5 * i as f64;
            v(&[t.cos(), t.sin(), t])
        })
        .collect();
    let positive = PointSet::new(&r3, helix)?.is_q_positive(tol);
    items.push(json!({"name": "helix_q_positive", "expected": true, "observed": positive, "ok": positive}));

    let half = |t: f64| v(&[t.cos(), t.sin(), 0.5 * t]);
    let scaled = PointSet::new(&r3, vec![half(0.0), half(FRAC_PI_2), half(PI), half(1.5 * PI)])?;
    let expected = -1.0 + PI * PI / 32.0;
    let item = match scaled.q_positivity_violation(tol) {
        Some(bad) => json!({
            "name": "half_helix_violation",
            "expected": report::number(expected),
            "observed": report::number(bad.value),
            "pair_theta": [0.0, FRAC_PI_2],
            "ok": (bad.first, bad.second) == (0, 1) && (bad.value - expected).abs() <= 1e-6,
        }),
        None => json!({"name": "half_helix_violation", "expected": report::number(expected), "observed": null, "ok": false}),
    };
    items.push(item);

    let line = Subspace::from_generators(&r3, &[v(&[1.0, -1.0, 2.0])], tol)?;
    let positive = line.is_q_positive(tol);
    items.push(json!({"name": "line_q_positive", "expected": true, "observed": positive, "ok": positive}));

    let theorem = line.is_maximal_q_positive(tol)?;
    let oracle = line.maximality_oracle(ssdb_core::subspace::DEFAULT_ORACLE_TRIALS, ctx.seed, tol)?;
    let replay = match &theorem.witness {
        Some(w) => line.extends_q_positively(w, tol)?,
        None => false,
    };
    items.push(json!({
        "name": "line_not_maximal",
        "expected": false,
        "observed": theorem.maximal,
        "oracle": oracle.label(),
        "witness": theorem.witness.as_ref().map(report::vector),
        "witness_extends": replay,
        "ok": !theorem.maximal && !oracle.is_maximal_probable() && replay,
    }));

    let inf = line.inf_q_over_translate(&v(&[1.0, 1.0, 0.0]), tol)?;
    let ok = matches!(inf, ExtReal::Finite(x) if (x - 1.0).abs() <= 1e-9);
    items.push(json!({"name": "line_infimum_at_1_1_0", "expected": 1.0, "observed": report::ext(inf), "ok": ok}));

    let identity = LinearRelation::from_graph(&DMatrix::identity(2, 2), tol)?;
    let mut all = true;
    for m in MaximalityMethod::ALL {
        all &= identity.is_maximal_monotone(m, tol)?;
    }
    items.push(json!({"name": "identity_graph_maximal_monotone", "expected": true, "observed": all, "ok": all}));

    let product = SsdbSpace::product(1)?;
    let projected = PointSet::new(&product, vec![v(&[1.0, -1.0]), v(&[0.0, 0.0]), v(&[-2.0, 2.0])])?;
    let monotone = projected.is_q_positive(tol);
    items.push(json!({"name": "line_projection_monotone", "expected": false, "observed": monotone, "ok": !monotone}));
    Ok(items)
}

/// Applies `command` to every `*.json` file of `dir`, in parallel, with
/// reports ordered by file name.
pub fn batch(dir: &Path, command: BatchCommand, method: Method, trials: usize, ctx: Context) -> Report {
    let name = "batch";
    let mut files: Vec<_> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            let err = CliError::Io(format!("{}: {e}", dir.display()));
            return Report::failed(name, String::new(), ctx.seed, ctx.tol, &err);
        }
    };
    files.sort();
    let reports: Vec<(String, Report)> = files
        .par_iter()
        .map(|path| {
            let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            let report = run_on_document(command.name(), path, ctx, |doc, r| match command {
                BatchCommand::Validate => validate(doc, ctx, r),
                BatchCommand::CheckPositive => check_positive(doc, ctx, false, None, r),
                BatchCommand::Complement => complement(doc, ctx, r),
                BatchCommand::CheckMaximal => check_maximal(doc, ctx, method, trials, r),
            });
            (file, report)
        })
        .collect();
    let digests: Vec<&str> = reports.iter().map(|(_, r)| r.inputs_digest.as_str()).collect();
    let mut out = Report::new(name, digest_of(&digests), ctx.seed, ctx.tol);
    let worst = reports.iter().map(|(_, r)| r.exit).max().unwrap_or(Exit::True);
    out.put("subcommand", json!(command.name()));
    out.put(
        "reports",
        Value::Array(
            reports
                .iter()
                .map(|(file, r)| json!({"file": file, "report": serde_json::to_value(r).expect("report serializes")}))
                .collect(),
        ),
    );
    out.set_verdict(worst == Exit::True);
    out.exit = worst;
    out
}
