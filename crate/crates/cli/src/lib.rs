//! Batch commands behind the `nsym` binary. Each command returns a
//! [`Report`]; `Err` is an input error.

pub mod report;

use std::fmt::Display;
use std::fs;

use nsym_core::dde::{transform_system, AxisMap, ConjRule};
use nsym_core::numeric::{check_case, check_quadrature, parse_solutions, NumericError, ResidualReport};
use nsym_core::parser::parse_document;
use nsym_core::reduction::{compare_canonical, find_entry, load_entries, run_entry, CatalogEntry, ReducedOde, ReductionError};
use nsym_core::symmetry::{classify_ansatz, lie_bracket, realify, verify_symmetry, ClassifyOptions};
use nsym_core::{parse_expression, EquationSystem, ParseError};

pub use report::{BracketRow, InputFile, Report, ResidualRow, Verdict};

#[derive(Debug)]
pub struct InputError(pub String);

impl Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub type Result<T> = std::result::Result<T, InputError>;

fn fail(msg: impl Display) -> InputError {
    InputError(msg.to_string())
}

/// A source file with its path, for diagnostics.
pub struct Source {
    pub path: String,
    pub text: String,
}

impl Source {
    pub fn read(path: &str) -> Result<Source> {
        let text = fs::read_to_string(path).map_err(|e| fail(format!("{path}: {e}")))?;
        Ok(Source { path: path.to_string(), text })
    }

    pub fn input(&self) -> InputFile {
        InputFile::new(&self.path, &self.text)
    }

    fn parse_error(&self, e: &ParseError) -> InputError {
        fail(format!("{}: {}", self.path, e.render(&self.text)))
    }

    fn system(&self) -> Result<EquationSystem> {
        let doc = parse_document(&self.text).map_err(|e| self.parse_error(&e))?;
        doc.system().map_err(|e| self.parse_error(&e))
    }
}

pub fn cmd_verify(system: &Source, generators: &[Source], seed: u64) -> Result<Report> {
    let sys = system.system()?;
    let mut report = Report::new("verify", seed);
    report.inputs.push(system.input());
    let mut gens = Vec::new();
    for src in generators {
        report.inputs.push(src.input());
        let doc = parse_document(&src.text).map_err(|e| src.parse_error(&e))?;
        if doc.scope != sys.scope {
            return Err(fail(format!("{}: variables differ from the system's", src.path)));
        }
        gens.extend(doc.generators().map_err(|e| src.parse_error(&e))?);
    }
    if gens.is_empty() {
        return Err(fail("no generators given"));
    }
    for (k, g) in gens.iter().enumerate() {
        let v = verify_symmetry(&sys, g).map_err(fail)?;
        let name = g.name.clone().unwrap_or_else(|| format!("gen{}", k + 1));
        let residuals = v.residuals.iter().filter(|r| !r.is_zero()).map(|r| r.to_text(&sys.scope)).collect();
        report.passed &= v.is_symmetry;
        report.verdicts.push(Verdict { name, passed: v.is_symmetry, detail: None, residuals });
    }
    Ok(report)
}

pub struct ClassifyArgs {
    pub degree: u32,
    pub real_fields: bool,
    /// Splits a complex system into real and imaginary parts first.
    pub realify: bool,
}

pub fn cmd_classify(system: &Source, args: &ClassifyArgs, seed: u64) -> Result<Report> {
    let mut sys = system.system()?;
    if args.realify {
        sys = realify(&sys).map_err(fail)?;
    }
    let c = classify_ansatz(&sys, ClassifyOptions { degree: args.degree, real_fields: args.real_fields }).map_err(fail)?;
    let mut report = Report::new("classify", seed);
    report.inputs.push(system.input());
    report.dimension = Some(c.dimension);
    report.basis = c.basis.iter().map(|g| g.to_text(&sys.scope)).collect();
    for (k, a) in c.basis.iter().enumerate() {
        for b in &c.basis[k + 1..] {
            let br = lie_bracket(a, b).map_err(fail)?;
            let ok = verify_symmetry(&sys, &br).map_err(fail)?.is_symmetry;
            report.brackets.push(BracketRow {
                left: a.name.clone().unwrap_or_default(),
                right: b.name.clone().unwrap_or_default(),
                bracket: br.to_text(&sys.scope),
                is_symmetry: ok,
            });
        }
    }
    Ok(report)
}

/// `--entry name` or a system file with a file of `reduce` blocks.
pub enum ReduceInput<'a> {
    Entry(&'a str),
    Files { system: &'a Source, spec: &'a Source },
}

pub fn cmd_reduce(input: ReduceInput, seed: u64) -> Result<Report> {
    let mut report = Report::new("reduce", seed);
    let entries: Vec<CatalogEntry> = match input {
        ReduceInput::Entry(name) => vec![find_entry(name).map_err(fail)?],
        ReduceInput::Files { system, spec } => {
            report.inputs.push(system.input());
            report.inputs.push(spec.input());
            let es = load_entries(&system.text, &spec.text).map_err(|e| match e {
                ReductionError::Parse(p) => fail(format!("{} + {}: {}", system.path, spec.path, p)),
                other => fail(other),
            })?;
            if es.is_empty() {
                return Err(fail(format!("{}: no reduce blocks", spec.path)));
            }
            es
        }
    };
    let mut out = String::new();
    for e in &entries {
        let r = run_entry(e);
        report.passed &= r.passed();
        for s in &r.stages {
            out.push_str(&format!("# {} / {}\n{}\n", r.name, s.stage, s.ode));
            report.verdicts.push(Verdict {
                name: format!("{} / {}", r.name, s.stage),
                passed: s.matches,
                detail: Some(format!("{}; expected {}", if s.local { "local" } else { "nonlocal" }, s.expected)),
                residuals: Vec::new(),
            });
        }
        if r.locality_ok == Some(false) {
            report.verdicts.push(Verdict {
                name: format!("{} / locality", r.name),
                passed: false,
                detail: Some("locality differs from the declared one".into()),
                residuals: Vec::new(),
            });
        }
        if let Some(err) = &r.error {
            if r.stages.is_empty() {
                // the reduction itself was rejected: bad input, not a mismatch
                return Err(fail(format!("{}: {err}", r.name)));
            }
            report.verdicts.push(Verdict { name: r.name.clone(), passed: false, detail: Some(err.clone()), residuals: Vec::new() });
        }
    }
    report.output = Some(out);
    Ok(report)
}

fn row(case: &str, equation: &str, tolerance: f64, r: &ResidualReport) -> ResidualRow {
    ResidualRow {
        case: case.to_string(),
        equation: equation.to_string(),
        samples: r.samples,
        rejected: r.rejected,
        max_abs: r.max_abs,
        max_rel: r.max_rel,
        tolerance,
        worst: r.worst.iter().map(|z| [z.re, z.im]).collect(),
    }
}

fn numeric_error(src: Option<&Source>, e: NumericError) -> InputError {
    match (src, e) {
        (Some(s), NumericError::Parse(p)) => s.parse_error(&p),
        (_, e) => fail(e),
    }
}

pub enum CheckInput<'a> {
    File(&'a Source),
    /// `a, b, C1, C2` of the quadrature solution of the integrated mKdV
    /// traveling-wave reduction.
    Quadrature([f64; 4]),
}

pub fn cmd_check(input: CheckInput, samples: Option<usize>, seed: u64) -> Result<Report> {
    let mut report = Report::new("check", seed);
    match input {
        CheckInput::File(src) => {
            report.inputs.push(src.input());
            let doc = parse_document(&src.text).map_err(|e| src.parse_error(&e))?;
            let cases = parse_solutions(&doc).map_err(|e| numeric_error(Some(src), e))?;
            if cases.is_empty() {
                return Err(fail(format!("{}: no solution blocks", src.path)));
            }
            for mut case in cases {
                if let Some(n) = samples {
                    case.samples = n;
                }
                let r = check_case(&case, seed).map_err(|e| numeric_error(Some(src), e))?;
                let ok = r.within_tolerance();
                report.passed &= ok;
                for (eq, rr) in &r.reports {
                    report.residuals.push(row(&r.name, eq, r.tolerance, rr));
                }
                let expectation = if r.as_expected() { "as declared" } else { "contrary to the declared expectation" };
                report.verdicts.push(Verdict {
                    name: r.name.clone(),
                    passed: ok,
                    detail: Some(format!("max relative residual {:e}, tolerance {:e}, {expectation}", r.max_rel(), r.tolerance)),
                    residuals: Vec::new(),
                });
            }
        }
        CheckInput::Quadrature([a, b, c1, c2]) => {
            let tolerance = 1e-6;
            let r = check_quadrature(a, b, c1, c2, samples.unwrap_or(64), seed).map_err(|e| numeric_error(None, e))?;
            let ok = r.max_rel < tolerance;
            report.passed = ok;
            report.residuals.push(row("quadrature", "integrated", tolerance, &r));
            report.verdicts.push(Verdict { name: "quadrature".into(), passed: ok, detail: None, residuals: Vec::new() });
        }
    }
    Ok(report)
}

pub struct TransformArgs {
    /// Axis names mapped by `x = exp(x̂)`.
    pub exp: Vec<String>,
    /// `axis=factor` pairs for `x = s·x̂`.
    pub rescale: Vec<String>,
    pub rule: ConjRule,
}

pub fn cmd_transform(system: &Source, args: &TransformArgs, expected: Option<&Source>, seed: u64) -> Result<Report> {
    let sys = system.system()?;
    let scope = &sys.scope;
    let mut report = Report::new("transform", seed);
    report.inputs.push(system.input());
    let axis = |name: &str| scope.var_index(name.trim()).ok_or_else(|| fail(format!("unknown variable `{}`", name.trim())));
    let mut maps = vec![AxisMap::Identity; scope.dim()];
    let mut out = sys.clone();
    if !args.exp.is_empty() {
        for name in &args.exp {
            maps[axis(name)?] = AxisMap::Exp(nsym_core::Expr::one());
        }
        out = transform_system(&out, &maps, ConjRule::Formal).map_err(fail)?;
    }
    if !args.rescale.is_empty() {
        let mut scales = vec![AxisMap::Identity; scope.dim()];
        for pair in &args.rescale {
            let (name, factor) = pair.split_once('=').ok_or_else(|| fail(format!("`{pair}`: expected axis=factor")))?;
            let s = parse_expression(factor, scope).map_err(|e| fail(format!("--rescale {pair}: {}", e.render(factor))))?;
            scales[axis(name)?] = AxisMap::Scale(s);
        }
        out = transform_system(&out, &scales, args.rule).map_err(fail)?;
    }
    report.output = Some(out.to_text());
    if let Some(exp) = expected {
        report.inputs.push(exp.input());
        let want = exp.system()?;
        if want.equations.len() != out.equations.len() {
            return Err(fail(format!("{}: {} equations, transform gives {}", exp.path, want.equations.len(), out.equations.len())));
        }
        for (got, w) in out.equations.iter().zip(&want.equations) {
            let ode = ReducedOde::new(scope.clone(), got.expr.clone());
            let ok = compare_canonical(&ode, &w.expr, &[]);
            report.passed &= ok;
            report.verdicts.push(Verdict {
                name: got.name.clone(),
                passed: ok,
                detail: Some(format!("expected {} = 0", w.expr.to_text(scope))),
                residuals: Vec::new(),
            });
        }
    }
    Ok(report)
}
