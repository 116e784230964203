use crate::parser::parse_document;
use crate::system::EquationSystem;

use super::{apply_reduction, change_of_variable, integrate_once, matching_form, parse_reductions};
use super::{ReducedOde, ReductionError, ReductionSpec, Result, Step};

const NLS: &str = include_str!("../../data/nls.nsym");
const MKDV: &str = include_str!("../../data/mkdv.nsym");

const BUILTIN: &[(&str, &str)] = &[
    (NLS, include_str!("../../data/reductions/nls-galilean-phase.nsym")),
    (NLS, include_str!("../../data/reductions/nls-nonlocal-painleve.nsym")),
    (NLS, include_str!("../../data/reductions/nls-local-quadratic.nsym")),
    (NLS, include_str!("../../data/reductions/nls-scaling-nonlocal.nsym")),
    (NLS, include_str!("../../data/reductions/nls-scaling-local.nsym")),
    (MKDV, include_str!("../../data/reductions/mkdv-traveling-nonlocal.nsym")),
    (MKDV, include_str!("../../data/reductions/mkdv-traveling-local.nsym")),
    (MKDV, include_str!("../../data/reductions/mkdv-painleve2.nsym")),
];

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub system: EquationSystem,
    pub spec: ReductionSpec,
}

/// Reads a system together with `reduce` blocks; the blocks share the
/// system's declarations.
pub fn load_entries(system_src: &str, reductions_src: &str) -> Result<Vec<CatalogEntry>> {
    let system = parse_document(system_src)?.system()?;
    let doc = parse_document(&format!("{system_src}\n{reductions_src}"))?;
    Ok(parse_reductions(&doc)?
        .into_iter()
        .map(|spec| CatalogEntry { name: spec.name.clone(), system: system.clone(), spec })
        .collect())
}

pub fn builtin_catalog() -> Vec<CatalogEntry> {
    BUILTIN
        .iter()
        .flat_map(|(sys, red)| load_entries(sys, red).expect("built-in reduction files parse"))
        .collect()
}

pub fn find_entry(name: &str) -> Result<CatalogEntry> {
    builtin_catalog().into_iter().find(|e| e.name == name).ok_or_else(|| ReductionError::UnknownEntry(name.into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    pub stage: String,
    pub ode: String,
    pub expected: String,
    pub local: bool,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntryReport {
    pub name: String,
    pub stages: Vec<StageReport>,
    /// `None` when the entry does not declare locality.
    pub locality_ok: Option<bool>,
    pub error: Option<String>,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.locality_ok != Some(false) && self.stages.iter().all(|s| s.matches)
    }
}

/// Reports one stage. A matching stage continues from the expected form,
/// so later steps work with the displayed normalization.
fn stage(name: &str, ode: &mut ReducedOde, expected: &crate::Expr, signed: &[&str]) -> StageReport {
    let form = matching_form(ode, expected, signed);
    let report = StageReport {
        stage: name.to_string(),
        ode: ode.to_text(),
        expected: format!("{} = 0", expected.display(&ode.scope)),
        local: ode.is_local(),
        matches: form.is_some(),
    };
    if let Some(f) = form {
        ode.expr = f;
    }
    report
}

/// Runs the reduction and every declared follow-up step, comparing each
/// stage with its expected ODE.
pub fn run_entry(entry: &CatalogEntry) -> EntryReport {
    let mut report = EntryReport { name: entry.name.clone(), stages: Vec::new(), locality_ok: None, error: None };
    if let Err(e) = run_stages(entry, &mut report) {
        report.error = Some(e.to_string());
    }
    report
}

fn run_stages(entry: &CatalogEntry, report: &mut EntryReport) -> Result<()> {
    let spec = &entry.spec;
    let odes = apply_reduction(&entry.system, spec)?;
    let [ode] = odes.as_slice() else {
        return Err(ReductionError::Unsupported("catalog entries reduce a single equation".into()));
    };
    let mut current = ode.clone();
    report.stages.push(stage("reduced", &mut current, &spec.expected, &[]));
    report.locality_ok = spec.expected_local.map(|want| {
        let families = ode.families();
        if want {
            ode.is_local()
        } else {
            families.iter().filter(|(mask, _)| *mask != 0).count() == 1
        }
    });
    let mut constants: Vec<&str> = Vec::new();
    for step in &spec.steps {
        match step {
            Step::Integrate { constant, expected } => {
                current = integrate_once(&current, constant)?;
                constants.push(constant);
                report.stages.push(stage(&format!("integrate {constant}"), &mut current, expected, &constants));
            }
            Step::Change { variable, map, expected } => {
                current = change_of_variable(&current, variable, map)?;
                report.stages.push(stage(&format!("change to {variable}"), &mut current, expected, &constants));
            }
        }
    }
    Ok(())
}
