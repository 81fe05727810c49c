//! Command logic behind the `conerig` binary, kept separate from argument
//! parsing so it can be driven from tests.

use std::path::{Path, PathBuf};

use conerig::coning::{
    analyze_cone, project_back, realize, realize_with, verify_transfer, MetricTag, TransferOptions,
};
use conerig::document::{ErrorBlock, ExactCheck, FrameworkDocument, Loaded, MetricBlock, Regularity, ReportDocument};
use conerig::exact::{exact_rigidity_rank, is_rational_config};
use conerig::orbit::{orbit_matrix, predict_with, symmetric_analysis};
use conerig::rigidity::{analyze, estimate_regular};
use conerig::svg::{mirror_axes, render};
use conerig::symmetry::{validate_symmetric, SymFramework};
use conerig::tensegrity::{cone_tensegrity, invert_tensegrity_orbits, tensegrity_rigid, MemberKind};
use conerig::{Configuration, Error, Framework, NumericPolicy};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Why a command stopped. Input problems exit with 2, analysis-level domain
/// problems with 1 (after the partial report is printed).
#[derive(Debug)]
pub enum Failure {
    Input(Error),
    Domain(Box<ReportDocument>, Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Domain(..) => 1,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    pub policy: NumericPolicy,
    pub metric: Option<MetricTag>,
    pub exact: bool,
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct TransferArgs {
    pub policy: NumericPolicy,
    pub to: MetricTag,
    /// 1-based vertex orbits to invert.
    pub invert: Vec<usize>,
    pub alphas: Option<Vec<f64>>,
    pub scale: Option<f64>,
    pub emit: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

pub fn load(path: &Path, policy: &NumericPolicy) -> Result<Loaded, Failure> {
    policy.validate().map_err(Failure::Input)?;
    FrameworkDocument::read(path)
        .and_then(|doc| doc.load(policy))
        .map_err(Failure::Input)
}

fn rng(policy: &NumericPolicy) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(policy.rng_seed)
}

/// The document's own metric tag, else the bare signature.
fn base_label(fw: &Framework, tag: Option<MetricTag>) -> String {
    let s = fw.signature();
    match tag {
        Some(t) => t.to_string(),
        None if s.is_euclidean() => "euclidean".into(),
        None => MetricTag::Signature(s).to_string(),
    }
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::Document { .. }
            | Error::Json(_)
            | Error::Io(_)
    )
}

/// Input errors pass through; anything else becomes a domain failure
/// carrying the report so far.
fn classify(report: &mut ReportDocument, e: Error) -> Failure {
    if is_input_error(&e) {
        return Failure::Input(e);
    }
    report.error = Some(ErrorBlock {
        kind: error_kind(&e).into(),
        message: e.to_string(),
    });
    Failure::Domain(Box::new(report.clone()), e)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain { .. } => "domain",
        Error::InvalidGroup(_) => "invalid_group",
        Error::NotAMotion(_) | Error::NotAStress(_) => "transfer",
        Error::Sampling(_) => "sampling",
        _ => "analysis",
    }
}

fn write_svg(path: &Path, fw: &Framework, kinds: Option<&[MemberKind]>, sf: Option<&SymFramework>) -> Result<(), Error> {
    let mirrors = sf.map(|s| mirror_axes(s.group())).unwrap_or_default();
    std::fs::write(path, render(fw, kinds, &mirrors)?)?;
    Ok(())
}

pub fn run_analyze(input: &Path, opts: &AnalyzeOptions) -> Result<ReportDocument, Failure> {
    let loaded = load(input, &opts.policy)?;
    let mut report = ReportDocument::new("analyze", &opts.policy);
    report.input = Some(input.display().to_string());
    analyze_loaded(&loaded, opts, &mut report).map_err(|e| classify(&mut report, e))?;
    Ok(report)
}

pub fn analyze_loaded(loaded: &Loaded, opts: &AnalyzeOptions, report: &mut ReportDocument) -> Result<(), Error> {
    let policy = &opts.policy;
    let fw = loaded.framework();
    if let Some(path) = &opts.svg {
        if fw.dim() != 2 {
            return Err(Error::InvalidArgument("--svg needs a two-dimensional framework".into()));
        }
        write_svg(path, fw, loaded.kinds.as_deref(), Some(&loaded.sf))?;
    }

    let base = analyze(fw, policy)?;
    let est = estimate_regular(fw.graph(), fw.signature(), policy, &mut rng(policy))?;
    report.regularity = Some(Regularity {
        rank: base.rank,
        max_rank: est.max_rank,
        samples: est.samples,
        regular: base.rank >= est.max_rank,
    });
    report.analyses.push(MetricBlock {
        metric: base_label(fw, loaded.metric_tag),
        report: base.clone(),
    });

    if opts.exact {
        let exact_rank = exact_rigidity_rank(fw);
        report.exact = Some(ExactCheck {
            rational: is_rational_config(fw),
            exact_rank,
            numeric_rank: base.rank,
            agree: exact_rank.is_none_or(|r| r == base.rank),
        });
    }

    if loaded.has_symmetry && !loaded.sf.group().is_trivial() {
        let om = orbit_matrix(&loaded.sf, policy)?;
        report.symmetric = Some(symmetric_analysis(&loaded.sf, &om, false, policy)?);
        report.prediction = Some(predict_with(&loaded.sf, &om, false, policy, &mut rng(policy))?);
    }

    let tf = loaded.tensegrity()?;
    if let Some(tf) = &tf {
        report.tensegrity = Some(tensegrity_rigid(tf, policy)?);
    }

    if let Some(tag) = opts.metric.filter(|&m| m != MetricTag::EuclideanPlane) {
        let cf = realize(&loaded.sf, tag, policy)?;
        report.analyses.push(MetricBlock {
            metric: tag.to_string(),
            report: analyze_cone(&cf, policy)?,
        });
        if let Some(tf) = &tf {
            let ct = cone_tensegrity(tf, tag, None, policy)?;
            report.cone_tensegrity = Some(tensegrity_rigid(&ct.tensegrity, policy)?);
        }
    }
    Ok(())
}

fn scaled(sf: &SymFramework, s: f64, policy: &NumericPolicy) -> Result<SymFramework, Error> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidArgument(format!("--scale must be positive, got {s}")));
    }
    let fw = sf.framework();
    let pts = fw.config().points().iter().map(|p| p * s).collect();
    let fw = fw.with_config(Configuration::new(fw.dim(), pts)?)?;
    validate_symmetric(&fw, sf.type_map(), policy)
}

pub fn run_transfer(input: &Path, args: &TransferArgs) -> Result<ReportDocument, Failure> {
    let loaded = load(input, &args.policy)?;
    let mut report = ReportDocument::new("transfer", &args.policy);
    report.input = Some(input.display().to_string());
    transfer_loaded(&loaded, args, &mut report).map_err(|e| classify(&mut report, e))?;
    Ok(report)
}

pub fn transfer_loaded(loaded: &Loaded, args: &TransferArgs, report: &mut ReportDocument) -> Result<(), Error> {
    let policy = &args.policy;
    let sf = match args.scale {
        Some(s) => scaled(&loaded.sf, s, policy)?,
        None => loaded.sf.clone(),
    };
    let invert_orbits = args
        .invert
        .iter()
        .map(|&o| {
            o.checked_sub(1)
                .ok_or_else(|| Error::InvalidArgument("--invert takes 1-based orbit numbers".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let opts = TransferOptions {
        alphas: args.alphas.clone(),
        invert_orbits: invert_orbits.clone(),
        invert_vertices: Vec::new(),
    };
    let base = analyze(sf.framework(), policy)?;
    report.analyses.push(MetricBlock {
        metric: base_label(sf.framework(), loaded.metric_tag),
        report: base,
    });

    let t = verify_transfer(&sf, args.to, &opts, policy)?;
    report.analyses.push(MetricBlock {
        metric: args.to.to_string(),
        report: t.cone.clone(),
    });
    report.symmetric = t.base_symmetric.clone();
    report.transfer = Some(t);

    let cf = realize_with(&sf, args.to, &opts, policy)?;
    let mut cone_kinds = None;
    if let Some(kinds) = &loaded.kinds {
        let tf = conerig::tensegrity::Tensegrity::symmetric(sf.clone(), kinds.clone())?;
        let positive = args.alphas.as_ref().map(|a| a.iter().map(|x| x.abs()).collect());
        let mut ct = cone_tensegrity(&tf, args.to, positive, policy)?;
        if !invert_orbits.is_empty() {
            ct = invert_tensegrity_orbits(&ct, &invert_orbits, policy)?;
        }
        report.tensegrity = Some(tensegrity_rigid(&tf, policy)?);
        report.cone_tensegrity = Some(tensegrity_rigid(&ct.tensegrity, policy)?);
        cone_kinds = Some(ct.tensegrity.kinds().to_vec());
    }

    if let Some(path) = &args.svg {
        if sf.framework().dim() != 2 {
            return Err(Error::InvalidArgument("--svg needs a two-dimensional framework".into()));
        }
        let shown = project_back(&cf)?;
        let kinds = cone_kinds.as_ref().map(|k| &k[..shown.graph().n_edges()]);
        write_svg(path, &shown, kinds, Some(&sf))?;
    }
    if let Some(path) = &args.emit {
        let full = cf.full_framework()?;
        let tm = cf.type_map().map(|tm| tm.with_fixed_vertex());
        let mut doc = FrameworkDocument::from_framework(&full, tm.as_ref(), cone_kinds.as_deref(), Some(args.to));
        doc.name = Some(format!(
            "cone over {} joints, cone vertex last ({})",
            cf.n_joints(),
            args.to
        ));
        doc.write(path)?;
    }
    Ok(())
}
