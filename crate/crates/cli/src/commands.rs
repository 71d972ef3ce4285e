use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use nband::cascade::{cascade_render, sinc, wavelet_render, RenderedFunction};
use nband::laurent::Rational;
use nband::scaling_filters::{bspline_filter, haar_filter, shannon_filter, Filter};
use nband::transform::{analyze_shared, synthesize as synthesize_pyramid, Boundary, Signal};
use nband::wavelet_construct::{
    bspline_bank, check_orthonormality, haar_bank, shannon_bank, verify_pr_with, A0Completion,
    BankFamily, FilterBank, PrMode,
};
use serde_json::Value;

use crate::bank_file::{
    family_parameters, read_bank, to_json, BankFile, FilterFile, FilterRecord, SCHEMA_VERSION,
};
use crate::error::{io_error, usage, CliError};
use crate::pyramid_dir::{read_pyramid, write_pyramid};
use crate::signal_file::{format_pairs, format_signal, read_signal, write_text};
use crate::{BankSource, BoundaryArg, FamilyArg, FamilyArgs, Precision, Target};

pub enum Outcome {
    Success,
    Fail,
}

fn required<T: Copy>(value: Option<T>, flag: &str, family: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for family {family}")))
}

fn family_and_n(args: &FamilyArgs) -> Result<(FamilyArg, usize), CliError> {
    let family = args
        .family
        .ok_or_else(|| CliError::Usage("--family or --bank is required".into()))?;
    let n = args
        .n
        .ok_or_else(|| CliError::Usage("--N is required".into()))?;
    Ok((family, n))
}

fn build_filter(args: &FamilyArgs) -> Result<Filter, CliError> {
    let (family, n) = family_and_n(args)?;
    match family {
        FamilyArg::Haar => haar_filter(n),
        FamilyArg::Shannon => {
            shannon_filter(n, required(args.half_width, "half-width", "shannon")?)
        }
        FamilyArg::Bspline => bspline_filter(required(args.degree, "degree", "bspline")?, n),
    }
    .map_err(usage)
}

/// Parses `unit`, `orthogonal` or `file:PATH`; the file holds a JSON array of
/// rows whose entries are integers or `"p/q"` strings.
fn parse_a0(choice: &str) -> Result<A0Completion, CliError> {
    match choice {
        "unit" => return Ok(A0Completion::UnitRows),
        "orthogonal" => return Ok(A0Completion::OrthogonalRows),
        _ => {}
    }
    let Some(path) = choice.strip_prefix("file:") else {
        return Err(CliError::Usage(format!(
            "--a0 must be unit, orthogonal or file:PATH, got {choice:?}"
        )));
    };
    let path = Path::new(path);
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| io_error(path, e))?;
    let bad = || {
        CliError::Data(format!(
            "{}: expected an array of rows of rationals",
            path.display()
        ))
    };
    let rows = value.as_array().ok_or_else(bad)?;
    rows.iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|entry| {
                    let s = match entry {
                        Value::Number(n) => n.to_string(),
                        Value::String(s) => s.trim().to_string(),
                        _ => return Err(bad()),
                    };
                    Rational::from_str(&s).map_err(|_| {
                        CliError::Data(format!("{}: {s:?} is not a rational", path.display()))
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<Rational>>, _>>()
        .map(A0Completion::Custom)
}

fn build_bank(args: &FamilyArgs) -> Result<FilterBank, CliError> {
    let (family, n) = family_and_n(args)?;
    match family {
        FamilyArg::Haar => haar_bank(n),
        FamilyArg::Shannon => shannon_bank(n, required(args.half_width, "half-width", "shannon")?),
        FamilyArg::Bspline => bspline_bank(
            required(args.degree, "degree", "bspline")?,
            n,
            parse_a0(&args.a0)?,
        ),
    }
    .map_err(usage)
}

fn load_bank(source: &BankSource) -> Result<FilterBank, CliError> {
    match &source.bank {
        Some(path) => read_bank(path),
        None => build_bank(&source.family),
    }
}

fn check_precision(exact_available: bool, precision: Precision) -> Result<(), CliError> {
    if precision.exact && !exact_available {
        return Err(CliError::Usage(
            "--exact requested but this family has no rational taps".into(),
        ));
    }
    Ok(())
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_residual(r: f64) -> String {
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r:.3e}")
    }
}

pub fn filter(
    args: &FamilyArgs,
    precision: Precision,
    output: Option<&Path>,
) -> Result<Outcome, CliError> {
    let f = build_filter(args)?;
    check_precision(f.taps_exact().is_some(), precision)?;
    let n = f.n();
    let mut report = String::new();
    let _ = writeln!(report, "family: {}", f.family());
    let _ = writeln!(report, "N: {n}");
    let _ = writeln!(
        report,
        "taps: {} (k = {}..{})",
        f.len(),
        f.offset(),
        f.last_index()
    );
    match f.taps_exact().filter(|_| !precision.float) {
        Some(exact) => {
            let _ = writeln!(report, "exact taps, h[k] = c_k/sqrt({n}):");
            for ((k, h), c) in f.indexed_taps().zip(exact) {
                let c = if c.is_integer() {
                    c.to_string()
                } else {
                    format!("({c})")
                };
                let _ = writeln!(report, "  h[{k}] = {c}/sqrt({n}) = {h}");
            }
        }
        None => {
            let _ = writeln!(report, "float taps:");
            for (k, h) in f.indexed_taps() {
                let _ = writeln!(report, "  h[{k}] = {h}");
            }
        }
    }
    print!("{report}");
    if let Some(path) = output {
        let (family, parameters) = family_parameters(&bank_family_of(args)?);
        let mut record = FilterRecord::from_filter("analysis", 0, &f);
        if precision.float {
            record.taps_exact = None;
        }
        let file = FilterFile {
            schema_version: SCHEMA_VERSION,
            n,
            family,
            parameters: crate::bank_file::Parameters {
                a0: None,
                a0_matrix: None,
                ..parameters
            },
            filter: record,
        };
        write_text(path, &to_json(&file))?;
    }
    Ok(Outcome::Success)
}

fn bank_family_of(args: &FamilyArgs) -> Result<BankFamily, CliError> {
    let (family, _) = family_and_n(args)?;
    Ok(match family {
        FamilyArg::Haar => BankFamily::Haar,
        FamilyArg::Shannon => BankFamily::Shannon {
            half_width: required(args.half_width, "half-width", "shannon")?,
        },
        FamilyArg::Bspline => BankFamily::BSpline {
            degree: required(args.degree, "degree", "bspline")?,
            a0: A0Completion::UnitRows,
        },
    })
}

pub fn bank(
    args: &FamilyArgs,
    precision: Precision,
    output: Option<&Path>,
) -> Result<Outcome, CliError> {
    let bank = build_bank(args)?;
    check_precision(bank.is_exact(), precision)?;
    let mut file = BankFile::from_bank(&bank);
    if precision.float {
        for rec in &mut file.filters {
            rec.taps_exact = None;
        }
    }
    emit(output, &to_json(&file))?;
    if let Some(path) = output {
        eprintln!("wrote {} filters to {}", file.filters.len(), path.display());
    }
    Ok(Outcome::Success)
}

pub fn verify(source: &BankSource, precision: Precision) -> Result<Outcome, CliError> {
    let bank = load_bank(source)?;
    let mode = if precision.float || (!precision.exact && !bank.is_exact()) {
        PrMode::Float
    } else {
        PrMode::Exact
    };
    let report = verify_pr_with(&bank, mode).map_err(usage)?;
    let ortho = check_orthonormality(&bank);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "bank: {} N={} {}",
        family_label(bank.family()),
        bank.n(),
        match bank.kind() {
            nband::wavelet_construct::BankKind::Orthogonal => "orthogonal",
            nband::wavelet_construct::BankKind::Biorthogonal => "biorthogonal",
        }
    );
    let _ = writeln!(
        out,
        "mode: {}",
        match report.mode {
            PrMode::Exact => "exact",
            PrMode::Float => "float",
        }
    );
    if let Some(d) = &report.distortion {
        let _ = writeln!(out, "distortion: {d}");
    }
    let _ = writeln!(
        out,
        "distortion residual: {}",
        format_residual(report.distortion_residual)
    );
    let _ = writeln!(out, "alias cancellation:");
    for (s, r) in report.alias_residuals.iter().enumerate() {
        let _ = writeln!(out, "  s={}: {}", s + 1, format_residual(*r));
    }
    let _ = writeln!(out, "residual: {}", format_residual(report.residual));
    let _ = writeln!(
        out,
        "orthonormality: {} (max residual {})",
        match ortho.passed {
            Some(true) => "yes",
            Some(false) => "no",
            None => "approximate",
        },
        format_residual(ortho.max_residual)
    );
    let _ = writeln!(out, "{}", if report.passed { "PASS" } else { "FAIL" });
    print!("{out}");
    Ok(if report.passed {
        Outcome::Success
    } else {
        Outcome::Fail
    })
}

fn family_label(f: &BankFamily) -> String {
    match f {
        BankFamily::Haar => "haar".into(),
        BankFamily::Shannon { half_width } => format!("shannon(half_width={half_width})"),
        BankFamily::BSpline { degree, a0 } => {
            let a0 = match a0 {
                A0Completion::UnitRows => "unit",
                A0Completion::OrthogonalRows => "orthogonal",
                A0Completion::Custom(_) => "custom",
            };
            format!("bspline(degree={degree}, a0={a0})")
        }
        BankFamily::Custom => "custom".into(),
    }
}

pub struct AnalyzeArgs<'a> {
    pub input: &'a Path,
    pub column: Option<usize>,
    pub source: &'a BankSource,
    pub levels: usize,
    pub boundary: BoundaryArg,
    pub pad: bool,
    pub output: &'a Path,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let samples = read_signal(args.input, args.column)?;
    if samples.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no samples",
            args.input.display()
        )));
    }
    let bank = Arc::new(load_bank(args.source)?);
    let boundary = match args.boundary {
        BoundaryArg::Periodic => Boundary::Periodic,
        BoundaryArg::Zero => Boundary::ZeroPad,
    };
    let original_len = samples.len();
    let mut signal = Signal::new(samples, boundary);
    if args.pad {
        let block = u32::try_from(args.levels)
            .ok()
            .and_then(|l| bank.n().checked_pow(l))
            .ok_or_else(|| CliError::Usage(format!("{} levels is too deep", args.levels)))?;
        signal = signal.padded_to_multiple(block);
    }
    let pyramid = analyze_shared(&signal, Arc::clone(&bank), args.levels).map_err(usage)?;
    write_pyramid(args.output, &pyramid, original_len)?;
    let recon = synthesize_pyramid(&pyramid).map_err(|e| CliError::Data(e.to_string()))?;
    let err = max_abs_diff(
        &recon.samples()[..original_len],
        &signal.samples()[..original_len],
    );
    println!("signal length: {original_len} (analyzed {})", signal.len());
    println!("levels: {}", pyramid.levels().len());
    println!("coarsest approximation: {} samples", pyramid.approx().len());
    println!("round-trip max error: {err:.3e}");
    Ok(Outcome::Success)
}

pub fn synthesize(
    input: &Path,
    bank: Option<&Path>,
    output: &Path,
    reference: Option<&Path>,
    column: Option<usize>,
) -> Result<Outcome, CliError> {
    let bank = bank.map(read_bank).transpose()?;
    let (pyramid, original_len) = read_pyramid(input, bank)?;
    let recon = synthesize_pyramid(&pyramid).map_err(|e| CliError::Data(e.to_string()))?;
    let samples = &recon.samples()[..original_len.min(recon.len())];
    write_text(output, &format_signal(samples))?;
    println!("wrote {} samples to {}", samples.len(), output.display());
    if let Some(path) = reference {
        let expected = read_signal(path, column)?;
        if expected.len() != samples.len() {
            return Err(CliError::Data(format!(
                "reference has {} samples, reconstruction has {}",
                expected.len(),
                samples.len()
            )));
        }
        println!("max error: {:.3e}", max_abs_diff(samples, &expected));
    }
    Ok(Outcome::Success)
}

pub fn render(
    source: &BankSource,
    target: Target,
    channel: Option<usize>,
    depth: usize,
    output: Option<&Path>,
) -> Result<Outcome, CliError> {
    let bank = load_bank(source)?;
    let rendered = match target {
        Target::Phi => {
            if channel.is_some_and(|c| c != 0) {
                return Err(CliError::Usage(
                    "--channel applies to --target psi only".into(),
                ));
            }
            match bank.family() {
                BankFamily::Shannon { half_width } if depth > 0 => {
                    let hw = Rational::from_integer((*half_width).into());
                    RenderedFunction::from_fn(bank.n(), depth, 0.0, (-hw.clone(), hw), sinc)
                }
                _ => cascade_render(bank.scaling_filter(), depth).map_err(usage)?,
            }
        }
        Target::Psi => wavelet_render(&bank, channel.unwrap_or(1), depth).map_err(usage)?,
    };
    emit(output, &format_pairs(rendered.points()))?;
    Ok(Outcome::Success)
}
