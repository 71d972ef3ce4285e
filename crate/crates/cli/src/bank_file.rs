//! JSON bank files.
//!
//! Exact taps are stored as integer numerator/denominator arrays with
//! `sqrt_n_scale: true`, meaning the true tap is `numerator/denominator/√N`.
//! Integers are written as plain JSON numbers of arbitrary size.

use std::str::FromStr;

use nband::laurent::Rational;
use nband::scaling_filters::{Family, Filter};
use nband::wavelet_construct::{A0Completion, BankFamily, BankKind, FilterBank};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance between stored float taps and exact taps divided by `√N`.
/// Filters outside it are loaded from their float taps alone.
const FLOAT_EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankFile {
    pub schema_version: u32,
    pub n: usize,
    pub family: String,
    pub kind: String,
    pub parameters: Parameters,
    pub filters: Vec<FilterRecord>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<usize>,
    /// `unit`, `orthogonal` or `custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0_matrix: Option<RationalMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalMatrix {
    pub numerators: Vec<Vec<Number>>,
    pub denominators: Vec<Vec<Number>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterRecord {
    /// `analysis` or `synthesis`.
    pub role: String,
    pub channel: usize,
    pub offset: i64,
    pub taps_float: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps_exact: Option<ExactTaps>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactTaps {
    pub numerators: Vec<Number>,
    pub denominators: Vec<Number>,
    pub sqrt_n_scale: bool,
}

/// A single filter written by the `filter` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterFile {
    pub schema_version: u32,
    pub n: usize,
    pub family: String,
    pub parameters: Parameters,
    pub filter: FilterRecord,
}

fn big_to_number(b: &BigInt) -> Number {
    Number::from_str(&b.to_string()).expect("integer literal is a valid JSON number")
}

fn number_to_big(n: &Number) -> Result<BigInt, CliError> {
    BigInt::from_str(&n.to_string())
        .map_err(|_| CliError::Data(format!("expected an integer, found {n}")))
}

fn split(values: &[Rational]) -> (Vec<Number>, Vec<Number>) {
    values
        .iter()
        .map(|r| (big_to_number(r.numer()), big_to_number(r.denom())))
        .unzip()
}

fn join(nums: &[Number], dens: &[Number]) -> Result<Vec<Rational>, CliError> {
    if nums.len() != dens.len() {
        return Err(CliError::Data(format!(
            "{} numerators but {} denominators",
            nums.len(),
            dens.len()
        )));
    }
    nums.iter()
        .zip(dens)
        .map(|(p, q)| {
            let q = number_to_big(q)?;
            if q == BigInt::from(0) {
                return Err(CliError::Data("zero denominator".into()));
            }
            Ok(Rational::new(number_to_big(p)?, q))
        })
        .collect()
}

impl RationalMatrix {
    pub fn from_rows(rows: &[Vec<Rational>]) -> Self {
        let (numerators, denominators) = rows.iter().map(|r| split(r)).unzip();
        Self {
            numerators,
            denominators,
        }
    }

    pub fn to_rows(&self) -> Result<Vec<Vec<Rational>>, CliError> {
        if self.numerators.len() != self.denominators.len() {
            return Err(CliError::Data("ragged completion matrix".into()));
        }
        self.numerators
            .iter()
            .zip(&self.denominators)
            .map(|(p, q)| join(p, q))
            .collect()
    }
}

impl FilterRecord {
    pub fn from_filter(role: &str, channel: usize, f: &Filter) -> Self {
        Self {
            role: role.into(),
            channel,
            offset: f.offset(),
            taps_float: f.taps_float().to_vec(),
            taps_exact: f.taps_exact().map(|t| {
                let (numerators, denominators) = split(t);
                ExactTaps {
                    numerators,
                    denominators,
                    sqrt_n_scale: true,
                }
            }),
        }
    }

    pub fn to_filter(&self, n: usize, family: Family) -> Result<Filter, CliError> {
        let filter = match &self.taps_exact {
            Some(exact) => {
                if !exact.sqrt_n_scale {
                    return Err(CliError::Data(
                        "exact taps without sqrt_n_scale are not supported".into(),
                    ));
                }
                let taps = join(&exact.numerators, &exact.denominators)?;
                let f = Filter::from_exact(n, self.offset, taps, family)
                    .map_err(|e| CliError::Data(e.to_string()))?;
                if f.len() != self.taps_float.len() {
                    return Err(CliError::Data(format!(
                        "{} channel {}: {} exact taps but {} float taps",
                        self.role,
                        self.channel,
                        f.len(),
                        self.taps_float.len()
                    )));
                }
                let consistent = f
                    .taps_float()
                    .iter()
                    .zip(&self.taps_float)
                    .all(|(a, b)| (a - b).abs() <= FLOAT_EXACT_TOLERANCE * a.abs().max(1.0));
                if consistent {
                    f
                } else {
                    eprintln!(
                        "warning: {} channel {}: float taps disagree with exact taps; using float taps only",
                        self.role, self.channel
                    );
                    Filter::from_float(n, self.offset, self.taps_float.clone(), family)
                        .map_err(|e| CliError::Data(e.to_string()))?
                }
            }
            None => Filter::from_float(n, self.offset, self.taps_float.clone(), family)
                .map_err(|e| CliError::Data(e.to_string()))?,
        };
        if filter.taps_float().iter().any(|x| !x.is_finite()) {
            return Err(CliError::Data("non-finite tap".into()));
        }
        Ok(filter)
    }
}

fn a0_parameters(a0: &A0Completion) -> (String, Option<RationalMatrix>) {
    match a0 {
        A0Completion::UnitRows => ("unit".into(), None),
        A0Completion::OrthogonalRows => ("orthogonal".into(), None),
        A0Completion::Custom(m) => ("custom".into(), Some(RationalMatrix::from_rows(m))),
    }
}

pub fn family_parameters(family: &BankFamily) -> (String, Parameters) {
    match family {
        BankFamily::Haar => ("haar".into(), Parameters::default()),
        BankFamily::Shannon { half_width } => (
            "shannon".into(),
            Parameters {
                half_width: Some(*half_width),
                ..Parameters::default()
            },
        ),
        BankFamily::BSpline { degree, a0 } => {
            let (name, matrix) = a0_parameters(a0);
            (
                "bspline".into(),
                Parameters {
                    degree: Some(*degree),
                    a0: Some(name),
                    a0_matrix: matrix,
                    ..Parameters::default()
                },
            )
        }
        BankFamily::Custom => ("custom".into(), Parameters::default()),
    }
}

impl BankFile {
    pub fn from_bank(bank: &FilterBank) -> Self {
        let (family, parameters) = family_parameters(bank.family());
        let mut filters = Vec::with_capacity(2 * bank.n());
        for (i, f) in bank.analysis().iter().enumerate() {
            filters.push(FilterRecord::from_filter("analysis", i, f));
        }
        for (i, f) in bank.synthesis().iter().enumerate() {
            filters.push(FilterRecord::from_filter("synthesis", i, f));
        }
        Self {
            schema_version: SCHEMA_VERSION,
            n: bank.n(),
            family,
            kind: match bank.kind() {
                BankKind::Orthogonal => "orthogonal".into(),
                BankKind::Biorthogonal => "biorthogonal".into(),
            },
            parameters,
            filters,
        }
    }

    pub fn to_bank(&self) -> Result<FilterBank, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Data(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let n = self.n;
        if n < 2 {
            return Err(CliError::Data(format!("invalid N = {n}")));
        }
        let p = &self.parameters;
        let family = match self.family.as_str() {
            "haar" => BankFamily::Haar,
            "shannon" => BankFamily::Shannon {
                half_width: p
                    .half_width
                    .ok_or_else(|| CliError::Data("shannon bank without half_width".into()))?,
            },
            "bspline" => BankFamily::BSpline {
                degree: p
                    .degree
                    .ok_or_else(|| CliError::Data("bspline bank without degree".into()))?,
                a0: match p.a0.as_deref() {
                    Some("unit") => A0Completion::UnitRows,
                    Some("orthogonal") => A0Completion::OrthogonalRows,
                    Some("custom") => A0Completion::Custom(
                        p.a0_matrix
                            .as_ref()
                            .ok_or_else(|| CliError::Data("custom a0 without a0_matrix".into()))?
                            .to_rows()?,
                    ),
                    other => return Err(CliError::Data(format!("unknown a0 strategy {other:?}"))),
                },
            },
            "custom" => BankFamily::Custom,
            other => return Err(CliError::Data(format!("unknown family {other:?}"))),
        };
        let kind = match self.kind.as_str() {
            "orthogonal" => BankKind::Orthogonal,
            "biorthogonal" => BankKind::Biorthogonal,
            other => return Err(CliError::Data(format!("unknown kind {other:?}"))),
        };
        let mut analysis: Vec<Option<Filter>> = vec![None; n];
        let mut synthesis: Vec<Option<Filter>> = vec![None; n];
        for rec in &self.filters {
            let slot = match rec.role.as_str() {
                "analysis" => &mut analysis,
                "synthesis" => &mut synthesis,
                other => return Err(CliError::Data(format!("unknown filter role {other:?}"))),
            };
            if rec.channel >= n {
                return Err(CliError::Data(format!(
                    "channel {} out of range for N = {n}",
                    rec.channel
                )));
            }
            if slot[rec.channel].is_some() {
                return Err(CliError::Data(format!(
                    "duplicate {} filter for channel {}",
                    rec.role, rec.channel
                )));
            }
            let tag = filter_family(&family, kind, &rec.role, rec.channel);
            slot[rec.channel] = Some(rec.to_filter(n, tag)?);
        }
        let collect = |v: Vec<Option<Filter>>, role: &str| -> Result<Vec<Filter>, CliError> {
            v.into_iter()
                .enumerate()
                .map(|(i, f)| {
                    f.ok_or_else(|| {
                        CliError::Data(format!("missing {role} filter for channel {i}"))
                    })
                })
                .collect()
        };
        let analysis = collect(analysis, "analysis")?;
        let synthesis = collect(synthesis, "synthesis")?;
        FilterBank::from_parts(n, analysis, synthesis, kind, family)
            .map_err(|e| CliError::Data(e.to_string()))
    }
}

/// Family tag each filter carries when the bank is built in memory.
fn filter_family(family: &BankFamily, kind: BankKind, role: &str, channel: usize) -> Family {
    if channel != 0 || (role == "synthesis" && kind == BankKind::Biorthogonal) {
        return Family::Custom;
    }
    match family {
        BankFamily::Haar => Family::Haar,
        BankFamily::Shannon { half_width } => Family::Shannon {
            half_width: *half_width,
        },
        BankFamily::BSpline { degree, .. } => Family::BSpline { degree: *degree },
        BankFamily::Custom => Family::Custom,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("bank data serializes");
    s.push('\n');
    s
}

pub fn read_bank(path: &std::path::Path) -> Result<FilterBank, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let file: BankFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    file.to_bank()
}
