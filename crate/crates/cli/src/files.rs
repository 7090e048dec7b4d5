//! Input documents and atomic report output.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use lpbounds::measure::{ExponentContext, MeasureSpace, WeightedFunction};
use lpbounds::multi::{FamilyKind, FunctionFamily};
use lpbounds::pairwise::PairInput;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A real given either as a JSON number or as a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal(pub f64);

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Decimal;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Decimal, E> {
                Ok(Decimal(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Decimal, E> {
                Ok(Decimal(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Decimal, E> {
                Ok(Decimal(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Decimal, E> {
                v.trim()
                    .parse()
                    .map(Decimal)
                    .map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

fn reals(v: &[Decimal]) -> Vec<f64> {
    v.iter().map(|d| d.0).collect()
}

fn decimals(v: &[f64]) -> Vec<Decimal> {
    v.iter().copied().map(Decimal).collect()
}

/// One function pair on a weighted atom space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub weights: Vec<Decimal>,
    pub f: Vec<Decimal>,
    pub g: Vec<Decimal>,
    pub p: Decimal,
}

/// Several functions on one weighted atom space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub weights: Vec<Decimal>,
    pub functions: Vec<Vec<Decimal>>,
    pub p: Decimal,
}

fn field_error(path: &Path, field: impl fmt::Display, msg: impl fmt::Display) -> CliError {
    CliError::Input(format!("{}: field `{field}`: {msg}", path.display()))
}

fn check_weights(path: &Path, weights: &[Decimal]) -> Result<MeasureSpace, CliError> {
    if weights.is_empty() {
        return Err(field_error(path, "weights", "needs at least one atom"));
    }
    if let Some(i) = weights.iter().position(|w| !(w.0 > 0.0 && w.0.is_finite())) {
        return Err(field_error(
            path,
            format!("weights[{i}]"),
            "must be finite and positive",
        ));
    }
    MeasureSpace::new(reals(weights)).map_err(|e| field_error(path, "weights", e))
}

fn check_function(path: &Path, name: &str, space: &MeasureSpace, v: &[Decimal]) -> Result<WeightedFunction, CliError> {
    if v.len() != space.len() {
        return Err(field_error(
            path,
            name,
            format!("has {} entries, weights has {}", v.len(), space.len()),
        ));
    }
    if let Some(i) = v.iter().position(|x| !(x.0 >= 0.0 && x.0.is_finite())) {
        return Err(field_error(
            path,
            format!("{name}[{i}]"),
            "must be finite and nonnegative",
        ));
    }
    WeightedFunction::new(space, reals(v)).map_err(|e| field_error(path, name, e))
}

fn check_p(path: &Path, p: Decimal) -> Result<ExponentContext, CliError> {
    if !(p.0 > 1.0 && p.0.is_finite()) {
        return Err(field_error(path, "p", format!("{} must exceed 1", p.0)));
    }
    ExponentContext::new(p.0).map_err(|e| field_error(path, "p", e))
}

impl PairFile {
    pub fn from_pair(pair: &PairInput) -> Self {
        Self {
            weights: decimals(pair.f().weights()),
            f: decimals(pair.f().values()),
            g: decimals(pair.g().values()),
            p: Decimal(pair.p()),
        }
    }

    pub fn to_pair(&self, path: &Path) -> Result<PairInput, CliError> {
        let space = check_weights(path, &self.weights)?;
        let f = check_function(path, "f", &space, &self.f)?;
        let g = check_function(path, "g", &space, &self.g)?;
        let ctx = check_p(path, self.p)?;
        PairInput::new(f, g, ctx).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

impl FamilyFile {
    pub fn to_functions(&self, path: &Path) -> Result<(Vec<WeightedFunction>, f64), CliError> {
        let space = check_weights(path, &self.weights)?;
        if self.functions.is_empty() {
            return Err(field_error(path, "functions", "needs at least one function"));
        }
        let fs = self
            .functions
            .iter()
            .enumerate()
            .map(|(j, v)| check_function(path, &format!("functions[{j}]"), &space, v))
            .collect::<Result<_, _>>()?;
        check_p(path, self.p)?;
        Ok((fs, self.p.0))
    }
}

/// A family indexed by `j = 1, 2, …` for the summability table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `f_j = c r^j` on the atoms in `support`.
    Geometric {
        weights: Vec<Decimal>,
        support: Vec<usize>,
        c: Decimal,
        r: Decimal,
    },
    /// `f_j = c j^{-s}` on the atoms in `support`.
    PowerLaw {
        weights: Vec<Decimal>,
        support: Vec<usize>,
        c: Decimal,
        s: Decimal,
    },
    /// `f_j = c r^j` on its own atom.
    DisjointAtoms { c: Decimal, r: Decimal },
    /// The listed functions in order.
    Explicit {
        weights: Vec<Decimal>,
        functions: Vec<Vec<Decimal>>,
    },
}

impl SequenceSpec {
    /// An explicit list is truncated to `n_max` members when longer.
    pub fn to_family(&self, path: &Path, n_max: usize) -> Result<FunctionFamily, CliError> {
        let mut n_max = n_max;
        let kind = match self {
            SequenceSpec::Geometric { weights, support, c, r } => FamilyKind::Geometric {
                space: check_weights(path, weights)?,
                support: support.clone(),
                c: c.0,
                r: r.0,
            },
            SequenceSpec::PowerLaw { weights, support, c, s } => FamilyKind::PowerLaw {
                space: check_weights(path, weights)?,
                support: support.clone(),
                c: c.0,
                s: s.0,
            },
            SequenceSpec::DisjointAtoms { c, r } => FamilyKind::DisjointAtoms { c: c.0, r: r.0 },
            SequenceSpec::Explicit { weights, functions } => {
                let space = check_weights(path, weights)?;
                let fs = functions
                    .iter()
                    .enumerate()
                    .map(|(j, v)| check_function(path, &format!("functions[{j}]"), &space, v))
                    .collect::<Result<Vec<_>, _>>()?;
                n_max = n_max.min(fs.len());
                FamilyKind::Explicit(fs)
            }
        };
        FunctionFamily::new(kind, n_max).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses a JSON document, reporting the line and column of a syntax or
/// schema error.
pub fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

pub enum Document {
    Pair(PairFile),
    Family(FamilyFile),
}

/// A pair file has `f` and `g`; a family file has `functions`.
pub fn read_document(path: &Path) -> Result<Document, CliError> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse(path, &text)?;
    if value.get("functions").is_some() {
        Ok(Document::Family(parse(path, &text)?))
    } else {
        Ok(Document::Pair(parse(path, &text)?))
    }
}

/// Writes next to the target and renames, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Output(format!("stdout: {e}"))),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}
