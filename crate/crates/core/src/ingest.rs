//! CSV ingestion with declarative binarization of protected attributes.
//!
//! A [`BinarizationConfig`] is written in TOML:
//!
//! ```toml
//! missing_values = ["", "?"]
//!
//! [[attribute]]
//! column = "age"
//! rule = "threshold"
//! at_least = 40
//!
//! [[attribute]]
//! column = "race"
//! rule = "value_set"
//! one = ["White"]
//! others = 0
//!
//! [label]
//! column = "class"
//! rule = "value_set"
//! one = [">50K", ">50K."]
//! zero = ["<=50K", "<=50K."]
//!
//! # optional
//! [prediction]
//! column = "pred"
//! rule = "binary"
//! ```
//!
//! Attribute order in the file is attribute order in the lattice.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetBuilder, DatasetView};
use crate::error::{Error, Result};

/// How one raw column becomes a bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    /// Numeric column; `value >= at_least` maps to 1.
    Threshold { at_least: f64 },
    /// Categorical column. Listed values map to 1 or 0; anything else maps
    /// to `others`, or is an error when `others` is unset.
    ValueSet {
        one: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        zero: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        others: Option<u8>,
    },
    /// Already `0`/`1`.
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRule {
    /// Display name; defaults to the column name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub column: String,
    #[serde(flatten)]
    pub rule: Rule,
}

impl ColumnRule {
    pub fn new(column: &str, rule: Rule) -> Self {
        ColumnRule {
            name: None,
            column: column.to_string(),
            rule,
        }
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.column)
    }

    fn apply(&self, value: &str) -> std::result::Result<u8, ()> {
        match &self.rule {
            Rule::Threshold { at_least } => value
                .parse::<f64>()
                .map(|v| u8::from(v >= *at_least))
                .map_err(|_| ()),
            Rule::ValueSet { one, zero, others } => {
                if one.iter().any(|v| v == value) {
                    Ok(1)
                } else if zero.iter().any(|v| v == value) {
                    Ok(0)
                } else {
                    others.ok_or(())
                }
            }
            Rule::Binary => match value {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(()),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if let Rule::ValueSet { others: Some(o), .. } = self.rule {
            if o > 1 {
                return Err(Error::Config(format!(
                    "column {:?}: others must be 0 or 1, got {o}",
                    self.column
                )));
            }
        }
        if let Rule::Threshold { at_least } = self.rule {
            if !at_least.is_finite() {
                return Err(Error::Config(format!("column {:?}: threshold must be finite", self.column)));
            }
        }
        Ok(())
    }
}

fn default_missing() -> Vec<String> {
    vec![String::new(), "?".to_string()]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarizationConfig {
    /// Raw values treated as missing; rows with a missing configured column are dropped.
    #[serde(default = "default_missing")]
    pub missing_values: Vec<String>,
    #[serde(rename = "attribute")]
    pub attributes: Vec<ColumnRule>,
    pub label: ColumnRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction: Option<ColumnRule>,
}

impl BinarizationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: BinarizationConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::Config("at least one [[attribute]] is required".into()));
        }
        self.rules().try_for_each(ColumnRule::validate)
    }

    pub fn attribute_names(&self) -> Vec<String> {
        self.attributes.iter().map(|a| a.display_name().to_string()).collect()
    }

    fn rules(&self) -> impl Iterator<Item = &ColumnRule> {
        self.attributes
            .iter()
            .chain(std::iter::once(&self.label))
            .chain(self.prediction.iter())
    }
}

/// Binary columns `p1..pM` and `label` (plus `prediction` when asked), as
/// written by [`write_csv`].
pub fn identity_config(m: usize, with_prediction: bool) -> BinarizationConfig {
    BinarizationConfig {
        missing_values: default_missing(),
        attributes: (1..=m).map(|j| ColumnRule::new(&format!("p{j}"), Rule::Binary)).collect(),
        label: ColumnRule::new("label", Rule::Binary),
        prediction: with_prediction.then(|| ColumnRule::new("prediction", Rule::Binary)),
    }
}

/// [`identity_config`] sized from a header row: `p1, p2, ...` up to the first
/// gap, plus `prediction` when that column exists.
pub fn identity_config_for_header<'a>(header: impl IntoIterator<Item = &'a str>) -> Result<BinarizationConfig> {
    let cols: Vec<&str> = header.into_iter().map(str::trim).collect();
    let m = (1..).take_while(|j| cols.contains(&format!("p{j}").as_str())).count();
    if m == 0 || !cols.contains(&"label") {
        return Err(Error::Config(
            "no --config given and the header lacks p1.. and label columns".into(),
        ));
    }
    Ok(identity_config(m, cols.contains(&"prediction")))
}

/// [`identity_config_for_header`] applied to the first line of a CSV file.
pub fn sniff_identity_config(path: &Path) -> Result<BinarizationConfig> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers()?.clone();
    identity_config_for_header(headers.iter())
}

fn value_set(one: &[&str], zero: &[&str]) -> Rule {
    Rule::ValueSet {
        one: one.iter().map(|s| s.to_string()).collect(),
        zero: zero.iter().map(|s| s.to_string()).collect(),
        others: None,
    }
}

/// Preset for the UCI Adult census data (`adult.data` + `adult.test` with a header row).
///
/// Four attributes in this order: sex (Male→1), race (White→1, every other
/// group→0), age (≥ 40→1), marital-status (the three `Married-*`
/// statuses→1). The label is income above 50K; the test split's trailing
/// dot is accepted.
pub fn adult_preset() -> BinarizationConfig {
    BinarizationConfig {
        missing_values: default_missing(),
        attributes: vec![
            ColumnRule::new("sex", value_set(&["Male"], &["Female"])),
            ColumnRule::new(
                "race",
                value_set(
                    &["White"],
                    &["Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"],
                ),
            ),
            ColumnRule::new("age", Rule::Threshold { at_least: 40.0 }),
            ColumnRule::new(
                "marital-status",
                value_set(
                    &["Married-civ-spouse", "Married-spouse-absent", "Married-AF-spouse"],
                    &["Never-married", "Divorced", "Separated", "Widowed"],
                ),
            ),
        ],
        label: ColumnRule::new("class", value_set(&[">50K", ">50K."], &["<=50K", "<=50K."])),
        prediction: None,
    }
}

#[derive(Clone, Debug)]
pub struct LoadedData {
    pub data: DatasetView,
    pub attribute_names: Vec<String>,
    pub rows_read: usize,
    pub rows_dropped: usize,
}

pub fn load_csv(path: &Path, cfg: &BinarizationConfig) -> Result<LoadedData> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_reader(file, cfg)
}

pub fn load_reader<R: Read>(reader: R, cfg: &BinarizationConfig) -> Result<LoadedData> {
    cfg.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |rule: &ColumnRule| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == rule.column)
            .ok_or_else(|| Error::Config(format!("column {:?} not found in the header", rule.column)))
    };
    let attr_cols = cfg.attributes.iter().map(column).collect::<Result<Vec<_>>>()?;
    let label_col = column(&cfg.label)?;
    let pred_col = cfg.prediction.as_ref().map(column).transpose()?;

    let m = cfg.attributes.len();
    let mut builder = DatasetBuilder::new(m, pred_col.is_some());
    let mut attrs = vec![0u8; m];
    let (mut rows_read, mut rows_dropped) = (0, 0);
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        let row = rows_read;
        rows_read += 1;
        let used = attr_cols.iter().chain([&label_col]).chain(pred_col.iter());
        if used
            .map(|&c| record.get(c).unwrap_or(""))
            .any(|v| cfg.missing_values.iter().any(|mv| mv == v))
        {
            rows_dropped += 1;
            continue;
        }
        let map = |rule: &ColumnRule, col: usize| -> Result<u8> {
            let value = record.get(col).unwrap_or("");
            rule.apply(value).map_err(|_| Error::Mapping {
                row,
                column: rule.column.clone(),
                value: value.to_string(),
            })
        };
        for ((slot, rule), &col) in attrs.iter_mut().zip(&cfg.attributes).zip(&attr_cols) {
            *slot = map(rule, col)?;
        }
        let y = map(&cfg.label, label_col)?;
        let pred = match (&cfg.prediction, pred_col) {
            (Some(rule), Some(col)) => Some(map(rule, col)?),
            _ => None,
        };
        builder.push(&attrs, y, pred)?;
    }
    Ok(LoadedData {
        data: builder.build()?,
        attribute_names: cfg.attribute_names(),
        rows_read,
        rows_dropped,
    })
}

/// Write `p1..pM,label[,prediction]` rows.
pub fn write_csv<W: Write>(data: &DatasetView, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=data.m()).map(|j| format!("p{j}")).collect();
    header.push("label".into());
    if data.has_predictions() {
        header.push("prediction".into());
    }
    w.write_record(&header)?;
    let digit = |b: u8| if b == 1 { "1" } else { "0" };
    let mut fields: Vec<&str> = Vec::with_capacity(header.len());
    for row in data.rows() {
        fields.clear();
        fields.extend(row.attrs.iter().map(|&a| digit(a)));
        fields.push(digit(row.y_true));
        if let Some(p) = row.y_pred {
            fields.push(digit(p));
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
